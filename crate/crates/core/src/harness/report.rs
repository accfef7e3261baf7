use std::fmt::Write;

use super::eval::{CellReport, EvalReport, TraceRow};
use super::{moving_average, EpisodeRecord, MOVING_AVERAGE_WINDOW};

pub const EPISODE_CSV_HEADER: &str =
    "episode,steps,total_reward,success,final_distance_mm,sim_time_s,init_pos,hole_id";

const CELL_CSV_HEADER: &str =
    "hole_id,init_pos,episodes,successes,success_rate,avg_steps,avg_time_s,max_time_s,avg_reward";

const TRACE_CSV_HEADER: &str =
    "hole_id,init_pos,episode,step,x_mm,y_mm,fx,fy,fz,mx,my,mz,dz,inserted,action";

/// One line per training episode.
pub fn episodes_csv(records: &[EpisodeRecord]) -> String {
    let mut out = String::from(EPISODE_CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.episode,
            r.steps,
            r.total_reward,
            u8::from(r.success),
            r.final_distance_mm,
            r.sim_time_s,
            r.init_pos,
            r.hole_id
        );
    }
    out
}

/// Learning curve with trailing moving averages of reward and steps.
pub fn curve_csv(records: &[EpisodeRecord]) -> String {
    let rewards: Vec<f64> = records.iter().map(|r| r.total_reward).collect();
    let steps: Vec<f64> = records.iter().map(|r| r.steps as f64).collect();
    let ma_r = moving_average(&rewards, MOVING_AVERAGE_WINDOW);
    let ma_s = moving_average(&steps, MOVING_AVERAGE_WINDOW);
    let mut out = format!(
        "episode,total_reward,steps,reward_ma{w},steps_ma{w}\n",
        w = MOVING_AVERAGE_WINDOW
    );
    for (i, r) in records.iter().enumerate() {
        let _ = writeln!(out, "{},{},{},{},{}", r.episode, r.total_reward, r.steps, ma_r[i], ma_s[i]);
    }
    out
}

/// One line per probe of the traced episodes.
pub fn traces_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from(TRACE_CSV_HEADER);
    out.push('\n');
    for t in rows {
        let c = &t.contact;
        let action = t.action.map(|a| a.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            t.hole_id,
            t.init_label,
            t.episode,
            t.step,
            t.peg_xy[0],
            t.peg_xy[1],
            c.fx,
            c.fy,
            c.fz,
            c.mx,
            c.my,
            c.mz,
            c.dz,
            u8::from(c.inserted),
            action
        );
    }
    out
}

fn cell_line(out: &mut String, c: &CellReport) {
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{}",
        c.hole_id,
        c.init_label,
        c.episodes,
        c.successes,
        c.success_rate,
        c.avg_steps,
        c.avg_time_s,
        c.max_time_s,
        c.avg_reward
    );
}

impl EvalReport {
    /// Cells followed by an `all` row; the aggregate has hole id 0.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CELL_CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            cell_line(&mut out, c);
        }
        if let Some(a) = self.aggregate() {
            cell_line(&mut out, &a);
        }
        out
    }

    /// Fixed-width summary: one row per hole and the overall row.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let variant = self.variant.map(|v| format!(" ({v})")).unwrap_or_default();
        let _ = writeln!(out, "method: {}{}", self.method, variant);
        let _ = writeln!(
            out,
            "{:>6} {:>9} {:>9} {:>10} {:>11} {:>11} {:>11}",
            "hole", "episodes", "success%", "avg steps", "avg time s", "max time s", "avg reward"
        );
        let row = |out: &mut String, label: &str, c: &CellReport| {
            let _ = writeln!(
                out,
                "{:>6} {:>9} {:>9.1} {:>10.2} {:>11.2} {:>11.2} {:>11.2}",
                label, c.episodes, c.success_rate, c.avg_steps, c.avg_time_s, c.max_time_s, c.avg_reward
            );
        };
        for c in self.per_hole() {
            row(&mut out, &c.hole_id.to_string(), &c);
        }
        match self.aggregate() {
            Some(a) => row(&mut out, "all", &a),
            None => out.push_str("(no episodes)\n"),
        }
        out
    }
}
