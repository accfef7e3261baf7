//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};

use pegsearch::agent::{boltzmann_probabilities, AgentConfig, ReplayBuffer, Transition};
use pegsearch::environment::{
    compute_reward, is_inserted, make_wall, EnvConfig, GeometryRanges, Outcome, StateVariant, WallModel,
};
use pegsearch::harness::{
    curve_csv, episodes_csv, evaluate, moving_average, run_baseline, saliency_report, traces_csv, train,
    Baseline, EvalOutput, EvalSettings, SaliencyReport, TrainConfig, TrainOutput, DEFAULT_SPIRAL_RINGS,
    MOVING_AVERAGE_WINDOW,
};
use pegsearch::neuralnet::{Network, Q_LAYER_SIZES};
use pegsearch::parallel::{self, Execution};
use pegsearch::rng::SimRng;
use pegsearch::strategies::DEFAULT_CHAMFER_MARGIN_MM;

const SEEDS: [u64; 3] = [1, 2, 3];
const TRAIN_HOLE: usize = 1;
const WALL_SEED: u64 = 1;
const EPISODES_PER_CELL: usize = 10;

struct Outcomes {
    lines: Vec<String>,
    failed: usize,
}

impl Outcomes {
    fn record(&mut self, n: usize, name: &str, pass: bool, detail: String) {
        let line = format!("[{}] {n:>2}. {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        println!("{line}");
        self.lines.push(line);
        if !pass {
            self.failed += 1;
        }
    }
}

struct Run {
    variant: StateVariant,
    seed: u64,
    out: TrainOutput,
    elapsed: Duration,
}

impl Run {
    fn ma(&self) -> Vec<f64> {
        let r: Vec<f64> = self.out.records.iter().map(|r| r.total_reward).collect();
        moving_average(&r, MOVING_AVERAGE_WINDOW)
    }

    /// First episode (1-based) whose full-window moving average exceeds 80.
    fn first_above_80(&self) -> Option<usize> {
        self.ma()
            .iter()
            .enumerate()
            .skip(MOVING_AVERAGE_WINDOW - 1)
            .find(|(_, &m)| m > 80.0)
            .map(|(i, _)| i + 1)
    }

    fn converged(&self) -> bool {
        self.ma().last().is_some_and(|&m| m > 80.0)
    }
}

fn unseen_holes(wall: &WallModel) -> Vec<usize> {
    wall.hole_ids().filter(|&h| h != TRAIN_HOLE).collect()
}

fn settings() -> EvalSettings {
    EvalSettings {
        episodes_per_cell: EPISODES_PER_CELL,
        ..EvalSettings::default()
    }
}

fn loss(net: &Network, x: &[f64], a: usize, y: f64) -> f64 {
    let q = net.forward(x).unwrap()[a];
    0.5 * (q - y) * (q - y)
}

fn gradient_check() -> f64 {
    let h = 1e-6;
    let mut rng = SimRng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let mut net = Network::init(&Q_LAYER_SIZES, 500 + i).unwrap();
        for p in net.params_mut() {
            *p += rng.random_range(-0.1..0.1);
        }
        let x: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = rng.random_range(0..4);
        let y = rng.random_range(-50.0..50.0);
        let analytic = net.backward(&x, a, y).unwrap().0;
        let (mut diff2, mut norm2) = (0.0, 0.0);
        for (k, &a_k) in analytic.iter().enumerate() {
            let orig = net.params()[k];
            net.params_mut()[k] = orig + h;
            let up = loss(&net, &x, a, y);
            net.params_mut()[k] = orig - h;
            let down = loss(&net, &x, a, y);
            net.params_mut()[k] = orig;
            let numeric = (up - down) / (2.0 * h);
            diff2 += (a_k - numeric).powi(2);
            norm2 += a_k.powi(2).max(numeric.powi(2));
        }
        worst = worst.max(diff2.sqrt() / norm2.sqrt().max(1e-12));
    }
    worst
}

fn pooled_success(outs: &[&EvalOutput]) -> (f64, f64) {
    let cells: Vec<_> = outs.iter().flat_map(|o| o.report.cells.iter()).collect();
    let n: usize = cells.iter().map(|c| c.episodes).sum();
    let ok: usize = cells.iter().map(|c| c.successes).sum();
    let steps: f64 = cells.iter().map(|c| c.avg_steps * c.episodes as f64).sum();
    (100.0 * ok as f64 / n as f64, steps / n as f64)
}

fn mean_shares(reports: &[&SaliencyReport]) -> [f64; 6] {
    let mut m = [0.0; 6];
    for r in reports {
        for (mi, s) in m.iter_mut().zip(r.aggregate.shares()) {
            *mi += s / reports.len() as f64;
        }
    }
    m
}

#[test]
fn acceptance() {
    let mut o = Outcomes { lines: Vec::new(), failed: 0 };
    let env = EnvConfig::default();

    // 1. Reward cases.
    let r = env.r_foundhole;
    let got = [
        compute_reward(Outcome::Found, 2.0, 3.0, 4.0, r),
        compute_reward(Outcome::MaxSteps, 2.0, 3.0, 4.0, r),
        compute_reward(Outcome::BoundaryExit, 4.0, 3.0, 4.0, r),
        compute_reward(Outcome::MaxSteps, 3.5, 3.0, 4.0, r),
    ];
    o.record(1, "reward cases", got == [100.0, 0.0, -100.0, -50.0], format!("{got:?}"));

    // 2. Boltzmann probabilities.
    let p = boltzmann_probabilities(&[1.0, 0.0, 0.0, 0.0], 1.0).unwrap();
    let want = [0.4754, 0.1749, 0.1749, 0.1749];
    let err_ref = p.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let u = boltzmann_probabilities(&[1000.0; 4], 1.0).unwrap();
    let err_uniform = u.iter().map(|x| (x - 0.25).abs()).fold(0.0, f64::max);
    let q = [0.3, -1.2, 2.5, 0.7];
    let base = boltzmann_probabilities(&q, 0.7).unwrap();
    let shifted = boltzmann_probabilities(&q.map(|x| x + 123.4), 0.7).unwrap();
    let err_shift = base.iter().zip(shifted).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    o.record(
        2,
        "Boltzmann probabilities",
        err_ref < 1e-4 && err_uniform < 1e-12 && err_shift < 1e-12,
        format!("ref err {err_ref:.1e}, uniform err {err_uniform:.1e}, shift err {err_shift:.1e}"),
    );

    // 3. Gradient check.
    let worst = gradient_check();
    o.record(3, "gradient check", worst < 1e-5, format!("worst relative error {worst:.2e} over 100 nets"));

    // 4. Replay FIFO.
    let cap = AgentConfig::default().buffer_capacity;
    let mut buf = ReplayBuffer::new(cap);
    for i in 0..=cap {
        buf.push(Transition {
            state: [i as f64; 6],
            action: i % 4,
            reward: -1.0,
            next_state: [0.0; 6],
            done: false,
        });
    }
    let first = buf.iter().next().map(|t| t.state[0]);
    let last = buf.iter().last().map(|t| t.state[0]);
    o.record(
        4,
        "replay FIFO",
        cap == 10_000 && buf.len() == cap && first == Some(1.0) && last == Some(cap as f64),
        format!("capacity {cap}, len {}, oldest {first:?}, newest {last:?}", buf.len()),
    );

    // 5. Insertion truth table.
    let table = [
        (10.0, 8.0, true),
        (10.0, 4.0, false),
        (25.0, 8.0, false),
        (25.0, 4.0, false),
    ];
    let ok = table
        .iter()
        .all(|&(f, d, want)| is_inserted(-f, d, &env) == want && is_inserted(f, d, &env) == want);
    o.record(5, "insertion predicate", ok, "four |Fz|/Dz quadrants".into());

    // Training runs for 6 to 12.
    let wall = make_wall(13, WALL_SEED, &GeometryRanges::default()).unwrap();
    let jobs: Vec<(StateVariant, u64)> = [StateVariant::S1, StateVariant::S2]
        .into_iter()
        .flat_map(|v| SEEDS.map(|s| (v, s)))
        .collect();
    let runs: Vec<Run> = parallel::map(Execution::Parallel, &jobs, |&(variant, seed)| {
        let cfg = TrainConfig { variant, seed, hole_id: TRAIN_HOLE, ..TrainConfig::default() };
        let t = Instant::now();
        let out = train(&wall, &cfg).unwrap();
        Run { variant, seed, out, elapsed: t.elapsed() }
    });

    // 6. Convergence.
    let s1: Vec<&Run> = runs.iter().filter(|r| r.variant == StateVariant::S1).collect();
    let s2: Vec<&Run> = runs.iter().filter(|r| r.variant == StateVariant::S2).collect();
    let hits: Vec<Option<usize>> = s1.iter().map(|r| r.first_above_80()).collect();
    let slowest = s1.iter().map(|r| r.elapsed).max().unwrap();
    let n_hit = hits.iter().filter(|h| h.is_some()).count();
    o.record(
        6,
        "training convergence",
        n_hit >= 2 && slowest < Duration::from_secs(300),
        format!("s1 first episode with MA10 > 80 per seed {hits:?}; slowest seed {slowest:.1?}"),
    );

    // 7. Generalization on unseen holes.
    let holes = unseen_holes(&wall);
    let starts: Vec<usize> = (1..=8).collect();
    let st = settings();
    let eval = |r: &Run| evaluate(&r.out.checkpoint, &wall, &holes, &starts, r.variant, &st).unwrap();
    let evals: Vec<EvalOutput> = runs.iter().map(eval).collect();
    let eval_of = |r: &Run| &evals[runs.iter().position(|x| std::ptr::eq(x, r)).unwrap()];
    let s1_conv: Vec<&Run> = s1.iter().copied().filter(|r| r.converged()).collect();
    let s2_conv: Vec<&Run> = s2.iter().copied().filter(|r| r.converged()).collect();
    let conv_evals: Vec<&EvalOutput> = s1_conv.iter().map(|r| eval_of(r)).collect();
    let (dqn_success, dqn_steps) = if conv_evals.is_empty() { (0.0, f64::INFINITY) } else { pooled_success(&conv_evals) };
    o.record(
        7,
        "generalization",
        !conv_evals.is_empty() && holes.len() >= 8 && dqn_success >= 90.0,
        format!(
            "converged s1 seeds {:?}, {} unseen holes x {} starts x {EPISODES_PER_CELL}: {dqn_success:.1}%",
            s1_conv.iter().map(|r| r.seed).collect::<Vec<_>>(),
            holes.len(),
            starts.len()
        ),
    );

    // 8. s1 vs s2.
    let mean = |rs: &[&Run]| rs.iter().map(|r| pooled_success(&[eval_of(r)]).0).sum::<f64>() / rs.len() as f64;
    let (m1, m2) = (mean(&s1), mean(&s2));
    o.record(8, "s1 vs s2", m1 >= m2, format!("seed-averaged success s1 {m1:.1}% vs s2 {m2:.1}%"));

    // 9. Spiral baseline.
    let spiral = run_baseline(Baseline::Spiral { rings: DEFAULT_SPIRAL_RINGS }, &wall, &holes, &starts, &st).unwrap();
    let (sp_success, sp_steps) = pooled_success(&[&spiral]);
    let all_found = spiral.report.cells.iter().all(|c| c.success_rate == 100.0);
    o.record(
        9,
        "spiral baseline",
        all_found && sp_steps > dqn_steps,
        format!("success {sp_success:.1}%, avg steps {sp_steps:.2} vs DQN {dqn_steps:.2}"),
    );

    // 10. Moment baseline.
    let moment =
        run_baseline(Baseline::Moment { margin_mm: DEFAULT_CHAMFER_MARGIN_MM }, &wall, &holes, &starts, &st).unwrap();
    let (mo_success, _) = pooled_success(&[&moment]);
    o.record(
        10,
        "moment baseline",
        mo_success <= dqn_success - 30.0,
        format!("moment {mo_success:.1}% vs DQN {dqn_success:.1}% (bias {} N·mm)", env.moment_bias_y_nmm),
    );

    // 11. Saliency.
    let sal_settings = EvalSettings { episodes_per_cell: 2, ..settings() };
    let sal = |r: &Run| saliency_report(&r.out.checkpoint, &wall, &holes, &starts, &sal_settings).unwrap();
    let sal1: Vec<SaliencyReport> = s1_conv.iter().map(|r| sal(r)).collect();
    let sal2: Vec<SaliencyReport> = s2_conv.iter().map(|r| sal(r)).collect();
    let (sh1, sh2) = (mean_shares(&sal1.iter().collect::<Vec<_>>()), mean_shares(&sal2.iter().collect::<Vec<_>>()));
    let dz_max = sh1.iter().all(|&s| s <= sh1[5]);
    let ratio = sh1[5] / sh2[5];
    o.record(
        11,
        "saliency",
        !sal1.is_empty() && !sal2.is_empty() && dz_max && ratio >= 1.2,
        format!(
            "s1 shares {:?}, Dz/Mz share ratio {ratio:.2}",
            sh1.map(|s| (s * 1000.0).round() / 10.0)
        ),
    );

    // 12. Determinism.
    let r0 = &runs[0];
    let cfg = TrainConfig { variant: r0.variant, seed: r0.seed, hole_id: TRAIN_HOLE, ..TrainConfig::default() };
    let again = train(&wall, &cfg).unwrap();
    let seq = EvalSettings { execution: Execution::Sequential, trace_episodes: 1, ..settings() };
    let traced = |ck| evaluate(ck, &wall, &holes, &starts, r0.variant, &seq).unwrap();
    let (e1, e2) = (traced(&r0.out.checkpoint), traced(&again.checkpoint));
    let identical = r0.out.checkpoint.to_bytes() == again.checkpoint.to_bytes()
        && episodes_csv(&r0.out.records) == episodes_csv(&again.records)
        && curve_csv(&r0.out.records) == curve_csv(&again.records)
        && e1.report.to_csv() == e2.report.to_csv()
        && e1.report.to_csv() == evals[0].report.to_csv()
        && traces_csv(&e1.traces) == traces_csv(&e2.traces)
        && sal(r0).to_csv() == sal(r0).to_csv();
    o.record(12, "determinism", identical, "checkpoint, logs, reports, traces and saliency rerun byte-identical".into());

    println!("{} of 12 criteria passed", 12 - o.failed);
    assert_eq!(o.failed, 0, "failed criteria:\n{}", o.lines.join("\n"));
}
