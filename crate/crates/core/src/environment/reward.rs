use super::Outcome;

/// Terminal reward for an episode ending in `outcome` at distance `d`,
/// having started at `d0`, with boundary `limit`.
///
/// Non-terminal steps never come here; they pay `-1`. The result is
/// clamped to `[-r_foundhole, r_foundhole]`, which also covers the
/// degenerate `d0 >= limit` case.
pub fn compute_reward(outcome: Outcome, d: f64, d0: f64, limit: f64, r_foundhole: f64) -> f64 {
    if outcome == Outcome::Found {
        return r_foundhole;
    }
    if d <= d0 {
        return 0.0;
    }
    let span = limit - d0;
    if span <= 0.0 {
        log::warn!("start distance {d0} mm is not inside the limit {limit} mm; clamping reward");
        return -r_foundhole;
    }
    (-r_foundhole * (d - d0) / span).max(-r_foundhole)
}
