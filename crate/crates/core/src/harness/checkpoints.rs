/// Rounds `round(10^(k/per_decade))` for `k = 0, 1, ...` up to `horizon`,
/// deduplicated, always ending at `horizon`.
pub fn log_spaced(horizon: usize, per_decade: usize) -> Vec<usize> {
    assert!(horizon >= 1, "horizon must be at least 1");
    assert!(per_decade >= 1, "need at least one checkpoint per decade");
    let mut out: Vec<usize> = Vec::new();
    let mut k = 0u32;
    loop {
        let t = 10f64.powf(k as f64 / per_decade as f64).round() as usize;
        if t > horizon {
            break;
        }
        if out.last() != Some(&t) {
            out.push(t);
        }
        k += 1;
    }
    if out.last() != Some(&horizon) {
        out.push(horizon);
    }
    out
}

/// Strictly increasing and inside `[1, horizon]`.
pub fn validate(checkpoints: &[usize], horizon: usize) -> bool {
    !checkpoints.is_empty()
        && checkpoints.windows(2).all(|w| w[0] < w[1])
        && checkpoints[0] >= 1
        && *checkpoints.last().unwrap() <= horizon
}
