//! Ordered reduction of per-replication checkpoint samples.

/// Values recorded by one trajectory at one checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointSample {
    pub t: usize,
    pub bregman: f64,
    pub simple_regret: f64,
    pub pseudo_regret: f64,
    pub rhat_plus: f64,
    pub u_plus: f64,
    pub event_a: bool,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanSe {
    pub mean: f64,
    /// Sample standard deviation over `√n`; zero for a single replication.
    pub se: f64,
}

/// Aggregates over replications at one checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointStats {
    pub t: usize,
    pub n_reps: usize,
    pub bregman: MeanSe,
    pub bregman_sq: MeanSe,
    pub simple_regret: MeanSe,
    pub pseudo_regret: MeanSe,
    pub rhat_plus_sq: MeanSe,
    pub u_plus_sq: MeanSe,
    pub prob_event_a: f64,
    pub mean_p: Vec<f64>,
    pub mean_sqrt_p: Vec<f64>,
}

/// Pairwise (cascade) summation; the result depends only on the order of
/// `values`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn mean_se(values: &[f64]) -> MeanSe {
    let n = values.len();
    assert!(n >= 1, "mean of an empty sample");
    if values.iter().all(|&v| v == values[0]) {
        return MeanSe {
            mean: values[0],
            se: 0.0,
        };
    }
    let mean = pairwise_sum(values) / n as f64;
    let squares: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&squares) / (n - 1) as f64;
    MeanSe {
        mean,
        se: (var / n as f64).sqrt(),
    }
}

/// `samples[r][k]` is replication `r` at checkpoint `k`; replications must
/// be in index order so the reduction is schedule independent.
pub fn aggregate(samples: &[Vec<CheckpointSample>]) -> Vec<CheckpointStats> {
    let Some(first) = samples.first() else {
        return Vec::new();
    };
    let n_reps = samples.len();
    let mut column = vec![0.0; n_reps];
    let mut stat = |k: usize, f: &dyn Fn(&CheckpointSample) -> f64| {
        for (slot, rep) in column.iter_mut().zip(samples) {
            *slot = f(&rep[k]);
        }
        mean_se(&column)
    };

    let mut out = Vec::with_capacity(first.len());
    for (k, head) in first.iter().enumerate() {
        let d = head.probs.len();
        let bregman = stat(k, &|s| s.bregman);
        let bregman_sq = stat(k, &|s| s.bregman * s.bregman);
        let simple_regret = stat(k, &|s| s.simple_regret);
        let pseudo_regret = stat(k, &|s| s.pseudo_regret);
        let rhat_plus_sq = stat(k, &|s| s.rhat_plus * s.rhat_plus);
        let u_plus_sq = stat(k, &|s| s.u_plus * s.u_plus);
        let prob_event_a = stat(k, &|s| if s.event_a { 1.0 } else { 0.0 }).mean;
        let mean_p = (0..d).map(|i| stat(k, &|s| s.probs[i]).mean).collect();
        let mean_sqrt_p = (0..d).map(|i| stat(k, &|s| s.probs[i].sqrt()).mean).collect();
        out.push(CheckpointStats {
            t: head.t,
            n_reps,
            bregman,
            bregman_sq,
            simple_regret,
            pseudo_regret,
            rhat_plus_sq,
            u_plus_sq,
            prob_event_a,
            mean_p,
            mean_sqrt_p,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(t: usize, bregman: f64, pseudo: f64, rhat: f64, event_a: bool, p0: f64) -> CheckpointSample {
        CheckpointSample {
            t,
            bregman,
            simple_regret: 0.3 * (1.0 - p0),
            pseudo_regret: pseudo,
            rhat_plus: rhat,
            u_plus: 0.0,
            event_a,
            probs: vec![p0, 1.0 - p0],
        }
    }

    #[test]
    fn pairwise_sum_matches_naive_on_small_integers() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn three_hand_built_trajectories() {
        let samples = vec![
            vec![sample(1, 1.0, 0.0, 0.0, true, 0.5), sample(10, 0.5, 1.0, 2.0, true, 0.75)],
            vec![sample(1, 2.0, 0.3, 1.0, false, 0.5), sample(10, 0.25, 1.5, 0.0, false, 0.5)],
            vec![sample(1, 3.0, 0.0, 0.0, true, 0.5), sample(10, 0.75, 2.0, 1.0, true, 0.25)],
        ];
        let stats = aggregate(&samples);
        assert_eq!(stats.len(), 2);
        let a = &stats[0];
        assert_eq!((a.t, a.n_reps), (1, 3));
        assert!((a.bregman.mean - 2.0).abs() < 1e-12);
        // sample variance 1, se = 1/√3
        assert!((a.bregman.se - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!((a.bregman_sq.mean - 14.0 / 3.0).abs() < 1e-12);
        assert!((a.pseudo_regret.mean - 0.1).abs() < 1e-12);
        assert!((a.prob_event_a - 2.0 / 3.0).abs() < 1e-12);
        assert!((a.rhat_plus_sq.mean - 1.0 / 3.0).abs() < 1e-12);

        let b = &stats[1];
        assert!((b.bregman.mean - 0.5).abs() < 1e-12);
        assert!((b.bregman.se - (0.0625f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((b.pseudo_regret.mean - 1.5).abs() < 1e-12);
        assert!((b.pseudo_regret.se - (0.25f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((b.rhat_plus_sq.mean - 5.0 / 3.0).abs() < 1e-12);
        assert!((b.mean_p[0] - 0.5).abs() < 1e-12);
        let sqrt_mean = (0.75f64.sqrt() + 0.5f64.sqrt() + 0.25f64.sqrt()) / 3.0;
        assert!((b.mean_sqrt_p[0] - sqrt_mean).abs() < 1e-12);
        assert!(b.bregman_sq.mean >= b.bregman.mean * b.bregman.mean);
    }

    #[test]
    fn identical_replications_have_zero_error() {
        let s = vec![sample(5, 0.7, 1.2, 0.4, true, 0.9)];
        let stats = aggregate(&[s.clone(), s]);
        assert_eq!(stats[0].bregman.se, 0.0);
        assert_eq!(stats[0].pseudo_regret.se, 0.0);
        assert_eq!(stats[0].n_reps, 2);
    }
}
