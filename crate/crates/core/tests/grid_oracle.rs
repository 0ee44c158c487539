//! Two-arm solver outputs against a brute-force maximizer of
//! `⟨p, λ⟩ - Ψ(p)` on a 1e-6 grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tsallis_core::policy::{learning_rate, PolicyState};
use tsallis_core::solve_ftrl;

const GRID_STEP: f64 = 1e-6;

/// Returns the maximizing first coordinate.
fn grid_argmax(lambda: [f64; 2]) -> f64 {
    let steps = (1.0 / GRID_STEP).round() as usize;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for k in 0..=steps {
        let p1 = k as f64 * GRID_STEP;
        let p2 = 1.0 - p1;
        let value = p1 * lambda[0] + p2 * lambda[1] + 4.0 * (p1.sqrt() + p2.sqrt());
        if value > best.0 {
            best = (value, p1);
        }
    }
    best.1
}

#[test]
fn fifty_random_two_arm_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..50 {
        let eta: f64 = rng.random_range(0.01..1.0);
        let l = [rng.random_range(0.0..30.0), rng.random_range(0.0..30.0)];
        let p = solve_ftrl(eta, &l).unwrap().point;
        let p1 = grid_argmax([-eta * l[0], -eta * l[1]]);
        assert!(
            (p[0] - p1).abs() <= 1e-4 && (p[1] - (1.0 - p1)).abs() <= 1e-4,
            "case {case}: solver {:?} vs grid {p1}",
            p.probs()
        );
    }
}

#[test]
fn second_round_of_hand_trace_matches_grid() {
    // α = 0.5, round 1 plays arm 2 with loss 1 from p_1 = (1/2, 1/2)
    let mut state = PolicyState::new(2, 0.5).unwrap();
    state.step_with_uniform(&[0.0, 1.0], 0.75).unwrap();
    assert_eq!(state.round(), 2);
    let p2 = state.point();
    let eta = learning_rate(0.5, 2);
    let l = state.cumulative();
    let p1 = grid_argmax([-eta * l[0], -eta * l[1]]);
    assert!((p2[0] - p1).abs() <= 1e-4, "{} vs {p1}", p2[0]);
    assert!(p2[0] > 0.5);
}
