//! End-to-end optimizer checks on a problem with a known Pareto front.
//!
//! `f = (x^2, (x-2)^2)` has the Pareto set `x in [0, 2]` and front
//! `f2 = (sqrt(f1) - 2)^2` for `f1 in [0, 4]`.

use notgate::mocma::{evolve, hypervolume_2d, EvolveConfig};

fn bi_objective(x: &[f64]) -> Vec<f64> {
    vec![x[0] * x[0], (x[0] - 2.0) * (x[0] - 2.0)]
}

/// Exact hypervolume of the continuous front with reference (5, 5):
/// 25 - int_0^4 (2 - sqrt(u))^2 du = 25 - 8/3.
const TRUE_HV: f64 = 25.0 - 8.0 / 3.0;

#[test]
fn archive_approaches_the_analytic_front() {
    let mut config = EvolveConfig::new(20, 200, vec![-5.0], vec![5.0]);
    config.reference = Some([5.0, 5.0]);
    let result = evolve(bi_objective, &config, 7).unwrap();

    let front: Vec<[f64; 2]> = result
        .archive
        .entries()
        .iter()
        .map(|e| [e.f[0], e.f[1]])
        .filter(|f| f[0] < 5.0 && f[1] < 5.0)
        .collect();
    assert!(front.len() > 50, "archive too small: {}", front.len());

    // every archive point with f1 <= 4 sits within 0.05 of the analytic front
    let mut worst = 0.0_f64;
    for f in &front {
        if f[0] <= 4.0 {
            let expected = (2.0 - f[0].sqrt()).powi(2);
            worst = worst.max((f[1] - expected).abs());
        }
    }
    assert!(worst <= 0.05, "front deviates from analytic curve by {worst}");

    let hv = hypervolume_2d(&front, [5.0, 5.0]).unwrap();
    assert!(
        hv / TRUE_HV >= 0.99,
        "hypervolume fraction {:.5}",
        hv / TRUE_HV
    );
}

#[test]
fn history_tracks_progress() {
    let mut config = EvolveConfig::new(10, 50, vec![-5.0], vec![5.0]);
    config.reference = Some([5.0, 5.0]);
    let result = evolve(bi_objective, &config, 3).unwrap();
    assert_eq!(result.history.len(), 50);
    let first = &result.history[0];
    let last = &result.history[49];
    assert!(last.hypervolume >= first.hypervolume);
    assert!(last.best_f1 <= first.best_f1 + 1e-12);
    assert!(result.history.iter().all(|h| h.hypervolume.is_finite()));
}
