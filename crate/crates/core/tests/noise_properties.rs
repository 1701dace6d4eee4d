//! Statistical and structural properties of the Q-Wiener sampler: Gaussian
//! moments of the increments, variance of mode projections, bitwise
//! aggregation over dyadic windows, and counter independence.

use parawell::{build_basis, increment_field, sample_path, Component, GridSpec};
use proptest::prelude::*;

#[test]
fn increment_variance_matches_delta_ref() {
    // 10^4 draws of one-mode increments: sample variance within 10% of the
    // step size (the estimator's relative sd is sqrt(2/n) ≈ 1.4%).
    let grid = GridSpec::new(4).unwrap();
    let basis = build_basis(grid, 1, 2.0).unwrap();
    let delta_ref = 2f64.powi(-8);
    let draws = 10_000usize;
    let path = sample_path(&basis, 314159, 0, draws as f64 * delta_ref, delta_ref).unwrap();
    let incr = path.mode_increments(0);
    assert_eq!(incr.len(), draws);
    let mean: f64 = incr.iter().sum::<f64>() / draws as f64;
    let var: f64 = incr.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (draws as f64 - 1.0);
    let rel = (var - delta_ref).abs() / delta_ref;
    assert!(rel <= 0.10, "variance {var:e} vs delta_ref {delta_ref:e} (rel {rel:.3})");
}

#[test]
fn mean_of_mode_projection_is_small() {
    // Mean of ΔW projected on mode (1,1) over 10^4 independent samples:
    // |mean| <= 4·sqrt(λ·delta_ref / 10^4) with λ = 1/4.
    let grid = GridSpec::new(4).unwrap();
    let basis = build_basis(grid, 1, 2.0).unwrap();
    let delta_ref = 2f64.powi(-8);
    let lambda: f64 = 0.25;
    let draws = 10_000u64;
    let mut sum = 0.0;
    for s in 0..draws {
        let path = sample_path(&basis, 2718, s, delta_ref, delta_ref).unwrap();
        sum += lambda.sqrt() * path.mode_increments(0)[0];
    }
    let mean = sum / draws as f64;
    let bound = 4.0 * (lambda * delta_ref / draws as f64).sqrt();
    assert!(mean.abs() <= bound, "mean {mean:e} exceeds {bound:e}");
}

#[test]
fn mode_projection_variance_within_three_standard_errors() {
    // Var(sqrt(λ)·Δβ) = λ·Δt; the variance estimator concentrates with
    // sd ≈ λΔt·sqrt(2/n).
    let grid = GridSpec::new(4).unwrap();
    let basis = build_basis(grid, 2, 2.0).unwrap();
    let delta_ref = 2f64.powi(-6);
    let draws = 20_000usize;
    let path = sample_path(&basis, 99, 0, draws as f64 * delta_ref, delta_ref).unwrap();
    for (k, mode) in basis.modes().iter().enumerate() {
        let lambda = mode.lambda;
        let target = lambda * delta_ref;
        let incr = path.mode_increments(k);
        let var: f64 =
            incr.iter().map(|x| lambda * x * x).sum::<f64>() / draws as f64;
        let se = target * (2.0 / draws as f64).sqrt();
        assert!(
            (var - target).abs() <= 3.0 * se,
            "mode ({}, {}): var {var:e} vs {target:e} (3 se = {:e})",
            mode.m,
            mode.n,
            3.0 * se
        );
    }
}

#[test]
fn distinct_modes_are_uncorrelated() {
    let grid = GridSpec::new(4).unwrap();
    let basis = build_basis(grid, 2, 2.0).unwrap();
    let delta_ref = 2f64.powi(-6);
    let draws = 20_000usize;
    let path = sample_path(&basis, 4242, 0, draws as f64 * delta_ref, delta_ref).unwrap();
    let a = path.mode_increments(0);
    let b = path.mode_increments(3);
    let corr: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
        / (draws as f64 * delta_ref);
    // Correlation estimator sd ≈ 1/sqrt(n).
    assert!(corr.abs() <= 4.0 / (draws as f64).sqrt(), "cross-mode correlation {corr:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn window_equals_ordered_sum_of_singles(
        seed in any::<u64>(),
        sample in 0u64..4,
        start in 0u64..48,
        len in 1u64..16,
    ) {
        let grid = GridSpec::new(4).unwrap();
        let basis = build_basis(grid, 2, 2.0).unwrap();
        let delta_ref = 2f64.powi(-6);
        let path = sample_path(&basis, seed, sample, 1.0, delta_ref).unwrap();
        let t0 = start as f64 * delta_ref;
        let t1 = (start + len) as f64 * delta_ref;
        let whole = increment_field(&basis, &path, t0, t1, Component::Hx).unwrap();
        let mut acc = vec![0.0; whole.len()];
        for s in start..start + len {
            let part = increment_field(
                &basis,
                &path,
                s as f64 * delta_ref,
                (s + 1) as f64 * delta_ref,
                Component::Hx,
            )
            .unwrap();
            for (a, p) in acc.iter_mut().zip(&part) {
                *a += p;
            }
        }
        prop_assert_eq!(whole, acc);
    }

    #[test]
    fn regeneration_is_bit_identical(seed in any::<u64>(), sample in any::<u64>()) {
        let grid = GridSpec::new(3).unwrap();
        let basis = build_basis(grid, 2, 1.5).unwrap();
        let a = sample_path(&basis, seed, sample, 0.5, 0.0625).unwrap();
        let b = sample_path(&basis, seed, sample, 0.5, 0.0625).unwrap();
        for k in 0..basis.n_modes() {
            prop_assert_eq!(a.mode_increments(k), b.mode_increments(k));
        }
    }

    #[test]
    fn off_lattice_windows_are_always_rejected(
        seed in any::<u64>(),
        num in 1u64..64,
    ) {
        let grid = GridSpec::new(3).unwrap();
        let basis = build_basis(grid, 1, 2.0).unwrap();
        let path = sample_path(&basis, seed, 0, 1.0, 0.125).unwrap();
        // Any endpoint strictly between lattice points must be refused.
        let t1 = (num as f64 + 0.5) * 0.125 / 64.0;
        prop_assume!((t1 / 0.125).fract() != 0.0);
        prop_assert!(increment_field(&basis, &path, 0.0, t1, Component::Ez).is_err());
    }
}
