//! Fast invariant suite: skew-adjointness, contraction, noise aggregation,
//! parareal exactness. Used by the CLI `selftest` subcommand.

use crate::field::{FieldState, GridSpec, MaxwellCoefficients};
use crate::noise::{build_basis, increment_field, sample_path};
use crate::field::Component;
use crate::nonlinearity::{DiffusionKind, DriftKind, NonlinearitySpec};
use crate::operator::DiscreteMaxwellOperator;
use crate::parareal::{run, residual, PararealConfig};
use crate::propagator::{FineKind, StepContext};
use crate::rng;
use crate::time_grid::TimeGridSpec;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn random_state(grid: GridSpec, seed: u64, tag: u64) -> FieldState {
    FieldState::from_fn(grid, |comp, i, j| {
        let c = match comp {
            Component::Ez => 0,
            Component::Hx => 1,
            Component::Hy => 2,
        };
        2.0 * rng::uniform(rng::key(seed, tag, c, (i * 1024 + j) as u64)) - 1.0
    })
}

fn check_skew_adjointness() -> CheckResult {
    let grid = GridSpec::new(6).unwrap();
    let coeffs = MaxwellCoefficients::new(1.5, 0.8, 0.0).unwrap();
    let op = DiscreteMaxwellOperator::build(grid, coeffs).unwrap();
    let mut worst: f64 = 0.0;
    for t in 0..40 {
        let u = random_state(grid, 42, 2 * t);
        let v = random_state(grid, 42, 2 * t + 1);
        let mu = op.apply_curl_damped(&u).unwrap();
        let mv = op.apply_curl_damped(&v).unwrap();
        let lhs = op.inner_product(&mu, &v).unwrap() + op.inner_product(&u, &mv).unwrap();
        let scale = op.h_norm(&u).unwrap() * op.h_norm(&v).unwrap();
        worst = worst.max(lhs.abs() / scale);
    }
    CheckResult {
        name: "skew_adjointness",
        passed: worst <= 1e-12,
        detail: format!("max |<Mu,v>+<u,Mv>| / (|u||v|) = {worst:.3e} (tol 1e-12)"),
    }
}

fn check_energy_identity() -> CheckResult {
    let grid = GridSpec::new(6).unwrap();
    let coeffs = MaxwellCoefficients::new(2.0, 1.0, 0.0).unwrap();
    let op = DiscreteMaxwellOperator::build(grid, coeffs).unwrap();
    let mut worst: f64 = 0.0;
    for t in 0..40 {
        let u = random_state(grid, 7, t);
        let mu = op.apply_curl_damped(&u).unwrap();
        let ip = op.inner_product(&mu, &u).unwrap();
        let n = op.h_norm(&u).unwrap();
        worst = worst.max(ip.abs() / (n * n));
    }
    CheckResult {
        name: "energy_identity",
        passed: worst <= 1e-12,
        detail: format!("max |<Mu,u>| / |u|^2 = {worst:.3e} (tol 1e-12)"),
    }
}

/// Weighted operator norm estimate by power iteration on Ŝ(Δ).
fn weighted_op_norm(op: &DiscreteMaxwellOperator, delta: f64) -> f64 {
    let grid = op.grid();
    let mut v = random_state(grid, 99, delta.to_bits());
    let mut norm = 0.0;
    for _ in 0..80 {
        let nv = op.h_norm(&v).unwrap();
        v = v.scale(1.0 / nv);
        v = op.semigroup_apply(delta, &v).unwrap();
        norm = op.h_norm(&v).unwrap();
    }
    norm
}

fn check_contraction() -> CheckResult {
    let grid = GridSpec::new(6).unwrap();
    let mut worst: f64 = 0.0;
    let mut detail = String::new();
    for &sigma in &[0.0, 2.0] {
        let coeffs = MaxwellCoefficients::new(1.0, 1.0, sigma).unwrap();
        let op = DiscreteMaxwellOperator::build(grid, coeffs).unwrap();
        for &delta in &[0.0625, 1.0] {
            let n = weighted_op_norm(&op, delta);
            worst = worst.max(n);
            detail = format!("{detail}sigma={sigma} delta={delta}: |S| = {n:.12}; ");
        }
    }
    CheckResult {
        name: "semigroup_contraction",
        passed: worst <= 1.0 + 1e-10,
        detail: format!("{detail}bound 1 + 1e-10"),
    }
}

fn check_decay_factor() -> CheckResult {
    let grid = GridSpec::new(6).unwrap();
    let mut worst: f64 = 0.0;
    for &sigma in &[0.0, 2.0, 32.0] {
        let coeffs = MaxwellCoefficients::new(1.0, 1.0, sigma).unwrap();
        let op = DiscreteMaxwellOperator::build(grid, coeffs).unwrap();
        for &delta in &[0.00390625f64, 0.0625, 1.0] {
            let u = random_state(grid, 5, (sigma as u64) << 8 | delta.to_bits() >> 56);
            let su = op.semigroup_apply(delta, &u).unwrap();
            let expected = (-sigma * delta).exp() * op.h_norm(&u).unwrap();
            let rel = (op.h_norm(&su).unwrap() - expected).abs() / expected;
            worst = worst.max(rel);
        }
    }
    CheckResult {
        name: "semigroup_decay",
        passed: worst <= 1e-10,
        detail: format!("max relative deviation from e^(-sigma*delta)|u| = {worst:.3e} (tol 1e-10)"),
    }
}

fn check_noise_aggregation() -> CheckResult {
    let grid = GridSpec::new(5).unwrap();
    let basis = build_basis(grid, 3, 2.0).unwrap();
    let delta_ref = 2f64.powi(-7);
    let path = sample_path(&basis, 1234, 0, 1.0, delta_ref).unwrap();
    let mut pass = true;
    for t in 0..100u64 {
        let a = rng::key(777, t, 0, 0) % 128;
        let b = rng::key(777, t, 1, 0) % 128;
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if lo == hi {
            continue;
        }
        let t0 = lo as f64 * delta_ref;
        let t1 = hi as f64 * delta_ref;
        let whole = increment_field(&basis, &path, t0, t1, Component::Ez).unwrap();
        let mut acc = vec![0.0; whole.len()];
        for s in lo..hi {
            let part = increment_field(
                &basis,
                &path,
                s as f64 * delta_ref,
                (s + 1) as f64 * delta_ref,
                Component::Ez,
            )
            .unwrap();
            for (x, p) in acc.iter_mut().zip(&part) {
                *x += p;
            }
        }
        if whole != acc {
            pass = false;
            break;
        }
    }
    CheckResult {
        name: "noise_aggregation",
        passed: pass,
        detail: "window fields equal the ordered sum of single-step fields (bitwise)".into(),
    }
}

fn check_path_determinism() -> CheckResult {
    let grid = GridSpec::new(5).unwrap();
    let basis = build_basis(grid, 4, 2.0).unwrap();
    let a = sample_path(&basis, 9, 3, 1.0, 0.015625).unwrap();
    let b = sample_path(&basis, 9, 3, 1.0, 0.015625).unwrap();
    let eq = (0..basis.n_modes()).all(|k| a.mode_increments(k) == b.mode_increments(k));
    CheckResult {
        name: "path_determinism",
        passed: eq,
        detail: "identical (seed, sample) reproduce identical increments".into(),
    }
}

fn check_parareal_exactness() -> CheckResult {
    let grid = GridSpec::new(4).unwrap();
    let coeffs = MaxwellCoefficients::new(1.0, 1.0, 1.0).unwrap();
    let op = DiscreteMaxwellOperator::build(grid, coeffs).unwrap();
    let basis = build_basis(grid, 2, 2.0).unwrap();
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for (fine_kind, seed) in [(FineKind::Exponential, 21u64), (FineKind::Reference, 22u64)] {
        let time = TimeGridSpec::new(0.75, 0.125, 2, 2).unwrap();
        let path =
            sample_path(&basis, seed, 0, 0.75, super::studies::run_delta_ref(&time, fine_kind))
                .unwrap();
        let u0 = super::studies::initial_state(grid, seed, 0);
        let cfg = PararealConfig { time, k_max: 6, tol: None, fine_kind };
        let r = run(&op, &NonlinearitySpec::new(DriftKind::UPlusCos, DiffusionKind::Sin), &basis, &path, &cfg, &u0)
            .unwrap();
        for k in 0..=6usize {
            for n in 0..=k.min(6) {
                let scale = 1.0 + op.h_norm(&r.reference[n]).unwrap();
                let err = r.errors[k][n].sqrt() / scale;
                worst = worst.max(err);
                if err > 1e-12 {
                    pass = false;
                }
            }
        }
    }
    CheckResult {
        name: "parareal_exactness",
        passed: pass,
        detail: format!("max |u_n^(k) - u_n^ref| / (1+|ref|) over n <= k: {worst:.3e} (tol 1e-12)"),
    }
}

fn check_correction_identity() -> CheckResult {
    let grid = GridSpec::new(4).unwrap();
    let op = DiscreteMaxwellOperator::build(grid, MaxwellCoefficients::unit()).unwrap();
    let basis = build_basis(grid, 2, 2.0).unwrap();
    let time = TimeGridSpec::new(0.5, 0.125, 2, 1).unwrap();
    let path = sample_path(&basis, 31, 0, 0.5, time.dt_fine()).unwrap();
    let nl = NonlinearitySpec::new(DriftKind::UPlusCos, DiffusionKind::Sin);
    let u0 = super::studies::initial_state(grid, 31, 0);
    let cfg = PararealConfig { time, k_max: 3, tol: None, fine_kind: FineKind::Exponential };
    let r = run(&op, &nl, &basis, &path, &cfg, &u0).unwrap();
    let ctx = StepContext::new(&op, &nl, &basis, &path, &time).unwrap();
    let mut pass = true;
    for k in 1..=3usize {
        for n in 1..=4u64 {
            let g_new = ctx.coarse_g(&r.iterates[k][n as usize - 1], n).unwrap();
            let res = residual(&ctx, FineKind::Exponential, &r.iterates[k - 1][n as usize - 1], n)
                .unwrap();
            if r.iterates[k][n as usize] != g_new.add(&res) {
                pass = false;
            }
        }
    }
    CheckResult {
        name: "correction_identity",
        passed: pass,
        detail: "u_n^(k+1) equals G(u^(k+1)) + R(u^(k)) bitwise against recomputation".into(),
    }
}

/// Run every invariant check and return the individual results.
pub fn run_selftest() -> Vec<CheckResult> {
    vec![
        check_skew_adjointness(),
        check_energy_identity(),
        check_contraction(),
        check_decay_factor(),
        check_noise_aggregation(),
        check_path_determinism(),
        check_parareal_exactness(),
        check_correction_identity(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_invariant_checks_pass() {
        for check in run_selftest() {
            assert!(check.passed, "{}: {}", check.name, check.detail);
        }
    }
}
