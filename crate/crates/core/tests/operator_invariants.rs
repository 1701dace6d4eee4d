//! Operator-level invariants: skew-adjointness in the weighted inner
//! product, the damped adjoint identity checked against the assembled
//! matrix, contraction of the cached semigroup, and agreement of the Padé
//! exponential with an independent SVD-based rotation formula.

use nalgebra::{DMatrix, DVector};
use parawell::{DiscreteMaxwellOperator, FieldState, GridSpec, MaxwellCoefficients};

fn random_state(grid: GridSpec, seed: u64) -> FieldState {
    // Small deterministic pseudo-random fields; no external RNG needed.
    let mut z = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
    let mut next = move || {
        z ^= z >> 12;
        z ^= z << 25;
        z ^= z >> 27;
        (z.wrapping_mul(0x2545F4914F6CDD1D) >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    FieldState::from_fn(grid, |_, _, _| next())
}

/// Diagonal of the weighted mass matrix in flat state order.
fn weight_diagonal(grid: GridSpec, coeffs: &MaxwellCoefficients) -> DVector<f64> {
    let dx2 = grid.dx() * grid.dx();
    let mut w = DVector::zeros(grid.dof());
    for k in 0..grid.n_ez() {
        w[k] = dx2 * coeffs.eps;
    }
    for k in grid.n_ez()..grid.dof() {
        w[k] = dx2 * coeffs.mu;
    }
    w
}

/// Independent semigroup route: in weighted coordinates the operator is an
/// exact 2x2 anti-diagonal block [[0, S], [-S^T, 0]]; with S = U Σ V^T the
/// flow rotates paired singular directions by angle t·Σ and freezes the
/// orthogonal complements.
fn semigroup_oracle(op: &DiscreteMaxwellOperator, delta: f64, u: &FieldState) -> FieldState {
    let grid = op.grid();
    let coeffs = op.coeffs();
    let w = weight_diagonal(grid, &coeffs);
    let n1 = grid.n_ez();
    let d = grid.dof();

    // S block of W^{1/2} M W^{-1/2}.
    let m = op.m_matrix();
    let mut s = DMatrix::<f64>::zeros(n1, d - n1);
    for i in 0..n1 {
        for j in n1..d {
            s[(i, j - n1)] = w[i].sqrt() * m[(i, j)] / w[j].sqrt();
        }
    }
    let svd = s.svd(true, true);
    let u_mat = svd.u.as_ref().expect("left singular vectors");
    let v_t = svd.v_t.as_ref().expect("right singular vectors");
    let sing = &svd.singular_values;

    // Weighted coordinates of the state.
    let mut x = DVector::<f64>::zeros(n1);
    let mut y = DVector::<f64>::zeros(d - n1);
    for i in 0..n1 {
        x[i] = w[i].sqrt() * u.as_slice()[i];
    }
    for j in 0..d - n1 {
        y[j] = w[n1 + j].sqrt() * u.as_slice()[n1 + j];
    }

    let a = u_mat.transpose() * &x;
    let b = v_t * &y;
    let x_perp = &x - u_mat * &a;
    let y_perp = &y - v_t.transpose() * &b;

    let mut a_t = DVector::<f64>::zeros(a.len());
    let mut b_t = DVector::<f64>::zeros(b.len());
    for k in 0..sing.len() {
        let (sn, cs) = (delta * sing[k]).sin_cos();
        a_t[k] = cs * a[k] + sn * b[k];
        b_t[k] = -sn * a[k] + cs * b[k];
    }
    let x_new = u_mat * a_t + x_perp;
    let y_new = v_t.transpose() * b_t + y_perp;

    let damp = (-coeffs.sigma * delta).exp();
    let mut out = DVector::<f64>::zeros(d);
    for i in 0..n1 {
        out[i] = damp * x_new[i] / w[i].sqrt();
    }
    for j in 0..d - n1 {
        out[n1 + j] = damp * y_new[j] / w[n1 + j].sqrt();
    }
    FieldState::from_vector(grid, out).unwrap()
}

#[test]
fn skew_adjointness_on_hundred_random_pairs() {
    let grid = GridSpec::new(8).unwrap();
    let coeffs = MaxwellCoefficients::new(1.7, 0.6, 0.0).unwrap();
    let op = DiscreteMaxwellOperator::build(grid, coeffs).unwrap();
    let mut worst: f64 = 0.0;
    for t in 0..100 {
        let u = random_state(grid, 2 * t + 1);
        let v = random_state(grid, 2 * t + 2);
        let mu = op.apply_curl_damped(&u).unwrap();
        let mv = op.apply_curl_damped(&v).unwrap();
        let residual = op.inner_product(&mu, &v).unwrap() + op.inner_product(&u, &mv).unwrap();
        let scale = op.h_norm(&u).unwrap() * op.h_norm(&v).unwrap();
        worst = worst.max(residual.abs() / scale);
    }
    assert!(worst <= 1e-12, "skew-adjointness residual {worst:e}");
}

#[test]
fn energy_identity_on_random_fields() {
    let grid = GridSpec::new(8).unwrap();
    let op = DiscreteMaxwellOperator::build(grid, MaxwellCoefficients::unit()).unwrap();
    for t in 0..100 {
        let u = random_state(grid, t + 11);
        let mu = op.apply_curl_damped(&u).unwrap();
        let ip = op.inner_product(&mu, &u).unwrap();
        let n = op.h_norm(&u).unwrap();
        assert!(ip.abs() <= 1e-12 * n * n, "<Mu,u> = {ip:e} vs |u|^2 = {:e}", n * n);
    }
}

#[test]
fn damped_adjoint_identity_matches_matrix_transpose() {
    // <(M-sigma)u, v> + <u, (M-sigma)v> = -2 sigma <u,v>, and at the matrix
    // level W·A + A^T·W + 2 sigma W = 0 for A = M - sigma I.
    let grid = GridSpec::new(6).unwrap();
    let sigma = 2.0;
    let coeffs = MaxwellCoefficients::new(1.0, 1.0, sigma).unwrap();
    let op = DiscreteMaxwellOperator::build(grid, coeffs).unwrap();

    for t in 0..20 {
        let u = random_state(grid, 100 + 2 * t);
        let v = random_state(grid, 101 + 2 * t);
        let au = op.apply_curl_damped(&u).unwrap();
        let av = op.apply_curl_damped(&v).unwrap();
        let lhs = op.inner_product(&au, &v).unwrap() + op.inner_product(&u, &av).unwrap();
        let rhs = -2.0 * sigma * op.inner_product(&u, &v).unwrap();
        let scale = op.h_norm(&u).unwrap() * op.h_norm(&v).unwrap();
        assert!((lhs - rhs).abs() <= 1e-12 * scale, "identity residual {:e}", (lhs - rhs).abs());
    }

    let w = weight_diagonal(grid, &coeffs);
    let d = grid.dof();
    let mut a = op.m_matrix().clone();
    for k in 0..d {
        a[(k, k)] -= sigma;
    }
    let mut residual_max: f64 = 0.0;
    let mut scale_max: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let entry = w[i] * a[(i, j)] + a[(j, i)] * w[j] + if i == j { 2.0 * sigma * w[i] } else { 0.0 };
            residual_max = residual_max.max(entry.abs());
            scale_max = scale_max.max((w[i] * a[(i, j)]).abs());
        }
    }
    assert!(residual_max <= 1e-13 * scale_max.max(1.0), "matrix residual {residual_max:e}");
}

#[test]
fn cached_semigroup_is_a_weighted_contraction() {
    let grid = GridSpec::new(6).unwrap();
    for &sigma in &[0.0, 2.0] {
        let coeffs = MaxwellCoefficients::new(1.0, 1.0, sigma).unwrap();
        let op = DiscreteMaxwellOperator::build(grid, coeffs).unwrap();
        for &delta in &[0.0625f64, 1.0] {
            let s = op.semigroup(delta).unwrap();
            // Weighted operator norm via similarity with W^{1/2}.
            let w = weight_diagonal(grid, &coeffs);
            let d = grid.dof();
            let mut sim = DMatrix::<f64>::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    sim[(i, j)] = w[i].sqrt() * s[(i, j)] / w[j].sqrt();
                }
            }
            let svd = sim.svd(false, false);
            let norm = svd.singular_values.max();
            assert!(
                norm <= 1.0 + 1e-10,
                "weighted norm of S({delta}) at sigma={sigma} is {norm}"
            );
            let expected = (-sigma * delta).exp();
            assert!(
                (norm - expected).abs() <= 1e-10,
                "norm {norm} differs from decay factor {expected}"
            );
        }
    }
}

#[test]
fn decay_factor_holds_for_every_state() {
    let grid = GridSpec::new(8).unwrap();
    for &sigma in &[0.0, 2.0, 32.0] {
        let coeffs = MaxwellCoefficients::new(1.0, 1.0, sigma).unwrap();
        let op = DiscreteMaxwellOperator::build(grid, coeffs).unwrap();
        for &delta in &[0.00390625f64, 0.0625, 1.0] {
            for t in 0..5 {
                let u = random_state(grid, 500 + t);
                let su = op.semigroup_apply(delta, &u).unwrap();
                let expected = (-sigma * delta).exp() * op.h_norm(&u).unwrap();
                let got = op.h_norm(&su).unwrap();
                assert!(
                    (got - expected).abs() <= 1e-10 * expected,
                    "sigma={sigma} delta={delta}: |Su| = {got:e}, expected {expected:e}"
                );
            }
        }
    }
}

#[test]
fn composition_matches_double_step_and_oracle() {
    let grid = GridSpec::new(6).unwrap();
    let coeffs = MaxwellCoefficients::new(1.0, 1.0, 0.5).unwrap();
    let op = DiscreteMaxwellOperator::build(grid, coeffs).unwrap();
    let u = random_state(grid, 77);
    let delta = 0.3;

    let once = op.semigroup_apply(delta, &u).unwrap();
    let twice = op.semigroup_apply(delta, &once).unwrap();
    let direct = op.semigroup_apply(2.0 * delta, &u).unwrap();
    let norm = op.h_norm(&direct).unwrap();
    let diff = op.h_norm(&twice.sub(&direct)).unwrap();
    assert!(diff <= 1e-9 * norm, "semigroup composition residual {:e}", diff / norm);

    // Independent eigen-structure route.
    for &d in &[0.3f64, 0.6, 1.7] {
        let pade = op.semigroup_apply(d, &u).unwrap();
        let oracle = semigroup_oracle(&op, d, &u);
        let err = op.h_norm(&pade.sub(&oracle)).unwrap();
        let scale = op.h_norm(&oracle).unwrap();
        assert!(err <= 1e-9 * scale, "oracle mismatch at delta={d}: {:e}", err / scale);
    }
}

#[test]
fn oracle_agrees_on_weighted_coefficients() {
    let grid = GridSpec::new(5).unwrap();
    let coeffs = MaxwellCoefficients::new(2.5, 0.4, 3.0).unwrap();
    let op = DiscreteMaxwellOperator::build(grid, coeffs).unwrap();
    let u = random_state(grid, 3);
    let pade = op.semigroup_apply(0.8, &u).unwrap();
    let oracle = semigroup_oracle(&op, 0.8, &u);
    let err = op.h_norm(&pade.sub(&oracle)).unwrap();
    let scale = op.h_norm(&oracle).unwrap().max(1e-300);
    assert!(err <= 1e-9 * scale, "oracle mismatch {:e}", err / scale);
}

#[test]
fn concurrent_cache_population_is_idempotent() {
    let grid = GridSpec::new(6).unwrap();
    let op = DiscreteMaxwellOperator::build(grid, MaxwellCoefficients::unit()).unwrap();
    let op2 = DiscreteMaxwellOperator::build(grid, MaxwellCoefficients::unit()).unwrap();

    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let results: Vec<_> = pool.install(|| {
        use rayon::prelude::*;
        (0..8u32)
            .into_par_iter()
            .map(|_| op.semigroup(0.125).unwrap())
            .collect()
    });
    let serial = op2.semigroup(0.125).unwrap();
    for r in &results {
        assert_eq!(r.as_slice(), serial.as_slice(), "cache bytes differ across threads");
    }
    assert_eq!(op.cached_steps(), 1);
}

#[test]
fn linearity_is_bit_consistent_with_matrix_action() {
    let grid = GridSpec::new(5).unwrap();
    let op = DiscreteMaxwellOperator::build(grid, MaxwellCoefficients::new(1.0, 1.0, 1.5).unwrap())
        .unwrap();
    let u = random_state(grid, 8);
    let v = random_state(grid, 9);
    let combo = FieldState::from_vector(grid, u.as_vector() * 2.0 + v.as_vector() * -0.5).unwrap();
    let got = op.apply_curl_damped(&combo).unwrap();

    // Same arithmetic as the operation's contract: m·w − sigma·w.
    let w = combo.as_vector();
    let mut expected = op.m_matrix() * w;
    for (e, wi) in expected.iter_mut().zip(w.iter()) {
        *e -= 1.5 * wi;
    }
    assert_eq!(got.as_vector().as_slice(), expected.as_slice());
}
