//! Dense matrix exponential by Padé approximation with scaling and squaring.
//!
//! Order selection and theta thresholds follow the standard double-precision
//! table (orders 3, 5, 7, 9, 13). The denominator solve uses partial-pivot LU.

use nalgebra::DMatrix;

const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.539398330063230e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068e0;
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn norm_1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solve (V − U) X = (V + U) for X.
fn pade_solve(u: DMatrix<f64>, v: DMatrix<f64>) -> DMatrix<f64> {
    let p = &v + &u;
    let q = v - u;
    nalgebra::linalg::LU::new(q)
        .solve(&p)
        .expect("Padé denominator is nonsingular for admissible scaling")
}

fn pade_low_order(a: &DMatrix<f64>, b: &[f64]) -> DMatrix<f64> {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    // Even powers of A needed for both polynomials.
    let mut powers: Vec<DMatrix<f64>> = vec![id.clone(), a2.clone()];
    let m = b.len() - 1;
    while powers.len() <= m / 2 {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let mut u_poly = DMatrix::<f64>::zeros(n, n);
    let mut v = DMatrix::<f64>::zeros(n, n);
    for (k, pw) in powers.iter().enumerate() {
        if 2 * k + 1 <= m {
            u_poly += pw * b[2 * k + 1];
        }
        v += pw * b[2 * k];
    }
    let u = a * u_poly;
    pade_solve(u, v)
}

fn pade_13(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &B13;

    let u_inner = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
    let u_poly = &a6 * u_inner + (&a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &id * b[1]);
    let u = a * u_poly;

    let v_inner = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
    let v = &a6 * v_inner + (&a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &id * b[0]);
    pade_solve(u, v)
}

/// e^A for a square matrix A.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), a.ncols(), "expm requires a square matrix");
    let norm = norm_1(a);
    if norm <= THETA_3 {
        return pade_low_order(a, &B3);
    }
    if norm <= THETA_5 {
        return pade_low_order(a, &B5);
    }
    if norm <= THETA_7 {
        return pade_low_order(a, &B7);
    }
    if norm <= THETA_9 {
        return pade_low_order(a, &B9);
    }
    let s = ((norm / THETA_13).log2().ceil().max(0.0)) as u32;
    let scaled = a * 2f64.powi(-(s as i32));
    let mut r = pade_13(&scaled);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exp_of_zero_is_identity() {
        let a = DMatrix::<f64>::zeros(4, 4);
        let e = expm(&a);
        assert_eq!(e, DMatrix::<f64>::identity(4, 4));
    }

    #[test]
    fn exp_of_diagonal() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, -1.0, 2.0]));
        let e = expm(&a);
        for (k, lam) in [0.5f64, -1.0, 2.0].iter().enumerate() {
            assert_relative_eq!(e[(k, k)], lam.exp(), max_relative = 1e-14);
        }
        assert!(e[(0, 1)].abs() < 1e-15);
    }

    #[test]
    fn exp_of_rotation_block() {
        // exp([[0, -t], [t, 0]]) = [[cos t, -sin t], [sin t, cos t]].
        for &t in &[0.01, 0.3, 1.0, 10.0] {
            let a = DMatrix::from_row_slice(2, 2, &[0.0, -t, t, 0.0]);
            let e = expm(&a);
            assert_relative_eq!(e[(0, 0)], t.cos(), epsilon = 1e-13);
            assert_relative_eq!(e[(0, 1)], -t.sin(), epsilon = 1e-13);
            assert_relative_eq!(e[(1, 0)], t.sin(), epsilon = 1e-13);
            assert_relative_eq!(e[(1, 1)], t.cos(), epsilon = 1e-13);
        }
    }

    #[test]
    fn exp_of_nilpotent() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let e = expm(&a);
        assert_relative_eq!(e[(0, 0)], 1.0, epsilon = 1e-15);
        assert_relative_eq!(e[(0, 1)], 1.0, epsilon = 1e-15);
        assert_relative_eq!(e[(1, 0)], 0.0, epsilon = 1e-15);
        assert_relative_eq!(e[(1, 1)], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn semigroup_property_on_random_matrix() {
        // Fixed small matrix: exp(A)·exp(A) ≈ exp(2A).
        let a = DMatrix::from_fn(5, 5, |i, j| ((i * 5 + j) as f64 * 0.618).sin() * 0.4);
        let e1 = expm(&a);
        let e2 = expm(&(&a * 2.0));
        let prod = &e1 * &e1;
        for i in 0..5 {
            for j in 0..5 {
                assert_relative_eq!(prod[(i, j)], e2[(i, j)], epsilon = 1e-12, max_relative = 1e-10);
            }
        }
    }
}
