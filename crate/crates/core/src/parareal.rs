//! Parareal iteration: coarse initialization, parallel fine sweeps,
//! sequential prediction–correction, reference solution and error tracking.
//!
//! The update is
//!
//! ```text
//! u_n^(k+1) = G(t_{n−1}, t_n, u_{n−1}^(k+1)) + F(t_{n−1}, t_n, u_{n−1}^(k)) − G(t_{n−1}, t_n, u_{n−1}^(k))
//! ```
//!
//! computed as u = G_new + R with R = F_old − G_old formed first, so the
//! stored iterate satisfies the correction identity bitwise against
//! recomputed G and R. Fine evaluations within a sweep are parallel over
//! intervals; coarse evaluations from the previous sweep are cached and
//! reused. The output is bit-identical for any worker count.
//!
//! The reference solution is the sequential sweep of the configured fine
//! propagator; after k iterations the first k intervals coincide with it
//! exactly, so the per-interval error hits the rounding floor there.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::noise::{NoiseBasis, WienerPath};
use crate::nonlinearity::NonlinearitySpec;
use crate::operator::DiscreteMaxwellOperator;
use crate::propagator::{FineKind, StepContext};
use crate::time_grid::TimeGridSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct PararealConfig {
    pub time: TimeGridSpec,
    /// Maximum iteration count; values above N are allowed (iterates are
    /// stationary once exact).
    pub k_max: u32,
    /// Optional early stop on sup_n ‖u_n^(k) − u_n^(k−1)‖; None disables.
    pub tol: Option<f64>,
    pub fine_kind: FineKind,
}

impl PararealConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(tol) = self.tol {
            if tol.is_nan() || tol < 0.0 {
                return Err(Error::InvalidStudy(format!("tol must be >= 0, got {tol}")));
            }
        }
        Ok(())
    }
}

/// Wall-clock seconds per phase.
#[derive(Debug, Clone, Default)]
pub struct PhaseTimings {
    pub initialize_secs: f64,
    pub reference_secs: f64,
    /// One entry per completed sweep (fine evaluations + correction pass).
    pub sweep_secs: Vec<f64>,
}

impl PhaseTimings {
    /// Time attributable to the parareal method itself after k iterations
    /// (initialization plus the first k sweeps); excludes the reference.
    pub fn method_secs(&self, k: u32) -> f64 {
        let sweeps: f64 = self.sweep_secs.iter().take(k as usize).sum();
        self.initialize_secs + sweeps
    }
}

/// A complete parareal run on one sample path.
#[derive(Debug)]
pub struct PararealRun {
    /// iterates[k][n] = u_n^(k) for 0 ≤ k ≤ k_stop, 0 ≤ n ≤ N.
    pub iterates: Vec<Vec<FieldState>>,
    /// reference[n] = u_n^ref from the sequential fine sweep.
    pub reference: Vec<FieldState>,
    /// errors[k][n] = ‖u_n^(k) − u_n^ref‖²_H.
    pub errors: Vec<Vec<f64>>,
    pub timings: PhaseTimings,
    pub k_stop: u32,
}

impl PararealRun {
    pub fn n_intervals(&self) -> usize {
        self.reference.len() - 1
    }

    /// sup over n ≥ 1 of ‖u_n^(k) − u_n^ref‖_H.
    pub fn sup_error(&self, k: u32) -> f64 {
        self.errors[k as usize][1..].iter().cloned().fold(0.0, f64::max).sqrt()
    }
}

fn tag_interval(n: u64) -> impl Fn(Error) -> Error {
    move |e| Error::Propagation { interval: n, source: Box::new(e) }
}

/// Sequential coarse sweep producing iterate 0: u_n^(0) = G(u_{n−1}^(0)).
pub fn initialize(ctx: &StepContext<'_>, u0: &FieldState) -> Result<Vec<FieldState>> {
    let n_max = ctx.time.n_intervals();
    let mut states = Vec::with_capacity(n_max as usize + 1);
    states.push(u0.clone());
    for n in 1..=n_max {
        let next = ctx.coarse_g(&states[n as usize - 1], n).map_err(tag_interval(n))?;
        states.push(next);
    }
    Ok(states)
}

/// One parareal sweep. `prev` holds the previous iterate u^(k) (N+1 states);
/// `g_prev[n−1]` holds G(u_{n−1}^(k)) as cached by the producing sweep.
/// Returns the next iterate and its coarse evaluations for reuse.
pub fn sweep(
    ctx: &StepContext<'_>,
    fine_kind: FineKind,
    prev: &[FieldState],
    g_prev: &[FieldState],
) -> Result<(Vec<FieldState>, Vec<FieldState>)> {
    let n_max = ctx.time.n_intervals();
    assert_eq!(prev.len(), n_max as usize + 1);
    assert_eq!(g_prev.len(), n_max as usize);

    // Fine evaluations are independent across intervals; run them in
    // parallel and collect in interval order.
    let fine: Vec<FieldState> = (1..=n_max)
        .into_par_iter()
        .map(|n| ctx.fine(fine_kind, &prev[n as usize - 1], n).map_err(tag_interval(n)))
        .collect::<Result<_>>()?;

    // Residual R(u^(k)) = F(u^(k)) − G(u^(k)), formed before the correction.
    let residuals: Vec<FieldState> =
        fine.iter().zip(g_prev).map(|(f, g)| f.sub(g)).collect();

    // Sequential prediction-correction.
    let mut next = Vec::with_capacity(n_max as usize + 1);
    let mut g_next = Vec::with_capacity(n_max as usize);
    next.push(prev[0].clone());
    for n in 1..=n_max {
        let g_new = ctx.coarse_g(&next[n as usize - 1], n).map_err(tag_interval(n))?;
        next.push(g_new.add(&residuals[n as usize - 1]));
        g_next.push(g_new);
    }
    Ok((next, g_next))
}

/// Residual operator R(t_{n−1}, t_n, u) = F(u) − G(u) over interval n.
pub fn residual(ctx: &StepContext<'_>, fine_kind: FineKind, u: &FieldState, n: u64) -> Result<FieldState> {
    let f = ctx.fine(fine_kind, u, n)?;
    let g = ctx.coarse_g(u, n)?;
    Ok(f.sub(&g))
}

/// Sequential reference sweep u_n^ref = F(u_{n−1}^ref).
pub fn reference_sweep(ctx: &StepContext<'_>, fine_kind: FineKind, u0: &FieldState) -> Result<Vec<FieldState>> {
    let n_max = ctx.time.n_intervals();
    let mut states = Vec::with_capacity(n_max as usize + 1);
    states.push(u0.clone());
    for n in 1..=n_max {
        let next = ctx.fine(fine_kind, &states[n as usize - 1], n).map_err(tag_interval(n))?;
        states.push(next);
    }
    Ok(states)
}

fn errors_against(
    op: &DiscreteMaxwellOperator,
    iterate: &[FieldState],
    reference: &[FieldState],
) -> Result<Vec<f64>> {
    iterate
        .iter()
        .zip(reference)
        .map(|(u, r)| op.h_norm_sq_diff(u, r))
        .collect()
}

/// Full parareal run: initialization, reference, then sweeps until k_max or
/// the early-stop tolerance is met.
pub fn run(
    op: &DiscreteMaxwellOperator,
    nonlinearity: &NonlinearitySpec,
    basis: &NoiseBasis,
    path: &WienerPath,
    cfg: &PararealConfig,
    u0: &FieldState,
) -> Result<PararealRun> {
    cfg.validate()?;
    let ctx = StepContext::new(op, nonlinearity, basis, path, &cfg.time)?;
    ctx.warm_semigroup_cache(cfg.fine_kind)?;

    let mut timings = PhaseTimings::default();

    let t = Instant::now();
    let iterate0 = initialize(&ctx, u0)?;
    timings.initialize_secs = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let reference = reference_sweep(&ctx, cfg.fine_kind, u0)?;
    timings.reference_secs = t.elapsed().as_secs_f64();

    let mut errors = vec![errors_against(op, &iterate0, &reference)?];
    // G(u^(0)) values are the initialization states themselves.
    let mut g_cache: Vec<FieldState> = iterate0[1..].to_vec();
    let mut iterates = vec![iterate0];
    let mut k_stop = 0;

    for k in 1..=cfg.k_max {
        let t = Instant::now();
        let (next, g_next) = sweep(&ctx, cfg.fine_kind, &iterates[k as usize - 1], &g_cache)?;
        timings.sweep_secs.push(t.elapsed().as_secs_f64());

        errors.push(errors_against(op, &next, &reference)?);
        let sup_increment = next
            .iter()
            .zip(&iterates[k as usize - 1])
            .map(|(a, b)| op.h_norm_sq_diff(a, b))
            .try_fold(0.0f64, |acc, r| r.map(|v| acc.max(v)))?
            .sqrt();
        iterates.push(next);
        g_cache = g_next;
        k_stop = k;

        if let Some(tol) = cfg.tol {
            if sup_increment <= tol {
                break;
            }
        }
    }

    Ok(PararealRun { iterates, reference, errors, timings, k_stop })
}
