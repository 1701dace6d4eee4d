//! Cost and efficiency model for parareal versus the sequential
//! exponential method.
//!
//! ```text
//! Cost_parareal = (K+1)·(T/ΔT)·τ_G + K·(T/δt)·(τ_F,aux / N_proc)
//! Cost_exp      = (T/ΔT′)·τ_exp
//! Efficiency    = Cost_exp / Cost_parareal
//! ```
//!
//! Pure arithmetic; no measurement enters these formulas. For dyadic inputs
//! the divisions are exact in f64.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::propagator::StepContext;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModelParams {
    /// Iteration count K.
    pub k: u32,
    /// Horizon T.
    pub t_end: f64,
    /// Coarse step ΔT.
    pub delta_t_coarse: f64,
    /// Fine step δt.
    pub delta_t_fine: f64,
    /// Seconds per coarse evaluation.
    pub tau_coarse: f64,
    /// Seconds per auxiliary fine substep.
    pub tau_fine_aux: f64,
    /// Available processors.
    pub n_proc: u32,
    /// Seconds per exponential-method step.
    pub tau_exp: f64,
    /// Exponential-method step ΔT′.
    pub delta_t_prime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostPrediction {
    pub cost_parareal: f64,
    pub cost_exponential: f64,
    pub efficiency: f64,
}

pub fn predict_cost(p: &CostModelParams) -> Result<CostPrediction> {
    let positive = [
        ("t_end", p.t_end),
        ("delta_T", p.delta_t_coarse),
        ("delta_t_fine", p.delta_t_fine),
        ("tau_G", p.tau_coarse),
        ("tau_F_aux", p.tau_fine_aux),
        ("tau_exp", p.tau_exp),
        ("delta_T_prime", p.delta_t_prime),
    ];
    for (name, v) in positive {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidCostModel(format!("{name} must be > 0, got {v}")));
        }
    }
    if p.n_proc == 0 {
        return Err(Error::InvalidCostModel("n_proc must be >= 1".into()));
    }
    let coarse_steps = p.t_end / p.delta_t_coarse;
    let fine_steps = p.t_end / p.delta_t_fine;
    let cost_parareal = (p.k as f64 + 1.0) * coarse_steps * p.tau_coarse
        + (p.k as f64 * fine_steps) * (p.tau_fine_aux / p.n_proc as f64);
    let cost_exponential = (p.t_end / p.delta_t_prime) * p.tau_exp;
    if cost_parareal == 0.0 {
        return Err(Error::InvalidCostModel("parareal cost is zero".into()));
    }
    Ok(CostPrediction {
        cost_parareal,
        cost_exponential,
        efficiency: cost_exponential / cost_parareal,
    })
}

/// Median of wall-clock timings over `calls` invocations of `f`.
fn median_secs(calls: usize, mut f: impl FnMut()) -> f64 {
    let mut times = Vec::with_capacity(calls);
    for _ in 0..calls {
        let t = Instant::now();
        f();
        times.push(t.elapsed().as_secs_f64());
    }
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times[times.len() / 2]
}

/// Micro-benchmark τ_G, τ_F,aux and τ_exp on a live context: medians of at
/// least 100 invocations of one coarse step, one fine substep, and one
/// exponential-method step (a single step on the finest stored lattice; the
/// per-step cost is what the model assumes independent of the step size).
pub fn measure_taus(ctx: &StepContext<'_>, u: &FieldState, calls: usize) -> Result<(f64, f64, f64)> {
    let calls = calls.max(100);
    ctx.op.semigroup(ctx.time.delta_t_coarse())?;
    ctx.op.semigroup(ctx.time.dt_fine())?;
    ctx.op.semigroup(ctx.path.delta_ref())?;

    let tau_coarse = median_secs(calls, || {
        ctx.coarse_g(u, 1).expect("coarse step");
    });
    let fine_window = ctx.path.window_from_times(0.0, ctx.time.dt_fine())?;
    let tau_fine_aux = median_secs(calls, || {
        ctx.step_window(u, fine_window).expect("fine substep");
    });
    let exp_window = crate::noise::Window { start: 0, end: 1 };
    let tau_exp = median_secs(calls, || {
        ctx.step_window(u, exp_window).expect("exp step");
    });
    Ok((tau_coarse, tau_fine_aux, tau_exp))
}
