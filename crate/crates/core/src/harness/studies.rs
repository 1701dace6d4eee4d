//! Monte Carlo experiment drivers: convergence order, damping, long-time
//! stability and measured efficiency.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Component, FieldState, GridSpec, MaxwellCoefficients};
use crate::harness::csv::{ConvergenceRow, EfficiencyRow, OrderRow};
use crate::harness::stats::{estimate_order, mean_square_error_matrices, MseSummary};
use crate::noise::{build_basis, sample_path, NoiseBasis};
use crate::nonlinearity::NonlinearitySpec;
use crate::operator::DiscreteMaxwellOperator;
use crate::parareal::{run, PararealConfig, PararealRun};
use crate::propagator::{FineKind, StepContext};
use crate::rng;
use crate::time_grid::TimeGridSpec;

const INIT_HX_TAG: u64 = 0xFFFF_FFFF_0000_0001;
const INIT_HY_TAG: u64 = 0xFFFF_FFFF_0000_0002;

/// Physical and numerical setup shared by all studies.
#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub grid: GridSpec,
    pub coeffs: MaxwellCoefficients,
    pub n_modes: u32,
    pub decay_r: f64,
    pub nonlinearity: NonlinearitySpec,
    pub time: TimeGridSpec,
    pub k_max: u32,
    pub tol: Option<f64>,
    pub fine_kind: FineKind,
}

/// Monte Carlo experiment grid.
#[derive(Debug, Clone)]
pub struct StudySpec {
    pub samples: u32,
    pub base_seed: u64,
    pub sigmas: Vec<f64>,
    pub k_list: Vec<u32>,
    pub coarse_steps: Vec<f64>,
    pub t_end_list: Vec<f64>,
}

impl StudySpec {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidStudy("samples must be >= 1".into()));
        }
        Ok(())
    }
}

/// Gaussian E_z bump centred in the domain plus H profiles that are random
/// in one direction and constant in the other; deterministic in
/// (seed, sample).
pub fn initial_state(grid: GridSpec, seed: u64, sample: u64) -> FieldState {
    FieldState::from_fn(grid, |comp, i, j| match comp {
        Component::Ez => {
            let (x, y) = grid.node_position(comp, i, j);
            0.1 * (-50.0 * ((x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5))).exp()
        }
        Component::Hx => rng::uniform(rng::key(seed, sample, INIT_HX_TAG, j as u64)),
        Component::Hy => rng::uniform(rng::key(seed, sample, INIT_HY_TAG, i as u64)),
    })
}

/// Finest lattice a run needs: the fine step for the exponential fine
/// propagator, the oversampled substep for the reference proxy.
pub fn run_delta_ref(time: &TimeGridSpec, fine_kind: FineKind) -> f64 {
    match fine_kind {
        FineKind::Exponential => time.dt_fine(),
        FineKind::Reference => time.dt_reference(),
    }
}

/// One parareal run for one Monte Carlo sample.
pub fn run_sample(
    op: &DiscreteMaxwellOperator,
    nonlinearity: &NonlinearitySpec,
    basis: &NoiseBasis,
    time: TimeGridSpec,
    fine_kind: FineKind,
    k_max: u32,
    base_seed: u64,
    sample: u64,
) -> Result<PararealRun> {
    let path = sample_path(basis, base_seed, sample, time.t_end(), run_delta_ref(&time, fine_kind))?;
    let u0 = initial_state(op.grid(), base_seed, sample);
    let cfg = PararealConfig { time, k_max, tol: None, fine_kind };
    run(op, nonlinearity, basis, &path, &cfg, &u0)
}

/// Convergence order report: one row per (pair, ΔT, k), one fitted slope per
/// (pair, k).
#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub rows: Vec<ConvergenceRow>,
    pub orders: Vec<OrderRow>,
}

impl ErrorReport {
    pub fn slope(&self, study_id: &str, k: u32) -> Option<f64> {
        self.orders.iter().find(|o| o.study_id == study_id && o.k == k).map(|o| o.slope)
    }
}

pub fn study_id_for(pair: &NonlinearitySpec) -> String {
    format!("converge-{}-{}", pair.drift_name(), pair.diffusion_name())
}

/// Run the coarse-step grid for each nonlinearity pair and fit the observed
/// mean-square order per iteration count.
pub fn convergence_study(
    model: &ModelConfig,
    study: &StudySpec,
    pairs: &[NonlinearitySpec],
) -> Result<ErrorReport> {
    study.validate()?;
    if study.coarse_steps.len() < 3 {
        return Err(Error::InvalidStudy("need at least 3 coarse steps for an order fit".into()));
    }
    let k_run = *study.k_list.iter().max().ok_or_else(|| {
        Error::InvalidStudy("k_list must not be empty".into())
    })?;
    let op = DiscreteMaxwellOperator::build(model.grid, model.coeffs)?;
    let basis = build_basis(model.grid, model.n_modes, model.decay_r)?;

    let mut rows = Vec::new();
    let mut orders = Vec::new();
    for pair in pairs {
        let study_id = study_id_for(pair);
        let mut per_k_points: Vec<Vec<(f64, f64)>> = vec![Vec::new(); study.k_list.len()];
        for &delta_t in &study.coarse_steps {
            let time = TimeGridSpec::new(
                model.time.t_end(),
                delta_t,
                model.time.j_sub(),
                model.time.rho_ref(),
            )?;
            let matrices: Vec<Vec<Vec<f64>>> = (0..study.samples as u64)
                .into_par_iter()
                .map(|s| {
                    run_sample(&op, pair, &basis, time, model.fine_kind, k_run, study.base_seed, s)
                        .map(|r| r.errors)
                })
                .collect::<Result<_>>()?;
            let refs: Vec<&Vec<Vec<f64>>> = matrices.iter().collect();
            for (slot, &k) in study.k_list.iter().enumerate() {
                let summary = mean_square_error_matrices(&refs, k)?;
                per_k_points[slot].push((delta_t, summary.sup));
                rows.push(ConvergenceRow {
                    study_id: study_id.clone(),
                    drift_kind: pair.drift_name().to_string(),
                    diffusion_kind: pair.diffusion_name().to_string(),
                    sigma: model.coeffs.sigma,
                    k,
                    delta_t,
                    mse: summary.sup,
                    mse_halfwidth: summary.halfwidth,
                    samples: study.samples,
                });
            }
        }
        for (slot, &k) in study.k_list.iter().enumerate() {
            let fit = estimate_order(&per_k_points[slot])?;
            orders.push(OrderRow {
                study_id: study_id.clone(),
                k,
                slope: fit.slope,
                slope_residual: fit.residual,
                expected_slope: k as f64 / 2.0,
            });
        }
    }
    Ok(ErrorReport { rows, orders })
}

/// Error-versus-iteration point of the damping study at one σ.
#[derive(Debug, Clone, Copy)]
pub struct DampingPoint {
    pub sigma: f64,
    pub k: u32,
    pub sup_error: f64,
    pub halfwidth: f64,
}

/// Error decay over iterations for each damping coefficient.
pub fn damping_study(model: &ModelConfig, study: &StudySpec) -> Result<Vec<DampingPoint>> {
    study.validate()?;
    if !study.sigmas.contains(&0.0) {
        return Err(Error::InvalidStudy("sigma list must include 0".into()));
    }
    let basis = build_basis(model.grid, model.n_modes, model.decay_r)?;
    let mut points = Vec::new();
    for &sigma in &study.sigmas {
        let coeffs = MaxwellCoefficients::new(model.coeffs.eps, model.coeffs.mu, sigma)?;
        let op = DiscreteMaxwellOperator::build(model.grid, coeffs)?;
        let matrices: Vec<Vec<Vec<f64>>> = (0..study.samples as u64)
            .into_par_iter()
            .map(|s| {
                run_sample(
                    &op,
                    &model.nonlinearity,
                    &basis,
                    model.time,
                    model.fine_kind,
                    model.k_max,
                    study.base_seed,
                    s,
                )
                .map(|r| r.errors)
            })
            .collect::<Result<_>>()?;
        let refs: Vec<&Vec<Vec<f64>>> = matrices.iter().collect();
        for k in 0..=model.k_max {
            let summary: MseSummary = mean_square_error_matrices(&refs, k)?;
            points.push(DampingPoint {
                sigma,
                k,
                sup_error: summary.sup,
                halfwidth: summary.halfwidth,
            });
        }
    }
    Ok(points)
}

/// Worst per-sample error at horizon `t_end` after k iterations.
#[derive(Debug, Clone, Copy)]
pub struct LongtimePoint {
    pub t_end: f64,
    pub k: u32,
    /// sup over samples and intervals of ‖u_n^(k) − u_n^ref‖_H.
    pub sup_error: f64,
}

/// Error trajectories over iterations for each horizon. Samples run
/// sequentially (the long horizons dominate memory); the parareal sweeps
/// inside each run still parallelize over intervals.
pub fn longtime_study(model: &ModelConfig, study: &StudySpec) -> Result<Vec<LongtimePoint>> {
    study.validate()?;
    let op = DiscreteMaxwellOperator::build(model.grid, model.coeffs)?;
    let basis = build_basis(model.grid, model.n_modes, model.decay_r)?;
    let mut points = Vec::new();
    for &t_end in &study.t_end_list {
        let time = TimeGridSpec::new(
            t_end,
            model.time.delta_t_coarse(),
            model.time.j_sub(),
            model.time.rho_ref(),
        )?;
        let mut sup_per_k = vec![0.0f64; model.k_max as usize + 1];
        for s in 0..study.samples as u64 {
            let r = run_sample(
                &op,
                &model.nonlinearity,
                &basis,
                time,
                model.fine_kind,
                model.k_max,
                study.base_seed,
                s,
            )?;
            for (k, sup) in sup_per_k.iter_mut().enumerate() {
                *sup = sup.max(r.sup_error(k as u32));
            }
        }
        for (k, &sup) in sup_per_k.iter().enumerate() {
            points.push(LongtimePoint { t_end, k: k as u32, sup_error: sup });
        }
    }
    Ok(points)
}

/// Knobs of the measured efficiency comparison.
#[derive(Debug, Clone)]
pub struct EfficiencyOptions {
    /// Parareal iteration counts to time (each gets its own rows).
    pub k_values: Vec<u32>,
    /// ΔT′ = ΔT / step_ratio for the sequential exponential run; a power of
    /// two keeps both methods on one noise lattice.
    pub step_ratio: u32,
    pub t_end_list: Vec<f64>,
    pub samples: u32,
    pub base_seed: u64,
}

/// Measured wall-clock and error comparison between parareal and the
/// sequential exponential method at a finer step, on matched noise.
/// Parareal time counts initialization plus sweeps; the reference sweep used
/// for error reporting is excluded from both methods' timings.
pub fn efficiency_study(model: &ModelConfig, opts: &EfficiencyOptions) -> Result<Vec<EfficiencyRow>> {
    if opts.samples == 0 || opts.k_values.is_empty() || opts.t_end_list.is_empty() {
        return Err(Error::InvalidStudy("efficiency study needs samples, k values and horizons".into()));
    }
    if opts.step_ratio == 0 || !opts.step_ratio.is_power_of_two() {
        return Err(Error::InvalidStudy(format!(
            "step_ratio must be a power of two >= 1, got {}",
            opts.step_ratio
        )));
    }
    let op = DiscreteMaxwellOperator::build(model.grid, model.coeffs)?;
    let basis = build_basis(model.grid, model.n_modes, model.decay_r)?;
    let delta_t = model.time.delta_t_coarse();
    let delta_t_prime = delta_t / opts.step_ratio as f64;
    let k_run = *opts.k_values.iter().max().unwrap();

    struct PerHorizon {
        parareal_secs: Vec<f64>,
        parareal_err: Vec<Vec<Vec<f64>>>,
        exp_secs: f64,
        exp_err: Vec<Vec<Vec<f64>>>,
    }

    let mut rows = Vec::new();
    let mut results: Vec<(f64, PerHorizon)> = Vec::new();
    for &t_end in &opts.t_end_list {
        let time = TimeGridSpec::new(t_end, delta_t, model.time.j_sub(), model.time.rho_ref())?;
        let exp_time = TimeGridSpec::new(t_end, delta_t_prime, 1, 1)?;
        let delta_ref = run_delta_ref(&time, model.fine_kind).min(delta_t_prime);
        let n_coarse = time.n_intervals() as usize;
        let strides = opts.step_ratio as u64;

        let mut acc = PerHorizon {
            parareal_secs: vec![0.0; opts.k_values.len()],
            parareal_err: Vec::new(),
            exp_secs: 0.0,
            exp_err: Vec::new(),
        };
        for s in 0..opts.samples as u64 {
            let path = sample_path(&basis, opts.base_seed, s, t_end, delta_ref)?;
            let u0 = initial_state(model.grid, opts.base_seed, s);
            let cfg =
                PararealConfig { time, k_max: k_run, tol: None, fine_kind: model.fine_kind };
            let r = run(&op, &model.nonlinearity, &basis, &path, &cfg, &u0)?;
            for (slot, &k) in opts.k_values.iter().enumerate() {
                acc.parareal_secs[slot] += r.timings.method_secs(k);
            }

            // Sequential exponential run at ΔT′ on the same path, compared
            // against the same reference at the coarse grid points.
            let exp_ctx = StepContext::new(&op, &model.nonlinearity, &basis, &path, &exp_time)?;
            exp_ctx.warm_semigroup_cache(FineKind::Exponential)?;
            let total_steps = exp_time.n_intervals();
            let mut state = u0.clone();
            let mut snapshots = Vec::with_capacity(n_coarse);
            let t = Instant::now();
            for step in 1..=total_steps {
                state = exp_ctx.coarse_g(&state, step)?;
                if step % strides == 0 {
                    snapshots.push(state.clone());
                }
            }
            acc.exp_secs += t.elapsed().as_secs_f64();

            let mut exp_err_row = vec![0.0f64; n_coarse + 1];
            for (idx, snap) in snapshots.iter().enumerate() {
                exp_err_row[idx + 1] = op.h_norm_sq_diff(snap, &r.reference[idx + 1])?;
            }
            acc.exp_err.push(vec![exp_err_row]);
            acc.parareal_err.push(r.errors);
        }
        results.push((t_end, acc));
    }

    for (slot, &k) in opts.k_values.iter().enumerate() {
        for (t_end, acc) in &results {
            let refs: Vec<&Vec<Vec<f64>>> = acc.parareal_err.iter().collect();
            let summary = mean_square_error_matrices(&refs, k)?;
            rows.push(EfficiencyRow {
                method: format!("parareal_k{k}"),
                delta_t,
                t_end: *t_end,
                error_l2: summary.sup,
                cpu_seconds: acc.parareal_secs[slot] / opts.samples as f64,
            });
        }
    }
    for (t_end, acc) in &results {
        let refs: Vec<&Vec<Vec<f64>>> = acc.exp_err.iter().collect();
        let summary = mean_square_error_matrices(&refs, 0)?;
        rows.push(EfficiencyRow {
            method: "exponential".into(),
            delta_t: delta_t_prime,
            t_end: *t_end,
            error_l2: summary.sup,
            cpu_seconds: acc.exp_secs / opts.samples as f64,
        });
    }
    Ok(rows)
}
