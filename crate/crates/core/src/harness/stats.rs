//! Monte Carlo error aggregation and order estimation.

use crate::error::{Error, Result};
use crate::parareal::PararealRun;

/// Mean-square error summary over a set of runs at a fixed iteration k.
#[derive(Debug, Clone)]
pub struct MseSummary {
    /// sqrt((1/M) Σ_m ‖u_n^(k) − u_n^ref‖²) per interval endpoint n.
    pub per_n: Vec<f64>,
    /// sup over n ≥ 1 of `per_n`.
    pub sup: f64,
    /// Interval index attaining the sup.
    pub sup_index: usize,
    /// 1.96·std/√M at the sup index, mapped to the root-mean-square scale.
    pub halfwidth: f64,
    pub samples: usize,
}

/// Sum in ascending value order so the result is invariant under sample
/// reordering.
fn ordered_sum(values: &mut Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite error values"));
    values.iter().sum()
}

/// Aggregate per-sample squared errors (sample → [n] → ε) at iteration k.
pub fn mean_square_error_matrices(per_sample: &[&Vec<Vec<f64>>], k: u32) -> Result<MseSummary> {
    if per_sample.is_empty() {
        return Err(Error::MismatchedRuns("no runs supplied".into()));
    }
    let n_len = per_sample[0].first().map(|row| row.len()).unwrap_or(0);
    for errs in per_sample {
        if (errs.len() as u32) <= k {
            return Err(Error::MismatchedRuns(format!(
                "iteration {k} not available in a run with k_stop = {}",
                errs.len().saturating_sub(1)
            )));
        }
        if errs[k as usize].len() != n_len {
            return Err(Error::MismatchedRuns("runs have differing interval counts".into()));
        }
    }
    let m = per_sample.len();
    let mut per_n = vec![0.0; n_len];
    let mut sup = 0.0f64;
    let mut sup_index = 0usize;
    for n in 0..n_len {
        let mut values: Vec<f64> = per_sample.iter().map(|errs| errs[k as usize][n]).collect();
        let mean = ordered_sum(&mut values) / m as f64;
        let rms = mean.sqrt();
        per_n[n] = rms;
        if n >= 1 && rms > sup {
            sup = rms;
            sup_index = n;
        }
    }
    // Half-width of the squared-error mean at the sup index, pushed through
    // the square root by the delta method.
    let halfwidth = if m > 1 && sup > 0.0 {
        let values: Vec<f64> = per_sample.iter().map(|errs| errs[k as usize][sup_index]).collect();
        let mean: f64 = values.iter().sum::<f64>() / m as f64;
        let var: f64 =
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m as f64 - 1.0);
        1.96 * (var / m as f64).sqrt() / (2.0 * sup)
    } else {
        0.0
    };
    Ok(MseSummary { per_n, sup, sup_index, halfwidth, samples: m })
}

/// Monte Carlo mean-square error of parareal runs at iteration k:
/// per-n root-mean-square over samples, and the sup over n.
pub fn mean_square_error(runs: &[PararealRun], k: u32) -> Result<MseSummary> {
    let n0 = runs.first().map(|r| r.n_intervals());
    for r in runs {
        if Some(r.n_intervals()) != n0 {
            return Err(Error::MismatchedRuns("runs have differing interval counts".into()));
        }
    }
    let matrices: Vec<&Vec<Vec<f64>>> = runs.iter().map(|r| &r.errors).collect();
    mean_square_error_matrices(&matrices, k)
}

/// Least-squares fit of log₂ e against log₂ ΔT.
#[derive(Debug, Clone, Copy)]
pub struct OrderFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log₂ space.
    pub residual: f64,
}

/// Fit the observed convergence order from (ΔT, error) pairs.
pub fn estimate_order(points: &[(f64, f64)]) -> Result<OrderFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    let logs: Vec<(f64, f64)> = points
        .iter()
        .map(|&(dt, e)| {
            if !(dt > 0.0 && e > 0.0 && dt.is_finite() && e.is_finite()) {
                Err(Error::DegenerateFit(format!("non-positive point ({dt}, {e})")))
            } else {
                Ok((dt.log2(), e.log2()))
            }
        })
        .collect::<Result<_>>()?;
    let n = logs.len() as f64;
    let x_mean = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let y_mean = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - x_mean) * (p.0 - x_mean)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all abscissae coincide".into()));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - x_mean) * (p.1 - y_mean)).sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss_res: f64 = logs
        .iter()
        .map(|p| {
            let r = p.1 - (slope * p.0 + intercept);
            r * r
        })
        .sum();
    Ok(OrderFit { slope, intercept, residual: (ss_res / n).sqrt() })
}
