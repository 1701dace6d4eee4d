//! CSV output schemas for the experiment harness.
//!
//! UTF-8, header row, '.' decimal separator. Error-like quantities are
//! written in scientific notation ({:e}); step sizes, horizons and counts in
//! plain positional notation. All formatting is deterministic, so identical
//! results produce byte-identical files.

use std::io::{self, Write};

use crate::harness::cost::{CostModelParams, CostPrediction};

#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub study_id: String,
    pub drift_kind: String,
    pub diffusion_kind: String,
    pub sigma: f64,
    pub k: u32,
    pub delta_t: f64,
    pub mse: f64,
    pub mse_halfwidth: f64,
    pub samples: u32,
}

#[derive(Debug, Clone)]
pub struct OrderRow {
    pub study_id: String,
    pub k: u32,
    pub slope: f64,
    pub slope_residual: f64,
    pub expected_slope: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct DampingRow {
    pub sigma: f64,
    pub k: u32,
    pub sup_error: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct LongtimeRow {
    pub t_end: f64,
    pub k: u32,
    pub sup_error: f64,
}

#[derive(Debug, Clone)]
pub struct EfficiencyRow {
    pub method: String,
    pub delta_t: f64,
    pub t_end: f64,
    pub error_l2: f64,
    pub cpu_seconds: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct CostModelRow {
    pub params: CostModelParams,
    pub prediction: CostPrediction,
}

pub fn write_convergence(w: &mut impl Write, rows: &[ConvergenceRow]) -> io::Result<()> {
    writeln!(w, "study_id,drift_kind,diffusion_kind,sigma,k,delta_T,mse,mse_halfwidth,samples")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{:e},{:e},{}",
            r.study_id, r.drift_kind, r.diffusion_kind, r.sigma, r.k, r.delta_t, r.mse,
            r.mse_halfwidth, r.samples
        )?;
    }
    Ok(())
}

pub fn write_orders(w: &mut impl Write, rows: &[OrderRow]) -> io::Result<()> {
    writeln!(w, "study_id,k,slope,slope_residual,expected_slope")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{:e},{:e},{}",
            r.study_id, r.k, r.slope, r.slope_residual, r.expected_slope
        )?;
    }
    Ok(())
}

pub fn write_damping(w: &mut impl Write, rows: &[DampingRow]) -> io::Result<()> {
    writeln!(w, "sigma,k,sup_error")?;
    for r in rows {
        writeln!(w, "{},{},{:e}", r.sigma, r.k, r.sup_error)?;
    }
    Ok(())
}

pub fn write_longtime(w: &mut impl Write, rows: &[LongtimeRow]) -> io::Result<()> {
    writeln!(w, "t_end,k,sup_error")?;
    for r in rows {
        writeln!(w, "{},{},{:e}", r.t_end, r.k, r.sup_error)?;
    }
    Ok(())
}

pub fn write_efficiency(w: &mut impl Write, rows: &[EfficiencyRow]) -> io::Result<()> {
    writeln!(w, "method,delta_T,t_end,error_l2,cpu_seconds")?;
    for r in rows {
        writeln!(w, "{},{},{},{:e},{:e}", r.method, r.delta_t, r.t_end, r.error_l2, r.cpu_seconds)?;
    }
    Ok(())
}

pub fn write_costmodel(w: &mut impl Write, rows: &[CostModelRow]) -> io::Result<()> {
    writeln!(
        w,
        "k,t_end,delta_T,delta_t_fine,tau_G,tau_F_aux,n_proc,tau_exp,delta_T_prime,cost_parareal,cost_exp,efficiency"
    )?;
    for r in rows {
        let p = &r.params;
        writeln!(
            w,
            "{},{},{},{},{:e},{:e},{},{:e},{},{:e},{:e},{:e}",
            p.k,
            p.t_end,
            p.delta_t_coarse,
            p.delta_t_fine,
            p.tau_coarse,
            p.tau_fine_aux,
            p.n_proc,
            p.tau_exp,
            p.delta_t_prime,
            r.prediction.cost_parareal,
            r.prediction.cost_exponential,
            r.prediction.efficiency
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convergence_rows_have_pinned_header_and_shape() {
        let rows = vec![ConvergenceRow {
            study_id: "converge-cos-identity".into(),
            drift_kind: "cos".into(),
            diffusion_kind: "identity".into(),
            sigma: 0.0,
            k: 3,
            delta_t: 0.015625,
            mse: 1.25e-4,
            mse_halfwidth: 2.5e-6,
            samples: 50,
        }];
        let mut buf = Vec::new();
        write_convergence(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "study_id,drift_kind,diffusion_kind,sigma,k,delta_T,mse,mse_halfwidth,samples"
        );
        assert_eq!(
            lines.next().unwrap(),
            "converge-cos-identity,cos,identity,0,3,0.015625,1.25e-4,2.5e-6,50"
        );
    }

    #[test]
    fn identical_rows_are_byte_identical() {
        let row = EfficiencyRow {
            method: "parareal_k2".into(),
            delta_t: 0.125,
            t_end: 10.0,
            error_l2: 3.5e-3,
            cpu_seconds: 0.81,
        };
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_efficiency(&mut a, &[row.clone()]).unwrap();
        write_efficiency(&mut b, &[row]).unwrap();
        assert_eq!(a, b);
    }
}
