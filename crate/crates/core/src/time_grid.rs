//! Time discretization: coarse intervals, fine substeps, reference
//! oversampling.
//!
//! [0, T] splits into N coarse intervals of length ΔT; each interval splits
//! into J fine steps Δt = ΔT/J; the reference propagator subdivides once
//! more by ρ. Every step is a binary fraction so that all noise windows land
//! on a common dyadic lattice.

use crate::error::{Error, Result};
use crate::noise::is_power_of_two_f64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGridSpec {
    t_end: f64,
    delta_t_coarse: f64,
    j_sub: u32,
    rho_ref: u32,
}

impl TimeGridSpec {
    pub fn new(t_end: f64, delta_t_coarse: f64, j_sub: u32, rho_ref: u32) -> Result<Self> {
        if !is_power_of_two_f64(delta_t_coarse) {
            return Err(Error::InvalidTimeGrid(format!(
                "delta_T must be an exact power of two, got {delta_t_coarse}"
            )));
        }
        if j_sub == 0 || !j_sub.is_power_of_two() {
            return Err(Error::InvalidTimeGrid(format!(
                "j_sub must be a power of two >= 1, got {j_sub}"
            )));
        }
        if rho_ref == 0 || !rho_ref.is_power_of_two() {
            return Err(Error::InvalidTimeGrid(format!(
                "rho_ref must be a power of two >= 1, got {rho_ref}"
            )));
        }
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::InvalidTimeGrid(format!("t_end must be > 0, got {t_end}")));
        }
        let n = t_end / delta_t_coarse;
        if n.fract() != 0.0 || n < 1.0 || n > 2f64.powi(40) {
            return Err(Error::InvalidTimeGrid(format!(
                "t_end / delta_T = {n} is not an exact interval count"
            )));
        }
        Ok(Self { t_end, delta_t_coarse, j_sub, rho_ref })
    }

    #[inline]
    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// Coarse step ΔT.
    #[inline]
    pub fn delta_t_coarse(&self) -> f64 {
        self.delta_t_coarse
    }

    /// Fine substeps per coarse interval.
    #[inline]
    pub fn j_sub(&self) -> u32 {
        self.j_sub
    }

    /// Reference oversampling factor.
    #[inline]
    pub fn rho_ref(&self) -> u32 {
        self.rho_ref
    }

    /// Number of coarse intervals N = T/ΔT.
    #[inline]
    pub fn n_intervals(&self) -> u64 {
        (self.t_end / self.delta_t_coarse) as u64
    }

    /// Fine step Δt = ΔT/J (exact binary fraction).
    #[inline]
    pub fn dt_fine(&self) -> f64 {
        self.delta_t_coarse / self.j_sub as f64
    }

    /// Reference substep Δt/ρ.
    #[inline]
    pub fn dt_reference(&self) -> f64 {
        self.dt_fine() / self.rho_ref as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_dyadic_steps() {
        let t = TimeGridSpec::new(1.0, 0.015625, 4, 16).unwrap();
        assert_eq!(t.n_intervals(), 64);
        assert_eq!(t.dt_fine(), 0.00390625);
        assert_eq!(t.dt_reference(), 0.000244140625);
    }

    #[test]
    fn accepts_non_dyadic_horizon_on_dyadic_lattice() {
        let t = TimeGridSpec::new(10.0, 0.015625, 4, 16).unwrap();
        assert_eq!(t.n_intervals(), 640);
        let t = TimeGridSpec::new(20.0, 0.25, 2, 1).unwrap();
        assert_eq!(t.n_intervals(), 80);
    }

    #[test]
    fn rejects_non_dyadic_steps() {
        assert!(TimeGridSpec::new(1.0, 0.3, 4, 16).is_err());
        assert!(TimeGridSpec::new(1.0, 0.1, 4, 16).is_err());
        assert!(TimeGridSpec::new(1.0, 0.25, 3, 16).is_err());
        assert!(TimeGridSpec::new(1.0, 0.25, 4, 5).is_err());
        assert!(TimeGridSpec::new(1.0, 0.25, 0, 16).is_err());
    }

    #[test]
    fn rejects_misaligned_horizon() {
        assert!(TimeGridSpec::new(0.1, 0.015625, 4, 16).is_err());
        assert!(TimeGridSpec::new(-1.0, 0.25, 1, 1).is_err());
        assert!(TimeGridSpec::new(0.0, 0.25, 1, 1).is_err());
    }
}
