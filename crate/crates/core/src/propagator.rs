//! Stochastic exponential integrator as coarse, fine and reference
//! propagator.
//!
//! One step over [t0, t1] with Δ = t1 − t0 and ΔW = W(t1) − W(t0):
//!
//! ```text
//! u' = Ŝ(Δ)·(u + F(u)·Δ + B(u)·ΔW)
//! ```
//!
//! which applies the semigroup once to the combined vector; by linearity of
//! Ŝ(Δ) this is the same map as applying Ŝ to each term separately. The
//! diffusion multiplies the increment evaluated at the left endpoint (Itô
//! form, no Milstein correction).
//!
//! The coarse propagator is one step of size ΔT; the fine propagator is J
//! sequential steps of size Δt; the reference propagator runs J·ρ steps of
//! size Δt/ρ on the same path, standing in for the exact integrator.

use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::noise::{increment_state, NoiseBasis, WienerPath, Window};
use crate::nonlinearity::NonlinearitySpec;
use crate::operator::DiscreteMaxwellOperator;
use crate::time_grid::TimeGridSpec;

/// Which propagator plays the fine role.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FineKind {
    /// Stochastic exponential steps of size Δt.
    Exponential,
    /// Oversampled exponential steps of size Δt/ρ (exact-integrator proxy).
    Reference,
}

/// Everything a propagator evaluation needs, borrowed immutably so
/// evaluations on disjoint intervals can run concurrently.
pub struct StepContext<'a> {
    pub op: &'a DiscreteMaxwellOperator,
    pub nonlinearity: &'a NonlinearitySpec,
    pub basis: &'a NoiseBasis,
    pub path: &'a WienerPath,
    pub time: &'a TimeGridSpec,
    lattice_per_interval: u64,
    lattice_per_fine: u64,
    lattice_per_ref: Option<u64>,
}

impl<'a> StepContext<'a> {
    pub fn new(
        op: &'a DiscreteMaxwellOperator,
        nonlinearity: &'a NonlinearitySpec,
        basis: &'a NoiseBasis,
        path: &'a WienerPath,
        time: &'a TimeGridSpec,
    ) -> Result<Self> {
        if basis.grid() != op.grid() {
            return Err(Error::MismatchedRuns("basis grid does not match operator grid".into()));
        }
        if time.t_end() > path.t_end() {
            return Err(Error::MismatchedRuns(format!(
                "path horizon {} shorter than time grid horizon {}",
                path.t_end(),
                time.t_end()
            )));
        }
        let exact_ratio = |step: f64| -> Option<u64> {
            let q = step / path.delta_ref();
            if q.is_finite() && q >= 1.0 && q.fract() == 0.0 {
                Some(q as u64)
            } else {
                None
            }
        };
        let lattice_per_fine = exact_ratio(time.dt_fine()).ok_or_else(|| {
            Error::NonDyadicRatio(format!(
                "fine step {} is not a multiple of the path lattice {}",
                time.dt_fine(),
                path.delta_ref()
            ))
        })?;
        let lattice_per_interval = lattice_per_fine * time.j_sub() as u64;
        let lattice_per_ref = exact_ratio(time.dt_reference());
        Ok(Self {
            op,
            nonlinearity,
            basis,
            path,
            time,
            lattice_per_interval,
            lattice_per_fine,
            lattice_per_ref,
        })
    }

    fn check_interval(&self, n: u64) -> Result<()> {
        let n_max = self.time.n_intervals();
        if n < 1 || n > n_max {
            return Err(Error::IntervalOutOfRange { n, n_max });
        }
        Ok(())
    }

    /// One exponential step over an aligned lattice window.
    pub fn step_window(&self, u: &FieldState, window: Window) -> Result<FieldState> {
        if window.is_empty() {
            return Err(Error::NegativeStep(0.0));
        }
        let delta = window.len() as f64 * self.path.delta_ref();
        let nl = self.nonlinearity;
        let grid = self.op.grid();
        let use_drift = !matches!(nl.drift, crate::nonlinearity::DriftKind::Zero);
        let use_noise = !nl.is_deterministic() && self.basis.n_modes() > 0;
        let dw = if use_noise {
            Some(increment_state(self.basis, self.path, window)?)
        } else {
            None
        };
        let data = nalgebra::DVector::from_iterator(
            grid.dof(),
            u.as_slice().iter().enumerate().map(|(k, &x)| {
                let mut y = x;
                if use_drift {
                    y += delta * nl.drift_value(x);
                }
                if let Some(dw) = &dw {
                    y += nl.diffusion_value(x) * dw.as_slice()[k];
                }
                y
            }),
        );
        let v = FieldState::from_vector(grid, data)?;
        self.op.semigroup_apply(delta, &v)
    }

    /// One exponential step over [t0, t1]; the window must lie on the path
    /// lattice and have positive length.
    pub fn exponential_step(&self, u: &FieldState, t0: f64, t1: f64) -> Result<FieldState> {
        let window = self.path.window_from_times(t0, t1)?;
        self.step_window(u, window)
    }

    /// Coarse propagator: one exponential step across interval n.
    pub fn coarse_g(&self, u: &FieldState, n: u64) -> Result<FieldState> {
        self.check_interval(n)?;
        let start = (n - 1) * self.lattice_per_interval;
        self.step_window(u, Window { start, end: start + self.lattice_per_interval })
    }

    /// Fine propagator: J sequential exponential steps across interval n.
    pub fn fine_exponential(&self, u: &FieldState, n: u64) -> Result<FieldState> {
        self.check_interval(n)?;
        let base = (n - 1) * self.lattice_per_interval;
        let mut state = u.clone();
        for j in 0..self.time.j_sub() as u64 {
            let start = base + j * self.lattice_per_fine;
            state = self.step_window(&state, Window { start, end: start + self.lattice_per_fine })?;
        }
        Ok(state)
    }

    /// Reference propagator: J·ρ sequential steps of size Δt/ρ across
    /// interval n, consuming the same path.
    pub fn fine_reference(&self, u: &FieldState, n: u64) -> Result<FieldState> {
        self.check_interval(n)?;
        let per_ref = self.lattice_per_ref.ok_or_else(|| {
            Error::PathResolution(format!(
                "reference substep {} is finer than the stored lattice {}",
                self.time.dt_reference(),
                self.path.delta_ref()
            ))
        })?;
        let base = (n - 1) * self.lattice_per_interval;
        let count = self.time.j_sub() as u64 * self.time.rho_ref() as u64;
        let mut state = u.clone();
        for j in 0..count {
            let start = base + j * per_ref;
            state = self.step_window(&state, Window { start, end: start + per_ref })?;
        }
        Ok(state)
    }

    /// Fine propagator of the configured kind.
    pub fn fine(&self, kind: FineKind, u: &FieldState, n: u64) -> Result<FieldState> {
        match kind {
            FineKind::Exponential => self.fine_exponential(u, n),
            FineKind::Reference => self.fine_reference(u, n),
        }
    }

    /// Pre-populate the semigroup cache for every step size this context can
    /// consume, so concurrent sweeps never race on the first exponential.
    pub fn warm_semigroup_cache(&self, kind: FineKind) -> Result<()> {
        self.op.semigroup(self.time.delta_t_coarse())?;
        match kind {
            FineKind::Exponential => {
                self.op.semigroup(self.time.dt_fine())?;
            }
            FineKind::Reference => {
                self.op.semigroup(self.time.dt_reference())?;
            }
        }
        Ok(())
    }
}
