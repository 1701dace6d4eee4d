//! Pointwise drift and diffusion nonlinearities.
//!
//! F and B act componentwise on every stored value (Nemytskii operators);
//! the diffusion multiplies the scalar noise field evaluated at the same
//! node. Every admissible kind is globally Lipschitz with a known constant.

use crate::error::{Error, Result};
use crate::field::FieldState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriftKind {
    /// f(v) = v + cos v
    UPlusCos,
    /// f(v) = cos v
    Cos,
    /// f(v) = 0
    Zero,
    /// f(v) = a·v
    Linear(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiffusionKind {
    /// g(v) = sin v
    Sin,
    /// g(v) = v
    Identity,
    /// g(v) = 0
    Zero,
    /// g(v) = c (additive-noise degenerate case)
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearitySpec {
    pub drift: DriftKind,
    pub diffusion: DiffusionKind,
}

impl NonlinearitySpec {
    pub fn new(drift: DriftKind, diffusion: DiffusionKind) -> Self {
        Self { drift, diffusion }
    }

    /// F = 0, B = 0: the propagators degenerate to the pure semigroup.
    pub fn none() -> Self {
        Self { drift: DriftKind::Zero, diffusion: DiffusionKind::Zero }
    }

    #[inline]
    pub fn drift_value(&self, v: f64) -> f64 {
        match self.drift {
            DriftKind::UPlusCos => v + v.cos(),
            DriftKind::Cos => v.cos(),
            DriftKind::Zero => 0.0,
            DriftKind::Linear(a) => a * v,
        }
    }

    #[inline]
    pub fn diffusion_value(&self, v: f64) -> f64 {
        match self.diffusion {
            DiffusionKind::Sin => v.sin(),
            DiffusionKind::Identity => v,
            DiffusionKind::Zero => 0.0,
            DiffusionKind::Constant(c) => c,
        }
    }

    /// Global Lipschitz constant of the drift.
    pub fn drift_lipschitz(&self) -> f64 {
        match self.drift {
            DriftKind::UPlusCos => 2.0,
            DriftKind::Cos => 1.0,
            DriftKind::Zero => 0.0,
            DriftKind::Linear(a) => a.abs(),
        }
    }

    /// Global Lipschitz constant of the diffusion.
    pub fn diffusion_lipschitz(&self) -> f64 {
        match self.diffusion {
            DiffusionKind::Sin | DiffusionKind::Identity => 1.0,
            DiffusionKind::Zero | DiffusionKind::Constant(_) => 0.0,
        }
    }

    /// True when the diffusion vanishes identically, making every
    /// propagator deterministic and seed-independent.
    pub fn is_deterministic(&self) -> bool {
        self.diffusion == DiffusionKind::Zero
    }

    pub fn drift_name(&self) -> &'static str {
        match self.drift {
            DriftKind::UPlusCos => "u_plus_cos",
            DriftKind::Cos => "cos",
            DriftKind::Zero => "zero",
            DriftKind::Linear(_) => "linear",
        }
    }

    pub fn diffusion_name(&self) -> &'static str {
        match self.diffusion {
            DiffusionKind::Sin => "sin",
            DiffusionKind::Identity => "identity",
            DiffusionKind::Zero => "zero",
            DiffusionKind::Constant(_) => "constant",
        }
    }
}

/// F(u): the drift applied at every node.
pub fn apply_drift(spec: &NonlinearitySpec, u: &FieldState) -> FieldState {
    u.map(|v| spec.drift_value(v))
}

/// B(u)·dW: the pointwise product g(u)·dW per component; bilinear in dW.
pub fn apply_diffusion(spec: &NonlinearitySpec, u: &FieldState, dw: &FieldState) -> Result<FieldState> {
    if u.nx() != dw.nx() {
        return Err(Error::DimensionMismatch(format!(
            "state nx = {} and increment nx = {} differ",
            u.nx(),
            dw.nx()
        )));
    }
    let grid = u.grid();
    let data = nalgebra::DVector::from_iterator(
        u.dof(),
        u.as_slice().iter().zip(dw.as_slice()).map(|(&v, &w)| spec.diffusion_value(v) * w),
    );
    FieldState::from_vector(grid, data)
}
