//! Discrete damped Maxwell operator and its exact semigroup.
//!
//! The TM curl system on the staggered grid reads
//!
//! ```text
//! (Mu)_Ez(i,j) = ( (Hy[i][j] − Hy[i−1][j]) − (Hx[i][j] − Hx[i][j−1]) ) / (ε·dx)
//! (Mu)_Hx(i,j) = −(Ez[i][j+1] − Ez[i][j]) / (μ·dx)
//! (Mu)_Hy(i,j) = +(Ez[i+1][j] − Ez[i][j]) / (μ·dx)
//! ```
//!
//! with E_z = 0 on the boundary nodes. The staggering makes M exactly
//! skew-adjoint in the ε,μ-weighted inner product, so ⟨Mu, u⟩ = 0 holds to
//! rounding and e^{Δ(M−σI)} contracts with the exact factor e^{−σΔ}.
//!
//! The semigroup is applied through a dense matrix exponential cached per
//! step size; σ commutes with M, so the cached matrix is e^{−σΔ}·e^{ΔM}.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::field::{h_norm, h_norm_sq_diff, inner_product, FieldState, GridSpec, MaxwellCoefficients};

pub struct DiscreteMaxwellOperator {
    grid: GridSpec,
    coeffs: MaxwellCoefficients,
    m_matrix: DMatrix<f64>,
    semigroup_cache: RwLock<HashMap<u64, Arc<DMatrix<f64>>>>,
}

impl DiscreteMaxwellOperator {
    /// Assemble M for the given grid and coefficients. The matrix is built
    /// once; the semigroup cache starts empty.
    pub fn build(grid: GridSpec, coeffs: MaxwellCoefficients) -> Result<Self> {
        let nx = grid.nx();
        let d = grid.dof();
        let dx = grid.dx();
        let ce = 1.0 / (coeffs.eps * dx);
        let cm = 1.0 / (coeffs.mu * dx);
        let hx0 = grid.hx_offset();
        let hy0 = grid.hy_offset();

        let mut m = DMatrix::<f64>::zeros(d, d);
        // E_z rows: discrete (curl H)_z / ε.
        for i in 1..nx {
            for j in 1..nx {
                let r = grid.ez_index(i, j);
                m[(r, hy0 + grid.hy_index(i, j))] += ce;
                m[(r, hy0 + grid.hy_index(i - 1, j))] -= ce;
                m[(r, hx0 + grid.hx_index(i, j))] -= ce;
                m[(r, hx0 + grid.hx_index(i, j - 1))] += ce;
            }
        }
        // H_x rows: −(∂_y E_z) / μ, boundary E_z contributes zero.
        for i in 0..=nx {
            for j in 0..nx {
                let r = hx0 + grid.hx_index(i, j);
                let interior_i = i >= 1 && i <= nx - 1;
                if interior_i && j + 1 <= nx - 1 {
                    m[(r, grid.ez_index(i, j + 1))] -= cm;
                }
                if interior_i && j >= 1 {
                    m[(r, grid.ez_index(i, j))] += cm;
                }
            }
        }
        // H_y rows: +(∂_x E_z) / μ.
        for i in 0..nx {
            for j in 0..=nx {
                let r = hy0 + grid.hy_index(i, j);
                let interior_j = j >= 1 && j <= nx - 1;
                if interior_j && i + 1 <= nx - 1 {
                    m[(r, grid.ez_index(i + 1, j))] += cm;
                }
                if interior_j && i >= 1 {
                    m[(r, grid.ez_index(i, j))] -= cm;
                }
            }
        }

        Ok(Self { grid, coeffs, m_matrix: m, semigroup_cache: RwLock::new(HashMap::new()) })
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> MaxwellCoefficients {
        self.coeffs
    }

    /// Assembled curl matrix (undamped part).
    pub fn m_matrix(&self) -> &DMatrix<f64> {
        &self.m_matrix
    }

    fn check_state(&self, u: &FieldState) -> Result<()> {
        if u.nx() != self.grid.nx() {
            return Err(Error::DimensionMismatch(format!(
                "state nx = {} does not match operator nx = {}",
                u.nx(),
                self.grid.nx()
            )));
        }
        Ok(())
    }

    /// (M − σI)u, computed as m_matrix·u followed by the componentwise
    /// subtraction of σu; bit-for-bit the matrix action minus the damping.
    pub fn apply_curl_damped(&self, u: &FieldState) -> Result<FieldState> {
        self.check_state(u)?;
        let mut y: DVector<f64> = &self.m_matrix * u.as_vector();
        let sigma = self.coeffs.sigma;
        for (yi, ui) in y.iter_mut().zip(u.as_vector().iter()) {
            *yi -= sigma * ui;
        }
        FieldState::from_vector(self.grid, y)
    }

    /// Cached Ŝ(Δ) = e^{Δ(M−σI)}; population is deterministic, so concurrent
    /// computations of the same Δ insert identical bytes.
    pub fn semigroup(&self, delta: f64) -> Result<Arc<DMatrix<f64>>> {
        if !delta.is_finite() {
            return Err(Error::NonFinite(format!("semigroup step {delta}")));
        }
        if delta < 0.0 {
            return Err(Error::NegativeStep(delta));
        }
        let key = delta.to_bits();
        if let Some(hit) = self.semigroup_cache.read().expect("cache lock").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let mut e = expm(&(&self.m_matrix * delta));
        e *= (-self.coeffs.sigma * delta).exp();
        let entry = Arc::new(e);
        let mut cache = self.semigroup_cache.write().expect("cache lock");
        let stored = cache.entry(key).or_insert_with(|| Arc::clone(&entry));
        Ok(Arc::clone(stored))
    }

    /// Ŝ(Δ)u. Δ = 0 returns u unchanged; the cache is populated on first use
    /// of each Δ.
    pub fn semigroup_apply(&self, delta: f64, u: &FieldState) -> Result<FieldState> {
        self.check_state(u)?;
        if !u.is_finite() {
            return Err(Error::NonFinite("semigroup input state".into()));
        }
        if !delta.is_finite() {
            return Err(Error::NonFinite(format!("semigroup step {delta}")));
        }
        if delta < 0.0 {
            return Err(Error::NegativeStep(delta));
        }
        if delta == 0.0 {
            return Ok(u.clone());
        }
        let s = self.semigroup(delta)?;
        FieldState::from_vector(self.grid, &*s * u.as_vector())
    }

    /// Number of cached semigroup matrices.
    pub fn cached_steps(&self) -> usize {
        self.semigroup_cache.read().expect("cache lock").len()
    }

    pub fn inner_product(&self, u: &FieldState, v: &FieldState) -> Result<f64> {
        inner_product(&self.coeffs, &self.grid, u, v)
    }

    pub fn h_norm(&self, u: &FieldState) -> Result<f64> {
        h_norm(&self.coeffs, &self.grid, u)
    }

    pub fn h_norm_sq_diff(&self, u: &FieldState, v: &FieldState) -> Result<f64> {
        h_norm_sq_diff(&self.coeffs, &self.grid, u, v)
    }
}

impl std::fmt::Debug for DiscreteMaxwellOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiscreteMaxwellOperator")
            .field("grid", &self.grid)
            .field("coeffs", &self.coeffs)
            .field("dof", &self.grid.dof())
            .field("cached_steps", &self.cached_steps())
            .finish()
    }
}
