//! Staggered TM fields on the unit square.
//!
//! The unknown is u = (E_z, H_x, H_y) on a Yee-staggered grid over
//! D = [0,1]² with `nx` cells per side and PEC boundary (E_z = 0 on ∂D):
//!
//! - E_z at interior nodes (i·dx, j·dx), 1 ≤ i,j ≤ nx−1
//! - H_x at (i·dx, (j+1/2)·dx), 0 ≤ i ≤ nx, 0 ≤ j ≤ nx−1
//! - H_y at ((i+1/2)·dx, j·dx), 0 ≤ i ≤ nx−1, 0 ≤ j ≤ nx
//!
//! States are stored flat in a fixed order: E_z row-major (i slow, j fast),
//! then H_x row-major, then H_y row-major. Every consumer of the flat layout
//! goes through the index helpers here, so the ordering is bit-reproducible.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Uniform grid over [0,1]²; the spacing is derived as 1/nx and never stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    nx: u32,
}

impl GridSpec {
    pub fn new(nx: u32) -> Result<Self> {
        if nx < 2 {
            return Err(Error::InvalidGrid(format!("nx must be >= 2, got {nx}")));
        }
        Ok(Self { nx })
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.nx as usize
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        1.0 / self.nx as f64
    }

    /// Number of interior E_z nodes, (nx−1)².
    #[inline]
    pub fn n_ez(&self) -> usize {
        let n = self.nx();
        (n - 1) * (n - 1)
    }

    /// Number of H_x nodes, (nx+1)·nx.
    #[inline]
    pub fn n_hx(&self) -> usize {
        let n = self.nx();
        (n + 1) * n
    }

    /// Number of H_y nodes, nx·(nx+1).
    #[inline]
    pub fn n_hy(&self) -> usize {
        let n = self.nx();
        n * (n + 1)
    }

    /// Total degrees of freedom d = (nx−1)² + 2·nx·(nx+1).
    #[inline]
    pub fn dof(&self) -> usize {
        self.n_ez() + self.n_hx() + self.n_hy()
    }

    /// Flat index of E_z node (i, j), 1 ≤ i,j ≤ nx−1.
    #[inline]
    pub fn ez_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i >= 1 && i <= self.nx() - 1 && j >= 1 && j <= self.nx() - 1);
        (i - 1) * (self.nx() - 1) + (j - 1)
    }

    /// Flat index of H_x node (i, j+1/2), 0 ≤ i ≤ nx, 0 ≤ j ≤ nx−1,
    /// relative to the start of the H_x block.
    #[inline]
    pub fn hx_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= self.nx() && j <= self.nx() - 1);
        i * self.nx() + j
    }

    /// Flat index of H_y node (i+1/2, j), 0 ≤ i ≤ nx−1, 0 ≤ j ≤ nx,
    /// relative to the start of the H_y block.
    #[inline]
    pub fn hy_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= self.nx() - 1 && j <= self.nx());
        i * (self.nx() + 1) + j
    }

    /// Offset of the H_x block in the flat state.
    #[inline]
    pub fn hx_offset(&self) -> usize {
        self.n_ez()
    }

    /// Offset of the H_y block in the flat state.
    #[inline]
    pub fn hy_offset(&self) -> usize {
        self.n_ez() + self.n_hx()
    }

    /// Physical coordinates of a node of the given component.
    pub fn node_position(&self, component: Component, i: usize, j: usize) -> (f64, f64) {
        let dx = self.dx();
        match component {
            Component::Ez => (i as f64 * dx, j as f64 * dx),
            Component::Hx => (i as f64 * dx, (j as f64 + 0.5) * dx),
            Component::Hy => ((i as f64 + 0.5) * dx, j as f64 * dx),
        }
    }

    /// Component node counts in flat order.
    pub fn component_len(&self, component: Component) -> usize {
        match component {
            Component::Ez => self.n_ez(),
            Component::Hx => self.n_hx(),
            Component::Hy => self.n_hy(),
        }
    }

    /// Iterate (i, j) pairs of a component in flat order.
    pub fn component_nodes(&self, component: Component) -> Vec<(usize, usize)> {
        let nx = self.nx();
        let mut out = Vec::with_capacity(self.component_len(component));
        match component {
            Component::Ez => {
                for i in 1..nx {
                    for j in 1..nx {
                        out.push((i, j));
                    }
                }
            }
            Component::Hx => {
                for i in 0..=nx {
                    for j in 0..nx {
                        out.push((i, j));
                    }
                }
            }
            Component::Hy => {
                for i in 0..nx {
                    for j in 0..=nx {
                        out.push((i, j));
                    }
                }
            }
        }
        out
    }
}

/// Field component selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Ez,
    Hx,
    Hy,
}

/// Constant material coefficients: permittivity, permeability, damping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxwellCoefficients {
    pub eps: f64,
    pub mu: f64,
    pub sigma: f64,
}

impl MaxwellCoefficients {
    pub fn new(eps: f64, mu: f64, sigma: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidCoefficients(format!("eps must be > 0, got {eps}")));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidCoefficients(format!("mu must be > 0, got {mu}")));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidCoefficients(format!("sigma must be >= 0, got {sigma}")));
        }
        Ok(Self { eps, mu, sigma })
    }

    pub fn unit() -> Self {
        Self { eps: 1.0, mu: 1.0, sigma: 0.0 }
    }
}

/// Discrete state u = (E_z, H_x, H_y), stored flat in the documented order.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    nx: u32,
    data: DVector<f64>,
}

impl FieldState {
    pub fn zeros(grid: GridSpec) -> Self {
        Self { nx: grid.nx() as u32, data: DVector::zeros(grid.dof()) }
    }

    /// Build from per-component values in flat component order.
    pub fn from_components(grid: GridSpec, ez: &[f64], hx: &[f64], hy: &[f64]) -> Result<Self> {
        if ez.len() != grid.n_ez() || hx.len() != grid.n_hx() || hy.len() != grid.n_hy() {
            return Err(Error::DimensionMismatch(format!(
                "component lengths ({}, {}, {}) do not match grid nx={} ({}, {}, {})",
                ez.len(),
                hx.len(),
                hy.len(),
                grid.nx(),
                grid.n_ez(),
                grid.n_hx(),
                grid.n_hy()
            )));
        }
        let mut data = DVector::zeros(grid.dof());
        data.as_mut_slice()[..ez.len()].copy_from_slice(ez);
        data.as_mut_slice()[grid.hx_offset()..grid.hy_offset()].copy_from_slice(hx);
        data.as_mut_slice()[grid.hy_offset()..].copy_from_slice(hy);
        Ok(Self { nx: grid.nx() as u32, data })
    }

    /// Build by evaluating a function at every node, in flat order.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(Component, usize, usize) -> f64) -> Self {
        let mut state = Self::zeros(grid);
        let mut idx = 0;
        for component in [Component::Ez, Component::Hx, Component::Hy] {
            for (i, j) in grid.component_nodes(component) {
                state.data[idx] = f(component, i, j);
                idx += 1;
            }
        }
        state
    }

    pub fn from_vector(grid: GridSpec, data: DVector<f64>) -> Result<Self> {
        if data.len() != grid.dof() {
            return Err(Error::DimensionMismatch(format!(
                "vector length {} does not match grid dof {}",
                data.len(),
                grid.dof()
            )));
        }
        Ok(Self { nx: grid.nx() as u32, data })
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.nx as usize
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec::new(self.nx).expect("stored nx is valid")
    }

    #[inline]
    pub fn dof(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn as_vector(&self) -> &DVector<f64> {
        &self.data
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        self.data.as_slice()
    }

    pub fn ez(&self) -> &[f64] {
        let g = self.grid();
        &self.data.as_slice()[..g.n_ez()]
    }

    pub fn hx(&self) -> &[f64] {
        let g = self.grid();
        &self.data.as_slice()[g.hx_offset()..g.hy_offset()]
    }

    pub fn hy(&self) -> &[f64] {
        let g = self.grid();
        &self.data.as_slice()[g.hy_offset()..]
    }

    pub fn component(&self, component: Component) -> &[f64] {
        match component {
            Component::Ez => self.ez(),
            Component::Hx => self.hx(),
            Component::Hy => self.hy(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Pointwise map over every stored value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { nx: self.nx, data: self.data.map(f) }
    }

    /// Elementwise sum; panics on mismatched grids (internal arithmetic).
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nx, other.nx, "FieldState grids must match");
        Self { nx: self.nx, data: &self.data + &other.data }
    }

    /// Elementwise difference; panics on mismatched grids.
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.nx, other.nx, "FieldState grids must match");
        Self { nx: self.nx, data: &self.data - &other.data }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { nx: self.nx, data: &self.data * a }
    }
}

/// Weighted inner product ⟨u, v⟩ = dx²·(ε Σ E_z·E_z' + μ Σ H_x·H_x' + μ Σ H_y·H_y'),
/// rectangle rule on each component's own staggered node set.
pub fn inner_product(
    coeffs: &MaxwellCoefficients,
    grid: &GridSpec,
    u: &FieldState,
    v: &FieldState,
) -> Result<f64> {
    if u.nx() != grid.nx() || v.nx() != grid.nx() {
        return Err(Error::DimensionMismatch(format!(
            "states on nx = {}, {} do not match grid nx = {}",
            u.nx(),
            v.nx(),
            grid.nx()
        )));
    }
    let dot = |a: &[f64], b: &[f64]| -> f64 {
        let mut s = 0.0;
        for (x, y) in a.iter().zip(b) {
            s += x * y;
        }
        s
    };
    let s_ez = dot(u.ez(), v.ez());
    let s_hx = dot(u.hx(), v.hx());
    let s_hy = dot(u.hy(), v.hy());
    let dx2 = grid.dx() * grid.dx();
    Ok(dx2 * (coeffs.eps * s_ez + coeffs.mu * s_hx + coeffs.mu * s_hy))
}

/// Weighted norm ‖u‖ = sqrt(⟨u, u⟩).
pub fn h_norm(coeffs: &MaxwellCoefficients, grid: &GridSpec, u: &FieldState) -> Result<f64> {
    Ok(inner_product(coeffs, grid, u, u)?.sqrt())
}

/// Squared weighted norm of u − v without allocating the difference.
pub fn h_norm_sq_diff(
    coeffs: &MaxwellCoefficients,
    grid: &GridSpec,
    u: &FieldState,
    v: &FieldState,
) -> Result<f64> {
    if u.nx() != grid.nx() || v.nx() != grid.nx() {
        return Err(Error::DimensionMismatch("states do not match grid".into()));
    }
    let acc = |a: &[f64], b: &[f64]| -> f64 {
        let mut s = 0.0;
        for (x, y) in a.iter().zip(b) {
            let d = x - y;
            s += d * d;
        }
        s
    };
    let dx2 = grid.dx() * grid.dx();
    Ok(dx2
        * (coeffs.eps * acc(u.ez(), v.ez())
            + coeffs.mu * acc(u.hx(), v.hx())
            + coeffs.mu * acc(u.hy(), v.hy())))
}
