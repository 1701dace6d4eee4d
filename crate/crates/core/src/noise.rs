//! Truncated Q-Wiener process with hierarchically consistent increments.
//!
//! The covariance has eigenpairs λ_{m,n} = (m²+n²)^{−r} and
//! e_{m,n}(x,y) = 2 sin(mπx) sin(nπy), orthonormal on [0,1]² and compatible
//! with the PEC boundary. A path stores per-mode Brownian increments on the
//! finest lattice (step `delta_ref`); every coarser window is *defined* as
//! the left-to-right sum of its finest single-step fields, so coarse and
//! fine propagators consume exactly the same W with zero floating-point
//! discrepancy.
//!
//! Increment generation is counter-indexed by (seed, sample, mode, substep):
//! regenerating a path reproduces identical bytes independent of threads.

use crate::error::{Error, Result};
use crate::field::{Component, FieldState, GridSpec};
use crate::rng;

/// One covariance mode: indices and eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseMode {
    pub m: u32,
    pub n: u32,
    pub lambda: f64,
}

/// Truncated covariance basis with eigenfunctions tabulated at every
/// staggered node of every field component (pre-scaled by √λ).
pub struct NoiseBasis {
    grid: GridSpec,
    decay_r: f64,
    modes: Vec<NoiseMode>,
    // tab[component][mode * n_nodes + node] = sqrt(λ) · e_{m,n}(node)
    tab_ez: Vec<f64>,
    tab_hx: Vec<f64>,
    tab_hy: Vec<f64>,
}

/// λ_{m,n} = (m² + n²)^{−r}, the assumed trace-class decay.
pub fn mode_eigenvalue(m: u32, n: u32, decay_r: f64) -> f64 {
    ((m * m + n * n) as f64).powf(-decay_r)
}

/// Build the truncated basis with `n_modes`² modes. `decay_r` must exceed 1
/// so the full (untruncated) trace stays finite.
pub fn build_basis(grid: GridSpec, n_modes: u32, decay_r: f64) -> Result<NoiseBasis> {
    if !(decay_r.is_finite() && decay_r > 1.0) {
        return Err(Error::InvalidBasis(format!(
            "decay_r must be > 1 for a trace-class covariance, got {decay_r}"
        )));
    }
    let mut modes = Vec::with_capacity((n_modes * n_modes) as usize);
    for m in 1..=n_modes {
        for n in 1..=n_modes {
            modes.push(NoiseMode { m, n, lambda: mode_eigenvalue(m, n, decay_r) });
        }
    }
    // Descending eigenvalue, ties broken by (m, n) for a stable order.
    modes.sort_by(|a, b| {
        b.lambda
            .partial_cmp(&a.lambda)
            .unwrap()
            .then(a.m.cmp(&b.m))
            .then(a.n.cmp(&b.n))
    });

    let tabulate = |component: Component| -> Vec<f64> {
        let nodes = grid.component_nodes(component);
        let mut tab = vec![0.0; modes.len() * nodes.len()];
        for (k, mode) in modes.iter().enumerate() {
            let amp = mode.lambda.sqrt();
            let mf = mode.m as f64 * std::f64::consts::PI;
            let nf = mode.n as f64 * std::f64::consts::PI;
            for (node, &(i, j)) in nodes.iter().enumerate() {
                let (x, y) = grid.node_position(component, i, j);
                tab[k * nodes.len() + node] = amp * 2.0 * (mf * x).sin() * (nf * y).sin();
            }
        }
        tab
    };

    Ok(NoiseBasis {
        grid,
        decay_r,
        tab_ez: tabulate(Component::Ez),
        tab_hx: tabulate(Component::Hx),
        tab_hy: tabulate(Component::Hy),
        modes,
    })
}

impl NoiseBasis {
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn decay_r(&self) -> f64 {
        self.decay_r
    }

    pub fn modes(&self) -> &[NoiseMode] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// Trace of the truncated covariance, Σ λ in stored (descending) order.
    pub fn trace(&self) -> f64 {
        let mut s = 0.0;
        for m in &self.modes {
            s += m.lambda;
        }
        s
    }

    fn tab(&self, component: Component) -> &[f64] {
        match component {
            Component::Ez => &self.tab_ez,
            Component::Hx => &self.tab_hx,
            Component::Hy => &self.tab_hy,
        }
    }
}

impl std::fmt::Debug for NoiseBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NoiseBasis")
            .field("grid", &self.grid)
            .field("decay_r", &self.decay_r)
            .field("n_modes", &self.modes.len())
            .field("trace", &self.trace())
            .finish()
    }
}

/// True when x is an exact (normal) power of two.
pub fn is_power_of_two_f64(x: f64) -> bool {
    if !x.is_finite() || x <= 0.0 {
        return false;
    }
    let bits = x.to_bits();
    let mantissa = bits & ((1u64 << 52) - 1);
    let exponent = (bits >> 52) & 0x7FF;
    mantissa == 0 && exponent >= 1 && exponent <= 2046
}

/// Aligned window on the finest increment lattice, in units of `delta_ref`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: u64,
    pub end: u64,
}

impl Window {
    pub fn len(&self) -> u64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Per-mode Brownian increments at the finest resolution.
pub struct WienerPath {
    seed: u64,
    sample_index: u64,
    t_end: f64,
    delta_ref: f64,
    n_steps: u64,
    mode_ids: Vec<(u32, u32)>,
    // increments[mode * n_steps + step] ~ N(0, delta_ref)
    increments: Vec<f64>,
}

/// Sample the whole path for every basis mode. Deterministic in
/// (seed, sample_index, mode, substep); the same inputs reproduce the same
/// bytes.
pub fn sample_path(
    basis: &NoiseBasis,
    seed: u64,
    sample_index: u64,
    t_end: f64,
    delta_ref: f64,
) -> Result<WienerPath> {
    if !is_power_of_two_f64(delta_ref) {
        return Err(Error::NonDyadicRatio(format!(
            "delta_ref must be an exact power of two, got {delta_ref}"
        )));
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidTimeGrid(format!("t_end must be > 0, got {t_end}")));
    }
    let ratio = t_end / delta_ref;
    if ratio.fract() != 0.0 || ratio < 1.0 || ratio > 2f64.powi(40) {
        return Err(Error::NonDyadicRatio(format!(
            "t_end / delta_ref = {ratio} is not an exact step count"
        )));
    }
    let n_steps = ratio as u64;
    let scale = delta_ref.sqrt();
    let n_modes = basis.n_modes();
    let mut increments = vec![0.0; n_modes * n_steps as usize];
    let mut mode_ids = Vec::with_capacity(n_modes);
    for (k, mode) in basis.modes().iter().enumerate() {
        let tag = ((mode.m as u64) << 32) | mode.n as u64;
        mode_ids.push((mode.m, mode.n));
        let row = &mut increments[k * n_steps as usize..(k + 1) * n_steps as usize];
        for (step, slot) in row.iter_mut().enumerate() {
            *slot = scale * rng::standard_normal(rng::key(seed, sample_index, tag, step as u64));
        }
    }
    Ok(WienerPath { seed, sample_index, t_end, delta_ref, n_steps, mode_ids, increments })
}

impl WienerPath {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sample_index(&self) -> u64 {
        self.sample_index
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn delta_ref(&self) -> f64 {
        self.delta_ref
    }

    pub fn n_steps(&self) -> u64 {
        self.n_steps
    }

    pub fn n_modes(&self) -> usize {
        self.mode_ids.len()
    }

    /// Raw increments of one mode over the finest lattice.
    pub fn mode_increments(&self, k: usize) -> &[f64] {
        &self.increments[k * self.n_steps as usize..(k + 1) * self.n_steps as usize]
    }

    /// Convert a [t0, t1] window to lattice indices, rejecting anything not
    /// aligned to the `delta_ref` lattice.
    pub fn window_from_times(&self, t0: f64, t1: f64) -> Result<Window> {
        let unaligned = Error::UnalignedWindow { t0, t1, delta_ref: self.delta_ref };
        let q0 = t0 / self.delta_ref;
        let q1 = t1 / self.delta_ref;
        if !(q0.is_finite() && q1.is_finite()) || q0.fract() != 0.0 || q1.fract() != 0.0 {
            return Err(unaligned);
        }
        if q0 < 0.0 || q1 < q0 || q1 > self.n_steps as f64 {
            return Err(unaligned);
        }
        Ok(Window { start: q0 as u64, end: q1 as u64 })
    }

    fn check_window(&self, w: Window) -> Result<()> {
        if w.end < w.start || w.end > self.n_steps {
            return Err(Error::UnalignedWindow {
                t0: w.start as f64 * self.delta_ref,
                t1: w.end as f64 * self.delta_ref,
                delta_ref: self.delta_ref,
            });
        }
        Ok(())
    }

    fn matches(&self, basis: &NoiseBasis) -> Result<()> {
        if basis.n_modes() != self.mode_ids.len()
            || basis.modes().iter().zip(&self.mode_ids).any(|(m, id)| (m.m, m.n) != *id)
        {
            return Err(Error::MismatchedRuns(
                "path modes do not match the supplied basis".into(),
            ));
        }
        Ok(())
    }
}

impl std::fmt::Debug for WienerPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WienerPath")
            .field("seed", &self.seed)
            .field("sample_index", &self.sample_index)
            .field("t_end", &self.t_end)
            .field("delta_ref", &self.delta_ref)
            .field("n_steps", &self.n_steps)
            .field("n_modes", &self.mode_ids.len())
            .finish()
    }
}

/// Accumulate one finest-step field into `out`: out += Σ_k tab_k · coeff_k,
/// column (mode) outer, node inner. Both the per-component and whole-state
/// paths go through this routine so they agree bitwise.
fn accumulate_single(tab: &[f64], n_nodes: usize, coeffs: &[f64], out: &mut [f64]) {
    debug_assert_eq!(out.len(), n_nodes);
    debug_assert_eq!(tab.len(), n_nodes * coeffs.len());
    for (k, &c) in coeffs.iter().enumerate() {
        let col = &tab[k * n_nodes..(k + 1) * n_nodes];
        for (o, t) in out.iter_mut().zip(col) {
            *o += t * c;
        }
    }
}

fn window_field(
    basis: &NoiseBasis,
    path: &WienerPath,
    window: Window,
    components: &[(Component, usize)],
    out: &mut [f64],
) {
    let n_steps = path.n_steps as usize;
    let n_modes = basis.n_modes();
    let mut coeff = vec![0.0; n_modes];
    let mut single = vec![0.0; out.len()];
    for step in window.start..window.end {
        for k in 0..n_modes {
            coeff[k] = path.increments[k * n_steps + step as usize];
        }
        single.iter_mut().for_each(|v| *v = 0.0);
        let mut offset = 0;
        for &(component, len) in components {
            accumulate_single(basis.tab(component), len, &coeff, &mut single[offset..offset + len]);
            offset += len;
        }
        for (o, s) in out.iter_mut().zip(&single) {
            *o += s;
        }
    }
}

/// ΔW over [t0, t1] at one component's staggered nodes: the left-to-right
/// sum of the window's single-step fields.
pub fn increment_field(
    basis: &NoiseBasis,
    path: &WienerPath,
    t0: f64,
    t1: f64,
    component: Component,
) -> Result<Vec<f64>> {
    path.matches(basis)?;
    let window = path.window_from_times(t0, t1)?;
    let n_nodes = basis.grid.component_len(component);
    let mut out = vec![0.0; n_nodes];
    window_field(basis, path, window, &[(component, n_nodes)], &mut out);
    Ok(out)
}

/// ΔW over an aligned lattice window at every node of every component,
/// packed in state order.
pub fn increment_state(basis: &NoiseBasis, path: &WienerPath, window: Window) -> Result<FieldState> {
    path.matches(basis)?;
    path.check_window(window)?;
    let grid = basis.grid;
    let mut out = vec![0.0; grid.dof()];
    let components = [
        (Component::Ez, grid.n_ez()),
        (Component::Hx, grid.n_hx()),
        (Component::Hy, grid.n_hy()),
    ];
    window_field(basis, path, window, &components, &mut out);
    FieldState::from_components(grid, &out[..grid.n_ez()], &out[grid.hx_offset()..grid.hy_offset()], &out[grid.hy_offset()..])
}
