//! Run configuration: TOML sections with defaults, `--set` overrides, and
//! validation into the solver's typed structures.
//!
//! Unknown keys are rejected. Every validated run writes the effective
//! configuration next to its outputs so the run is reproducible from that
//! echo alone.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use parawell::harness::{CostModelParams, EfficiencyOptions, ModelConfig, StudySpec};
use parawell::{
    DiffusionKind, DriftKind, FineKind, GridSpec, MaxwellCoefficients, NonlinearitySpec,
    TimeGridSpec,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub grid: GridSection,
    pub coefficients: CoefficientsSection,
    pub noise: NoiseSection,
    pub nonlinearity: NonlinearitySection,
    pub time: TimeSection,
    pub parareal: PararealSection,
    pub study: StudySection,
    pub costmodel: CostModelSection,
    pub output_dir: String,
    /// Worker threads for sample- and interval-level parallelism; 0 uses
    /// every core. Results are bit-identical for any value.
    pub threads: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: GridSection::default(),
            coefficients: CoefficientsSection::default(),
            noise: NoiseSection::default(),
            nonlinearity: NonlinearitySection::default(),
            time: TimeSection::default(),
            parareal: PararealSection::default(),
            study: StudySection::default(),
            costmodel: CostModelSection::default(),
            output_dir: "out".into(),
            threads: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub nx: u32,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { nx: 16 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoefficientsSection {
    pub eps: f64,
    pub mu: f64,
    pub sigma: f64,
}

impl Default for CoefficientsSection {
    fn default() -> Self {
        Self { eps: 1.0, mu: 1.0, sigma: 0.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    pub n_modes: u32,
    pub decay_r: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self { n_modes: 8, decay_r: 2.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NonlinearitySection {
    /// One of: u_plus_cos, cos, zero, linear.
    pub drift: String,
    /// Slope for the linear drift kind.
    pub drift_coefficient: f64,
    /// One of: sin, identity, zero, constant.
    pub diffusion: String,
    /// Level for the constant diffusion kind.
    pub diffusion_constant: f64,
}

impl Default for NonlinearitySection {
    fn default() -> Self {
        Self {
            drift: "u_plus_cos".into(),
            drift_coefficient: 1.0,
            diffusion: "sin".into(),
            diffusion_constant: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub t_end: f64,
    /// Coarse step ΔT.
    pub delta_t: f64,
    /// Fine substeps per coarse interval (Δt = ΔT / j_sub).
    pub j_sub: u32,
    /// Reference oversampling factor.
    pub rho_ref: u32,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self { t_end: 1.0, delta_t: 0.015625, j_sub: 4, rho_ref: 16 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PararealSection {
    pub k_max: u32,
    /// Early-stop threshold on sup_n increments; 0 disables.
    pub tol: f64,
    /// "exponential" or "reference".
    pub fine_kind: String,
}

impl Default for PararealSection {
    fn default() -> Self {
        Self { k_max: 4, tol: 0.0, fine_kind: "exponential".into() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudySection {
    pub samples: u32,
    pub seed: u64,
    pub sigmas: Vec<f64>,
    pub k_list: Vec<u32>,
    pub coarse_steps: Vec<f64>,
    pub t_end_list: Vec<f64>,
    /// Nonlinearity pairs for the convergence study, "drift:diffusion".
    pub pairs: Vec<String>,
    pub damping_k_max: u32,
    pub longtime_k_max: u32,
    pub efficiency_delta_t: f64,
    pub efficiency_k_list: Vec<u32>,
    pub efficiency_t_end_list: Vec<f64>,
    pub efficiency_samples: u32,
    /// ΔT′ = efficiency_delta_t / efficiency_step_ratio for the sequential
    /// exponential baseline.
    pub efficiency_step_ratio: u32,
}

impl Default for StudySection {
    fn default() -> Self {
        Self {
            samples: 50,
            seed: 2024,
            sigmas: vec![0.0, 2.0, 8.0, 32.0],
            k_list: vec![2, 3, 4],
            coarse_steps: vec![0.015625, 0.0078125, 0.00390625, 0.001953125],
            t_end_list: vec![1.0, 10.0, 20.0],
            pairs: vec!["u_plus_cos:sin".into(), "cos:identity".into()],
            damping_k_max: 8,
            longtime_k_max: 20,
            efficiency_delta_t: 0.125,
            efficiency_k_list: vec![2, 3],
            efficiency_t_end_list: vec![1.0, 10.0, 50.0, 100.0],
            efficiency_samples: 4,
            efficiency_step_ratio: 16,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostModelSection {
    pub k: u32,
    pub t_end: f64,
    pub delta_t: f64,
    pub delta_t_fine: f64,
    pub tau_g: f64,
    pub tau_f_aux: f64,
    pub n_proc: u32,
    pub tau_exp: f64,
    pub delta_t_prime: f64,
    /// Also emit a row with micro-benchmarked tau values.
    pub measure: bool,
}

impl Default for CostModelSection {
    fn default() -> Self {
        Self {
            k: 1,
            t_end: 1.0,
            delta_t: 0.1,
            delta_t_fine: 0.01,
            tau_g: 1.0,
            tau_f_aux: 1.0,
            n_proc: 10,
            tau_exp: 1.0,
            delta_t_prime: 0.01,
            measure: false,
        }
    }
}

/// Fully validated configuration, mapped onto solver types.
#[derive(Debug, Clone)]
pub struct Validated {
    pub model: ModelConfig,
    pub study: StudySpec,
    pub pairs: Vec<NonlinearitySpec>,
    pub damping_k_max: u32,
    pub longtime_k_max: u32,
    pub efficiency: EfficiencyOptions,
    pub efficiency_time: TimeGridSpec,
    pub costmodel: CostModelParams,
    pub costmodel_measure: bool,
    pub output_dir: PathBuf,
    pub threads: u32,
    pub raw: RunConfig,
}

fn parse_drift(name: &str, coefficient: f64) -> Result<DriftKind> {
    match name {
        "u_plus_cos" => Ok(DriftKind::UPlusCos),
        "cos" => Ok(DriftKind::Cos),
        "zero" => Ok(DriftKind::Zero),
        "linear" => Ok(DriftKind::Linear(coefficient)),
        other => bail!("nonlinearity.drift: unknown kind '{other}' (expected u_plus_cos, cos, zero or linear)"),
    }
}

fn parse_diffusion(name: &str, constant: f64) -> Result<DiffusionKind> {
    match name {
        "sin" => Ok(DiffusionKind::Sin),
        "identity" => Ok(DiffusionKind::Identity),
        "zero" => Ok(DiffusionKind::Zero),
        "constant" => Ok(DiffusionKind::Constant(constant)),
        other => bail!("nonlinearity.diffusion: unknown kind '{other}' (expected sin, identity, zero or constant)"),
    }
}

fn parse_pair(text: &str, section: &NonlinearitySection) -> Result<NonlinearitySpec> {
    let (d, g) = text
        .split_once(':')
        .ok_or_else(|| anyhow!("study.pairs: expected 'drift:diffusion', got '{text}'"))?;
    Ok(NonlinearitySpec::new(
        parse_drift(d, section.drift_coefficient)?,
        parse_diffusion(g, section.diffusion_constant)?,
    ))
}

impl RunConfig {
    pub fn validate(self) -> Result<Validated> {
        let grid = GridSpec::new(self.grid.nx).map_err(|e| anyhow!("grid.nx: {e}"))?;
        let coeffs =
            MaxwellCoefficients::new(self.coefficients.eps, self.coefficients.mu, self.coefficients.sigma)
                .map_err(|e| anyhow!("coefficients: {e}"))?;
        if !(self.noise.decay_r.is_finite() && self.noise.decay_r > 1.0) {
            bail!("noise.decay_r: must be > 1 for a trace-class covariance, got {}", self.noise.decay_r);
        }
        let nonlinearity = NonlinearitySpec::new(
            parse_drift(&self.nonlinearity.drift, self.nonlinearity.drift_coefficient)?,
            parse_diffusion(&self.nonlinearity.diffusion, self.nonlinearity.diffusion_constant)?,
        );
        let time = TimeGridSpec::new(self.time.t_end, self.time.delta_t, self.time.j_sub, self.time.rho_ref)
            .map_err(|e| anyhow!("time: {e}"))?;
        let fine_kind = match self.parareal.fine_kind.as_str() {
            "exponential" => FineKind::Exponential,
            "reference" => FineKind::Reference,
            other => bail!("parareal.fine_kind: unknown kind '{other}' (expected exponential or reference)"),
        };
        if self.parareal.tol.is_nan() || self.parareal.tol < 0.0 {
            bail!("parareal.tol: must be >= 0, got {}", self.parareal.tol);
        }
        let tol = if self.parareal.tol == 0.0 { None } else { Some(self.parareal.tol) };
        let model = ModelConfig {
            grid,
            coeffs,
            n_modes: self.noise.n_modes,
            decay_r: self.noise.decay_r,
            nonlinearity,
            time,
            k_max: self.parareal.k_max,
            tol,
            fine_kind,
        };

        if self.study.samples == 0 {
            bail!("study.samples: must be >= 1");
        }
        for &dt in &self.study.coarse_steps {
            TimeGridSpec::new(self.time.t_end, dt, self.time.j_sub, self.time.rho_ref)
                .map_err(|e| anyhow!("study.coarse_steps: {e}"))?;
        }
        for &t in &self.study.t_end_list {
            TimeGridSpec::new(t, self.time.delta_t, self.time.j_sub, self.time.rho_ref)
                .map_err(|e| anyhow!("study.t_end_list: {e}"))?;
        }
        let study = StudySpec {
            samples: self.study.samples,
            base_seed: self.study.seed,
            sigmas: self.study.sigmas.clone(),
            k_list: self.study.k_list.clone(),
            coarse_steps: self.study.coarse_steps.clone(),
            t_end_list: self.study.t_end_list.clone(),
        };
        let pairs = self
            .study
            .pairs
            .iter()
            .map(|p| parse_pair(p, &self.nonlinearity))
            .collect::<Result<Vec<_>>>()?;
        if pairs.is_empty() {
            bail!("study.pairs: must not be empty");
        }

        let efficiency_time = TimeGridSpec::new(
            self.study.efficiency_t_end_list.first().copied().unwrap_or(1.0),
            self.study.efficiency_delta_t,
            self.time.j_sub,
            self.time.rho_ref,
        )
        .map_err(|e| anyhow!("study.efficiency_delta_t: {e}"))?;
        for &t in &self.study.efficiency_t_end_list {
            TimeGridSpec::new(t, self.study.efficiency_delta_t, self.time.j_sub, self.time.rho_ref)
                .map_err(|e| anyhow!("study.efficiency_t_end_list: {e}"))?;
        }
        if self.study.efficiency_step_ratio == 0 || !self.study.efficiency_step_ratio.is_power_of_two() {
            bail!(
                "study.efficiency_step_ratio: must be a power of two >= 1, got {}",
                self.study.efficiency_step_ratio
            );
        }
        let efficiency = EfficiencyOptions {
            k_values: self.study.efficiency_k_list.clone(),
            step_ratio: self.study.efficiency_step_ratio,
            t_end_list: self.study.efficiency_t_end_list.clone(),
            samples: self.study.efficiency_samples,
            base_seed: self.study.seed,
        };

        let costmodel = CostModelParams {
            k: self.costmodel.k,
            t_end: self.costmodel.t_end,
            delta_t_coarse: self.costmodel.delta_t,
            delta_t_fine: self.costmodel.delta_t_fine,
            tau_coarse: self.costmodel.tau_g,
            tau_fine_aux: self.costmodel.tau_f_aux,
            n_proc: self.costmodel.n_proc,
            tau_exp: self.costmodel.tau_exp,
            delta_t_prime: self.costmodel.delta_t_prime,
        };

        Ok(Validated {
            model,
            study,
            pairs,
            damping_k_max: self.study.damping_k_max,
            longtime_k_max: self.study.longtime_k_max,
            efficiency,
            efficiency_time,
            costmodel,
            costmodel_measure: self.costmodel.measure,
            output_dir: PathBuf::from(&self.output_dir),
            threads: self.threads,
            raw: self,
        })
    }
}

/// Apply one `key=value` override onto the parsed TOML table. The value is
/// parsed as TOML when possible and treated as a bare string otherwise.
fn apply_set(table: &mut toml::Table, key: &str, raw_value: &str) -> Result<()> {
    let value = match format!("v = {raw_value}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed override has the placeholder key"),
        Err(_) => toml::Value::String(raw_value.to_string()),
    };
    let mut segments = key.split('.').collect::<Vec<_>>();
    if segments.iter().any(|s| s.is_empty()) {
        bail!("--set {key}: empty path segment");
    }
    let last = segments.pop().expect("non-empty key");
    let mut node = table;
    for seg in segments {
        node = node
            .entry(seg.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| anyhow!("--set {key}: '{seg}' is not a table"))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

/// Parse the config file (all defaults when absent) and apply overrides in
/// order. Unknown keys and malformed values are reported with their
/// location.
pub fn parse_config(path: Option<&Path>, sets: &[(String, String)]) -> Result<RunConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .with_context(|| format!("reading config file {}", p.display()))?,
        None => String::new(),
    };
    let mut table = text
        .parse::<toml::Table>()
        .map_err(|e| anyhow!("config parse error: {e}"))?;
    for (key, value) in sets {
        apply_set(&mut table, key, value)?;
    }
    let config: RunConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e| anyhow!("config validation error: {e}"))?;
    Ok(config)
}

/// Serialized effective configuration for the output directory.
pub fn effective_toml(config: &RunConfig) -> Result<String> {
    toml::to_string_pretty(config).context("serializing effective config")
}
