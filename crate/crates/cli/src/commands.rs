//! Subcommand implementations: run studies, write CSV artifacts.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};

use parawell::harness::csv::{
    write_convergence, write_costmodel, write_damping, write_efficiency, write_longtime,
    write_orders, CostModelRow, DampingRow, LongtimeRow,
};
use parawell::harness::{
    convergence_study, damping_study, efficiency_study, initial_state, longtime_study,
    measure_taus, predict_cost, run_selftest, studies::run_delta_ref, ModelConfig,
};
use parawell::{sample_path, NonlinearitySpec, PararealConfig, StepContext};

use crate::config::{effective_toml, Validated};

fn write_artifact(dir: &Path, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let path = dir.join(name);
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    body(&mut w).with_context(|| format!("writing {}", path.display()))?;
    w.flush()?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Create the output directory and drop the effective-config echo into it.
pub fn prepare_output(v: &Validated) -> Result<()> {
    std::fs::create_dir_all(&v.output_dir)
        .with_context(|| format!("creating output directory {}", v.output_dir.display()))?;
    let echo = effective_toml(&v.raw)?;
    let path = v.output_dir.join("effective-config.toml");
    std::fs::write(&path, echo).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn cmd_single_run(v: &Validated) -> Result<()> {
    let model = &v.model;
    let op = parawell::DiscreteMaxwellOperator::build(model.grid, model.coeffs)?;
    let basis = parawell::build_basis(model.grid, model.n_modes, model.decay_r)?;
    let path = sample_path(
        &basis,
        v.study.base_seed,
        0,
        model.time.t_end(),
        run_delta_ref(&model.time, model.fine_kind),
    )?;
    let u0 = initial_state(model.grid, v.study.base_seed, 0);
    let cfg = PararealConfig {
        time: model.time,
        k_max: model.k_max,
        tol: model.tol,
        fine_kind: model.fine_kind,
    };
    let run = parawell::run(&op, &model.nonlinearity, &basis, &path, &cfg, &u0)?;
    println!(
        "single run: N = {}, k_stop = {}, noise trace {:.6}, init {:.3}s, reference {:.3}s",
        run.n_intervals(),
        run.k_stop,
        basis.trace(),
        run.timings.initialize_secs,
        run.timings.reference_secs
    );
    for k in 0..=run.k_stop {
        println!("  k = {:2}  sup_n |u_n^(k) - u_n^ref| = {:e}", k, run.sup_error(k));
    }
    write_artifact(&v.output_dir, "single_run.csv", |w| {
        writeln!(w, "k,sup_error")?;
        for k in 0..=run.k_stop {
            writeln!(w, "{},{:e}", k, run.sup_error(k))?;
        }
        Ok(())
    })
}

pub fn cmd_converge(v: &Validated) -> Result<()> {
    let report = convergence_study(&v.model, &v.study, &v.pairs)?;
    write_artifact(&v.output_dir, "convergence.csv", |w| write_convergence(w, &report.rows))?;
    write_artifact(&v.output_dir, "orders.csv", |w| write_orders(w, &report.orders))?;
    for o in &report.orders {
        println!(
            "{} k={}: slope {:.3} (expected {:.2}, residual {:.2e})",
            o.study_id, o.k, o.slope, o.expected_slope, o.slope_residual
        );
    }
    Ok(())
}

pub fn cmd_damping(v: &Validated) -> Result<()> {
    let mut model = v.model.clone();
    model.k_max = v.damping_k_max;
    let points = damping_study(&model, &v.study)?;
    let rows: Vec<DampingRow> = points
        .iter()
        .map(|p| DampingRow { sigma: p.sigma, k: p.k, sup_error: p.sup_error })
        .collect();
    write_artifact(&v.output_dir, "damping.csv", |w| write_damping(w, &rows))
}

pub fn cmd_longtime(v: &Validated) -> Result<()> {
    let mut model = v.model.clone();
    model.k_max = v.longtime_k_max;
    let points = longtime_study(&model, &v.study)?;
    let rows: Vec<LongtimeRow> = points
        .iter()
        .map(|p| LongtimeRow { t_end: p.t_end, k: p.k, sup_error: p.sup_error })
        .collect();
    write_artifact(&v.output_dir, "longtime.csv", |w| write_longtime(w, &rows))
}

pub fn cmd_efficiency(v: &Validated) -> Result<()> {
    let mut model = v.model.clone();
    model.time = v.efficiency_time;
    let rows = efficiency_study(&model, &v.efficiency)?;
    write_artifact(&v.output_dir, "efficiency.csv", |w| write_efficiency(w, &rows))
}

pub fn cmd_costmodel(v: &Validated) -> Result<()> {
    let mut rows = vec![CostModelRow { params: v.costmodel, prediction: predict_cost(&v.costmodel)? }];
    if v.costmodel_measure {
        let model: &ModelConfig = &v.model;
        let op = parawell::DiscreteMaxwellOperator::build(model.grid, model.coeffs)?;
        let basis = parawell::build_basis(model.grid, model.n_modes, model.decay_r)?;
        let lattice = run_delta_ref(&model.time, model.fine_kind);
        let path = sample_path(&basis, v.study.base_seed, 0, model.time.t_end(), lattice)?;
        let nl: &NonlinearitySpec = &model.nonlinearity;
        let ctx = StepContext::new(&op, nl, &basis, &path, &model.time)?;
        let u = initial_state(model.grid, v.study.base_seed, 0);
        let (tau_g, tau_f_aux, tau_exp) = measure_taus(&ctx, &u, 100)?;
        let mut measured = v.costmodel;
        measured.tau_coarse = tau_g;
        measured.tau_fine_aux = tau_f_aux;
        measured.tau_exp = tau_exp;
        rows.push(CostModelRow { params: measured, prediction: predict_cost(&measured)? });
    }
    write_artifact(&v.output_dir, "costmodel.csv", |w| write_costmodel(w, &rows))
}

/// Runs the invariant suite; returns false when any property fails.
pub fn cmd_selftest() -> bool {
    let mut all_passed = true;
    for check in run_selftest() {
        let status = if check.passed { "ok" } else { "FAILED" };
        println!("selftest {:<24} {}  ({})", check.name, status, check.detail);
        all_passed &= check.passed;
    }
    all_passed
}
