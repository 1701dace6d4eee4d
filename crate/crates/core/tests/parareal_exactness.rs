//! Parareal structure: exactness against an independently coded sequential
//! fine sweep, bit-reproducibility across worker counts, and stationarity.

use parawell::harness::initial_state;
use parawell::{
    build_basis, sample_path, DiffusionKind, DiscreteMaxwellOperator, DriftKind, FieldState,
    FineKind, GridSpec, MaxwellCoefficients, NonlinearitySpec, PararealConfig, StepContext,
    TimeGridSpec,
};

fn run_case(
    nx: u32,
    sigma: f64,
    nl: NonlinearitySpec,
    fine_kind: FineKind,
    time: TimeGridSpec,
    seed: u64,
) -> (DiscreteMaxwellOperator, parawell::PararealRun, Vec<FieldState>) {
    let grid = GridSpec::new(nx).unwrap();
    let coeffs = MaxwellCoefficients::new(1.0, 1.0, sigma).unwrap();
    let op = DiscreteMaxwellOperator::build(grid, coeffs).unwrap();
    let basis = build_basis(grid, 2, 2.0).unwrap();
    let delta_ref = match fine_kind {
        FineKind::Exponential => time.dt_fine(),
        FineKind::Reference => time.dt_reference(),
    };
    let path = sample_path(&basis, seed, 0, time.t_end(), delta_ref).unwrap();
    let u0 = initial_state(grid, seed, 0);
    let cfg = PararealConfig { time, k_max: time.n_intervals() as u32, tol: None, fine_kind };
    let run = parawell::run(&op, &nl, &basis, &path, &cfg, &u0).unwrap();

    // Independent sequential fine sweep, written as a plain loop.
    let ctx = StepContext::new(&op, &nl, &basis, &path, &time).unwrap();
    let mut independent = vec![u0];
    for n in 1..=time.n_intervals() {
        let prev = independent.last().unwrap();
        let next = match fine_kind {
            FineKind::Exponential => ctx.fine_exponential(prev, n).unwrap(),
            FineKind::Reference => ctx.fine_reference(prev, n).unwrap(),
        };
        independent.push(next);
    }
    (op, run, independent)
}

#[test]
fn exactness_wavefront_reaches_the_fine_solution() {
    // After k iterations the first k interval endpoints agree with the
    // sequential fine solution; here they agree bitwise.
    let nl = NonlinearitySpec::new(DriftKind::UPlusCos, DiffusionKind::Sin);
    for (fine_kind, seed) in [(FineKind::Exponential, 5u64), (FineKind::Reference, 6u64)] {
        let time = TimeGridSpec::new(1.0, 0.125, 2, 2).unwrap();
        let (op, run, independent) = run_case(4, 0.5, nl, fine_kind, time, seed);
        let n_max = time.n_intervals() as usize;
        for k in 0..=n_max {
            for n in 0..=k.min(n_max) {
                let scale = 1.0 + op.h_norm(&independent[n]).unwrap();
                let err = op
                    .h_norm(&run.iterates[k][n].sub(&independent[n]))
                    .unwrap();
                assert!(
                    err <= 1e-12 * scale,
                    "kind {fine_kind:?}: |u_{n}^({k}) - fine| = {err:e}"
                );
            }
        }
        // Full exactness at k = N against the run's own reference too.
        for n in 0..=n_max {
            let scale = 1.0 + op.h_norm(&run.reference[n]).unwrap();
            assert!(run.errors[n_max][n].sqrt() <= 1e-12 * scale);
        }
    }
}

#[test]
fn ten_random_configurations_reach_exactness() {
    let drifts = [DriftKind::UPlusCos, DriftKind::Cos, DriftKind::Zero, DriftKind::Linear(0.7)];
    let diffusions =
        [DiffusionKind::Sin, DiffusionKind::Identity, DiffusionKind::Constant(0.5)];
    for case in 0..10u64 {
        let nl = NonlinearitySpec::new(
            drifts[(case % 4) as usize],
            diffusions[(case % 3) as usize],
        );
        let sigma = [0.0, 1.0, 4.0][(case % 3) as usize];
        let j_sub = [1u32, 2, 4][(case % 3) as usize];
        let fine_kind = if case % 2 == 0 { FineKind::Exponential } else { FineKind::Reference };
        let n = 3 + (case % 3);
        let delta_t = 0.125;
        let time = TimeGridSpec::new(n as f64 * delta_t, delta_t, j_sub, 2).unwrap();
        let (op, run, _) = run_case(3 + (case % 2) as u32 * 2, sigma, nl, fine_kind, time, 100 + case);
        let k_final = time.n_intervals() as usize;
        for n in 0..=k_final {
            let scale = 1.0 + op.h_norm(&run.reference[n]).unwrap();
            assert!(
                run.errors[k_final][n].sqrt() <= 1e-12 * scale,
                "case {case}: n = {n}, err = {:e}",
                run.errors[k_final][n].sqrt()
            );
        }
    }
}

#[test]
fn output_is_bit_identical_across_worker_counts() {
    let grid = GridSpec::new(5).unwrap();
    let coeffs = MaxwellCoefficients::new(1.0, 1.0, 2.0).unwrap();
    let nl = NonlinearitySpec::new(DriftKind::UPlusCos, DiffusionKind::Sin);
    let time = TimeGridSpec::new(1.0, 0.0625, 4, 1).unwrap();

    let run_with_threads = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let op = DiscreteMaxwellOperator::build(grid, coeffs).unwrap();
            let basis = build_basis(grid, 3, 2.0).unwrap();
            let path = sample_path(&basis, 77, 3, 1.0, time.dt_fine()).unwrap();
            let cfg = PararealConfig {
                time,
                k_max: 6,
                tol: None,
                fine_kind: FineKind::Exponential,
            };
            parawell::run(&op, &nl, &basis, &path, &cfg, &initial_state(grid, 77, 3)).unwrap()
        })
    };

    let one = run_with_threads(1);
    let two = run_with_threads(2);
    let four = run_with_threads(4);
    for k in 0..one.iterates.len() {
        for n in 0..one.iterates[k].len() {
            assert_eq!(one.iterates[k][n], two.iterates[k][n], "k={k} n={n} (1 vs 2 threads)");
            assert_eq!(one.iterates[k][n], four.iterates[k][n], "k={k} n={n} (1 vs 4 threads)");
        }
    }
    assert_eq!(one.errors, two.errors);
    assert_eq!(one.errors, four.errors);
}

#[test]
fn stationary_iterates_stay_bit_identical() {
    // Run far past exactness: k_max = N + 3. Once u^(k) = u^(k−1) on every
    // interval, all later iterates must repeat the same bytes.
    let nl = NonlinearitySpec::new(DriftKind::Cos, DiffusionKind::Identity);
    let grid = GridSpec::new(4).unwrap();
    let op = DiscreteMaxwellOperator::build(grid, MaxwellCoefficients::unit()).unwrap();
    let basis = build_basis(grid, 2, 2.0).unwrap();
    let time = TimeGridSpec::new(0.5, 0.125, 2, 1).unwrap();
    let path = sample_path(&basis, 12, 0, 0.5, time.dt_fine()).unwrap();
    let cfg = PararealConfig { time, k_max: 7, tol: None, fine_kind: FineKind::Exponential };
    let run = parawell::run(&op, &nl, &basis, &path, &cfg, &initial_state(grid, 12, 0)).unwrap();

    let mut stationary_from = None;
    for k in 1..run.iterates.len() {
        if run.iterates[k] == run.iterates[k - 1] {
            stationary_from = Some(k);
            break;
        }
    }
    let start = stationary_from.expect("iterates become stationary past exactness");
    for k in start..run.iterates.len() {
        assert_eq!(run.iterates[k], run.iterates[start - 1], "iterate {k} drifted");
    }
}
