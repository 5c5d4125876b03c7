use proptest::prelude::*;
use proxkit::data::{generate, SimSpec};
use proxkit::experiments::{
    default_lambda_grid, lq_lambda_max, lq_mse_surface, run_experiment, PathOptions, SolverKind, SolverSpec,
};
use proxkit::io::{read_trace, write_trace};
use proxkit_core::solvers::SolverConfig;

#[test]
fn warm_start_never_worse_than_cold() {
    let spec = SimSpec::lq_bridge(21);
    let data = generate(&spec).unwrap();
    let lmax = lq_lambda_max(&data.a, &data.y, 0.5).unwrap();
    let grid = default_lambda_grid(lmax).unwrap();
    let lambdas = &grid[grid.len() - 20..];
    let warm = lq_mse_surface(&data, lambdas, &[0.5], &PathOptions::default()).unwrap();
    let cold = lq_mse_surface(
        &data,
        lambdas,
        &[0.5],
        &PathOptions {
            warm_start: false,
            ..Default::default()
        },
    )
    .unwrap();
    for (w, c) in warm.cells.iter().zip(&cold.cells) {
        assert!(
            w.objective <= c.objective + 1e-9 * (1.0 + c.objective.abs()),
            "lambda {}: warm {} cold {}",
            w.lambda,
            w.objective,
            c.objective
        );
    }
}

#[test]
fn identical_seeds_give_identical_traces() {
    let dir = tempfile::tempdir().unwrap();
    for family in [SimSpec::logistic_l1(3), SimSpec::poisson_fused(3), SimSpec::lq_bridge(3)] {
        let mut cfg = SolverConfig::default().with_tol(1e-6).with_max_iter(2000);
        cfg.backtracking = Some(0.5);
        let kind = if family.family == proxkit::data::SimFamily::LqBridge {
            SolverKind::Cyclic
        } else {
            SolverKind::Fista
        };
        let solver = SolverSpec::new(kind, cfg);
        let a = run_experiment(&family, &solver, None, 0.5).unwrap();
        let b = run_experiment(&family, &solver, None, 0.5).unwrap();
        assert_eq!(a.trace, b.trace);
        let p = dir.path().join(format!("{}.csv", family.family.name()));
        write_trace(&p, &a.trace).unwrap();
        assert_eq!(read_trace(&p).unwrap(), a.trace.records);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generated_columns_have_unit_norm(seed in any::<u64>(), n in 2usize..40, d in 1usize..40) {
        let spec = SimSpec { n, d, ..SimSpec::lq_bridge(seed) };
        let data = generate(&spec).unwrap();
        for j in 0..d {
            let norm = data.a.column(j).iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!((norm - 1.0).abs() <= 1e-12);
        }
        prop_assert_eq!(data.x_true.iter().filter(|v| **v != 0.0).count(), spec.support_size());
    }

    #[test]
    fn trace_files_round_trip(values in proptest::collection::vec((any::<f64>(), 0.0f64..1e9, 1e-300f64..1e3), 0..20)) {
        let trace = proxkit_core::solvers::SolverTrace {
            records: values
                .iter()
                .map(|&(objective, residual, step)| proxkit_core::solvers::TraceRecord {
                    objective,
                    residual,
                    step,
                    seconds: 0.0,
                })
                .collect(),
            ..Default::default()
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_trace(&p, &trace).unwrap();
        let back = read_trace(&p).unwrap();
        prop_assert_eq!(back.len(), trace.records.len());
        for (a, b) in back.iter().zip(&trace.records) {
            prop_assert!(a.objective.to_bits() == b.objective.to_bits() || (a.objective.is_nan() && b.objective.is_nan()));
            prop_assert_eq!(a.residual, b.residual);
            prop_assert_eq!(a.step, b.step);
        }
    }
}
