use linproj::{kepler_initial, kepler_system, Integrator, KeplerParams, System, Underlying};
use linproj_harness::{
    equivalence_study, integral_error_study, order_study, preset, run_trajectory, step_size, HarnessError,
};

fn x0() -> Vec<f64> {
    kepler_initial::<f64>(KeplerParams::new(0.6).unwrap()).into_vec()
}

fn named(name: &str) -> (Integrator<f64>, System<f64>) {
    let p = preset(name, None).unwrap();
    let sys = kepler_system::<f64>().select_integrals(&p.integrals).unwrap();
    (p.integrator, sys)
}

#[test]
fn zero_steps_is_a_config_error() {
    let (int, sys) = named("b");
    let err = run_trajectory(&int, &sys, &x0(), 0.1, 0).unwrap_err();
    assert!(matches!(err.error, HarnessError::Config(_)));
}

#[test]
fn zero_step_size_stays_put() {
    let (int, sys) = named("b");
    let rec = run_trajectory(&int, &sys, &x0(), 0.0, 1).unwrap();
    assert_eq!(rec.steps(), 1);
    assert_eq!(rec.final_state(), &x0()[..]);
    assert_eq!(rec.lambda_norms, vec![0.0]);
}

#[test]
fn single_step_record_shape() {
    let (int, sys) = named("b");
    let rec = run_trajectory(&int, &sys, &x0(), step_size(50), 1).unwrap();
    assert_eq!(rec.times.len(), 2);
    assert_eq!(rec.states.len(), 2);
    assert_eq!(rec.integral_values.len(), 2);
    assert_eq!(rec.solver_iterations.len(), 1);
    assert_eq!(rec.integral_errors()[0], vec![0.0; 3]);
}

#[test]
fn method_b_conserves_and_rk4_drifts() {
    let n = 50 * 25;
    let (int, sys) = named("b");
    let rec = run_trajectory(&int, &sys, &x0(), step_size(50), n).unwrap();
    let worst = rec.integral_errors().iter().flatten().fold(0.0f64, |m, e| m.max(*e));
    assert!(worst <= 1e-12, "{worst}");

    let mut iters = rec.solver_iterations.clone();
    iters.sort_unstable();
    assert!(iters[iters.len() / 2] <= 6, "median {}", iters[iters.len() / 2]);
    assert!(iters.iter().all(|&i| i <= int.solver().max_iterations));

    let plain = run_trajectory(&Integrator::plain(Underlying::rk4()), &sys, &x0(), step_size(50), n).unwrap();
    assert!(plain.integral_errors().last().unwrap()[0] > 1e-6);
}

#[test]
fn dg_variants_error_growth_stays_small() {
    for name in ["b1", "b2"] {
        let (int, sys) = named(name);
        let (times, errors) = integral_error_study(&int, &sys, &x0(), step_size(50), 50 * 50).unwrap();
        assert_eq!(times.len(), errors.len());
        let last = errors.last().unwrap();
        assert!(last.iter().all(|e| *e <= 1e-8), "{name}: {last:?}");
    }
}

#[test]
fn equivalence_with_itself_is_zero() {
    let (int, sys) = named("b");
    let series = equivalence_study((&int, &sys), &[(&int, &sys)], &x0(), step_size(50), 20).unwrap();
    assert_eq!(series.times.len(), 20);
    assert!(series.diffs[0].iter().chain(&series.local[0]).all(|d| *d == 0.0));
}

#[test]
fn b_and_dg_variants_track_each_other() {
    let (b, sys) = named("b1");
    let reference = preset("b", Some(vec![0, 1])).unwrap().integrator;
    let (b2, _) = named("b2");
    let series = equivalence_study(
        (&reference, &sys),
        &[(&b, &sys), (&b2, &sys)],
        &x0(),
        step_size(50),
        100,
    )
    .unwrap();
    for d in series.single_step() {
        assert!(d <= 1e-10, "{d}");
    }
    for local in &series.local {
        assert!(local.iter().all(|d| *d <= 1e-10));
    }
}

#[test]
fn order_study_errors_shrink_and_failures_are_nan() {
    let methods: Vec<_> = ["a", "rk4", "b6"]
        .iter()
        .map(|n| {
            let (i, s) = named(n);
            (n.to_string(), i, s)
        })
        .collect();
    let rows = order_study(&methods, &x0(), &[10, 25, 50, 100], 1).unwrap();
    assert_eq!(rows.len(), 12);
    for chunk in rows.chunks(4) {
        assert!(chunk.iter().all(|r| r.method_name == chunk[0].method_name));
        assert!(chunk
            .iter()
            .all(|r| r.fitted_slope.to_bits() == chunk[0].fitted_slope.to_bits()));
        let finite: Vec<_> = chunk.iter().filter(|r| r.final_error.is_finite()).collect();
        assert!(finite.first().unwrap().final_error > finite.last().unwrap().final_error);
        assert!(chunk.windows(2).all(|w| w[0].h > w[1].h));
    }
    // b6 cannot complete a step at h = 2π/10
    assert!(rows[8].final_error.is_nan());
    assert!(order_study(&methods, &x0(), &[25], 0).is_err());
}
