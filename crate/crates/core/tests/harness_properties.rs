use benjamin_core::harness::{
    estimate_rate, intermediate_problem_study, run_linearized, self_convergence, IntegratorPolicy, ReferenceTrajectory,
};
use benjamin_core::timestep::evolve;
use benjamin_core::{InitialDataSpec, IntegratorConfig, Method, ModelParams, Semidiscrete};

fn benjamin() -> ModelParams {
    ModelParams::benjamin(1.0, 1.0, 1).unwrap()
}

#[test]
fn self_convergence_errors_are_monotone() {
    let data = InitialDataSpec::RandomSobolev { mu: 3.0, seed: 4 };
    let pol = IntegratorPolicy {
        dt: Some(1e-3),
        ..Default::default()
    };
    let rep = self_convergence(&benjamin(), &data, &[8, 16, 32, 64], 256, 0.1, &pol).unwrap();
    for w in rep.errors.windows(2) {
        assert!(w[1] <= 1.05 * w[0], "{:?}", rep.errors);
    }
    assert!(rep.claimed_rate().unwrap() > 2.0);
}

#[test]
fn analytic_rate_grows_with_window() {
    // Narrow Gaussian: still resolving at small N, so the slope steepens with N.
    let data = InitialDataSpec::Gaussian {
        amplitude: 0.5,
        width: 0.15,
        center: 0.0,
    };
    let pol = IntegratorPolicy {
        dt: Some(1e-4),
        ref_dt_divisor: 1,
        ..Default::default()
    };
    let rep = self_convergence(&benjamin(), &data, &[16, 32, 64, 128], 512, 0.02, &pol).unwrap();
    let (low, _) = estimate_rate(&rep.n_values[..2], &rep.errors[..2]).unwrap();
    let (high, _) = estimate_rate(&rep.n_values[2..], &rep.errors[2..]).unwrap();
    assert!(high > low, "errors {:?}: {low} vs {high}", rep.errors);
}

#[test]
fn max_over_time_bounds_final_error() {
    let data = InitialDataSpec::RandomSobolev { mu: 3.0, seed: 2 };
    let base = IntegratorPolicy {
        dt: Some(2e-3),
        ..Default::default()
    };
    let fin = self_convergence(&benjamin(), &data, &[8, 16], 64, 0.1, &base).unwrap();
    let max = self_convergence(
        &benjamin(),
        &data,
        &[8, 16],
        64,
        0.1,
        &IntegratorPolicy {
            max_over_time: true,
            ..base
        },
    )
    .unwrap();
    for (f, m) in fin.errors.iter().zip(&max.errors) {
        assert!(m >= f, "{m} < {f}");
    }
}

#[test]
fn lockstep_study_matches_stored_trajectory() {
    let p = benjamin();
    let data = InitialDataSpec::RandomSobolev { mu: 4.0, seed: 8 };
    let pol = IntegratorPolicy {
        dt: Some(4e-3),
        ..Default::default()
    };
    let (t_star, n_ref) = (0.05, 64);
    let rep = intermediate_problem_study(&p, &data, &[8, 16], n_ref, t_star, &pol).unwrap();

    let u0 = data.build(&p, n_ref).unwrap();
    let h = 1e-3;
    let cfg = IntegratorConfig::new(Method::Etdrk4, h, t_star, 1).unwrap();
    let mut traj = ReferenceTrajectory {
        times: vec![0.0],
        fields: vec![u0.resized(32)],
    };
    let u = evolve(&u0, &Semidiscrete::new(p, n_ref), &cfg, |t, u| {
        traj.times.push(t);
        traj.fields.push(u.resized(32));
    })
    .unwrap();
    for (k, n) in [8, 16].into_iter().enumerate() {
        let (w, sup) = run_linearized(&p, &u0.project(n).unwrap(), &traj, Method::Etdrk4, h, t_star).unwrap();
        let err = u.sub(&w.resized(n_ref)).unwrap().l2_norm();
        assert!((err - rep.errors[k]).abs() <= 1e-14 * err, "{err} vs {}", rep.errors[k]);
        assert!((sup - rep.sup_norms[k]).abs() <= 1e-14 * sup);
    }
}
