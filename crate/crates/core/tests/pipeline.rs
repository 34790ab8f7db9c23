use weakadapt_core::dual::{audit_dual_link, drift_violations};
use weakadapt_core::env::{baselines, make_example1, make_lowerbound, InstanceSpec};
use weakadapt_core::harness::{
    builtin_instance, compute_metrics, execute, lazy_counterexample, Algo, BuiltinParams,
    RhoChoice, RunOptions, BUILTIN_NAMES,
};

fn opts(seed: u64) -> RunOptions {
    RunOptions {
        seed,
        ..RunOptions::default()
    }
}

#[test]
fn every_learning_trace_passes_the_multiplier_audits() {
    for name in BUILTIN_NAMES {
        let horizon = 600;
        let spec = builtin_instance(name, horizon, &BuiltinParams::default()).unwrap();
        let algo = if spec.is_contextual() {
            Algo::Contextual
        } else {
            Algo::Exp3six
        };
        for (seed, eta) in [(0, None), (1, Some(0.05)), (2, Some(0.9))] {
            let mut o = opts(seed);
            o.eta_ogd_override = eta;
            let out = execute(&spec, algo, &o).unwrap();
            let trace = &out.trace;
            assert_eq!(trace.len(), horizon);
            assert!(trace.aggregates_consistent(), "{name}");
            assert!(
                audit_dual_link(trace, trace.eta()).iter().all(|b| *b),
                "{name}"
            );
            assert_eq!(drift_violations(trace, trace.eta()), 0, "{name}");
            assert!(trace
                .lambda_path()
                .all(|l| l.as_slice().iter().all(|x| *x >= 0.0)));
        }
    }
}

#[test]
fn runs_are_reproducible_from_the_seed() {
    let spec = builtin_instance("contextual-d4k5m2", 300, &BuiltinParams::default()).unwrap();
    let a = execute(&spec, Algo::Contextual, &opts(4)).unwrap();
    let b = execute(&spec, Algo::Contextual, &opts(4)).unwrap();
    assert_eq!(a.trace, b.trace);
    let c = execute(&spec, Algo::Contextual, &opts(5)).unwrap();
    assert_ne!(a.trace, c.trace);
}

#[test]
fn instance_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (a, _) = make_lowerbound(20, 0.4, 0.5).unwrap();
    let path = dir.path().join("a.json");
    std::fs::write(&path, a.to_json().unwrap()).unwrap();
    let back = InstanceSpec::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back, a);
    assert_eq!(baselines(&back).unwrap().opt_adv, 10.0);
}

#[test]
fn lazy_pair_grid() {
    for t in [9, 99, 9999] {
        for rho in [0.1, 0.3, 0.9] {
            let spec = make_example1(t, rho).unwrap();
            let base = baselines(&spec).unwrap();
            assert_eq!(base.opt_adv, (t / 3) as f64);
            assert_eq!(base.rho_adv, rho);
            for big_m in [1.0 / rho, 2.0 / rho] {
                let trace = lazy_counterexample(t, rho, big_m).unwrap();
                let metrics = compute_metrics(&trace, &base, 1, RhoChoice::Adv);
                assert!((metrics.v_max - rho * t as f64 / 3.0).abs() <= 1e-9);
                assert!(weakadapt_core::harness::dual_regret(&trace, big_m).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn lazy_primal_regret_is_zero_only_at_the_smallest_box() {
    let (t, rho) = (99, 0.3);
    let spec = make_example1(t, rho).unwrap();
    let at_min = lazy_counterexample(t, rho, 1.0 / rho).unwrap();
    assert!(
        weakadapt_core::harness::primal_regret(&spec, &at_min)
            .unwrap()
            .abs()
            <= 1e-9
    );
    let doubled = lazy_counterexample(t, rho, 2.0 / rho).unwrap();
    let r = weakadapt_core::harness::primal_regret(&spec, &doubled).unwrap();
    assert!((r - 2.0 * t as f64 / 3.0).abs() <= 1e-9);
}
