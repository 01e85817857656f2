use csfb::recovery::RecoveryMethod;
use csfb::sim::{emit_csv, parse_config, run_experiment, ExperimentConfig, ExperimentKind, FeedbackFamily};
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = ExperimentKind> {
    prop::sample::select(ExperimentKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialized_config_parses_back(
        kind in kind(),
        n in 20usize..300,
        trials in 1usize..10_000,
        seed in 0u64..(1 << 62),
        rho_db in -20.0f64..40.0,
        s_values in prop::collection::vec(1usize..10, 1..5),
        c_half_values in prop::collection::vec(0.05f64..4.0, 1..5),
        lasso in any::<bool>(),
        bernoulli in any::<bool>(),
    ) {
        let mut cfg = ExperimentConfig::preset(kind);
        cfg.n = n;
        cfg.trials = trials;
        cfg.master_seed = seed;
        cfg.rho_dl_db = rho_db;
        cfg.s_values = Some(s_values);
        cfg.c_half_values = Some(c_half_values);
        cfg.recovery = if lasso { RecoveryMethod::Lasso } else { RecoveryMethod::MaxCorrelation };
        cfg.feedback = if bernoulli { FeedbackFamily::BernoulliChips } else { FeedbackFamily::GaussianFading };
        let again = parse_config(&cfg.to_toml()).unwrap();
        prop_assert_eq!(again, cfg);
    }
}

#[test]
fn same_seed_same_csv_different_seed_different_csv() {
    let doc = "experiment = \"fig2_analog_sweep\"\ns_values = [4]\nc_half_values = [0.8]\ntrials = 30\n";
    let cfg = parse_config(doc).unwrap();
    let a = emit_csv(&run_experiment(&cfg).unwrap());
    let b = emit_csv(&run_experiment(&cfg).unwrap());
    assert_eq!(a, b);
    let mut other = cfg.clone();
    other.master_seed += 1;
    assert_ne!(a, emit_csv(&run_experiment(&other).unwrap()));
}

#[test]
fn fig1_rows_cover_all_variants() {
    let doc = "experiment = \"fig1_ecm_trace\"\ns_values = [2]\nr_values = [10, 20]\ntrials = 50\n";
    let rows = run_experiment(&parse_config(doc).unwrap()).unwrap();
    for tag in ["mc", "closed", "approx", "dedicated"] {
        assert!(rows.iter().any(|r| r.metric == format!("ecm_trace_{tag}")), "{tag}");
        assert!(rows.iter().any(|r| r.metric == format!("ecm_det_{tag}")), "{tag}");
    }
    assert!(rows.iter().all(|r| r.error.is_none()));
}
