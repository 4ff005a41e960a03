use spinphase::engine::{MeasurementSpec, Party};
use spinphase::harness::{
    execute_trajectory, run_ensemble, run_ensemble_with, Aggregates, Execution, ExperimentConfig,
    Format, OutputSpec, PlanSpec, RunSummary, ScalarStats, StateSpec,
};

fn small_two_stage(size: usize, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::alice_then_bob();
    cfg.ensemble_size = size;
    cfg.seed = seed;
    cfg.grid = 512;
    cfg
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

fn scalar_close(a: &ScalarStats, b: &ScalarStats) -> bool {
    a.count == b.count
        && [
            (a.mean, b.mean),
            (a.std, b.std),
            (a.rms, b.rms),
            (a.min, b.min),
            (a.q05, b.q05),
            (a.median, b.median),
            (a.q95, b.q95),
            (a.max, b.max),
        ]
        .iter()
        .all(|(x, y)| close(*x, *y))
}

#[test]
fn repeated_runs_are_identical() {
    let cfg = small_two_stage(6, 42);
    let a = serde_json::to_string(&run_ensemble(&cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&run_ensemble(&cfg).unwrap()).unwrap();
    assert_eq!(a, b);
    let other = serde_json::to_string(&run_ensemble(&small_two_stage(6, 43)).unwrap()).unwrap();
    assert_ne!(a, other);
}

#[test]
fn parallel_equals_serial() {
    let cfg = small_two_stage(8, 9);
    let parallel = run_ensemble_with(&cfg, Execution::Parallel).unwrap();
    let serial = run_ensemble_with(&cfg, Execution::Serial).unwrap();
    assert_eq!(parallel, serial);
    assert_eq!(
        serde_json::to_vec(&parallel).unwrap(),
        serde_json::to_vec(&serial).unwrap()
    );
}

#[test]
fn single_trajectory_rerun_matches_ensemble_row() {
    let cfg = small_two_stage(5, 77);
    let summary = run_ensemble(&cfg).unwrap();
    let alone = execute_trajectory(&cfg, 3).unwrap();
    assert_eq!(summary.rows[3], (&alone).into());
}

#[test]
fn aggregates_recompute_from_serialized_rows() {
    let summary = run_ensemble(&small_two_stage(12, 5)).unwrap();
    let text = serde_json::to_string_pretty(&summary).unwrap();
    let back: RunSummary = serde_json::from_str(&text).unwrap();
    let again = Aggregates::from_rows(&back.rows);
    assert_eq!(
        again.scalars.keys().collect::<Vec<_>>(),
        back.aggregates.scalars.keys().collect::<Vec<_>>()
    );
    for (k, v) in &back.aggregates.scalars {
        assert!(scalar_close(v, &again.scalars[k]), "{k}");
    }
    for (k, v) in &back.aggregates.circular {
        let w = &again.circular[k];
        assert_eq!(v.count, w.count);
        assert!(close(v.stats.concentration, w.stats.concentration), "{k}");
        assert!(
            close(
                v.stats.mean_direction.unwrap(),
                w.stats.mean_direction.unwrap()
            ),
            "{k}"
        );
    }
    for key in [
        "alice.n_plus",
        "bob.n_plus",
        "agreement.distance",
        "confirmation.fraction_plus",
    ] {
        assert_eq!(back.aggregates.scalars[key].count, 12, "{key}");
    }
}

#[test]
fn config_round_trips_through_toml() {
    let mut configs = vec![
        ExperimentConfig::alice_two_stage(),
        ExperimentConfig::alice_then_bob(),
        ExperimentConfig::new(StateSpec::ghz(50), PlanSpec::Ghz { count: 7 }),
        ExperimentConfig::new(
            StateSpec::phase_state(-0.25, 1000),
            PlanSpec::Angles {
                measurements: vec![
                    MeasurementSpec::new(Party::Alice, 0.5),
                    MeasurementSpec::new(Party::Bob, 1.0 / 3.0),
                ],
            },
        ),
        ExperimentConfig::new(
            StateSpec::double_fock(100_000, 100_000),
            PlanSpec::Adaptive {
                p1: 100,
                p2: 100,
                theta: 0.1,
                rounds: 3,
                batch: 50,
            },
        ),
        ExperimentConfig::new(
            StateSpec::double_fock(1_000_000, 1_000_000),
            PlanSpec::Paradox {
                alice_p1: 300,
                alice_p2: 300,
                theta: 0.0,
                bob_aligned: 1000,
            },
        ),
    ];
    configs[0].snapshot_every = Some(100);
    configs[0].seed = 123_456_789;
    configs[1].output = OutputSpec {
        dir: Some("results".into()),
        format: Format::Csv,
    };
    configs[3].budget_ratio = 0.5;
    for cfg in configs {
        let text = cfg.to_toml_string().unwrap();
        let back = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(back, cfg, "{text}");
        assert_eq!(back.to_toml_string().unwrap(), text);
    }
}

#[test]
fn config_errors_name_the_field() {
    let cases = [
        ("ensemble_size = 0\n[state]\nkind = \"ghz\"\nn_total = 5\n[plan]\nprotocol = \"ghz\"\ncount = 1\n", "ensemble_size"),
        ("[state]\nkind = \"double_fock\"\nn_alpha = 10\n[plan]\nprotocol = \"ghz\"\ncount = 1\n", "state.n_beta"),
        ("grid = 17\n[state]\nkind = \"ghz\"\nn_total = 5\n[plan]\nprotocol = \"ghz\"\ncount = 1\n", "grid"),
    ];
    for (text, field) in cases {
        let err = ExperimentConfig::from_toml_str(text).unwrap_err();
        assert!(err.is_validation());
        assert!(err.to_string().contains(field), "{err} lacks {field}");
    }
    let err = ExperimentConfig::from_toml_str(
        "[state]\nkind = \"ghz\"\nn_total = 5\nbogus = 1\n[plan]\nprotocol = \"ghz\"\ncount = 1\n",
    )
    .unwrap_err();
    assert!(err.is_validation());
    assert!(err.to_string().contains("bogus"));
}
