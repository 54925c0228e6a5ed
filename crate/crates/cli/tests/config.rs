use augustin_lab::{validate_config, ExperimentConfig, Overrides, Task};

#[test]
fn default_config_is_runnable() {
    assert!(validate_config(&ExperimentConfig::default()).is_empty());
    let empty = ExperimentConfig::from_json("{}").unwrap();
    assert_eq!(empty, ExperimentConfig::default());
}

#[test]
fn capacity_rejects_small_alpha() {
    let cfg = ExperimentConfig {
        task: Task::Capacity,
        alphas: Some(vec![0.3]),
        ..Default::default()
    };
    let v = validate_config(&cfg);
    assert_eq!(v.len(), 1);
    assert!(v[0].contains("(1/2, 1)"), "{v:?}");
}

#[test]
fn capacity_defaults_are_in_range() {
    let cfg = ExperimentConfig {
        task: Task::Capacity,
        ..Default::default()
    };
    assert!(validate_config(&cfg).is_empty());
}

#[test]
fn fisher_rejects_rho_hat_below_rho() {
    let cfg = ExperimentConfig {
        task: Task::Fisher,
        rho_range: [0.1, 0.7],
        rho_hat: 0.6,
        ..Default::default()
    };
    let v = validate_config(&cfg);
    assert_eq!(v.len(), 1);
    assert!(v[0].contains("rho_hat"), "{v:?}");
}

#[test]
fn collects_every_violation() {
    let cfg = ExperimentConfig {
        n: 0,
        iters: 0,
        alphas: Some(vec![1.0, -2.0]),
        ..Default::default()
    };
    assert_eq!(validate_config(&cfg).len(), 4);
}

#[test]
fn unknown_fields_are_rejected() {
    assert!(ExperimentConfig::from_json(r#"{"alpah": [2.0]}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"task": "capacity", "alphas": [0.7]}"#).is_ok());
}

#[test]
fn overrides_take_precedence() {
    let mut cfg = ExperimentConfig::from_json(r#"{"seed": 4, "iters": 10, "d": 3}"#).unwrap();
    cfg.apply(&Overrides {
        seed: Some(9),
        alphas: Some(vec![2.0]),
        ..Default::default()
    });
    assert_eq!((cfg.seed, cfg.iters, cfg.d), (9, 10, 3));
    assert_eq!(cfg.effective_alphas(), vec![2.0]);
}
