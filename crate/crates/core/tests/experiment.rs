use epsurr::experiment::{
    generate_instance, run_trials, write_trials_csv, ExperimentConfig, TrialMeans, TrialRng,
    CSV_HEADER,
};
use epsurr::PhiSpec;

#[test]
fn instances_are_reproducible_per_trial() {
    let config = ExperimentConfig::new(20, 2, 0.1, 0.1, 3, 99);
    let a = generate_instance(&config, 1);
    let b = generate_instance(&config, 1);
    let c = generate_instance(&config, 2);
    assert_eq!(a.m, b.m);
    assert_eq!(a.m_s, b.m_s);
    assert_ne!(a.m, c.m);
    let sum = &a.m_r + &a.m_s;
    // M₀ is the remainder
    let noise = &a.m - &sum;
    assert!(noise.iter().any(|v| *v != 0.0));
}

#[test]
fn noiseless_instances_use_the_override() {
    let mut config = ExperimentConfig::new(10, 2, 0.0, 0.0, 1, 5);
    let inst = generate_instance(&config, 0);
    assert!(inst.m.iter().all(|v| *v == 0.0));
    config.sigma_n_override = Some(1.0);
    let inst = generate_instance(&config, 0);
    assert_eq!(inst.m, inst.m_r);
    assert!(inst.m_r.iter().any(|v| *v != 0.0));
}

#[test]
fn sparse_entries_lie_in_range() {
    let config = ExperimentConfig::new(40, 4, 0.3, 0.1, 1, 8);
    let inst = generate_instance(&config, 0);
    assert!(inst.m_s.iter().all(|v| v.abs() <= 5.0));
}

#[test]
fn rng_streams_are_independent_of_each_other() {
    let mut a = TrialRng::new(1, 0);
    let mut b = TrialRng::new(1, 1);
    let xs: Vec<f64> = (0..8).map(|_| a.uniform()).collect();
    let ys: Vec<f64> = (0..8).map(|_| b.uniform()).collect();
    assert_ne!(xs, ys);
}

#[test]
fn trials_write_ordered_csv_with_means() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let mut config = ExperimentConfig::new(20, 2, 0.05, 0.1, 3, 42);
    config.output_path = Some(path.to_string_lossy().into_owned());
    let result = run_trials(&config).unwrap();
    assert_eq!(result.records.len(), 3);
    for (i, r) in result.records.iter().enumerate() {
        assert_eq!(r.trial, i);
        assert!(!r.failed(), "{}", r.status);
        assert!(r.certificates_ok);
        assert!(r.rms_x.is_finite() && r.rms_x >= 0.0);
        assert!(r.rms_y.is_finite() && r.rms_y >= 0.0);
    }
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("0,20,2,"));
    assert!(lines[4].starts_with("mean,") && lines[4].ends_with("mean_of_3"));
    for line in &lines {
        assert_eq!(line.split(',').count(), CSV_HEADER.split(',').count());
    }
}

#[test]
fn failed_trials_are_excluded_from_means() {
    let config = ExperimentConfig::new(12, 1, 0.05, 0.1, 2, 1);
    let mut records = run_trials(&config).unwrap().records;
    records[1].status = "error: forced".into();
    records[1].rms_x = f64::NAN;
    let means = TrialMeans::of(&records);
    assert_eq!(means.count, 1);
    assert_eq!(means.rms_x, records[0].rms_x);
    let mut out = Vec::new();
    write_trials_csv(&mut out, &records, &means).unwrap();
    assert!(String::from_utf8(out).unwrap().contains("error: forced"));
}

#[test]
fn config_json_round_trips_with_defaults() {
    let config: ExperimentConfig =
        serde_json::from_str(r#"{"n": 30, "r": 3, "rho_s": 0.1, "sigma": 0.1}"#).unwrap();
    assert_eq!(config.trials, 1);
    assert_eq!(config.phi.kind(), PhiSpec::default().kind());
    assert!(config.solver.warm_start);
    let again: ExperimentConfig =
        serde_json::from_str(&serde_json::to_string(&config).unwrap()).unwrap();
    assert_eq!(again.n, 30);
    assert!(serde_json::from_str::<ExperimentConfig>(
        r#"{"n": 3, "r": 1, "rho_s": 0.1, "sigma": 0.1, "bogus": 1}"#
    )
    .is_err());
    let bad = ExperimentConfig::new(5, 6, 0.1, 0.1, 1, 0);
    assert!(bad.validate().is_err());
}
