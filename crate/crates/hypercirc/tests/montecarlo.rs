use std::f64::consts::FRAC_PI_2;

use hypercirc::montecarlo::{run_experiment, ExperimentConfig, Mode};
use hypercirc::parallel::with_threads;
use hypercirc::pipeline::TestMethod;

fn config(methods: Vec<TestMethod>) -> ExperimentConfig {
    ExperimentConfig {
        sample_sizes: vec![20, 50],
        kappa_pairs: vec![(1.5, 1.5), (1.5, 3.0)],
        mu1: 0.0,
        mu2_grid: vec![0.0, 1.0],
        iterations: 30,
        resamples: 99,
        alpha: 0.05,
        methods,
        master_seed: 2024,
        mode: Mode::Power,
    }
}

#[test]
fn identical_under_any_worker_count() {
    let c = config(TestMethod::ALL.to_vec());
    let one = with_threads(Some(1), || run_experiment(&c)).unwrap().unwrap();
    let four = with_threads(Some(4), || run_experiment(&c)).unwrap().unwrap();
    assert_eq!(one, four);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    one.write_csv(&mut a).unwrap();
    four.write_csv(&mut b).unwrap();
    assert_eq!(a, b);
}

#[test]
fn null_cell_of_power_sweep_is_the_size_cell() {
    let mut power = config(vec![TestMethod::PoincarePerm]);
    power.sample_sizes = vec![20];
    power.kappa_pairs = vec![(1.5, 1.5)];
    power.mu2_grid = vec![0.0, FRAC_PI_2];
    let mut size = power.clone();
    size.mode = Mode::Size;
    size.mu2_grid = vec![0.0];
    let p = run_experiment(&power).unwrap();
    let s = run_experiment(&size).unwrap();
    assert_eq!(p.records[0].cell, s.records[0].cell);
    assert_eq!(p.records[0].rejection_rate, s.records[0].rejection_rate);
}

#[test]
fn strong_alternative_is_detected() {
    let c = ExperimentConfig {
        sample_sizes: vec![200],
        kappa_pairs: vec![(3.0, 3.0)],
        mu1: 0.0,
        mu2_grid: vec![FRAC_PI_2],
        iterations: 100,
        resamples: 199,
        alpha: 0.05,
        methods: vec![TestMethod::PoincarePerm, TestMethod::PoincareBoot],
        master_seed: 77,
        mode: Mode::Power,
    };
    let r = run_experiment(&c).unwrap();
    for rec in &r.records {
        assert!(rec.rejection_rate.unwrap() > 0.9, "{rec:?}");
    }
}

#[test]
fn power_grows_with_sample_size() {
    let c = ExperimentConfig {
        sample_sizes: vec![20, 200],
        kappa_pairs: vec![(1.5, 1.5)],
        mu1: 0.0,
        mu2_grid: vec![0.8, FRAC_PI_2],
        iterations: 100,
        resamples: 199,
        alpha: 0.05,
        methods: vec![TestMethod::PoincarePerm],
        master_seed: 5,
        mode: Mode::Power,
    };
    let r = run_experiment(&c).unwrap();
    let (small, large) = r.records.split_at(2);
    for (a, b) in small.iter().zip(large) {
        let (pa, pb) = (a.rejection_rate.unwrap(), b.rejection_rate.unwrap());
        assert!(pb >= pa - 0.02);
        if pa < 0.9 {
            assert!(pb > pa, "{pa} -> {pb}");
        }
    }
}

#[test]
fn config_file_round_trip() {
    let c = config(vec![TestMethod::Z, TestMethod::Mww]);
    let text = serde_json::to_string_pretty(&c).unwrap();
    assert!(text.contains("\"kappa_pairs\""));
    let back = ExperimentConfig::from_json(&text).unwrap();
    assert_eq!(back, c);
    assert_eq!(back.digest(), c.digest());
    let mut other = c.clone();
    other.master_seed += 1;
    assert_ne!(other.digest(), c.digest());
}

#[test]
fn shipped_configs_are_valid() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let text = std::fs::read_to_string(&path).unwrap();
            let c = ExperimentConfig::from_json(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert!(!c.cells().is_empty());
            seen += 1;
        }
    }
    assert!(seen >= 4);
}
