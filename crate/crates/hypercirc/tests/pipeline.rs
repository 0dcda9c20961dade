use hypercirc::core::circular::{vm_sample, VonMisesParams};
use hypercirc::core::inference::{Method, PreparedTest, TestConfig};
use hypercirc::core::rng::{substream, Purpose};
use hypercirc::core::CircularSample;
use hypercirc::io::{parse_angles, write_angles, AngleUnit, Group};
use hypercirc::parallel::{run_prepared, with_threads};
use hypercirc::pipeline::{analyze, AnalysisOptions, AnalysisReport, TestMethod, TestSettings};

fn synthetic(mu: f64, kappa: f64, n: usize, seed: u64, name: &str) -> Group {
    let s = vm_sample(VonMisesParams::new(mu, kappa).unwrap(), n, &mut substream(seed, 0, Purpose::Data));
    let mut buf = Vec::new();
    write_angles(&mut buf, &s, AngleUnit::Radians, None).unwrap();
    let mut g = parse_angles(buf.as_slice(), name, AngleUnit::Radians, true).unwrap();
    g[0].name = Some(name.into());
    g.remove(0)
}

fn options(resamples: usize) -> AnalysisOptions {
    AnalysisOptions {
        settings: TestSettings {
            resamples,
            seed: 17,
            ..TestSettings::default()
        },
        ..AnalysisOptions::default()
    }
}

#[test]
fn written_angles_parse_back_exactly() {
    let g = synthetic(0.3, 2.0, 50, 1, "a");
    let s = vm_sample(VonMisesParams::new(0.3, 2.0).unwrap(), 50, &mut substream(1, 0, Purpose::Data));
    let back: Vec<f64> = g.values.iter().map(|v| v.unwrap()).collect();
    assert_eq!(back, s.radians().collect::<Vec<_>>());
}

#[test]
fn report_round_trips_through_json() {
    let mut g2 = synthetic(0.5402, 1.581, 20, 4, "V");
    g2.values[3] = None;
    let groups = [synthetic(0.3066, 1.560, 20, 3, "S"), g2];
    let mut opts = options(199);
    opts.impute = true;
    opts.fourfold = true;
    opts.methods = TestMethod::ALL.to_vec();
    let report = analyze(&groups, AngleUnit::Radians, vec!["S.csv".into(), "V.csv".into()], &opts).unwrap();
    assert_eq!(report.imputation_log.len(), 1);
    let json = serde_json::to_string(&report).unwrap();
    let back: AnalysisReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, report);
}

#[test]
fn imputation_log_empty_without_missing_values() {
    let groups = [synthetic(0.3, 1.5, 20, 1, "a"), synthetic(0.4, 1.5, 20, 2, "b")];
    let mut opts = options(99);
    opts.impute = true;
    let report = analyze(&groups, AngleUnit::Radians, vec![], &opts).unwrap();
    assert!(report.imputation_log.is_empty());
}

#[test]
fn clinical_shaped_example() {
    let groups = [
        synthetic(0.3066, 1.560, 20, 11, "S"),
        synthetic(0.5402, 1.581, 20, 12, "V"),
    ];
    let report = analyze(&groups, AngleUnit::Radians, vec![], &options(999)).unwrap();
    assert_eq!(report.tests.len(), 2);
    for (fit, kappa) in report.fits.iter().zip([1.560, 1.581]) {
        // generous sampling band at n = 20
        assert!((fit.fit.params.kappa - kappa).abs() < 2.0, "{fit:?}");
    }
    for t in &report.tests {
        assert!(t.p_value() > 0.0 && t.p_value() <= 1.0);
    }
}

#[test]
fn degenerate_group_is_named() {
    let groups = [
        Group {
            name: Some("flat".into()),
            values: vec![Some(1.0); 8],
        },
        synthetic(0.4, 1.5, 20, 2, "b"),
    ];
    let err = analyze(&groups, AngleUnit::Radians, vec![], &options(99)).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("flat"));
}

fn pair(seed: u64) -> (CircularSample, CircularSample) {
    let p1 = VonMisesParams::new(0.2, 1.5).unwrap();
    let p2 = VonMisesParams::new(0.9, 3.0).unwrap();
    (
        vm_sample(p1, 60, &mut substream(seed, 1, Purpose::Data)),
        vm_sample(p2, 45, &mut substream(seed, 2, Purpose::Data)),
    )
}

#[test]
fn parallel_replicates_match_serial() {
    let (s1, s2) = pair(8);
    for method in [Method::Permutation, Method::Bootstrap] {
        let config = TestConfig::new(method).with_resamples(999).with_seed(5);
        let serial = PreparedTest::new(&s1, &s2, config).unwrap().run();
        for threads in [1, 2, 5] {
            let par = with_threads(Some(threads), || run_prepared(PreparedTest::new(&s1, &s2, config).unwrap())).unwrap();
            assert_eq!(par, serial, "{method:?} with {threads} threads");
        }
    }
}
