//! Size and power experiments: a grid of cells (sample size, concentration
//! pair, mean directions), each replicated `iterations` times for every
//! selected test.
//!
//! Every replicate draws its data from a stream keyed by
//! `(master_seed, cell, iteration)`, and each test inside it gets a seed
//! derived from that key and the method. Replicates are independent units of
//! work; their outcomes are collected in index order and summed, so the
//! result does not depend on how the work was scheduled.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use hypercirc_core::baselines::{mww_test, w_test, z_test, CircularDistance, Z_MIN_N};
use hypercirc_core::circular::{vm_sample, CircularSample, VonMisesParams};
use hypercirc_core::inference::{PreparedTest, TestConfig, MIN_RESAMPLES};
use hypercirc_core::rng::{Purpose, StreamKey};
use hypercirc_core::PreferredDirection;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::pipeline::TestMethod;

pub const DESK_ITERATIONS: usize = 500;
pub const DESK_RESAMPLES: usize = 999;
pub const FULL_ITERATIONS: usize = 1000;
pub const FULL_RESAMPLES: usize = 2500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// `mu1 = mu2`, both swept over `mu2_grid`; `mu1` is ignored.
    Size,
    /// `mu1` fixed, `mu2` swept over `mu2_grid`.
    Power,
}

fn default_iterations() -> usize {
    DESK_ITERATIONS
}

fn default_resamples() -> usize {
    DESK_RESAMPLES
}

fn default_alpha() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub sample_sizes: Vec<usize>,
    pub kappa_pairs: Vec<(f64, f64)>,
    #[serde(default)]
    pub mu1: f64,
    pub mu2_grid: Vec<f64>,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_resamples")]
    pub resamples: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub methods: Vec<TestMethod>,
    pub master_seed: u64,
    pub mode: Mode,
}

/// `0, step, 2 step, ...` below `upper`, e.g. `mu_grid(2 pi, pi / 10)` for
/// twenty equally spaced directions.
pub fn mu_grid(upper: f64, step: f64) -> Vec<f64> {
    let count = (upper / step - 1e-9).ceil().max(0.0) as usize;
    (0..count).map(|k| k as f64 * step).collect()
}

impl ExperimentConfig {
    /// Equal-concentration size study over the full circle at desk scale.
    pub fn size(sample_sizes: Vec<usize>, kappas: &[f64], step: f64, methods: Vec<TestMethod>, seed: u64) -> Self {
        ExperimentConfig {
            sample_sizes,
            kappa_pairs: kappas.iter().map(|&k| (k, k)).collect(),
            mu1: 0.0,
            mu2_grid: mu_grid(TAU, step),
            iterations: DESK_ITERATIONS,
            resamples: DESK_RESAMPLES,
            alpha: default_alpha(),
            methods,
            master_seed: seed,
            mode: Mode::Size,
        }
    }

    pub fn with_full_scale(mut self) -> Self {
        self.iterations = FULL_ITERATIONS;
        self.resamples = FULL_RESAMPLES;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.methods.is_empty() {
            return fail("methods is empty".into());
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return fail(format!("method {} listed twice", m.name()));
            }
        }
        if self.sample_sizes.is_empty() || self.kappa_pairs.is_empty() || self.mu2_grid.is_empty() {
            return fail("sample_sizes, kappa_pairs and mu2_grid must be nonempty".into());
        }
        if let Some(n) = self.sample_sizes.iter().find(|&&n| n < 2) {
            return fail(format!("sample sizes must be at least 2, got {n}"));
        }
        for &(k1, k2) in &self.kappa_pairs {
            if !(k1.is_finite() && k2.is_finite() && k1 >= 0.0 && k2 >= 0.0) {
                return fail(format!("invalid kappa pair ({k1}, {k2})"));
            }
        }
        if !self.mu1.is_finite() || self.mu2_grid.iter().any(|m| !m.is_finite()) {
            return fail("mean directions must be finite".into());
        }
        if self.iterations == 0 {
            return fail("iterations must be positive".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.methods.iter().any(|m| m.poincare().is_some()) && self.resamples < MIN_RESAMPLES {
            return fail(format!("resamples must be at least {MIN_RESAMPLES}"));
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &n in &self.sample_sizes {
            for &(kappa1, kappa2) in &self.kappa_pairs {
                for &mu in &self.mu2_grid {
                    let mu1 = match self.mode {
                        Mode::Size => mu,
                        Mode::Power => self.mu1,
                    };
                    cells.push(Cell {
                        n,
                        kappa1,
                        kappa2,
                        mu1,
                        mu2: mu,
                    });
                }
            }
        }
        cells
    }

    /// SHA-256 of the config's JSON serialization.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub n: usize,
    pub kappa1: f64,
    pub kappa2: f64,
    pub mu1: f64,
    pub mu2: f64,
}

impl Cell {
    fn same_grid_point(&self, other: &Cell) -> bool {
        self.n == other.n
            && self.kappa1.to_bits() == other.kappa1.to_bits()
            && self.kappa2.to_bits() == other.kappa2.to_bits()
            && self.mu1.to_bits() == other.mu1.to_bits()
            && self.mu2.to_bits() == other.mu2.to_bits()
    }
}

/// Fixed per-method stream index, independent of the order in the config.
fn method_code(m: TestMethod) -> u64 {
    match m {
        TestMethod::PoincarePerm => 1,
        TestMethod::PoincareBoot => 2,
        TestMethod::Z => 3,
        TestMethod::W => 4,
        TestMethod::Mww => 5,
    }
}

/// Why a method cannot run in a cell at all.
fn infeasible(cell: &Cell, method: TestMethod) -> Option<String> {
    if method.poincare().is_some() && (cell.kappa1 == 0.0 || cell.kappa2 == 0.0) {
        return Some("kappa = 0 has no mean direction to embed".into());
    }
    if method == TestMethod::Z && cell.n < Z_MIN_N {
        return Some(format!("z test needs at least {Z_MIN_N} observations per group"));
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    #[serde(flatten)]
    pub cell: Cell,
    pub method: TestMethod,
    /// Rejections over completed iterations; `None` when skipped or when no
    /// iteration completed.
    pub rejection_rate: Option<f64>,
    pub mc_stderr: Option<f64>,
    /// Iterations whose test completed.
    pub iterations: usize,
    pub rejections: usize,
    /// Iterations whose test failed, usually on a degenerate sample.
    pub errors: usize,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTally {
    pub cell_index: usize,
    pub method: TestMethod,
    pub message: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentProvenance {
    pub software: String,
    pub version: String,
    pub config_sha256: String,
    pub master_seed: u64,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub records: Vec<CellRecord>,
    pub errors: Vec<ErrorTally>,
    pub provenance: ExperimentProvenance,
}

#[derive(Debug, Clone, PartialEq)]
enum Outcome {
    Reject,
    Accept,
    Skipped,
    Failed(String),
}

fn run_one(
    method: TestMethod,
    s1: &CircularSample,
    s2: &CircularSample,
    seed: u64,
    config: &ExperimentConfig,
) -> hypercirc_core::Result<bool> {
    let alpha = config.alpha;
    if let Some(m) = method.poincare() {
        let tc = TestConfig::new(m)
            .with_mu0(PreferredDirection::ZERO)
            .with_resamples(config.resamples)
            .with_seed(seed)
            .with_alpha(alpha);
        return Ok(PreparedTest::new(s1, s2, tc)?.run().reject);
    }
    let report = match method {
        TestMethod::Z => z_test(s1, s2)?,
        TestMethod::W => w_test(s1, s2)?,
        _ => mww_test(s1, s2, CircularDistance::Geodesic)?,
    };
    Ok(report.reject(alpha))
}

fn run_unit(config: &ExperimentConfig, cells: &[Cell], cell_index: usize, iteration: usize) -> Vec<Outcome> {
    let cell = &cells[cell_index];
    let key = StreamKey::new(config.master_seed)
        .child(cell_index as u64)
        .child(iteration as u64);
    let draw = |group: u64, mu: f64, kappa: f64| {
        let params = VonMisesParams::new(mu, kappa).expect("validated cell");
        let mut rng = key.child(group).rng(Purpose::Data);
        vm_sample(params, cell.n, &mut rng).with_label(format!("group {group}"))
    };
    let s1 = draw(1, cell.mu1, cell.kappa1);
    let s2 = draw(2, cell.mu2, cell.kappa2);
    config
        .methods
        .iter()
        .map(|&m| {
            if infeasible(cell, m).is_some() {
                return Outcome::Skipped;
            }
            let seed = key.child(method_code(m)).derive_seed(Purpose::Seed);
            match run_one(m, &s1, &s2, seed, config) {
                Ok(true) => Outcome::Reject,
                Ok(false) => Outcome::Accept,
                Err(e) => Outcome::Failed(e.to_string()),
            }
        })
        .collect()
}

/// Runs every cell and iteration on the current rayon pool.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let cells = config.cells();
    let iters = config.iterations;
    let outcomes: Vec<Vec<Outcome>> = (0..cells.len() * iters)
        .into_par_iter()
        .map(|u| run_unit(config, &cells, u / iters, u % iters))
        .collect();

    let mut records = Vec::with_capacity(cells.len() * config.methods.len());
    let mut errors = Vec::new();
    for (c, cell) in cells.iter().enumerate() {
        let unit = &outcomes[c * iters..(c + 1) * iters];
        for (j, &method) in config.methods.iter().enumerate() {
            let mut rejections = 0;
            let mut completed = 0;
            let mut failures: BTreeMap<&str, usize> = BTreeMap::new();
            for o in unit {
                match &o[j] {
                    Outcome::Reject => {
                        rejections += 1;
                        completed += 1;
                    }
                    Outcome::Accept => completed += 1,
                    Outcome::Failed(msg) => *failures.entry(msg.as_str()).or_default() += 1,
                    Outcome::Skipped => {}
                }
            }
            let skipped = infeasible(cell, method);
            let (rate, stderr) = if skipped.is_none() && completed > 0 {
                let p = rejections as f64 / completed as f64;
                (Some(p), Some((p * (1.0 - p) / completed as f64).sqrt()))
            } else {
                (None, None)
            };
            let error_count = failures.values().sum();
            for (message, count) in failures {
                errors.push(ErrorTally {
                    cell_index: c,
                    method,
                    message: message.to_string(),
                    count,
                });
            }
            records.push(CellRecord {
                cell: *cell,
                method,
                rejection_rate: rate,
                mc_stderr: stderr,
                iterations: completed,
                rejections,
                errors: error_count,
                skipped,
            });
        }
    }
    Ok(ExperimentResult {
        records,
        errors,
        provenance: ExperimentProvenance {
            software: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_sha256: config.digest(),
            master_seed: config.master_seed,
            config: config.clone(),
        },
    })
}

pub const CSV_HEADER: [&str; 10] = [
    "n",
    "kappa1",
    "kappa2",
    "mu1",
    "mu2",
    "method",
    "rejection_rate",
    "mc_stderr",
    "iterations",
    "seed",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ExperimentResult {
    /// One row per cell and method; skipped cells leave the rate columns empty.
    pub fn write_csv(&self, out: impl std::io::Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        let seed = self.provenance.master_seed.to_string();
        for r in &self.records {
            w.write_record([
                r.cell.n.to_string(),
                r.cell.kappa1.to_string(),
                r.cell.kappa2.to_string(),
                r.cell.mu1.to_string(),
                r.cell.mu2.to_string(),
                r.method.name().to_string(),
                opt(r.rejection_rate),
                opt(r.mc_stderr),
                r.iterations.to_string(),
                seed.clone(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }

    /// Provenance, skipped cells and error tallies as pretty JSON.
    pub fn write_sidecar(&self, mut out: impl std::io::Write) -> Result<()> {
        #[derive(Serialize)]
        struct Skipped<'a> {
            #[serde(flatten)]
            cell: &'a Cell,
            method: TestMethod,
            reason: &'a str,
        }
        #[derive(Serialize)]
        struct Sidecar<'a> {
            provenance: &'a ExperimentProvenance,
            records: usize,
            skipped: Vec<Skipped<'a>>,
            errors: &'a [ErrorTally],
        }
        let skipped = self
            .records
            .iter()
            .filter_map(|r| {
                r.skipped.as_deref().map(|reason| Skipped {
                    cell: &r.cell,
                    method: r.method,
                    reason,
                })
            })
            .collect();
        let sidecar = Sidecar {
            provenance: &self.provenance,
            records: self.records.len(),
            skipped,
            errors: &self.errors,
        };
        serde_json::to_writer_pretty(&mut out, &sidecar)?;
        writeln!(out).map_err(|e| Error::io("<json output>", e))?;
        Ok(())
    }

    /// The records of one method only.
    pub fn filter_method(&self, method: TestMethod) -> ExperimentResult {
        ExperimentResult {
            records: self.records.iter().filter(|r| r.method == method).cloned().collect(),
            errors: self.errors.iter().filter(|e| e.method == method).cloned().collect(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn rate(&self, cell: &Cell, method: TestMethod) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.method == method && r.cell.same_grid_point(cell))
            .and_then(|r| r.rejection_rate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerDifference {
    #[serde(flatten)]
    pub cell: Cell,
    pub method_a: TestMethod,
    pub method_b: TestMethod,
    /// `rate_a - rate_b`; `None` if either side has no rate.
    pub difference: Option<f64>,
}

/// Cellwise `rate_a - rate_b`. The two results must list the same grid
/// points in the same order.
pub fn power_difference(a: &ExperimentResult, b: &ExperimentResult) -> Result<Vec<PowerDifference>> {
    if a.records.len() != b.records.len() {
        return Err(Error::GridMismatch(format!(
            "{} records against {}",
            a.records.len(),
            b.records.len()
        )));
    }
    a.records
        .iter()
        .zip(&b.records)
        .enumerate()
        .map(|(i, (ra, rb))| {
            if !ra.cell.same_grid_point(&rb.cell) {
                return Err(Error::GridMismatch(format!(
                    "record {i}: {:?} against {:?}",
                    ra.cell, rb.cell
                )));
            }
            Ok(PowerDifference {
                cell: ra.cell,
                method_a: ra.method,
                method_b: rb.method,
                difference: ra.rejection_rate.zip(rb.rejection_rate).map(|(x, y)| x - y),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn small(methods: Vec<TestMethod>) -> ExperimentConfig {
        ExperimentConfig {
            sample_sizes: vec![20],
            kappa_pairs: vec![(1.5, 1.5)],
            mu1: 0.0,
            mu2_grid: vec![0.0, FRAC_PI_2],
            iterations: 20,
            resamples: 99,
            alpha: 0.05,
            methods,
            master_seed: 7,
            mode: Mode::Power,
        }
    }

    #[test]
    fn grid_helper() {
        assert_eq!(mu_grid(2.0 * PI, PI / 10.0).len(), 20);
        assert_eq!(mu_grid(2.0 * PI, PI / 5.0).len(), 10);
        assert_eq!(mu_grid(PI, PI / 10.0).len(), 10);
        assert!(mu_grid(2.0 * PI, PI / 5.0).iter().all(|&m| m < 2.0 * PI));
    }

    #[test]
    fn size_mode_sets_equal_directions() {
        let mut c = small(vec![TestMethod::Z]);
        c.mode = Mode::Size;
        c.mu1 = 3.0;
        assert!(c.cells().iter().all(|cell| cell.mu1 == cell.mu2));
        assert_eq!(c.cells().len(), 2);
    }

    #[test]
    fn config_validation() {
        let mut c = small(vec![]);
        assert!(c.validate().is_err());
        c.methods = vec![TestMethod::Z, TestMethod::Z];
        assert!(c.validate().is_err());
        c.methods = vec![TestMethod::PoincarePerm];
        c.resamples = 10;
        assert!(c.validate().is_err());
        c.resamples = 99;
        c.alpha = 1.0;
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::from_json(r#"{"sample_sizes": [20], "bogus": 1}"#).is_err());
    }

    #[test]
    fn infeasible_cells_are_skipped() {
        let mut c = small(vec![TestMethod::PoincarePerm, TestMethod::Mww, TestMethod::Z]);
        c.kappa_pairs = vec![(0.0, 1.0)];
        c.sample_sizes = vec![5];
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.records.len(), 6);
        for rec in &r.records {
            match rec.method {
                TestMethod::Mww => assert!(rec.skipped.is_none() && rec.rejection_rate.is_some()),
                _ => assert!(rec.skipped.is_some() && rec.rejection_rate.is_none()),
            }
        }
    }

    #[test]
    fn record_count_and_bounds() {
        let c = small(TestMethod::ALL.to_vec());
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.records.len(), 2 * 5);
        for rec in &r.records {
            let p = rec.rejection_rate.unwrap();
            assert!((0.0..=1.0).contains(&p));
            let se = rec.mc_stderr.unwrap();
            assert!((se - (p * (1.0 - p) / rec.iterations as f64).sqrt()).abs() < 1e-15);
            assert_eq!(rec.iterations + rec.errors, c.iterations);
        }
    }

    #[test]
    fn power_difference_checks_grids() {
        let c = small(vec![TestMethod::PoincarePerm, TestMethod::Z]);
        let r = run_experiment(&c).unwrap();
        let d = power_difference(&r, &r).unwrap();
        assert!(d.iter().all(|x| x.difference == Some(0.0)));
        let perm = r.filter_method(TestMethod::PoincarePerm);
        let z = r.filter_method(TestMethod::Z);
        assert_eq!(power_difference(&perm, &z).unwrap().len(), 2);

        let mut other = c.clone();
        other.mu2_grid[1] = 1.0;
        let r2 = run_experiment(&other).unwrap();
        assert!(matches!(power_difference(&r, &r2), Err(Error::GridMismatch(_))));
        assert!(power_difference(&perm, &r).is_err());
    }

    #[test]
    fn csv_layout() {
        let r = run_experiment(&small(vec![TestMethod::W])).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(lines.count(), 2);
        assert!(text.contains(",w,"));
    }

    #[test]
    fn method_order_does_not_change_rates() {
        let a = run_experiment(&small(vec![TestMethod::Z, TestMethod::PoincarePerm])).unwrap();
        let b = run_experiment(&small(vec![TestMethod::PoincarePerm, TestMethod::Z])).unwrap();
        for cell in small(vec![]).cells() {
            for m in [TestMethod::Z, TestMethod::PoincarePerm] {
                assert_eq!(a.rate(&cell, m), b.rate(&cell, m));
            }
        }
    }
}
