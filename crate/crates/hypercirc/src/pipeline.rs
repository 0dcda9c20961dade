//! The clinical analysis pipeline: fourfold transform, imputation of missing
//! angles by the circular mean, per-group fits and two-sample tests.

use hypercirc_core::baselines::{mww_test, w_test, z_test, BaselineMethod, BaselineReport, CircularDistance};
use hypercirc_core::circular::{summarize, vm_fit, CircularSample, FitResult};
use hypercirc_core::hyperbolic::{embed, project_to_radius, DiskPoint, PreferredDirection};
use hypercirc_core::inference::{Method, PreparedTest, TestConfig, TestReport, DEFAULT_ALPHA, DEFAULT_RESAMPLES};
use hypercirc_core::{Angle, Degeneracy};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{AngleUnit, Group};
use crate::parallel;

/// `theta -> 4 theta mod 2 pi`.
pub fn fourfold_transform(sample: &CircularSample) -> CircularSample {
    sample.map(|t| 4.0 * t)
}

fn fourfold_values(values: &[Option<f64>]) -> Vec<Option<f64>> {
    values
        .iter()
        .map(|v| v.map(|t| Angle::ZERO.rotate(4.0 * t).radians()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputationEntry {
    pub group: String,
    /// 0-based positions within the group, in file order.
    pub indices: Vec<usize>,
    pub value: f64,
}

/// Replaces missing entries by the circular mean of the observed ones.
/// Returns the completed values and, if anything was missing, the log entry
/// (with an empty group name for the caller to fill in).
pub fn impute_circular_mean(values: &[Option<f64>]) -> Result<(Vec<f64>, Option<ImputationEntry>)> {
    let indices: Vec<usize> = values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.is_none().then_some(i))
        .collect();
    if indices.is_empty() {
        return Ok((values.iter().flatten().copied().collect(), None));
    }
    let observed: Vec<f64> = values.iter().flatten().copied().collect();
    if observed.is_empty() {
        return Err(Error::Data("every value is missing; nothing to impute from".into()));
    }
    let summary = summarize(&CircularSample::from_radians(&observed)?)?;
    if summary.r_bar <= hypercirc_core::circular::DEGENERATE_EPS {
        return Err(Error::Data(
            "observed values have zero resultant; their circular mean is undefined".into(),
        ));
    }
    let mean = summary.mean_direction().radians();
    let completed = values.iter().map(|v| v.unwrap_or(mean)).collect();
    Ok((
        completed,
        Some(ImputationEntry {
            group: String::new(),
            indices,
            value: mean,
        }),
    ))
}

/// Tests `analyze` can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    PoincarePerm,
    PoincareBoot,
    Z,
    W,
    Mww,
}

impl TestMethod {
    pub const ALL: [TestMethod; 5] = [
        TestMethod::PoincarePerm,
        TestMethod::PoincareBoot,
        TestMethod::Z,
        TestMethod::W,
        TestMethod::Mww,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestMethod::PoincarePerm => "poincare_perm",
            TestMethod::PoincareBoot => "poincare_boot",
            TestMethod::Z => "z",
            TestMethod::W => "w",
            TestMethod::Mww => "mww",
        }
    }

    pub fn poincare(self) -> Option<Method> {
        match self {
            TestMethod::PoincarePerm => Some(Method::Permutation),
            TestMethod::PoincareBoot => Some(Method::Bootstrap),
            _ => None,
        }
    }
}

/// Settings shared by a single two-sample test run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestSettings {
    pub mu0: f64,
    pub resamples: usize,
    pub seed: u64,
    pub alpha: f64,
    pub distance: CircularDistance,
}

impl Default for TestSettings {
    fn default() -> Self {
        TestSettings {
            mu0: 0.0,
            resamples: DEFAULT_RESAMPLES,
            seed: 0,
            alpha: DEFAULT_ALPHA,
            distance: CircularDistance::Geodesic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestOutcome {
    Poincare(TestReport),
    Baseline { report: BaselineReport, alpha: f64, reject: bool },
}

impl TestOutcome {
    pub fn name(&self) -> &'static str {
        match self {
            TestOutcome::Poincare(r) => r.method.name(),
            TestOutcome::Baseline { report, .. } => report.method.name(),
        }
    }

    pub fn p_value(&self) -> f64 {
        match self {
            TestOutcome::Poincare(r) => r.p_value,
            TestOutcome::Baseline { report, .. } => report.p_value,
        }
    }

    pub fn statistic(&self) -> f64 {
        match self {
            TestOutcome::Poincare(r) => r.t_obs,
            TestOutcome::Baseline { report, .. } => report.statistic,
        }
    }

    pub fn reject(&self) -> bool {
        match self {
            TestOutcome::Poincare(r) => r.reject,
            TestOutcome::Baseline { reject, .. } => *reject,
        }
    }
}

/// Runs one test on two complete samples. Permutation and bootstrap
/// replicates are spread over the current rayon pool.
pub fn run_method(
    method: TestMethod,
    sample1: &CircularSample,
    sample2: &CircularSample,
    settings: &TestSettings,
) -> Result<TestOutcome> {
    if let Some(m) = method.poincare() {
        let config = TestConfig::new(m)
            .with_mu0(PreferredDirection::new(settings.mu0)?)
            .with_resamples(settings.resamples)
            .with_seed(settings.seed)
            .with_alpha(settings.alpha);
        let prepared = PreparedTest::new(sample1, sample2, config)?;
        return Ok(TestOutcome::Poincare(parallel::run_prepared(prepared)));
    }
    if settings.mu0 != 0.0 {
        return Err(Error::Usage(format!(
            "the {} test is only defined for the preferred direction 0",
            method.name()
        )));
    }
    if !(settings.alpha > 0.0 && settings.alpha < 1.0) {
        return Err(Error::Usage(format!("alpha must lie in (0, 1), got {}", settings.alpha)));
    }
    let report = match method {
        TestMethod::Z => z_test(sample1, sample2)?,
        TestMethod::W => w_test(sample1, sample2)?,
        _ => mww_test(sample1, sample2, settings.distance)?,
    };
    debug_assert!(matches!(
        report.method,
        BaselineMethod::Z | BaselineMethod::W | BaselineMethod::Mww
    ));
    Ok(TestOutcome::Baseline {
        report,
        alpha: settings.alpha,
        reject: report.reject(settings.alpha),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PipelineOrder {
    TransformThenImpute,
    ImputeThenTransform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub fourfold: bool,
    pub impute: bool,
    pub order: PipelineOrder,
    pub methods: Vec<TestMethod>,
    pub settings: TestSettings,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            fourfold: false,
            impute: false,
            order: PipelineOrder::TransformThenImpute,
            methods: vec![TestMethod::PoincarePerm, TestMethod::PoincareBoot],
            settings: TestSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupFit {
    pub group: String,
    pub n: usize,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupEmbedding {
    pub group: String,
    pub xi: DiskPoint,
    /// Foot of the perpendicular on the preferred radius, as a distance from
    /// the origin.
    pub t_star: f64,
    pub distance_to_preferred: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub software: String,
    pub version: String,
    /// Steps in the order they were applied.
    pub pipeline: Vec<String>,
    pub fourfold: bool,
    pub order: PipelineOrder,
    pub unit: AngleUnit,
    pub inputs: Vec<String>,
    pub settings: TestSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub fits: Vec<GroupFit>,
    pub embeddings: Vec<GroupEmbedding>,
    pub tests: Vec<TestOutcome>,
    pub imputation_log: Vec<ImputationEntry>,
    pub provenance: Provenance,
}

fn prepare_group(
    group: &Group,
    index: usize,
    options: &AnalysisOptions,
    log: &mut Vec<ImputationEntry>,
) -> Result<CircularSample> {
    let label = group.label(index);
    let missing = group.missing() > 0;
    if missing && !options.impute {
        return Err(Error::Data(format!(
            "{label}: {} missing value(s); pass --impute to fill them with the circular mean",
            group.missing()
        )));
    }
    let mut impute = |values: &[Option<f64>]| -> Result<Vec<Option<f64>>> {
        if !options.impute {
            return Ok(values.to_vec());
        }
        let (done, entry) = impute_circular_mean(values).map_err(|e| match e {
            Error::Data(msg) => Error::Data(format!("{label}: {msg}")),
            other => other,
        })?;
        if let Some(mut entry) = entry {
            entry.group = label.clone();
            log.push(entry);
        }
        Ok(done.into_iter().map(Some).collect())
    };
    let transform = |values: &[Option<f64>]| {
        if options.fourfold {
            fourfold_values(values)
        } else {
            values.to_vec()
        }
    };
    let values = match options.order {
        PipelineOrder::TransformThenImpute => {
            let t = transform(&group.values);
            impute(&t)?
        }
        PipelineOrder::ImputeThenTransform => {
            let i = impute(&group.values)?;
            transform(&i)
        }
    };
    Group {
        name: Some(label),
        values,
    }
    .complete(index)
}

/// The steps `analyze` applies, in order.
pub fn pipeline_steps(options: &AnalysisOptions) -> Vec<String> {
    let transform = options.fourfold.then_some("fourfold_transform");
    let impute = options.impute.then_some("impute_circular_mean");
    let pre = match options.order {
        PipelineOrder::TransformThenImpute => [transform, impute],
        PipelineOrder::ImputeThenTransform => [impute, transform],
    };
    pre.into_iter()
        .flatten()
        .chain(["fit", "test"])
        .map(String::from)
        .collect()
}

/// Transform, impute, fit and test two groups.
pub fn analyze(groups: &[Group; 2], unit: AngleUnit, inputs: Vec<String>, options: &AnalysisOptions) -> Result<AnalysisReport> {
    if options.methods.is_empty() {
        return Err(Error::Usage("no tests selected".into()));
    }
    let mut imputation_log = Vec::new();
    let s1 = prepare_group(&groups[0], 1, options, &mut imputation_log)?;
    let s2 = prepare_group(&groups[1], 2, options, &mut imputation_log)?;

    let dir = PreferredDirection::new(options.settings.mu0)?;
    let mut fits = Vec::new();
    let mut embeddings = Vec::new();
    for sample in [&s1, &s2] {
        let group = sample.label().unwrap_or_default().to_string();
        let fit = vm_fit(sample)?;
        let xi = embed(fit.params)?;
        let p = project_to_radius(xi, dir)?;
        fits.push(GroupFit {
            group: group.clone(),
            n: sample.len(),
            fit,
        });
        embeddings.push(GroupEmbedding {
            group,
            xi,
            t_star: p.t_star,
            distance_to_preferred: p.distance,
        });
    }

    let mut tests = Vec::new();
    for &m in &options.methods {
        tests.push(run_method(m, &s1, &s2, &options.settings)?);
    }

    Ok(AnalysisReport {
        fits,
        embeddings,
        tests,
        imputation_log,
        provenance: Provenance {
            software: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            pipeline: pipeline_steps(options),
            fourfold: options.fourfold,
            order: options.order,
            unit,
            inputs,
            settings: options.settings,
        },
    })
}

/// Human-readable name of a degeneracy, for tables.
pub fn degeneracy_label(d: Option<Degeneracy>) -> &'static str {
    match d {
        None => "-",
        Some(Degeneracy::PointMass) => "point mass (kappa capped)",
        Some(Degeneracy::NoDirection) => "no mean direction",
    }
}
