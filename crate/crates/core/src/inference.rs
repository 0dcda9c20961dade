//! Two-sample tests of equal hyperbolic distance to a preferred direction.
//!
//! The statistic is `T = |d_R(xi1) - d_R(xi2)|` where `xi_g` embeds the von
//! Mises MLE of group `g` and `d_R` is the distance to the preferred radius.
//! Its null distribution is approximated either by random relabelings of the
//! pooled sample (equal concentrations) or by a parametric bootstrap from the
//! fitted concentrations (unequal concentrations).
//!
//! Replicate `b` always draws from `substream(seed, b, ..)`, so a test may
//! be evaluated serially through [`PreparedTest::run`] or split across
//! workers via [`PreparedTest::replicate`] and [`PreparedTest::finish`] with
//! identical results.

use crate::circular::{
    classify, fit_summary, CircularSample, FitResult, TrigSums, VonMisesParams, VonMisesSampler,
};
use crate::error::{Error, Result};
use crate::hyperbolic::{embed, radius_projection_unchecked, DiskPoint, PreferredDirection};
use crate::rng::{partial_shuffle, substream, Purpose};
use crate::specialfn::a1_inverse;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

pub const DEFAULT_RESAMPLES: usize = 2500;
pub const MIN_RESAMPLES: usize = 99;
pub const DEFAULT_ALPHA: f64 = 0.05;
/// Share of degenerate replicates above which a report carries a warning.
pub const DEGENERATE_WARN_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Method {
    #[cfg_attr(feature = "serde", serde(rename = "poincare_perm"))]
    Permutation,
    #[cfg_attr(feature = "serde", serde(rename = "poincare_boot"))]
    Bootstrap,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Permutation => "poincare_perm",
            Method::Bootstrap => "poincare_boot",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestConfig {
    pub mu0: PreferredDirection,
    pub resamples: usize,
    pub seed: u64,
    pub method: Method,
    pub alpha: f64,
}

impl TestConfig {
    pub fn new(method: Method) -> Self {
        TestConfig {
            mu0: PreferredDirection::ZERO,
            resamples: DEFAULT_RESAMPLES,
            seed: 0,
            method,
            alpha: DEFAULT_ALPHA,
        }
    }

    #[must_use]
    pub fn with_resamples(mut self, resamples: usize) -> Self {
        self.resamples = resamples;
        self
    }

    #[must_use]
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    #[must_use]
    pub fn with_mu0(mut self, mu0: PreferredDirection) -> Self {
        self.mu0 = mu0;
        self
    }

    #[must_use]
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.resamples < MIN_RESAMPLES {
            return Err(Error::InvalidConfig(format!(
                "resamples must be at least {MIN_RESAMPLES}, got {}",
                self.resamples
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Observed statistic together with everything it was computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Statistic {
    pub t_obs: f64,
    pub fit1: FitResult,
    pub fit2: FitResult,
    pub xi1: DiskPoint,
    pub xi2: DiskPoint,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestReport {
    pub method: Method,
    pub t_obs: f64,
    pub p_value: f64,
    pub fit1: FitResult,
    pub fit2: FitResult,
    pub xi1: DiskPoint,
    pub xi2: DiskPoint,
    pub d1: f64,
    pub d2: f64,
    pub mu0: PreferredDirection,
    pub alpha: f64,
    pub reject: bool,
    pub seed: u64,
    pub resamples: usize,
    /// Replicates with `T >= t_obs`.
    pub exceedances: usize,
    /// Replicates whose refit was degenerate (counted as `T = +inf`).
    pub degenerate_replicates: usize,
    pub degenerate_warning: bool,
}

/// `(1 + exceedances) / (resamples + 1)`.
pub fn p_value(exceedances: usize, resamples: usize) -> f64 {
    (1 + exceedances) as f64 / (resamples + 1) as f64
}

pub(crate) fn group_name(sample: &CircularSample, index: usize) -> String {
    sample
        .label()
        .map_or_else(|| format!("group {index}"), String::from)
}

/// `d_R(xi)` of the fit implied by `sums`, or `None` when the fit is degenerate.
#[inline]
fn distance_from_sums(sums: &TrigSums, dir: PreferredDirection) -> Option<f64> {
    let n = sums.n as f64;
    let c = sums.cos / n;
    let s = sums.sin / n;
    let r_bar = libm::sqrt(c * c + s * s).min(1.0);
    if classify(r_bar).is_some() {
        return None;
    }
    let kappa = a1_inverse(r_bar).ok()?;
    let scale = kappa / (1.0 + kappa) / r_bar;
    let xi = DiskPoint {
        re: c * scale,
        im: s * scale,
    };
    Some(radius_projection_unchecked(xi, dir).distance)
}

/// Replicate statistic; `+inf` when a refit is degenerate.
#[inline]
fn replicate_statistic(g1: &TrigSums, g2: &TrigSums, dir: PreferredDirection) -> f64 {
    match (distance_from_sums(g1, dir), distance_from_sums(g2, dir)) {
        (Some(a), Some(b)) => (a - b).abs(),
        _ => f64::INFINITY,
    }
}

fn embedded_distance(fit: &FitResult, dir: PreferredDirection) -> Result<(DiskPoint, f64)> {
    let xi = embed(fit.params)?;
    Ok((xi, radius_projection_unchecked(xi, dir).distance))
}

/// `T = |d_R(xi1) - d_R(xi2)|` for the observed samples.
pub fn statistic_t(
    sample1: &CircularSample,
    sample2: &CircularSample,
    mu0: PreferredDirection,
) -> Result<Statistic> {
    let fit = |sample: &CircularSample, index| -> Result<FitResult> {
        let sums = TrigSums::of(sample);
        let fit = fit_summary(sums.summary()?);
        fit.require_regular(&group_name(sample, index))?;
        Ok(fit)
    };
    let fit1 = fit(sample1, 1)?;
    let fit2 = fit(sample2, 2)?;
    let (xi1, d1) = embedded_distance(&fit1, mu0)?;
    let (xi2, d2) = embedded_distance(&fit2, mu0)?;
    Ok(Statistic {
        t_obs: (d1 - d2).abs(),
        fit1,
        fit2,
        xi1,
        xi2,
        d1,
        d2,
    })
}

#[derive(Debug, Clone)]
enum Resampler {
    Permutation {
        cos: Vec<f64>,
        sin: Vec<f64>,
        n1: usize,
    },
    Bootstrap {
        group1: VonMisesSampler,
        group2: VonMisesSampler,
        n1: usize,
        n2: usize,
    },
}

/// A test whose observed statistic is known and whose replicates have not
/// been drawn yet.
#[derive(Debug, Clone)]
pub struct PreparedTest {
    config: TestConfig,
    statistic: Statistic,
    resampler: Resampler,
}

impl PreparedTest {
    pub fn new(sample1: &CircularSample, sample2: &CircularSample, config: TestConfig) -> Result<Self> {
        config.validate()?;
        let statistic = statistic_t(sample1, sample2, config.mu0)?;
        let resampler = match config.method {
            Method::Permutation => {
                let (sin, cos) = sample1
                    .radians()
                    .chain(sample2.radians())
                    .map(libm::sincos)
                    .unzip();
                Resampler::Permutation {
                    cos,
                    sin,
                    n1: sample1.len(),
                }
            }
            Method::Bootstrap => {
                // null resamples centred on the preferred direction
                let centred = |fit: &FitResult| VonMisesParams {
                    mu: config.mu0.mu0,
                    kappa: fit.params.kappa,
                };
                Resampler::Bootstrap {
                    group1: VonMisesSampler::new(centred(&statistic.fit1)),
                    group2: VonMisesSampler::new(centred(&statistic.fit2)),
                    n1: sample1.len(),
                    n2: sample2.len(),
                }
            }
        };
        Ok(PreparedTest {
            config,
            statistic,
            resampler,
        })
    }

    pub fn config(&self) -> &TestConfig {
        &self.config
    }

    pub fn statistic(&self) -> &Statistic {
        &self.statistic
    }

    /// Statistic of replicate `b` (0-based); `+inf` if a refit is degenerate.
    pub fn replicate(&self, b: u64) -> f64 {
        let dir = self.config.mu0;
        match &self.resampler {
            Resampler::Permutation { cos, sin, n1 } => {
                let mut rng = substream(self.config.seed, b, Purpose::Permutation);
                let mut order: Vec<u32> = (0..cos.len() as u32).collect();
                partial_shuffle(&mut order, *n1, &mut rng);
                let (first, rest) = order.split_at(*n1);
                let sums = |idx: &[u32]| {
                    let mut s = TrigSums::default();
                    for &i in idx {
                        s.push(cos[i as usize], sin[i as usize]);
                    }
                    s
                };
                replicate_statistic(&sums(first), &sums(rest), dir)
            }
            Resampler::Bootstrap {
                group1,
                group2,
                n1,
                n2,
            } => {
                let mut rng = substream(self.config.seed, b, Purpose::Bootstrap);
                let mut draw = |sampler: &VonMisesSampler, n: usize| {
                    let mut s = TrigSums::default();
                    for _ in 0..n {
                        let (c, si) = sampler.draw_cos_sin(&mut rng);
                        s.push(c, si);
                    }
                    s
                };
                let g1 = draw(group1, *n1);
                let g2 = draw(group2, *n2);
                replicate_statistic(&g1, &g2, dir)
            }
        }
    }

    /// Assembles the report from all replicate statistics, in any order.
    pub fn finish(self, replicates: impl IntoIterator<Item = f64>) -> TestReport {
        let t_obs = self.statistic.t_obs;
        let (mut count, mut exceed, mut degenerate) = (0usize, 0usize, 0usize);
        for t in replicates {
            count += 1;
            if t == f64::INFINITY {
                degenerate += 1;
            }
            if t >= t_obs {
                exceed += 1;
            }
        }
        debug_assert_eq!(count, self.config.resamples);
        let p = p_value(exceed, count);
        let Statistic {
            fit1,
            fit2,
            xi1,
            xi2,
            d1,
            d2,
            ..
        } = self.statistic;
        TestReport {
            method: self.config.method,
            t_obs,
            p_value: p,
            fit1,
            fit2,
            xi1,
            xi2,
            d1,
            d2,
            mu0: self.config.mu0,
            alpha: self.config.alpha,
            reject: p <= self.config.alpha,
            seed: self.config.seed,
            resamples: count,
            exceedances: exceed,
            degenerate_replicates: degenerate,
            degenerate_warning: degenerate as f64 > DEGENERATE_WARN_FRACTION * count as f64,
        }
    }

    /// Runs every replicate on the current thread.
    pub fn run(self) -> TestReport {
        let b = self.config.resamples as u64;
        let stats: Vec<f64> = (0..b).map(|i| self.replicate(i)).collect();
        self.finish(stats)
    }
}

fn require_method(config: &TestConfig, method: Method) -> Result<()> {
    if config.method == method {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "{} test called with method {}",
            method.name(),
            config.method.name()
        )))
    }
}

/// Monte Carlo permutation test (equal concentrations).
pub fn permutation_test(
    sample1: &CircularSample,
    sample2: &CircularSample,
    config: &TestConfig,
) -> Result<TestReport> {
    require_method(config, Method::Permutation)?;
    Ok(PreparedTest::new(sample1, sample2, *config)?.run())
}

/// Parametric bootstrap test (unequal concentrations).
pub fn bootstrap_test(
    sample1: &CircularSample,
    sample2: &CircularSample,
    config: &TestConfig,
) -> Result<TestReport> {
    require_method(config, Method::Bootstrap)?;
    Ok(PreparedTest::new(sample1, sample2, *config)?.run())
}

/// Dispatches on `config.method`.
pub fn run_test(sample1: &CircularSample, sample2: &CircularSample, config: &TestConfig) -> Result<TestReport> {
    Ok(PreparedTest::new(sample1, sample2, *config)?.run())
}
