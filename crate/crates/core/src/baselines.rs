//! Trigonometric-moment and rank baselines against the preferred direction 0.
//!
//! * Z: difference of sample mean cosines, for equal concentrations.
//! * W: arccos of the cosine means normalized by `A1(kappa_hat)`, with a
//!   delta-method variance, referred to chi-square(1).
//! * MWW: Mann-Whitney-Wilcoxon on circular distances from 0.

use crate::circular::{fit_summary, Angle, CircularSample, TrigSums};
use crate::error::{Error, Result};
use crate::inference::group_name;
use crate::specialfn::a1;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, TAU};

/// Smallest group size accepted by the asymptotic Z test.
pub const Z_MIN_N: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BaselineMethod {
    Z,
    W,
    Mww,
}

impl BaselineMethod {
    pub fn name(self) -> &'static str {
        match self {
            BaselineMethod::Z => "z",
            BaselineMethod::W => "w",
            BaselineMethod::Mww => "mww",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ReferenceDistribution {
    StandardNormalTwoSided,
    ChiSquareDf1,
    NormalApproximatedRank,
}

/// Distance from the preferred direction 0 used by the rank test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CircularDistance {
    /// `min(theta, 2pi - theta)`
    #[default]
    Geodesic,
    /// `1 - cos theta`
    Cosine,
}

impl CircularDistance {
    pub fn of(self, theta: Angle) -> f64 {
        match self {
            CircularDistance::Geodesic => circ_dist_geodesic(theta),
            CircularDistance::Cosine => circ_dist_cosine(theta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BaselineReport {
    pub method: BaselineMethod,
    pub statistic: f64,
    pub p_value: f64,
    pub reference_distribution: ReferenceDistribution,
    /// W only: a normalized cosine mean fell outside `[-1, 1]` and was clamped.
    pub clamped: bool,
    /// MWW only: every pooled distance was tied.
    pub degenerate: bool,
    pub distance: Option<CircularDistance>,
}

impl BaselineReport {
    pub fn reject(&self, alpha: f64) -> bool {
        self.p_value <= alpha
    }
}

pub fn circ_dist_geodesic(theta: Angle) -> f64 {
    let t = theta.radians();
    t.min(TAU - t)
}

pub fn circ_dist_cosine(theta: Angle) -> f64 {
    1.0 - libm::cos(theta.radians())
}

/// `P(|N(0,1)| >= |z|)`.
pub fn normal_two_sided_p(z: f64) -> f64 {
    libm::erfc(z.abs() * FRAC_1_SQRT_2).min(1.0)
}

/// `P(chi2_1 >= w)`.
pub fn chi_square1_upper_p(w: f64) -> f64 {
    if w <= 0.0 {
        return 1.0;
    }
    libm::erfc(libm::sqrt(0.5 * w)).min(1.0)
}

/// Mean and unbiased variance of `cos theta`.
fn cosine_moments(sample: &CircularSample) -> (f64, f64) {
    let n = sample.len() as f64;
    let mean = sample.radians().map(libm::cos).sum::<f64>() / n;
    let ss = sample
        .radians()
        .map(|t| {
            let d = libm::cos(t) - mean;
            d * d
        })
        .sum::<f64>();
    (mean, if sample.len() > 1 { ss / (n - 1.0) } else { 0.0 })
}

/// Z test of `cos mu1 = cos mu2` under a common concentration.
pub fn z_test(sample1: &CircularSample, sample2: &CircularSample) -> Result<BaselineReport> {
    for (index, s) in [(1, sample1), (2, sample2)] {
        if s.is_empty() {
            return Err(Error::EmptySample);
        }
        if s.len() < Z_MIN_N {
            return Err(Error::SampleTooSmall {
                group: group_name(s, index),
                n: s.len(),
                min: Z_MIN_N,
            });
        }
    }
    let (c1, v1) = cosine_moments(sample1);
    let (c2, v2) = cosine_moments(sample2);
    let se2 = v1 / sample1.len() as f64 + v2 / sample2.len() as f64;
    if se2 <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let z = (c1 - c2) / libm::sqrt(se2);
    Ok(BaselineReport {
        method: BaselineMethod::Z,
        statistic: z,
        p_value: normal_two_sided_p(z),
        reference_distribution: ReferenceDistribution::StandardNormalTwoSided,
        clamped: false,
        degenerate: false,
        distance: None,
    })
}

struct WGroup {
    angle: f64,
    variance: f64,
    clamped: bool,
}

fn w_group(sample: &CircularSample, index: usize) -> Result<WGroup> {
    let fit = fit_summary(TrigSums::of(sample).summary()?);
    fit.require_regular(&group_name(sample, index))?;
    let a = a1(fit.params.kappa)?;
    let (c_bar, var_cos) = cosine_moments(sample);
    let raw = c_bar / a;
    let x = raw.clamp(-1.0, 1.0);
    let n = sample.len() as f64;
    // delta method through arccos, A1(kappa_hat) treated as known
    let curvature = 1.0 - x * x;
    let variance = if curvature > 0.0 {
        var_cos / (n * a * a * curvature)
    } else {
        f64::INFINITY
    };
    Ok(WGroup {
        angle: libm::acos(x),
        variance,
        clamped: raw != x || curvature <= 0.0,
    })
}

/// Chi-square(1) test of `cos mu1 = cos mu2` allowing unequal concentrations.
pub fn w_test(sample1: &CircularSample, sample2: &CircularSample) -> Result<BaselineReport> {
    let g1 = w_group(sample1, 1)?;
    let g2 = w_group(sample2, 2)?;
    let total = g1.variance + g2.variance;
    if total <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let diff = g1.angle - g2.angle;
    let w = if total.is_finite() { diff * diff / total } else { 0.0 };
    Ok(BaselineReport {
        method: BaselineMethod::W,
        statistic: w,
        p_value: chi_square1_upper_p(w),
        reference_distribution: ReferenceDistribution::ChiSquareDf1,
        clamped: g1.clamped || g2.clamped,
        degenerate: false,
        distance: None,
    })
}

/// Midranks (1-based) of `values` and the tie correction `sum (t^3 - t)`.
fn midranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = alloc::vec![0.0; values.len()];
    let mut ties = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let rank = 0.5 * ((i + 1) + j) as f64;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        let t = (j - i) as f64;
        ties += t * t * t - t;
        i = j;
    }
    (ranks, ties)
}

/// Mann-Whitney U of group 1 over precomputed values, with the tie-corrected
/// normal approximation.
pub fn mann_whitney(values1: &[f64], values2: &[f64]) -> Result<(f64, f64, bool)> {
    if values1.is_empty() || values2.is_empty() {
        return Err(Error::EmptySample);
    }
    let (n1, n2) = (values1.len() as f64, values2.len() as f64);
    let pooled: Vec<f64> = values1.iter().chain(values2).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let r1: f64 = ranks[..values1.len()].iter().sum();
    let u = r1 - n1 * (n1 + 1.0) / 2.0;
    let n = n1 + n2;
    let variance = n1 * n2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    if !(variance > 0.0) {
        return Ok((u, 1.0, true));
    }
    let z = (u - n1 * n2 / 2.0) / libm::sqrt(variance);
    Ok((u, normal_two_sided_p(z), false))
}

/// Rank test on distances from the preferred direction 0.
pub fn mww_test(
    sample1: &CircularSample,
    sample2: &CircularSample,
    distance: CircularDistance,
) -> Result<BaselineReport> {
    let d = |s: &CircularSample| -> Vec<f64> { s.angles().iter().map(|&a| distance.of(a)).collect() };
    let (u, p, degenerate) = mann_whitney(&d(sample1), &d(sample2))?;
    Ok(BaselineReport {
        method: BaselineMethod::Mww,
        statistic: u,
        p_value: p,
        reference_distribution: ReferenceDistribution::NormalApproximatedRank,
        clamped: false,
        degenerate,
        distance: Some(distance),
    })
}
