//! Angles, circular samples and the von Mises model.

use crate::error::{Degeneracy, Error, Result};
use crate::rng::uniform01;
use crate::specialfn::{a1_inverse, bessel_i0e};
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use rand_core::RngCore;

/// Resultant lengths within this distance of 0 or 1 make a fit degenerate.
pub const DEGENERATE_EPS: f64 = 1e-12;

/// A point on the circle, stored as its representative in `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "f64", into = "f64"))]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    /// Reduces any finite `theta` (radians) modulo `2pi`.
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::Domain {
                what: "angle",
                value: theta,
            });
        }
        Ok(Angle::wrap(theta))
    }

    /// `theta` must be finite.
    #[inline]
    pub(crate) fn wrap(theta: f64) -> Self {
        Angle(reduce(theta))
    }

    pub fn from_degrees(deg: f64) -> Result<Self> {
        Angle::new(deg.to_radians())
    }

    #[inline]
    pub fn radians(self) -> f64 {
        self.0
    }

    /// Shortest arc length to `other`, in `[0, pi]`.
    pub fn distance(self, other: Angle) -> f64 {
        circular_difference(self.0, other.0)
    }

    #[must_use]
    pub fn rotate(self, delta: f64) -> Angle {
        Angle::wrap(self.0 + delta)
    }
}

impl TryFrom<f64> for Angle {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Angle::new(v)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

/// `x mod 2pi` in `[0, 2pi)`.
fn reduce(x: f64) -> f64 {
    let mut r = libm::fmod(x, TAU);
    if r < 0.0 {
        r += TAU;
    }
    // tiny negative inputs round up to exactly 2pi
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// `min(|a - b|, 2pi - |a - b|)` for angles in `[0, 2pi)`.
pub fn circular_difference(a: f64, b: f64) -> f64 {
    let d = reduce(a - b);
    d.min(TAU - d)
}

/// Observations from one group.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CircularSample {
    angles: Vec<Angle>,
    label: Option<String>,
}

impl CircularSample {
    pub fn new(angles: Vec<Angle>) -> Self {
        CircularSample {
            angles,
            label: None,
        }
    }

    pub fn from_radians(values: &[f64]) -> Result<Self> {
        values
            .iter()
            .map(|&v| Angle::new(v))
            .collect::<Result<Vec<_>>>()
            .map(CircularSample::new)
    }

    #[must_use]
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn angles(&self) -> &[Angle] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn radians(&self) -> impl Iterator<Item = f64> + '_ {
        self.angles.iter().map(|a| a.0)
    }

    /// Applies `f` to every angle, keeping the label.
    #[must_use]
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CircularSample {
        CircularSample {
            angles: self.angles.iter().map(|a| Angle::wrap(f(a.0))).collect(),
            label: self.label.clone(),
        }
    }
}

/// Running sums of `cos` and `sin`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrigSums {
    pub cos: f64,
    pub sin: f64,
    pub n: usize,
}

impl TrigSums {
    pub fn of(sample: &CircularSample) -> Self {
        let mut sums = TrigSums::default();
        for a in sample.angles() {
            let (s, c) = libm::sincos(a.0);
            sums.push(c, s);
        }
        sums
    }

    #[inline]
    pub fn push(&mut self, cos: f64, sin: f64) {
        self.cos += cos;
        self.sin += sin;
        self.n += 1;
    }

    pub fn summary(&self) -> Result<CircularSummary> {
        if self.n == 0 {
            return Err(Error::EmptySample);
        }
        let n = self.n as f64;
        let c_bar = self.cos / n;
        let s_bar = self.sin / n;
        let r_bar = libm::sqrt(c_bar * c_bar + s_bar * s_bar).min(1.0);
        Ok(CircularSummary {
            c_bar,
            s_bar,
            r_bar,
            n: self.n,
        })
    }
}

/// Trigonometric sample moments.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CircularSummary {
    pub c_bar: f64,
    pub s_bar: f64,
    /// Mean resultant length.
    pub r_bar: f64,
    pub n: usize,
}

impl CircularSummary {
    /// Sample mean direction `atan2(s_bar, c_bar)` in `[0, 2pi)`.
    pub fn mean_direction(&self) -> Angle {
        Angle::wrap(libm::atan2(self.s_bar, self.c_bar))
    }
}

pub fn summarize(sample: &CircularSample) -> Result<CircularSummary> {
    TrigSums::of(sample).summary()
}

/// Parameters of `VM(mu, kappa)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VonMisesParams {
    pub mu: Angle,
    pub kappa: f64,
}

impl VonMisesParams {
    pub fn new(mu: f64, kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(Error::Domain {
                what: "von Mises concentration",
                value: kappa,
            });
        }
        Ok(VonMisesParams {
            mu: Angle::new(mu)?,
            kappa,
        })
    }
}

/// Density of `VM(mu, kappa)` at `theta`.
pub fn vm_density(theta: Angle, params: VonMisesParams) -> f64 {
    let kappa = params.kappa;
    // exp(k cos(t - mu)) / I0(k) = exp(k (cos(t - mu) - 1)) / (e^{-k} I0(k))
    let scaled_i0 = bessel_i0e(kappa).unwrap_or(1.0);
    libm::exp(kappa * (libm::cos(theta.0 - params.mu.0) - 1.0)) / (TAU * scaled_i0)
}

/// Best-Fisher wrapped-Cauchy rejection sampler for `VM(mu, kappa)`.
#[derive(Debug, Clone, Copy)]
pub struct VonMisesSampler {
    params: VonMisesParams,
    // wrapped-Cauchy envelope parameter, (1 + rho^2) / (2 rho)
    s: f64,
    cos_mu: f64,
    sin_mu: f64,
}

impl VonMisesSampler {
    pub fn new(params: VonMisesParams) -> Self {
        let kappa = params.kappa;
        let s = if kappa > 0.0 {
            // tau = 1 + sqrt(1 + 4k^2); rho = (tau - sqrt(2 tau)) / (2k),
            // rationalized so neither small nor large k cancels
            let root = libm::sqrt(1.0 + 4.0 * kappa * kappa);
            let tau = 1.0 + root;
            let rho = 2.0 * kappa * tau / ((root + 1.0) * (tau + libm::sqrt(2.0 * tau)));
            (1.0 + rho * rho) / (2.0 * rho)
        } else {
            f64::INFINITY
        };
        let (sin_mu, cos_mu) = libm::sincos(params.mu.0);
        VonMisesSampler {
            params,
            s,
            cos_mu,
            sin_mu,
        }
    }

    pub fn params(&self) -> VonMisesParams {
        self.params
    }

    /// `cos(theta - mu)` and the sign of `sin(theta - mu)` for one draw.
    fn draw_offset<R: RngCore + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let kappa = self.params.kappa;
        let s = self.s;
        let w = loop {
            let z = libm::cos(PI * uniform01(rng));
            let w = (1.0 + s * z) / (s + z);
            let y = kappa * (s - w);
            let v = uniform01(rng);
            if y * (2.0 - y) - v >= 0.0 || libm::log(y / v) + 1.0 - y >= 0.0 {
                break w.clamp(-1.0, 1.0);
            }
        };
        let sign = if uniform01(rng) < 0.5 { -1.0 } else { 1.0 };
        (w, sign)
    }

    pub fn draw<R: RngCore + ?Sized>(&self, rng: &mut R) -> Angle {
        if self.params.kappa == 0.0 {
            return Angle::wrap(TAU * uniform01(rng));
        }
        let (w, sign) = self.draw_offset(rng);
        Angle::wrap(self.params.mu.0 + sign * libm::acos(w))
    }

    /// `(cos theta, sin theta)` of one draw, without forming `theta`.
    pub fn draw_cos_sin<R: RngCore + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        if self.params.kappa == 0.0 {
            let (s, c) = libm::sincos(TAU * uniform01(rng));
            return (c, s);
        }
        let (w, sign) = self.draw_offset(rng);
        let v = sign * libm::sqrt((1.0 - w * w).max(0.0));
        (
            w * self.cos_mu - v * self.sin_mu,
            w * self.sin_mu + v * self.cos_mu,
        )
    }
}

/// `n` independent draws from `VM(mu, kappa)`.
pub fn vm_sample<R: RngCore + ?Sized>(params: VonMisesParams, n: usize, rng: &mut R) -> CircularSample {
    let sampler = VonMisesSampler::new(params);
    CircularSample::new((0..n).map(|_| sampler.draw(rng)).collect())
}

/// Maximum likelihood estimates for one group.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitResult {
    pub params: VonMisesParams,
    pub summary: CircularSummary,
    pub degeneracy: Option<Degeneracy>,
}

impl FitResult {
    pub fn is_degenerate(&self) -> bool {
        self.degeneracy.is_some()
    }

    /// Fails with the group name if the fit is degenerate.
    pub fn require_regular(&self, group: &str) -> Result<&Self> {
        match self.degeneracy {
            Some(kind) => Err(Error::Degenerate {
                group: group.into(),
                kind,
            }),
            None => Ok(self),
        }
    }
}

/// Concentration reported for point-mass samples.
pub fn kappa_cap() -> f64 {
    a1_inverse(1.0 - DEGENERATE_EPS).expect("cap resultant is inside [0, 1)")
}

pub(crate) fn classify(r_bar: f64) -> Option<Degeneracy> {
    if r_bar >= 1.0 - DEGENERATE_EPS {
        Some(Degeneracy::PointMass)
    } else if r_bar <= DEGENERATE_EPS {
        Some(Degeneracy::NoDirection)
    } else {
        None
    }
}

pub fn fit_summary(summary: CircularSummary) -> FitResult {
    let degeneracy = classify(summary.r_bar);
    let kappa = match degeneracy {
        Some(Degeneracy::PointMass) => kappa_cap(),
        _ => a1_inverse(summary.r_bar).expect("resultant below the cap"),
    };
    FitResult {
        params: VonMisesParams {
            mu: summary.mean_direction(),
            kappa,
        },
        summary,
        degeneracy,
    }
}

/// Closed-form MLE: `mu = Arg(mean e^{i theta})`, `kappa = A1^{-1}(R)`.
pub fn vm_fit(sample: &CircularSample) -> Result<FitResult> {
    summarize(sample).map(fit_summary)
}
