//! Poincare-disk geometry of von Mises parameters.
//!
//! `VM(mu, kappa)` is embedded as `xi = kappa / (1 + kappa) * e^{i mu}`. A
//! preferred direction `mu0` is the radius `{ t e^{i mu0} : 0 <= t < 1 }`;
//! the distance from `xi` to it has a closed-form foot point for `mu0 = 0`,
//! and rotations about the origin (isometries of the disk) carry that result
//! to any other direction.

use crate::circular::{Angle, VonMisesParams};
use crate::error::{Error, Result};

/// Largest admissible `|z|^2`.
pub const MAX_NORM_SQR: f64 = 1.0 - 1e-15;

/// A point of the open unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiskPoint {
    pub re: f64,
    pub im: f64,
}

impl DiskPoint {
    pub const ORIGIN: DiskPoint = DiskPoint { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Result<Self> {
        let p = DiskPoint { re, im };
        if re.is_finite() && im.is_finite() && p.norm_sqr() <= MAX_NORM_SQR {
            Ok(p)
        } else {
            Err(Error::OutsideDisk { re, im })
        }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Result<Self> {
        let (s, c) = libm::sincos(angle);
        DiskPoint::new(radius * c, radius * s)
    }

    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn norm(self) -> f64 {
        libm::hypot(self.re, self.im)
    }

    pub fn arg(self) -> Angle {
        Angle::wrap(libm::atan2(self.im, self.re))
    }

    /// Multiplication by `e^{i angle}`; preserves the norm up to rounding.
    #[must_use]
    pub fn rotate(self, angle: f64) -> DiskPoint {
        let (s, c) = libm::sincos(angle);
        DiskPoint {
            re: self.re * c - self.im * s,
            im: self.re * s + self.im * c,
        }
    }

    /// Inverse of [`embed`] for `kappa > 0`.
    pub fn to_params(self) -> Result<VonMisesParams> {
        let r = self.norm();
        VonMisesParams::new(libm::atan2(self.im, self.re), r / (1.0 - r))
    }
}

/// The radius pointing at `mu0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PreferredDirection {
    pub mu0: Angle,
}

impl PreferredDirection {
    pub const ZERO: PreferredDirection = PreferredDirection { mu0: Angle::ZERO };

    pub fn new(mu0: f64) -> Result<Self> {
        Ok(PreferredDirection {
            mu0: Angle::new(mu0)?,
        })
    }
}

/// Nearest point of a radius.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Projection {
    /// Position of the foot along the radius, in `[0, 1)`.
    pub t_star: f64,
    pub point: DiskPoint,
    pub distance: f64,
}

/// `r(kappa) = kappa / (1 + kappa)`.
pub fn concentration_radius(kappa: f64) -> f64 {
    kappa / (1.0 + kappa)
}

/// `xi = r(kappa) e^{i mu}`; the uniform law (`kappa = 0`) maps to the origin.
pub fn embed(params: VonMisesParams) -> Result<DiskPoint> {
    if !params.kappa.is_finite() || params.kappa < 0.0 {
        return Err(Error::Domain {
            what: "embed",
            value: params.kappa,
        });
    }
    if params.kappa == 0.0 {
        return Ok(DiskPoint::ORIGIN);
    }
    DiskPoint::from_polar(concentration_radius(params.kappa), params.mu.radians())
}

/// `acosh(1 + delta)` without forming `1 + delta`.
#[inline]
fn acosh1p(delta: f64) -> f64 {
    libm::log1p(delta + libm::sqrt(delta * (delta + 2.0)))
}

#[inline]
pub(crate) fn distance_unchecked(w1: DiskPoint, w2: DiskPoint) -> f64 {
    let dr = w1.re - w2.re;
    let di = w1.im - w2.im;
    let gap = dr * dr + di * di;
    let delta = 2.0 * gap / ((1.0 - w1.norm_sqr()) * (1.0 - w2.norm_sqr()));
    acosh1p(delta)
}

fn check_inside(w: DiskPoint) -> Result<()> {
    DiskPoint::new(w.re, w.im).map(|_| ())
}

/// Poincare distance
/// `acosh(1 + 2|w1 - w2|^2 / ((1 - |w1|^2)(1 - |w2|^2)))`.
pub fn hyperbolic_distance(w1: DiskPoint, w2: DiskPoint) -> Result<f64> {
    check_inside(w1)?;
    check_inside(w2)?;
    Ok(distance_unchecked(w1, w2))
}

/// Foot parameter on the non-negative real axis: the root in `[0, 1)` of
/// `Re(xi) t^2 - (1 + |xi|^2) t + Re(xi) = 0`, or 0 when `Re(xi) <= 0`.
#[inline]
pub(crate) fn zero_radius_foot(xi: DiskPoint) -> f64 {
    if xi.re <= 0.0 {
        return 0.0;
    }
    let b = 1.0 + xi.norm_sqr();
    let disc = (b * b - 4.0 * xi.re * xi.re).max(0.0);
    // smaller root (b - sqrt(disc)) / (2 re), written as 1 / larger root
    let t = 2.0 * xi.re / (b + libm::sqrt(disc));
    t.clamp(0.0, 1.0)
}

fn zero_radius_projection(xi: DiskPoint) -> Projection {
    let t_star = zero_radius_foot(xi);
    let point = DiskPoint { re: t_star, im: 0.0 };
    Projection {
        t_star,
        point,
        distance: distance_unchecked(xi, point),
    }
}

/// Projection onto `R_0 = { (t, 0) : 0 <= t < 1 }`.
pub fn project_to_zero_radius(xi: DiskPoint) -> Result<Projection> {
    check_inside(xi)?;
    Ok(zero_radius_projection(xi))
}

#[inline]
pub(crate) fn radius_projection_unchecked(xi: DiskPoint, dir: PreferredDirection) -> Projection {
    let mu0 = dir.mu0.radians();
    if mu0 == 0.0 {
        return zero_radius_projection(xi);
    }
    let p = zero_radius_projection(xi.rotate(-mu0));
    Projection {
        point: p.point.rotate(mu0),
        ..p
    }
}

/// Projection onto the radius `R_{mu0}`.
pub fn project_to_radius(xi: DiskPoint, dir: PreferredDirection) -> Result<Projection> {
    check_inside(xi)?;
    Ok(radius_projection_unchecked(xi, dir))
}

/// `d_{R_{mu0}}(embed(params))`.
pub fn distance_to_preferred(params: VonMisesParams, dir: PreferredDirection) -> Result<f64> {
    Ok(radius_projection_unchecked(embed(params)?, dir).distance)
}
