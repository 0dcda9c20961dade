use alloc::string::String;
use core::fmt;

/// Why a von Mises fit cannot feed the disk embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Degeneracy {
    /// Mean resultant length at 1: the sample is a point mass and the
    /// concentration estimate had to be capped.
    PointMass,
    /// Mean resultant length at 0: the mean direction is undefined.
    NoDirection,
}

impl fmt::Display for Degeneracy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degeneracy::PointMass => f.write_str("mean resultant length is 1 (point mass)"),
            Degeneracy::NoDirection => {
                f.write_str("mean resultant length is 0 (mean direction undefined)")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    Domain { what: &'static str, value: f64 },
    /// A point lies on or outside the unit circle.
    OutsideDisk { re: f64, im: f64 },
    /// The result does not fit in an f64.
    Overflow { what: &'static str, value: f64 },
    EmptySample,
    /// An asymptotic procedure was called with fewer observations than it supports.
    SampleTooSmall { group: String, n: usize, min: usize },
    /// A group's fit is degenerate and cannot be used.
    Degenerate { group: String, kind: Degeneracy },
    /// Both groups have zero variance in the statistic an asymptotic test needs.
    ZeroVariance,
    InvalidConfig(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what}: argument {value} out of domain"),
            Error::OutsideDisk { re, im } => {
                write!(f, "point ({re}, {im}) is not strictly inside the unit disk")
            }
            Error::Overflow { what, value } => write!(f, "{what}({value}) overflows f64"),
            Error::EmptySample => f.write_str("sample is empty"),
            Error::SampleTooSmall { group, n, min } => {
                write!(f, "{group}: {n} observations, at least {min} required")
            }
            Error::Degenerate { group, kind } => write!(f, "{group}: degenerate fit, {kind}"),
            Error::ZeroVariance => f.write_str("both groups have zero variance"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T, E = Error> = core::result::Result<T, E>;
