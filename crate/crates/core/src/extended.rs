//! Reals extended by `+∞`.

use serde::{Deserialize, Serialize};
use std::fmt;

/// A real number or the `+∞` sentinel.
///
/// Moment generating functions and time windows can be infinite; carrying
/// the sentinel explicitly keeps those values out of floating-point
/// overflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extended {
    Finite(f64),
    PosInfinity,
}

impl Extended {
    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::PosInfinity => None,
        }
    }

    /// Smaller of `self` and a finite cap.
    pub fn min_with(self, cap: f64) -> f64 {
        match self {
            Extended::Finite(v) => v.min(cap),
            Extended::PosInfinity => cap,
        }
    }

    /// Converts to `f64`, mapping the sentinel to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            Extended::Finite(v) => v,
            Extended::PosInfinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::PosInfinity => f.write_str("+inf"),
        }
    }
}
