//! Probabilities carried as natural logarithms.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Slack for round-off that pushes a computed log-probability just above zero.
const ROUNDOFF_SLACK: f64 = 1e-12;

/// A probability stored as its natural logarithm.
///
/// The value is always `<= 0`; `-inf` encodes probability zero. Tail
/// probabilities of Poisson products fall far below `f64::MIN_POSITIVE`, so
/// every public routine in this crate hands them around in this form.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct LogProb(f64);

impl LogProb {
    pub const ZERO: LogProb = LogProb(f64::NEG_INFINITY);
    pub const ONE: LogProb = LogProb(0.0);

    /// Wraps a log-probability, rejecting NaN and positive values.
    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value > 0.0 {
            return Err(Error::InvalidArgument(format!(
                "log-probability must be <= 0, got {value}"
            )));
        }
        Ok(LogProb(value))
    }

    /// Like [`LogProb::new`] but snaps values within round-off of zero down to 0.
    pub(crate) fn from_computed(value: f64) -> Self {
        debug_assert!(!value.is_nan());
        if value > 0.0 {
            debug_assert!(value <= ROUNDOFF_SLACK, "log-probability {value} > 0");
            LogProb(0.0)
        } else {
            LogProb(value)
        }
    }

    pub fn from_prob(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "probability must lie in [0, 1], got {p}"
            )));
        }
        Ok(LogProb(p.ln()))
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.0
    }

    /// The plain probability; underflows to 0 below about `exp(-745)`.
    #[inline]
    pub fn prob(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

impl fmt::Display for LogProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({})", self.0)
    }
}

impl From<LogProb> for f64 {
    fn from(p: LogProb) -> f64 {
        p.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_positive_and_nan() {
        assert!(LogProb::new(0.5).is_err());
        assert!(LogProb::new(f64::NAN).is_err());
        assert!(LogProb::new(0.0).is_ok());
        assert!(LogProb::new(f64::NEG_INFINITY).unwrap().is_zero());
    }

    #[test]
    fn prob_round_trip() {
        let p = LogProb::from_prob(0.25).unwrap();
        assert!((p.prob() - 0.25).abs() < 1e-16);
        assert_eq!(LogProb::from_prob(0.0).unwrap(), LogProb::ZERO);
        assert!(LogProb::from_prob(1.5).is_err());
    }

    #[test]
    fn roundoff_snaps_to_one() {
        assert_eq!(LogProb::from_computed(1e-16), LogProb::ONE);
    }
}
