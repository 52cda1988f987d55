use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Rates `(lambda_1, ..., lambda_m)` of independent Poisson factors.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PoissonModel {
    lambdas: Vec<f64>,
}

impl PoissonModel {
    /// Requires at least one rate, each positive and finite.
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidArgument(
                "a Poisson model needs at least one rate".into(),
            ));
        }
        if let Some(bad) = lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "Poisson rates must be positive and finite, got {bad}"
            )));
        }
        Ok(PoissonModel { lambdas })
    }

    pub fn pair(lambda1: f64, lambda2: f64) -> Result<Self> {
        Self::new(vec![lambda1, lambda2])
    }

    /// `m` copies of the same rate.
    pub fn equal(lambda: f64, m: usize) -> Result<Self> {
        Self::new(vec![lambda; m])
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Number of factors `m`.
    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn rate_sum(&self) -> f64 {
        self.lambdas.iter().sum()
    }

    pub fn log_rate_sum(&self) -> f64 {
        self.lambdas.iter().map(|l| l.ln()).sum()
    }
}

impl FromStr for PoissonModel {
    type Err = Error;

    /// Parses a comma-separated list such as `2,3`.
    fn from_str(s: &str) -> Result<Self> {
        let lambdas = s
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("not a number: {part:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(lambdas)
    }
}

impl fmt::Display for PoissonModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.lambdas.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}
