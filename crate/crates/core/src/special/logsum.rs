use crate::error::{Error, Result};

/// `ln sum exp(v_i)` by max-shifting. All-`-inf` input gives exactly `-inf`.
pub fn log_sum_exp(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut acc = LogAccumulator::new();
    for &v in values {
        acc.add(v);
    }
    Ok(acc.value())
}

/// `ln(1 - exp(a))` for `a <= 0`, accurate on both ends.
pub fn log1m_exp(a: f64) -> f64 {
    if a > -std::f64::consts::LN_2 {
        (-a.exp_m1()).ln()
    } else {
        (-a.exp()).ln_1p()
    }
}

/// Streaming log-sum-exp: holds the running maximum and the sum of
/// `exp(v - max)`, rescaling whenever the maximum moves.
#[derive(Debug, Clone, Copy)]
pub struct LogAccumulator {
    max: f64,
    scaled: f64,
}

impl Default for LogAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl LogAccumulator {
    pub fn new() -> Self {
        LogAccumulator {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    pub fn add(&mut self, v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if v <= self.max {
            self.scaled += (v - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - v).exp() + 1.0;
            self.max = v;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}
