use crate::error::{Error, Result};

/// Threshold grid for a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum NGrid {
    Explicit(Vec<u64>),
    /// `min, min + step, ...` up to `max`.
    Linear { min: u64, max: u64, step: u64 },
    /// `count` points log-spaced on `[min, max]`, rounded and deduplicated.
    LogSpaced { min: u64, max: u64, count: usize },
}

impl NGrid {
    /// The grid as a nonempty, strictly increasing list of thresholds `>= 1`.
    pub fn resolve(&self) -> Result<Vec<u64>> {
        let values = match *self {
            NGrid::Explicit(ref v) => {
                if v.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidArgument(
                        "explicit n values must be strictly increasing".into(),
                    ));
                }
                v.clone()
            }
            NGrid::Linear { min, max, step } => {
                if step == 0 || min > max {
                    return Err(Error::InvalidArgument(format!(
                        "bad linear grid min={min} max={max} step={step}"
                    )));
                }
                (min..=max).step_by(step as usize).collect()
            }
            NGrid::LogSpaced { min, max, count } => log_spaced(min, max, count)?,
        };
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty n grid".into()));
        }
        if values[0] < 1 {
            return Err(Error::InvalidArgument("n values must be >= 1".into()));
        }
        Ok(values)
    }
}

fn log_spaced(min: u64, max: u64, count: usize) -> Result<Vec<u64>> {
    if min < 1 || min > max || count == 0 {
        return Err(Error::InvalidArgument(format!(
            "bad log grid min={min} max={max} points={count}"
        )));
    }
    if count == 1 || min == max {
        return Ok(vec![min]);
    }
    let (lo, hi) = ((min as f64).ln(), (max as f64).ln());
    let mut out: Vec<u64> = (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            ((lo + t * (hi - lo)).exp().round() as u64).clamp(min, max)
        })
        .collect();
    out.dedup();
    Ok(out)
}
