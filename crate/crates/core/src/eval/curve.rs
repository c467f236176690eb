//! Metric-versus-bitrate curves and the averaged advantage between two of them.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default number of interpolation samples.
pub const ADVANTAGE_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSample {
    /// Megabits per second.
    pub bitrate: f64,
    pub value: f64,
}

/// Piecewise-linear curve over strictly increasing bitrates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateCurve {
    samples: Vec<RateSample>,
}

impl RateCurve {
    pub fn new(samples: Vec<RateSample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("rate curve without samples"));
        }
        for s in &samples {
            if !(s.bitrate > 0.0 && s.bitrate.is_finite() && s.value.is_finite()) {
                return Err(Error::invalid(format!("bad rate sample {s:?}")));
            }
        }
        if samples.windows(2).any(|w| w[1].bitrate <= w[0].bitrate) {
            return Err(Error::invalid("rate curve bitrates must be strictly increasing"));
        }
        Ok(Self { samples })
    }

    /// Sorts by bitrate first.
    pub fn from_unsorted(mut samples: Vec<RateSample>) -> Result<Self> {
        samples.sort_by(|a, b| a.bitrate.total_cmp(&b.bitrate));
        Self::new(samples)
    }

    pub fn samples(&self) -> &[RateSample] {
        &self.samples
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.samples[0].bitrate, self.samples[self.samples.len() - 1].bitrate)
    }

    /// Linear interpolation; `None` outside the domain.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&x) {
            return None;
        }
        let k = self.samples.partition_point(|s| s.bitrate < x);
        if k == 0 {
            return Some(self.samples[0].value);
        }
        let (a, b) = (self.samples[k - 1], self.samples[k]);
        let t = (x - a.bitrate) / (b.bitrate - a.bitrate);
        Some(a.value + t * (b.value - a.value))
    }
}

/// Mean of `M(x) - M_b(x)` over `n` uniformly spaced bitrates in the overlap
/// of both domains. Samples sit at the centers of `n` equal sub-intervals.
pub fn averaged_advantage(m: &RateCurve, m_b: &RateCurve, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("advantage needs at least one sample"));
    }
    let (a0, a1) = m.domain();
    let (b0, b1) = m_b.domain();
    let (lo, hi) = (a0.max(b0), a1.min(b1));
    if !(hi > lo) {
        return Err(Error::EmptyOverlap);
    }
    let step = (hi - lo) / n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        let x = (lo + (i as f64 + 0.5) * step).min(hi);
        let (Some(u), Some(v)) = (m.interpolate(x), m_b.interpolate(x)) else {
            return Err(Error::EmptyOverlap);
        };
        sum += u - v;
    }
    Ok(sum / n as f64)
}
