//! Rate statistics over pooled user samples.

use crate::error::{Error, Result};

/// Rate exceeded with the given probability: the `(1 − probability)`
/// quantile by nearest rank, no interpolation.
pub fn likely_rate(samples: &[f64], probability: f64) -> Result<f64> {
    let tail = 1.0 - probability;
    if !(tail > 0.0 && tail < 1.0) {
        return Err(Error::config(
            "probability",
            format!("must be in (0, 1), got {probability}"),
        ));
    }
    // tolerate the binary representation of e.g. 0.05·100
    let needed = (1.0 / tail - 1e-9).ceil() as usize;
    if samples.len() < needed {
        return Err(Error::InsufficientSamples {
            needed,
            got: samples.len(),
        });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((tail * sorted.len() as f64) - 1e-9).ceil().max(1.0) as usize;
    Ok(sorted[rank - 1])
}

pub fn mean(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return f64::NAN;
    }
    samples.iter().sum::<f64>() / samples.len() as f64
}

/// Complementary CDF on `grid` evenly spaced rates from 0 to the sample
/// maximum: `(rate, fraction of samples strictly above rate)`.
pub fn empirical_cdf(samples: &[f64], grid: usize) -> Vec<(f64, f64)> {
    if samples.is_empty() || grid == 0 {
        return Vec::new();
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let max = *sorted.last().expect("non-empty");
    let n = sorted.len() as f64;
    (0..grid)
        .map(|g| {
            // the last point is the maximum exactly, not max·(g/(grid−1))
            let rate = if g + 1 == grid {
                max
            } else {
                max * g as f64 / (grid - 1) as f64
            };
            let at_or_below = sorted.partition_point(|&s| s <= rate);
            (rate, (sorted.len() - at_or_below) as f64 / n)
        })
        .collect()
}
