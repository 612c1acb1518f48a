//! Reconstruction similarity `e² / E²`, where `e = x − x̂` and `E = x`.

use std::time::{Duration, Instant};

use crate::error::{invalid, Error, Result};

/// How `e²` and `E²` are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SimilarityNorm {
    /// `‖x − x̂‖₂² / ‖x‖₂²`.
    #[default]
    Squared,
    /// `‖x − x̂‖₂ / ‖x‖₂`.
    Plain,
}

/// `‖x − x̂‖₂² / ‖x‖₂²`. Zero means perfect reconstruction; values above 1 are possible.
pub fn similarity(x: &[f64], x_hat: &[f64]) -> Result<f64> {
    similarity_with(x, x_hat, SimilarityNorm::Squared)
}

pub fn similarity_with(x: &[f64], x_hat: &[f64], norm: SimilarityNorm) -> Result<f64> {
    if x.len() != x_hat.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), actual: x_hat.len() });
    }
    let (mut err, mut energy) = (0.0, 0.0);
    for (a, b) in x.iter().zip(x_hat) {
        err += (a - b) * (a - b);
        energy += a * a;
    }
    if !err.is_finite() || !energy.is_finite() {
        return Err(Error::NonFinite("similarity"));
    }
    if energy == 0.0 {
        return Err(invalid("similarity undefined for an all-zero original"));
    }
    Ok(match norm {
        SimilarityNorm::Squared => err / energy,
        SimilarityNorm::Plain => (err / energy).sqrt(),
    })
}

/// Runs `f` `reps` times (at least once) and returns the last output with the median wall time.
pub fn time_median<T>(reps: usize, mut f: impl FnMut() -> T) -> (T, Duration) {
    let mut times = Vec::with_capacity(reps.max(1));
    let mut out = None;
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        out = Some(f());
        times.push(start.elapsed());
    }
    (out.unwrap(), median_duration(&mut times))
}

/// Median of a non-empty slice; the mean of the two middle values for even lengths.
pub fn median_duration(times: &mut [Duration]) -> Duration {
    times.sort_unstable();
    let n = times.len();
    if n == 0 {
        return Duration::ZERO;
    }
    if n % 2 == 1 {
        times[n / 2]
    } else {
        (times[n / 2 - 1] + times[n / 2]) / 2
    }
}
