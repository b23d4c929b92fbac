//! Means with standard errors: blocking for correlated Markov-chain series,
//! plain sample statistics for independent replicates.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    /// Affine image `a + b·x`.
    pub fn affine(self, a: f64, b: f64) -> Self {
        Self {
            mean: a + b * self.mean,
            stderr: b.abs() * self.stderr,
        }
    }
}

/// Mean and standard error of independent samples. A single sample has no
/// spread estimate and gets a zero error.
pub fn sample_estimate(values: &[f64]) -> Estimate {
    let n = values.len();
    assert!(n > 0, "estimate of an empty sample");
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Estimate { mean, stderr: 0.0 };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Estimate {
        mean,
        stderr: (var / n as f64).sqrt(),
    }
}

/// Mean of `y` using `x` as a control variate with known expectation
/// `x_mean`: the intercept of the least-squares fit `y ≈ a + b (x − x_mean)`,
/// with its standard error. Unbiased for `E[y]` up to O(1/n), and far tighter
/// than the plain mean when `x` explains most of the scatter in `y`.
pub fn control_variate_estimate(y: &[f64], x: &[f64], x_mean: f64) -> Result<Estimate> {
    let n = y.len();
    if x.len() != n {
        return Err(crate::error::Error::LengthMismatch { expected: n, got: x.len() });
    }
    if n < 3 {
        return Err(invalid("samples", "a control-variate fit needs at least 3 samples"));
    }
    let nf = n as f64;
    let (mx, my) = (x.iter().sum::<f64>() / nf, y.iter().sum::<f64>() / nf);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(invalid("x", "control variate has no spread"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - my - slope * (a - mx)).powi(2))
        .sum();
    let s2 = rss / (nf - 2.0);
    let shift = mx - x_mean;
    Ok(Estimate {
        mean: my - slope * shift,
        stderr: (s2 * (1.0 / nf + shift * shift / sxx)).sqrt(),
    })
}

/// Splits a stream of `total` measurements into `blocks` equal blocks,
/// dropping the first `total mod blocks` so the block boundaries are fixed
/// in advance. The error is that of the block means.
#[derive(Debug, Clone)]
pub struct BlockAccumulator {
    skip: usize,
    block_size: usize,
    seen: usize,
    current: f64,
    block_means: Vec<f64>,
}

impl BlockAccumulator {
    pub fn new(total: usize, blocks: usize) -> Result<Self> {
        if blocks < 2 {
            return Err(invalid("block_count", "need at least 2 blocks"));
        }
        let block_size = total / blocks;
        if block_size == 0 {
            return Err(invalid(
                "block_count",
                format!("{total} measurements cannot fill {blocks} blocks"),
            ));
        }
        Ok(Self {
            skip: total - block_size * blocks,
            block_size,
            seen: 0,
            current: 0.0,
            block_means: Vec::with_capacity(blocks),
        })
    }

    pub fn push(&mut self, x: f64) {
        self.seen += 1;
        if self.seen <= self.skip {
            return;
        }
        self.current += x;
        if (self.seen - self.skip).is_multiple_of(self.block_size) {
            self.block_means.push(self.current / self.block_size as f64);
            self.current = 0.0;
        }
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn block_means(&self) -> &[f64] {
        &self.block_means
    }

    pub fn estimate(&self) -> Estimate {
        sample_estimate(&self.block_means)
    }
}
