use serde::Serialize;

use super::OptimError;

/// Summary of best values across seeds. `std` is the sample standard
/// deviation (divisor `n − 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeedStats {
    pub n: usize,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
}

impl SeedStats {
    /// `std / |mean|`, or 0 when both are 0.
    pub fn relative_std(&self) -> f64 {
        if self.std == 0.0 {
            0.0
        } else {
            self.std / self.mean.abs()
        }
    }
}

pub fn multi_seed_stats(values: &[f64]) -> Result<SeedStats, OptimError> {
    let n = values.len();
    if n < 2 {
        return Err(OptimError::TooFewResults(n));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SeedStats {
        n,
        max,
        mean,
        std: var.sqrt(),
    })
}
