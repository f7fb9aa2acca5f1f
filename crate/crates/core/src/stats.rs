//! Summary statistics over repeated runs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{cmp_fitness, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatsError {
    #[error("cannot summarise an empty sample")]
    EmptySample,
}

/// Mean / best / worst / median / sample standard deviation of final values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats<T> {
    pub mean: T,
    pub best: T,
    pub worst: T,
    pub median: T,
    pub st_dev: T,
    pub n_runs: usize,
    /// Wall-clock seconds for the whole batch. Zero when not measured.
    pub wall_time_s: f64,
}

impl<T: Scalar> RunStats<T> {
    /// Same statistics, ignoring the wall time.
    pub fn same_values(&self, other: &Self) -> bool {
        self.mean == other.mean
            && self.best == other.best
            && self.worst == other.worst
            && self.median == other.median
            && self.st_dev == other.st_dev
            && self.n_runs == other.n_runs
    }
}

/// `st_dev` uses the `n - 1` denominator (0 for a single value); the median of an even
/// sample is the mean of the two middle values. The mean is clamped into
/// `[best, worst]` so rounding cannot push it outside the sample range.
pub fn compute_stats<T: Scalar>(values: &[T]) -> Result<RunStats<T>, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| cmp_fitness(*a, *b));
    let best = sorted[0];
    let worst = sorted[n - 1];
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / T::lit(2.0)
    };
    let count = T::from_count(n);
    let raw_mean = values.iter().copied().sum::<T>() / count;
    let mean = raw_mean.max(best).min(worst);
    let st_dev = if n < 2 {
        T::zero()
    } else {
        let ss: T = values.iter().map(|&v| (v - raw_mean) * (v - raw_mean)).sum();
        (ss / T::from_count(n - 1)).sqrt()
    };
    Ok(RunStats { mean, best, worst, median, st_dev, n_runs: n, wall_time_s: 0.0 })
}
