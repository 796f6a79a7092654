//! Running statistics with dataset merge and retraction.
//!
//! A [`RunningStats`] holds `(count, mean, m2)` where `m2` is the sum of
//! squared deviations from the mean, `Σ(x − μ)²`. Storing `m2` instead of a
//! variance lets both consumers read the view they need: the merge and
//! retraction algebra works on the population variance `m2 / n`, while the
//! variance-adaptive bound policies use the sample variance `m2 / (n − 1)`.
//!
//! Merging two datasets from their summaries:
//!
//! ```text
//! n   = n1 + n2
//! μ   = (n1·μ1 + n2·μ2) / n
//! m2  = m21 + m22 + n1·n2/n · (μ2 − μ1)²
//! ```
//!
//! Retraction inverts a previous merge. It is numerically ill-conditioned,
//! so small negative `m2` residue is clamped to zero.

/// Summary statistics of a dataset: count, mean and sum of squared
/// deviations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    /// Statistics of the empty dataset.
    pub fn new() -> Self {
        Self::default()
    }

    /// Statistics of the singleton dataset `{x}`.
    pub fn from_value(x: f64) -> Self {
        assert!(x.is_finite(), "observation must be finite, got {x}");
        RunningStats {
            count: 1,
            mean: x,
            m2: 0.0,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Mean of the dataset; 0 for the empty dataset.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sum of squared deviations `Σ(x − μ)²`.
    pub fn m2(&self) -> f64 {
        self.m2
    }

    /// Population variance `m2 / n`; 0 for the empty dataset.
    pub fn population_variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.m2 / self.count as f64
        }
    }

    /// Sample variance `m2 / (n − 1)`, defined as 0 for `n ≤ 1`.
    ///
    /// A single observation gives no spread information; treating its
    /// deviation as 0 means a bound policy performs no exploration on it,
    /// which is the intended reading for linear subtrees.
    pub fn sample_variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Sample standard deviation, see [`Self::sample_variance`].
    pub fn sample_std(&self) -> f64 {
        self.sample_variance().sqrt()
    }

    /// Adds a single observation (Welford update).
    ///
    /// Equivalent to `merge` with the singleton dataset `{x}`.
    pub fn push(&mut self, x: f64) {
        assert!(x.is_finite(), "observation must be finite, got {x}");
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Statistics of the union of the two datasets.
    pub fn merge(&self, other: &RunningStats) -> RunningStats {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let n1 = self.count as f64;
        let n2 = other.count as f64;
        let n = n1 + n2;
        let delta = other.mean - self.mean;
        RunningStats {
            count: self.count + other.count,
            mean: (n1 * self.mean + n2 * other.mean) / n,
            m2: self.m2 + other.m2 + delta * delta * (n1 * n2 / n),
        }
    }

    /// Statistics of `self` with the dataset summarized by `other` removed.
    ///
    /// The caller guarantees that `other` was previously merged into `self`.
    /// Tiny negative `m2` residue from rounding is clamped to zero.
    ///
    /// Panics if `other.count > self.count`.
    pub fn retract(&self, other: &RunningStats) -> RunningStats {
        assert!(
            other.count <= self.count,
            "cannot retract {} observations from {}",
            other.count,
            self.count
        );
        if other.count == 0 {
            return *self;
        }
        let n1 = self.count - other.count;
        if n1 == 0 {
            return RunningStats::new();
        }
        let n12 = self.count as f64;
        let n2 = other.count as f64;
        let mean1 = (n12 * self.mean - n2 * other.mean) / n1 as f64;
        let delta = self.mean - other.mean;
        let m2 = self.m2 - other.m2 - (n2 * n12 / n1 as f64) * delta * delta;
        RunningStats {
            count: n1,
            mean: mean1,
            m2: m2.max(0.0),
        }
    }

    /// Statistics of the dataset with `delta` added to every observation.
    ///
    /// Shifting moves the mean and leaves the deviations unchanged.
    pub fn shifted(&self, delta: f64) -> RunningStats {
        if self.count == 0 {
            return *self;
        }
        RunningStats {
            count: self.count,
            mean: self.mean + delta,
            m2: self.m2,
        }
    }
}

impl FromIterator<f64> for RunningStats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut stats = RunningStats::new();
        for x in iter {
            stats.push(x);
        }
        stats
    }
}
