//! Confidence-bound policies for multi-armed bandit arm selection.
//!
//! All policies share the shape `mean term ± exploration term`. Maximization
//! uses the upper confidence bound (mean plus exploration), minimization the
//! lower confidence bound (mean minus exploration); the sign flip is the only
//! difference between the two modes.
//!
//! With `t` pulls of the arm, `T` total pulls and natural logarithms:
//!
//! - `ucb1(c)`:         `μ̂ ± c·√(2·ln T / t)`
//! - `ucb1_01(c)`:      `(μ̂ − m)/(M − m) ± c·√(2·ln T / t)` where `M`/`m`
//!   are the largest/smallest sibling means; with `M = m` the mean term is 0
//! - `ucb1_normal`:     `μ̂ ± σ̂·√(16·ln T / t)`
//! - `ucb1_normal2`:    `μ̂ ± σ̂·√(2·ln T)`
//!
//! `σ̂` is the sample standard deviation (`n − 1` in the denominator),
//! defined as 0 for a single observation, so a zero-spread arm is scored by
//! its mean alone. No forced-sampling rule is applied for the normal
//! policies; every arm is pulled once before selection starts, which covers
//! the otherwise-undefined `t = 1` case.

use crate::stats::RunningStats;

/// Whether the policy scores arms by upper (maximize) or lower (minimize)
/// confidence bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Maximize,
    Minimize,
}

/// The index formula family. `c` must be positive where present.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyKind {
    /// Fixed exploration rate, unnormalized mean.
    Ucb1 { c: f64 },
    /// Fixed exploration rate, mean min-max normalized over the siblings.
    Ucb1ZeroOne { c: f64 },
    /// Variance-adaptive exploration, `σ̂·√(16·ln T / t)`.
    Ucb1Normal,
    /// Variance-adaptive exploration without the pull-count denominator,
    /// `σ̂·√(2·ln T)`.
    Ucb1Normal2,
}

impl PolicyKind {
    /// Magnitude of the exploration term for an arm with statistics `stats`
    /// after `total` pulls across all arms.
    pub fn exploration_term(&self, stats: &RunningStats, total: u64) -> f64 {
        debug_assert!(stats.count() >= 1);
        let t = stats.count() as f64;
        let log_total = (total as f64).ln();
        match *self {
            PolicyKind::Ucb1 { c } | PolicyKind::Ucb1ZeroOne { c } => {
                assert!(c > 0.0, "exploration coefficient must be positive");
                c * (2.0 * log_total / t).sqrt()
            }
            PolicyKind::Ucb1Normal => stats.sample_std() * (16.0 * log_total / t).sqrt(),
            PolicyKind::Ucb1Normal2 => stats.sample_std() * (2.0 * log_total).sqrt(),
        }
    }

    /// True for the policy whose mean term is min-max normalized over the
    /// sibling arms.
    pub fn normalizes_mean(&self) -> bool {
        matches!(self, PolicyKind::Ucb1ZeroOne { .. })
    }
}

/// Range of the sibling mean terms, the normalization context for
/// [`PolicyKind::Ucb1ZeroOne`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanRange {
    pub min: f64,
    pub max: f64,
}

impl MeanRange {
    /// Range over an iterator of sibling mean terms.
    pub fn over(means: impl IntoIterator<Item = f64>) -> Option<MeanRange> {
        let mut range: Option<MeanRange> = None;
        for m in means {
            let r = range.get_or_insert(MeanRange { min: m, max: m });
            r.min = r.min.min(m);
            r.max = r.max.max(m);
        }
        range
    }

    /// Maps `mean` to `[0, 1]`; a degenerate range (all siblings equal) maps
    /// every mean to 0, which leaves selection to the exploration terms.
    pub fn normalize(&self, mean: f64) -> f64 {
        if self.max == self.min {
            0.0
        } else {
            (mean - self.min) / (self.max - self.min)
        }
    }
}

/// A confidence-bound arm-selection policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPolicy {
    pub kind: PolicyKind,
    pub mode: Mode,
}

impl BoundPolicy {
    pub fn maximize(kind: PolicyKind) -> Self {
        BoundPolicy {
            kind,
            mode: Mode::Maximize,
        }
    }

    pub fn minimize(kind: PolicyKind) -> Self {
        BoundPolicy {
            kind,
            mode: Mode::Minimize,
        }
    }

    /// The confidence bound for one arm.
    ///
    /// `total` is the number of pulls across all arms; `ctx` is the sibling
    /// mean range, required by the normalizing policy and ignored otherwise.
    ///
    /// Panics if the arm has no observations or `total` is smaller than the
    /// arm's own pull count.
    pub fn bound(&self, stats: &RunningStats, total: u64, ctx: Option<MeanRange>) -> f64 {
        assert!(
            stats.count() >= 1,
            "bound requires at least one observation"
        );
        assert!(
            total >= stats.count(),
            "total pulls {} below arm count {}",
            total,
            stats.count()
        );
        let mean = if self.kind.normalizes_mean() {
            ctx.expect("normalizing policy requires a sibling mean range")
                .normalize(stats.mean())
        } else {
            stats.mean()
        };
        let exploration = self.kind.exploration_term(stats, total);
        match self.mode {
            Mode::Maximize => mean + exploration,
            Mode::Minimize => mean - exploration,
        }
    }

    /// Index of the best arm: argmax of the bound when maximizing, argmin
    /// when minimizing. Ties resolve to the lowest index.
    ///
    /// Panics on an empty arm list or an arm with no observations.
    pub fn select(&self, arms: &[RunningStats], total: u64) -> usize {
        assert!(!arms.is_empty(), "select requires at least one arm");
        let ctx = if self.kind.normalizes_mean() {
            MeanRange::over(arms.iter().map(|s| s.mean()))
        } else {
            None
        };
        let mut best = 0;
        let mut best_bound = self.bound(&arms[0], total, ctx);
        for (i, stats) in arms.iter().enumerate().skip(1) {
            let b = self.bound(stats, total, ctx);
            let better = match self.mode {
                Mode::Maximize => b > best_bound,
                Mode::Minimize => b < best_bound,
            };
            if better {
                best = i;
                best_bound = b;
            }
        }
        best
    }
}
