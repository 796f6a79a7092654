//! Synthetic multi-armed bandit runs measuring cumulative pseudo-regret,
//! plus numeric checks of the analytic identities behind the
//! variance-adaptive bounds.
//!
//! Rewards are Gaussian, sampled with the Box-Muller transform from a
//! `ChaCha8` stream, so a trace is a pure function of its seed on every
//! platform. Regret is pseudo-regret: after `t` pulls it is
//! `t·max_i μ_i − Σ_i pulls_i·μ_i`, using the true means rather than the
//! realized rewards.

use std::f64::consts::PI;
use std::io::{self, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bandit::BoundPolicy;
use crate::stats::RunningStats;

/// An arm with rewards drawn from `N(mu, sigma²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianArm {
    pub mu: f64,
    pub sigma: f64,
}

impl GaussianArm {
    pub fn new(mu: f64, sigma: f64) -> Self {
        assert!(sigma >= 0.0, "sigma must be nonnegative");
        GaussianArm { mu, sigma }
    }
}

/// Per-step cumulative pseudo-regret of one simulated run.
#[derive(Debug, Clone)]
pub struct RegretTrace {
    pub policy: String,
    pub horizon: u64,
    pub seed: u64,
    /// Cumulative pseudo-regret after steps `1..=horizon`.
    pub cum_regret: Vec<f64>,
    /// Pulls per arm at the horizon; sums to the horizon.
    pub pulls: Vec<u64>,
}

impl RegretTrace {
    pub fn final_regret(&self) -> f64 {
        *self.cum_regret.last().expect("horizon is at least 1")
    }
}

fn sample_standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; 1 − u keeps the logarithm away from zero.
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen();
    (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Simulates one bandit run: every arm is pulled once, then the policy
/// (maximization mode) chooses each pull from the arms' running statistics.
pub fn simulate(
    arms: &[GaussianArm],
    policy: &BoundPolicy,
    policy_tag: &str,
    horizon: u64,
    seed: u64,
) -> RegretTrace {
    assert!(!arms.is_empty(), "at least one arm");
    assert!(
        horizon >= arms.len() as u64,
        "horizon {horizon} below arm count {}",
        arms.len()
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let best_mu = arms.iter().map(|a| a.mu).fold(f64::NEG_INFINITY, f64::max);
    let mut stats = vec![RunningStats::new(); arms.len()];
    let mut pulls = vec![0u64; arms.len()];
    let mut pulled_mu_sum = 0.0f64;
    let mut cum_regret = Vec::with_capacity(horizon as usize);

    let pull = |i: usize,
                stats: &mut Vec<RunningStats>,
                pulls: &mut Vec<u64>,
                pulled_mu_sum: &mut f64,
                rng: &mut ChaCha8Rng| {
        let reward = arms[i].mu + arms[i].sigma * sample_standard_normal(rng);
        stats[i].push(reward);
        pulls[i] += 1;
        *pulled_mu_sum += arms[i].mu;
    };

    for t in 1..=horizon {
        let choice = if t <= arms.len() as u64 {
            (t - 1) as usize
        } else {
            policy.select(&stats, t - 1)
        };
        pull(choice, &mut stats, &mut pulls, &mut pulled_mu_sum, &mut rng);
        cum_regret.push(t as f64 * best_mu - pulled_mu_sum);
    }

    RegretTrace {
        policy: policy_tag.to_string(),
        horizon,
        seed,
        cum_regret,
        pulls,
    }
}

/// Mean and spread of final regret for one policy across seeds.
#[derive(Debug, Clone)]
pub struct PolicySummary {
    pub policy: String,
    pub mean_final_regret: f64,
    pub std_final_regret: f64,
}

/// Simulation results for several policies over a shared seed list.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub summaries: Vec<PolicySummary>,
    pub traces: Vec<RegretTrace>,
}

/// Runs `simulate` for every (policy, seed) pair and summarizes final
/// regret per policy.
pub fn compare_policies(
    arms: &[GaussianArm],
    policies: &[(String, BoundPolicy)],
    horizon: u64,
    seeds: &[u64],
) -> Comparison {
    let mut traces = Vec::with_capacity(policies.len() * seeds.len());
    let mut summaries = Vec::with_capacity(policies.len());
    for (tag, policy) in policies {
        let mut finals = RunningStats::new();
        for &seed in seeds {
            let trace = simulate(arms, policy, tag, horizon, seed);
            finals.push(trace.final_regret());
            traces.push(trace);
        }
        summaries.push(PolicySummary {
            policy: tag.clone(),
            mean_final_regret: finals.mean(),
            std_final_regret: finals.sample_std(),
        });
    }
    Comparison { summaries, traces }
}

/// Log-spaced step indices `1..=horizon` (deduplicated, always including
/// the horizon) used when writing curves.
pub fn curve_steps(horizon: u64) -> Vec<u64> {
    let mut steps = Vec::new();
    let mut last = 0u64;
    let points = 12.0 * (horizon as f64).log10().max(1.0);
    let n = points.ceil() as u32;
    for i in 0..=n {
        let t = (horizon as f64).powf(i as f64 / n as f64).round() as u64;
        let t = t.clamp(1, horizon);
        if t != last {
            steps.push(t);
            last = t;
        }
    }
    if *steps.last().unwrap() != horizon {
        steps.push(horizon);
    }
    steps
}

/// Writes regret curves as CSV with columns `policy,seed,t,cum_regret`,
/// sampled at log-spaced steps.
pub fn write_curves_csv<W: Write>(traces: &[RegretTrace], mut out: W) -> io::Result<()> {
    writeln!(out, "policy,seed,t,cum_regret")?;
    for trace in traces {
        for &t in &curve_steps(trace.horizon) {
            writeln!(
                out,
                "{},{},{},{}",
                trace.policy,
                trace.seed,
                t,
                trace.cum_regret[(t - 1) as usize]
            )?;
        }
    }
    Ok(())
}

/// Numerically integrates `E[exp(x²/t²)]` for `x ~ N(0, σ²)`.
///
/// The expectation only exists for `t² > 2σ²`; the exponents are combined
/// before exponentiation so the integrand stays representable.
pub fn subgaussian_mgf(sigma: f64, t: f64) -> f64 {
    assert!(sigma > 0.0, "sigma must be positive");
    assert!(
        t * t > 2.0 * sigma * sigma,
        "integral diverges for t² ≤ 2σ²"
    );
    // The integrand decays like exp(−x²/c²); integrate over ±12c.
    let c2 = 2.0 * sigma * sigma * t * t / (t * t - 2.0 * sigma * sigma);
    let half_width = 12.0 * c2.sqrt();
    let n = 8192usize; // Simpson panels (even)
    let step = 2.0 * half_width / n as f64;
    let integrand = |x: f64| (x * x / (t * t) - x * x / (2.0 * sigma * sigma)).exp();
    let mut acc = integrand(-half_width) + integrand(half_width);
    for i in 1..n {
        let x = -half_width + i as f64 * step;
        acc += integrand(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * step / 3.0 / (2.0 * PI * sigma * sigma).sqrt()
}

/// Finds the smallest `t` with `E[exp(x²/t²)] < 2` for `x ~ N(0, σ²)` by a
/// grid scan refined with bisection, entirely on the numeric integral.
pub fn verify_subgaussian_norm(sigma: f64) -> f64 {
    assert!(sigma > 0.0, "sigma must be positive");
    // Start the grid just above the divergence threshold √2·σ.
    let lo_limit = 2.0f64.sqrt() * sigma * (1.0 + 1e-9);
    let mut lo = lo_limit;
    let mut hi = None;
    for i in 1..=64 {
        let t = lo_limit + (3.0 * sigma - lo_limit) * i as f64 / 64.0;
        if subgaussian_mgf(sigma, t) < 2.0 {
            hi = Some(t);
            break;
        }
        lo = t;
    }
    let mut hi = hi.expect("E drops below 2 before t = 3σ");
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if subgaussian_mgf(sigma, mid) < 2.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Numerically inverts the χ² CDF with two degrees of freedom,
/// `F(x) = 1 − exp(−x/2)`, at probability `1 − alpha`.
pub fn verify_chi2_df2(alpha: f64) -> f64 {
    assert!(
        alpha > 0.0 && alpha < 1.0,
        "alpha must lie in (0, 1), got {alpha}"
    );
    let target = 1.0 - alpha;
    let cdf = |x: f64| 1.0 - (-x / 2.0).exp();
    let mut hi = 1.0f64;
    while cdf(hi) < target {
        hi *= 2.0;
    }
    let mut lo = 0.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::{Mode, PolicyKind};

    fn ucb1() -> BoundPolicy {
        BoundPolicy {
            kind: PolicyKind::Ucb1 { c: 1.0 },
            mode: Mode::Maximize,
        }
    }

    #[test]
    fn single_arm_has_zero_regret() {
        let arms = [GaussianArm::new(1.5, 2.0)];
        let trace = simulate(&arms, &ucb1(), "ucb1", 100, 7);
        assert!(trace.cum_regret.iter().all(|&r| r == 0.0));
        assert_eq!(trace.pulls, vec![100]);
    }

    #[test]
    fn equal_means_have_zero_regret() {
        let arms = [GaussianArm::new(1.0, 1.0), GaussianArm::new(1.0, 3.0)];
        let trace = simulate(&arms, &ucb1(), "ucb1", 200, 3);
        assert!(trace.cum_regret.iter().all(|&r| r.abs() < 1e-9));
        assert_eq!(trace.pulls.iter().sum::<u64>(), 200);
    }

    #[test]
    fn traces_are_reproducible() {
        let arms = [GaussianArm::new(0.0, 1.0), GaussianArm::new(1.0, 1.0)];
        let a = simulate(&arms, &ucb1(), "ucb1", 500, 42);
        let b = simulate(&arms, &ucb1(), "ucb1", 500, 42);
        assert_eq!(a.cum_regret, b.cum_regret);
        assert_eq!(a.pulls, b.pulls);
        let c = simulate(&arms, &ucb1(), "ucb1", 500, 43);
        assert_ne!(a.cum_regret, c.cum_regret);
    }

    #[test]
    fn regret_is_nondecreasing() {
        let arms = [GaussianArm::new(0.0, 1.0), GaussianArm::new(1.0, 1.0)];
        let trace = simulate(&arms, &ucb1(), "ucb1", 1000, 11);
        for w in trace.cum_regret.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
    }

    #[test]
    fn mgf_at_threshold_is_two() {
        // At t = √(8/3)·σ the integral evaluates to 2.
        for sigma in [1.0, 2.0] {
            let t = (8.0f64 / 3.0).sqrt() * sigma;
            let value = subgaussian_mgf(sigma, t);
            assert!((value - 2.0).abs() < 1e-6, "sigma {sigma}: {value}");
        }
    }

    #[test]
    fn subgaussian_norm_matches_closed_form() {
        let expected = (8.0f64 / 3.0).sqrt();
        let got = verify_subgaussian_norm(1.0);
        assert!((got - expected).abs() < 1e-3 * expected, "got {got}");
        let got2 = verify_subgaussian_norm(2.0);
        assert!((got2 - 2.0 * expected).abs() < 1e-3 * 2.0 * expected);
    }

    #[test]
    #[should_panic(expected = "diverges")]
    fn mgf_rejects_divergent_scale() {
        subgaussian_mgf(1.0, 1.2);
    }

    #[test]
    fn chi2_quantile_matches_closed_form() {
        for alpha in [0.5, 0.05, (-2.0f64).exp()] {
            let got = verify_chi2_df2(alpha);
            let expected = -2.0 * alpha.ln();
            assert!((got - expected).abs() < 1e-9, "alpha {alpha}: {got}");
        }
    }

    #[test]
    fn chi2_alpha_near_one_tends_to_zero() {
        assert!(verify_chi2_df2(0.999_999) < 1e-5);
    }

    #[test]
    #[should_panic(expected = "alpha must lie in (0, 1)")]
    fn chi2_rejects_out_of_domain() {
        verify_chi2_df2(1.5);
    }

    #[test]
    fn curves_csv_has_expected_columns() {
        let arms = [GaussianArm::new(0.0, 1.0), GaussianArm::new(1.0, 1.0)];
        let trace = simulate(&arms, &ucb1(), "ucb1", 100, 0);
        let mut buf = Vec::new();
        write_curves_csv(&[trace], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("policy,seed,t,cum_regret"));
        let first = lines.next().unwrap();
        assert!(first.starts_with("ucb1,0,1,"));
        let last = text.lines().last().unwrap();
        assert!(last.starts_with("ucb1,0,100,"));
    }

    #[test]
    fn compare_policies_single_row() {
        let arms = [GaussianArm::new(0.0, 1.0)];
        let comparison = compare_policies(&arms, &[("ucb1".to_string(), ucb1())], 50, &[0]);
        assert_eq!(comparison.summaries.len(), 1);
        assert_eq!(comparison.traces.len(), 1);
        assert_eq!(comparison.summaries[0].mean_final_regret, 0.0);
    }

    #[test]
    fn identical_arms_give_zero_regret_for_every_policy() {
        let arms = [GaussianArm::new(2.0, 3.0), GaussianArm::new(2.0, 3.0)];
        let policies: Vec<(String, BoundPolicy)> = [
            PolicyKind::Ucb1 { c: 1.0 },
            PolicyKind::Ucb1ZeroOne { c: 1.0 },
            PolicyKind::Ucb1Normal,
            PolicyKind::Ucb1Normal2,
        ]
        .into_iter()
        .enumerate()
        .map(|(i, kind)| {
            (
                format!("p{i}"),
                BoundPolicy {
                    kind,
                    mode: Mode::Maximize,
                },
            )
        })
        .collect();
        let comparison = compare_policies(&arms, &policies, 200, &[0, 1, 2]);
        for summary in &comparison.summaries {
            assert!(summary.mean_final_regret.abs() < 1e-9, "{summary:?}");
        }
    }
}
