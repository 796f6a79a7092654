//! Analysis CSVs over benchmark records: cumulative solved histograms and
//! pairwise instance comparisons.
//!
//! Seeds are aggregated per instance with the mean of the logarithm of the
//! node expansions (a geometric mean), and an instance counts as solved
//! for an algorithm only when every recorded seed found a plan.

use std::collections::BTreeMap;
use std::io::Write;

use banditplan::regret::curve_steps;

use crate::record::BenchRecord;

/// Per-(algorithm, instance) aggregate over seeds.
struct InstanceAggregate {
    solved_seeds: u64,
    total_seeds: u64,
    log_expansion_sum: f64,
    plan_length_sum: u64,
}

type Key = (String, (String, String));

fn aggregate(records: &[BenchRecord]) -> BTreeMap<Key, InstanceAggregate> {
    let mut map: BTreeMap<Key, InstanceAggregate> = BTreeMap::new();
    for r in records {
        let key = (r.algorithm.clone(), (r.domain.clone(), r.problem.clone()));
        let agg = map.entry(key).or_insert(InstanceAggregate {
            solved_seeds: 0,
            total_seeds: 0,
            log_expansion_sum: 0.0,
            plan_length_sum: 0,
        });
        agg.total_seeds += 1;
        if r.solved() {
            agg.solved_seeds += 1;
            // Zero-expansion solves (goal in the initial state) count as 1
            // so the logarithm stays finite.
            agg.log_expansion_sum += (r.expansions.max(1) as f64).ln();
            agg.plan_length_sum += r.plan_length.unwrap_or(0);
        }
    }
    map
}

impl InstanceAggregate {
    fn fully_solved(&self) -> bool {
        self.total_seeds > 0 && self.solved_seeds == self.total_seeds
    }

    /// Geometric-mean expansions over the solved seeds, rounded to 1e-6 so
    /// identical seeds reproduce their integer count exactly.
    fn representative_expansions(&self) -> f64 {
        let value = (self.log_expansion_sum / self.solved_seeds as f64).exp();
        (value * 1e6).round() / 1e6
    }

    fn mean_plan_length(&self) -> f64 {
        self.plan_length_sum as f64 / self.solved_seeds as f64
    }
}

/// Writes `algorithm,threshold,solved` rows: for each algorithm, the
/// number of instances whose aggregated expansions fall at or below each
/// log-spaced threshold in `1..=budget`.
pub fn histogram<W: Write>(
    records: &[BenchRecord],
    budget: u64,
    mut out: W,
) -> std::io::Result<()> {
    let aggregates = aggregate(records);
    let mut per_algorithm: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for ((algorithm, _), agg) in &aggregates {
        let entry = per_algorithm.entry(algorithm).or_default();
        if agg.fully_solved() {
            entry.push(agg.representative_expansions());
        }
    }
    // Algorithms that never solved anything still appear, with zeros.
    for (algorithm, _) in aggregates.keys() {
        per_algorithm.entry(algorithm).or_default();
    }

    writeln!(out, "algorithm,threshold,solved")?;
    for (algorithm, mut values) in per_algorithm {
        values.sort_by(f64::total_cmp);
        for &threshold in &curve_steps(budget.max(1)) {
            let solved = values.partition_point(|&v| v <= threshold as f64);
            writeln!(out, "{algorithm},{threshold},{solved}")?;
        }
    }
    Ok(())
}

/// Writes the inner join of instances fully solved by both algorithms:
/// `domain,problem,expansions_a,plan_length_a,expansions_b,plan_length_b`.
pub fn compare<W: Write>(
    records: &[BenchRecord],
    algo_a: &str,
    algo_b: &str,
    mut out: W,
) -> std::io::Result<()> {
    let aggregates = aggregate(records);
    let solved_of = |algo: &str| -> BTreeMap<(String, String), (f64, f64)> {
        aggregates
            .iter()
            .filter(|((a, _), agg)| a == algo && agg.fully_solved())
            .map(|((_, instance), agg)| {
                (
                    instance.clone(),
                    (agg.representative_expansions(), agg.mean_plan_length()),
                )
            })
            .collect()
    };
    let a = solved_of(algo_a);
    let b = solved_of(algo_b);

    writeln!(
        out,
        "domain,problem,expansions_a,plan_length_a,expansions_b,plan_length_b"
    )?;
    for ((domain, problem), (exp_a, len_a)) in &a {
        if let Some((exp_b, len_b)) = b.get(&(domain.clone(), problem.clone())) {
            writeln!(out, "{domain},{problem},{exp_a},{len_a},{exp_b},{len_b}")?;
        }
    }
    Ok(())
}
