//! Search engines over grounded tasks.
//!
//! Two engine families share deterministic tie-breaking and duplicate
//! handling so they can be compared state by state:
//!
//! - [`gbfs_queue`]: greedy best-first search on a priority queue keyed
//!   `(h, insertion id)`,
//! - [`mcts`]: a tree-based open list with statistics backpropagation and
//!   pluggable node evaluation criteria; [`gbfs_tree`] instantiates it with
//!   the subtree-minimum criterion and no exploration, which makes it
//!   expansion-for-expansion equivalent to the queue engine.
//!
//! Both engines detect goals at node generation, prune duplicate states by
//! g-value, and treat heuristic infinity as a dead end.

mod gbfs;
mod mcts;

pub use gbfs::gbfs_queue;
pub use mcts::{gbfs_tree, mcts, MctsConfig, MeanTerm, NecPolicy, NodeView};

use std::time::{Duration, Instant};

use crate::bandit::PolicyKind;
use crate::strips::{Plan, State};

/// Why a search run stopped. `BudgetReached` covers the expansion budget
/// and the cooperative deadline alike.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Plan(Plan),
    Exhausted,
    BudgetReached,
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Plan(_) => "plan",
            Outcome::Exhausted => "exhausted",
            Outcome::BudgetReached => "budget_reached",
        }
    }
}

/// Counters and outcome of one search run.
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub outcome: Outcome,
    /// Number of node expansions performed; never exceeds the budget.
    pub expansions: u64,
    /// Number of distinct states evaluated by the heuristic.
    pub evaluations: u64,
    /// Number of successor states generated.
    pub generated: u64,
    pub elapsed: Duration,
    /// States in expansion order, when requested.
    pub expansion_trace: Option<Vec<State>>,
    /// Final tree snapshot, when requested ([`mcts`] only).
    pub tree: Option<Vec<NodeView>>,
}

impl SearchResult {
    pub fn plan(&self) -> Option<&Plan> {
        match &self.outcome {
            Outcome::Plan(p) => Some(p),
            _ => None,
        }
    }
}

/// Expansion budget and optional wall-clock deadline, both checked once per
/// expansion.
#[derive(Debug, Clone, Copy)]
pub struct SearchLimits {
    pub budget: u64,
    pub deadline: Option<Instant>,
}

impl SearchLimits {
    pub fn budget(budget: u64) -> Self {
        SearchLimits {
            budget,
            deadline: None,
        }
    }

    fn deadline_passed(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// Search algorithm selected by CLI id.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    Gbfs,
    Guct { c: f64 },
    Guct01 { c: f64 },
    GuctNormal,
    GuctNormal2,
    GuctStar { c: f64 },
    Guct01Star { c: f64 },
    GuctNormalStar,
    GuctNormal2Star,
}

impl Algorithm {
    /// Maps a CLI id and exploration coefficient to an algorithm. The
    /// coefficient is ignored by the ids that do not take one.
    pub fn from_id(id: &str, c: f64) -> Result<Algorithm, String> {
        match id {
            "gbfs" => Ok(Algorithm::Gbfs),
            "guct" => Ok(Algorithm::Guct { c }),
            "guct01" => Ok(Algorithm::Guct01 { c }),
            "guct-normal" => Ok(Algorithm::GuctNormal),
            "guct-normal2" => Ok(Algorithm::GuctNormal2),
            "guct-star" => Ok(Algorithm::GuctStar { c }),
            "guct01-star" => Ok(Algorithm::Guct01Star { c }),
            "guct-normal-star" => Ok(Algorithm::GuctNormalStar),
            "guct-normal2-star" => Ok(Algorithm::GuctNormal2Star),
            other => Err(format!(
                "unknown algorithm `{other}`, expected gbfs|guct|guct01|guct-normal|guct-normal2|\
                 guct-star|guct01-star|guct-normal-star|guct-normal2-star"
            )),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Algorithm::Gbfs => "gbfs",
            Algorithm::Guct { .. } => "guct",
            Algorithm::Guct01 { .. } => "guct01",
            Algorithm::GuctNormal => "guct-normal",
            Algorithm::GuctNormal2 => "guct-normal2",
            Algorithm::GuctStar { .. } => "guct-star",
            Algorithm::Guct01Star { .. } => "guct01-star",
            Algorithm::GuctNormalStar => "guct-normal-star",
            Algorithm::GuctNormal2Star => "guct-normal2-star",
        }
    }

    /// The exploration coefficient, for the policies that take one.
    pub fn coefficient(&self) -> Option<f64> {
        match *self {
            Algorithm::Guct { c }
            | Algorithm::Guct01 { c }
            | Algorithm::GuctStar { c }
            | Algorithm::Guct01Star { c } => Some(c),
            _ => None,
        }
    }

    /// The node evaluation criterion for the tree engine; `None` for the
    /// queue-based GBFS.
    pub fn nec(&self) -> Option<NecPolicy> {
        let policy = |mean, kind| NecPolicy {
            mean,
            exploration: Some(kind),
        };
        match *self {
            Algorithm::Gbfs => None,
            Algorithm::Guct { c } => Some(policy(MeanTerm::SubtreeMean, PolicyKind::Ucb1 { c })),
            Algorithm::Guct01 { c } => {
                Some(policy(MeanTerm::SubtreeMean, PolicyKind::Ucb1ZeroOne { c }))
            }
            Algorithm::GuctNormal => Some(policy(MeanTerm::SubtreeMean, PolicyKind::Ucb1Normal)),
            Algorithm::GuctNormal2 => Some(policy(MeanTerm::SubtreeMean, PolicyKind::Ucb1Normal2)),
            Algorithm::GuctStar { c } => Some(policy(MeanTerm::SubtreeMin, PolicyKind::Ucb1 { c })),
            Algorithm::Guct01Star { c } => {
                Some(policy(MeanTerm::SubtreeMin, PolicyKind::Ucb1ZeroOne { c }))
            }
            Algorithm::GuctNormalStar => Some(policy(MeanTerm::SubtreeMin, PolicyKind::Ucb1Normal)),
            Algorithm::GuctNormal2Star => {
                Some(policy(MeanTerm::SubtreeMin, PolicyKind::Ucb1Normal2))
            }
        }
    }

    /// Runs the algorithm on a task.
    pub fn run<H: crate::heuristics::Heuristic>(
        &self,
        task: &crate::strips::GroundTask,
        heuristic: &H,
        limits: SearchLimits,
        seed: u64,
    ) -> SearchResult {
        match self.nec() {
            None => gbfs_queue(task, heuristic, limits, seed),
            Some(nec) => {
                let mut config = MctsConfig::new(nec, limits.budget);
                config.deadline = limits.deadline;
                config.seed = seed;
                mcts(task, heuristic, &config)
            }
        }
    }
}
