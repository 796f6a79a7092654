//! Classical planning with bandit-based Monte Carlo tree search.
//!
//! The crate bundles four layers that build on each other:
//!
//! - a PDDL frontend ([`pddl`]) for the STRIPS+typing subset, producing a
//!   grounded task,
//! - the grounded STRIPS task representation and semantics ([`strips`]),
//!   with delete-relaxation heuristics ([`heuristics`]),
//! - search engines ([`search`]): priority-queue GBFS and a tree search
//!   with pluggable node evaluation criteria built from confidence-bound
//!   policies ([`bandit`]) over running statistics ([`stats`]),
//! - a synthetic bandit laboratory ([`regret`]) for measuring cumulative
//!   regret and numerically checking the analytic identities the bound
//!   formulas rely on.

pub mod bandit;
pub mod heuristics;
pub mod pddl;
pub mod regret;
pub mod search;
pub mod stats;
pub mod strips;

pub use bandit::{BoundPolicy, Mode, PolicyKind};
pub use heuristics::HeuristicKind;

pub use pddl::{ground, parse_domain, parse_problem, DomainAst, PddlError, ProblemAst};
pub use search::{Algorithm, Outcome, SearchLimits, SearchResult};
pub use stats::RunningStats;
pub use strips::{FactSet, GroundTask, Plan, State};
