//! Shared helpers for the integration tests.
//!
//! Each test binary compiles this module separately and uses a subset.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};
use std::path::PathBuf;

use banditplan::heuristics::Heuristic;
use banditplan::pddl::{ground, parse_domain, parse_problem, Atom, DomainAst, ProblemAst};
use banditplan::strips::{GroundTask, State};

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn read_fixture(rel: &str) -> String {
    let path = fixtures_dir().join(rel);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {path:?}: {e}"))
}

pub fn load_asts(domain_rel: &str, problem_rel: &str) -> (DomainAst, ProblemAst) {
    let domain = parse_domain(&read_fixture(domain_rel)).expect("fixture domain parses");
    let problem = parse_problem(&read_fixture(problem_rel)).expect("fixture problem parses");
    (domain, problem)
}

pub fn load_task(domain_rel: &str, problem_rel: &str) -> GroundTask {
    let (domain, problem) = load_asts(domain_rel, problem_rel);
    ground(&domain, &problem).expect("fixture grounds")
}

/// All bundled instances as (domain file, problem file) pairs.
pub fn fixture_instances() -> Vec<(&'static str, &'static str)> {
    vec![
        ("blocksworld/domain.pddl", "blocksworld/p01.pddl"),
        ("blocksworld/domain.pddl", "blocksworld/p02.pddl"),
        ("blocksworld/domain.pddl", "blocksworld/p03.pddl"),
        ("chain/domain.pddl", "chain/p01.pddl"),
        ("gripper/domain.pddl", "gripper/p01.pddl"),
        ("gripper/domain.pddl", "gripper/p02.pddl"),
        ("gripper/domain.pddl", "gripper/p03.pddl"),
    ]
}

/// A heuristic defined by a lookup table on states, for steering searches
/// in tests.
pub struct TableHeuristic {
    pub map: HashMap<State, f64>,
    pub default: f64,
}

impl Heuristic for TableHeuristic {
    fn evaluate(&self, _task: &GroundTask, state: &State) -> f64 {
        *self.map.get(state).unwrap_or(&self.default)
    }
}

/// A positive-affine transformation of another heuristic; infinity is
/// preserved.
pub struct AffineOf<H> {
    pub base: H,
    pub scale: f64,
    pub shift: f64,
}

impl<H: Heuristic> Heuristic for AffineOf<H> {
    fn evaluate(&self, task: &GroundTask, state: &State) -> f64 {
        let h = self.base.evaluate(task, state);
        if h.is_finite() {
            self.scale * h + self.shift
        } else {
            h
        }
    }
}

/// Validates a plan against the raw ASTs, independent of grounding: binds
/// each step's action by name, checks the substituted precondition,
/// applies deletes then adds, and finally checks the goal.
pub fn validate_plan_ast(domain: &DomainAst, problem: &ProblemAst, steps: &[String]) -> bool {
    let mut state: HashSet<Atom> = problem.init.iter().cloned().collect();
    for step in steps {
        let inner = step
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .expect("VAL-style step");
        let mut parts = inner.split_whitespace();
        let name = parts.next().expect("action name");
        let args: Vec<&str> = parts.collect();
        let Some(action) = domain.actions.iter().find(|a| a.name == name) else {
            return false;
        };
        if action.params.len() != args.len() {
            return false;
        }
        let binding: HashMap<&str, &str> = action
            .params
            .iter()
            .map(|p| p.name.as_str())
            .zip(args.iter().copied())
            .collect();
        let substitute = |lit: &Atom| Atom {
            predicate: lit.predicate.clone(),
            args: lit
                .args
                .iter()
                .map(|a| binding.get(a.as_str()).copied().unwrap_or(a).to_string())
                .collect(),
        };
        if !action
            .precondition
            .iter()
            .all(|lit| state.contains(&substitute(lit)))
        {
            return false;
        }
        for lit in &action.delete {
            state.remove(&substitute(lit));
        }
        for lit in &action.add {
            state.insert(substitute(lit));
        }
    }
    problem.goal.iter().all(|g| state.contains(g))
}

/// Plan steps as VAL-style operator names.
pub fn plan_names(task: &GroundTask, plan: &banditplan::strips::Plan) -> Vec<String> {
    plan.steps
        .iter()
        .map(|&op| task.operators[op].name.clone())
        .collect()
}
