//! Delete-relaxation heuristics: cost-to-go estimates over grounded tasks.
//!
//! Values are nonnegative `f64`; `f64::INFINITY` marks a dead end under the
//! heuristic's relaxation. All heuristics are goal-aware (0 on goal states)
//! and deterministic. Evaluators are stateless; memoization is owned by the
//! search run.

use crate::strips::{FactSet, GroundTask, OpId, State};

/// Heuristic selected by name; the CLI accepts `ff|add|hmax|gc|blind`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeuristicKind {
    Ff,
    Add,
    Max,
    GoalCount,
    Blind,
}

impl HeuristicKind {
    pub fn name(&self) -> &'static str {
        match self {
            HeuristicKind::Ff => "ff",
            HeuristicKind::Add => "add",
            HeuristicKind::Max => "hmax",
            HeuristicKind::GoalCount => "gc",
            HeuristicKind::Blind => "blind",
        }
    }
}

impl std::str::FromStr for HeuristicKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ff" => Ok(HeuristicKind::Ff),
            "add" => Ok(HeuristicKind::Add),
            "hmax" => Ok(HeuristicKind::Max),
            "gc" => Ok(HeuristicKind::GoalCount),
            "blind" => Ok(HeuristicKind::Blind),
            other => Err(format!(
                "unknown heuristic `{other}`, expected ff|add|hmax|gc|blind"
            )),
        }
    }
}

/// A state evaluator. Implementations must be deterministic and return
/// either a finite nonnegative value or `f64::INFINITY` for a dead end.
pub trait Heuristic {
    fn evaluate(&self, task: &GroundTask, state: &State) -> f64;
}

impl Heuristic for HeuristicKind {
    fn evaluate(&self, task: &GroundTask, state: &State) -> f64 {
        match self {
            HeuristicKind::Ff => h_ff(task, state),
            HeuristicKind::Add => h_add(task, state),
            HeuristicKind::Max => h_max(task, state),
            HeuristicKind::GoalCount => h_goal_count(task, state),
            HeuristicKind::Blind => h_blind(task, state),
        }
    }
}

enum Combine {
    Max,
    Sum,
}

/// Fact costs under the delete relaxation: the Bellman fixpoint with either
/// `max` (h_max) or `sum` (h_add) over preconditions. Unreached facts stay
/// at infinity.
fn relaxed_costs(task: &GroundTask, state: &State, combine: Combine) -> Vec<f64> {
    let mut cost = vec![f64::INFINITY; task.fact_count()];
    for f in state.iter() {
        cost[f] = 0.0;
    }
    loop {
        let mut changed = false;
        for op in &task.operators {
            let support = support_cost(&cost, &op.precondition, &combine);
            if !support.is_finite() {
                continue;
            }
            let new_cost = support + op.cost as f64;
            for f in op.add.iter() {
                if new_cost < cost[f] {
                    cost[f] = new_cost;
                    changed = true;
                }
            }
        }
        if !changed {
            return cost;
        }
    }
}

fn support_cost(cost: &[f64], precondition: &FactSet, combine: &Combine) -> f64 {
    let mut acc = 0.0f64;
    for f in precondition.iter() {
        let c = cost[f];
        if !c.is_finite() {
            return f64::INFINITY;
        }
        match combine {
            Combine::Max => acc = acc.max(c),
            Combine::Sum => acc += c,
        }
    }
    acc
}

/// Critical-path relaxation: max over goal facts of the max-combined
/// fixpoint.
pub fn h_max(task: &GroundTask, state: &State) -> f64 {
    let cost = relaxed_costs(task, state, Combine::Max);
    task.goal.iter().fold(0.0f64, |acc, f| acc.max(cost[f]))
}

/// Additive relaxation: sum over goal facts of the sum-combined fixpoint.
pub fn h_add(task: &GroundTask, state: &State) -> f64 {
    let cost = relaxed_costs(task, state, Combine::Sum);
    task.goal.iter().map(|f| cost[f]).sum()
}

/// The relaxed plan behind [`h_ff`]: a set of operators extracted by
/// backchaining from the goal over the additive-cost table, cheapest
/// supporter first, ties to the lowest operator index. Returns `None` iff
/// the goal is unreachable in the relaxation.
pub fn relaxed_plan(task: &GroundTask, state: &State) -> Option<Vec<OpId>> {
    let cost = relaxed_costs(task, state, Combine::Sum);
    if task.goal.iter().any(|f| !cost[f].is_finite()) {
        return None;
    }

    // Cheapest supporter per fact, decided after convergence so extraction
    // does not depend on fixpoint iteration order.
    let mut supporter: Vec<Option<OpId>> = vec![None; task.fact_count()];
    for (op_id, op) in task.operators.iter().enumerate() {
        let support = support_cost(&cost, &op.precondition, &Combine::Sum);
        if !support.is_finite() {
            continue;
        }
        for f in op.add.iter() {
            if state.contains(f) {
                continue;
            }
            let better = match supporter[f] {
                None => true,
                Some(current) => {
                    let current_support =
                        support_cost(&cost, &task.operators[current].precondition, &Combine::Sum);
                    support < current_support
                }
            };
            if better {
                supporter[f] = Some(op_id);
            }
        }
    }

    let mut plan: Vec<OpId> = Vec::new();
    let mut in_plan = vec![false; task.operator_count()];
    let mut closed = state.clone();
    let mut agenda: Vec<usize> = task.goal.iter().filter(|&f| !closed.contains(f)).collect();
    while let Some(f) = agenda.pop() {
        if closed.contains(f) {
            continue;
        }
        closed.insert(f);
        let op_id = supporter[f].expect("finite-cost fact must have a supporter");
        if !in_plan[op_id] {
            in_plan[op_id] = true;
            plan.push(op_id);
        }
        for p in task.operators[op_id].precondition.iter() {
            if !closed.contains(p) {
                agenda.push(p);
            }
        }
    }
    plan.sort_unstable();
    Some(plan)
}

/// Length of the extracted relaxed plan; infinity iff `h_add` is infinite.
pub fn h_ff(task: &GroundTask, state: &State) -> f64 {
    match relaxed_plan(task, state) {
        Some(plan) => plan.len() as f64,
        None => f64::INFINITY,
    }
}

/// Number of goal facts not yet satisfied.
pub fn h_goal_count(task: &GroundTask, state: &State) -> f64 {
    task.goal.iter().filter(|&f| !state.contains(f)).count() as f64
}

/// Goal-aware constant: 0 on goal states, 1 elsewhere.
pub fn h_blind(task: &GroundTask, state: &State) -> f64 {
    if state.is_superset(&task.goal) {
        0.0
    } else {
        1.0
    }
}
