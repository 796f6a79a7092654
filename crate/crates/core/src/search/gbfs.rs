//! Greedy best-first search on a priority queue.
//!
//! The open list is keyed `(h, insertion id)`, so equal heuristic values
//! pop in FIFO order. Duplicate states keep the lowest g-value found:
//! rediscovering a state at no-worse cost re-points its parent edge,
//! propagates the improvement to everything currently reached through it,
//! and re-queues the state unless it is closed with surviving successors.
//! Closed states whose expansion discarded every successor are reopened by
//! a no-worse rediscovery, since a cheaper arrival can revive the
//! successors that lost their earlier g-contests.
//!
//! Goals are detected at generation time; heuristic dead ends are never
//! queued.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::time::Instant;

use super::{Outcome, SearchLimits, SearchResult};
use crate::heuristics::Heuristic;
use crate::strips::{GroundTask, OpId, Plan, State};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Status {
    Open,
    Closed { reopenable: bool },
}

struct Rec {
    g: u64,
    h: f64,
    parent: Option<(usize, OpId)>,
    /// Children in the current parent-pointer forest; g improvements
    /// propagate through these edges.
    children: Vec<usize>,
    /// Bumped whenever a fresh queue entry supersedes the old one.
    version: u64,
    status: Status,
}

struct HeapEntry {
    h: f64,
    id: u64,
    rec: usize,
    version: u64,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.h == other.h && self.id == other.id
    }
}
impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    // Reversed so the BinaryHeap pops the smallest (h, id).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .h
            .total_cmp(&self.h)
            .then_with(|| other.id.cmp(&self.id))
    }
}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Greedy best-first search. The seed is accepted for interface symmetry
/// and recorded by callers; the default engine is fully deterministic.
pub fn gbfs_queue<H: Heuristic>(
    task: &GroundTask,
    heuristic: &H,
    limits: SearchLimits,
    _seed: u64,
) -> SearchResult {
    let start = Instant::now();
    let mut expansions: u64 = 0;
    let mut evaluations: u64 = 0;
    let mut generated: u64 = 0;
    let mut trace: Vec<State> = Vec::new();

    let finish =
        |outcome: Outcome, expansions, evaluations, generated, trace: Vec<State>| SearchResult {
            outcome,
            expansions,
            evaluations,
            generated,
            elapsed: start.elapsed(),
            expansion_trace: Some(trace),
            tree: None,
        };

    if task.unsolvable {
        return finish(Outcome::Exhausted, 0, 0, 0, trace);
    }
    if task.is_goal(&task.init) {
        return finish(Outcome::Plan(Plan::default()), 0, 0, 0, trace);
    }

    let mut states: Vec<State> = Vec::new();
    let mut recs: Vec<Rec> = Vec::new();
    let mut index: HashMap<State, usize> = HashMap::new();
    let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
    let mut next_entry_id: u64 = 0;

    let root_h = heuristic.evaluate(task, &task.init);
    evaluations += 1;
    if root_h.is_finite() {
        states.push(task.init.clone());
        recs.push(Rec {
            g: 0,
            h: root_h,
            parent: None,
            children: Vec::new(),
            version: 0,
            status: Status::Open,
        });
        index.insert(task.init.clone(), 0);
        heap.push(HeapEntry {
            h: root_h,
            id: next_entry_id,
            rec: 0,
            version: 0,
        });
        next_entry_id += 1;
    }

    loop {
        // Skip entries superseded by a fresh push for the same state.
        let current = loop {
            match heap.pop() {
                None => {
                    return finish(
                        Outcome::Exhausted,
                        expansions,
                        evaluations,
                        generated,
                        trace,
                    )
                }
                Some(entry) => {
                    let rec = &recs[entry.rec];
                    if rec.status == Status::Open && rec.version == entry.version {
                        break entry.rec;
                    }
                }
            }
        };
        if expansions >= limits.budget || limits.deadline_passed() {
            return finish(
                Outcome::BudgetReached,
                expansions,
                evaluations,
                generated,
                trace,
            );
        }

        expansions += 1;
        trace.push(states[current].clone());
        let state = states[current].clone();
        let g = recs[current].g;
        let mut all_skipped = true;

        for (op, succ) in task.successors(&state) {
            generated += 1;
            if task.is_goal(&succ) {
                let plan = extract_plan(&recs, current, op);
                assert!(task.validate_plan(&plan), "extracted plan must validate");
                return finish(
                    Outcome::Plan(plan),
                    expansions,
                    evaluations,
                    generated,
                    trace,
                );
            }
            let g_new = g + task.operators[op].cost;
            match index.get(&succ).copied() {
                None => {
                    let h = heuristic.evaluate(task, &succ);
                    evaluations += 1;
                    all_skipped = false;
                    let idx = recs.len();
                    states.push(succ.clone());
                    index.insert(succ, idx);
                    if h.is_finite() {
                        recs.push(Rec {
                            g: g_new,
                            h,
                            parent: Some((current, op)),
                            children: Vec::new(),
                            version: 0,
                            status: Status::Open,
                        });
                        recs[current].children.push(idx);
                        heap.push(HeapEntry {
                            h,
                            id: next_entry_id,
                            rec: idx,
                            version: 0,
                        });
                        next_entry_id += 1;
                    } else {
                        // Dead end: recorded for duplicate bookkeeping but
                        // never queued.
                        recs.push(Rec {
                            g: g_new,
                            h,
                            parent: Some((current, op)),
                            children: Vec::new(),
                            version: 0,
                            status: Status::Closed { reopenable: false },
                        });
                        recs[current].children.push(idx);
                    }
                }
                Some(idx) => {
                    if g_new > recs[idx].g {
                        continue;
                    }
                    all_skipped = false;
                    reparent(&mut recs, idx, current, op);
                    propagate_g(task, &mut recs, idx, g_new);
                    match recs[idx].status {
                        Status::Open => {
                            recs[idx].version += 1;
                            let version = recs[idx].version;
                            heap.push(HeapEntry {
                                h: recs[idx].h,
                                id: next_entry_id,
                                rec: idx,
                                version,
                            });
                            next_entry_id += 1;
                        }
                        Status::Closed { reopenable: true } if recs[idx].h.is_finite() => {
                            recs[idx].status = Status::Open;
                            recs[idx].version += 1;
                            let version = recs[idx].version;
                            heap.push(HeapEntry {
                                h: recs[idx].h,
                                id: next_entry_id,
                                rec: idx,
                                version,
                            });
                            next_entry_id += 1;
                        }
                        Status::Closed { .. } => {}
                    }
                }
            }
        }
        recs[current].status = Status::Closed {
            reopenable: all_skipped,
        };
    }
}

fn reparent(recs: &mut [Rec], child: usize, new_parent: usize, op: OpId) {
    if let Some((old_parent, _)) = recs[child].parent {
        recs[old_parent].children.retain(|&c| c != child);
    }
    recs[child].parent = Some((new_parent, op));
    recs[new_parent].children.push(child);
}

/// Recomputes g for `idx` and everything currently reached through it.
fn propagate_g(task: &GroundTask, recs: &mut [Rec], idx: usize, new_g: u64) {
    let mut stack = vec![(idx, new_g)];
    while let Some((i, g)) = stack.pop() {
        if recs[i].g == g {
            continue;
        }
        recs[i].g = g;
        for c in recs[i].children.clone() {
            let op = recs[c].parent.expect("forest child has a parent").1;
            stack.push((c, g + task.operators[op].cost));
        }
    }
}

fn extract_plan(recs: &[Rec], last: usize, final_op: OpId) -> Plan {
    let mut steps = Vec::new();
    let mut cursor = Some(last);
    while let Some(i) = cursor {
        match recs[i].parent {
            Some((p, op)) => {
                steps.push(op);
                cursor = Some(p);
            }
            None => cursor = None,
        }
    }
    steps.reverse();
    steps.push(final_op);
    Plan { steps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heuristics::HeuristicKind;
    use crate::pddl::{ground, parse_domain, parse_problem};
    use crate::strips::FactSet;

    fn chain_task() -> GroundTask {
        let domain = parse_domain(
            "(define (domain chain)
               (:predicates (a) (b))
               (:action op1 :parameters () :precondition () :effect (a))
               (:action op2 :parameters () :precondition (a) :effect (b)))",
        )
        .unwrap();
        let problem =
            parse_problem("(define (problem c) (:domain chain) (:init) (:goal (and (a) (b))))")
                .unwrap();
        ground(&domain, &problem).unwrap()
    }

    #[test]
    fn goal_in_init_needs_no_expansion() {
        let mut task = chain_task();
        task.goal = FactSet::empty(task.fact_count());
        let result = gbfs_queue(
            &task,
            &HeuristicKind::GoalCount,
            SearchLimits::budget(10),
            0,
        );
        assert_eq!(result.outcome, Outcome::Plan(Plan::default()));
        assert_eq!(result.expansions, 0);
    }

    #[test]
    fn chain_solved_in_two_expansions() {
        let task = chain_task();
        let result = gbfs_queue(
            &task,
            &HeuristicKind::GoalCount,
            SearchLimits::budget(10),
            0,
        );
        let plan = result.plan().expect("chain is solvable");
        assert_eq!(plan.steps, vec![0, 1]);
        assert_eq!(result.expansions, 2);
        assert!(task.validate_plan(plan));
    }

    #[test]
    fn unsolvable_flagged_task_is_exhausted() {
        let domain = parse_domain(
            "(define (domain d) (:predicates (a) (b))
               (:action op1 :parameters () :precondition () :effect (a)))",
        )
        .unwrap();
        let problem =
            parse_problem("(define (problem p) (:domain d) (:init) (:goal (b)))").unwrap();
        let task = ground(&domain, &problem).unwrap();
        assert!(task.unsolvable);
        let result = gbfs_queue(
            &task,
            &HeuristicKind::GoalCount,
            SearchLimits::budget(10),
            0,
        );
        assert_eq!(result.outcome, Outcome::Exhausted);
        assert_eq!(result.expansions, 0);
    }

    #[test]
    fn budget_is_respected_exactly() {
        let domain =
            parse_domain(include_str!("../../../../fixtures/gripper/domain.pddl")).unwrap();
        let problem = parse_problem(include_str!("../../../../fixtures/gripper/p02.pddl")).unwrap();
        let task = ground(&domain, &problem).unwrap();
        let result = gbfs_queue(&task, &HeuristicKind::Blind, SearchLimits::budget(3), 0);
        assert!(result.expansions <= 3);
        if result.outcome == Outcome::BudgetReached {
            assert_eq!(result.expansions, 3);
        }
    }

    #[test]
    fn dead_end_frontier_exhausts() {
        // Only operator leads to a state from which the goal is
        // relaxed-unreachable; gc cannot see it but ff locks it out.
        let domain = parse_domain(
            "(define (domain d) (:predicates (a) (b) (g))
               (:action mk :parameters () :precondition () :effect (and (a) (not (g)))))",
        )
        .unwrap();
        let problem =
            parse_problem("(define (problem p) (:domain d) (:init (g)) (:goal (and (b) (g))))")
                .unwrap();
        let task = ground(&domain, &problem).unwrap();
        // (b) is relaxed-unreachable, so the task is flagged unsolvable.
        assert!(task.unsolvable);
    }
}
