//! The tree-based GBFS and the priority-queue GBFS must expand identical
//! state sequences on every bundled fixture: both engines share the
//! `(h, insertion id)` order and the duplicate policy, so any divergence
//! is a bug in one of them.

mod common;

use banditplan::heuristics::HeuristicKind;
use banditplan::search::{gbfs_queue, gbfs_tree, SearchLimits};
use common::{fixture_instances, load_task};

#[test]
fn tree_and_queue_gbfs_expand_identical_sequences() {
    for (domain, problem) in fixture_instances() {
        for heuristic in [
            HeuristicKind::Ff,
            HeuristicKind::Add,
            HeuristicKind::Max,
            HeuristicKind::GoalCount,
            HeuristicKind::Blind,
        ] {
            let task = load_task(domain, problem);
            let limits = SearchLimits::budget(10_000);
            let queue = gbfs_queue(&task, &heuristic, limits, 0);
            let tree = gbfs_tree(&task, &heuristic, limits, 0);

            let qt = queue.expansion_trace.as_ref().unwrap();
            let tt = tree.expansion_trace.as_ref().unwrap();
            if qt != tt {
                let first = qt
                    .iter()
                    .zip(tt.iter())
                    .position(|(a, b)| a != b)
                    .unwrap_or(qt.len().min(tt.len()));
                panic!(
                    "{problem} with {heuristic:?}: traces diverge at expansion {first} \
                     (queue {} vs tree {} expansions)",
                    qt.len(),
                    tt.len()
                );
            }
            assert_eq!(
                queue.expansions, tree.expansions,
                "{problem} {heuristic:?}: expansion counts"
            );
            assert_eq!(
                queue.evaluations, tree.evaluations,
                "{problem} {heuristic:?}: evaluation counts"
            );
            assert_eq!(
                queue.generated, tree.generated,
                "{problem} {heuristic:?}: generation counts"
            );
            assert_eq!(
                queue.outcome.label(),
                tree.outcome.label(),
                "{problem} {heuristic:?}: outcomes"
            );
            if let (Some(qp), Some(tp)) = (queue.plan(), tree.plan()) {
                assert!(task.validate_plan(qp));
                assert!(task.validate_plan(tp));
                assert_eq!(qp, tp, "{problem} {heuristic:?}: plans");
            }
        }
    }
}

#[test]
fn equivalence_covers_reopened_exhausted_states() {
    // Node p2 is expanded early (cheap h) and every successor is a
    // strictly worse duplicate, so it closes childless. A second
    // equal-cost path then revives it and it is expanded again, closing
    // the same way. Both engines must agree on the doubled expansion.
    use banditplan::strips::{FactSet, GroundOperator, GroundTask};
    use std::collections::HashMap;

    let nfacts = 5; // p0..p3 + unreachable goal fact
    let op = |name: &str, pre: usize, add: usize| GroundOperator {
        name: name.to_string(),
        precondition: FactSet::from_indices(nfacts, [pre]),
        add: FactSet::from_indices(nfacts, [add]),
        delete: FactSet::from_indices(nfacts, [pre]),
        cost: 1,
    };
    let task = GroundTask::new(
        (0..nfacts).map(|i| format!("(p{i})")).collect(),
        vec![
            op("(a)", 0, 1), // p0 -> p1
            op("(b)", 1, 2), // p1 -> p2
            op("(c)", 2, 0), // p2 -> p0, always a worse duplicate
            op("(d)", 0, 3), // p0 -> p3
            op("(e)", 3, 2), // p3 -> p2, the equal-cost second path
        ],
        FactSet::from_indices(nfacts, [0]),
        FactSet::from_indices(nfacts, [4]),
    );
    let state = |i: usize| FactSet::from_indices(nfacts, [i]);
    let mut map = HashMap::new();
    map.insert(state(0), 4.0);
    map.insert(state(1), 1.0);
    map.insert(state(2), 1.0);
    map.insert(state(3), 5.0);
    let heuristic = common::TableHeuristic { map, default: 9.0 };

    let limits = SearchLimits::budget(100);
    let queue = gbfs_queue(&task, &heuristic, limits, 0);
    let tree = gbfs_tree(&task, &heuristic, limits, 0);
    assert_eq!(queue.expansion_trace, tree.expansion_trace);
    assert_eq!(queue.outcome.label(), "exhausted");
    assert_eq!(tree.outcome.label(), "exhausted");

    let trace = queue.expansion_trace.unwrap();
    let p2_expansions = trace.iter().filter(|s| **s == state(2)).count();
    assert_eq!(
        p2_expansions, 2,
        "p2 must be expanded, revived, re-expanded"
    );
    assert_eq!(trace.len(), 5); // p0, p1, p2, p3, p2 again
}

#[test]
fn equivalence_holds_under_tight_budgets() {
    let task = load_task("gripper/domain.pddl", "gripper/p03.pddl");
    for budget in [1, 7, 33, 150] {
        let limits = SearchLimits::budget(budget);
        let queue = gbfs_queue(&task, &HeuristicKind::GoalCount, limits, 0);
        let tree = gbfs_tree(&task, &HeuristicKind::GoalCount, limits, 0);
        assert_eq!(
            queue.expansion_trace, tree.expansion_trace,
            "budget {budget}"
        );
        assert_eq!(queue.outcome.label(), tree.outcome.label());
    }
}
