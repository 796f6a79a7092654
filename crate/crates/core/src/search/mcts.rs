//! Monte Carlo tree search over a tree-based open list.
//!
//! Each iteration selects a leaf by descending the tree along the best
//! child under the node evaluation criterion, expands it, evaluates the new
//! successors with the heuristic (no rollout), and backpropagates leaf
//! statistics towards the root. Subtree statistics summarize the heuristic
//! values of the live leaves below each node; the criterion combines their
//! mean (or minimum) with a confidence-bound exploration term in
//! minimization mode.
//!
//! Duplicate states are handled inside expansion: a successor whose state
//! already lives in the tree at no-worse g adopts the old node's subtree
//! and locks the old node; at strictly worse g it is discarded, which also
//! prunes cycles. Locked nodes (dead ends, duplicated-worse, exhausted
//! subtrees) are excluded from selection, and by default their observations
//! are dropped from ancestor statistics during backpropagation.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Outcome, SearchResult};
use crate::bandit::{MeanRange, PolicyKind};
use crate::heuristics::Heuristic;
use crate::stats::RunningStats;
use crate::strips::{GroundTask, OpId, Plan, State};

/// Which subtree statistic serves as the criterion's mean term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanTerm {
    /// Average heuristic value of the live subtree leaves.
    SubtreeMean,
    /// Minimum heuristic value of the live subtree leaves (star variants
    /// and plain GBFS).
    SubtreeMin,
}

/// A node evaluation criterion: a mean term plus an optional
/// confidence-bound exploration term, always in minimization mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NecPolicy {
    pub mean: MeanTerm,
    pub exploration: Option<PolicyKind>,
}

impl NecPolicy {
    /// Plain GBFS on the tree: subtree minimum, no exploration.
    pub fn gbfs() -> Self {
        NecPolicy {
            mean: MeanTerm::SubtreeMin,
            exploration: None,
        }
    }

    /// Criterion value for a child with subtree statistics `stats` and
    /// subtree minimum `subtree_min`, under a parent with
    /// `parent_leaves` live leaves. `ctx` is the sibling mean range for the
    /// normalizing policy.
    pub fn score(
        &self,
        stats: &RunningStats,
        subtree_min: f64,
        parent_leaves: u64,
        ctx: Option<MeanRange>,
    ) -> f64 {
        let mean_raw = match self.mean {
            MeanTerm::SubtreeMean => stats.mean(),
            MeanTerm::SubtreeMin => subtree_min,
        };
        match self.exploration {
            None => mean_raw,
            Some(kind) => {
                let mean = if kind.normalizes_mean() {
                    ctx.expect("normalizing policy requires sibling range")
                        .normalize(mean_raw)
                } else {
                    mean_raw
                };
                mean - kind.exploration_term(stats, parent_leaves)
            }
        }
    }
}

/// Configuration of one tree-search run.
#[derive(Debug, Clone)]
pub struct MctsConfig {
    pub nec: NecPolicy,
    /// Expansion budget.
    pub budget: u64,
    /// Only consulted when `randomized_ties` is set; the default engine is
    /// deterministic.
    pub seed: u64,
    pub deadline: Option<Instant>,
    /// Keep locked nodes' observations in ancestor statistics instead of
    /// dropping them when the lock is applied.
    pub retain_locked_stats: bool,
    /// Break exact criterion ties uniformly at random instead of by lowest
    /// node id.
    pub randomized_ties: bool,
    /// After every iteration, recompute every node's statistics from its
    /// live leaves by brute force and panic on any mismatch beyond 1e-9.
    pub audit_stats: bool,
    /// Record the expansion order in the result.
    pub record_expansions: bool,
    /// Return a snapshot of the final tree in the result.
    pub capture_tree: bool,
}

impl MctsConfig {
    pub fn new(nec: NecPolicy, budget: u64) -> Self {
        MctsConfig {
            nec,
            budget,
            seed: 0,
            deadline: None,
            retain_locked_stats: false,
            randomized_ties: false,
            audit_stats: false,
            record_expansions: false,
            capture_tree: false,
        }
    }
}

/// Read-only snapshot of one tree node, for verification and debugging.
#[derive(Debug, Clone)]
pub struct NodeView {
    pub id: usize,
    pub parent: Option<usize>,
    pub op_in: Option<OpId>,
    pub g: u64,
    pub children: Vec<usize>,
    pub locked: bool,
    pub expanded: bool,
    /// Own heuristic value.
    pub h: f64,
    /// Statistics over the live subtree leaves' h values.
    pub stats_h: RunningStats,
    /// Statistics over the live subtree leaves' path-cost-plus-h values.
    pub stats_gh: RunningStats,
    /// Minimum leaf h and the id of the leaf attaining it.
    pub min_h: (f64, usize),
    /// Minimum leaf path-cost-plus-h and the id of the leaf attaining it.
    pub min_gh: (f64, usize),
}

const NO_LEAF: (f64, usize) = (f64::INFINITY, usize::MAX);

struct Node {
    state: State,
    parent: Option<usize>,
    op_in: Option<OpId>,
    g: u64,
    children: Vec<usize>,
    locked: bool,
    expanded: bool,
    h: f64,
    stats_h: RunningStats,
    stats_gh: RunningStats,
    min_h: (f64, usize),
    min_gh: (f64, usize),
}

impl Node {
    fn live_leaf(
        state: State,
        parent: Option<usize>,
        op_in: Option<OpId>,
        g: u64,
        h: f64,
        id: usize,
    ) -> Node {
        Node {
            state,
            parent,
            op_in,
            g,
            children: Vec::new(),
            locked: false,
            expanded: false,
            h,
            stats_h: RunningStats::from_value(h),
            stats_gh: RunningStats::from_value(h),
            min_h: (h, id),
            min_gh: (h, id),
        }
    }

    fn dead_leaf(state: State, parent: Option<usize>, op_in: Option<OpId>, g: u64) -> Node {
        Node {
            state,
            parent,
            op_in,
            g,
            children: Vec::new(),
            locked: true,
            expanded: false,
            h: f64::INFINITY,
            stats_h: RunningStats::new(),
            stats_gh: RunningStats::new(),
            min_h: NO_LEAF,
            min_gh: NO_LEAF,
        }
    }
}

/// Backpropagation queue: pops the highest-g node first so children are
/// refreshed before their parents; requires positive edge costs.
#[derive(Default)]
struct BackpropQueue {
    heap: BinaryHeap<(u64, usize)>,
    queued: HashSet<usize>,
}

impl BackpropQueue {
    fn push(&mut self, g: u64, id: usize) {
        if self.queued.insert(id) {
            self.heap.push((g, id));
        }
    }

    fn pop(&mut self) -> Option<usize> {
        let (_, id) = self.heap.pop()?;
        self.queued.remove(&id);
        Some(id)
    }
}

struct Search<'a, H: Heuristic> {
    task: &'a GroundTask,
    heuristic: &'a H,
    config: &'a MctsConfig,
    nodes: Vec<Node>,
    /// State -> its current (canonical) node. Doubles as the per-run
    /// evaluation memo: every state is evaluated exactly once, when its
    /// first node is created.
    index: HashMap<State, usize>,
    rng: ChaCha8Rng,
    expansions: u64,
    evaluations: u64,
    generated: u64,
    trace: Vec<State>,
}

/// Runs the tree search with the configured criterion.
pub fn mcts<H: Heuristic>(task: &GroundTask, heuristic: &H, config: &MctsConfig) -> SearchResult {
    assert!(
        task.operators.iter().all(|op| op.cost >= 1),
        "backpropagation ordering requires positive edge costs"
    );
    let start = Instant::now();
    let mut search = Search {
        task,
        heuristic,
        config,
        nodes: Vec::new(),
        index: HashMap::new(),
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        expansions: 0,
        evaluations: 0,
        generated: 0,
        trace: Vec::new(),
    };
    let outcome = search.run();
    let tree = config.capture_tree.then(|| search.snapshot());
    SearchResult {
        outcome,
        expansions: search.expansions,
        evaluations: search.evaluations,
        generated: search.generated,
        elapsed: start.elapsed(),
        expansion_trace: config.record_expansions.then_some(search.trace),
        tree,
    }
}

/// GBFS implemented on the tree-based open list: subtree-minimum criterion
/// with no exploration term. The equivalence oracle for [`gbfs_queue`].
///
/// [`gbfs_queue`]: super::gbfs_queue
pub fn gbfs_tree<H: Heuristic>(
    task: &GroundTask,
    heuristic: &H,
    limits: super::SearchLimits,
    seed: u64,
) -> SearchResult {
    let mut config = MctsConfig::new(NecPolicy::gbfs(), limits.budget);
    config.deadline = limits.deadline;
    config.seed = seed;
    config.record_expansions = true;
    mcts(task, heuristic, &config)
}

impl<'a, H: Heuristic> Search<'a, H> {
    fn run(&mut self) -> Outcome {
        if self.task.unsolvable {
            return Outcome::Exhausted;
        }
        if self.task.is_goal(&self.task.init) {
            return Outcome::Plan(Plan::default());
        }

        let root_h = self.evaluate(&self.task.init.clone());
        let root = if root_h.is_finite() {
            Node::live_leaf(self.task.init.clone(), None, None, 0, root_h, 0)
        } else {
            Node::dead_leaf(self.task.init.clone(), None, None, 0)
        };
        self.nodes.push(root);
        self.index.insert(self.task.init.clone(), 0);

        loop {
            if self.nodes[0].locked {
                return Outcome::Exhausted;
            }
            if self.expansions >= self.config.budget {
                return Outcome::BudgetReached;
            }
            if self.config.deadline.is_some_and(|d| Instant::now() >= d) {
                return Outcome::BudgetReached;
            }

            let leaf = self.select_leaf();
            let mut queue = BackpropQueue::default();
            if let Some(plan) = self.expand(leaf, &mut queue) {
                assert!(
                    self.task.validate_plan(&plan),
                    "extracted plan must validate"
                );
                return Outcome::Plan(plan);
            }
            self.backpropagate(&mut queue);
            if self.config.audit_stats {
                self.audit();
            }
        }
    }

    /// Descends from the root to a leaf, at each internal node taking the
    /// unlocked child that minimizes the criterion.
    fn select_leaf(&mut self) -> usize {
        let mut current = 0usize;
        while !self.nodes[current].children.is_empty() {
            let parent_leaves = self.effective_stats(current).count();
            let unlocked: Vec<usize> = self.nodes[current]
                .children
                .iter()
                .copied()
                .filter(|&c| !self.nodes[c].locked)
                .collect();
            assert!(
                !unlocked.is_empty(),
                "selection reached a node with all children locked"
            );
            let ctx = self
                .config
                .nec
                .exploration
                .filter(|k| k.normalizes_mean())
                .and_then(|_| MeanRange::over(unlocked.iter().map(|&c| self.mean_term(c))));
            let score = |s: &Self, c: usize| -> f64 {
                s.config.nec.score(
                    &s.effective_stats(c),
                    s.nodes[c].min_h.0,
                    parent_leaves,
                    ctx,
                )
            };
            let mut best = unlocked[0];
            let mut best_score = score(self, best);
            let mut tied: Vec<usize> = vec![best];
            for &c in &unlocked[1..] {
                let f = score(self, c);
                match f.partial_cmp(&best_score).expect("criterion is never NaN") {
                    Ordering::Less => {
                        best = c;
                        best_score = f;
                        tied.clear();
                        tied.push(c);
                    }
                    Ordering::Equal => {
                        if self.config.randomized_ties {
                            tied.push(c);
                        } else if self.tie_key(c) < self.tie_key(best) {
                            best = c;
                        }
                    }
                    Ordering::Greater => {}
                }
            }
            if self.config.randomized_ties && tied.len() > 1 {
                best = tied[self.rng.gen_range(0..tied.len())];
            }
            current = best;
        }
        current
    }

    /// Secondary selection key: node id for bandit criteria, the id of the
    /// best leaf for the pure subtree-minimum criterion (which makes the
    /// tree engine reproduce the queue engine's FIFO order on h ties).
    fn tie_key(&self, node: usize) -> usize {
        match self.config.nec.exploration {
            None => self.nodes[node].min_h.1,
            Some(_) => node,
        }
    }

    fn mean_term(&self, node: usize) -> f64 {
        match self.config.nec.mean {
            MeanTerm::SubtreeMean => self.effective_stats(node).mean(),
            MeanTerm::SubtreeMin => self.nodes[node].min_h.0,
        }
    }

    /// The statistics the criterion sees for a node.
    fn effective_stats(&self, node: usize) -> RunningStats {
        self.nodes[node].stats_h
    }

    /// Evaluates a state the first time its node is created; duplicate
    /// states never reach this (their value lives on the existing node).
    fn evaluate(&mut self, state: &State) -> f64 {
        let h = self.heuristic.evaluate(self.task, state);
        assert!(
            !h.is_nan() && h >= 0.0,
            "heuristic must be nonnegative or infinite"
        );
        self.evaluations += 1;
        h
    }

    /// Expands a leaf: generates successors in operator order, detects
    /// goals early, handles duplicates, attaches new children, and seeds
    /// the backpropagation queue. Returns the plan if a goal was generated.
    fn expand(&mut self, leaf: usize, queue: &mut BackpropQueue) -> Option<Plan> {
        debug_assert!(!self.nodes[leaf].locked && self.nodes[leaf].children.is_empty());
        self.expansions += 1;
        if self.config.record_expansions {
            self.trace.push(self.nodes[leaf].state.clone());
        }
        self.nodes[leaf].expanded = true;

        let parent_state = self.nodes[leaf].state.clone();
        let parent_g = self.nodes[leaf].g;
        let mut attached_any = false;

        for (op, succ) in self.task.successors(&parent_state) {
            self.generated += 1;
            if self.task.is_goal(&succ) {
                return Some(self.extract_plan(leaf, op));
            }
            let g_new = parent_g + self.task.operators[op].cost;
            match self.index.get(&succ).copied() {
                Some(old) if g_new > self.nodes[old].g => continue,
                Some(old) => {
                    // No-worse duplicate: the new node takes over the old
                    // node's subtree, the old node is locked. A childless
                    // takeover becomes a fresh leaf (or a dead one when the
                    // state's heuristic is infinite), re-entering selection.
                    let new_id = self.nodes.len();
                    let adopted = std::mem::take(&mut self.nodes[old].children);
                    let node = if adopted.is_empty() {
                        let h = self.nodes[old].h;
                        if h.is_finite() {
                            Node::live_leaf(succ.clone(), Some(leaf), Some(op), g_new, h, new_id)
                        } else {
                            Node::dead_leaf(succ.clone(), Some(leaf), Some(op), g_new)
                        }
                    } else {
                        for &c in &adopted {
                            self.nodes[c].parent = Some(new_id);
                        }
                        Node {
                            state: succ.clone(),
                            parent: Some(leaf),
                            op_in: Some(op),
                            g: g_new,
                            children: adopted,
                            locked: false,
                            expanded: true,
                            h: self.nodes[old].h,
                            stats_h: RunningStats::new(),
                            stats_gh: RunningStats::new(),
                            min_h: NO_LEAF,
                            min_gh: NO_LEAF,
                        }
                    };
                    self.nodes.push(node);
                    self.propagate_g(new_id);
                    // The old node's samples live on under the adopting
                    // node; clear them so ancestors never count them twice.
                    let old_node = &mut self.nodes[old];
                    old_node.locked = true;
                    old_node.stats_h = RunningStats::new();
                    old_node.stats_gh = RunningStats::new();
                    old_node.min_h = NO_LEAF;
                    old_node.min_gh = NO_LEAF;
                    self.index.insert(succ, new_id);
                    self.nodes[leaf].children.push(new_id);
                    attached_any = true;
                    queue.push(self.nodes[old].g, old);
                    queue.push(self.nodes[new_id].g, new_id);
                }
                None => {
                    let h = self.evaluate(&succ);
                    let new_id = self.nodes.len();
                    let node = if h.is_finite() {
                        Node::live_leaf(succ.clone(), Some(leaf), Some(op), g_new, h, new_id)
                    } else {
                        Node::dead_leaf(succ.clone(), Some(leaf), Some(op), g_new)
                    };
                    self.nodes.push(node);
                    self.index.insert(succ, new_id);
                    self.nodes[leaf].children.push(new_id);
                    attached_any = true;
                    queue.push(g_new, new_id);
                }
            }
        }

        if !attached_any {
            // Every successor was a strictly worse duplicate; the node is
            // exhausted and its own observation leaves the statistics
            // (unless locked observations are retained).
            let node = &mut self.nodes[leaf];
            node.locked = true;
            if !self.config.retain_locked_stats {
                node.stats_h = RunningStats::new();
                node.stats_gh = RunningStats::new();
                node.min_h = NO_LEAF;
                node.min_gh = NO_LEAF;
            }
        }
        queue.push(parent_g, leaf);
        None
    }

    /// Recomputes g throughout a re-parented subtree.
    fn propagate_g(&mut self, root: usize) {
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            let g = self.nodes[i].g;
            for c in self.nodes[i].children.clone() {
                let op = self.nodes[c].op_in.expect("child has an incoming operator");
                let child_g = g + self.task.operators[op].cost;
                if self.nodes[c].g != child_g {
                    self.nodes[c].g = child_g;
                    stack.push(c);
                }
            }
        }
    }

    /// Pops nodes in decreasing g order, refreshing each from its children:
    /// statistics as a merge over the contributing children (shifted by the
    /// edge cost for the cost-augmented statistics), minima as lexicographic
    /// minima, and the lock when every child is locked. Parents are
    /// re-enqueued until the wave reaches the root.
    fn backpropagate(&mut self, queue: &mut BackpropQueue) {
        while let Some(id) = queue.pop() {
            let node = &self.nodes[id];
            if !node.children.is_empty() {
                let mut stats_h = RunningStats::new();
                let mut stats_gh = RunningStats::new();
                let mut min_h = NO_LEAF;
                let mut min_gh = NO_LEAF;
                let mut all_locked = true;
                for &c in &node.children {
                    let child = &self.nodes[c];
                    if !child.locked {
                        all_locked = false;
                    }
                    let contributes = if self.config.retain_locked_stats {
                        !child.stats_h.is_empty()
                    } else {
                        !child.locked
                    };
                    if !contributes {
                        continue;
                    }
                    let cost = self.task.operators
                        [child.op_in.expect("child has an incoming operator")]
                    .cost as f64;
                    stats_h = stats_h.merge(&child.stats_h);
                    stats_gh = stats_gh.merge(&child.stats_gh.shifted(cost));
                    min_h = min_h.min((child.min_h.0, child.min_h.1));
                    min_gh = min_gh.min((child.min_gh.0 + cost, child.min_gh.1));
                }
                let node = &mut self.nodes[id];
                node.stats_h = stats_h;
                node.stats_gh = stats_gh;
                node.min_h = min_h;
                node.min_gh = min_gh;
                if all_locked {
                    node.locked = true;
                }
            }
            if let Some(parent) = self.nodes[id].parent {
                queue.push(self.nodes[parent].g, parent);
            }
        }
    }

    fn extract_plan(&self, leaf: usize, final_op: OpId) -> Plan {
        let mut steps = Vec::new();
        let mut cursor = leaf;
        while let Some(op) = self.nodes[cursor].op_in {
            steps.push(op);
            cursor = self.nodes[cursor].parent.expect("non-root has a parent");
        }
        steps.reverse();
        steps.push(final_op);
        Plan { steps }
    }

    fn snapshot(&self) -> Vec<NodeView> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(id, n)| NodeView {
                id,
                parent: n.parent,
                op_in: n.op_in,
                g: n.g,
                children: n.children.clone(),
                locked: n.locked,
                expanded: n.expanded,
                h: n.h,
                stats_h: n.stats_h,
                stats_gh: n.stats_gh,
                min_h: n.min_h,
                min_gh: n.min_gh,
            })
            .collect()
    }

    /// Brute-force check: every node's statistics equal a direct
    /// aggregation over its contributing subtree leaves.
    fn audit(&self) {
        for id in 0..self.nodes.len() {
            let mut leaf_h: Vec<(f64, usize)> = Vec::new();
            let mut leaf_gh: Vec<(f64, usize)> = Vec::new();
            self.collect_leaves(id, 0.0, &mut leaf_h, &mut leaf_gh);
            let node = &self.nodes[id];
            assert_eq!(
                node.stats_h.count(),
                leaf_h.len() as u64,
                "node {id}: leaf count mismatch"
            );
            if !leaf_h.is_empty() {
                let check = |stats: &RunningStats, values: &[(f64, usize)], label: &str| {
                    let n = values.len() as f64;
                    let mean = values.iter().map(|(v, _)| v).sum::<f64>() / n;
                    let m2 = values.iter().map(|(v, _)| (v - mean).powi(2)).sum::<f64>();
                    let scale = 1.0 + values.iter().fold(0.0f64, |a, (v, _)| a.max(v.abs()));
                    assert!(
                        (stats.mean() - mean).abs() <= 1e-9 * scale,
                        "node {id}: {label} mean {} vs brute {mean}",
                        stats.mean()
                    );
                    assert!(
                        (stats.m2() - m2).abs() <= 1e-9 * scale * scale * n,
                        "node {id}: {label} m2 {} vs brute {m2}",
                        stats.m2()
                    );
                };
                check(&node.stats_h, &leaf_h, "h");
                check(&node.stats_gh, &leaf_gh, "g+h");
                let brute_min_h = leaf_h.iter().fold(NO_LEAF, |acc, &(v, i)| acc.min((v, i)));
                assert_eq!(node.min_h, brute_min_h, "node {id}: min h mismatch");
                let brute_min_gh = leaf_gh.iter().fold(NO_LEAF, |acc, &(v, i)| acc.min((v, i)));
                assert_eq!(node.min_gh, brute_min_gh, "node {id}: min g+h mismatch");
            }
        }
    }

    fn collect_leaves(
        &self,
        id: usize,
        path_cost: f64,
        leaf_h: &mut Vec<(f64, usize)>,
        leaf_gh: &mut Vec<(f64, usize)>,
    ) {
        let node = &self.nodes[id];
        if node.children.is_empty() {
            let contributes = if self.config.retain_locked_stats {
                !node.stats_h.is_empty()
            } else {
                !node.locked && !node.stats_h.is_empty()
            };
            if contributes {
                leaf_h.push((node.h, id));
                leaf_gh.push((node.h + path_cost, id));
            }
            return;
        }
        for &c in &node.children {
            let child = &self.nodes[c];
            if !self.config.retain_locked_stats && child.locked {
                continue;
            }
            let cost = self.task.operators[child.op_in.expect("child has an operator")].cost as f64;
            self.collect_leaves(c, path_cost + cost, leaf_h, leaf_gh);
        }
    }
}

trait TupleMin {
    fn min(self, other: Self) -> Self;
}

impl TupleMin for (f64, usize) {
    fn min(self, other: Self) -> Self {
        match self
            .0
            .partial_cmp(&other.0)
            .expect("leaf values are not NaN")
        {
            Ordering::Less => self,
            Ordering::Greater => other,
            Ordering::Equal => {
                if self.1 <= other.1 {
                    self
                } else {
                    other
                }
            }
        }
    }
}
