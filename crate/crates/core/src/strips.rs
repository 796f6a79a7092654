//! Grounded STRIPS task representation and semantics.
//!
//! A [`GroundTask`] indexes every reachable ground atom and every applicable
//! action instantiation; states are fixed-width bitsets over the fact
//! indices. Effects apply deletes before adds, so an operator that both
//! deletes and adds the same fact leaves it set.

use std::fmt;
use std::io::{self, Write};

/// Index of a ground atom within its task.
pub type FactId = usize;

/// Index of a ground operator within its task.
pub type OpId = usize;

/// A fixed-width bitset over the fact indices of one task.
///
/// Equality and hashing are value-based; all bits beyond the fact count stay
/// zero so two sets over the same task compare by content.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FactSet {
    blocks: Box<[u64]>,
    nbits: usize,
}

/// States are fact sets; the alias marks the places where a set plays the
/// role of a world state rather than a mask.
pub type State = FactSet;

impl FactSet {
    pub fn empty(nbits: usize) -> Self {
        FactSet {
            blocks: vec![0u64; nbits.div_ceil(64)].into_boxed_slice(),
            nbits,
        }
    }

    pub fn from_indices(nbits: usize, indices: impl IntoIterator<Item = FactId>) -> Self {
        let mut set = FactSet::empty(nbits);
        for i in indices {
            set.insert(i);
        }
        set
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    /// Width of the set, the fact count of its task.
    pub fn width(&self) -> usize {
        self.nbits
    }

    pub fn contains(&self, i: FactId) -> bool {
        debug_assert!(i < self.nbits);
        self.blocks[i / 64] & (1u64 << (i % 64)) != 0
    }

    pub fn insert(&mut self, i: FactId) {
        assert!(i < self.nbits, "fact index {i} out of range {}", self.nbits);
        self.blocks[i / 64] |= 1u64 << (i % 64);
    }

    pub fn remove(&mut self, i: FactId) {
        debug_assert!(i < self.nbits);
        self.blocks[i / 64] &= !(1u64 << (i % 64));
    }

    /// True iff every fact in `other` is also in `self`.
    pub fn is_superset(&self, other: &FactSet) -> bool {
        debug_assert_eq!(self.nbits, other.nbits);
        self.blocks
            .iter()
            .zip(other.blocks.iter())
            .all(|(a, b)| a & b == *b)
    }

    /// Indices of the set bits in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = FactId> + '_ {
        self.blocks.iter().enumerate().flat_map(|(bi, &block)| {
            let mut bits = block;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let tz = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(bi * 64 + tz)
                }
            })
        })
    }

    fn union_in_place(&mut self, other: &FactSet) {
        for (a, b) in self.blocks.iter_mut().zip(other.blocks.iter()) {
            *a |= b;
        }
    }

    fn subtract_in_place(&mut self, other: &FactSet) {
        for (a, b) in self.blocks.iter_mut().zip(other.blocks.iter()) {
            *a &= !b;
        }
    }
}

impl fmt::Debug for FactSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A ground action instantiation with its effect sets as masks.
#[derive(Debug, Clone)]
pub struct GroundOperator {
    /// VAL-style display name, `(action arg1 arg2)`.
    pub name: String,
    pub precondition: FactSet,
    pub add: FactSet,
    pub delete: FactSet,
    pub cost: u64,
}

/// A grounded STRIPS task: indexed facts and operators, initial state and
/// goal.
#[derive(Debug, Clone)]
pub struct GroundTask {
    /// Display names of the ground atoms, `(predicate arg1 arg2)`, in index
    /// order.
    pub facts: Vec<String>,
    pub operators: Vec<GroundOperator>,
    pub init: State,
    pub goal: FactSet,
    /// Set when some goal atom is unreachable even ignoring deletes; such a
    /// task has no plan and `is_goal` never holds.
    pub unsolvable: bool,
}

/// An ordered list of operator indices, applied from the initial state.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Plan {
    pub steps: Vec<OpId>,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

impl GroundTask {
    /// Builds a task from parts, validating that every mask fits the fact
    /// universe. Intended for programmatic construction of small tasks; PDDL
    /// input goes through [`crate::pddl::ground`].
    pub fn new(
        facts: Vec<String>,
        operators: Vec<GroundOperator>,
        init: State,
        goal: FactSet,
    ) -> Self {
        let n = facts.len();
        assert_eq!(init.width(), n);
        assert_eq!(goal.width(), n);
        for op in &operators {
            assert_eq!(op.precondition.width(), n, "operator {}", op.name);
            assert_eq!(op.add.width(), n, "operator {}", op.name);
            assert_eq!(op.delete.width(), n, "operator {}", op.name);
        }
        GroundTask {
            facts,
            operators,
            init,
            goal,
            unsolvable: false,
        }
    }

    pub fn fact_count(&self) -> usize {
        self.facts.len()
    }

    pub fn operator_count(&self) -> usize {
        self.operators.len()
    }

    /// Index of a fact by display name, for tests and tooling.
    pub fn fact_id(&self, name: &str) -> Option<FactId> {
        self.facts.iter().position(|f| f == name)
    }

    /// Index of an operator by display name.
    pub fn operator_id(&self, name: &str) -> Option<OpId> {
        self.operators.iter().position(|o| o.name == name)
    }

    /// True iff the operator's precondition holds in `state`.
    pub fn applicable(&self, state: &State, op: OpId) -> bool {
        state.is_superset(&self.operators[op].precondition)
    }

    /// Successor state: `(state \ delete) ∪ add`.
    ///
    /// Panics if the operator is not applicable.
    pub fn apply(&self, state: &State, op: OpId) -> State {
        assert!(
            self.applicable(state, op),
            "operator {} not applicable",
            self.operators[op].name
        );
        let o = &self.operators[op];
        let mut next = state.clone();
        next.subtract_in_place(&o.delete);
        next.union_in_place(&o.add);
        next
    }

    /// All applicable operators with their successor states, in ascending
    /// operator-index order.
    pub fn successors(&self, state: &State) -> Vec<(OpId, State)> {
        (0..self.operators.len())
            .filter(|&op| self.applicable(state, op))
            .map(|op| (op, self.apply(state, op)))
            .collect()
    }

    /// True iff the goal holds in `state`. Never true for a task flagged
    /// unsolvable.
    pub fn is_goal(&self, state: &State) -> bool {
        !self.unsolvable && state.is_superset(&self.goal)
    }

    /// True iff the plan is applicable step by step from the initial state
    /// and ends in a goal state.
    pub fn validate_plan(&self, plan: &Plan) -> bool {
        let mut state = self.init.clone();
        for &op in &plan.steps {
            if op >= self.operators.len() || !self.applicable(&state, op) {
                return false;
            }
            state = self.apply(&state, op);
        }
        self.is_goal(&state)
    }

    /// Writes the plan in VAL style, one parenthesized operator per line.
    pub fn write_plan<W: Write>(&self, plan: &Plan, mut out: W) -> io::Result<()> {
        for &op in &plan.steps {
            writeln!(out, "{}", self.operators[op].name)?;
        }
        Ok(())
    }
}

/// Delete-relaxed fixpoint: every atom reachable from `state` when delete
/// effects are ignored. Used by the grounder and as an independent check of
/// relaxed-plan extraction.
pub fn relaxed_reachable(task: &GroundTask, state: &State) -> FactSet {
    let mut reached = state.clone();
    loop {
        let mut changed = false;
        for op in &task.operators {
            if reached.is_superset(&op.precondition) {
                for f in op.add.iter() {
                    if !reached.contains(f) {
                        reached.insert(f);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return reached;
        }
    }
}
