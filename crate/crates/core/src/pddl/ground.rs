//! Instantiates a domain/problem pair into a [`GroundTask`].
//!
//! Action schemas are instantiated over all type-compatible object bindings
//! and pruned by a delete-relaxation reachability fixpoint: the grounded
//! fact set is exactly the set of atoms reachable from the initial state
//! when deletes are ignored, and the grounded operators are the
//! instantiations whose preconditions lie in that set. Facts and operators
//! are ordered lexicographically by name and arguments, so index assignment
//! is deterministic.

use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::PddlError;
use crate::strips::{FactSet, GroundOperator, GroundTask};

struct TypeTable {
    parent: HashMap<String, String>,
}

impl TypeTable {
    fn new(domain: &DomainAst) -> Self {
        let mut parent = HashMap::new();
        for (ty, par) in &domain.types {
            parent.insert(ty.clone(), par.clone());
        }
        TypeTable { parent }
    }

    fn is_declared(&self, ty: &str) -> bool {
        ty == "object" || self.parent.contains_key(ty)
    }

    /// True iff `ty` equals `ancestor` or derives from it; every type
    /// derives from `object`.
    fn is_subtype(&self, ty: &str, ancestor: &str) -> bool {
        if ancestor == "object" {
            return true;
        }
        let mut current = ty;
        loop {
            if current == ancestor {
                return true;
            }
            match self.parent.get(current) {
                Some(p) => current = p,
                None => return false,
            }
        }
    }
}

/// A fully instantiated action schema, prior to reachability pruning.
struct Instantiation {
    name: String,
    args: Vec<String>,
    pre: Vec<Atom>,
    add: Vec<Atom>,
    del: Vec<Atom>,
}

/// Grounds the problem against its domain.
///
/// Fails on a domain-name mismatch, undeclared names, arity or type
/// violations. A problem whose goal is unreachable even under the delete
/// relaxation grounds successfully with the `unsolvable` flag set.
pub fn ground(domain: &DomainAst, problem: &ProblemAst) -> Result<GroundTask, PddlError> {
    if domain.name != problem.domain_name {
        return Err(PddlError::DomainMismatch {
            required: problem.domain_name.clone(),
            actual: domain.name.clone(),
        });
    }

    let types = TypeTable::new(domain);

    // Objects = domain constants + problem objects, no duplicates.
    let mut objects: Vec<TypedName> = Vec::new();
    let mut object_types: HashMap<&str, &str> = HashMap::new();
    for obj in domain.constants.iter().chain(&problem.objects) {
        if !types.is_declared(&obj.ty) {
            return Err(PddlError::UndeclaredType {
                name: obj.ty.clone(),
            });
        }
        if object_types.insert(&obj.name, &obj.ty).is_some() {
            return Err(PddlError::DuplicateObject {
                name: obj.name.clone(),
            });
        }
        objects.push(obj.clone());
    }

    let predicates: HashMap<&str, &PredicateDef> = domain
        .predicates
        .iter()
        .map(|p| (p.name.as_str(), p))
        .collect();

    let check_ground_atom = |atom: &Atom| -> Result<(), PddlError> {
        let pred = predicates.get(atom.predicate.as_str()).ok_or_else(|| {
            PddlError::UndeclaredPredicate {
                name: atom.predicate.clone(),
            }
        })?;
        if pred.arity() != atom.args.len() {
            return Err(PddlError::ArityMismatch {
                name: atom.predicate.clone(),
                expected: pred.arity(),
                got: atom.args.len(),
            });
        }
        for (arg, param) in atom.args.iter().zip(&pred.params) {
            let ty = object_types
                .get(arg.as_str())
                .ok_or_else(|| PddlError::UndeclaredObject { name: arg.clone() })?;
            if !types.is_subtype(ty, &param.ty) {
                return Err(PddlError::TypeMismatch {
                    object: arg.clone(),
                    actual: ty.to_string(),
                    expected: param.ty.clone(),
                });
            }
        }
        Ok(())
    };

    for atom in problem.init.iter().chain(&problem.goal) {
        check_ground_atom(atom)?;
    }

    let instantiations = instantiate_actions(domain, &types, &objects, &object_types)?;

    // Delete-relaxation reachability fixpoint from the initial state.
    let mut reached: HashSet<Atom> = problem.init.iter().cloned().collect();
    loop {
        let mut changed = false;
        for inst in &instantiations {
            if inst.pre.iter().all(|a| reached.contains(a)) {
                for atom in &inst.add {
                    if !reached.contains(atom) {
                        reached.insert(atom.clone());
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    // Deterministic fact indices: lexicographic by predicate then arguments.
    let mut fact_atoms: Vec<Atom> = reached.iter().cloned().collect();
    fact_atoms.sort();
    let fact_ids: HashMap<&Atom, usize> =
        fact_atoms.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let nfacts = fact_atoms.len();
    let mask = |atoms: &[Atom], allow_unreachable: bool| -> FactSet {
        FactSet::from_indices(
            nfacts,
            atoms.iter().filter_map(|a| {
                let id = fact_ids.get(a).copied();
                debug_assert!(id.is_some() || allow_unreachable);
                id
            }),
        )
    };

    // Operators whose preconditions are relaxed-reachable, in lexicographic
    // order. Delete effects on unreachable atoms can never fire and are
    // dropped from the mask.
    let mut applicable: Vec<&Instantiation> = instantiations
        .iter()
        .filter(|inst| inst.pre.iter().all(|a| reached.contains(a)))
        .collect();
    applicable.sort_by(|a, b| (&a.name, &a.args).cmp(&(&b.name, &b.args)));
    let operators: Vec<GroundOperator> = applicable
        .iter()
        .map(|inst| {
            let name = if inst.args.is_empty() {
                format!("({})", inst.name)
            } else {
                format!("({} {})", inst.name, inst.args.join(" "))
            };
            GroundOperator {
                name,
                precondition: mask(&inst.pre, false),
                add: mask(&inst.add, false),
                delete: mask(&inst.del, true),
                cost: 1,
            }
        })
        .collect();

    let init = mask(&problem.init, false);
    let unsolvable = problem.goal.iter().any(|a| !reached.contains(a));
    let goal = FactSet::from_indices(
        nfacts,
        problem.goal.iter().filter_map(|a| fact_ids.get(a).copied()),
    );

    Ok(GroundTask {
        facts: fact_atoms.iter().map(|a| a.display()).collect(),
        operators,
        init,
        goal,
        unsolvable,
    })
}

fn instantiate_actions(
    domain: &DomainAst,
    types: &TypeTable,
    objects: &[TypedName],
    object_types: &HashMap<&str, &str>,
) -> Result<Vec<Instantiation>, PddlError> {
    let mut out = Vec::new();
    for action in &domain.actions {
        // Candidate objects per parameter, in declaration order.
        let candidates: Vec<Vec<&str>> = action
            .params
            .iter()
            .map(|p| {
                objects
                    .iter()
                    .filter(|o| types.is_subtype(&o.ty, &p.ty))
                    .map(|o| o.name.as_str())
                    .collect()
            })
            .collect();
        let param_index: HashMap<&str, usize> = action
            .params
            .iter()
            .enumerate()
            .map(|(i, p)| (p.name.as_str(), i))
            .collect();

        // Non-variable arguments in the schema body must be declared
        // objects (domain constants, typically).
        for lit in action
            .precondition
            .iter()
            .chain(&action.add)
            .chain(&action.delete)
        {
            for arg in &lit.args {
                if !arg.starts_with('?') && !object_types.contains_key(arg.as_str()) {
                    return Err(PddlError::UndeclaredObject { name: arg.clone() });
                }
            }
        }

        let substitute = |lit: &Literal, binding: &[&str]| -> Atom {
            Atom {
                predicate: lit.predicate.clone(),
                args: lit
                    .args
                    .iter()
                    .map(|arg| match param_index.get(arg.as_str()) {
                        Some(&i) => binding[i].to_string(),
                        None => arg.clone(),
                    })
                    .collect(),
            }
        };

        // Odometer over the candidate lists; a parameterless action yields
        // exactly one instantiation.
        if candidates.iter().any(|c| c.is_empty()) && !candidates.is_empty() {
            continue;
        }
        let mut odometer = vec![0usize; candidates.len()];
        loop {
            let binding: Vec<&str> = odometer
                .iter()
                .zip(&candidates)
                .map(|(&i, c)| c[i])
                .collect();
            out.push(Instantiation {
                name: action.name.clone(),
                args: binding.iter().map(|s| s.to_string()).collect(),
                pre: action
                    .precondition
                    .iter()
                    .map(|l| substitute(l, &binding))
                    .collect(),
                add: action.add.iter().map(|l| substitute(l, &binding)).collect(),
                del: action
                    .delete
                    .iter()
                    .map(|l| substitute(l, &binding))
                    .collect(),
            });
            // Advance the odometer.
            let mut place = odometer.len();
            loop {
                if place == 0 {
                    break;
                }
                place -= 1;
                odometer[place] += 1;
                if odometer[place] < candidates[place].len() {
                    break;
                }
                odometer[place] = 0;
            }
            if odometer.iter().all(|&i| i == 0) {
                break;
            }
        }
    }
    Ok(out)
}
