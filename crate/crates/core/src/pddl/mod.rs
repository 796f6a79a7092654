//! PDDL frontend for the STRIPS-with-typing subset.
//!
//! Supported: `:strips`, `:typing`, domain constants, positive conjunctive
//! preconditions and goals, add/delete effects. Everything else — ADL,
//! conditional effects, negative preconditions, numeric fluents, axioms,
//! action costs — is rejected with an error naming the feature rather than
//! skipped.
//!
//! Identifiers are case-insensitive and normalized to lower case; input is
//! UTF-8 text.

mod ast;
mod ground;
mod lexer;
mod parser;

pub use ast::{ActionDef, Atom, DomainAst, Literal, PredicateDef, ProblemAst, TypedName};
pub use ground::ground;
pub use parser::{parse_domain, parse_problem};

use thiserror::Error;

/// Errors from parsing or grounding PDDL input.
#[derive(Debug, Error)]
pub enum PddlError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax {
        line: u32,
        col: u32,
        message: String,
    },
    #[error("{line}:{col}: unsupported feature: {feature}")]
    Unsupported {
        line: u32,
        col: u32,
        feature: String,
    },
    #[error("undeclared predicate `{name}`")]
    UndeclaredPredicate { name: String },
    #[error("predicate `{name}` expects {expected} arguments, got {got}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("undeclared type `{name}`")]
    UndeclaredType { name: String },
    #[error("undeclared object `{name}`")]
    UndeclaredObject { name: String },
    #[error("object `{name}` declared more than once")]
    DuplicateObject { name: String },
    #[error("object `{object}` of type `{actual}` where `{expected}` is required")]
    TypeMismatch {
        object: String,
        actual: String,
        expected: String,
    },
    #[error("duplicate parameter `{name}` in action `{action}`")]
    DuplicateParameter { name: String, action: String },
    #[error("problem requires domain `{required}` but domain is `{actual}`")]
    DomainMismatch { required: String, actual: String },
}
