//! Abstract syntax for parsed domains and problems.

/// A name paired with its declared type; the type defaults to `object`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

/// A predicate declaration with typed parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDef {
    pub name: String,
    pub params: Vec<TypedName>,
}

impl PredicateDef {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

/// A predicate applied to arguments; arguments are `?variables` inside
/// action schemas and object names in ground atoms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub predicate: String,
    pub args: Vec<String>,
}

/// A ground atom: a predicate applied to object names.
pub type Atom = Literal;

impl Literal {
    /// VAL-style rendering, `(predicate arg1 arg2)`.
    pub fn display(&self) -> String {
        if self.args.is_empty() {
            format!("({})", self.predicate)
        } else {
            format!("({} {})", self.predicate, self.args.join(" "))
        }
    }
}

/// An action schema: typed parameters, positive conjunctive precondition,
/// add and delete lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionDef {
    pub name: String,
    pub params: Vec<TypedName>,
    pub precondition: Vec<Literal>,
    pub add: Vec<Literal>,
    pub delete: Vec<Literal>,
}

/// A parsed domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainAst {
    pub name: String,
    /// `(type, parent)` pairs; parents default to `object`.
    pub types: Vec<(String, String)>,
    /// Domain constants, available as objects in every problem.
    pub constants: Vec<TypedName>,
    pub predicates: Vec<PredicateDef>,
    pub actions: Vec<ActionDef>,
}

/// A parsed problem. Cross-validation against its domain happens at
/// grounding time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemAst {
    pub name: String,
    pub domain_name: String,
    pub objects: Vec<TypedName>,
    pub init: Vec<Atom>,
    pub goal: Vec<Atom>,
}
