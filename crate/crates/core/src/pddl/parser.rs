//! Recursive-descent parser for the supported PDDL subset.

use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::lexer::{tokenize, Token, TokenKind};
use super::PddlError;

const SUPPORTED_REQUIREMENTS: &[&str] = &[":strips", ":typing"];

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, PddlError> {
        Ok(Parser {
            tokens: tokenize(text)?,
            pos: 0,
        })
    }

    fn eof_error(&self, expected: &str) -> PddlError {
        let (line, col) = self
            .tokens
            .last()
            .map(|t| (t.line, t.col))
            .unwrap_or((1, 1));
        PddlError::Syntax {
            line,
            col,
            message: format!("unexpected end of input, expected {expected}"),
        }
    }

    fn syntax_error(&self, token: &Token, message: String) -> PddlError {
        PddlError::Syntax {
            line: token.line,
            col: token.col,
            message,
        }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn advance(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect_lparen(&mut self) -> Result<Token, PddlError> {
        match self.advance() {
            Some(t) if t.kind == TokenKind::LParen => Ok(t),
            Some(t) => Err(self.syntax_error(&t, "expected `(`".to_string())),
            None => Err(self.eof_error("`(`")),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), PddlError> {
        match self.advance() {
            Some(t) if t.kind == TokenKind::RParen => Ok(()),
            Some(t) => Err(self.syntax_error(&t, "expected `)`".to_string())),
            None => Err(self.eof_error("`)`")),
        }
    }

    fn expect_word(&mut self, what: &str) -> Result<(String, Token), PddlError> {
        match self.advance() {
            Some(t) => match &t.kind {
                TokenKind::Word(w) => Ok((w.clone(), t.clone())),
                _ => Err(self.syntax_error(&t, format!("expected {what}"))),
            },
            None => Err(self.eof_error(what)),
        }
    }

    fn expect_keyword(&mut self, keyword: &str) -> Result<(), PddlError> {
        let (w, t) = self.expect_word(&format!("`{keyword}`"))?;
        if w == keyword {
            Ok(())
        } else {
            Err(self.syntax_error(&t, format!("expected `{keyword}`, found `{w}`")))
        }
    }

    fn at_rparen(&self) -> bool {
        matches!(
            self.peek(),
            Some(Token {
                kind: TokenKind::RParen,
                ..
            })
        )
    }

    fn expect_end(&mut self) -> Result<(), PddlError> {
        match self.advance() {
            None => Ok(()),
            Some(t) => Err(self.syntax_error(&t, "trailing input after definition".to_string())),
        }
    }

    /// Parses `name* [- type]` groups until the closing paren (not
    /// consumed). Untyped names default to `object`.
    fn typed_list(&mut self, what: &str) -> Result<Vec<TypedName>, PddlError> {
        let mut out = Vec::new();
        let mut pending: Vec<String> = Vec::new();
        loop {
            if self.at_rparen() {
                break;
            }
            let (w, t) = self.expect_word(what)?;
            if w == "-" {
                let (ty, _) = self.expect_word("type name")?;
                if pending.is_empty() {
                    return Err(self.syntax_error(&t, "type with no names before `-`".to_string()));
                }
                for name in pending.drain(..) {
                    out.push(TypedName {
                        name,
                        ty: ty.clone(),
                    });
                }
            } else {
                pending.push(w);
            }
        }
        for name in pending {
            out.push(TypedName {
                name,
                ty: "object".to_string(),
            });
        }
        Ok(out)
    }

    /// Parses one `(predicate arg*)` where the open paren is next.
    /// Connective heads (`not`, `and`, ADL forms) are rejected as
    /// unsupported in `context`.
    fn literal(&mut self, context: &str) -> Result<(Literal, Token), PddlError> {
        let open = self.expect_lparen()?;
        let (predicate, t) = self.expect_word("predicate name")?;
        if predicate.starts_with(':') || predicate.starts_with('?') {
            return Err(self.syntax_error(&t, format!("invalid predicate name `{predicate}`")));
        }
        self.reject_connective(&predicate, &t, context)?;
        let mut args = Vec::new();
        while !self.at_rparen() {
            let (arg, _) = self.expect_word("argument")?;
            args.push(arg);
        }
        self.expect_rparen()?;
        Ok((Literal { predicate, args }, open))
    }

    /// A conjunction of positive literals: `()`, a single atom, or
    /// `(and atom*)`. Connectives other than `and` are unsupported.
    fn positive_conjunction(&mut self, context: &str) -> Result<Vec<Literal>, PddlError> {
        let _open = self.expect_lparen()?;
        if self.at_rparen() {
            self.expect_rparen()?;
            return Ok(Vec::new());
        }
        let (head, head_tok) = self.expect_word("predicate or `and`")?;
        if head == "and" {
            let mut literals = Vec::new();
            while !self.at_rparen() {
                let (lit, _) = self.literal(context)?;
                literals.push(lit);
            }
            self.expect_rparen()?;
            Ok(literals)
        } else {
            self.reject_connective(&head, &head_tok, context)?;
            let mut args = Vec::new();
            while !self.at_rparen() {
                let (arg, _) = self.expect_word("argument")?;
                args.push(arg);
            }
            self.expect_rparen()?;
            Ok(vec![Literal {
                predicate: head,
                args,
            }])
        }
    }

    fn reject_connective(&self, head: &str, token: &Token, context: &str) -> Result<(), PddlError> {
        let feature = match head {
            "not" => Some(format!("negative literals in {context}")),
            "or" | "imply" | "exists" | "forall" | "when" => {
                Some(format!("`{head}` in {context} (ADL)"))
            }
            "=" => Some(format!("equality in {context}")),
            "increase" | "decrease" | "assign" => Some("numeric fluents".to_string()),
            _ => None,
        };
        match feature {
            Some(feature) => Err(PddlError::Unsupported {
                line: token.line,
                col: token.col,
                feature,
            }),
            None => Ok(()),
        }
    }

    /// `(and lit*)`, a single literal, or `()`; `(not atom)` marks a delete
    /// effect.
    fn effect(&mut self) -> Result<(Vec<Literal>, Vec<Literal>), PddlError> {
        let mut add = Vec::new();
        let mut delete = Vec::new();
        self.expect_lparen()?;
        if self.at_rparen() {
            self.expect_rparen()?;
            return Ok((add, delete));
        }
        let (head, head_tok) = self.expect_word("effect")?;
        if head == "and" {
            while !self.at_rparen() {
                self.one_effect(&mut add, &mut delete)?;
            }
            self.expect_rparen()?;
        } else {
            self.unconjoined_effect(head, head_tok, &mut add, &mut delete)?;
        }
        Ok((add, delete))
    }

    fn one_effect(
        &mut self,
        add: &mut Vec<Literal>,
        delete: &mut Vec<Literal>,
    ) -> Result<(), PddlError> {
        self.expect_lparen()?;
        let (head, head_tok) = self.expect_word("effect")?;
        self.unconjoined_effect(head, head_tok, add, delete)
    }

    /// Body of one effect whose opening paren and head word are consumed.
    fn unconjoined_effect(
        &mut self,
        head: String,
        head_tok: Token,
        add: &mut Vec<Literal>,
        delete: &mut Vec<Literal>,
    ) -> Result<(), PddlError> {
        match head.as_str() {
            "not" => {
                let (lit, _) = self.literal("delete effects")?;
                self.expect_rparen()?;
                delete.push(lit);
            }
            "when" | "forall" => Err(PddlError::Unsupported {
                line: head_tok.line,
                col: head_tok.col,
                feature: format!("`{head}` effects (ADL)"),
            })?,
            "increase" | "decrease" | "assign" => Err(PddlError::Unsupported {
                line: head_tok.line,
                col: head_tok.col,
                feature: "numeric effects (action costs)".to_string(),
            })?,
            _ => {
                let mut args = Vec::new();
                while !self.at_rparen() {
                    let (arg, _) = self.expect_word("argument")?;
                    args.push(arg);
                }
                self.expect_rparen()?;
                add.push(Literal {
                    predicate: head,
                    args,
                });
            }
        }
        Ok(())
    }

    fn requirements(&mut self) -> Result<(), PddlError> {
        while !self.at_rparen() {
            let (req, tok) = self.expect_word("requirement")?;
            if !SUPPORTED_REQUIREMENTS.contains(&req.as_str()) {
                return Err(PddlError::Unsupported {
                    line: tok.line,
                    col: tok.col,
                    feature: format!("requirement {req}"),
                });
            }
        }
        self.expect_rparen()
    }

    fn action(&mut self) -> Result<ActionDef, PddlError> {
        let (name, _) = self.expect_word("action name")?;
        self.expect_keyword(":parameters")?;
        self.expect_lparen()?;
        let params = self.typed_list("parameter")?;
        self.expect_rparen()?;

        let mut precondition = Vec::new();
        let mut add = Vec::new();
        let mut delete = Vec::new();
        let mut saw_effect = false;
        while !self.at_rparen() {
            let (section, tok) = self.expect_word("`:precondition` or `:effect`")?;
            match section.as_str() {
                ":precondition" => precondition = self.positive_conjunction("preconditions")?,
                ":effect" => {
                    (add, delete) = self.effect()?;
                    saw_effect = true;
                }
                other => {
                    return Err(self.syntax_error(&tok, format!("unexpected `{other}` in action")))
                }
            }
        }
        self.expect_rparen()?;
        if !saw_effect {
            return Err(PddlError::Syntax {
                line: 0,
                col: 0,
                message: format!("action `{name}` has no :effect"),
            });
        }
        Ok(ActionDef {
            name,
            params,
            precondition,
            add,
            delete,
        })
    }
}

/// Parses a domain definition and validates its internal invariants:
/// declared predicates with matching arity, declared parameter types, and
/// unique parameter names per action.
pub fn parse_domain(text: &str) -> Result<DomainAst, PddlError> {
    let mut p = Parser::new(text)?;
    p.expect_lparen()?;
    p.expect_keyword("define")?;
    p.expect_lparen()?;
    p.expect_keyword("domain")?;
    let (name, _) = p.expect_word("domain name")?;
    p.expect_rparen()?;

    let mut domain = DomainAst {
        name,
        types: Vec::new(),
        constants: Vec::new(),
        predicates: Vec::new(),
        actions: Vec::new(),
    };

    while !p.at_rparen() {
        p.expect_lparen()?;
        let (section, tok) = p.expect_word("domain section")?;
        match section.as_str() {
            ":requirements" => p.requirements()?,
            ":types" => {
                let typed = p.typed_list("type name")?;
                p.expect_rparen()?;
                domain
                    .types
                    .extend(typed.into_iter().map(|t| (t.name, t.ty)));
            }
            ":constants" => {
                domain.constants = p.typed_list("constant name")?;
                p.expect_rparen()?;
            }
            ":predicates" => {
                while !p.at_rparen() {
                    p.expect_lparen()?;
                    let (pred_name, _) = p.expect_word("predicate name")?;
                    let params = p.typed_list("parameter")?;
                    p.expect_rparen()?;
                    domain.predicates.push(PredicateDef {
                        name: pred_name,
                        params,
                    });
                }
                p.expect_rparen()?;
            }
            ":action" => {
                let action = p.action()?;
                domain.actions.push(action);
            }
            ":functions" | ":derived" | ":axioms" => {
                return Err(PddlError::Unsupported {
                    line: tok.line,
                    col: tok.col,
                    feature: format!("section {section}"),
                })
            }
            other => {
                return Err(p.syntax_error(&tok, format!("unknown domain section `{other}`")));
            }
        }
    }
    p.expect_rparen()?;
    p.expect_end()?;
    validate_domain(&domain)?;
    Ok(domain)
}

/// Parses a problem definition. Validation against a domain is deferred to
/// grounding; only structural checks happen here.
pub fn parse_problem(text: &str) -> Result<ProblemAst, PddlError> {
    let mut p = Parser::new(text)?;
    p.expect_lparen()?;
    p.expect_keyword("define")?;
    p.expect_lparen()?;
    p.expect_keyword("problem")?;
    let (name, _) = p.expect_word("problem name")?;
    p.expect_rparen()?;

    let mut domain_name = None;
    let mut objects = Vec::new();
    let mut init = Vec::new();
    let mut goal = None;

    while !p.at_rparen() {
        p.expect_lparen()?;
        let (section, tok) = p.expect_word("problem section")?;
        match section.as_str() {
            ":domain" => {
                let (d, _) = p.expect_word("domain name")?;
                p.expect_rparen()?;
                domain_name = Some(d);
            }
            ":objects" => {
                objects = p.typed_list("object name")?;
                p.expect_rparen()?;
            }
            ":init" => {
                while !p.at_rparen() {
                    let (lit, open) = p.literal("init")?;
                    require_ground(&lit, &open)?;
                    init.push(lit);
                }
                p.expect_rparen()?;
            }
            ":goal" => {
                let literals = p.positive_conjunction("goals")?;
                p.expect_rparen()?;
                goal = Some(literals);
            }
            ":metric" => {
                return Err(PddlError::Unsupported {
                    line: tok.line,
                    col: tok.col,
                    feature: "metric minimization".to_string(),
                })
            }
            other => {
                return Err(p.syntax_error(&tok, format!("unknown problem section `{other}`")));
            }
        }
    }
    p.expect_rparen()?;
    p.expect_end()?;

    let domain_name = domain_name.ok_or(PddlError::Syntax {
        line: 1,
        col: 1,
        message: "problem has no (:domain ...) section".to_string(),
    })?;
    let goal = goal.ok_or(PddlError::Syntax {
        line: 1,
        col: 1,
        message: "problem has no (:goal ...) section".to_string(),
    })?;
    for atom in &goal {
        require_ground(
            atom,
            &Token {
                kind: TokenKind::LParen,
                line: 1,
                col: 1,
            },
        )?;
    }

    Ok(ProblemAst {
        name,
        domain_name,
        objects,
        init,
        goal,
    })
}

fn require_ground(lit: &Literal, at: &Token) -> Result<(), PddlError> {
    if let Some(var) = lit.args.iter().find(|a| a.starts_with('?')) {
        return Err(PddlError::Syntax {
            line: at.line,
            col: at.col,
            message: format!("variable `{var}` in ground atom {}", lit.display()),
        });
    }
    Ok(())
}

fn validate_domain(domain: &DomainAst) -> Result<(), PddlError> {
    let mut declared_types: HashSet<&str> = HashSet::from(["object"]);
    for (ty, _) in &domain.types {
        declared_types.insert(ty);
    }
    for (_, parent) in &domain.types {
        if !declared_types.contains(parent.as_str()) {
            return Err(PddlError::UndeclaredType {
                name: parent.clone(),
            });
        }
    }
    let check_type = |ty: &str| -> Result<(), PddlError> {
        if declared_types.contains(ty) {
            Ok(())
        } else {
            Err(PddlError::UndeclaredType {
                name: ty.to_string(),
            })
        }
    };

    let mut arities: HashMap<&str, usize> = HashMap::new();
    for pred in &domain.predicates {
        for param in &pred.params {
            check_type(&param.ty)?;
        }
        arities.insert(&pred.name, pred.arity());
    }
    for constant in &domain.constants {
        check_type(&constant.ty)?;
    }

    let check_literal = |lit: &Literal| -> Result<(), PddlError> {
        match arities.get(lit.predicate.as_str()) {
            None => Err(PddlError::UndeclaredPredicate {
                name: lit.predicate.clone(),
            }),
            Some(&expected) if expected != lit.args.len() => Err(PddlError::ArityMismatch {
                name: lit.predicate.clone(),
                expected,
                got: lit.args.len(),
            }),
            Some(_) => Ok(()),
        }
    };

    for action in &domain.actions {
        let mut seen = HashSet::new();
        for param in &action.params {
            check_type(&param.ty)?;
            if !seen.insert(param.name.as_str()) {
                return Err(PddlError::DuplicateParameter {
                    name: param.name.clone(),
                    action: action.name.clone(),
                });
            }
        }
        for lit in action
            .precondition
            .iter()
            .chain(&action.add)
            .chain(&action.delete)
        {
            check_literal(lit)?;
        }
    }
    Ok(())
}
