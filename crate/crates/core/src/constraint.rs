//! Logical constraints over concept predicates.
//!
//! A [`Constraint`] is a closed formula built from concept predicates,
//! Boolean connectives, quantifiers over a domain concept and counting
//! nodes. [`Model`] gives the formulas a finite-model semantics so compiled
//! constraints can be checked by enumeration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::span::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountKind {
    Exactly,
    AtMost,
    AtLeast,
}

impl CountKind {
    pub fn admits(self, k: usize, count: usize) -> bool {
        match self {
            CountKind::Exactly => count == k,
            CountKind::AtMost => count <= k,
            CountKind::AtLeast => count >= k,
        }
    }
}

impl fmt::Display for CountKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountKind::Exactly => "exactly",
            CountKind::AtMost => "at_most",
            CountKind::AtLeast => "at_least",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantifier {
    ForAll,
    Exists,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ExprNode {
    Predicate {
        name: String,
        args: Vec<String>,
    },
    Not {
        child: Box<Expr>,
    },
    And {
        children: Vec<Expr>,
    },
    Or {
        children: Vec<Expr>,
    },
    Implies {
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Iff {
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Quantified {
        quantifier: Quantifier,
        var: String,
        domain: String,
        body: Box<Expr>,
    },
    Count {
        kind: CountKind,
        k: usize,
        children: Vec<Expr>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Expr {
    #[serde(flatten)]
    pub node: ExprNode,
    #[serde(default, skip_serializing)]
    pub span: Span,
}

impl From<ExprNode> for Expr {
    fn from(node: ExprNode) -> Self {
        Expr { node, span: Span::NONE }
    }
}

impl Expr {
    pub fn pred<'a>(name: &str, args: impl IntoIterator<Item = &'a str>) -> Expr {
        ExprNode::Predicate {
            name: name.to_string(),
            args: args.into_iter().map(str::to_string).collect(),
        }
        .into()
    }

    pub fn negate(child: Expr) -> Expr {
        ExprNode::Not { child: Box::new(child) }.into()
    }

    pub fn and(children: Vec<Expr>) -> Expr {
        ExprNode::And { children }.into()
    }

    pub fn or(children: Vec<Expr>) -> Expr {
        ExprNode::Or { children }.into()
    }

    pub fn implies(lhs: Expr, rhs: Expr) -> Expr {
        ExprNode::Implies {
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
        .into()
    }

    pub fn iff(lhs: Expr, rhs: Expr) -> Expr {
        ExprNode::Iff {
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
        .into()
    }

    pub fn forall(var: &str, domain: &str, body: Expr) -> Expr {
        Expr::quantified(Quantifier::ForAll, var, domain, body)
    }

    pub fn exists(var: &str, domain: &str, body: Expr) -> Expr {
        Expr::quantified(Quantifier::Exists, var, domain, body)
    }

    fn quantified(quantifier: Quantifier, var: &str, domain: &str, body: Expr) -> Expr {
        ExprNode::Quantified {
            quantifier,
            var: var.to_string(),
            domain: domain.to_string(),
            body: Box::new(body),
        }
        .into()
    }

    pub fn count(kind: CountKind, k: usize, children: Vec<Expr>) -> Expr {
        ExprNode::Count { kind, k, children }.into()
    }

    pub fn exactly_one(children: Vec<Expr>) -> Expr {
        Expr::count(CountKind::Exactly, 1, children)
    }

    pub fn with_span(mut self, span: Span) -> Expr {
        self.span = span;
        self
    }

    /// Direct subexpressions, left to right.
    pub fn children(&self) -> Vec<&Expr> {
        match &self.node {
            ExprNode::Predicate { .. } => Vec::new(),
            ExprNode::Not { child } => vec![child],
            ExprNode::And { children } | ExprNode::Or { children } | ExprNode::Count { children, .. } => {
                children.iter().collect()
            }
            ExprNode::Implies { lhs, rhs } | ExprNode::Iff { lhs, rhs } => vec![lhs, rhs],
            ExprNode::Quantified { body, .. } => vec![body],
        }
    }

    /// Pre-order walk.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Expr)) {
        visit(self);
        for child in self.children() {
            child.walk(visit);
        }
    }

    /// Variables used by predicates without an enclosing quantifier.
    pub fn free_vars(&self) -> BTreeSet<String> {
        fn go(expr: &Expr, bound: &mut Vec<String>, free: &mut BTreeSet<String>) {
            match &expr.node {
                ExprNode::Predicate { args, .. } => {
                    for arg in args {
                        if !bound.contains(arg) {
                            free.insert(arg.clone());
                        }
                    }
                }
                ExprNode::Quantified { var, body, .. } => {
                    bound.push(var.clone());
                    go(body, bound, free);
                    bound.pop();
                }
                _ => {
                    for child in expr.children() {
                        go(child, bound, free);
                    }
                }
            }
        }
        let mut free = BTreeSet::new();
        go(self, &mut Vec::new(), &mut free);
        free
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Truth value in `model`. Fails on variables that are not bound.
    pub fn evaluate(&self, model: &Model) -> Result<bool, UnboundVariable> {
        self.eval_in(model, &mut Vec::new())
    }

    fn eval_in(&self, model: &Model, env: &mut Vec<(String, usize)>) -> Result<bool, UnboundVariable> {
        Ok(match &self.node {
            ExprNode::Predicate { name, args } => {
                let objects = args
                    .iter()
                    .map(|a| {
                        env.iter()
                            .rev()
                            .find(|(v, _)| v == a)
                            .map(|(_, o)| *o)
                            .ok_or_else(|| UnboundVariable(a.clone()))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                model.holds(name, &objects)
            }
            ExprNode::Not { child } => !child.eval_in(model, env)?,
            ExprNode::And { children } => {
                for c in children {
                    if !c.eval_in(model, env)? {
                        return Ok(false);
                    }
                }
                true
            }
            ExprNode::Or { children } => {
                for c in children {
                    if c.eval_in(model, env)? {
                        return Ok(true);
                    }
                }
                false
            }
            ExprNode::Implies { lhs, rhs } => !lhs.eval_in(model, env)? || rhs.eval_in(model, env)?,
            ExprNode::Iff { lhs, rhs } => lhs.eval_in(model, env)? == rhs.eval_in(model, env)?,
            ExprNode::Quantified {
                quantifier,
                var,
                domain,
                body,
            } => {
                let mut result = *quantifier == Quantifier::ForAll;
                for obj in 0..model.size() {
                    if !model.holds(domain, &[obj]) {
                        continue;
                    }
                    env.push((var.clone(), obj));
                    let value = body.eval_in(model, env);
                    env.pop();
                    let value = value?;
                    match quantifier {
                        Quantifier::ForAll if !value => {
                            result = false;
                            break;
                        }
                        Quantifier::Exists if value => {
                            result = true;
                            break;
                        }
                        _ => {}
                    }
                }
                result
            }
            ExprNode::Count { kind, k, children } => {
                let mut count = 0;
                for c in children {
                    if c.eval_in(model, env)? {
                        count += 1;
                    }
                }
                kind.admits(*k, count)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("variable `{0}` is not bound")]
pub struct UnboundVariable(pub String);

/// A declared constraint statement.
///
/// Equality compares the formula only; the span and the original text are
/// provenance.
#[derive(Debug, Clone, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub expr: Expr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_text: Option<String>,
    #[serde(default, skip_serializing)]
    pub span: Span,
}

impl Constraint {
    pub fn new(expr: Expr) -> Self {
        Constraint {
            expr,
            source_text: None,
            span: Span::NONE,
        }
    }

    pub fn with_source(mut self, text: impl Into<String>) -> Self {
        self.source_text = Some(text.into());
        self
    }
}

impl PartialEq for Constraint {
    fn eq(&self, other: &Self) -> bool {
        self.expr == other.expr
    }
}

/// Finite interpretation: a universe `0..size` plus predicate extensions.
/// Predicates absent from the model are false everywhere.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Model {
    size: usize,
    /// Tuples of every arity under one name; a tuple's length is its arity.
    relations: BTreeMap<String, BTreeSet<Vec<usize>>>,
}

impl Model {
    pub fn new(size: usize) -> Self {
        Model {
            size,
            relations: BTreeMap::new(),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn set(&mut self, predicate: &str, tuple: &[usize]) {
        debug_assert!(tuple.iter().all(|&o| o < self.size));
        self.relations
            .entry(predicate.to_string())
            .or_default()
            .insert(tuple.to_vec());
    }

    pub fn holds(&self, predicate: &str, tuple: &[usize]) -> bool {
        self.relations
            .get(predicate)
            .is_some_and(|ext| ext.contains(tuple))
    }
}
