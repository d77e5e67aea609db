//! Structural lowering from FOL formulas to constraint expressions.
//!
//! Lowering needs no graph. It turns guarded quantifiers into quantifiers
//! over a domain concept and rejects everything the constraint language
//! cannot express (equality, function symbols, numeric terms, unguarded
//! quantifiers) with `SEM012`.

use crate::constraint::{Expr, ExprNode, Quantifier};
use crate::diagnostic::{Code, Diagnostic};
use crate::graph::normalize_name;
use crate::span::Span;

use super::ast::{FolNode, Formula, Term};

/// Domain and remaining body of a quantifier without an explicit `in`
/// domain, following the usual guard patterns:
/// `forall x: d(x) -> body`, `forall x: d(x) and rest -> body`,
/// `exists x: d(x) and body`, and `exists x: d(x)`.
pub(crate) enum Guarded<'f> {
    Body(&'f Formula),
    /// Curried `forall` guard: `d(x) and rest -> rhs` becomes `rest -> rhs`.
    Curried { rest: Vec<&'f Formula>, rhs: &'f Formula },
    /// Remaining conjuncts of an `exists` guard.
    Conjuncts(Vec<&'f Formula>),
    /// `exists x: d(x)` alone.
    GuardOnly(&'f Formula),
}

pub(crate) fn split_guard<'f>(
    quantifier: Quantifier,
    var: &str,
    body: &'f Formula,
) -> Option<(&'f str, Guarded<'f>)> {
    match (quantifier, &body.node) {
        (Quantifier::ForAll, FolNode::Implies { lhs, rhs }) => {
            if let Some(domain) = lhs.unary_atom_on(var) {
                return Some((domain, Guarded::Body(rhs)));
            }
            if let FolNode::And { children } = &lhs.node {
                let domain = children[0].unary_atom_on(var)?;
                return Some((
                    domain,
                    Guarded::Curried {
                        rest: children[1..].iter().collect(),
                        rhs,
                    },
                ));
            }
            None
        }
        (Quantifier::Exists, FolNode::And { children }) => {
            let domain = children[0].unary_atom_on(var)?;
            Some((domain, Guarded::Conjuncts(children[1..].iter().collect())))
        }
        (Quantifier::Exists, _) => body.unary_atom_on(var).map(|d| (d, Guarded::GuardOnly(body))),
        _ => None,
    }
}

pub(crate) struct Lowering {
    pub diagnostics: Vec<Diagnostic>,
}

fn unsupported(span: &Span, message: impl Into<String>) -> Diagnostic {
    Diagnostic::new(Code::Sem012, span.or_origin(), message)
}

impl Lowering {
    pub fn new() -> Self {
        Lowering {
            diagnostics: Vec::new(),
        }
    }

    fn seq(&mut self, parts: &[&Formula], build: fn(Vec<Expr>) -> Expr) -> Option<Expr> {
        let mut out = Vec::with_capacity(parts.len());
        let mut ok = true;
        for p in parts {
            match self.lower(p) {
                Some(e) => out.push(e),
                None => ok = false,
            }
        }
        if !ok {
            return None;
        }
        if out.len() == 1 {
            out.pop()
        } else {
            Some(build(out))
        }
    }

    /// Lowers `formula`, recording every unsupported construct. Returns
    /// `None` when any part failed.
    pub fn lower(&mut self, formula: &Formula) -> Option<Expr> {
        let span = formula.span.clone();
        let expr = match &formula.node {
            FolNode::Atom { name, args } => {
                let mut vars = Vec::with_capacity(args.len());
                for arg in args {
                    match arg {
                        Term::Var { name, .. } => vars.push(name.clone()),
                        Term::App { name: f, span, .. } => {
                            self.diagnostics.push(unsupported(
                                span,
                                format!("function symbol `{f}` is not a supported operation"),
                            ));
                            return None;
                        }
                        Term::Number { value, span } => {
                            self.diagnostics.push(unsupported(
                                span,
                                format!("numeric constant `{value}` is not a supported operation"),
                            ));
                            return None;
                        }
                    }
                }
                Expr::from(ExprNode::Predicate {
                    name: normalize_name(name),
                    args: vars,
                })
            }
            FolNode::Equals { negated, .. } => {
                let op = if *negated { "inequality" } else { "equality" };
                self.diagnostics.push(unsupported(
                    &span,
                    format!("{op} between variables is not a supported operation"),
                ));
                return None;
            }
            FolNode::Not { child } => Expr::negate(self.lower(child)?),
            FolNode::And { children } => {
                let parts: Vec<&Formula> = children.iter().collect();
                self.seq(&parts, Expr::and)?
            }
            FolNode::Or { children } => {
                let parts: Vec<&Formula> = children.iter().collect();
                self.seq(&parts, Expr::or)?
            }
            FolNode::Implies { lhs, rhs } => {
                let (l, r) = (self.lower(lhs), self.lower(rhs));
                Expr::implies(l?, r?)
            }
            FolNode::Iff { lhs, rhs } => {
                let (l, r) = (self.lower(lhs), self.lower(rhs));
                Expr::iff(l?, r?)
            }
            FolNode::Count { kind, k, children } => {
                let mut out = Vec::new();
                let mut ok = true;
                for c in children {
                    match self.lower(c) {
                        Some(e) => out.push(e),
                        None => ok = false,
                    }
                }
                if !ok {
                    return None;
                }
                Expr::count(*kind, *k as usize, out)
            }
            FolNode::Quantified {
                quantifier,
                var,
                domain,
                body,
            } => {
                let (domain, lowered) = match domain {
                    Some(d) => (d.as_str(), self.lower(body)),
                    None => match split_guard(*quantifier, var, body) {
                        Some((d, Guarded::Body(rest))) => (d, self.lower(rest)),
                        Some((d, Guarded::Curried { rest, rhs })) => {
                            let lhs = self.seq(&rest, Expr::and);
                            let rhs = self.lower(rhs);
                            (d, lhs.zip(rhs).map(|(l, r)| Expr::implies(l, r)))
                        }
                        Some((d, Guarded::Conjuncts(rest))) => (d, self.seq(&rest, Expr::and)),
                        Some((d, Guarded::GuardOnly(guard))) => (d, self.lower(guard)),
                        None => {
                            let shape = match quantifier {
                                Quantifier::ForAll => format!("forall {var}: concept({var}) -> ..."),
                                Quantifier::Exists => format!("exists {var}: concept({var}) and ..."),
                            };
                            self.diagnostics.push(
                                unsupported(
                                    &span,
                                    format!("quantifier over `{var}` has no domain concept"),
                                )
                                .with_hint(format!("restrict the variable to a concept, as in `{shape}`")),
                            );
                            return None;
                        }
                    },
                };
                let body = lowered?;
                ExprNode::Quantified {
                    quantifier: *quantifier,
                    var: var.clone(),
                    domain: normalize_name(domain),
                    body: Box::new(body),
                }
                .into()
            }
        };
        Some(expr.with_span(span))
    }
}
