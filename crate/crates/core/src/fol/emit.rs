//! Canonical text for constraint expressions.
//!
//! Quantifiers print in guard form (`forall x: d(x) -> body`,
//! `exists x: d(x) and body`), which lowers back to the same expression.
//! Every operand that is not an atom, a counting node or a negation is
//! parenthesized.

use thiserror::Error;

use crate::constraint::{Constraint, CountKind, Expr, ExprNode, Quantifier};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("constraint is not closed: variable `{0}` is unbound")]
    OpenFormula(String),
}

fn tight(expr: &Expr) -> bool {
    matches!(
        expr.node,
        ExprNode::Predicate { .. } | ExprNode::Count { .. } | ExprNode::Not { .. }
    )
}

fn operand(expr: &Expr, out: &mut String) {
    if tight(expr) {
        write_expr(expr, out);
    } else {
        out.push('(');
        write_expr(expr, out);
        out.push(')');
    }
}

fn joined(children: &[Expr], sep: &str, out: &mut String) {
    for (i, c) in children.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        operand(c, out);
    }
}

pub(crate) fn write_expr(expr: &Expr, out: &mut String) {
    match &expr.node {
        ExprNode::Predicate { name, args } => {
            out.push_str(name);
            out.push('(');
            out.push_str(&args.join(", "));
            out.push(')');
        }
        ExprNode::Not { child } => {
            out.push_str("not ");
            operand(child, out);
        }
        ExprNode::And { children } => joined(children, " and ", out),
        ExprNode::Or { children } => joined(children, " or ", out),
        ExprNode::Implies { lhs, rhs } => {
            operand(lhs, out);
            out.push_str(" -> ");
            operand(rhs, out);
        }
        ExprNode::Iff { lhs, rhs } => {
            operand(lhs, out);
            out.push_str(" <-> ");
            operand(rhs, out);
        }
        ExprNode::Quantified {
            quantifier,
            var,
            domain,
            body,
        } => {
            let (word, link) = match quantifier {
                Quantifier::ForAll => ("forall", "->"),
                Quantifier::Exists => ("exists", "and"),
            };
            out.push_str(&format!("{word} {var}: {domain}({var}) {link} "));
            operand(body, out);
        }
        ExprNode::Count { kind, k, children } => {
            match (kind, k) {
                (CountKind::Exactly, 1) => out.push_str("exactly_one("),
                _ => out.push_str(&format!("{kind}({k}, ")),
            }
            for (i, c) in children.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(c, out);
            }
            out.push(')');
        }
    }
}

pub fn format_expr(expr: &Expr) -> String {
    let mut out = String::new();
    write_expr(expr, &mut out);
    out
}

pub(crate) fn statement(expr: &Expr) -> String {
    format!("constraint {};", format_expr(expr))
}

/// Serializes a closed constraint as a `constraint ...;` statement.
pub fn emit_constraint(constraint: &Constraint) -> Result<String, EmitError> {
    if let Some(var) = constraint.expr.free_vars().into_iter().next() {
        return Err(EmitError::OpenFormula(var));
    }
    Ok(statement(&constraint.expr))
}
