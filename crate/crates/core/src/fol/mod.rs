//! First-order logic front end: parsing, predicate extraction and
//! compilation into graph-grounded constraints.

mod ast;
mod emit;
mod lower;
mod parse;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ast::{FolNode, Formula, Term};
pub use emit::{emit_constraint, format_expr, EmitError};
pub(crate) use emit::statement;
pub(crate) use parse::parse_formula;
pub use parse::{parse_fol, parse_fol_file, FolLine, FolParse};

use crate::constraint::Constraint;
use crate::diagnostic::Diagnostic;
use crate::graph::ConceptGraph;
use crate::validator;

pub(crate) use lower::Lowering;
use lower::split_guard;

/// Name and arity of a predicate used in a formula, with the domain concept
/// of each argument variable where one is known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateSig {
    pub name: String,
    pub arity: usize,
    pub binding_concepts: Vec<Option<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("predicate `{0}` is used with different arities")]
pub struct InconsistentArity(pub String);

/// Predicates in order of first occurrence, one per name.
pub fn extract_predicates(formula: &Formula) -> Result<Vec<PredicateSig>, InconsistentArity> {
    fn go<'f>(
        f: &'f Formula,
        scope: &mut Vec<(&'f str, Option<&'f str>)>,
        out: &mut Vec<PredicateSig>,
    ) -> Result<(), InconsistentArity> {
        match &f.node {
            FolNode::Atom { name, args } => {
                let binding = args
                    .iter()
                    .map(|a| {
                        let var = a.as_var()?;
                        scope.iter().rev().find(|(v, _)| *v == var)?.1.map(str::to_string)
                    })
                    .collect();
                match out.iter().find(|s| &s.name == name) {
                    Some(sig) if sig.arity != args.len() => return Err(InconsistentArity(name.clone())),
                    Some(_) => {}
                    None => out.push(PredicateSig {
                        name: name.clone(),
                        arity: args.len(),
                        binding_concepts: binding,
                    }),
                }
                Ok(())
            }
            FolNode::Quantified {
                quantifier,
                var,
                domain,
                body,
            } => {
                let domain = domain
                    .as_deref()
                    .or_else(|| split_guard(*quantifier, var, body).map(|(d, _)| d));
                scope.push((var, domain));
                let result = go(body, scope, out);
                scope.pop();
                result
            }
            _ => f.children().into_iter().try_for_each(|c| go(c, scope, out)),
        }
    }
    let mut out = Vec::new();
    go(formula, &mut Vec::new(), &mut out)?;
    Ok(out)
}

/// Outcome of compiling one formula against a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Compiled {
    pub constraint: Option<Constraint>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Compiled {
    pub fn is_ok(&self) -> bool {
        self.constraint.is_some()
    }
}

/// Grounds `formula` in `graph`. The constraint is absent when any error
/// diagnostic was produced; warnings do not block compilation.
pub fn compile_fol(formula: &Formula, source_text: &str, graph: &ConceptGraph) -> Compiled {
    let mut lowering = Lowering::new();
    let lowered = lowering.lower(formula);
    let mut diagnostics = lowering.diagnostics;
    let constraint = lowered.map(|expr| Constraint {
        expr,
        source_text: Some(source_text.trim().to_string()),
        span: formula.span.clone(),
    });
    if let Some(c) = &constraint {
        diagnostics.extend(validator::constraint_diagnostics(graph, c));
    }
    crate::diagnostic::sort_diagnostics(&mut diagnostics);
    let constraint = constraint.filter(|_| !diagnostics.iter().any(Diagnostic::is_error));
    Compiled {
        constraint,
        diagnostics,
    }
}

/// Parses and compiles every formula of a `.fol` document.
pub fn compile_fol_text(text: &str, graph: &ConceptGraph) -> (Vec<Constraint>, Vec<Diagnostic>) {
    let mut constraints = Vec::new();
    let mut diagnostics = Vec::new();
    for line in parse_fol_file(text) {
        diagnostics.extend(line.parse.diagnostics.iter().cloned());
        if let Some(formula) = &line.parse.formula {
            let compiled = compile_fol(formula, &line.text, graph);
            diagnostics.extend(compiled.diagnostics);
            constraints.extend(compiled.constraint);
        }
    }
    crate::diagnostic::sort_diagnostics(&mut diagnostics);
    (constraints, diagnostics)
}

/// All predicates a formula author may use with `graph`: concepts and labels
/// as unary predicates, `has_a` roles as binary ones.
pub fn graph_predicates(graph: &ConceptGraph) -> Vec<PredicateSig> {
    let mut out: Vec<PredicateSig> = Vec::new();
    let mut seen: HashMap<String, ()> = HashMap::new();
    let mut push = |sig: PredicateSig| {
        if seen.insert(sig.name.clone(), ()).is_none() {
            out.push(sig);
        }
    };
    for c in &graph.concepts {
        let domain = graph.anchor_of(&c.name).ok().flatten();
        push(PredicateSig {
            name: c.name.clone(),
            arity: 1,
            binding_concepts: vec![domain.clone()],
        });
        for label in c.labels.iter().flatten() {
            push(PredicateSig {
                name: label.clone(),
                arity: 1,
                binding_concepts: vec![domain.clone()],
            });
        }
    }
    for (role, relation, target) in graph.roles() {
        push(PredicateSig {
            name: role.to_string(),
            arity: 2,
            binding_concepts: vec![Some(relation.to_string()), Some(target.to_string())],
        });
    }
    out
}

impl std::fmt::Display for PredicateSig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}
