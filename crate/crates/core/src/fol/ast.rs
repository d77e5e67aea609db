use serde::{Deserialize, Serialize};

use crate::constraint::{CountKind, Quantifier};
use crate::span::Span;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "term", rename_all = "snake_case")]
pub enum Term {
    Var { name: String, span: Span },
    Number { value: u64, span: Span },
    App { name: String, args: Vec<Term>, span: Span },
}

impl Term {
    pub fn span(&self) -> &Span {
        match self {
            Term::Var { span, .. } | Term::Number { span, .. } | Term::App { span, .. } => span,
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var { name, .. } => Some(name),
            _ => None,
        }
    }
}

/// Standard first-order formula as written by a user or a model, before it
/// is grounded in a concept graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum FolNode {
    Atom {
        name: String,
        args: Vec<Term>,
    },
    Equals {
        lhs: Term,
        rhs: Term,
        negated: bool,
    },
    Not {
        child: Box<Formula>,
    },
    And {
        children: Vec<Formula>,
    },
    Or {
        children: Vec<Formula>,
    },
    Implies {
        lhs: Box<Formula>,
        rhs: Box<Formula>,
    },
    Iff {
        lhs: Box<Formula>,
        rhs: Box<Formula>,
    },
    /// `domain` is set for the `forall x in d:` form; otherwise the domain
    /// comes from a guard atom in the body.
    Quantified {
        quantifier: Quantifier,
        var: String,
        domain: Option<String>,
        body: Box<Formula>,
    },
    Count {
        kind: CountKind,
        k: u64,
        children: Vec<Formula>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Formula {
    #[serde(flatten)]
    pub node: FolNode,
    #[serde(default, skip_serializing)]
    pub span: Span,
}

impl Formula {
    pub fn children(&self) -> Vec<&Formula> {
        match &self.node {
            FolNode::Atom { .. } | FolNode::Equals { .. } => Vec::new(),
            FolNode::Not { child } => vec![child],
            FolNode::And { children } | FolNode::Or { children } | FolNode::Count { children, .. } => {
                children.iter().collect()
            }
            FolNode::Implies { lhs, rhs } | FolNode::Iff { lhs, rhs } => vec![lhs, rhs],
            FolNode::Quantified { body, .. } => vec![body],
        }
    }

    /// The guard atom name when this formula is `d(var)`.
    pub fn unary_atom_on(&self, var: &str) -> Option<&str> {
        match &self.node {
            FolNode::Atom { name, args } if args.len() == 1 && args[0].as_var() == Some(var) => Some(name),
            _ => None,
        }
    }
}
