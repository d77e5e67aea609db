//! Concept-graph knowledge declarations.
//!
//! A [`ConceptGraph`] names the concepts of a learning task and the `is_a`,
//! `contains` and `has_a` relations between them, plus first-order
//! constraints over their labels. This crate parses and prints the textual
//! graph language, validates graphs, compiles FOL into constraint trees, and
//! drives an LLM-backed generate/validate/refine loop that produces both.

pub mod constraint;
mod cursor;
pub mod diagnostic;
pub mod diff;
pub mod dsl;
pub mod eval;
pub mod fol;
pub mod graph;
pub mod lexer;
pub mod llm;
pub mod pipeline;
pub mod retrieval;
pub mod span;
pub mod validator;
pub mod viz;

pub use constraint::{Constraint, CountKind, Expr, ExprNode, Model, Quantifier};
pub use diagnostic::{classify, Code, Diagnostic, ErrorClass, Severity};
pub use dsl::{emit_graph, parse_graph};
pub use graph::{Concept, ConceptGraph, ConceptKind, Edge, EdgeKind, Relation, Role};
pub use span::SourceSpan;
pub use validator::{lint_source, validate, ValidationReport};
