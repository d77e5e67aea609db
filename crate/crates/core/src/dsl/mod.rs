//! The `.dkg` graph language.
//!
//! ```text
//! program    := "graph" IDENT "{" stmt* "}"
//! stmt       := ("concept" | "decision" "concept") IDENT labelset? ";"
//!             | IDENT "is_a" IDENT ";"
//!             | IDENT "contains" IDENT ";"
//!             | IDENT "has_a" "(" role ("," role)* ")" ";"
//!             | "constraint" formula ";"
//! labelset   := "labels" "{" IDENT ("," IDENT)* "}"
//! role       := IDENT ":" IDENT
//! ```
//!
//! `//` starts a line comment and `///` a doc comment attached to the next
//! concept. Errors are reported in-band; after an error the parser skips to
//! the next `;` so one pass reports every broken statement.

pub mod concept_list;
mod emit;
mod parser;

pub use emit::emit_graph;
pub use parser::{parse_constraint_block, parse_graph, ConstraintBlock, ParseResult};
