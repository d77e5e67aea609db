//! Semantic checks over parsed graphs and the feedback derived from them.
//!
//! | code   | severity | rule |
//! |--------|----------|------|
//! | SEM001 | error    | edge or predicate names an undeclared concept |
//! | SEM002 | error    | decision concept has no input anchor |
//! | SEM003 | error    | `is_a` cycle |
//! | SEM004 | error    | `contains` cycle |
//! | SEM005 | error    | `has_a` with fewer than two roles or repeated role names |
//! | SEM006 | error    | predicate arity mismatch |
//! | SEM007 | error    | unbound variable |
//! | SEM008 | error    | `exactly`/`at_least` count above the number of alternatives |
//! | SEM009 | warning  | exclusive labels attached to different anchors |
//! | SEM010 | warning  | concept outside the main connected component |
//! | SEM011 | warning  | repeated edge |
//! | SEM012 | error    | unsupported FOL operation (raised while lowering formulas) |
//! | SEM013 | error    | concept declared twice (raised by the parser) |
//! | SEM014 | warning  | anchor more than two `is_a` steps away |
//! | SEM015 | error    | malformed label set |
//! | SEM016 | warning  | label set with a placeholder such as `etc` |

mod report;
mod rules;

pub use report::{render_feedback, MachineRecord, ValidationReport};
pub use rules::{constraint_diagnostics, local_constraint_diagnostics, validate};

use crate::dsl::parse_graph;

/// Parses `text` and, when it parses, validates the graph. Parse and
/// validation diagnostics are merged into one report.
pub fn lint_source(text: &str) -> ValidationReport {
    let parsed = parse_graph(text);
    let mut diagnostics = parsed.diagnostics;
    if let Some(graph) = &parsed.graph {
        diagnostics.extend(validate(graph).diagnostics);
    }
    ValidationReport::from_diagnostics(diagnostics)
}
