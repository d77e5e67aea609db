//! Browser bindings. Every function takes source text and returns a JSON
//! string, so the page needs no generated type glue beyond `JSON.parse`.

use kdecl::diff::graph_diff;
use kdecl::fol::compile_fol_text;
use kdecl::{emit_graph, lint_source, parse_graph, viz, Constraint, Diagnostic, ValidationReport};
use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

fn json(value: &impl Serialize) -> String {
    serde_json::to_string(value).expect("output serializes")
}

/// Validation report for graph source.
#[wasm_bindgen]
pub fn lint(source: &str) -> String {
    json(&lint_source(source))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Drawing {
    report: ValidationReport,
    /// Absent when the source does not parse.
    layout: Option<viz::LayoutGraph>,
    dot: Option<String>,
    /// Canonical text of the parsed graph.
    canonical: Option<String>,
}

/// Report, node/link layout, DOT text and canonical source in one call.
#[wasm_bindgen]
pub fn draw(source: &str) -> String {
    let report = lint_source(source);
    let graph = parse_graph(source).graph;
    json(&Drawing {
        report,
        layout: graph.as_ref().map(viz::to_layout),
        dot: graph.as_ref().map(viz::to_dot),
        canonical: graph.as_ref().map(emit_graph),
    })
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Compilation {
    constraints: Vec<Constraint>,
    /// Canonical `constraint ...;` statements, one per compiled formula.
    statements: Vec<String>,
    diagnostics: Vec<Diagnostic>,
}

/// Compiles formulas (one per line) against the graph in `graph_source`.
#[wasm_bindgen]
pub fn compile_fol(formulas: &str, graph_source: &str) -> String {
    let Some(graph) = parse_graph(graph_source).graph else {
        let report = lint_source(graph_source);
        return json(&Compilation {
            constraints: Vec::new(),
            statements: Vec::new(),
            diagnostics: report.diagnostics,
        });
    };
    let (constraints, diagnostics) = compile_fol_text(formulas, &graph);
    let statements = constraints
        .iter()
        .filter_map(|c| kdecl::fol::emit_constraint(c).ok())
        .collect();
    json(&Compilation {
        constraints,
        statements,
        diagnostics,
    })
}

/// Structural difference between a candidate and a gold graph, or
/// `{"error": ...}` when either side does not parse.
#[wasm_bindgen]
pub fn diff(candidate: &str, gold: &str) -> String {
    match (parse_graph(candidate).graph, parse_graph(gold).graph) {
        (Some(c), Some(g)) => json(&graph_diff(&c, &g)),
        (None, _) => json(&serde_json::json!({ "error": "candidate does not parse" })),
        (_, None) => json(&serde_json::json!({ "error": "gold does not parse" })),
    }
}
