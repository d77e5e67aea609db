use crate::fol::statement;
use crate::graph::{ConceptGraph, ConceptKind, Relation};

const INDENT: &str = "  ";

/// Canonical program text: concepts, then edges, then constraints, each in
/// declaration order so printing and reparsing gives an equal graph. Sections are
/// separated by a blank line; output uses LF and ends with a newline.
pub fn emit_graph(graph: &ConceptGraph) -> String {
    let mut sections: Vec<Vec<String>> = Vec::new();

    let mut concepts = Vec::new();
    for c in &graph.concepts {
        if let Some(doc) = &c.doc {
            concepts.extend(doc.lines().map(|l| format!("{INDENT}/// {l}").trim_end().to_string()));
        }
        let keyword = match c.kind {
            ConceptKind::Input => "concept",
            ConceptKind::Decision => "decision concept",
        };
        let labels = match &c.labels {
            Some(labels) => format!(" labels {{ {} }}", labels.join(", ")),
            None => String::new(),
        };
        concepts.push(format!("{INDENT}{keyword} {}{labels};", c.name));
    }
    sections.push(concepts);

    let mut edges = Vec::new();
    for e in &graph.edges {
        let line = match &e.relation {
            Relation::IsA { source, target } | Relation::Contains { source, target } => {
                format!("{source} {} {target};", e.kind())
            }
            Relation::HasA { source, roles } => {
                let roles: Vec<String> = roles.iter().map(|r| format!("{}: {}", r.name, r.target)).collect();
                format!("{source} has_a({});", roles.join(", "))
            }
        };
        edges.push(format!("{INDENT}{line}"));
    }
    sections.push(edges);

    sections.push(
        graph
            .constraints
            .iter()
            .map(|c| format!("{INDENT}{}", statement(&c.expr)))
            .collect(),
    );

    let body: Vec<String> = sections
        .into_iter()
        .filter(|s| !s.is_empty())
        .map(|s| s.join("\n"))
        .collect();
    if body.is_empty() {
        return format!("graph {} {{ }}\n", graph.name);
    }
    format!("graph {} {{\n{}\n}}\n", graph.name, body.join("\n\n"))
}
