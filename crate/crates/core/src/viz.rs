//! Structure-only graph exports: a JSON layout document for interactive
//! clients and DOT text for static rendering. Neither carries coordinates.

use serde::{Deserialize, Serialize};

use crate::graph::{ConceptGraph, ConceptKind, EdgeKind, Relation};

pub const LAYOUT_SCHEMA: &str = "kdecl.layout/v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LayoutNode {
    pub id: String,
    pub label: String,
    pub kind: ConceptKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anchor_id: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutRole {
    pub name: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutLink {
    pub kind: EdgeKind,
    pub source: String,
    /// Set for `is_a` and `contains`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    /// Set for `has_a`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub roles: Vec<LayoutRole>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutGraph {
    pub schema: String,
    pub name: String,
    pub nodes: Vec<LayoutNode>,
    pub links: Vec<LayoutLink>,
}

/// One node per concept and one link per edge, both sorted so the output
/// does not depend on declaration order.
pub fn to_layout(graph: &ConceptGraph) -> LayoutGraph {
    let mut nodes: Vec<LayoutNode> = graph
        .concepts
        .iter()
        .map(|c| LayoutNode {
            id: c.name.clone(),
            label: c.name.clone(),
            kind: c.kind,
            anchor_id: match c.kind {
                ConceptKind::Decision => graph.anchor_of(&c.name).ok().flatten(),
                ConceptKind::Input => None,
            },
            labels: c.labels.clone().unwrap_or_default(),
        })
        .collect();
    nodes.sort_by(|a, b| a.id.cmp(&b.id));
    let mut links: Vec<LayoutLink> = graph
        .edges
        .iter()
        .map(|e| match &e.relation {
            Relation::IsA { source, target } | Relation::Contains { source, target } => LayoutLink {
                kind: e.kind(),
                source: source.clone(),
                target: Some(target.clone()),
                roles: Vec::new(),
            },
            Relation::HasA { source, roles } => LayoutLink {
                kind: EdgeKind::HasA,
                source: source.clone(),
                target: None,
                roles: roles
                    .iter()
                    .map(|r| LayoutRole {
                        name: r.name.clone(),
                        target: r.target.clone(),
                    })
                    .collect(),
            },
        })
        .collect();
    links.sort_by_key(|l| {
        (
            l.kind,
            l.source.clone(),
            l.target.clone(),
            l.roles.iter().map(|r| (r.name.clone(), r.target.clone())).collect::<Vec<_>>(),
        )
    });
    LayoutGraph {
        schema: LAYOUT_SCHEMA.to_string(),
        name: graph.name.clone(),
        nodes,
        links,
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT digraph. `is_a` edges are dashed, `contains` solid, and each `has_a`
/// role becomes a bold arrow labelled with the role name.
pub fn to_dot(graph: &ConceptGraph) -> String {
    let layout = to_layout(graph);
    let name = if graph.name.is_empty() { "g" } else { &graph.name };
    let mut out = format!("digraph {} {{\n  rankdir=BT;\n  node [shape=box];\n", quote(name));
    for n in &layout.nodes {
        let mut attrs = vec![];
        if n.kind == ConceptKind::Decision {
            attrs.push("shape=ellipse".to_string());
            let label = if n.labels.is_empty() {
                n.label.clone()
            } else {
                format!("{}\\n{{{}}}", n.label, n.labels.join(", "))
            };
            attrs.push(format!("label={}", quote(&label)));
        }
        if attrs.is_empty() {
            out.push_str(&format!("  {};\n", quote(&n.id)));
        } else {
            out.push_str(&format!("  {} [{}];\n", quote(&n.id), attrs.join(", ")));
        }
    }
    let mut lines = Vec::new();
    for l in &layout.links {
        match l.kind {
            EdgeKind::IsA | EdgeKind::Contains => {
                let style = if l.kind == EdgeKind::IsA { "dashed" } else { "solid" };
                let target = l.target.as_deref().unwrap_or_default();
                lines.push(format!(
                    "  {} -> {} [style={style}, label={}];\n",
                    quote(&l.source),
                    quote(target),
                    quote(l.kind.keyword())
                ));
            }
            EdgeKind::HasA => {
                for r in &l.roles {
                    lines.push(format!(
                        "  {} -> {} [style=bold, label={}];\n",
                        quote(&l.source),
                        quote(&r.target),
                        quote(&r.name)
                    ));
                }
            }
        }
    }
    lines.sort();
    lines.iter().for_each(|l| out.push_str(l));
    out.push_str("}\n");
    out
}
