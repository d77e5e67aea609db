//! Node and edge differences between a candidate graph and a gold graph.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::graph::{normalize_name, ConceptGraph};

/// Symmetric differences of normalized concept names and edge descriptors.
/// Lists are sorted so reports compare and serialize deterministically.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DiffReport {
    pub node_diff: usize,
    pub edge_diff: usize,
    /// In gold but not in the candidate.
    pub missing_nodes: Vec<String>,
    /// In the candidate but not in gold.
    pub extra_nodes: Vec<String>,
    pub missing_edges: Vec<String>,
    pub extra_edges: Vec<String>,
}

impl DiffReport {
    pub fn is_identical(&self) -> bool {
        self.node_diff == 0 && self.edge_diff == 0
    }
}

fn node_set(g: &ConceptGraph) -> BTreeSet<String> {
    g.concepts.iter().map(|c| normalize_name(&c.name)).collect()
}

fn edge_set(g: &ConceptGraph) -> BTreeSet<String> {
    g.edges.iter().map(|e| e.descriptor()).collect()
}

/// An edge whose endpoint was renamed counts as one missing plus one extra.
pub fn graph_diff(candidate: &ConceptGraph, gold: &ConceptGraph) -> DiffReport {
    let (cn, gn) = (node_set(candidate), node_set(gold));
    let (ce, ge) = (edge_set(candidate), edge_set(gold));
    let missing_nodes: Vec<String> = gn.difference(&cn).cloned().collect();
    let extra_nodes: Vec<String> = cn.difference(&gn).cloned().collect();
    let missing_edges: Vec<String> = ge.difference(&ce).cloned().collect();
    let extra_edges: Vec<String> = ce.difference(&ge).cloned().collect();
    DiffReport {
        node_diff: missing_nodes.len() + extra_nodes.len(),
        edge_diff: missing_edges.len() + extra_edges.len(),
        missing_nodes,
        extra_nodes,
        missing_edges,
        extra_edges,
    }
}
