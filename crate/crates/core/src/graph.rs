//! Concept graphs: concepts, typed edges and the constraints declared over
//! them.
//!
//! All operations are value-producing. `add_concept` and `add_edge` return a
//! new graph and leave the receiver untouched. The parser builds graphs
//! directly so that it can keep unresolved edges around for the validator to
//! report; the structural invariants (acyclicity, anchoring) are checked by
//! [`crate::validator`], not here.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraint::Constraint;
use crate::span::Span;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("concept `{0}` is already declared")]
    DuplicateConcept(String),
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
    #[error("concept name is empty")]
    EmptyName,
    #[error("invalid label set on `{0}`: {1}")]
    InvalidLabels(String, &'static str),
}

/// Lowercases and collapses runs of separators (whitespace, `-`, `_`, `.`)
/// into a single underscore.
pub fn normalize_name(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_sep = false;
    for ch in raw.trim().chars() {
        if ch.is_whitespace() || matches!(ch, '-' | '_' | '.' | '/') {
            pending_sep = !out.is_empty();
            continue;
        }
        if pending_sep {
            out.push('_');
            pending_sep = false;
        }
        out.extend(ch.to_lowercase());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConceptKind {
    Input,
    Decision,
}

impl fmt::Display for ConceptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConceptKind::Input => "input",
            ConceptKind::Decision => "decision",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Concept {
    pub name: String,
    pub kind: ConceptKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc: Option<String>,
    #[serde(default, skip_serializing)]
    pub span: Span,
}

impl Concept {
    pub fn input(name: &str) -> Self {
        Concept {
            name: normalize_name(name),
            kind: ConceptKind::Input,
            labels: None,
            doc: None,
            span: Span::NONE,
        }
    }

    pub fn decision(name: &str) -> Self {
        Concept {
            kind: ConceptKind::Decision,
            ..Concept::input(name)
        }
    }

    pub fn with_labels<I, S>(mut self, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.labels = Some(labels.into_iter().map(|l| normalize_name(l.as_ref())).collect());
        self
    }

    pub fn with_doc(mut self, doc: impl Into<String>) -> Self {
        self.doc = Some(doc.into());
        self
    }

    pub fn is_decision(&self) -> bool {
        self.kind == ConceptKind::Decision
    }

    fn check_labels(&self) -> Result<(), GraphError> {
        let Some(labels) = &self.labels else {
            return Ok(());
        };
        if self.kind != ConceptKind::Decision {
            return Err(GraphError::InvalidLabels(self.name.clone(), "only decision concepts carry labels"));
        }
        let distinct: HashSet<&String> = labels.iter().collect();
        if distinct.len() < 2 || distinct.len() != labels.len() {
            return Err(GraphError::InvalidLabels(self.name.clone(), "needs at least two distinct labels"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    IsA,
    Contains,
    HasA,
}

impl EdgeKind {
    pub fn keyword(self) -> &'static str {
        match self {
            EdgeKind::IsA => "is_a",
            EdgeKind::Contains => "contains",
            EdgeKind::HasA => "has_a",
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Role {
    pub name: String,
    pub target: String,
}

impl Role {
    pub fn new(name: &str, target: &str) -> Self {
        Role {
            name: normalize_name(name),
            target: normalize_name(target),
        }
    }
}

/// The endpoints of an edge. `IsA` points from child to parent, `Contains`
/// from the container to its parts, and `HasA` from the relation concept to
/// its ordered roles.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Relation {
    IsA { source: String, target: String },
    Contains { source: String, target: String },
    HasA { source: String, roles: Vec<Role> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    #[serde(flatten)]
    pub relation: Relation,
    #[serde(default, skip_serializing)]
    pub span: Span,
}

impl Edge {
    pub fn is_a(child: &str, parent: &str) -> Self {
        Edge::from(Relation::IsA {
            source: normalize_name(child),
            target: normalize_name(parent),
        })
    }

    pub fn contains(whole: &str, part: &str) -> Self {
        Edge::from(Relation::Contains {
            source: normalize_name(whole),
            target: normalize_name(part),
        })
    }

    pub fn has_a<'a>(relation: &str, roles: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Edge::from(Relation::HasA {
            source: normalize_name(relation),
            roles: roles.into_iter().map(|(n, t)| Role::new(n, t)).collect(),
        })
    }

    pub fn kind(&self) -> EdgeKind {
        match self.relation {
            Relation::IsA { .. } => EdgeKind::IsA,
            Relation::Contains { .. } => EdgeKind::Contains,
            Relation::HasA { .. } => EdgeKind::HasA,
        }
    }

    pub fn source(&self) -> &str {
        match &self.relation {
            Relation::IsA { source, .. } | Relation::Contains { source, .. } | Relation::HasA { source, .. } => source,
        }
    }

    /// Every concept name the edge touches, source first.
    pub fn endpoints(&self) -> Vec<&str> {
        match &self.relation {
            Relation::IsA { source, target } | Relation::Contains { source, target } => {
                vec![source.as_str(), target.as_str()]
            }
            Relation::HasA { source, roles } => std::iter::once(source.as_str())
                .chain(roles.iter().map(|r| r.target.as_str()))
                .collect(),
        }
    }

    /// Order-free textual key with normalized names, e.g.
    /// `has_a(pair; premise:sentence, hypothesis:sentence)`.
    pub fn descriptor(&self) -> String {
        match &self.relation {
            Relation::IsA { source, target } | Relation::Contains { source, target } => format!(
                "{}({}, {})",
                self.kind(),
                normalize_name(source),
                normalize_name(target)
            ),
            Relation::HasA { source, roles } => {
                let roles: Vec<String> = roles
                    .iter()
                    .map(|r| format!("{}:{}", normalize_name(&r.name), normalize_name(&r.target)))
                    .collect();
                format!("has_a({}; {})", normalize_name(source), roles.join(", "))
            }
        }
    }
}

impl From<Relation> for Edge {
    fn from(relation: Relation) -> Self {
        Edge {
            relation,
            span: Span::NONE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptGraph {
    pub name: String,
    pub concepts: Vec<Concept>,
    pub edges: Vec<Edge>,
    #[serde(default)]
    pub constraints: Vec<Constraint>,
}

impl ConceptGraph {
    pub fn new(name: &str) -> Self {
        ConceptGraph {
            name: normalize_name(name),
            concepts: Vec::new(),
            edges: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn concept(&self, name: &str) -> Option<&Concept> {
        let name = normalize_name(name);
        self.concepts.iter().find(|c| c.name == name)
    }

    pub fn contains_concept(&self, name: &str) -> bool {
        self.concept(name).is_some()
    }

    pub fn add_concept(&self, mut concept: Concept) -> Result<ConceptGraph, GraphError> {
        concept.name = normalize_name(&concept.name);
        if concept.name.is_empty() {
            return Err(GraphError::EmptyName);
        }
        if self.contains_concept(&concept.name) {
            return Err(GraphError::DuplicateConcept(concept.name));
        }
        concept.check_labels()?;
        let mut next = self.clone();
        next.concepts.push(concept);
        Ok(next)
    }

    /// Appends an edge once every endpoint resolves. Cycles are left for the
    /// validator.
    pub fn add_edge(&self, edge: Edge) -> Result<ConceptGraph, GraphError> {
        if let Some(missing) = edge.endpoints().into_iter().find(|n| !self.contains_concept(n)) {
            return Err(GraphError::UnknownConcept(missing.to_string()));
        }
        let mut next = self.clone();
        next.edges.push(edge);
        Ok(next)
    }

    pub fn add_constraint(&self, constraint: Constraint) -> ConceptGraph {
        let mut next = self.clone();
        next.constraints.push(constraint);
        next
    }

    /// Direct `is_a` parents of `name`, sorted and deduplicated.
    pub fn parents(&self, name: &str) -> Vec<&str> {
        let set: BTreeSet<&str> = self
            .edges
            .iter()
            .filter_map(|e| match &e.relation {
                Relation::IsA { source, target } if source == name => Some(target.as_str()),
                _ => None,
            })
            .collect();
        set.into_iter().collect()
    }

    /// Nearest input-kind concept reachable through `is_a` edges, with the
    /// number of edges walked. Ties at the same depth go to the smallest name
    /// so the answer does not depend on edge order.
    pub fn anchor_path(&self, name: &str) -> Result<Option<(String, usize)>, GraphError> {
        let start = self
            .concept(name)
            .ok_or_else(|| GraphError::UnknownConcept(normalize_name(name)))?;
        let mut seen: HashSet<&str> = HashSet::from([start.name.as_str()]);
        let mut frontier: Vec<&str> = vec![start.name.as_str()];
        let mut depth = 0;
        while !frontier.is_empty() {
            let mut inputs: Vec<&str> = frontier
                .iter()
                .copied()
                .filter(|n| self.concept(n).is_some_and(|c| c.kind == ConceptKind::Input))
                .collect();
            if !inputs.is_empty() {
                inputs.sort_unstable();
                return Ok(Some((inputs[0].to_string(), depth)));
            }
            let mut next = Vec::new();
            for node in frontier {
                for parent in self.parents(node) {
                    if seen.insert(parent) {
                        next.push(parent);
                    }
                }
            }
            frontier = next;
            depth += 1;
        }
        Ok(None)
    }

    pub fn anchor_of(&self, name: &str) -> Result<Option<String>, GraphError> {
        Ok(self.anchor_path(name)?.map(|(anchor, _)| anchor))
    }

    /// The decision concept that declares `label` in its label set.
    pub fn label_owner(&self, label: &str) -> Option<&Concept> {
        self.concepts.iter().find(|c| {
            c.labels
                .as_ref()
                .is_some_and(|labels| labels.iter().any(|l| l == label))
        })
    }

    /// Role relations declared by `has_a` edges: (role name, relation concept,
    /// role target).
    pub fn roles(&self) -> impl Iterator<Item = (&str, &str, &str)> {
        self.edges.iter().flat_map(|e| match &e.relation {
            Relation::HasA { source, roles } => roles
                .iter()
                .map(|r| (r.name.as_str(), source.as_str(), r.target.as_str()))
                .collect::<Vec<_>>(),
            _ => Vec::new(),
        })
    }

    /// Removes the first edge whose normalized descriptor matches.
    pub fn remove_edge(&self, descriptor: &str) -> Option<ConceptGraph> {
        let idx = self.edges.iter().position(|e| e.descriptor() == descriptor)?;
        let mut next = self.clone();
        next.edges.remove(idx);
        Some(next)
    }

    /// Breadth-first order of concepts reachable from `start` along edges of
    /// any kind in either direction.
    pub(crate) fn component_of<'a>(&'a self, start: &'a str) -> Vec<&'a str> {
        let mut seen: HashSet<&str> = HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        let mut order = Vec::new();
        while let Some(node) = queue.pop_front() {
            order.push(node);
            for edge in &self.edges {
                let ends = edge.endpoints();
                if ends.contains(&node) {
                    for other in ends {
                        if self.contains_concept(other) && seen.insert(other) {
                            queue.push_back(other);
                        }
                    }
                }
            }
        }
        order
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentence_graph() -> ConceptGraph {
        ConceptGraph::new("g")
            .add_concept(Concept::input("sentence"))
            .unwrap()
            .add_concept(Concept::decision("sentence_class"))
            .unwrap()
    }

    #[test]
    fn add_concept_to_empty_graph() {
        let g = ConceptGraph::new("g").add_concept(Concept::input("sentence")).unwrap();
        assert_eq!(g.concepts.len(), 1);
        assert_eq!(sentence_graph().concepts.len(), 2);
    }

    #[test]
    fn duplicate_concept_after_normalization() {
        let g = ConceptGraph::new("g").add_concept(Concept::input("sentence")).unwrap();
        assert_eq!(
            g.add_concept(Concept::input("Sentence")),
            Err(GraphError::DuplicateConcept("sentence".into()))
        );
    }

    #[test]
    fn add_concept_checks_label_sets() {
        let g = ConceptGraph::new("g");
        assert!(matches!(
            g.add_concept(Concept::input("x").with_labels(["a", "b"])),
            Err(GraphError::InvalidLabels(..))
        ));
        assert!(matches!(
            g.add_concept(Concept::decision("x").with_labels(["a"])),
            Err(GraphError::InvalidLabels(..))
        ));
        assert!(g.add_concept(Concept::decision("x").with_labels(["a", "b"])).is_ok());
    }

    #[test]
    fn add_edge_resolves_endpoints() {
        let g = sentence_graph();
        let g2 = g.add_edge(Edge::is_a("sentence_class", "sentence")).unwrap();
        assert_eq!(g2.edges.len(), 1);
        assert_eq!(
            g.add_edge(Edge::contains("paragraph", "sentence")),
            Err(GraphError::UnknownConcept("paragraph".into()))
        );
    }

    #[test]
    fn has_a_edge_with_two_roles() {
        let g = ConceptGraph::new("nli")
            .add_concept(Concept::input("sentence"))
            .unwrap()
            .add_concept(Concept::input("pair"))
            .unwrap()
            .add_edge(Edge::has_a("pair", [("premise", "sentence"), ("hypothesis", "sentence")]))
            .unwrap();
        let roles: Vec<_> = g.roles().collect();
        assert_eq!(roles, vec![("premise", "pair", "sentence"), ("hypothesis", "pair", "sentence")]);
    }

    #[test]
    fn operations_do_not_mutate_input() {
        let g = sentence_graph();
        let before = g.clone();
        let _ = g.add_concept(Concept::input("word")).unwrap();
        let _ = g.add_edge(Edge::is_a("sentence_class", "sentence")).unwrap();
        let _ = g.add_concept(Concept::input("sentence"));
        assert_eq!(g, before);
    }

    #[test]
    fn anchors() {
        let g = sentence_graph()
            .add_concept(Concept::decision("orphan_label"))
            .unwrap()
            .add_edge(Edge::is_a("sentence_class", "sentence"))
            .unwrap();
        assert_eq!(g.anchor_of("sentence_class").unwrap().as_deref(), Some("sentence"));
        assert_eq!(g.anchor_of("sentence").unwrap().as_deref(), Some("sentence"));
        assert_eq!(g.anchor_of("orphan_label").unwrap(), None);
        assert_eq!(g.anchor_of("nope"), Err(GraphError::UnknownConcept("nope".into())));
    }

    #[test]
    fn anchor_through_decision_chain() {
        let g = ConceptGraph::new("g")
            .add_concept(Concept::input("phrase"))
            .unwrap()
            .add_concept(Concept::decision("entity"))
            .unwrap()
            .add_concept(Concept::decision("person"))
            .unwrap()
            .add_edge(Edge::is_a("entity", "phrase"))
            .unwrap()
            .add_edge(Edge::is_a("person", "entity"))
            .unwrap();
        assert_eq!(g.anchor_path("person").unwrap(), Some(("phrase".into(), 2)));
    }

    #[test]
    fn anchor_survives_is_a_cycle() {
        let mut g = ConceptGraph::new("g");
        for c in ["a", "b"] {
            g = g.add_concept(Concept::decision(c)).unwrap();
        }
        g = g.add_edge(Edge::is_a("a", "b")).unwrap().add_edge(Edge::is_a("b", "a")).unwrap();
        assert_eq!(g.anchor_of("a").unwrap(), None);
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_name("Sentence Class"), "sentence_class");
        assert_eq!(normalize_name("  named--entity_"), "named_entity");
        assert_eq!(normalize_name("etc."), "etc");
    }
}
