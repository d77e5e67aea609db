//! proptest strategies for graphs, expressions and chat histories.

use kdecl::constraint::{CountKind, Expr};
use kdecl::graph::{Concept, ConceptGraph, Edge};
use kdecl::llm::ChatMessage;
use proptest::prelude::*;

const NAMES: [&str; 10] = [
    "sentence", "word", "pair", "image", "token", "phrase", "cell", "email", "document", "box",
];

#[derive(Debug, Clone)]
pub struct GraphSpec {
    /// (name index, is decision, label count)
    pub concepts: Vec<(usize, bool, usize)>,
    /// (kind 0..3, endpoint indices into `concepts`)
    pub edges: Vec<(u8, usize, usize, usize)>,
}

pub fn graph_spec() -> impl Strategy<Value = GraphSpec> {
    (
        proptest::sample::subsequence((0..NAMES.len()).collect::<Vec<_>>(), 1..=NAMES.len()),
        proptest::collection::vec((any::<bool>(), 0usize..4), NAMES.len()),
        proptest::collection::vec((0u8..3, any::<usize>(), any::<usize>(), any::<usize>()), 0..12),
    )
        .prop_map(|(names, kinds, edges)| {
            let concepts: Vec<(usize, bool, usize)> = names
                .iter()
                .enumerate()
                .map(|(i, &n)| (n, kinds[i].0, kinds[i].1))
                .collect();
            let k = concepts.len();
            GraphSpec {
                edges: edges.into_iter().map(|(t, a, b, c)| (t, a % k, b % k, c % k)).collect(),
                concepts,
            }
        })
}

/// Builds the graph, declaring concepts and edges in the given orders.
pub fn build(spec: &GraphSpec, concept_order: &[usize], edge_order: &[usize]) -> ConceptGraph {
    let mut g = ConceptGraph::new("generated");
    for &i in concept_order {
        let (n, decision, labels) = spec.concepts[i];
        let name = NAMES[n];
        let c = if decision {
            let c = Concept::decision(name);
            if labels >= 2 {
                c.with_labels((0..labels).map(|l| format!("{name}_l{l}")))
            } else {
                c
            }
        } else {
            Concept::input(name)
        };
        g = g.add_concept(c).expect("distinct generated names");
    }
    for &i in edge_order {
        let (t, a, b, c) = spec.edges[i];
        let (a, b, c) = (NAMES[spec.concepts[a].0], NAMES[spec.concepts[b].0], NAMES[spec.concepts[c].0]);
        let e = match t {
            0 => Edge::is_a(a, b),
            1 => Edge::contains(a, b),
            _ => Edge::has_a(a, [("first", b), ("second", c)]),
        };
        g = g.add_edge(e).expect("endpoints are declared");
    }
    g
}

pub fn build_in_order(spec: &GraphSpec) -> ConceptGraph {
    let c: Vec<usize> = (0..spec.concepts.len()).collect();
    let e: Vec<usize> = (0..spec.edges.len()).collect();
    build(spec, &c, &e)
}

pub fn graph() -> impl Strategy<Value = ConceptGraph> {
    graph_spec().prop_map(|s| build_in_order(&s))
}

const DOMAINS: [&str; 3] = ["pair", "sentence", "word"];
const UNARY: [&str; 4] = ["pair", "sentence", "positive", "negative"];

/// Closed expressions whose variables are bound by enclosing quantifiers.
pub fn closed_expr() -> impl Strategy<Value = Expr> {
    (0usize..3, any::<bool>()).prop_flat_map(|(d, forall)| {
        body(1).prop_map(move |b| {
            if forall {
                Expr::forall("v0", DOMAINS[d], b)
            } else {
                Expr::exists("v0", DOMAINS[d], b)
            }
        })
    })
}

fn atom(depth: usize) -> BoxedStrategy<Expr> {
    let vars = depth;
    let unary = (0..UNARY.len(), 0..vars).prop_map(|(p, v)| Expr::pred(UNARY[p], [format!("v{v}").as_str()]));
    let binary = (0..vars, 0..vars).prop_map(|(a, b)| {
        let (a, b) = (format!("v{a}"), format!("v{b}"));
        Expr::pred("rel", [a.as_str(), b.as_str()])
    });
    prop_oneof![3 => unary, 1 => binary].boxed()
}

/// Expression with `depth` variables `v0..` in scope.
fn body(depth: usize) -> BoxedStrategy<Expr> {
    let leaf = atom(depth);
    if depth >= 3 {
        return leaf;
    }
    leaf.prop_recursive(3, 16, 3, move |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::negate),
            proptest::collection::vec(inner.clone(), 2..4).prop_map(Expr::and),
            proptest::collection::vec(inner.clone(), 2..4).prop_map(Expr::or),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::implies(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::iff(a, b)),
            (0usize..3, proptest::collection::vec(inner.clone(), 1..4), 0usize..3).prop_map(|(k, cs, kind)| {
                let kind = [CountKind::Exactly, CountKind::AtMost, CountKind::AtLeast][kind];
                let k = k.min(cs.len());
                Expr::count(kind, k, cs)
            }),
            (0usize..3, any::<bool>(), body(depth + 1)).prop_map(move |(d, forall, b)| {
                let var = format!("v{depth}");
                if forall {
                    Expr::forall(&var, DOMAINS[d], b)
                } else {
                    Expr::exists(&var, DOMAINS[d], b)
                }
            }),
        ]
    })
    .boxed()
}

/// A system message followed by user/assistant turns of varied lengths.
pub fn history() -> impl Strategy<Value = Vec<ChatMessage>> {
    (
        "[a-z ]{1,40}",
        proptest::collection::vec(("[a-z ]{1,120}", any::<bool>()), 0..15),
    )
        .prop_map(|(system, turns)| {
            let mut h = vec![ChatMessage::system(system)];
            h.extend(turns.into_iter().map(|(t, user)| {
                if user {
                    ChatMessage::user(t)
                } else {
                    ChatMessage::assistant(t)
                }
            }));
            h
        })
}
