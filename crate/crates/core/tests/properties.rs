//! Property tests over generated graphs, expressions, stores and histories.

mod common;

use std::collections::BTreeMap;

use common::gen;
use kdecl::constraint::Constraint;
use kdecl::diff::graph_diff;
use kdecl::dsl::parse_constraint_block;
use kdecl::fol::emit_constraint;
use kdecl::llm::{estimate_tokens, window_history};
use kdecl::llm::{ChatMessage, ChatRole, CompletionRequest, SamplingParams};
use kdecl::pipeline::{prune, Candidate, Origin, Stage};
use kdecl::retrieval::{cosine, DemoStore, Demonstration};
use kdecl::viz::{to_dot, to_layout};
use kdecl::{emit_graph, lint_source, parse_graph, validate, Code, Diagnostic, SourceSpan, ValidationReport};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn program_text_round_trips(g in gen::graph()) {
        let printed = emit_graph(&g);
        let parsed = parse_graph(&printed);
        prop_assert!(!parsed.has_syntax_errors(), "{printed}");
        let back = parsed.graph.unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(emit_graph(&back), printed);
    }

    #[test]
    fn linting_text_matches_validating_graph(g in gen::graph()) {
        prop_assert_eq!(sorted_codes(&lint_source(&emit_graph(&g))), sorted_codes(&validate(&g)));
    }

    #[test]
    fn constraint_statements_round_trip(expr in gen::closed_expr()) {
        let text = emit_constraint(&Constraint::new(expr.clone())).unwrap();
        let block = parse_constraint_block(&text);
        prop_assert!(block.diagnostics.iter().all(|d| !d.code.as_str().starts_with("SYN")), "{text}: {:?}", block.diagnostics);
        prop_assert_eq!(block.constraints.len(), 1);
        prop_assert_eq!(&block.constraints[0].expr, &expr, "{}", text);
    }

    #[test]
    fn diff_is_zero_against_itself_and_symmetric(a in gen::graph(), b in gen::graph()) {
        prop_assert!(graph_diff(&a, &a).is_identical());
        let ab = graph_diff(&a, &b);
        let ba = graph_diff(&b, &a);
        prop_assert_eq!((ab.node_diff, ab.edge_diff), (ba.node_diff, ba.edge_diff));
        prop_assert_eq!(&ab.missing_nodes, &ba.extra_nodes);
        prop_assert_eq!(&ab.missing_edges, &ba.extra_edges);
        prop_assert_eq!(ab.node_diff, ab.missing_nodes.len() + ab.extra_nodes.len());
    }

    #[test]
    fn declaration_order_is_irrelevant(
        spec in gen::graph_spec(),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut corder: Vec<usize> = (0..spec.concepts.len()).collect();
        let mut eorder: Vec<usize> = (0..spec.edges.len()).collect();
        corder.shuffle(&mut rng);
        eorder.shuffle(&mut rng);
        let a = gen::build_in_order(&spec);
        let b = gen::build(&spec, &corder, &eorder);

        prop_assert!(graph_diff(&a, &b).is_identical());
        for c in &a.concepts {
            prop_assert_eq!(a.anchor_of(&c.name).ok(), b.anchor_of(&c.name).ok(), "{}", c.name);
        }
        prop_assert_eq!(to_dot(&a), to_dot(&b));
        prop_assert_eq!(to_layout(&a), to_layout(&b));
        prop_assert_eq!(sorted_codes(&validate(&a)), sorted_codes(&validate(&b)));
    }

    #[test]
    fn layout_covers_every_concept_and_edge(g in gen::graph()) {
        let layout = to_layout(&g);
        prop_assert_eq!(layout.nodes.len(), g.concepts.len());
        prop_assert_eq!(layout.links.len(), g.edges.len());
    }

    #[test]
    fn pruning_keeps_clean_candidates_once_due(
        errors in proptest::collection::vec(0usize..3, 0..8),
        iteration in 0usize..5,
        threshold in 0usize..5,
    ) {
        let cands: Vec<Candidate> = errors.iter().enumerate().map(|(i, &e)| candidate(i, e)).collect();
        let kept = prune(cands.clone(), iteration, threshold);
        let any_clean = errors.contains(&0);
        if iteration >= threshold && any_clean {
            prop_assert!(kept.iter().all(Candidate::is_error_free));
            prop_assert_eq!(kept.len(), errors.iter().filter(|&&e| e == 0).count());
            let expected: Vec<&Candidate> = cands.iter().filter(|c| c.is_error_free()).collect();
            prop_assert_eq!(kept.iter().collect::<Vec<_>>(), expected);
        } else {
            prop_assert_eq!(kept, cands);
        }
    }

    #[test]
    fn top_k_matches_brute_force(
        vectors in proptest::collection::vec(proptest::collection::vec(-3i8..4, 4), 0..20),
        query in proptest::collection::vec(-3i8..4, 4),
        k in 0usize..6,
    ) {
        let store = store_of(&vectors);
        let q: Vec<f64> = query.iter().map(|&x| x as f64).collect();
        let got: Vec<&str> = store.top_k(&q, k, Stage::GraphDraft).iter().map(|d| d.id.as_str()).collect();
        prop_assert_eq!(got, brute_force_top_k(&store, &q, k));
    }

    #[test]
    fn windowing_keeps_system_and_newest_suffix(history in gen::history(), budget in 10usize..400) {
        let cost = |ms: &[ChatMessage]| ms.iter().map(|m| estimate_tokens(&m.content)).sum::<usize>();
        match window_history(&history, budget) {
            Err(_) => prop_assert!(estimate_tokens(&history[0].content) > budget),
            Ok(kept) => {
                prop_assert_eq!(kept[0].role, ChatRole::System);
                prop_assert!(cost(&kept) <= budget);
                let suffix = &kept[1..];
                let start = history.len() - suffix.len();
                prop_assert_eq!(suffix, &history[start..]);
                if start > 1 {
                    prop_assert!(cost(&kept) + estimate_tokens(&history[start - 1].content) > budget);
                }
            }
        }
    }

    #[test]
    fn digest_separates_distinct_requests(a in "[a-z]{0,12}", b in "[a-z]{0,12}", n in 1usize..4) {
        let req = |text: &str, template: &str| CompletionRequest {
            template: template.to_string(),
            messages: vec![ChatMessage::system("s"), ChatMessage::user(text)],
            n,
            params: SamplingParams::default(),
        };
        prop_assert_eq!(req(&a, "x").digest(), req(&a, "y").digest());
        prop_assert_eq!(req(&a, "x").digest() == req(&b, "x").digest(), a == b);
    }
}

/// Distinct codes; spanless generated graphs can collapse repeated findings.
fn sorted_codes(report: &ValidationReport) -> std::collections::BTreeSet<Code> {
    report.codes().into_iter().collect()
}

fn candidate(i: usize, errors: usize) -> Candidate {
    let diags: Vec<Diagnostic> = (0..errors)
        .map(|e| Diagnostic::new(Code::Sem001, SourceSpan::new(e as u32 + 1, 1, e as u32 + 1, 2), "unknown"))
        .collect();
    Candidate {
        text: format!("candidate {i}\n"),
        report: Some(ValidationReport::from_diagnostics(diags)),
        origin: Origin::Model,
        attempt: 0,
    }
}

fn store_of(vectors: &[Vec<i8>]) -> DemoStore {
    let mut store = DemoStore::new(4, "fixed");
    for (i, v) in vectors.iter().enumerate() {
        store
            .insert(Demonstration {
                id: format!("d{:02}", vectors.len() - i),
                stage: Stage::GraphDraft,
                task_text: String::new(),
                payload: "graph g { concept a; }".to_string(),
                embedding: v.iter().map(|&x| x as f64).collect(),
            })
            .unwrap();
    }
    store
}

/// Repeatedly takes the best remaining entry under (score desc, id asc).
fn brute_force_top_k<'a>(store: &'a DemoStore, q: &[f64], k: usize) -> Vec<&'a str> {
    let mut left: BTreeMap<&str, f64> = store.entries.iter().map(|d| (d.id.as_str(), cosine(q, &d.embedding))).collect();
    let mut out = Vec::new();
    while out.len() < k && !left.is_empty() {
        let best = left
            .iter()
            .fold(None::<(&str, f64)>, |acc, (&id, &s)| match acc {
                Some((_, bs)) if bs >= s => acc,
                _ => Some((id, s)),
            })
            .unwrap()
            .0;
        left.remove(best);
        out.push(best);
    }
    out
}
