use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graphmap::DiGraphMap;

use crate::constraint::{Constraint, CountKind, Expr, ExprNode};
use crate::diagnostic::{sort_diagnostics, Code, Diagnostic};
use crate::graph::{ConceptGraph, ConceptKind, Edge, EdgeKind, Relation};
use crate::span::SourceSpan;

use super::ValidationReport;

/// Runs the full rule catalogue. Output is sorted by position then code, so
/// the report is deterministic and validating twice gives the same result.
pub fn validate(graph: &ConceptGraph) -> ValidationReport {
    let mut out = Vec::new();
    unknown_endpoints(graph, &mut out);
    concepts(graph, &mut out);
    cycles(graph, EdgeKind::IsA, Code::Sem003, &mut out);
    cycles(graph, EdgeKind::Contains, Code::Sem004, &mut out);
    has_a_roles(graph, &mut out);
    duplicate_edges(graph, &mut out);
    dangling(graph, &mut out);
    for c in &graph.constraints {
        out.extend(constraint_diagnostics(graph, c));
    }
    sort_diagnostics(&mut out);
    ValidationReport::from_diagnostics(out)
}

fn edge_span(edge: &Edge) -> SourceSpan {
    edge.span.or_origin()
}

fn unknown_endpoints(graph: &ConceptGraph, out: &mut Vec<Diagnostic>) {
    for edge in &graph.edges {
        let mut reported = BTreeSet::new();
        for name in edge.endpoints() {
            if !graph.contains_concept(name) && reported.insert(name) {
                out.push(Diagnostic::new(
                    Code::Sem001,
                    edge_span(edge),
                    format!("`{}` edge refers to undeclared concept `{name}`", edge.kind()),
                ));
            }
        }
    }
}

fn concepts(graph: &ConceptGraph, out: &mut Vec<Diagnostic>) {
    for c in &graph.concepts {
        let span = c.span.or_origin();
        if let Some(labels) = &c.labels {
            let distinct: HashSet<&String> = labels.iter().collect();
            if c.kind == ConceptKind::Input {
                out.push(Diagnostic::new(
                    Code::Sem015,
                    span.clone(),
                    format!("input concept `{}` declares labels", c.name),
                ));
            } else if distinct.len() < 2 || distinct.len() != labels.len() {
                out.push(Diagnostic::new(
                    Code::Sem015,
                    span.clone(),
                    format!("label set of `{}` needs at least two distinct labels", c.name),
                ));
            }
            if labels.iter().any(|l| l == "etc" || l.ends_with("_etc")) {
                out.push(Diagnostic::new(
                    Code::Sem016,
                    span.clone(),
                    format!("label set of `{}` is not fully enumerated", c.name),
                ));
            }
        }
        if c.kind != ConceptKind::Decision {
            continue;
        }
        match graph.anchor_path(&c.name) {
            Ok(None) => out.push(
                Diagnostic::new(
                    Code::Sem002,
                    span,
                    format!("decision concept `{}` has no anchor", c.name),
                )
                .with_hint(format!(
                    "add `{} is_a <input concept>;` naming the input concept it labels",
                    c.name
                )),
            ),
            Ok(Some((anchor, depth))) if depth > 2 => out.push(Diagnostic::new(
                Code::Sem014,
                span,
                format!("decision concept `{}` reaches its anchor `{anchor}` through {depth} is_a steps", c.name),
            )),
            _ => {}
        }
    }
}

fn cycles(graph: &ConceptGraph, kind: EdgeKind, code: Code, out: &mut Vec<Diagnostic>) {
    let mut g: DiGraphMap<&str, ()> = DiGraphMap::new();
    let mut spans: HashMap<(&str, &str), SourceSpan> = HashMap::new();
    for edge in graph.edges.iter().filter(|e| e.kind() == kind) {
        let (Relation::IsA { source, target } | Relation::Contains { source, target }) = &edge.relation else {
            continue;
        };
        if !graph.contains_concept(source) || !graph.contains_concept(target) {
            continue;
        }
        g.add_edge(source, target, ());
        let span = edge_span(edge);
        spans
            .entry((source, target))
            .and_modify(|s| {
                if span < *s {
                    *s = span.clone()
                }
            })
            .or_insert(span);
    }
    for scc in tarjan_scc(&g) {
        let cyclic = scc.len() > 1 || g.contains_edge(scc[0], scc[0]);
        if !cyclic {
            continue;
        }
        let members: BTreeSet<&str> = scc.iter().copied().collect();
        let start = *members.iter().next().unwrap();
        let path = cycle_path(&g, &members, start);
        let span = spans
            .iter()
            .filter(|((s, t), _)| members.contains(s) && members.contains(t))
            .map(|(_, span)| span)
            .min()
            .cloned()
            .unwrap_or_default();
        out.push(Diagnostic::new(
            code,
            span,
            format!("`{kind}` cycle: {}", path.join(" -> ")),
        ));
    }
}

/// Shortest cycle through `start` inside the component, as a closed path.
fn cycle_path<'a>(g: &DiGraphMap<&'a str, ()>, members: &BTreeSet<&'a str>, start: &'a str) -> Vec<&'a str> {
    let mut prev: HashMap<&str, &str> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut next: Vec<&str> = g.neighbors(start).filter(|n| members.contains(n)).collect();
    next.sort_unstable();
    for n in next {
        if n == start {
            return vec![start, start];
        }
        if !prev.contains_key(n) {
            prev.insert(n, start);
            queue.push_back(n);
        }
    }
    while let Some(node) = queue.pop_front() {
        let mut next: Vec<&str> = g.neighbors(node).filter(|n| members.contains(n)).collect();
        next.sort_unstable();
        for n in next {
            if n == start {
                let mut path = vec![start, node];
                let mut cur = node;
                while let Some(&p) = prev.get(cur) {
                    if p == start {
                        break;
                    }
                    path.push(p);
                    cur = p;
                }
                path[1..].reverse();
                path.push(start);
                return path;
            }
            if !prev.contains_key(n) {
                prev.insert(n, node);
                queue.push_back(n);
            }
        }
    }
    vec![start]
}

fn has_a_roles(graph: &ConceptGraph, out: &mut Vec<Diagnostic>) {
    for edge in &graph.edges {
        let Relation::HasA { source, roles } = &edge.relation else {
            continue;
        };
        if roles.len() < 2 {
            out.push(Diagnostic::new(
                Code::Sem005,
                edge_span(edge),
                format!("`has_a` relation `{source}` declares {} role; at least two are needed", roles.len()),
            ));
        }
        let mut seen = HashSet::new();
        for role in roles {
            if !seen.insert(role.name.as_str()) {
                out.push(Diagnostic::new(
                    Code::Sem005,
                    edge_span(edge),
                    format!("`has_a` relation `{source}` repeats role name `{}`", role.name),
                ));
            }
        }
    }
}

fn duplicate_edges(graph: &ConceptGraph, out: &mut Vec<Diagnostic>) {
    let mut seen = HashSet::new();
    for edge in &graph.edges {
        let descriptor = edge.descriptor();
        if !seen.insert(descriptor.clone()) {
            out.push(Diagnostic::new(
                Code::Sem011,
                edge_span(edge),
                format!("edge {descriptor} is declared more than once"),
            ));
        }
    }
}

/// Concepts outside the largest weakly connected component. Ties go to the
/// component holding the earliest declaration.
fn dangling(graph: &ConceptGraph, out: &mut Vec<Diagnostic>) {
    let mut assigned: HashSet<&str> = HashSet::new();
    let mut components: Vec<Vec<&str>> = Vec::new();
    for c in &graph.concepts {
        if assigned.contains(c.name.as_str()) {
            continue;
        }
        let comp = graph.component_of(&c.name);
        assigned.extend(comp.iter().copied());
        components.push(comp);
    }
    if components.len() < 2 {
        return;
    }
    let main = components
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.len().cmp(&b.len()).then(ib.cmp(ia)))
        .map(|(i, _)| i)
        .unwrap();
    for (i, comp) in components.iter().enumerate() {
        if i == main {
            continue;
        }
        for name in comp {
            let concept = graph.concept(name).expect("component members are declared");
            out.push(Diagnostic::new(
                Code::Sem010,
                concept.span.or_origin(),
                format!("concept `{name}` is not connected to the main graph"),
            ));
        }
    }
}

enum Symbol {
    Unary,
    Role,
}

fn resolve(graph: &ConceptGraph, name: &str) -> Option<Symbol> {
    if graph.contains_concept(name) || graph.label_owner(name).is_some() {
        return Some(Symbol::Unary);
    }
    if graph.roles().any(|(role, _, _)| role == name) {
        return Some(Symbol::Role);
    }
    None
}

/// Anchor of a unary predicate: the concept's own anchor, or for a label the
/// anchor of the decision concept declaring it.
fn predicate_anchor(graph: &ConceptGraph, name: &str) -> Option<String> {
    let owner = if graph.contains_concept(name) {
        name.to_string()
    } else {
        graph.label_owner(name)?.name.clone()
    };
    graph.anchor_of(&owner).ok().flatten()
}

/// Checks that need no graph: variable binding and count bounds.
pub fn local_constraint_diagnostics(constraint: &Constraint) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    walk_constraint(&constraint.expr, &mut Vec::new(), &mut |expr, bound| {
        local_checks(expr, bound, &mut out);
    });
    out
}

fn local_checks(expr: &Expr, bound: &[&str], out: &mut Vec<Diagnostic>) {
    let span = expr.span.or_origin();
    match &expr.node {
        ExprNode::Predicate { name, args } => {
            let mut reported = BTreeSet::new();
            for arg in args {
                if !bound.contains(&arg.as_str()) && reported.insert(arg) {
                    out.push(
                        Diagnostic::new(
                            Code::Sem007,
                            span.clone(),
                            format!("variable `{arg}` in `{name}` is not bound by a quantifier"),
                        )
                        .with_hint(format!(
                            "quantify `{arg}` (e.g. `forall {arg}: concept({arg}) -> ...`) or use a bound variable"
                        )),
                    );
                }
            }
        }
        ExprNode::Count { kind, k, children } if *kind != CountKind::AtMost && *k > children.len() => {
            out.push(Diagnostic::new(
                Code::Sem008,
                span,
                format!("`{kind}({k}, ...)` lists only {} alternatives", children.len()),
            ));
        }
        _ => {}
    }
}

fn walk_constraint<'e>(expr: &'e Expr, bound: &mut Vec<&'e str>, visit: &mut impl FnMut(&'e Expr, &[&'e str])) {
    visit(expr, bound);
    if let ExprNode::Quantified { var, body, .. } = &expr.node {
        bound.push(var);
        walk_constraint(body, bound, visit);
        bound.pop();
        return;
    }
    for child in expr.children() {
        walk_constraint(child, bound, visit);
    }
}

/// Every constraint rule, grounded in `graph`.
pub fn constraint_diagnostics(graph: &ConceptGraph, constraint: &Constraint) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    walk_constraint(&constraint.expr, &mut Vec::new(), &mut |expr, bound| {
        local_checks(expr, bound, &mut out);
        let span = expr.span.or_origin();
        match &expr.node {
            ExprNode::Quantified { var, domain, .. } => match resolve(graph, domain) {
                None => out.push(Diagnostic::new(
                    Code::Sem001,
                    span,
                    format!("domain `{domain}` of variable `{var}` is not a declared concept"),
                )),
                Some(Symbol::Role) => out.push(Diagnostic::new(
                    Code::Sem006,
                    span,
                    format!("role `{domain}` relates two concepts and cannot be a quantifier domain"),
                )),
                Some(Symbol::Unary) => {}
            },
            ExprNode::Predicate { name, args } => match resolve(graph, name) {
                None => out.push(Diagnostic::new(
                    Code::Sem001,
                    span,
                    format!("predicate `{name}` is not a declared concept, label or role"),
                )),
                Some(Symbol::Unary) if args.len() != 1 => out.push(Diagnostic::new(
                    Code::Sem006,
                    span,
                    format!("concept predicate `{name}` takes one argument, got {}", args.len()),
                )),
                Some(Symbol::Role) if args.len() != 2 => out.push(Diagnostic::new(
                    Code::Sem006,
                    span,
                    format!("role predicate `{name}` takes two arguments, got {}", args.len()),
                )),
                _ => {}
            },
            ExprNode::Count {
                kind: CountKind::Exactly,
                k: 1,
                children,
            } => {
                let anchors: BTreeMap<String, &str> = children
                    .iter()
                    .filter_map(|c| match &c.node {
                        ExprNode::Predicate { name, args } if args.len() == 1 => {
                            predicate_anchor(graph, name).map(|a| (a, name.as_str()))
                        }
                        _ => None,
                    })
                    .collect();
                if anchors.len() > 1 {
                    let list: Vec<String> = anchors.iter().map(|(a, p)| format!("`{p}` on `{a}`")).collect();
                    out.push(Diagnostic::new(
                        Code::Sem009,
                        span,
                        format!("mutually exclusive labels attach to different anchors: {}", list.join(", ")),
                    ));
                }
            }
            _ => {}
        }
    });
    out
}
