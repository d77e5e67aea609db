//! Independent truth-evaluation of raw FOL formulas, used to check the
//! compiler. Quantifiers range over the whole universe with guards read
//! literally from the formula; counting is expanded into subset formulas.

use std::collections::BTreeMap;

use kdecl::constraint::{CountKind, Model, Quantifier};
use kdecl::fol::{FolNode, Formula, Term};
use kdecl::graph::normalize_name;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lookup(term: &Term, env: &[(String, usize)]) -> usize {
    let name = term.as_var().expect("oracle formulas use variables only");
    env.iter().rev().find(|(v, _)| v == name).map(|(_, o)| *o).expect("bound")
}

/// True iff exactly the members of `subset` hold.
fn subset_holds(values: &[bool], subset: u32) -> bool {
    values.iter().enumerate().all(|(i, v)| *v == (subset >> i & 1 == 1))
}

fn count_holds(kind: CountKind, k: u64, values: &[bool]) -> bool {
    // Disjunction over every subset of alternatives of an admissible size.
    (0u32..1 << values.len()).any(|subset| {
        let size = u64::from(subset.count_ones());
        let admissible = match kind {
            CountKind::Exactly => size == k,
            CountKind::AtMost => size <= k,
            CountKind::AtLeast => size >= k,
        };
        admissible && subset_holds(values, subset)
    })
}

pub fn eval(f: &Formula, model: &Model, env: &mut Vec<(String, usize)>) -> bool {
    match &f.node {
        FolNode::Atom { name, args } => {
            let tuple: Vec<usize> = args.iter().map(|a| lookup(a, env)).collect();
            model.holds(&normalize_name(name), &tuple)
        }
        FolNode::Equals { lhs, rhs, negated } => (lookup(lhs, env) == lookup(rhs, env)) != *negated,
        FolNode::Not { child } => !eval(child, model, env),
        FolNode::And { children } => children.iter().all(|c| eval(c, model, env)),
        FolNode::Or { children } => children.iter().any(|c| eval(c, model, env)),
        FolNode::Implies { lhs, rhs } => !eval(lhs, model, env) || eval(rhs, model, env),
        FolNode::Iff { lhs, rhs } => eval(lhs, model, env) == eval(rhs, model, env),
        FolNode::Quantified {
            quantifier,
            var,
            domain,
            body,
        } => {
            let mut values = (0..model.size()).map(|o| {
                env.push((var.clone(), o));
                let guard = domain.as_ref().is_none_or(|d| model.holds(&normalize_name(d), &[o]));
                let v = match quantifier {
                    Quantifier::ForAll => !guard || eval(body, model, env),
                    Quantifier::Exists => guard && eval(body, model, env),
                };
                env.pop();
                v
            });
            match quantifier {
                Quantifier::ForAll => values.all(|v| v),
                Quantifier::Exists => values.any(|v| v),
            }
        }
        FolNode::Count { kind, k, children } => {
            let values: Vec<bool> = children.iter().map(|c| eval(c, model, env)).collect();
            count_holds(*kind, *k, &values)
        }
    }
}

/// Predicate names and arities in a formula.
pub fn signature(f: &Formula) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    fn go(f: &Formula, out: &mut BTreeMap<String, usize>) {
        match &f.node {
            FolNode::Atom { name, args } => {
                out.insert(normalize_name(name), args.len());
            }
            FolNode::Quantified { domain: Some(d), body, .. } => {
                out.insert(normalize_name(d), 1);
                go(body, out);
            }
            _ => f.children().into_iter().for_each(|c| go(c, out)),
        }
    }
    go(f, &mut out);
    out
}

fn tuples(size: usize, arity: usize) -> Vec<Vec<usize>> {
    (0..size.pow(arity as u32))
        .map(|mut n| {
            (0..arity)
                .map(|_| {
                    let o = n % size;
                    n /= size;
                    o
                })
                .collect()
        })
        .collect()
}

/// Models over universes of 1..=`max_size` objects: exhaustive while the
/// number of ground atoms is at most 16, otherwise `samples` seeded random
/// interpretations.
pub fn models(sig: &BTreeMap<String, usize>, max_size: usize, samples: usize, seed: u64) -> Vec<Model> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for size in 1..=max_size {
        let atoms: Vec<(&str, Vec<usize>)> = sig
            .iter()
            .flat_map(|(p, &a)| tuples(size, a).into_iter().map(move |t| (p.as_str(), t)))
            .collect();
        let build = |bits: &dyn Fn(usize) -> bool| {
            let mut m = Model::new(size);
            for (i, (p, t)) in atoms.iter().enumerate() {
                if bits(i) {
                    m.set(p, t);
                }
            }
            m
        };
        if atoms.len() <= 16 {
            for mask in 0u32..1 << atoms.len() {
                out.push(build(&|i| mask >> i & 1 == 1));
            }
        } else {
            for _ in 0..samples {
                let bits: Vec<bool> = (0..atoms.len()).map(|_| rng.random_bool(0.5)).collect();
                out.push(build(&|i| bits[i]));
            }
        }
    }
    out
}
