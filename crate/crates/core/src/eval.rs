//! Batch metrics over candidate and gold graph directories: the error-free
//! flag per candidate and node/edge differences against gold.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diff::{graph_diff, DiffReport};
use crate::dsl::parse_graph;
use crate::validator::lint_source;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TaskMetrics {
    pub task: String,
    pub error_free: bool,
    pub error_count: usize,
    /// Absent when either side fails to parse.
    pub diff: Option<DiffReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EvalSummary {
    pub tasks: Vec<TaskMetrics>,
    pub error_free: usize,
    /// Mean node difference over tasks with a diff.
    pub avg_nodes: f64,
    pub avg_edges: f64,
    /// Files present on only one side.
    pub unpaired: Vec<String>,
}

/// Scores paired `(name, candidate source, gold source)` triples.
pub fn evaluate_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str, &'a str)>) -> Vec<TaskMetrics> {
    pairs
        .into_iter()
        .map(|(task, candidate, gold)| {
            let report = lint_source(candidate);
            let diff = match (parse_graph(candidate).graph, parse_graph(gold).graph) {
                (Some(c), Some(g)) => Some(graph_diff(&c, &g)),
                _ => None,
            };
            TaskMetrics {
                task: task.to_string(),
                error_free: report.is_error_free(),
                error_count: report.error_count,
                diff,
            }
        })
        .collect()
}

pub fn summarize(tasks: Vec<TaskMetrics>, unpaired: Vec<String>) -> EvalSummary {
    let diffs: Vec<&DiffReport> = tasks.iter().filter_map(|t| t.diff.as_ref()).collect();
    let mean = |f: fn(&DiffReport) -> usize| {
        if diffs.is_empty() {
            0.0
        } else {
            diffs.iter().map(|d| f(d) as f64).sum::<f64>() / diffs.len() as f64
        }
    };
    EvalSummary {
        error_free: tasks.iter().filter(|t| t.error_free).count(),
        avg_nodes: mean(|d| d.node_diff),
        avg_edges: mean(|d| d.edge_diff),
        tasks,
        unpaired,
    }
}

fn dkg_files(dir: &Path) -> io::Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "dkg") {
            let name = path.file_name().expect("file has a name").to_string_lossy().into_owned();
            out.insert(name, fs::read_to_string(&path)?);
        }
    }
    Ok(out)
}

/// Pairs `.dkg` files by file name. Unpaired files are listed and left out
/// of every average.
pub fn evaluate_dirs(candidates: &Path, gold: &Path) -> io::Result<EvalSummary> {
    let cand = dkg_files(candidates)?;
    let gold = dkg_files(gold)?;
    let unpaired = cand
        .keys()
        .filter(|k| !gold.contains_key(*k))
        .chain(gold.keys().filter(|k| !cand.contains_key(*k)))
        .cloned()
        .collect();
    let pairs: Vec<(&str, &str, &str)> = cand
        .iter()
        .filter_map(|(k, c)| gold.get(k).map(|g| (k.as_str(), c.as_str(), g.as_str())))
        .collect();
    Ok(summarize(evaluate_pairs(pairs), unpaired))
}

impl EvalSummary {
    /// Plain-text table, one row per task plus an average row.
    pub fn to_table(&self) -> String {
        let mut out = format!("{:<32} {:>6} {:>4} {:>4}\n", "task", "e-free", "N", "E");
        for t in &self.tasks {
            let (n, e) = t
                .diff
                .as_ref()
                .map_or(("-".to_string(), "-".to_string()), |d| (d.node_diff.to_string(), d.edge_diff.to_string()));
            out.push_str(&format!(
                "{:<32} {:>6} {:>4} {:>4}\n",
                t.task,
                if t.error_free { "yes" } else { "no" },
                n,
                e
            ));
        }
        out.push_str(&format!(
            "{:<32} {:>6} {:>4.2} {:>4.2}\n",
            "average",
            format!("{}/{}", self.error_free, self.tasks.len()),
            self.avg_nodes,
            self.avg_edges
        ));
        for u in &self.unpaired {
            out.push_str(&format!("warning: {u} has no counterpart; excluded\n"));
        }
        out
    }
}
