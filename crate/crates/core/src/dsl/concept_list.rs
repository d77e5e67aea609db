//! Bulleted concept lists, the artifact between a task description and the
//! first graph draft:
//!
//! ```text
//! - sentence (input)
//! - pair_label (decision): entailment, contradiction, neutral
//! ```
//!
//! Lines that do not start with a bullet are ignored so a model's prose
//! around the list does no harm.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::diagnostic::{Code, Diagnostic};
use crate::graph::{normalize_name, ConceptKind};
use crate::span::SourceSpan;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptEntry {
    pub name: String,
    pub kind: ConceptKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl ConceptEntry {
    pub fn new(name: &str, kind: ConceptKind) -> Self {
        ConceptEntry {
            name: normalize_name(name),
            kind,
            labels: None,
        }
    }
}

fn is_placeholder(label: &str) -> bool {
    matches!(label, "etc" | "and_so_on" | "others" | "") || label.ends_with("_etc")
}

pub fn parse_concept_list(text: &str) -> (Vec<ConceptEntry>, Vec<Diagnostic>) {
    let mut entries: Vec<ConceptEntry> = Vec::new();
    let mut diagnostics = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i as u32 + 1;
        let trimmed = raw.trim_start();
        let indent = (raw.len() - trimmed.len()) as u32;
        let Some(body) = strip_bullet(trimmed) else {
            continue;
        };
        let line_span = SourceSpan::new(line_no, indent + 1, line_no, raw.trim_end().chars().count() as u32 + 1);
        let Some(entry) = parse_entry(body) else {
            diagnostics.push(Diagnostic::new(
                Code::Syn008,
                line_span,
                format!("cannot read concept entry `{}`", body.trim()),
            ));
            continue;
        };
        if entries.iter().any(|e| e.name == entry.name) {
            diagnostics.push(Diagnostic::new(
                Code::Sem013,
                line_span,
                format!("concept `{}` is listed more than once", entry.name),
            ));
            continue;
        }
        if let Some(labels) = &entry.labels {
            if labels.iter().any(|l| is_placeholder(l)) {
                diagnostics.push(Diagnostic::new(
                    Code::Sem016,
                    line_span.clone(),
                    format!("label set of `{}` is not fully enumerated", entry.name),
                ));
            }
            let distinct: HashSet<&String> = labels.iter().collect();
            if entry.kind == ConceptKind::Input {
                diagnostics.push(Diagnostic::new(
                    Code::Sem015,
                    line_span,
                    format!("input concept `{}` has a label set", entry.name),
                ));
            } else if distinct.len() < 2 || distinct.len() != labels.len() {
                diagnostics.push(Diagnostic::new(
                    Code::Sem015,
                    line_span,
                    format!("label set of `{}` needs at least two distinct labels", entry.name),
                ));
            }
        }
        entries.push(entry);
    }
    (entries, diagnostics)
}

fn strip_bullet(line: &str) -> Option<&str> {
    if let Some(rest) = line.strip_prefix("- ").or_else(|| line.strip_prefix("* ")) {
        return Some(rest);
    }
    let digits = line.chars().take_while(char::is_ascii_digit).count();
    if digits > 0 {
        return line[digits..].strip_prefix(". ");
    }
    None
}

fn parse_entry(body: &str) -> Option<ConceptEntry> {
    let open = body.find('(')?;
    let close = open + body[open..].find(')')?;
    let name = normalize_name(body[..open].trim().trim_matches('`'));
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return None;
    }
    let kind = match body[open + 1..close].trim().to_ascii_lowercase().as_str() {
        "input" => ConceptKind::Input,
        "decision" | "output" => ConceptKind::Decision,
        _ => return None,
    };
    let rest = body[close + 1..].trim();
    let labels = match rest.strip_prefix(':') {
        Some(list) if !list.trim().is_empty() => Some(list.split(',').map(normalize_name).collect()),
        Some(_) => return None,
        None if rest.is_empty() => None,
        None => return None,
    };
    Some(ConceptEntry { name, kind, labels })
}

pub fn emit_concept_list(entries: &[ConceptEntry]) -> String {
    entries
        .iter()
        .map(|e| {
            let labels = e
                .labels
                .as_ref()
                .map(|l| format!(": {}", l.join(", ")))
                .unwrap_or_default();
            format!("- {} ({}){labels}\n", e.name, e.kind)
        })
        .collect()
}
