use serde::{Deserialize, Serialize};

use crate::diagnostic::{sort_diagnostics, Code, Diagnostic, ErrorClass, Severity};
use crate::span::SourceSpan;

/// Sentinel rendered when a graph has nothing to fix.
pub const NO_ERRORS: &str = "No errors found.";

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidationReport {
    pub diagnostics: Vec<Diagnostic>,
    pub error_count: usize,
    pub warning_count: usize,
}

impl ValidationReport {
    pub fn from_diagnostics(mut diagnostics: Vec<Diagnostic>) -> Self {
        sort_diagnostics(&mut diagnostics);
        diagnostics.dedup();
        let error_count = diagnostics.iter().filter(|d| d.is_error()).count();
        ValidationReport {
            warning_count: diagnostics.len() - error_count,
            error_count,
            diagnostics,
        }
    }

    /// True when no error-severity diagnostic is present. Warnings do not
    /// count against a graph.
    pub fn is_error_free(&self) -> bool {
        self.error_count == 0
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }

    pub fn count_class(&self, class: ErrorClass) -> usize {
        self.errors().filter(|d| d.class() == class).count()
    }

    pub fn codes(&self) -> Vec<Code> {
        self.diagnostics.iter().map(|d| d.code).collect()
    }

    /// One JSON object per line, in report order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for d in &self.diagnostics {
            out.push_str(&serde_json::to_string(&MachineRecord::from(d)).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, serde_json::Error> {
        let diagnostics = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str::<MachineRecord>(l).map(Diagnostic::from))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_diagnostics(diagnostics))
    }
}

/// Flat machine-readable form of a diagnostic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineRecord {
    pub code: Code,
    pub severity: Severity,
    pub line: u32,
    pub col: u32,
    pub end_line: u32,
    pub end_col: u32,
    pub message: String,
    pub hint: String,
}

impl From<&Diagnostic> for MachineRecord {
    fn from(d: &Diagnostic) -> Self {
        MachineRecord {
            code: d.code,
            severity: d.severity,
            line: d.span.start_line,
            col: d.span.start_col,
            end_line: d.span.end_line,
            end_col: d.span.end_col,
            message: d.message.clone(),
            hint: d.hint.clone(),
        }
    }
}

impl From<MachineRecord> for Diagnostic {
    fn from(r: MachineRecord) -> Self {
        Diagnostic {
            code: r.code,
            severity: r.severity,
            span: SourceSpan::new(r.line, r.col, r.end_line, r.end_col),
            message: r.message,
            hint: r.hint,
        }
    }
}

/// Renders diagnostics as the numbered plain-text feedback fed back to the
/// model. Errors come first, then warnings; at most `max_items` lines are
/// listed and the remainder is summarised.
pub fn render_feedback(diagnostics: &[Diagnostic], max_items: usize) -> String {
    let mut ordered: Vec<&Diagnostic> = diagnostics.iter().collect();
    ordered.sort_by(|a, b| (!a.is_error(), a.sort_key()).cmp(&(!b.is_error(), b.sort_key())));
    let mut out = String::new();
    if ordered.iter().all(|d| !d.is_error()) {
        out.push_str(NO_ERRORS);
        out.push('\n');
        if ordered.is_empty() {
            return out;
        }
        out.push_str("Warnings:\n");
    }
    let shown = ordered.len().min(max_items.max(1));
    for (i, d) in ordered.iter().take(shown).enumerate() {
        out.push_str(&format!(
            "{}. {} at line {}, col {}: {}. Fix: {}.\n",
            i + 1,
            d.code,
            d.span.start_line,
            d.span.start_col,
            d.message.trim_end_matches('.'),
            d.hint.trim_end_matches('.'),
        ));
    }
    if ordered.len() > shown {
        out.push_str(&format!("+{} more\n", ordered.len() - shown));
    }
    out
}
