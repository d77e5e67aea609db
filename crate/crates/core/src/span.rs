//! Source positions.
//!
//! Positions are 1-based line/column pairs counted in chars. The end
//! position is exclusive: a one-character token at column 3 spans `3..4`.

use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SourceSpan {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl SourceSpan {
    pub fn new(start_line: u32, start_col: u32, end_line: u32, end_col: u32) -> Self {
        SourceSpan {
            file: None,
            start_line,
            start_col,
            end_line,
            end_col,
        }
    }

    /// Zero-width span at the top of the document, used for nodes that were
    /// built programmatically.
    pub fn origin() -> Self {
        SourceSpan::new(1, 1, 1, 1)
    }

    pub fn with_file(mut self, file: impl Into<String>) -> Self {
        self.file = Some(file.into());
        self
    }

    /// Smallest span covering both `self` and `other`.
    pub fn join(&self, other: &SourceSpan) -> SourceSpan {
        let (start_line, start_col) = (self.start_line, self.start_col)
            .min((other.start_line, other.start_col));
        let (end_line, end_col) = (self.end_line, self.end_col).max((other.end_line, other.end_col));
        SourceSpan {
            file: self.file.clone(),
            start_line,
            start_col,
            end_line,
            end_col,
        }
    }

    /// Shifts the span down by `lines`, used when a line of a multi-line file
    /// is parsed on its own.
    pub fn offset_lines(mut self, lines: u32) -> Self {
        self.start_line += lines;
        self.end_line += lines;
        self
    }

    pub fn start(&self) -> (u32, u32) {
        (self.start_line, self.start_col)
    }
}

impl Default for SourceSpan {
    fn default() -> Self {
        SourceSpan::origin()
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{file}:")?;
        }
        write!(f, "{}:{}", self.start_line, self.start_col)
    }
}

/// Optional span attached to an AST node.
///
/// Spans never take part in equality or hashing, so two ASTs compare equal
/// when they have the same structure regardless of where they came from.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Span(pub Option<SourceSpan>);

impl Span {
    pub const NONE: Span = Span(None);

    pub fn get(&self) -> Option<&SourceSpan> {
        self.0.as_ref()
    }

    pub fn or_origin(&self) -> SourceSpan {
        self.0.clone().unwrap_or_default()
    }
}

impl From<SourceSpan> for Span {
    fn from(span: SourceSpan) -> Self {
        Span(Some(span))
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

impl Hash for Span {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

/// Maps byte offsets of a text to line/column positions.
#[derive(Debug, Clone)]
pub struct LineIndex<'a> {
    text: &'a str,
    line_starts: Vec<usize>,
}

impl<'a> LineIndex<'a> {
    pub fn new(text: &'a str) -> Self {
        let mut line_starts = vec![0];
        line_starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        LineIndex { text, line_starts }
    }

    pub fn position(&self, offset: usize) -> (u32, u32) {
        let offset = offset.min(self.text.len());
        let line = match self.line_starts.binary_search(&offset) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let start = self.line_starts[line];
        let col = self.text[start..offset].chars().count();
        (line as u32 + 1, col as u32 + 1)
    }

    pub fn span(&self, start: usize, end: usize) -> SourceSpan {
        let (sl, sc) = self.position(start);
        let (el, ec) = self.position(end.max(start));
        SourceSpan::new(sl, sc, el, ec)
    }

    pub fn line_count(&self) -> usize {
        self.line_starts.len()
    }

    /// Number of chars on the 1-based `line`, excluding the newline.
    pub fn line_len(&self, line: u32) -> Option<usize> {
        let idx = (line as usize).checked_sub(1)?;
        let start = *self.line_starts.get(idx)?;
        let end = self
            .line_starts
            .get(idx + 1)
            .map(|next| next - 1)
            .unwrap_or(self.text.len());
        Some(self.text[start..end].trim_end_matches('\r').chars().count())
    }

    /// True when `span` lies inside the text.
    pub fn contains(&self, span: &SourceSpan) -> bool {
        let within = |line: u32, col: u32| match self.line_len(line) {
            Some(len) => col >= 1 && col as usize <= len + 1,
            None => false,
        };
        within(span.start_line, span.start_col)
            && within(span.end_line, span.end_col)
            && span.start() <= (span.end_line, span.end_col)
    }
}
