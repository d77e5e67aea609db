//! Tokenizer shared by the graph language and the FOL surface syntax.

use crate::diagnostic::{Code, Diagnostic};
use crate::span::{LineIndex, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(u64),
    DocComment(String),
    Graph,
    Concept,
    Decision,
    Labels,
    IsA,
    Contains,
    HasA,
    Constraint,
    Forall,
    Exists,
    In,
    And,
    Or,
    Not,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Colon,
    Semi,
    Arrow,
    Iff,
    Eq,
    Neq,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(name) => format!("identifier `{name}`"),
            Tok::Number(n) => format!("number `{n}`"),
            Tok::DocComment(_) => "doc comment".into(),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Tok::Graph => "graph",
            Tok::Concept => "concept",
            Tok::Decision => "decision",
            Tok::Labels => "labels",
            Tok::IsA => "is_a",
            Tok::Contains => "contains",
            Tok::HasA => "has_a",
            Tok::Constraint => "constraint",
            Tok::Forall => "forall",
            Tok::Exists => "exists",
            Tok::In => "in",
            Tok::And => "and",
            Tok::Or => "or",
            Tok::Not => "not",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Semi => ";",
            Tok::Arrow => "->",
            Tok::Iff => "<->",
            Tok::Eq => "=",
            Tok::Neq => "!=",
            Tok::Ident(_) | Tok::Number(_) | Tok::DocComment(_) | Tok::Eof => "",
        }
    }
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "graph" => Tok::Graph,
        "concept" => Tok::Concept,
        "decision" => Tok::Decision,
        "labels" => Tok::Labels,
        "is_a" => Tok::IsA,
        "contains" => Tok::Contains,
        "has_a" => Tok::HasA,
        "constraint" => Tok::Constraint,
        "forall" => Tok::Forall,
        "exists" => Tok::Exists,
        "in" => Tok::In,
        "and" => Tok::And,
        "or" => Tok::Or,
        "not" => Tok::Not,
        _ => return None,
    })
}

/// Identifiers that name counting operators inside formulas.
pub const COUNT_WORDS: &[&str] = &["exactly_one", "exactly", "at_most", "at_least", "at_most_one"];

pub fn is_reserved(word: &str) -> bool {
    keyword(word).is_some() || COUNT_WORDS.contains(&word)
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub start: usize,
    pub end: usize,
    pub span: SourceSpan,
}

pub fn tokenize(text: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let index = LineIndex::new(text);
    let mut tokens = Vec::new();
    let mut diagnostics = Vec::new();
    let bytes = text.as_bytes();
    let mut chars = text.char_indices().peekable();
    let push = |tokens: &mut Vec<Token>, tok: Tok, start: usize, end: usize| {
        tokens.push(Token {
            tok,
            start,
            end,
            span: index.span(start, end),
        });
    };

    while let Some((start, ch)) = chars.next() {
        let next_is = |b: u8| bytes.get(start + 1) == Some(&b);
        match ch {
            c if c.is_whitespace() => {}
            '/' if next_is(b'/') => {
                let end = text[start..].find('\n').map(|i| start + i).unwrap_or(text.len());
                let body = &text[start..end];
                if let Some(doc) = body.strip_prefix("///") {
                    push(&mut tokens, Tok::DocComment(doc.trim().to_string()), start, end);
                }
                while chars.peek().is_some_and(|&(i, _)| i < end) {
                    chars.next();
                }
            }
            'a'..='z' | 'A'..='Z' => {
                let mut end = start + 1;
                while let Some(&(i, c)) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        end = i + 1;
                        chars.next();
                    } else {
                        break;
                    }
                }
                let word = &text[start..end];
                let tok = keyword(word).unwrap_or_else(|| Tok::Ident(word.to_string()));
                push(&mut tokens, tok, start, end);
            }
            '0'..='9' => {
                let mut end = start + 1;
                while let Some(&(i, c)) = chars.peek() {
                    if c.is_ascii_digit() {
                        end = i + 1;
                        chars.next();
                    } else {
                        break;
                    }
                }
                match text[start..end].parse::<u64>() {
                    Ok(n) => push(&mut tokens, Tok::Number(n), start, end),
                    Err(_) => diagnostics.push(Diagnostic::new(
                        Code::Syn007,
                        index.span(start, end),
                        "number is too large",
                    )),
                }
            }
            '{' => push(&mut tokens, Tok::LBrace, start, start + 1),
            '}' => push(&mut tokens, Tok::RBrace, start, start + 1),
            '(' => push(&mut tokens, Tok::LParen, start, start + 1),
            ')' => push(&mut tokens, Tok::RParen, start, start + 1),
            ',' => push(&mut tokens, Tok::Comma, start, start + 1),
            ':' => push(&mut tokens, Tok::Colon, start, start + 1),
            ';' => push(&mut tokens, Tok::Semi, start, start + 1),
            '=' if next_is(b'>') => {
                chars.next();
                push(&mut tokens, Tok::Arrow, start, start + 2);
            }
            '=' => push(&mut tokens, Tok::Eq, start, start + 1),
            '-' if next_is(b'>') => {
                chars.next();
                push(&mut tokens, Tok::Arrow, start, start + 2);
            }
            '<' if text[start..].starts_with("<->") => {
                chars.next();
                chars.next();
                push(&mut tokens, Tok::Iff, start, start + 3);
            }
            '!' if next_is(b'=') => {
                chars.next();
                push(&mut tokens, Tok::Neq, start, start + 2);
            }
            '!' | '~' => push(&mut tokens, Tok::Not, start, start + 1),
            '&' => {
                let mut end = start + 1;
                if next_is(b'&') {
                    chars.next();
                    end += 1;
                }
                push(&mut tokens, Tok::And, start, end);
            }
            '|' => {
                let mut end = start + 1;
                if next_is(b'|') {
                    chars.next();
                    end += 1;
                }
                push(&mut tokens, Tok::Or, start, end);
            }
            '∀' | '∃' | '∧' | '∨' | '¬' | '→' | '↔' | '≠' => {
                let tok = match ch {
                    '∀' => Tok::Forall,
                    '∃' => Tok::Exists,
                    '∧' => Tok::And,
                    '∨' => Tok::Or,
                    '¬' => Tok::Not,
                    '→' => Tok::Arrow,
                    '↔' => Tok::Iff,
                    _ => Tok::Neq,
                };
                push(&mut tokens, tok, start, start + ch.len_utf8());
            }
            other => diagnostics.push(Diagnostic::new(
                Code::Syn005,
                index.span(start, start + other.len_utf8()),
                format!("unexpected character `{other}`"),
            )),
        }
    }
    let end = text.len();
    push(&mut tokens, Tok::Eof, end, end);
    (tokens, diagnostics)
}
