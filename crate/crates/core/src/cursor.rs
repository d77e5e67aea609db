//! Token cursor with diagnostic collection, shared by the parsers.

use crate::diagnostic::{Code, Diagnostic};
use crate::lexer::{Tok, Token};
use crate::span::SourceSpan;

/// Marker for a parse failure that has already been reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reported;

pub type PResult<T> = Result<T, Reported>;

pub struct Cursor<'t> {
    tokens: &'t [Token],
    pos: usize,
    pub diagnostics: Vec<Diagnostic>,
}

impl<'t> Cursor<'t> {
    pub fn new(tokens: &'t [Token]) -> Self {
        debug_assert!(matches!(tokens.last().map(|t| &t.tok), Some(Tok::Eof)));
        Cursor {
            tokens,
            pos: 0,
            diagnostics: Vec::new(),
        }
    }

    pub fn peek(&self) -> &'t Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    pub fn peek_at(&self, ahead: usize) -> &'t Token {
        &self.tokens[(self.pos + ahead).min(self.tokens.len() - 1)]
    }

    pub fn at(&self, tok: &Tok) -> bool {
        &self.peek().tok == tok
    }

    pub fn at_eof(&self) -> bool {
        self.at(&Tok::Eof)
    }

    pub fn bump(&mut self) -> &'t Token {
        let token = self.peek();
        if token.tok != Tok::Eof {
            self.pos += 1;
        }
        token
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.at(tok) {
            self.bump();
            true
        } else {
            false
        }
    }

    /// Span of the most recently consumed token.
    pub fn prev_span(&self) -> SourceSpan {
        self.tokens[self.pos.saturating_sub(1)].span.clone()
    }

    pub fn error(&mut self, code: Code, span: SourceSpan, message: impl Into<String>) -> Reported {
        self.diagnostics.push(Diagnostic::new(code, span, message));
        Reported
    }

    pub fn error_here(&mut self, code: Code, message: impl Into<String>) -> Reported {
        let span = self.peek().span.clone();
        let code = if self.at_eof() && code != Code::Syn001 { Code::Syn004 } else { code };
        self.error(code, span, message)
    }

    pub fn expect(&mut self, tok: Tok, context: &str) -> PResult<&'t Token> {
        if self.at(&tok) {
            return Ok(self.bump());
        }
        let found = self.peek().tok.describe();
        Err(self.error_here(
            Code::Syn002,
            format!("expected `{}` {context}, found {found}", tok.symbol()),
        ))
    }

    pub fn expect_ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        let token = self.peek();
        if let Tok::Ident(name) = &token.tok {
            self.bump();
            return Ok((name.clone(), token.span.clone()));
        }
        let found = token.tok.describe();
        Err(self.error(Code::Syn001, token.span.clone(), format!("expected {what}, found {found}")))
    }

    /// Skips to just past the next `;`, or up to (not past) a `}` or the end.
    pub fn recover_statement(&mut self) {
        let mut depth = 0usize;
        loop {
            match &self.peek().tok {
                Tok::Eof => return,
                Tok::Semi if depth == 0 => {
                    self.bump();
                    return;
                }
                Tok::RBrace if depth == 0 => return,
                Tok::LParen | Tok::LBrace => depth += 1,
                Tok::RParen | Tok::RBrace => depth = depth.saturating_sub(1),
                _ => {}
            }
            self.bump();
        }
    }
}
