//! Recursive-descent parser for FOL surface syntax.
//!
//! Precedence from loosest to tightest: `<->`, `->` (both right
//! associative), `or`, `and`, `not`/quantifiers, atoms. A quantifier body
//! extends as far to the right as possible.

use crate::constraint::{CountKind, Quantifier};
use crate::cursor::{Cursor, PResult};
use crate::diagnostic::{Code, Diagnostic};
use crate::lexer::{tokenize, Tok, COUNT_WORDS};
use crate::span::{SourceSpan, Span};

use super::ast::{FolNode, Formula, Term};

#[derive(Debug, Clone, PartialEq)]
pub struct FolParse {
    pub formula: Option<Formula>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Parses a single formula. Trailing tokens are a syntax error.
pub fn parse_fol(text: &str) -> FolParse {
    let (tokens, mut diagnostics) = tokenize(text);
    let mut cursor = Cursor::new(&tokens);
    let parsed = parse_formula(&mut cursor);
    let formula = match parsed {
        Ok(f) if cursor.at_eof() => Some(f),
        Ok(_) => {
            let found = cursor.peek().tok.describe();
            cursor.error_here(Code::Syn003, format!("unexpected {found} after the end of the formula"));
            None
        }
        Err(_) => None,
    };
    diagnostics.append(&mut cursor.diagnostics);
    let formula = if diagnostics.iter().any(Diagnostic::is_error) { None } else { formula };
    FolParse { formula, diagnostics }
}

/// One parsed line of a `.fol` file.
#[derive(Debug, Clone, PartialEq)]
pub struct FolLine {
    /// 1-based line number in the file.
    pub line: u32,
    pub text: String,
    pub parse: FolParse,
}

/// Parses a `.fol` document: one formula per line, `#` starts a comment,
/// blank lines are skipped. Spans refer to lines of the whole document.
pub fn parse_fol_file(text: &str) -> Vec<FolLine> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let body = raw.split('#').next().unwrap_or("").trim_end();
            if body.trim().is_empty() {
                return None;
            }
            let mut parse = parse_fol(body);
            let shift = i as u32;
            for d in &mut parse.diagnostics {
                d.span = d.span.clone().offset_lines(shift);
            }
            if let Some(f) = &mut parse.formula {
                shift_formula(f, shift);
            }
            Some(FolLine {
                line: shift + 1,
                text: body.trim().to_string(),
                parse,
            })
        })
        .collect()
}

fn shift_span(span: &mut Span, lines: u32) {
    if let Some(s) = span.0.take() {
        span.0 = Some(s.offset_lines(lines));
    }
}

fn shift_term(term: &mut Term, lines: u32) {
    match term {
        Term::Var { span, .. } | Term::Number { span, .. } => shift_span(span, lines),
        Term::App { args, span, .. } => {
            shift_span(span, lines);
            args.iter_mut().for_each(|a| shift_term(a, lines));
        }
    }
}

fn shift_formula(f: &mut Formula, lines: u32) {
    shift_span(&mut f.span, lines);
    match &mut f.node {
        FolNode::Atom { args, .. } => args.iter_mut().for_each(|a| shift_term(a, lines)),
        FolNode::Equals { lhs, rhs, .. } => {
            shift_term(lhs, lines);
            shift_term(rhs, lines);
        }
        FolNode::Not { child } => shift_formula(child, lines),
        FolNode::And { children } | FolNode::Or { children } | FolNode::Count { children, .. } => {
            children.iter_mut().for_each(|c| shift_formula(c, lines))
        }
        FolNode::Implies { lhs, rhs } | FolNode::Iff { lhs, rhs } => {
            shift_formula(lhs, lines);
            shift_formula(rhs, lines);
        }
        FolNode::Quantified { body, .. } => shift_formula(body, lines),
    }
}

fn node(node: FolNode, span: SourceSpan) -> Formula {
    Formula {
        node,
        span: span.into(),
    }
}

fn span_of(f: &Formula) -> SourceSpan {
    f.span.or_origin()
}

pub(crate) fn parse_formula(c: &mut Cursor) -> PResult<Formula> {
    parse_iff(c)
}

fn parse_iff(c: &mut Cursor) -> PResult<Formula> {
    let lhs = parse_implies(c)?;
    if c.eat(&Tok::Iff) {
        let rhs = parse_iff(c)?;
        let span = span_of(&lhs).join(&span_of(&rhs));
        return Ok(node(
            FolNode::Iff {
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            },
            span,
        ));
    }
    Ok(lhs)
}

fn parse_implies(c: &mut Cursor) -> PResult<Formula> {
    let lhs = parse_or(c)?;
    if c.eat(&Tok::Arrow) {
        let rhs = parse_implies(c)?;
        let span = span_of(&lhs).join(&span_of(&rhs));
        return Ok(node(
            FolNode::Implies {
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            },
            span,
        ));
    }
    Ok(lhs)
}

fn parse_chain(
    c: &mut Cursor,
    op: Tok,
    operand: fn(&mut Cursor) -> PResult<Formula>,
    build: fn(Vec<Formula>) -> FolNode,
) -> PResult<Formula> {
    let first = operand(c)?;
    if !c.at(&op) {
        return Ok(first);
    }
    let mut children = vec![first];
    while c.eat(&op) {
        children.push(operand(c)?);
    }
    let span = span_of(&children[0]).join(&span_of(children.last().unwrap()));
    Ok(node(build(children), span))
}

fn parse_or(c: &mut Cursor) -> PResult<Formula> {
    parse_chain(c, Tok::Or, parse_and, |children| FolNode::Or { children })
}

fn parse_and(c: &mut Cursor) -> PResult<Formula> {
    parse_chain(c, Tok::And, parse_unary, |children| FolNode::And { children })
}

fn parse_unary(c: &mut Cursor) -> PResult<Formula> {
    match c.peek().tok {
        Tok::Not => {
            let start = c.bump().span.clone();
            let child = parse_unary(c)?;
            let span = start.join(&span_of(&child));
            Ok(node(FolNode::Not { child: Box::new(child) }, span))
        }
        Tok::Forall | Tok::Exists => parse_quantified(c),
        _ => parse_primary(c),
    }
}

fn parse_quantified(c: &mut Cursor) -> PResult<Formula> {
    let start = c.bump();
    let quantifier = if start.tok == Tok::Forall {
        Quantifier::ForAll
    } else {
        Quantifier::Exists
    };
    let (var, _) = c.expect_ident("a variable name after the quantifier")?;
    let domain = if c.eat(&Tok::In) {
        Some(c.expect_ident("a domain concept after `in`")?.0)
    } else {
        None
    };
    c.expect(Tok::Colon, "after the quantified variable")?;
    let body = parse_formula(c)?;
    let span = start.span.join(&span_of(&body));
    Ok(node(
        FolNode::Quantified {
            quantifier,
            var,
            domain,
            body: Box::new(body),
        },
        span,
    ))
}

fn parse_primary(c: &mut Cursor) -> PResult<Formula> {
    let token = c.peek();
    match &token.tok {
        Tok::LParen => {
            c.bump();
            let mut inner = parse_formula(c)?;
            c.expect(Tok::RParen, "to close the parenthesis")?;
            inner.span = token.span.join(&c.prev_span()).into();
            Ok(inner)
        }
        Tok::Ident(name) if COUNT_WORDS.contains(&name.as_str()) && c.peek_at(1).tok == Tok::LParen => {
            parse_count(c)
        }
        Tok::Ident(_) | Tok::Number(_) => {
            let lhs = parse_term(c)?;
            let negated = match c.peek().tok {
                Tok::Eq => false,
                Tok::Neq => true,
                _ => {
                    return match lhs {
                        Term::App { name, args, span } => Ok(node(FolNode::Atom { name, args }, span.or_origin())),
                        other => Err(c.error(
                            Code::Syn002,
                            other.span().or_origin(),
                            "expected `(` and arguments after the predicate name",
                        )),
                    };
                }
            };
            c.bump();
            let rhs = parse_term(c)?;
            let span = lhs.span().or_origin().join(&rhs.span().or_origin());
            Ok(node(FolNode::Equals { lhs, rhs, negated }, span))
        }
        other => {
            let found = other.describe();
            Err(c.error_here(Code::Syn003, format!("expected a predicate, found {found}")))
        }
    }
}

fn parse_term(c: &mut Cursor) -> PResult<Term> {
    let token = c.bump();
    match &token.tok {
        Tok::Number(value) => Ok(Term::Number {
            value: *value,
            span: token.span.clone().into(),
        }),
        Tok::Ident(name) => {
            if !c.eat(&Tok::LParen) {
                return Ok(Term::Var {
                    name: name.clone(),
                    span: token.span.clone().into(),
                });
            }
            let mut args = vec![parse_term(c)?];
            while c.eat(&Tok::Comma) {
                args.push(parse_term(c)?);
            }
            c.expect(Tok::RParen, "to close the argument list")?;
            Ok(Term::App {
                name: name.clone(),
                args,
                span: token.span.join(&c.prev_span()).into(),
            })
        }
        other => {
            let found = other.describe();
            Err(c.error(Code::Syn001, token.span.clone(), format!("expected a variable, found {found}")))
        }
    }
}

fn parse_count(c: &mut Cursor) -> PResult<Formula> {
    let start = c.bump();
    let Tok::Ident(word) = &start.tok else { unreachable!() };
    c.expect(Tok::LParen, "after the counting operator")?;
    let (kind, k) = match word.as_str() {
        "exactly_one" => (CountKind::Exactly, Some(1)),
        "at_most_one" => (CountKind::AtMost, Some(1)),
        "exactly" => (CountKind::Exactly, None),
        "at_most" => (CountKind::AtMost, None),
        _ => (CountKind::AtLeast, None),
    };
    let k = match k {
        Some(k) => k,
        None => {
            let token = c.peek();
            let Tok::Number(k) = token.tok else {
                return Err(c.error_here(Code::Syn007, format!("`{word}` needs a count as its first argument")));
            };
            c.bump();
            c.expect(Tok::Comma, "after the count")?;
            k
        }
    };
    let mut children = vec![parse_formula(c)?];
    while c.eat(&Tok::Comma) {
        children.push(parse_formula(c)?);
    }
    c.expect(Tok::RParen, "to close the counting operator")?;
    let span = start.span.join(&c.prev_span());
    Ok(node(FolNode::Count { kind, k, children }, span))
}
