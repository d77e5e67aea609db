use crate::constraint::Constraint;
use crate::cursor::{Cursor, PResult};
use crate::diagnostic::{sort_diagnostics, Code, Diagnostic, Severity};
use crate::fol::{parse_formula, Lowering};
use crate::graph::{normalize_name, Concept, ConceptGraph, ConceptKind, Edge, Relation, Role};
use crate::lexer::{is_reserved, tokenize, Tok, Token};
use crate::span::SourceSpan;
use crate::validator;

#[derive(Debug, Clone, PartialEq)]
pub struct ParseResult {
    /// Present iff no syntax error was found.
    pub graph: Option<ConceptGraph>,
    pub diagnostics: Vec<Diagnostic>,
}

impl ParseResult {
    pub fn has_syntax_errors(&self) -> bool {
        self.diagnostics
            .iter()
            .any(|d| d.severity == Severity::Error && d.code.as_str().starts_with("SYN"))
    }
}

struct GraphParser<'t> {
    text: &'t str,
    cursor: Cursor<'t>,
    graph: ConceptGraph,
    pending_doc: Vec<String>,
}

pub fn parse_graph(text: &str) -> ParseResult {
    let (tokens, mut diagnostics) = tokenize(text);
    let mut p = GraphParser {
        text,
        cursor: Cursor::new(&tokens),
        graph: ConceptGraph::new(""),
        pending_doc: Vec::new(),
    };
    let parsed = p.program().is_ok();
    diagnostics.append(&mut p.cursor.diagnostics);
    sort_diagnostics(&mut diagnostics);
    let syntax_error = diagnostics
        .iter()
        .any(|d| d.is_error() && d.code.as_str().starts_with("SYN"));
    ParseResult {
        graph: (parsed && !syntax_error).then_some(p.graph),
        diagnostics,
    }
}

impl<'t> GraphParser<'t> {
    fn program(&mut self) -> PResult<()> {
        self.skip_docs();
        self.cursor.expect(Tok::Graph, "at the start of the program")?;
        let (name, _) = self.cursor.expect_ident("a graph name")?;
        self.graph.name = normalize_name(&name);
        self.cursor.expect(Tok::LBrace, "to open the graph body")?;
        loop {
            match self.cursor.peek().tok {
                Tok::RBrace => {
                    self.cursor.bump();
                    break;
                }
                Tok::Eof => {
                    return Err(self.cursor.error_here(Code::Syn004, "missing `}` at the end of the graph"));
                }
                _ => {
                    if self.statement().is_err() {
                        self.cursor.recover_statement();
                    }
                }
            }
        }
        self.skip_docs();
        if !self.cursor.at_eof() {
            let span = self.cursor.peek().span.clone();
            self.cursor
                .error(Code::Syn006, span, "unexpected input after the end of the graph");
        }
        Ok(())
    }

    fn skip_docs(&mut self) {
        while matches!(self.cursor.peek().tok, Tok::DocComment(_)) {
            self.cursor.bump();
        }
    }

    fn statement(&mut self) -> PResult<()> {
        let start = self.cursor.peek();
        match &start.tok {
            Tok::DocComment(doc) => {
                self.pending_doc.push(doc.clone());
                self.cursor.bump();
                Ok(())
            }
            Tok::Concept => {
                self.cursor.bump();
                self.concept(start, ConceptKind::Input)
            }
            Tok::Decision => {
                self.cursor.bump();
                self.cursor.expect(Tok::Concept, "after `decision`")?;
                self.concept(start, ConceptKind::Decision)
            }
            Tok::Constraint => {
                self.cursor.bump();
                let constraint = constraint_statement(self.text, &mut self.cursor, start)?;
                if let Some(c) = constraint {
                    self.graph.constraints.push(c);
                }
                Ok(())
            }
            Tok::Ident(_) => self.edge(start),
            other => {
                let found = other.describe();
                Err(self
                    .cursor
                    .error_here(Code::Syn003, format!("unexpected {found} at the start of a statement")))
            }
        }
    }

    fn concept_name(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        let (name, span) = self.cursor.expect_ident(what)?;
        if is_reserved(&name) {
            return Err(self
                .cursor
                .error(Code::Syn001, span, format!("`{name}` is reserved and cannot name a concept")));
        }
        Ok((normalize_name(&name), span))
    }

    fn concept(&mut self, start: &Token, kind: ConceptKind) -> PResult<()> {
        let doc = std::mem::take(&mut self.pending_doc);
        let (name, _) = self.concept_name("a concept name")?;
        let labels = if self.cursor.eat(&Tok::Labels) {
            self.cursor.expect(Tok::LBrace, "to open the label set")?;
            let mut labels = vec![self.concept_name("a label")?.0];
            while self.cursor.eat(&Tok::Comma) {
                labels.push(self.concept_name("a label")?.0);
            }
            self.cursor.expect(Tok::RBrace, "to close the label set")?;
            Some(labels)
        } else {
            None
        };
        self.cursor.expect(Tok::Semi, "after the concept declaration")?;
        let span = start.span.join(&self.cursor.prev_span());
        if self.graph.contains_concept(&name) {
            self.cursor
                .error(Code::Sem013, span, format!("concept `{name}` is declared more than once"));
            return Ok(());
        }
        self.graph.concepts.push(Concept {
            name,
            kind,
            labels,
            doc: (!doc.is_empty()).then(|| doc.join("\n")),
            span: span.into(),
        });
        Ok(())
    }

    fn edge(&mut self, start: &Token) -> PResult<()> {
        let (source, _) = self.concept_name("a concept name")?;
        let relation = match self.cursor.peek().tok {
            Tok::IsA | Tok::Contains => {
                let is_a = self.cursor.bump().tok == Tok::IsA;
                let (target, _) = self.concept_name("a target concept")?;
                if is_a {
                    Relation::IsA { source, target }
                } else {
                    Relation::Contains { source, target }
                }
            }
            Tok::HasA => {
                self.cursor.bump();
                self.cursor.expect(Tok::LParen, "after `has_a`")?;
                let mut roles = vec![self.role()?];
                while self.cursor.eat(&Tok::Comma) {
                    roles.push(self.role()?);
                }
                self.cursor.expect(Tok::RParen, "to close the role list")?;
                Relation::HasA { source, roles }
            }
            _ => {
                let found = self.cursor.peek().tok.describe();
                return Err(self.cursor.error_here(
                    Code::Syn003,
                    format!("expected `is_a`, `contains` or `has_a` after the concept name, found {found}"),
                ));
            }
        };
        self.cursor.expect(Tok::Semi, "after the edge")?;
        let span = start.span.join(&self.cursor.prev_span());
        self.graph.edges.push(Edge {
            relation,
            span: span.into(),
        });
        Ok(())
    }

    fn role(&mut self) -> PResult<Role> {
        let (name, _) = self.concept_name("a role name")?;
        self.cursor.expect(Tok::Colon, "between the role name and its concept")?;
        let (target, _) = self.concept_name("the role's concept")?;
        Ok(Role { name, target })
    }
}

/// Parses the formula after `constraint` up to and including the `;`. A
/// formula that parses but cannot be lowered yields `Ok(None)` with the
/// diagnostics recorded on the cursor.
fn constraint_statement<'t>(text: &str, cursor: &mut Cursor<'t>, start: &Token) -> PResult<Option<Constraint>> {
    let first = cursor.peek();
    let formula = parse_formula(cursor)?;
    let last_end = cursor.peek_at(0).start;
    cursor.expect(Tok::Semi, "after the constraint")?;
    let source = text[first.start..last_end].trim().to_string();
    let span = start.span.join(&cursor.prev_span());
    let mut lowering = Lowering::new();
    let lowered = lowering.lower(&formula);
    cursor.diagnostics.append(&mut lowering.diagnostics);
    Ok(lowered.map(|expr| Constraint {
        expr,
        source_text: Some(source),
        span: span.into(),
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintBlock {
    pub constraints: Vec<Constraint>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Parses a sequence of `constraint ...;` statements on their own. Checks
/// that need no graph (variable binding, count bounds) run here as well.
pub fn parse_constraint_block(text: &str) -> ConstraintBlock {
    let (tokens, mut diagnostics) = tokenize(text);
    let mut cursor = Cursor::new(&tokens);
    let mut constraints = Vec::new();
    while !cursor.at_eof() {
        let start = cursor.peek();
        match start.tok {
            Tok::DocComment(_) => {
                cursor.bump();
            }
            Tok::Constraint => {
                cursor.bump();
                match constraint_statement(text, &mut cursor, start) {
                    Ok(Some(c)) => constraints.push(c),
                    Ok(None) => {}
                    Err(_) => cursor.recover_statement(),
                }
            }
            _ => {
                let found = start.tok.describe();
                cursor.error_here(Code::Syn003, format!("expected `constraint`, found {found}"));
                cursor.recover_statement();
                // A stray `}` would stop recovery forever.
                if cursor.at(&Tok::RBrace) {
                    cursor.bump();
                }
            }
        }
    }
    diagnostics.append(&mut cursor.diagnostics);
    for c in &constraints {
        diagnostics.extend(validator::local_constraint_diagnostics(c));
    }
    sort_diagnostics(&mut diagnostics);
    ConstraintBlock {
        constraints,
        diagnostics,
    }
}
