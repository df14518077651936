//! Conjunctive triple-pattern queries over an entity graph.
//!
//! A query is up to eight `s p o .` patterns. Each position is a variable
//! (`?name`), an absolute IRI (`<https://...>`), a relative name (`<b1>`)
//! that matches the graph IRI ending in `/b1` in that position, or a literal
//! (`"1973-01-01"^^<date>`, plain `"text"` being a string).

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::eg::{EntityGraph, Literal, LiteralType, Term, Triple};
use crate::model::Iri;

pub const MAX_PATTERNS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("query has no patterns")]
    Empty,
    #[error("query has {0} patterns, at most {MAX_PATTERNS} allowed")]
    TooManyPatterns(usize),
    #[error("malformed pattern at column {column}: {message}")]
    Malformed { column: usize, message: String },
    #[error("bad variable name `{0}`")]
    BadVariable(String),
    #[error("`<{name}>` is ambiguous: {}", .candidates.join(", "))]
    Ambiguous {
        name: String,
        candidates: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum QueryTerm {
    Var(String),
    Iri(Iri),
    Name(String),
    Literal(Literal),
}

impl fmt::Display for QueryTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryTerm::Var(v) => write!(f, "?{v}"),
            QueryTerm::Iri(i) => write!(f, "<{i}>"),
            QueryTerm::Name(n) => write!(f, "<{n}>"),
            QueryTerm::Literal(l) => write!(f, "{}", Term::Literal(l.clone())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    pub subject: QueryTerm,
    pub predicate: QueryTerm,
    pub object: QueryTerm,
}

impl Pattern {
    fn terms(&self) -> [&QueryTerm; 3] {
        [&self.subject, &self.predicate, &self.object]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Query {
    pub patterns: Vec<Pattern>,
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.patterns.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{} {} {} .", p.subject, p.predicate, p.object)?;
        }
        Ok(())
    }
}

pub fn is_variable_name(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl Query {
    pub fn new(patterns: Vec<Pattern>) -> Result<Self, QueryError> {
        if patterns.is_empty() {
            return Err(QueryError::Empty);
        }
        if patterns.len() > MAX_PATTERNS {
            return Err(QueryError::TooManyPatterns(patterns.len()));
        }
        for p in &patterns {
            for t in p.terms() {
                if let QueryTerm::Var(v) = t {
                    if !is_variable_name(v) {
                        return Err(QueryError::BadVariable(format!("?{v}")));
                    }
                }
            }
            for t in [&p.subject, &p.predicate] {
                if matches!(t, QueryTerm::Literal(_)) {
                    return Err(QueryError::Malformed {
                        column: 0,
                        message: "literals may only appear as objects".into(),
                    });
                }
            }
        }
        Ok(Query { patterns })
    }

    /// Variable names (without `?`) in order of first appearance.
    pub fn variables(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for p in &self.patterns {
            for t in p.terms() {
                if let QueryTerm::Var(v) = t {
                    if !out.contains(&v.as_str()) {
                        out.push(v);
                    }
                }
            }
        }
        out
    }
}

struct Lexer<'a> {
    text: &'a str,
    pos: usize,
}

enum Token {
    Term(QueryTerm),
    Dot,
}

impl Lexer<'_> {
    fn fail<T>(&self, message: impl Into<String>) -> Result<T, QueryError> {
        Err(QueryError::Malformed {
            column: self.pos + 1,
            message: message.into(),
        })
    }

    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn bracketed(&mut self) -> Result<String, QueryError> {
        let body = &self.rest()[1..];
        match body.find(['>', '<', ' ', '\t', '\n', '\r']) {
            Some(end) if body.as_bytes()[end] == b'>' => {
                let inner = body[..end].to_string();
                self.pos += end + 2;
                if inner.is_empty() {
                    return self.fail("empty `<>`");
                }
                Ok(inner)
            }
            _ => self.fail("unterminated `<`"),
        }
    }

    fn next(&mut self) -> Result<Option<Token>, QueryError> {
        let text = self.text;
        let trimmed = text[self.pos..].trim_start();
        self.pos = text.len() - trimmed.len();
        let Some(c) = trimmed.chars().next() else {
            return Ok(None);
        };
        match c {
            '.' => {
                self.pos += 1;
                Ok(Some(Token::Dot))
            }
            '?' => {
                let name: String = trimmed[1..]
                    .chars()
                    .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
                    .collect();
                if !is_variable_name(&name) {
                    return Err(QueryError::BadVariable(format!("?{name}")));
                }
                self.pos += 1 + name.len();
                Ok(Some(Token::Term(QueryTerm::Var(name))))
            }
            '<' => {
                let inner = self.bracketed()?;
                Ok(Some(Token::Term(match Iri::parse(&inner) {
                    Ok(iri) => QueryTerm::Iri(iri),
                    Err(_) => QueryTerm::Name(inner),
                })))
            }
            '"' => {
                let mut lexical = String::new();
                let mut chars = trimmed[1..].char_indices();
                let end = loop {
                    match chars.next() {
                        None => return self.fail("unterminated literal"),
                        Some((i, '"')) => break i,
                        Some((_, '\\')) => match chars.next() {
                            Some((_, '\\')) => lexical.push('\\'),
                            Some((_, '"')) => lexical.push('"'),
                            Some((_, 'n')) => lexical.push('\n'),
                            Some((_, 'r')) => lexical.push('\r'),
                            Some((_, 't')) => lexical.push('\t'),
                            _ => return self.fail("bad escape in literal"),
                        },
                        Some((_, c)) => lexical.push(c),
                    }
                };
                self.pos += end + 2;
                let mut datatype = LiteralType::String;
                if self.rest().starts_with("^^<") {
                    self.pos += 2;
                    let dt = self.bracketed()?;
                    datatype = match LiteralType::from_name(&dt).or_else(|| LiteralType::from_xsd_iri(&dt)) {
                        Some(t) => t,
                        None => return self.fail(format!("unknown datatype `{dt}`")),
                    };
                }
                Ok(Some(Token::Term(QueryTerm::Literal(Literal { lexical, datatype }))))
            }
            _ => self.fail(format!("unexpected `{c}`")),
        }
    }
}

pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    let mut lexer = Lexer { text, pos: 0 };
    let mut patterns = Vec::new();
    let mut current: Vec<QueryTerm> = Vec::new();
    loop {
        let column = lexer.pos + 1;
        match lexer.next()? {
            Some(Token::Term(t)) if current.len() < 3 => current.push(t),
            Some(Token::Term(_)) => return lexer.fail("pattern has more than three terms"),
            Some(Token::Dot) | None if current.len() == 3 => {
                let [subject, predicate, object]: [QueryTerm; 3] =
                    std::mem::take(&mut current).try_into().expect("three terms");
                patterns.push(Pattern {
                    subject,
                    predicate,
                    object,
                });
            }
            None if current.is_empty() => break,
            _ => {
                return Err(QueryError::Malformed {
                    column,
                    message: format!("pattern needs three terms, found {}", current.len()),
                })
            }
        }
    }
    Query::new(patterns)
}

/// Variable bindings; rows sorted by their N-Triples rendering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BindingTable {
    /// Variable names without `?`.
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Term>>,
}

impl BindingTable {
    /// For variable-free queries: whether every pattern holds.
    pub fn holds(&self) -> bool {
        !self.rows.is_empty()
    }

    /// Tab-separated, header of `?name` columns then one line per row.
    pub fn render(&self) -> String {
        let mut out = self
            .columns
            .iter()
            .map(|c| format!("?{c}"))
            .collect::<Vec<_>>()
            .join("\t");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Term::to_string).collect();
            out.push_str(&cells.join("\t"));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Position {
    Node,
    Predicate,
}

/// A resolved constant; `None` is a relative name nothing in the graph has.
type Constant = Option<Term>;

enum Slot {
    Var(usize),
    Const(Constant),
}

fn resolve_name(
    name: &str,
    position: Position,
    nodes: &BTreeSet<&Iri>,
    predicates: &BTreeSet<&Iri>,
) -> Result<Constant, QueryError> {
    let suffix = format!("/{name}");
    let pool = match position {
        Position::Node => nodes,
        Position::Predicate => predicates,
    };
    let hits: Vec<&&Iri> = pool.iter().filter(|i| i.as_str().ends_with(&suffix)).collect();
    match hits.as_slice() {
        [] => Ok(None),
        [one] => Ok(Some(Term::Iri((**one).clone()))),
        many => Err(QueryError::Ambiguous {
            name: name.to_string(),
            candidates: many.iter().map(|i| i.to_string()).collect(),
        }),
    }
}

fn matches_slot(slot: &Slot, term: &Term, bindings: &mut [Option<Term>], bound: &mut Vec<usize>) -> bool {
    match slot {
        Slot::Const(Some(c)) => c == term,
        Slot::Const(None) => false,
        Slot::Var(i) => match &bindings[*i] {
            Some(b) => b == term,
            None => {
                bindings[*i] = Some(term.clone());
                bound.push(*i);
                true
            }
        },
    }
}

fn solve(
    patterns: &[[Slot; 3]],
    triples: &[[Term; 3]],
    bindings: &mut Vec<Option<Term>>,
    out: &mut BTreeSet<Vec<Term>>,
) {
    let Some((first, rest)) = patterns.split_first() else {
        out.insert(bindings.iter().map(|b| b.clone().expect("all bound")).collect());
        return;
    };
    for t in triples {
        let mut bound = Vec::new();
        let ok = first
            .iter()
            .zip(t.iter())
            .all(|(slot, term)| matches_slot(slot, term, bindings, &mut bound));
        if ok {
            solve(rest, triples, bindings, out);
        }
        for i in bound {
            bindings[i] = None;
        }
    }
}

/// Evaluates `query` over a set of triples.
pub fn evaluate(triples: &[Triple], query: &Query) -> Result<BindingTable, QueryError> {
    let nodes: BTreeSet<&Iri> = triples
        .iter()
        .flat_map(|t| std::iter::once(&t.subject).chain(t.object.as_iri()))
        .collect();
    let predicates: BTreeSet<&Iri> = triples.iter().map(|t| &t.predicate).collect();
    let columns: Vec<String> = query.variables().into_iter().map(str::to_string).collect();
    let index: HashMap<&str, usize> = columns
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();

    let slot = |term: &QueryTerm, position: Position| -> Result<Slot, QueryError> {
        Ok(match term {
            QueryTerm::Var(v) => Slot::Var(index[v.as_str()]),
            QueryTerm::Iri(i) => Slot::Const(Some(Term::Iri(i.clone()))),
            QueryTerm::Literal(l) => Slot::Const(Some(Term::Literal(l.clone()))),
            QueryTerm::Name(n) => Slot::Const(resolve_name(n, position, &nodes, &predicates)?),
        })
    };
    let mut patterns = Vec::with_capacity(query.patterns.len());
    for p in &query.patterns {
        patterns.push([
            slot(&p.subject, Position::Node)?,
            slot(&p.predicate, Position::Predicate)?,
            slot(&p.object, Position::Node)?,
        ]);
    }

    let rows_as_terms: Vec<[Term; 3]> = triples
        .iter()
        .map(|t| {
            [
                Term::Iri(t.subject.clone()),
                Term::Iri(t.predicate.clone()),
                t.object.clone(),
            ]
        })
        .collect();
    let mut found = BTreeSet::new();
    let mut bindings = vec![None; columns.len()];
    solve(&patterns, &rows_as_terms, &mut bindings, &mut found);

    let mut rows: Vec<Vec<Term>> = found.into_iter().collect();
    rows.sort_by_cached_key(|r| r.iter().map(Term::to_string).collect::<Vec<_>>());
    Ok(BindingTable { columns, rows })
}

pub fn run_query(eg: &EntityGraph, query: &Query) -> Result<BindingTable, QueryError> {
    evaluate(&eg.triples, query)
}
