//! Turtle serialization for procedural graphs.
//!
//! The emitter is byte-deterministic: prefixes are declared only when used,
//! subject blocks are sorted by IRI, predicates by IRI (with `rdf:type`
//! written as `a`), and objects by lexical form.
//!
//! The parser accepts the subset of Turtle the emitter produces plus what a
//! model following the same instructions plausibly returns: prefix
//! declarations, absolute IRIs, prefixed names, `a`, predicate and object
//! lists, string and integer literals, and comments. Blank nodes,
//! collections, datatyped or language-tagged literals and `@base` are out of
//! the subset and rejected with a pointed message.

use super::{Iri, ProceduralGraph, RdfTerm, Triple, RDF_TYPE};
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TurtleError {
    #[error("turtle syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown prefix {prefix:?} at line {line}")]
    UnknownPrefix { prefix: String, line: usize },
}

fn syntax(line: usize, message: impl Into<String>) -> TurtleError {
    TurtleError::Syntax {
        line,
        message: message.into(),
    }
}

// ---------------------------------------------------------------------------
// Emitter
// ---------------------------------------------------------------------------

/// True when `local` is safe to write as the local part of a prefixed name.
/// Deliberately conservative; anything else is written as an absolute IRI.
fn is_safe_local(local: &str) -> bool {
    let mut chars = local.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphanumeric() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Renders an IRI as `prefix:local` when a declared namespace matches,
/// otherwise as `<iri>`. Longest namespace wins; ties break on the label.
fn render_iri(iri: &Iri, prefixes: &BTreeMap<String, String>, used: &mut BTreeMap<String, String>) -> String {
    let s = iri.as_str();
    let mut best: Option<(&str, &str)> = None;
    for (label, ns) in prefixes {
        if let Some(local) = s.strip_prefix(ns.as_str()) {
            if is_safe_local(local) {
                let better = match best {
                    None => true,
                    Some((_, bns)) => ns.len() > bns.len(),
                };
                if better {
                    best = Some((label, ns));
                }
            }
        }
    }
    match best {
        Some((label, ns)) => {
            used.insert(label.to_string(), ns.to_string());
            format!("{label}:{}", &s[ns.len()..])
        }
        None => format!("<{s}>"),
    }
}

fn escape_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
    }
    out
}

fn render_object(term: &RdfTerm, prefixes: &BTreeMap<String, String>, used: &mut BTreeMap<String, String>) -> String {
    match term {
        RdfTerm::Iri(iri) => render_iri(iri, prefixes, used),
        RdfTerm::String(s) => format!("\"{}\"", escape_string(s)),
        RdfTerm::Integer(i) => i.to_string(),
    }
}

/// Serializes a graph to Turtle text (UTF-8, LF line endings).
pub fn emit_turtle(graph: &ProceduralGraph) -> String {
    let rdf_type = Iri::new(RDF_TYPE);
    let prefixes = graph.prefixes();
    let mut used: BTreeMap<String, String> = BTreeMap::new();

    // subject -> predicate -> sorted objects, everything ordered.
    let mut by_subject: BTreeMap<&Iri, BTreeMap<&Iri, Vec<&RdfTerm>>> = BTreeMap::new();
    for triple in graph.triples() {
        by_subject
            .entry(&triple.subject)
            .or_default()
            .entry(&triple.predicate)
            .or_default()
            .push(&triple.object);
    }

    let mut body = String::new();
    for (subject, predicates) in &by_subject {
        let subject_text = render_iri(subject, prefixes, &mut used);
        let mut lines: Vec<String> = Vec::new();
        for (predicate, objects) in predicates {
            let predicate_text = if **predicate == rdf_type {
                "a".to_string()
            } else {
                render_iri(predicate, prefixes, &mut used)
            };
            let mut objects = objects.clone();
            objects.sort_by(|a, b| a.lexical().cmp(&b.lexical()).then_with(|| a.cmp(b)));
            let object_text = objects
                .iter()
                .map(|o| render_object(o, prefixes, &mut used))
                .collect::<Vec<_>>()
                .join(", ");
            lines.push(format!("{predicate_text} {object_text}"));
        }
        let _ = write!(body, "{subject_text} {}", lines[0]);
        for line in &lines[1..] {
            let _ = write!(body, " ;\n    {line}");
        }
        body.push_str(" .\n\n");
    }

    let mut out = String::new();
    for (label, ns) in &used {
        let _ = writeln!(out, "@prefix {label}: <{ns}> .");
    }
    if !used.is_empty() && !body.is_empty() {
        out.push('\n');
    }
    out.push_str(body.trim_end_matches('\n'));
    if !body.is_empty() {
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Token {
    IriRef(String),
    Pname { prefix: String, local: String },
    PrefixDecl,
    A,
    StringLit(String),
    Integer(i64),
    Dot,
    Semi,
    Comma,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next();
        if c == Some('\n') {
            self.line += 1;
        }
        c
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.chars.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                _ => return,
            }
        }
    }

    fn read_iri_ref(&mut self) -> Result<Token, TurtleError> {
        let line = self.line;
        let mut iri = String::new();
        loop {
            match self.bump() {
                Some('>') => return Ok(Token::IriRef(iri)),
                Some(c) if c == '<' || c == '"' || c.is_whitespace() => {
                    return Err(syntax(line, format!("invalid character {c:?} inside IRI")));
                }
                Some(c) => iri.push(c),
                None => return Err(syntax(line, "unterminated IRI reference")),
            }
        }
    }

    fn read_string(&mut self) -> Result<Token, TurtleError> {
        let line = self.line;
        if self.chars.peek() == Some(&'"') {
            // Either the empty string or a long quoted string.
            self.bump();
            if self.chars.peek() == Some(&'"') {
                return Err(syntax(line, "triple-quoted strings are not in the supported subset"));
            }
            return self.finish_string_token(String::new());
        }
        let mut value = String::new();
        loop {
            match self.bump() {
                Some('"') => return self.finish_string_token(value),
                Some('\\') => match self.bump() {
                    Some('"') => value.push('"'),
                    Some('\\') => value.push('\\'),
                    Some('n') => value.push('\n'),
                    Some('r') => value.push('\r'),
                    Some('t') => value.push('\t'),
                    Some('u') => value.push(self.read_unicode_escape(4, line)?),
                    Some('U') => value.push(self.read_unicode_escape(8, line)?),
                    Some(c) => return Err(syntax(line, format!("unsupported escape \\{c}"))),
                    None => return Err(syntax(line, "unterminated string escape")),
                },
                Some('\n') => return Err(syntax(line, "unterminated string literal")),
                Some(c) => value.push(c),
                None => return Err(syntax(line, "unterminated string literal")),
            }
        }
    }

    fn finish_string_token(&mut self, value: String) -> Result<Token, TurtleError> {
        // Datatype and language-tag suffixes are out of the subset.
        match self.chars.peek() {
            Some('^') => Err(syntax(self.line, "datatyped literals are not in the supported subset")),
            Some('@') => Err(syntax(
                self.line,
                "language-tagged literals are not in the supported subset",
            )),
            _ => Ok(Token::StringLit(value)),
        }
    }

    fn read_unicode_escape(&mut self, len: usize, line: usize) -> Result<char, TurtleError> {
        let mut hex = String::with_capacity(len);
        for _ in 0..len {
            match self.bump() {
                Some(c) if c.is_ascii_hexdigit() => hex.push(c),
                _ => return Err(syntax(line, "invalid unicode escape")),
            }
        }
        u32::from_str_radix(&hex, 16)
            .ok()
            .and_then(char::from_u32)
            .ok_or_else(|| syntax(line, "invalid unicode escape"))
    }

    fn read_word(&mut self, first: char) -> String {
        let mut word = String::new();
        word.push(first);
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() || matches!(c, '<' | '"' | ';' | ',' | '#' | '(' | '[') {
                break;
            }
            // A trailing '.' terminates the statement rather than the word.
            if c == '.' {
                let mut probe = self.chars.clone();
                probe.next();
                match probe.peek() {
                    Some(n) if !n.is_whitespace() && *n != '#' => {}
                    _ => break,
                }
            }
            word.push(c);
            self.bump();
        }
        word
    }

    fn next_token(&mut self) -> Result<Option<(Token, usize)>, TurtleError> {
        self.skip_trivia();
        let line = self.line;
        let Some(c) = self.bump() else { return Ok(None) };
        let token = match c {
            '<' => self.read_iri_ref()?,
            '"' => self.read_string()?,
            '.' => Token::Dot,
            ';' => Token::Semi,
            ',' => Token::Comma,
            '[' | ']' => return Err(syntax(line, "blank nodes are not in the supported subset")),
            '(' | ')' => return Err(syntax(line, "collections are not in the supported subset")),
            '@' => {
                let word = self.read_word('@');
                match word.as_str() {
                    "@prefix" => Token::PrefixDecl,
                    "@base" => return Err(syntax(line, "@base is not in the supported subset")),
                    other => return Err(syntax(line, format!("unsupported directive {other}"))),
                }
            }
            c if c == '+' || c == '-' || c.is_ascii_digit() => {
                let word = self.read_word(c);
                let value: i64 = word
                    .parse()
                    .map_err(|_| syntax(line, format!("invalid integer literal {word:?}")))?;
                Token::Integer(value)
            }
            c => {
                let word = self.read_word(c);
                if word == "a" {
                    Token::A
                } else if word == "_" || word.starts_with("_:") {
                    return Err(syntax(line, "blank nodes are not in the supported subset"));
                } else if let Some(colon) = word.find(':') {
                    let (prefix, local) = word.split_at(colon);
                    Token::Pname {
                        prefix: prefix.to_string(),
                        local: local[1..].to_string(),
                    }
                } else {
                    return Err(syntax(line, format!("unexpected token {word:?}")));
                }
            }
        };
        Ok(Some((token, line)))
    }
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    position: usize,
    prefixes: BTreeMap<String, String>,
    graph: ProceduralGraph,
}

impl Parser {
    fn peek(&self) -> Option<&(Token, usize)> {
        self.tokens.get(self.position)
    }

    fn bump(&mut self) -> Option<(Token, usize)> {
        let t = self.tokens.get(self.position).cloned();
        if t.is_some() {
            self.position += 1;
        }
        t
    }

    fn last_line(&self) -> usize {
        self.tokens.last().map(|(_, l)| *l).unwrap_or(1)
    }

    fn expect_dot(&mut self) -> Result<(), TurtleError> {
        match self.bump() {
            Some((Token::Dot, _)) => Ok(()),
            Some((t, line)) => Err(syntax(line, format!("expected '.', found {t:?}"))),
            None => Err(syntax(self.last_line(), "expected '.', found end of input")),
        }
    }

    fn resolve(&self, prefix: &str, local: &str, line: usize) -> Result<Iri, TurtleError> {
        match self.prefixes.get(prefix) {
            Some(ns) => Ok(Iri::new(format!("{ns}{local}"))),
            None => Err(TurtleError::UnknownPrefix {
                prefix: prefix.to_string(),
                line,
            }),
        }
    }

    fn parse_prefix_decl(&mut self) -> Result<(), TurtleError> {
        let (label, line) = match self.bump() {
            Some((Token::Pname { prefix, local }, line)) if local.is_empty() => (prefix, line),
            Some((t, line)) => return Err(syntax(line, format!("expected prefix label, found {t:?}"))),
            None => return Err(syntax(self.last_line(), "unterminated @prefix directive")),
        };
        let namespace = match self.bump() {
            Some((Token::IriRef(iri), _)) => iri,
            Some((t, line)) => return Err(syntax(line, format!("expected namespace IRI, found {t:?}"))),
            None => return Err(syntax(line, "unterminated @prefix directive")),
        };
        self.expect_dot()?;
        self.prefixes.insert(label.clone(), namespace.clone());
        self.graph.add_prefix(label, namespace);
        Ok(())
    }

    fn parse_iri(&mut self, role: &str) -> Result<Iri, TurtleError> {
        match self.bump() {
            Some((Token::IriRef(iri), _)) => Ok(Iri::new(iri)),
            Some((Token::Pname { prefix, local }, line)) => self.resolve(&prefix, &local, line),
            Some((t, line)) => Err(syntax(line, format!("expected {role} IRI, found {t:?}"))),
            None => Err(syntax(self.last_line(), format!("expected {role}, found end of input"))),
        }
    }

    fn parse_predicate(&mut self) -> Result<Iri, TurtleError> {
        if let Some((Token::A, _)) = self.peek() {
            self.bump();
            return Ok(Iri::new(RDF_TYPE));
        }
        self.parse_iri("predicate")
    }

    fn parse_object(&mut self) -> Result<RdfTerm, TurtleError> {
        match self.bump() {
            Some((Token::IriRef(iri), _)) => Ok(RdfTerm::Iri(Iri::new(iri))),
            Some((Token::Pname { prefix, local }, line)) => {
                Ok(RdfTerm::Iri(self.resolve(&prefix, &local, line)?))
            }
            Some((Token::StringLit(s), _)) => Ok(RdfTerm::String(s)),
            Some((Token::Integer(i), _)) => Ok(RdfTerm::Integer(i)),
            Some((t, line)) => Err(syntax(line, format!("expected object, found {t:?}"))),
            None => Err(syntax(self.last_line(), "expected object, found end of input")),
        }
    }

    fn parse_triples_block(&mut self) -> Result<(), TurtleError> {
        let subject = self.parse_iri("subject")?;
        loop {
            let predicate = self.parse_predicate()?;
            loop {
                let object = self.parse_object()?;
                self.graph
                    .insert(Triple::new(subject.clone(), predicate.clone(), object));
                match self.peek() {
                    Some((Token::Comma, _)) => {
                        self.bump();
                    }
                    _ => break,
                }
            }
            match self.bump() {
                Some((Token::Semi, _)) => {
                    // tolerate a dangling ';' before '.'
                    if let Some((Token::Dot, _)) = self.peek() {
                        self.bump();
                        return Ok(());
                    }
                }
                Some((Token::Dot, _)) => return Ok(()),
                Some((t, line)) => {
                    return Err(syntax(line, format!("expected ';' or '.', found {t:?}")))
                }
                None => return Err(syntax(self.last_line(), "unterminated triple block")),
            }
        }
    }
}

/// Parses Turtle text into a graph.
pub fn parse_turtle(text: &str) -> Result<ProceduralGraph, TurtleError> {
    let mut lexer = Lexer::new(text);
    let mut tokens = Vec::new();
    while let Some(t) = lexer.next_token()? {
        tokens.push(t);
    }
    let mut parser = Parser {
        tokens,
        position: 0,
        prefixes: BTreeMap::new(),
        graph: ProceduralGraph::new(),
    };
    while let Some((token, _)) = parser.peek() {
        if *token == Token::PrefixDecl {
            parser.bump();
            parser.parse_prefix_decl()?;
        } else {
            parser.parse_triples_block()?;
        }
    }
    Ok(parser.graph)
}
