//! Reader for the supported fragment of OWL 2 functional syntax.

use super::iri::{Iri, PrefixTable};
use super::model::{AnnotationValue, Axiom, ClassExpression, Entity, EntityKind, OntologyDocument};
use super::OntologyError;

/// OWL 2 functional-syntax constructs that are well-formed but fall outside the
/// supported fragment.
const UNSUPPORTED: &[&str] = &[
    "Import",
    "Annotation",
    "DisjointClasses",
    "DisjointUnion",
    "EquivalentObjectProperties",
    "DisjointObjectProperties",
    "InverseObjectProperties",
    "ObjectPropertyDomain",
    "ObjectPropertyRange",
    "FunctionalObjectProperty",
    "InverseFunctionalObjectProperty",
    "ReflexiveObjectProperty",
    "IrreflexiveObjectProperty",
    "SymmetricObjectProperty",
    "AsymmetricObjectProperty",
    "TransitiveObjectProperty",
    "SubObjectPropertyChain",
    "SubDataPropertyOf",
    "EquivalentDataProperties",
    "DisjointDataProperties",
    "DataPropertyDomain",
    "DataPropertyRange",
    "FunctionalDataProperty",
    "DatatypeDefinition",
    "HasKey",
    "SameIndividual",
    "DifferentIndividuals",
    "NegativeObjectPropertyAssertion",
    "DataPropertyAssertion",
    "NegativeDataPropertyAssertion",
    "SubAnnotationPropertyOf",
    "AnnotationPropertyDomain",
    "AnnotationPropertyRange",
    "DLSafeRule",
    "ObjectUnionOf",
    "ObjectComplementOf",
    "ObjectOneOf",
    "ObjectAllValuesFrom",
    "ObjectHasValue",
    "ObjectHasSelf",
    "ObjectMinCardinality",
    "ObjectMaxCardinality",
    "ObjectExactCardinality",
    "ObjectInverseOf",
    "DataSomeValuesFrom",
    "DataAllValuesFrom",
    "DataHasValue",
    "DataMinCardinality",
    "DataMaxCardinality",
    "DataExactCardinality",
    "DataIntersectionOf",
    "DataUnionOf",
    "DataComplementOf",
    "DataOneOf",
    "DatatypeRestriction",
];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Open,
    Close,
    Equals,
    FullIri(String),
    Word(String),
    Literal { lexical: String, language: Option<String>, datatype: Option<Box<Tok>> },
    Eof,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Pos {
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { chars: text.chars().peekable(), pos: Pos { line: 1, column: 1 } }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn error(&self, pos: Pos, message: impl Into<String>) -> OntologyError {
        OntologyError::Syntax { line: pos.line, column: pos.column, message: message.into() }
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> Result<(Tok, Pos), OntologyError> {
        self.skip_trivia();
        let start = self.pos;
        let Some(&c) = self.chars.peek() else {
            return Ok((Tok::Eof, start));
        };
        let tok = match c {
            '(' => {
                self.bump();
                Tok::Open
            }
            ')' => {
                self.bump();
                Tok::Close
            }
            '=' => {
                self.bump();
                Tok::Equals
            }
            '<' => {
                self.bump();
                let mut value = String::new();
                loop {
                    match self.bump() {
                        Some('>') => break,
                        Some(c) if c.is_whitespace() => {
                            return Err(self.error(start, "whitespace inside IRI"))
                        }
                        Some(c) => value.push(c),
                        None => return Err(self.error(start, "unterminated IRI")),
                    }
                }
                Tok::FullIri(value)
            }
            '"' => self.literal(start)?,
            _ => {
                let mut word = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | '<' | '>' | '"' | '=' | '#') {
                        break;
                    }
                    word.push(c);
                    self.bump();
                }
                if word.is_empty() {
                    return Err(self.error(start, format!("unexpected character '{c}'")));
                }
                Tok::Word(word)
            }
        };
        Ok((tok, start))
    }

    fn literal(&mut self, start: Pos) -> Result<Tok, OntologyError> {
        self.bump();
        let mut lexical = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\\') => match self.bump() {
                    Some(c @ ('"' | '\\')) => lexical.push(c),
                    _ => return Err(self.error(start, "invalid escape in literal")),
                },
                Some(c) => lexical.push(c),
                None => return Err(self.error(start, "unterminated literal")),
            }
        }
        match self.chars.peek() {
            Some('@') => {
                self.bump();
                let mut tag = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '-' {
                        tag.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                if !is_valid_language_tag(&tag) {
                    return Err(self.error(start, format!("invalid language tag '{tag}'")));
                }
                Ok(Tok::Literal { lexical, language: Some(tag), datatype: None })
            }
            Some('^') => {
                self.bump();
                if self.bump() != Some('^') {
                    return Err(self.error(start, "expected '^^' after literal"));
                }
                let (dt, pos) = self.next_token()?;
                match dt {
                    Tok::FullIri(_) | Tok::Word(_) => {
                        Ok(Tok::Literal { lexical, language: None, datatype: Some(Box::new(dt)) })
                    }
                    _ => Err(self.error(pos, "expected datatype IRI after '^^'")),
                }
            }
            _ => Ok(Tok::Literal { lexical, language: None, datatype: None }),
        }
    }
}

pub(crate) fn is_valid_language_tag(tag: &str) -> bool {
    let mut parts = tag.split('-');
    let first_ok = parts
        .next()
        .is_some_and(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphabetic()));
    first_ok && parts.all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric()))
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: Option<(Tok, Pos)>,
    prefixes: PrefixTable,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, prefixes: PrefixTable) -> Self {
        Parser { lexer: Lexer::new(text), peeked: None, prefixes }
    }

    fn peek(&mut self) -> Result<&(Tok, Pos), OntologyError> {
        if self.peeked.is_none() {
            self.peeked = Some(self.lexer.next_token()?);
        }
        Ok(self.peeked.as_ref().expect("peeked"))
    }

    fn next(&mut self) -> Result<(Tok, Pos), OntologyError> {
        match self.peeked.take() {
            Some(t) => Ok(t),
            None => self.lexer.next_token(),
        }
    }

    fn error(pos: Pos, message: impl Into<String>) -> OntologyError {
        OntologyError::Syntax { line: pos.line, column: pos.column, message: message.into() }
    }

    fn expect_open(&mut self) -> Result<(), OntologyError> {
        match self.next()? {
            (Tok::Open, _) => Ok(()),
            (t, pos) => Err(Self::error(pos, format!("expected '(', found {}", describe(&t)))),
        }
    }

    fn expect_close(&mut self) -> Result<(), OntologyError> {
        match self.next()? {
            (Tok::Close, _) => Ok(()),
            (t, pos) => Err(Self::error(pos, format!("expected ')', found {}", describe(&t)))),
        }
    }

    fn peek_is_close(&mut self) -> Result<bool, OntologyError> {
        Ok(matches!(self.peek()?.0, Tok::Close))
    }

    fn resolve(&self, tok: &Tok, pos: Pos) -> Result<Iri, OntologyError> {
        match tok {
            Tok::FullIri(value) => {
                Iri::new(value.clone()).map_err(|_| Self::error(pos, format!("invalid IRI <{value}>")))
            }
            Tok::Word(word) if word.starts_with("_:") => Err(OntologyError::UnsupportedConstruct {
                construct: "AnonymousIndividual".into(),
                line: pos.line,
                column: pos.column,
            }),
            Tok::Word(word) if word.contains(':') => {
                self.prefixes.expand(word).map_err(|e| Self::error(pos, e.to_string()))
            }
            t => Err(Self::error(pos, format!("expected IRI, found {}", describe(t)))),
        }
    }

    fn iri(&mut self) -> Result<Iri, OntologyError> {
        let (tok, pos) = self.next()?;
        self.resolve(&tok, pos)
    }

    /// Consumes a keyword followed by '('; returns the keyword.
    fn keyword(&mut self) -> Result<(String, Pos), OntologyError> {
        match self.next()? {
            (Tok::Word(w), pos) if !w.contains(':') => {
                if !matches!(self.peek()?.0, Tok::Open) {
                    return Err(Self::error(pos, format!("expected '(' after {w}")));
                }
                Ok((w, pos))
            }
            (t, pos) => Err(Self::error(pos, format!("expected keyword, found {}", describe(&t)))),
        }
    }

    fn document(mut self) -> Result<OntologyDocument, OntologyError> {
        loop {
            match self.peek()? {
                (Tok::Word(w), _) if w == "Prefix" => self.prefix_declaration()?,
                (Tok::Word(w), _) if w == "Ontology" => break,
                (t, pos) => {
                    let (t, pos) = (t.clone(), *pos);
                    return Err(Self::error(pos, format!("expected Prefix or Ontology, found {}", describe(&t))));
                }
            }
        }
        self.next()?;
        self.expect_open()?;
        let mut iri = None;
        if matches!(self.peek()?.0, Tok::FullIri(_)) || matches!(&self.peek()?.0, Tok::Word(w) if w.contains(':')) {
            iri = Some(self.iri()?);
            let (tok, pos) = self.peek()?.clone();
            if matches!(tok, Tok::FullIri(_)) || matches!(&tok, Tok::Word(w) if w.contains(':')) {
                return Err(OntologyError::UnsupportedConstruct {
                    construct: "VersionIRI".into(),
                    line: pos.line,
                    column: pos.column,
                });
            }
        }
        let mut doc = OntologyDocument::new(iri, PrefixTable::default());
        while !self.peek_is_close()? {
            let ax = self.axiom()?;
            doc.add(ax);
        }
        self.expect_close()?;
        match self.next()? {
            (Tok::Eof, _) => {}
            (t, pos) => return Err(Self::error(pos, format!("trailing {} after ontology", describe(&t)))),
        }
        doc.prefixes = self.prefixes;
        Ok(doc)
    }

    fn prefix_declaration(&mut self) -> Result<(), OntologyError> {
        self.next()?;
        self.expect_open()?;
        let (name_tok, pos) = self.next()?;
        let name = match name_tok {
            Tok::Word(w) if w.ends_with(':') && w.matches(':').count() == 1 => w[..w.len() - 1].to_owned(),
            t => return Err(Self::error(pos, format!("expected prefix name, found {}", describe(&t)))),
        };
        match self.next()? {
            (Tok::Equals, _) => {}
            (t, pos) => return Err(Self::error(pos, format!("expected '=', found {}", describe(&t)))),
        }
        let (tok, ipos) = self.next()?;
        let Tok::FullIri(_) = tok else {
            return Err(Self::error(ipos, "prefix namespace must be a full IRI"));
        };
        let ns = self.resolve(&tok, ipos)?;
        self.prefixes.insert(&name, ns).map_err(|e| Self::error(pos, e.to_string()))?;
        self.expect_close()
    }

    fn unsupported(name: &str, pos: Pos) -> OntologyError {
        OntologyError::UnsupportedConstruct { construct: name.to_owned(), line: pos.line, column: pos.column }
    }

    fn unknown(name: &str, pos: Pos) -> OntologyError {
        if UNSUPPORTED.contains(&name) {
            Self::unsupported(name, pos)
        } else {
            Self::error(pos, format!("unknown construct '{name}'"))
        }
    }

    fn reject_axiom_annotations(&mut self) -> Result<(), OntologyError> {
        if let (Tok::Word(w), pos) = self.peek()? {
            if w == "Annotation" {
                return Err(Self::unsupported("Annotation", *pos));
            }
        }
        Ok(())
    }

    fn axiom(&mut self) -> Result<Axiom, OntologyError> {
        let (name, pos) = self.keyword()?;
        self.expect_open()?;
        self.reject_axiom_annotations()?;
        let ax = match name.as_str() {
            "Declaration" => {
                let (kind_name, kpos) = self.keyword()?;
                let kind: EntityKind = kind_name
                    .parse()
                    .map_err(|_| Self::error(kpos, format!("unknown entity kind '{kind_name}'")))?;
                self.expect_open()?;
                let iri = self.iri()?;
                self.expect_close()?;
                Axiom::Declaration(Entity::new(kind, iri))
            }
            "SubClassOf" => {
                let sub = self.class_expression()?;
                let sup = self.class_expression()?;
                Axiom::SubClassOf { sub, sup }
            }
            "EquivalentClasses" => {
                let mut ces = vec![self.class_expression()?];
                while !self.peek_is_close()? {
                    ces.push(self.class_expression()?);
                }
                if ces.len() < 2 {
                    return Err(Self::error(pos, "EquivalentClasses needs at least two operands"));
                }
                Axiom::EquivalentClasses(ces)
            }
            "SubObjectPropertyOf" => {
                if let (Tok::Word(w), p) = self.peek()? {
                    if w == "ObjectPropertyChain" || w == "ObjectInverseOf" {
                        let (w, p) = (w.clone(), *p);
                        return Err(Self::unsupported(&w, p));
                    }
                }
                let sub = self.iri()?;
                let sup = self.object_property()?;
                Axiom::SubObjectPropertyOf { sub, sup }
            }
            "ClassAssertion" => {
                let class = self.class_expression()?;
                let individual = self.iri()?;
                Axiom::ClassAssertion { class, individual }
            }
            "ObjectPropertyAssertion" => {
                let property = self.object_property()?;
                let source = self.iri()?;
                let target = self.iri()?;
                Axiom::ObjectPropertyAssertion { property, source, target }
            }
            "AnnotationAssertion" => {
                let property = self.iri()?;
                let subject = self.iri()?;
                let value = self.annotation_value()?;
                Axiom::AnnotationAssertion { property, subject, value }
            }
            other => return Err(Self::unknown(other, pos)),
        };
        self.expect_close()?;
        Ok(ax)
    }

    fn object_property(&mut self) -> Result<Iri, OntologyError> {
        if let (Tok::Word(w), p) = self.peek()? {
            if w == "ObjectInverseOf" {
                let p = *p;
                return Err(Self::unsupported("ObjectInverseOf", p));
            }
        }
        self.iri()
    }

    fn class_expression(&mut self) -> Result<ClassExpression, OntologyError> {
        let (tok, pos) = self.peek()?.clone();
        match tok {
            Tok::Word(w) if !w.contains(':') => {
                self.keyword()?;
                self.expect_open()?;
                let ce = match w.as_str() {
                    "ObjectIntersectionOf" => {
                        let mut ops = vec![self.class_expression()?];
                        while !self.peek_is_close()? {
                            ops.push(self.class_expression()?);
                        }
                        if ops.len() < 2 {
                            return Err(Self::error(pos, "ObjectIntersectionOf needs at least two operands"));
                        }
                        ClassExpression::IntersectionOf(ops)
                    }
                    "ObjectSomeValuesFrom" => {
                        let property = self.object_property()?;
                        let filler = self.class_expression()?;
                        ClassExpression::SomeValuesFrom { property, filler: Box::new(filler) }
                    }
                    other => return Err(Self::unknown(other, pos)),
                };
                self.expect_close()?;
                Ok(ce)
            }
            _ => Ok(ClassExpression::Named(self.iri()?)),
        }
    }

    fn annotation_value(&mut self) -> Result<AnnotationValue, OntologyError> {
        let (tok, pos) = self.next()?;
        match tok {
            Tok::Literal { lexical, language, datatype } => {
                let datatype = match datatype {
                    Some(dt) => Some(self.resolve(&dt, pos)?),
                    None => None,
                };
                Ok(AnnotationValue::Literal { lexical, language, datatype })
            }
            other => Ok(AnnotationValue::Iri(self.resolve(&other, pos)?)),
        }
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Open => "'('".into(),
        Tok::Close => "')'".into(),
        Tok::Equals => "'='".into(),
        Tok::FullIri(v) => format!("<{v}>"),
        Tok::Word(w) => format!("'{w}'"),
        Tok::Literal { .. } => "literal".into(),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses a functional-syntax ontology document.
pub fn parse_ontology(text: &str) -> Result<OntologyDocument, OntologyError> {
    Parser::new(text, PrefixTable::default()).document()
}

/// Parses a single axiom, resolving prefixed names through `prefixes`.
pub fn parse_axiom(text: &str, prefixes: &PrefixTable) -> Result<Axiom, OntologyError> {
    let mut parser = Parser::new(text, prefixes.clone());
    let ax = parser.axiom()?;
    match parser.next()? {
        (Tok::Eof, _) => Ok(ax),
        (t, pos) => Err(Parser::error(pos, format!("trailing {} after axiom", describe(&t)))),
    }
}
