use std::fmt::Write as _;

use super::iri::{Iri, PrefixTable};
use super::model::{AnnotationValue, Axiom, ClassExpression, OntologyDocument};

/// Renders a document in functional syntax: prefix declarations sorted by name,
/// then axioms in stored order. Output always ends with a newline.
pub fn serialize_ontology(doc: &OntologyDocument) -> String {
    let mut out = String::new();
    for (name, ns) in doc.prefixes.iter() {
        let _ = writeln!(out, "Prefix({name}:=<{ns}>)");
    }
    out.push('\n');
    out.push_str("Ontology(");
    if let Some(iri) = &doc.iri {
        let _ = write!(out, "<{iri}>");
    }
    out.push('\n');
    for ax in doc.axioms() {
        write_axiom_into(&mut out, ax, Some(&doc.prefixes));
        out.push('\n');
    }
    out.push_str(")\n");
    out
}

/// Renders one axiom. With `prefixes`, IRIs are abbreviated where possible.
pub fn write_axiom(ax: &Axiom, prefixes: Option<&PrefixTable>) -> String {
    let mut out = String::new();
    write_axiom_into(&mut out, ax, prefixes);
    out
}

fn write_axiom_into(out: &mut String, ax: &Axiom, prefixes: Option<&PrefixTable>) {
    let w = Writer { prefixes };
    out.push_str(ax.name());
    out.push('(');
    match ax {
        Axiom::Declaration(e) => {
            let _ = write!(out, "{}(", e.kind);
            w.iri(out, &e.iri);
            out.push(')');
        }
        Axiom::SubClassOf { sub, sup } => {
            w.class_expression(out, sub);
            out.push(' ');
            w.class_expression(out, sup);
        }
        Axiom::EquivalentClasses(ces) => w.list(out, ces),
        Axiom::SubObjectPropertyOf { sub, sup } => {
            w.iri(out, sub);
            out.push(' ');
            w.iri(out, sup);
        }
        Axiom::ClassAssertion { class, individual } => {
            w.class_expression(out, class);
            out.push(' ');
            w.iri(out, individual);
        }
        Axiom::ObjectPropertyAssertion { property, source, target } => {
            w.iri(out, property);
            out.push(' ');
            w.iri(out, source);
            out.push(' ');
            w.iri(out, target);
        }
        Axiom::AnnotationAssertion { property, subject, value } => {
            w.iri(out, property);
            out.push(' ');
            w.iri(out, subject);
            out.push(' ');
            w.value(out, value);
        }
    }
    out.push(')');
}

struct Writer<'a> {
    prefixes: Option<&'a PrefixTable>,
}

impl Writer<'_> {
    fn iri(&self, out: &mut String, iri: &Iri) {
        match self.prefixes.and_then(|p| p.abbreviate(iri)) {
            Some(short) => out.push_str(&short),
            None => {
                let _ = write!(out, "<{iri}>");
            }
        }
    }

    fn list(&self, out: &mut String, ces: &[ClassExpression]) {
        for (i, ce) in ces.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            self.class_expression(out, ce);
        }
    }

    fn class_expression(&self, out: &mut String, ce: &ClassExpression) {
        match ce {
            ClassExpression::Named(iri) => self.iri(out, iri),
            ClassExpression::IntersectionOf(ops) => {
                out.push_str("ObjectIntersectionOf(");
                self.list(out, ops);
                out.push(')');
            }
            ClassExpression::SomeValuesFrom { property, filler } => {
                out.push_str("ObjectSomeValuesFrom(");
                self.iri(out, property);
                out.push(' ');
                self.class_expression(out, filler);
                out.push(')');
            }
        }
    }

    fn value(&self, out: &mut String, value: &AnnotationValue) {
        match value {
            AnnotationValue::Iri(iri) => self.iri(out, iri),
            AnnotationValue::Literal { lexical, language, datatype } => {
                out.push('"');
                for c in lexical.chars() {
                    if matches!(c, '"' | '\\') {
                        out.push('\\');
                    }
                    out.push(c);
                }
                out.push('"');
                if let Some(lang) = language {
                    let _ = write!(out, "@{lang}");
                } else if let Some(dt) = datatype {
                    out.push_str("^^");
                    self.iri(out, dt);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::parse_ontology;

    #[test]
    fn empty_document() {
        let text = serialize_ontology(&OntologyDocument::default());
        assert!(text.ends_with("\nOntology(\n)\n"));
        assert!(text.starts_with("Prefix(dbpedia:=<http://dbpedia.org/resource/>)\n"));
        assert_eq!(text.lines().filter(|l| l.starts_with("Prefix(")).count(), 7);
        assert_eq!(parse_ontology(&text).unwrap(), OntologyDocument::default());
    }

    #[test]
    fn language_tag_literal() {
        let mut doc = OntologyDocument::default();
        doc.add(Axiom::AnnotationAssertion {
            property: Iri::rdfs_label(),
            subject: Iri::new("http://ex.org/A").unwrap(),
            value: AnnotationValue::Literal { lexical: "Jet".into(), language: Some("en".into()), datatype: None },
        });
        let text = serialize_ontology(&doc);
        assert!(text.contains("AnnotationAssertion(rdfs:label <http://ex.org/A> \"Jet\"@en)"), "{text}");
    }

    #[test]
    fn full_iris_without_prefixes() {
        let ax = Axiom::sub_class_of(Iri::new("https://schema.org/A").unwrap(), Iri::owl_thing());
        assert_eq!(
            write_axiom(&ax, None),
            "SubClassOf(<https://schema.org/A> <http://www.w3.org/2002/07/owl#Thing>)"
        );
        assert_eq!(write_axiom(&ax, Some(&PrefixTable::default())), "SubClassOf(schema:A owl:Thing)");
    }
}
