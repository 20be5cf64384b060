use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use indexmap::IndexSet;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::iri::{Iri, PrefixTable};
use super::OntologyError;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum EntityKind {
    Class,
    ObjectProperty,
    DataProperty,
    AnnotationProperty,
    NamedIndividual,
    Datatype,
}

impl EntityKind {
    pub const ALL: [EntityKind; 6] = [
        EntityKind::Class,
        EntityKind::ObjectProperty,
        EntityKind::DataProperty,
        EntityKind::AnnotationProperty,
        EntityKind::NamedIndividual,
        EntityKind::Datatype,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Class => "Class",
            EntityKind::ObjectProperty => "ObjectProperty",
            EntityKind::DataProperty => "DataProperty",
            EntityKind::AnnotationProperty => "AnnotationProperty",
            EntityKind::NamedIndividual => "NamedIndividual",
            EntityKind::Datatype => "Datatype",
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityKind {
    type Err = OntologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EntityKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| OntologyError::UnknownKind(s.to_owned()))
    }
}

/// A named term. The same IRI may appear under several kinds.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Entity {
    pub kind: EntityKind,
    pub iri: Iri,
}

impl Entity {
    pub fn new(kind: EntityKind, iri: Iri) -> Self {
        Entity { kind, iri }
    }

    pub fn class(iri: Iri) -> Self {
        Entity::new(EntityKind::Class, iri)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ClassExpression {
    Named(Iri),
    /// At least two operands, in parsed order.
    IntersectionOf(Vec<ClassExpression>),
    SomeValuesFrom { property: Iri, filler: Box<ClassExpression> },
}

impl ClassExpression {
    pub fn named(&self) -> Option<&Iri> {
        match self {
            ClassExpression::Named(iri) => Some(iri),
            _ => None,
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "AnnotationValueJson", into = "AnnotationValueJson")]
pub enum AnnotationValue {
    Literal { lexical: String, language: Option<String>, datatype: Option<Iri> },
    Iri(Iri),
}

impl AnnotationValue {
    pub fn plain(text: impl Into<String>) -> Self {
        AnnotationValue::Literal { lexical: text.into(), language: None, datatype: None }
    }

    pub fn lexical(&self) -> Option<&str> {
        match self {
            AnnotationValue::Literal { lexical, .. } => Some(lexical),
            AnnotationValue::Iri(_) => None,
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Axiom {
    Declaration(Entity),
    SubClassOf { sub: ClassExpression, sup: ClassExpression },
    /// At least two operands.
    EquivalentClasses(Vec<ClassExpression>),
    SubObjectPropertyOf { sub: Iri, sup: Iri },
    ClassAssertion { class: ClassExpression, individual: Iri },
    ObjectPropertyAssertion { property: Iri, source: Iri, target: Iri },
    AnnotationAssertion { property: Iri, subject: Iri, value: AnnotationValue },
}

impl Axiom {
    pub fn name(&self) -> &'static str {
        match self {
            Axiom::Declaration(_) => "Declaration",
            Axiom::SubClassOf { .. } => "SubClassOf",
            Axiom::EquivalentClasses(_) => "EquivalentClasses",
            Axiom::SubObjectPropertyOf { .. } => "SubObjectPropertyOf",
            Axiom::ClassAssertion { .. } => "ClassAssertion",
            Axiom::ObjectPropertyAssertion { .. } => "ObjectPropertyAssertion",
            Axiom::AnnotationAssertion { .. } => "AnnotationAssertion",
        }
    }

    pub fn sub_class_of(sub: Iri, sup: Iri) -> Self {
        Axiom::SubClassOf { sub: ClassExpression::Named(sub), sup: ClassExpression::Named(sup) }
    }

    pub fn label(subject: Iri, text: impl Into<String>) -> Self {
        Axiom::AnnotationAssertion {
            property: Iri::rdfs_label(),
            subject,
            value: AnnotationValue::plain(text),
        }
    }
}

/// JSON form: `{"lexical": .., "language": ..}` / `{"lexical": .., "datatype": ..}` / `{"iri": ..}`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum AnnotationValueJson {
    Iri {
        iri: Iri,
    },
    Literal {
        lexical: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        language: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        datatype: Option<Iri>,
    },
}

impl TryFrom<AnnotationValueJson> for AnnotationValue {
    type Error = String;

    fn try_from(value: AnnotationValueJson) -> Result<Self, Self::Error> {
        match value {
            AnnotationValueJson::Iri { iri } => Ok(AnnotationValue::Iri(iri)),
            AnnotationValueJson::Literal { lexical, language, datatype } => {
                match (&language, &datatype) {
                    (Some(_), Some(_)) => return Err("a literal cannot carry both a language tag and a datatype".into()),
                    (Some(tag), None) if !super::parser::is_valid_language_tag(tag) => {
                        return Err(format!("invalid language tag '{tag}'"))
                    }
                    _ => {}
                }
                Ok(AnnotationValue::Literal { lexical, language, datatype })
            }
        }
    }
}

impl From<AnnotationValue> for AnnotationValueJson {
    fn from(value: AnnotationValue) -> Self {
        match value {
            AnnotationValue::Iri(iri) => AnnotationValueJson::Iri { iri },
            AnnotationValue::Literal { lexical, language, datatype } => {
                AnnotationValueJson::Literal { lexical, language, datatype }
            }
        }
    }
}

/// Axioms travel through JSON as single functional-syntax strings with full IRIs.
impl Serialize for Axiom {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&super::writer::write_axiom(self, None))
    }
}

impl<'de> Deserialize<'de> for Axiom {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        super::parser::parse_axiom(&raw, &PrefixTable::default()).map_err(serde::de::Error::custom)
    }
}

/// The kinds each IRI is declared with, for resolving annotation subjects.
#[derive(Clone, Default, Debug)]
pub struct Declarations {
    kinds: BTreeMap<Iri, BTreeSet<EntityKind>>,
}

impl Declarations {
    pub fn from_axioms<'a>(axioms: impl IntoIterator<Item = &'a Axiom>) -> Self {
        let mut decls = Declarations::default();
        for ax in axioms {
            decls.observe(ax);
        }
        decls
    }

    pub fn observe(&mut self, ax: &Axiom) {
        if let Axiom::Declaration(e) = ax {
            self.kinds.entry(e.iri.clone()).or_default().insert(e.kind);
        }
    }

    pub fn kinds_of(&self, iri: &Iri) -> Option<&BTreeSet<EntityKind>> {
        self.kinds.get(iri)
    }
}

/// Every entity occurring in `ax`. Annotation subjects take their declared kinds,
/// or `Class` when undeclared.
pub fn entity_signature(ax: &Axiom, declarations: &Declarations) -> BTreeSet<Entity> {
    let mut out = BTreeSet::new();
    collect_signature(ax, declarations, &mut out);
    out
}

pub(crate) fn collect_signature(ax: &Axiom, declarations: &Declarations, out: &mut BTreeSet<Entity>) {
    use EntityKind::*;
    let mut push = |kind, iri: &Iri| {
        out.insert(Entity::new(kind, iri.clone()));
    };
    match ax {
        Axiom::Declaration(e) => push(e.kind, &e.iri),
        Axiom::SubClassOf { sub, sup } => {
            class_expression_signature(sub, &mut push);
            class_expression_signature(sup, &mut push);
        }
        Axiom::EquivalentClasses(ces) => {
            for ce in ces {
                class_expression_signature(ce, &mut push);
            }
        }
        Axiom::SubObjectPropertyOf { sub, sup } => {
            push(ObjectProperty, sub);
            push(ObjectProperty, sup);
        }
        Axiom::ClassAssertion { class, individual } => {
            class_expression_signature(class, &mut push);
            push(NamedIndividual, individual);
        }
        Axiom::ObjectPropertyAssertion { property, source, target } => {
            push(ObjectProperty, property);
            push(NamedIndividual, source);
            push(NamedIndividual, target);
        }
        Axiom::AnnotationAssertion { property, subject, .. } => {
            push(AnnotationProperty, property);
            match declarations.kinds_of(subject) {
                Some(kinds) if !kinds.is_empty() => {
                    for kind in kinds {
                        push(*kind, subject);
                    }
                }
                _ => push(Class, subject),
            }
        }
    }
}

fn class_expression_signature(ce: &ClassExpression, push: &mut impl FnMut(EntityKind, &Iri)) {
    match ce {
        ClassExpression::Named(iri) => push(EntityKind::Class, iri),
        ClassExpression::IntersectionOf(ops) => {
            for op in ops {
                class_expression_signature(op, push);
            }
        }
        ClassExpression::SomeValuesFrom { property, filler } => {
            push(EntityKind::ObjectProperty, property);
            class_expression_signature(filler, push);
        }
    }
}

/// An ontology: optional IRI, prefixes and an insertion-ordered axiom set.
///
/// Equality is structural: the ontology IRI and the axiom *set* are compared,
/// prefix tables and axiom order are not.
#[derive(Clone, Debug, Default)]
pub struct OntologyDocument {
    pub iri: Option<Iri>,
    pub prefixes: PrefixTable,
    axioms: IndexSet<Axiom>,
}

impl PartialEq for OntologyDocument {
    fn eq(&self, other: &Self) -> bool {
        // IndexSet equality is order-independent
        self.iri == other.iri && self.axioms == other.axioms
    }
}

impl Eq for OntologyDocument {}

impl OntologyDocument {
    pub fn new(iri: Option<Iri>, prefixes: PrefixTable) -> Self {
        OntologyDocument { iri, prefixes, axioms: IndexSet::new() }
    }

    pub fn with_axioms(
        iri: Option<Iri>,
        prefixes: PrefixTable,
        axioms: impl IntoIterator<Item = Axiom>,
    ) -> Self {
        OntologyDocument { iri, prefixes, axioms: axioms.into_iter().collect() }
    }

    /// Returns false when the axiom was already present.
    pub fn add(&mut self, ax: Axiom) -> bool {
        self.axioms.insert(ax)
    }

    pub fn remove(&mut self, ax: &Axiom) -> bool {
        self.axioms.shift_remove(ax)
    }

    pub fn contains(&self, ax: &Axiom) -> bool {
        self.axioms.contains(ax)
    }

    pub fn axioms(&self) -> impl ExactSizeIterator<Item = &Axiom> + Clone {
        self.axioms.iter()
    }

    pub fn axiom_set(&self) -> &IndexSet<Axiom> {
        &self.axioms
    }

    pub fn len(&self) -> usize {
        self.axioms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axioms.is_empty()
    }

    pub fn declarations(&self) -> Declarations {
        Declarations::from_axioms(&self.axioms)
    }

    /// All entities in the signature of the document.
    pub fn signature(&self) -> BTreeSet<Entity> {
        let decls = self.declarations();
        let mut out = BTreeSet::new();
        for ax in &self.axioms {
            collect_signature(ax, &decls, &mut out);
        }
        out
    }
}
