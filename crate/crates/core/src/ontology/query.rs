use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::iri::{Iri, PrefixTable};
use super::model::{AnnotationValue, Axiom, ClassExpression, Entity, OntologyDocument};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HierarchyMode {
    Direct,
    Transitive,
}

/// Named-to-named subclass edges, indexed by superclass.
#[derive(Clone, Debug, Default)]
pub struct ClassHierarchy {
    children: BTreeMap<Iri, BTreeSet<Iri>>,
}

impl ClassHierarchy {
    pub fn from_axioms<'a>(axioms: impl IntoIterator<Item = &'a Axiom>) -> Self {
        let mut children: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
        for ax in axioms {
            if let Axiom::SubClassOf { sub: ClassExpression::Named(sub), sup: ClassExpression::Named(sup) } = ax {
                children.entry(sup.clone()).or_default().insert(sub.clone());
            }
        }
        ClassHierarchy { children }
    }

    pub fn direct_subclasses(&self, cls: &Iri) -> BTreeSet<Iri> {
        self.children.get(cls).cloned().unwrap_or_default()
    }

    /// `cls` itself is included only when it lies on a cycle.
    pub fn subclasses(&self, cls: &Iri, mode: HierarchyMode) -> BTreeSet<Iri> {
        match mode {
            HierarchyMode::Direct => self.direct_subclasses(cls),
            HierarchyMode::Transitive => {
                let mut seen = BTreeSet::new();
                let mut queue: VecDeque<&Iri> = VecDeque::from([cls]);
                while let Some(next) = queue.pop_front() {
                    for child in self.children.get(next).into_iter().flatten() {
                        if seen.insert(child.clone()) {
                            queue.push_back(child);
                        }
                    }
                }
                seen
            }
        }
    }
}

pub fn subclasses(doc: &OntologyDocument, cls: &Iri, mode: HierarchyMode) -> BTreeSet<Iri> {
    ClassHierarchy::from_axioms(doc.axioms()).subclasses(cls, mode)
}

/// Values of `property` annotations on `subject`, in stored order.
pub fn annotation_values<'a>(
    axioms: impl IntoIterator<Item = &'a Axiom>,
    subject: &Iri,
    property: &Iri,
) -> Vec<AnnotationValue> {
    axioms
        .into_iter()
        .filter_map(|ax| match ax {
            Axiom::AnnotationAssertion { property: p, subject: s, value } if p == property && s == subject => {
                Some(value.clone())
            }
            _ => None,
        })
        .collect()
}

/// First `rdfs:label` literal, else the shortest prefixed form, else `<iri>`.
pub fn display_name(doc: &OntologyDocument, entity: &Entity) -> String {
    display_name_in(doc.axioms(), &doc.prefixes, &entity.iri)
}

pub fn display_name_in<'a>(
    axioms: impl IntoIterator<Item = &'a Axiom>,
    prefixes: &PrefixTable,
    iri: &Iri,
) -> String {
    let label = Iri::rdfs_label();
    let first_label = axioms.into_iter().find_map(|ax| match ax {
        Axiom::AnnotationAssertion { property, subject, value: AnnotationValue::Literal { lexical, .. } }
            if property == &label && subject == iri =>
        {
            Some(lexical.clone())
        }
        _ => None,
    });
    first_label
        .or_else(|| prefixes.abbreviate(iri))
        .unwrap_or_else(|| format!("<{iri}>"))
}
