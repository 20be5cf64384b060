mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::gen;
use common::*;
use ontoforge_core::ontology::{
    entity_signature, parse_ontology, serialize_ontology, subclasses, Axiom, ClassExpression, Declarations, Entity,
    EntityKind, HierarchyMode, Iri, OntologyDocument, OntologyError, PrefixTable,
};
use proptest::prelude::*;

#[test]
fn air_fixture() {
    let doc = parse_ontology(AIR).unwrap();
    assert_eq!(doc.iri, Some(Iri::new("http://example.org/air").unwrap()));
    let classes: BTreeSet<_> = doc.signature().into_iter().filter(|e| e.kind == EntityKind::Class).collect();
    assert_eq!(classes.len(), 4);
    assert_eq!(subclasses(&doc, &air("Aircraft"), HierarchyMode::Transitive).len(), 3);
    assert_eq!(subclasses(&doc, &air("AirbusAircraft"), HierarchyMode::Direct), BTreeSet::from([air("AirbusA320"), air("AirbusBeluga")]));
}

#[test]
fn unsupported_constructs_are_named() {
    let text = "Prefix(:=<http://ex.org/>)\nOntology(<http://ex.org/o>\n  DisjointClasses(:A :B)\n)";
    match parse_ontology(text) {
        Err(OntologyError::UnsupportedConstruct { construct, line, .. }) => {
            assert_eq!(construct, "DisjointClasses");
            assert_eq!(line, 3);
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse_ontology("Ontology(<http://ex.org/o> SubClassOf(:A"), Err(OntologyError::Syntax { .. })));
}

/// Signature by position: which kind each IRI slot of an axiom denotes.
fn oracle_signature(ax: &Axiom, declared: &BTreeMap<Iri, BTreeSet<EntityKind>>) -> BTreeSet<Entity> {
    fn ce(c: &ClassExpression, out: &mut BTreeSet<Entity>) {
        match c {
            ClassExpression::Named(i) => {
                out.insert(Entity::class(i.clone()));
            }
            ClassExpression::IntersectionOf(ops) => ops.iter().for_each(|o| ce(o, out)),
            ClassExpression::SomeValuesFrom { property, filler } => {
                out.insert(Entity::new(EntityKind::ObjectProperty, property.clone()));
                ce(filler, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    let op = |i: &Iri| Entity::new(EntityKind::ObjectProperty, i.clone());
    let ind = |i: &Iri| Entity::new(EntityKind::NamedIndividual, i.clone());
    match ax {
        Axiom::Declaration(e) => {
            out.insert(e.clone());
        }
        Axiom::SubClassOf { sub, sup } => {
            ce(sub, &mut out);
            ce(sup, &mut out);
        }
        Axiom::EquivalentClasses(cs) => cs.iter().for_each(|c| ce(c, &mut out)),
        Axiom::SubObjectPropertyOf { sub, sup } => out.extend([op(sub), op(sup)]),
        Axiom::ClassAssertion { class, individual } => {
            ce(class, &mut out);
            out.insert(ind(individual));
        }
        Axiom::ObjectPropertyAssertion { property, source, target } => out.extend([op(property), ind(source), ind(target)]),
        Axiom::AnnotationAssertion { property, subject, .. } => {
            out.insert(Entity::new(EntityKind::AnnotationProperty, property.clone()));
            let kinds = declared.get(subject).cloned().unwrap_or_else(|| BTreeSet::from([EntityKind::Class]));
            out.extend(kinds.into_iter().map(|k| Entity::new(k, subject.clone())));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn write_then_parse_is_identity(seed in any::<u64>()) {
        let doc = gen::random_document(&mut gen::rng(seed), 40);
        let text = serialize_ontology(&doc);
        let back = parse_ontology(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(serialize_ontology(&back), text);
    }

    #[test]
    fn axioms_survive_json(seed in any::<u64>()) {
        let doc = gen::random_document(&mut gen::rng(seed), 20);
        for ax in doc.axioms() {
            let json = serde_json::to_string(ax).unwrap();
            prop_assert_eq!(&serde_json::from_str::<Axiom>(&json).unwrap(), ax);
        }
    }

    #[test]
    fn abbreviation_expands_back(seed in any::<u64>()) {
        let doc = gen::random_document(&mut gen::rng(seed), 30);
        for e in doc.signature() {
            if let Some(short) = doc.prefixes.abbreviate(&e.iri) {
                prop_assert_eq!(doc.prefixes.expand(&short).unwrap(), e.iri);
            }
        }
    }

    #[test]
    fn signature_matches_positional_oracle(seed in any::<u64>()) {
        let doc = gen::random_document(&mut gen::rng(seed), 40);
        let mut declared: BTreeMap<Iri, BTreeSet<EntityKind>> = BTreeMap::new();
        for ax in doc.axioms() {
            if let Axiom::Declaration(e) = ax {
                declared.entry(e.iri.clone()).or_default().insert(e.kind);
            }
        }
        let decls = Declarations::from_axioms(doc.axioms());
        let mut all = BTreeSet::new();
        for ax in doc.axioms() {
            let sig = entity_signature(ax, &decls);
            prop_assert_eq!(&sig, &oracle_signature(ax, &declared));
            all.extend(sig);
        }
        prop_assert_eq!(doc.signature(), all);
    }

    #[test]
    fn transitive_subclasses_are_the_closure(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let axioms = gen::random_fixture(&mut rng, 30);
        let doc = OntologyDocument::with_axioms(None, PrefixTable::new(), axioms);
        let direct: Vec<(Iri, Iri)> = doc
            .axioms()
            .filter_map(|ax| match ax {
                Axiom::SubClassOf { sub: ClassExpression::Named(a), sup: ClassExpression::Named(b) } => Some((a.clone(), b.clone())),
                _ => None,
            })
            .collect();
        // fixpoint over pairs
        let mut closure: BTreeSet<(Iri, Iri)> = direct.iter().cloned().collect();
        loop {
            let extra: Vec<(Iri, Iri)> = closure
                .iter()
                .flat_map(|(a, b)| closure.iter().filter(move |(c, _)| c == b).map(move |(_, d)| (a.clone(), d.clone())))
                .filter(|p| !closure.contains(p))
                .collect();
            if extra.is_empty() {
                break;
            }
            closure.extend(extra);
        }
        for i in 0..30 {
            let cls = gen::ex(&format!("N{i}"));
            let want: BTreeSet<Iri> = closure.iter().filter(|(_, b)| *b == cls).map(|(a, _)| a.clone()).collect();
            prop_assert_eq!(subclasses(&doc, &cls, HierarchyMode::Transitive), want);
            let want: BTreeSet<Iri> = direct.iter().filter(|(_, b)| *b == cls).map(|(a, _)| a.clone()).collect();
            prop_assert_eq!(subclasses(&doc, &cls, HierarchyMode::Direct), want);
        }
    }
}
