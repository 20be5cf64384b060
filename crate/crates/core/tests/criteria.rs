mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::gen;
use common::*;
use ontoforge_core::changes::{AxiomState, ChangeOp};
use ontoforge_core::criteria::{
    evaluate_tag_rules, matches, parse_criteria, search, serialize_criteria, CriteriaError, CriteriaNode, EntityIndex,
    Tag, TagRule, TagStore,
};
use ontoforge_core::ids::{OntologyId, TagId};
use ontoforge_core::ontology::{Axiom, Entity, Iri, PrefixTable};
use ontoforge_core::project::Command;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

struct Fixture {
    axioms: Vec<Axiom>,
    state: AxiomState,
    prefixes: PrefixTable,
    index: EntityIndex,
    tags: Vec<TagId>,
    assigned: BTreeMap<Entity, BTreeSet<TagId>>,
}

fn fixture(seed: u64) -> Fixture {
    let mut rng = gen::rng(seed);
    let n = rng.gen_range(1..=60);
    let axioms = gen::random_fixture(&mut rng, n);
    let o = OntologyId::new("o");
    let mut state = AxiomState::empty(std::slice::from_ref(&o));
    for ax in &axioms {
        state.apply(&ChangeOp::add(&o, ax.clone())).unwrap();
    }
    let axioms: Vec<Axiom> = state.all_axioms().cloned().collect();
    let mut prefixes = PrefixTable::new();
    if rng.gen_bool(0.5) {
        prefixes.insert("g", Iri::new(gen::EX).unwrap()).unwrap();
    }
    let index = EntityIndex::new(&state, &prefixes);
    let tags: Vec<TagId> = (0..3).map(|i| TagId::new(format!("t{i}"))).collect();
    let mut assigned = BTreeMap::new();
    for e in index.entities() {
        if rng.gen_bool(0.3) {
            assigned.insert(e.clone(), BTreeSet::from([tags.choose(&mut rng).unwrap().clone()]));
        }
    }
    Fixture { axioms, state, prefixes, index, tags, assigned }
}

#[test]
fn documented_examples_parse() {
    let text = r#"{"type":"MatchAll","criteria":[
        {"type":"IsSubClassOf","cls":"http://example.org/air#Aircraft","mode":"transitive"},
        {"type":"AnnotationContains","property":"http://www.w3.org/2000/01/rdf-schema#label","text":"passenger","ignoreCase":true}
    ]}"#;
    let node = parse_criteria(text).unwrap();
    let (p, _) = project_with(AIR);
    let hits = p.search(&node, 50, 0);
    assert_eq!(hits.len(), 1);
    assert_eq!(hits[0].entity, class("AirbusA320"));
    assert_eq!(hits[0].display_name, "A320 passenger jet");
}

#[test]
fn schema_errors() {
    let err = parse_criteria(r#"{"type":"MatchAll","criteria":[{"type":"HasTag"},{"type":"IriContains","text":1}]}"#).unwrap_err();
    assert!(matches!(err, CriteriaError::Schema { ref path, .. } if path == "criteria[0]"), "{err:?}");
    let err = parse_criteria(r#"{"type":"AnnotationMatchesRegex","pattern":"(unclosed"}"#).unwrap_err();
    assert!(matches!(err, CriteriaError::InvalidRegex { .. }), "{err:?}");
    let err = parse_criteria(r#"{"type":"IriContains","text":"a","extra":true}"#).unwrap_err();
    assert!(matches!(err, CriteriaError::Schema { .. }));
    assert!(matches!(parse_criteria("[]"), Err(CriteriaError::Schema { .. })));
}

#[test]
fn missing_label_rule() {
    let (mut p, env) = project_with(AIR);
    p.execute(&env, &owner(), Command::PutTag { id: None, label: "Missing Label".into(), description: String::new(), color: "#e33".into() })
        .unwrap();
    let tag = p.tags().tags().next().unwrap().id.clone();
    let rule = r#"{"type":"LacksAnnotationOn","property":"http://www.w3.org/2000/01/rdf-schema#label"}"#;
    p.execute(&env, &owner(), Command::SetTagRules { rules: vec![TagRule { tag: tag.clone(), criteria: parse_criteria(rule).unwrap() }] })
        .unwrap();
    assert!(p.tags().derived().is_empty());
    let action = ontoforge_core::changes::EditAction::CreateEntity {
        kind: ontoforge_core::ontology::EntityKind::Class,
        name: ":Bare".into(),
    };
    p.execute(&env, &owner(), Command::Edit { action }).unwrap();
    let bare = Entity::class(air("Bare"));
    assert_eq!(p.tags().displayed_for(&bare), BTreeSet::from([tag.clone()]));
    let derived: BTreeSet<&Entity> = p.tags().derived().keys().collect();
    assert!(derived.contains(&bare));
    assert!(!derived.contains(&class("AirbusA320")));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn search_equals_brute_force(seed in any::<u64>(), limit in 0usize..80, offset in 0usize..20) {
        let f = fixture(seed);
        let mut rng = gen::rng(seed ^ 0x5eed);
        let criteria = gen::random_criteria(&mut rng, 4, 60, &f.tags);
        let want = gen::oracle_search(&criteria, f.index.entities(), &f.axioms, &f.prefixes, &f.assigned);
        let got = search(&f.index, &f.assigned, &criteria, limit, offset);
        let want: Vec<_> = want.into_iter().skip(offset).take(limit).collect();
        prop_assert_eq!(got.len(), want.len());
        for (hit, (e, name)) in got.iter().zip(&want) {
            prop_assert_eq!(&hit.entity, e);
            prop_assert_eq!(&hit.display_name, name);
        }
        prop_assert_eq!(f.index.entities(), &f.state.entities());
    }

    #[test]
    fn composites_follow_boolean_algebra(seed in any::<u64>()) {
        let f = fixture(seed);
        let mut rng = gen::rng(seed ^ 0xb001);
        let a = gen::random_criteria(&mut rng, 2, 60, &f.tags);
        let b = gen::random_criteria(&mut rng, 2, 60, &f.tags);
        let m = |n: &CriteriaNode, e: &Entity| matches(n, e, &f.index, &f.assigned);
        for e in f.index.entities() {
            prop_assert_eq!(m(&CriteriaNode::all(vec![a.clone(), b.clone()]), e), m(&a, e) && m(&b, e));
            prop_assert_eq!(m(&CriteriaNode::any(vec![a.clone(), b.clone()]), e), m(&a, e) || m(&b, e));
            prop_assert!(m(&CriteriaNode::all(vec![]), e));
            prop_assert!(!m(&CriteriaNode::any(vec![]), e));
            let label = Iri::rdfs_label();
            prop_assert_ne!(
                m(&CriteriaNode::HasAnnotationOn { property: label.clone() }, e),
                m(&CriteriaNode::LacksAnnotationOn { property: label }, e)
            );
        }
    }

    #[test]
    fn criteria_json_round_trips(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        let tags = vec![TagId::new("t0"), TagId::new("t1")];
        let node = gen::random_criteria(&mut rng, 4, 60, &tags);
        let json = serialize_criteria(&node);
        prop_assert_eq!(parse_criteria(&json).unwrap(), node);
    }

    #[test]
    fn tag_rules_are_idempotent(seed in any::<u64>()) {
        let f = fixture(seed);
        let mut rng = gen::rng(seed ^ 0x7a9);
        let mut store = TagStore::default();
        for t in &f.tags {
            store.put_tag(Tag { id: t.clone(), label: format!("label {t}"), description: String::new(), color: "#abc".into() }).unwrap();
        }
        for (e, tags) in &f.assigned {
            store.set_entity_tags(e, tags.clone(), Some(ontoforge_core::access::Role::Editor)).unwrap();
        }
        let rules: Vec<TagRule> = (0..3)
            .map(|_| TagRule { tag: f.tags.choose(&mut rng).unwrap().clone(), criteria: gen::random_criteria(&mut rng, 3, 60, &f.tags) })
            .collect();
        store.set_rules(rules.clone()).unwrap();
        let first = evaluate_tag_rules(&store, &f.index);
        store.set_derived(first.clone());
        prop_assert_eq!(&evaluate_tag_rules(&store, &f.index), &first);
        // oracle: each rule over manual tags only
        for e in f.index.entities() {
            let want: BTreeSet<TagId> = rules
                .iter()
                .filter(|r| gen::oracle_matches(&r.criteria, e, &f.axioms, &f.assigned))
                .map(|r| r.tag.clone())
                .collect();
            prop_assert_eq!(first.get(e).cloned().unwrap_or_default(), want);
        }
    }
}
