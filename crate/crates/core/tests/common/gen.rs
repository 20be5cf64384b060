//! Seeded generators and brute-force oracles shared by property and acceptance tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use ontoforge_core::changes::{AxiomState, ChangeOp, EditAction};
use ontoforge_core::criteria::{fold_case, CriteriaNode, Pattern};
use ontoforge_core::graph::{EdgeKind, EntityGraph, GraphEdge};
use ontoforge_core::ids::{OntologyId, TagId};
use ontoforge_core::ontology::{
    annotation_values, display_name_in, subclasses, AnnotationValue, Axiom, ClassExpression, Entity, EntityKind,
    HierarchyMode, Iri, OntologyDocument, PrefixTable,
};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub const EX: &str = "http://example.org/gen#";

pub fn ex(local: &str) -> Iri {
    Iri::new(format!("{EX}{local}")).unwrap()
}

/// IRIs from a small vocabulary; some have no valid prefixed form.
pub fn vocab_iri(rng: &mut StdRng, size: usize) -> Iri {
    let i = rng.gen_range(0..size);
    match rng.gen_range(0..10) {
        0 => Iri::new(format!("http://other.example/path/{i}?q=a&b")).unwrap(),
        1 => Iri::new(format!("urn:uuid:{i:08}-0000")).unwrap(),
        2 => Iri::new(format!("{EX}Éclair{i}")).unwrap(),
        _ => ex(&format!("T{i}")),
    }
}

fn class_expression(rng: &mut StdRng, size: usize, depth: u32) -> ClassExpression {
    let roll = if depth == 0 { 0 } else { rng.gen_range(0..6) };
    match roll {
        0..=3 => ClassExpression::Named(vocab_iri(rng, size)),
        4 => {
            let n = rng.gen_range(2..4);
            ClassExpression::IntersectionOf((0..n).map(|_| class_expression(rng, size, depth - 1)).collect())
        }
        _ => ClassExpression::SomeValuesFrom {
            property: vocab_iri(rng, size),
            filler: Box::new(class_expression(rng, size, depth - 1)),
        },
    }
}

const TRICKY_TEXT: &[&str] = &["plain", "with \"quotes\"", "back\\slash", "naïve café", "line\nbreak", "", "  spaced  ", "日本語", "# not a comment", ")"];

fn literal(rng: &mut StdRng) -> AnnotationValue {
    let base = TRICKY_TEXT.choose(rng).unwrap();
    let lexical = format!("{base}{}", rng.gen_range(0..50));
    match rng.gen_range(0..4) {
        0 => AnnotationValue::Literal { lexical, language: Some(["en", "de-CH", "fr"].choose(rng).unwrap().to_string()), datatype: None },
        1 => AnnotationValue::Literal {
            lexical,
            language: None,
            datatype: Some(Iri::new("http://www.w3.org/2001/XMLSchema#string").unwrap()),
        },
        _ => AnnotationValue::plain(lexical),
    }
}

pub fn random_axiom(rng: &mut StdRng, size: usize) -> Axiom {
    match rng.gen_range(0..9) {
        0 => Axiom::Declaration(Entity::new(*EntityKind::ALL.choose(rng).unwrap(), vocab_iri(rng, size))),
        1 | 2 => Axiom::SubClassOf { sub: class_expression(rng, size, 2), sup: class_expression(rng, size, 2) },
        3 => {
            let n = rng.gen_range(2..4);
            Axiom::EquivalentClasses((0..n).map(|_| class_expression(rng, size, 1)).collect())
        }
        4 => Axiom::SubObjectPropertyOf { sub: vocab_iri(rng, size), sup: vocab_iri(rng, size) },
        5 => Axiom::ClassAssertion { class: class_expression(rng, size, 1), individual: vocab_iri(rng, size) },
        6 => Axiom::ObjectPropertyAssertion { property: vocab_iri(rng, size), source: vocab_iri(rng, size), target: vocab_iri(rng, size) },
        7 => Axiom::AnnotationAssertion {
            property: if rng.gen_bool(0.5) { Iri::rdfs_label() } else { vocab_iri(rng, size) },
            subject: vocab_iri(rng, size),
            value: literal(rng),
        },
        _ => Axiom::AnnotationAssertion {
            property: vocab_iri(rng, size),
            subject: vocab_iri(rng, size),
            value: AnnotationValue::Iri(vocab_iri(rng, size)),
        },
    }
}

pub fn random_document(rng: &mut StdRng, max_axioms: usize) -> OntologyDocument {
    let mut prefixes = PrefixTable::new();
    prefixes.insert("", Iri::new(EX).unwrap()).unwrap();
    if rng.gen_bool(0.5) {
        prefixes.insert("other", Iri::new("http://other.example/path/").unwrap()).unwrap();
    }
    let iri = rng.gen_bool(0.8).then(|| Iri::new(format!("http://example.org/doc/{}", rng.gen::<u16>())).unwrap());
    let n = rng.gen_range(0..=max_axioms);
    let size = (n / 3).max(4);
    OntologyDocument::with_axioms(iri, prefixes, (0..n).map(|_| random_axiom(rng, size)))
}

/// Edit actions over a fixed vocabulary; some will fail to compile, which is fine.
pub fn random_edit(rng: &mut StdRng, state: &AxiomState, ontology: &OntologyId) -> EditAction {
    let entities: Vec<Entity> = state.entities().into_iter().collect();
    let classes: Vec<Iri> = entities.iter().filter(|e| e.kind == EntityKind::Class).map(|e| e.iri.clone()).collect();
    let pick_class = |rng: &mut StdRng| classes.choose(rng).cloned().unwrap_or_else(Iri::owl_thing);
    match rng.gen_range(0..8) {
        0 => EditAction::CreateClass { name: format!("Class {}", rng.gen_range(0..1000)), parent: pick_class(rng) },
        1 => EditAction::CreateClass { name: format!(":C{}", rng.gen_range(0..30)), parent: pick_class(rng) },
        2 => EditAction::CreateEntity { kind: *EntityKind::ALL.choose(rng).unwrap(), name: format!(":E{}", rng.gen_range(0..30)) },
        3 => match entities.choose(rng) {
            Some(e) => EditAction::DeleteEntity { entity: e.clone() },
            None => EditAction::CreateEntity { kind: EntityKind::Class, name: ":Seed".into() },
        },
        4 => EditAction::AddParent { cls: pick_class(rng), parent: pick_class(rng) },
        5 => EditAction::RemoveParent { cls: pick_class(rng), parent: pick_class(rng) },
        6 => {
            let subject = entities.choose(rng).map(|e| e.iri.clone()).unwrap_or_else(Iri::owl_thing);
            let old = ontoforge_core::ontology::annotation_values(state.all_axioms(), &subject, &Iri::rdfs_label()).into_iter().next();
            let old = if rng.gen_bool(0.7) { old } else { None };
            EditAction::SetAnnotation { subject, property: Iri::rdfs_label(), old, new: literal(rng) }
        }
        _ => {
            let n = rng.gen_range(1..5);
            let mut changes = Vec::new();
            let existing: Vec<&Axiom> = state.all_axioms().collect();
            for _ in 0..n {
                if rng.gen_bool(0.3) && !existing.is_empty() {
                    changes.push(ChangeOp::remove(ontology, (*existing.choose(rng).unwrap()).clone()));
                } else {
                    changes.push(ChangeOp::add(ontology, random_axiom(rng, 12)));
                }
            }
            EditAction::ApplyChanges { changes, commit_message: rng.gen_bool(0.5).then(|| "batch".to_owned()) }
        }
    }
}

/// Axioms for a search fixture with about `entities` named terms.
pub fn random_fixture(rng: &mut StdRng, entities: usize) -> Vec<Axiom> {
    let mut axioms = Vec::new();
    let kinds = [EntityKind::Class, EntityKind::Class, EntityKind::Class, EntityKind::NamedIndividual, EntityKind::ObjectProperty];
    let names: Vec<(EntityKind, Iri)> =
        (0..entities).map(|i| (*kinds.choose(rng).unwrap(), ex(&format!("N{i}")))).collect();
    for (kind, iri) in &names {
        axioms.push(Axiom::Declaration(Entity::new(*kind, iri.clone())));
    }
    let classes: Vec<&Iri> = names.iter().filter(|(k, _)| *k == EntityKind::Class).map(|(_, i)| i).collect();
    for (i, (kind, iri)) in names.iter().enumerate() {
        if *kind == EntityKind::Class && i > 0 && rng.gen_bool(0.8) {
            let parent = classes[rng.gen_range(0..classes.len())];
            axioms.push(Axiom::sub_class_of(iri.clone(), parent.clone()));
        }
        if rng.gen_bool(0.7) {
            let word = ["Passenger", "freighter", "PASSENGER jet", "Ölkanne", "straße", "ΣΊΣΥΦΟΣ", "cargo"].choose(rng).unwrap();
            axioms.push(Axiom::label(iri.clone(), format!("{word} {}", rng.gen_range(0..5))));
        }
        if rng.gen_bool(0.3) {
            axioms.push(Axiom::AnnotationAssertion {
                property: ex("comment"),
                subject: iri.clone(),
                value: literal(rng),
            });
        }
    }
    axioms
}

pub fn random_criteria(rng: &mut StdRng, depth: u32, entities: usize, tags: &[TagId]) -> CriteriaNode {
    let roll = if depth == 0 { rng.gen_range(2..11) } else { rng.gen_range(0..11) };
    let pick = |rng: &mut StdRng| ex(&format!("N{}", rng.gen_range(0..entities.max(1))));
    let property = |rng: &mut StdRng| match rng.gen_range(0..3) {
        0 => None,
        1 => Some(Iri::rdfs_label()),
        _ => Some(ex("comment")),
    };
    let text = |rng: &mut StdRng| ["pass", "PASS", "ss", "freight", "STRASSE", "straße", "σίσυφος", "1", ""].choose(rng).unwrap().to_string();
    match roll {
        0 | 1 => {
            let n = rng.gen_range(0..4);
            let kids = (0..n).map(|_| random_criteria(rng, depth - 1, entities, tags)).collect();
            if roll == 0 { CriteriaNode::all(kids) } else { CriteriaNode::any(kids) }
        }
        2 => CriteriaNode::IsSubClassOf {
            cls: pick(rng),
            mode: if rng.gen_bool(0.5) { HierarchyMode::Direct } else { HierarchyMode::Transitive },
        },
        3 => CriteriaNode::AnnotationContains { property: property(rng), text: text(rng), ignore_case: rng.gen_bool(0.5) },
        4 => CriteriaNode::AnnotationMatchesRegex {
            property: property(rng),
            pattern: Pattern::new(["^P", "[0-9]$", "(?i)cargo", "jet|freighter", "ß"].choose(rng).unwrap()).unwrap(),
        },
        5 => CriteriaNode::HasAnnotationOn { property: property(rng).unwrap_or_else(Iri::rdfs_label) },
        6 => CriteriaNode::LacksAnnotationOn { property: property(rng).unwrap_or_else(|| ex("comment")) },
        7 => CriteriaNode::EntityKindIs { kind: *[EntityKind::Class, EntityKind::NamedIndividual, EntityKind::ObjectProperty].choose(rng).unwrap() },
        8 if !tags.is_empty() => CriteriaNode::HasTag { tag: tags.choose(rng).unwrap().clone() },
        _ => CriteriaNode::IriContains { text: format!("N{}", rng.gen_range(0..10)) },
    }
}

/// Brute-force criteria semantics written against the document queries.
pub fn oracle_matches(
    node: &CriteriaNode,
    e: &Entity,
    axioms: &[Axiom],
    tags: &BTreeMap<Entity, BTreeSet<TagId>>,
) -> bool {
    let literal_texts = |property: &Option<Iri>| -> Vec<String> {
        axioms
            .iter()
            .filter_map(|ax| match ax {
                Axiom::AnnotationAssertion { property: p, subject, value: AnnotationValue::Literal { lexical, .. } }
                    if subject == &e.iri && property.as_ref().map_or(true, |want| want == p) =>
                {
                    Some(lexical.clone())
                }
                _ => None,
            })
            .collect()
    };
    let all_props = |property: &Iri| annotation_values(axioms.iter(), &e.iri, property);
    match node {
        CriteriaNode::MatchAll { criteria } => criteria.iter().all(|c| oracle_matches(c, e, axioms, tags)),
        CriteriaNode::MatchAny { criteria } => criteria.iter().any(|c| oracle_matches(c, e, axioms, tags)),
        CriteriaNode::IsSubClassOf { cls, mode } => {
            let doc = OntologyDocument::with_axioms(None, PrefixTable::new(), axioms.iter().cloned());
            e.kind == EntityKind::Class && subclasses(&doc, cls, *mode).contains(&e.iri)
        }
        CriteriaNode::AnnotationContains { property, text, ignore_case } => literal_texts(property).iter().any(|l| {
            if *ignore_case {
                fold_case(l).contains(&fold_case(text))
            } else {
                l.contains(text.as_str())
            }
        }),
        CriteriaNode::AnnotationMatchesRegex { property, pattern } => {
            let re = regex::Regex::new(pattern.as_str()).unwrap();
            literal_texts(property).iter().any(|l| re.is_match(l))
        }
        CriteriaNode::HasAnnotationOn { property } => !all_props(property).is_empty(),
        CriteriaNode::LacksAnnotationOn { property } => all_props(property).is_empty(),
        CriteriaNode::EntityKindIs { kind } => e.kind == *kind,
        CriteriaNode::HasTag { tag } => tags.get(e).is_some_and(|t| t.contains(tag)),
        CriteriaNode::IriContains { text } => e.iri.as_str().contains(text.as_str()),
    }
}

/// Filter every entity with the oracle, then sort by folded display name and IRI.
pub fn oracle_search(
    criteria: &CriteriaNode,
    entities: &BTreeSet<Entity>,
    axioms: &[Axiom],
    prefixes: &PrefixTable,
    tags: &BTreeMap<Entity, BTreeSet<TagId>>,
) -> Vec<(Entity, String)> {
    let mut out: Vec<(Entity, String)> = entities
        .iter()
        .filter(|e| oracle_matches(criteria, e, axioms, tags))
        .map(|e| (e.clone(), display_name_in(axioms.iter(), prefixes, &e.iri)))
        .collect();
    out.sort_by(|(ea, na), (eb, nb)| {
        fold_case(na).cmp(&fold_case(nb)).then_with(|| ea.iri.cmp(&eb.iri)).then_with(|| ea.kind.cmp(&eb.kind))
    });
    out
}

/// Random typed graph over `n` class nodes with root N0.
pub fn random_graph(rng: &mut StdRng, n: usize, edge_prob: f64) -> EntityGraph {
    let nodes: Vec<Entity> = (0..n).map(|i| Entity::class(ex(&format!("N{i}")))).collect();
    let mut edges = BTreeSet::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.gen_bool(edge_prob) {
                let kind = match rng.gen_range(0..3) {
                    0 => EdgeKind::SubClassOf,
                    1 => EdgeKind::InstanceOf,
                    _ => EdgeKind::Property { label: "p".into(), property: ex("p") },
                };
                edges.insert(GraphEdge { source: nodes[a].clone(), target: nodes[b].clone(), kind });
            }
        }
    }
    graph_of(nodes, edges)
}

pub fn graph_of(nodes: Vec<Entity>, edges: BTreeSet<GraphEdge>) -> EntityGraph {
    let display_names = nodes.iter().map(|n| (n.iri.clone(), n.iri.fragment().to_owned())).collect();
    EntityGraph { root: nodes[0].clone(), nodes: nodes.into_iter().collect(), edges, display_names }
}

/// Every simple path from `a` to `b` with at most `max_len` edges,
/// as edge lists, by exhaustive enumeration.
pub fn oracle_simple_paths<'g>(g: &'g EntityGraph, a: &Entity, b: &Entity, max_len: usize) -> Vec<Vec<&'g GraphEdge>> {
    fn go<'g>(
        g: &'g EntityGraph,
        here: &Entity,
        b: &Entity,
        max_len: usize,
        visited: &mut Vec<Entity>,
        path: &mut Vec<&'g GraphEdge>,
        out: &mut Vec<Vec<&'g GraphEdge>>,
    ) {
        if here == b {
            out.push(path.clone());
            return;
        }
        if path.len() == max_len {
            return;
        }
        for e in &g.edges {
            let next = if &e.source == here {
                &e.target
            } else if &e.target == here {
                &e.source
            } else {
                continue;
            };
            if visited.contains(next) {
                continue;
            }
            visited.push(next.clone());
            path.push(e);
            go(g, next, b, max_len, visited, path, out);
            path.pop();
            visited.pop();
        }
    }
    let mut out = Vec::new();
    if a == b {
        return out;
    }
    go(g, a, b, max_len, &mut vec![a.clone()], &mut Vec::new(), &mut out);
    out
}

/// Edge set implied by the derivation rules, written as one pass over `axioms`.
pub fn oracle_edges(axioms: &[Axiom], name_of: &dyn Fn(&Iri) -> String) -> BTreeSet<GraphEdge> {
    let mut out = BTreeSet::new();
    for ax in axioms {
        let edge = match ax {
            Axiom::SubClassOf { sub: ClassExpression::Named(a), sup } => match sup {
                ClassExpression::Named(b) => Some((Entity::class(a.clone()), Entity::class(b.clone()), EdgeKind::SubClassOf)),
                ClassExpression::SomeValuesFrom { property, filler } => match &**filler {
                    ClassExpression::Named(b) => Some((
                        Entity::class(a.clone()),
                        Entity::class(b.clone()),
                        EdgeKind::Property { label: name_of(property), property: property.clone() },
                    )),
                    _ => None,
                },
                _ => None,
            },
            Axiom::ClassAssertion { class: ClassExpression::Named(c), individual } => Some((
                Entity::new(EntityKind::NamedIndividual, individual.clone()),
                Entity::class(c.clone()),
                EdgeKind::InstanceOf,
            )),
            Axiom::ObjectPropertyAssertion { property, source, target } => Some((
                Entity::new(EntityKind::NamedIndividual, source.clone()),
                Entity::new(EntityKind::NamedIndividual, target.clone()),
                EdgeKind::Property { label: name_of(property), property: property.clone() },
            )),
            _ => None,
        };
        if let Some((source, target, kind)) = edge {
            out.insert(GraphEdge { source, target, kind });
        }
    }
    out
}

/// Undirected hop distances from `root`.
pub fn oracle_distances(g: &EntityGraph) -> BTreeMap<Entity, usize> {
    let mut dist = BTreeMap::from([(g.root.clone(), 0)]);
    let mut queue = VecDeque::from([g.root.clone()]);
    while let Some(n) = queue.pop_front() {
        let d = dist[&n];
        for e in &g.edges {
            for (x, y) in [(&e.source, &e.target), (&e.target, &e.source)] {
                if *x == n && !dist.contains_key(y) {
                    dist.insert(y.clone(), d + 1);
                    queue.push_back(y.clone());
                }
            }
        }
    }
    dist
}
