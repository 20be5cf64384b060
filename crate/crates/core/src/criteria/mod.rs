//! Criteria trees shared by entity search and rule-based tagging.

mod fold;
mod tags;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::changes::AxiomState;
use crate::ids::TagId;
use crate::ontology::{AnnotationValue, Axiom, ClassExpression, Entity, EntityKind, HierarchyMode, Iri, PrefixTable};

pub use fold::{fold_case, fold_char};
pub use tags::{evaluate_tag_rules, Tag, TagError, TagRule, TagStore};

const REGEX_SIZE_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CriteriaError {
    #[error("criteria schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("invalid regex {pattern:?}: {message}")]
    InvalidRegex { pattern: String, message: String },
}

/// A compiled regular expression; equality is on the source text.
#[derive(Clone)]
pub struct Pattern {
    regex: Regex,
}

impl Pattern {
    pub fn new(source: &str) -> Result<Self, CriteriaError> {
        RegexBuilder::new(source)
            .size_limit(REGEX_SIZE_LIMIT)
            .build()
            .map(|regex| Pattern { regex })
            .map_err(|e| CriteriaError::InvalidRegex { pattern: source.to_owned(), message: e.to_string() })
    }

    pub fn as_str(&self) -> &str {
        self.regex.as_str()
    }

    pub fn is_match(&self, text: &str) -> bool {
        self.regex.is_match(text)
    }
}

impl PartialEq for Pattern {
    fn eq(&self, other: &Self) -> bool {
        self.as_str() == other.as_str()
    }
}

impl Eq for Pattern {}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pattern({:?})", self.as_str())
    }
}

impl Serialize for Pattern {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Pattern {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let source = String::deserialize(d)?;
        Pattern::new(&source).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all_fields = "camelCase", deny_unknown_fields)]
pub enum CriteriaNode {
    MatchAll { criteria: Vec<CriteriaNode> },
    MatchAny { criteria: Vec<CriteriaNode> },
    IsSubClassOf { cls: Iri, mode: HierarchyMode },
    AnnotationContains { property: Option<Iri>, text: String, ignore_case: bool },
    AnnotationMatchesRegex { property: Option<Iri>, pattern: Pattern },
    HasAnnotationOn { property: Iri },
    LacksAnnotationOn { property: Iri },
    EntityKindIs { kind: EntityKind },
    HasTag { tag: TagId },
    IriContains { text: String },
}

impl CriteriaNode {
    pub fn all(criteria: Vec<CriteriaNode>) -> Self {
        CriteriaNode::MatchAll { criteria }
    }

    pub fn any(criteria: Vec<CriteriaNode>) -> Self {
        CriteriaNode::MatchAny { criteria }
    }

    /// Tags referenced anywhere in the tree.
    pub fn tags(&self) -> BTreeSet<&TagId> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            match node {
                CriteriaNode::MatchAll { criteria } | CriteriaNode::MatchAny { criteria } => stack.extend(criteria),
                CriteriaNode::HasTag { tag } => {
                    out.insert(tag);
                }
                _ => {}
            }
        }
        out
    }
}

pub fn parse_criteria(text: &str) -> Result<CriteriaNode, CriteriaError> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| CriteriaError::Schema { path: ".".into(), message: e.to_string() })?;
    criteria_from_value(&value)
}

pub fn criteria_from_value(value: &serde_json::Value) -> Result<CriteriaNode, CriteriaError> {
    node_at(value, &mut String::new())
}

fn schema(path: &str, message: impl Into<String>) -> CriteriaError {
    let path = if path.is_empty() { ".".to_owned() } else { path.to_owned() };
    CriteriaError::Schema { path, message: message.into() }
}

// Composites are walked by hand so errors can name the offending child.
fn node_at(value: &serde_json::Value, path: &mut String) -> Result<CriteriaNode, CriteriaError> {
    let obj = value.as_object().ok_or_else(|| schema(path, "expected an object"))?;
    let ty = obj.get("type").and_then(|t| t.as_str()).ok_or_else(|| schema(path, "missing string field `type`"))?;
    match ty {
        "MatchAll" | "MatchAny" => {
            if let Some(extra) = obj.keys().find(|k| !matches!(k.as_str(), "type" | "criteria")) {
                return Err(schema(path, format!("unknown field `{extra}`")));
            }
            let items = obj
                .get("criteria")
                .and_then(|c| c.as_array())
                .ok_or_else(|| schema(path, "`criteria` must be an array"))?;
            let mut children = Vec::with_capacity(items.len());
            for (i, item) in items.iter().enumerate() {
                let len = path.len();
                if !path.is_empty() {
                    path.push('.');
                }
                path.push_str(&format!("criteria[{i}]"));
                children.push(node_at(item, path)?);
                path.truncate(len);
            }
            Ok(if ty == "MatchAll" { CriteriaNode::all(children) } else { CriteriaNode::any(children) })
        }
        _ => {
            if let Some(pattern) = obj.get("pattern").and_then(|p| p.as_str()) {
                Pattern::new(pattern)?;
            }
            serde_json::from_value(value.clone()).map_err(|e| schema(path, e.to_string()))
        }
    }
}

pub fn serialize_criteria(node: &CriteriaNode) -> String {
    serde_json::to_string(node).expect("criteria serialize")
}

/// Read-only lookup tables over one project state.
#[derive(Clone, Debug, Default)]
pub struct EntityIndex {
    entities: BTreeSet<Entity>,
    parents: BTreeMap<Iri, BTreeSet<Iri>>,
    annotations: BTreeMap<Iri, Vec<(Iri, AnnotationValue)>>,
    display: BTreeMap<Iri, String>,
}

impl EntityIndex {
    pub fn new(state: &AxiomState, prefixes: &PrefixTable) -> Self {
        let entities = state.entities();
        let mut parents: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
        let mut annotations: BTreeMap<Iri, Vec<(Iri, AnnotationValue)>> = BTreeMap::new();
        for ax in state.all_axioms() {
            match ax {
                Axiom::SubClassOf { sub: ClassExpression::Named(sub), sup: ClassExpression::Named(sup) } => {
                    parents.entry(sub.clone()).or_default().insert(sup.clone());
                }
                Axiom::AnnotationAssertion { property, subject, value } => {
                    annotations.entry(subject.clone()).or_default().push((property.clone(), value.clone()));
                }
                _ => {}
            }
        }
        let label = Iri::rdfs_label();
        let display = entities
            .iter()
            .map(|e| &e.iri)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(|iri| {
                let first_label = annotations.get(iri).into_iter().flatten().find_map(|(p, v)| match v {
                    AnnotationValue::Literal { lexical, .. } if *p == label => Some(lexical.clone()),
                    _ => None,
                });
                let name = first_label
                    .or_else(|| prefixes.abbreviate(iri))
                    .unwrap_or_else(|| format!("<{iri}>"));
                (iri.clone(), name)
            })
            .collect();
        EntityIndex { entities, parents, annotations, display }
    }

    pub fn entities(&self) -> &BTreeSet<Entity> {
        &self.entities
    }

    pub fn contains(&self, entity: &Entity) -> bool {
        self.entities.contains(entity)
    }

    pub fn display_name(&self, iri: &Iri) -> String {
        self.display.get(iri).cloned().unwrap_or_else(|| format!("<{iri}>"))
    }

    fn annotations_on(&self, iri: &Iri) -> &[(Iri, AnnotationValue)] {
        self.annotations.get(iri).map_or(&[], Vec::as_slice)
    }

    /// Walks superclasses of `sub` upward; `sub` reaches itself only via a cycle.
    fn is_subclass(&self, sub: &Iri, sup: &Iri, mode: HierarchyMode) -> bool {
        let direct = |c: &Iri| self.parents.get(c).into_iter().flatten();
        match mode {
            HierarchyMode::Direct => direct(sub).any(|p| p == sup),
            HierarchyMode::Transitive => {
                let mut seen = BTreeSet::new();
                let mut queue = VecDeque::from([sub]);
                while let Some(next) = queue.pop_front() {
                    for parent in direct(next) {
                        if parent == sup {
                            return true;
                        }
                        if seen.insert(parent) {
                            queue.push_back(parent);
                        }
                    }
                }
                false
            }
        }
    }
}

fn literals_on<'a>(index: &'a EntityIndex, iri: &Iri, property: Option<&Iri>) -> Vec<&'a str> {
    index
        .annotations_on(iri)
        .iter()
        .filter_map(|(p, v)| match v {
            AnnotationValue::Literal { lexical, .. } if property.is_none_or(|want| want == p) => Some(lexical.as_str()),
            _ => None,
        })
        .collect()
}

/// `tags` holds the tag sets HasTag may observe.
pub fn matches(node: &CriteriaNode, e: &Entity, index: &EntityIndex, tags: &BTreeMap<Entity, BTreeSet<TagId>>) -> bool {
    let literals = |property: &Option<Iri>| literals_on(index, &e.iri, property.as_ref());
    match node {
        CriteriaNode::MatchAll { criteria } => criteria.iter().all(|c| matches(c, e, index, tags)),
        CriteriaNode::MatchAny { criteria } => criteria.iter().any(|c| matches(c, e, index, tags)),
        CriteriaNode::IsSubClassOf { cls, mode } => e.kind == EntityKind::Class && index.is_subclass(&e.iri, cls, *mode),
        CriteriaNode::AnnotationContains { property, text, ignore_case } => {
            if *ignore_case {
                let needle = fold_case(text);
                literals(property).into_iter().any(|l| fold_case(l).contains(&needle))
            } else {
                literals(property).into_iter().any(|l| l.contains(text.as_str()))
            }
        }
        CriteriaNode::AnnotationMatchesRegex { property, pattern } => literals(property).into_iter().any(|l| pattern.is_match(l)),
        CriteriaNode::HasAnnotationOn { property } => index.annotations_on(&e.iri).iter().any(|(p, _)| p == property),
        CriteriaNode::LacksAnnotationOn { property } => !index.annotations_on(&e.iri).iter().any(|(p, _)| p == property),
        CriteriaNode::EntityKindIs { kind } => e.kind == *kind,
        CriteriaNode::HasTag { tag } => tags.get(e).is_some_and(|t| t.contains(tag)),
        CriteriaNode::IriContains { text } => e.iri.as_str().contains(text.as_str()),
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchHit {
    pub entity: Entity,
    pub display_name: String,
}

/// Matching entities ordered by case-folded display name, then IRI, then kind.
pub fn search(
    index: &EntityIndex,
    tags: &BTreeMap<Entity, BTreeSet<TagId>>,
    criteria: &CriteriaNode,
    limit: usize,
    offset: usize,
) -> Vec<SearchHit> {
    let mut hits: Vec<(String, SearchHit)> = index
        .entities()
        .iter()
        .filter(|e| matches(criteria, e, index, tags))
        .map(|e| {
            let display_name = index.display_name(&e.iri);
            (fold_case(&display_name), SearchHit { entity: e.clone(), display_name })
        })
        .collect();
    hits.sort_by(|(ka, a), (kb, b)| ka.cmp(kb).then_with(|| a.entity.iri.cmp(&b.entity.iri)).then_with(|| a.entity.kind.cmp(&b.entity.kind)));
    hits.into_iter().skip(offset).take(limit).map(|(_, h)| h).collect()
}
