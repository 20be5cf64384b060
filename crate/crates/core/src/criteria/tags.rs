use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{matches, CriteriaNode, EntityIndex};
use crate::access::{allowed, Action, Role};
use crate::ids::TagId;
use crate::ontology::Entity;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TagError {
    #[error("tag label must not be empty")]
    EmptyLabel,
    #[error("a tag labelled {0:?} already exists")]
    DuplicateLabel(String),
    #[error("invalid tag color {0:?}")]
    InvalidColor(String),
    #[error("unknown tag {0}")]
    UnknownTag(TagId),
    #[error("permission denied")]
    PermissionDenied,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Tag {
    pub id: TagId,
    pub label: String,
    #[serde(default)]
    pub description: String,
    pub color: String,
}

fn valid_color(color: &str) -> bool {
    color
        .strip_prefix('#')
        .is_some_and(|hex| matches!(hex.len(), 3 | 6) && hex.chars().all(|c| c.is_ascii_hexdigit()))
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TagRule {
    pub tag: TagId,
    pub criteria: CriteriaNode,
}

/// Tag definitions, rules, and both kinds of assignment.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct TagStore {
    tags: IndexMap<TagId, Tag>,
    rules: Vec<TagRule>,
    #[serde(with = "entity_pairs")]
    manual: BTreeMap<Entity, BTreeSet<TagId>>,
    #[serde(skip)]
    derived: BTreeMap<Entity, BTreeSet<TagId>>,
}

impl TagStore {
    pub fn tags(&self) -> impl Iterator<Item = &Tag> {
        self.tags.values()
    }

    pub fn tag(&self, id: &TagId) -> Option<&Tag> {
        self.tags.get(id)
    }

    pub fn rules(&self) -> &[TagRule] {
        &self.rules
    }

    pub fn manual(&self) -> &BTreeMap<Entity, BTreeSet<TagId>> {
        &self.manual
    }

    pub fn derived(&self) -> &BTreeMap<Entity, BTreeSet<TagId>> {
        &self.derived
    }

    /// Manual and rule-derived tags together.
    pub fn displayed(&self) -> BTreeMap<Entity, BTreeSet<TagId>> {
        let mut out = self.manual.clone();
        for (e, tags) in &self.derived {
            out.entry(e.clone()).or_default().extend(tags.iter().cloned());
        }
        out
    }

    pub fn displayed_for(&self, e: &Entity) -> BTreeSet<TagId> {
        let manual = self.manual.get(e).into_iter().flatten();
        manual.chain(self.derived.get(e).into_iter().flatten()).cloned().collect()
    }

    pub fn validate_tag(&self, tag: &Tag) -> Result<(), TagError> {
        if tag.label.trim().is_empty() {
            return Err(TagError::EmptyLabel);
        }
        if !valid_color(&tag.color) {
            return Err(TagError::InvalidColor(tag.color.clone()));
        }
        if self.tags.values().any(|t| t.id != tag.id && t.label == tag.label) {
            return Err(TagError::DuplicateLabel(tag.label.clone()));
        }
        Ok(())
    }

    /// Creates or replaces the tag with `tag.id`.
    pub fn put_tag(&mut self, tag: Tag) -> Result<(), TagError> {
        self.validate_tag(&tag)?;
        self.tags.insert(tag.id.clone(), tag);
        Ok(())
    }

    /// Drops the tag along with its rules and assignments.
    pub fn delete_tag(&mut self, id: &TagId) -> Result<Tag, TagError> {
        let tag = self.tags.shift_remove(id).ok_or_else(|| TagError::UnknownTag(id.clone()))?;
        self.rules.retain(|r| &r.tag != id && !r.criteria.tags().contains(id));
        for map in [&mut self.manual, &mut self.derived] {
            map.values_mut().for_each(|set| {
                set.remove(id);
            });
            map.retain(|_, set| !set.is_empty());
        }
        Ok(tag)
    }

    pub fn check_rule(&self, rule: &TagRule) -> Result<(), TagError> {
        std::iter::once(&rule.tag)
            .chain(rule.criteria.tags())
            .find(|t| !self.tags.contains_key(*t))
            .map_or(Ok(()), |t| Err(TagError::UnknownTag(t.clone())))
    }

    pub fn set_rules(&mut self, rules: Vec<TagRule>) -> Result<(), TagError> {
        rules.iter().try_for_each(|r| self.check_rule(r))?;
        self.rules = rules;
        Ok(())
    }

    pub fn check_assignment(&self, tags: &BTreeSet<TagId>, role: Option<Role>) -> Result<(), TagError> {
        if !allowed(role, Action::Edit) {
            return Err(TagError::PermissionDenied);
        }
        match tags.iter().find(|t| !self.tags.contains_key(*t)) {
            Some(unknown) => Err(TagError::UnknownTag(unknown.clone())),
            None => Ok(()),
        }
    }

    /// Replaces the manual tag set of `e`; returns the displayed set.
    pub fn set_entity_tags(
        &mut self,
        e: &Entity,
        tags: BTreeSet<TagId>,
        role: Option<Role>,
    ) -> Result<BTreeSet<TagId>, TagError> {
        self.check_assignment(&tags, role)?;
        if tags.is_empty() {
            self.manual.remove(e);
        } else {
            self.manual.insert(e.clone(), tags);
        }
        Ok(self.displayed_for(e))
    }

    pub fn set_derived(&mut self, derived: BTreeMap<Entity, BTreeSet<TagId>>) {
        self.derived = derived;
    }
}

/// Entity-keyed maps as `[[entity, tags], ...]`, since JSON keys must be strings.
mod entity_pairs {
    use std::collections::{BTreeMap, BTreeSet};

    use serde::{Deserialize, Deserializer, Serializer};

    use crate::ids::TagId;
    use crate::ontology::Entity;

    pub fn serialize<S: Serializer>(map: &BTreeMap<Entity, BTreeSet<TagId>>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(map.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Entity, BTreeSet<TagId>>, D::Error> {
        Ok(Vec::<(Entity, BTreeSet<TagId>)>::deserialize(d)?.into_iter().collect())
    }
}

/// One pass over all rules; HasTag sees manual tags only.
pub fn evaluate_tag_rules(store: &TagStore, index: &EntityIndex) -> BTreeMap<Entity, BTreeSet<TagId>> {
    let mut out: BTreeMap<Entity, BTreeSet<TagId>> = BTreeMap::new();
    for rule in store.rules() {
        for e in index.entities() {
            if matches(&rule.criteria, e, index, store.manual()) {
                out.entry(e.clone()).or_default().insert(rule.tag.clone());
            }
        }
    }
    out
}
