//! High-level editing actions and the axiom changes they compile to.

use serde::{Deserialize, Serialize};

use super::{effective_ops, AxiomState, ChangeError, ChangeOp};
use crate::ids::{IdSource, OntologyId};
use crate::ontology::{
    collect_signature, AnnotationValue, Axiom, Entity, EntityKind, Iri, OntologyError, PrefixTable,
};

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all_fields = "camelCase")]
pub enum EditAction {
    CreateClass {
        name: String,
        parent: Iri,
    },
    CreateEntity {
        kind: EntityKind,
        name: String,
    },
    DeleteEntity {
        entity: Entity,
    },
    AddParent {
        cls: Iri,
        parent: Iri,
    },
    RemoveParent {
        cls: Iri,
        parent: Iri,
    },
    SetAnnotation {
        subject: Iri,
        property: Iri,
        #[serde(default)]
        old: Option<AnnotationValue>,
        new: AnnotationValue,
    },
    ApplyChanges {
        changes: Vec<ChangeOp>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        commit_message: Option<String>,
    },
}

impl EditAction {
    pub fn commit_message(&self) -> Option<&str> {
        match self {
            EditAction::ApplyChanges { commit_message, .. } => commit_message.as_deref(),
            _ => None,
        }
    }

    /// The entity the action is about, when there is exactly one.
    pub fn subject(&self, compiled: &[ChangeOp]) -> Option<Entity> {
        match self {
            EditAction::CreateClass { .. } | EditAction::CreateEntity { .. } => {
                compiled.iter().find_map(|op| match op.axiom() {
                    Axiom::Declaration(e) => Some(e.clone()),
                    _ => None,
                })
            }
            EditAction::DeleteEntity { entity } => Some(entity.clone()),
            EditAction::AddParent { cls, .. } | EditAction::RemoveParent { cls, .. } => {
                Some(Entity::class(cls.clone()))
            }
            EditAction::SetAnnotation { .. } | EditAction::ApplyChanges { .. } => None,
        }
    }
}

/// What `compile_edit` needs beyond the current state.
pub struct EditContext<'a> {
    /// Ontology that receives new axioms.
    pub ontology: &'a OntologyId,
    pub prefixes: &'a PrefixTable,
    /// Namespace for minted IRIs: `<base>#<fresh id>`.
    pub base_iri: &'a Iri,
    pub ids: &'a dyn IdSource,
}

/// Turns an action into the minimal list of effective changes.
pub fn compile_edit(action: &EditAction, state: &AxiomState, ctx: &EditContext<'_>) -> Result<Vec<ChangeOp>, ChangeError> {
    let entities = state.entities();
    let known = |e: &Entity| entities.contains(e);
    let known_class = |iri: &Iri| iri.as_str() == crate::ontology::OWL_THING || known(&Entity::class(iri.clone()));
    let ops = match action {
        EditAction::CreateClass { name, parent } => {
            if !known_class(parent) {
                return Err(ChangeError::UnknownEntity(format!("Class <{parent}>")));
            }
            let (iri, label) = name_to_iri(name, ctx)?;
            let mut ops = vec![
                ChangeOp::add(ctx.ontology, Axiom::Declaration(Entity::class(iri.clone()))),
                ChangeOp::add(ctx.ontology, Axiom::sub_class_of(iri.clone(), parent.clone())),
            ];
            if let Some(label) = label {
                ops.push(ChangeOp::add(ctx.ontology, Axiom::label(iri, label)));
            }
            ops
        }
        EditAction::CreateEntity { kind, name } => {
            let (iri, label) = name_to_iri(name, ctx)?;
            let mut ops = vec![ChangeOp::add(ctx.ontology, Axiom::Declaration(Entity::new(*kind, iri.clone())))];
            if let Some(label) = label {
                ops.push(ChangeOp::add(ctx.ontology, Axiom::label(iri, label)));
            }
            ops
        }
        EditAction::DeleteEntity { entity } => {
            if !known(entity) {
                return Err(ChangeError::UnknownEntity(format!("{} <{}>", entity.kind, entity.iri)));
            }
            let decls = state.declarations();
            let mut ops = Vec::new();
            for id in state.ontology_ids() {
                for ax in state.axioms_of(id).into_iter().flatten() {
                    let mut sig = std::collections::BTreeSet::new();
                    collect_signature(ax, &decls, &mut sig);
                    if sig.contains(entity) {
                        ops.push(ChangeOp::remove(id, ax.clone()));
                    }
                }
            }
            ops
        }
        EditAction::AddParent { cls, parent } | EditAction::RemoveParent { cls, parent } => {
            if !known(&Entity::class(cls.clone())) {
                return Err(ChangeError::UnknownEntity(format!("Class <{cls}>")));
            }
            if !known_class(parent) {
                return Err(ChangeError::UnknownEntity(format!("Class <{parent}>")));
            }
            let ax = Axiom::sub_class_of(cls.clone(), parent.clone());
            if matches!(action, EditAction::AddParent { .. }) {
                vec![ChangeOp::add(ctx.ontology, ax)]
            } else {
                state
                    .ontology_ids()
                    .filter(|id| state.contains(id, &ax))
                    .map(|id| ChangeOp::remove(id, ax.clone()))
                    .collect()
            }
        }
        EditAction::SetAnnotation { subject, property, old, new } => {
            if !entities.iter().any(|e| &e.iri == subject) {
                return Err(ChangeError::UnknownEntity(format!("<{subject}>")));
            }
            let assertion = |value: &AnnotationValue| Axiom::AnnotationAssertion {
                property: property.clone(),
                subject: subject.clone(),
                value: value.clone(),
            };
            let mut ops = Vec::new();
            if let Some(old) = old {
                let ax = assertion(old);
                ops.extend(state.ontology_ids().filter(|id| state.contains(id, &ax)).map(|id| ChangeOp::remove(id, ax.clone())));
            }
            ops.push(ChangeOp::add(ctx.ontology, assertion(new)));
            ops
        }
        EditAction::ApplyChanges { changes, .. } => changes.clone(),
    };
    let ops = effective_ops(state, ops)?;
    if ops.is_empty() {
        return Err(ChangeError::EmptyEdit);
    }
    Ok(ops)
}

/// A prefixed name maps to its expansion and gets no label; any other name gets
/// a minted IRI and becomes the label.
fn name_to_iri(name: &str, ctx: &EditContext<'_>) -> Result<(Iri, Option<String>), ChangeError> {
    let name = name.trim();
    if name.is_empty() {
        return Err(ChangeError::EmptyName);
    }
    match ctx.prefixes.expand(name) {
        Ok(iri) => Ok((iri, None)),
        Err(OntologyError::UnknownPrefix(p)) => Err(OntologyError::UnknownPrefix(p).into()),
        Err(_) => {
            let iri = Iri::new(format!("{}#{}", ctx.base_iri, ctx.ids.fresh()))?;
            Ok((iri, Some(name.to_owned())))
        }
    }
}

/// Human-readable revision label. `name_of` renders an IRI for display.
pub fn generate_label(action: &EditAction, compiled: &[ChangeOp], name_of: &dyn Fn(&Iri) -> String) -> String {
    match action {
        EditAction::CreateClass { name, .. } => format!("Created Class '{}'", name.trim()),
        EditAction::CreateEntity { kind, name } => format!("Created {kind} '{}'", name.trim()),
        EditAction::DeleteEntity { entity } => format!("Deleted {} '{}'", entity.kind, name_of(&entity.iri)),
        EditAction::SetAnnotation { subject, property, .. } => {
            format!("Edited {} on '{}'", name_of(property), name_of(subject))
        }
        EditAction::AddParent { cls, parent } => {
            format!("Added parent '{}' to '{}'", name_of(parent), name_of(cls))
        }
        EditAction::RemoveParent { cls, parent } => {
            format!("Removed parent '{}' from '{}'", name_of(parent), name_of(cls))
        }
        EditAction::ApplyChanges { .. } => changes_label(compiled.len()),
    }
}

pub(crate) fn changes_label(n: usize) -> String {
    if n == 1 {
        "Applied 1 change".to_owned()
    } else {
        format!("Applied {n} changes")
    }
}
