//! Append-only revision log over per-ontology axiom sets.
//!
//! Every stored change was effective when applied: an added axiom was absent,
//! a removed axiom was present. Replaying the log from empty never hits a no-op.

mod edit;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};

use crate::ids::{OntologyId, Timestamp, UserId};
use crate::ontology::{collect_signature, Axiom, Declarations, Entity, OntologyError};

pub use edit::{compile_edit, generate_label, EditAction, EditContext};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChangeError {
    #[error("edit has no effect")]
    EmptyEdit,
    #[error("revision has no changes")]
    EmptyRevision,
    #[error("unknown entity {0}")]
    UnknownEntity(String),
    #[error("unknown ontology {0}")]
    UnknownOntology(OntologyId),
    #[error("change has no effect: {0:?}")]
    IneffectiveChange(ChangeOp),
    #[error("unknown revision {0}")]
    UnknownRevision(u64),
    #[error("nothing to revert in revision {0}")]
    NothingToRevert(u64),
    #[error("name must not be empty")]
    EmptyName,
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error("inconsistent revision history: {0}")]
    CorruptHistory(String),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "camelCase")]
pub enum ChangeOp {
    Add { ontology: OntologyId, axiom: Axiom },
    Remove { ontology: OntologyId, axiom: Axiom },
}

impl ChangeOp {
    pub fn add(ontology: &OntologyId, axiom: Axiom) -> Self {
        ChangeOp::Add { ontology: ontology.clone(), axiom }
    }

    pub fn remove(ontology: &OntologyId, axiom: Axiom) -> Self {
        ChangeOp::Remove { ontology: ontology.clone(), axiom }
    }

    pub fn axiom(&self) -> &Axiom {
        match self {
            ChangeOp::Add { axiom, .. } | ChangeOp::Remove { axiom, .. } => axiom,
        }
    }

    pub fn ontology(&self) -> &OntologyId {
        match self {
            ChangeOp::Add { ontology, .. } | ChangeOp::Remove { ontology, .. } => ontology,
        }
    }

    pub fn inverse(&self) -> ChangeOp {
        match self.clone() {
            ChangeOp::Add { ontology, axiom } => ChangeOp::Remove { ontology, axiom },
            ChangeOp::Remove { ontology, axiom } => ChangeOp::Add { ontology, axiom },
        }
    }
}

/// Axiom sets keyed by ontology. Equality is set equality per ontology.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct AxiomState {
    ontologies: BTreeMap<OntologyId, IndexSet<Axiom>>,
}

impl AxiomState {
    pub fn empty(ontologies: &[OntologyId]) -> Self {
        AxiomState { ontologies: ontologies.iter().map(|id| (id.clone(), IndexSet::new())).collect() }
    }

    pub fn ontology_ids(&self) -> impl Iterator<Item = &OntologyId> {
        self.ontologies.keys()
    }

    pub fn axioms_of(&self, ontology: &OntologyId) -> Option<&IndexSet<Axiom>> {
        self.ontologies.get(ontology)
    }

    /// Axioms of every ontology, ontology by ontology in stored order.
    pub fn all_axioms(&self) -> impl Iterator<Item = &Axiom> + Clone {
        self.ontologies.values().flatten()
    }

    pub fn axiom_count(&self) -> usize {
        self.ontologies.values().map(IndexSet::len).sum()
    }

    pub fn contains(&self, ontology: &OntologyId, axiom: &Axiom) -> bool {
        self.ontologies.get(ontology).is_some_and(|set| set.contains(axiom))
    }

    pub fn is_effective(&self, op: &ChangeOp) -> Result<bool, ChangeError> {
        let set = self
            .ontologies
            .get(op.ontology())
            .ok_or_else(|| ChangeError::UnknownOntology(op.ontology().clone()))?;
        Ok(match op {
            ChangeOp::Add { axiom, .. } => !set.contains(axiom),
            ChangeOp::Remove { axiom, .. } => set.contains(axiom),
        })
    }

    /// Applies `op`, returning whether it changed anything.
    pub fn apply(&mut self, op: &ChangeOp) -> Result<bool, ChangeError> {
        let set = self
            .ontologies
            .get_mut(op.ontology())
            .ok_or_else(|| ChangeError::UnknownOntology(op.ontology().clone()))?;
        Ok(match op {
            ChangeOp::Add { axiom, .. } => set.insert(axiom.clone()),
            ChangeOp::Remove { axiom, .. } => set.shift_remove(axiom),
        })
    }

    pub fn declarations(&self) -> Declarations {
        Declarations::from_axioms(self.all_axioms())
    }

    /// Project entities: the signature of all axioms, minus reserved W3C vocabulary
    /// terms that are not explicitly declared.
    pub fn entities(&self) -> BTreeSet<Entity> {
        let decls = self.declarations();
        let mut out = BTreeSet::new();
        for ax in self.all_axioms() {
            collect_signature(ax, &decls, &mut out);
        }
        out.retain(|e| !e.iri.is_reserved_vocabulary() || decls.kinds_of(&e.iri).is_some_and(|k| k.contains(&e.kind)));
        out
    }

    pub fn into_map(self) -> BTreeMap<OntologyId, IndexSet<Axiom>> {
        self.ontologies
    }
}

/// Checks `ops` in sequence against `state` without mutating it and keeps the
/// effective ones (an op may become effective because of an earlier op in the batch).
pub fn effective_ops(state: &AxiomState, ops: impl IntoIterator<Item = ChangeOp>) -> Result<Vec<ChangeOp>, ChangeError> {
    let mut overlay: HashMap<(OntologyId, Axiom), bool> = HashMap::new();
    let mut kept = Vec::new();
    for op in ops {
        let key = (op.ontology().clone(), op.axiom().clone());
        let present = match overlay.get(&key) {
            Some(p) => *p,
            None => {
                // is_effective for Add is "absent"
                !state.is_effective(&ChangeOp::add(op.ontology(), op.axiom().clone()))?
            }
        };
        let wants_present = matches!(op, ChangeOp::Add { .. });
        if present != wants_present {
            overlay.insert(key, wants_present);
            kept.push(op);
        }
    }
    Ok(kept)
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Revision {
    pub number: u64,
    pub author: UserId,
    pub timestamp: Timestamp,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commit_message: Option<String>,
    pub changes: Vec<ChangeOp>,
}

#[derive(Clone, Debug)]
pub struct RevisionMeta {
    pub author: UserId,
    pub timestamp: Timestamp,
    pub label: String,
    pub commit_message: Option<String>,
}

/// Ordered revisions plus the head state they replay to.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RevisionLogJson", into = "RevisionLogJson")]
pub struct RevisionLog {
    ontologies: Vec<OntologyId>,
    revisions: Vec<Arc<Revision>>,
    head: AxiomState,
    /// Every declaration any revision ever added; history filtering resolves
    /// annotation subjects against this so it does not depend on later deletions.
    seen_declarations: Declarations,
}

impl PartialEq for RevisionLog {
    fn eq(&self, other: &Self) -> bool {
        self.ontologies == other.ontologies && self.revisions == other.revisions
    }
}

impl RevisionLog {
    pub fn new(ontologies: Vec<OntologyId>) -> Self {
        let head = AxiomState::empty(&ontologies);
        RevisionLog { ontologies, revisions: Vec::new(), head, seen_declarations: Declarations::default() }
    }

    pub fn ontologies(&self) -> &[OntologyId] {
        &self.ontologies
    }

    pub fn head(&self) -> &AxiomState {
        &self.head
    }

    pub fn head_number(&self) -> u64 {
        self.revisions.len() as u64
    }

    pub fn revisions(&self) -> &[Arc<Revision>] {
        &self.revisions
    }

    pub fn revision(&self, number: u64) -> Result<&Arc<Revision>, ChangeError> {
        number
            .checked_sub(1)
            .and_then(|i| self.revisions.get(i as usize))
            .ok_or(ChangeError::UnknownRevision(number))
    }

    /// Appends a revision. Every change must be effective against the head in
    /// sequence; on error the log is unchanged.
    pub fn append(&mut self, changes: Vec<ChangeOp>, meta: RevisionMeta) -> Result<Arc<Revision>, ChangeError> {
        if changes.is_empty() {
            return Err(ChangeError::EmptyRevision);
        }
        let effective = effective_ops(&self.head, changes.iter().cloned())?;
        if effective.len() != changes.len() {
            let bad = changes
                .iter()
                .zip(effective.iter().map(Some).chain(std::iter::repeat(None)))
                .find(|(c, e)| Some(*c) != *e)
                .map(|(c, _)| c.clone())
                .expect("length mismatch implies a dropped op");
            return Err(ChangeError::IneffectiveChange(bad));
        }
        let revision = Arc::new(Revision {
            number: self.head_number() + 1,
            author: meta.author,
            timestamp: meta.timestamp,
            label: meta.label,
            commit_message: meta.commit_message,
            changes,
        });
        self.push_trusted(revision.clone())?;
        Ok(revision)
    }

    fn push_trusted(&mut self, revision: Arc<Revision>) -> Result<(), ChangeError> {
        for op in &revision.changes {
            if !self.head.apply(op)? {
                return Err(ChangeError::CorruptHistory(format!(
                    "revision {} contains ineffective change {op:?}",
                    revision.number
                )));
            }
            if let ChangeOp::Add { axiom, .. } = op {
                self.seen_declarations.observe(axiom);
            }
        }
        self.revisions.push(revision);
        Ok(())
    }

    /// Ops that would undo revision `number`, in reverse order, restricted to
    /// those still effective against the head.
    pub fn revert_ops(&self, number: u64) -> Result<Vec<ChangeOp>, ChangeError> {
        let revision = self.revision(number)?;
        let ops = effective_ops(&self.head, revision.changes.iter().rev().map(ChangeOp::inverse))?;
        if ops.is_empty() {
            return Err(ChangeError::NothingToRevert(number));
        }
        Ok(ops)
    }

    /// Appends the effective inverse of revision `number` as a new revision.
    pub fn revert(&mut self, number: u64, author: UserId, timestamp: Timestamp) -> Result<Arc<Revision>, ChangeError> {
        let ops = self.revert_ops(number)?;
        self.append(
            ops,
            RevisionMeta { author, timestamp, label: format!("Reverted revision {number}"), commit_message: None },
        )
    }

    /// State after revisions `1..=number`; `0` is the empty state.
    pub fn state_at(&self, number: u64) -> Result<AxiomState, ChangeError> {
        if number > self.head_number() {
            return Err(ChangeError::UnknownRevision(number));
        }
        if number == self.head_number() {
            return Ok(self.head.clone());
        }
        let mut state = AxiomState::empty(&self.ontologies);
        for revision in &self.revisions[..number as usize] {
            for op in &revision.changes {
                state.apply(op)?;
            }
        }
        Ok(state)
    }

    /// Revisions, ascending, with at least one change whose axiom mentions `entity`.
    pub fn entity_history(&self, entity: &Entity) -> Vec<Arc<Revision>> {
        self.revisions
            .iter()
            .filter(|rev| {
                rev.changes.iter().any(|op| {
                    let mut sig = BTreeSet::new();
                    collect_signature(op.axiom(), &self.seen_declarations, &mut sig);
                    sig.contains(entity)
                })
            })
            .cloned()
            .collect()
    }

    pub fn seen_declarations(&self) -> &Declarations {
        &self.seen_declarations
    }
}

#[derive(Serialize, Deserialize)]
struct RevisionLogJson {
    ontologies: Vec<OntologyId>,
    revisions: Vec<Revision>,
}

impl TryFrom<RevisionLogJson> for RevisionLog {
    type Error = ChangeError;

    fn try_from(value: RevisionLogJson) -> Result<Self, Self::Error> {
        let mut log = RevisionLog::new(value.ontologies);
        for (i, revision) in value.revisions.into_iter().enumerate() {
            if revision.number != i as u64 + 1 {
                return Err(ChangeError::CorruptHistory(format!(
                    "expected revision {}, found {}",
                    i + 1,
                    revision.number
                )));
            }
            log.push_revision(revision)?;
        }
        Ok(log)
    }
}

impl From<RevisionLog> for RevisionLogJson {
    fn from(log: RevisionLog) -> Self {
        RevisionLogJson {
            ontologies: log.ontologies,
            revisions: log.revisions.iter().map(|r| (**r).clone()).collect(),
        }
    }
}

impl RevisionLog {
    /// Appends an already-numbered revision, e.g. one read back from storage.
    pub fn push_revision(&mut self, revision: Revision) -> Result<Arc<Revision>, ChangeError> {
        if revision.number != self.head_number() + 1 {
            return Err(ChangeError::CorruptHistory(format!(
                "expected revision {}, found {}",
                self.head_number() + 1,
                revision.number
            )));
        }
        if revision.changes.is_empty() {
            return Err(ChangeError::CorruptHistory(format!("revision {} is empty", revision.number)));
        }
        let revision = Arc::new(revision);
        let snapshot = (self.head.clone(), self.seen_declarations.clone());
        if let Err(e) = self.push_trusted(revision.clone()) {
            (self.head, self.seen_declarations) = snapshot;
            return Err(e);
        }
        Ok(revision)
    }
}
