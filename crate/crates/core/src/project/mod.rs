//! Projects: participants, commands, persistence records and exports.

mod archive;
mod records;
pub mod storage;
pub mod urls;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::access::{allowed, Action, Role};
use crate::changes::{compile_edit, generate_label, AxiomState, ChangeError, ChangeOp, EditAction, EditContext, Revision, RevisionLog};
use crate::collab::{
    compose_comment, emit_notifications, thread_counts, BodyContext, CollabError, Comment, CommentThread, EventDetail, EventKind,
    NewComment, Notifications, NotifyContext, ProjectEvent, ThreadStatus, ThreadStore, WebhookConfig, WebhookKind,
};
use crate::criteria::{evaluate_tag_rules, search, CriteriaNode, EntityIndex, SearchHit, Tag, TagError, TagRule, TagStore};
use crate::graph::{build_graph, EntityGraph, GraphError};
use crate::ids::{CommentId, Env, OntologyId, ProjectId, TagId, ThreadId, Timestamp, UserId, WebhookId};
use crate::ontology::{parse_ontology, Entity, Iri, OntologyDocument, OntologyError, PrefixTable};

pub use archive::{archive_name, export_revision_archive};
pub use records::{ProjectSnapshot, Record};

/// Largest per-user layout document accepted, in bytes.
pub const MAX_LAYOUT_BYTES: usize = 64 * 1024;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProjectError {
    #[error("project name must not be empty")]
    EmptyName,
    #[error("permission denied")]
    PermissionDenied,
    #[error("the project owner's role cannot be changed")]
    CannotModifyOwner,
    #[error("unknown entity {} <{}>", .0.kind, .0.iri)]
    UnknownEntity(Entity),
    #[error("unknown webhook {0}")]
    UnknownWebhook(WebhookId),
    #[error("layout document is {0} bytes; the limit is {MAX_LAYOUT_BYTES}")]
    LayoutTooLarge(usize),
    #[error("layout document is not valid JSON: {0}")]
    InvalidLayout(String),
    #[error("corrupt project log at byte {offset}: {reason}")]
    CorruptLog { offset: u64, reason: String },
    #[error("io error: {0}")]
    Io(String),
    #[error(transparent)]
    Change(#[from] ChangeError),
    #[error(transparent)]
    Collab(#[from] CollabError),
    #[error(transparent)]
    Tag(#[from] TagError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
}

impl From<std::io::Error> for ProjectError {
    fn from(e: std::io::Error) -> Self {
        ProjectError::Io(e.to_string())
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct OntologyInfo {
    pub id: OntologyId,
    pub iri: Option<Iri>,
}

/// A state-changing request, validated into a [`Record`] by [`Project::prepare`].
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Command {
    Edit { action: EditAction },
    /// Adds every axiom of a functional-syntax document to the first ontology.
    Import { text: String },
    Revert { revision: u64 },
    CreateThread { entity: Entity, body: String },
    AddComment { thread: ThreadId, body: String },
    SetThreadStatus { thread: ThreadId, status: ThreadStatus },
    PutTag {
        #[serde(default)]
        id: Option<TagId>,
        label: String,
        #[serde(default)]
        description: String,
        color: String,
    },
    DeleteTag { tag: TagId },
    SetTagRules { rules: Vec<TagRule> },
    SetEntityTags { entity: Entity, tags: BTreeSet<TagId> },
    PutWebhook {
        #[serde(default)]
        id: Option<WebhookId>,
        kind: WebhookKind,
        url: String,
        enabled: bool,
    },
    DeleteWebhook { webhook: WebhookId },
    SetRole { user: UserId, role: Option<Role> },
    SetLayout { document: String },
}

/// One project and all of its derived read models.
#[derive(Clone, Debug)]
pub struct Project {
    id: ProjectId,
    name: String,
    owner: UserId,
    created: Timestamp,
    base_iri: Iri,
    prefixes: PrefixTable,
    ontologies: Vec<OntologyInfo>,
    log: RevisionLog,
    subjects: BTreeMap<u64, Entity>,
    threads: ThreadStore,
    tags: TagStore,
    webhooks: Vec<WebhookConfig>,
    participants: BTreeMap<UserId, Role>,
    layouts: BTreeMap<UserId, String>,
    index: Arc<EntityIndex>,
}

impl PartialEq for Project {
    fn eq(&self, other: &Self) -> bool {
        self.snapshot() == other.snapshot()
    }
}

pub fn default_base_iri(id: &ProjectId) -> Iri {
    Iri::new(format!("http://ontoforge.local/projects/{}", urls::encode_segment(id.as_str())))
        .expect("encoded project id forms a valid IRI")
}

/// Creates a project with one empty ontology and `owner` as Owner.
pub fn create_project(env: &Env, owner: &UserId, name: &str) -> Result<(Project, Record), ProjectError> {
    if name.trim().is_empty() {
        return Err(ProjectError::EmptyName);
    }
    let id = ProjectId::new(env.fresh());
    let base_iri = default_base_iri(&id);
    let record = Record::Created {
        id,
        name: name.trim().to_owned(),
        owner: owner.clone(),
        timestamp: env.now(),
        ontologies: vec![OntologyInfo { id: OntologyId::new(env.fresh()), iri: Some(base_iri.clone()) }],
        base_iri,
        prefixes: PrefixTable::new(),
    };
    let project = Project::from_record(&record)?;
    Ok((project, record))
}

impl Project {
    /// Builds a project from its first record, which must be `Created` or `Snapshot`.
    pub fn from_record(record: &Record) -> Result<Project, ProjectError> {
        let mut project = match record {
            Record::Created { id, name, owner, timestamp, base_iri, ontologies, prefixes } => Project {
                id: id.clone(),
                name: name.clone(),
                owner: owner.clone(),
                created: *timestamp,
                base_iri: base_iri.clone(),
                prefixes: prefixes.clone(),
                log: RevisionLog::new(ontologies.iter().map(|o| o.id.clone()).collect()),
                ontologies: ontologies.clone(),
                subjects: BTreeMap::new(),
                threads: ThreadStore::default(),
                tags: TagStore::default(),
                webhooks: Vec::new(),
                participants: BTreeMap::from([(owner.clone(), Role::Owner)]),
                layouts: BTreeMap::new(),
                index: Arc::default(),
            },
            Record::Snapshot { project } => Project::from_snapshot((**project).clone()),
            other => {
                return Err(ProjectError::CorruptLog {
                    offset: 0,
                    reason: format!("log starts with a {} record", other.name()),
                })
            }
        };
        project.refresh();
        Ok(project)
    }

    fn from_snapshot(s: ProjectSnapshot) -> Project {
        Project {
            id: s.id,
            name: s.name,
            owner: s.owner,
            created: s.created,
            base_iri: s.base_iri,
            prefixes: s.prefixes,
            ontologies: s.ontologies,
            log: s.log,
            subjects: s.subjects.into_iter().collect(),
            threads: s.threads,
            tags: s.tags,
            webhooks: s.webhooks,
            participants: s.participants,
            layouts: s.layouts,
            index: Arc::default(),
        }
    }

    pub fn snapshot(&self) -> ProjectSnapshot {
        ProjectSnapshot {
            id: self.id.clone(),
            name: self.name.clone(),
            owner: self.owner.clone(),
            created: self.created,
            base_iri: self.base_iri.clone(),
            prefixes: self.prefixes.clone(),
            ontologies: self.ontologies.clone(),
            log: self.log.clone(),
            subjects: self.subjects.iter().map(|(n, e)| (*n, e.clone())).collect(),
            threads: self.threads.clone(),
            tags: self.tags.clone(),
            webhooks: self.webhooks.clone(),
            participants: self.participants.clone(),
            layouts: self.layouts.clone(),
        }
    }

    pub fn id(&self) -> &ProjectId {
        &self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn owner(&self) -> &UserId {
        &self.owner
    }

    pub fn created(&self) -> Timestamp {
        self.created
    }

    pub fn base_iri(&self) -> &Iri {
        &self.base_iri
    }

    pub fn prefixes(&self) -> &PrefixTable {
        &self.prefixes
    }

    pub fn ontologies(&self) -> &[OntologyInfo] {
        &self.ontologies
    }

    pub fn log(&self) -> &RevisionLog {
        &self.log
    }

    pub fn head(&self) -> &AxiomState {
        self.log.head()
    }

    pub fn threads(&self) -> &ThreadStore {
        &self.threads
    }

    pub fn tags(&self) -> &TagStore {
        &self.tags
    }

    pub fn webhooks(&self) -> &[WebhookConfig] {
        &self.webhooks
    }

    pub fn participants(&self) -> &BTreeMap<UserId, Role> {
        &self.participants
    }

    pub fn role_of(&self, user: &UserId) -> Option<Role> {
        self.participants.get(user).copied()
    }

    pub fn layout(&self, user: &UserId) -> Option<&str> {
        self.layouts.get(user).map(String::as_str)
    }

    pub fn index(&self) -> &Arc<EntityIndex> {
        &self.index
    }

    pub fn entities(&self) -> &BTreeSet<Entity> {
        self.index.entities()
    }

    pub fn display_name(&self, iri: &Iri) -> String {
        self.index.display_name(iri)
    }

    /// The entity a revision was about, when the edit named one.
    pub fn revision_subject(&self, number: u64) -> Option<&Entity> {
        self.subjects.get(&number)
    }

    pub fn require(&self, user: &UserId, action: Action) -> Result<Role, ProjectError> {
        match self.role_of(user) {
            Some(role) if allowed(Some(role), action) => Ok(role),
            _ => Err(ProjectError::PermissionDenied),
        }
    }

    fn require_entity(&self, entity: &Entity) -> Result<(), ProjectError> {
        if self.index.contains(entity) {
            Ok(())
        } else {
            Err(ProjectError::UnknownEntity(entity.clone()))
        }
    }

    fn body_context<'a>(&'a self, entities: &'a BTreeSet<Entity>) -> BodyContext<'a> {
        BodyContext { project: &self.id, prefixes: &self.prefixes, entities }
    }

    /// Rebuilds the entity index, rule-derived tags and comment-derived fields.
    fn refresh(&mut self) {
        self.index = Arc::new(EntityIndex::new(self.log.head(), &self.prefixes));
        self.refresh_tags();
        let index = self.index.clone();
        let ctx = BodyContext { project: &self.id, prefixes: &self.prefixes, entities: index.entities() };
        self.threads.refresh_derived(&ctx);
    }

    fn refresh_tags(&mut self) {
        let derived = evaluate_tag_rules(&self.tags, &self.index);
        self.tags.set_derived(derived);
    }

    /// Validates `command` and returns the record that carries it out, or
    /// `None` when it would change nothing.
    pub fn prepare(&self, env: &Env, actor: &UserId, command: Command) -> Result<Option<Record>, ProjectError> {
        let now = env.now();
        let record = match command {
            Command::Edit { action } => {
                self.require(actor, Action::Edit)?;
                let ontology = &self.ontologies[0].id;
                let ctx = EditContext { ontology, prefixes: &self.prefixes, base_iri: &self.base_iri, ids: &*env.ids };
                let changes = compile_edit(&action, self.head(), &ctx)?;
                let label = generate_label(&action, &changes, &|iri| self.display_name(iri));
                let subject = action.subject(&changes);
                let revision = Revision {
                    number: self.log.head_number() + 1,
                    author: actor.clone(),
                    timestamp: now,
                    label,
                    commit_message: action.commit_message().map(str::to_owned),
                    changes,
                };
                Record::Revision { revision, subject, prefixes: None }
            }
            Command::Import { text } => {
                self.require(actor, Action::Edit)?;
                let doc = parse_ontology(&text)?;
                let mut prefixes = self.prefixes.clone();
                for (name, ns) in doc.prefixes.iter() {
                    if prefixes.get(name).is_none() {
                        prefixes.insert(name, ns.clone())?;
                    }
                }
                let target = &self.ontologies[0].id;
                let ops = doc.axioms().map(|ax| ChangeOp::add(target, ax.clone()));
                let changes = crate::changes::effective_ops(self.head(), ops)?;
                if changes.is_empty() {
                    return Err(ChangeError::EmptyEdit.into());
                }
                let action = EditAction::ApplyChanges { changes, commit_message: None };
                let EditAction::ApplyChanges { changes, .. } = &action else { unreachable!() };
                let revision = Revision {
                    number: self.log.head_number() + 1,
                    author: actor.clone(),
                    timestamp: now,
                    label: generate_label(&action, changes, &|iri| self.display_name(iri)),
                    commit_message: None,
                    changes: changes.clone(),
                };
                let prefixes = (prefixes != self.prefixes).then_some(prefixes);
                Record::Revision { revision, subject: None, prefixes }
            }
            Command::Revert { revision } => {
                self.require(actor, Action::Edit)?;
                let changes = self.log.revert_ops(revision)?;
                let subject = self.subjects.get(&revision).cloned();
                let revision = Revision {
                    number: self.log.head_number() + 1,
                    author: actor.clone(),
                    timestamp: now,
                    label: format!("Reverted revision {revision}"),
                    commit_message: None,
                    changes,
                };
                Record::Revision { revision, subject, prefixes: None }
            }
            Command::CreateThread { entity, body } => {
                let role = self.require(actor, Action::Comment)?;
                self.require_entity(&entity)?;
                let comment = self.new_comment(env, actor, role, now, &body)?;
                Record::ThreadCreated {
                    thread: CommentThread {
                        id: ThreadId::new(env.fresh()),
                        entity,
                        status: ThreadStatus::Open,
                        comments: vec![comment],
                    },
                }
            }
            Command::AddComment { thread, body } => {
                let existing = self.threads.get(&thread).ok_or_else(|| CollabError::UnknownThread(thread.clone()))?;
                let role = self.require(actor, Action::Comment)?;
                let mut comment = self.new_comment(env, actor, role, now, &body)?;
                comment.timestamp = comment.timestamp.max(existing.comments[0].timestamp);
                Record::CommentAdded { thread, comment }
            }
            Command::SetThreadStatus { thread, status } => {
                let existing = self.threads.get(&thread).ok_or_else(|| CollabError::UnknownThread(thread.clone()))?;
                self.require(actor, Action::Comment)?;
                if existing.status == status {
                    return Ok(None);
                }
                Record::ThreadStatus { thread, status, actor: actor.clone(), timestamp: now }
            }
            Command::PutTag { id, label, description, color } => {
                self.require(actor, Action::Edit)?;
                let tag = Tag { id: id.unwrap_or_else(|| TagId::new(env.fresh())), label, description, color };
                self.tags.validate_tag(&tag)?;
                Record::TagPut { tag }
            }
            Command::DeleteTag { tag } => {
                self.require(actor, Action::Edit)?;
                if self.tags.tag(&tag).is_none() {
                    return Err(TagError::UnknownTag(tag).into());
                }
                Record::TagDeleted { tag }
            }
            Command::SetTagRules { rules } => {
                self.require(actor, Action::Edit)?;
                rules.iter().try_for_each(|r| self.tags.check_rule(r))?;
                Record::TagRules { rules }
            }
            Command::SetEntityTags { entity, tags } => {
                let role = self.require(actor, Action::Edit)?;
                self.tags.check_assignment(&tags, Some(role))?;
                self.require_entity(&entity)?;
                Record::EntityTags { entity, tags }
            }
            Command::PutWebhook { id, kind, url, enabled } => {
                self.require(actor, Action::Admin)?;
                let id = id.unwrap_or_else(|| WebhookId::new(env.fresh()));
                Record::WebhookPut { webhook: WebhookConfig::new(id, kind, &url, enabled)? }
            }
            Command::DeleteWebhook { webhook } => {
                self.require(actor, Action::Admin)?;
                if !self.webhooks.iter().any(|w| w.id == webhook) {
                    return Err(ProjectError::UnknownWebhook(webhook));
                }
                Record::WebhookDeleted { webhook }
            }
            Command::SetRole { user, role } => {
                self.require(actor, Action::Admin)?;
                if user == self.owner {
                    return Err(ProjectError::CannotModifyOwner);
                }
                if role == Some(Role::Owner) {
                    // a project has exactly one owner
                    return Err(ProjectError::CannotModifyOwner);
                }
                Record::Role { user, role }
            }
            Command::SetLayout { document } => {
                self.require(actor, Action::Read)?;
                if document.len() > MAX_LAYOUT_BYTES {
                    return Err(ProjectError::LayoutTooLarge(document.len()));
                }
                serde_json::from_str::<serde_json::Value>(&document)
                    .map_err(|e| ProjectError::InvalidLayout(e.to_string()))?;
                Record::Layout { user: actor.clone(), document }
            }
        };
        Ok(Some(record))
    }

    fn new_comment(&self, env: &Env, actor: &UserId, role: Role, now: Timestamp, body: &str) -> Result<Comment, ProjectError> {
        let new = NewComment { id: CommentId::new(env.fresh()), author: actor, role: Some(role), timestamp: now, body };
        Ok(compose_comment(new, &self.body_context(self.index.entities()))?)
    }

    /// Applies a record produced by [`Project::prepare`] or read back from storage.
    pub fn apply(&mut self, record: &Record) -> Result<Option<ProjectEvent>, ProjectError> {
        let event = match record {
            Record::Created { .. } | Record::Snapshot { .. } => {
                *self = Project::from_record(record)?;
                None
            }
            Record::Revision { revision, subject, prefixes } => {
                let revision = self.log.push_revision(revision.clone())?;
                if let Some(prefixes) = prefixes {
                    self.prefixes = prefixes.clone();
                }
                if let Some(subject) = subject {
                    self.subjects.insert(revision.number, subject.clone());
                }
                self.refresh();
                Some(self.revision_event(&revision))
            }
            Record::ThreadCreated { thread } => {
                let mut thread = thread.clone();
                let ctx = self.body_context(self.index.entities());
                thread.comments.iter_mut().for_each(|c| c.derive(&ctx));
                let first = thread.comments.first().cloned();
                let first = first.ok_or_else(|| CollabError::UnknownThread(thread.id.clone()))?;
                let event = self.comment_event(thread.id.clone(), thread.entity.clone(), &first);
                self.threads.restore_thread(thread);
                Some(event)
            }
            Record::CommentAdded { thread, comment } => {
                let entity = self.threads.get(thread).ok_or_else(|| CollabError::UnknownThread(thread.clone()))?.entity.clone();
                let mut comment = comment.clone();
                comment.derive(&self.body_context(self.index.entities()));
                self.threads.restore_comment(thread, comment.clone())?;
                Some(self.comment_event(thread.clone(), entity, &comment))
            }
            Record::ThreadStatus { thread, status, actor, timestamp } => {
                self.threads.restore_status(thread, *status)?;
                let entity = self.threads.get(thread).map(|t| t.entity.clone());
                Some(ProjectEvent {
                    project: self.id.clone(),
                    kind: EventKind::ThreadStatusChanged,
                    actor: actor.clone(),
                    timestamp: *timestamp,
                    entity,
                    revision_number: None,
                    detail: EventDetail::Status { thread: thread.clone(), status: *status },
                })
            }
            Record::TagPut { tag } => {
                self.tags.put_tag(tag.clone())?;
                None
            }
            Record::TagDeleted { tag } => {
                self.tags.delete_tag(tag)?;
                self.refresh_tags();
                None
            }
            Record::TagRules { rules } => {
                self.tags.set_rules(rules.clone())?;
                self.refresh_tags();
                None
            }
            Record::EntityTags { entity, tags } => {
                self.tags.set_entity_tags(entity, tags.clone(), Some(Role::Owner))?;
                self.refresh_tags();
                None
            }
            Record::WebhookPut { webhook } => {
                match self.webhooks.iter_mut().find(|w| w.id == webhook.id) {
                    Some(existing) => *existing = webhook.clone(),
                    None => self.webhooks.push(webhook.clone()),
                }
                None
            }
            Record::WebhookDeleted { webhook } => {
                self.webhooks.retain(|w| &w.id != webhook);
                None
            }
            Record::Role { user, role } => {
                if *user == self.owner {
                    return Err(ProjectError::CannotModifyOwner);
                }
                match role {
                    Some(role) => self.participants.insert(user.clone(), *role),
                    None => self.participants.remove(user),
                };
                None
            }
            Record::Layout { user, document } => {
                self.layouts.insert(user.clone(), document.clone());
                None
            }
        };
        Ok(event)
    }

    /// `prepare` followed by `apply`.
    pub fn execute(
        &mut self,
        env: &Env,
        actor: &UserId,
        command: Command,
    ) -> Result<Option<(Record, Option<ProjectEvent>)>, ProjectError> {
        let Some(record) = self.prepare(env, actor, command)? else {
            return Ok(None);
        };
        let event = self.apply(&record)?;
        Ok(Some((record, event)))
    }

    pub fn revision_event(&self, revision: &Revision) -> ProjectEvent {
        ProjectEvent {
            project: self.id.clone(),
            kind: EventKind::RevisionAppended,
            actor: revision.author.clone(),
            timestamp: revision.timestamp,
            entity: self.subjects.get(&revision.number).cloned(),
            revision_number: Some(revision.number),
            detail: EventDetail::Revision { label: revision.label.clone() },
        }
    }

    fn comment_event(&self, thread: ThreadId, entity: Entity, comment: &Comment) -> ProjectEvent {
        ProjectEvent {
            project: self.id.clone(),
            kind: EventKind::CommentPosted,
            actor: comment.author.clone(),
            timestamp: comment.timestamp,
            entity: Some(entity),
            revision_number: None,
            detail: EventDetail::Comment { thread, comment: comment.id.clone(), body: comment.body.clone() },
        }
    }

    /// Outbox messages and webhook deliveries for `event`.
    pub fn notifications(&self, event: &ProjectEvent, base_url: &str) -> Notifications {
        let name = |e: &Entity| self.display_name(&e.iri);
        let ctx = NotifyContext {
            project_name: &self.name,
            participants: &self.participants,
            webhooks: &self.webhooks,
            base_url,
            display_name: &name,
        };
        emit_notifications(event, &ctx)
    }

    pub fn thread_counts(&self) -> BTreeMap<Entity, usize> {
        thread_counts(&self.threads)
    }

    /// Threads, newest activity first, optionally for one entity.
    pub fn threads_for(&self, entity: Option<&Entity>) -> Vec<&CommentThread> {
        let mut threads = self.threads.by_latest_activity();
        if let Some(e) = entity {
            threads.retain(|t| &t.entity == e);
        }
        threads
    }

    pub fn search(&self, criteria: &CriteriaNode, limit: usize, offset: usize) -> Vec<SearchHit> {
        search(&self.index, &self.tags.displayed(), criteria, limit, offset)
    }

    pub fn graph(&self, root: &Entity, depth: usize) -> Result<EntityGraph, ProjectError> {
        Ok(build_graph(self.head(), &self.index, root, depth)?)
    }

    /// Documents for every ontology as of revision `number`.
    pub fn documents_at(&self, number: u64) -> Result<Vec<(OntologyId, OntologyDocument)>, ProjectError> {
        let state = self.log.state_at(number)?;
        Ok(self
            .ontologies
            .iter()
            .map(|info| {
                let axioms = state.axioms_of(&info.id).into_iter().flatten().cloned();
                (info.id.clone(), OntologyDocument::with_axioms(info.iri.clone(), self.prefixes.clone(), axioms))
            })
            .collect())
    }
}
