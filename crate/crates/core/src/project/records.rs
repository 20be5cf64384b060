use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::OntologyInfo;
use crate::access::Role;
use crate::changes::{Revision, RevisionLog};
use crate::collab::{Comment, CommentThread, ThreadStatus, ThreadStore, WebhookConfig};
use crate::criteria::{Tag, TagRule, TagStore};
use crate::ids::{ProjectId, TagId, ThreadId, Timestamp, UserId, WebhookId};
use crate::ontology::{Entity, Iri, PrefixTable};

/// One entry of a project's append-only log.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Record {
    Created {
        id: ProjectId,
        name: String,
        owner: UserId,
        timestamp: Timestamp,
        base_iri: Iri,
        ontologies: Vec<OntologyInfo>,
        prefixes: PrefixTable,
    },
    Revision {
        revision: Revision,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        subject: Option<Entity>,
        /// Replacement prefix table, when the revision came with new prefixes.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        prefixes: Option<PrefixTable>,
    },
    ThreadCreated {
        thread: CommentThread,
    },
    CommentAdded {
        thread: ThreadId,
        comment: Comment,
    },
    ThreadStatus {
        thread: ThreadId,
        status: ThreadStatus,
        actor: UserId,
        timestamp: Timestamp,
    },
    TagPut {
        tag: Tag,
    },
    TagDeleted {
        tag: TagId,
    },
    TagRules {
        rules: Vec<TagRule>,
    },
    EntityTags {
        entity: Entity,
        tags: BTreeSet<TagId>,
    },
    WebhookPut {
        webhook: WebhookConfig,
    },
    WebhookDeleted {
        webhook: WebhookId,
    },
    Role {
        user: UserId,
        role: Option<Role>,
    },
    Layout {
        user: UserId,
        document: String,
    },
    /// Full state; replaces everything before it.
    Snapshot {
        project: Box<ProjectSnapshot>,
    },
}

impl Record {
    pub fn name(&self) -> &'static str {
        match self {
            Record::Created { .. } => "created",
            Record::Revision { .. } => "revision",
            Record::ThreadCreated { .. } => "threadCreated",
            Record::CommentAdded { .. } => "commentAdded",
            Record::ThreadStatus { .. } => "threadStatus",
            Record::TagPut { .. } => "tagPut",
            Record::TagDeleted { .. } => "tagDeleted",
            Record::TagRules { .. } => "tagRules",
            Record::EntityTags { .. } => "entityTags",
            Record::WebhookPut { .. } => "webhookPut",
            Record::WebhookDeleted { .. } => "webhookDeleted",
            Record::Role { .. } => "role",
            Record::Layout { .. } => "layout",
            Record::Snapshot { .. } => "snapshot",
        }
    }
}

/// Everything persisted about a project; derived read models are rebuilt on load.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProjectSnapshot {
    pub id: ProjectId,
    pub name: String,
    pub owner: UserId,
    pub created: Timestamp,
    pub base_iri: Iri,
    pub prefixes: PrefixTable,
    pub ontologies: Vec<OntologyInfo>,
    pub log: RevisionLog,
    /// Revision number and the entity it was about.
    pub subjects: Vec<(u64, Entity)>,
    pub threads: ThreadStore,
    pub tags: TagStore,
    pub webhooks: Vec<WebhookConfig>,
    pub participants: BTreeMap<UserId, Role>,
    pub layouts: BTreeMap<UserId, String>,
}
