//! Entity-anchored comment threads and notification fan-out.

mod markdown;

use std::collections::BTreeMap;
use std::time::Duration;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::access::{allowed, Action, Role};
use crate::ids::{CommentId, ProjectId, ThreadId, Timestamp, UserId, WebhookId};
use crate::ontology::{Entity, Iri};
use crate::project::urls::{entity_url, tab_url, Tab};

pub use markdown::{escape, parse_comment_body, BodyContext, ParsedBody};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CollabError {
    #[error("permission denied")]
    PermissionDenied,
    #[error("comment body is empty")]
    EmptyBody,
    #[error("unknown thread {0}")]
    UnknownThread(ThreadId),
    #[error("unknown entity <{0}>")]
    UnknownEntity(Iri),
    #[error("webhook URL must be http or https: {0}")]
    InvalidWebhookUrl(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum ThreadStatus {
    Open,
    Closed,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Comment {
    pub id: CommentId,
    pub author: UserId,
    pub timestamp: Timestamp,
    pub body: String,
    /// Derived from `body`.
    #[serde(default)]
    pub mentions: Vec<UserId>,
    /// Derived from `body`.
    #[serde(default)]
    pub entity_links: Vec<Entity>,
    /// Derived from `body`.
    #[serde(default)]
    pub html: String,
}

impl Comment {
    /// Recomputes the fields derived from `body`.
    pub fn derive(&mut self, ctx: &BodyContext<'_>) {
        let parsed = parse_comment_body(&self.body, ctx);
        self.mentions = parsed.mentions;
        self.entity_links = parsed.entity_links;
        self.html = parsed.html;
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CommentThread {
    pub id: ThreadId,
    pub entity: Entity,
    pub status: ThreadStatus,
    pub comments: Vec<Comment>,
}

impl CommentThread {
    pub fn last_activity(&self) -> Timestamp {
        self.comments.last().map_or(0, |c| c.timestamp)
    }

    pub fn contributors(&self) -> impl Iterator<Item = &UserId> {
        self.comments.iter().map(|c| &c.author)
    }
}

/// A comment about to be stored: ids and timestamp chosen by the caller.
pub struct NewComment<'a> {
    pub id: CommentId,
    pub author: &'a UserId,
    pub role: Option<Role>,
    pub timestamp: Timestamp,
    pub body: &'a str,
}

fn check_comment(new: &NewComment<'_>) -> Result<(), CollabError> {
    if !allowed(new.role, Action::Comment) {
        return Err(CollabError::PermissionDenied);
    }
    if new.body.trim().is_empty() {
        return Err(CollabError::EmptyBody);
    }
    Ok(())
}

/// Checks permission and body, then builds the comment with derived fields.
pub fn compose_comment(new: NewComment<'_>, ctx: &BodyContext<'_>) -> Result<Comment, CollabError> {
    check_comment(&new)?;
    Ok(build_comment(new, ctx))
}

fn build_comment(new: NewComment<'_>, ctx: &BodyContext<'_>) -> Comment {
    let mut comment = Comment {
        id: new.id,
        author: new.author.clone(),
        timestamp: new.timestamp,
        body: new.body.to_owned(),
        mentions: Vec::new(),
        entity_links: Vec::new(),
        html: String::new(),
    };
    comment.derive(ctx);
    comment
}

/// All threads of a project, in creation order.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct ThreadStore {
    threads: IndexMap<ThreadId, CommentThread>,
}

impl ThreadStore {
    pub fn get(&self, id: &ThreadId) -> Option<&CommentThread> {
        self.threads.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &CommentThread> {
        self.threads.values()
    }

    pub fn len(&self) -> usize {
        self.threads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.threads.is_empty()
    }

    /// Starts an Open thread on `entity`. The caller checks that the entity exists.
    pub fn create_thread(
        &mut self,
        id: ThreadId,
        entity: Entity,
        first: NewComment<'_>,
        ctx: &BodyContext<'_>,
    ) -> Result<&CommentThread, CollabError> {
        check_comment(&first)?;
        let thread =
            CommentThread { id: id.clone(), entity, status: ThreadStatus::Open, comments: vec![build_comment(first, ctx)] };
        self.threads.insert(id.clone(), thread);
        Ok(&self.threads[&id])
    }

    /// Appends a reply. Closed threads accept replies and stay closed.
    pub fn add_comment(&mut self, thread: &ThreadId, new: NewComment<'_>, ctx: &BodyContext<'_>) -> Result<&Comment, CollabError> {
        let t = self.threads.get_mut(thread).ok_or_else(|| CollabError::UnknownThread(thread.clone()))?;
        check_comment(&new)?;
        // keep the first comment the earliest even if the clock runs backwards
        let floor = t.comments.first().map_or(new.timestamp, |c| c.timestamp);
        let mut comment = build_comment(new, ctx);
        comment.timestamp = comment.timestamp.max(floor);
        t.comments.push(comment);
        Ok(t.comments.last().expect("just pushed"))
    }

    /// Returns whether the status changed.
    pub fn set_status(
        &mut self,
        thread: &ThreadId,
        status: ThreadStatus,
        role: Option<Role>,
    ) -> Result<bool, CollabError> {
        let t = self.threads.get_mut(thread).ok_or_else(|| CollabError::UnknownThread(thread.clone()))?;
        if !allowed(role, Action::Comment) {
            return Err(CollabError::PermissionDenied);
        }
        let changed = t.status != status;
        t.status = status;
        Ok(changed)
    }

    /// Stores a thread read back from persistence.
    pub fn restore_thread(&mut self, thread: CommentThread) {
        self.threads.insert(thread.id.clone(), thread);
    }

    pub fn restore_comment(&mut self, thread: &ThreadId, comment: Comment) -> Result<(), CollabError> {
        let t = self.threads.get_mut(thread).ok_or_else(|| CollabError::UnknownThread(thread.clone()))?;
        t.comments.push(comment);
        Ok(())
    }

    pub fn restore_status(&mut self, thread: &ThreadId, status: ThreadStatus) -> Result<(), CollabError> {
        let t = self.threads.get_mut(thread).ok_or_else(|| CollabError::UnknownThread(thread.clone()))?;
        t.status = status;
        Ok(())
    }

    /// Recomputes derived comment fields against the current project.
    pub fn refresh_derived(&mut self, ctx: &BodyContext<'_>) {
        for thread in self.threads.values_mut() {
            for comment in &mut thread.comments {
                comment.derive(ctx);
            }
        }
    }

    /// Threads sorted by latest activity, newest first.
    pub fn by_latest_activity(&self) -> Vec<&CommentThread> {
        let mut threads: Vec<_> = self.threads.values().collect();
        threads.sort_by(|a, b| b.last_activity().cmp(&a.last_activity()).then_with(|| a.id.cmp(&b.id)));
        threads
    }
}

/// Open threads per anchor entity; entities without open threads are omitted.
pub fn thread_counts(store: &ThreadStore) -> BTreeMap<Entity, usize> {
    let mut counts = BTreeMap::new();
    for thread in store.iter().filter(|t| t.status == ThreadStatus::Open) {
        *counts.entry(thread.entity.clone()).or_insert(0) += 1;
    }
    counts
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum WebhookKind {
    ProjectEvent,
    SlackIncoming,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WebhookConfig {
    pub id: WebhookId,
    pub kind: WebhookKind,
    pub url: Iri,
    pub enabled: bool,
}

impl WebhookConfig {
    pub fn new(id: WebhookId, kind: WebhookKind, url: &str, enabled: bool) -> Result<Self, CollabError> {
        let invalid = || CollabError::InvalidWebhookUrl(url.to_owned());
        let rest = url.strip_prefix("https://").or_else(|| url.strip_prefix("http://")).ok_or_else(invalid)?;
        if rest.is_empty() || rest.starts_with('/') {
            return Err(invalid());
        }
        let url = Iri::new(url).map_err(|_| invalid())?;
        Ok(WebhookConfig { id, kind, url, enabled })
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OutboxMessage {
    pub recipient: UserId,
    pub subject: String,
    pub body: String,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum EventKind {
    CommentPosted,
    ThreadStatusChanged,
    RevisionAppended,
}

/// Kind-specific detail that does not go on the wire.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum EventDetail {
    Comment { thread: ThreadId, comment: CommentId, body: String },
    Status { thread: ThreadId, status: ThreadStatus },
    Revision { label: String },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProjectEvent {
    pub project: ProjectId,
    pub kind: EventKind,
    pub actor: UserId,
    pub timestamp: Timestamp,
    pub entity: Option<Entity>,
    pub revision_number: Option<u64>,
    pub detail: EventDetail,
}

/// Wire form shared by the event stream and ProjectEvent webhooks.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct EventEnvelope {
    #[serde(rename = "projectId")]
    pub project_id: ProjectId,
    pub event: EventKind,
    #[serde(rename = "userId")]
    pub user_id: UserId,
    pub timestamp: Timestamp,
    pub entity: Option<Entity>,
    #[serde(rename = "revisionNumber")]
    pub revision_number: Option<u64>,
}

impl ProjectEvent {
    pub fn envelope(&self) -> EventEnvelope {
        EventEnvelope {
            project_id: self.project.clone(),
            event: self.kind,
            user_id: self.actor.clone(),
            timestamp: self.timestamp,
            entity: self.entity.clone(),
            revision_number: self.revision_number,
        }
    }
}

/// A queued POST to one webhook.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WebhookDelivery {
    pub webhook: WebhookId,
    pub kind: WebhookKind,
    pub url: Iri,
    /// JSON body.
    pub payload: String,
}

/// Initial attempt, then one retry after each delay; the delivery is marked
/// failed when the last retry fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RetryPolicy {
    pub delays: Vec<Duration>,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { delays: vec![Duration::from_secs(1), Duration::from_secs(5), Duration::from_secs(25)] }
    }
}

impl RetryPolicy {
    pub fn immediate(retries: usize) -> Self {
        RetryPolicy { delays: vec![Duration::ZERO; retries] }
    }

    pub fn max_attempts(&self) -> usize {
        self.delays.len() + 1
    }

    /// Wait before `attempt` (1-based); `None` once attempts are exhausted.
    pub fn delay_before(&self, attempt: usize) -> Option<Duration> {
        match attempt {
            0 => None,
            1 => Some(Duration::ZERO),
            n => self.delays.get(n - 2).copied(),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "camelCase")]
pub enum DeliveryStatus {
    Pending,
    Delivered { attempts: usize },
    Failed { attempts: usize, error: String },
}

/// Project facts the notifier needs.
pub struct NotifyContext<'a> {
    pub project_name: &'a str,
    pub participants: &'a BTreeMap<UserId, Role>,
    pub webhooks: &'a [WebhookConfig],
    /// Origin prepended to deep links, e.g. `http://localhost:8080`.
    pub base_url: &'a str,
    pub display_name: &'a dyn Fn(&Entity) -> String,
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Notifications {
    pub outbox: Vec<OutboxMessage>,
    pub deliveries: Vec<WebhookDelivery>,
}

pub fn deep_link(base_url: &str, event: &ProjectEvent) -> String {
    let path = match (&event.entity, event.kind) {
        (Some(e), EventKind::CommentPosted | EventKind::ThreadStatusChanged) => entity_url(&event.project, Tab::Comments, e),
        (Some(e), EventKind::RevisionAppended) => entity_url(&event.project, Tab::for_kind(e.kind), e),
        (None, _) => tab_url(&event.project, Tab::History),
    };
    format!("{}{}", base_url.trim_end_matches('/'), path)
}

/// Outbox messages (comments only, every participant but the actor) and one
/// delivery per enabled webhook.
pub fn emit_notifications(event: &ProjectEvent, ctx: &NotifyContext<'_>) -> Notifications {
    let link = deep_link(ctx.base_url, event);
    let target = event.entity.as_ref().map(|e| (ctx.display_name)(e));
    let target = target.as_deref().unwrap_or("the project");
    let mut out = Notifications::default();
    if let EventDetail::Comment { body, .. } = &event.detail {
        let subject = format!("[{}] {} commented on {}", ctx.project_name, event.actor, target);
        for user in ctx.participants.keys().filter(|u| **u != event.actor) {
            out.outbox.push(OutboxMessage {
                recipient: user.clone(),
                subject: subject.clone(),
                body: format!("{body}\n\nView the discussion: {link}\n"),
            });
        }
    }
    let slack_text = match &event.detail {
        EventDetail::Comment { body, .. } => format!("{} commented on {}: {}\n{}", event.actor, target, body, link),
        EventDetail::Status { status, .. } => {
            let verb = if *status == ThreadStatus::Closed { "closed" } else { "reopened" };
            format!("{} {} a thread on {}\n{}", event.actor, verb, target, link)
        }
        EventDetail::Revision { label } => format!(
            "{} committed revision {}: {}\n{}",
            event.actor,
            event.revision_number.unwrap_or_default(),
            label,
            link
        ),
    };
    let envelope = serde_json::to_string(&event.envelope()).expect("envelope serializes");
    let slack = serde_json::json!({ "text": slack_text }).to_string();
    for hook in ctx.webhooks.iter().filter(|h| h.enabled) {
        let payload = match hook.kind {
            WebhookKind::ProjectEvent => envelope.clone(),
            WebhookKind::SlackIncoming => slack.clone(),
        };
        out.deliveries.push(WebhookDelivery { webhook: hook.id.clone(), kind: hook.kind, url: hook.url.clone(), payload });
    }
    out
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::ontology::PrefixTable;
    use crate::project::urls::parse_entity_url;

    fn a320() -> Entity {
        Entity::class(Iri::new("http://example.org/air#AirbusA320").unwrap())
    }

    struct Fixture {
        project: ProjectId,
        prefixes: PrefixTable,
        entities: BTreeSet<Entity>,
    }

    impl Fixture {
        fn new() -> Self {
            Fixture { project: ProjectId::new("p1"), prefixes: PrefixTable::new(), entities: BTreeSet::from([a320()]) }
        }

        fn ctx(&self) -> BodyContext<'_> {
            BodyContext { project: &self.project, prefixes: &self.prefixes, entities: &self.entities }
        }
    }

    fn new_comment<'a>(id: &str, author: &'a UserId, role: Role, t: Timestamp, body: &'a str) -> NewComment<'a> {
        NewComment { id: CommentId::new(id), author, role: Some(role), timestamp: t, body }
    }

    #[test]
    fn thread_lifecycle() {
        let f = Fixture::new();
        let mut store = ThreadStore::default();
        let carol = UserId::new("carol");
        let t = store
            .create_thread(ThreadId::new("t1"), a320(), new_comment("c1", &carol, Role::Commenter, 10, "looks off"), &f.ctx())
            .unwrap();
        assert_eq!((t.status, t.comments.len()), (ThreadStatus::Open, 1));
        let viewer = UserId::new("vic");
        assert_eq!(
            store
                .create_thread(ThreadId::new("t2"), a320(), new_comment("c2", &viewer, Role::Viewer, 11, "hi"), &f.ctx())
                .err(),
            Some(CollabError::PermissionDenied)
        );
        assert_eq!(
            store.add_comment(&ThreadId::new("t1"), new_comment("c3", &carol, Role::Editor, 12, "  "), &f.ctx()).err(),
            Some(CollabError::EmptyBody)
        );
        assert!(store.set_status(&ThreadId::new("t1"), ThreadStatus::Closed, Some(Role::Commenter)).unwrap());
        assert!(!store.set_status(&ThreadId::new("t1"), ThreadStatus::Closed, Some(Role::Commenter)).unwrap());
        store.add_comment(&ThreadId::new("t1"), new_comment("c4", &carol, Role::Commenter, 13, "reply"), &f.ctx()).unwrap();
        let t = store.get(&ThreadId::new("t1")).unwrap();
        assert_eq!((t.status, t.comments.len()), (ThreadStatus::Closed, 2));
        assert!(matches!(
            store.add_comment(&ThreadId::new("nope"), new_comment("c5", &carol, Role::Commenter, 14, "x"), &f.ctx()),
            Err(CollabError::UnknownThread(_))
        ));
        assert!(store.set_status(&ThreadId::new("t1"), ThreadStatus::Open, Some(Role::Viewer)).is_err());
    }

    #[test]
    fn counts_only_open_threads() {
        let f = Fixture::new();
        let mut store = ThreadStore::default();
        assert!(thread_counts(&store).is_empty());
        let u = UserId::new("u");
        for id in ["t1", "t2", "t3"] {
            store.create_thread(ThreadId::new(id), a320(), new_comment(id, &u, Role::Owner, 1, "x"), &f.ctx()).unwrap();
        }
        store.set_status(&ThreadId::new("t3"), ThreadStatus::Closed, Some(Role::Owner)).unwrap();
        assert_eq!(thread_counts(&store), BTreeMap::from([(a320(), 2)]));
        store.set_status(&ThreadId::new("t1"), ThreadStatus::Closed, Some(Role::Owner)).unwrap();
        assert_eq!(thread_counts(&store), BTreeMap::from([(a320(), 1)]));
    }

    fn comment_event() -> ProjectEvent {
        ProjectEvent {
            project: ProjectId::new("p1"),
            kind: EventKind::CommentPosted,
            actor: UserId::new("alice"),
            timestamp: 42,
            entity: Some(a320()),
            revision_number: None,
            detail: EventDetail::Comment {
                thread: ThreadId::new("t1"),
                comment: CommentId::new("c1"),
                body: "Needs a *better* label".into(),
            },
        }
    }

    #[test]
    fn comment_fan_out() {
        let participants = BTreeMap::from([
            (UserId::new("alice"), Role::Owner),
            (UserId::new("bob"), Role::Editor),
            (UserId::new("carol"), Role::Commenter),
        ]);
        let hooks = vec![
            WebhookConfig::new(WebhookId::new("h1"), WebhookKind::SlackIncoming, "https://hooks.example/x", true).unwrap(),
            WebhookConfig::new(WebhookId::new("h2"), WebhookKind::ProjectEvent, "http://sink.example/", false).unwrap(),
        ];
        let name = |_: &Entity| "A320 passenger jet".to_owned();
        let ctx = NotifyContext {
            project_name: "Air",
            participants: &participants,
            webhooks: &hooks,
            base_url: "http://localhost:8080",
            display_name: &name,
        };
        let n = emit_notifications(&comment_event(), &ctx);
        assert_eq!(n.outbox.len(), 2);
        assert!(n.outbox.iter().all(|m| m.recipient != UserId::new("alice")));
        for message in &n.outbox {
            let url = message.body.split_whitespace().find(|w| w.contains("/#projects/")).unwrap();
            assert_eq!(parse_entity_url(url).unwrap().2, a320());
        }
        assert_eq!(n.deliveries.len(), 1);
        let slack: serde_json::Value = serde_json::from_str(&n.deliveries[0].payload).unwrap();
        let text = slack["text"].as_str().unwrap();
        assert!(text.starts_with("alice commented on A320 passenger jet: Needs a *better* label\nhttp://localhost:8080/#projects/p1/edit/Comments?selection=Class("));
    }

    #[test]
    fn revision_event_goes_to_event_hooks_only() {
        let participants = BTreeMap::from([(UserId::new("alice"), Role::Owner), (UserId::new("bob"), Role::Editor)]);
        let hooks = vec![WebhookConfig::new(WebhookId::new("h"), WebhookKind::ProjectEvent, "http://sink/", true).unwrap()];
        let name = |e: &Entity| e.iri.to_string();
        let ctx = NotifyContext { project_name: "Air", participants: &participants, webhooks: &hooks, base_url: "", display_name: &name };
        let event = ProjectEvent {
            kind: EventKind::RevisionAppended,
            revision_number: Some(3),
            entity: None,
            detail: EventDetail::Revision { label: "Applied 2 changes".into() },
            ..comment_event()
        };
        let n = emit_notifications(&event, &ctx);
        assert!(n.outbox.is_empty());
        assert_eq!(n.deliveries.len(), 1);
        assert_eq!(
            n.deliveries[0].payload,
            r#"{"projectId":"p1","event":"RevisionAppended","userId":"alice","timestamp":42,"entity":null,"revisionNumber":3}"#
        );
    }

    #[test]
    fn lone_author_without_hooks() {
        let participants = BTreeMap::from([(UserId::new("alice"), Role::Owner)]);
        let name = |e: &Entity| e.iri.to_string();
        let ctx = NotifyContext { project_name: "Air", participants: &participants, webhooks: &[], base_url: "", display_name: &name };
        assert_eq!(emit_notifications(&comment_event(), &ctx), Notifications::default());
    }

    #[test]
    fn webhook_urls() {
        assert!(WebhookConfig::new(WebhookId::new("h"), WebhookKind::ProjectEvent, "ftp://x", true).is_err());
        assert!(WebhookConfig::new(WebhookId::new("h"), WebhookKind::ProjectEvent, "https://", true).is_err());
        assert!(WebhookConfig::new(WebhookId::new("h"), WebhookKind::ProjectEvent, "http://127.0.0.1:9/x", true).is_ok());
    }

    #[test]
    fn retry_schedule() {
        let policy = RetryPolicy::default();
        assert_eq!(policy.max_attempts(), 4);
        assert_eq!(policy.delay_before(1), Some(Duration::ZERO));
        assert_eq!(policy.delay_before(2), Some(Duration::from_secs(1)));
        assert_eq!(policy.delay_before(4), Some(Duration::from_secs(25)));
        assert_eq!(policy.delay_before(5), None);
    }
}
