//! HTTP routes.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, RawQuery, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use ontoforge_core::access::{Action, Role};
use ontoforge_core::changes::{EditAction, Revision};
use ontoforge_core::collab::{ThreadStatus, WebhookKind};
use ontoforge_core::criteria::{criteria_from_value, CriteriaError, TagRule};
use ontoforge_core::graph::{export_graph, hide_nodes, isolate_paths, layout_graph, EntityGraph, ExportFormat};
use ontoforge_core::ids::{ProjectId, TagId, ThreadId, UserId, WebhookId};
use ontoforge_core::ontology::{ClassHierarchy, Entity, EntityKind, Iri};
use ontoforge_core::project::{archive_name, export_revision_archive, Command, Project, ProjectError, Record};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::auth::AuthUser;
use crate::error::ApiError;
use crate::events;
use crate::registry::ProjectHandle;
use crate::AppState;

const OWL_THING: &str = "http://www.w3.org/2002/07/owl#Thing";
const DEFAULT_SEARCH_LIMIT: usize = 100;
const DEFAULT_GRAPH_DEPTH: usize = 1;

type ApiResult<T = Response> = Result<T, ApiError>;

pub fn router(state: AppState) -> Router {
    let project = Router::new()
        .route("/", get(get_project))
        .route("/classes", get(classes))
        .route("/edits", post(edit))
        .route("/revisions", get(revisions))
        .route("/revisions/{n}/revert", post(revert))
        .route("/revisions/{n}/download", get(download))
        .route("/threads", get(threads).post(create_thread))
        .route("/tags", get(tags).post(put_tag))
        .route("/tags/assign", post(assign_tags))
        .route("/tags/{tag}", delete(delete_tag))
        .route("/tag-rules", get(tag_rules).post(set_tag_rules))
        .route("/webhooks", get(webhooks).post(put_webhook))
        .route("/webhooks/{webhook}", delete(delete_webhook))
        .route("/participants", get(participants).post(set_participant))
        .route("/search", post(search))
        .route("/graph", get(graph))
        .route("/graph/export", get(graph_export))
        .route("/layout", get(get_layout).put(put_layout))
        .route("/events", get(event_stream));
    Router::new()
        .route("/api/projects", get(list_projects).post(create_project))
        .nest("/api/projects/{id}", project)
        .route("/api/threads/{id}/comments", post(add_comment))
        .route("/api/threads/{id}/status", post(set_status))
        .route("/api/outbox", get(outbox))
        .with_state(state)
}

// ---- helpers ----

fn body<T: DeserializeOwned>(bytes: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

struct Params(Vec<(String, String)>);

impl Params {
    fn new(raw: Option<String>) -> Self {
        let raw = raw.unwrap_or_default();
        Params(form_urlencoded::parse(raw.as_bytes()).into_owned().collect())
    }

    fn get(&self, name: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    fn all<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a str> {
        self.0.iter().filter(move |(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    fn number(&self, name: &str) -> ApiResult<Option<usize>> {
        self.get(name)
            .map(|v| v.parse().map_err(|_| ApiError::bad_request(format!("`{name}` must be a non-negative integer"))))
            .transpose()
    }
}

fn handle(state: &AppState, id: &str) -> ApiResult<Arc<ProjectHandle>> {
    state.registry.get(&ProjectId::new(id)).ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "UnknownProject", format!("no project {id}")))
}

/// The committed state, if `user` may read it.
fn readable(handle: &ProjectHandle, user: &UserId) -> ApiResult<Arc<Project>> {
    let p = handle.snapshot();
    p.require(user, Action::Read)?;
    Ok(p)
}

fn thread_handle(state: &AppState, id: &str) -> ApiResult<Arc<ProjectHandle>> {
    state
        .registry
        .find_thread(&ThreadId::new(id))
        .ok_or_else(|| ProjectError::Collab(ontoforge_core::collab::CollabError::UnknownThread(ThreadId::new(id))).into())
}

/// Runs a command off the async workers; the log append syncs to disk.
async fn run(state: &AppState, handle: Arc<ProjectHandle>, user: UserId, command: Command) -> ApiResult<Option<(Record, Arc<Project>)>> {
    let registry = state.registry.clone();
    tokio::task::spawn_blocking(move || registry.execute(&handle, &user, command))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))?
        .map_err(ApiError::from)
}

/// Finds the entity for `iri`; without a kind a class is preferred.
fn resolve(p: &Project, iri: &str, kind: Option<&str>) -> ApiResult<Entity> {
    let iri = Iri::new(iri).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let found = match kind {
        Some(k) => {
            let kind: EntityKind = k.parse().map_err(|e: ontoforge_core::ontology::OntologyError| ApiError::bad_request(e.to_string()))?;
            Some(Entity::new(kind, iri.clone())).filter(|e| p.entities().contains(e))
        }
        None => p.entities().iter().filter(|e| e.iri == iri).min_by_key(|e| e.kind != EntityKind::Class).cloned(),
    };
    found.ok_or_else(|| ProjectError::UnknownEntity(Entity::new(kind.and_then(|k| k.parse().ok()).unwrap_or(EntityKind::Class), iri)).into())
}

fn optional_entity(p: &Project, params: &Params) -> ApiResult<Option<Entity>> {
    params.get("entity").map(|iri| resolve(p, iri, params.get("kind"))).transpose()
}

fn entity_view(p: &Project, e: &Entity, counts: &BTreeMap<Entity, usize>) -> Value {
    json!({
        "entity": e,
        "displayName": p.display_name(&e.iri),
        "openThreads": counts.get(e).copied().unwrap_or(0),
        "tags": p.tags().displayed_for(e),
    })
}

fn revision_view(p: &Project, r: &Revision) -> Value {
    let mut v = serde_json::to_value(r).expect("revision serializes");
    v["subject"] = json!(p.revision_subject(r.number));
    v
}

fn summary(p: &Project, user: &UserId) -> Value {
    let counts = p.thread_counts();
    json!({
        "id": p.id(),
        "name": p.name(),
        "owner": p.owner(),
        "created": p.created(),
        "role": p.role_of(user),
        "baseIri": p.base_iri(),
        "prefixes": p.prefixes(),
        "ontologies": p.ontologies(),
        "headRevision": p.log().head_number(),
        "entities": p.entities().iter().map(|e| entity_view(p, e, &counts)).collect::<Vec<_>>(),
        "tags": p.tags().tags().collect::<Vec<_>>(),
    })
}

fn participant_list(p: &Project) -> Value {
    json!(p.participants().iter().map(|(user, role)| json!({ "user": user, "role": role })).collect::<Vec<_>>())
}

fn created(value: impl serde::Serialize) -> Response {
    (StatusCode::CREATED, Json(value)).into_response()
}

fn unexpected(record: &Record) -> ApiError {
    ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", format!("unexpected {} record", record.name()))
}

fn no_change() -> ApiError {
    ProjectError::Change(ontoforge_core::changes::ChangeError::EmptyEdit).into()
}

// ---- projects ----

async fn list_projects(State(s): State<AppState>, AuthUser(user): AuthUser) -> ApiResult<Json<Value>> {
    let list: Vec<Value> = s
        .registry
        .all()
        .iter()
        .map(|h| h.snapshot())
        .filter(|p| p.role_of(&user).is_some())
        .map(|p| json!({ "id": p.id(), "name": p.name(), "owner": p.owner(), "role": p.role_of(&user) }))
        .collect();
    Ok(Json(json!(list)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NewProject {
    name: String,
    #[serde(default)]
    ontology: Option<String>,
}

async fn create_project(State(s): State<AppState>, AuthUser(user): AuthUser, bytes: Bytes) -> ApiResult {
    let req: NewProject = body(&bytes)?;
    let registry = s.registry.clone();
    let owner = user.clone();
    let h = tokio::task::spawn_blocking(move || registry.create(&owner, &req.name, req.ontology.as_deref()))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))??;
    Ok(created(summary(&h.snapshot(), &user)))
}

async fn get_project(State(s): State<AppState>, AuthUser(user): AuthUser, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let p = readable(&*handle(&s, &id)?, &user)?;
    Ok(Json(summary(&p, &user)))
}

/// Direct subclasses of `parent`; the top-level classes without it.
async fn classes(State(s): State<AppState>, AuthUser(user): AuthUser, Path(id): Path<String>, RawQuery(q): RawQuery) -> ApiResult<Json<Value>> {
    let p = readable(&*handle(&s, &id)?, &user)?;
    let params = Params::new(q);
    let hierarchy = ClassHierarchy::from_axioms(p.head().all_axioms());
    let classes: BTreeSet<&Iri> = p.entities().iter().filter(|e| e.kind == EntityKind::Class).map(|e| &e.iri).collect();
    let members: Vec<Iri> = match params.get("parent").filter(|iri| *iri != OWL_THING) {
        Some(parent) => hierarchy.direct_subclasses(&resolve(&p, parent, Some("Class"))?.iri).into_iter().collect(),
        None => {
            let children: BTreeSet<Iri> = classes.iter().flat_map(|c| hierarchy.direct_subclasses(c)).collect();
            classes.iter().filter(|c| !children.contains(**c) && c.as_str() != OWL_THING).map(|c| (*c).clone()).collect()
        }
    };
    let counts = p.thread_counts();
    let mut views: Vec<(String, Value)> = members
        .into_iter()
        .filter(|iri| classes.contains(iri))
        .map(|iri| {
            let e = Entity::class(iri);
            let mut v = entity_view(&p, &e, &counts);
            v["hasChildren"] = json!(!hierarchy.direct_subclasses(&e.iri).is_empty());
            (p.display_name(&e.iri).to_lowercase(), v)
        })
        .collect();
    views.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(Json(json!(views.into_iter().map(|(_, v)| v).collect::<Vec<_>>())))
}

// ---- revisions ----

async fn edit(State(s): State<AppState>, AuthUser(user): AuthUser, Path(id): Path<String>, bytes: Bytes) -> ApiResult {
    let action: EditAction = body(&bytes)?;
    let h = handle(&s, &id)?;
    match run(&s, h, user, Command::Edit { action }).await? {
        Some((Record::Revision { revision, .. }, p)) => Ok(created(revision_view(&p, &revision))),
        Some((other, _)) => Err(unexpected(&other)),
        None => Err(no_change()),
    }
}

async fn revert(State(s): State<AppState>, AuthUser(user): AuthUser, Path((id, n)): Path<(String, u64)>) -> ApiResult {
    let h = handle(&s, &id)?;
    match run(&s, h, user, Command::Revert { revision: n }).await? {
        Some((Record::Revision { revision, .. }, p)) => Ok(created(revision_view(&p, &revision))),
        Some((other, _)) => Err(unexpected(&other)),
        None => Err(no_change()),
    }
}

async fn revisions(State(s): State<AppState>, AuthUser(user): AuthUser, Path(id): Path<String>, RawQuery(q): RawQuery) -> ApiResult<Json<Value>> {
    let p = readable(&*handle(&s, &id)?, &user)?;
    let params = Params::new(q);
    let list: Vec<Value> = match optional_entity(&p, &params)? {
        Some(e) => p.log().entity_history(&e).iter().map(|r| revision_view(&p, r)).collect(),
        None => p.log().revisions().iter().map(|r| revision_view(&p, r)).collect(),
    };
    Ok(Json(json!(list)))
}

async fn download(State(s): State<AppState>, AuthUser(user): AuthUser, Path((id, n)): Path<(String, u64)>) -> ApiResult {
    let p = readable(&*handle(&s, &id)?, &user)?;
    let bytes = export_revision_archive(&p, n)?;
    let disposition = format!("attachment; filename=\"{}\"", archive_name(p.id(), n).replace(['"', '\\'], "_"));
    Ok(([(header::CONTENT_TYPE, "application/zip".to_owned()), (header::CONTENT_DISPOSITION, disposition)], bytes).into_response())
}

// ---- comments ----

async fn threads(State(s): State<AppState>, AuthUser(user): AuthUser, Path(id): Path<String>, RawQuery(q): RawQuery) -> ApiResult<Json<Value>> {
    let p = readable(&*handle(&s, &id)?, &user)?;
    let entity = optional_entity(&p, &Params::new(q))?;
    Ok(Json(json!(p.threads_for(entity.as_ref()))))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NewThread {
    entity: Entity,
    body: String,
}

async fn create_thread(State(s): State<AppState>, AuthUser(user): AuthUser, Path(id): Path<String>, bytes: Bytes) -> ApiResult {
    let req: NewThread = body(&bytes)?;
    let h = handle(&s, &id)?;
    match run(&s, h, user, Command::CreateThread { entity: req.entity, body: req.body }).await? {
        Some((Record::ThreadCreated { thread }, _)) => Ok(created(thread)),
        Some((other, _)) => Err(unexpected(&other)),
        None => Err(no_change()),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NewComment {
    body: String,
}

async fn add_comment(State(s): State<AppState>, AuthUser(user): AuthUser, Path(id): Path<String>, bytes: Bytes) -> ApiResult {
    let req: NewComment = body(&bytes)?;
    let h = thread_handle(&s, &id)?;
    match run(&s, h, user, Command::AddComment { thread: ThreadId::new(id), body: req.body }).await? {
        Some((Record::CommentAdded { comment, .. }, _)) => Ok(created(comment)),
        Some((other, _)) => Err(unexpected(&other)),
        None => Err(no_change()),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StatusChange {
    status: ThreadStatus,
}

async fn set_status(State(s): State<AppState>, AuthUser(user): AuthUser, Path(id): Path<String>, bytes: Bytes) -> ApiResult<Json<Value>> {
    let req: StatusChange = body(&bytes)?;
    let h = thread_handle(&s, &id)?;
    let thread = ThreadId::new(id);
    let p = match run(&s, h.clone(), user, Command::SetThreadStatus { thread: thread.clone(), status: req.status }).await? {
        Some((_, p)) => p,
        None => h.snapshot(),
    };
    Ok(Json(json!(p.threads().get(&thread))))
}

async fn outbox(State(s): State<AppState>, AuthUser(user): AuthUser) -> ApiResult<Json<Value>> {
    let messages: Vec<_> = s.registry.all().iter().flat_map(|h| h.outbox_for(&user)).collect();
    Ok(Json(json!(messages)))
}

// ---- tags ----

async fn tags(State(s): State<AppState>, AuthUser(user): AuthUser, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let p = readable(&*handle(&s, &id)?, &user)?;
    Ok(Json(json!(p.tags().tags().collect::<Vec<_>>())))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NewTag {
    #[serde(default)]
    id: Option<TagId>,
    label: String,
    #[serde(default)]
    description: String,
    color: String,
}

async fn put_tag(State(s): State<AppState>, AuthUser(user): AuthUser, Path(id): Path<String>, bytes: Bytes) -> ApiResult {
    let req: NewTag = body(&bytes)?;
    let h = handle(&s, &id)?;
    let command = Command::PutTag { id: req.id.clone(), label: req.label, description: req.description, color: req.color };
    match run(&s, h.clone(), user, command).await? {
        Some((Record::TagPut { tag }, _)) => Ok(created(tag)),
        Some((other, _)) => Err(unexpected(&other)),
        None => Ok(Json(json!(req.id.and_then(|t| h.snapshot().tags().tag(&t).cloned()))).into_response()),
    }
}

async fn delete_tag(State(s): State<AppState>, AuthUser(user): AuthUser, Path((id, tag)): Path<(String, String)>) -> ApiResult<StatusCode> {
    let h = handle(&s, &id)?;
    run(&s, h, user, Command::DeleteTag { tag: TagId::new(tag) }).await?;
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Assignment {
    entity: Entity,
    tags: BTreeSet<TagId>,
}

async fn assign_tags(State(s): State<AppState>, AuthUser(user): AuthUser, Path(id): Path<String>, bytes: Bytes) -> ApiResult<Json<Value>> {
    let req: Assignment = body(&bytes)?;
    let h = handle(&s, &id)?;
    let entity = req.entity.clone();
    let p = match run(&s, h.clone(), user, Command::SetEntityTags { entity: req.entity, tags: req.tags }).await? {
        Some((_, p)) => p,
        None => h.snapshot(),
    };
    Ok(Json(json!({ "entity": entity, "tags": p.tags().displayed_for(&entity) })))
}

async fn tag_rules(State(s): State<AppState>, AuthUser(user): AuthUser, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let p = readable(&*handle(&s, &id)?, &user)?;
    Ok(Json(json!(p.tags().rules())))
}

/// Rule criteria go through the criteria parser so schema errors carry a path.
fn parse_rules(value: &Value) -> ApiResult<Vec<TagRule>> {
    let items = value.as_array().ok_or_else(|| ApiError::bad_request("tag rules must be an array"))?;
    let mut rules = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let at = |suffix: &str| format!("[{i}]{suffix}");
        let obj = item.as_object().ok_or_else(|| schema_error(at(""), "expected an object"))?;
        if let Some(extra) = obj.keys().find(|k| !matches!(k.as_str(), "tag" | "criteria")) {
            return Err(schema_error(at(""), &format!("unknown field `{extra}`")));
        }
        let tag = obj.get("tag").and_then(Value::as_str).ok_or_else(|| schema_error(at(".tag"), "expected a tag id"))?;
        let criteria = obj.get("criteria").ok_or_else(|| schema_error(at(".criteria"), "missing criteria"))?;
        let criteria = criteria_from_value(criteria).map_err(|e| match e {
            CriteriaError::Schema { path, message } => {
                let path = if path == "." { at(".criteria") } else { at(&format!(".criteria.{path}")) };
                CriteriaError::Schema { path, message }
            }
            other => other,
        })?;
        rules.push(TagRule { tag: TagId::new(tag), criteria });
    }
    Ok(rules)
}

fn schema_error(path: String, message: &str) -> ApiError {
    CriteriaError::Schema { path, message: message.to_owned() }.into()
}

async fn set_tag_rules(State(s): State<AppState>, AuthUser(user): AuthUser, Path(id): Path<String>, bytes: Bytes) -> ApiResult<Json<Value>> {
    let rules = parse_rules(&body::<Value>(&bytes)?)?;
    let h = handle(&s, &id)?;
    let p = match run(&s, h.clone(), user, Command::SetTagRules { rules }).await? {
        Some((_, p)) => p,
        None => h.snapshot(),
    };
    Ok(Json(json!(p.tags().rules())))
}

// ---- webhooks and participants ----

async fn webhooks(State(s): State<AppState>, AuthUser(user): AuthUser, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let h = handle(&s, &id)?;
    let p = h.snapshot();
    p.require(&user, Action::Admin)?;
    let status = h.webhook_status.lock().unwrap().clone();
    let list: Vec<Value> = p
        .webhooks()
        .iter()
        .map(|w| {
            let mut v = json!(w);
            v["lastDelivery"] = json!(status.get(&w.id));
            v
        })
        .collect();
    Ok(Json(json!(list)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NewWebhook {
    #[serde(default)]
    id: Option<WebhookId>,
    kind: WebhookKind,
    url: String,
    #[serde(default = "enabled")]
    enabled: bool,
}

fn enabled() -> bool {
    true
}

async fn put_webhook(State(s): State<AppState>, AuthUser(user): AuthUser, Path(id): Path<String>, bytes: Bytes) -> ApiResult {
    let req: NewWebhook = body(&bytes)?;
    let h = handle(&s, &id)?;
    let command = Command::PutWebhook { id: req.id.clone(), kind: req.kind, url: req.url, enabled: req.enabled };
    match run(&s, h.clone(), user, command).await? {
        Some((Record::WebhookPut { webhook }, _)) => Ok(created(webhook)),
        Some((other, _)) => Err(unexpected(&other)),
        None => Ok(Json(json!(h.snapshot().webhooks().iter().find(|w| Some(&w.id) == req.id.as_ref()))).into_response()),
    }
}

async fn delete_webhook(State(s): State<AppState>, AuthUser(user): AuthUser, Path((id, webhook)): Path<(String, String)>) -> ApiResult<StatusCode> {
    let h = handle(&s, &id)?;
    run(&s, h, user, Command::DeleteWebhook { webhook: WebhookId::new(webhook) }).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn participants(State(s): State<AppState>, AuthUser(user): AuthUser, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let p = readable(&*handle(&s, &id)?, &user)?;
    Ok(Json(participant_list(&p)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RoleChange {
    user: UserId,
    role: Option<Role>,
}

async fn set_participant(State(s): State<AppState>, AuthUser(user): AuthUser, Path(id): Path<String>, bytes: Bytes) -> ApiResult<Json<Value>> {
    let req: RoleChange = body(&bytes)?;
    let h = handle(&s, &id)?;
    let p = match run(&s, h.clone(), user, Command::SetRole { user: req.user, role: req.role }).await? {
        Some((_, p)) => p,
        None => h.snapshot(),
    };
    Ok(Json(participant_list(&p)))
}

// ---- search and graph ----

async fn search(State(s): State<AppState>, AuthUser(user): AuthUser, Path(id): Path<String>, RawQuery(q): RawQuery, bytes: Bytes) -> ApiResult<Json<Value>> {
    let p = readable(&*handle(&s, &id)?, &user)?;
    let params = Params::new(q);
    let criteria = criteria_from_value(&body::<Value>(&bytes)?)?;
    let limit = params.number("limit")?.unwrap_or(DEFAULT_SEARCH_LIMIT);
    let offset = params.number("offset")?.unwrap_or(0);
    let all = p.search(&criteria, usize::MAX, 0);
    let hits: Vec<_> = all.iter().skip(offset).take(limit).collect();
    Ok(Json(json!({ "total": all.len(), "offset": offset, "hits": hits })))
}

/// Neighbourhood of `root`, then optionally the paths to `target`, then hiding.
fn build(p: &Project, params: &Params) -> ApiResult<EntityGraph> {
    let root = params.get("root").ok_or_else(|| ApiError::bad_request("missing `root`"))?;
    let root = resolve(p, root, params.get("kind"))?;
    let depth = params.number("depth")?.unwrap_or(DEFAULT_GRAPH_DEPTH);
    let mut g = p.graph(&root, depth)?;
    if let Some(target) = params.get("target") {
        let target = resolve(p, target, params.get("targetKind"))?;
        g = isolate_paths(&g, &root, &target)?;
    }
    let hidden: BTreeSet<Entity> = params.all("hide").map(|iri| resolve(p, iri, None)).collect::<ApiResult<_>>()?;
    if !hidden.is_empty() {
        g = hide_nodes(&g, &hidden)?;
    }
    Ok(g)
}

async fn graph(State(s): State<AppState>, AuthUser(user): AuthUser, Path(id): Path<String>, RawQuery(q): RawQuery) -> ApiResult<Json<Value>> {
    let p = readable(&*handle(&s, &id)?, &user)?;
    let g = build(&p, &Params::new(q))?;
    let layout = layout_graph(&g);
    let nodes: Vec<Value> = g
        .nodes
        .iter()
        .map(|n| {
            let at = layout[n];
            json!({ "entity": n, "displayName": g.display_name(n), "x": at.x, "y": at.y })
        })
        .collect();
    Ok(Json(json!({ "root": g.root, "nodes": nodes, "edges": g.edges })))
}

async fn graph_export(State(s): State<AppState>, AuthUser(user): AuthUser, Path(id): Path<String>, RawQuery(q): RawQuery) -> ApiResult {
    let p = readable(&*handle(&s, &id)?, &user)?;
    let params = Params::new(q);
    let format: ExportFormat = params.get("format").unwrap_or("dot").parse().map_err(ApiError::bad_request)?;
    let g = build(&p, &params)?;
    let text = export_graph(&g, &layout_graph(&g), format)?;
    Ok(([(header::CONTENT_TYPE, format.media_type())], text).into_response())
}

// ---- layout and events ----

async fn get_layout(State(s): State<AppState>, AuthUser(user): AuthUser, Path(id): Path<String>) -> ApiResult {
    let p = readable(&*handle(&s, &id)?, &user)?;
    match p.layout(&user) {
        Some(doc) => Ok(([(header::CONTENT_TYPE, "application/json")], doc.to_owned()).into_response()),
        None => Err(ApiError::not_found("no saved layout")),
    }
}

async fn put_layout(State(s): State<AppState>, AuthUser(user): AuthUser, Path(id): Path<String>, bytes: Bytes) -> ApiResult<StatusCode> {
    let document = String::from_utf8(bytes.to_vec()).map_err(|_| ApiError::bad_request("layout must be UTF-8"))?;
    let h = handle(&s, &id)?;
    run(&s, h, user, Command::SetLayout { document }).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn event_stream(State(s): State<AppState>, AuthUser(user): AuthUser, Path(id): Path<String>, RawQuery(q): RawQuery) -> ApiResult {
    let h = handle(&s, &id)?;
    readable(&h, &user)?;
    let since = Params::new(q).number("since")?.map(|n| n as u64);
    Ok(events::sse(&h, since).into_response())
}
