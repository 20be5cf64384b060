//! The set of projects served from one data directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use ontoforge_core::collab::{OutboxMessage, ProjectEvent};
use ontoforge_core::ids::{Env, ProjectId, ThreadId, UserId};
use ontoforge_core::project::storage::LogFile;
use ontoforge_core::project::urls::encode_segment;
use ontoforge_core::project::{create_project, Command, Project, ProjectError, Record};
use tokio::sync::broadcast;

use crate::webhooks::{Dispatcher, StatusBoard};

/// Logs longer than this are rewritten as a single snapshot record.
pub const COMPACT_AFTER: usize = 1000;

const EVENT_BUFFER: usize = 1024;

struct Writer {
    log: LogFile,
    records: usize,
}

/// One project: a single writer appending to its log, readers working on
/// the last committed state.
pub struct ProjectHandle {
    writer: Mutex<Writer>,
    current: RwLock<Arc<Project>>,
    events: broadcast::Sender<ProjectEvent>,
    outbox: Mutex<Vec<OutboxMessage>>,
    pub webhook_status: StatusBoard,
}

impl ProjectHandle {
    fn new(log: LogFile, project: Project, records: usize) -> Self {
        ProjectHandle {
            writer: Mutex::new(Writer { log, records }),
            current: RwLock::new(Arc::new(project)),
            events: broadcast::channel(EVENT_BUFFER).0,
            outbox: Mutex::new(Vec::new()),
            webhook_status: Default::default(),
        }
    }

    /// The latest committed state.
    pub fn snapshot(&self) -> Arc<Project> {
        self.current.read().unwrap().clone()
    }

    pub fn subscribe(&self) -> broadcast::Receiver<ProjectEvent> {
        self.events.subscribe()
    }

    pub fn outbox_for(&self, user: &UserId) -> Vec<OutboxMessage> {
        self.outbox.lock().unwrap().iter().filter(|m| &m.recipient == user).cloned().collect()
    }
}

/// Loads every `*.log` in the data directory and routes commands to the
/// owning project.
pub struct Registry {
    dir: PathBuf,
    env: Env,
    public_url: String,
    dispatcher: Dispatcher,
    projects: RwLock<BTreeMap<ProjectId, Arc<ProjectHandle>>>,
}

impl Registry {
    pub fn open(dir: &Path, env: Env, public_url: &str, dispatcher: Dispatcher) -> Result<Registry, ProjectError> {
        std::fs::create_dir_all(dir)?;
        let mut projects = BTreeMap::new();
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "log"))
            .collect();
        paths.sort();
        for path in paths {
            let (log, project, report) = LogFile::open(&path)?;
            if let Some(reason) = &report.torn_tail {
                log::warn!("{}: dropped a torn final record ({reason})", path.display());
            }
            log::info!("loaded project {} ({} records)", project.id(), report.records);
            projects.insert(project.id().clone(), Arc::new(ProjectHandle::new(log, project, report.records)));
        }
        Ok(Registry { dir: dir.to_owned(), env, public_url: public_url.to_owned(), dispatcher, projects: RwLock::new(projects) })
    }

    pub fn public_url(&self) -> &str {
        &self.public_url
    }

    pub fn get(&self, id: &ProjectId) -> Option<Arc<ProjectHandle>> {
        self.projects.read().unwrap().get(id).cloned()
    }

    pub fn all(&self) -> Vec<Arc<ProjectHandle>> {
        self.projects.read().unwrap().values().cloned().collect()
    }

    /// The project holding `thread`.
    pub fn find_thread(&self, thread: &ThreadId) -> Option<Arc<ProjectHandle>> {
        self.all().into_iter().find(|h| h.snapshot().threads().get(thread).is_some())
    }

    /// Creates a project owned by `owner`, optionally seeded from a
    /// functional-syntax document. Nothing is written if the document is invalid.
    pub fn create(&self, owner: &UserId, name: &str, ontology: Option<&str>) -> Result<Arc<ProjectHandle>, ProjectError> {
        let (mut project, created) = create_project(&self.env, owner, name)?;
        let import = match ontology.filter(|t| !t.trim().is_empty()) {
            Some(text) => project.prepare(&self.env, owner, Command::Import { text: text.to_owned() })?,
            None => None,
        };
        if let Some(record) = &import {
            project.apply(record)?;
        }
        let path = self.dir.join(format!("{}.log", encode_segment(project.id().as_str())));
        let mut log = LogFile::create(&path, &created)?;
        let mut records = 1;
        if let Some(record) = &import {
            log.append(record)?;
            records += 1;
        }
        let handle = Arc::new(ProjectHandle::new(log, project, records));
        self.projects.write().unwrap().insert(handle.snapshot().id().clone(), handle.clone());
        Ok(handle)
    }

    /// Validates, persists and publishes one command. Either the record
    /// reaches the log and subscribers see its event, or nothing happens.
    pub fn execute(
        &self,
        handle: &ProjectHandle,
        actor: &UserId,
        command: Command,
    ) -> Result<Option<(Record, Arc<Project>)>, ProjectError> {
        let mut writer = handle.writer.lock().unwrap();
        let base = handle.snapshot();
        let Some(record) = base.prepare(&self.env, actor, command)? else {
            return Ok(None);
        };
        let mut next = (*base).clone();
        let event = next.apply(&record)?;
        writer.log.append(&record)?;
        writer.records += 1;
        let next = Arc::new(next);
        *handle.current.write().unwrap() = next.clone();
        if writer.records > COMPACT_AFTER {
            match writer.log.compact(&next) {
                Ok(()) => writer.records = 1,
                Err(e) => log::warn!("compacting {} failed: {e}", writer.log.path().display()),
            }
        }
        if let Some(event) = event {
            let notes = next.notifications(&event, &self.public_url);
            handle.outbox.lock().unwrap().extend(notes.outbox);
            for delivery in notes.deliveries {
                self.dispatcher.enqueue(delivery, &handle.webhook_status);
            }
            let _ = handle.events.send(event);
        }
        Ok(Some((record, next)))
    }
}
