//! Python bindings. Structured values cross the boundary as plain
//! dicts and lists in the same JSON shapes the HTTP API uses.

use std::collections::BTreeSet;
use std::str::FromStr;

use ontoforge_core::access::Role;
use ontoforge_core::changes::EditAction;
use ontoforge_core::collab::ThreadStatus;
use ontoforge_core::criteria::{parse_criteria, CriteriaNode};
use ontoforge_core::graph::{export_graph, hide_nodes, isolate_paths, layout_graph, EntityGraph, ExportFormat};
use ontoforge_core::ids::{Env, ThreadId, UserId};
use ontoforge_core::ontology::{self, write_axiom, Entity, EntityKind, Iri, OntologyDocument};
use ontoforge_core::project::storage::{load_project, persist_project};
use ontoforge_core::project::{create_project, Command, Project as CoreProject, Record};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyString;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

create_exception!(ontoforge, OntoforgeError, PyException);

fn err(e: impl std::fmt::Display) -> PyErr {
    OntoforgeError::new_err(e.to_string())
}

/// Serialises through `json.loads` so callers get ordinary Python values.
fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Accepts either a JSON string or any value `json.dumps` understands.
fn json_text(value: &Bound<'_, PyAny>) -> PyResult<String> {
    if let Ok(s) = value.cast::<PyString>() {
        return Ok(s.to_str()?.to_owned());
    }
    value.py().import("json")?.call_method1("dumps", (value,))?.extract()
}

fn from_py<T: DeserializeOwned>(value: &Bound<'_, PyAny>) -> PyResult<T> {
    serde_json::from_str(&json_text(value)?).map_err(err)
}

fn criteria(value: &Bound<'_, PyAny>) -> PyResult<CriteriaNode> {
    parse_criteria(&json_text(value)?).map_err(err)
}

fn entity(iri: &str, kind: &str) -> PyResult<Entity> {
    let kind: EntityKind = serde_json::from_value(json!(kind)).map_err(err)?;
    Ok(Entity::new(kind, Iri::new(iri).map_err(err)?))
}

fn graph_json(p: &CoreProject, g: &EntityGraph) -> serde_json::Value {
    let layout = layout_graph(g);
    let nodes: Vec<_> = g
        .nodes
        .iter()
        .map(|e| {
            let (x, y) = layout.get(e).map_or((0, 0), |at| (at.x, at.y));
            json!({ "entity": e, "displayName": p.display_name(&e.iri), "x": x, "y": y })
        })
        .collect();
    json!({ "root": g.root, "nodes": nodes, "edges": g.edges })
}

/// A parsed OWL functional-syntax document.
#[pyclass(module = "ontoforge", frozen)]
struct Ontology {
    doc: OntologyDocument,
}

#[pymethods]
impl Ontology {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Ontology> {
        Ok(Ontology { doc: ontology::parse_ontology(text).map_err(err)? })
    }

    #[getter]
    fn iri(&self) -> Option<String> {
        self.doc.iri.as_ref().map(|i| i.as_str().to_owned())
    }

    /// Axioms in functional syntax, abbreviated with the document prefixes.
    fn axioms(&self) -> Vec<String> {
        self.doc.axioms().map(|a| write_axiom(a, Some(&self.doc.prefixes))).collect()
    }

    fn axiom_kinds(&self) -> Vec<&'static str> {
        self.doc.axioms().map(|a| a.name()).collect()
    }

    fn signature<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.doc.signature())
    }

    fn serialize(&self) -> String {
        ontology::serialize_ontology(&self.doc)
    }

    fn __len__(&self) -> usize {
        self.doc.len()
    }

    fn __eq__(&self, other: &Ontology) -> bool {
        self.doc == other.doc
    }

    fn __repr__(&self) -> String {
        format!("Ontology(iri={:?}, axioms={})", self.iri(), self.doc.len())
    }
}

/// A project: ontologies, revision history, threads, tags and roles.
#[pyclass(module = "ontoforge")]
struct Project {
    inner: CoreProject,
    env: Env,
}

impl Project {
    fn run(&mut self, user: Option<&str>, command: Command) -> PyResult<Option<Record>> {
        let actor = user.map(UserId::new).unwrap_or_else(|| self.inner.owner().clone());
        Ok(self.inner.execute(&self.env, &actor, command).map_err(err)?.map(|(record, _)| record))
    }

    fn revision_reply<'py>(&self, py: Python<'py>, record: Option<Record>) -> PyResult<Bound<'py, PyAny>> {
        match record {
            Some(Record::Revision { revision, subject, .. }) => {
                let mut value = serde_json::to_value(&revision).map_err(err)?;
                value["subject"] = json!(subject);
                to_py(py, &value)
            }
            Some(_) => Err(err("unexpected record")),
            None => Ok(py.None().into_bound(py)),
        }
    }
}

#[pymethods]
impl Project {
    /// `deterministic` uses a fixed clock and sequential ids.
    #[new]
    #[pyo3(signature = (name, owner = "owner", ontology = None, deterministic = false))]
    fn new(name: &str, owner: &str, ontology: Option<&str>, deterministic: bool) -> PyResult<Project> {
        let env = if deterministic { Env::deterministic() } else { Env::system() };
        let owner = UserId::new(owner);
        let (inner, _) = create_project(&env, &owner, name).map_err(err)?;
        let mut project = Project { inner, env };
        if let Some(text) = ontology {
            project.run(None, Command::Import { text: text.to_owned() })?;
        }
        Ok(project)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Project> {
        let bytes = std::fs::read(path).map_err(err)?;
        let (inner, _) = load_project(&bytes).map_err(err)?;
        Ok(Project { inner, env: Env::system() })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        std::fs::write(path, persist_project(&self.inner)).map_err(err)
    }

    #[getter]
    fn id(&self) -> &str {
        self.inner.id().as_str()
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn owner(&self) -> &str {
        self.inner.owner().as_str()
    }

    #[getter]
    fn base_iri(&self) -> &str {
        self.inner.base_iri().as_str()
    }

    #[getter]
    fn head_revision(&self) -> u64 {
        self.inner.log().head_number()
    }

    /// Applies one edit action and returns the new revision, or `None` for a no-op.
    #[pyo3(signature = (action, user = None))]
    fn edit<'py>(&mut self, py: Python<'py>, action: &Bound<'py, PyAny>, user: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
        let action: EditAction = from_py(action)?;
        let record = self.run(user, Command::Edit { action })?;
        self.revision_reply(py, record)
    }

    #[pyo3(signature = (revision, user = None))]
    fn revert<'py>(&mut self, py: Python<'py>, revision: u64, user: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
        let record = self.run(user, Command::Revert { revision })?;
        self.revision_reply(py, record)
    }

    fn revisions<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let revs: Vec<_> = self.inner.log().revisions().iter().map(|r| &**r).collect();
        to_py(py, &revs)
    }

    /// Functional-syntax text of every ontology at `revision` (default head).
    #[pyo3(signature = (revision = None))]
    fn documents(&self, revision: Option<u64>) -> PyResult<Vec<(String, String)>> {
        let n = revision.unwrap_or_else(|| self.inner.log().head_number());
        let docs = self.inner.documents_at(n).map_err(err)?;
        Ok(docs.into_iter().map(|(id, doc)| (id.as_str().to_owned(), ontology::serialize_ontology(&doc))).collect())
    }

    fn entities<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, self.inner.entities())
    }

    fn display_name(&self, iri: &str) -> PyResult<String> {
        Ok(self.inner.display_name(&Iri::new(iri).map_err(err)?))
    }

    #[pyo3(signature = (criteria, limit = 100, offset = 0))]
    fn search<'py>(&self, py: Python<'py>, criteria: &Bound<'py, PyAny>, limit: usize, offset: usize) -> PyResult<Bound<'py, PyAny>> {
        let criteria = self::criteria(criteria)?;
        to_py(py, &self.inner.search(&criteria, limit, offset))
    }

    /// Returns the new thread.
    #[pyo3(signature = (iri, body, kind = "Class", user = None))]
    fn create_thread<'py>(
        &mut self,
        py: Python<'py>,
        iri: &str,
        body: &str,
        kind: &str,
        user: Option<&str>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let entity = entity(iri, kind)?;
        match self.run(user, Command::CreateThread { entity, body: body.to_owned() })? {
            Some(Record::ThreadCreated { thread }) => to_py(py, self.inner.threads().get(&thread.id).unwrap_or(&thread)),
            _ => Err(err("thread was not created")),
        }
    }

    #[pyo3(signature = (thread, body, user = None))]
    fn add_comment<'py>(&mut self, py: Python<'py>, thread: &str, body: &str, user: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
        let id = ThreadId::new(thread);
        self.run(user, Command::AddComment { thread: id.clone(), body: body.to_owned() })?;
        to_py(py, &self.inner.threads().get(&id))
    }

    #[pyo3(signature = (thread, status, user = None))]
    fn set_thread_status(&mut self, thread: &str, status: &str, user: Option<&str>) -> PyResult<()> {
        let status: ThreadStatus = serde_json::from_value(json!(status)).map_err(err)?;
        self.run(user, Command::SetThreadStatus { thread: ThreadId::new(thread), status })?;
        Ok(())
    }

    fn threads<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.threads_for(None))
    }

    /// `role` is Viewer, Commenter, Editor or `None` to remove.
    #[pyo3(signature = (user, role, actor = None))]
    fn set_role(&mut self, user: &str, role: Option<&str>, actor: Option<&str>) -> PyResult<()> {
        let role: Option<Role> = role.map(|r| serde_json::from_value(json!(r))).transpose().map_err(err)?;
        self.run(actor, Command::SetRole { user: UserId::new(user), role })?;
        Ok(())
    }

    fn role_of(&self, user: &str) -> Option<String> {
        self.inner.role_of(&UserId::new(user)).map(|r| format!("{r:?}"))
    }

    /// Neighbourhood of `root` to `depth`, optionally restricted to the
    /// paths towards `target` and with `hide` removed.
    #[pyo3(signature = (root, depth = 1, kind = "Class", target = None, hide = Vec::new()))]
    fn graph<'py>(
        &self,
        py: Python<'py>,
        root: &str,
        depth: usize,
        kind: &str,
        target: Option<&str>,
        hide: Vec<String>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let g = self.view(root, depth, kind, target, hide)?;
        to_py(py, &graph_json(&self.inner, &g))
    }

    /// `format` is `dot` or `svg`.
    #[pyo3(signature = (root, format = "dot", depth = 1, kind = "Class", target = None, hide = Vec::new()))]
    fn export_graph(&self, root: &str, format: &str, depth: usize, kind: &str, target: Option<&str>, hide: Vec<String>) -> PyResult<String> {
        let format = ExportFormat::from_str(format).map_err(err)?;
        let g = self.view(root, depth, kind, target, hide)?;
        export_graph(&g, &layout_graph(&g), format).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Project(id={:?}, name={:?}, head_revision={})", self.id(), self.name(), self.head_revision())
    }
}

impl Project {
    fn view(&self, root: &str, depth: usize, kind: &str, target: Option<&str>, hide: Vec<String>) -> PyResult<EntityGraph> {
        let root = entity(root, kind)?;
        let mut g = self.inner.graph(&root, depth).map_err(err)?;
        if let Some(target) = target {
            let target = Iri::new(target).map_err(err)?;
            let b = g.nodes.iter().find(|e| e.iri == target).cloned().ok_or_else(|| err(format!("{target} is not in the graph")))?;
            g = isolate_paths(&g, &root, &b).map_err(err)?;
        }
        if !hide.is_empty() {
            let hidden: BTreeSet<Iri> = hide.iter().map(|h| Iri::new(h)).collect::<Result<_, _>>().map_err(err)?;
            let hidden: BTreeSet<Entity> = g.nodes.iter().filter(|e| hidden.contains(&e.iri)).cloned().collect();
            g = hide_nodes(&g, &hidden).map_err(err)?;
        }
        Ok(g)
    }
}

/// Parses and round-trips a functional-syntax document.
#[pyfunction]
fn normalize_ontology(text: &str) -> PyResult<String> {
    Ok(ontology::serialize_ontology(&ontology::parse_ontology(text).map_err(err)?))
}

/// Validates a criteria tree and returns it in canonical form.
#[pyfunction]
fn validate_criteria<'py>(py: Python<'py>, criteria: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &self::criteria(criteria)?)
}

#[pymodule]
fn ontoforge(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("OntoforgeError", m.py().get_type::<OntoforgeError>())?;
    m.add_class::<Ontology>()?;
    m.add_class::<Project>()?;
    m.add_function(wrap_pyfunction!(normalize_ontology, m)?)?;
    m.add_function(wrap_pyfunction!(validate_criteria, m)?)?;
    Ok(())
}
