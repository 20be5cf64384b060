use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use ontoforge_core::changes::ChangeError;
use ontoforge_core::collab::CollabError;
use ontoforge_core::criteria::{CriteriaError, TagError};
use ontoforge_core::graph::GraphError;
use ontoforge_core::project::ProjectError;
use serde_json::json;

/// JSON error body: `{"error": <code>, "message": <text>}` plus optional `path`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub path: Option<String>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into(), path: None }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "BadRequest", message)
    }

    pub fn not_found(what: impl Into<String>) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "NotFound", what)
    }

    pub fn unauthorized() -> Self {
        ApiError::new(StatusCode::UNAUTHORIZED, "Unauthorized", "missing or unknown bearer token")
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.code, "message": self.message });
        if let Some(path) = self.path {
            body["path"] = json!(path);
        }
        (self.status, Json(body)).into_response()
    }
}

impl From<CriteriaError> for ApiError {
    fn from(e: CriteriaError) -> Self {
        let message = e.to_string();
        match e {
            CriteriaError::Schema { path, .. } => {
                ApiError { path: Some(path), ..ApiError::new(StatusCode::BAD_REQUEST, "SchemaError", message) }
            }
            CriteriaError::InvalidRegex { .. } => ApiError::new(StatusCode::BAD_REQUEST, "InvalidRegex", message),
        }
    }
}

impl From<ProjectError> for ApiError {
    fn from(e: ProjectError) -> Self {
        use StatusCode as S;
        let message = e.to_string();
        let (status, code) = match &e {
            ProjectError::EmptyName => (S::BAD_REQUEST, "EmptyName"),
            ProjectError::PermissionDenied => (S::FORBIDDEN, "PermissionDenied"),
            ProjectError::CannotModifyOwner => (S::CONFLICT, "CannotModifyOwner"),
            ProjectError::UnknownEntity(_) => (S::NOT_FOUND, "UnknownEntity"),
            ProjectError::UnknownWebhook(_) => (S::NOT_FOUND, "UnknownWebhook"),
            ProjectError::LayoutTooLarge(_) => (S::PAYLOAD_TOO_LARGE, "LayoutTooLarge"),
            ProjectError::InvalidLayout(_) => (S::BAD_REQUEST, "InvalidLayout"),
            ProjectError::CorruptLog { .. } => (S::INTERNAL_SERVER_ERROR, "CorruptLog"),
            ProjectError::Io(_) => (S::INTERNAL_SERVER_ERROR, "Io"),
            ProjectError::Change(c) => match c {
                ChangeError::UnknownRevision(_) => (S::NOT_FOUND, "UnknownRevision"),
                ChangeError::UnknownEntity(_) => (S::NOT_FOUND, "UnknownEntity"),
                ChangeError::EmptyEdit | ChangeError::EmptyRevision => (S::CONFLICT, "EmptyEdit"),
                ChangeError::NothingToRevert(_) => (S::CONFLICT, "NothingToRevert"),
                ChangeError::IneffectiveChange(_) => (S::CONFLICT, "IneffectiveChange"),
                ChangeError::UnknownOntology(_) => (S::BAD_REQUEST, "UnknownOntology"),
                ChangeError::EmptyName => (S::BAD_REQUEST, "EmptyName"),
                ChangeError::Ontology(_) => (S::BAD_REQUEST, "OntologyError"),
                ChangeError::CorruptHistory(_) => (S::INTERNAL_SERVER_ERROR, "CorruptHistory"),
            },
            ProjectError::Collab(c) => match c {
                CollabError::PermissionDenied => (S::FORBIDDEN, "PermissionDenied"),
                CollabError::EmptyBody => (S::BAD_REQUEST, "EmptyBody"),
                CollabError::UnknownThread(_) => (S::NOT_FOUND, "UnknownThread"),
                CollabError::UnknownEntity(_) => (S::NOT_FOUND, "UnknownEntity"),
                CollabError::InvalidWebhookUrl(_) => (S::BAD_REQUEST, "InvalidWebhookUrl"),
            },
            ProjectError::Tag(t) => match t {
                TagError::PermissionDenied => (S::FORBIDDEN, "PermissionDenied"),
                TagError::UnknownTag(_) => (S::NOT_FOUND, "UnknownTag"),
                TagError::DuplicateLabel(_) => (S::CONFLICT, "DuplicateLabel"),
                TagError::EmptyLabel | TagError::InvalidColor(_) => (S::BAD_REQUEST, "InvalidTag"),
            },
            ProjectError::Graph(g) => match g {
                GraphError::UnknownEntity(_) => (S::NOT_FOUND, "UnknownEntity"),
                GraphError::TooLarge => (S::UNPROCESSABLE_ENTITY, "GraphTooLarge"),
                _ => (S::BAD_REQUEST, "GraphError"),
            },
            ProjectError::Ontology(_) => (S::BAD_REQUEST, "OntologyError"),
        };
        ApiError::new(status, code, message)
    }
}

impl From<GraphError> for ApiError {
    fn from(e: GraphError) -> Self {
        ProjectError::from(e).into()
    }
}
