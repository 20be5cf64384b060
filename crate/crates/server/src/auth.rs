//! Bearer-token authentication against a static credentials file.

use std::collections::HashMap;
use std::path::Path;

use axum::extract::FromRequestParts;
use axum::http::header::AUTHORIZATION;
use axum::http::request::Parts;
use ontoforge_core::ids::UserId;

use crate::error::ApiError;
use crate::AppState;

/// Token to user-id map, read from a JSON object `{"<token>": "<user>"}`.
#[derive(Clone, Debug, Default)]
pub struct Credentials {
    tokens: HashMap<String, UserId>,
}

#[derive(Debug, thiserror::Error)]
pub enum CredentialsError {
    #[error("cannot read credentials file: {0}")]
    Io(#[from] std::io::Error),
    #[error("credentials file must be a JSON object of token to user id: {0}")]
    Format(#[from] serde_json::Error),
    #[error("credentials file contains an empty token or user id")]
    Empty,
}

impl Credentials {
    pub fn from_pairs<T: Into<String>, U: Into<String>>(pairs: impl IntoIterator<Item = (T, U)>) -> Self {
        Credentials { tokens: pairs.into_iter().map(|(t, u)| (t.into(), UserId::new(u))).collect() }
    }

    pub fn parse(text: &str) -> Result<Self, CredentialsError> {
        let tokens: HashMap<String, UserId> = serde_json::from_str(text)?;
        if tokens.iter().any(|(t, u)| t.is_empty() || u.as_str().is_empty()) {
            return Err(CredentialsError::Empty);
        }
        Ok(Credentials { tokens })
    }

    pub fn load(path: &Path) -> Result<Self, CredentialsError> {
        Credentials::parse(&std::fs::read_to_string(path)?)
    }

    pub fn user(&self, token: &str) -> Option<&UserId> {
        self.tokens.get(token)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// The authenticated caller. The token comes from `Authorization: Bearer`,
/// or from an `access_token` query parameter for clients such as EventSource
/// that cannot set headers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuthUser(pub UserId);

fn token_of(parts: &Parts) -> Option<String> {
    if let Some(value) = parts.headers.get(AUTHORIZATION) {
        let value = value.to_str().ok()?;
        let (scheme, token) = value.split_once(' ')?;
        return scheme.eq_ignore_ascii_case("bearer").then(|| token.trim().to_owned());
    }
    let query = parts.uri.query()?;
    form_urlencoded::parse(query.as_bytes()).find(|(k, _)| k == "access_token").map(|(_, v)| v.into_owned())
}

impl FromRequestParts<AppState> for AuthUser {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, Self::Rejection> {
        let token = token_of(parts).ok_or_else(ApiError::unauthorized)?;
        state.credentials.user(&token).cloned().map(AuthUser).ok_or_else(ApiError::unauthorized)
    }
}
