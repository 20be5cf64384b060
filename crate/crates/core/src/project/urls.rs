//! Bookmarkable entity links: `/#projects/<id>/edit/<Tab>?selection=<Kind>(<iri>)`.

use std::fmt;
use std::str::FromStr;

use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::{Deserialize, Serialize};

use crate::ids::ProjectId;
use crate::ontology::{Entity, EntityKind, Iri};

/// Everything except RFC 3986 unreserved characters.
const COMPONENT: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'.').remove(b'_').remove(b'~');

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Tab {
    Classes,
    Properties,
    Individuals,
    Comments,
    History,
    Query,
    Graph,
}

impl Tab {
    pub const ALL: [Tab; 7] =
        [Tab::Classes, Tab::Properties, Tab::Individuals, Tab::Comments, Tab::History, Tab::Query, Tab::Graph];

    /// The tab that normally shows entities of `kind`.
    pub fn for_kind(kind: EntityKind) -> Tab {
        match kind {
            EntityKind::Class | EntityKind::Datatype => Tab::Classes,
            EntityKind::ObjectProperty | EntityKind::DataProperty | EntityKind::AnnotationProperty => Tab::Properties,
            EntityKind::NamedIndividual => Tab::Individuals,
        }
    }
}

impl fmt::Display for Tab {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Tab {
    type Err = UrlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tab::ALL.into_iter().find(|t| t.to_string() == s).ok_or_else(|| UrlError::UnknownTab(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UrlError {
    #[error("unknown tab '{0}'")]
    UnknownTab(String),
    #[error("malformed entity URL: {0}")]
    MalformedUrl(String),
}

/// Percent-encodes everything but unreserved characters.
pub fn encode_segment(s: &str) -> String {
    utf8_percent_encode(s, COMPONENT).to_string()
}

pub fn entity_url(project: &ProjectId, tab: Tab, entity: &Entity) -> String {
    format!(
        "/#projects/{}/edit/{}?selection={}({})",
        utf8_percent_encode(project.as_str(), COMPONENT),
        tab,
        entity.kind,
        utf8_percent_encode(entity.iri.as_str(), COMPONENT)
    )
}

/// URL without a selection, e.g. for the History tab.
pub fn tab_url(project: &ProjectId, tab: Tab) -> String {
    format!("/#projects/{}/edit/{}", utf8_percent_encode(project.as_str(), COMPONENT), tab)
}

/// Inverse of [`entity_url`]. Anything before `/#projects/` (an origin) is ignored.
pub fn parse_entity_url(url: &str) -> Result<(ProjectId, Tab, Entity), UrlError> {
    let malformed = || UrlError::MalformedUrl(url.to_owned());
    let start = url.find("/#projects/").ok_or_else(malformed)?;
    let rest = &url[start + "/#projects/".len()..];
    let (path, query) = rest.split_once('?').ok_or_else(malformed)?;
    let (project, tab) = path.split_once("/edit/").ok_or_else(malformed)?;
    if project.is_empty() || project.contains('/') {
        return Err(malformed());
    }
    let project = percent_decode_str(project).decode_utf8().map_err(|_| malformed())?;
    let tab: Tab = tab.parse()?;
    let selection = query
        .split('&')
        .find_map(|pair| pair.strip_prefix("selection="))
        .ok_or_else(malformed)?;
    let (kind, encoded) = selection.strip_suffix(')').and_then(|s| s.split_once('(')).ok_or_else(malformed)?;
    let kind: EntityKind = kind.parse().map_err(|_| malformed())?;
    let iri = percent_decode_str(encoded).decode_utf8().map_err(|_| malformed())?;
    let iri = Iri::new(iri.into_owned()).map_err(|_| malformed())?;
    Ok((ProjectId::new(project.into_owned()), tab, Entity::new(kind, iri)))
}
