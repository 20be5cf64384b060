use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::OntologyError;

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const OWL: &str = "http://www.w3.org/2002/07/owl#";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const SCHEMA: &str = "https://schema.org/";
pub const WIKIDATA: &str = "http://www.wikidata.org/entity/";
pub const DBPEDIA: &str = "http://dbpedia.org/resource/";

pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
pub const OWL_THING: &str = "http://www.w3.org/2002/07/owl#Thing";

/// Prefixes every table carries. They cannot be removed or rebound.
pub const BUILTIN_PREFIXES: [(&str, &str); 7] = [
    ("rdf", RDF),
    ("rdfs", RDFS),
    ("owl", OWL),
    ("xsd", XSD),
    ("schema", SCHEMA),
    ("wikidata", WIKIDATA),
    ("dbpedia", DBPEDIA),
];

/// The W3C vocabularies. Terms in these namespaces are not project entities
/// unless explicitly declared.
pub const RESERVED_NAMESPACES: [&str; 4] = [RDF, RDFS, OWL, XSD];

/// An absolute IRI.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, OntologyError> {
        let value = value.into();
        if is_valid_iri(&value) {
            Ok(Iri(value))
        } else {
            Err(OntologyError::InvalidIri(value))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn rdfs_label() -> Self {
        Iri(RDFS_LABEL.to_owned())
    }

    pub fn owl_thing() -> Self {
        Iri(OWL_THING.to_owned())
    }

    pub fn is_reserved_vocabulary(&self) -> bool {
        RESERVED_NAMESPACES.iter().any(|ns| self.0.starts_with(ns))
    }

    /// Text after the last `#`, `/` or `:`, used when nothing better is known.
    pub fn fragment(&self) -> &str {
        let cut = self.0.rfind(['#', '/', ':']).map(|i| i + 1).unwrap_or(0);
        &self.0[cut..]
    }
}

fn is_valid_iri(value: &str) -> bool {
    let Some(colon) = value.find(':') else {
        return false;
    };
    let scheme = &value[..colon];
    let mut chars = scheme.chars();
    let scheme_ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
    scheme_ok && !value.chars().any(|c| c.is_whitespace() || matches!(c, '<' | '>' | '"'))
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl AsRef<str> for Iri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl Serialize for Iri {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Iri {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Iri::new(raw).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn is_valid_prefix_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        None => true,
        Some(c) if c.is_ascii_alphabetic() => {
            chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
        }
        Some(_) => false,
    }
}

/// Local parts that can be written after `prefix:` and read back unchanged.
pub(crate) fn is_valid_local_name(local: &str) -> bool {
    let mut chars = local.chars();
    match chars.next() {
        None => true,
        Some(c) if c.is_alphanumeric() || c == '_' => {
            chars.all(|c| c.is_alphanumeric() || matches!(c, '_' | '.' | '-'))
                && !local.ends_with('.')
        }
        Some(_) => false,
    }
}

/// Maps prefix names to namespace IRIs.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PrefixTable {
    entries: BTreeMap<String, Iri>,
}

impl Default for PrefixTable {
    fn default() -> Self {
        let entries = BUILTIN_PREFIXES
            .iter()
            .map(|(name, ns)| ((*name).to_owned(), Iri((*ns).to_owned())))
            .collect();
        PrefixTable { entries }
    }
}

impl PrefixTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_builtin(name: &str) -> bool {
        BUILTIN_PREFIXES.iter().any(|(p, _)| *p == name)
    }

    /// Registers a prefix. Rebinding a built-in to a different namespace is rejected;
    /// redeclaring it with its own namespace is accepted.
    pub fn insert(&mut self, name: &str, namespace: Iri) -> Result<(), OntologyError> {
        if !is_valid_prefix_name(name) {
            return Err(OntologyError::MalformedName(format!("{name}:")));
        }
        if Self::is_builtin(name) {
            return if self.entries.get(name) == Some(&namespace) {
                Ok(())
            } else {
                Err(OntologyError::BuiltinPrefix(name.to_owned()))
            };
        }
        self.entries.insert(name.to_owned(), namespace);
        Ok(())
    }

    pub fn remove(&mut self, name: &str) -> Result<Option<Iri>, OntologyError> {
        if Self::is_builtin(name) {
            return Err(OntologyError::BuiltinPrefix(name.to_owned()));
        }
        Ok(self.entries.remove(name))
    }

    pub fn get(&self, name: &str) -> Option<&Iri> {
        self.entries.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Iri)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Expands `prefix:local` to a full IRI.
    pub fn expand(&self, name: &str) -> Result<Iri, OntologyError> {
        let mut parts = name.split(':');
        let (Some(prefix), Some(local), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(OntologyError::MalformedName(name.to_owned()));
        };
        if !is_valid_prefix_name(prefix) || !is_valid_local_name(local) {
            return Err(OntologyError::MalformedName(name.to_owned()));
        }
        let namespace = self
            .entries
            .get(prefix)
            .ok_or_else(|| OntologyError::UnknownPrefix(prefix.to_owned()))?;
        Iri::new(format!("{}{}", namespace.0, local))
    }

    /// Shortest `prefix:local` form of `iri`, ties broken by prefix name.
    pub fn abbreviate(&self, iri: &Iri) -> Option<String> {
        self.entries
            .iter()
            .filter_map(|(prefix, ns)| {
                let local = iri.0.strip_prefix(ns.0.as_str())?;
                is_valid_local_name(local).then(|| format!("{prefix}:{local}"))
            })
            .min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)))
    }
}

impl Serialize for PrefixTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.entries.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PrefixTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = BTreeMap::<String, Iri>::deserialize(deserializer)?;
        let mut table = PrefixTable::default();
        for (name, ns) in raw {
            table.insert(&name, ns).map_err(serde::de::Error::custom)?;
        }
        Ok(table)
    }
}

/// Expands a prefixed name against `prefixes`.
pub fn expand_prefixed_name(prefixes: &PrefixTable, name: &str) -> Result<Iri, OntologyError> {
    prefixes.expand(name)
}
