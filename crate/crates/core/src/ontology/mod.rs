//! OWL document model, functional-syntax reader/writer and the hierarchy and
//! annotation lookups the rest of the crate builds on.

mod iri;
mod model;
mod parser;
mod query;
mod writer;

pub use iri::{
    expand_prefixed_name, Iri, PrefixTable, BUILTIN_PREFIXES, DBPEDIA, OWL, OWL_THING, RDF, RDFS, RDFS_LABEL,
    SCHEMA, WIKIDATA, XSD,
};
pub use model::{
    entity_signature, AnnotationValue, Axiom, ClassExpression, Declarations, Entity, EntityKind,
    OntologyDocument,
};
pub use parser::{parse_axiom, parse_ontology};
pub use query::{annotation_values, display_name, display_name_in, subclasses, ClassHierarchy, HierarchyMode};
pub use writer::{serialize_ontology, write_axiom};

pub(crate) use model::collect_signature;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OntologyError {
    #[error("invalid IRI '{0}'")]
    InvalidIri(String),
    #[error("malformed prefixed name '{0}'")]
    MalformedName(String),
    #[error("unknown prefix '{0}'")]
    UnknownPrefix(String),
    #[error("built-in prefix '{0}' cannot be rebound or removed")]
    BuiltinPrefix(String),
    #[error("unknown entity kind '{0}'")]
    UnknownKind(String),
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unsupported construct {construct} at {line}:{column}")]
    UnsupportedConstruct { construct: String, line: usize, column: usize },
}
