pub mod access;
pub mod changes;
pub mod collab;
pub mod criteria;
pub mod graph;
pub mod ids;
pub mod ontology;
pub mod project;
