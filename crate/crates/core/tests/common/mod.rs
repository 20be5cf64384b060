#![allow(dead_code)]

pub mod gen;

use std::collections::{BTreeMap, BTreeSet};

use ontoforge_core::changes::{ChangeOp, Revision};
use ontoforge_core::ids::{Env, OntologyId, UserId};
use ontoforge_core::ontology::{Axiom, Entity, Iri};
use ontoforge_core::project::{create_project, Command, Project};

pub const AIR: &str = include_str!("../fixtures/air.ofn");
pub const FLEET: &str = include_str!("../fixtures/fleet.ofn");

pub fn air(local: &str) -> Iri {
    Iri::new(format!("http://example.org/air#{local}")).unwrap()
}

pub fn class(local: &str) -> Entity {
    Entity::class(air(local))
}

pub fn owner() -> UserId {
    UserId::new("alice")
}

/// A deterministic project owned by alice with `text` imported as revision 1.
pub fn project_with(text: &str) -> (Project, Env) {
    let env = Env::deterministic();
    let (mut project, _) = create_project(&env, &owner(), "Air").unwrap();
    project.execute(&env, &owner(), Command::Import { text: text.to_owned() }).unwrap();
    (project, env)
}

/// Independent replay: plain sets, no effectiveness checks.
pub fn fold(ontologies: &[OntologyId], revisions: &[Revision]) -> BTreeMap<OntologyId, BTreeSet<Axiom>> {
    let mut state: BTreeMap<OntologyId, BTreeSet<Axiom>> = ontologies.iter().map(|o| (o.clone(), BTreeSet::new())).collect();
    for rev in revisions {
        for op in &rev.changes {
            match op {
                ChangeOp::Add { ontology, axiom } => state.get_mut(ontology).unwrap().insert(axiom.clone()),
                ChangeOp::Remove { ontology, axiom } => state.get_mut(ontology).unwrap().remove(axiom),
            };
        }
    }
    state
}

pub fn as_sets(state: &ontoforge_core::changes::AxiomState) -> BTreeMap<OntologyId, BTreeSet<Axiom>> {
    state
        .ontology_ids()
        .map(|o| (o.clone(), state.axioms_of(o).unwrap().iter().cloned().collect()))
        .collect()
}
