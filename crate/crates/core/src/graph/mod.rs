//! Entity neighborhood graphs with typed edges.

mod export;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::changes::AxiomState;
use crate::criteria::EntityIndex;
use crate::ontology::{Axiom, ClassExpression, Entity, EntityKind, Iri};

pub use export::{export_graph, ExportFormat};

pub const DEFAULT_DEPTH: usize = 2;
pub const MAX_NODES: usize = 500;
pub const MAX_PATH_LENGTH: usize = 10;
pub const LAYER_SPACING: i64 = 220;
pub const ROW_SPACING: i64 = 70;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("unknown entity {0:?}")]
    UnknownEntity(Entity),
    #[error("graph exceeds {MAX_NODES} nodes")]
    TooLarge,
    #[error("depth must be at least 1")]
    InvalidDepth,
    #[error("the root node cannot be hidden")]
    CannotHideRoot,
    #[error("no layout position for {0:?}")]
    MissingLayout(Entity),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum EdgeKind {
    SubClassOf,
    InstanceOf,
    Property { label: String, property: Iri },
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct GraphEdge {
    pub source: Entity,
    pub target: Entity,
    #[serde(flatten)]
    pub kind: EdgeKind,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EntityGraph {
    pub root: Entity,
    pub nodes: BTreeSet<Entity>,
    pub edges: BTreeSet<GraphEdge>,
    pub display_names: BTreeMap<Iri, String>,
}

impl EntityGraph {
    fn single(root: Entity, display_names: &BTreeMap<Iri, String>) -> Self {
        let names = display_names.get(&root.iri).map(|n| (root.iri.clone(), n.clone())).into_iter().collect();
        EntityGraph { nodes: BTreeSet::from([root.clone()]), root, edges: BTreeSet::new(), display_names: names }
    }

    pub fn display_name(&self, e: &Entity) -> String {
        self.display_names.get(&e.iri).cloned().unwrap_or_else(|| format!("<{}>", e.iri))
    }

    fn restrict_names(&mut self) {
        let keep: BTreeSet<&Iri> = self.nodes.iter().map(|n| &n.iri).collect();
        self.display_names.retain(|iri, _| keep.contains(iri));
    }

    /// Undirected adjacency: neighbor lists with the edges joining them.
    fn adjacency(&self) -> BTreeMap<&Entity, BTreeMap<&Entity, Vec<&GraphEdge>>> {
        let mut adj: BTreeMap<&Entity, BTreeMap<&Entity, Vec<&GraphEdge>>> = BTreeMap::new();
        for n in &self.nodes {
            adj.entry(n).or_default();
        }
        for e in &self.edges {
            adj.entry(&e.source).or_default().entry(&e.target).or_default().push(e);
            if e.source != e.target {
                adj.entry(&e.target).or_default().entry(&e.source).or_default().push(e);
            }
        }
        adj
    }
}

/// Every edge derivable from `axioms`.
pub fn derive_edges<'a>(axioms: impl IntoIterator<Item = &'a Axiom>, index: &EntityIndex) -> BTreeSet<GraphEdge> {
    let class = |iri: &Iri| Entity::new(EntityKind::Class, iri.clone());
    let individual = |iri: &Iri| Entity::new(EntityKind::NamedIndividual, iri.clone());
    let property = |p: &Iri| EdgeKind::Property { label: index.display_name(p), property: p.clone() };
    axioms
        .into_iter()
        .filter_map(|ax| {
            let (source, target, kind) = match ax {
                Axiom::SubClassOf { sub: ClassExpression::Named(a), sup: ClassExpression::Named(b) } => {
                    (class(a), class(b), EdgeKind::SubClassOf)
                }
                Axiom::SubClassOf { sub: ClassExpression::Named(a), sup: ClassExpression::SomeValuesFrom { property: p, filler } } => {
                    (class(a), class(filler.named()?), property(p))
                }
                Axiom::ClassAssertion { class: ClassExpression::Named(c), individual: i } => {
                    (individual(i), class(c), EdgeKind::InstanceOf)
                }
                Axiom::ObjectPropertyAssertion { property: p, source, target } => {
                    (individual(source), individual(target), property(p))
                }
                _ => return None,
            };
            Some(GraphEdge { source, target, kind })
        })
        .collect()
}

/// Breadth-first neighborhood of `root`, following edges in both directions.
pub fn build_graph(state: &AxiomState, index: &EntityIndex, root: &Entity, depth: usize) -> Result<EntityGraph, GraphError> {
    if depth == 0 {
        return Err(GraphError::InvalidDepth);
    }
    if !index.contains(root) {
        return Err(GraphError::UnknownEntity(root.clone()));
    }
    let all = derive_edges(state.all_axioms(), index);
    let mut adj: BTreeMap<&Entity, BTreeSet<&Entity>> = BTreeMap::new();
    for e in &all {
        adj.entry(&e.source).or_default().insert(&e.target);
        adj.entry(&e.target).or_default().insert(&e.source);
    }
    let mut nodes = BTreeSet::from([root.clone()]);
    let mut frontier = vec![root];
    for _ in 0..depth {
        let mut next = Vec::new();
        for n in frontier {
            for m in adj.get(n).into_iter().flatten() {
                if nodes.insert((*m).clone()) {
                    if nodes.len() > MAX_NODES {
                        return Err(GraphError::TooLarge);
                    }
                    next.push(*m);
                }
            }
        }
        frontier = next;
    }
    let edges = all.into_iter().filter(|e| nodes.contains(&e.source) && nodes.contains(&e.target)).collect();
    let display_names = nodes.iter().map(|n| (n.iri.clone(), index.display_name(&n.iri))).collect();
    Ok(EntityGraph { root: root.clone(), nodes, edges, display_names })
}

/// Union of all simple paths between `a` and `b` with at most
/// [`MAX_PATH_LENGTH`] edges, traversing edges in either direction.
pub fn isolate_paths(g: &EntityGraph, a: &Entity, b: &Entity) -> Result<EntityGraph, GraphError> {
    for n in [a, b] {
        if !g.nodes.contains(n) {
            return Err(GraphError::UnknownEntity(n.clone()));
        }
    }
    let single = EntityGraph::single(a.clone(), &g.display_names);
    if a == b {
        return Ok(single);
    }
    let adj = g.adjacency();
    // hop distance to b, used to cut branches that cannot reach b in time
    let mut dist: BTreeMap<&Entity, usize> = BTreeMap::from([(b, 0)]);
    let mut queue = VecDeque::from([b]);
    while let Some(n) = queue.pop_front() {
        let d = dist[n];
        for m in adj[n].keys() {
            if !dist.contains_key(m) {
                dist.insert(m, d + 1);
                queue.push_back(m);
            }
        }
    }
    let mut keep: BTreeSet<&GraphEdge> = BTreeSet::new();
    let mut path: Vec<&Entity> = vec![a];
    let mut on_path: BTreeSet<&Entity> = BTreeSet::from([a]);
    let mut ctx = Search { adj: &adj, dist: &dist, target: b, keep: &mut keep };
    ctx.walk(&mut path, &mut on_path);
    if keep.is_empty() {
        return Ok(single);
    }
    let edges: BTreeSet<GraphEdge> = keep.into_iter().cloned().collect();
    let nodes = edges.iter().flat_map(|e| [e.source.clone(), e.target.clone()]).collect();
    let mut out = EntityGraph { root: a.clone(), nodes, edges, display_names: g.display_names.clone() };
    out.restrict_names();
    Ok(out)
}

type Adjacency<'g> = BTreeMap<&'g Entity, BTreeMap<&'g Entity, Vec<&'g GraphEdge>>>;

struct Search<'g, 's> {
    adj: &'s Adjacency<'g>,
    dist: &'s BTreeMap<&'g Entity, usize>,
    target: &'g Entity,
    keep: &'s mut BTreeSet<&'g GraphEdge>,
}

impl<'g> Search<'g, '_> {
    fn walk(&mut self, path: &mut Vec<&'g Entity>, on_path: &mut BTreeSet<&'g Entity>) {
        let here = *path.last().expect("path starts at a");
        let used = path.len() - 1;
        for &next in self.adj[here].keys() {
            if on_path.contains(next) {
                continue;
            }
            match self.dist.get(next) {
                Some(d) if used + 1 + d <= MAX_PATH_LENGTH => {}
                _ => continue,
            }
            path.push(next);
            if next == self.target {
                for pair in path.windows(2) {
                    self.keep.extend(self.adj[pair[0]][pair[1]].iter().copied());
                }
            } else {
                on_path.insert(next);
                self.walk(path, on_path);
                on_path.remove(next);
            }
            path.pop();
        }
    }
}

/// Drops `hidden` nodes and their incident edges.
pub fn hide_nodes(g: &EntityGraph, hidden: &BTreeSet<Entity>) -> Result<EntityGraph, GraphError> {
    if hidden.contains(&g.root) {
        return Err(GraphError::CannotHideRoot);
    }
    let mut out = g.clone();
    out.nodes.retain(|n| !hidden.contains(n));
    out.edges.retain(|e| !hidden.contains(&e.source) && !hidden.contains(&e.target));
    out.restrict_names();
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

pub type Layout = BTreeMap<Entity, Point>;

/// Layer = undirected hop distance from the root; unreachable nodes share the
/// layer after the deepest one. Rows within a layer follow display name.
pub fn layout_graph(g: &EntityGraph) -> Layout {
    let adj = g.adjacency();
    let mut layer: BTreeMap<&Entity, usize> = BTreeMap::new();
    if g.nodes.contains(&g.root) {
        layer.insert(&g.root, 0);
        let mut queue = VecDeque::from([&g.root]);
        while let Some(n) = queue.pop_front() {
            let d = layer[n];
            for m in adj[n].keys() {
                if !layer.contains_key(m) {
                    layer.insert(m, d + 1);
                    queue.push_back(m);
                }
            }
        }
    }
    let spill = layer.values().max().map_or(0, |m| m + 1);
    let mut layers: BTreeMap<usize, Vec<(String, &Entity)>> = BTreeMap::new();
    for n in &g.nodes {
        let l = layer.get(n).copied().unwrap_or(spill);
        layers.entry(l).or_default().push((g.display_name(n), n));
    }
    let mut out = Layout::new();
    for (l, mut members) in layers {
        members.sort();
        for (row, (_, n)) in members.into_iter().enumerate() {
            out.insert(n.clone(), Point { x: l as i64 * LAYER_SPACING, y: row as i64 * ROW_SPACING });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(name: &str) -> Entity {
        Entity::class(Iri::new(format!("http://ex.org/{name}")).unwrap())
    }

    fn chain() -> EntityGraph {
        let edge = |a: &str, b: &str| GraphEdge { source: c(a), target: c(b), kind: EdgeKind::SubClassOf };
        EntityGraph {
            root: c("A"),
            nodes: [c("A"), c("B"), c("C")].into(),
            edges: [edge("A", "B"), edge("B", "C")].into(),
            display_names: BTreeMap::new(),
        }
    }

    #[test]
    fn hiding() {
        let g = chain();
        assert_eq!(hide_nodes(&g, &BTreeSet::new()).unwrap(), g);
        let h = hide_nodes(&g, &BTreeSet::from([c("B")])).unwrap();
        assert_eq!(h.nodes, BTreeSet::from([c("A"), c("C")]));
        assert!(h.edges.is_empty());
        assert_eq!(hide_nodes(&g, &BTreeSet::from([c("A")])), Err(GraphError::CannotHideRoot));
        let layout = layout_graph(&h);
        assert_eq!(layout[&c("C")], Point { x: LAYER_SPACING, y: 0 });
    }

    #[test]
    fn isolate_trivial_cases() {
        let g = chain();
        let same = isolate_paths(&g, &c("B"), &c("B")).unwrap();
        assert_eq!((same.nodes.len(), same.edges.len()), (1, 0));
        let whole = isolate_paths(&g, &c("C"), &c("A")).unwrap();
        assert_eq!((whole.nodes.len(), whole.edges.len()), (3, 2));
        let cut = hide_nodes(&g, &BTreeSet::from([c("B")])).unwrap();
        let none = isolate_paths(&cut, &c("A"), &c("C")).unwrap();
        assert_eq!(none.nodes, BTreeSet::from([c("A")]));
        assert!(matches!(isolate_paths(&g, &c("A"), &c("Z")), Err(GraphError::UnknownEntity(_))));
    }

    #[test]
    fn edge_json_shape() {
        let e = GraphEdge {
            source: c("A"),
            target: c("B"),
            kind: EdgeKind::Property { label: "hasEngine".into(), property: Iri::new("http://ex.org/hasEngine").unwrap() },
        };
        let json = serde_json::to_value(&e).unwrap();
        assert_eq!(json["kind"], "Property");
        assert_eq!(json["label"], "hasEngine");
        assert_eq!(serde_json::from_value::<GraphEdge>(json).unwrap(), e);
    }
}
