use std::collections::BTreeMap;
use std::fmt::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{EdgeKind, EntityGraph, GraphError, Layout, Point};
use crate::collab::escape;
use crate::ontology::Entity;

const NODE_WIDTH: i64 = 180;
const NODE_HEIGHT: i64 = 40;
const MARGIN: i64 = 20;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Dot,
    Svg,
}

impl ExportFormat {
    pub fn media_type(self) -> &'static str {
        match self {
            ExportFormat::Dot => "text/vnd.graphviz",
            ExportFormat::Svg => "image/svg+xml",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dot" => Ok(ExportFormat::Dot),
            "svg" => Ok(ExportFormat::Svg),
            other => Err(format!("unknown export format '{other}'")),
        }
    }
}

pub fn export_graph(g: &EntityGraph, layout: &Layout, format: ExportFormat) -> Result<String, GraphError> {
    match format {
        ExportFormat::Dot => Ok(to_dot(g)),
        ExportFormat::Svg => to_svg(g, layout),
    }
}

fn dot_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Node ids are IRIs; punned IRIs get the kind appended.
fn dot_ids(g: &EntityGraph) -> BTreeMap<&Entity, String> {
    let mut per_iri: BTreeMap<&str, usize> = BTreeMap::new();
    for n in &g.nodes {
        *per_iri.entry(n.iri.as_str()).or_default() += 1;
    }
    g.nodes
        .iter()
        .map(|n| {
            let id = if per_iri[n.iri.as_str()] > 1 { format!("{} ({})", n.iri, n.kind) } else { n.iri.to_string() };
            (n, dot_string(&id))
        })
        .collect()
}

fn to_dot(g: &EntityGraph) -> String {
    let ids = dot_ids(g);
    let mut out = String::from("digraph entity_graph {\n    rankdir=LR;\n    node [shape=box];\n");
    for n in &g.nodes {
        writeln!(out, "    {} [label={}];", ids[n], dot_string(&g.display_name(n))).unwrap();
    }
    for e in &g.edges {
        let attrs = match &e.kind {
            EdgeKind::SubClassOf => String::new(),
            EdgeKind::InstanceOf => " [style=dashed]".to_owned(),
            EdgeKind::Property { label, .. } => format!(" [label={}]", dot_string(label)),
        };
        writeln!(out, "    {} -> {}{};", ids[&e.source], ids[&e.target], attrs).unwrap();
    }
    out.push_str("}\n");
    out
}

fn to_svg(g: &EntityGraph, layout: &Layout) -> Result<String, GraphError> {
    let pos = |n: &Entity| layout.get(n).copied().ok_or_else(|| GraphError::MissingLayout(n.clone()));
    let mut width = 0;
    let mut height = 0;
    for n in &g.nodes {
        let Point { x, y } = pos(n)?;
        width = width.max(x + NODE_WIDTH);
        height = height.max(y + NODE_HEIGHT);
    }
    let (width, height) = (width + 2 * MARGIN, height + 2 * MARGIN);
    let centre = |p: Point| (p.x + MARGIN + NODE_WIDTH / 2, p.y + MARGIN + NODE_HEIGHT / 2);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    )
    .unwrap();
    out.push_str("  <g class=\"edges\" stroke=\"#555\" stroke-width=\"1.5\">\n");
    for e in &g.edges {
        let (x1, y1) = centre(pos(&e.source)?);
        let (x2, y2) = centre(pos(&e.target)?);
        let dash = if e.kind == EdgeKind::InstanceOf { r#" stroke-dasharray="6,4""# } else { "" };
        writeln!(out, r#"    <line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"{dash}/>"#).unwrap();
        if let EdgeKind::Property { label, .. } = &e.kind {
            writeln!(
                out,
                r##"    <text x="{}" y="{}" font-size="11" text-anchor="middle" stroke="none" fill="#333">{}</text>"##,
                (x1 + x2) / 2,
                (y1 + y2) / 2 - 4,
                escape(label)
            )
            .unwrap();
        }
    }
    out.push_str("  </g>\n  <g class=\"nodes\" font-family=\"sans-serif\" font-size=\"12\">\n");
    for n in &g.nodes {
        let p = pos(n)?;
        let (cx, cy) = centre(p);
        let fill = if *n == g.root { "#ffe9a8" } else { "#eef3fb" };
        writeln!(
            out,
            r##"    <rect x="{}" y="{}" width="{NODE_WIDTH}" height="{NODE_HEIGHT}" rx="4" fill="{fill}" stroke="#4a6fa5"/>"##,
            p.x + MARGIN,
            p.y + MARGIN
        )
        .unwrap();
        writeln!(out, r#"    <text x="{cx}" y="{}" text-anchor="middle">{}</text>"#, cy + 4, escape(&g.display_name(n))).unwrap();
    }
    out.push_str("  </g>\n</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::graph::{layout_graph, GraphEdge};
    use crate::ontology::{EntityKind, Iri};

    #[test]
    fn punned_iris_get_distinct_ids() {
        let iri = Iri::new("http://ex.org/X").unwrap();
        let a = Entity::class(iri.clone());
        let b = Entity::new(EntityKind::NamedIndividual, iri);
        let g = EntityGraph {
            root: a.clone(),
            nodes: [a.clone(), b.clone()].into(),
            edges: BTreeSet::from([GraphEdge { source: b, target: a, kind: EdgeKind::InstanceOf }]),
            display_names: BTreeMap::new(),
        };
        let dot = export_graph(&g, &Layout::new(), ExportFormat::Dot).unwrap();
        assert!(dot.contains("\"http://ex.org/X (NamedIndividual)\" -> \"http://ex.org/X (Class)\" [style=dashed];"), "{dot}");
        assert!(matches!(export_graph(&g, &Layout::new(), ExportFormat::Svg), Err(GraphError::MissingLayout(_))));
        let svg = export_graph(&g, &layout_graph(&g), ExportFormat::Svg).unwrap();
        assert!(svg.contains("stroke-dasharray"));
    }
}
