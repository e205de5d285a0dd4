//! Classical DAG compression of a tree under `≃` or `≃_l`.
//!
//! Each vertex is a class of subtrees. An edge `(a, b, m)` says that the
//! representative of `a` has `m` children in class `b`.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::tree::{canonical_classes, LabeledTree, NodeId, Relation, SignatureRegistry};

/// Label given to every node rebuilt from a topological DAG.
pub const PLACEHOLDER_LABEL: &str = "·";

/// Largest tree [`decompress`] will build.
pub const DEFAULT_EXPANSION_LIMIT: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DagVertex {
    pub id: usize,
    #[serde(default)]
    pub class_code: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub repr: NodeId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DagEdge {
    pub from: usize,
    pub to: usize,
    pub mult: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dag {
    pub relation: Relation,
    pub vertices: Vec<DagVertex>,
    pub edges: Vec<DagEdge>,
    pub source: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DagStats {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub compaction_ratio: f64,
}

/// Vertices of a DAG numbered by first occurrence in preorder, so vertex 0 is
/// the source and each representative is the smallest preorder node of its
/// class. Returns the vertex of every node alongside.
pub(crate) fn class_vertices(t: &LabeledTree, codes: &[u32]) -> (Vec<usize>, Vec<NodeId>) {
    let mut vertex_of_code: HashMap<u32, usize> = HashMap::new();
    let mut vertex_of_node = vec![0usize; t.len()];
    let mut reprs = Vec::new();
    for id in t.preorder() {
        let next = reprs.len();
        let v = *vertex_of_code.entry(codes[id.0]).or_insert(next);
        if v == next {
            reprs.push(id);
        }
        vertex_of_node[id.0] = v;
    }
    (vertex_of_node, reprs)
}

/// `red_≃(t)` or `red_{≃_l}(t)`.
pub fn compress(t: &LabeledTree, relation: Relation) -> Dag {
    let mut reg = SignatureRegistry::new();
    compress_with(&mut reg, t, relation)
}

/// Like [`compress`] but with class codes from a caller-owned registry.
pub fn compress_with(reg: &mut SignatureRegistry, t: &LabeledTree, relation: Relation) -> Dag {
    let sig = canonical_classes(reg, t, relation);
    let (vertex_of_node, reprs) = class_vertices(t, &sig.codes);
    let mut vertices = Vec::with_capacity(reprs.len());
    let mut edges = Vec::new();
    for (v, &r) in reprs.iter().enumerate() {
        vertices.push(DagVertex {
            id: v,
            class_code: sig.codes[r.0],
            label: (relation == Relation::Label).then(|| t.label(r).to_owned()),
            repr: r,
        });
        let mut mult: Vec<(usize, usize)> = Vec::new();
        for &c in t.children(r) {
            let w = vertex_of_node[c.0];
            match mult.iter_mut().find(|(x, _)| *x == w) {
                Some(e) => e.1 += 1,
                None => mult.push((w, 1)),
            }
        }
        mult.sort_unstable();
        edges.extend(mult.into_iter().map(|(to, m)| DagEdge { from: v, to, mult: m }));
    }
    Dag {
        relation,
        vertices,
        edges,
        source: 0,
    }
}

impl Dag {
    /// Out-edges grouped per vertex, in storage order.
    fn adjacency(&self) -> Vec<Vec<DagEdge>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            adj[e.from].push(*e);
        }
        adj
    }

    /// Checks structure and returns a topological order starting at the
    /// source.
    pub fn validate(&self) -> Result<Vec<usize>, Error> {
        let n = self.vertices.len();
        if n == 0 {
            return Err(Error::InvalidDag("no vertices".into()));
        }
        if self.source >= n {
            return Err(Error::InvalidDag(format!("source {} out of range", self.source)));
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if v.id != i {
                return Err(Error::InvalidDag(format!("vertex at position {i} has id {}", v.id)));
            }
            match (self.relation, &v.label) {
                (Relation::Label, None) => {
                    return Err(Error::InvalidDag(format!("vertex {i} has no label")))
                }
                (Relation::Topo, Some(_)) => {
                    return Err(Error::InvalidDag(format!("topological vertex {i} has a label")))
                }
                _ => {}
            }
        }
        let mut indeg = vec![0usize; n];
        for e in &self.edges {
            if e.from >= n || e.to >= n {
                return Err(Error::InvalidDag(format!("edge {}->{} out of range", e.from, e.to)));
            }
            if e.mult == 0 {
                return Err(Error::InvalidDag(format!("edge {}->{} has multiplicity 0", e.from, e.to)));
            }
            indeg[e.to] += 1;
        }
        topo_order(n, self.source, &indeg, self.edges.iter().map(|e| (e.from, e.to)))
    }

    /// Size of the tree this DAG expands to, saturating at `usize::MAX`.
    pub fn expanded_size(&self) -> Result<usize, Error> {
        let order = self.validate()?;
        Ok(expanded_sizes(&order, &self.adjacency())[self.source])
    }
}

/// Kahn's algorithm; rejects cycles, extra sources and unreachable vertices.
pub(crate) fn topo_order(
    n: usize,
    source: usize,
    indeg: &[usize],
    edges: impl Iterator<Item = (usize, usize)> + Clone,
) -> Result<Vec<usize>, Error> {
    for (v, &d) in indeg.iter().enumerate() {
        if v == source && d != 0 {
            return Err(Error::InvalidDag("source has incoming edges".into()));
        }
        if v != source && d == 0 {
            return Err(Error::InvalidDag(format!("vertex {v} is a second source")));
        }
    }
    let mut out_adj = vec![Vec::new(); n];
    for (a, b) in edges {
        out_adj[a].push(b);
    }
    let mut indeg = indeg.to_vec();
    let mut order = Vec::with_capacity(n);
    let mut ready = vec![source];
    while let Some(v) = ready.pop() {
        order.push(v);
        for &w in &out_adj[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.push(w);
            }
        }
    }
    if order.len() != n {
        return Err(Error::InvalidDag("cycle detected".into()));
    }
    Ok(order)
}

fn expanded_sizes(order: &[usize], adj: &[Vec<DagEdge>]) -> Vec<usize> {
    let mut size = vec![1usize; adj.len()];
    for &v in order.iter().rev() {
        let mut s = 1usize;
        for e in &adj[v] {
            s = s.saturating_add(e.mult.saturating_mul(size[e.to]));
        }
        size[v] = s;
    }
    size
}

/// Rebuilds a tree from a DAG.
pub fn decompress(d: &Dag) -> Result<LabeledTree, Error> {
    decompress_limited(d, DEFAULT_EXPANSION_LIMIT)
}

pub fn decompress_limited(d: &Dag, limit: usize) -> Result<LabeledTree, Error> {
    let order = d.validate()?;
    let adj = d.adjacency();
    let total = expanded_sizes(&order, &adj)[d.source];
    if total > limit {
        return Err(Error::TooLarge { limit });
    }
    let label_of = |v: usize| -> String {
        d.vertices[v]
            .label
            .clone()
            .unwrap_or_else(|| PLACEHOLDER_LABEL.to_owned())
    };
    let mut tree = LabeledTree::leaf(label_of(d.source));
    let mut stack = vec![(d.source, NodeId::ROOT)];
    while let Some((v, node)) = stack.pop() {
        for e in &adj[v] {
            for _ in 0..e.mult {
                let c = tree.add_child(node, label_of(e.to));
                stack.push((e.to, c));
            }
        }
    }
    Ok(tree)
}

pub fn dag_stats(d: &Dag) -> DagStats {
    let vertex_count = d.vertices.len();
    let size = d.expanded_size().unwrap_or(0);
    DagStats {
        vertex_count,
        edge_count: d.edges.iter().map(|e| e.mult).sum(),
        compaction_ratio: if size == 0 {
            0.0
        } else {
            vertex_count as f64 / size as f64
        },
    }
}

pub fn dag_to_json(d: &Dag) -> String {
    serde_json::to_string_pretty(d).expect("DAG JSON is infallible")
}

pub fn dag_from_json(src: &str) -> Result<Dag, Error> {
    let d: Dag = serde_json::from_str(src)?;
    d.validate()?;
    Ok(d)
}

pub(crate) fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n")
}

pub fn dag_to_dot(d: &Dag) -> String {
    let mut out = String::from("digraph dag {\n");
    for v in &d.vertices {
        let name = v.label.as_deref().unwrap_or(PLACEHOLDER_LABEL);
        let _ = writeln!(out, "  v{} [label=\"{}\"];", v.id, dot_escape(name));
    }
    for e in &d.edges {
        let _ = writeln!(out, "  v{} -> v{} [label=\"{}\"];", e.from, e.to, e.mult);
    }
    out.push_str("}\n");
    out
}
