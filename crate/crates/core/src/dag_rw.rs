//! DAG compression up to label renaming (DAG-RW).
//!
//! Vertices are `∼`-classes of subtrees. Each vertex keeps the label of its
//! section node, and each edge carries the cipher from the labels of the
//! pointed vertex's section subtree to the labels of the actual child it
//! stands for. Labels are recovered by composing ciphers along the path from
//! the source, so the compression is lossless for `≃_l`.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Write;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::dag::{class_vertices, dot_escape, topo_order, DEFAULT_EXPANSION_LIMIT};
use crate::error::Error;
use crate::solver::{is_ciphering_isomorphic, SolveOptions, Verdict};
use crate::tree::{canonical_classes, LabeledTree, NodeId, Relation, SignatureRegistry};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Cipher {
    Identity,
    /// `(from, to)` pairs sorted by `from`.
    Table { table: Vec<(String, String)> },
}

impl Cipher {
    pub fn is_identity(&self) -> bool {
        match self {
            Cipher::Identity => true,
            Cipher::Table { table } => table.iter().all(|(a, b)| a == b),
        }
    }

    pub fn payload(&self) -> usize {
        match self {
            Cipher::Identity => 0,
            Cipher::Table { table } => table.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RwVertex {
    pub id: usize,
    pub label: String,
    /// Section node in the source tree.
    pub section: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RwEdge {
    pub from: usize,
    pub to: usize,
    pub cipher: Cipher,
}

/// Edges are stored grouped by `from`, in the child order of the section
/// node; parallel edges are kept apart since their ciphers may differ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DagRw {
    pub vertices: Vec<RwVertex>,
    pub edges: Vec<RwEdge>,
    pub source: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RwStats {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub cipher_payload: usize,
    pub identity_edge_count: usize,
}

/// Breadth-first order of the vertices of `red_≃`, distinct children taken
/// in first-occurrence order.
fn topo_bfs(t: &LabeledTree, vertex_of_node: &[usize], reprs: &[NodeId]) -> Vec<usize> {
    let mut seen = vec![false; reprs.len()];
    let mut order = Vec::with_capacity(reprs.len());
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(q) = queue.pop_front() {
        order.push(q);
        for &c in t.children(reprs[q]) {
            let w = vertex_of_node[c.0];
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    order
}

/// Representative, its subtree, and the members with their ciphers.
type Block = (NodeId, LabeledTree, Vec<(NodeId, Cipher)>);

/// Builds `red_∼(t)` from `red_≃(t)`.
///
/// Topological classes are processed by decreasing height, ties broken by
/// breadth-first order, so every parent class is final before its children
/// are split. `A_q` collects the children of class `q` under the section
/// nodes created so far, parents in creation order and children in tree
/// order; the first member of each `∼`-block is its representative.
///
/// With `step_limit`, a test that ends `Unknown` counts as not equivalent.
pub fn compress_rw(t: &LabeledTree, step_limit: Option<u64>) -> DagRw {
    let mut reg = SignatureRegistry::new();
    let topo = canonical_classes(&mut reg, t, Relation::Topo);
    let lab = canonical_classes(&mut reg, t, Relation::Label);
    let (class_of, reprs) = class_vertices(t, &topo.codes);
    let heights = t.subtree_heights();

    let bfs = topo_bfs(t, &class_of, &reprs);
    let mut bfs_rank = vec![0usize; reprs.len()];
    for (i, &q) in bfs.iter().enumerate() {
        bfs_rank[q] = i;
    }
    let mut order: Vec<usize> = (0..reprs.len()).collect();
    order.sort_by_key(|&q| (std::cmp::Reverse(heights[reprs[q].0]), bfs_rank[q]));

    let opts = SolveOptions { step_limit, trace: false };
    let mut vertices: Vec<RwVertex> = Vec::new();
    let mut vertex_of_section: HashMap<NodeId, usize> = HashMap::new();
    // (parent vertex, child position, target vertex, cipher)
    let mut raw_edges: Vec<(usize, usize, usize, Cipher)> = Vec::new();

    for q in order {
        let members: Vec<NodeId> = if q == class_of[t.root().0] {
            vec![t.root()]
        } else {
            vertices
                .iter()
                .flat_map(|p| t.children(p.section).iter().copied())
                .filter(|c| class_of[c.0] == q)
                .collect()
        };

        // blocks of A_q
        let mut blocks: Vec<Block> = Vec::new();
        for u in members {
            let mut placed = false;
            let mut sub_u: Option<LabeledTree> = None;
            for (rep, rep_tree, list) in blocks.iter_mut() {
                if lab.codes[rep.0] == lab.codes[u.0] {
                    list.push((u, Cipher::Identity));
                    placed = true;
                    break;
                }
                let sub = sub_u.get_or_insert_with(|| t.subtree(u));
                let r = is_ciphering_isomorphic(rep_tree, sub, opts);
                if r.verdict == Verdict::Isomorphic {
                    let table = r.cipher.expect("isomorphic result carries a cipher");
                    let c = if table.iter().all(|(a, b)| a == b) {
                        Cipher::Identity
                    } else {
                        Cipher::Table { table }
                    };
                    list.push((u, c));
                    placed = true;
                    break;
                }
            }
            if !placed {
                let sub = sub_u.unwrap_or_else(|| t.subtree(u));
                blocks.push((u, sub, vec![(u, Cipher::Identity)]));
            }
        }

        for (rep, _, list) in blocks {
            let id = vertices.len();
            vertices.push(RwVertex {
                id,
                label: t.label(rep).to_owned(),
                section: rep,
            });
            vertex_of_section.insert(rep, id);
            for (u, c) in list {
                if let Some(p) = t.parent(u) {
                    let from = vertex_of_section[&p];
                    let pos = t.children(p).iter().position(|&x| x == u).expect("child of parent");
                    raw_edges.push((from, pos, id, c));
                }
            }
        }
    }

    raw_edges.sort_by_key(|e| (e.0, e.1));
    DagRw {
        vertices,
        edges: raw_edges
            .into_iter()
            .map(|(from, _, to, cipher)| RwEdge { from, to, cipher })
            .collect(),
        source: 0,
    }
}

impl DagRw {
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.from].push(i);
        }
        adj
    }

    /// Checks structure, identity in-edges, cipher bijectivity and cipher
    /// domains. Returns a topological order from the source.
    pub fn validate(&self) -> Result<Vec<usize>, Error> {
        let bad = |m: String| Err(Error::InvalidDag(m));
        let n = self.vertices.len();
        if n == 0 {
            return bad("no vertices".into());
        }
        if self.source >= n {
            return bad(format!("source {} out of range", self.source));
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if v.id != i {
                return bad(format!("vertex at position {i} has id {}", v.id));
            }
        }
        let mut indeg = vec![0usize; n];
        let mut has_identity = vec![false; n];
        for e in &self.edges {
            if e.from >= n || e.to >= n {
                return bad(format!("edge {}->{} out of range", e.from, e.to));
            }
            indeg[e.to] += 1;
            has_identity[e.to] |= e.cipher.is_identity();
            if let Cipher::Table { table } = &e.cipher {
                let dom: HashSet<&str> = table.iter().map(|(a, _)| a.as_str()).collect();
                let img: HashSet<&str> = table.iter().map(|(_, b)| b.as_str()).collect();
                if dom.len() != table.len() || img.len() != table.len() {
                    return bad(format!("cipher on edge {}->{} is not a bijection", e.from, e.to));
                }
            }
        }
        let order = topo_order(n, self.source, &indeg, self.edges.iter().map(|e| (e.from, e.to)))?;
        if let Some(v) = (0..n).find(|&v| v != self.source && !has_identity[v]) {
            return bad(format!("vertex {v} has no identity in-edge"));
        }

        // alphabet of every section subtree, bottom-up
        let adj = self.adjacency();
        let mut alpha: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); n];
        for &v in order.iter().rev() {
            let mut set = BTreeSet::from([self.vertices[v].label.as_str()]);
            for &ei in &adj[v] {
                let e = &self.edges[ei];
                match &e.cipher {
                    Cipher::Identity => set.extend(alpha[e.to].iter().copied()),
                    Cipher::Table { table } => {
                        let dom: BTreeSet<&str> = table.iter().map(|(a, _)| a.as_str()).collect();
                        if dom != alpha[e.to] {
                            return bad(format!("cipher domain mismatch on edge {}->{}", e.from, e.to));
                        }
                        set.extend(table.iter().map(|(_, b)| b.as_str()));
                    }
                }
            }
            alpha[v] = set;
        }
        Ok(order)
    }

    /// Number of source-rooted paths, saturating.
    pub fn expanded_size(&self) -> Result<usize, Error> {
        let order = self.validate()?;
        Ok(path_counts(self, &order)[self.source])
    }

    /// Checks the section against the tree it was built from: the source is
    /// the root, every other section node is a child of the section of one
    /// of its parents, and out-degrees match child counts.
    pub fn check_against(&self, t: &LabeledTree) -> Result<(), Error> {
        let bad = |m: String| Err(Error::InvalidDag(m));
        let adj = self.adjacency();
        for v in &self.vertices {
            if v.section.0 >= t.len() {
                return bad(format!("section of vertex {} out of range", v.id));
            }
            if t.label(v.section) != v.label {
                return bad(format!("vertex {} label differs from its section", v.id));
            }
            if adj[v.id].len() != t.children(v.section).len() {
                return bad(format!("vertex {} out-degree differs from its section", v.id));
            }
        }
        if self.vertices[self.source].section != t.root() {
            return bad("source section is not the root".into());
        }
        for v in &self.vertices {
            if v.id == self.source {
                continue;
            }
            let parent = t.parent(v.section);
            let ok = self
                .edges
                .iter()
                .any(|e| e.to == v.id && Some(self.vertices[e.from].section) == parent);
            if !ok {
                return bad(format!("section of vertex {} is not a child of a parent section", v.id));
            }
        }
        Ok(())
    }
}

fn path_counts(d: &DagRw, order: &[usize]) -> Vec<usize> {
    let adj = d.adjacency();
    let mut size = vec![1usize; d.vertices.len()];
    for &v in order.iter().rev() {
        size[v] = adj[v]
            .iter()
            .fold(1usize, |s, &ei| s.saturating_add(size[d.edges[ei].to]));
    }
    size
}

/// Composed cipher along a path; `None` is the identity.
type Composed = Option<Rc<HashMap<u32, u32>>>;

pub fn decompress_rw(d: &DagRw) -> Result<LabeledTree, Error> {
    decompress_rw_limited(d, DEFAULT_EXPANSION_LIMIT)
}

pub fn decompress_rw_limited(d: &DagRw, limit: usize) -> Result<LabeledTree, Error> {
    let order = d.validate()?;
    if path_counts(d, &order)[d.source] > limit {
        return Err(Error::TooLarge { limit });
    }
    let mut names: Vec<String> = Vec::new();
    let mut ids: HashMap<String, u32> = HashMap::new();
    let mut intern = |s: &str| -> u32 {
        if let Some(&i) = ids.get(s) {
            return i;
        }
        names.push(s.to_owned());
        ids.insert(s.to_owned(), names.len() as u32 - 1);
        names.len() as u32 - 1
    };
    let vlabel: Vec<u32> = d.vertices.iter().map(|v| intern(&v.label)).collect();
    let tables: Vec<Option<Vec<(u32, u32)>>> = d
        .edges
        .iter()
        .map(|e| match &e.cipher {
            Cipher::Identity => None,
            Cipher::Table { table } => Some(table.iter().map(|(a, b)| (intern(a), intern(b))).collect()),
        })
        .collect();
    let adj = d.adjacency();
    let apply = |c: &Composed, x: u32| -> u32 {
        match c {
            None => x,
            Some(m) => m[&x],
        }
    };

    let mut tree = LabeledTree::leaf(names[vlabel[d.source] as usize].clone());
    let mut stack: Vec<(usize, NodeId, Composed)> = vec![(d.source, NodeId::ROOT, None)];
    let mut pending: Vec<(usize, NodeId, Composed)> = Vec::new();
    while let Some((v, node, comp)) = stack.pop() {
        for &ei in &adj[v] {
            let e = &d.edges[ei];
            let child_comp = match &tables[ei] {
                None => comp.clone(),
                Some(t) => Some(Rc::new(t.iter().map(|&(a, b)| (a, apply(&comp, b))).collect())),
            };
            let label = apply(&child_comp, vlabel[e.to]);
            let c = tree.add_child(node, names[label as usize].clone());
            pending.push((e.to, c, child_comp));
        }
        // children in storage order, so pop them last-first
        stack.extend(pending.drain(..).rev());
    }
    Ok(tree.to_preorder())
}

pub fn rw_stats(d: &DagRw) -> RwStats {
    RwStats {
        vertex_count: d.vertices.len(),
        edge_count: d.edges.len(),
        cipher_payload: d.edges.iter().map(|e| e.cipher.payload()).sum(),
        identity_edge_count: d.edges.iter().filter(|e| e.cipher == Cipher::Identity).count(),
    }
}

pub fn rw_to_json(d: &DagRw) -> String {
    serde_json::to_string_pretty(d).expect("DAG-RW JSON is infallible")
}

pub fn rw_from_json(src: &str) -> Result<DagRw, Error> {
    let d: DagRw = serde_json::from_str(src)?;
    d.validate()?;
    Ok(d)
}

pub fn rw_to_dot(d: &DagRw) -> String {
    let mut out = String::from("digraph dag_rw {\n");
    for v in &d.vertices {
        let _ = writeln!(out, "  v{} [label=\"{}\"];", v.id, dot_escape(&v.label));
    }
    for e in &d.edges {
        let label = match &e.cipher {
            Cipher::Identity => "id".to_owned(),
            Cipher::Table { table } => table
                .iter()
                .map(|(a, b)| format!("{a}→{b}"))
                .collect::<Vec<_>>()
                .join(";"),
        };
        let _ = writeln!(out, "  v{} -> v{} [label=\"{}\"];", e.from, e.to, dot_escape(&label));
    }
    out.push_str("}\n");
    out
}
