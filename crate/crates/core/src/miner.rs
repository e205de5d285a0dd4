//! Frequent subtree patterns over a dataset of trees.
//!
//! The dataset is hung under one synthetic root and compressed as a whole;
//! each vertex of the compressed structure is a pattern. The set of dataset
//! indices containing a pattern is pushed down from the root's children in
//! one top-down pass.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::dag::{compress_with, PLACEHOLDER_LABEL};
use crate::dag_rw::compress_rw;
use crate::error::Error;
use crate::solver::IsoRelation;
use crate::text::serialize_tree;
use crate::tree::{canonical_classes, LabeledTree, NodeId, Relation, SignatureRegistry};

pub const SUPER_ROOT_LABEL: &str = "⊤";
const ESCAPE: char = '\\';

pub fn escape_label(l: &str) -> String {
    if l == SUPER_ROOT_LABEL || l.starts_with(ESCAPE) {
        format!("{ESCAPE}{l}")
    } else {
        l.to_owned()
    }
}

pub fn unescape_label(l: &str) -> String {
    l.strip_prefix(ESCAPE).unwrap_or(l).to_owned()
}

/// The dataset's trees as children of one `⊤` root. Child `i` of the root
/// is dataset tree `i`; data labels are escaped so none equals `⊤`.
#[derive(Debug, Clone)]
pub struct SuperTree {
    pub tree: LabeledTree,
    /// Root node of each dataset tree.
    pub roots: Vec<NodeId>,
}

impl SuperTree {
    pub fn new(dataset: &[LabeledTree]) -> Result<Self, Error> {
        if dataset.is_empty() {
            return Err(Error::InvalidArgument("empty dataset".into()));
        }
        let escaped: Vec<LabeledTree> = dataset.iter().map(|t| t.map_labels(escape_label)).collect();
        let tree = LabeledTree::join(SUPER_ROOT_LABEL, &escaped);
        let roots = tree.children(tree.root()).to_vec();
        Ok(SuperTree { tree, roots })
    }

    pub fn dataset_size(&self) -> usize {
        self.roots.len()
    }
}

/// Compressed super-tree with origin sets.
#[derive(Debug, Clone)]
pub struct PatternGraph {
    pub relation: IsoRelation,
    pub super_tree: SuperTree,
    /// Representative node of each vertex in the super-tree.
    pub reprs: Vec<NodeId>,
    /// One `(from, to)` per distinct edge.
    pub edges: Vec<(usize, usize)>,
    pub source: usize,
    /// Sorted dataset indices per vertex; empty at the source.
    pub origins: Vec<Vec<usize>>,
}

impl PatternGraph {
    pub fn build(dataset: &[LabeledTree], relation: IsoRelation, step_limit: Option<u64>) -> Result<Self, Error> {
        let st = SuperTree::new(dataset)?;
        let t = &st.tree;
        // vertex of each dataset root, plus representatives and edges
        let (reprs, mut edges, root_vertex): (Vec<NodeId>, Vec<(usize, usize)>, Vec<usize>) = match relation {
            IsoRelation::Topo | IsoRelation::Label => {
                let rel = if relation == IsoRelation::Topo { Relation::Topo } else { Relation::Label };
                let mut reg = SignatureRegistry::new();
                let dag = compress_with(&mut reg, t, rel);
                let codes = canonical_classes(&mut reg, t, rel).codes;
                let vertex_of_code: std::collections::HashMap<u32, usize> =
                    dag.vertices.iter().map(|v| (v.class_code, v.id)).collect();
                let roots = st.roots.iter().map(|r| vertex_of_code[&codes[r.0]]).collect();
                (
                    dag.vertices.iter().map(|v| v.repr).collect(),
                    dag.edges.iter().map(|e| (e.from, e.to)).collect(),
                    roots,
                )
            }
            IsoRelation::Cipher => {
                let d = compress_rw(t, step_limit);
                // edges out of the source follow the root's child order
                let roots = d.edges.iter().filter(|e| e.from == d.source).map(|e| e.to).collect();
                (
                    d.vertices.iter().map(|v| v.section).collect(),
                    d.edges.iter().map(|e| (e.from, e.to)).collect(),
                    roots,
                )
            }
        };
        edges.sort_unstable();
        edges.dedup();
        let n = reprs.len();
        let source = 0;

        let mut sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (i, &v) in root_vertex.iter().enumerate() {
            sets[v].insert(i);
        }
        let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(a, b) in &edges {
            out_edges[a].push(b);
        }
        let mut indeg = vec![0usize; n];
        for &(_, b) in &edges {
            indeg[b] += 1;
        }
        // Kahn's order so every parent is final before its children
        let mut ready = vec![source];
        let mut topo = Vec::with_capacity(n);
        while let Some(v) = ready.pop() {
            topo.push(v);
            for &w in &out_edges[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    ready.push(w);
                }
            }
        }
        debug_assert_eq!(topo.len(), n);
        for &p in &topo {
            if p == source {
                continue;
            }
            let from = std::mem::take(&mut sets[p]);
            for &q in &out_edges[p] {
                sets[q].extend(from.iter().copied());
            }
            sets[p] = from;
        }
        Ok(PatternGraph {
            relation,
            super_tree: st,
            reprs,
            edges,
            source,
            origins: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
        })
    }

    /// Pattern text of a vertex: its representative subtree with data labels
    /// restored, or placeholder labels for topological patterns.
    pub fn pattern(&self, v: usize) -> LabeledTree {
        let sub = self.super_tree.tree.subtree(self.reprs[v]);
        match self.relation {
            IsoRelation::Topo => sub.map_labels(|_| PLACEHOLDER_LABEL.to_owned()),
            _ => sub.map_labels(unescape_label),
        }
    }

    /// Vertices other than the source.
    pub fn pattern_count(&self) -> usize {
        self.reprs.len() - 1
    }

    pub fn frequency(&self, v: usize) -> f64 {
        self.origins[v].len() as f64 / self.super_tree.dataset_size() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternEntry {
    pub pattern: String,
    pub size: usize,
    pub origin: Vec<usize>,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternReport {
    pub relation: IsoRelation,
    pub min_support: f64,
    pub dataset_size: usize,
    /// Sorted by frequency desc, size desc, pattern text asc.
    pub entries: Vec<PatternEntry>,
}

fn check_support(min_support: f64) -> Result<(), Error> {
    if min_support > 0.0 && min_support <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("min_support {min_support} outside (0, 1]")))
    }
}

/// Patterns whose dataset frequency is at least `min_support`.
pub fn mine(
    dataset: &[LabeledTree],
    relation: IsoRelation,
    min_support: f64,
    step_limit: Option<u64>,
) -> Result<PatternReport, Error> {
    check_support(min_support)?;
    let g = PatternGraph::build(dataset, relation, step_limit)?;
    Ok(report_from(&g, min_support))
}

fn is_frequent(g: &PatternGraph, v: usize, min_support: f64) -> bool {
    // small slack so 0.05 of 20 trees keeps a pattern seen once
    g.frequency(v) >= min_support - 1e-12
}

pub fn report_from(g: &PatternGraph, min_support: f64) -> PatternReport {
    let sizes = g.super_tree.tree.subtree_sizes();
    let mut entries: Vec<PatternEntry> = (0..g.reprs.len())
        .filter(|&v| v != g.source && is_frequent(g, v, min_support))
        .map(|v| PatternEntry {
            pattern: serialize_tree(&g.pattern(v)),
            size: sizes[g.reprs[v].0],
            origin: g.origins[v].clone(),
            frequency: g.frequency(v),
        })
        .collect();
    entries.sort_by(|a, b| {
        b.origin
            .len()
            .cmp(&a.origin.len())
            .then(b.size.cmp(&a.size))
            .then_with(|| a.pattern.cmp(&b.pattern))
    });
    PatternReport {
        relation: g.relation,
        min_support,
        dataset_size: g.super_tree.dataset_size(),
        entries,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PatternCounts {
    pub topo: usize,
    pub cipher: usize,
    pub label: usize,
}

/// Distinct patterns per relation.
pub fn pattern_counts(dataset: &[LabeledTree], step_limit: Option<u64>) -> Result<PatternCounts, Error> {
    let count = |r| PatternGraph::build(dataset, r, step_limit).map(|g| g.pattern_count());
    Ok(PatternCounts {
        topo: count(IsoRelation::Topo)?,
        cipher: count(IsoRelation::Cipher)?,
        label: count(IsoRelation::Label)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub relation: IsoRelation,
    pub patterns: usize,
    pub frequent_patterns: usize,
}

/// Pattern and frequent-pattern counts for each relation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiningSummary {
    pub dataset_size: usize,
    pub min_support: f64,
    pub rows: Vec<SummaryRow>,
}

pub fn summarize(dataset: &[LabeledTree], min_support: f64, step_limit: Option<u64>) -> Result<MiningSummary, Error> {
    check_support(min_support)?;
    let mut rows = Vec::new();
    for relation in [IsoRelation::Topo, IsoRelation::Cipher, IsoRelation::Label] {
        let g = PatternGraph::build(dataset, relation, step_limit)?;
        let frequent = (0..g.reprs.len())
            .filter(|&v| v != g.source && is_frequent(&g, v, min_support))
            .count();
        rows.push(SummaryRow {
            relation,
            patterns: g.pattern_count(),
            frequent_patterns: frequent,
        });
    }
    Ok(MiningSummary {
        dataset_size: dataset.len(),
        min_support,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_tree;

    fn trees(src: &[&str]) -> Vec<LabeledTree> {
        src.iter().map(|s| parse_tree(s).unwrap()).collect()
    }

    #[test]
    fn escaping_round_trip() {
        for l in ["⊤", "\\", "\\⊤", "a", "", "⊤⊤"] {
            let e = escape_label(l);
            assert_ne!(e, SUPER_ROOT_LABEL);
            assert_eq!(unescape_label(&e), l);
        }
    }

    #[test]
    fn scaled_pair_pair_under_cipher() {
        let d = trees(&["1(2(3,4),4(9,16),3(3,4))", "2(4(6,8),8(18,32),6(6,8))"]);
        let r = mine(&d, IsoRelation::Cipher, 1.0, None).unwrap();
        assert_eq!(r.entries[0].size, 10);
        assert!(r.entries.iter().all(|e| e.frequency == 1.0));
        let label = mine(&d, IsoRelation::Label, 1.0, None).unwrap();
        assert!(label.entries.is_empty());
    }

    #[test]
    fn reserved_label_is_escaped() {
        let d = trees(&["\"⊤\"(a)", "b(\"⊤\")"]);
        let r = mine(&d, IsoRelation::Label, 0.5, None).unwrap();
        assert!(r.entries.iter().any(|e| e.pattern == "\"⊤\"(a)"));
        assert!(r.entries.iter().all(|e| !e.pattern.contains("\\")));
    }

    #[test]
    fn leaf_pattern_everywhere() {
        let d = trees(&["a(b,c)", "x", "y(y(y))"]);
        for rel in [IsoRelation::Topo, IsoRelation::Cipher] {
            let r = mine(&d, rel, 1.0, None).unwrap();
            assert_eq!(r.entries.len(), 1);
            assert_eq!(r.entries[0].size, 1);
        }
        let c = pattern_counts(&d, None).unwrap();
        assert!(c.topo <= c.cipher && c.cipher <= c.label);
        assert!(mine(&[], IsoRelation::Topo, 0.5, None).is_err());
        assert!(mine(&d, IsoRelation::Topo, 0.0, None).is_err());
    }

    #[test]
    fn summary_rows() {
        let d = trees(&["a(b,b)", "c(d,d)", "a(b)"]);
        let s = summarize(&d, 0.5, None).unwrap();
        let rows: Vec<(usize, usize)> = s.rows.iter().map(|r| (r.patterns, r.frequent_patterns)).collect();
        assert_eq!(rows, vec![(3, 2), (3, 2), (5, 1)]);
    }
}
