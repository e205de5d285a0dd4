//! Labelled rooted unordered trees.
//!
//! Nodes are stored in a flat arena indexed by [`NodeId`]; id 0 is always the
//! root. Child lists keep their input order for deterministic output, but no
//! algorithm in this crate gives that order any meaning.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError};

/// Dense index of a node inside one tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub label: String,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledTree {
    nodes: Vec<Node>,
}

impl LabeledTree {
    /// A single-node tree.
    pub fn leaf(label: impl Into<String>) -> Self {
        LabeledTree {
            nodes: vec![Node {
                label: label.into(),
                parent: None,
                children: Vec::new(),
            }],
        }
    }

    pub(crate) fn from_parents_unchecked(nodes: Vec<Node>) -> Self {
        LabeledTree { nodes }
    }

    /// Appends a new child under `parent` and returns its id.
    ///
    /// Panics if `parent` is out of range.
    pub fn add_child(&mut self, parent: NodeId, label: impl Into<String>) -> NodeId {
        assert!(parent.0 < self.nodes.len(), "parent {parent} out of range");
        let id = NodeId(self.nodes.len());
        self.nodes.push(Node {
            label: label.into(),
            parent: Some(parent),
            children: Vec::new(),
        });
        self.nodes[parent.0].children.push(id);
        id
    }

    /// Builds a tree from per-node labels and parent links.
    ///
    /// Node 0 must be the only parentless node. Children are attached in
    /// increasing id order.
    pub fn from_parents(labels: Vec<String>, parents: &[Option<usize>]) -> Result<Self, Error> {
        if labels.is_empty() {
            return Err(Error::InvalidTree("a tree has at least one node".into()));
        }
        if labels.len() != parents.len() {
            return Err(Error::InvalidTree(format!(
                "{} labels but {} parent entries",
                labels.len(),
                parents.len()
            )));
        }
        let mut nodes: Vec<Node> = labels
            .into_iter()
            .zip(parents)
            .map(|(label, p)| Node {
                label,
                parent: p.map(NodeId),
                children: Vec::new(),
            })
            .collect();
        for i in 0..nodes.len() {
            match nodes[i].parent {
                None if i != 0 => {
                    return Err(Error::InvalidTree(format!("node {i} has no parent but is not node 0")))
                }
                Some(_) if i == 0 => return Err(Error::InvalidTree("node 0 must be the root".into())),
                Some(p) if p.0 >= nodes.len() || p.0 == i => {
                    return Err(Error::InvalidTree(format!("node {i} has invalid parent {p}")))
                }
                Some(p) => nodes[p.0].children.push(NodeId(i)),
                None => {}
            }
        }
        let tree = LabeledTree { nodes };
        tree.validate()?;
        Ok(tree)
    }

    /// Checks connectivity, acyclicity and parent/child consistency.
    pub fn validate(&self) -> Result<(), Error> {
        if self.nodes.is_empty() {
            return Err(Error::InvalidTree("empty tree".into()));
        }
        if self.nodes[0].parent.is_some() {
            return Err(Error::InvalidTree("node 0 must be the root".into()));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if i != 0 && node.parent.is_none() {
                return Err(Error::InvalidTree(format!("node {i} has no parent")));
            }
            for &c in &node.children {
                if c.0 >= self.nodes.len() || self.nodes[c.0].parent != Some(NodeId(i)) {
                    return Err(Error::InvalidTree(format!("inconsistent child link {i} -> {c}")));
                }
            }
        }
        let visited = self.preorder().len();
        if visited != self.nodes.len() {
            return Err(Error::InvalidTree(format!(
                "only {visited} of {} nodes reachable from the root",
                self.nodes.len()
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Always false: there is no empty tree.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn root(&self) -> NodeId {
        NodeId::ROOT
    }

    #[inline]
    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    #[inline]
    pub fn label(&self, id: NodeId) -> &str {
        &self.nodes[id.0].label
    }

    #[inline]
    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.0].parent
    }

    #[inline]
    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.0].children
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn set_label(&mut self, id: NodeId, label: impl Into<String>) {
        self.nodes[id.0].label = label.into();
    }

    /// Replaces the child list of `id` with a permutation of itself.
    pub fn permute_children(&mut self, id: NodeId, order: &[usize]) {
        let old = &self.nodes[id.0].children;
        assert_eq!(order.len(), old.len());
        let new: Vec<NodeId> = order.iter().map(|&i| old[i]).collect();
        self.nodes[id.0].children = new;
    }

    /// Node ids in preorder (children visited in storage order).
    pub fn preorder(&self) -> Vec<NodeId> {
        self.preorder_from(NodeId::ROOT)
    }

    pub fn preorder_from(&self, start: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![start];
        while let Some(id) = stack.pop() {
            if out.len() > self.nodes.len() {
                break;
            }
            out.push(id);
            stack.extend(self.nodes[id.0].children.iter().rev().copied());
        }
        out
    }

    /// Node ids in postorder: every node after all of its descendants.
    pub fn postorder(&self) -> Vec<NodeId> {
        let mut out = self.preorder();
        // reversed preorder with reversed children is a valid postorder for
        // bottom-up passes that only need descendants first
        out.reverse();
        out
    }

    /// Preorder rank of every node, indexed by node id.
    pub fn preorder_ranks(&self) -> Vec<usize> {
        let mut rank = vec![0; self.nodes.len()];
        for (r, id) in self.preorder().into_iter().enumerate() {
            rank[id.0] = r;
        }
        rank
    }

    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0; self.nodes.len()];
        for id in self.preorder() {
            if let Some(p) = self.nodes[id.0].parent {
                depth[id.0] = depth[p.0] + 1;
            }
        }
        depth
    }

    /// Number of nodes in each subtree, indexed by node id.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        let mut size = vec![1; self.nodes.len()];
        for id in self.postorder() {
            if let Some(p) = self.nodes[id.0].parent {
                size[p.0] += size[id.0];
            }
        }
        size
    }

    /// Height of each subtree, indexed by node id.
    pub fn subtree_heights(&self) -> Vec<usize> {
        let mut height = vec![0; self.nodes.len()];
        for id in self.postorder() {
            if let Some(p) = self.nodes[id.0].parent {
                height[p.0] = height[p.0].max(height[id.0] + 1);
            }
        }
        height
    }

    pub fn alphabet(&self) -> BTreeSet<&str> {
        self.nodes.iter().map(|n| n.label.as_str()).collect()
    }

    /// Occurrence count of each label.
    pub fn label_counts(&self) -> HashMap<&str, usize> {
        let mut counts = HashMap::new();
        for n in &self.nodes {
            *counts.entry(n.label.as_str()).or_insert(0) += 1;
        }
        counts
    }

    /// Copies the subtree rooted at `id` into a fresh tree, renumbered in
    /// preorder. The second component maps new ids back to ids in `self`.
    pub fn subtree_with_map(&self, id: NodeId) -> (LabeledTree, Vec<NodeId>) {
        let order = self.preorder_from(id);
        let mut new_of_old: HashMap<usize, usize> = HashMap::with_capacity(order.len());
        for (new, old) in order.iter().enumerate() {
            new_of_old.insert(old.0, new);
        }
        let nodes = order
            .iter()
            .map(|old| {
                let n = &self.nodes[old.0];
                Node {
                    label: n.label.clone(),
                    parent: if *old == id {
                        None
                    } else {
                        n.parent.map(|p| NodeId(new_of_old[&p.0]))
                    },
                    children: n.children.iter().map(|c| NodeId(new_of_old[&c.0])).collect(),
                }
            })
            .collect();
        (LabeledTree { nodes }, order)
    }

    pub fn subtree(&self, id: NodeId) -> LabeledTree {
        self.subtree_with_map(id).0
    }

    /// Same tree renumbered so that ids follow preorder.
    pub fn to_preorder(&self) -> LabeledTree {
        self.subtree(NodeId::ROOT)
    }

    /// Builds a tree whose root has `label` and the given trees as children.
    pub fn join(label: impl Into<String>, subtrees: &[LabeledTree]) -> LabeledTree {
        let mut nodes = vec![Node {
            label: label.into(),
            parent: None,
            children: Vec::new(),
        }];
        for t in subtrees {
            let offset = nodes.len();
            nodes[0].children.push(NodeId(offset));
            for (i, n) in t.nodes.iter().enumerate() {
                nodes.push(Node {
                    label: n.label.clone(),
                    parent: if i == 0 {
                        Some(NodeId::ROOT)
                    } else {
                        n.parent.map(|p| NodeId(p.0 + offset))
                    },
                    children: n.children.iter().map(|c| NodeId(c.0 + offset)).collect(),
                });
            }
        }
        LabeledTree { nodes }
    }

    pub fn map_labels(&self, mut f: impl FnMut(&str) -> String) -> LabeledTree {
        LabeledTree {
            nodes: self
                .nodes
                .iter()
                .map(|n| Node {
                    label: f(&n.label),
                    parent: n.parent,
                    children: n.children.clone(),
                })
                .collect(),
        }
    }
}

impl fmt::Display for LabeledTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::text::serialize_tree(self))
    }
}

impl std::str::FromStr for LabeledTree {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        crate::text::parse_tree(s)
    }
}

/// Size, height and degree of a tree plus per-node depth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TopoStats {
    pub size: usize,
    pub height: usize,
    pub degree: usize,
    pub depth: Vec<usize>,
}

pub fn compute_stats(t: &LabeledTree) -> TopoStats {
    let mut depth = vec![0usize; t.len()];
    let mut height = 0;
    let mut degree = 0;
    for id in t.preorder() {
        let node = t.node(id);
        if let Some(p) = node.parent {
            depth[id.0] = depth[p.0] + 1;
        }
        height = height.max(depth[id.0]);
        degree = degree.max(node.children.len());
    }
    TopoStats {
        size: t.len(),
        height,
        degree,
        depth,
    }
}

/// Which subtree equivalence a signature or DAG is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// Unlabelled isomorphism.
    Topo,
    /// Labelled isomorphism.
    Label,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Topo => "topo",
            Relation::Label => "label",
        })
    }
}

/// Hash-consing table for subtree classes.
///
/// Codes handed out by one registry are comparable across every tree it has
/// seen. A registry is not `Sync`; give each thread its own.
#[derive(Debug, Default, Clone)]
pub struct SignatureRegistry {
    topo: HashMap<Vec<u32>, u32>,
    label: HashMap<(String, Vec<u32>), u32>,
}

impl SignatureRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of distinct classes interned so far for `relation`.
    pub fn class_count(&self, relation: Relation) -> usize {
        match relation {
            Relation::Topo => self.topo.len(),
            Relation::Label => self.label.len(),
        }
    }

    fn intern(&mut self, relation: Relation, label: &str, mut children: Vec<u32>) -> u32 {
        children.sort_unstable();
        match relation {
            Relation::Topo => {
                let next = self.topo.len() as u32;
                *self.topo.entry(children).or_insert(next)
            }
            Relation::Label => {
                let next = self.label.len() as u32;
                *self.label.entry((label.to_owned(), children)).or_insert(next)
            }
        }
    }
}

/// Per-node class codes under one relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalSignature {
    pub relation: Relation,
    pub codes: Vec<u32>,
}

impl CanonicalSignature {
    pub fn root_code(&self) -> u32 {
        self.codes[0]
    }

    pub fn code(&self, id: NodeId) -> u32 {
        self.codes[id.0]
    }

    pub fn distinct(&self) -> usize {
        self.codes.iter().collect::<BTreeSet<_>>().len()
    }
}

/// Bottom-up AHU classification: each node's code is the interned sorted
/// multiset of its children's codes (plus its own label for
/// [`Relation::Label`]).
pub fn canonical_classes(
    registry: &mut SignatureRegistry,
    t: &LabeledTree,
    relation: Relation,
) -> CanonicalSignature {
    let mut codes = vec![0u32; t.len()];
    for id in t.postorder() {
        let node = t.node(id);
        let kids: Vec<u32> = node.children.iter().map(|c| codes[c.0]).collect();
        codes[id.0] = registry.intern(relation, &node.label, kids);
    }
    CanonicalSignature { relation, codes }
}

/// `t1 ≃ t2` (or `≃_l` for [`Relation::Label`]) via a throwaway registry.
pub fn isomorphic(t1: &LabeledTree, t2: &LabeledTree, relation: Relation) -> bool {
    if t1.len() != t2.len() {
        return false;
    }
    let mut reg = SignatureRegistry::new();
    let a = canonical_classes(&mut reg, t1, relation);
    let b = canonical_classes(&mut reg, t2, relation);
    a.root_code() == b.root_code()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_tree;

    pub(crate) const TWIN_TREE: &str = "0(1(2(3,4),4(9,16),3(3,4)),2(4(6,8),8(18,32),6(6,8)))";

    #[test]
    fn stats_of_reference_trees() {
        let t = parse_tree(TWIN_TREE).unwrap();
        let s = compute_stats(&t);
        assert_eq!((s.size, s.height, s.degree), (21, 3, 3));

        let s = compute_stats(&LabeledTree::leaf("a"));
        assert_eq!((s.size, s.height, s.degree), (1, 0, 0));

        let path = parse_tree("a(b(c(d(e))))").unwrap();
        let s = compute_stats(&path);
        assert_eq!((s.size, s.height, s.degree), (5, 4, 1));
        assert_eq!(s.depth, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn class_counts_on_reference_tree() {
        let t = parse_tree(TWIN_TREE).unwrap();
        let mut reg = SignatureRegistry::new();
        assert_eq!(canonical_classes(&mut reg, &t, Relation::Topo).distinct(), 4);
        assert_eq!(canonical_classes(&mut reg, &t, Relation::Label).distinct(), 17);
    }

    #[test]
    fn single_nodes_differ_only_by_label() {
        let mut reg = SignatureRegistry::new();
        let x = LabeledTree::leaf("x");
        let y = LabeledTree::leaf("y");
        assert_eq!(
            canonical_classes(&mut reg, &x, Relation::Topo).root_code(),
            canonical_classes(&mut reg, &y, Relation::Topo).root_code()
        );
        assert_ne!(
            canonical_classes(&mut reg, &x, Relation::Label).root_code(),
            canonical_classes(&mut reg, &y, Relation::Label).root_code()
        );
    }

    #[test]
    fn from_parents_rejects_cycles_and_orphans() {
        let labels = || vec!["a".to_string(), "b".into(), "c".into()];
        assert!(LabeledTree::from_parents(labels(), &[None, Some(2), Some(1)]).is_err());
        assert!(LabeledTree::from_parents(labels(), &[None, None, Some(1)]).is_err());
        assert!(LabeledTree::from_parents(labels(), &[Some(1), None, Some(1)]).is_err());
        assert!(LabeledTree::from_parents(vec![], &[]).is_err());
        let t = LabeledTree::from_parents(labels(), &[None, Some(2), Some(0)]).unwrap();
        assert_eq!(t.children(NodeId(2)), &[NodeId(1)]);
        assert_eq!(t.preorder(), vec![NodeId(0), NodeId(2), NodeId(1)]);
    }

    #[test]
    fn subtree_extraction_renumbers_in_preorder() {
        let t = parse_tree(TWIN_TREE).unwrap();
        let (sub, map) = t.subtree_with_map(NodeId(5));
        assert_eq!(crate::text::serialize_tree(&sub), "4(9,16)");
        assert_eq!(map, vec![NodeId(5), NodeId(6), NodeId(7)]);
    }

    #[test]
    fn join_puts_trees_under_a_new_root() {
        let a = parse_tree("a(b)").unwrap();
        let b = parse_tree("c").unwrap();
        let j = LabeledTree::join("r", &[a, b]);
        assert_eq!(crate::text::serialize_tree(&j), "r(a(b),c)");
        j.validate().unwrap();
    }
}
