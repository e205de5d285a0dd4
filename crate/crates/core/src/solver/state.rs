//! Search state: the two partial bijections plus the partition of unmapped
//! nodes into bags and collections.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::One;

pub(crate) const NONE: u32 = u32::MAX;

/// Partial bijection between two dense index spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bijection {
    fwd: Vec<u32>,
    bwd: Vec<u32>,
    len: usize,
}

/// Partial node mapping `φ`.
pub type PartialMapping = Bijection;
/// Partial label mapping `f`, over interned label ids.
pub type PartialCipher = Bijection;

impl Bijection {
    pub fn new(domain: usize, codomain: usize) -> Self {
        Bijection {
            fwd: vec![NONE; domain],
            bwd: vec![NONE; codomain],
            len: 0,
        }
    }

    #[inline]
    pub fn get(&self, a: u32) -> Option<u32> {
        let b = self.fwd[a as usize];
        (b != NONE).then_some(b)
    }

    #[inline]
    pub fn inverse(&self, b: u32) -> Option<u32> {
        let a = self.bwd[b as usize];
        (a != NONE).then_some(a)
    }

    /// Number of mapped pairs.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_total(&self) -> bool {
        self.len == self.fwd.len()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.fwd
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != NONE)
            .map(|(a, &b)| (a as u32, b))
    }
}

/// Extends `psi` with `a ↦ b` when consistent.
///
/// Returns true if `a` already maps to `b`, or if neither `a` nor `b` is
/// used yet (then the pair is added). Otherwise returns false and leaves
/// `psi` unchanged.
pub fn ext_bij(psi: &mut Bijection, a: u32, b: u32) -> bool {
    let cur = psi.fwd[a as usize];
    if cur == b {
        return true;
    }
    if cur == NONE && psi.bwd[b as usize] == NONE {
        psi.fwd[a as usize] = b;
        psi.bwd[b as usize] = a;
        psi.len += 1;
        return true;
    }
    false
}

/// Pair of equal-size node sets whose members must be mapped among each
/// other. Both sides are kept sorted by preorder rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bag {
    pub b1: Vec<u32>,
    pub b2: Vec<u32>,
}

impl Bag {
    pub fn size(&self) -> usize {
        self.b1.len()
    }
}

/// Set of unmapped nodes of one tree sharing one label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSet {
    pub label: u32,
    pub nodes: Vec<u32>,
    pub(crate) coll: usize,
}

/// Families of same-label node sets, one family per tree. Entries are ids
/// into the state's set arenas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collection {
    pub c1: Vec<usize>,
    pub c2: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum Loc {
    /// Not placed in any structure (only in hand-built states).
    Free,
    Mapped,
    Bag(usize),
    Set(usize),
}

#[derive(Debug, Clone)]
pub struct SearchState {
    pub phi: PartialMapping,
    pub f: PartialCipher,
    pub(crate) bags: Vec<Option<Bag>>,
    pub(crate) sets1: Vec<Option<NodeSet>>,
    pub(crate) sets2: Vec<Option<NodeSet>>,
    pub(crate) colls: Vec<Option<Collection>>,
    pub(crate) loc1: Vec<Loc>,
    pub(crate) loc2: Vec<Loc>,
}

/// Owned, id-free view of one collection: per tree, `(label, nodes)` sets.
pub type CollectionView = (Vec<(u32, Vec<u32>)>, Vec<(u32, Vec<u32>)>);

impl SearchState {
    /// Empty state: nothing mapped and no node placed.
    pub fn new(n_nodes: usize, n_labels1: usize, n_labels2: usize) -> Self {
        SearchState {
            phi: Bijection::new(n_nodes, n_nodes),
            f: Bijection::new(n_labels1, n_labels2),
            bags: Vec::new(),
            sets1: Vec::new(),
            sets2: Vec::new(),
            colls: Vec::new(),
            loc1: vec![Loc::Free; n_nodes],
            loc2: vec![Loc::Free; n_nodes],
        }
    }

    pub fn node_count(&self) -> usize {
        self.loc1.len()
    }

    /// Adds a bag and returns its id. Node lists are sorted on insertion.
    pub fn add_bag(&mut self, mut b1: Vec<u32>, mut b2: Vec<u32>) -> usize {
        b1.sort_unstable();
        b2.sort_unstable();
        let id = self.bags.len();
        for &u in &b1 {
            self.loc1[u as usize] = Loc::Bag(id);
        }
        for &v in &b2 {
            self.loc2[v as usize] = Loc::Bag(id);
        }
        self.bags.push(Some(Bag { b1, b2 }));
        id
    }

    pub(crate) fn remove_bag(&mut self, id: usize) -> Bag {
        self.bags[id].take().expect("live bag")
    }

    /// Adds a collection from `(label, nodes)` sets and returns its id.
    pub fn add_collection(&mut self, c1: Vec<(u32, Vec<u32>)>, c2: Vec<(u32, Vec<u32>)>) -> usize {
        let id = self.colls.len();
        let mut coll = Collection {
            c1: Vec::with_capacity(c1.len()),
            c2: Vec::with_capacity(c2.len()),
        };
        for (label, mut nodes) in c1 {
            nodes.sort_unstable();
            let s = self.sets1.len();
            for &u in &nodes {
                self.loc1[u as usize] = Loc::Set(s);
            }
            self.sets1.push(Some(NodeSet { label, nodes, coll: id }));
            coll.c1.push(s);
        }
        for (label, mut nodes) in c2 {
            nodes.sort_unstable();
            let s = self.sets2.len();
            for &v in &nodes {
                self.loc2[v as usize] = Loc::Set(s);
            }
            self.sets2.push(Some(NodeSet { label, nodes, coll: id }));
            coll.c2.push(s);
        }
        self.colls.push(Some(coll));
        id
    }

    /// Detaches set `s` (side 1 or 2) from its collection, dropping the
    /// collection once it is empty. Node locations are left to the caller.
    pub(crate) fn take_set(&mut self, side: u8, s: usize) -> NodeSet {
        let set = if side == 1 {
            self.sets1[s].take()
        } else {
            self.sets2[s].take()
        }
        .expect("live set");
        let coll = self.colls[set.coll].as_mut().expect("live collection");
        let list = if side == 1 { &mut coll.c1 } else { &mut coll.c2 };
        let pos = list.iter().position(|&x| x == s).expect("set listed in its collection");
        list.remove(pos);
        if coll.c1.is_empty() && coll.c2.is_empty() {
            self.colls[set.coll] = None;
        }
        set
    }

    pub fn set(&self, side: u8, s: usize) -> &NodeSet {
        if side == 1 {
            self.sets1[s].as_ref().expect("live set")
        } else {
            self.sets2[s].as_ref().expect("live set")
        }
    }

    pub fn live_bags(&self) -> impl Iterator<Item = (usize, &Bag)> {
        self.bags.iter().enumerate().filter_map(|(i, b)| b.as_ref().map(|b| (i, b)))
    }

    pub fn live_collections(&self) -> impl Iterator<Item = (usize, &Collection)> {
        self.colls.iter().enumerate().filter_map(|(i, c)| c.as_ref().map(|c| (i, c)))
    }

    pub fn bag_count(&self) -> usize {
        self.live_bags().count()
    }

    pub fn collection_count(&self) -> usize {
        self.live_collections().count()
    }

    /// Bags as `(b1, b2)` pairs.
    pub fn bags(&self) -> Vec<(Vec<u32>, Vec<u32>)> {
        self.live_bags().map(|(_, b)| (b.b1.clone(), b.b2.clone())).collect()
    }

    pub fn collections(&self) -> Vec<CollectionView> {
        self.live_collections()
            .map(|(_, c)| {
                let view = |side: u8, ids: &[usize]| {
                    ids.iter()
                        .map(|&s| {
                            let set = self.set(side, s);
                            (set.label, set.nodes.clone())
                        })
                        .collect()
                };
                (view(1, &c.c1), view(2, &c.c2))
            })
            .collect()
    }

    /// `size -> count` for side 1 of a collection.
    pub(crate) fn size_profile(&self, side: u8, ids: &[usize]) -> BTreeMap<usize, usize> {
        let mut m = BTreeMap::new();
        for &s in ids {
            *m.entry(self.set(side, s).nodes.len()).or_insert(0) += 1;
        }
        m
    }

    /// Exponents `e_k` such that the search-space size is `∏ k!^{e_k}`.
    pub fn factorial_exponents(&self) -> BTreeMap<usize, u64> {
        let mut exps: BTreeMap<usize, u64> = BTreeMap::new();
        for (_, b) in self.live_bags() {
            *exps.entry(b.size()).or_insert(0) += 1;
        }
        for (_, c) in self.live_collections() {
            for (n, count) in self.size_profile(1, &c.c1) {
                *exps.entry(count).or_insert(0) += 1;
                *exps.entry(n).or_insert(0) += count as u64;
            }
        }
        exps.retain(|&k, _| k > 1);
        exps
    }

    /// `N(𝓑, 𝓒) = ∏_B #B! · ∏_C ∏_n #C_n! · n!^{#C_n}`, exactly.
    pub fn search_space_size(&self) -> BigUint {
        let exps = self.factorial_exponents();
        let mut out = BigUint::one();
        let mut fact = BigUint::one();
        let mut k = 1usize;
        for (&m, &e) in &exps {
            while k < m {
                k += 1;
                fact *= k;
            }
            out *= fact.pow(e as u32);
        }
        out
    }

    /// Consistency of locations with the structures. Test helper.
    pub fn check_invariants(&self) -> Result<(), String> {
        for (id, b) in self.live_bags() {
            if b.b1.len() != b.b2.len() || b.b1.is_empty() {
                return Err(format!("bag {id} has sides {} and {}", b.b1.len(), b.b2.len()));
            }
            for &u in &b.b1 {
                if self.loc1[u as usize] != Loc::Bag(id) {
                    return Err(format!("node {u} of T1 misplaced"));
                }
            }
            for &v in &b.b2 {
                if self.loc2[v as usize] != Loc::Bag(id) {
                    return Err(format!("node {v} of T2 misplaced"));
                }
            }
        }
        for (id, c) in self.live_collections() {
            if self.size_profile(1, &c.c1) != self.size_profile(2, &c.c2) {
                return Err(format!("collection {id} has unequal size profiles"));
            }
            for (side, ids) in [(1u8, &c.c1), (2u8, &c.c2)] {
                for &s in ids.iter() {
                    let set = self.set(side, s);
                    if set.coll != id || set.nodes.is_empty() {
                        return Err(format!("set {s} inconsistent"));
                    }
                    let locs = if side == 1 { &self.loc1 } else { &self.loc2 };
                    if set.nodes.iter().any(|&x| locs[x as usize] != Loc::Set(s)) {
                        return Err(format!("set {s} has misplaced nodes"));
                    }
                }
            }
        }
        for (u, l) in self.loc1.iter().enumerate() {
            if (*l == Loc::Mapped) != self.phi.get(u as u32).is_some() {
                return Err(format!("node {u} of T1 mapped state inconsistent"));
            }
        }
        for (v, l) in self.loc2.iter().enumerate() {
            if (*l == Loc::Mapped) != self.phi.inverse(v as u32).is_some() {
                return Err(format!("node {v} of T2 mapped state inconsistent"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ext_bij_cases() {
        let mut f = Bijection::new(3, 3);
        assert!(ext_bij(&mut f, 0, 1));
        assert_eq!(f.get(0), Some(1));
        assert!(ext_bij(&mut f, 0, 1));
        assert_eq!(f.len(), 1);
        assert!(!ext_bij(&mut f, 2, 1));
        assert!(!ext_bij(&mut f, 0, 2));
        assert_eq!(f.get(2), None);
        assert_eq!(f.inverse(1), Some(0));
    }

    #[test]
    fn size_of_small_states() {
        let st = SearchState::new(0, 0, 0);
        assert_eq!(st.search_space_size(), BigUint::one());

        let mut st = SearchState::new(7, 3, 3);
        st.add_bag(vec![0, 1, 2], vec![0, 1, 2]);
        st.add_collection(vec![(0, vec![3, 4]), (1, vec![5, 6])], vec![(0, vec![3, 4]), (1, vec![5, 6])]);
        assert_eq!(st.search_space_size(), BigUint::from(48u32));
        st.check_invariants().unwrap();
    }
}
