//! Tree ciphering (`∼`) decision.
//!
//! Two trees are `∼`-isomorphic when some tree isomorphism between them
//! induces a bijection on labels. The solver first narrows the candidate
//! mappings with deductions on topology and labels, then explores what is
//! left by backtracking, smallest bags first.

mod deduce;
mod search;
mod state;

use std::collections::HashMap;

use num_bigint::BigUint;
use serde::Serialize;

use crate::tree::{canonical_classes, LabeledTree, NodeId, Relation, SignatureRegistry};

pub use deduce::{apply_rules, deduction_phase, map_nodes, split_children, Conflict, Recorder, PHASES};
pub use search::{backtrack, next_candidates, Candidates, SearchOutcome};
pub use state::{ext_bij, Bag, Bijection, Collection, CollectionView, NodeSet, PartialCipher, PartialMapping, SearchState};

use state::NONE;

/// Both trees renumbered in preorder, with labels interned per tree and
/// `≃`-class codes from one shared registry.
#[derive(Debug, Clone)]
pub struct Instance {
    pub n: usize,
    pub t1: LabeledTree,
    pub t2: LabeledTree,
    orig1: Vec<NodeId>,
    orig2: Vec<NodeId>,
    pub(crate) lab1: Vec<u32>,
    pub(crate) lab2: Vec<u32>,
    pub labels1: Vec<String>,
    pub labels2: Vec<String>,
    pub(crate) parent1: Vec<u32>,
    pub(crate) parent2: Vec<u32>,
    pub(crate) children1: Vec<Vec<u32>>,
    pub(crate) children2: Vec<Vec<u32>>,
    pub(crate) depth1: Vec<usize>,
    pub(crate) depth2: Vec<usize>,
    pub(crate) class1: Vec<u32>,
    pub(crate) class2: Vec<u32>,
    /// Whether `t1 ≃ t2`.
    pub topo_iso: bool,
}

type Flat = (Vec<u32>, Vec<String>, Vec<u32>, Vec<Vec<u32>>, Vec<usize>);

fn flatten(t: &LabeledTree) -> Flat {
    let mut intern: HashMap<&str, u32> = HashMap::new();
    let mut names = Vec::new();
    let mut lab = Vec::with_capacity(t.len());
    for id in t.ids() {
        let l = t.label(id);
        let next = names.len() as u32;
        let code = *intern.entry(l).or_insert_with(|| {
            names.push(l.to_owned());
            next
        });
        lab.push(code);
    }
    let parent = t.ids().map(|id| t.parent(id).map_or(NONE, |p| p.0 as u32)).collect();
    let children = t.ids().map(|id| t.children(id).iter().map(|c| c.0 as u32).collect()).collect();
    (lab, names, parent, children, t.depths())
}

impl Instance {
    pub fn new(t1: &LabeledTree, t2: &LabeledTree) -> Self {
        let (p1, orig1) = t1.subtree_with_map(t1.root());
        let (p2, orig2) = t2.subtree_with_map(t2.root());
        let mut reg = SignatureRegistry::new();
        let c1 = canonical_classes(&mut reg, &p1, Relation::Topo).codes;
        let c2 = canonical_classes(&mut reg, &p2, Relation::Topo).codes;
        let topo_iso = p1.len() == p2.len() && c1[0] == c2[0];
        let (lab1, labels1, parent1, children1, depth1) = flatten(&p1);
        let (lab2, labels2, parent2, children2, depth2) = flatten(&p2);
        Instance {
            n: p1.len(),
            t1: p1,
            t2: p2,
            orig1,
            orig2,
            lab1,
            lab2,
            labels1,
            labels2,
            parent1,
            parent2,
            children1,
            children2,
            depth1,
            depth2,
            class1: c1,
            class2: c2,
            topo_iso,
        }
    }

    /// Internal (preorder) id of a node of the first input tree.
    pub fn internal1(&self, id: NodeId) -> u32 {
        self.orig1.iter().position(|&x| x == id).expect("node of t1") as u32
    }

    pub fn internal2(&self, id: NodeId) -> u32 {
        self.orig2.iter().position(|&x| x == id).expect("node of t2") as u32
    }

    pub fn external1(&self, u: u32) -> NodeId {
        self.orig1[u as usize]
    }

    pub fn external2(&self, v: u32) -> NodeId {
        self.orig2[v as usize]
    }

    pub fn label_id1(&self, label: &str) -> Option<u32> {
        self.labels1.iter().position(|l| l == label).map(|i| i as u32)
    }

    pub fn label_id2(&self, label: &str) -> Option<u32> {
        self.labels2.iter().position(|l| l == label).map(|i| i as u32)
    }

    /// Empty search state sized for this instance.
    pub fn empty_state(&self) -> SearchState {
        SearchState::new(self.n, self.labels1.len(), self.labels2.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Isomorphic,
    NotIsomorphic,
    Unknown,
}

/// Search-space size recorded after one deduction event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Snapshot {
    pub tag: String,
    #[serde(serialize_with = "ser_big")]
    pub size: BigUint,
}

fn ser_big<S: serde::Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn ser_big_opt<S: serde::Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_some(&v.to_string()),
        None => s.serialize_none(),
    }
}

/// Counters kept for every solve.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SolveStats {
    /// Backtracking states: the root plus one per attempted choice. Zero
    /// when the search was never entered.
    pub states_visited: u64,
    /// Search-space size once all deductions are done.
    #[serde(serialize_with = "ser_big_opt")]
    pub n_after_deductions: Option<BigUint>,
    pub map_nodes_deduction: u64,
    pub map_nodes_total: u64,
    /// Applications of rules 1 to 4, including during backtracking.
    pub deductions: [u64; 4],
    /// Post-deduction system as `(n, α)` tuples in processing order.
    pub model_tuples: Vec<(u64, u64)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SearchTrace {
    pub snapshots: Vec<Snapshot>,
}

impl SearchTrace {
    /// Sizes at the end of each deduction phase.
    pub fn phase_sizes(&self) -> Vec<BigUint> {
        self.snapshots
            .iter()
            .filter(|s| PHASES.contains(&s.tag.as_str()))
            .map(|s| s.size.clone())
            .collect()
    }

    /// Every recorded size, consecutive repeats collapsed.
    pub fn trajectory(&self) -> Vec<BigUint> {
        let mut out: Vec<BigUint> = Vec::new();
        for s in &self.snapshots {
            if out.last() != Some(&s.size) {
                out.push(s.size.clone());
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IsoResult {
    pub verdict: Verdict,
    /// `mapping[u]` is the image of node `u` of the first tree.
    pub mapping: Option<Vec<NodeId>>,
    /// Label pairs sorted by source label.
    pub cipher: Option<Vec<(String, String)>>,
    pub stats: SolveStats,
    pub trace: Option<SearchTrace>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveOptions {
    /// Maximum number of backtracking states.
    pub step_limit: Option<u64>,
    /// Record search-space snapshots.
    pub trace: bool,
}

/// `(n, α)` tuples of a post-deduction system, in the order the search
/// processes them: bags by increasing size, then collections by decreasing
/// set size and increasing count. A collection of `c` sets of size `n`
/// contributes `(n, c), (n, c-1), ..., (n, 1)`; sets of size 1 behave like a
/// bag of size `c`.
pub fn model_tuples(st: &SearchState) -> Vec<(u64, u64)> {
    let mut bags: Vec<u64> = st.live_bags().map(|(_, b)| b.size() as u64).collect();
    let mut colls: Vec<(u64, u64)> = Vec::new();
    for (_, c) in st.live_collections() {
        for (n, count) in st.size_profile(1, &c.c1) {
            if n == 1 {
                bags.push(count as u64);
            } else {
                colls.push((n as u64, count as u64));
            }
        }
    }
    bags.sort_unstable();
    colls.sort_by_key(|&(n, c)| (std::cmp::Reverse(n), c));
    let mut out: Vec<(u64, u64)> = bags.into_iter().filter(|&k| k >= 2).map(|k| (k, 1)).collect();
    for (n, c) in colls {
        for a in (1..=c).rev() {
            out.push((n, a));
        }
    }
    out
}

fn not_iso(stats: SolveStats, trace: Option<SearchTrace>) -> IsoResult {
    IsoResult {
        verdict: Verdict::NotIsomorphic,
        mapping: None,
        cipher: None,
        stats,
        trace,
    }
}

/// Decides `t1 ∼ t2`. On success the mapping and cipher are returned.
pub fn is_ciphering_isomorphic(t1: &LabeledTree, t2: &LabeledTree, opts: SolveOptions) -> IsoResult {
    let inst = Instance::new(t1, t2);
    solve_instance(&inst, opts)
}

pub fn solve_instance(inst: &Instance, opts: SolveOptions) -> IsoResult {
    let mut rec = Recorder::new(opts.trace);
    let mut stats = SolveStats::default();
    let finish_trace = |rec: &mut Recorder| {
        rec.snapshots.take().map(|snapshots| SearchTrace { snapshots })
    };
    if !inst.topo_iso {
        return not_iso(stats, finish_trace(&mut rec));
    }
    let st = match deduction_phase(inst, &mut rec) {
        Ok(st) => st,
        Err(Conflict) => {
            stats.map_nodes_deduction = rec.map_nodes_calls;
            stats.map_nodes_total = rec.map_nodes_calls;
            stats.deductions = rec.rule_applications;
            return not_iso(stats, finish_trace(&mut rec));
        }
    };
    stats.map_nodes_deduction = rec.map_nodes_calls;
    stats.n_after_deductions = Some(st.search_space_size());
    stats.model_tuples = model_tuples(&st);
    let trace = finish_trace(&mut rec);

    let mut states = 0;
    let outcome = backtrack(inst, st, opts.step_limit, &mut rec, &mut states);
    stats.states_visited = states;
    stats.map_nodes_total = rec.map_nodes_calls;
    stats.deductions = rec.rule_applications;
    audit::record(&stats);

    match outcome {
        SearchOutcome::Found(st) => {
            let mut mapping = vec![NodeId(0); inst.n];
            for (u, v) in st.phi.pairs() {
                mapping[inst.external1(u).0] = inst.external2(v);
            }
            let mut cipher: Vec<(String, String)> = st
                .f
                .pairs()
                .map(|(a, b)| (inst.labels1[a as usize].clone(), inst.labels2[b as usize].clone()))
                .collect();
            cipher.sort();
            IsoResult {
                verdict: Verdict::Isomorphic,
                mapping: Some(mapping),
                cipher: Some(cipher),
                stats,
                trace,
            }
        }
        SearchOutcome::Exhausted => not_iso(stats, trace),
        SearchOutcome::LimitReached => IsoResult {
            verdict: Verdict::Unknown,
            mapping: None,
            cipher: None,
            stats,
            trace,
        },
    }
}

/// Process-wide tally of solves that entered the search, each checked
/// against [`state_bound`](crate::analytics::state_bound).
pub mod audit {
    use std::sync::atomic::{AtomicU64, Ordering};

    use super::SolveStats;
    use crate::analytics::state_bound;

    static SEARCHED: AtomicU64 = AtomicU64::new(0);
    static VIOLATIONS: AtomicU64 = AtomicU64::new(0);

    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub struct AuditCounts {
        pub searched: u64,
        /// Solves whose state count exceeded the bound plus the root.
        pub violations: u64,
    }

    pub fn counts() -> AuditCounts {
        AuditCounts {
            searched: SEARCHED.load(Ordering::Relaxed),
            violations: VIOLATIONS.load(Ordering::Relaxed),
        }
    }

    pub(crate) fn record(stats: &SolveStats) {
        let Some(n) = &stats.n_after_deductions else {
            return;
        };
        SEARCHED.fetch_add(1, Ordering::Relaxed);
        if num_bigint::BigUint::from(stats.states_visited) > state_bound(n) + 1u32 {
            VIOLATIONS.fetch_add(1, Ordering::Relaxed);
        }
    }
}

/// Checks that `mapping` is a tree isomorphism from `t1` onto `t2` and that
/// `cipher` is a label bijection sending each label of `t1` to the label of
/// the image node.
pub fn verify_ciphering(t1: &LabeledTree, t2: &LabeledTree, mapping: &[NodeId], cipher: &[(String, String)]) -> bool {
    let n = t1.len();
    if t2.len() != n || mapping.len() != n {
        return false;
    }
    let mut hit = vec![false; n];
    for &v in mapping {
        if v.0 >= n || hit[v.0] {
            return false;
        }
        hit[v.0] = true;
    }
    for u in t1.ids() {
        let image_parent = t2.parent(mapping[u.0]);
        if image_parent != t1.parent(u).map(|p| mapping[p.0]) {
            return false;
        }
    }
    let mut fwd: HashMap<&str, &str> = HashMap::new();
    let mut bwd: HashMap<&str, &str> = HashMap::new();
    for (a, b) in cipher {
        if fwd.insert(a, b).is_some() || bwd.insert(b, a).is_some() {
            return false;
        }
    }
    if fwd.len() != t1.alphabet().len() {
        return false;
    }
    t1.ids().all(|u| fwd.get(t1.label(u)) == Some(&t2.label(mapping[u.0])))
}

/// `(verdict, cipher)` for the three relations, for callers that do not
/// need the solver internals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IsoRelation {
    Topo,
    Label,
    Cipher,
}

pub fn decide(t1: &LabeledTree, t2: &LabeledTree, relation: IsoRelation, opts: SolveOptions) -> IsoResult {
    let simple = |rel: Relation| IsoResult {
        verdict: if crate::tree::isomorphic(t1, t2, rel) {
            Verdict::Isomorphic
        } else {
            Verdict::NotIsomorphic
        },
        mapping: None,
        cipher: None,
        stats: SolveStats::default(),
        trace: None,
    };
    match relation {
        IsoRelation::Topo => simple(Relation::Topo),
        IsoRelation::Label => simple(Relation::Label),
        IsoRelation::Cipher => is_ciphering_isomorphic(t1, t2, opts),
    }
}
