//! Random instances: random recursive trees with a target proportion of
//! distinct labels, and pairs of trees that are or are not `∼`-equivalent.
//!
//! Randomness comes from ChaCha8 seeded with the 64-bit seed, one stream per
//! purpose (topology, labels, shuffles), so the draws of one purpose never
//! shift the others.

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::solver::{is_ciphering_isomorphic, SolveOptions, Verdict};
use crate::tree::{LabeledTree, NodeId};

const STREAM_TOPOLOGY: u64 = 1;
const STREAM_LABELS: u64 = 2;
const STREAM_SHUFFLE: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    Iso,
    NonIso,
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub pair_kind: PairKind,
}

impl GenSpec {
    pub fn new(n: usize, p: f64, seed: u64, pair_kind: PairKind) -> Result<Self, Error> {
        let spec = GenSpec { n, p, seed, pair_kind };
        spec.validate()?;
        Ok(spec)
    }

    /// Number of distinct labels, `max(⌊p·n⌋, 1)`.
    pub fn label_count(&self) -> usize {
        // the epsilon keeps e.g. 0.29 * 100 from flooring to 28
        ((self.p * self.n as f64 + 1e-9).floor() as usize).clamp(1, self.n.max(1))
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("tree size must be at least 1".into()));
        }
        if !(self.p.is_finite() && self.p * self.n as f64 >= 1.0 - 1e-9 && self.p <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "label proportion {} outside [1/{}, 1]",
                self.p, self.n
            )));
        }
        if self.pair_kind == PairKind::NonIso {
            let k = self.label_count();
            if k < 2 || k >= self.n {
                return Err(Error::InvalidArgument(format!(
                    "non-isomorphic pairs need 1/n < p < 1, got {} distinct labels for {} nodes",
                    k, self.n
                )));
            }
        }
        Ok(())
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// Random recursive tree: node `i` hangs under a uniform node among
/// `0..i`. `N` nodes drawn without replacement get labels `"1"..="N"`, the
/// rest uniform labels in the same range.
pub fn gen_tree(spec: &GenSpec) -> Result<LabeledTree, Error> {
    spec.validate()?;
    let n = spec.n;
    let mut topo = spec.rng(STREAM_TOPOLOGY);
    let mut parents: Vec<Option<usize>> = vec![None];
    parents.extend((1..n).map(|i| Some(topo.gen_range(0..i))));

    let k = spec.label_count();
    let mut lab = spec.rng(STREAM_LABELS);
    let mut labels: Vec<usize> = vec![0; n];
    for (i, node) in sample(&mut lab, n, k).into_iter().enumerate() {
        labels[node] = i + 1;
    }
    for l in labels.iter_mut().filter(|l| **l == 0) {
        *l = lab.gen_range(1..=k);
    }
    let labels = labels.into_iter().map(|l| l.to_string()).collect();
    Ok(LabeledTree::from_parents(labels, &parents)?.to_preorder())
}

/// Seed for the `index`-th instance of a run seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1 << 32));
    rng.gen()
}

fn shuffle_children(t: &LabeledTree, rng: &mut ChaCha8Rng) -> LabeledTree {
    let mut out = t.clone();
    for id in t.ids() {
        let k = t.children(id).len();
        if k > 1 {
            let mut order: Vec<usize> = (0..k).collect();
            order.shuffle(rng);
            out.permute_children(id, &order);
        }
    }
    out.to_preorder()
}

/// `T1` and a copy with every child list shuffled, so `T1 ≃_l T2`.
pub fn gen_iso_pair(spec: &GenSpec) -> Result<(LabeledTree, LabeledTree), Error> {
    let t1 = gen_tree(spec)?;
    let t2 = shuffle_children(&t1, &mut spec.rng(STREAM_SHUFFLE));
    Ok((t1, t2))
}

/// `T1` and a tree of the same shape whose labels are the labels of `T1`
/// redistributed at random over the nodes, redrawn while the two trees are
/// still `∼`-equivalent. The label histogram is kept, so the first
/// deduction step cannot tell them apart.
pub fn gen_noniso_pair(spec: &GenSpec, max_retries: usize) -> Result<(LabeledTree, LabeledTree), Error> {
    if spec.pair_kind != PairKind::NonIso {
        GenSpec { pair_kind: PairKind::NonIso, ..*spec }.validate()?;
    }
    let t1 = gen_tree(spec)?;
    let mut rng = spec.rng(STREAM_SHUFFLE);
    let mut labels: Vec<String> = t1.nodes().iter().map(|n| n.label.clone()).collect();
    for _ in 0..max_retries.max(1) {
        labels.shuffle(&mut rng);
        let mut t2 = t1.clone();
        for (i, l) in labels.iter().enumerate() {
            t2.set_label(NodeId(i), l.clone());
        }
        let t2 = shuffle_children(&t2, &mut rng);
        let r = is_ciphering_isomorphic(&t1, &t2, SolveOptions::default());
        if r.verdict == Verdict::NotIsomorphic {
            return Ok((t1, t2));
        }
    }
    Err(Error::RetriesExhausted(max_retries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{isomorphic, Relation};

    #[test]
    fn single_node() {
        let s = GenSpec::new(1, 1.0, 7, PairKind::Single).unwrap();
        let t = gen_tree(&s).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.label(t.root()), "1");
        let (a, b) = gen_iso_pair(&s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_label_count() {
        let s = GenSpec::new(100, 0.5, 3, PairKind::Single).unwrap();
        let t = gen_tree(&s).unwrap();
        assert_eq!(t.alphabet().len(), 50);
        assert_eq!(gen_tree(&s).unwrap(), t);
        assert_eq!(GenSpec::new(100, 0.29, 0, PairKind::Single).unwrap().label_count(), 29);
    }

    #[test]
    fn invalid_specs() {
        assert!(GenSpec::new(0, 1.0, 0, PairKind::Single).is_err());
        assert!(GenSpec::new(10, 0.05, 0, PairKind::Single).is_err());
        assert!(GenSpec::new(10, 1.5, 0, PairKind::Single).is_err());
        assert!(GenSpec::new(10, f64::NAN, 0, PairKind::Single).is_err());
        assert!(GenSpec::new(10, 1.0, 0, PairKind::NonIso).is_err());
        assert!(GenSpec::new(10, 0.1, 0, PairKind::NonIso).is_err());
        let s = GenSpec::new(10, 1.0, 0, PairKind::Single).unwrap();
        assert!(gen_noniso_pair(&s, 5).is_err());
    }

    #[test]
    fn pairs() {
        for seed in 0..20 {
            let s = GenSpec::new(40, 0.3, seed, PairKind::Iso).unwrap();
            let (a, b) = gen_iso_pair(&s).unwrap();
            assert!(isomorphic(&a, &b, Relation::Label));
            let s = GenSpec { pair_kind: PairKind::NonIso, ..s };
            let (a, b) = gen_noniso_pair(&s, 50).unwrap();
            assert!(isomorphic(&a, &b, Relation::Topo));
            let mut h1: Vec<usize> = a.label_counts().into_values().collect();
            let mut h2: Vec<usize> = b.label_counts().into_values().collect();
            h1.sort();
            h2.sort();
            assert_eq!(h1, h2);
        }
    }
}
