#![allow(dead_code)]

use std::collections::VecDeque;

use treecipher::LabeledTree;

pub const TWIN_TREE: &str = "0(1(2(3,4),4(9,16),3(3,4)),2(4(6,8),8(18,32),6(6,8)))";
pub const SCALED_T1: &str = "1(2(3,4),4(9,16),3(3,4))";
pub const SCALED_T2: &str = "2(4(6,8),8(18,32),6(6,8))";
pub const RUNNING_T1: &str = "B(B,A(A,B),A(C,C),B(C,D,E),A(D,E,C))";
pub const RUNNING_T2: &str = "\"β\"(\"β\",\"α\"(\"γ\",\"γ\"),\"α\"(\"β\",\"α\"),\"α\"(\"γ\",\"δ\",\"η\"),\"β\"(\"η\",\"δ\",\"γ\"))";
pub const GROWTH_T: &str = "A(A(C,D,E,F),B(C,D,E,F),B)";

/// Node ids in breadth-first order, 1-based: `names[k]` is node `u_k`.
pub fn bfs_names(t: &LabeledTree) -> Vec<u32> {
    let mut out = vec![u32::MAX];
    let mut queue = VecDeque::from([t.root()]);
    while let Some(u) = queue.pop_front() {
        out.push(u.0 as u32);
        queue.extend(t.children(u).iter().copied());
    }
    out
}

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random recursive tree with labels drawn from `"a0".."a{k-1}"`.
pub fn random_tree(rng: &mut ChaCha8Rng, n: usize, k: usize) -> LabeledTree {
    let mut labels = Vec::with_capacity(n);
    let mut parents = vec![None];
    for i in 0..n {
        labels.push(format!("a{}", rng.gen_range(0..k)));
        if i > 0 {
            parents.push(Some(rng.gen_range(0..i)));
        }
    }
    LabeledTree::from_parents(labels, &parents).unwrap().to_preorder()
}

/// Random renaming of the labels plus shuffled child lists.
pub fn disguise(rng: &mut ChaCha8Rng, t: &LabeledTree) -> LabeledTree {
    let mut alphabet: Vec<String> = t.alphabet().into_iter().map(str::to_owned).collect();
    let mut targets: Vec<String> = (0..alphabet.len()).map(|i| format!("z{i}")).collect();
    targets.shuffle(rng);
    alphabet.sort();
    let rename: HashMap<String, String> = alphabet.into_iter().zip(targets).collect();
    shuffle(rng, &t.map_labels(|l| rename[l].clone()))
}

pub fn shuffle(rng: &mut ChaCha8Rng, t: &LabeledTree) -> LabeledTree {
    let mut out = t.clone();
    for id in t.ids() {
        let mut order: Vec<usize> = (0..t.children(id).len()).collect();
        order.shuffle(rng);
        out.permute_children(id, &order);
    }
    out.to_preorder()
}

/// Same shape, labels redistributed over the nodes.
pub fn scramble_labels(rng: &mut ChaCha8Rng, t: &LabeledTree) -> LabeledTree {
    let mut labels: Vec<String> = t.nodes().iter().map(|n| n.label.clone()).collect();
    labels.shuffle(rng);
    let mut out = t.clone();
    for (i, l) in labels.into_iter().enumerate() {
        out.set_label(treecipher::NodeId(i), l);
    }
    shuffle(rng, &out)
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Exhaustive search over every tree isomorphism, keeping the induced label
/// relation a bijection. Exponential; meant for trees of about ten nodes.
pub fn brute_force_cipher(t1: &LabeledTree, t2: &LabeledTree) -> bool {
    fn go(
        t1: &LabeledTree,
        t2: &LabeledTree,
        work: &[(usize, usize)],
        fwd: &HashMap<String, String>,
        bwd: &HashMap<String, String>,
    ) -> bool {
        let Some((&(u, v), rest)) = work.split_first() else {
            return true;
        };
        let (a, b) = (t1.label(treecipher::NodeId(u)), t2.label(treecipher::NodeId(v)));
        match (fwd.get(a), bwd.get(b)) {
            (Some(x), _) if x != b => return false,
            (_, Some(y)) if y != a => return false,
            _ => {}
        }
        let mut fwd = fwd.clone();
        let mut bwd = bwd.clone();
        fwd.insert(a.to_owned(), b.to_owned());
        bwd.insert(b.to_owned(), a.to_owned());
        let cu = t1.children(treecipher::NodeId(u));
        let cv = t2.children(treecipher::NodeId(v));
        if cu.len() != cv.len() {
            return false;
        }
        permutations(cu.len()).into_iter().any(|perm| {
            let mut next: Vec<(usize, usize)> = rest.to_vec();
            next.extend(cu.iter().zip(perm.iter()).map(|(x, &j)| (x.0, cv[j].0)));
            go(t1, t2, &next, &fwd, &bwd)
        })
    }
    t1.len() == t2.len() && go(t1, t2, &[(0, 0)], &HashMap::new(), &HashMap::new())
}

/// Canonical text with sorted children, written independently of the
/// library's classifier.
pub fn canon(t: &LabeledTree, labelled: bool) -> String {
    fn go(t: &LabeledTree, u: treecipher::NodeId, labelled: bool) -> String {
        let mut kids: Vec<String> = t.children(u).iter().map(|&c| go(t, c, labelled)).collect();
        kids.sort();
        let head = if labelled { format!("{:?}", t.label(u)) } else { String::new() };
        format!("{head}({})", kids.join(","))
    }
    go(t, t.root(), labelled)
}
