//! Backtracking over the choices left after deductions.

use super::deduce::{apply_rules, map_nodes, Conflict, Recorder, Step};
use super::state::{ext_bij, SearchState};
use super::Instance;

/// Next choices to explore.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Candidates {
    /// Node pairs `(u, v)` from the smallest bag, pivot `u` fixed.
    Bags(Vec<(u32, u32)>),
    /// Set pairs `(P, Q)` (set ids) from the selected collection, `P` fixed.
    Collections(Vec<(usize, usize)>),
    Empty,
}

/// Bags first, smallest bag first; otherwise the collection with the
/// largest set size `n`, ties by fewest sets of that size.
pub fn next_candidates(st: &SearchState) -> Candidates {
    if let Some((_, bag)) = st.live_bags().min_by_key(|(_, b)| (b.size(), b.b1[0])) {
        let u = bag.b1[0];
        return Candidates::Bags(bag.b2.iter().map(|&v| (u, v)).collect());
    }
    let mut best: Option<(usize, usize, u32, usize)> = None;
    for (cid, coll) in st.live_collections() {
        let mut n_max = 0;
        let mut count = 0;
        let mut first = u32::MAX;
        for &s in &coll.c1 {
            let set = st.set(1, s);
            let n = set.nodes.len();
            if n > n_max {
                n_max = n;
                count = 0;
                first = u32::MAX;
            }
            if n == n_max {
                count += 1;
                first = first.min(set.nodes[0]);
            }
        }
        // larger n wins, then fewer sets, then smaller first node
        let better = match best {
            None => true,
            Some((bn, bc, bf, _)) => (n_max, std::cmp::Reverse(count), std::cmp::Reverse(first)) > (bn, std::cmp::Reverse(bc), std::cmp::Reverse(bf)),
        };
        if better {
            best = Some((n_max, count, first, cid));
        }
    }
    let Some((n, _, first, cid)) = best else {
        return Candidates::Empty;
    };
    let coll = st.colls[cid].as_ref().expect("live collection");
    let p = *coll
        .c1
        .iter()
        .find(|&&s| st.set(1, s).nodes[0] == first)
        .expect("pivot set");
    let mut qs: Vec<usize> = coll.c2.iter().copied().filter(|&s| st.set(2, s).nodes.len() == n).collect();
    qs.sort_by_key(|&s| st.set(2, s).nodes[0]);
    Candidates::Collections(qs.into_iter().map(|q| (p, q)).collect())
}

fn apply_bag_choice(inst: &Instance, st: &mut SearchState, rec: &mut Recorder, u: u32, v: u32) -> Step {
    map_nodes(inst, st, rec, u, v)?;
    apply_rules(inst, st, rec)
}

fn apply_collection_choice(inst: &Instance, st: &mut SearchState, rec: &mut Recorder, p: usize, q: usize) -> Step {
    let (a, b) = (st.set(1, p).label, st.set(2, q).label);
    if !ext_bij(&mut st.f, a, b) {
        return Err(Conflict);
    }
    let p = st.take_set(1, p);
    let q = st.take_set(2, q);
    st.add_bag(p.nodes, q.nodes);
    apply_rules(inst, st, rec)
}

#[derive(Debug)]
pub enum SearchOutcome {
    Found(Box<SearchState>),
    Exhausted,
    LimitReached,
}

struct Frame {
    saved: SearchState,
    choices: Candidates,
    next: usize,
}

impl Frame {
    fn len(&self) -> usize {
        match &self.choices {
            Candidates::Bags(l) => l.len(),
            Candidates::Collections(l) => l.len(),
            Candidates::Empty => 0,
        }
    }
}

/// Depth-first search over [`next_candidates`], each choice followed by the
/// deduction rules. A failed subtree restores the saved state and moves on
/// to the next candidate.
///
/// `states` counts the root plus one per attempted choice; a try that would
/// push it past `step_limit` stops the search.
pub fn backtrack(
    inst: &Instance,
    start: SearchState,
    step_limit: Option<u64>,
    rec: &mut Recorder,
    states: &mut u64,
) -> SearchOutcome {
    *states = 1;
    let mut stack: Vec<Frame> = Vec::new();
    let mut cur = start;
    'descend: loop {
        let choices = next_candidates(&cur);
        if choices == Candidates::Empty {
            return SearchOutcome::Found(Box::new(cur));
        }
        stack.push(Frame {
            saved: cur,
            choices,
            next: 0,
        });
        loop {
            let Some(top) = stack.last_mut() else {
                return SearchOutcome::Exhausted;
            };
            if top.next >= top.len() {
                stack.pop();
                continue;
            }
            if step_limit.is_some_and(|l| *states >= l) {
                return SearchOutcome::LimitReached;
            }
            *states += 1;
            let i = top.next;
            top.next += 1;
            let mut st = top.saved.clone();
            let ok = match &top.choices {
                Candidates::Bags(l) => apply_bag_choice(inst, &mut st, rec, l[i].0, l[i].1),
                Candidates::Collections(l) => apply_collection_choice(inst, &mut st, rec, l[i].0, l[i].1),
                Candidates::Empty => unreachable!(),
            };
            if ok.is_ok() {
                cur = st;
                continue 'descend;
            }
        }
    }
}
