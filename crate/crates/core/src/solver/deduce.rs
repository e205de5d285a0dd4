//! Deductions: node mapping, recursive child splitting, the topological
//! phases and the four deduction rules.

use std::collections::BTreeMap;

use super::state::{ext_bij, Loc, SearchState, NONE};
use super::{Instance, Snapshot};

/// Marker for an inconsistent state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conflict;

pub type Step<T = ()> = Result<T, Conflict>;

/// Counters and optional size snapshots gathered while solving.
#[derive(Debug, Clone, Default)]
pub struct Recorder {
    pub map_nodes_calls: u64,
    pub rule_applications: [u64; 4],
    pub snapshots: Option<Vec<Snapshot>>,
}

impl Recorder {
    pub fn new(trace: bool) -> Self {
        Recorder {
            snapshots: trace.then(Vec::new),
            ..Default::default()
        }
    }

    fn snap(&mut self, st: &SearchState, tag: &str) {
        if let Some(s) = &mut self.snapshots {
            s.push(Snapshot {
                tag: tag.to_owned(),
                size: st.search_space_size(),
            });
        }
    }

    fn rule(&mut self, st: &SearchState, rule: usize) {
        self.rule_applications[rule - 1] += 1;
        const TAGS: [&str; 4] = ["rule1", "rule2", "rule3", "rule4"];
        self.snap(st, TAGS[rule - 1]);
    }
}

fn sorted_diff(all: &[u32], part: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(all.len().saturating_sub(part.len()));
    let mut j = 0;
    for &x in all {
        if j < part.len() && part[j] == x {
            j += 1;
        } else {
            out.push(x);
        }
    }
    out
}

fn remove_sorted(v: &mut Vec<u32>, x: u32) -> bool {
    match v.binary_search(&x) {
        Ok(i) => {
            v.remove(i);
            true
        }
        Err(_) => false,
    }
}

/// Takes `u` and `v` out of their bag or collection before they are mapped.
fn detach(st: &mut SearchState, u: u32, v: u32) -> Step {
    match (st.loc1[u as usize], st.loc2[v as usize]) {
        (Loc::Bag(a), Loc::Bag(b)) if a == b => {
            let bag = st.bags[a].as_mut().expect("live bag");
            remove_sorted(&mut bag.b1, u);
            remove_sorted(&mut bag.b2, v);
            if bag.b1.is_empty() {
                st.bags[a] = None;
            }
        }
        (Loc::Set(s), Loc::Set(t)) => {
            let (p, q) = (st.set(1, s), st.set(2, t));
            if p.coll != q.coll || p.nodes.len() != q.nodes.len() {
                return Err(Conflict);
            }
            let mut p = st.take_set(1, s);
            let mut q = st.take_set(2, t);
            remove_sorted(&mut p.nodes, u);
            remove_sorted(&mut q.nodes, v);
            if !p.nodes.is_empty() {
                st.add_bag(p.nodes, q.nodes);
            }
        }
        (Loc::Free, Loc::Free) => {}
        _ => return Err(Conflict),
    }
    st.loc1[u as usize] = Loc::Mapped;
    st.loc2[v as usize] = Loc::Mapped;
    Ok(())
}

/// Maps `u ↦ v`, extends the cipher, separates their children and walks up
/// the parent chain until already-mapped parents are met.
pub fn map_nodes(inst: &Instance, st: &mut SearchState, rec: &mut Recorder, u: u32, v: u32) -> Step {
    let (mut u, mut v) = (u, v);
    loop {
        rec.map_nodes_calls += 1;
        if !ext_bij(&mut st.f, inst.lab1[u as usize], inst.lab2[v as usize]) {
            return Err(Conflict);
        }
        if st.phi.get(u) != Some(v) {
            if !ext_bij(&mut st.phi, u, v) {
                return Err(Conflict);
            }
            detach(st, u, v)?;
        }
        split_children(inst, st, vec![u], vec![v])?;
        let (pu, pv) = (inst.parent1[u as usize], inst.parent2[v as usize]);
        match (pu == NONE, pv == NONE) {
            (true, true) => return Ok(()),
            (false, false) => {}
            _ => return Err(Conflict),
        }
        if st.phi.get(pu) == Some(pv) {
            return Ok(());
        }
        u = pu;
        v = pv;
    }
}

#[derive(Default)]
struct CollHits {
    side1: BTreeMap<usize, Vec<u32>>,
    side2: BTreeMap<usize, Vec<u32>>,
}

/// Splits every bag and collection set meeting the children of `s1` / `s2`
/// into the children part and the rest, then recurses on both parts.
pub fn split_children(inst: &Instance, st: &mut SearchState, s1: Vec<u32>, s2: Vec<u32>) -> Step {
    let mut work = vec![(s1, s2)];
    while let Some((a, b)) = work.pop() {
        let mut bag_hits: BTreeMap<usize, (Vec<u32>, Vec<u32>)> = BTreeMap::new();
        let mut coll_hits: BTreeMap<usize, CollHits> = BTreeMap::new();
        for &x in &a {
            for &c in &inst.children1[x as usize] {
                match st.loc1[c as usize] {
                    Loc::Bag(id) => bag_hits.entry(id).or_default().0.push(c),
                    Loc::Set(s) => {
                        let coll = st.set(1, s).coll;
                        coll_hits.entry(coll).or_default().side1.entry(s).or_default().push(c);
                    }
                    Loc::Mapped | Loc::Free => {}
                }
            }
        }
        for &y in &b {
            for &c in &inst.children2[y as usize] {
                match st.loc2[c as usize] {
                    Loc::Bag(id) => bag_hits.entry(id).or_default().1.push(c),
                    Loc::Set(s) => {
                        let coll = st.set(2, s).coll;
                        coll_hits.entry(coll).or_default().side2.entry(s).or_default().push(c);
                    }
                    Loc::Mapped | Loc::Free => {}
                }
            }
        }

        for (id, (mut xu, mut xv)) in bag_hits {
            if xu.len() != xv.len() {
                return Err(Conflict);
            }
            let bag = st.bags[id].as_ref().expect("live bag");
            if xu.len() == bag.size() {
                continue;
            }
            xu.sort_unstable();
            xv.sort_unstable();
            let rest1 = sorted_diff(&bag.b1, &xu);
            let rest2 = sorted_diff(&bag.b2, &xv);
            let bag = st.bags[id].as_mut().expect("live bag");
            bag.b1 = rest1.clone();
            bag.b2 = rest2.clone();
            st.add_bag(xu.clone(), xv.clone());
            work.push((rest1, rest2));
            work.push((xu, xv));
        }

        for (cid, hits) in coll_hits {
            split_collection(st, cid, hits, &mut work)?;
        }
    }
    Ok(())
}

type Work = Vec<(Vec<u32>, Vec<u32>)>;

fn split_collection(st: &mut SearchState, cid: usize, hits: CollHits, work: &mut Work) -> Step {
    let coll = st.colls[cid].clone().expect("live collection");

    // nodes of the children must land in same-size sets on both sides
    let mut per_n1: BTreeMap<usize, usize> = BTreeMap::new();
    let mut per_n2: BTreeMap<usize, usize> = BTreeMap::new();
    for (&s, xs) in &hits.side1 {
        *per_n1.entry(st.set(1, s).nodes.len()).or_insert(0) += xs.len();
    }
    for (&s, ys) in &hits.side2 {
        *per_n2.entry(st.set(2, s).nodes.len()).or_insert(0) += ys.len();
    }
    if per_n1 != per_n2 {
        return Err(Conflict);
    }

    // per n: (parts in C', parts in C'') as (set id, inner part, outer part)
    type Parts = Vec<(usize, Vec<u32>, Vec<u32>)>;
    let collect = |side: u8, ids: &[usize], hits: &BTreeMap<usize, Vec<u32>>| -> BTreeMap<usize, Parts> {
        let mut out: BTreeMap<usize, Parts> = BTreeMap::new();
        for &s in ids {
            let Some(xs) = hits.get(&s) else { continue };
            let set = st.set(side, s);
            if xs.len() == set.nodes.len() {
                continue;
            }
            let mut inner = xs.clone();
            inner.sort_unstable();
            let outer = sorted_diff(&set.nodes, &inner);
            out.entry(set.nodes.len()).or_default().push((s, inner, outer));
        }
        out
    };
    let split1 = collect(1, &coll.c1, &hits.side1);
    let split2 = collect(2, &coll.c2, &hits.side2);

    let profile = |parts: &Parts, inner: bool| -> BTreeMap<usize, usize> {
        let mut m = BTreeMap::new();
        for (_, i, o) in parts {
            *m.entry(if inner { i.len() } else { o.len() }).or_insert(0) += 1;
        }
        m
    };
    let empty: Parts = Vec::new();
    let sizes: std::collections::BTreeSet<usize> = split1.keys().chain(split2.keys()).copied().collect();
    for n in sizes {
        let p1 = split1.get(&n).unwrap_or(&empty);
        let p2 = split2.get(&n).unwrap_or(&empty);
        if profile(p1, true) != profile(p2, true) || profile(p1, false) != profile(p2, false) {
            return Err(Conflict);
        }
        let mut inner_sets = (Vec::new(), Vec::new());
        let mut outer_sets = (Vec::new(), Vec::new());
        let mut s_in = (Vec::new(), Vec::new());
        let mut s_out = (Vec::new(), Vec::new());
        for (s, inner, outer) in p1 {
            let label = st.take_set(1, *s).label;
            s_in.0.extend_from_slice(inner);
            s_out.0.extend_from_slice(outer);
            inner_sets.0.push((label, inner.clone()));
            outer_sets.0.push((label, outer.clone()));
        }
        for (s, inner, outer) in p2 {
            let label = st.take_set(2, *s).label;
            s_in.1.extend_from_slice(inner);
            s_out.1.extend_from_slice(outer);
            inner_sets.1.push((label, inner.clone()));
            outer_sets.1.push((label, outer.clone()));
        }
        st.add_collection(inner_sets.0, inner_sets.1);
        st.add_collection(outer_sets.0, outer_sets.1);
        s_in.0.sort_unstable();
        s_in.1.sort_unstable();
        s_out.0.sort_unstable();
        s_out.1.sort_unstable();
        work.push(s_out);
        work.push(s_in);
    }
    Ok(())
}

/// Refines every bag by a per-node key. Keys must have equal counts on both
/// sides.
fn split_bags_by<K: Ord + Copy>(
    st: &mut SearchState,
    ids: &[usize],
    key1: impl Fn(&SearchState, u32) -> K,
    key2: impl Fn(&SearchState, u32) -> K,
) -> Step {
    for &id in ids {
        let Some(bag) = st.bags[id].as_ref() else { continue };
        let mut g1: BTreeMap<K, Vec<u32>> = BTreeMap::new();
        let mut g2: BTreeMap<K, Vec<u32>> = BTreeMap::new();
        for &u in &bag.b1 {
            g1.entry(key1(st, u)).or_default().push(u);
        }
        for &v in &bag.b2 {
            g2.entry(key2(st, v)).or_default().push(v);
        }
        if g1.len() != g2.len() || g1.iter().zip(&g2).any(|((k1, a), (k2, b))| k1 != k2 || a.len() != b.len()) {
            return Err(Conflict);
        }
        if g1.len() == 1 {
            continue;
        }
        st.remove_bag(id);
        for ((_, a), (_, b)) in g1.into_iter().zip(g2) {
            st.add_bag(a, b);
        }
    }
    Ok(())
}

fn live_bag_ids(st: &SearchState) -> Vec<usize> {
    st.live_bags().map(|(i, _)| i).collect()
}

/// Rule 1: map every bag of size one.
fn rule1(inst: &Instance, st: &mut SearchState, rec: &mut Recorder) -> Step<bool> {
    let mut progress = false;
    let mut i = 0;
    while i < st.bags.len() {
        if let Some(bag) = &st.bags[i] {
            if bag.size() == 1 {
                let (u, v) = (bag.b1[0], bag.b2[0]);
                map_nodes(inst, st, rec, u, v)?;
                rec.rule(st, 1);
                progress = true;
            }
        }
        i += 1;
    }
    Ok(progress)
}

fn rule1_fixpoint(inst: &Instance, st: &mut SearchState, rec: &mut Recorder) -> Step {
    while rule1(inst, st, rec)? {}
    Ok(())
}

fn labels_of(st: &SearchState, side: u8, ids: &[usize]) -> BTreeMap<u32, Vec<usize>> {
    let mut m: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for &s in ids {
        m.entry(st.set(side, s).label).or_default().push(s);
    }
    m
}

/// Rule 2: split collections along labels already mapped by `f`.
fn rule2(st: &mut SearchState, rec: &mut Recorder) -> Step<bool> {
    let mut progress = false;
    let mut cid = 0;
    while cid < st.colls.len() {
        while let Some(coll) = st.colls[cid].as_ref() {
            let by1 = labels_of(st, 1, &coll.c1);
            let by2 = labels_of(st, 2, &coll.c2);
            for &b in by2.keys() {
                if let Some(a) = st.f.inverse(b) {
                    if !by1.contains_key(&a) {
                        return Err(Conflict);
                    }
                }
            }
            let mut target = None;
            for (&a, sets_a) in &by1 {
                let Some(b) = st.f.get(a) else { continue };
                let Some(sets_b) = by2.get(&b) else { return Err(Conflict) };
                if st.size_profile(1, sets_a) != st.size_profile(2, sets_b) {
                    return Err(Conflict);
                }
                if target.is_none() && by1.len() > 1 {
                    target = Some((sets_a.clone(), sets_b.clone()));
                }
            }
            let Some((sa, sb)) = target else { break };
            let c1: Vec<_> = sa.iter().map(|&s| st.take_set(1, s)).map(|s| (s.label, s.nodes)).collect();
            let c2: Vec<_> = sb.iter().map(|&s| st.take_set(2, s)).map(|s| (s.label, s.nodes)).collect();
            st.add_collection(c1, c2);
            rec.rule(st, 2);
            progress = true;
        }
        cid += 1;
    }
    Ok(progress)
}

fn sets_by_size(st: &SearchState, side: u8, ids: &[usize]) -> BTreeMap<usize, Vec<usize>> {
    let mut m: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &s in ids {
        m.entry(st.set(side, s).nodes.len()).or_default().push(s);
    }
    m
}

/// Rule 3: a size class whose sets carry one label per side fixes that label
/// pair.
fn rule3(st: &mut SearchState, rec: &mut Recorder) -> Step<bool> {
    let mut progress = false;
    for cid in 0..st.colls.len() {
        let Some(coll) = st.colls[cid].as_ref() else { continue };
        let g1 = sets_by_size(st, 1, &coll.c1);
        let g2 = sets_by_size(st, 2, &coll.c2);
        let mut pairs = Vec::new();
        for (n, s1) in &g1 {
            let s2 = &g2[n];
            let a = st.set(1, s1[0]).label;
            let b = st.set(2, s2[0]).label;
            if s1.iter().all(|&s| st.set(1, s).label == a) && s2.iter().all(|&s| st.set(2, s).label == b) {
                pairs.push((a, b));
            }
        }
        for (a, b) in pairs {
            match (st.f.get(a), st.f.inverse(b)) {
                (None, None) => {
                    ext_bij(&mut st.f, a, b);
                    rec.rule(st, 3);
                    progress = true;
                }
                (Some(x), _) if x == b => {}
                _ => return Err(Conflict),
            }
        }
    }
    Ok(progress)
}

/// Rule 4: a size class with a single set per side becomes a bag.
fn rule4(st: &mut SearchState, rec: &mut Recorder) -> Step<bool> {
    let mut progress = false;
    for cid in 0..st.colls.len() {
        while let Some(coll) = st.colls[cid].as_ref() {
            let g1 = sets_by_size(st, 1, &coll.c1);
            let g2 = sets_by_size(st, 2, &coll.c2);
            let Some((p, q)) = g1
                .iter()
                .find(|(_, s)| s.len() == 1)
                .map(|(n, s)| (s[0], g2[n][0]))
            else {
                break;
            };
            let (a, b) = (st.set(1, p).label, st.set(2, q).label);
            if !ext_bij(&mut st.f, a, b) {
                return Err(Conflict);
            }
            let p = st.take_set(1, p);
            let q = st.take_set(2, q);
            st.add_bag(p.nodes, q.nodes);
            rec.rule(st, 4);
            progress = true;
        }
    }
    Ok(progress)
}

/// Applies rules 1 to 4 in turn until a full round deduces nothing.
pub fn apply_rules(inst: &Instance, st: &mut SearchState, rec: &mut Recorder) -> Step {
    loop {
        let mut progress = rule1(inst, st, rec)?;
        progress |= rule2(st, rec)?;
        progress |= rule3(st, rec)?;
        progress |= rule4(st, rec)?;
        if !progress {
            return Ok(());
        }
    }
}

/// Label histogram step. Returns the initial bags, one per occurrence count.
fn histogram_bags(inst: &Instance, st: &mut SearchState) -> Step {
    let count = |labs: &[u32], n_labels: usize| {
        let mut c = vec![0usize; n_labels];
        for &l in labs {
            c[l as usize] += 1;
        }
        c
    };
    let c1 = count(&inst.lab1, inst.labels1.len());
    let c2 = count(&inst.lab2, inst.labels2.len());
    let hist = |c: &[usize]| {
        let mut h: BTreeMap<usize, usize> = BTreeMap::new();
        for &k in c {
            *h.entry(k).or_insert(0) += 1;
        }
        h
    };
    if hist(&c1) != hist(&c2) {
        return Err(Conflict);
    }
    let mut g1: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    let mut g2: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for u in 0..inst.n as u32 {
        g1.entry(c1[inst.lab1[u as usize] as usize]).or_default().push(u);
        g2.entry(c2[inst.lab2[u as usize] as usize]).or_default().push(u);
    }
    for ((_, a), (_, b)) in g1.into_iter().zip(g2) {
        st.add_bag(a, b);
    }
    Ok(())
}

/// Phase tags, in order.
pub const PHASES: [&str; 6] = ["histogram", "depth", "class", "parents", "collections", "deductions"];

/// Runs the histogram, depth, class and parent phases, converts bags to
/// collections and closes under the deduction rules.
pub fn deduction_phase(inst: &Instance, rec: &mut Recorder) -> Step<SearchState> {
    let mut st = SearchState::new(inst.n, inst.labels1.len(), inst.labels2.len());

    histogram_bags(inst, &mut st)?;
    rec.snap(&st, PHASES[0]);

    let ids = live_bag_ids(&st);
    split_bags_by(&mut st, &ids, |_, u| inst.depth1[u as usize], |_, v| inst.depth2[v as usize])?;
    rule1_fixpoint(inst, &mut st, rec)?;
    rec.snap(&st, PHASES[1]);

    let ids = live_bag_ids(&st);
    split_bags_by(&mut st, &ids, |_, u| inst.class1[u as usize], |_, v| inst.class2[v as usize])?;
    rule1_fixpoint(inst, &mut st, rec)?;
    rec.snap(&st, PHASES[2]);

    let mut ids = live_bag_ids(&st);
    ids.sort_by_key(|&id| (inst.depth1[st.bags[id].as_ref().unwrap().b1[0] as usize], id));
    split_bags_by(
        &mut st,
        &ids,
        |st, u| parent_key(st, 1, inst.parent1[u as usize]),
        |st, v| parent_key(st, 2, inst.parent2[v as usize]),
    )?;
    rule1_fixpoint(inst, &mut st, rec)?;
    rec.snap(&st, PHASES[3]);

    for id in live_bag_ids(&st) {
        let bag = st.remove_bag(id);
        let group = |labs: &[u32], nodes: Vec<u32>| {
            let mut m: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
            for x in nodes {
                m.entry(labs[x as usize]).or_default().push(x);
            }
            m.into_iter().collect::<Vec<_>>()
        };
        let c1 = group(&inst.lab1, bag.b1);
        let c2 = group(&inst.lab2, bag.b2);
        let prof = |c: &[(u32, Vec<u32>)]| {
            let mut m: BTreeMap<usize, usize> = BTreeMap::new();
            for (_, n) in c {
                *m.entry(n.len()).or_insert(0) += 1;
            }
            m
        };
        if prof(&c1) != prof(&c2) {
            return Err(Conflict);
        }
        st.add_collection(c1, c2);
    }
    rec.snap(&st, PHASES[4]);

    apply_rules(inst, &mut st, rec)?;
    rec.snap(&st, PHASES[5]);
    Ok(st)
}

/// Grouping key for the parent phase: the structure holding the parent, or
/// the T1 side of the parent's mapping.
fn parent_key(st: &SearchState, side: u8, p: u32) -> (u8, usize) {
    if p == NONE {
        return (0, 0);
    }
    let loc = if side == 1 { st.loc1[p as usize] } else { st.loc2[p as usize] };
    match loc {
        Loc::Mapped => {
            let u = if side == 1 { p } else { st.phi.inverse(p).expect("mapped") };
            (1, u as usize)
        }
        Loc::Bag(b) => (2, b),
        Loc::Set(s) => (3, s),
        Loc::Free => (4, p as usize),
    }
}
