mod common;

use num_bigint::BigUint;
use treecipher::analytics::state_bound;
use treecipher::solver::*;
use treecipher::{parse_tree, LabeledTree, NodeId};

use common::*;

fn big(x: u64) -> BigUint {
    BigUint::from(x)
}

fn traced(t1: &LabeledTree, t2: &LabeledTree) -> IsoResult {
    is_ciphering_isomorphic(t1, t2, SolveOptions { step_limit: None, trace: true })
}

#[test]
fn running_example_phases() {
    let (t1, t2) = (parse_tree(RUNNING_T1).unwrap(), parse_tree(RUNNING_T2).unwrap());
    let r = traced(&t1, &t2);
    assert_eq!(r.verdict, Verdict::Isomorphic);
    let phases = r.trace.as_ref().unwrap().phase_sizes();
    let expected: Vec<BigUint> = [11_496_038_400u64, 2_073_600, 69_120, 4_608, 256, 8].map(big).to_vec();
    assert_eq!(phases, expected);
    let cipher = r.cipher.clone().unwrap();
    for (a, b) in [("A", "α"), ("B", "β"), ("C", "γ")] {
        assert!(cipher.contains(&(a.to_string(), b.to_string())), "{cipher:?}");
    }
    assert!(verify_ciphering(&t1, &t2, r.mapping.as_ref().unwrap(), &cipher));
    assert_eq!(r.stats.n_after_deductions, Some(big(8)));
}

#[test]
fn running_example_candidates_after_deductions() {
    let (t1, t2) = (parse_tree(RUNNING_T1).unwrap(), parse_tree(RUNNING_T2).unwrap());
    let inst = Instance::new(&t1, &t2);
    let mut rec = Recorder::new(false);
    let st = deduction_phase(&inst, &mut rec).unwrap();
    st.check_invariants().unwrap();
    let u = bfs_names(&t1);
    let v = bfs_names(&t2);
    let expected = vec![(u[9], v[7]), (u[9], v[8])];
    assert_eq!(next_candidates(&st), Candidates::Bags(expected));
    assert!(rec.map_nodes_calls <= t1.len() as u64);
}

#[test]
fn running_example_does_not_backtrack() {
    let (t1, t2) = (parse_tree(RUNNING_T1).unwrap(), parse_tree(RUNNING_T2).unwrap());
    let r = traced(&t1, &t2);
    // every first choice succeeds: one state per tuple level, no retries
    let tries = r.stats.states_visited - 1;
    let levels: u64 = r.stats.model_tuples.len() as u64;
    assert!(tries <= levels * 2, "tries {tries}");
    assert!(r.stats.map_nodes_total >= t1.len() as u64);
}

#[test]
fn growth_counterexample_trajectory() {
    let t = parse_tree(GROWTH_T).unwrap();
    let r = traced(&t, &t);
    assert_eq!(r.verdict, Verdict::Isomorphic);
    let traj = r.trace.as_ref().unwrap().trajectory();
    let expected: Vec<BigUint> = [479_001_600u64, 241_920, 80_640, 768, 384, 576].map(big).to_vec();
    assert_eq!(traj, expected);
}

#[test]
fn scaled_pair_pair_has_six_label_cipher() {
    let (t1, t2) = (parse_tree(SCALED_T1).unwrap(), parse_tree(SCALED_T2).unwrap());
    let r = is_ciphering_isomorphic(&t1, &t2, SolveOptions::default());
    assert_eq!(r.verdict, Verdict::Isomorphic);
    let cipher = r.cipher.unwrap();
    assert_eq!(cipher.len(), 6);
    assert!(verify_ciphering(&t1, &t2, r.mapping.as_ref().unwrap(), &cipher));
}

#[test]
fn scaled_pair_witness_verifies() {
    let (t1, t2) = (parse_tree(SCALED_T1).unwrap(), parse_tree(SCALED_T2).unwrap());
    // both trees are stored with matching child order, so the identity on
    // node ids is the witness
    let mapping: Vec<NodeId> = t1.ids().collect();
    let cipher: Vec<(String, String)> = [("1", "2"), ("2", "4"), ("3", "6"), ("4", "8"), ("9", "18"), ("16", "32")]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    assert!(verify_ciphering(&t1, &t2, &mapping, &cipher));

    // swapping two sibling images with different labels breaks it
    let mut bad = mapping.clone();
    bad.swap(2, 3);
    assert!(!verify_ciphering(&t1, &t2, &bad, &cipher));
    let mut wrong = cipher.clone();
    wrong[0].1 = "4".into();
    assert!(!verify_ciphering(&t1, &t2, &mapping, &wrong));
}

#[test]
fn trivial_cases() {
    let t = parse_tree(TWIN_TREE).unwrap();
    let r = traced(&t, &t);
    assert_eq!(r.verdict, Verdict::Isomorphic);
    for (a, b) in r.cipher.as_ref().unwrap() {
        assert_eq!(a, b);
    }

    let single = LabeledTree::leaf("x");
    let r = traced(&single, &single);
    assert_eq!(r.verdict, Verdict::Isomorphic);
    assert!(r.trace.unwrap().phase_sizes().iter().all(|n| *n == big(1)));

    let a = parse_tree("a(a,b)").unwrap();
    let b = parse_tree("a(b,c)").unwrap();
    let r = is_ciphering_isomorphic(&a, &b, SolveOptions::default());
    assert_eq!(r.verdict, Verdict::NotIsomorphic);
    assert_eq!(r.stats.states_visited, 0);

    let shape = parse_tree("a(b(c))").unwrap();
    let other = parse_tree("a(b,c)").unwrap();
    assert_eq!(is_ciphering_isomorphic(&shape, &other, SolveOptions::default()).verdict, Verdict::NotIsomorphic);
}

#[test]
fn ext_bij_examples() {
    let (t1, t2) = (parse_tree(RUNNING_T1).unwrap(), parse_tree(RUNNING_T2).unwrap());
    let inst = Instance::new(&t1, &t2);
    let (lb, la) = (inst.label_id1("B").unwrap(), inst.label_id1("A").unwrap());
    let beta = inst.label_id2("β").unwrap();
    let mut f = inst.empty_state().f;
    assert!(ext_bij(&mut f, lb, beta));
    assert_eq!(f.get(lb), Some(beta));
    assert!(ext_bij(&mut f, lb, beta));
    assert_eq!(f.len(), 1);
    assert!(!ext_bij(&mut f, la, beta));
}

#[test]
fn map_nodes_examples() {
    let (t1, t2) = (parse_tree(RUNNING_T1).unwrap(), parse_tree(RUNNING_T2).unwrap());
    let inst = Instance::new(&t1, &t2);
    let mut st = inst.empty_state();
    let mut rec = Recorder::new(false);
    assert!(map_nodes(&inst, &mut st, &mut rec, 0, 0).is_ok());
    assert_eq!(st.f.get(inst.label_id1("B").unwrap()), inst.label_id2("β"));

    // u2 (label B) against v3 (label α) clashes with f(B) = β
    assert!(map_nodes(&inst, &mut st, &mut rec, 1, 2).is_err());

    // parent mapped elsewhere: a(b(c),b(c)) with b1 -> b1 forced, then c of
    // the first b against c of the second b
    let t = parse_tree("a(b(c),b(c))").unwrap();
    let inst = Instance::new(&t, &t);
    let mut st = inst.empty_state();
    let mut rec = Recorder::new(false);
    assert!(map_nodes(&inst, &mut st, &mut rec, 1, 1).is_ok());
    assert!(map_nodes(&inst, &mut st, &mut rec, 2, 4).is_err());
}

#[test]
fn split_children_on_bags() {
    // u and v with three children each, inside a bag of four per side;
    // each child has one child of its own
    let t = parse_tree("r(u(a(x),a(x),a(x)),w(a(x)))").unwrap();
    let inst = Instance::new(&t, &t);
    let mut st = inst.empty_state();
    let level1 = vec![2, 4, 6, 9];
    let level2 = vec![3, 5, 7, 10];
    st.add_bag(level1.clone(), level1.clone());
    st.add_bag(level2.clone(), level2.clone());
    split_children(&inst, &mut st, vec![1], vec![1]).unwrap();
    let mut sizes: Vec<usize> = st.bags().iter().map(|(a, _)| a.len()).collect();
    sizes.sort();
    assert_eq!(sizes, vec![1, 1, 3, 3]);
    assert!(st.bags().contains(&(vec![2, 4, 6], vec![2, 4, 6])));
    assert!(st.bags().contains(&(vec![3, 5, 7], vec![3, 5, 7])));

    // childless nodes change nothing
    let before = st.bags();
    split_children(&inst, &mut st, vec![3], vec![3]).unwrap();
    assert_eq!(st.bags(), before);
}

#[test]
fn split_children_on_collections() {
    // one set of five same-label nodes: three children of u, two elsewhere
    let t = parse_tree("r(u(c(y,y),c(y),c),w(c(y),c))").unwrap();
    let inst = Instance::new(&t, &t);
    let c = inst.label_id1("c").unwrap();
    let cs: Vec<u32> = t.ids().filter(|&i| t.label(i) == "c").map(|i| i.0 as u32).collect();
    assert_eq!(cs.len(), 5);
    let mut st = inst.empty_state();
    st.add_collection(vec![(c, cs.clone())], vec![(c, cs.clone())]);
    split_children(&inst, &mut st, vec![1], vec![1]).unwrap();
    let colls = st.collections();
    assert_eq!(colls.len(), 2);
    let mut sizes: Vec<usize> = colls.iter().map(|(c1, _)| c1[0].1.len()).collect();
    sizes.sort();
    assert_eq!(sizes, vec![2, 3]);
    st.check_invariants().unwrap();
}

#[test]
fn search_space_of_hand_built_states() {
    let t = parse_tree("r(a,a,a,b(c,c),d(c,c))").unwrap();
    let inst = Instance::new(&t, &t);
    let mut st = inst.empty_state();
    assert_eq!(st.search_space_size(), big(1));
    st.add_bag(vec![1, 2, 3], vec![1, 2, 3]);
    let c = inst.label_id1("c").unwrap();
    let d = inst.label_id1("d").unwrap();
    st.add_collection(vec![(c, vec![5, 6]), (d, vec![8, 9])], vec![(c, vec![5, 6]), (d, vec![8, 9])]);
    assert_eq!(st.search_space_size(), big(48));
}

#[test]
fn candidates_prefer_largest_set_size() {
    let t = parse_tree("r(a,a,a,b,b,b,c,c,d,d,e,e)").unwrap();
    let inst = Instance::new(&t, &t);
    let l = |s: &str| inst.label_id1(s).unwrap();
    let mut st = inst.empty_state();
    st.add_collection(vec![(l("c"), vec![7, 8])], vec![(l("c"), vec![7, 8])]);
    st.add_collection(
        vec![(l("a"), vec![1, 2, 3]), (l("b"), vec![4, 5, 6])],
        vec![(l("a"), vec![1, 2, 3]), (l("b"), vec![4, 5, 6])],
    );
    match next_candidates(&st) {
        Candidates::Collections(list) => {
            assert_eq!(list.len(), 2);
            assert_eq!(st.set(1, list[0].0).nodes, vec![1, 2, 3]);
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(next_candidates(&inst.empty_state()), Candidates::Empty);
}

#[test]
fn step_limit_yields_unknown() {
    // many interchangeable subtrees with a mismatch only visible deep in the
    // search
    let t1 = parse_tree("r(x(a,b),x(c,d),x(e,f),x(g,h))").unwrap();
    let t2 = parse_tree("r(x(a,b),x(c,d),x(e,f),x(g,h))").unwrap();
    let r = is_ciphering_isomorphic(&t1, &t2, SolveOptions { step_limit: Some(1), trace: false });
    assert_eq!(r.verdict, Verdict::Unknown);
    assert!(r.stats.states_visited <= 1);
    let r = is_ciphering_isomorphic(&t1, &t2, SolveOptions::default());
    assert_eq!(r.verdict, Verdict::Isomorphic);
}

#[test]
fn determinism() {
    let (t1, t2) = (parse_tree(RUNNING_T1).unwrap(), parse_tree(RUNNING_T2).unwrap());
    let a = traced(&t1, &t2);
    let b = traced(&t1, &t2);
    assert_eq!(a.mapping, b.mapping);
    assert_eq!(a.cipher, b.cipher);
    assert_eq!(a.stats, b.stats);
    assert_eq!(a.trace, b.trace);
}

#[test]
fn state_bound_on_reference_instances() {
    for (a, b) in [(RUNNING_T1, RUNNING_T2), (GROWTH_T, GROWTH_T), (SCALED_T1, SCALED_T2), (TWIN_TREE, TWIN_TREE)] {
        let (t1, t2) = (parse_tree(a).unwrap(), parse_tree(b).unwrap());
        let r = is_ciphering_isomorphic(&t1, &t2, SolveOptions::default());
        let n = r.stats.n_after_deductions.clone().unwrap();
        assert!(BigUint::from(r.stats.states_visited) <= state_bound(&n) + 1u32);
    }
}
