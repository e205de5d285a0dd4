mod common;

use treecipher::dag_rw::{compress_rw, decompress_rw, rw_from_json, rw_stats, rw_to_json, Cipher};
use treecipher::{parse_tree, LabeledTree, NodeId};

use common::*;

/// Number of `∼`-classes among all subtrees, by pairwise brute force.
fn brute_force_classes(t: &LabeledTree) -> usize {
    let subs: Vec<LabeledTree> = t.ids().map(|u| t.subtree(u)).collect();
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..subs.len() {
        if !reps.iter().any(|&r| brute_force_cipher(&subs[r], &subs[i])) {
            reps.push(i);
        }
    }
    reps.len()
}

#[test]
fn vertex_count_matches_pairwise_classes() {
    let mut r = rng(3);
    for i in 0..150 {
        let t = random_tree(&mut r, 2 + i % 11, 1 + i % 4);
        let d = compress_rw(&t, None);
        assert_eq!(d.vertices.len(), brute_force_classes(&t), "{t}");
        // sections are pairwise inequivalent
        for a in &d.vertices {
            for b in d.vertices.iter().filter(|b| b.id > a.id) {
                assert!(!brute_force_cipher(&t.subtree(a.section), &t.subtree(b.section)));
            }
        }
    }
}

#[test]
fn all_distinct_subtrees() {
    // leaves aside, no two subtrees of this caterpillar share a size
    let t = parse_tree("a(b(c(d(e,f),g),h),i)").unwrap();
    assert_eq!(brute_force_classes(&t), t.len() - 4);
    let chain = parse_tree("a(b(c(d(e(f)))))").unwrap();
    assert_eq!(rw_stats(&compress_rw(&chain, None)).vertex_count, chain.len());
    let mut r = rng(8);
    for _ in 0..30 {
        let t = random_tree(&mut r, 12, 1);
        let unique = t.map_labels(|_| String::new());
        let mut u = unique.clone();
        for id in unique.ids() {
            u.set_label(id, format!("n{}", id.0));
        }
        let d = compress_rw(&u, None);
        assert_eq!(d.vertices.len(), brute_force_classes(&u));
    }
}

#[test]
fn every_vertex_has_identity_in_edge() {
    let mut r = rng(21);
    for _ in 0..100 {
        let t = random_tree(&mut r, 50, 4);
        let d = compress_rw(&t, None);
        for v in d.vertices.iter().filter(|v| v.id != d.source) {
            assert!(d.edges.iter().any(|e| e.to == v.id && e.cipher == Cipher::Identity));
        }
        let out: Vec<usize> = d.vertices.iter().map(|v| d.edges.iter().filter(|e| e.from == v.id).count()).collect();
        for v in &d.vertices {
            assert_eq!(out[v.id], t.children(v.section).len());
        }
        assert_eq!(d.expanded_size().unwrap(), t.len());
    }
}

#[test]
fn json_round_trip_and_decompress() {
    let t = parse_tree(TWIN_TREE).unwrap();
    let d = compress_rw(&t, None);
    let back = rw_from_json(&rw_to_json(&d)).unwrap();
    assert_eq!(back, d);
    assert_eq!(canon(&decompress_rw(&back).unwrap(), true), canon(&t, true));
    assert!(rw_to_json(&d).contains("\"kind\": \"identity\""));
}

#[test]
fn single_vertex() {
    let d = rw_from_json(r#"{"vertices":[{"id":0,"label":"A","section":0}],"edges":[],"source":0}"#).unwrap();
    assert_eq!(decompress_rw(&d).unwrap(), LabeledTree::leaf("A"));
    assert_eq!(d.vertices[0].section, NodeId(0));
}

#[test]
fn step_limited_compression_stays_lossless() {
    let mut r = rng(4);
    for _ in 0..50 {
        let t = random_tree(&mut r, 40, 3);
        let full = compress_rw(&t, None);
        let limited = compress_rw(&t, Some(1));
        assert!(limited.vertices.len() >= full.vertices.len());
        assert_eq!(canon(&decompress_rw(&limited).unwrap(), true), canon(&t, true));
    }
}
