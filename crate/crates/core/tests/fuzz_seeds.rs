//! Runs the fuzz corpus seeds through the same entry points as the fuzz
//! targets, so a crashing seed fails the ordinary test run.

use std::fs;
use std::path::PathBuf;

use treecipher::dag::{dag_from_json, decompress_limited};
use treecipher::dag_rw::{decompress_rw_limited, rw_from_json};
use treecipher::text::{tree_from_json, tree_to_json};
use treecipher::{parse_dataset, parse_tree, serialize_tree};

fn seeds(target: &str) -> Vec<String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<String> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| fs::read_to_string(e.unwrap().path()).unwrap())
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn parse_tree_seeds() {
    let mut ok = 0;
    for s in seeds("parse_tree") {
        if let Ok(t) = parse_tree(&s) {
            assert_eq!(parse_tree(&serialize_tree(&t)).unwrap(), t);
            ok += 1;
        }
    }
    assert!(ok > 0);
}

#[test]
fn tree_from_json_seeds() {
    let mut ok = 0;
    for s in seeds("tree_from_json") {
        if let Ok(t) = tree_from_json(&s) {
            assert_eq!(tree_from_json(&tree_to_json(&t)).unwrap(), t);
            ok += 1;
        }
    }
    assert!(ok > 0);
}

#[test]
fn parse_dataset_seeds() {
    let results: Vec<bool> = seeds("parse_dataset").iter().map(|s| parse_dataset(s).is_ok()).collect();
    assert!(results.contains(&true) && results.contains(&false));
}

#[test]
fn dag_seeds() {
    for s in seeds("dag_from_json") {
        let d = dag_from_json(&s).unwrap();
        decompress_limited(&d, 1 << 16).unwrap();
    }
    for s in seeds("rw_from_json") {
        let d = rw_from_json(&s).unwrap();
        decompress_rw_limited(&d, 1 << 16).unwrap();
    }
}
