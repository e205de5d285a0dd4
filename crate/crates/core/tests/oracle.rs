mod common;

use treecipher::solver::{audit, is_ciphering_isomorphic, verify_ciphering, SolveOptions, Verdict};

use common::*;

#[test]
fn brute_force_oracle_sanity() {
    let t = treecipher::parse_tree("a(b,b(c))").unwrap();
    assert!(brute_force_cipher(&t, &treecipher::parse_tree("x(y(z),y)").unwrap()));
    assert!(!brute_force_cipher(&t, &treecipher::parse_tree("x(y(y),y)").unwrap()));
    assert!(!brute_force_cipher(&t, &treecipher::parse_tree("x(y(z),w)").unwrap()));
    assert!(!brute_force_cipher(&t, &treecipher::parse_tree("x(y,y,z)").unwrap()));
}

#[test]
fn solver_agrees_with_brute_force() {
    let mut r = rng(11);
    let (mut iso, mut non) = (0, 0);
    for i in 0..400 {
        let n = 1 + i % 10;
        let k = 1 + (i / 10) % 4;
        let t1 = random_tree(&mut r, n, k);
        let t2 = match i % 3 {
            0 => disguise(&mut r, &t1),
            1 => scramble_labels(&mut r, &t1),
            _ => random_tree(&mut r, n, k),
        };
        let expected = brute_force_cipher(&t1, &t2);
        let got = is_ciphering_isomorphic(&t1, &t2, SolveOptions::default());
        assert_eq!(got.verdict == Verdict::Isomorphic, expected, "{t1} vs {t2}");
        if expected {
            iso += 1;
            assert!(verify_ciphering(&t1, &t2, got.mapping.as_ref().unwrap(), got.cipher.as_ref().unwrap()));
        } else {
            non += 1;
        }
    }
    assert!(iso > 100 && non > 100, "{iso} iso, {non} non-iso");
    assert_eq!(audit::counts().violations, 0);
}

#[test]
fn larger_label_shuffles() {
    // same shape and histogram, so only the search can tell them apart
    let mut r = rng(5);
    for i in 0..150 {
        let t1 = random_tree(&mut r, 9 + i % 2, 3);
        let t2 = scramble_labels(&mut r, &t1);
        let got = is_ciphering_isomorphic(&t1, &t2, SolveOptions::default());
        assert_eq!(got.verdict == Verdict::Isomorphic, brute_force_cipher(&t1, &t2), "{t1} vs {t2}");
    }
}
