#![no_main]

use libfuzzer_sys::fuzz_target;
use treecipher::{parse_tree, serialize_tree};

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(t) = parse_tree(src) {
        assert_eq!(parse_tree(&serialize_tree(&t)).unwrap(), t);
    }
});
