#![no_main]

use libfuzzer_sys::fuzz_target;
use treecipher::text::{tree_from_json, tree_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(t) = tree_from_json(src) {
        assert_eq!(tree_from_json(&tree_to_json(&t)).unwrap(), t);
    }
});
