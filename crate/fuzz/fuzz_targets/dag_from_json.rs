#![no_main]

use libfuzzer_sys::fuzz_target;
use treecipher::dag::{dag_from_json, decompress_limited};

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(d) = dag_from_json(src) {
        let _ = decompress_limited(&d, 1 << 16);
    }
});
