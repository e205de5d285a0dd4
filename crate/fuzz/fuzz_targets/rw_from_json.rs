#![no_main]

use libfuzzer_sys::fuzz_target;
use treecipher::dag_rw::{decompress_rw_limited, rw_from_json};

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(d) = rw_from_json(src) {
        let _ = decompress_rw_limited(&d, 1 << 16);
    }
});
