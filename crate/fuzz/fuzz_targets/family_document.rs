#![no_main]

use aacs::family::FamilyDocument;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() > 4096 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(doc) = FamilyDocument::from_json(text) else {
        return;
    };
    assert_eq!(FamilyDocument::from_json(&doc.to_json()).expect("round trip"), doc);
    if let Ok(family) = doc.to_family() {
        for n in [0i64, 1, 3] {
            if family.contains_level(n) {
                let p = family.eval(n, 0.5);
                assert!(p >= 0.0 && !p.is_nan());
            }
        }
    }
});
