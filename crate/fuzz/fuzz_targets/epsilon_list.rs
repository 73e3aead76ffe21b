#![no_main]

use aacs::config::parse_epsilon_list;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(list) = parse_epsilon_list(text) {
        assert!(!list.is_empty());
        assert!(list.iter().all(|e| *e > 0.0 && e.is_finite()));
        let printed = list.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",");
        assert_eq!(parse_epsilon_list(&printed).expect("printed list parses"), list);
    }
});
