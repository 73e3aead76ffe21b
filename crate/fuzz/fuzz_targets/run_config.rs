#![no_main]

use aacs::config::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = RunConfig::from_json(text) {
        let again = RunConfig::from_json(&config.to_json()).expect("serialized config parses");
        assert_eq!(again, config);
        let _ = config.epsilons();
    }
});
