#![no_main]

use aacs::quantizer::{parse_samples, FourierSymbol};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() > 16384 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(samples) = parse_samples(text) else { return };
    assert!(samples.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
    if let Ok(symbol) = FourierSymbol::from_samples(std::f64::consts::TAU, &samples) {
        let c0 = symbol.coeff(0);
        assert!(!c0.re.is_nan() && !c0.im.is_nan());
    }
});
