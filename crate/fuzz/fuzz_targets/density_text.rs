#![no_main]
use libfuzzer_sys::fuzz_target;

use qcmod::modulus::GridDensity;

fuzz_target!(|data: &str| {
    if let Ok(d) = GridDensity::parse_text(data) {
        let text = d.to_text();
        let again = GridDensity::parse_text(&text).expect("written density parses");
        assert_eq!(again, d);
    }
});
