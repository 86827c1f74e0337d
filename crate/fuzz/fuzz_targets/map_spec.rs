#![no_main]
use libfuzzer_sys::fuzz_target;

use num_complex::Complex64;
use qcmod::zoo::MappingSpec;

fuzz_target!(|data: &str| {
    if data.trim_start().starts_with("grid:") {
        return;
    }
    if let Ok(map) = MappingSpec::parse(data) {
        let name = map.to_string();
        let again = MappingSpec::parse(&name).expect("display form parses");
        assert_eq!(again.to_string(), name);
        let z = Complex64::new(0.3, -0.2);
        let _ = map.eval(z);
        let _ = map.derivative(z);
    }
});
