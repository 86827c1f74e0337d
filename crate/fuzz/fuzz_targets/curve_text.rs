#![no_main]
use libfuzzer_sys::fuzz_target;

use num_complex::Complex64;
use qcmod::geometry::{parse_curves, write_curves};

fuzz_target!(|data: &str| {
    if let Ok(curves) = parse_curves(data) {
        let text = write_curves(&curves);
        let again = parse_curves(&text).expect("written curves parse");
        assert_eq!(write_curves(&again), text);
        for c in &curves {
            let _ = c.winding_number(Complex64::new(0.0, 0.0));
            let _ = c.length();
        }
    }
});
