#![no_main]
use libfuzzer_sys::fuzz_target;

use qcmod::zoo::{parse_grid_file, write_grid_file};

fuzz_target!(|data: &str| {
    if let Ok(grid) = parse_grid_file(data) {
        let text = write_grid_file(&grid);
        let again = parse_grid_file(&text).expect("written grid parses");
        assert_eq!(write_grid_file(&again), text);
        let _ = grid.eval(grid.inscribed_disk().center);
    }
});
