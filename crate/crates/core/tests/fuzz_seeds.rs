//! Replays the checked-in fuzz corpus through the same round-trip checks as
//! the fuzz targets, so the seeds stay meaningful on a stable toolchain.

use std::path::PathBuf;

use num_complex::Complex64;

use qcmod::campaign::CampaignConfig;
use qcmod::geometry::{parse_curves, write_curves};
use qcmod::modulus::GridDensity;
use qcmod::zoo::{parse_grid_file, write_grid_file, MappingSpec};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn grid_file_seeds() {
    let mut parsed = 0;
    for (_, text) in seeds("grid_file") {
        if let Ok(grid) = parse_grid_file(&text) {
            let w = write_grid_file(&grid);
            assert_eq!(write_grid_file(&parse_grid_file(&w).unwrap()), w);
            parsed += 1;
        }
    }
    assert!(parsed >= 1);
}

#[test]
fn density_text_seeds() {
    let mut parsed = 0;
    for (_, text) in seeds("density_text") {
        if let Ok(d) = GridDensity::parse_text(&text) {
            assert_eq!(GridDensity::parse_text(&d.to_text()).unwrap(), d);
            parsed += 1;
        }
    }
    assert!(parsed >= 1);
}

#[test]
fn curve_text_seeds() {
    let mut parsed = 0;
    for (_, text) in seeds("curve_text") {
        if let Ok(curves) = parse_curves(&text) {
            let w = write_curves(&curves);
            assert_eq!(write_curves(&parse_curves(&w).unwrap()), w);
            parsed += 1;
        }
    }
    assert!(parsed >= 1);
}

#[test]
fn campaign_config_seeds() {
    let mut parsed = 0;
    for (name, text) in seeds("campaign_config") {
        match CampaignConfig::from_toml(&text) {
            Ok(c) => {
                let again = CampaignConfig::from_toml(&c.to_toml()).unwrap();
                assert_eq!(again, c, "{name}");
                parsed += 1;
            }
            Err(e) => assert!(name.contains("alpha_three") && e.to_string().contains("1<α≤2"), "{name}: {e}"),
        }
    }
    assert!(parsed >= 3);
}

#[test]
fn map_spec_seeds() {
    let mut parsed = 0;
    for (_, text) in seeds("map_spec") {
        if let Ok(map) = MappingSpec::parse(&text) {
            let name = map.to_string();
            assert_eq!(MappingSpec::parse(&name).unwrap().to_string(), name);
            let z = Complex64::new(0.3, -0.2);
            let _ = map.eval(z);
            let _ = map.derivative(z);
            parsed += 1;
        }
    }
    assert!(parsed >= 7);
}
