use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use qcmod::geometry::RingCondenser;
use qcmod::inequality::{
    i_star, i_star_capacity_bound, normalize_eta, rhs_integral, EtaProfile, RadialWeight, ETA_NODES,
};
use qcmod::modulus::{condenser_capacity, ring_modulus_closed_form, CapacityOptions, FamilySpec, ResolutionSpec};
use qcmod::zoo::MappingSpec;

fn origin() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normalisation_gives_unit_integral_and_shrinks_rhs(r1 in 0.05..0.5f64, k in 1.5..6.0f64, seed in any::<u64>(), grow in 1.0..3.0f64, alpha in 1.1..2.0f64) {
        let r2 = r1 * k;
        let eta = EtaProfile::random(r1, r2, 16, seed).unwrap().scaled(grow).unwrap();
        let unit = normalize_eta(&eta).unwrap();
        prop_assert!((unit.integral() - 1.0).abs() < 1e-12);
        let q = RadialWeight::constant(1.0).unwrap();
        let before = rhs_integral(&q, origin(), r1, r2, alpha, &eta).unwrap().value;
        let after = rhs_integral(&q, origin(), r1, r2, alpha, &unit).unwrap().value;
        prop_assert!(after <= before * (1.0 + 1e-12));
        prop_assert!((after * grow.powf(alpha) - before).abs() <= 1e-9 * before);
    }

    #[test]
    fn identity_extremal_rhs_is_the_ring_modulus(r1 in 0.05..2.0f64, k in 1.2..10.0f64) {
        let r2 = r1 * k;
        let q = RadialWeight::constant(1.0).unwrap();
        let eta = EtaProfile::extremal_for(&q, origin(), r1, r2, 2.0, ETA_NODES).unwrap();
        let rhs = rhs_integral(&q, origin(), r1, r2, 2.0, &eta).unwrap().value;
        let exact = 2.0 * PI / k.ln();
        prop_assert!((rhs - exact).abs() <= 1e-6 * exact);
    }

    #[test]
    fn extremal_profile_minimises_rhs(alpha in 1.1..1.95f64, r1 in 0.05..0.3f64, seed in any::<u64>(), factor in 1.0..3.0f64) {
        let r2 = (r1 * 3.0).min(0.9);
        let map = MappingSpec::sec4(alpha).unwrap();
        let q = RadialWeight::dilatation(&map, alpha, 1.0, 1.0).unwrap();
        let rhs = |eta: &EtaProfile| rhs_integral(&q, origin(), r1, r2, alpha, eta).unwrap().value;
        let ext = EtaProfile::extremal_for(&q, origin(), r1, r2, alpha, 256).unwrap();
        let e = rhs(&ext);
        prop_assert!(e <= rhs(&EtaProfile::constant(r1, r2, 1.0 / (r2 - r1)).unwrap()) * (1.0 + 1e-6));
        prop_assert!(e <= rhs(&EtaProfile::random(r1, r2, 8, seed).unwrap()) * (1.0 + 1e-6));
        prop_assert!(e <= rhs(&ext.scaled(factor).unwrap()) * (1.0 + 1e-12));
    }

    #[test]
    fn i_star_shrinks_as_the_inner_radius_grows(alpha in 1.1..2.0f64, a in 0.01..0.2f64, b in 0.01..0.2f64) {
        let q = RadialWeight::log_weight();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let big = i_star(&q, origin(), lo, 0.5, alpha).unwrap().value;
        let small = i_star(&q, origin(), hi, 0.5, alpha).unwrap().value;
        prop_assert!(small <= big);
        prop_assert_eq!(i_star(&q, origin(), 0.5, 0.5, alpha).unwrap().value, 0.0);
    }
}

#[test]
fn eta_ordering_on_fixed_instances() {
    for alpha in [1.2, 1.5, 1.9] {
        let map = MappingSpec::sec4(alpha).unwrap();
        let q = RadialWeight::dilatation(&map, alpha, 1.0, 1.0).unwrap();
        let (r1, r2) = (0.1, 0.5);
        let rhs = |eta: &EtaProfile| rhs_integral(&q, origin(), r1, r2, alpha, eta).unwrap().value;
        let ext = EtaProfile::extremal_for(&q, origin(), r1, r2, alpha, ETA_NODES).unwrap();
        let constant = EtaProfile::constant(r1, r2, 1.0 / (r2 - r1)).unwrap();
        let scaled = constant.scaled(1.5).unwrap();
        assert!(rhs(&ext) <= rhs(&constant) && rhs(&constant) <= rhs(&scaled), "alpha {alpha}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// The image capacity never exceeds `2π / I*^{α−1}` built from the
    /// weight `N·K_{I,α}^{p−1}`, `p = α/(α−1)`.
    #[test]
    fn image_capacity_below_i_star_bound(which in 0usize..4, alpha in 1.2..2.0f64, r1 in 0.1..0.3f64, ratio in 1.5..3.0f64) {
        let (map, n) = match which {
            0 => (MappingSpec::identity(), 1.0),
            1 => (MappingSpec::power(2).unwrap(), 2.0),
            2 => (MappingSpec::power(3).unwrap(), 3.0),
            _ => (MappingSpec::sec4(alpha.min(1.95)).unwrap(), 1.0),
        };
        let r2 = (r1 * ratio).min(0.9);
        let p = alpha / (alpha - 1.0);
        let q = RadialWeight::dilatation(&map, alpha, n, p - 1.0).unwrap();
        let bound = i_star_capacity_bound(&q, origin(), r1, r2, alpha).unwrap();
        let ring = RingCondenser::new(origin(), r1, r2).unwrap();
        let opts = CapacityOptions {
            family: FamilySpec { n_angles: 48, n_perturb: 8, ..FamilySpec::default() },
            resolution: ResolutionSpec::new(64, 64),
        };
        let cap = condenser_capacity(&ring, alpha, Some(&map), &opts).unwrap();
        prop_assert!(cap.lower <= bound * (1.0 + 1e-3), "{map}: {} > {bound}", cap.lower);
        if which == 0 {
            let exact = ring_modulus_closed_form(r1, r2, alpha).unwrap().lower;
            prop_assert!((bound - exact).abs() <= 1e-6 * exact);
        }
    }
}
