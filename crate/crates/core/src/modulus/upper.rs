//! Upper bounds and the capacity/duality operations built on both bounds.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    generate_joining_family, generate_separating_family, push_forward, RingCondenser, PUSH_CHORD_TOL,
};
use crate::quad::pairwise_sum;
use crate::zoo::MappingSpec;

use super::density::{Density, ExtremalDensity, GridDensity};
use super::solver::{restricted_modulus_lower, ResolutionSpec};
use super::{check_order, ring_modulus_closed_form, Method, ModulusEstimate};

/// Density offered as an upper-bound witness for a ring.
#[derive(Debug, Clone, PartialEq)]
pub enum Candidate {
    /// `scale` times the extremal ring density.
    Extremal { scale: f64 },
    Grid(GridDensity),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateOptions {
    pub probe_angles: usize,
    pub probe_perturb: usize,
    pub probe_seed: u64,
    /// Largest probe shortfall `1 − min ∫_γ ρ ds` that is repaired by
    /// rescaling rather than rejected.
    pub tol: f64,
    pub radial_cells: usize,
    pub angular_cells: usize,
}

impl Default for CandidateOptions {
    fn default() -> Self {
        CandidateOptions {
            probe_angles: 720,
            probe_perturb: 200,
            probe_seed: 0x5eed,
            tol: 1e-3,
            radial_cells: 2048,
            angular_cells: 256,
        }
    }
}

/// `∫_A ρ^p dm` over the ring by the midpoint rule on a polar grid with
/// log-spaced radii; cells use exact areas and geometric-mean radii.
fn polar_energy(density: &dyn Density, ring: &RingCondenser, p: f64, n_r: usize, n_a: usize) -> Result<f64> {
    let (u0, u1) = (ring.r1.ln(), ring.r2.ln());
    let du = (u1 - u0) / n_r as f64;
    let dt = 2.0 * PI / n_a as f64;
    let rows: Vec<f64> = (0..n_r)
        .into_par_iter()
        .map(|i| {
            let (ra, rb) = ((u0 + i as f64 * du).exp(), (u0 + (i + 1) as f64 * du).exp());
            let area = 0.5 * dt * (rb * rb - ra * ra);
            let r = (ra * rb).sqrt();
            let mut cells = Vec::with_capacity(n_a);
            for j in 0..n_a {
                let z = ring.center + Complex64::from_polar(r, (j as f64 + 0.5) * dt);
                cells.push(density.value(z)?.powf(p) * area);
            }
            Ok(pairwise_sum(&cells))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&rows))
}

/// Upper bound for the p-modulus of the curves joining the plates of
/// `ring`, from an explicit density.
///
/// The density is probed on a dense joining family. A shortfall up to
/// `opts.tol` is repaired by rescaling with `1/min`; a larger one is an
/// admissibility error.
pub fn candidate_modulus_upper(
    ring: &RingCondenser,
    p: f64,
    candidate: &Candidate,
    opts: &CandidateOptions,
) -> Result<ModulusEstimate> {
    check_order(p)?;
    let extremal;
    let density: &dyn Density = match candidate {
        Candidate::Extremal { scale } => {
            extremal = ExtremalDensity::new(ring.center, ring.r1, ring.r2, p, *scale)?;
            &extremal
        }
        Candidate::Grid(g) => g,
    };
    let probes = generate_joining_family(ring, opts.probe_angles, opts.probe_perturb, opts.probe_seed)?;
    let integrals = probes
        .curves
        .par_iter()
        .map(|c| density.curve_integral(c))
        .collect::<Result<Vec<_>>>()?;
    let min = integrals.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min >= 1.0 - opts.tol) {
        return Err(Error::InadmissibleDensity(format!(
            "probe line integral {min} is below 1 − {}",
            opts.tol
        )));
    }
    let energy = polar_energy(density, ring, p, opts.radial_cells, opts.angular_cells)?;
    let rescale = if min < 1.0 { min.powf(-p) } else { 1.0 };
    Ok(ModulusEstimate {
        lower: 0.0,
        upper: energy * rescale,
        method: Method::CandidateDensity,
        iterations: 0,
        residual: (1.0 - min).max(0.0),
        converged: true,
        resolution: Some([opts.radial_cells, opts.angular_cells]),
        history: Vec::new(),
    })
}

/// Points sampled on each plate boundary for the comparison ring.
const PLATE_SAMPLES: usize = 4096;

/// Upper bound for the capacity of `(f(B(z0, r2)), f(closure B(z0, r1)))`
/// through the comparison ring `A(w0, a, b)`, where `w0 = f(z0)`, `a` is the
/// largest distance of `f(S(z0, r1))` from `w0` and `b` the smallest
/// distance of `f(S(z0, r2))`. Infinite when `a ≥ b`.
pub fn image_condenser_upper(ring: &RingCondenser, p: f64, map: &MappingSpec) -> Result<ModulusEstimate> {
    check_order(p)?;
    let circle = |r: f64| -> Result<Vec<Complex64>> {
        (0..PLATE_SAMPLES)
            .map(|k| map.eval(ring.center + Complex64::from_polar(r, 2.0 * PI * k as f64 / PLATE_SAMPLES as f64)))
            .collect()
    };
    let inner = circle(ring.r1)?;
    let outer = circle(ring.r2)?;
    let w0 = map.eval(ring.center)?;
    let inner_diameter = inner.iter().map(|w| (w - inner[0]).norm()).fold(0.0, f64::max);
    let outer_diameter = outer.iter().map(|w| (w - outer[0]).norm()).fold(0.0, f64::max);
    if inner_diameter < 1e-12 || outer_diameter < 1e-12 {
        return Err(Error::DegenerateCondenser(format!("`{map}` collapses a plate to a point")));
    }
    let a = inner.iter().map(|w| (w - w0).norm()).fold(0.0, f64::max);
    let b = outer.iter().map(|w| (w - w0).norm()).fold(f64::INFINITY, f64::min);
    let upper = if a > 0.0 && b > a * (1.0 + 1e-9) { ring_modulus_closed_form(a, b, p)?.upper } else { f64::INFINITY };
    Ok(ModulusEstimate {
        lower: 0.0,
        upper,
        method: Method::CandidateDensity,
        iterations: 0,
        residual: 0.0,
        converged: true,
        resolution: None,
        history: Vec::new(),
    })
}

/// Witness family parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub n_angles: usize,
    pub n_perturb: usize,
    pub n_radii: usize,
    pub seed: u64,
}

impl Default for FamilySpec {
    fn default() -> Self {
        FamilySpec { n_angles: 360, n_perturb: 100, n_radii: 200, seed: 7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CapacityOptions {
    pub family: FamilySpec,
    pub resolution: ResolutionSpec,
}

/// p-capacity of the condenser `(B(z0, r2), closure B(z0, r1))` or of its
/// image under `map`.
///
/// Without a map (or for the identity) this is the closed-form ring
/// modulus. Otherwise the capacity of the image condenser equals the
/// modulus of the curves joining its plates; the pushed-forward joining
/// family gives the lower bound and the comparison ring the upper bound.
pub fn condenser_capacity(
    ring: &RingCondenser,
    p: f64,
    map: Option<&MappingSpec>,
    opts: &CapacityOptions,
) -> Result<ModulusEstimate> {
    check_order(p)?;
    let map = match map {
        None => return ring_modulus_closed_form(ring.r1, ring.r2, p),
        Some(m) if m.is_identity() => return ring_modulus_closed_form(ring.r1, ring.r2, p),
        Some(m) => m,
    };
    let dom = map.domain();
    if !dom.is_plane() && (ring.center - dom.center).norm() + ring.r2 > dom.radius * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!("`{map}` is not defined on the whole outer ball")));
    }
    let upper = image_condenser_upper(ring, p, map)?;
    let family = generate_joining_family(ring, opts.family.n_angles, opts.family.n_perturb, opts.family.seed)?;
    let image = push_forward(&family, map, PUSH_CHORD_TOL);
    if image.is_empty() {
        return Err(Error::DegenerateCondenser("every witness curve was dropped".into()));
    }
    let lower = restricted_modulus_lower(&image, p, &opts.resolution)?;
    Ok(ModulusEstimate::sandwich(&lower, &upper))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityReport {
    pub p: f64,
    pub cap: f64,
    /// Solver estimate of the separating-circle `p′`-modulus.
    pub sep_modulus: f64,
    /// `cap^{−1/(p−1)}`.
    pub target: f64,
    pub identity_residual: f64,
    pub sep_estimate: ModulusEstimate,
}

/// Compares the ring capacity with the `p′`-modulus of the separating
/// circles, `p′ = p/(p − 1)`, through `M_{p′}(Σ) = cap_p^{−1/(p−1)}`.
pub fn duality_check(ring: &RingCondenser, p: f64, opts: &CapacityOptions) -> Result<DualityReport> {
    check_order(p)?;
    if p <= 1.0 + 1e-6 {
        return Err(Error::invalid(format!("order {p} is too close to 1 for the dual exponent")));
    }
    let cap = condenser_capacity(ring, p, None, opts)?.lower;
    let q = p / (p - 1.0);
    let family = generate_separating_family(ring, opts.family.n_radii)?;
    let sep = restricted_modulus_lower(&family, q, &opts.resolution)?;
    let target = cap.powf(-1.0 / (p - 1.0));
    Ok(DualityReport {
        p,
        cap,
        sep_modulus: sep.lower,
        target,
        identity_residual: (sep.lower - target).abs() / target,
        sep_estimate: sep,
    })
}
