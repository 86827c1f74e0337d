//! Registry of concrete planar mappings with analytic derivatives and
//! multiplicities, plus grid-sampled mappings.

mod radial;
mod sampled;
mod sobolev;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::calculus::{numeric_wirtinger, PlanarMap, WirtingerPair};
use crate::error::{Error, Result};
use crate::geometry::{Disk, RingCondenser};

pub use radial::{
    log_weight, radial_stretches, radial_wirtinger, sec4_dilatation_claim, sec4_profile, DilatationClaim,
    ProfileValue, RadialProfile, Sec4Profile, SEC4_MIN_RADIUS, SEC4_TABLE_INTERVALS,
};
pub use sampled::{load_sampled_mapping, parse_grid_file, write_grid_file, SampledGrid};
pub use sobolev::{sobolev_membership_probe, SobolevReport, SobolevVerdict};

/// Concrete map behind a [`MappingSpec`].
#[derive(Clone)]
pub enum MapKind {
    Identity,
    /// `a·z + b·z̄`.
    Affine { a: Complex64, b: Complex64 },
    /// `z^k`.
    Power { k: u32 },
    /// `(z/|z|)·ρ(|z|)`.
    Radial(RadialProfile),
    /// `z/|z|²`.
    Inversion,
    Constant { c: Complex64 },
    Sampled(Arc<SampledGrid>),
}

/// A planar mapping with its domain and, when known, analytic derivative and
/// multiplicity.
#[derive(Clone)]
pub struct MappingSpec {
    id: String,
    params: Vec<f64>,
    domain: Disk,
    kind: MapKind,
}

impl fmt::Debug for MappingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MappingSpec")
            .field("id", &self.id)
            .field("params", &self.params)
            .field("domain", &self.domain)
            .finish()
    }
}

impl fmt::Display for MappingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)?;
        for (k, p) in self.params.iter().enumerate() {
            f.write_str(if k == 0 { ":" } else { "," })?;
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Registered map names, in the order they are documented.
pub const REGISTRY: &[(&str, &str)] = &[
    ("identity", "z"),
    ("affine:a_re,a_im,b_re,b_im", "a z + b conj(z)"),
    ("power:k", "z^k, k = 1..=64"),
    ("radial:k", "z |z|^(k-1), k > 0"),
    ("sec4:alpha", "log-weight example map on the unit disk, 1 < alpha < 2"),
    ("inversion", "z / |z|^2"),
    ("constant:c_re,c_im", "constant map"),
];

fn expect_params(id: &str, params: &[f64], n: usize) -> Result<()> {
    if params.len() != n {
        return Err(Error::Usage(format!("map `{id}` takes {n} parameter(s), got {}", params.len())));
    }
    if let Some(p) = params.iter().find(|p| !p.is_finite()) {
        return Err(Error::Usage(format!("map `{id}` parameter {p} is not finite")));
    }
    Ok(())
}

impl MappingSpec {
    pub fn identity() -> Self {
        MappingSpec { id: "identity".into(), params: vec![], domain: Disk::plane(), kind: MapKind::Identity }
    }

    pub fn power(k: u32) -> Result<Self> {
        if !(1..=64).contains(&k) {
            return Err(Error::Usage(format!("power map needs 1 <= k <= 64, got {k}")));
        }
        Ok(MappingSpec { id: "power".into(), params: vec![k as f64], domain: Disk::plane(), kind: MapKind::Power { k } })
    }

    pub fn affine(a: Complex64, b: Complex64) -> Self {
        MappingSpec {
            id: "affine".into(),
            params: vec![a.re, a.im, b.re, b.im],
            domain: Disk::plane(),
            kind: MapKind::Affine { a, b },
        }
    }

    pub fn radial_power(k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Usage(format!("radial power needs k > 0, got {k}")));
        }
        Ok(MappingSpec {
            id: "radial".into(),
            params: vec![k],
            domain: Disk::plane(),
            kind: MapKind::Radial(RadialProfile::Power { k }),
        })
    }

    /// The log-weight example map `(z/|z|)·ρ(|z|)` on the unit disk.
    pub fn sec4(alpha: f64) -> Result<Self> {
        Ok(MappingSpec {
            id: "sec4".into(),
            params: vec![alpha],
            domain: Disk::unit(),
            kind: MapKind::Radial(RadialProfile::sec4(alpha)?),
        })
    }

    pub fn inversion() -> Self {
        MappingSpec { id: "inversion".into(), params: vec![], domain: Disk::plane(), kind: MapKind::Inversion }
    }

    pub fn constant(c: Complex64) -> Self {
        MappingSpec {
            id: "constant".into(),
            params: vec![c.re, c.im],
            domain: Disk::plane(),
            kind: MapKind::Constant { c },
        }
    }

    pub fn sampled(grid: SampledGrid, label: impl Into<String>) -> Self {
        MappingSpec {
            id: format!("grid:{}", label.into()),
            params: vec![],
            domain: grid.inscribed_disk(),
            kind: MapKind::Sampled(Arc::new(grid)),
        }
    }

    /// Looks up a registry map by name and parameters.
    pub fn from_parts(id: &str, params: &[f64]) -> Result<Self> {
        match id {
            "identity" | "id" => {
                expect_params(id, params, 0)?;
                Ok(Self::identity())
            }
            "affine" => {
                expect_params(id, params, 4)?;
                let a = Complex64::new(params[0], params[1]);
                let b = Complex64::new(params[2], params[3]);
                if (a.norm() - b.norm()).abs() <= 1e-12 * a.norm().max(b.norm()).max(1.0) {
                    return Err(Error::Usage("affine map with |a| = |b| is degenerate".into()));
                }
                Ok(Self::affine(a, b))
            }
            "power" | "z^k" => {
                expect_params(id, params, 1)?;
                let k = params[0];
                if k.fract() != 0.0 || k < 1.0 {
                    return Err(Error::Usage(format!("power map needs a positive integer, got {k}")));
                }
                Self::power(k as u32)
            }
            "z2" => {
                expect_params(id, params, 0)?;
                Self::power(2)
            }
            "z3" => {
                expect_params(id, params, 0)?;
                Self::power(3)
            }
            "radial" => {
                expect_params(id, params, 1)?;
                Self::radial_power(params[0])
            }
            "sec4" => {
                expect_params(id, params, 1)?;
                Self::sec4(params[0]).map_err(|e| Error::Usage(e.to_string()))
            }
            "inversion" => {
                expect_params(id, params, 0)?;
                Ok(Self::inversion())
            }
            "constant" => {
                expect_params(id, params, 2)?;
                Ok(Self::constant(Complex64::new(params[0], params[1])))
            }
            other => Err(Error::Usage(format!("unknown map `{other}`"))),
        }
    }

    /// Parses `name[:p1,p2,...]`, e.g. `sec4:1.5` or `power:3`.
    ///
    /// Grid-sampled maps (`grid:<path>`) are loaded from disk.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some(path) = text.strip_prefix("grid:") {
            return load_sampled_mapping(std::path::Path::new(path));
        }
        let (id, rest) = match text.split_once(':') {
            Some((id, rest)) => (id, Some(rest)),
            None => (text, None),
        };
        if id.is_empty() {
            return Err(Error::Usage("empty map name".into()));
        }
        let params = match rest {
            None => vec![],
            Some(rest) => rest
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Usage(format!("map parameter `{p}` is not a number")))
                })
                .collect::<Result<Vec<_>>>()?,
        };
        Self::from_parts(id, &params)
    }

    pub fn with_domain(mut self, domain: Disk) -> Self {
        self.domain = domain;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn domain(&self) -> Disk {
        self.domain
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, MapKind::Identity)
    }

    pub fn radial_profile(&self) -> Option<&RadialProfile> {
        match &self.kind {
            MapKind::Radial(p) => Some(p),
            MapKind::Identity => None,
            _ => None,
        }
    }

    /// `f(z)`; errors outside the domain or where the map is undefined.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if !self.domain.contains(z) {
            return Err(Error::Domain { map: self.to_string(), re: z.re, im: z.im });
        }
        match &self.kind {
            MapKind::Identity => Ok(z),
            MapKind::Affine { a, b } => Ok(a * z + b * z.conj()),
            MapKind::Power { k } => Ok(z.powu(*k)),
            MapKind::Radial(profile) => {
                let s = z.norm();
                if s == 0.0 {
                    Ok(Complex64::new(0.0, 0.0))
                } else {
                    Ok(z * (profile.rho(s)? / s))
                }
            }
            MapKind::Inversion => {
                let s2 = z.norm_sqr();
                if s2 == 0.0 {
                    Err(Error::Undefined { re: 0.0, im: 0.0, reason: "inversion at the origin".into() })
                } else {
                    Ok(z / s2)
                }
            }
            MapKind::Constant { c } => Ok(*c),
            MapKind::Sampled(grid) => grid.eval(z),
        }
    }

    /// Analytic derivative when the registry provides one.
    pub fn analytic_derivative(&self, z: Complex64) -> Option<Result<WirtingerPair>> {
        let zero = Complex64::new(0.0, 0.0);
        let pair = match &self.kind {
            MapKind::Identity => Ok(WirtingerPair::new(Complex64::new(1.0, 0.0), zero)),
            MapKind::Affine { a, b } => Ok(WirtingerPair::new(*a, *b)),
            MapKind::Power { k } => {
                let k = *k;
                let fz = if k == 1 { Complex64::new(1.0, 0.0) } else { z.powu(k - 1) * k as f64 };
                Ok(WirtingerPair::new(fz, zero))
            }
            MapKind::Radial(profile) => radial_wirtinger(profile, z),
            MapKind::Inversion => {
                if z.norm_sqr() == 0.0 {
                    Err(Error::Undefined { re: 0.0, im: 0.0, reason: "inversion at the origin".into() })
                } else {
                    let zb = z.conj();
                    Ok(WirtingerPair::new(zero, -1.0 / (zb * zb)))
                }
            }
            MapKind::Constant { .. } => Ok(WirtingerPair::new(zero, zero)),
            MapKind::Sampled(_) => return None,
        };
        if !self.domain.contains(z) {
            return Some(Err(Error::Domain { map: self.to_string(), re: z.re, im: z.im }));
        }
        Some(pair)
    }

    /// Analytic derivative if available, Richardson-extrapolated central
    /// differences otherwise.
    pub fn derivative(&self, z: Complex64) -> Result<WirtingerPair> {
        match self.analytic_derivative(z) {
            Some(pair) => pair,
            None => Ok(numeric_wirtinger(self, z, None)?.extrapolated),
        }
    }

    /// Exact `N(f, D)` for registry maps on their whole domain.
    pub fn known_multiplicity(&self) -> Option<u32> {
        match &self.kind {
            MapKind::Identity | MapKind::Affine { .. } | MapKind::Radial(_) | MapKind::Inversion => Some(1),
            MapKind::Power { k } => Some(*k),
            MapKind::Constant { .. } | MapKind::Sampled(_) => None,
        }
    }
}

impl PlanarMap for MappingSpec {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        MappingSpec::eval(self, z)
    }

    fn name(&self) -> String {
        self.to_string()
    }
}

/// Region over which a multiplicity is requested.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Disk(Disk),
    Ring(RingCondenser),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Multiplicity {
    pub count: u32,
    /// Probe-based lower bound rather than an exact value.
    pub approximate: bool,
    /// The probe hit the preimage cap.
    pub capped: bool,
}

/// Preimage cap for probe-based multiplicity.
pub const MULTIPLICITY_CAP: u32 = 64;

/// `N(f, E) = sup_y #{z ∈ E : f(z) = y}`.
pub fn multiplicity(map: &MappingSpec, region: Region) -> Result<Multiplicity> {
    let exact = |count| Ok(Multiplicity { count, approximate: false, capped: false });
    match map.kind() {
        MapKind::Identity | MapKind::Affine { .. } | MapKind::Radial(_) | MapKind::Inversion => exact(1),
        MapKind::Constant { .. } => Err(Error::invalid("constant map has unbounded multiplicity")),
        MapKind::Power { k } => {
            let (center, outer, surrounds) = match region {
                Region::Disk(d) => (d.center, d.radius, d.center.norm() < d.radius),
                Region::Ring(r) => (r.center, r.r2, r.center.norm() < 0.5 * (r.r2 - r.r1)),
            };
            if surrounds {
                return exact(*k);
            }
            // Otherwise count k-th roots that fit in the angular window the
            // region subtends at the origin.
            let d = center.norm();
            let width = if d <= outer { 2.0 * PI } else { 2.0 * (outer / d).asin() };
            let fit = ((*k as f64) * width / (2.0 * PI)).ceil() as u32;
            exact(fit.clamp(1, *k))
        }
        MapKind::Sampled(grid) => {
            let (count, capped) = grid.probe_multiplicity(MULTIPLICITY_CAP);
            Ok(Multiplicity { count, approximate: true, capped })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn parse_registry_names() {
        assert_eq!(MappingSpec::parse("identity").unwrap().id(), "identity");
        assert_eq!(MappingSpec::parse("power:3").unwrap().known_multiplicity(), Some(3));
        assert_eq!(MappingSpec::parse("sec4:1.5").unwrap().to_string(), "sec4:1.5");
        assert!(MappingSpec::parse("power:2.5").is_err());
        assert!(MappingSpec::parse("sec4:2").is_err());
        assert!(MappingSpec::parse("nope").is_err());
        assert!(MappingSpec::parse("affine:1,0").is_err());
        assert!(MappingSpec::parse("affine:1,0,1,0").is_err());
        assert!(MappingSpec::parse("radial:x").is_err());
    }

    #[test]
    fn multiplicity_examples() {
        let disk = Region::Disk(Disk::unit());
        assert_eq!(multiplicity(&MappingSpec::identity(), disk).unwrap().count, 1);
        assert_eq!(multiplicity(&MappingSpec::power(3).unwrap(), disk).unwrap().count, 3);
        for k in 1..=6 {
            let m = multiplicity(&MappingSpec::power(k).unwrap(), disk).unwrap();
            assert_eq!(m.count, k);
            assert!(!m.approximate);
        }
    }

    #[test]
    fn multiplicity_of_offset_disk() {
        // A small disk away from 0 sees a single branch of z^2.
        let small = Region::Disk(Disk::new(c(2.0, 0.0), 0.5));
        assert_eq!(multiplicity(&MappingSpec::power(2).unwrap(), small).unwrap().count, 1);
    }

    #[test]
    fn analytic_power_derivative() {
        let f = MappingSpec::power(3).unwrap();
        let z = c(0.4, -0.3);
        let pair = f.derivative(z).unwrap();
        assert!((pair.fz - z * z * 3.0).norm() < 1e-15);
    }

    #[test]
    fn sec4_eval_origin_and_outside() {
        let f = MappingSpec::sec4(1.5).unwrap();
        assert_eq!(f.eval(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert!(matches!(f.eval(c(1.5, 0.0)), Err(Error::Domain { .. })));
        let w = f.eval(c(0.0, 1.0)).unwrap();
        assert!((w - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn inversion_undefined_at_origin() {
        let f = MappingSpec::inversion();
        assert!(matches!(f.eval(c(0.0, 0.0)), Err(Error::Undefined { .. })));
        let pair = f.derivative(c(0.5, 0.0)).unwrap();
        assert!((pair.norm() - 4.0).abs() < 1e-12);
        assert!(pair.jacobian() < 0.0);
    }
}
