//! Both sides of the modulus inequalities: weighted ring integrals with
//! admissible radial profiles, circle averages and norms of the weight, and
//! the `I*` integral.

mod verify;

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::inner_dilatation;
use crate::error::{Error, Result};
use crate::geometry::Disk;
use crate::modulus::power_integral;
use crate::quad::{adaptive_simpson, composite_gauss16, gauss_legendre_rule, log_spaced, pairwise_sum, periodic_trapezoid, Quadrature};
use crate::zoo::{log_weight, MappingSpec};

pub use verify::{
    lower_q_criterion, verify_poletsky, EtaSpec, LowerQOptions, LowerQReport, Mode, Params, VerificationReport,
    Verdict, VerifyOptions,
};

/// Nonnegative weight `Q`, extended by zero outside its domain.
#[derive(Clone)]
pub struct RadialWeight {
    label: String,
    domain: Disk,
    constant: Option<f64>,
    eval: Arc<dyn Fn(Complex64) -> Result<f64> + Send + Sync>,
}

impl fmt::Debug for RadialWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialWeight").field("label", &self.label).field("domain", &self.domain).finish()
    }
}

impl RadialWeight {
    pub fn from_fn<F>(label: impl Into<String>, domain: Disk, f: F) -> Self
    where
        F: Fn(Complex64) -> Result<f64> + Send + Sync + 'static,
    {
        RadialWeight { label: label.into(), domain, constant: None, eval: Arc::new(f) }
    }

    pub fn constant(c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::invalid(format!("weight must be finite and nonnegative, got {c}")));
        }
        let mut w = Self::from_fn(format!("const:{c}"), Disk::plane(), move |_| Ok(c));
        w.constant = Some(c);
        Ok(w)
    }

    /// `log(e/|z|)` on the unit disk.
    pub fn log_weight() -> Self {
        Self::from_fn("log(e/|z|)", Disk::unit(), |z| Ok(log_weight(z.norm())))
    }

    /// `scale · K_{I,α}(z, f)^power` on the map's domain.
    pub fn dilatation(map: &MappingSpec, alpha: f64, scale: f64, power: f64) -> Result<Self> {
        if !(alpha > 1.0 && scale > 0.0 && scale.is_finite() && power > 0.0 && power.is_finite()) {
            return Err(Error::invalid("dilatation weight needs alpha > 1 and positive finite scale and power"));
        }
        let m = map.clone();
        let mut label = format!("K_I,{alpha}[{map}]");
        if power != 1.0 {
            label = format!("{label}^{power}");
        }
        if scale != 1.0 {
            label = format!("{scale}*{label}");
        }
        Ok(Self::from_fn(label, map.domain(), move |z| {
            let k = inner_dilatation(&m.derivative(z)?, alpha).value();
            Ok(scale * k.powf(power))
        }))
    }

    pub fn with_domain(mut self, domain: Disk) -> Self {
        self.domain = domain;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> Disk {
        self.domain
    }

    pub fn constant_value(&self) -> Option<f64> {
        self.constant
    }

    /// `Q(z)`, zero outside the open domain.
    pub fn value(&self, z: Complex64) -> Result<f64> {
        if !self.domain.contains_open(z) {
            return Ok(0.0);
        }
        let q = (self.eval)(z)?;
        if q.is_nan() || q < 0.0 {
            return Err(Error::invalid(format!("weight `{}` is {q} at ({}, {})", self.label, z.re, z.im)));
        }
        Ok(q)
    }

    /// `Q^e`, keeping `0^e = 0` and `∞^e = ∞`.
    pub fn powered(&self, z: Complex64, e: f64) -> Result<f64> {
        let q = self.value(z)?;
        Ok(if q == 0.0 || e == 1.0 { q } else { q.powf(e) })
    }
}

/// Part of the circle `S(z0, r)` inside a disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Arc1 {
    Empty,
    Full,
    /// Angles `[a, b]`, `0 < b − a < 2π`.
    Span(f64, f64),
}

pub(crate) fn circle_arc(domain: Disk, z0: Complex64, r: f64) -> Arc1 {
    if domain.is_plane() {
        return Arc1::Full;
    }
    let big_r = domain.radius;
    let d = (domain.center - z0).norm();
    if d + r <= big_r {
        return Arc1::Full;
    }
    if r >= d + big_r || d >= r + big_r {
        return Arc1::Empty;
    }
    let phi = (domain.center - z0).arg();
    let beta = ((d * d + r * r - big_r * big_r) / (2.0 * d * r)).clamp(-1.0, 1.0).acos();
    Arc1::Span(phi - beta, phi + beta)
}

/// Fixed angular rule on the part of `S(z0, r)` inside `domain`: the
/// trapezoid rule with `m` nodes on full circles, Gauss panels on arcs.
pub(crate) fn circle_nodes(domain: Disk, z0: Complex64, r: f64, m: usize) -> Vec<(f64, f64)> {
    match circle_arc(domain, z0, r) {
        Arc1::Empty => Vec::new(),
        Arc1::Full => (0..m).map(|k| (2.0 * PI * k as f64 / m as f64, 2.0 * PI / m as f64)).collect(),
        Arc1::Span(a, b) => {
            let (x, w) = gauss_legendre_rule(16);
            let panels = (m / 16).max(1);
            let h = (b - a) / panels as f64;
            let mut nodes = Vec::with_capacity(panels * 16);
            for k in 0..panels {
                let c = a + (k as f64 + 0.5) * h;
                for (xi, wi) in x.iter().zip(&w) {
                    nodes.push((c + 0.5 * h * xi, 0.5 * h * wi));
                }
            }
            nodes
        }
    }
}

const CIRCLE_REL_TOL: f64 = 1e-8;
const CIRCLE_MAX_NODES: usize = 1 << 16;

/// `∫_{S(z0,r) ∩ D} Q^e dθ` (angle measure, not arclength).
fn circle_integral(q: &RadialWeight, z0: Complex64, r: f64, e: f64) -> Result<Quadrature> {
    let failure = RefCell::new(None);
    let f = |theta: f64| match q.powered(z0 + Complex64::from_polar(r, theta), e) {
        Ok(v) => v,
        Err(err) => {
            failure.borrow_mut().get_or_insert(err);
            f64::NAN
        }
    };
    let result = match circle_arc(q.domain(), z0, r) {
        Arc1::Empty => Quadrature { value: 0.0, error: 0.0, converged: true, evaluations: 0 },
        Arc1::Full => periodic_trapezoid(f, CIRCLE_REL_TOL, 16, CIRCLE_MAX_NODES),
        Arc1::Span(a, b) => {
            let mut panels = 1;
            let mut last = composite_gauss16(&f, a, b, panels);
            loop {
                panels *= 2;
                let next = composite_gauss16(&f, a, b, panels);
                let change = (next - last).abs();
                last = next;
                if change <= CIRCLE_REL_TOL * next.abs() || change == 0.0 {
                    break Quadrature { value: next, error: change, converged: true, evaluations: 16 * panels };
                }
                if 16 * panels >= CIRCLE_MAX_NODES || !next.is_finite() {
                    break Quadrature { value: next, error: change, converged: false, evaluations: 16 * panels };
                }
            }
        }
    };
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    Ok(result)
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!("radius must be positive and finite, got {r}")));
    }
    Ok(())
}

/// `(1/(2πr)) ∫_{S(z0,r)} Q^e dH¹`, with `Q ≡ 0` outside its domain.
pub fn spherical_average(q: &RadialWeight, z0: Complex64, r: f64, exponent: f64) -> Result<Quadrature> {
    check_radius(r)?;
    let mut out = circle_integral(q, z0, r, exponent)?;
    out.value /= 2.0 * PI;
    out.error /= 2.0 * PI;
    Ok(out)
}

/// `(∫_{D ∩ S(z0,r)} Q^s dH¹)^{1/s}`.
pub fn spherical_ls_norm(q: &RadialWeight, z0: Complex64, r: f64, s: f64) -> Result<Quadrature> {
    check_radius(r)?;
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::invalid(format!("norm exponent must be positive, got {s}")));
    }
    let mut out = circle_integral(q, z0, r, s)?;
    out.value = (r * out.value).powf(1.0 / s);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IStar {
    pub value: f64,
    /// The circle average vanished somewhere, so the integrand is infinite.
    pub divergent: bool,
    pub converged: bool,
}

/// `I* = ∫_{r1}^{r2} dr / (r^{1/(α−1)} q*(r)^{1/(α−1)})` with
/// `q*(r)` the circle average of `Q^{α−1}`.
pub fn i_star(q: &RadialWeight, z0: Complex64, r1: f64, r2: f64, alpha: f64) -> Result<IStar> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must exceed 1, got {alpha}")));
    }
    check_radius(r1)?;
    check_radius(r2)?;
    if r2 < r1 {
        return Err(Error::invalid(format!("need r1 <= r2, got {r1} > {r2}")));
    }
    if r1 == r2 {
        return Ok(IStar { value: 0.0, divergent: false, converged: true });
    }
    let e = 1.0 / (alpha - 1.0);
    let failure = RefCell::new(None);
    let converged = RefCell::new(true);
    // In u = log r the integrand is r^{1 − e} q*^{−e}.
    let f = |u: f64| {
        let r = u.exp();
        match spherical_average(q, z0, r, alpha - 1.0) {
            Ok(avg) => {
                if !avg.converged {
                    *converged.borrow_mut() = false;
                }
                if avg.value == 0.0 {
                    f64::INFINITY
                } else {
                    r.powf(1.0 - e) * avg.value.powf(-e)
                }
            }
            Err(err) => {
                failure.borrow_mut().get_or_insert(err);
                f64::NAN
            }
        }
    };
    let (a, b) = (r1.ln(), r2.ln());
    let rough = composite_gauss16(&f, a, b, 4);
    if let Some(err) = failure.borrow_mut().take() {
        return Err(err);
    }
    if rough.is_infinite() {
        return Ok(IStar { value: f64::INFINITY, divergent: true, converged: true });
    }
    let quad = adaptive_simpson(&f, a, b, (1e-10 * rough.abs()).max(1e-300), 40);
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    let divergent = quad.value.is_infinite();
    Ok(IStar { value: quad.value, divergent, converged: quad.converged && converged.into_inner() })
}

/// Shape of a radial profile `η` on `(r1, r2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EtaShape {
    Constant { value: f64 },
    /// `coeff · r^exponent`.
    Power { coeff: f64, exponent: f64 },
    /// Piecewise linear through `(radii[k], values[k])`.
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
}

/// Nonnegative radial profile `η : (r1, r2) → [0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtaProfile {
    pub label: String,
    pub r1: f64,
    pub r2: f64,
    pub shape: EtaShape,
}

/// Tolerance on `∫ η ≥ 1`.
pub const ETA_TOL: f64 = 1e-9;

/// Default node count for tabulated profiles.
pub const ETA_NODES: usize = 1024;

impl EtaProfile {
    fn checked(label: impl Into<String>, r1: f64, r2: f64, shape: EtaShape) -> Result<Self> {
        check_radius(r1)?;
        if !(r2 > r1 && r2.is_finite()) {
            return Err(Error::invalid(format!("eta support needs r1 < r2, got ({r1}, {r2})")));
        }
        Ok(EtaProfile { label: label.into(), r1, r2, shape })
    }

    pub fn constant(r1: f64, r2: f64, value: f64) -> Result<Self> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::invalid(format!("eta value must be finite and nonnegative, got {value}")));
        }
        Self::checked("constant", r1, r2, EtaShape::Constant { value })
    }

    pub fn power(r1: f64, r2: f64, coeff: f64, exponent: f64) -> Result<Self> {
        if !(coeff >= 0.0 && coeff.is_finite() && exponent.is_finite()) {
            return Err(Error::invalid("power eta needs a finite nonnegative coefficient and finite exponent"));
        }
        Self::checked("power", r1, r2, EtaShape::Power { coeff, exponent })
    }

    /// The minimiser for `Q ≡ 1`: `η ∝ r^{−1/(α−1)}` with unit integral.
    pub fn named_extremal(r1: f64, r2: f64, alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!("alpha must exceed 1, got {alpha}")));
        }
        let exponent = -1.0 / (alpha - 1.0);
        let mut eta = Self::power(r1, r2, 1.0 / power_integral(r1, r2, exponent), exponent)?;
        eta.label = "extremal".into();
        Ok(eta)
    }

    pub fn tabulated(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() < 2 || radii.len() != values.len() {
            return Err(Error::invalid("tabulated eta needs at least two radii and one value per radius"));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("tabulated eta radii must increase strictly"));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::invalid(format!("eta value must be finite and nonnegative, got {v}")));
        }
        let (r1, r2) = (radii[0], radii[radii.len() - 1]);
        Self::checked("tabulated", r1, r2, EtaShape::Tabulated { radii, values })
    }

    /// Seeded random positive profile on `nodes` log-spaced radii, scaled to
    /// unit integral.
    pub fn random(r1: f64, r2: f64, nodes: usize, seed: u64) -> Result<Self> {
        check_radius(r1)?;
        if nodes < 1 || !(r2 > r1) {
            return Err(Error::invalid("random eta needs r1 < r2 and at least one interval"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let radii = log_spaced(r1, r2, nodes);
        let values = radii.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
        let mut eta = normalize_eta(&Self::tabulated(radii, values)?.scaled(f64::MAX.sqrt())?)?;
        eta.label = format!("random:{seed}");
        Ok(eta)
    }

    /// The minimiser of `∫_A Q η^α dm` under `∫ η = 1`, tabulated:
    /// `η ∝ W^{−1/(α−1)}` with `W(r) = r ∫ Q(z0 + r e^{iθ}) dθ`.
    pub fn extremal_for(q: &RadialWeight, z0: Complex64, r1: f64, r2: f64, alpha: f64, nodes: usize) -> Result<Self> {
        if q.constant_value().is_some_and(|c| c > 0.0) && q.domain().is_plane() {
            return Self::named_extremal(r1, r2, alpha);
        }
        if !(alpha > 1.0) || nodes < 2 {
            return Err(Error::invalid("extremal eta needs alpha > 1 and at least two nodes"));
        }
        let radii = log_spaced(r1, r2, nodes);
        let e = 1.0 / (alpha - 1.0);
        let values = radii
            .par_iter()
            .map(|&r| {
                let w = circle_sum(q, z0, r, RHS_ANGULAR_NODES)?.value * r;
                if w == 0.0 {
                    return Err(Error::DataQuality(format!(
                        "weight `{}` vanishes on the circle of radius {r}; no extremal profile",
                        q.label()
                    )));
                }
                Ok(if w.is_infinite() { 0.0 } else { w.powf(-e) })
            })
            .collect::<Result<Vec<_>>>()?;
        let total = Self::tabulated(radii.clone(), values.clone())?.integral();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::DataQuality("extremal profile has no finite positive integral".into()));
        }
        let mut eta = Self::tabulated(radii, values.iter().map(|v| v / total).collect())?;
        eta.label = "extremal".into();
        Ok(eta)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::invalid(format!("scale must be finite and nonnegative, got {c}")));
        }
        let shape = match &self.shape {
            EtaShape::Constant { value } => EtaShape::Constant { value: value * c },
            EtaShape::Power { coeff, exponent } => EtaShape::Power { coeff: coeff * c, exponent: *exponent },
            EtaShape::Tabulated { radii, values } => {
                EtaShape::Tabulated { radii: radii.clone(), values: values.iter().map(|v| v * c).collect() }
            }
        };
        Ok(EtaProfile { shape, ..self.clone() })
    }

    /// `η(r)`, zero outside `[r1, r2]`.
    pub fn value(&self, r: f64) -> f64 {
        if !(r >= self.r1 && r <= self.r2) {
            return 0.0;
        }
        match &self.shape {
            EtaShape::Constant { value } => *value,
            EtaShape::Power { coeff, exponent } => coeff * r.powf(*exponent),
            EtaShape::Tabulated { radii, values } => {
                let k = radii.partition_point(|x| *x <= r).clamp(1, radii.len() - 1);
                let t = (r - radii[k - 1]) / (radii[k] - radii[k - 1]);
                values[k - 1] + t * (values[k] - values[k - 1])
            }
        }
    }

    /// `∫_{r1}^{r2} η dr`, exact for every shape.
    pub fn integral(&self) -> f64 {
        match &self.shape {
            EtaShape::Constant { value } => value * (self.r2 - self.r1),
            EtaShape::Power { coeff, exponent } => coeff * power_integral(self.r1, self.r2, *exponent),
            EtaShape::Tabulated { radii, values } => {
                let parts: Vec<f64> =
                    radii.windows(2).zip(values.windows(2)).map(|(r, v)| 0.5 * (r[1] - r[0]) * (v[0] + v[1])).collect();
                pairwise_sum(&parts)
            }
        }
    }

    pub fn is_admissible(&self) -> bool {
        self.integral() >= 1.0 - ETA_TOL
    }
}

/// `η / J` with `J = ∫ η dr`; rejects `J < 1`.
pub fn normalize_eta(eta: &EtaProfile) -> Result<EtaProfile> {
    let j = eta.integral();
    if j.is_nan() || j < 1.0 - ETA_TOL {
        return Err(Error::InadmissibleEta { integral: j });
    }
    if !j.is_finite() {
        return Err(Error::DataQuality(format!("eta `{}` has an infinite integral and cannot be normalised", eta.label)));
    }
    let mut out = eta.scaled(1.0 / j)?;
    out.label = eta.label.clone();
    Ok(out)
}

/// Angular nodes per circle for ring integrals.
pub const RHS_ANGULAR_NODES: usize = 256;
/// Gauss16 panels in `log r` for ring integrals.
pub const RHS_RADIAL_PANELS: usize = 32;
/// Largest fraction of quadrature nodes allowed to have an undefined weight.
pub const UNDEFINED_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircleSum {
    pub value: f64,
    pub nodes: usize,
    pub undefined: usize,
}

/// `∫ Q dθ` over the part of `S(z0, r)` in the weight's domain with the
/// fixed rule; nodes where `Q` fails are skipped and counted.
fn circle_sum(q: &RadialWeight, z0: Complex64, r: f64, m: usize) -> Result<CircleSum> {
    let nodes = circle_nodes(q.domain(), z0, r, m);
    let mut terms = Vec::with_capacity(nodes.len());
    let mut undefined = 0;
    for &(theta, w) in &nodes {
        match q.value(z0 + Complex64::from_polar(r, theta)) {
            Ok(v) => terms.push(if v == 0.0 { 0.0 } else { w * v }),
            Err(Error::InvalidInput(msg)) => return Err(Error::InvalidInput(msg)),
            Err(_) => undefined += 1,
        }
    }
    Ok(CircleSum { value: pairwise_sum(&terms), nodes: nodes.len(), undefined })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhsValue {
    pub value: f64,
    /// Some node had `Q = ∞`.
    pub divergent: bool,
    pub nodes: usize,
    pub undefined: usize,
}

/// `∫_{A(z0,r1,r2) ∩ D} Q(z) η(|z − z0|)^α dm(z)` by Gauss panels in
/// `log r` times a fixed angular rule.
pub fn rhs_integral(
    q: &RadialWeight,
    z0: Complex64,
    r1: f64,
    r2: f64,
    alpha: f64,
    eta: &EtaProfile,
) -> Result<RhsValue> {
    rhs_integral_with(q, z0, r1, r2, alpha, eta, RHS_RADIAL_PANELS, RHS_ANGULAR_NODES)
}

pub(crate) fn rhs_integral_with(
    q: &RadialWeight,
    z0: Complex64,
    r1: f64,
    r2: f64,
    alpha: f64,
    eta: &EtaProfile,
    panels: usize,
    angular: usize,
) -> Result<RhsValue> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must exceed 1, got {alpha}")));
    }
    check_radius(r1)?;
    if !(r2 > r1 && r2.is_finite()) {
        return Err(Error::invalid(format!("need r1 < r2, got ({r1}, {r2})")));
    }
    let rel = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b;
    if !(rel(eta.r1, r1) && rel(eta.r2, r2)) {
        return Err(Error::invalid(format!(
            "eta is supported on ({}, {}) but the ring is ({r1}, {r2})",
            eta.r1, eta.r2
        )));
    }
    if !eta.is_admissible() {
        return Err(Error::InadmissibleEta { integral: eta.integral() });
    }
    let (x, w) = gauss_legendre_rule(16);
    let (a, b) = (r1.ln(), r2.ln());
    let h = (b - a) / panels as f64;
    let nodes: Vec<(f64, f64)> = (0..panels)
        .flat_map(|k| {
            let c = a + (k as f64 + 0.5) * h;
            x.iter().zip(&w).map(move |(xi, wi)| (c + 0.5 * h * xi, 0.5 * h * wi)).collect::<Vec<_>>()
        })
        .collect();
    let rows = nodes
        .par_iter()
        .map(|&(u, wu)| {
            let r = u.exp();
            let e = eta.value(r);
            let s = circle_sum(q, z0, r, angular)?;
            let term = if e == 0.0 { 0.0 } else { wu * r * r * e.powf(alpha) * s.value };
            Ok((term, s))
        })
        .collect::<Result<Vec<_>>>()?;
    let total_nodes: usize = rows.iter().map(|(_, s)| s.nodes).sum();
    let undefined: usize = rows.iter().map(|(_, s)| s.undefined).sum();
    if total_nodes > 0 && undefined as f64 > UNDEFINED_FRACTION * total_nodes as f64 {
        return Err(Error::DataQuality(format!(
            "weight `{}` is undefined at {undefined} of {total_nodes} quadrature nodes",
            q.label()
        )));
    }
    let terms: Vec<f64> = rows.iter().map(|(t, _)| *t).collect();
    let value = pairwise_sum(&terms);
    Ok(RhsValue { value, divergent: value.is_infinite(), nodes: total_nodes, undefined })
}

/// `2π / I*^{α−1}`, the capacity bound for the image of the ring under a
/// map whose lower weight is `q`.
pub fn i_star_capacity_bound(q: &RadialWeight, z0: Complex64, r1: f64, r2: f64, alpha: f64) -> Result<f64> {
    let i = i_star(q, z0, r1, r2, alpha)?;
    Ok(2.0 * PI / i.value.powf(alpha - 1.0))
}
