//! Pass/fail checks of the modulus inequalities on concrete maps.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::inner_dilatation;
use crate::error::{Error, Result};
use crate::geometry::{
    generate_joining_family, generate_separating_family, push_forward, CurveFamily, Disk, RingCondenser,
    PUSH_CHORD_TOL,
};
use crate::modulus::{
    condenser_capacity, power_integral, restricted_modulus_lower, CapacityOptions, Method, ModulusEstimate,
    ResolutionSpec,
};
use crate::quad::{adaptive_simpson, composite_gauss16};
use crate::zoo::{multiplicity, MappingSpec, Region};

use super::{rhs_integral_with, spherical_ls_norm, EtaProfile, RadialWeight, RhsValue};

/// Which inequality a report checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "th1")]
    Th1,
    #[serde(rename = "th1A")]
    Th1A,
    #[serde(rename = "th2")]
    Th2,
    #[serde(rename = "lem4")]
    Lem4,
    #[serde(rename = "duality")]
    Duality,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Th1 => "th1",
            Mode::Th1A => "th1A",
            Mode::Th2 => "th2",
            Mode::Lem4 => "lem4",
            Mode::Duality => "duality",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "th1" => Ok(Mode::Th1),
            "th1A" | "th1a" => Ok(Mode::Th1A),
            "th2" => Ok(Mode::Th2),
            "lem4" => Ok(Mode::Lem4),
            "duality" => Ok(Mode::Duality),
            _ => Err(Error::Usage(format!("unknown mode `{s}`; expected th1, th1A, th2, lem4 or duality"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        })
    }
}

/// Instance parameters echoed in a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Params {
    pub alpha: f64,
    pub z0: [f64; 2],
    pub r1: f64,
    pub r2: f64,
    pub map: String,
    pub seed: u64,
    pub eta: String,
}

/// Outcome of one inequality instance.
///
/// For the upper-bound theorems (`LHS ≤ RHS`) `margin = rhs − lhs.upper`
/// and `lower_margin = rhs − lhs.lower`; the verdict follows the lower
/// bound. For the lower-Q criterion (`LHS ≥ RHS`) the signs flip, so
/// `margin = lhs.upper − rhs` and `lower_margin = lhs.lower − rhs`, and the
/// verdict follows the upper bound. A positive margin always means the
/// inequality holds with room to spare.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub theorem: Mode,
    pub params: Params,
    pub lhs: ModulusEstimate,
    pub rhs: f64,
    pub margin: f64,
    pub lower_margin: f64,
    pub verdict: Verdict,
    /// Both bounds of the LHS satisfy the inequality.
    pub certified: bool,
    pub rhs_divergent: bool,
    pub notes: Vec<String>,
}

fn slack(rhs: f64, tol: f64) -> f64 {
    if rhs.is_finite() {
        tol * rhs.abs() + 1e-9
    } else {
        0.0
    }
}

impl VerificationReport {
    fn upper_bound_check(theorem: Mode, params: Params, lhs: ModulusEstimate, rhs: &RhsValue, tol: f64) -> Self {
        let value = rhs.value;
        let margin = value - lhs.upper;
        let lower_margin = value - lhs.lower;
        let s = slack(value, tol);
        let mut notes = Vec::new();
        if rhs.divergent {
            notes.push("right-hand side diverges (infinite dilatation at a node)".into());
        }
        if rhs.undefined > 0 {
            notes.push(format!("weight undefined at {} of {} nodes", rhs.undefined, rhs.nodes));
        }
        if !lhs.converged {
            notes.push("modulus solver hit its iteration cap".into());
        }
        VerificationReport {
            theorem,
            params,
            verdict: if lower_margin >= -s { Verdict::Pass } else { Verdict::Fail },
            certified: margin >= -s,
            lhs,
            rhs: value,
            margin,
            lower_margin,
            rhs_divergent: rhs.divergent,
            notes,
        }
    }
}

/// Choice of the radial profile `η`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EtaSpec {
    /// Minimiser of the right-hand side for the instance's weight.
    Extremal,
    /// `1/(r2 − r1)`.
    Constant,
    /// Seeded random profile on `nodes` intervals.
    Random { seed: u64, nodes: usize },
    /// A fixed multiple of the extremal profile, `factor ≥ 1`.
    Scaled { factor: f64 },
}

impl EtaSpec {
    pub fn label(&self) -> String {
        match self {
            EtaSpec::Extremal => "extremal".into(),
            EtaSpec::Constant => "constant".into(),
            EtaSpec::Random { seed, nodes } => format!("random:{seed}:{nodes}"),
            EtaSpec::Scaled { factor } => format!("scaled:{factor}"),
        }
    }

    pub fn build(&self, q: &RadialWeight, z0: Complex64, r1: f64, r2: f64, alpha: f64, nodes: usize) -> Result<EtaProfile> {
        let mut eta = match self {
            EtaSpec::Extremal => EtaProfile::extremal_for(q, z0, r1, r2, alpha, nodes)?,
            EtaSpec::Constant => EtaProfile::constant(r1, r2, 1.0 / (r2 - r1))?,
            EtaSpec::Random { seed, nodes } => EtaProfile::random(r1, r2, *nodes, *seed)?,
            EtaSpec::Scaled { factor } => {
                if !(*factor >= 1.0) {
                    return Err(Error::invalid(format!("eta scale factor must be at least 1, got {factor}")));
                }
                EtaProfile::extremal_for(q, z0, r1, r2, alpha, nodes)?.scaled(*factor)?
            }
        };
        eta.label = self.label();
        Ok(eta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyOptions {
    pub capacity: CapacityOptions,
    pub eta_nodes: usize,
    pub radial_panels: usize,
    pub angular_nodes: usize,
    /// Relative verdict tolerance.
    pub tol: f64,
    /// Halve `ε1` until the boundary check passes.
    pub scan: bool,
    pub eps1_floor: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            capacity: CapacityOptions::default(),
            eta_nodes: super::ETA_NODES,
            radial_panels: super::RHS_RADIAL_PANELS,
            angular_nodes: super::RHS_ANGULAR_NODES,
            tol: 1e-3,
            scan: true,
            eps1_floor: 1e-4,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::Precondition(format!("alpha = {alpha} violates 1<α≤2")));
    }
    Ok(())
}

fn params(map: &MappingSpec, z0: Complex64, r1: f64, r2: f64, alpha: f64, seed: u64, eta: &str) -> Params {
    Params { alpha, z0: [z0.re, z0.im], r1, r2, map: map.to_string(), seed, eta: eta.to_string() }
}

/// Checks one instance of the ring inequality for `map` at `z0`.
///
/// * `th1`: homeomorphisms, `Q = K_{I,α}`, LHS the α-modulus of the image of
///   the curves joining the plates of `A(z0, r1, r2)`.
/// * `th1A`: `Q = N^{α−1} K_{I,α}`, LHS the α-capacity of the image
///   condenser `(f(B(z0, r2)), f(closure B(z0, r1)))`.
/// * `th2`: `z0` on the boundary of the map's disk domain; `r1 = ε`,
///   `r2 = ε1`, and the ring is clipped to the domain.
///
/// The verdict passes when `LHS.lower ≤ RHS·(1 + tol) + 1e-9`.
pub fn verify_poletsky(
    map: &MappingSpec,
    z0: Complex64,
    r1: f64,
    r2: f64,
    alpha: f64,
    mode: Mode,
    eta: &EtaSpec,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    check_alpha(alpha)?;
    match mode {
        Mode::Th1 | Mode::Th1A => verify_interior(map, z0, r1, r2, alpha, mode, eta, opts),
        Mode::Th2 => verify_boundary(map, z0, r1, r2, alpha, eta, opts),
        Mode::Lem4 | Mode::Duality => {
            Err(Error::Usage(format!("mode {mode} is not a ring inequality; use the dedicated check")))
        }
    }
}

fn rhs_for(
    q: &RadialWeight,
    z0: Complex64,
    r1: f64,
    r2: f64,
    alpha: f64,
    eta: &EtaSpec,
    opts: &VerifyOptions,
) -> Result<RhsValue> {
    let profile = eta.build(q, z0, r1, r2, alpha, opts.eta_nodes)?;
    rhs_integral_with(q, z0, r1, r2, alpha, &profile, opts.radial_panels, opts.angular_nodes)
}

#[allow(clippy::too_many_arguments)]
fn verify_interior(
    map: &MappingSpec,
    z0: Complex64,
    r1: f64,
    r2: f64,
    alpha: f64,
    mode: Mode,
    eta: &EtaSpec,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let domain = map.domain();
    if !domain.contains_open(z0) {
        return Err(Error::Precondition(format!("z0 = {z0} is not interior to the domain of `{map}`")));
    }
    if !(r2 < domain.dist_to_boundary(z0)) {
        return Err(Error::Precondition(format!(
            "r2 = {r2} must be below the distance {} from z0 to the boundary",
            domain.dist_to_boundary(z0)
        )));
    }
    let ring = RingCondenser::new(z0, r1, r2)?;
    let mut notes = Vec::new();

    // N(f, D) on the smallest admissible domain, a disk just containing
    // the closed outer ball.
    let local = (r2 * (1.0 + 1e-6)).min(domain.dist_to_boundary(z0));
    let n = multiplicity(map, Region::Disk(Disk::new(z0, local)))
        .map_err(|e| Error::Precondition(format!("multiplicity of `{map}`: {e}")))?;
    if n.approximate {
        notes.push(format!("multiplicity {} is a probe lower bound", n.count));
    }
    let scale = match mode {
        Mode::Th1 => {
            if n.count != 1 {
                return Err(Error::Precondition(format!(
                    "`{map}` takes some value {} times near z0; th1 needs a homeomorphism (use th1A)",
                    n.count
                )));
            }
            1.0
        }
        _ => (n.count as f64).powf(alpha - 1.0),
    };
    let q = RadialWeight::dilatation(map, alpha, scale, 1.0)?;
    if mode == Mode::Th1A {
        if let Some(gap) = exponent_path_gap(map, &ring, alpha, n.count as f64) {
            notes.push(format!("weight exponent routes disagree by {gap:.3e}"));
        }
    }
    let rhs = rhs_for(&q, z0, r1, r2, alpha, eta, opts)?;
    let lhs = condenser_capacity(&ring, alpha, Some(map), &opts.capacity)?;
    let seed = opts.capacity.family.seed;
    let mut report =
        VerificationReport::upper_bound_check(mode, params(map, z0, r1, r2, alpha, seed, &eta.label()), lhs, &rhs, opts.tol);
    if scale != 1.0 {
        report.notes.push(format!("N = {}, weight factor N^(α−1) = {scale}", n.count));
    }
    report.notes.extend(notes);
    Ok(report)
}

/// Largest relative disagreement between `N^{α−1} K` and `(N K^{p−1})^{α−1}`
/// at a few ring points, `p = α/(α−1)`, when it exceeds `1e-9`.
fn exponent_path_gap(map: &MappingSpec, ring: &RingCondenser, alpha: f64, n: f64) -> Option<f64> {
    let p = alpha / (alpha - 1.0);
    let mut worst: f64 = 0.0;
    for k in 0..16 {
        let r = ring.r1 * (ring.r2 / ring.r1).powf((k as f64 + 0.5) / 16.0);
        let z = ring.center + Complex64::from_polar(r, 2.0 * PI * k as f64 / 16.0 + 0.1);
        let Ok(pair) = map.derivative(z) else { continue };
        let k_val = inner_dilatation(&pair, alpha).value();
        if !k_val.is_finite() {
            continue;
        }
        let direct = n.powf(alpha - 1.0) * k_val;
        let composed = (n * k_val.powf(p - 1.0)).powf(alpha - 1.0);
        worst = worst.max((direct - composed).abs() / direct.abs().max(f64::MIN_POSITIVE));
    }
    (worst > 1e-9).then_some(worst)
}

fn verify_boundary(
    map: &MappingSpec,
    z0: Complex64,
    eps: f64,
    eps1: f64,
    alpha: f64,
    eta: &EtaSpec,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let domain = map.domain();
    if domain.is_plane() {
        return Err(Error::Precondition("th2 needs a bounded disk domain".into()));
    }
    let d = (z0 - domain.center).norm();
    if (d - domain.radius).abs() > 1e-9 * domain.radius {
        return Err(Error::Precondition(format!("z0 = {z0} is not on the boundary of the domain of `{map}`")));
    }
    let d0 = 2.0 * domain.radius;
    if !(eps > 0.0 && eps < eps1 && eps1 < d0) {
        return Err(Error::Precondition(format!("need 0 < ε < ε1 < {d0}, got ε = {eps}, ε1 = {eps1}")));
    }
    let start = eps1;
    let mut eps1 = eps1;
    loop {
        let report = boundary_instance(map, z0, eps, eps1, alpha, eta, opts)?;
        let floor = opts.eps1_floor.max(eps * 2.0);
        if report.verdict.is_pass() || !opts.scan || eps1 / 2.0 < floor {
            let mut report = report;
            if eps1 != start {
                report.notes.push(format!("ε1 scanned from {start} down to {eps1}"));
            }
            return Ok(report);
        }
        eps1 /= 2.0;
    }
}

fn boundary_instance(
    map: &MappingSpec,
    z0: Complex64,
    eps: f64,
    eps1: f64,
    alpha: f64,
    eta: &EtaSpec,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let domain = map.domain();
    let ring = RingCondenser::new(z0, eps, eps1)?;
    let spec = opts.capacity.family;
    let full = generate_joining_family(&ring, spec.n_angles, spec.n_perturb, spec.seed)?;
    let inside: Vec<_> = full
        .curves
        .iter()
        .filter(|c| c.points().iter().all(|p| domain.contains_open(*p)))
        .cloned()
        .collect();
    if inside.is_empty() {
        return Err(Error::DegenerateCondenser("no witness curve stays inside the domain".into()));
    }
    let clipped = CurveFamily::new(full.kind, ring, inside);
    let pushed = push_forward(&clipped, map, PUSH_CHORD_TOL);
    if pushed.is_empty() {
        return Err(Error::DegenerateCondenser("every witness curve was dropped".into()));
    }
    let mut lhs = restricted_modulus_lower(&pushed, alpha, &opts.capacity.resolution)?;
    lhs.method = Method::RestrictedLp;
    let q = RadialWeight::dilatation(map, alpha, 1.0, 1.0)?;
    let rhs = rhs_for(&q, z0, eps, eps1, alpha, eta, opts)?;
    let mut report = VerificationReport::upper_bound_check(
        Mode::Th2,
        params(map, z0, eps, eps1, alpha, spec.seed, &eta.label()),
        lhs,
        &rhs,
        opts.tol,
    );
    report
        .notes
        .push(format!("{} of {} witness curves stay inside the domain", clipped.len(), full.len()));
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LowerQOptions {
    pub n_radii: usize,
    pub resolution: ResolutionSpec,
    /// Samples per boundary circle for the image hull.
    pub hull_samples: usize,
    pub tol: f64,
}

impl Default for LowerQOptions {
    fn default() -> Self {
        LowerQOptions { n_radii: 200, resolution: ResolutionSpec::default(), hull_samples: 4096, tol: 1e-3 }
    }
}

/// Report type for the lower-Q criterion.
pub type LowerQReport = VerificationReport;

/// Checks `M_p(f(Σ_ε)) ≥ ∫_ε^{r0} dr / ‖Q‖_s(r)`, `s = 1/(p − 1)`, where
/// `Σ_ε` are the circles `S(z0, r)`, `ε < r < r0`.
///
/// The LHS upper bound comes from the density `1/(2π m |w − f(z0)|)` on the
/// annulus spanned by the image circles, `m` being their smallest winding
/// number about `f(z0)`. It is exact when the image circles are concentric
/// circles about `f(z0)`.
pub fn lower_q_criterion(
    map: &MappingSpec,
    q: &RadialWeight,
    z0: Complex64,
    p: f64,
    eps: f64,
    r0: f64,
    opts: &LowerQOptions,
) -> Result<LowerQReport> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!("modulus order must exceed 1, got {p}")));
    }
    if !(eps > 0.0 && eps < r0) {
        return Err(Error::invalid(format!("need 0 < ε < r0, got ε = {eps}, r0 = {r0}")));
    }
    let domain = map.domain();
    if !(domain.contains_open(z0) && r0 < domain.dist_to_boundary(z0)) {
        return Err(Error::Precondition(format!("circles about z0 = {z0} up to radius {r0} must lie in the domain")));
    }
    let ring = RingCondenser::new(z0, eps, r0)?;
    let family = generate_separating_family(&ring, opts.n_radii)?;
    let pushed = push_forward(&family, map, PUSH_CHORD_TOL);
    if pushed.is_empty() {
        return Err(Error::DegenerateCondenser("every circle was dropped".into()));
    }
    let lower = restricted_modulus_lower(&pushed, p, &opts.resolution)?;
    let (upper, hull_note) = hull_upper(map, &pushed, &ring, p, opts.hull_samples)?;
    let lhs = ModulusEstimate::sandwich(&lower, &ModulusEstimate::exact(upper, Method::CandidateDensity));

    let s = 1.0 / (p - 1.0);
    let rhs = reciprocal_norm_integral(q, z0, eps, r0, s)?;
    let slack = slack(rhs, opts.tol);
    let margin = lhs.upper - rhs;
    let lower_margin = lhs.lower - rhs;
    let mut notes = vec![hull_note];
    if pushed.dropped > 0 {
        notes.push(format!("{} circles dropped during push-forward", pushed.dropped));
    }
    Ok(VerificationReport {
        theorem: Mode::Lem4,
        params: Params {
            alpha: p,
            z0: [z0.re, z0.im],
            r1: eps,
            r2: r0,
            map: map.to_string(),
            seed: 0,
            eta: q.label().to_string(),
        },
        verdict: if margin >= -slack { Verdict::Pass } else { Verdict::Fail },
        certified: lower_margin >= -slack,
        lhs,
        rhs,
        margin,
        lower_margin,
        rhs_divergent: rhs.is_infinite(),
        notes,
    })
}

fn hull_upper(map: &MappingSpec, pushed: &CurveFamily, ring: &RingCondenser, p: f64, samples: usize) -> Result<(f64, String)> {
    let w0 = map.eval(ring.center)?;
    let m = pushed
        .curves
        .iter()
        .map(|c| c.winding_number(w0).round().abs() as u64)
        .min()
        .unwrap_or(0);
    if m == 0 {
        return Ok((f64::INFINITY, "some image circle does not wind around f(z0)".into()));
    }
    let (mut a, mut b) = (f64::INFINITY, 0.0f64);
    for c in &pushed.curves {
        let (lo, hi) = c.radial_extent(w0);
        a = a.min(lo);
        b = b.max(hi);
    }
    for r in [ring.r1, ring.r2] {
        for k in 0..samples {
            let w = map.eval(ring.center + Complex64::from_polar(r, 2.0 * PI * k as f64 / samples as f64))?;
            let d = (w - w0).norm();
            a = a.min(d);
            b = b.max(d);
        }
    }
    if !(a > 0.0 && b > a) {
        return Ok((f64::INFINITY, "image circles touch f(z0)".into()));
    }
    let value = 2.0 * PI * (2.0 * PI * m as f64).powf(-p) * power_integral(a, b, 1.0 - p);
    Ok((value, format!("hull [{a:.6e}, {b:.6e}], winding {m}")))
}

/// `∫_ε^{r0} dr / ‖Q‖_s(r)`.
fn reciprocal_norm_integral(q: &RadialWeight, z0: Complex64, eps: f64, r0: f64, s: f64) -> Result<f64> {
    let failure = std::cell::RefCell::new(None);
    let f = |u: f64| {
        let r = u.exp();
        match spherical_ls_norm(q, z0, r, s) {
            Ok(n) if n.value == 0.0 => f64::INFINITY,
            Ok(n) => r / n.value,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let (a, b) = (eps.ln(), r0.ln());
    let rough = composite_gauss16(&f, a, b, 4);
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    if rough.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let quad = adaptive_simpson(&f, a, b, (1e-10 * rough.abs()).max(1e-300), 40);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(quad.value)
}
