//! Disks, ring condensers and finite witness families of curves that join or
//! separate the plates of a ring.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zoo::MappingSpec;

/// Smallest accepted outer/inner radius ratio for a ring.
pub const MIN_RING_RATIO: f64 = 1.0 + 1e-9;

/// Open or closed disk; an infinite radius stands for the whole plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Complex64,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Complex64, radius: f64) -> Self {
        Disk { center, radius }
    }

    pub fn plane() -> Self {
        Disk { center: Complex64::new(0.0, 0.0), radius: f64::INFINITY }
    }

    pub fn unit() -> Self {
        Disk { center: Complex64::new(0.0, 0.0), radius: 1.0 }
    }

    pub fn is_plane(&self) -> bool {
        self.radius.is_infinite()
    }

    /// Closed-disk membership with a relative slack of `1e-12`.
    pub fn contains(&self, z: Complex64) -> bool {
        z.re.is_finite() && z.im.is_finite() && (z - self.center).norm() <= self.radius * (1.0 + 1e-12)
    }

    pub fn contains_open(&self, z: Complex64) -> bool {
        (z - self.center).norm() < self.radius
    }

    pub fn dist_to_boundary(&self, z: Complex64) -> f64 {
        self.radius - (z - self.center).norm()
    }
}

/// The ring `A(center, r1, r2)` inside a disk domain of radius
/// `domain_radius` about the same center (infinite for the plane).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingCondenser {
    pub center: Complex64,
    pub r1: f64,
    pub r2: f64,
    pub domain_radius: f64,
}

impl RingCondenser {
    pub fn new(center: Complex64, r1: f64, r2: f64) -> Result<Self> {
        Self::with_domain(center, r1, r2, f64::INFINITY)
    }

    pub fn with_domain(center: Complex64, r1: f64, r2: f64, domain_radius: f64) -> Result<Self> {
        if !(center.re.is_finite() && center.im.is_finite()) {
            return Err(Error::invalid("ring center must be finite"));
        }
        if !(r1 > 0.0 && r1.is_finite() && r2.is_finite()) {
            return Err(Error::invalid(format!("ring radii must be positive and finite, got r1={r1}, r2={r2}")));
        }
        if !(r2 >= r1 * MIN_RING_RATIO) {
            return Err(Error::invalid(format!("degenerate ring: r1={r1} is not below r2={r2}")));
        }
        if !(domain_radius >= r2) {
            return Err(Error::invalid(format!("ring outer radius {r2} exceeds the domain radius {domain_radius}")));
        }
        Ok(RingCondenser { center, r1, r2, domain_radius })
    }

    pub fn log_ratio(&self) -> f64 {
        (self.r2 / self.r1).ln()
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let d = (z - self.center).norm();
        d > self.r1 && d < self.r2
    }
}

/// Ordered point list with cumulative arclength.
#[derive(Debug, Clone, PartialEq)]
pub struct PolylineCurve {
    points: Vec<Complex64>,
    cumulative: Vec<f64>,
}

impl PolylineCurve {
    pub fn new(points: Vec<Complex64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("a polyline needs at least two points"));
        }
        if points.iter().any(|p| !(p.re.is_finite() && p.im.is_finite())) {
            return Err(Error::invalid("polyline points must be finite"));
        }
        let mut cumulative = Vec::with_capacity(points.len());
        cumulative.push(0.0);
        let mut total = 0.0;
        for w in points.windows(2) {
            let step = (w[1] - w[0]).norm();
            if !(step > 0.0) {
                return Err(Error::invalid("polyline has repeated consecutive points"));
            }
            total += step;
            cumulative.push(total);
        }
        Ok(PolylineCurve { points, cumulative })
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn length(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1]
    }

    pub fn segments(&self) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn is_closed(&self) -> bool {
        let first = self.points[0];
        let last = self.points[self.points.len() - 1];
        (first - last).norm() <= 1e-12 * first.norm().max(1.0)
    }

    /// Distances of the vertices from `center` increase strictly.
    pub fn is_radially_monotone(&self, center: Complex64) -> bool {
        self.points.windows(2).all(|w| (w[1] - center).norm() > (w[0] - center).norm())
    }

    /// Net number of turns around `center`.
    pub fn winding_number(&self, center: Complex64) -> f64 {
        let mut total = 0.0;
        for (a, b) in self.segments() {
            total += ((b - center) / (a - center)).arg();
        }
        total / (2.0 * PI)
    }

    /// Smallest and largest distance of the polyline from `center`, taking
    /// segment interiors into account.
    pub fn radial_extent(&self, center: Complex64) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for (a, b) in self.segments() {
            lo = lo.min(point_segment_distance(center, a, b));
            hi = hi.max((a - center).norm()).max((b - center).norm());
        }
        (lo, hi)
    }
}

fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let t = ((p - a) * d.conj()).re / d.norm_sqr();
    (a + d * t.clamp(0.0, 1.0) - p).norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Joining,
    Separating,
    Image,
}

/// A finite witness set for a curve family attached to a ring.
#[derive(Debug, Clone)]
pub struct CurveFamily {
    pub kind: FamilyKind,
    pub base: RingCondenser,
    pub map: Option<MappingSpec>,
    pub curves: Vec<PolylineCurve>,
    /// Point about which the family is organised: the ring center, or its
    /// image for pushed-forward families.
    pub center: Complex64,
    /// Curves dropped during push-forward.
    pub dropped: usize,
    /// Kind of the source family for pushed-forward families.
    pub source_kind: FamilyKind,
}

impl CurveFamily {
    pub fn new(kind: FamilyKind, base: RingCondenser, curves: Vec<PolylineCurve>) -> Self {
        CurveFamily { kind, base, map: None, curves, center: base.center, dropped: 0, source_kind: kind }
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    /// Whether the curves join (rather than separate) the plates.
    pub fn is_joining(&self) -> bool {
        self.source_kind == FamilyKind::Joining
    }

    /// Radial extent of the whole family about its center.
    pub fn radial_extent(&self) -> (f64, f64) {
        self.curves.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), c| {
            let (a, b) = c.radial_extent(self.center);
            (lo.min(a), hi.max(b))
        })
    }
}

/// Knots per perturbed curve and sub-steps between knots.
const PERTURB_KNOTS: usize = 8;
const PERTURB_SUBSTEPS: usize = 8;
/// Bound on `|dθ/d(log r)|` for perturbed curves.
const PERTURB_SLOPE: f64 = 1.0;

/// Radial segments at `n_angles` equispaced angles plus `n_perturb` seeded
/// curves `θ(log r)` that are piecewise linear with bounded slope, all
/// running from `|z − z0| = r1` to `|z − z0| = r2`.
pub fn generate_joining_family(ring: &RingCondenser, n_angles: usize, n_perturb: usize, seed: u64) -> Result<CurveFamily> {
    if n_angles + n_perturb == 0 {
        return Err(Error::invalid("joining family needs at least one curve"));
    }
    let mut curves = Vec::with_capacity(n_angles + n_perturb);
    for k in 0..n_angles {
        let dir = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n_angles as f64);
        curves.push(PolylineCurve::new(vec![ring.center + dir * ring.r1, ring.center + dir * ring.r2])?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (u0, u1) = (ring.r1.ln(), ring.r2.ln());
    let du = (u1 - u0) / PERTURB_KNOTS as f64;
    for _ in 0..n_perturb {
        let mut theta = rng.gen_range(0.0..2.0 * PI);
        let mut knots = vec![theta];
        for _ in 0..PERTURB_KNOTS {
            theta += rng.gen_range(-PERTURB_SLOPE..=PERTURB_SLOPE) * du;
            knots.push(theta);
        }
        let mut points = Vec::with_capacity(PERTURB_KNOTS * PERTURB_SUBSTEPS + 1);
        for k in 0..PERTURB_KNOTS {
            for m in 0..PERTURB_SUBSTEPS {
                let t = m as f64 / PERTURB_SUBSTEPS as f64;
                let u = u0 + (k as f64 + t) * du;
                let th = knots[k] + t * (knots[k + 1] - knots[k]);
                points.push(ring.center + Complex64::from_polar(u.exp(), th));
            }
        }
        points.push(ring.center + Complex64::from_polar(ring.r2, knots[PERTURB_KNOTS]));
        if let Some(first) = points.first_mut() {
            *first = ring.center + Complex64::from_polar(ring.r1, knots[0]);
        }
        curves.push(PolylineCurve::new(points)?);
    }
    Ok(CurveFamily::new(FamilyKind::Joining, *ring, curves))
}

/// Points needed on a circle so the chord error stays below `rel` times the
/// radius.
pub fn circle_points(rel: f64) -> usize {
    // r (1 − cos(π/m)) ≈ r π² / (2 m²)
    let m = (PI / (2.0 * rel).sqrt()).ceil() as usize;
    m.max(8)
}

/// Relative chord error of separating circles.
pub const CIRCLE_CHORD_ERROR: f64 = 1e-6;

/// Closed polyline approximating the circle `S(center, r)`.
pub fn circle(center: Complex64, r: f64, n: usize) -> Result<PolylineCurve> {
    let mut points: Vec<Complex64> =
        (0..n).map(|k| center + Complex64::from_polar(r, 2.0 * PI * k as f64 / n as f64)).collect();
    points.push(points[0]);
    PolylineCurve::new(points)
}

/// Concentric circles at the geometric radii `r1·(r2/r1)^{k/(n+1)}`,
/// `k = 1..=n`.
pub fn generate_separating_family(ring: &RingCondenser, n_radii: usize) -> Result<CurveFamily> {
    if n_radii == 0 {
        return Err(Error::invalid("separating family needs at least one circle"));
    }
    let m = circle_points(CIRCLE_CHORD_ERROR);
    let q = ring.r2 / ring.r1;
    let curves = (1..=n_radii)
        .map(|k| circle(ring.center, ring.r1 * q.powf(k as f64 / (n_radii + 1) as f64), m))
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveFamily::new(FamilyKind::Separating, *ring, curves))
}

/// Default image chord tolerance of [`push_forward`], relative to the image
/// segment length.
pub const PUSH_CHORD_TOL: f64 = 1e-3;
const PUSH_MAX_DEPTH: u32 = 12;

#[allow(clippy::too_many_arguments)]
fn refine(
    map: &MappingSpec,
    a: Complex64,
    b: Complex64,
    fa: Complex64,
    fb: Complex64,
    tol: f64,
    depth: u32,
    out: &mut Vec<Complex64>,
) -> Result<()> {
    let m = 0.5 * (a + b);
    let fm = map.eval(m)?;
    let chord = (fb - fa).norm();
    let deviation = (fm - 0.5 * (fa + fb)).norm();
    if depth == 0 || deviation <= tol * chord.max(1e-300) {
        out.push(fb);
        return Ok(());
    }
    refine(map, a, m, fa, fm, tol, depth - 1, out)?;
    refine(map, m, b, fm, fb, tol, depth - 1, out)
}

fn push_curve(map: &MappingSpec, curve: &PolylineCurve, tol: f64) -> Result<PolylineCurve> {
    let pts = curve.points();
    let mut fa = map.eval(pts[0])?;
    let mut out = vec![fa];
    for w in pts.windows(2) {
        let fb = map.eval(w[1])?;
        refine(map, w[0], w[1], fa, fb, tol, PUSH_MAX_DEPTH, &mut out)?;
        fa = fb;
    }
    // Image points may coincide where the map is locally constant.
    out.dedup_by(|b, a| (*b - *a).norm() == 0.0);
    PolylineCurve::new(out)
}

/// Maps every curve pointwise, inserting midpoints until each image chord
/// deviates from the true image midpoint by at most `chord_tol` times the
/// chord. Curves leaving the domain are dropped and counted.
pub fn push_forward(family: &CurveFamily, map: &MappingSpec, chord_tol: f64) -> CurveFamily {
    let mut curves = Vec::with_capacity(family.curves.len());
    let mut dropped = family.dropped;
    for curve in &family.curves {
        match push_curve(map, curve, chord_tol) {
            Ok(c) => curves.push(c),
            Err(_) => dropped += 1,
        }
    }
    let center = map.eval(family.center).unwrap_or_else(|_| centroid(&curves));
    CurveFamily {
        kind: FamilyKind::Image,
        base: family.base,
        map: Some(map.clone()),
        curves,
        center,
        dropped,
        source_kind: family.source_kind,
    }
}

fn centroid(curves: &[PolylineCurve]) -> Complex64 {
    let (sum, n) = curves
        .iter()
        .flat_map(|c| c.points())
        .fold((Complex64::new(0.0, 0.0), 0usize), |(s, n), p| (s + p, n + 1));
    if n == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        sum / n as f64
    }
}

/// Writes curves as text: one curve per line, the point count followed by
/// the `x y` coordinates.
pub fn write_curves(curves: &[PolylineCurve]) -> String {
    let mut out = String::new();
    for c in curves {
        out.push_str(&c.points().len().to_string());
        for p in c.points() {
            out.push_str(&format!(" {} {}", p.re, p.im));
        }
        out.push('\n');
    }
    out
}

/// Parses the curve text format. Blank lines and lines starting with `#`
/// are skipped.
pub fn parse_curves(text: &str) -> Result<Vec<PolylineCurve>> {
    let mut curves = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let count: usize = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::parse(line_no, "expected a point count"))?;
        let coords = tokens
            .map(|t| t.parse::<f64>().map_err(|_| Error::parse(line_no, format!("bad coordinate `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        if coords.len() != 2 * count {
            return Err(Error::parse(line_no, format!("expected {} coordinates, found {}", 2 * count, coords.len())));
        }
        let points = coords.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        curves.push(PolylineCurve::new(points).map_err(|e| Error::parse(line_no, e.to_string()))?);
    }
    Ok(curves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ring_rejects_degenerate() {
        assert!(RingCondenser::new(c(0.0, 0.0), 1.0, 1.0).is_err());
        assert!(RingCondenser::new(c(0.0, 0.0), 1.0, 1.0 + 1e-12).is_err());
        assert!(RingCondenser::new(c(0.0, 0.0), 0.0, 1.0).is_err());
        assert!(RingCondenser::with_domain(c(0.0, 0.0), 0.5, 2.0, 1.0).is_err());
    }

    #[test]
    fn four_rays_of_unit_length() {
        let ring = RingCondenser::new(c(0.0, 0.0), 1.0, 2.0).unwrap();
        let fam = generate_joining_family(&ring, 4, 0, 0).unwrap();
        assert_eq!(fam.len(), 4);
        for curve in &fam.curves {
            assert!((curve.length() - 1.0).abs() < 1e-15);
        }
        let one = generate_joining_family(&ring, 1, 0, 0).unwrap();
        assert_eq!(one.curves[0].points(), &[c(1.0, 0.0), c(2.0, 0.0)]);
    }

    #[test]
    fn perturbed_curves_join_and_are_monotone() {
        let ring = RingCondenser::new(c(0.5, -0.25), 1.0, E).unwrap();
        let fam = generate_joining_family(&ring, 3, 20, 7).unwrap();
        for curve in &fam.curves {
            assert!(curve.is_radially_monotone(ring.center));
            let pts = curve.points();
            assert!(((pts[0] - ring.center).norm() - 1.0).abs() < 1e-12);
            assert!(((pts[pts.len() - 1] - ring.center).norm() - E).abs() < 1e-12);
        }
        let again = generate_joining_family(&ring, 3, 20, 7).unwrap();
        assert_eq!(fam.curves, again.curves);
        let other = generate_joining_family(&ring, 3, 20, 8).unwrap();
        assert_ne!(fam.curves, other.curves);
    }

    #[test]
    fn separating_radii_are_geometric() {
        let ring = RingCondenser::new(c(0.0, 0.0), 1.0, 4.0).unwrap();
        let fam = generate_separating_family(&ring, 3).unwrap();
        for (k, curve) in fam.curves.iter().enumerate() {
            let r = curve.points()[0].norm();
            assert!((r - 4f64.powf((k + 1) as f64 / 4.0)).abs() < 1e-12);
            assert!(curve.is_closed());
            assert!((curve.winding_number(ring.center) - 1.0).abs() < 1e-9);
        }
        let mid = generate_separating_family(&RingCondenser::new(c(0.0, 0.0), 1.0, E).unwrap(), 1).unwrap();
        assert!((mid.curves[0].points()[0].norm() - E.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn circle_chord_error_bound() {
        let m = circle_points(CIRCLE_CHORD_ERROR);
        assert!(1.0 - (PI / m as f64).cos() < CIRCLE_CHORD_ERROR);
    }

    #[test]
    fn push_square_on_real_segment() {
        let ring = RingCondenser::new(c(0.0, 0.0), 1.0, 2.0).unwrap();
        let fam = generate_joining_family(&ring, 1, 0, 0).unwrap();
        let image = push_forward(&fam, &MappingSpec::power(2).unwrap(), PUSH_CHORD_TOL);
        let pts = image.curves[0].points();
        assert_eq!(pts[0], c(1.0, 0.0));
        assert_eq!(pts[pts.len() - 1], c(4.0, 0.0));
        assert!(pts.iter().all(|p| p.im == 0.0));
    }

    #[test]
    fn push_drops_curves_outside_domain() {
        let ring = RingCondenser::new(c(0.0, 0.0), 0.5, 2.0).unwrap();
        let fam = generate_joining_family(&ring, 4, 0, 0).unwrap();
        let image = push_forward(&fam, &MappingSpec::sec4(1.5).unwrap(), PUSH_CHORD_TOL);
        assert_eq!(image.len(), 0);
        assert_eq!(image.dropped, 4);
    }

    #[test]
    fn curve_text_round_trip() {
        let ring = RingCondenser::new(c(0.0, 0.0), 1.0, 2.0).unwrap();
        let fam = generate_joining_family(&ring, 2, 2, 3).unwrap();
        let text = format!("# comment\n\n{}", write_curves(&fam.curves));
        assert_eq!(parse_curves(&text).unwrap(), fam.curves);
        assert!(matches!(parse_curves("2 0 0 1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_curves("# a\n1 0 0\n"), Err(Error::Parse { line: 2, .. })));
    }
}
