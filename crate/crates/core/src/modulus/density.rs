use std::cell::Cell;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PolylineCurve;
use crate::quad::gauss16;

use super::power_integral;

/// Largest grid accepted from text.
const MAX_CELLS: usize = 1 << 22;

/// A nonnegative Borel density on the plane.
pub trait Density: Send + Sync {
    fn value(&self, z: Complex64) -> Result<f64>;

    /// `∫_γ ρ ds`, by 16-point Gauss-Legendre on each segment.
    fn curve_integral(&self, curve: &PolylineCurve) -> Result<f64> {
        let mut total = 0.0;
        for (a, b) in curve.segments() {
            let len = (b - a).norm();
            let failed = Cell::new(false);
            let v = gauss16(
                |t| match self.value(a + (b - a) * t) {
                    Ok(v) => v,
                    Err(_) => {
                        failed.set(true);
                        0.0
                    }
                },
                0.0,
                1.0,
            );
            if failed.get() {
                return Err(Error::OutOfBounds("curve leaves the density support".into()));
            }
            total += v * len;
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Bounds {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self> {
        let all_finite = [xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite());
        if !all_finite || !(xmax > xmin) || !(ymax > ymin) {
            return Err(Error::invalid("bounds must be finite with xmin < xmax and ymin < ymax"));
        }
        Ok(Bounds { xmin, xmax, ymin, ymax })
    }

    /// Square `[c − h, c + h]²`.
    pub fn square(center: Complex64, half: f64) -> Result<Self> {
        Self::new(center.re - half, center.re + half, center.im - half, center.im + half)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.xmin && z.re <= self.xmax && z.im >= self.ymin && z.im <= self.ymax
    }
}

/// Piecewise-constant density on a rectangle split into `nx × ny` cells,
/// stored row-major over y then x.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDensity {
    pub bounds: Bounds,
    pub nx: usize,
    pub ny: usize,
    values: Vec<f64>,
}

impl GridDensity {
    pub fn new(bounds: Bounds, nx: usize, ny: usize, values: Vec<f64>) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::invalid("grid density needs at least one cell"));
        }
        if values.len() != nx * ny {
            return Err(Error::invalid(format!("expected {} values, got {}", nx * ny, values.len())));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::invalid(format!("density values must be finite and nonnegative, got {v}")));
        }
        Ok(GridDensity { bounds, nx, ny, values })
    }

    /// Samples `f` at the cell centers.
    pub fn from_fn<F: Fn(Complex64) -> f64>(bounds: Bounds, nx: usize, ny: usize, f: F) -> Result<Self> {
        let mut values = Vec::with_capacity(nx * ny);
        let (hx, hy) = ((bounds.xmax - bounds.xmin) / nx as f64, (bounds.ymax - bounds.ymin) / ny as f64);
        for j in 0..ny {
            for i in 0..nx {
                let z = Complex64::new(bounds.xmin + (i as f64 + 0.5) * hx, bounds.ymin + (j as f64 + 0.5) * hy);
                values.push(f(z));
            }
        }
        Self::new(bounds, nx, ny, values)
    }

    pub fn constant(bounds: Bounds, nx: usize, ny: usize, c: f64) -> Result<Self> {
        Self::new(bounds, nx, ny, vec![c; nx * ny])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.bounds, self.nx, self.ny, self.values.iter().map(|v| v * c).collect())
    }

    fn cell_width(&self) -> (f64, f64) {
        (
            (self.bounds.xmax - self.bounds.xmin) / self.nx as f64,
            (self.bounds.ymax - self.bounds.ymin) / self.ny as f64,
        )
    }

    /// Cell containing `z`; the upper edges belong to the last cells.
    pub fn cell_index(&self, z: Complex64) -> Option<(usize, usize)> {
        if !self.bounds.contains(z) {
            return None;
        }
        let (hx, hy) = self.cell_width();
        let i = (((z.re - self.bounds.xmin) / hx) as usize).min(self.nx - 1);
        let j = (((z.im - self.bounds.ymin) / hy) as usize).min(self.ny - 1);
        Some((i, j))
    }

    pub fn value_at(&self, z: Complex64) -> Result<f64> {
        match self.cell_index(z) {
            Some((i, j)) => Ok(self.values[j * self.nx + i]),
            None => Err(Error::OutOfBounds(format!("({}, {}) is outside the density grid", z.re, z.im))),
        }
    }

    /// Text form:
    ///
    /// ```text
    /// grid-density v1
    /// bounds <xmin> <xmax> <ymin> <ymax>
    /// size <nx> <ny>
    /// <ny rows of nx values>
    /// ```
    pub fn to_text(&self) -> String {
        let b = self.bounds;
        let mut out = format!("grid-density v1\nbounds {} {} {} {}\nsize {} {}\n", b.xmin, b.xmax, b.ymin, b.ymax, self.nx, self.ny);
        for row in self.values.chunks(self.nx) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().map(str::trim).collect();
        let line = |k: usize| lines.get(k).copied().ok_or_else(|| Error::parse(k + 1, "unexpected end of input"));

        if line(0)? != "grid-density v1" {
            return Err(Error::parse(1, "expected header `grid-density v1`"));
        }
        let fields = keyed_fields(line(1)?, "bounds", 4, 2)?;
        let nums = fields.iter().map(|t| parse_f64(t, 2)).collect::<Result<Vec<_>>>()?;
        let bounds = Bounds::new(nums[0], nums[1], nums[2], nums[3]).map_err(|e| Error::parse(2, e.to_string()))?;
        let fields = keyed_fields(line(2)?, "size", 2, 3)?;
        let nx: usize = fields[0].parse().map_err(|_| Error::parse(3, "nx is not a count"))?;
        let ny: usize = fields[1].parse().map_err(|_| Error::parse(3, "ny is not a count"))?;
        if nx == 0 || ny == 0 || nx.saturating_mul(ny) > MAX_CELLS {
            return Err(Error::parse(3, "grid size out of range"));
        }
        let mut values = Vec::new();
        for j in 0..ny {
            let ln = 4 + j;
            let row: Vec<&str> = line(ln - 1)?.split_whitespace().collect();
            if row.len() != nx {
                return Err(Error::parse(ln, format!("expected {nx} values, found {}", row.len())));
            }
            for t in row {
                let v = parse_f64(t, ln)?;
                if v < 0.0 {
                    return Err(Error::parse(ln, "density values must be nonnegative"));
                }
                values.push(v);
            }
        }
        if let Some(k) = (3 + ny..lines.len()).find(|&k| !lines[k].is_empty()) {
            return Err(Error::parse(k + 1, "unexpected trailing content"));
        }
        Self::new(bounds, nx, ny, values).map_err(|e| Error::parse(3 + ny, e.to_string()))
    }

    /// `x y value` triples at the cell centers, one per line.
    pub fn plot_triples(&self) -> String {
        let (hx, hy) = self.cell_width();
        let mut out = String::from("x y value\n");
        for j in 0..self.ny {
            for i in 0..self.nx {
                let x = self.bounds.xmin + (i as f64 + 0.5) * hx;
                let y = self.bounds.ymin + (j as f64 + 0.5) * hy;
                let _ = writeln!(out, "{x} {y} {}", self.values[j * self.nx + i]);
            }
        }
        out
    }

    /// Parameters in `(0, 1)` where the segment `a → b` crosses cell edges.
    fn crossings(&self, a: Complex64, b: Complex64) -> Vec<f64> {
        let (hx, hy) = self.cell_width();
        let mut ts = vec![0.0, 1.0];
        let mut axis = |p0: f64, p1: f64, lo: f64, h: f64| {
            if p1 == p0 {
                return;
            }
            let (k0, k1) = (((p0.min(p1) - lo) / h).ceil() as i64, ((p0.max(p1) - lo) / h).floor() as i64);
            for k in k0..=k1 {
                let t = (lo + k as f64 * h - p0) / (p1 - p0);
                if t > 0.0 && t < 1.0 {
                    ts.push(t);
                }
            }
        };
        axis(a.re, b.re, self.bounds.xmin, hx);
        axis(a.im, b.im, self.bounds.ymin, hy);
        ts.sort_by(f64::total_cmp);
        ts
    }
}

fn keyed_fields<'a>(line: &'a str, key: &str, n: usize, ln: usize) -> Result<Vec<&'a str>> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some(key) {
        return Err(Error::parse(ln, format!("expected `{key}` line")));
    }
    let rest: Vec<&str> = parts.collect();
    if rest.len() != n {
        return Err(Error::parse(ln, format!("`{key}` takes {n} fields, found {}", rest.len())));
    }
    Ok(rest)
}

fn parse_f64(t: &str, ln: usize) -> Result<f64> {
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(ln, format!("`{t}` is not a finite number"))),
    }
}

impl Density for GridDensity {
    fn value(&self, z: Complex64) -> Result<f64> {
        self.value_at(z)
    }

    /// Exact for the piecewise-constant density: each segment is split where
    /// it crosses cell edges.
    fn curve_integral(&self, curve: &PolylineCurve) -> Result<f64> {
        let mut total = 0.0;
        for (a, b) in curve.segments() {
            let ts = self.crossings(a, b);
            let len = (b - a).norm();
            for w in ts.windows(2) {
                let mid = a + (b - a) * (0.5 * (w[0] + w[1]));
                total += self.value_at(mid)? * (w[1] - w[0]) * len;
            }
        }
        Ok(total)
    }
}

/// Midpoint rule along a polyline: density at each segment midpoint times
/// the segment length.
pub fn line_integral(density: &GridDensity, curve: &PolylineCurve) -> Result<f64> {
    if let Some(p) = curve.points().iter().find(|p| !density.bounds.contains(**p)) {
        return Err(Error::OutOfBounds(format!("curve point ({}, {}) is outside the density grid", p.re, p.im)));
    }
    let mut total = 0.0;
    for (a, b) in curve.segments() {
        total += density.value_at(0.5 * (a + b))? * (b - a).norm();
    }
    Ok(total)
}

/// `scale · |z − z0|^{−1/(p−1)} / ∫_{r1}^{r2} r^{−1/(p−1)} dr` on the ring
/// `A(z0, r1, r2)` and zero elsewhere. With `scale = 1` its integral along
/// every radial segment of the ring is exactly one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremalDensity {
    pub center: Complex64,
    pub r1: f64,
    pub r2: f64,
    pub p: f64,
    pub scale: f64,
    norm: f64,
}

impl ExtremalDensity {
    pub fn new(center: Complex64, r1: f64, r2: f64, p: f64, scale: f64) -> Result<Self> {
        super::check_order(p)?;
        super::check_radii(r1, r2)?;
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(Error::invalid("density scale must be finite and nonnegative"));
        }
        Ok(ExtremalDensity { center, r1, r2, p, scale, norm: power_integral(r1, r2, -1.0 / (p - 1.0)) })
    }
}

impl Density for ExtremalDensity {
    fn value(&self, z: Complex64) -> Result<f64> {
        let r = (z - self.center).norm();
        // Closed ring, with rounding slack at the plates.
        if r < self.r1 * (1.0 - 1e-12) || r > self.r2 * (1.0 + 1e-12) {
            return Ok(0.0);
        }
        Ok(self.scale * r.powf(-1.0 / (self.p - 1.0)) / self.norm)
    }

    fn curve_integral(&self, curve: &PolylineCurve) -> Result<f64> {
        let mut total = 0.0;
        for (a, b) in curve.segments() {
            let (ra, rb) = ((a - self.center).norm(), (b - self.center).norm());
            let len = (b - a).norm();
            let near = ra.min(rb).max(self.r1);
            let panels = (((ra.max(rb) / near).ln() / 0.05).ceil() + (len / (0.05 * near)).ceil()).clamp(1.0, 256.0) as usize;
            let h = 1.0 / panels as f64;
            for k in 0..panels {
                let t0 = k as f64 * h;
                total += len * gauss16(|t| self.value(a + (b - a) * t).unwrap_or(0.0), t0, t0 + h);
            }
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_joining_family, RingCondenser};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unit_segment_with_unit_density() {
        let g = GridDensity::constant(Bounds::square(c(0.0, 0.0), 2.0).unwrap(), 8, 8, 1.0).unwrap();
        let seg = PolylineCurve::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((line_integral(&g, &seg).unwrap() - 1.0).abs() < 1e-15);
        let zero = g.scaled(0.0).unwrap();
        assert_eq!(line_integral(&zero, &seg).unwrap(), 0.0);
        let outside = PolylineCurve::new(vec![c(0.0, 0.0), c(3.0, 0.0)]).unwrap();
        assert!(matches!(line_integral(&g, &outside), Err(Error::OutOfBounds(_))));
    }

    #[test]
    fn log_density_on_radial_segment() {
        // 1/(r log 2) integrates to one over [1, 2].
        let b = Bounds::square(c(0.0, 0.0), 2.5).unwrap();
        let n = 4000;
        let g = GridDensity::from_fn(b, n, 3, |z| 1.0 / (z.norm() * 2f64.ln())).unwrap();
        let points = (0..=1000).map(|k| c(1.0 + k as f64 / 1000.0, 0.0)).collect();
        let seg = PolylineCurve::new(points).unwrap();
        let v = line_integral(&g, &seg).unwrap();
        assert!((v - 1.0).abs() < 1e-3, "{v}");
    }

    #[test]
    fn exact_split_matches_area_weighting() {
        let b = Bounds::new(0.0, 2.0, 0.0, 1.0).unwrap();
        let g = GridDensity::new(b, 2, 1, vec![1.0, 3.0]).unwrap();
        let seg = PolylineCurve::new(vec![c(0.5, 0.5), c(1.5, 0.5)]).unwrap();
        assert!((g.curve_integral(&seg).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn text_round_trip_and_errors() {
        let b = Bounds::new(-1.0, 1.0, -0.5, 0.5).unwrap();
        let g = GridDensity::from_fn(b, 3, 2, |z| z.norm()).unwrap();
        assert_eq!(GridDensity::parse_text(&g.to_text()).unwrap(), g);
        let bad = "grid-density v1\nbounds 0 1 0 1\nsize 2 1\n1 -2\n";
        assert!(matches!(GridDensity::parse_text(bad), Err(Error::Parse { line: 4, .. })));
        let short = "grid-density v1\nbounds 0 1 0 1\nsize 2 2\n1 2\n";
        assert!(GridDensity::parse_text(short).is_err());
        assert!(matches!(GridDensity::parse_text("nope"), Err(Error::Parse { line: 1, .. })));
        assert_eq!(g.plot_triples().lines().count(), 7);
    }

    #[test]
    fn extremal_density_integrates_to_one_on_rays() {
        let ring = RingCondenser::new(c(0.3, 0.1), 0.1, 0.5).unwrap();
        for p in [1.2, 2.0, 3.0] {
            let rho = ExtremalDensity::new(ring.center, ring.r1, ring.r2, p, 1.0).unwrap();
            let fam = generate_joining_family(&ring, 8, 8, 1).unwrap();
            for (k, curve) in fam.curves.iter().enumerate() {
                let v = rho.curve_integral(curve).unwrap();
                if k < 8 {
                    assert!((v - 1.0).abs() < 1e-10, "p={p}: {v}");
                } else {
                    assert!(v >= 1.0 - 1e-10);
                }
            }
        }
    }
}
