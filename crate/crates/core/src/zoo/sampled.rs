//! Grid-sampled mappings read from `x y u v` text files.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Disk;

use super::MappingSpec;

/// Bilinear interpolant of samples `f(x_i + i y_j) = u + i v` on a
/// rectilinear grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGrid {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Row-major over `ys` then `xs`.
    values: Vec<Complex64>,
}

impl SampledGrid {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if xs.len() < 3 || ys.len() < 3 {
            return Err(Error::invalid("sampled grid needs at least 3 nodes per axis"));
        }
        if values.len() != xs.len() * ys.len() {
            return Err(Error::invalid("sampled grid value count does not match the ladders"));
        }
        for ladder in [&xs, &ys] {
            if ladder.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::invalid("grid ladders must be strictly increasing"));
            }
        }
        Ok(SampledGrid { xs, ys, values })
    }

    /// Samples `f` on the tensor grid `xs × ys`.
    pub fn from_fn<F: Fn(Complex64) -> Complex64>(xs: Vec<f64>, ys: Vec<f64>, f: F) -> Result<Self> {
        let values = ys
            .iter()
            .flat_map(|&y| xs.iter().map(move |&x| Complex64::new(x, y)))
            .map(f)
            .collect();
        Self::new(xs, ys, values)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        self.values[j * self.xs.len() + i]
    }

    /// Evaluation box: bounding box minus one cell on every side.
    pub fn interior_box(&self) -> (f64, f64, f64, f64) {
        let nx = self.xs.len();
        let ny = self.ys.len();
        (self.xs[1], self.xs[nx - 2], self.ys[1], self.ys[ny - 2])
    }

    pub fn inscribed_disk(&self) -> Disk {
        let (x0, x1, y0, y1) = self.interior_box();
        let center = Complex64::new(0.5 * (x0 + x1), 0.5 * (y0 + y1));
        Disk::new(center, 0.5 * (x1 - x0).min(y1 - y0))
    }

    fn locate(ladder: &[f64], t: f64) -> usize {
        // Index of the cell [ladder[k], ladder[k+1]] containing t.
        let k = ladder.partition_point(|&v| v <= t);
        k.saturating_sub(1).min(ladder.len() - 2)
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let (x0, x1, y0, y1) = self.interior_box();
        if !(z.re >= x0 && z.re <= x1 && z.im >= y0 && z.im <= y1) {
            return Err(Error::Domain { map: "grid".into(), re: z.re, im: z.im });
        }
        let i = Self::locate(&self.xs, z.re);
        let j = Self::locate(&self.ys, z.im);
        let tx = (z.re - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        let ty = (z.im - self.ys[j]) / (self.ys[j + 1] - self.ys[j]);
        let f00 = self.node(i, j);
        let f10 = self.node(i + 1, j);
        let f01 = self.node(i, j + 1);
        let f11 = self.node(i + 1, j + 1);
        Ok(f00 * ((1.0 - tx) * (1.0 - ty)) + f10 * (tx * (1.0 - ty)) + f01 * ((1.0 - tx) * ty) + f11 * (tx * ty))
    }

    /// Maximum number of grid cells whose image covers a probe target, over a
    /// jittered target lattice spanning the image. Each cell image is split
    /// into two triangles.
    pub fn probe_multiplicity(&self, cap: u32) -> (u32, bool) {
        let nx = self.xs.len();
        let ny = self.ys.len();
        let (mut lo_re, mut hi_re, mut lo_im, mut hi_im) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for v in &self.values {
            lo_re = lo_re.min(v.re);
            hi_re = hi_re.max(v.re);
            lo_im = lo_im.min(v.im);
            hi_im = hi_im.max(v.im);
        }
        const TARGETS: usize = 32;
        let mut best = 0u32;
        for a in 0..TARGETS {
            for b in 0..TARGETS {
                // Irrational jitter keeps targets off cell edges.
                let tr = (a as f64 + 0.5 + 0.113_579) / TARGETS as f64;
                let ti = (b as f64 + 0.5 + 0.271_828) / TARGETS as f64;
                let y = Complex64::new(lo_re + tr.min(0.999_9) * (hi_re - lo_re), lo_im + ti.min(0.999_9) * (hi_im - lo_im));
                let mut count = 0u32;
                for j in 0..ny - 1 {
                    for i in 0..nx - 1 {
                        let p00 = self.node(i, j);
                        let p10 = self.node(i + 1, j);
                        let p01 = self.node(i, j + 1);
                        let p11 = self.node(i + 1, j + 1);
                        if in_triangle(y, p00, p10, p11) || in_triangle(y, p00, p11, p01) {
                            count += 1;
                        }
                    }
                }
                best = best.max(count);
                if best > cap {
                    return (cap, true);
                }
            }
        }
        (best.max(1), false)
    }
}

fn in_triangle(y: Complex64, a: Complex64, b: Complex64, c: Complex64) -> bool {
    let cross = |p: Complex64, q: Complex64, r: Complex64| (q.re - p.re) * (r.im - p.im) - (q.im - p.im) * (r.re - p.re);
    let d1 = cross(a, b, y);
    let d2 = cross(b, c, y);
    let d3 = cross(c, a, y);
    let area = cross(a, b, c);
    if area == 0.0 {
        return false;
    }
    (d1 >= 0.0 && d2 >= 0.0 && d3 >= 0.0) || (d1 <= 0.0 && d2 <= 0.0 && d3 <= 0.0)
}

fn parse_field(token: &str, line: usize, name: &str) -> Result<f64> {
    let ok_chars = token
        .bytes()
        .all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'-' | b'+' | b'e' | b'E'));
    if token.is_empty() || !ok_chars {
        return Err(Error::parse(line, format!("field `{name}` is not a decimal number: `{token}`")));
    }
    let v: f64 = token
        .parse()
        .map_err(|_| Error::parse(line, format!("field `{name}` is not a decimal number: `{token}`")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("field `{name}` is not finite")));
    }
    Ok(v)
}

/// Parses the `x y u v` grid format.
///
/// The first line is the literal header `x y u v`; each following line holds
/// four decimal fields separated by single spaces, row-major over the y
/// ladder then the x ladder. Errors carry 1-based line numbers.
pub fn parse_grid_file(text: &str) -> Result<SampledGrid> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end_matches('\r') == "x y u v" => {}
        Some(_) => return Err(Error::parse(1, "expected header `x y u v`")),
        None => return Err(Error::parse(1, "empty grid file")),
    }
    let mut records = Vec::new();
    let mut last_line = 1;
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        last_line = line_no;
        let fields: Vec<&str> = line.split(' ').collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                line_no,
                format!("expected 4 space-separated fields, found {}", fields.len()),
            ));
        }
        let x = parse_field(fields[0], line_no, "x")?;
        let y = parse_field(fields[1], line_no, "y")?;
        let u = parse_field(fields[2], line_no, "u")?;
        let v = parse_field(fields[3], line_no, "v")?;
        records.push((line_no, x, y, Complex64::new(u, v)));
    }
    if records.is_empty() {
        return Err(Error::parse(last_line, "grid file has no records"));
    }

    // The x ladder is the run of records sharing the first y.
    let y0 = records[0].2;
    let nx = records.iter().take_while(|r| r.2 == y0).count();
    if records.len() % nx != 0 {
        return Err(Error::parse(last_line, "record count is not a multiple of the x ladder length"));
    }
    let ny = records.len() / nx;
    let xs: Vec<f64> = records[..nx].iter().map(|r| r.1).collect();
    let mut ys = Vec::with_capacity(ny);
    for (k, &(line_no, x, y, _)) in records.iter().enumerate() {
        let (i, j) = (k % nx, k / nx);
        if i == 0 {
            if j > 0 && !(y > ys[j - 1]) {
                return Err(Error::parse(line_no, "y ladder is not strictly increasing"));
            }
            ys.push(y);
        }
        if y != ys[j] {
            return Err(Error::parse(line_no, "grid is not rectilinear: y changes within a row"));
        }
        if x != xs[i] {
            return Err(Error::parse(line_no, "grid is not rectilinear: x ladder differs between rows"));
        }
        if i > 0 && !(x > xs[i - 1]) {
            return Err(Error::parse(line_no, "x ladder is not strictly increasing"));
        }
    }
    if nx < 3 || ny < 3 {
        return Err(Error::parse(last_line, "grid needs at least 3 nodes per axis"));
    }
    let values = records.into_iter().map(|r| r.3).collect();
    SampledGrid::new(xs, ys, values)
}

/// Writes a grid in the `x y u v` format.
pub fn write_grid_file(grid: &SampledGrid) -> String {
    let mut out = String::from("x y u v\n");
    for (j, &y) in grid.ys.iter().enumerate() {
        for (i, &x) in grid.xs.iter().enumerate() {
            let w = grid.node(i, j);
            out.push_str(&format!("{x} {y} {} {}\n", w.re, w.im));
        }
    }
    out
}

/// Reads a grid file into a bilinear [`MappingSpec`] without analytic
/// derivatives.
pub fn load_sampled_mapping(path: &Path) -> Result<MappingSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let grid = parse_grid_file(&text)?;
    Ok(MappingSpec::sampled(grid, path.display().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_text(n: usize) -> String {
        let grid = SampledGrid::from_fn((0..n).map(|k| k as f64).collect(), (0..n).map(|k| k as f64).collect(), |z| z).unwrap();
        write_grid_file(&grid)
    }

    #[test]
    fn identity_three_by_three_reproduces_nodes() {
        let grid = parse_grid_file(&identity_text(3)).unwrap();
        let w = grid.eval(Complex64::new(1.0, 1.0)).unwrap();
        assert_eq!(w, Complex64::new(1.0, 1.0));
        assert!(grid.eval(Complex64::new(0.5, 1.0)).is_err());
    }

    #[test]
    fn missing_column_names_line() {
        let text = "x y u v\n0 0 0 0\n1 0 1\n";
        match parse_grid_file(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_header_and_values() {
        assert!(matches!(parse_grid_file("x,y,u,v\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_grid_file(""), Err(Error::Parse { line: 1, .. })));
        let nan = "x y u v\n0 0 NaN 0\n";
        assert!(matches!(parse_grid_file(nan), Err(Error::Parse { line: 2, .. })));
        let comma = "x y u v\n0 0 0,5 0\n";
        assert!(matches!(parse_grid_file(comma), Err(Error::Parse { line: 2, .. })));
        let double_space = "x y u v\n0  0 0 0\n";
        assert!(matches!(parse_grid_file(double_space), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn rejects_non_rectilinear() {
        let mut text = identity_text(3);
        text = text.replacen("1 1 1 1", "1.5 1 1 1", 1);
        assert!(matches!(parse_grid_file(&text), Err(Error::Parse { line: 6, .. })));
    }

    #[test]
    fn square_map_bilinear_error_is_second_order() {
        let n = 129;
        let ladder: Vec<f64> = (0..n).map(|k| -1.0 + 2.0 * k as f64 / (n - 1) as f64).collect();
        let grid = SampledGrid::from_fn(ladder.clone(), ladder.clone(), |z| z * z).unwrap();
        let h = ladder[1] - ladder[0];
        let mut worst: f64 = 0.0;
        for j in 1..n - 2 {
            for i in [3, 40, 77, 110] {
                let z = Complex64::new(ladder[i] + 0.5 * h, ladder[j] + 0.5 * h);
                worst = worst.max((grid.eval(z).unwrap() - z * z).norm());
            }
        }
        // Bilinear interpolation of z² errs by |h²/4 (1 − i·0)| at cell centres.
        assert!(worst <= 0.5 * h * h, "worst {worst} vs h² {}", h * h);
    }

    #[test]
    fn sampled_identity_multiplicity_is_one() {
        let ladder: Vec<f64> = (0..9).map(|k| k as f64 / 8.0).collect();
        let grid = SampledGrid::from_fn(ladder.clone(), ladder, |z| z).unwrap();
        assert_eq!(grid.probe_multiplicity(64), (1, false));
    }
}
