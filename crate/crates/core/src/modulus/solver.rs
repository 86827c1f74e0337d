//! Lower bounds for the p-modulus of a finite curve family.
//!
//! The density is discretised on a log-polar grid around the family's
//! center, `z = c + e^{u + iθ}`. Writing `σ = ρ·|z − c|`, a curve's line
//! integral becomes `∫ σ dℓ` with `dℓ = ds / |z − c|`, and the energy
//! `∫ ρ^p dm` becomes `∫ σ^p r^{2−p} du dθ`. Each cell carries the smallest
//! value of `r^{2−p}` over the cell, so for rotationally symmetric families
//! the discrete value never exceeds the continuous one.
//!
//! The discrete program `min Σ a_c σ_c^p` subject to `Σ_c L_kc σ_c ≥ 1` is
//! solved through its concave dual
//!
//! ```text
//! g(λ) = Σ λ_k − (p − 1) Σ_c a_c σ_c(λ)^p,   σ_c(λ) = (s_c / (p a_c))^{1/(p−1)},
//! s_c = Σ_k λ_k L_kc,   λ ≥ 0,
//! ```
//!
//! whose value at any `λ ≥ 0` is a lower bound for the discrete minimum.

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CurveFamily, PolylineCurve};

use super::{check_order, Method, ModulusEstimate};

/// Log-polar solver grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolutionSpec {
    pub n_radial: usize,
    pub n_angular: usize,
    /// Halve the grid while the family leaves interior cells untouched.
    pub adaptive: bool,
    pub max_iter: usize,
}

impl Default for ResolutionSpec {
    fn default() -> Self {
        ResolutionSpec { n_radial: 512, n_angular: 512, adaptive: true, max_iter: 50_000 }
    }
}

impl ResolutionSpec {
    pub fn new(n_radial: usize, n_angular: usize) -> Self {
        ResolutionSpec { n_radial, n_angular, ..Default::default() }
    }

    pub fn fixed(self) -> Self {
        ResolutionSpec { adaptive: false, ..self }
    }
}

const VIOLATION_TOL: f64 = 1e-4;
const REL_CHANGE_TOL: f64 = 1e-6;
const STALL_WINDOW: usize = 50;
const STEP_B: f64 = 1000.0;
const HISTORY_CAP: usize = 2048;

#[derive(Debug, Clone, Copy)]
struct LogPolarGrid {
    u_min: f64,
    du: f64,
    n_r: usize,
    n_a: usize,
}

impl LogPolarGrid {
    fn dtheta(&self) -> f64 {
        2.0 * PI / self.n_a as f64
    }

    fn cell(&self, w: Complex64) -> (usize, usize) {
        let u = w.norm().ln();
        let i = ((u - self.u_min) / self.du).floor().clamp(0.0, (self.n_r - 1) as f64) as usize;
        let mut theta = w.im.atan2(w.re);
        if theta < 0.0 {
            theta += 2.0 * PI;
        }
        let j = ((theta / self.dtheta()) as usize).min(self.n_a - 1);
        (i, j)
    }

    /// `min r^{2−p}` over ring `i`.
    fn weight(&self, i: usize, p: f64) -> f64 {
        let edge = if p <= 2.0 { i } else { i + 1 };
        (self.u_min + edge as f64 * self.du).exp().powf(2.0 - p)
    }

    fn halve_radial(self) -> Self {
        LogPolarGrid { du: 2.0 * self.du, n_r: self.n_r / 2, ..self }
    }

    fn halve_angular(self) -> Self {
        LogPolarGrid { n_a: self.n_a / 2, ..self }
    }
}

type Row = Vec<(usize, usize, f64)>;

/// `∫ ds / |z|` along the straight piece `a + t d`, `t ∈ [t0, t1]`.
fn log_length(a: Complex64, d: Complex64, t0: f64, t1: f64) -> f64 {
    let dn = d.norm();
    let beta = (a * d.conj()).re / (dn * dn);
    let h = (a + d * (-beta)).norm();
    let (z0, z1) = (a + d * t0, a + d * t1);
    if h <= 1e-9 * z0.norm().min(z1.norm()) {
        return (z1.norm() / z0.norm()).ln().abs();
    }
    ((t1 + beta) * dn / h).asinh() - ((t0 + beta) * dn / h).asinh()
}

/// Cells crossed by a curve with their exact log-polar lengths. Segments
/// are split where they cross cell boundaries.
fn curve_row(curve: &PolylineCurve, center: Complex64, grid: &LogPolarGrid) -> Result<Row> {
    let mut acc: HashMap<(usize, usize), f64> = HashMap::new();
    let mut cuts = Vec::new();
    for (a, b) in curve.segments() {
        let (a, d) = (a - center, b - a);
        let dn2 = d.norm_sqr();
        let beta = (a * d.conj()).re / dn2;
        let foot = a + d * (-beta).clamp(0.0, 1.0);
        if !(foot.norm() > 0.0) {
            return Err(Error::Precondition("a curve passes through the family center".into()));
        }
        cuts.clear();
        cuts.extend([0.0, 1.0]);

        // Circles |z| = e^{u_k}.
        let h2 = (a + d * (-beta)).norm_sqr();
        let (lo, hi) = (foot.norm().ln(), a.norm().max((a + d).norm()).ln());
        let k0 = ((lo - grid.u_min) / grid.du).ceil().max(0.0) as usize;
        let k1 = ((hi - grid.u_min) / grid.du).floor().min(grid.n_r as f64) as usize;
        for k in k0..=k1 {
            let r = (grid.u_min + k as f64 * grid.du).exp();
            let disc = (r * r - h2) / dn2;
            if disc >= 0.0 {
                let w = disc.sqrt();
                cuts.extend([-beta - w, -beta + w].into_iter().filter(|t| *t > 0.0 && *t < 1.0));
            }
        }

        // Rays arg z = θ_k.
        let dt = grid.dtheta();
        let th_a = a.im.atan2(a.re);
        let sweep = ((a + d) / a).arg();
        let (t_lo, t_hi) = if sweep >= 0.0 { (th_a, th_a + sweep) } else { (th_a + sweep, th_a) };
        let j0 = (t_lo / dt).ceil() as i64;
        let j1 = (t_hi / dt).floor() as i64;
        for j in j0..=j1 {
            let rot = Complex64::from_polar(1.0, -(j as f64) * dt);
            let (ai, di) = ((a * rot).im, (d * rot).im);
            if di != 0.0 {
                let t = -ai / di;
                if t > 0.0 && t < 1.0 {
                    cuts.push(t);
                }
            }
        }

        cuts.sort_by(f64::total_cmp);
        for w in cuts.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            if t1 - t0 <= 1e-15 {
                continue;
            }
            let len = log_length(a, d, t0, t1);
            if len > 0.0 {
                *acc.entry(grid.cell(a + d * (0.5 * (t0 + t1)))).or_insert(0.0) += len;
            }
        }
    }
    let mut row: Row = acc.into_iter().map(|((i, j), l)| (i, j, l)).collect();
    row.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    Ok(row)
}

fn coarsen(rows: &[Row], radial: bool, angular: bool) -> Vec<Row> {
    rows.iter()
        .map(|row| {
            let mut merged: Row = Vec::with_capacity(row.len());
            let mut mapped: Row = row
                .iter()
                .map(|&(i, j, l)| (if radial { i / 2 } else { i }, if angular { j / 2 } else { j }, l))
                .collect();
            mapped.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
            for (i, j, l) in mapped {
                match merged.last_mut() {
                    Some(last) if last.0 == i && last.1 == j => last.2 += l,
                    _ => merged.push((i, j, l)),
                }
            }
            merged
        })
        .collect()
}

/// Whether some column is empty outside the longest cyclic run of empty
/// columns. Only curves confined to at most two columns are counted when
/// there are any, since wide curves hide the gaps between radial ones.
fn angular_gaps(rows: &[Row], n_a: usize) -> bool {
    let columns = |row: &Row| row.iter().map(|&(_, j, _)| j).collect::<HashSet<_>>();
    let narrow: Vec<HashSet<usize>> = rows.iter().map(columns).filter(|c| c.len() <= 2).collect();
    let sets = if narrow.is_empty() { rows.iter().map(columns).collect() } else { narrow };
    let mut hit = vec![false; n_a];
    for set in &sets {
        for &j in set {
            hit[j] = true;
        }
    }
    let empty = hit.iter().filter(|h| !**h).count();
    if empty == 0 || empty == n_a {
        return false;
    }
    // Longest cyclic run of empty columns.
    let start = hit.iter().position(|h| *h).unwrap_or(0);
    let (mut longest, mut run) = (0, 0);
    for k in 1..=n_a {
        if hit[(start + k) % n_a] {
            run = 0;
        } else {
            run += 1;
            longest = longest.max(run);
        }
    }
    empty > longest
}

fn radial_gaps(rows: &[Row], n_r: usize) -> bool {
    let mut hit = vec![false; n_r];
    for row in rows {
        for &(i, _, _) in row {
            hit[i] = true;
        }
    }
    let (Some(lo), Some(hi)) = (hit.iter().position(|h| *h), hit.iter().rposition(|h| *h)) else {
        return false;
    };
    hit[lo..=hi].iter().any(|h| !*h)
}

/// Compressed constraint matrix over the cells actually used.
struct Program {
    p: f64,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    lens: Vec<f64>,
    weights: Vec<f64>,
}

impl Program {
    fn n_rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    fn row(&self, k: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[k]..self.row_ptr[k + 1];
        self.cols[r.clone()].iter().copied().zip(self.lens[r].iter().copied())
    }

    fn loads(&self, lambda: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.weights.len()];
        for (k, &lk) in lambda.iter().enumerate() {
            if lk != 0.0 {
                for (c, l) in self.row(k) {
                    s[c] += lk * l;
                }
            }
        }
        s
    }

    fn sigma(&self, s: &[f64]) -> Vec<f64> {
        let e = 1.0 / (self.p - 1.0);
        s.iter()
            .zip(&self.weights)
            .map(|(&sc, &a)| if sc > 0.0 { (sc / (self.p * a)).powf(e) } else { 0.0 })
            .collect()
    }

    fn dual(&self, lambda: &[f64], sigma: &[f64]) -> f64 {
        let energy: f64 = sigma.iter().zip(&self.weights).map(|(s, a)| a * s.powf(self.p)).sum();
        lambda.iter().sum::<f64>() - (self.p - 1.0) * energy
    }

    fn constraint_values(&self, sigma: &[f64]) -> Vec<f64> {
        (0..self.n_rows()).map(|k| self.row(k).map(|(c, l)| l * sigma[c]).sum()).collect()
    }

    /// Multiplier that satisfies row `k` on its own.
    fn solo(&self, k: usize) -> f64 {
        let e = 1.0 / (self.p - 1.0);
        let t: f64 = self.row(k).map(|(c, l)| l * (l / (self.p * self.weights[c])).powf(e)).sum();
        if t > 0.0 {
            t.powf(-(self.p - 1.0))
        } else {
            0.0
        }
    }
}

fn build_program(rows: &[Row], grid: &LogPolarGrid, p: f64) -> Program {
    // Duplicate rows carry no extra information.
    let mut seen = HashSet::new();
    let mut cell_index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut weights = Vec::new();
    let mut row_ptr = vec![0];
    let mut cols = Vec::new();
    let mut lens = Vec::new();
    for row in rows {
        let key: Vec<(usize, usize, i64)> = row.iter().map(|&(i, j, l)| (i, j, (l * 1e12).round() as i64)).collect();
        if row.is_empty() || !seen.insert(key) {
            continue;
        }
        for &(i, j, l) in row {
            let next = weights.len();
            let c = *cell_index.entry((i, j)).or_insert(next);
            if c == next {
                weights.push(grid.du * grid.dtheta() * grid.weight(i, p));
            }
            cols.push(c);
            lens.push(l);
        }
        row_ptr.push(cols.len());
    }
    Program { p, row_ptr, cols, lens, weights }
}

/// Certified lower bound for the discretised p-modulus of `family`.
///
/// Every dual iterate gives a valid bound; the best one is reported. The
/// estimate's `residual` is the largest relative constraint violation of
/// the primal density recovered from the final multipliers, and `upper` is
/// infinite since a finite family says nothing from above.
pub fn restricted_modulus_lower(family: &CurveFamily, p: f64, grid: &ResolutionSpec) -> Result<ModulusEstimate> {
    check_order(p)?;
    if family.is_empty() {
        return Err(Error::invalid("curve family is empty"));
    }
    if grid.n_radial == 0 || grid.n_angular == 0 {
        return Err(Error::invalid("solver grid needs at least one cell per direction"));
    }
    let (mut lo, mut hi) = family.radial_extent();
    if family.map.is_none() {
        lo = lo.min(family.base.r1);
        hi = hi.max(family.base.r2);
    }
    if !(lo > 0.0 && hi > lo && lo > 1e-12 * hi) {
        return Err(Error::Precondition("curve family touches its own center".into()));
    }
    let (u0, u1) = (lo.ln(), hi.ln());
    let mut lp = LogPolarGrid {
        u_min: u0,
        du: (u1 - u0) / grid.n_radial as f64,
        n_r: grid.n_radial,
        n_a: grid.n_angular,
    };

    let center = family.center;
    let mut rows: Vec<Row> = family
        .curves
        .par_iter()
        .map(|c| curve_row(c, center, &lp))
        .collect::<Result<Vec<_>>>()?;

    if grid.adaptive {
        loop {
            let radial = lp.n_r % 2 == 0 && radial_gaps(&rows, lp.n_r);
            let angular = lp.n_a % 2 == 0 && angular_gaps(&rows, lp.n_a);
            if !radial && !angular {
                break;
            }
            rows = coarsen(&rows, radial, angular);
            if radial {
                lp = lp.halve_radial();
            }
            if angular {
                lp = lp.halve_angular();
            }
        }
    }

    let program = build_program(&rows, &lp, p);
    let mut estimate = dual_ascent(&program, grid.max_iter);
    estimate.resolution = Some([lp.n_r, lp.n_a]);
    Ok(estimate)
}

fn dual_ascent(program: &Program, max_iter: usize) -> ModulusEstimate {
    let n = program.n_rows();
    let p = program.p;

    // Uniform start scaled so the mean constraint value is one.
    let ones = vec![1.0; n];
    let sigma1 = program.sigma(&program.loads(&ones));
    let mean = program.constraint_values(&sigma1).iter().sum::<f64>() / n as f64;
    let t = if mean > 0.0 { mean.powf(-(p - 1.0)) } else { 1.0 };
    let mut lambda = vec![t; n];

    let mut s = program.loads(&lambda);
    let mut sigma = program.sigma(&s);
    let mut g = program.dual(&lambda, &sigma);
    let mut best = g;
    let mut trace = vec![g];
    let mut history = Vec::new();
    let mut stride = 1;
    let mut factor = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    let mut violation = f64::INFINITY;

    for it in 0..max_iter {
        iterations = it + 1;
        let values = program.constraint_values(&sigma);
        violation = values.iter().map(|v| (1.0 - v).max(0.0)).fold(0.0, f64::max);

        if it >= STALL_WINDOW {
            let old = trace[trace.len() - 1 - STALL_WINDOW];
            if violation < VIOLATION_TOL && (g - old).abs() <= REL_CHANGE_TOL * g.abs().max(f64::MIN_POSITIVE) {
                converged = true;
                break;
            }
        }

        // Jacobi-preconditioned ascent direction.
        let direction: Vec<f64> = (0..n)
            .map(|k| {
                let grad = 1.0 - values[k];
                let h: f64 = program
                    .row(k)
                    .map(|(c, l)| if s[c] > 0.0 { l * l * sigma[c] / ((p - 1.0) * s[c]) } else { 0.0 })
                    .sum();
                if h > 1e-300 && h.is_finite() {
                    grad / h
                } else if grad > 0.0 {
                    program.solo(k) - lambda[k]
                } else {
                    -lambda[k]
                }
            })
            .collect();

        let schedule = STEP_B / (STEP_B + it as f64);
        let mut accepted = false;
        for _ in 0..40 {
            let theta = factor * schedule;
            let trial: Vec<f64> = lambda.iter().zip(&direction).map(|(l, d)| (l + theta * d).max(0.0)).collect();
            let s_trial = program.loads(&trial);
            let sigma_trial = program.sigma(&s_trial);
            let g_trial = program.dual(&trial, &sigma_trial);
            if g_trial >= g - 1e-15 * g.abs() {
                lambda = trial;
                s = s_trial;
                sigma = sigma_trial;
                g = g_trial;
                accepted = true;
                factor = (factor * 1.25).min(1.0);
                break;
            }
            factor *= 0.5;
        }
        best = best.max(g);
        trace.push(g);
        if it % stride == 0 {
            history.push(g);
            if history.len() >= HISTORY_CAP {
                history = history.into_iter().step_by(2).collect();
                stride *= 2;
            }
        }
        if !accepted {
            // No ascent possible at machine precision.
            let values = program.constraint_values(&sigma);
            violation = values.iter().map(|v| (1.0 - v).max(0.0)).fold(0.0, f64::max);
            converged = violation < VIOLATION_TOL;
            break;
        }
    }
    history.push(g);

    ModulusEstimate {
        lower: best.max(0.0),
        upper: f64::INFINITY,
        method: Method::RestrictedLp,
        iterations,
        residual: violation,
        converged,
        resolution: None,
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_joining_family, generate_separating_family, RingCondenser};
    use std::f64::consts::E;

    fn ring(r1: f64, r2: f64) -> RingCondenser {
        RingCondenser::new(Complex64::new(0.0, 0.0), r1, r2).unwrap()
    }

    #[test]
    fn single_segment_is_a_weak_relaxation() {
        let fam = generate_joining_family(&ring(1.0, 2.0), 1, 0, 0).unwrap();
        let est = restricted_modulus_lower(&fam, 2.0, &ResolutionSpec::new(64, 64).fixed()).unwrap();
        assert!(est.lower >= 0.0 && est.lower <= 2.0 * PI / 2f64.ln());
        assert!(est.converged);
    }

    #[test]
    fn rays_recover_ring_modulus() {
        let fam = generate_joining_family(&ring(1.0, E), 90, 10, 3).unwrap();
        let est = restricted_modulus_lower(&fam, 2.0, &ResolutionSpec::new(64, 128)).unwrap();
        assert!(est.converged, "{est:?}");
        assert!(est.lower <= 2.0 * PI * (1.0 + 1e-9));
        assert!(est.lower >= 0.98 * 2.0 * PI, "{}", est.lower);
        assert_eq!(est.resolution, Some([64, 64]));
    }

    #[test]
    fn circles_recover_separating_modulus() {
        let fam = generate_separating_family(&ring(1.0, E), 40).unwrap();
        let est = restricted_modulus_lower(&fam, 2.0, &ResolutionSpec::new(64, 64)).unwrap();
        let target = 1.0 / (2.0 * PI);
        assert!((est.lower - target).abs() < 0.02 * target, "{}", est.lower);
    }

    #[test]
    fn angular_gap_rule_allows_one_sector() {
        let rows: Vec<Row> = vec![vec![(0, 0, 1.0)], vec![(0, 1, 1.0)]];
        assert!(!angular_gaps(&rows, 8));
        let rows: Vec<Row> = vec![vec![(0, 0, 1.0)], vec![(0, 2, 1.0)]];
        assert!(angular_gaps(&rows, 8));
    }
}
