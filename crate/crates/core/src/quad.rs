//! One-dimensional quadrature rules used throughout the crate.
//!
//! Three families are provided: adaptive Simpson for smooth integrands on a
//! finite interval, fixed Gauss-Legendre panels for tabulation work, and a
//! doubling trapezoid rule for periodic integrands on a circle.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Result of a quadrature with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
    pub evaluations: usize,
}

/// Adaptive Simpson quadrature with absolute tolerance `abs_tol`.
///
/// Non-finite integrand values are propagated into `value`; the caller is
/// responsible for keeping the interval away from singularities.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, abs_tol: f64, max_depth: u32) -> Quadrature
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Quadrature { value: 0.0, error: 0.0, converged: true, evaluations: 0 };
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let fa = f(lo);
    let fb = f(hi);
    let m = 0.5 * (lo + hi);
    let fm = f(m);
    let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    let mut state = SimpsonState { evaluations: 3, converged: true, error: 0.0 };
    let value = simpson_step(&f, lo, hi, fa, fm, fb, whole, abs_tol, max_depth, &mut state);
    Quadrature {
        value: sign * value,
        error: state.error,
        converged: state.converged,
        evaluations: state.evaluations,
    }
}

struct SimpsonState {
    evaluations: usize,
    converged: bool,
    error: f64,
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    state: &mut SimpsonState,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    state.evaluations += 2;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol || !delta.is_finite() {
        if depth == 0 && delta.abs() > 15.0 * tol {
            state.converged = false;
        }
        state.error += delta.abs() / 15.0;
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, state)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, state)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre_rule(16))
}

/// 16-point Gauss-Legendre on `[a, b]`.
pub fn gauss16<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let (x, w) = gl16();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter().zip(w).map(|(xi, wi)| wi * f(mid + half * xi)).sum::<f64>() * half
}

/// Composite 16-point Gauss-Legendre with `panels` equal panels.
pub fn composite_gauss16<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let lo = a + k as f64 * h;
            gauss16(&f, lo, lo + h)
        })
        .sum()
}

/// Trapezoid rule for a `2π`-periodic integrand over a full period, doubling
/// the node count until the relative change drops below `rel_tol`.
pub fn periodic_trapezoid<F>(f: F, rel_tol: f64, min_nodes: usize, max_nodes: usize) -> Quadrature
where
    F: Fn(f64) -> f64,
{
    let mut n = min_nodes.max(4);
    let mut sum: f64 = (0..n).map(|k| f(2.0 * PI * k as f64 / n as f64)).sum();
    let mut evaluations = n;
    let mut estimate = 2.0 * PI * sum / n as f64;
    loop {
        if n * 2 > max_nodes {
            return Quadrature { value: estimate, error: f64::NAN, converged: false, evaluations };
        }
        // Odd nodes of the doubled rule.
        let extra: f64 = (0..n)
            .map(|k| f(2.0 * PI * (k as f64 + 0.5) / n as f64))
            .sum();
        evaluations += n;
        sum += extra;
        n *= 2;
        let next = 2.0 * PI * sum / n as f64;
        let change = (next - estimate).abs();
        let scale = next.abs().max(f64::MIN_POSITIVE);
        estimate = next;
        if change <= rel_tol * scale || change == 0.0 {
            return Quadrature { value: estimate, error: change, converged: true, evaluations };
        }
        if !estimate.is_finite() {
            return Quadrature { value: estimate, error: f64::NAN, converged: false, evaluations };
        }
    }
}

/// `n + 1` geometrically spaced points from `a` to `b` inclusive.
pub fn log_spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    let la = a.ln();
    let lb = b.ln();
    (0..=n)
        .map(|k| {
            if k == 0 {
                a
            } else if k == n {
                b
            } else {
                (la + (lb - la) * k as f64 / n as f64).exp()
            }
        })
        .collect()
}

/// Pairwise (cascade) summation; fixed order, so results do not depend on
/// how the terms were produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}
