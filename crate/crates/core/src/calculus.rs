//! Wirtinger derivatives, Jacobians and the inner dilatation of order `p`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Magnitudes below this are treated as exact zeros when classifying
/// the degenerate branches of the inner dilatation.
pub const ZERO_TOL: f64 = 1e-12;

/// Anything that can be evaluated pointwise in the plane.
pub trait PlanarMap: Send + Sync {
    fn eval(&self, z: Complex64) -> Result<Complex64>;

    /// Name used in error messages and reports.
    fn name(&self) -> String;
}

pub(crate) fn ensure_finite_point(z: Complex64, what: &str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} must be finite, got {z}")))
    }
}

/// The pair `(f_z, f_z̄)` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WirtingerPair {
    pub fz: Complex64,
    pub fzbar: Complex64,
}

impl WirtingerPair {
    pub fn new(fz: Complex64, fzbar: Complex64) -> Self {
        WirtingerPair { fz, fzbar }
    }

    /// `J = |f_z|² − |f_z̄|²`.
    pub fn jacobian(&self) -> f64 {
        self.fz.norm_sqr() - self.fzbar.norm_sqr()
    }

    /// Operator norm `‖f′‖ = |f_z| + |f_z̄|`.
    pub fn norm(&self) -> f64 {
        self.fz.norm() + self.fzbar.norm()
    }

    /// Minimal stretch `l(f′) = |f_z| − |f_z̄|`; negative for sense-reversing
    /// differentials.
    pub fn min_stretch(&self) -> f64 {
        self.fz.norm() - self.fzbar.norm()
    }

    /// The differential vanishes (both components below [`ZERO_TOL`]).
    pub fn is_zero(&self) -> bool {
        self.fz.norm() < ZERO_TOL && self.fzbar.norm() < ZERO_TOL
    }

    /// Partial derivatives `(f_x, f_y)` recovered from the pair.
    pub fn cartesian(&self) -> (Complex64, Complex64) {
        let i = Complex64::i();
        (self.fz + self.fzbar, i * (self.fz - self.fzbar))
    }

    /// Directional derivative `f_z·τ + f_z̄·τ̄` along the unit vector `τ`.
    pub fn directional(&self, tau: Complex64) -> Complex64 {
        self.fz * tau + self.fzbar * tau.conj()
    }

    fn scaled(&self, c: f64) -> Self {
        WirtingerPair { fz: self.fz * c, fzbar: self.fzbar * c }
    }
}

/// `f_z = (f_x − i f_y)/2`, `f_z̄ = (f_x + i f_y)/2`.
pub fn wirtinger_from_cartesian(fx: Complex64, fy: Complex64) -> Result<WirtingerPair> {
    ensure_finite_point(fx, "f_x")?;
    ensure_finite_point(fy, "f_y")?;
    let i = Complex64::i();
    Ok(WirtingerPair { fz: (fx - i * fy) * 0.5, fzbar: (fx + i * fy) * 0.5 })
}

/// Value of an inner dilatation: `1 ≤ K ≤ ∞` at sense-preserving points.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Dilatation(pub f64);

impl Dilatation {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

/// Inner dilatation of order `p`: `J / l(f′)^p`.
///
/// Conventions for the degenerate branches: a vanishing differential gives 1,
/// a nonzero differential with zero Jacobian gives `+∞`. Sense-reversing pairs
/// are measured by `|J| / |l(f′)|^p`.
pub fn inner_dilatation(pair: &WirtingerPair, p: f64) -> Dilatation {
    if pair.is_zero() {
        return Dilatation(1.0);
    }
    let l = pair.min_stretch();
    if l.abs() <= ZERO_TOL * pair.norm() {
        return Dilatation(f64::INFINITY);
    }
    let j = pair.jacobian().abs();
    Dilatation(j / l.abs().powf(p))
}

/// Relative disagreement between the `h` and `h/2` estimates above which a
/// finite-difference derivative is flagged.
const HALVING_WARN: f64 = 1e-4;

/// Default central-difference step at `z`.
pub fn default_step(z: Complex64) -> f64 {
    1e-5 * z.norm().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericWirtinger {
    pub pair: WirtingerPair,
    /// Richardson-extrapolated pair from the `h` and `h/2` estimates.
    pub extrapolated: WirtingerPair,
    /// Relative gap between the `h` and `h/2` estimates.
    pub halving_gap: f64,
    /// Set when the step-halving estimates disagree beyond tolerance, which
    /// points at cancellation (step too small) or a kink.
    pub precision_warning: bool,
}

fn central(map: &dyn PlanarMap, z: Complex64, h: f64) -> Result<WirtingerPair> {
    let dx = Complex64::new(h, 0.0);
    let dy = Complex64::new(0.0, h);
    let fx = (map.eval(z + dx)? - map.eval(z - dx)?) / (2.0 * h);
    let fy = (map.eval(z + dy)? - map.eval(z - dy)?) / (2.0 * h);
    wirtinger_from_cartesian(fx, fy)
}

/// Central-difference Wirtinger pair with a step-halving diagnostic.
pub fn numeric_wirtinger(map: &dyn PlanarMap, z: Complex64, h: Option<f64>) -> Result<NumericWirtinger> {
    ensure_finite_point(z, "z")?;
    let h = h.unwrap_or_else(|| default_step(z));
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid(format!("step must be positive, got {h}")));
    }
    let coarse = central(map, z, h)?;
    let fine = central(map, z, 0.5 * h)?;
    let diff = (coarse.fz - fine.fz).norm() + (coarse.fzbar - fine.fzbar).norm();
    let scale = fine.norm().max(ZERO_TOL);
    let halving_gap = diff / scale;
    let extrapolated = WirtingerPair {
        fz: (fine.fz * 4.0 - coarse.fz) / 3.0,
        fzbar: (fine.fzbar * 4.0 - coarse.fzbar) / 3.0,
    };
    Ok(NumericWirtinger {
        pair: coarse,
        extrapolated,
        halving_gap,
        precision_warning: halving_gap > HALVING_WARN && diff > 1e3 * f64::EPSILON,
    })
}

/// Per-sample outcome of the finite-distortion check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum DistortionSample {
    /// `K(z) = ‖f′‖²/J`; `sense_reversing` flags `J < 0` (value then uses |J|).
    Finite { z: Complex64, k: f64, jacobian: f64, sense_reversing: bool },
    /// `f′ = 0`, covered by the `K = 1` convention.
    Degenerate { z: Complex64 },
    /// `J = 0` while `‖f′‖` is not: finite distortion fails here.
    Violation { z: Complex64, norm: f64 },
    /// The derivative could not be evaluated.
    Undefined { z: Complex64, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub holds: bool,
    pub samples: Vec<DistortionSample>,
    pub warnings: usize,
}

impl DistortionReport {
    pub fn k_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().filter_map(|s| match s {
            DistortionSample::Finite { k, .. } => Some(*k),
            DistortionSample::Degenerate { .. } => Some(1.0),
            _ => None,
        })
    }
}

/// Checks `‖f′‖² ≤ K·J` with finite `K` at every sample.
///
/// `derivative` supplies the differential at a point; failures are recorded
/// per sample and do not abort the check.
pub fn finite_distortion_check<D>(derivative: D, samples: &[Complex64]) -> DistortionReport
where
    D: Fn(Complex64) -> Result<WirtingerPair>,
{
    let mut holds = true;
    let mut warnings = 0;
    let samples = samples
        .iter()
        .map(|&z| match derivative(z) {
            Err(e) => DistortionSample::Undefined { z, reason: e.to_string() },
            Ok(pair) => {
                let norm = pair.norm();
                let j = pair.jacobian();
                if pair.is_zero() {
                    DistortionSample::Degenerate { z }
                } else if j.abs() <= ZERO_TOL * norm.max(1.0) * norm {
                    holds = false;
                    DistortionSample::Violation { z, norm }
                } else {
                    if j < 0.0 {
                        warnings += 1;
                    }
                    DistortionSample::Finite { z, k: norm * norm / j.abs(), jacobian: j, sense_reversing: j < 0.0 }
                }
            }
        })
        .collect();
    DistortionReport { holds, samples, warnings }
}

/// Scaling covariance helper: `K_{I,p}(c·pair) = c^{2−p} K_{I,p}(pair)`.
pub fn scaled_pair(pair: &WirtingerPair, c: f64) -> WirtingerPair {
    pair.scaled(c)
}
