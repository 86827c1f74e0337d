//! Radial stretch maps `f(z) = (z/|z|)·ρ(|z|)` and the log-weight example
//! profile built from `q₀(t) = log(e/t)`.

use std::f64::consts::E;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::{inner_dilatation, WirtingerPair};
use crate::error::{Error, Result};
use crate::quad::{adaptive_simpson, gauss16};

/// Smallest radius at which the example profile is evaluated; below it the
/// inner integral is treated as divergent.
pub const SEC4_MIN_RADIUS: f64 = 1e-6;

/// Number of intervals in the cached log-radius table.
pub const SEC4_TABLE_INTERVALS: usize = 4096;

/// `q₀(t) = log(e/t)`.
pub fn log_weight(t: f64) -> f64 {
    (E / t).ln()
}

/// Profile of the log-weight example map for order `α ∈ (1, 2)`:
///
/// `ρ(s) = (1 + (2−α)/(α−1) · ∫_s^1 dt / (t·q₀(t))^{1/(α−1)})^{(α−1)/(α−2)}`.
///
/// The inner integral is tabulated once on a log-spaced grid and read back by
/// cubic Hermite interpolation with exact slopes.
pub struct Sec4Profile {
    alpha: f64,
    coef: f64,
    exponent: f64,
    inv: f64,
    /// Node `k` sits at `u = ln(SEC4_MIN_RADIUS)·(1 − k/N)`, i.e. `u_N = 0`.
    u0: f64,
    du: f64,
    integral: Vec<f64>,
}

impl fmt::Debug for Sec4Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Sec4Profile").field("alpha", &self.alpha).finish_non_exhaustive()
    }
}

fn check_sec4_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::invalid(format!("example profile needs 1 < alpha < 2, got {alpha}")));
    }
    Ok(())
}

impl Sec4Profile {
    pub fn new(alpha: f64) -> Result<Self> {
        check_sec4_alpha(alpha)?;
        let inv = 1.0 / (alpha - 1.0);
        let u0 = SEC4_MIN_RADIUS.ln();
        let n = SEC4_TABLE_INTERVALS;
        let du = -u0 / n as f64;
        let mut integral = vec![0.0; n + 1];
        // Cumulative from u = 0 (s = 1) downwards.
        for k in (0..n).rev() {
            let lo = u0 + k as f64 * du;
            let hi = lo + du;
            let piece = gauss16(|u| integrand_u(u, inv), lo, hi);
            integral[k] = integral[k + 1] + piece;
        }
        Ok(Sec4Profile {
            alpha,
            coef: (2.0 - alpha) / (alpha - 1.0),
            exponent: (alpha - 1.0) / (alpha - 2.0),
            inv,
            u0,
            du,
            integral,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `1/((t·q₀(t))^{1/(α−1)})`.
    pub fn integrand(&self, t: f64) -> f64 {
        (t * log_weight(t)).powf(-self.inv)
    }

    /// `∫_s^1 dt / (t·q₀(t))^{1/(α−1)}` read from the table.
    pub fn inner_integral(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s <= 1.0 + 1e-12) {
            return Err(Error::invalid(format!("radius {s} outside (0, 1]")));
        }
        if s < SEC4_MIN_RADIUS {
            return Err(Error::Undefined {
                re: s,
                im: 0.0,
                reason: format!("inner integral diverges below radius {SEC4_MIN_RADIUS:e}"),
            });
        }
        let u = s.min(1.0).ln();
        let x = (u - self.u0) / self.du;
        let k = (x.floor() as usize).min(SEC4_TABLE_INTERVALS - 1);
        let t = x - k as f64;
        let ua = self.u0 + k as f64 * self.du;
        let ub = ua + self.du;
        let (fa, fb) = (self.integral[k], self.integral[k + 1]);
        let ma = -integrand_u(ua, self.inv) * self.du;
        let mb = -integrand_u(ub, self.inv) * self.du;
        let t2 = t * t;
        let t3 = t2 * t;
        Ok((2.0 * t3 - 3.0 * t2 + 1.0) * fa
            + (t3 - 2.0 * t2 + t) * ma
            + (-2.0 * t3 + 3.0 * t2) * fb
            + (t3 - t2) * mb)
    }

    fn base(&self, s: f64) -> Result<f64> {
        Ok(1.0 + self.coef * self.inner_integral(s)?)
    }

    pub fn rho(&self, s: f64) -> Result<f64> {
        Ok(self.base(s)?.powf(self.exponent))
    }

    /// `ρ′(s) = (1 + c·I(s))^{1/(α−2)} / (s·q₀(s))^{1/(α−1)}`.
    pub fn rho_prime(&self, s: f64) -> Result<f64> {
        Ok(self.base(s)?.powf(1.0 / (self.alpha - 2.0)) * self.integrand(s))
    }
}

/// `d/du ∫ ... ` integrand after the substitution `t = e^u`.
fn integrand_u(u: f64, inv: f64) -> f64 {
    let t = u.exp();
    (t * (1.0 - u)).powf(-inv) * t
}

/// Value of the example profile evaluated by direct quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileValue {
    pub rho: f64,
    /// Set when `s` was below [`SEC4_MIN_RADIUS`]; `rho` is then the value at
    /// the cap, which bounds the true value from above.
    pub capped: bool,
}

/// Example profile `ρ(s)` by adaptive quadrature of the inner integral.
pub fn sec4_profile(s: f64, alpha: f64) -> Result<ProfileValue> {
    check_sec4_alpha(alpha)?;
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::invalid(format!("radius {s} outside (0, 1]")));
    }
    let capped = s < SEC4_MIN_RADIUS;
    let s_eff = s.max(SEC4_MIN_RADIUS);
    let inv = 1.0 / (alpha - 1.0);
    let lo = s_eff.ln();
    // Absolute tolerance 1e-10, relaxed proportionally for very large values.
    let rough = gauss16(|u| integrand_u(u, inv), lo, 0.0).abs();
    let tol = 1e-10_f64.max(1e-14 * rough);
    let q = adaptive_simpson(|u| integrand_u(u, inv), lo, 0.0, tol, 48);
    let base = 1.0 + (2.0 - alpha) / (alpha - 1.0) * q.value;
    Ok(ProfileValue { rho: base.powf((alpha - 1.0) / (alpha - 2.0)), capped })
}

/// Radial profile `ρ` with its derivative.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RadialProfile {
    Identity,
    /// `ρ(s) = s^k`.
    Power { k: f64 },
    /// The log-weight example profile.
    Sec4 {
        alpha: f64,
        #[serde(skip)]
        table: Option<Arc<Sec4Profile>>,
    },
}

impl RadialProfile {
    pub fn sec4(alpha: f64) -> Result<Self> {
        Ok(RadialProfile::Sec4 { alpha, table: Some(Arc::new(Sec4Profile::new(alpha)?)) })
    }

    fn table(&self) -> Result<&Sec4Profile> {
        match self {
            RadialProfile::Sec4 { table: Some(t), .. } => Ok(t),
            RadialProfile::Sec4 { alpha, .. } => Err(Error::invalid(format!(
                "example profile for alpha {alpha} was not initialised"
            ))),
            _ => unreachable!("table requested for a closed-form profile"),
        }
    }

    pub fn rho(&self, s: f64) -> Result<f64> {
        match self {
            RadialProfile::Identity => Ok(s),
            RadialProfile::Power { k } => Ok(s.powf(*k)),
            RadialProfile::Sec4 { .. } => self.table()?.rho(s),
        }
    }

    pub fn rho_prime(&self, s: f64) -> Result<f64> {
        match self {
            RadialProfile::Identity => Ok(1.0),
            RadialProfile::Power { k } => Ok(k * s.powf(k - 1.0)),
            RadialProfile::Sec4 { .. } => self.table()?.rho_prime(s),
        }
    }
}

/// Tangential and radial stretches `(δ_τ, δ_r) = (ρ(s)/s, ρ′(s))`.
pub fn radial_stretches(profile: &RadialProfile, z: Complex64) -> Result<(f64, f64)> {
    let s = z.norm();
    if s == 0.0 {
        return Err(Error::Undefined { re: 0.0, im: 0.0, reason: "radial map at its centre".into() });
    }
    Ok((profile.rho(s)? / s, profile.rho_prime(s)?))
}

/// Analytic Wirtinger pair of `(z/|z|)·ρ(|z|)`:
/// `f_z = (δ_r + δ_τ)/2`, `f_z̄ = (δ_r − δ_τ)/2 · e^{2iθ}`.
pub fn radial_wirtinger(profile: &RadialProfile, z: Complex64) -> Result<WirtingerPair> {
    let (tangential, radial) = radial_stretches(profile, z)?;
    let phase = z / z.norm();
    Ok(WirtingerPair::new(
        Complex64::new(0.5 * (radial + tangential), 0.0),
        phase * phase * (0.5 * (radial - tangential)),
    ))
}

/// Claimed versus numerically computed dilatation of the example map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DilatationClaim {
    pub numeric: f64,
    pub claimed: f64,
    pub residual: f64,
}

/// Compares `K_{I,α}` of the example map (finite differences) with the
/// closed form `log(e/|z|)`.
pub fn sec4_dilatation_claim(map: &super::MappingSpec, z: Complex64) -> Result<DilatationClaim> {
    let alpha = match map.radial_profile() {
        Some(RadialProfile::Sec4 { alpha, .. }) => *alpha,
        _ => return Err(Error::invalid(format!("`{}` is not the example map", map.id()))),
    };
    let s = z.norm();
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::invalid(format!("|z| = {s} outside (0, 1)")));
    }
    let numeric = crate::calculus::numeric_wirtinger(map, z, None)?;
    let k = inner_dilatation(&numeric.extrapolated, alpha).value();
    let claimed = log_weight(s);
    Ok(DilatationClaim { numeric: k, claimed, residual: (k - claimed).abs() / claimed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_fixes_unit_circle() {
        for alpha in [1.2, 1.5, 1.9] {
            let v = sec4_profile(1.0, alpha).unwrap();
            assert!((v.rho - 1.0).abs() < 1e-15);
            let p = Sec4Profile::new(alpha).unwrap();
            assert!((p.rho(1.0).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn profile_rejects_alpha_two() {
        assert!(sec4_profile(0.5, 2.0).is_err());
        assert!(Sec4Profile::new(2.0).is_err());
        assert!(sec4_profile(0.5, 1.0).is_err());
    }

    #[test]
    fn table_matches_direct_quadrature() {
        for alpha in [1.2, 1.5, 1.9] {
            let p = Sec4Profile::new(alpha).unwrap();
            for s in [1e-5, 3.7e-4, 0.01, 0.2, 0.5, 0.93] {
                let table = p.rho(s).unwrap();
                let direct = sec4_profile(s, alpha).unwrap().rho;
                assert!((table - direct).abs() <= 1e-9 * direct, "alpha {alpha} s {s}: {table} vs {direct}");
            }
        }
    }

    #[test]
    fn profile_capped_below_minimum() {
        let v = sec4_profile(1e-8, 1.5).unwrap();
        assert!(v.capped);
        let at_cap = sec4_profile(SEC4_MIN_RADIUS, 1.5).unwrap();
        assert_eq!(v.rho, at_cap.rho);
        let p = Sec4Profile::new(1.5).unwrap();
        assert!(matches!(p.rho(1e-8), Err(Error::Undefined { .. })));
    }

    #[test]
    fn power_profile_stretches() {
        let pair = radial_wirtinger(&RadialProfile::Power { k: 2.0 }, Complex64::new(0.5, 0.0)).unwrap();
        let (t, r) = radial_stretches(&RadialProfile::Power { k: 2.0 }, Complex64::new(0.5, 0.0)).unwrap();
        assert!((t - 0.5).abs() < 1e-15);
        assert!((r - 1.0).abs() < 1e-15);
        assert!((pair.jacobian() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn identity_profile_stretches() {
        let pair = radial_wirtinger(&RadialProfile::Identity, Complex64::new(-0.3, 0.4)).unwrap();
        assert!((pair.fz - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(pair.fzbar.norm() < 1e-15);
        assert!(radial_wirtinger(&RadialProfile::Identity, Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn derivative_matches_table_slope() {
        let p = Sec4Profile::new(1.5).unwrap();
        for s in [0.05, 0.3, 0.7] {
            let h = 1e-6 * s;
            let fd = (p.rho(s + h).unwrap() - p.rho(s - h).unwrap()) / (2.0 * h);
            let exact = p.rho_prime(s).unwrap();
            assert!((fd - exact).abs() < 1e-6 * exact.abs());
        }
    }
}
