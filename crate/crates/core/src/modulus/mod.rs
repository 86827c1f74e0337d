//! p-moduli of curve families and p-capacities of ring condensers.
//!
//! Exact values are only available for concentric rings. Everything else is
//! bracketed: a lower bound from the dual of a discretised program over a
//! finite witness family, and an upper bound from an explicit admissible
//! density or from a comparison ring.

mod density;
mod solver;
mod upper;

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::MIN_RING_RATIO;

pub use density::{line_integral, Bounds, Density, ExtremalDensity, GridDensity};
pub use solver::{restricted_modulus_lower, ResolutionSpec};
pub use upper::{
    candidate_modulus_upper, condenser_capacity, duality_check, image_condenser_upper, Candidate, CandidateOptions,
    CapacityOptions, DualityReport, FamilySpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    RestrictedLp,
    CandidateDensity,
    Duality,
    /// Lower and upper bounds from different methods.
    Sandwich,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::RestrictedLp => "restricted-lp",
            Method::CandidateDensity => "candidate-density",
            Method::Duality => "duality",
            Method::Sandwich => "sandwich",
        }
    }
}

/// A modulus or capacity bracketed by `lower ≤ upper`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusEstimate {
    pub lower: f64,
    pub upper: f64,
    pub method: Method,
    pub iterations: usize,
    /// Largest constraint violation for solver output, zero for exact values.
    pub residual: f64,
    pub converged: bool,
    /// Solver grid `[radial, angular]` after coarsening.
    pub resolution: Option<[usize; 2]>,
    /// Dual objective trace of the solver, subsampled.
    #[serde(skip)]
    pub history: Vec<f64>,
}

impl ModulusEstimate {
    pub fn exact(value: f64, method: Method) -> Self {
        ModulusEstimate {
            lower: value,
            upper: value,
            method,
            iterations: 0,
            residual: 0.0,
            converged: true,
            resolution: None,
            history: Vec::new(),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    /// Combines a lower bound and an upper bound from separate estimates.
    pub fn sandwich(lower: &ModulusEstimate, upper: &ModulusEstimate) -> Self {
        // A crossing within rounding of the dual objective is reconciled;
        // anything larger is left visible.
        let crossed = lower.lower > upper.upper && lower.lower - upper.upper <= 1e-9 * upper.upper;
        ModulusEstimate {
            lower: if crossed { upper.upper } else { lower.lower },
            upper: upper.upper,
            method: Method::Sandwich,
            iterations: lower.iterations + upper.iterations,
            residual: lower.residual.max(upper.residual),
            converged: lower.converged && upper.converged,
            resolution: lower.resolution.or(upper.resolution),
            history: lower.history.clone(),
        }
    }

    pub fn midpoint(&self) -> f64 {
        if self.upper.is_finite() {
            0.5 * (self.lower + self.upper)
        } else {
            self.lower
        }
    }
}

pub(crate) fn check_order(p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!("modulus order must exceed 1, got {p}")));
    }
    Ok(())
}

pub(crate) fn check_radii(r1: f64, r2: f64) -> Result<()> {
    if !(r1 > 0.0 && r2.is_finite() && r2 >= r1 * MIN_RING_RATIO) {
        return Err(Error::invalid(format!("need 0 < r1 < r2 with r2/r1 >= 1 + 1e-9, got r1={r1}, r2={r2}")));
    }
    Ok(())
}

/// `∫_{r1}^{r2} r^e dr` in closed form.
pub fn power_integral(r1: f64, r2: f64, e: f64) -> f64 {
    let k = e + 1.0;
    let log_ratio = (r2 / r1).ln();
    if k == 0.0 {
        log_ratio
    } else {
        r1.powf(k) * (k * log_ratio).exp_m1() / k
    }
}

/// `M_p` of the curves joining the boundary circles of `A(z0, r1, r2)`:
/// `2π (∫_{r1}^{r2} r^{−1/(p−1)} dr)^{1−p}`.
pub fn ring_modulus_closed_form(r1: f64, r2: f64, p: f64) -> Result<ModulusEstimate> {
    check_order(p)?;
    check_radii(r1, r2)?;
    let integral = power_integral(r1, r2, -1.0 / (p - 1.0));
    Ok(ModulusEstimate::exact(2.0 * PI * integral.powf(1.0 - p), Method::ClosedForm))
}

/// `M_q` of the concentric circles separating the plates of
/// `A(z0, r1, r2)`: `∫_{r1}^{r2} (2πr)^{1−q} dr`.
pub fn separating_modulus_closed_form(r1: f64, r2: f64, q: f64) -> Result<ModulusEstimate> {
    check_order(q)?;
    check_radii(r1, r2)?;
    let value = (2.0 * PI).powf(1.0 - q) * power_integral(r1, r2, 1.0 - q);
    Ok(ModulusEstimate::exact(value, Method::ClosedForm))
}
