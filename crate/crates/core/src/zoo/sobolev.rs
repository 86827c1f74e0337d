//! Tabulation of `∫_{B(0,r)} ‖f′‖^α dm` over shrinking balls.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::gauss16;

use super::MappingSpec;

const ANGULAR_NODES: usize = 64;
const RADIAL_PANELS: usize = 4;
/// Shell-to-shell ratio below which the tail is treated as geometric.
const CONTRACTION: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SobolevVerdict {
    Convergent,
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct SobolevReport {
    pub alpha: f64,
    /// Radii actually used, decreasing.
    pub radii: Vec<f64>,
    /// `shells[j] = ∫_{r_{j+1} < |z| < r_j} ‖f′‖^α dm`.
    pub shells: Vec<f64>,
    /// Successive shell ratios `shells[j+1] / shells[j]`.
    pub ratios: Vec<f64>,
    /// `∫_{B(0, r_j)} ‖f′‖^α dm`: later shells plus a geometric tail
    /// estimate; infinite when the verdict is divergent.
    pub ball_values: Vec<f64>,
    /// Innermost annuli dropped because the derivative could not be
    /// evaluated there.
    pub excluded: usize,
    pub verdict: SobolevVerdict,
}

fn shell_integral(map: &MappingSpec, alpha: f64, r_in: f64, r_out: f64) -> Result<f64> {
    let (u0, u1) = (r_in.ln(), r_out.ln());
    let h = (u1 - u0) / RADIAL_PANELS as f64;
    let failure = RefCell::new(None);
    let mut total = 0.0;
    for panel in 0..RADIAL_PANELS {
        let lo = u0 + panel as f64 * h;
        total += gauss16(
            |u| {
                let r = u.exp();
                let mut ring = 0.0;
                for k in 0..ANGULAR_NODES {
                    let theta = 2.0 * PI * (k as f64 + 0.5) / ANGULAR_NODES as f64;
                    match map.derivative(Complex64::from_polar(r, theta)) {
                        Ok(pair) => ring += pair.norm().powf(alpha),
                        Err(e) => {
                            failure.borrow_mut().get_or_insert(e);
                        }
                    }
                }
                ring * 2.0 * PI / ANGULAR_NODES as f64 * r * r
            },
            lo,
            lo + h,
        );
    }
    match failure.into_inner() {
        Some(e) => Err(e),
        None if total.is_finite() => Ok(total),
        None => Err(Error::Undefined { re: r_in, im: 0.0, reason: "non-finite derivative norm".into() }),
    }
}

/// Probes `f ∈ W^{1,α}` near the origin by tabulating the energy of
/// `‖f′‖^α` on the balls `B(0, r_j)` for a decreasing radius sequence.
///
/// The shells between consecutive radii are integrated directly. If the
/// later half of the shell sequence contracts (every ratio at most 0.95),
/// the innermost ball is closed off with a geometric tail and the verdict is
/// convergent; if it never shrinks, the verdict is divergent.
pub fn sobolev_membership_probe(map: &MappingSpec, alpha: f64, radii: &[f64]) -> Result<SobolevReport> {
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("Sobolev exponent must be at least 1, got {alpha}")));
    }
    if radii.len() < 4 {
        return Err(Error::invalid("need at least four radii"));
    }
    if radii.windows(2).any(|w| !(w[1] < w[0])) || !(radii[radii.len() - 1] > 0.0) {
        return Err(Error::invalid("radii must decrease strictly to a positive limit"));
    }

    let mut shells = Vec::with_capacity(radii.len() - 1);
    let mut excluded = 0;
    for (j, w) in radii.windows(2).enumerate() {
        match shell_integral(map, alpha, w[1], w[0]) {
            Ok(v) => shells.push(v),
            Err(e) => {
                // Only a failing inner tail may be dropped.
                if j == 0 {
                    return Err(e);
                }
                excluded = radii.len() - 1 - j;
                break;
            }
        }
    }
    if shells.len() < 3 {
        return Err(Error::DataQuality("too few evaluable shells for a verdict".into()));
    }
    let used = radii[..shells.len() + 1].to_vec();
    let ratios: Vec<f64> = shells
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else if w[1] > 0.0 { f64::INFINITY } else { 0.0 })
        .collect();
    let late = &ratios[ratios.len() / 2..];
    let verdict = if late.iter().all(|&q| q <= CONTRACTION) {
        SobolevVerdict::Convergent
    } else if late.iter().all(|&q| q >= 1.0) {
        SobolevVerdict::Divergent
    } else {
        SobolevVerdict::Inconclusive
    };

    let tail = match verdict {
        SobolevVerdict::Convergent => {
            let theta = late[late.len() - 1];
            shells[shells.len() - 1] * theta / (1.0 - theta)
        }
        SobolevVerdict::Divergent => f64::INFINITY,
        SobolevVerdict::Inconclusive => f64::NAN,
    };
    let mut ball_values = vec![0.0; used.len()];
    let mut acc = tail;
    ball_values[used.len() - 1] = acc;
    for j in (0..shells.len()).rev() {
        acc += shells[j];
        ball_values[j] = acc;
    }

    Ok(SobolevReport { alpha, radii: used, shells, ratios, ball_values, excluded, verdict })
}
