use std::f64::consts::FRAC_PI_2;

use super::{FamilyTag, PairCopula};
use crate::dist::integrate;
use crate::error::{Error, Result};

/// Degrees of freedom used when a Student-t copula is built from tau alone.
pub const DEFAULT_NU: f64 = 4.0;

/// Largest Frank parameter magnitude; beyond it the density overflows in practice.
pub const FRANK_MAX: f64 = 50.0;

const FRANK_MIN: f64 = 1e-8;

/// Population Kendall's tau of the Frank copula,
/// `1 - 4/θ + 4 D₁(θ)/θ` with the first Debye function `D₁`.
pub fn frank_tau(theta: f64) -> f64 {
    let t = theta.abs();
    if t < 1e-2 {
        // series of the Debye form; the closed expression cancels badly here
        let t2 = t * t;
        return theta * (1.0 / 9.0 - t2 / 900.0 + t2 * t2 / 52_920.0);
    }
    let debye = integrate(|s| if s == 0.0 { 1.0 } else { s / s.exp_m1() }, 0.0, t, 1) / t;
    let tau = 1.0 - 4.0 / t + 4.0 * debye / t;
    tau.copysign(theta)
}

/// Parameter of `family` whose population Kendall's tau equals `tau`.
///
/// Frank parameters are capped at `±FRANK_MAX`, so very strong dependence
/// is only approximated for that family.
pub fn tau_to_param(family: FamilyTag, tau: f64) -> Result<PairCopula> {
    if !(tau > -1.0 && tau < 1.0) {
        return Err(Error::Domain {
            what: "tau",
            value: tau,
        });
    }
    if !family.admits_tau(tau) {
        return Err(Error::IncompatibleSign { family, tau });
    }
    let theta = match family {
        FamilyTag::Independence => return Ok(PairCopula::independence()),
        FamilyTag::Gaussian | FamilyTag::StudentT => (FRAC_PI_2 * tau).sin(),
        FamilyTag::Gumbel | FamilyTag::SurvivalGumbel => 1.0 / (1.0 - tau),
        FamilyTag::Gumbel90 | FamilyTag::Gumbel270 => -1.0 / (1.0 + tau),
        FamilyTag::Frank => frank_theta(tau),
    };
    let nu = (family == FamilyTag::StudentT).then_some(DEFAULT_NU);
    PairCopula::new(family, theta, nu)
}

fn frank_theta(tau: f64) -> f64 {
    let target = tau.abs();
    let (mut lo, mut hi) = (FRANK_MIN, FRANK_MAX);
    if target <= frank_tau(lo) {
        return lo.copysign(tau);
    }
    if target >= frank_tau(hi) {
        return hi.copysign(tau);
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if frank_tau(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).copysign(tau)
}
