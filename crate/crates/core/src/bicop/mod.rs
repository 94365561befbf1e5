//! Bivariate copula families: densities, h-functions and their inverses,
//! Kendall's tau relations, and per-pair fitting.
//!
//! Every `h`-style function follows one convention: `hfunc(u, v) = ∂C(u, v)/∂v`,
//! the conditional distribution of the first argument given the second.
//! [`PairCopula::hfunc_given_first`] is the other partial derivative, needed
//! wherever a family is not exchangeable (the 90/270 degree Gumbel rotations).

mod fit;
mod frank;
mod gaussian;
mod gumbel;
mod student;
mod tau;

use std::fmt;
use std::str::FromStr;

pub use fit::{fit_pair_mle, indep_p_value, indep_test, select_family, PairFit, MIN_PAIR_OBS};
pub use tau::{frank_tau, tau_to_param, DEFAULT_NU, FRANK_MAX};

use crate::dist::{norm_quantile, t_quantile};
use crate::error::{Error, Result};

/// Observations are clamped to `[CLAMP, 1 - CLAMP]` before any evaluation.
pub const CLAMP: f64 = 1e-10;

/// Upper bound of the Student-t degrees of freedom; larger fits fall back to Gaussian.
pub const MAX_NU: f64 = 30.0;

/// Bivariate copula family, with its serialization code.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyTag {
    #[default]
    Independence,
    Gaussian,
    StudentT,
    Gumbel,
    SurvivalGumbel,
    Gumbel90,
    Gumbel270,
    Frank,
}

impl FamilyTag {
    /// The seven parametric families considered during selection.
    pub const PARAMETRIC: [FamilyTag; 7] = [
        FamilyTag::Gaussian,
        FamilyTag::StudentT,
        FamilyTag::Gumbel,
        FamilyTag::SurvivalGumbel,
        FamilyTag::Gumbel90,
        FamilyTag::Gumbel270,
        FamilyTag::Frank,
    ];

    pub fn code(self) -> u32 {
        match self {
            FamilyTag::Independence => 0,
            FamilyTag::Gaussian => 1,
            FamilyTag::StudentT => 2,
            FamilyTag::Gumbel => 3,
            FamilyTag::SurvivalGumbel => 13,
            FamilyTag::Gumbel90 => 23,
            FamilyTag::Gumbel270 => 33,
            FamilyTag::Frank => 5,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        Some(match code {
            0 => FamilyTag::Independence,
            1 => FamilyTag::Gaussian,
            2 => FamilyTag::StudentT,
            3 => FamilyTag::Gumbel,
            13 => FamilyTag::SurvivalGumbel,
            23 => FamilyTag::Gumbel90,
            33 => FamilyTag::Gumbel270,
            5 => FamilyTag::Frank,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            FamilyTag::Independence => "indep",
            FamilyTag::Gaussian => "gauss",
            FamilyTag::StudentT => "t",
            FamilyTag::Gumbel => "gumbel",
            FamilyTag::SurvivalGumbel => "sgumbel",
            FamilyTag::Gumbel90 => "gumbel90",
            FamilyTag::Gumbel270 => "gumbel270",
            FamilyTag::Frank => "frank",
        }
    }

    /// Number of scalar parameters.
    pub fn n_params(self) -> usize {
        match self {
            FamilyTag::Independence => 0,
            FamilyTag::StudentT => 2,
            _ => 1,
        }
    }

    /// Whether the family can produce Kendall's tau with the sign of `tau`.
    pub fn admits_tau(self, tau: f64) -> bool {
        match self {
            FamilyTag::Gumbel | FamilyTag::SurvivalGumbel => tau >= 0.0,
            FamilyTag::Gumbel90 | FamilyTag::Gumbel270 => tau <= 0.0,
            _ => true,
        }
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        if let Ok(code) = lower.parse::<u32>() {
            return FamilyTag::from_code(code).ok_or_else(|| format!("unknown family code {code}"));
        }
        Ok(match lower.as_str() {
            "indep" | "independence" | "i" => FamilyTag::Independence,
            "gauss" | "gaussian" | "normal" | "n" => FamilyTag::Gaussian,
            "t" | "student" | "studentt" => FamilyTag::StudentT,
            "gumbel" | "g" => FamilyTag::Gumbel,
            "sgumbel" | "survival-gumbel" | "sg" => FamilyTag::SurvivalGumbel,
            "gumbel90" | "g90" => FamilyTag::Gumbel90,
            "gumbel270" | "g270" => FamilyTag::Gumbel270,
            "frank" | "f" => FamilyTag::Frank,
            other => return Err(format!("unknown family '{other}'")),
        })
    }
}

/// A bivariate copula: family plus parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCopula {
    family: FamilyTag,
    theta: f64,
    nu: Option<f64>,
}

impl Default for PairCopula {
    fn default() -> Self {
        PairCopula::independence()
    }
}

impl PairCopula {
    pub fn new(family: FamilyTag, theta: f64, nu: Option<f64>) -> Result<Self> {
        let bad = |reason: String| Err(Error::InvalidParameter { family, reason });
        if family == FamilyTag::StudentT {
            match nu {
                Some(nu) if nu > 2.0 && nu <= MAX_NU => {}
                Some(nu) => return bad(format!("degrees of freedom {nu} outside (2, {MAX_NU}]")),
                None => return bad("degrees of freedom missing".into()),
            }
        } else if nu.is_some() {
            return bad("only the Student-t family takes degrees of freedom".into());
        }
        if family != FamilyTag::Independence && !theta.is_finite() {
            return bad(format!("theta {theta} is not finite"));
        }
        match family {
            FamilyTag::Independence => {
                return Ok(PairCopula::independence());
            }
            FamilyTag::Gaussian | FamilyTag::StudentT if theta.abs() >= 1.0 => {
                return bad(format!("correlation {theta} outside (-1, 1)"));
            }
            FamilyTag::Gumbel | FamilyTag::SurvivalGumbel if theta < 1.0 => {
                return bad(format!("theta {theta} below 1"));
            }
            FamilyTag::Gumbel90 | FamilyTag::Gumbel270 if theta > -1.0 => {
                return bad(format!("theta {theta} above -1"));
            }
            FamilyTag::Frank if theta == 0.0 => {
                return bad("theta must be non-zero".into());
            }
            _ => {}
        }
        Ok(PairCopula { family, theta, nu })
    }

    pub const fn independence() -> Self {
        PairCopula {
            family: FamilyTag::Independence,
            theta: 0.0,
            nu: None,
        }
    }

    pub fn gaussian(rho: f64) -> Result<Self> {
        Self::new(FamilyTag::Gaussian, rho, None)
    }

    pub fn student_t(rho: f64, nu: f64) -> Result<Self> {
        Self::new(FamilyTag::StudentT, rho, Some(nu))
    }

    pub fn family(&self) -> FamilyTag {
        self.family
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn nu(&self) -> Option<f64> {
        self.nu
    }

    pub fn n_params(&self) -> usize {
        self.family.n_params()
    }

    /// The copula of the swapped pair `(V, U)`.
    pub fn transposed(&self) -> Self {
        let family = match self.family {
            FamilyTag::Gumbel90 => FamilyTag::Gumbel270,
            FamilyTag::Gumbel270 => FamilyTag::Gumbel90,
            f => f,
        };
        PairCopula { family, ..*self }
    }

    /// Population Kendall's tau.
    pub fn tau(&self) -> f64 {
        use std::f64::consts::FRAC_2_PI;
        match self.family {
            FamilyTag::Independence => 0.0,
            FamilyTag::Gaussian | FamilyTag::StudentT => FRAC_2_PI * self.theta.asin(),
            FamilyTag::Gumbel | FamilyTag::SurvivalGumbel => 1.0 - 1.0 / self.theta,
            FamilyTag::Gumbel90 | FamilyTag::Gumbel270 => -(1.0 + 1.0 / self.theta),
            FamilyTag::Frank => frank_tau(self.theta),
        }
    }

    pub fn pdf(&self, u: f64, v: f64) -> Result<f64> {
        Ok(self.ln_pdf(u, v)?.exp())
    }

    pub fn ln_pdf(&self, u: f64, v: f64) -> Result<f64> {
        Ok(self.ln_pdf_clamped(unit("u", u)?, unit("v", v)?))
    }

    /// `h(u, v) = ∂C(u, v)/∂v`: the conditional CDF of `U` given `V = v`.
    pub fn hfunc(&self, u: f64, v: f64) -> Result<f64> {
        Ok(self.hfunc_clamped(unit("u", u)?, unit("v", v)?))
    }

    /// `∂C(u, v)/∂u`: the conditional CDF of `V` given `U = u`.
    pub fn hfunc_given_first(&self, u: f64, v: f64) -> Result<f64> {
        self.transposed().hfunc(v, u)
    }

    /// Inverse of [`Self::hfunc`] in its first argument: the `u` with `h(u, v) = w`.
    pub fn hinv(&self, w: f64, v: f64) -> Result<f64> {
        self.hinv_clamped(unit("w", w)?, unit("v", v)?)
    }

    pub fn cdf(&self, u: f64, v: f64) -> Result<f64> {
        let (u, v) = (unit("u", u)?, unit("v", v)?);
        let t = self.theta;
        let c = match self.family {
            FamilyTag::Independence => u * v,
            FamilyTag::Gaussian => gaussian::cdf(u, v, t),
            FamilyTag::StudentT => student::cdf(u, v, t, self.nu_unchecked()),
            FamilyTag::Gumbel => gumbel::cdf(u, v, t),
            FamilyTag::SurvivalGumbel => u + v - 1.0 + gumbel::cdf(1.0 - u, 1.0 - v, t),
            FamilyTag::Gumbel90 => v - gumbel::cdf(1.0 - u, v, -t),
            FamilyTag::Gumbel270 => u - gumbel::cdf(u, 1.0 - v, -t),
            FamilyTag::Frank => frank::cdf(u, v, t),
        };
        Ok(c.clamp(0.0, u.min(v)))
    }

    #[inline]
    fn nu_unchecked(&self) -> f64 {
        self.nu.unwrap_or(DEFAULT_NU)
    }

    /// Log density for arguments already inside `[CLAMP, 1 - CLAMP]`.
    pub(crate) fn ln_pdf_clamped(&self, u: f64, v: f64) -> f64 {
        let t = self.theta;
        match self.family {
            FamilyTag::Independence => 0.0,
            FamilyTag::Gaussian => gaussian::ln_pdf(u, v, t),
            FamilyTag::StudentT => student::ln_pdf(u, v, t, self.nu_unchecked()),
            FamilyTag::Gumbel => gumbel::ln_pdf(u, v, t),
            FamilyTag::SurvivalGumbel => gumbel::ln_pdf(1.0 - u, 1.0 - v, t),
            FamilyTag::Gumbel90 => gumbel::ln_pdf(1.0 - u, v, -t),
            FamilyTag::Gumbel270 => gumbel::ln_pdf(u, 1.0 - v, -t),
            FamilyTag::Frank => frank::ln_pdf(u, v, t),
        }
    }

    pub(crate) fn hfunc_clamped(&self, u: f64, v: f64) -> f64 {
        let t = self.theta;
        let h = match self.family {
            FamilyTag::Independence => u,
            FamilyTag::Gaussian => gaussian::hfunc(u, v, t),
            FamilyTag::StudentT => student::hfunc(u, v, t, self.nu_unchecked()),
            FamilyTag::Gumbel => gumbel::hfunc(u, v, t),
            FamilyTag::SurvivalGumbel => 1.0 - gumbel::hfunc(1.0 - u, 1.0 - v, t),
            FamilyTag::Gumbel90 => 1.0 - gumbel::hfunc(1.0 - u, v, -t),
            FamilyTag::Gumbel270 => gumbel::hfunc(u, 1.0 - v, -t),
            FamilyTag::Frank => frank::hfunc(u, v, t),
        };
        clamp_unit(h)
    }

    #[inline]
    pub(crate) fn hfunc_first_clamped(&self, u: f64, v: f64) -> f64 {
        self.transposed().hfunc_clamped(v, u)
    }

    /// Log density plus, on request, both conditional CDFs; elliptical
    /// families compute their quantile scores once for all three.
    pub(crate) fn step_clamped(
        &self,
        u: f64,
        v: f64,
        want_h: bool,
        want_h1: bool,
    ) -> (f64, f64, f64) {
        let t = self.theta;
        match self.family {
            FamilyTag::Gaussian => {
                let (x, y) = (norm_quantile(u), norm_quantile(v));
                let h = if want_h {
                    clamp_unit(gaussian::hfunc_scores(x, y, t))
                } else {
                    0.5
                };
                let h1 = if want_h1 {
                    clamp_unit(gaussian::hfunc_scores(y, x, t))
                } else {
                    0.5
                };
                (gaussian::ln_pdf_scores(x, y, t), h, h1)
            }
            FamilyTag::StudentT => {
                let nu = self.nu_unchecked();
                let (x, y) = (t_quantile(u, nu), t_quantile(v, nu));
                let h = if want_h {
                    clamp_unit(student::hfunc_scores(x, y, t, nu))
                } else {
                    0.5
                };
                let h1 = if want_h1 {
                    clamp_unit(student::hfunc_scores(y, x, t, nu))
                } else {
                    0.5
                };
                let norm = student::ln_norm_const(t, nu);
                (student::ln_pdf_scores(x, y, t, nu, norm), h, h1)
            }
            _ => (
                self.ln_pdf_clamped(u, v),
                if want_h {
                    self.hfunc_clamped(u, v)
                } else {
                    0.5
                },
                if want_h1 {
                    self.hfunc_first_clamped(u, v)
                } else {
                    0.5
                },
            ),
        }
    }

    pub(crate) fn hinv_clamped(&self, w: f64, v: f64) -> Result<f64> {
        let t = self.theta;
        let (lo, hi) = (CLAMP, 1.0 - CLAMP);
        let u = match self.family {
            FamilyTag::Independence => w,
            FamilyTag::Gaussian => gaussian::hinv(w, v, t),
            FamilyTag::StudentT => student::hinv(w, v, t, self.nu_unchecked()),
            FamilyTag::Gumbel => gumbel::hinv(w, v, t, lo, hi)?,
            FamilyTag::SurvivalGumbel => 1.0 - gumbel::hinv(1.0 - w, 1.0 - v, t, lo, hi)?,
            FamilyTag::Gumbel90 => 1.0 - gumbel::hinv(1.0 - w, v, -t, lo, hi)?,
            FamilyTag::Gumbel270 => gumbel::hinv(w, 1.0 - v, -t, lo, hi)?,
            FamilyTag::Frank => frank::hinv(w, v, t),
        };
        Ok(clamp_unit(u))
    }
}

impl fmt::Display for PairCopula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.family, self.nu) {
            (FamilyTag::Independence, _) => write!(f, "indep"),
            (family, Some(nu)) => write!(f, "{family}({:.4}, {:.2})", self.theta, nu),
            (family, None) => write!(f, "{family}({:.4})", self.theta),
        }
    }
}

#[inline]
pub(crate) fn clamp_unit(x: f64) -> f64 {
    if x.is_nan() {
        return 0.5;
    }
    x.clamp(CLAMP, 1.0 - CLAMP)
}

/// Checks an argument is in `[0, 1]` and clamps it into the open interval.
#[inline]
fn unit(what: &'static str, x: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&x) {
        Ok(x.clamp(CLAMP, 1.0 - CLAMP))
    } else {
        Err(Error::Domain { what, value: x })
    }
}

/// Paired observations on the unit square.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSample {
    u: Vec<f64>,
    v: Vec<f64>,
}

impl PairSample {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::Dimension {
                expected: u.len(),
                got: v.len(),
            });
        }
        if u.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: u.len(),
            });
        }
        let u = u.into_iter().map(|x| unit("u", x)).collect::<Result<_>>()?;
        let v = v.into_iter().map(|x| unit("v", x)).collect::<Result<_>>()?;
        Ok(PairSample { u, v })
    }

    /// Values already known to lie in `[CLAMP, 1 - CLAMP]`.
    pub(crate) fn from_clamped(u: Vec<f64>, v: Vec<f64>) -> Self {
        debug_assert_eq!(u.len(), v.len());
        PairSample { u, v }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn kendall_tau(&self) -> f64 {
        crate::kendall::kendall_tau(&self.u, &self.v)
    }

    pub fn loglik(&self, c: &PairCopula) -> f64 {
        self.u
            .iter()
            .zip(&self.v)
            .map(|(&u, &v)| c.ln_pdf_clamped(u, v))
            .sum()
    }
}
