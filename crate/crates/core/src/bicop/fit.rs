use std::cell::RefCell;

use super::{student, FamilyTag, PairCopula, PairSample, MAX_NU};
use crate::dist::{norm_cdf, norm_quantile, t_quantile, t_quantile_near};
use crate::error::{Error, Result};
use crate::optim::brent_min;

/// Fewer observations than this and a pair is not fitted.
pub const MIN_PAIR_OBS: usize = 10;

const RHO_BOUND: f64 = 0.9999;
const GUMBEL_MAX: f64 = 50.0;
const NU_MIN: f64 = 2.001;
/// A t fit this close to the df cap counts as hitting it.
const NU_EDGE: f64 = 0.05;

/// A fitted pair copula with its log-likelihood and AIC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairFit {
    pub copula: PairCopula,
    pub loglik: f64,
    pub aic: f64,
}

impl PairFit {
    fn new(copula: PairCopula, loglik: f64) -> Self {
        let k = copula.n_params() as f64;
        PairFit {
            copula,
            loglik,
            aic: -2.0 * loglik + 2.0 * k,
        }
    }
}

/// Maximum-likelihood fit of one family.
///
/// A Student-t fit whose degrees of freedom run into the cap of 30 is replaced
/// by the Gaussian fit, which it is then indistinguishable from.
pub fn fit_pair_mle(family: FamilyTag, data: &PairSample) -> Result<PairFit> {
    if data.len() < MIN_PAIR_OBS {
        return Err(Error::InsufficientData {
            needed: MIN_PAIR_OBS,
            got: data.len(),
        });
    }
    match family {
        FamilyTag::Independence => Ok(PairFit::new(PairCopula::independence(), 0.0)),
        FamilyTag::Gaussian => Ok(fit_gaussian(data)),
        FamilyTag::StudentT => fit_student(data),
        FamilyTag::Gumbel | FamilyTag::SurvivalGumbel => fit_scalar(family, data, 1.0, GUMBEL_MAX),
        FamilyTag::Gumbel90 | FamilyTag::Gumbel270 => fit_scalar(family, data, -GUMBEL_MAX, -1.0),
        FamilyTag::Frank => fit_scalar(family, data, -super::tau::FRANK_MAX, super::tau::FRANK_MAX),
    }
}

fn fit_gaussian(data: &PairSample) -> PairFit {
    let x: Vec<f64> = data.u().iter().map(|&u| norm_quantile(u)).collect();
    let y: Vec<f64> = data.v().iter().map(|&v| norm_quantile(v)).collect();
    let (rho, nll, _, _) = brent_min(
        |rho| {
            -x.iter()
                .zip(&y)
                .map(|(&a, &b)| super::gaussian::ln_pdf_scores(a, b, rho))
                .sum::<f64>()
        },
        -RHO_BOUND,
        RHO_BOUND,
        1e-9,
        200,
    );
    let copula = PairCopula::gaussian(rho).expect("rho inside the search interval");
    PairFit::new(copula, -nll)
}

/// Profile likelihood: for each df the correlation is optimized on the t scores,
/// which are computed once per df.
fn fit_student(data: &PairSample) -> Result<PairFit> {
    // scores at the previous df seed Newton for the next one
    let last: RefCell<Option<(Vec<f64>, Vec<f64>)>> = RefCell::new(None);
    let scores = |w: &[f64], prev: Option<&Vec<f64>>, nu: f64| -> Vec<f64> {
        match prev {
            Some(p) => w
                .iter()
                .zip(p)
                .map(|(&a, &s)| t_quantile_near(a, nu, s))
                .collect(),
            None => w.iter().map(|&a| t_quantile(a, nu)).collect(),
        }
    };
    let profile = |nu: f64| -> (f64, f64) {
        let prev = last.borrow_mut().take();
        let x = scores(data.u(), prev.as_ref().map(|p| &p.0), nu);
        let y = scores(data.v(), prev.as_ref().map(|p| &p.1), nu);
        // the marginal terms do not depend on rho
        let marginal: f64 = x
            .iter()
            .chain(&y)
            .map(|&a| (a * a / nu).ln_1p())
            .sum::<f64>()
            * 0.5
            * (nu + 1.0);
        let sq: Vec<f64> = x.iter().zip(&y).map(|(&a, &b)| a * a + b * b).collect();
        let cross: Vec<f64> = x.iter().zip(&y).map(|(&a, &b)| 2.0 * a * b).collect();
        let count = x.len() as f64;
        let (rho, nll, _, _) = brent_min(
            |rho| {
                let scale = 1.0 / (nu * (1.0 - rho * rho));
                let joint: f64 = sq
                    .iter()
                    .zip(&cross)
                    .map(|(&s, &c)| ((s - rho * c) * scale).ln_1p())
                    .sum();
                -(count * student::ln_norm_const(rho, nu) - 0.5 * (nu + 2.0) * joint + marginal)
            },
            -RHO_BOUND,
            RHO_BOUND,
            1e-7,
            200,
        );
        *last.borrow_mut() = Some((x, y));
        (rho, nll)
    };
    // searching on log(nu) puts the first probes where df estimates usually fall
    let (log_nu, nll, _, _) =
        brent_min(|s| profile(s.exp()).1, NU_MIN.ln(), MAX_NU.ln(), 1e-3, 100);
    let nu = log_nu.exp();
    if nu > MAX_NU - NU_EDGE {
        return Ok(fit_gaussian(data));
    }
    let (rho, _) = profile(nu);
    Ok(PairFit::new(PairCopula::student_t(rho, nu)?, -nll))
}

fn fit_scalar(family: FamilyTag, data: &PairSample, lo: f64, hi: f64) -> Result<PairFit> {
    let build = |theta: f64| {
        let theta = if family == FamilyTag::Frank && theta.abs() < 1e-8 {
            1e-8_f64.copysign(theta)
        } else {
            theta
        };
        PairCopula::new(family, theta, None)
    };
    let mut failure = None;
    let (theta, nll, _, _) = brent_min(
        |theta| match build(theta) {
            Ok(c) => -data.loglik(&c),
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        lo,
        hi,
        1e-8,
        200,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(PairFit::new(build(theta)?, -nll))
}

/// Two-sided p-value of the asymptotic normal test of `tau = 0`,
/// with statistic `sqrt(9N(N-1) / (2(2N+5))) |tau|`.
pub fn indep_p_value(tau: f64, n: usize) -> f64 {
    let n = n as f64;
    let stat = (9.0 * n * (n - 1.0) / (2.0 * (2.0 * n + 5.0))).sqrt() * tau.abs();
    2.0 * norm_cdf(-stat)
}

/// Kendall's tau independence test on a pair sample; returns the p-value.
pub fn indep_test(data: &PairSample) -> Result<f64> {
    if data.len() < MIN_PAIR_OBS {
        return Err(Error::InsufficientData {
            needed: MIN_PAIR_OBS,
            got: data.len(),
        });
    }
    Ok(indep_p_value(data.kendall_tau(), data.len()))
}

/// AIC-based family choice among the candidates compatible with the sign of
/// the empirical tau, optionally short-circuited by the independence test.
pub fn select_family(
    data: &PairSample,
    candidates: &[FamilyTag],
    use_indep_test: bool,
    alpha: f64,
) -> Result<PairFit> {
    if data.len() < MIN_PAIR_OBS {
        return Err(Error::InsufficientData {
            needed: MIN_PAIR_OBS,
            got: data.len(),
        });
    }
    let tau = data.kendall_tau();
    if use_indep_test && indep_p_value(tau, data.len()) > alpha {
        return Ok(PairFit::new(PairCopula::independence(), 0.0));
    }
    let mut best: Option<PairFit> = None;
    for &family in candidates.iter().filter(|f| f.admits_tau(tau)) {
        let fit = fit_pair_mle(family, data)?;
        if best.is_none_or(|b| fit.aic < b.aic) {
            best = Some(fit);
        }
    }
    best.ok_or(Error::NoCandidate { tau })
}
