//! Joint maximum-likelihood refinement, information criteria and Vuong tests.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bicop::{FamilyTag, PairCopula, FRANK_MAX, MAX_NU};
use crate::dist::norm_cdf;
use crate::error::{Error, Result};
use crate::model::RVineModel;
use crate::optim::{bfgs_objective, BfgsOptions, Objective};
use crate::sample::CopulaSample;

const RHO_BOUND: f64 = 0.9999;
const GUMBEL_MAX: f64 = 50.0;
const FRANK_MIN: f64 = 1e-8;
const NU_MIN: f64 = 2.0;

pub fn aic(loglik: f64, n_params: usize) -> f64 {
    -2.0 * loglik + 2.0 * n_params as f64
}

pub fn bic(loglik: f64, n_params: usize, n_obs: usize) -> f64 {
    -2.0 * loglik + n_params as f64 * (n_obs as f64).ln()
}

#[derive(Debug, Clone)]
pub struct MleReport {
    pub model: RVineModel,
    /// Log-likelihood of the starting model.
    pub loglik_seq: f64,
    pub loglik_mle: f64,
    pub n_params: usize,
    pub aic: f64,
    pub bic: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Maps the free parameters of one copula to and from an unconstrained scale.
#[derive(Debug, Clone, Copy)]
struct Slot {
    row: usize,
    col: usize,
    family: FamilyTag,
}

impl Slot {
    fn encode(self, c: &PairCopula, out: &mut Vec<f64>) {
        let t = c.theta();
        match self.family {
            FamilyTag::Independence => {}
            FamilyTag::Gaussian => out.push(t.atanh()),
            FamilyTag::StudentT => {
                out.push(t.atanh());
                // logit of (nu - 2) / (MAX_NU - 2)
                let r = (c.nu().expect("t copula has df") - NU_MIN) / (MAX_NU - NU_MIN);
                out.push((r / (1.0 - r)).ln());
            }
            FamilyTag::Gumbel | FamilyTag::SurvivalGumbel => out.push((t - 1.0).ln()),
            FamilyTag::Gumbel90 | FamilyTag::Gumbel270 => out.push((-t - 1.0).ln()),
            FamilyTag::Frank => out.push(t),
        }
    }

    /// Reads this slot's parameters from the front of `free`.
    fn decode(self, free: &[f64]) -> (PairCopula, usize) {
        let rho = |s: f64| s.tanh().clamp(-RHO_BOUND, RHO_BOUND);
        let gumbel = |s: f64| (1.0 + s.exp()).min(GUMBEL_MAX);
        let (theta, nu, used) = match self.family {
            FamilyTag::Independence => return (PairCopula::independence(), 0),
            FamilyTag::Gaussian => (rho(free[0]), None, 1),
            FamilyTag::StudentT => {
                let r = 1.0 / (1.0 + (-free[1]).exp());
                let nu = (NU_MIN + (MAX_NU - NU_MIN) * r).clamp(NU_MIN + 1e-6, MAX_NU);
                (rho(free[0]), Some(nu), 2)
            }
            FamilyTag::Gumbel | FamilyTag::SurvivalGumbel => (gumbel(free[0]), None, 1),
            FamilyTag::Gumbel90 | FamilyTag::Gumbel270 => (-gumbel(free[0]), None, 1),
            FamilyTag::Frank => {
                let t = free[0].clamp(-FRANK_MAX, FRANK_MAX);
                let t = if t.abs() < FRANK_MIN {
                    FRANK_MIN.copysign(t)
                } else {
                    t
                };
                (t, None, 1)
            }
        };
        let c =
            PairCopula::new(self.family, theta, nu).expect("transformed parameters stay in bounds");
        (c, used)
    }
}

fn slots(model: &RVineModel) -> Vec<Slot> {
    model
        .edges()
        .filter(|(_, _, _, c)| c.family() != FamilyTag::Independence)
        .map(|(row, col, _, c)| Slot {
            row,
            col,
            family: c.family(),
        })
        .collect()
}

fn apply(model: &mut RVineModel, slots: &[Slot], free: &[f64]) {
    let mut at = 0;
    for s in slots {
        let (c, used) = s.decode(&free[at..]);
        model.set_copula(s.row, s.col, c);
        at += used;
    }
}

/// Negative log-likelihood on the free scale. A central difference for one
/// parameter only re-evaluates the steps downstream of its copula.
struct VineObjective<'a> {
    work: RVineModel,
    sample: &'a CopulaSample,
    slots: Vec<Slot>,
    /// Per slot: offset into the free vector and the dependent plan steps.
    layout: Vec<(usize, Vec<usize>)>,
    fd_step: f64,
}

impl<'a> VineObjective<'a> {
    fn new(model: &RVineModel, sample: &'a CopulaSample, fd_step: f64) -> Self {
        let slots = slots(model);
        let mut layout = Vec::with_capacity(slots.len());
        let mut at = 0;
        for s in &slots {
            let k = model
                .plan()
                .iter()
                .position(|st| st.row == s.row && st.col == s.col)
                .expect("every edge has a plan step");
            layout.push((at, model.dependent_steps(k)));
            at += s.family.n_params();
        }
        VineObjective {
            work: model.clone(),
            sample,
            slots,
            layout,
            fd_step,
        }
    }

    fn start(&self) -> Vec<f64> {
        let mut x = Vec::new();
        for s in &self.slots {
            s.encode(self.work.copula(s.row, s.col), &mut x);
        }
        x
    }
}

impl Objective for VineObjective<'_> {
    fn value(&mut self, x: &[f64]) -> f64 {
        apply(&mut self.work, &self.slots, x);
        match self.work.loglik(self.sample) {
            Ok(ll) if ll.is_finite() => -ll,
            _ => f64::INFINITY,
        }
    }

    fn gradient(&mut self, x: &[f64]) -> Vec<f64> {
        apply(&mut self.work, &self.slots, x);
        let cache = self.work.eval_cache(self.sample);
        let mut jobs = Vec::with_capacity(x.len());
        for (s, (at, deps)) in self.slots.iter().zip(&self.layout) {
            for p in 0..s.family.n_params() {
                jobs.push((*s, *at, at + p, deps));
            }
        }
        let (work, step) = (&self.work, self.fd_step);
        jobs.par_iter()
            .map(|&(s, at, i, deps)| {
                let h = step * x[i].abs().max(1.0);
                let mut probe = x[at..at + s.family.n_params()].to_vec();
                probe[i - at] = x[i] + h;
                let up = work.loglik_delta(&cache, deps, &s.decode(&probe).0);
                probe[i - at] = x[i] - h;
                let down = work.loglik_delta(&cache, deps, &s.decode(&probe).0);
                -(up - down) / (2.0 * h)
            })
            .collect()
    }
}

/// Joint maximum likelihood over all pair-copula parameters, starting from
/// the parameters of `model`; structure and families stay fixed.
pub fn fit_mle(model: &RVineModel, sample: &CopulaSample) -> Result<MleReport> {
    fit_mle_with(model, sample, BfgsOptions::default())
}

pub fn fit_mle_with(
    model: &RVineModel,
    sample: &CopulaSample,
    opts: BfgsOptions,
) -> Result<MleReport> {
    let loglik_seq = model.loglik(sample)?;
    if !loglik_seq.is_finite() {
        return Err(Error::IllPosed(
            "starting model has a non-finite log-likelihood".into(),
        ));
    }
    let mut objective = VineObjective::new(model, sample, opts.fd_step);
    let start = objective.start();
    let min = bfgs_objective(&mut objective, &start, opts);
    let mut fitted = model.clone();
    apply(&mut fitted, &objective.slots, &min.x);
    let mut loglik_mle = fitted.loglik(sample)?;
    // the round trip through the transforms can cost a few ulps
    if loglik_mle < loglik_seq {
        fitted = model.clone();
        loglik_mle = loglik_seq;
    }
    let n_params = fitted.n_params();
    Ok(MleReport {
        aic: aic(loglik_mle, n_params),
        bic: bic(loglik_mle, n_params, sample.n_obs()),
        model: fitted,
        loglik_seq,
        loglik_mle,
        n_params,
        iterations: min.iterations,
        converged: min.converged,
    })
}

/// Penalty applied to the summed log-likelihood ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Correction {
    #[default]
    None,
    Akaike,
    Schwarz,
}

impl FromStr for Correction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Correction::None),
            "akaike" | "aic" => Ok(Correction::Akaike),
            "schwarz" | "bic" => Ok(Correction::Schwarz),
            other => Err(format!(
                "unknown correction '{other}' (none, akaike, schwarz)"
            )),
        }
    }
}

impl fmt::Display for Correction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Correction::None => "none",
            Correction::Akaike => "akaike",
            Correction::Schwarz => "schwarz",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Favored {
    A,
    B,
    Inconclusive,
}

impl fmt::Display for Favored {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Favored::A => "A",
            Favored::B => "B",
            Favored::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VuongResult {
    pub statistic: f64,
    /// Two-sided, from the standard normal.
    pub p_value: f64,
    pub correction: Correction,
    pub favored: Favored,
}

/// Edge of the inconclusive region at the 5% level.
pub const VUONG_CRITICAL: f64 = 1.96;

/// Vuong test of model `a` against model `b`; positive statistics favor `a`.
pub fn vuong(
    a: &RVineModel,
    b: &RVineModel,
    sample: &CopulaSample,
    correction: Correction,
) -> Result<VuongResult> {
    let la = a.row_log_densities(sample)?;
    let lb = b.row_log_densities(sample)?;
    vuong_from_logs(&la, &lb, a.n_params(), b.n_params(), correction)
}

/// The Vuong statistic from per-row log densities of the two models.
pub fn vuong_from_logs(
    la: &[f64],
    lb: &[f64],
    params_a: usize,
    params_b: usize,
    correction: Correction,
) -> Result<VuongResult> {
    if la.len() != lb.len() {
        return Err(Error::Dimension {
            expected: la.len(),
            got: lb.len(),
        });
    }
    let n = la.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let m: Vec<f64> = la.iter().zip(lb).map(|(a, b)| a - b).collect();
    let nf = n as f64;
    let sum: f64 = m.iter().sum();
    let mean = sum / nf;
    let var = m.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let sd = var.sqrt();
    if !sd.is_finite() || sd <= 0.0 {
        return Err(Error::IllPosed(
            "log-density differences have zero variance; the models coincide on the sample".into(),
        ));
    }
    let dp = params_a as f64 - params_b as f64;
    let k = match correction {
        Correction::None => 0.0,
        Correction::Akaike => dp,
        Correction::Schwarz => dp * nf.ln() / 2.0,
    };
    let statistic = (sum - k) / (nf.sqrt() * sd);
    let favored = if statistic > VUONG_CRITICAL {
        Favored::A
    } else if statistic < -VUONG_CRITICAL {
        Favored::B
    } else {
        Favored::Inconclusive
    };
    Ok(VuongResult {
        statistic,
        p_value: 2.0 * norm_cdf(-statistic.abs()),
        correction,
        favored,
    })
}
