//! Simulation study: how well sequential selection recovers known vines.
//!
//! Every scenario lives on the seven-variable example structure. Each
//! replication simulates a sample from the true model, selects and fits an
//! R-vine on it, then compares pairwise Kendall's taus (overall and in both
//! tails) of the sample with those of a sample from the fitted model.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use rvine_core::bicop::{tau_to_param, FamilyTag, PairCopula};
use rvine_core::fit::fit_mle;
use rvine_core::kendall::kendall_tau;
use rvine_core::matrix::TriMatrix;
use rvine_core::select::{exceedance_tau, sequential_select, SelectionOptions, Tail};
use rvine_core::structure::RVineStructure;
use rvine_core::{CopulaSample, RVineModel};

use crate::error::{CliError, CliResult};

/// Corner size for the exceedance taus.
pub const DELTA: f64 = 0.2;

pub const DEFAULT_REPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    AllGauss,
    AllT,
    AllGumbel,
    AllFrank,
    Mixed,
    TMixed,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::AllGauss,
        Scenario::AllT,
        Scenario::AllGumbel,
        Scenario::AllFrank,
        Scenario::Mixed,
        Scenario::TMixed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::AllGauss => "all-gauss",
            Scenario::AllT => "all-t",
            Scenario::AllGumbel => "all-gumbel",
            Scenario::AllFrank => "all-frank",
            Scenario::Mixed => "mixed",
            Scenario::TMixed => "t-mixed",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s.to_ascii_lowercase())
            .ok_or_else(|| {
                let names: Vec<&str> = Scenario::ALL.iter().map(|s| s.name()).collect();
                format!("unknown scenario '{s}' ({})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TauSetting {
    /// Constant per tree, larger for the three central pairs.
    Const,
    Mixed,
}

impl fmt::Display for TauSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TauSetting::Const => "const",
            TauSetting::Mixed => "mixed",
        })
    }
}

impl FromStr for TauSetting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "const" | "constant" => Ok(TauSetting::Const),
            "mixed" => Ok(TauSetting::Mixed),
            other => Err(format!("unknown tau setting '{other}' (const, mixed)")),
        }
    }
}

/// The seven-variable example structure shared by all scenarios.
pub fn study_structure() -> RVineStructure {
    RVineStructure::from_rows(&[
        vec![7],
        vec![4, 4],
        vec![5, 6, 6],
        vec![1, 5, 5, 5],
        vec![2, 1, 1, 1, 1],
        vec![3, 2, 2, 3, 3, 3],
        vec![6, 3, 3, 2, 2, 2, 2],
    ])
    .expect("the example matrix is an R-vine matrix")
}

/// Kendall's tau of the pair copula at matrix position `(row, col)`, `row > col`.
pub fn tau_at(setting: TauSetting, row: usize, col: usize) -> f64 {
    const CONST: [&[f64]; 7] = [
        &[],
        &[0.05],
        &[0.10, 0.10],
        &[0.15, 0.15, 0.15],
        &[0.20, 0.20, 0.20, 0.20],
        &[0.40, 0.40, 0.40, 0.40, 0.50],
        &[0.60, 0.60, 0.60, 0.60, 0.70, 0.70],
    ];
    const MIXED: [&[f64]; 7] = [
        &[],
        &[0.05],
        &[0.10, 0.10],
        &[0.15, 0.15, 0.15],
        &[0.20, 0.20, 0.20, 0.20],
        &[0.25, 0.30, 0.35, 0.40, 0.45],
        &[0.50, 0.55, 0.60, 0.65, 0.70, 0.75],
    ];
    match setting {
        TauSetting::Const => CONST[row][col],
        TauSetting::Mixed => MIXED[row][col],
    }
}

/// Family at matrix position `(row, col)` for the two mixed scenarios.
fn mixed_family(scenario: Scenario, row: usize, col: usize) -> FamilyTag {
    use FamilyTag::{Frank as F, Gaussian as N, Gumbel as G, StudentT as T, SurvivalGumbel as SG};
    const MIXED: [&[FamilyTag]; 7] = [
        &[],
        &[N],
        &[F, N],
        &[N, F, N],
        &[G, SG, G, SG],
        &[F, N, F, N, T],
        &[SG, G, SG, G, T, T],
    ];
    if scenario == Scenario::TMixed && row >= 5 {
        T
    } else {
        MIXED[row][col]
    }
}

/// The true model of a scenario.
///
/// In the all-t scenario the degrees of freedom are 3 in the first tree and
/// grow by one per tree. In the mixed scenarios they vary by column, `3 + col`.
pub fn true_model(scenario: Scenario, setting: TauSetting) -> RVineModel {
    let s = study_structure();
    let n = s.dim();
    let copulas = TriMatrix::from_fn(n, |r, c| {
        if r <= c {
            return PairCopula::independence();
        }
        let tree = n - 1 - r;
        let (family, nu) = match scenario {
            Scenario::AllGauss => (FamilyTag::Gaussian, 0.0),
            Scenario::AllT => (FamilyTag::StudentT, 3.0 + tree as f64),
            Scenario::AllGumbel => (FamilyTag::Gumbel, 0.0),
            Scenario::AllFrank => (FamilyTag::Frank, 0.0),
            Scenario::Mixed | Scenario::TMixed => (mixed_family(scenario, r, c), 3.0 + c as f64),
        };
        let copula = tau_to_param(family, tau_at(setting, r, c))
            .expect("study taus are positive and moderate");
        if family == FamilyTag::StudentT {
            PairCopula::student_t(copula.theta(), nu).expect("valid t parameters")
        } else {
            copula
        }
    });
    RVineModel::new(s, copulas).expect("dimensions agree")
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub scenario: Scenario,
    pub setting: TauSetting,
    pub n_obs: usize,
    pub reps: usize,
    pub seed: u64,
    /// Refine the sequential fit by joint maximum likelihood.
    pub mle: bool,
    /// Skip selection and compare the true model with itself.
    pub oracle: bool,
    /// Draw the comparison sample from its own stream instead of reusing the
    /// uniforms behind the fitting sample.
    pub fresh_replay: bool,
}

impl StudyConfig {
    pub fn new(scenario: Scenario, setting: TauSetting, n_obs: usize) -> Self {
        StudyConfig {
            scenario,
            setting,
            n_obs,
            reps: DEFAULT_REPS,
            seed: 42,
            mle: false,
            oracle: false,
            fresh_replay: false,
        }
    }
}

/// Mean absolute tau differences of one replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauDiff {
    pub lower: f64,
    pub general: f64,
    pub upper: f64,
}

/// Mean absolute differences between the pairwise taus of two samples.
///
/// A pair is left out of a tail mean when either sample has fewer than ten
/// points in that corner; the mean is NaN if no pair qualifies.
pub fn tau_differences(x: &CopulaSample, y: &CopulaSample, delta: f64) -> TauDiff {
    let n = x.dim();
    let (xc, yc): (Vec<Vec<f64>>, Vec<Vec<f64>>) =
        (0..n).map(|j| (x.column(j), y.column(j))).unzip();
    let mut sums = [(0.0, 0usize); 3];
    for i in 0..n {
        for j in i + 1..n {
            let general = kendall_tau(&xc[i], &xc[j]) - kendall_tau(&yc[i], &yc[j]);
            sums[1].0 += general.abs();
            sums[1].1 += 1;
            for (slot, tail) in [(0, Tail::Lower), (2, Tail::Upper)] {
                let tx = exceedance_tau(&xc[i], &xc[j], delta, tail);
                let ty = exceedance_tau(&yc[i], &yc[j], delta, tail);
                if let (Ok(a), Ok(b)) = (tx, ty) {
                    sums[slot].0 += (a - b).abs();
                    sums[slot].1 += 1;
                }
            }
        }
    }
    let mean = |(s, k): (f64, usize)| if k == 0 { f64::NAN } else { s / k as f64 };
    TauDiff {
        lower: mean(sums[0]),
        general: mean(sums[1]),
        upper: mean(sums[2]),
    }
}

/// Offset separating the streams of fresh comparison samples from the
/// fitting streams `seed + rep`.
const REPLAY_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

/// One replication with seed `seed + rep`.
///
/// By default the fitting sample and the sample from the fitted model are
/// driven by the same uniforms, so the comparison isolates the model error
/// from most of the sampling noise.
pub fn run_rep(cfg: &StudyConfig, truth: &RVineModel, rep: usize) -> CliResult<TauDiff> {
    let seed = cfg.seed.wrapping_add(rep as u64);
    let data = truth.simulate(cfg.n_obs, seed)?;
    let fitted = if cfg.oracle {
        truth.clone()
    } else {
        let seq = sequential_select(&data, &SelectionOptions::default())?;
        if cfg.mle {
            fit_mle(&seq.model, &data)?.model
        } else {
            seq.model
        }
    };
    let replay_seed = if cfg.fresh_replay {
        seed ^ REPLAY_STREAM
    } else {
        seed
    };
    let replay = fitted.simulate(cfg.n_obs, replay_seed)?;
    Ok(tau_differences(&data, &replay, DELTA))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub config: StudyConfig,
    /// One entry per replication, in replication order.
    pub reps: Vec<TauDiff>,
}

/// Mean and standard deviation of the finite values.
fn mean_sd(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

impl StudyResult {
    pub fn lower(&self) -> (f64, f64) {
        mean_sd(self.reps.iter().map(|r| r.lower))
    }

    pub fn general(&self) -> (f64, f64) {
        mean_sd(self.reps.iter().map(|r| r.general))
    }

    pub fn upper(&self) -> (f64, f64) {
        mean_sd(self.reps.iter().map(|r| r.upper))
    }

    pub fn header() -> String {
        format!(
            "{:<11}{:<7}{:>6}{:>6}  {:<17}{:<17}{:<17}",
            "scenario", "taus", "N", "reps", "lower", "general", "upper"
        )
    }

    /// Means over replications with standard deviations in parentheses.
    pub fn row(&self) -> String {
        let cell = |(m, s): (f64, f64)| format!("{m:.4} ({s:.4})");
        let c = &self.config;
        format!(
            "{:<11}{:<7}{:>6}{:>6}  {:<17}{:<17}{:<17}",
            c.scenario.name(),
            c.setting.to_string(),
            c.n_obs,
            c.reps,
            cell(self.lower()),
            cell(self.general()),
            cell(self.upper())
        )
    }
}

/// Runs all replications in parallel; results keep replication order.
pub fn run_study(cfg: &StudyConfig) -> CliResult<StudyResult> {
    if cfg.reps == 0 {
        return Err(CliError::invalid("--reps must be at least 1"));
    }
    if cfg.n_obs < 10 {
        return Err(CliError::invalid("-n must be at least 10"));
    }
    let truth = true_model(cfg.scenario, cfg.setting);
    let reps = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| run_rep(cfg, &truth, rep))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(StudyResult {
        config: cfg.clone(),
        reps,
    })
}
