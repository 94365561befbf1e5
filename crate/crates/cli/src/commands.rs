use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rvine_core::bicop::FamilyTag;
use rvine_core::fit::{fit_mle, vuong, Correction};
use rvine_core::select::{sequential_select, SelectionOptions, StructureKind};
use rvine_core::RVineModel;

use crate::error::{CliError, CliResult};
use crate::model_file;
use crate::pit::pit_table;
use crate::study::{run_study, Scenario, StudyConfig, StudyResult, TauSetting, DEFAULT_REPS};
use crate::table::{read_table_file, write_table, Table};

#[derive(Debug, Parser)]
#[command(
    name = "rvine",
    version,
    about = "Regular vine copulas from the command line"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank-transform each column of a CSV file to (0, 1).
    Pit(PitArgs),
    /// Select and estimate an R-vine on copula-scale data.
    Fit(FitArgs),
    /// Draw a sample from a model file.
    Simulate(SimulateArgs),
    /// Evaluate a model's density at each row of a data file.
    Density(DensityArgs),
    /// Vuong test of two models on the same data.
    Compare(CompareArgs),
    /// Run the simulation study for one scenario.
    Simstudy(SimstudyArgs),
}

#[derive(Debug, Args)]
pub struct PitArgs {
    /// Numeric CSV with a header row.
    pub input: PathBuf,
    /// Write here instead of standard output.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Copula-scale CSV with a header row.
    pub data: PathBuf,
    #[arg(long, default_value = "rvine")]
    pub structure: StructureKind,
    /// Comma-separated family names (gauss, t, gumbel, sgumbel, gumbel90, gumbel270, frank) or "all".
    #[arg(long, default_value = "all")]
    pub families: String,
    /// Use independence where the Kendall's tau test does not reject.
    #[arg(long)]
    pub indep_test: bool,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Refine the sequential estimates by joint maximum likelihood.
    #[arg(long)]
    pub mle: bool,
    /// Model file to write.
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub model: PathBuf,
    #[arg(short = 'n', long = "count")]
    pub count: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    pub model: PathBuf,
    pub data: PathBuf,
    /// Report log densities.
    #[arg(long)]
    pub log: bool,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub model_a: PathBuf,
    pub model_b: PathBuf,
    pub data: PathBuf,
    #[arg(long, default_value = "none")]
    pub correction: Correction,
}

#[derive(Debug, Args)]
pub struct SimstudyArgs {
    #[arg(long)]
    pub scenario: Scenario,
    #[arg(long, default_value = "const")]
    pub tau_setting: TauSetting,
    #[arg(short = 'n', long = "obs", default_value_t = 1000)]
    pub n_obs: usize,
    #[arg(long, default_value_t = DEFAULT_REPS)]
    pub reps: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Refine each selected model by joint maximum likelihood.
    #[arg(long)]
    pub mle: bool,
    /// Use the true model in place of the selected one.
    #[arg(long)]
    pub oracle: bool,
    /// Compare with a sample from an independent stream.
    #[arg(long)]
    pub fresh_replay: bool,
}

pub fn parse_families(list: &str) -> CliResult<Vec<FamilyTag>> {
    if list.trim().eq_ignore_ascii_case("all") {
        return Ok(FamilyTag::PARAMETRIC.to_vec());
    }
    let mut out = Vec::new();
    for name in list.split(',') {
        let f: FamilyTag = name.parse().map_err(CliError::Validation)?;
        if f == FamilyTag::Independence {
            return Err(CliError::invalid(
                "independence is not a candidate family; use --indep-test",
            ));
        }
        if !out.contains(&f) {
            out.push(f);
        }
    }
    Ok(out)
}

fn output(path: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::invalid(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn check_dim(model: &RVineModel, data: &Table) -> CliResult<()> {
    if data.n_cols() != model.dim() {
        return Err(CliError::invalid(format!(
            "data has {} columns but the model has dimension {}",
            data.n_cols(),
            model.dim()
        )));
    }
    Ok(())
}

/// Executes one command. Results go to standard output (or `--out`); the
/// density command adds its total log-likelihood on standard error.
pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Pit(a) => {
            let table = pit_table(&read_table_file(&a.input)?)?;
            write_table(&table, output(&a.out)?)
        }
        Command::Fit(a) => fit(a, &mut io::stdout().lock()),
        Command::Simulate(a) => {
            if a.count == 0 {
                return Err(CliError::invalid("-n must be at least 1"));
            }
            let model = model_file::load(&a.model)?;
            let sample = model.simulate(a.count, a.seed)?;
            write_table(&Table::from_sample(&sample), output(&a.out)?)
        }
        Command::Density(a) => {
            let model = model_file::load(&a.model)?;
            let data = read_table_file(&a.data)?;
            check_dim(&model, &data)?;
            let logs = model.row_log_densities(&data.to_sample()?)?;
            let name = if a.log { "log_density" } else { "density" };
            let values: Vec<f64> = if a.log {
                logs.clone()
            } else {
                logs.iter().map(|l| l.exp()).collect()
            };
            write_table(
                &Table::from_columns(vec![name.into()], &[values]),
                output(&a.out)?,
            )?;
            eprintln!("loglik {}", logs.iter().sum::<f64>());
            Ok(())
        }
        Command::Compare(a) => {
            let ma = model_file::load(&a.model_a)?;
            let mb = model_file::load(&a.model_b)?;
            let data = read_table_file(&a.data)?;
            check_dim(&ma, &data)?;
            check_dim(&mb, &data)?;
            let v = vuong(&ma, &mb, &data.to_sample()?, a.correction)?;
            let mut out = io::stdout().lock();
            writeln!(out, "statistic {}", v.statistic)?;
            writeln!(out, "p-value {}", v.p_value)?;
            writeln!(out, "correction {}", v.correction)?;
            writeln!(out, "favored {}", v.favored)?;
            Ok(())
        }
        Command::Simstudy(a) => {
            let cfg = StudyConfig {
                scenario: a.scenario,
                setting: a.tau_setting,
                n_obs: a.n_obs,
                reps: a.reps,
                seed: a.seed,
                mle: a.mle,
                oracle: a.oracle,
                fresh_replay: a.fresh_replay,
            };
            let result = run_study(&cfg)?;
            let mut out = io::stdout().lock();
            writeln!(out, "{}", StudyResult::header())?;
            writeln!(out, "{}", result.row())?;
            Ok(())
        }
    }
}

fn fit(a: FitArgs, report: &mut dyn Write) -> CliResult<()> {
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(CliError::invalid("--alpha must lie in (0, 1)"));
    }
    let data = read_table_file(&a.data)?;
    let sample = data.to_sample()?;
    if sample.dim() < 2 {
        return Err(CliError::invalid("need at least two columns"));
    }
    let opts = SelectionOptions {
        kind: a.structure,
        families: parse_families(&a.families)?,
        use_indep_test: a.indep_test,
        alpha: a.alpha,
    };
    let seq = sequential_select(&sample, &opts)?;
    let seq_loglik = seq.model.loglik(&sample)?;
    let (model, mle_loglik) = if a.mle {
        let r = fit_mle(&seq.model, &sample)?;
        (r.model, Some(r.loglik_mle))
    } else {
        (seq.model, None)
    };
    model_file::save(&model, &a.out)?;

    let n_obs = sample.n_obs();
    let loglik = mle_loglik.unwrap_or(seq_loglik);
    let k = model.n_params();
    writeln!(report, "structure {}", opts.kind)?;
    writeln!(report, "observations {n_obs}")?;
    let labels: Vec<String> = data
        .header
        .iter()
        .enumerate()
        .map(|(j, h)| format!("{}={h}", j + 1))
        .collect();
    writeln!(report, "variables {}", labels.join(" "))?;
    writeln!(report, "loglik sequential {seq_loglik:.4}")?;
    if let Some(l) = mle_loglik {
        writeln!(report, "loglik joint {l:.4}")?;
    }
    writeln!(report, "parameters {k}")?;
    writeln!(report, "AIC {:.4}", rvine_core::fit::aic(loglik, k))?;
    writeln!(report, "BIC {:.4}", rvine_core::fit::bic(loglik, k, n_obs))?;
    let counts: Vec<String> = model
        .family_counts()
        .iter()
        .map(|(f, c)| format!("{f} {c}"))
        .collect();
    writeln!(report, "copulas {}", counts.join(", "))?;
    Ok(())
}
