use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use freecov::ensembles::{hypothesis_report, Field, HypothesisBudget};
use freecov::freemoments::CumulantSequence;
use freecov::harness::{self, ConfigOverrides, ExperimentConfig};
use freecov::partitions::SetPartition;
use freecov::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "freecov", version, about = "Free moment limits of sample covariance spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate free and classical moments from cumulants or an ensemble.
    Predict {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated free cumulants a_1, a_2, …; overrides the ensemble.
        #[arg(long)]
        cumulants: Option<String>,
    },
    /// Monte Carlo trace moments across the n grid against the free limit.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Canonical-basis vectors against free, classical and exact moments.
    Counterexample {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Decay of a crossing partition's contribution with n.
    Crossing {
        #[command(flatten)]
        common: CommonArgs,
        /// Blocks as JSON, e.g. [[1,3],[2,4]].
        #[arg(long, default_value = "[[1,3],[2,4]]")]
        partition: String,
    },
    /// Check the two-cover inequalities and the matching construction.
    Lemmas {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Number of random systems to check.
        #[arg(long, default_value_t = 10_000)]
        random: usize,
        /// Skip the exhaustive small-system sweep.
        #[arg(long)]
        no_exhaustive: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Estimate the hypothesis constants at each n in the grid.
    Hypotheses {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// unit-sphere | canonical-basis | gaussian-scaled | radial-mixture
    #[arg(long)]
    ensemble: Option<String>,
    #[arg(long)]
    field: Option<Field>,
    /// Radial-mixture radii, comma-separated.
    #[arg(long)]
    radii: Option<String>,
    /// Radial-mixture probabilities, comma-separated.
    #[arg(long)]
    probabilities: Option<String>,
    /// Aspect ratio n / N.
    #[arg(long)]
    lambda: Option<f64>,
    /// Comma-separated ascending dimensions.
    #[arg(long)]
    n_grid: Option<String>,
    #[arg(long)]
    p_max: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for CSV and JSON reports.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Format printed to stdout.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

impl CommonArgs {
    fn overrides(&self) -> Result<ConfigOverrides> {
        let file = match &self.config {
            Some(path) => ConfigOverrides::from_file(path)?,
            None => ConfigOverrides::default(),
        };
        let flags = ConfigOverrides {
            ensemble: self.ensemble.clone(),
            field: self.field,
            radii: self.radii.as_deref().map(|s| harness::parse_list("radii", s)).transpose()?,
            probabilities: self
                .probabilities
                .as_deref()
                .map(|s| harness::parse_list("probabilities", s))
                .transpose()?,
            lambda: self.lambda,
            n_grid: self.n_grid.as_deref().map(|s| harness::parse_list("n_grid", s)).transpose()?,
            p_max: self.p_max,
            trials: self.trials,
            seed: self.seed,
            output_dir: self.out.clone(),
        };
        Ok(file.merge(flags))
    }

    fn config(&self) -> Result<ExperimentConfig> {
        self.overrides()?.resolve()
    }
}

fn emit<R: Serialize, T: Serialize>(format: Format, rows: &[R], report: &T) -> Result<()> {
    match format {
        Format::Csv => print!("{}", harness::csv_string(rows)?),
        Format::Json => println!("{}", serde_json::to_string_pretty(report)?),
    }
    Ok(())
}

fn write_if<R: Serialize, T: Serialize>(dir: Option<&Path>, stem: &str, rows: &[R], report: &T) -> Result<()> {
    match dir {
        Some(dir) => harness::write_report(dir, stem, rows, report),
        None => Ok(()),
    }
}

/// Ok(true) when every check passed.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Predict { common, cumulants } => {
            let overrides = common.overrides()?;
            let p_max = overrides.p_max.unwrap_or(ExperimentConfig::default().p_max);
            let rows = match cumulants {
                Some(raw) => {
                    let a = CumulantSequence::new(harness::parse_list("cumulants", &raw)?)?;
                    harness::predict(p_max, &a)?
                }
                None => {
                    let spec = overrides.ensemble_spec()?;
                    harness::predict_for_ensemble(p_max, &spec, overrides.lambda.unwrap_or(1.0))?
                }
            };
            write_if(common.out.as_deref(), "predict", &rows, &rows)?;
            emit(common.format, &rows, &rows)?;
            Ok(true)
        }
        Command::Simulate { common } => {
            let report = harness::run_convergence(&common.config()?)?;
            emit(common.format, &report.rows, &report)?;
            Ok(report.passed)
        }
        Command::Counterexample { common } => {
            let report = harness::run_counterexample(&common.config()?)?;
            emit(common.format, &report.rows, &report)?;
            Ok(report.passed)
        }
        Command::Crossing { common, partition } => {
            let pi: SetPartition = serde_json::from_str(&partition)
                .map_err(|e| Error::Validation(format!("cannot parse partition {partition:?}: {e}")))?;
            let report = harness::run_crossing_decay(&common.config()?, &pi)?;
            emit(common.format, &report.rows, &report)?;
            eprintln!("slope = {:.3} ± {:.3}", report.slope, report.slope_std_error);
            Ok(report.passed)
        }
        Command::Lemmas { seed, random, no_exhaustive, out, format } => {
            let summary = harness::run_lemma_suite(seed, random, !no_exhaustive)?;
            write_if(out.as_deref(), "lemmas", &summary.tallies, &summary)?;
            emit(format, &summary.tallies, &summary)?;
            if let Some(instance) = &summary.first_violation {
                eprintln!("first violation: {instance}");
            }
            Ok(summary.passed())
        }
        Command::Hypotheses { common } => {
            let config = common.config()?;
            let reports = config
                .n_grid
                .iter()
                .map(|&n| {
                    hypothesis_report(
                        &config.ensemble,
                        n,
                        config.vector_count(n),
                        config.p_max,
                        HypothesisBudget::default(),
                        config.seed,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            if let Some(dir) = &config.output_dir {
                std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.clone(), source })?;
                let path = dir.join("hypotheses.json");
                std::fs::write(&path, serde_json::to_string_pretty(&reports)?)
                    .map_err(|source| Error::Io { path, source })?;
            }
            println!("{}", serde_json::to_string_pretty(&reports)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_configuration() { 2 } else { 1 })
        }
    }
}
