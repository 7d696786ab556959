//! Thin command-line wrapper over the library's batch operations.
//! Every random operation requires an explicit seed; there is no
//! wall-clock fallback.

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use panelmi::baselines::{AmputationPlan, Mechanism};
use panelmi::cli;
use panelmi::error::{Error, Result};
use panelmi::ingest::Decimals;
use panelmi::mice::{MiceConfig, VisitOrder};
use panelmi::screening::{DiagnosticsOptions, ScreeningThresholds};

#[derive(Parser)]
#[command(name = "panelmi", about = "Panel-data multiple imputation toolkit", version)]
struct CliArgs {
    /// Optional flat key=value config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct IoArgs {
    /// Input wide-layout CSV.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Schema file describing the variables.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct MiceArgs {
    /// Random seed (required; no wall-clock default).
    #[arg(long)]
    seed: Option<u64>,
    /// Number of imputations for the production run.
    #[arg(long)]
    m: Option<usize>,
    /// Sweeps per chain.
    #[arg(long)]
    iterations: Option<usize>,
    /// Donor-pool size for the matching step.
    #[arg(long)]
    donors: Option<usize>,
    /// Visit order: ascending-missingness or schema.
    #[arg(long)]
    visit_order: Option<String>,
    /// Retry collinear steps once with a small ridge term.
    #[arg(long)]
    ridge_rescue: bool,
    /// Drop the year predictor column.
    #[arg(long)]
    no_year_predictor: bool,
    /// Drop the country indicator block.
    #[arg(long)]
    no_country_indicators: bool,
    /// Cap on chain parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Output precision: "full" or a digit count.
    #[arg(long)]
    decimals: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Per-variable missingness report.
    Profile {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Multiple imputation: one completed CSV per imputation.
    Impute {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        mice: MiceArgs,
    },
    /// Screen variables, impute the survivors, emit the quality report.
    Pipeline {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        mice: MiceArgs,
        /// Trial-run imputation count.
        #[arg(long)]
        trial_m: Option<usize>,
        /// Trial-run sweeps.
        #[arg(long)]
        trial_iterations: Option<usize>,
        /// Reject variables above this fraction of missing information.
        #[arg(long)]
        fmi_threshold: Option<f64>,
        /// Reject above this standardized mean difference.
        #[arg(long)]
        mean_diff_threshold: Option<f64>,
        /// Completed-dataset index used in comparisons (1-based).
        #[arg(long)]
        comparison_index: Option<usize>,
        /// Convergence pass threshold.
        #[arg(long)]
        rhat_threshold: Option<f64>,
        /// Leading fraction of iterations discarded before the check.
        #[arg(long)]
        discard: Option<f64>,
    },
    /// Pool an estimand across completed-dataset files.
    Pool {
        /// Completed CSV files (at least 2).
        #[arg(long, num_args = 1.., required = true)]
        imp: Vec<PathBuf>,
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// "means" or "regress RESPONSE~REG1+REG2".
        #[arg(long, default_value = "means")]
        estimand: String,
    },
    /// Punch holes into a complete dataset under a chosen mechanism.
    Ampute {
        #[command(flatten)]
        io: IoArgs,
        /// mcar, mar, or mnar.
        #[arg(long)]
        mechanism: String,
        /// Target missing fraction in (0,1).
        #[arg(long)]
        rate: f64,
        /// Driver variable (required for mar).
        #[arg(long)]
        driver: Option<String>,
        /// Variables to ampute (default: all imputation targets).
        #[arg(long, num_args = 1..)]
        targets: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Score completed datasets against the amputed-from truth.
    Evaluate {
        /// Complete ground-truth CSV.
        #[arg(long)]
        truth: PathBuf,
        /// deleted.csv from the ampute step.
        #[arg(long)]
        deleted: PathBuf,
        /// Completed dataset files.
        #[arg(long, num_args = 1.., required = true)]
        completed: Vec<PathBuf>,
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Method label written into the report.
        #[arg(long, default_value = "method")]
        method: String,
    },
    /// Rank countries by absorptive-capacity index.
    Rank {
        /// Completed wide CSV, or a pre-indexed table with --preindexed.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        year: Option<i32>,
        /// Input already holds the six index values per country.
        #[arg(long)]
        preindexed: bool,
    },
    /// Diagnostics comparing an observed dataset with a completed one.
    Diagnose {
        /// Observed (incomplete) CSV.
        #[arg(long)]
        observed: PathBuf,
        /// Completed CSV.
        #[arg(long)]
        completed: PathBuf,
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Values from the optional config file, consulted when a flag is absent.
struct Defaults(HashMap<String, String>);

impl Defaults {
    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            Some(v) => v.parse::<T>().map(Some).map_err(|_| {
                Error::InvalidConfig(format!("config value '{v}' for '{key}' does not parse"))
            }),
            None => Ok(None),
        }
    }

    fn path(&self, flag: Option<PathBuf>, key: &str) -> Result<PathBuf> {
        flag.or_else(|| self.0.get(key).map(PathBuf::from))
            .ok_or_else(|| Error::InvalidConfig(format!("missing required option '--{key}'")))
    }
}

fn decimals(flag: &Option<String>, defaults: &Defaults) -> Result<Decimals> {
    let text = match flag {
        Some(t) => t.clone(),
        None => match defaults.0.get("decimals") {
            Some(t) => t.clone(),
            None => return Ok(Decimals::Full),
        },
    };
    Decimals::parse(&text)
        .ok_or_else(|| Error::InvalidConfig(format!("bad --decimals value '{text}'")))
}

fn mice_config(args: &MiceArgs, defaults: &Defaults, m_key: &str, it_key: &str) -> Result<MiceConfig> {
    let seed = args
        .seed
        .or(defaults.get("seed")?)
        .ok_or_else(|| Error::InvalidConfig("a seed is required (--seed)".into()))?;
    let mut config = MiceConfig {
        seed,
        ..MiceConfig::default()
    };
    if let Some(m) = args.m.or(defaults.get(m_key)?) {
        config.m = m;
    }
    if let Some(t) = args.iterations.or(defaults.get(it_key)?) {
        config.iterations = t;
    }
    if let Some(k) = args.donors.or(defaults.get("donors")?) {
        config.pmm.k = k;
    }
    let visit = args
        .visit_order
        .clone()
        .or_else(|| defaults.0.get("visit_order").cloned());
    if let Some(v) = visit {
        config.visit_order = match v.as_str() {
            "ascending-missingness" => VisitOrder::AscendingMissingness,
            "schema" => VisitOrder::SchemaOrder,
            other => {
                return Err(Error::InvalidConfig(format!("unknown visit order '{other}'")));
            }
        };
    }
    if args.ridge_rescue || defaults.get::<bool>("ridge_rescue")?.unwrap_or(false) {
        config.ridge_rescue = true;
    }
    if args.no_year_predictor || !defaults.get::<bool>("year_predictor")?.unwrap_or(true) {
        config.include_year_predictor = false;
    }
    if args.no_country_indicators || !defaults.get::<bool>("country_indicators")?.unwrap_or(true) {
        config.include_country_indicators = false;
    }
    Ok(config)
}

fn parse_estimand(text: &str) -> Result<cli::Estimand> {
    if text == "means" {
        return Ok(cli::Estimand::VariableMeans);
    }
    if let Some(rest) = text.strip_prefix("regress ") {
        if let Some((response, regs)) = rest.split_once('~') {
            let regressors: Vec<String> = regs
                .split('+')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            if !regressors.is_empty() {
                return Ok(cli::Estimand::Regression {
                    response: response.trim().to_string(),
                    regressors,
                });
            }
        }
    }
    Err(Error::InvalidConfig(format!(
        "bad estimand '{text}' (use \"means\" or \"regress y~x1+x2\")"
    )))
}

fn run(args: CliArgs) -> Result<()> {
    let defaults = Defaults(match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::io(format!("reading config {}", path.display()), e))?;
            cli::parse_config(&text)?
        }
        None => HashMap::new(),
    });

    match args.command {
        Command::Profile { io } => {
            cli::cmd_profile(
                &defaults.path(io.input, "input")?,
                &defaults.path(io.schema, "schema")?,
                &defaults.path(io.out, "out")?,
            )?;
        }
        Command::Impute { io, mice } => {
            let config = mice_config(&mice, &defaults, "production_m", "production_iterations")?;
            cli::cmd_impute(
                &defaults.path(io.input, "input")?,
                &defaults.path(io.schema, "schema")?,
                &defaults.path(io.out, "out")?,
                &config,
                mice.workers.or(defaults.get("workers")?),
                decimals(&mice.decimals, &defaults)?,
            )?;
        }
        Command::Pipeline {
            io,
            mice,
            trial_m,
            trial_iterations,
            fmi_threshold,
            mean_diff_threshold,
            comparison_index,
            rhat_threshold,
            discard,
        } => {
            let production = mice_config(&mice, &defaults, "production_m", "production_iterations")?;
            let mut trial = production.clone();
            trial.m = trial_m.or(defaults.get("trial_m")?).unwrap_or(20);
            trial.iterations = trial_iterations
                .or(defaults.get("trial_iterations")?)
                .unwrap_or(production.iterations);
            let mut thresholds = ScreeningThresholds::default();
            if let Some(f) = fmi_threshold.or(defaults.get("fmi_threshold")?) {
                thresholds.fmi = f;
            }
            if let Some(d) = mean_diff_threshold.or(defaults.get("mean_diff_threshold")?) {
                thresholds.mean_diff = d;
            }
            if let Some(lo) = defaults.get("sd_ratio_low")? {
                thresholds.sd_ratio_low = lo;
            }
            if let Some(hi) = defaults.get("sd_ratio_high")? {
                thresholds.sd_ratio_high = hi;
            }
            let mut options = DiagnosticsOptions {
                comparison_index: comparison_index.or(defaults.get("comparison_index")?),
                ..DiagnosticsOptions::default()
            };
            if let Some(r) = rhat_threshold.or(defaults.get("rhat_threshold")?) {
                options.rhat_threshold = r;
            }
            if let Some(d) = discard.or(defaults.get("discard")?) {
                options.discard = d;
            }
            cli::cmd_pipeline(
                &defaults.path(io.input, "input")?,
                &defaults.path(io.schema, "schema")?,
                &defaults.path(io.out, "out")?,
                &trial,
                &production,
                &thresholds,
                &options,
                mice.workers.or(defaults.get("workers")?),
                decimals(&mice.decimals, &defaults)?,
            )?;
        }
        Command::Pool {
            imp,
            schema,
            out,
            estimand,
        } => {
            cli::cmd_pool(
                &imp,
                &defaults.path(schema, "schema")?,
                &defaults.path(out, "out")?,
                &parse_estimand(&estimand)?,
            )?;
        }
        Command::Ampute {
            io,
            mechanism,
            rate,
            driver,
            targets,
            seed,
        } => {
            let mechanism = Mechanism::parse(&mechanism).ok_or_else(|| {
                Error::InvalidConfig(format!("unknown mechanism '{mechanism}'"))
            })?;
            let seed = seed
                .or(defaults.get("seed")?)
                .ok_or_else(|| Error::InvalidConfig("a seed is required (--seed)".into()))?;
            let input = defaults.path(io.input, "input")?;
            let schema_path = defaults.path(io.schema, "schema")?;
            let targets = if targets.is_empty() {
                let schema = panelmi::ingest::read_schema(&schema_path)?;
                schema
                    .variables
                    .iter()
                    .filter(|m| m.role == panelmi::Role::ImputationTarget)
                    .map(|m| m.code.clone())
                    .collect()
            } else {
                targets
            };
            let plan = AmputationPlan {
                mechanism,
                rate,
                driver,
                targets,
                seed,
            };
            cli::cmd_ampute(
                &input,
                &schema_path,
                &defaults.path(io.out, "out")?,
                &plan,
                Decimals::Full,
            )?;
        }
        Command::Evaluate {
            truth,
            deleted,
            completed,
            schema,
            out,
            method,
        } => {
            cli::cmd_evaluate(
                &truth,
                &deleted,
                &completed,
                &defaults.path(schema, "schema")?,
                &defaults.path(out, "out")?,
                &method,
            )?;
        }
        Command::Rank {
            input,
            schema,
            out,
            year,
            preindexed,
        } => {
            cli::cmd_rank(
                &defaults.path(input, "input")?,
                schema.as_deref(),
                year.or(defaults.get("year")?),
                preindexed,
                &defaults.path(out, "out")?,
            )?;
        }
        Command::Diagnose {
            observed,
            completed,
            schema,
            out,
        } => {
            cli::cmd_diagnose(
                &observed,
                &completed,
                &defaults.path(schema, "schema")?,
                &defaults.path(out, "out")?,
            )?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = CliArgs::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
