//! Command-line runner: dataset I/O, training, cross-validation, field-study
//! simulation and report generation.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

use clap::{Args, Parser, Subcommand};
use commands::{EvaluateArgs, GenDatasetArgs, SimulateArgs};
use config::LoadedConfig;
use error::{CliError, CliResult};
use std::path::PathBuf;

pub const LOG_ENV: &str = "RECEPTIVE_JITAI_LOG";

#[derive(Debug, Parser)]
#[command(
    name = "receptive-jitai",
    version,
    about = "Receptivity-aware intervention delivery: training, simulation and evaluation"
)]
pub struct Cli {
    /// Worker threads for replicate and bootstrap parallelism [default: available cores].
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the static SVM on a labeled CSV and write its model record.
    TrainStatic {
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Grouped cross-validation of random, static-SVM, P1-LR and adaptive.
    Cv {
        dataset: PathBuf,
        #[arg(long, default_value_t = 5)]
        groups: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Directory for cv_report.csv and manifest.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the simulated field study and write one JSONL event log per replicate.
    Simulate {
        /// TOML file with [experiment] and [models] tables.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Train the static and population models on this labeled CSV.
        #[arg(long)]
        train_static_from: Option<PathBuf>,
    },
    /// Comparison tables and daily series from simulated logs.
    ///
    /// table2.csv: static-control and adaptive-control differences over all
    /// messages, resampling messages. table3.csv: the same after warm-up,
    /// resampling participants with their messages. Columns: comparison,
    /// metric, n_treatment, n_control, treatment_rate, control_rate,
    /// mean_difference, percent_change, ci_low, ci_high (95% percentile
    /// bootstrap), p_value, p_adjusted (Benjamini-Hochberg over the table),
    /// formatted. fig4_<metric>.csv: model, day, rate, n for each attributed
    /// model and day. trends.csv: weighted least-squares slope per day after
    /// warm-up with a day-permutation p-value.
    Evaluate {
        logs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = receptive_jitai::eval::DEFAULT_RESAMPLES)]
        resamples: usize,
        #[arg(long, default_value_t = receptive_jitai::eval::DEFAULT_PERMUTATIONS)]
        permutations: usize,
        /// Defaults to the value recorded by `simulate`, else 7.
        #[arg(long)]
        warm_up_days: Option<u32>,
    },
    /// Write a synthetic labeled CSV from the known-truth population.
    GenDataset(GenDatasetCli),
}

#[derive(Debug, Args)]
pub struct GenDatasetCli {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub participants: u32,
    #[arg(long, default_value_t = 40)]
    pub instances: u32,
    /// Probability of flipping each label.
    #[arg(long, default_value_t = 0.15)]
    pub noise: f64,
    /// Observed positive rate to calibrate to.
    #[arg(long)]
    pub prevalence: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub heterogeneity: f64,
    #[arg(long, default_value_t = 1.0)]
    pub context_strength: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

fn thread_pool(jobs: Option<usize>) -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(CliError::Usage("--jobs must be positive".into()));
        }
        b = b.num_threads(n);
    }
    b.build()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))
}

/// Runs one command and returns what it printed on success.
pub fn run(cli: Cli) -> CliResult<String> {
    let pool = thread_pool(cli.jobs)?;
    pool.install(|| dispatch(cli.command))
}

fn dispatch(command: Command) -> CliResult<String> {
    match command {
        Command::TrainStatic { dataset, out } => {
            let model = commands::train_static(&dataset, &out)?;
            Ok(format!("{}\n", model.to_record()))
        }
        Command::Cv {
            dataset,
            groups,
            seed,
            out,
        } => Ok(commands::cv(&dataset, groups, seed, out.as_deref())?.render()),
        Command::Simulate {
            config,
            out,
            seed,
            train_static_from,
        } => {
            let loaded = match &config {
                Some(path) => LoadedConfig::load(path)?,
                None => LoadedConfig::defaults(),
            };
            let manifest = commands::simulate(&SimulateArgs {
                config: &loaded,
                out: &out,
                seed,
                train_static_from: train_static_from.as_deref(),
            })?;
            Ok(format!(
                "wrote {} files to {}\n",
                manifest.outputs.len() + 1,
                out.display()
            ))
        }
        Command::Evaluate {
            logs,
            out,
            seed,
            resamples,
            permutations,
            warm_up_days,
        } => {
            let eval = commands::evaluate(&EvaluateArgs {
                logs: &logs,
                out: &out,
                seed,
                resamples,
                permutations,
                warm_up_days,
            })?;
            let mut s = format!("{} messages\n", eval.n_messages);
            for r in &eval.table2 {
                if let (Some(d), Some(pc)) = (r.mean_difference, r.percent_change) {
                    s.push_str(&format!(
                        "{:<17} {:<24} {}\n",
                        r.label,
                        r.metric.as_str(),
                        receptive_jitai::eval::format_difference(d, pc)
                    ));
                }
            }
            Ok(s)
        }
        Command::GenDataset(g) => {
            let args = GenDatasetArgs {
                participants: g.participants,
                instances: g.instances,
                label_noise: g.noise,
                prevalence: g.prevalence,
                heterogeneity: g.heterogeneity,
                context_strength: g.context_strength,
                seed: g.seed,
            };
            let rows = commands::gen_dataset(&args, &g.out)?;
            let positives = rows.iter().filter(|r| r.label).count();
            Ok(format!(
                "{} rows, {:.3} positive\n",
                rows.len(),
                positives as f64 / rows.len().max(1) as f64
            ))
        }
    }
}
