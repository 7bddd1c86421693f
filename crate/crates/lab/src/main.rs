//! Command-line entry point.
//!
//! Exit codes: 0 success, 2 config error, 3 data error, 4 check failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use boundary_lab::config::ExperimentConfig;
use boundary_lab::error::{AppError, AppResult};
use boundary_lab::{dataset_io, results, runner, svg, textio};

#[derive(Parser)]
#[command(
    name = "boundary-lab",
    about = "Synthetic decision-boundary experiments: data generation, regular vs grid-localized \
             ReLU classifiers, rate curves, separation estimators, and network stitching checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Regular,
    Localized,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotKind {
    Acc,
    Rate,
    Scatter,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a dataset and write dataset.csv plus its metadata sidecar.
    Generate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override a config value as section.key=value (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
    },
    /// Train one classifier on the generated dataset, evaluate it, and
    /// write the model file(s) plus a one-row results CSV.
    Train {
        #[arg(long)]
        mode: ModeArg,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
    },
    /// Train both classifiers across the k list with replicates and write
    /// per-run rows plus the accuracy summary.
    SweepK {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
    },
    /// Excess-risk rate curves over the n list with replicates; writes raw
    /// rows, per-n means, and fitted slopes.
    RateCurve {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
    },
    /// Separation-exponent recovery, measure-scaling fits, and distance
    /// ratio stability; nonzero exit if any check fails.
    TheoryCheck {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
    },
    /// Build random boundary-form locals, stitch them into one network,
    /// and verify the window/zero/size properties.
    StitchVerify {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
    },
    /// Render a results CSV (or dataset) as a self-contained SVG.
    Plot {
        #[arg(long)]
        kind: PlotKind,
        /// Input file; defaults to the standard output of the producing
        /// command under the config's output directory.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run() -> AppResult<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate { config, sets } => {
            let cfg = ExperimentConfig::load(config.as_deref(), &sets)?;
            runner::run_generate(&cfg)?;
            println!(
                "wrote {} ({} rows)",
                cfg.out_path("dataset.csv").display(),
                cfg.task.n_train
            );
            Ok(())
        }
        Command::Train { mode, config, sets } => {
            let cfg = ExperimentConfig::load(config.as_deref(), &sets)?;
            let mode = match mode {
                ModeArg::Regular => runner::TrainMode::Regular,
                ModeArg::Localized => runner::TrainMode::Localized,
            };
            let row = runner::run_train(&cfg, mode)?;
            println!(
                "{}: accuracy {:.4}, excess risk {:.6} (bayes risk {:.6})",
                row.classifier_id, row.accuracy, row.excess, row.bayes_risk
            );
            Ok(())
        }
        Command::SweepK { config, sets } => {
            let cfg = ExperimentConfig::load(config.as_deref(), &sets)?;
            let out = runner::run_sweep_k(&cfg)?;
            results::write_runs(&cfg.out_path("sweep_k_runs.csv"), &out.runs)?;
            results::write_acc_summary(&cfg.out_path("sweep_k_summary.csv"), &out.summary)?;
            if !out.failures.is_empty() {
                textio::write_atomic(
                    &cfg.out_path("sweep_k_failures.txt"),
                    &(out.failures.join("\n") + "\n"),
                )?;
                eprintln!("{} job(s) failed; see sweep_k_failures.txt", out.failures.len());
            }
            for s in &out.summary {
                println!(
                    "k={:<6} {:<10} accuracy {:.4} +- {:.4}",
                    textio::fmt_short(s.k),
                    s.classifier_id,
                    s.mean_accuracy,
                    s.sd_accuracy
                );
            }
            Ok(())
        }
        Command::RateCurve { config, sets } => {
            let cfg = ExperimentConfig::load(config.as_deref(), &sets)?;
            let out = runner::run_rate_curve(&cfg)?;
            results::write_runs(&cfg.out_path("rate_runs.csv"), &out.runs)?;
            results::write_rate_summary(&cfg.out_path("rate_summary.csv"), &out.summary)?;
            results::write_slopes(&cfg.out_path("rate_slopes.csv"), &out.slopes)?;
            if !out.failures.is_empty() {
                textio::write_atomic(
                    &cfg.out_path("rate_failures.txt"),
                    &(out.failures.join("\n") + "\n"),
                )?;
                eprintln!("{} job(s) failed; see rate_failures.txt", out.failures.len());
            }
            for s in &out.slopes {
                println!(
                    "{:<10} slope {:.4} ({} points, {} excluded at the noise floor)",
                    s.classifier_id, s.slope, s.points_used, s.points_excluded
                );
            }
            Ok(())
        }
        Command::TheoryCheck { config, sets } => {
            let cfg = ExperimentConfig::load(config.as_deref(), &sets)?;
            let out = runner::run_theory_check(&cfg)?;
            runner::write_theory_report(&cfg.out_path("theory_report.csv"), &out.rows)?;
            textio::write_atomic(&cfg.out_path("theory_summary.txt"), &out.summary)?;
            print!("{}", out.summary);
            if out.passed {
                Ok(())
            } else {
                Err(AppError::Check("theory checks failed".into()))
            }
        }
        Command::StitchVerify { config, sets } => {
            let cfg = ExperimentConfig::load(config.as_deref(), &sets)?;
            let out = runner::run_stitch_verify(&cfg)?;
            runner::write_stitch_report(&cfg.out_path("stitch_report.csv"), &out.report)?;
            textio::write_atomic(&cfg.out_path("stitch_summary.txt"), &out.summary)?;
            print!("{}", out.summary);
            if out.report.passed {
                Ok(())
            } else {
                Err(AppError::Check("stitch verification failed".into()))
            }
        }
        Command::Plot {
            kind,
            input,
            output,
            config,
            sets,
        } => {
            let cfg = ExperimentConfig::load(config.as_deref(), &sets)?;
            let (default_in, default_out) = match kind {
                PlotKind::Acc => ("sweep_k_summary.csv", "acc.svg"),
                PlotKind::Rate => ("rate_summary.csv", "rate.svg"),
                PlotKind::Scatter => ("dataset.csv", "scatter.svg"),
            };
            let input = input.unwrap_or_else(|| cfg.out_path(default_in));
            let output = output.unwrap_or_else(|| cfg.out_path(default_out));
            match kind {
                PlotKind::Acc => {
                    let rows = results::read_acc_summary(&input)?;
                    svg::plot_accuracy(&rows, &output)?;
                }
                PlotKind::Rate => {
                    let summary = results::read_rate_summary(&input)?;
                    // Slopes live next to the summary; refit from the summary
                    // when the file is absent.
                    let slope_path = input.with_file_name("rate_slopes.csv");
                    let slopes = if slope_path.exists() {
                        results::read_slopes(&slope_path)?
                    } else {
                        Vec::new()
                    };
                    svg::plot_rate(&summary, &slopes, &output)?;
                }
                PlotKind::Scatter => {
                    let data = dataset_io::read_dataset(&input)?;
                    svg::plot_scatter(&data, &output)?;
                }
            }
            println!("wrote {}", output.display());
            Ok(())
        }
    }
}
