use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};
use heartq::FeatureMethod;
use heartq_cli::{
    cmd_eval, cmd_plot, cmd_preprocess, cmd_synth, cmd_train, CliError, CliResult, EvalOptions, PreprocessOptions,
    SynthOptions, TrainOptions,
};

#[derive(Parser)]
#[command(name = "heartq", version, about = "Heart-sound classification with a simulated quantum CNN")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write synthetic recordings and a manifest.
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 10)]
        n_per_class: usize,
        #[arg(long, default_value_t = 4)]
        cycles: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Turn the recordings of a manifest into feature rows.
    Preprocess {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        method: FeatureMethod,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Fit a model on a feature file.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        method: Option<FeatureMethod>,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 0.3)]
        test_fraction: f64,
        #[arg(long)]
        out_model: PathBuf,
        #[arg(long)]
        out_history: PathBuf,
    },
    /// Print metrics of a saved model as JSON.
    Eval {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        method: Option<FeatureMethod>,
    },
    /// Chart a training history as SVG.
    Plot {
        #[arg(long)]
        history: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Synth {
            out_dir,
            n_per_class,
            cycles,
            seed,
        } => {
            let manifest = cmd_synth(&SynthOptions {
                out_dir,
                n_per_class,
                cycles,
                seed,
            })?;
            println!("wrote {}", manifest.display());
        }
        Command::Preprocess {
            manifest,
            method,
            out,
            threads,
        } => {
            let summary = cmd_preprocess(&PreprocessOptions {
                manifest,
                method,
                out,
                threads,
            })?;
            println!(
                "{} rows from {} files, {} skipped",
                summary.rows,
                summary.files_ok,
                summary.failures.len()
            );
        }
        Command::Train {
            features,
            method,
            max_iter,
            seed,
            test_fraction,
            out_model,
            out_history,
        } => {
            let r = cmd_train(&TrainOptions {
                features,
                method,
                max_iter,
                seed,
                test_fraction,
                out_model,
                out_history,
            })?;
            println!("train accuracy {:.4} loss {:.6}", r.train.accuracy, r.train.loss);
            println!("test accuracy {:.4} loss {:.6}", r.test.accuracy, r.test.loss);
        }
        Command::Eval {
            features,
            model,
            method,
        } => {
            let m = cmd_eval(&EvalOptions {
                features,
                model,
                method,
            })?;
            println!("{}", serde_json::to_string_pretty(&m).expect("metrics serialize"));
        }
        Command::Plot { history, out } => cmd_plot(&history, &out)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::new().filter_level(log::LevelFilter::Warn).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            eprintln!("\n{}", Cli::command().render_usage());
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code as u8)
        }
    }
}
