use std::path::PathBuf;
use std::process::ExitCode;

use blendcast::dataset::WindowAssignment;
use blendcast::experiment::{self, ExperimentConfig, ModelName, RunOverrides};
use blendcast::metrics::{self, ExternalColumn};
use clap::{Parser, Subcommand};

/// Parsed as one comma-separated value; an alias keeps clap from treating it as repeated.
type ModelList = Vec<ModelName>;

#[derive(Parser)]
#[command(
    name = "blendcast",
    version,
    about = "Blended LSTM/GRU index forecasting from headline sentiment"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Seeds LSTM with N, GRU with N+1 and the meta-learner with N+2.
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated subset of lstm,gru,averaging,weighted_average,blending.
        #[arg(long, value_parser = experiment::parse_model_list)]
        models: Option<ModelList>,
        /// Output directory (relative to the working directory).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long, value_enum)]
        split_mode: Option<SplitMode>,
    },
    /// Score a `date,source,title` headlines CSV into the six-column dataset.
    Score {
        #[arg(long)]
        headlines: PathBuf,
        /// Tab-separated lexicon; the bundled one is used when omitted.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// `date,adj_close` file to merge by date: one output row per price date.
        #[arg(long)]
        prices: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute metrics from a predictions CSV written by `run`.
    Eval {
        predictions: PathBuf,
        /// Also write the metrics as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
enum SplitMode {
    ByTargetDate,
    WithinSplit,
}

impl From<SplitMode> for WindowAssignment {
    fn from(m: SplitMode) -> Self {
        match m {
            SplitMode::ByTargetDate => WindowAssignment::ByTargetDate,
            SplitMode::WithinSplit => WindowAssignment::WithinSplit,
        }
    }
}

fn run(cli: Cli) -> blendcast::Result<()> {
    match cli.command {
        Command::Run {
            config,
            seed,
            models,
            out,
            window,
            split_mode,
        } => {
            let mut cfg = ExperimentConfig::from_file(&config).map_err(|e| e.in_stage("config"))?;
            RunOverrides {
                seed,
                models,
                output_dir: out,
                window,
                split_mode: split_mode.map(Into::into),
            }
            .apply(&mut cfg);
            let report = experiment::run_experiment(&cfg)?;
            print!("{}", report.table());
            eprintln!("wrote {}", cfg.output_path().display());
        }
        Command::Score {
            headlines,
            lexicon,
            prices,
            out,
        } => {
            let rows = experiment::score_command(&headlines, lexicon.as_deref(), prices.as_deref(), &out)?;
            eprintln!("wrote {rows} row(s) to {}", out.display());
        }
        Command::Eval { predictions, out } => {
            let reports = experiment::evaluate_predictions_csv(&predictions).map_err(|e| e.in_stage("eval"))?;
            let cols: Vec<ExternalColumn> = reports
                .iter()
                .map(|(n, r)| ExternalColumn::from((n.as_str(), r)))
                .collect();
            print!("{}", metrics::format_table(&cols));
            if let Some(out) = out {
                let map: serde_json::Map<String, serde_json::Value> = reports
                    .iter()
                    .map(|(n, r)| Ok((n.clone(), serde_json::to_value(r)?)))
                    .collect::<blendcast::Result<_>>()?;
                let json = serde_json::to_string_pretty(&map)? + "\n";
                std::fs::write(&out, json)
                    .map_err(|e| blendcast::Error::Io { path: out, source: e }.in_stage("eval"))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut msg = format!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                if !msg.ends_with(&s.to_string()) {
                    msg.push_str(&format!(": {s}"));
                }
                src = s.source();
            }
            eprintln!("{msg}");
            ExitCode::FAILURE
        }
    }
}
