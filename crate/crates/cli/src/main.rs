mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Shot decisions for 2D soccer: data, training, evaluation and experiments.
#[derive(Debug, Parser)]
#[command(name = "goalshot", version)]
pub struct Cli {
    /// TOML run configuration; missing sections use defaults
    #[arg(long, short, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// master seed (overrides `seed` in the config file)
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// run Monte-Carlo and experiment loops on one thread
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate labeled synthetic scenes as CSV
    GenData {
        /// number of scenes
        #[arg(long, short)]
        n: usize,
        #[arg(long, short, value_name = "PATH")]
        out: PathBuf,
    },
    /// Univariate statistics and single-feature AUCs of a scene file
    Stats {
        #[arg(long, short, value_name = "PATH")]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Train the network on the balanced training split
    Train {
        #[arg(long, short, value_name = "PATH")]
        data: PathBuf,
        #[arg(long, value_name = "PATH")]
        model_out: PathBuf,
        /// training report (JSON); printed to stdout when omitted
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        max_epochs: Option<usize>,
        #[arg(long)]
        patience: Option<usize>,
    },
    /// AUC and KS2 of a model on the test split, with curve CSVs
    Eval {
        #[arg(long, short, value_name = "PATH")]
        model: PathBuf,
        #[arg(long, short, value_name = "PATH")]
        data: PathBuf,
        /// score every scene in the file instead of the test split
        #[arg(long)]
        all_scenes: bool,
        #[arg(long, value_name = "PATH")]
        roc: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        ks2: Option<PathBuf>,
    },
    /// Paired policy-vs-policy experiment
    Compare {
        /// network model, needed when either side is `mlp`
        #[arg(long, short, value_name = "PATH")]
        model: Option<PathBuf>,
        /// scenes for fitting the LDA baseline, needed when either side is `lda`
        #[arg(long, short, value_name = "PATH")]
        data: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = PolicyKind::Mlp)]
        a: PolicyKind,
        #[arg(long, value_enum, default_value_t = PolicyKind::Lda)]
        b: PolicyKind,
        #[arg(long)]
        games: Option<usize>,
        #[arg(long)]
        shots_per_game: Option<usize>,
        #[command(flatten)]
        thresholds: Thresholds,
        #[arg(long, value_enum, default_value_t = ReportKind::Text)]
        format: ReportKind,
        /// write the report here instead of stdout
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// CSV grid of goal probability over ball positions and aim targets
    AimTable {
        /// grid spacing in metres
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        /// largest distance of the ball in front of the goal line
        #[arg(long, default_value_t = 30.0)]
        max_depth: f64,
        /// largest lateral offset of the ball
        #[arg(long, default_value_t = 20.0)]
        max_lateral: f64,
        #[arg(long, short, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Compare the aim model's spread with rollouts of the ball dynamics
    Calibrate {
        #[arg(long, default_value_t = 2000)]
        rollouts: usize,
        #[arg(long, default_value_t = 100.0)]
        power: f64,
        #[arg(long, short, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Print the effective configuration as TOML
    ShowConfig,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct Thresholds {
    #[arg(long)]
    pub p_goal_threshold: Option<f64>,
    #[arg(long)]
    pub score_threshold: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportKind {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyKind {
    Mlp,
    Lda,
    Naive,
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// The error chain on one line, dropping causes already quoted by their parent.
fn diagnostic(err: &anyhow::Error) -> String {
    let mut parts: Vec<String> = Vec::new();
    for cause in err.chain() {
        let text = one_line(&cause.to_string());
        if !parts.last().is_some_and(|p| p.ends_with(&text)) {
            parts.push(text);
        }
    }
    parts.join(": ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", one_line(first));
            return ExitCode::from(2);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", diagnostic(&e));
            ExitCode::FAILURE
        }
    }
}
