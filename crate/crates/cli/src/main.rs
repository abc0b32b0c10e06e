//! `sqgt`: construct, simulate, decode and analyse semi-quantitative group
//! testing designs.
//!
//! Exit codes: 0 on success, 2 on a validation error, 3 when a size guard
//! refuses the requested work.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "sqgt",
    version,
    about = "Semi-quantitative group testing toolkit"
)]
struct Cli {
    /// Log filter (error, warn, info, debug, trace).
    #[arg(long, global = true, env = "SQGT_LOG", default_value = "warn")]
    log_level: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConstructMode {
    /// Concatenate scaled copies of a binary disjunct base code.
    Concat,
    /// Multiply a binary code by a constant factor.
    Scale,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DecodeMode {
    Naive,
    Concat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CodeFormat {
    Json,
    Csv,
}

/// Quantizer selection shared by commands that evaluate syndromes.
#[derive(clap::Args, Debug, Clone)]
pub struct QuantizerArgs {
    /// Quantizer JSON file ({"Q", "thresholds"} or {"Q", "eta"}).
    #[arg(long, conflicts_with_all = ["eta", "levels"])]
    pub quantizer: Option<PathBuf>,
    /// Equidistant step.
    #[arg(long)]
    pub eta: Option<u64>,
    /// Number of outcome levels Q for --eta (default: smallest unsaturated Q).
    #[arg(long)]
    pub levels: Option<u32>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a code and write it as JSON (or CSV for scaled codes).
    Construct {
        #[arg(long, value_enum)]
        mode: ConstructMode,
        /// Base binary code: `id:N` for the N x N identity, or a JSON/CSV file.
        #[arg(long)]
        base: String,
        /// Target alphabet size (scale mode defaults to factor + 1).
        #[arg(long)]
        q: Option<u32>,
        #[arg(long, default_value_t = 1)]
        eta: u64,
        #[arg(long)]
        u: Option<usize>,
        /// Outcome levels Q (concat mode; default: smallest unsaturated Q).
        #[arg(long)]
        levels: Option<u32>,
        /// Scaling factor (scale mode).
        #[arg(long)]
        factor: Option<u32>,
        #[arg(long, value_enum, default_value = "json")]
        format: CodeFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compute the syndrome of a set of positives.
    Simulate {
        #[arg(long)]
        code: PathBuf,
        /// Comma-separated zero-based subject indices (may be empty).
        #[arg(long, allow_hyphen_values = true)]
        positives: String,
        #[command(flatten)]
        quantizer: QuantizerArgs,
        /// Defect bound used to pick the default Q for --eta.
        #[arg(long)]
        u: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Recover the positives from a syndrome file.
    Decode {
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        outcome: PathBuf,
        #[arg(long, value_enum, default_value = "naive")]
        mode: DecodeMode,
        #[command(flatten)]
        quantizer: QuantizerArgs,
        #[arg(long)]
        u: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check whether a code is SQ-disjunct.
    Check {
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        u: usize,
        #[command(flatten)]
        quantizer: QuantizerArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Capacity lower bounds, one row per number of positives.
    Capacity {
        /// Number of positives (first row).
        #[arg(long)]
        m: usize,
        /// Last number of positives (default: --m).
        #[arg(long)]
        m_max: Option<usize>,
        #[arg(long)]
        q: Option<u32>,
        /// Outcome levels Q.
        #[arg(long)]
        levels: Option<u32>,
        #[arg(long, default_value_t = 0.01)]
        grid_step: f64,
        /// Skip the coordinate-ascent refinement.
        #[arg(long)]
        no_refine: bool,
        /// Evaluate alpha at --pt and the given quantizer instead of searching.
        #[arg(long)]
        eval_only: bool,
        /// Source distribution P_T, comma separated.
        #[arg(long)]
        pt: Option<String>,
        /// Quantizer as a partition, e.g. "{0,1}{2}{3,4}".
        #[arg(long, conflicts_with = "thresholds")]
        partition: Option<String>,
        /// Quantizer thresholds, comma separated.
        #[arg(long)]
        thresholds: Option<String>,
        #[arg(long, value_enum, default_value = "csv")]
        format: TableFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Critical rate of random q-ary codes, as JSON.
    CriticalRate {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        eta: u64,
        #[arg(long)]
        u: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Monte Carlo disjunctness of random codes, as CSV.
    Mc {
        #[arg(long)]
        n: usize,
        /// Number of subjects N.
        #[arg(long = "subjects", visible_alias = "N")]
        subjects: usize,
        #[arg(long)]
        q: u32,
        #[arg(long, default_value_t = 1)]
        eta: u64,
        #[arg(long)]
        u: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cap on N * C(N-1, u) per trial.
        #[arg(long, default_value_t = sqgt_core::random_design::DEFAULT_WORK_CAP)]
        max_work: u128,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .init();

    let result = match cli.command {
        Command::Construct {
            mode,
            base,
            q,
            eta,
            u,
            levels,
            factor,
            format,
            output,
        } => commands::construct(commands::ConstructArgs {
            mode,
            base,
            q,
            eta,
            u,
            levels,
            factor,
            format,
            output,
        }),
        Command::Simulate {
            code,
            positives,
            quantizer,
            u,
            output,
        } => commands::simulate(&code, &positives, &quantizer, u, output.as_deref()),
        Command::Decode {
            code,
            outcome,
            mode,
            quantizer,
            u,
            output,
        } => commands::decode(&code, &outcome, mode, &quantizer, u, output.as_deref()),
        Command::Check {
            code,
            u,
            quantizer,
            output,
        } => commands::check(&code, u, &quantizer, output.as_deref()),
        Command::Capacity {
            m,
            m_max,
            q,
            levels,
            grid_step,
            no_refine,
            eval_only,
            pt,
            partition,
            thresholds,
            format,
            output,
        } => commands::capacity(commands::CapacityArgs {
            m,
            m_max: m_max.unwrap_or(m),
            q,
            levels,
            grid_step,
            refine: !no_refine,
            eval_only,
            pt,
            partition,
            thresholds,
            format,
            output,
        }),
        Command::CriticalRate {
            q,
            eta,
            u,
            n,
            eps,
            output,
        } => commands::critical_rate(q, eta, u, n, eps, output.as_deref()),
        Command::Mc {
            n,
            subjects,
            q,
            eta,
            u,
            trials,
            seed,
            max_work,
            output,
        } => commands::monte_carlo(
            sqgt_core::MonteCarloConfig {
                n,
                subjects,
                q,
                eta,
                u,
                trials,
                seed,
                work_cap: max_work,
            },
            output.as_deref(),
        ),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(commands::exit_code(&err))
        }
    }
}
