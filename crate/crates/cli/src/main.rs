//! `greenwalk`: hitting times, Green's functions and mixing measures of
//! random walks on weighted digraphs.
//!
//! Exit status: 0 on success, 1 on invalid input or arguments, 2 when a
//! computed quantity fails one of its identity checks (the residual report
//! goes to stderr).

mod commands;
mod format;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use greenwalk::GraphFormat;

#[derive(Debug, Parser)]
#[command(
    name = "greenwalk",
    version,
    about = "Green's functions and hitting times of random walks on weighted digraphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Laziness β: the walk stays put with probability β.
    #[arg(long, global = true, default_value_t = 0.0)]
    pub lazy: f64,

    /// Tolerance for integrity checks (scaled by n for matrix identities and
    /// by max(1, T_hit) for times).
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,

    /// Seed for `simulate`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Trial count for `simulate`.
    #[arg(long, global = true, default_value_t = 10_000)]
    pub trials: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Input {
    /// Graph file: edge list, or JSON when the name ends in `.json`.
    #[arg(long, short)]
    pub input: PathBuf,

    /// Override the format guessed from the file name (`edges` or `json`).
    #[arg(long)]
    pub input_format: Option<GraphFormat>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hitting-time matrix H.
    Hitting {
        #[command(flatten)]
        input: Input,
    },
    /// Green's function G, or G_τ with `--target`.
    Green {
        #[command(flatten)]
        input: Input,
        /// `pi`, a vertex index, or comma-separated weights.
        #[arg(long)]
        target: Option<String>,
    },
    /// Exit-frequency matrix X_τ of the optimal rules to τ (default π).
    Exitfreq {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        target: Option<String>,
    },
    /// T_mix, T_reset, T_hit, access times and pessimal vertices.
    Mixing {
        #[command(flatten)]
        input: Input,
        /// Print a single measure: tmix, treset, thit or tforget.
        #[arg(long)]
        measure: Option<String>,
    },
    /// Spectral route (undirected graphs): eigenvalues and spectral G.
    Spectral {
        #[command(flatten)]
        input: Input,
    },
    /// Reverse chain, forget distribution, π-core and duality residuals.
    Dual {
        #[command(flatten)]
        input: Input,
    },
    /// Closed-form values for a graph family.
    Family {
        #[arg(value_enum)]
        name: FamilyName,
        /// Family parameters, e.g. `hypercube 3`, `bipartite 2 3`, `toric 4 5`.
        params: Vec<usize>,
        /// Tree file for `tree`.
        #[arg(long, short)]
        input: Option<PathBuf>,
        /// Print a single value: tmix, treset, thit, or a label such as `H(1,0)`.
        #[arg(long)]
        measure: Option<String>,
    },
    /// Monte Carlo hitting times (`--to`) or the random-target rule.
    Simulate {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 0)]
        from: usize,
        /// Target vertex; omit to draw the target from π.
        #[arg(long)]
        to: Option<usize>,
    },
    /// Run every identity check on a graph, optionally also on a Green's
    /// function read from a file.
    Verify {
        #[command(flatten)]
        input: Input,
        /// Output of `green` (JSON or CSV) to check against the graph.
        #[arg(long)]
        green: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    Complete,
    Bipartite,
    Star,
    Path,
    Cycle,
    Hypercube,
    Toric,
    Tree,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(commands::Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(commands::Failure::Integrity { stdout, report }) => {
            print!("{stdout}");
            eprint!("{report}");
            ExitCode::from(2)
        }
    }
}
