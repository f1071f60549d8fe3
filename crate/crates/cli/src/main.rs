use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use topoprobe_cli::{Emit, EnumeratorMode, RunConfig, StageError};

#[derive(Parser)]
#[command(
    name = "topoprobe",
    version,
    about = "Persistent homology of feed-forward network relevance"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute direct and extended relevance CSVs.
    Relevance(Common),
    /// Build the filtered complex from the relevance CSVs in --out.
    Complex(Common),
    /// Reduce the complex in --out into persistence pairs.
    Ph(Common),
    /// Summarize the pairs in --out.
    Metrics(Common),
    /// Draw the persistence diagram and barcode for the pairs in --out.
    Render(Common),
    /// Run every stage in memory.
    Pipeline(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Flag,
    Alg1,
}

#[derive(Args)]
struct Common {
    /// Weights JSON file.
    #[arg(long)]
    input: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Homology dimensions to report.
    #[arg(long, default_value = "0,1", value_delimiter = ',')]
    dims: Vec<usize>,
    /// Maximum simplex dimension.
    #[arg(long, default_value_t = 2)]
    max_dim: usize,
    /// Artifacts written by `pipeline`.
    #[arg(long, default_value = "pairs,metrics,diagram,barcode")]
    emit: String,
    #[arg(long, value_enum, default_value = "flag")]
    mode: Mode,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Keep zero-persistence pairs in pairs.csv.
    #[arg(long)]
    include_zero: bool,
}

impl Common {
    fn into_config(self) -> anyhow::Result<RunConfig> {
        let mut cfg = RunConfig::new(self.input, self.out);
        cfg.dims = self.dims;
        cfg.max_dim = self.max_dim;
        cfg.emit = Emit::parse_list(&self.emit)?;
        cfg.mode = match self.mode {
            Mode::Flag => EnumeratorMode::Flag,
            Mode::Alg1 => EnumeratorMode::Walk,
        };
        cfg.workers = self.workers;
        cfg.include_zero = self.include_zero;
        Ok(cfg)
    }
}

type StageFn = fn(&RunConfig) -> Result<Vec<PathBuf>, StageError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (run, common): (StageFn, Common) = match cli.command {
        Command::Relevance(c) => (topoprobe_cli::run_relevance, c),
        Command::Complex(c) => (topoprobe_cli::run_complex, c),
        Command::Ph(c) => (topoprobe_cli::run_ph, c),
        Command::Metrics(c) => (topoprobe_cli::run_metrics, c),
        Command::Render(c) => (topoprobe_cli::run_render, c),
        Command::Pipeline(c) => (topoprobe_cli::run_pipeline, c),
    };
    let cfg = match common.into_config() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: config stage failed: {e:#}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
