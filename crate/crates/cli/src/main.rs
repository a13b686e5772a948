//! `topoweight`: weight-stack analysis from the command line.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags or flag values),
//! 2 on data errors (unreadable or invalid input files).

mod cmd;
mod output;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "topoweight",
    version,
    about = "Topological analysis of neural-network weight stacks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Neural persistence per layer and averaged over layers.
    Np(cmd::analyze::NpArgs),
    /// Deep graph persistence of the whole network.
    Dgp(cmd::analyze::DgpArgs),
    /// Lower/upper persistence bounds for one layer.
    Bounds(cmd::analyze::BoundsArgs),
    /// Neural-persistence change under random entry shuffling, per layer.
    PermuteTest(cmd::analyze::PermuteTestArgs),
    /// Spatial-concentration score of one layer.
    Sortedness(cmd::analyze::SortednessArgs),
    /// Fit unit-interval distribution families to the normalised weights.
    FitDist(cmd::analyze::FitDistArgs),
    /// Synthetic-matrix studies (bound tightness, variance regression, size trend).
    #[command(subcommand)]
    SynthStudy(cmd::study::SynthStudy),
    /// Train a small MLP and record checkpoints plus metric series.
    Train(cmd::traincmd::TrainArgs),
    /// Early-stopping index for a recorded metric series.
    Earlystop(cmd::traincmd::EarlystopArgs),
    /// Covariate-shift detection ratios over a corruption grid.
    ShiftDetect(cmd::shiftcmd::ShiftDetectArgs),
    /// Render a results CSV as a static SVG.
    Plot(cmd::plot::PlotArgs),
}

/// Errors surfaced by commands, split by exit code.
pub enum CliError {
    /// Bad flag combinations or flag values: exit 1.
    Usage(String),
    /// Unreadable, unparsable, or invalid data: exit 2.
    Data(String),
}

impl From<topoweight::Error> for CliError {
    fn from(e: topoweight::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CmdResult = Result<(), CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successful terminations.
            if matches!(
                e.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    configure_threads();

    let result = match cli.command {
        Command::Np(args) => cmd::analyze::run_np(args),
        Command::Dgp(args) => cmd::analyze::run_dgp(args),
        Command::Bounds(args) => cmd::analyze::run_bounds(args),
        Command::PermuteTest(args) => cmd::analyze::run_permute_test(args),
        Command::Sortedness(args) => cmd::analyze::run_sortedness(args),
        Command::FitDist(args) => cmd::analyze::run_fit_dist(args),
        Command::SynthStudy(study) => cmd::study::run(study),
        Command::Train(args) => cmd::traincmd::run_train(args),
        Command::Earlystop(args) => cmd::traincmd::run_earlystop(args),
        Command::ShiftDetect(args) => cmd::shiftcmd::run(args),
        Command::Plot(args) => cmd::plot::run(args),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("data error: {msg}");
            ExitCode::from(2)
        }
    }
}

/// TOPOWEIGHT_THREADS caps worker parallelism; default is all cores.
fn configure_threads() {
    if let Ok(value) = std::env::var("TOPOWEIGHT_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global()
                    .ok();
            }
        }
    }
}
