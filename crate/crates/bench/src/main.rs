use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hstar_bench::commands::{self, Overrides};
use hstar_bench::config::{parse_algorithms, Algorithm};
use hstar_bench::error::Result;

#[derive(Parser)]
#[command(
    name = "hstar-bench",
    version,
    about = "Homology-constrained path search experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every algorithm at every α of the config.
    Sweep(RunArgs),
    /// Run the family of surfaces made of the first 1..n holes.
    Holes(RunArgs),
    /// Cross-check against brute-force enumeration (tiny surfaces only).
    Oracle(RunArgs),
    /// Redraw SVG charts from an existing rows.csv.
    Plot {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Debug)]
struct AlgorithmList(Vec<Algorithm>);

fn algorithm_list(s: &str) -> Result<AlgorithmList, String> {
    parse_algorithms(s).map(AlgorithmList)
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of hstar,rhstar,prhstar,blk.
    #[arg(long, value_parser = algorithm_list)]
    algorithms: Option<AlgorithmList>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write per-pop search traces (sweep only).
    #[arg(long)]
    trace: bool,
    /// Record measured wall times in rows.csv (makes it non-reproducible).
    #[arg(long)]
    wall_time: bool,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            algorithms: self.algorithms.clone().map(|a| a.0),
            seed: self.seed,
            trace: self.trace,
            wall_time: self.wall_time,
        }
    }
}

fn run(cli: Cli) -> Result<String> {
    Ok(match cli.command {
        Command::Sweep(args) => {
            let r = commands::sweep(&args.config, &args.overrides())?;
            format!("{} rows written to {}", r.rows.len(), r.out_dir.display())
        }
        Command::Holes(args) => {
            let r = commands::holes(&args.config, &args.overrides())?;
            format!(
                "{} surfaces, {} rows written to {}",
                r.surfaces.len(),
                r.rows.len(),
                r.out_dir.display()
            )
        }
        Command::Oracle(args) => {
            let r = commands::oracle(&args.config, &args.overrides())?;
            format!(
                "{} classes enumerated, {} rows written to {}",
                r.report.table.classes.len(),
                r.rows.len(),
                r.out_dir.display()
            )
        }
        Command::Plot { out } => {
            let files = commands::plot(&out)?;
            format!("{} charts written to {}", files.len(), out.display())
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
