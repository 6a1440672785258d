use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use afrelay_cli::config::{parse_grid, parse_sweep, ScenarioFile};
use afrelay_cli::{
    cmd_allocate, cmd_cdf, cmd_rates, parse_methods, CdfOptions, CliError, Overrides, RatesOptions, Variable,
};
use afrelay_core::benchmark::SearchStrategy;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "afrelay",
    version,
    about = "Distributions, power allocation and rates for correlated AF relays"
)]
struct Cli {
    /// Seed for every Monte Carlo estimate (overrides the file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo sample count (overrides the file).
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Benchmark grid step in dB (overrides the file).
    #[arg(long, global = true)]
    resolution_db: Option<f64>,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Distribution of X or of the destination SNR on a grid.
    Cdf {
        scenario: PathBuf,
        /// x, gamma_fc, gamma_nc, gamma_single or gamma_approx.
        #[arg(long, default_value = "x")]
        variable: Variable,
        /// start:stop:count
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Add an empirical column from simulated samples.
        #[arg(long)]
        mc_overlay: bool,
        /// Density instead of distribution (x only).
        #[arg(long)]
        density: bool,
    },
    /// Proposed allocation and the mode-selection audit.
    Allocate {
        scenario: PathBuf,
        #[arg(long)]
        report: bool,
    },
    /// Ergodic rates over a relay power sweep.
    Rates {
        scenario: PathBuf,
        /// Comma-separated subset of proposed, equal, benchmark.
        #[arg(long, default_value = "proposed,equal")]
        methods: String,
        /// Relay power range start:stop:step in dB (overrides the file).
        #[arg(long, allow_hyphen_values = true)]
        sweep: Option<String>,
        #[arg(long, value_enum, default_value_t = Search::Exhaustive)]
        search: Search,
        /// Coarse step for `--search coarse-to-fine`.
        #[arg(long, default_value_t = 1.0)]
        coarse_db: f64,
        /// Add active_modes, grid_points and cell_gap columns.
        #[arg(long)]
        details: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Search {
    Exhaustive,
    CoarseToFine,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("`--threads`: {e}")))?;
    }
    let ov = Overrides {
        seed: cli.seed,
        samples: cli.samples,
        resolution_db: cli.resolution_db,
    };
    let mut buf: Vec<u8> = Vec::new();
    match cli.command {
        Command::Cdf {
            scenario,
            variable,
            grid,
            mc_overlay,
            density,
        } => {
            let f = ScenarioFile::load(&scenario)?;
            let opts = CdfOptions {
                variable,
                grid: parse_grid(&grid)?,
                mc_overlay,
                density,
            };
            cmd_cdf(&f, &opts, &ov, &mut buf)?;
        }
        Command::Allocate { scenario, report } => {
            let f = ScenarioFile::load(&scenario)?;
            cmd_allocate(&f, report, &ov, &mut buf)?;
        }
        Command::Rates {
            scenario,
            methods,
            sweep,
            search,
            coarse_db,
            details,
        } => {
            let f = ScenarioFile::load(&scenario)?;
            let strategy = match search {
                Search::Exhaustive => SearchStrategy::Exhaustive,
                Search::CoarseToFine => SearchStrategy::CoarseToFine { coarse_db },
            };
            let opts = RatesOptions {
                methods: parse_methods(&methods)?,
                sweep: sweep.as_deref().map(parse_sweep).transpose()?,
                strategy,
                details,
            };
            cmd_rates(&f, &opts, &ov, &mut buf)?;
        }
    }
    match cli.out {
        Some(path) => {
            let mut w =
                BufWriter::new(File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?);
            w.write_all(&buf)?;
            w.flush()?;
        }
        None => io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("afrelay: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
