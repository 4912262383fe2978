use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qwalk::harness::{fmt_f64, run_experiment, validate_config};
use qwalk::oracles::{bessel_free_state, classical_ctrw_distribution, image_boundary_state};
use qwalk::Error;

/// Environment variable that fixes the worker-thread count.
const THREADS_ENV: &str = "QWALK_THREADS";

#[derive(Parser)]
#[command(name = "qwalk", version, about = "Quantum walks on waveguide lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write its outputs.
    Simulate {
        config: PathBuf,
        /// Output directory; overrides `output.directory`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config and print it with every default filled in.
    Validate { config: PathBuf },
    /// Print a closed-form reference solution as CSV.
    Oracle {
        #[command(subcommand)]
        which: Oracle,
    },
}

#[derive(Subcommand)]
enum Oracle {
    /// Free-lattice amplitudes from a single site.
    Bessel {
        #[arg(long)]
        site: usize,
        #[arg(long, default_value_t = 1.0)]
        coupling: f64,
        #[arg(long)]
        z: f64,
        #[arg(long)]
        sites: usize,
    },
    /// Semi-infinite lattice with its edge at site 0.
    Images {
        #[arg(long)]
        site: usize,
        #[arg(long, default_value_t = 1.0)]
        coupling: f64,
        #[arg(long)]
        z: f64,
        #[arg(long)]
        sites: usize,
    },
    /// Classical continuous-time random walk.
    Ctrw {
        #[arg(long)]
        site: usize,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        sites: usize,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config { .. } => 2,
        _ => 3,
    }
}

fn init_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config {
            key: THREADS_ENV.into(),
            message: format!("expected a positive integer, got {raw:?}"),
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))
}

fn print_amplitudes(psi: &qwalk::lattice::WaveFunction) {
    println!("site,re,im,intensity");
    for (j, a) in psi.amps().iter().enumerate() {
        println!("{j},{},{},{}", fmt_f64(a.re), fmt_f64(a.im), fmt_f64(a.norm_sqr()));
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    init_threads()?;
    match cli.command {
        Command::Simulate { config, out } => {
            let cfg = validate_config(&config)?;
            let dir = out.unwrap_or_else(|| PathBuf::from(&cfg.output.directory));
            let result = run_experiment(&cfg, &dir)?;
            eprintln!(
                "wrote {} snapshots to {}",
                result.zgrid.len(),
                dir.display()
            );
        }
        Command::Validate { config } => {
            let cfg = validate_config(&config)?;
            print!("{}", cfg.to_toml_string());
        }
        Command::Oracle { which } => match which {
            Oracle::Bessel {
                site,
                coupling,
                z,
                sites,
            } => print_amplitudes(&bessel_free_state(site, coupling, z, sites)?),
            Oracle::Images {
                site,
                coupling,
                z,
                sites,
            } => print_amplitudes(&image_boundary_state(site, coupling, z, sites)?),
            Oracle::Ctrw { site, gamma, t, sites } => {
                let p = classical_ctrw_distribution(site, gamma, t, sites)?;
                println!("site,probability");
                for (j, v) in p.probs().iter().enumerate() {
                    println!("{j},{}", fmt_f64(*v));
                }
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
