mod check;
mod commands;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use krylovgrad::ingest::RunConfig;

#[derive(Parser, Debug)]
#[command(
    name = "krylovgrad",
    version,
    about = "Krylov subspace energies and nuclear gradients on a statevector"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Krylov energies, overlap spectrum and error against exact diagonalization.
    Energy {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        opts: RunOptions,
    },
    /// Nuclear gradient of one Krylov state as JSON.
    Gradient {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_name = "PATH")]
        derivs: PathBuf,
        #[command(flatten)]
        opts: RunOptions,
    },
    /// QSP phase factors preparing one Krylov state, as JSON.
    QspPhases {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        opts: RunOptions,
    },
    /// Estimator variance sweep over thresholds and Krylov dimensions, as CSV.
    BenchVariance {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_name = "PATH")]
        derivs: PathBuf,
        #[command(flatten)]
        opts: RunOptions,
    },
    /// Runs the invariant suite on a built-in two-orbital problem.
    Check,
}

#[derive(Args, Debug)]
struct Input {
    #[arg(long, value_name = "PATH")]
    fcidump: PathBuf,
}

/// Run options; flags override the config file, which overrides defaults.
#[derive(Args, Debug, Default)]
struct RunOptions {
    /// Flat `key = value` file with run options.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "D")]
    dim: Option<String>,
    #[arg(long, value_name = "S")]
    threshold: Option<String>,
    /// exact, post, coherent or direct.
    #[arg(long)]
    estimator: Option<String>,
    /// `analytic` or a shot count per measured element.
    #[arg(long)]
    shots: Option<String>,
    #[arg(long)]
    ensemble: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    state: Option<String>,
    /// Comma list of dimensions; `a..b` ranges allowed.
    #[arg(long, value_name = "LIST")]
    sweep_dim: Option<String>,
    #[arg(long, value_name = "LIST")]
    sweep_threshold: Option<String>,
    #[arg(long, value_name = "P")]
    success_floor: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// JSON cache of fitted phases, read and updated.
    #[arg(long, value_name = "PATH")]
    phase_cache: Option<PathBuf>,
}

impl RunOptions {
    fn config(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = read(path)?;
            cfg.merge_file(&text)
                .with_context(|| format!("in {}", path.display()))?;
        }
        let flags = [
            ("dim", &self.dim),
            ("threshold", &self.threshold),
            ("estimator", &self.estimator),
            ("shots", &self.shots),
            ("ensemble", &self.ensemble),
            ("seed", &self.seed),
            ("state", &self.state),
            ("sweep_dim", &self.sweep_dim),
            ("sweep_threshold", &self.sweep_threshold),
            ("success_floor", &self.success_floor),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)
                    .with_context(|| format!("--{}", key.replace('_', "-")))?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub(crate) fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Exit status for a failure: 2 for unreadable or malformed input, 3 for an
/// empty retained subspace, 4 for a post-selection success probability below
/// the floor, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    use krylovgrad::Error;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::EmptySubspace(_) => 3,
                Error::LowSuccessProbability { .. } => 4,
                Error::Parse { .. } | Error::Io(_) | Error::Json(_) | Error::Invalid(_) => 2,
                _ => 1,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
    }
    1
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Energy { input, opts } => {
            let cfg = opts.config()?;
            let mol = commands::load_fcidump(&input.fcidump)?;
            emit(opts.out.as_deref(), &commands::energy_report(&mol, &cfg)?)
        }
        Command::Gradient {
            input,
            derivs,
            opts,
        } => {
            let cfg = opts.config()?;
            let mol = commands::load_fcidump(&input.fcidump)?;
            let derivs = commands::load_derivs(&derivs, mol.n_orbitals())?;
            let text = commands::with_cache(opts.phase_cache.as_deref(), |cache| {
                commands::gradient_json(&mol, &derivs, &cfg, cache)
            })?;
            emit(opts.out.as_deref(), &text)
        }
        Command::QspPhases { input, opts } => {
            let cfg = opts.config()?;
            let mol = commands::load_fcidump(&input.fcidump)?;
            let text = commands::with_cache(opts.phase_cache.as_deref(), |cache| {
                commands::phases_json(&mol, &cfg, cache)
            })?;
            emit(opts.out.as_deref(), &text)
        }
        Command::BenchVariance {
            input,
            derivs,
            opts,
        } => {
            let cfg = opts.config()?;
            let mol = commands::load_fcidump(&input.fcidump)?;
            let derivs = commands::load_derivs(&derivs, mol.n_orbitals())?;
            let text = commands::with_cache(opts.phase_cache.as_deref(), |cache| {
                commands::bench_csv(&mol, &derivs, &cfg, cache)
            })?;
            emit(opts.out.as_deref(), &text)
        }
        Command::Check => {
            let failures = check::run_checks();
            if failures > 0 {
                anyhow::bail!("{failures} check(s) failed");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
