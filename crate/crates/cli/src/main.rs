use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coexist_core::harness::{self, ExperimentConfig, ExperimentKind, CRITERIA};
use coexist_core::Error;

/// Experiments on the dilute Ising model under Glauber dynamics.
///
/// Exit status: 0 when every check passes, 1 when a check fails, 2 for
/// usage or configuration errors, 3 when a state space exceeds its cap.
#[derive(Parser)]
#[command(name = "coexist", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Autocorrelation A(t) of the origin spin, with a power-law fit.
    Autocorr(RunArgs),
    /// Finite-volume surface tension from disconnection probabilities.
    SurfaceTension(RunArgs),
    /// Dilution events on a pair of rectangles.
    Dilution(RunArgs),
    /// Exact spectral gap, mixing time and decay checks.
    Gap(RunArgs),
    /// Barrier of a phase evolution against closed forms and grid search.
    Barrier(RunArgs),
    /// Relaxation exponents of droplet candidates.
    Xlambda(RunArgs),
    /// Edwards–Sokal marginals against exact Gibbs and FK tables.
    EsCheck(RunArgs),
    /// Rate axioms, reversibility and stationarity on small boxes.
    AxiomCheck(RunArgs),
    /// A(t) for a dilute law against the pure model.
    Compare(RunArgs),
    /// Parse and resolve a configuration file without running it.
    ValidateConfig { file: PathBuf },
    /// Reproduce an acceptance criterion by number (1-11) or name, or `all`.
    Repro { id: String },
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration; the kind's defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    workers: Option<usize>,
}

fn exit_for(e: &Error) -> ExitCode {
    match e {
        Error::Capacity(_) => ExitCode::from(3),
        _ => ExitCode::from(2),
    }
}

fn load(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => harness::parse_config(&std::fs::read_to_string(path)?)?,
        None => ExperimentConfig::new(kind),
    };
    if cfg.kind != kind {
        return Err(Error::Config(format!("configuration is for `{}`, not `{kind}`", cfg.kind)));
    }
    if let Some(s) = args.seed {
        cfg = cfg.with_seed(s);
    }
    if let Some(dir) = &args.out {
        cfg.output.dir = dir.to_string_lossy().into_owned();
    }
    Ok(cfg)
}

fn run(kind: ExperimentKind, args: &RunArgs) -> ExitCode {
    let result = load(kind, args).and_then(|cfg| {
        let out = match args.workers {
            Some(w) => harness::run_with_workers(&cfg, w)?,
            None => harness::run(&cfg)?,
        };
        let paths = out.write(std::path::Path::new(&out.config.output.dir))?;
        Ok((out, paths))
    });
    match result {
        Ok((out, paths)) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            print!("{}", out.summary_json());
            if out.summary.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    }
}

fn repro(id: &str) -> ExitCode {
    let ids: Vec<String> = if id == "all" { (1..=CRITERIA.len()).map(|k| k.to_string()).collect() } else { vec![id.into()] };
    let mut all_pass = true;
    for id in ids {
        match harness::repro(&id) {
            Ok(o) => {
                println!("{:>2} {:<22} {} ({:.2}s) {}", o.id, o.slug, if o.pass { "PASS" } else { "FAIL" }, o.seconds, o.detail);
                all_pass &= o.pass;
            }
            Err(e) => {
                eprintln!("error: {e}");
                return exit_for(&e);
            }
        }
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Autocorr(a) => (ExperimentKind::Autocorr, a),
        Command::SurfaceTension(a) => (ExperimentKind::SurfaceTension, a),
        Command::Dilution(a) => (ExperimentKind::Dilution, a),
        Command::Gap(a) => (ExperimentKind::Gap, a),
        Command::Barrier(a) => (ExperimentKind::Barrier, a),
        Command::Xlambda(a) => (ExperimentKind::Xlambda, a),
        Command::EsCheck(a) => (ExperimentKind::EsCheck, a),
        Command::AxiomCheck(a) => (ExperimentKind::AxiomCheck, a),
        Command::Compare(a) => (ExperimentKind::Compare, a),
        Command::ValidateConfig { file } => {
            return match std::fs::read_to_string(file).map_err(Error::from).and_then(|t| harness::validate_config(&t)) {
                Ok(cfg) => {
                    println!("ok: {} (config-hash {})", cfg.kind, harness::config_hash(&cfg));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    exit_for(&e)
                }
            };
        }
        Command::Repro { id } => return repro(id),
    };
    run(kind, args)
}
