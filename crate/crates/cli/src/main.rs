use clap::{Args, Parser, Subcommand};
use dissipax::config::{ExperimentConfig, ExperimentKind};
use dissipax::experiment::run_experiment;
use dissipax::Error;
use std::path::PathBuf;
use std::process::ExitCode;

/// Spectra of dissipative Maxwell cavities with composite media.
#[derive(Parser, Debug)]
#[command(name = "dissipax", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenpairs nearest a shift.
    Spectrum(Common),
    /// Smallest nonzero |omega| over random media.
    GapScan(Common),
    /// Div-curl check of a laminate H-limit candidate.
    HconvTest(Common),
    /// Eigenvalue trajectories of laminates against their H-limit.
    EigenConvergence(Common),
    /// Design search toward a target frequency band.
    Optimize(Common),
    /// H-closure membership of a tensor.
    ClosureCheck(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Experiment configuration file (defaults apply when omitted).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for random media and solver start vectors.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for independent solves.
    #[arg(long)]
    threads: Option<usize>,
}

fn fail(e: &Error) -> ExitCode {
    let record = serde_json::json!({
        "error": e.kind(),
        "message": e.to_string(),
        "exit_code": e.exit_code(),
    });
    eprintln!("{record}");
    ExitCode::from(e.exit_code() as u8)
}

fn run(kind: ExperimentKind, c: &Common) -> Result<String, Error> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.seed = Some(s);
    }
    if let Some(n) = c.threads {
        if n == 0 {
            return Err(Error::Invalid("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    }
    let out = c.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    log::info!("running {} into {}", kind.name(), out.display());
    let outcome = run_experiment(&cfg, kind, &out)?;
    for f in &outcome.files {
        log::info!("wrote {}", f.display());
    }
    Ok(outcome.summary)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DISSIPAX_LOG", "error")).init();
    let cli = Cli::parse();
    let (kind, common) = match &cli.command {
        Command::Spectrum(c) => (ExperimentKind::Spectrum, c),
        Command::GapScan(c) => (ExperimentKind::GapScan, c),
        Command::HconvTest(c) => (ExperimentKind::HconvTest, c),
        Command::EigenConvergence(c) => (ExperimentKind::EigenConvergence, c),
        Command::Optimize(c) => (ExperimentKind::Optimize, c),
        Command::ClosureCheck(c) => (ExperimentKind::ClosureCheck, c),
    };
    match run(kind, common) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
