//! `udw`: verification suite, λ sweeps and noise studies with CSV output.

mod config;
mod output;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use udw_core::field::default_smear_norm;
use udw_core::metrics::{sweep, DiamondOptions, Metric, Pair, SweepConfig};
use udw_core::noise::{noisy_capacity, NoiseConfig, NoiseRow};
use udw_core::Error;

use config::{CommonArgs, FileConfig, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("output error: {0}")]
    Io(String),
    #[error("{failed} verification check(s) failed")]
    Suite { failed: usize },
    #[error(transparent)]
    Core(#[from] Error),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn root_cause(e: &Error) -> &Error {
    match e {
        Error::SweepPoint { source, .. } => root_cause(source),
        other => other,
    }
}

impl CliError {
    /// 1 suite failure, 2 config, 3 backend disagreement.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match root_cause(e) {
                Error::BackendDisagreement { .. } => 3,
                Error::InvalidParams(_) | Error::TruncationTooSmall { .. } | Error::IllConditioned { .. } => 2,
                _ => 1,
            },
            CliError::Io(_) | CliError::Suite { .. } => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "udw", version, about = "Field-mediated qubit gates: verification, sweeps and noise studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the gate, identity and backend checks
    Verify {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sweep the FieldQST capacity over λ_φ
    Capacity {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sweep the diamond distance between a field channel and its qubit reference
    Diamond {
        #[command(flatten)]
        common: CommonArgs,
        /// qst, cnot1, cnot2q or hadamard [default: qst]
        #[arg(long)]
        pair: Option<String>,
        /// Haar samples in the coarse stage [default: 20000]
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Sweep (λ_φ, b) under cross-talk noise
    Noise {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated cross-talk strengths [default: 0,0.5]
        #[arg(long, value_delimiter = ',')]
        b: Option<Vec<f64>>,
        /// Effective-coupling form: as-printed or quadrature-matched [default: as-printed]
        #[arg(long)]
        sign: Option<String>,
        /// Coherent amplitude |α|² [default: 1]
        #[arg(long)]
        alpha_sq: Option<f64>,
    },
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Verify { common }
            | Command::Capacity { common }
            | Command::Diamond { common, .. }
            | Command::Noise { common, .. } => common,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = cli.command.common();
    let file = match &common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let cfg = RunConfig::resolve(common, &file)?;
    let backend = cfg.sweep_backend();
    let out = cfg.out.as_deref();
    match &cli.command {
        Command::Verify { .. } => {
            let report = verify::run(&cfg);
            print!("{}", report.render());
            if let Some(deviation) = report.disagreement {
                return Err(Error::BackendDisagreement {
                    deviation,
                    limit: udw_core::channels::BACKEND_TOL,
                }
                .into());
            }
            if !report.all_passed() {
                let failed = report.checks.iter().filter(|c| !c.passed).count();
                return Err(CliError::Suite { failed });
            }
            Ok(())
        }
        Command::Capacity { .. } => {
            let sc = sweep_config(&cfg, Metric::Capacity, Pair::Qst, DiamondOptions::default());
            let rows = sweep(&sc, &cfg.grid())?;
            output::emit(&output::capacity_csv(&rows, cfg.seed, backend.tag())?, out)
        }
        Command::Diamond { pair, samples, .. } => {
            let pair = config::pair(pair.as_deref().or(file.pair.as_deref()).unwrap_or("qst"))?;
            let mut opts = DiamondOptions {
                seed: cfg.seed,
                ..DiamondOptions::default()
            };
            if let Some(n) = samples.or(file.samples) {
                if n == 0 {
                    return Err(CliError::Config("samples must be at least 1".into()));
                }
                opts.coarse_samples = n;
            }
            let rows = sweep(&sweep_config(&cfg, Metric::Diamond, pair, opts), &cfg.grid())?;
            output::emit(&output::diamond_csv(&rows, cfg.seed, backend.tag())?, out)
        }
        Command::Noise { b, sign, alpha_sq, .. } => {
            let bs = b.clone().or_else(|| file.b.clone()).unwrap_or_else(|| vec![0.0, 0.5]);
            if bs.is_empty() || bs.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(CliError::Config(format!("b values must be finite and >= 0, got {bs:?}")));
            }
            let nc = NoiseConfig {
                alpha_sq: alpha_sq.or(file.alpha_sq).unwrap_or(1.0),
                gamma: cfg.gamma,
                sign: config::coupling_sign(sign.as_deref().or(file.sign.as_deref()).unwrap_or("as-printed"))?,
                bob: cfg.bob.clone(),
                backend,
                ..NoiseConfig::default()
            };
            let grid = cfg.grid();
            let mut rows: Vec<NoiseRow> = Vec::with_capacity(bs.len() * grid.len());
            for &bv in &bs {
                rows.extend(noisy_capacity(&grid, bv, &nc)?);
            }
            output::emit(&output::noise_csv(&rows, cfg.seed, backend.tag())?, out)
        }
    }
}

fn sweep_config(cfg: &RunConfig, metric: Metric, pair: Pair, diamond: DiamondOptions) -> SweepConfig {
    SweepConfig {
        metric,
        pair,
        gamma: cfg.gamma,
        smear_norm: default_smear_norm(),
        bob: cfg.bob.clone(),
        backend: cfg.sweep_backend(),
        diamond,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("udw: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Suite { failed: 1 }.exit_code(), 1);
        let disagreement = Error::BackendDisagreement {
            deviation: 1.0,
            limit: 1e-6,
        };
        let wrapped = Error::SweepPoint {
            params: "lambda_phi=1".into(),
            source: Box::new(disagreement.clone()),
        };
        assert_eq!(CliError::Core(disagreement).exit_code(), 3);
        assert_eq!(CliError::Core(wrapped).exit_code(), 3);
        assert_eq!(CliError::Core(Error::InvalidParams("bad".into())).exit_code(), 2);
    }

    #[test]
    fn flags_parse_into_subcommands() {
        let cli = Cli::try_parse_from(["udw", "noise", "--b", "0,0.5,10", "--sign", "quadrature-matched"]).unwrap();
        match cli.command {
            Command::Noise { b, sign, .. } => {
                assert_eq!(b, Some(vec![0.0, 0.5, 10.0]));
                assert_eq!(sign.as_deref(), Some("quadrature-matched"));
            }
            other => panic!("parsed {other:?}"),
        }
    }
}
