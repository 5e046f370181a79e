//! Run configuration: optional JSON file, overridden by flags.

use std::f64::consts::FRAC_PI_4;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;
use udw_core::channels::{plus_y, Backend};
use udw_core::metrics::{Pair, SweepBackend};
use udw_core::noise::CouplingSign;
use udw_core::operator::{ket, Operator, C64};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendArg {
    Symbolic,
    Fock,
    Both,
}

/// Flags shared by every subcommand. Unset flags fall back to the config file.
#[derive(Clone, Debug, Default, Args)]
pub struct CommonArgs {
    /// Smallest coupling λ_φ of the grid
    #[arg(long)]
    pub lmin: Option<f64>,
    /// Largest coupling λ_φ of the grid
    #[arg(long)]
    pub lmax: Option<f64>,
    /// Number of grid points
    #[arg(long)]
    pub steps: Option<usize>,
    /// Kick phase γ in radians [default: π/4]
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Bob's input state: plus_y, minus_y, zero, one, plus, minus
    #[arg(long)]
    pub bob: Option<String>,
    #[arg(long, value_enum)]
    pub backend: Option<BackendArg>,
    /// Fock truncation override
    #[arg(long)]
    pub nmax: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV output path; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with any of the flag names as keys
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub lmin: Option<f64>,
    pub lmax: Option<f64>,
    pub steps: Option<usize>,
    pub gamma: Option<f64>,
    pub bob: Option<String>,
    pub backend: Option<BackendArg>,
    pub nmax: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub pair: Option<String>,
    pub samples: Option<usize>,
    pub b: Option<Vec<f64>>,
    pub sign: Option<String>,
    pub alpha_sq: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub lmin: f64,
    pub lmax: f64,
    pub steps: usize,
    pub gamma: f64,
    pub bob: Operator,
    pub backend: BackendArg,
    pub n_max: Option<usize>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(flags: &CommonArgs, file: &FileConfig) -> Result<Self, CliError> {
        let cfg = Self {
            lmin: flags.lmin.or(file.lmin).unwrap_or(0.2),
            lmax: flags.lmax.or(file.lmax).unwrap_or(3.0),
            steps: flags.steps.or(file.steps).unwrap_or(15),
            gamma: flags.gamma.or(file.gamma).unwrap_or(FRAC_PI_4),
            bob: bob_state(flags.bob.as_deref().or(file.bob.as_deref()).unwrap_or("plus_y"))?,
            backend: flags.backend.or(file.backend).unwrap_or(BackendArg::Symbolic),
            n_max: flags.nmax.or(file.nmax),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            out: flags.out.clone().or_else(|| file.out.clone()),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.lmin.is_finite() && self.lmax.is_finite() && self.lmin > 0.0) {
            return Err(CliError::Config(format!(
                "grid bounds must be finite and positive, got [{}, {}]",
                self.lmin, self.lmax
            )));
        }
        if self.lmin > self.lmax {
            return Err(CliError::Config(format!("lmin {} exceeds lmax {}", self.lmin, self.lmax)));
        }
        if self.steps == 0 {
            return Err(CliError::Config("steps must be at least 1".into()));
        }
        if !self.gamma.is_finite() {
            return Err(CliError::Config(format!("gamma must be finite, got {}", self.gamma)));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lmin];
        }
        let n = self.steps - 1;
        (0..self.steps)
            .map(|k| self.lmin + (self.lmax - self.lmin) * k as f64 / n as f64)
            .collect()
    }

    pub fn sweep_backend(&self) -> SweepBackend {
        match self.backend {
            BackendArg::Symbolic => SweepBackend::Single(Backend::Symbolic),
            BackendArg::Fock => SweepBackend::Single(Backend::Fock { n_max: self.n_max }),
            BackendArg::Both => SweepBackend::Both { n_max: self.n_max },
        }
    }
}

pub fn bob_state(label: &str) -> Result<Operator, CliError> {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let i = C64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
    let (one, zero) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    let v = match label {
        "plus_y" => return Ok(plus_y()),
        "minus_y" => ket(&[h, -i]),
        "zero" => ket(&[one, zero]),
        "one" => ket(&[zero, one]),
        "plus" => ket(&[h, h]),
        "minus" => ket(&[h, -h]),
        other => return Err(CliError::Config(format!("unknown bob state '{other}'"))),
    };
    Ok(Operator::pure(&v, &[2])?)
}

pub fn pair(label: &str) -> Result<Pair, CliError> {
    match label {
        "qst" | "cnot1" | "cnot2q" | "hadamard" => Ok(Pair::parse(label)?),
        other => Err(CliError::Config(format!(
            "unknown pair '{other}', expected qst, cnot1, cnot2q or hadamard"
        ))),
    }
}

pub fn coupling_sign(label: &str) -> Result<CouplingSign, CliError> {
    CouplingSign::parse(label).map_err(|e| CliError::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags() -> CommonArgs {
        CommonArgs::default()
    }

    #[test]
    fn defaults_cover_the_standard_grid() {
        let cfg = RunConfig::resolve(&flags(), &FileConfig::default()).unwrap();
        assert_eq!(cfg.grid().len(), 15);
        assert_eq!(cfg.grid()[0], 0.2);
        assert_eq!(cfg.grid()[14], 3.0);
        assert_eq!(cfg.gamma, FRAC_PI_4);
        assert_eq!(cfg.bob, plus_y());
    }

    #[test]
    fn flags_override_file() {
        let file: FileConfig = serde_json::from_str(r#"{"lmin": 0.5, "steps": 4, "seed": 3}"#).unwrap();
        let cli = CommonArgs {
            steps: Some(2),
            ..flags()
        };
        let cfg = RunConfig::resolve(&cli, &file).unwrap();
        assert_eq!((cfg.lmin, cfg.steps, cfg.seed), (0.5, 2, 3));
        assert_eq!(cfg.grid(), vec![0.5, 3.0]);
    }

    #[test]
    fn single_step_grid_is_lmin() {
        let cli = CommonArgs {
            steps: Some(1),
            ..flags()
        };
        assert_eq!(RunConfig::resolve(&cli, &FileConfig::default()).unwrap().grid(), vec![0.2]);
    }

    #[test]
    fn invalid_bounds_are_config_errors() {
        for cli in [
            CommonArgs { lmin: Some(2.0), lmax: Some(1.0), ..flags() },
            CommonArgs { steps: Some(0), ..flags() },
            CommonArgs { lmin: Some(0.0), ..flags() },
            CommonArgs { bob: Some("sideways".into()), ..flags() },
        ] {
            assert!(matches!(RunConfig::resolve(&cli, &FileConfig::default()), Err(CliError::Config(_))));
        }
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        assert!(serde_json::from_str::<FileConfig>(r#"{"lambda": 1}"#).is_err());
    }

    #[test]
    fn bob_states_are_normalized_pure_states() {
        for label in ["plus_y", "minus_y", "zero", "one", "plus", "minus"] {
            let rho = bob_state(label).unwrap();
            assert!((rho.trace().re - 1.0).abs() < 1e-12);
            assert!(rho.check_density().is_ok());
        }
    }

    #[test]
    fn identity_pair_is_not_exposed() {
        assert!(pair("identity").is_err());
        assert_eq!(pair("cnot2q").unwrap(), Pair::Cnot2q);
    }
}
