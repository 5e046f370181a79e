//! `udw verify`: gate, identity and backend checks printed as a table.

use std::f64::consts::SQRT_2;

use udw_core::channels::{build_channel, build_checked, Backend, Channel, ChannelSpec};
use udw_core::field::{adaptive_levels, default_smear_norm, fock_realize, make_model, overlap, Generator};
use udw_core::gates::{build_gate, verify_truth_table, GateKind};
use udw_core::metrics::{diamond_distance, DiamondOptions};
use udw_core::noise::{crosstalk_factor, CrosstalkMethod, NoiseParams};
use udw_core::operator::Operator;
use udw_core::Error;

use crate::config::RunConfig;

pub const BACKEND_GRID: [f64; 6] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
    /// Largest symbolic/Fock deviation when it exceeded the backend tolerance.
    pub disagreement: Option<f64>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            s.push_str(&format!("{:<24} {status}  {}\n", c.name, c.detail));
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        s.push_str(&format!("{passed}/{} checks passed\n", self.checks.len()));
        s
    }
}

fn check(name: &'static str, outcome: Result<(bool, String), Error>) -> Check {
    match outcome {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

fn gate_factorizations() -> Result<(bool, String), Error> {
    let g = build_gate;
    let qst = g(GateKind::Cnot21Z).mul(&g(GateKind::Cnot12))?.max_abs_diff(&g(GateKind::Qst));
    let swap = g(GateKind::Cnot21X)
        .mul(&g(GateKind::Cnot12))?
        .mul(&g(GateKind::Cnot21X))?
        .max_abs_diff(&g(GateKind::Swap));
    let printed = Operator::from_real_rows(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 1.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
        &[0.0, 1.0, 0.0, 0.0],
    ])
    .max_abs_diff(&g(GateKind::Qst));
    let worst = qst.max(swap).max(printed);
    Ok((worst <= 1e-12, format!("QST, SWAP and QST matrix within {worst:.1e}")))
}

fn truth_tables() -> Result<(bool, String), Error> {
    let mut reproduced = Vec::new();
    for kind in GateKind::ALL {
        let Ok(table) = verify_truth_table(kind) else { continue };
        if let Some(row) = table.first_mismatch() {
            return Ok((false, format!("{kind} row {} differs", row.input)));
        }
        reproduced.push(kind.name());
    }
    Ok((true, format!("reproduced {}", reproduced.join(" "))))
}

fn coherent_overlap(gamma: f64) -> Result<(bool, String), Error> {
    let mut worst = 0.0_f64;
    for lambda in [0.1, 0.5, 1.0, 2.0, 3.0] {
        let params = make_model(lambda, gamma, default_smear_norm())?;
        let n = adaptive_levels(2.0 * lambda).max(adaptive_levels(params.lambda_phi.max(params.lambda_pi)));
        let fock = fock_realize(&params, n)?;
        let vac = fock.vacuum();
        let plus = fock.exp_generator(Generator::phi(1.0)) * &vac;
        let minus = fock.exp_generator(Generator::phi(-1.0)) * &vac;
        let expected = (-2.0 * lambda * lambda).exp();
        let closed = overlap(-params.alpha_phi(), params.alpha_phi()).norm();
        worst = worst
            .max((plus.dotc(&minus).norm() - expected).abs())
            .max((closed - expected).abs());
    }
    Ok((worst <= 1e-10, format!("max deviation {worst:.1e}")))
}

fn field_channels_cptp(cfg: &RunConfig) -> Result<(bool, String), Error> {
    let params = make_model(2.0, cfg.gamma, default_smear_norm())?;
    let bob = cfg.bob.clone();
    let specs = [
        ChannelSpec::FieldQst { params, bob: bob.clone() },
        ChannelSpec::FieldCnot1 { params, bob: bob.clone() },
        ChannelSpec::FieldCnot2q { params, bob },
        ChannelSpec::FieldHadamard { params },
        ChannelSpec::FieldEncode { params },
    ];
    for spec in &specs {
        build_channel(spec, Backend::Symbolic)?.check_cptp()?;
    }
    Ok((true, format!("{} field channels at lambda_phi=2", specs.len())))
}

fn diamond_anchors() -> Result<(bool, String), Error> {
    let opts = DiamondOptions::default();
    let id = Channel::identity(2);
    let gate = |k: GateKind| Channel::from_unitary(&build_gate(k), k.name());
    let d_ii = diamond_distance(&id, &id, &opts)?.value;
    let d_ix = diamond_distance(&id, &gate(GateKind::X)?, &opts)?.value;
    let d_is = diamond_distance(&id, &gate(GateKind::S)?, &opts)?.value;
    let ok = d_ii <= 1e-8 && (d_ix - 2.0).abs() <= 1e-6 && (d_is - SQRT_2).abs() <= 1e-6;
    Ok((ok, format!("d(I,I)={d_ii:.1e} d(I,X)={d_ix:.9} d(I,S)={d_is:.9}")))
}

fn crosstalk() -> Result<(bool, String), Error> {
    let mut worst = 0.0_f64;
    for (g, a, b) in [(0.01, 1.0, 10.0), (1.0, 1.0, 1.0), (4.0, 4.0, 4.0), (0.5, 0.25, 0.0)] {
        let p = NoiseParams::new(g, a, b)?;
        let closed = crosstalk_factor(&p, CrosstalkMethod::Closed)?;
        worst = worst.max((closed - crosstalk_factor(&p, CrosstalkMethod::Quadrature)?).abs());
    }
    let spot = crosstalk_factor(&NoiseParams::new(1.0, 1.0, 1.0)?, CrosstalkMethod::Closed)?;
    let ok = worst <= 1e-8 && (spot - 0.299776).abs() <= 1e-6;
    Ok((ok, format!("quadrature within {worst:.1e}, spot {spot:.6}")))
}

pub fn run(cfg: &RunConfig) -> Report {
    let mut disagreement = None;
    let backends = (|| {
        let mut worst = 0.0_f64;
        for lambda in BACKEND_GRID {
            let spec = ChannelSpec::FieldQst {
                params: make_model(lambda, cfg.gamma, default_smear_norm())?,
                bob: cfg.bob.clone(),
            };
            match build_checked(&spec, cfg.n_max) {
                Ok((_, d)) => worst = worst.max(d),
                Err(Error::BackendDisagreement { deviation, .. }) => {
                    disagreement = Some(deviation);
                    return Ok((false, format!("deviation {deviation:.2e} at lambda_phi={lambda}")));
                }
                Err(e) => return Err(e),
            }
        }
        Ok((worst <= 1e-8, format!("FieldQST max deviation {worst:.1e} on 6 points")))
    })();
    let checks = vec![
        check("gate-factorizations", gate_factorizations()),
        check("truth-tables", truth_tables()),
        check("coherent-overlap", coherent_overlap(cfg.gamma)),
        check("backend-equivalence", backends),
        check("field-channels-cptp", field_channels_cptp(cfg)),
        check("diamond-anchors", diamond_anchors()),
        check("crosstalk-oracle", crosstalk()),
    ];
    Report { checks, disagreement }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{CommonArgs, FileConfig};

    #[test]
    fn default_suite_passes() {
        let cfg = RunConfig::resolve(&CommonArgs::default(), &FileConfig::default()).unwrap();
        let report = run(&cfg);
        assert!(report.all_passed(), "{}", report.render());
        assert!(report.disagreement.is_none());
        assert_eq!(report.checks.len(), 7);
    }

    #[test]
    fn render_lists_each_check() {
        let report = Report {
            checks: vec![Check {
                name: "demo",
                passed: false,
                detail: "off by one".into(),
            }],
            disagreement: None,
        };
        let text = report.render();
        assert!(text.starts_with("demo"));
        assert!(text.contains("FAIL  off by one"));
        assert!(text.ends_with("0/1 checks passed\n"));
    }
}
