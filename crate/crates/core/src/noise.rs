//! Dephasing view of the field channel: dephased overlaps, cross-talk noise,
//! the effective coupling `λ_{φ,b}`, environment dephasing and noisy capacity.

use rayon::prelude::*;

use crate::channels::{build_channel, dephase_field, Backend, ChannelSpec, DephasingForm};
use crate::error::{Error, Result};
use crate::field::{default_smear_norm, make_model, ModelParams};
use crate::metrics::{capacity_n1, SweepBackend};
use crate::operator::{basis, kron_vec, Operator};
use crate::udw::{udw_gate, UdwKind};

/// Absolute error target for the cross-talk quadrature.
pub const QUADRATURE_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams {
    pub gamma_phi: f64,
    pub alpha_sq: f64,
    pub b: f64,
    pub gamma_e: f64,
    pub smear_norm: f64,
}

impl NoiseParams {
    pub fn new(gamma_phi: f64, alpha_sq: f64, b: f64) -> Result<Self> {
        let p = Self {
            gamma_phi,
            alpha_sq,
            b,
            gamma_e: 0.0,
            smear_norm: default_smear_norm(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.gamma_phi) || !ok(self.b) || !ok(self.gamma_e) {
            return Err(Error::InvalidParams(format!(
                "noise rates must be finite and >= 0: gamma_phi={}, b={}, gamma_E={}",
                self.gamma_phi, self.b, self.gamma_e
            )));
        }
        if !(self.alpha_sq > 0.0 && self.alpha_sq.is_finite()) {
            return Err(Error::InvalidParams(format!("|alpha|^2 must be > 0, got {}", self.alpha_sq)));
        }
        if !(self.smear_norm > 0.0 && self.smear_norm.is_finite()) {
            return Err(Error::InvalidParams(format!("smear_norm must be > 0, got {}", self.smear_norm)));
        }
        Ok(())
    }

    /// `x = 4|α|² b² γ_φ`
    fn crosstalk_x(&self) -> f64 {
        4.0 * self.alpha_sq * self.b * self.b * self.gamma_phi
    }
}

/// `exp(−2 γ_φ |α|²)`
pub fn dephased_overlap(p: &NoiseParams) -> f64 {
    (-2.0 * p.gamma_phi * p.alpha_sq).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrosstalkMethod {
    Closed,
    Quadrature,
}

/// Overlap factor with Gaussian cross-talk noise of variance `b² γ_φ`.
pub fn crosstalk_factor(p: &NoiseParams, method: CrosstalkMethod) -> Result<f64> {
    p.validate()?;
    match method {
        CrosstalkMethod::Closed => {
            let x = p.crosstalk_x();
            Ok((-2.0 * p.gamma_phi * p.alpha_sq / (1.0 + x)).exp() / (1.0 + x).sqrt())
        }
        CrosstalkMethod::Quadrature => crosstalk_quadrature(p),
    }
}

fn crosstalk_quadrature(p: &NoiseParams) -> Result<f64> {
    let shift = p.gamma_phi.sqrt();
    let var = p.b * p.b * p.gamma_phi;
    if var == 0.0 {
        return Ok(dephased_overlap(p));
    }
    let norm = (2.0 * std::f64::consts::PI * var).sqrt();
    let integrand = |phi: f64| (-0.5 * phi * phi / var).exp() / norm * (-2.0 * p.alpha_sq * (phi + shift).powi(2)).exp();
    // split at both Gaussian centers; tails mapped from [0, 1) at the product width
    let (lo, hi) = (-shift, 0.0);
    let width = 1.0 / (1.0 / var + 4.0 * p.alpha_sq).sqrt();
    let tail = |start: f64, dir: f64| {
        move |u: f64| {
            let d = 1.0 - u;
            if d <= 0.0 {
                return 0.0;
            }
            integrand(start + dir * width * u / d) * width / (d * d)
        }
    };
    let pieces = [
        quadrature::integrate(integrand, lo, hi, QUADRATURE_TOL),
        quadrature::integrate(tail(hi, 1.0), 0.0, 1.0, QUADRATURE_TOL),
        quadrature::integrate(tail(lo, -1.0), 0.0, 1.0, QUADRATURE_TOL),
    ];
    let integral: f64 = pieces.iter().map(|o| o.integral).sum();
    let error: f64 = pieces.iter().map(|o| o.error_estimate).sum();
    if !(error <= 1e-10) || !integral.is_finite() {
        return Err(Error::Quadrature { error });
    }
    Ok(integral)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CouplingSign {
    /// `[λ²/(1+x) − (K/2|α|²) ln(1+x)]^{1/2}`
    #[default]
    AsPrinted,
    /// `[λ²/(1+x) + (K/4|α|²) ln(1+x)]^{1/2}`
    QuadratureMatched,
}

impl CouplingSign {
    pub fn name(self) -> &'static str {
        match self {
            CouplingSign::AsPrinted => "as-printed",
            CouplingSign::QuadratureMatched => "quadrature-matched",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        [CouplingSign::AsPrinted, CouplingSign::QuadratureMatched]
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unsupported(format!("unknown coupling sign '{s}'")))
    }
}

/// Effective coupling `λ_{φ,b}` with `x = 4 b² |α|² λ² / K`, `K = smear_norm`.
pub fn effective_coupling(lambda_phi: f64, p: &NoiseParams, sign: CouplingSign) -> Result<f64> {
    p.validate()?;
    if !(lambda_phi > 0.0 && lambda_phi.is_finite()) {
        return Err(Error::InvalidParams(format!("lambda_phi must be > 0, got {lambda_phi}")));
    }
    if p.b == 0.0 {
        return Ok(lambda_phi);
    }
    let k = p.smear_norm;
    let x = 4.0 * p.b * p.b * p.alpha_sq * lambda_phi * lambda_phi / k;
    let log_term = (1.0 + x).ln() * k / p.alpha_sq;
    let radicand = lambda_phi * lambda_phi / (1.0 + x)
        + match sign {
            CouplingSign::AsPrinted => -0.5 * log_term,
            CouplingSign::QuadratureMatched => 0.25 * log_term,
        };
    if radicand < 0.0 {
        return Err(Error::Domain { radicand });
    }
    Ok(radicand.sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvDephasingReport {
    pub gamma_e: f64,
    /// Largest change of a Fock-basis diagonal entry of the encoded field state.
    pub diagonal_deviation: f64,
    pub capacity_clean: f64,
    pub capacity_dephased: f64,
}

impl EnvDephasingReport {
    pub fn capacity_difference(&self) -> f64 {
        (self.capacity_dephased - self.capacity_clean).abs()
    }
}

/// Inserts number-operator dephasing between encode and decode of FieldQST
/// and compares against the undisturbed channel, both in the Fock backend.
pub fn environment_dephasing_check(
    gamma_e: f64,
    params: &ModelParams,
    bob: &Operator,
    form: DephasingForm,
    n_max: Option<usize>,
) -> Result<EnvDephasingReport> {
    if !(gamma_e >= 0.0 && gamma_e.is_finite()) {
        return Err(Error::InvalidParams(format!("gamma_E must be >= 0, got {gamma_e}")));
    }
    let backend = Backend::Fock { n_max };
    let clean = build_channel(
        &ChannelSpec::FieldQst {
            params: *params,
            bob: bob.clone(),
        },
        backend,
    )?;
    let dephased = build_channel(
        &ChannelSpec::FieldQstDephased {
            params: *params,
            bob: bob.clone(),
            gamma_e,
            form,
        },
        backend,
    )?;

    let gate = udw_gate(UdwKind::Qst, params);
    let u = gate.realize_fock(n_max)?;
    let n = u.dims()[1];
    let plus = (basis(2, 0) + basis(2, 1)).normalize();
    let input = kron_vec(&plus, &crate::field::coherent_vector(crate::operator::ZERO, n));
    let joint = Operator::pure(&(u.matrix() * input), &[2, n])?;
    let field = joint.partial_trace(&[1])?.into_matrix();
    let after = dephase_field(&field, gamma_e, form);
    let diagonal_deviation = (0..n)
        .map(|k| (after[(k, k)] - field[(k, k)]).norm())
        .fold(0.0, f64::max);

    Ok(EnvDephasingReport {
        gamma_e,
        diagonal_deviation,
        capacity_clean: capacity_n1(&clean)?,
        capacity_dephased: capacity_n1(&dephased)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseFlag {
    Ok,
    /// The effective coupling is imaginary at this point.
    Domain,
}

impl NoiseFlag {
    pub fn name(self) -> &'static str {
        match self {
            NoiseFlag::Ok => "ok",
            NoiseFlag::Domain => "domain",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseRow {
    pub lambda_phi: f64,
    pub b: f64,
    pub lambda_eff: Option<f64>,
    pub capacity: Option<f64>,
    pub flag: NoiseFlag,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseConfig {
    pub alpha_sq: f64,
    pub smear_norm: f64,
    pub gamma: f64,
    pub sign: CouplingSign,
    pub bob: Operator,
    pub backend: SweepBackend,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            alpha_sq: 1.0,
            smear_norm: default_smear_norm(),
            gamma: std::f64::consts::FRAC_PI_4,
            sign: CouplingSign::AsPrinted,
            bob: crate::channels::plus_y(),
            backend: SweepBackend::Single(Backend::Symbolic),
        }
    }
}

/// FieldQST capacity at `λ_{φ,b}` in place of `λ_φ`; imaginary couplings are
/// reported with [`NoiseFlag::Domain`].
pub fn noisy_capacity(grid: &[f64], b: f64, cfg: &NoiseConfig) -> Result<Vec<NoiseRow>> {
    if grid.is_empty() {
        return Err(Error::InvalidParams("noise grid is empty".into()));
    }
    let p = NoiseParams {
        gamma_phi: 0.0,
        alpha_sq: cfg.alpha_sq,
        b,
        gamma_e: 0.0,
        smear_norm: cfg.smear_norm,
    };
    p.validate()?;
    grid.par_iter()
        .map(|&lambda| {
            let point = || -> Result<NoiseRow> {
                let lambda_eff = match effective_coupling(lambda, &p, cfg.sign) {
                    Ok(l) => l,
                    Err(Error::Domain { .. }) => {
                        return Ok(NoiseRow {
                            lambda_phi: lambda,
                            b,
                            lambda_eff: None,
                            capacity: None,
                            flag: NoiseFlag::Domain,
                        })
                    }
                    Err(e) => return Err(e),
                };
                let params = make_model(lambda_eff, cfg.gamma, cfg.smear_norm)?;
                let ch = cfg.backend.build(&ChannelSpec::FieldQst {
                    params,
                    bob: cfg.bob.clone(),
                })?;
                Ok(NoiseRow {
                    lambda_phi: lambda,
                    b,
                    lambda_eff: Some(lambda_eff),
                    capacity: Some(capacity_n1(&ch)?),
                    flag: NoiseFlag::Ok,
                })
            };
            point().map_err(|e| Error::SweepPoint {
                params: format!("lambda_phi={lambda}, b={b}"),
                source: Box::new(e),
            })
        })
        .collect()
}
