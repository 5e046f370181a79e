//! Single-effective-mode field: coherent-state algebra and a truncated Fock
//! realization.
//!
//! Conventions: `φ̂ = λ_φ (a + a†)` and `Π̂ = i λ_Π (a† − a)`, so that
//! `e^{icφ̂} = D(i c λ_φ)` and `e^{icΠ̂} = D(−c λ_Π)`. The model is labelled by
//! `γ = 2 λ_φ λ_Π = ⟨+α|Π̂|+α⟩`, so `e^{iμΠ̂}|±α⟩ ≈ e^{±iμγ}|±α⟩` up to a
//! residual center shift of `λ_Π`.

use std::f64::consts::{FRAC_PI_4, PI};

use log::warn;

use crate::error::{Error, Result};
use crate::operator::{hermitian_spectrum, CMatrix, CVector, Spectrum, C64, I, ONE, ZERO};

/// `D(β) = exp(β a† − β* a)` carrying an accumulated scalar phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Displacement {
    pub center: C64,
    pub phase: C64,
}

impl Displacement {
    pub fn new(center: C64) -> Self {
        Self { center, phase: ONE }
    }

    pub fn identity() -> Self {
        Self::new(ZERO)
    }

    /// `self · rhs` reduced to a single displacement.
    pub fn then_apply_left_of(self, rhs: Displacement) -> Displacement {
        let a = self.center;
        let b = rhs.center;
        let bch = ((a * b.conj() - a.conj() * b) * 0.5).exp();
        Displacement {
            center: a + b,
            phase: self.phase * rhs.phase * bch,
        }
    }

    /// `⟨0| phase · D(center) |0⟩`.
    pub fn vacuum_expectation(&self) -> C64 {
        self.phase * (-0.5 * self.center.norm_sqr()).exp()
    }

    /// Acts on the coherent state `|β⟩`, returning `(scalar, new center)`.
    pub fn act_on_coherent(&self, beta: C64) -> (C64, C64) {
        let out = self.then_apply_left_of(Displacement::new(beta));
        (out.phase, out.center)
    }
}

/// Reduces the operator product `seq[0] · seq[1] · … ` to one displacement.
pub fn displacement_reduce(seq: &[Displacement]) -> Displacement {
    seq.iter()
        .fold(Displacement::identity(), |acc, &d| acc.then_apply_left_of(d))
}

/// `⟨β|α⟩ = exp(−|α|²/2 − |β|²/2 + β*α)`.
pub fn overlap(beta: C64, alpha: C64) -> C64 {
    (-0.5 * alpha.norm_sqr() - 0.5 * beta.norm_sqr() + beta.conj() * alpha).exp()
}

/// Default smearing constant `(2π)^{3/2} σ` with `σ = 1`.
pub fn default_smear_norm() -> f64 {
    (2.0 * PI).powf(1.5)
}

/// Constraint ratio below which a warning is logged.
pub const CONSTRAINT_RATIO_MIN: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub lambda_phi: f64,
    pub lambda_pi: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub smear_norm: f64,
    pub omega: f64,
}

impl ModelParams {
    /// `α_φ = i λ_φ`
    pub fn alpha_phi(&self) -> C64 {
        I * self.lambda_phi
    }

    /// `α_Π = −λ_Π`
    pub fn alpha_pi(&self) -> C64 {
        C64::new(-self.lambda_pi, 0.0)
    }

    /// `γ² / ⟨0|Π̂²|0⟩`, equal to `4λ_φ²` in the single-mode reduction.
    pub fn constraint_ratio(&self) -> f64 {
        if self.lambda_pi == 0.0 {
            return f64::INFINITY;
        }
        self.gamma * self.gamma / (self.lambda_pi * self.lambda_pi)
    }

    pub fn constraint_satisfied(&self) -> bool {
        self.constraint_ratio() >= CONSTRAINT_RATIO_MIN
    }

    /// Displacement generated by `e^{i c Ô}`.
    pub fn displacement(&self, g: Generator) -> Displacement {
        let center = match g.observable {
            Observable::Phi => I * (g.coeff * self.lambda_phi),
            Observable::Pi => C64::new(-g.coeff * self.lambda_pi, 0.0),
        };
        Displacement::new(center)
    }

    /// Product of the exponentials in `payload`, leftmost first.
    pub fn payload_displacement(&self, payload: &[Generator]) -> Displacement {
        let seq: Vec<Displacement> = payload.iter().map(|&g| self.displacement(g)).collect();
        displacement_reduce(&seq)
    }
}

/// Builds model parameters from `(λ_φ, γ)`; `λ_Π = γ/(2λ_φ)`.
pub fn make_model(lambda_phi: f64, gamma: f64, smear_norm: f64) -> Result<ModelParams> {
    if !lambda_phi.is_finite() || lambda_phi < 0.0 {
        return Err(Error::InvalidParams(format!("lambda_phi must be finite and >= 0, got {lambda_phi}")));
    }
    if !gamma.is_finite() {
        return Err(Error::InvalidParams("gamma must be finite".into()));
    }
    if !(smear_norm > 0.0) || !smear_norm.is_finite() {
        return Err(Error::InvalidParams(format!("smear_norm must be > 0, got {smear_norm}")));
    }
    let lambda_pi = if lambda_phi == 0.0 {
        if gamma != 0.0 {
            return Err(Error::InvalidParams(
                "lambda_phi = 0 cannot carry a nonzero gamma".into(),
            ));
        }
        0.0
    } else {
        gamma / (2.0 * lambda_phi)
    };
    let params = ModelParams {
        lambda_phi,
        lambda_pi,
        gamma,
        epsilon: (-2.0 * lambda_phi * lambda_phi).exp(),
        smear_norm,
        omega: 1.0,
    };
    if params.lambda_pi != 0.0 && !params.constraint_satisfied() {
        warn!(
            "phase constraint weak: gamma^2/<0|Pi^2|0> = {:.3} < {CONSTRAINT_RATIO_MIN}",
            params.constraint_ratio()
        );
    }
    Ok(params)
}

/// `make_model(λ_φ, π/4, default smear)`.
pub fn standard_model(lambda_phi: f64) -> Result<ModelParams> {
    make_model(lambda_phi, FRAC_PI_4, default_smear_norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Observable {
    Phi,
    Pi,
}

/// The exponential `e^{i · coeff · Ô}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Generator {
    pub observable: Observable,
    pub coeff: f64,
}

impl Generator {
    pub fn phi(coeff: f64) -> Self {
        Self {
            observable: Observable::Phi,
            coeff,
        }
    }

    pub fn pi(coeff: f64) -> Self {
        Self {
            observable: Observable::Pi,
            coeff,
        }
    }
}

/// Poisson tail mass that must be left outside the truncated space.
pub const FOCK_TAIL_TOL: f64 = 1e-14;
pub const FOCK_GUARD_LEVELS: usize = 8;

/// Smallest `n` with `Σ_{k>n} e^{−|β|²}|β|^{2k}/k! < tol`.
pub fn coherent_tail_cutoff(beta_abs: f64, tol: f64) -> usize {
    let mean = beta_abs * beta_abs;
    if mean == 0.0 {
        return 0;
    }
    let kmax = (mean + 40.0 * beta_abs + 60.0).ceil() as usize;
    // pmf in log space, tail accumulated from the top
    let mut log_pmf = Vec::with_capacity(kmax + 1);
    let mut lp = -mean;
    log_pmf.push(lp);
    for k in 1..=kmax {
        lp += mean.ln() - (k as f64).ln();
        log_pmf.push(lp);
    }
    let mut tail = 0.0;
    for n in (0..=kmax).rev() {
        // tail currently holds Σ_{k>n}
        if tail >= tol {
            return n + 1;
        }
        tail += log_pmf[n].exp();
    }
    0
}

/// Fock levels needed to represent coherent states up to `|β| = beta_abs`.
pub fn adaptive_levels(beta_abs: f64) -> usize {
    (coherent_tail_cutoff(beta_abs, FOCK_TAIL_TOL) + 1 + FOCK_GUARD_LEVELS).max(2)
}

/// `e^{−|β|²/2} Σ βⁿ/√n! |n⟩` truncated to `levels`.
pub fn coherent_vector(beta: C64, levels: usize) -> CVector {
    let mut v = CVector::zeros(levels);
    let mut c = C64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
    for n in 0..levels {
        if n > 0 {
            c = c * beta / (n as f64).sqrt();
        }
        v[n] = c;
    }
    v
}

/// Truncated single-mode operators.
#[derive(Clone, Debug)]
pub struct FockRep {
    pub n_max: usize,
    pub a: CMatrix,
    pub phi_op: CMatrix,
    pub pi_op: CMatrix,
    phi_spec: Spectrum,
    pi_spec: Spectrum,
}

impl FockRep {
    /// Levels `|0⟩ … |n_max − 1⟩`.
    pub fn new(params: &ModelParams, n_max: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::TruncationTooSmall {
                requested: n_max,
                required: 2,
            });
        }
        let a = CMatrix::from_fn(n_max, n_max, |r, c| {
            if c == r + 1 {
                C64::new((c as f64).sqrt(), 0.0)
            } else {
                ZERO
            }
        });
        let ad = a.adjoint();
        let phi_op = (&a + &ad) * C64::new(params.lambda_phi, 0.0);
        let pi_op = (&ad - &a) * (I * params.lambda_pi);
        let phi_spec = hermitian_spectrum(&phi_op);
        let pi_spec = hermitian_spectrum(&pi_op);
        Ok(Self {
            n_max,
            a,
            phi_op,
            pi_op,
            phi_spec,
            pi_spec,
        })
    }

    pub fn vacuum(&self) -> CVector {
        crate::operator::basis(self.n_max, 0)
    }

    /// `e^{i · coeff · Ô}` from the cached eigen-decomposition.
    pub fn exp_generator(&self, g: Generator) -> CMatrix {
        let spec = match g.observable {
            Observable::Phi => &self.phi_spec,
            Observable::Pi => &self.pi_spec,
        };
        exp_from_spectrum(spec, g.coeff)
    }

    /// Product of exponentials, leftmost first.
    pub fn payload(&self, payload: &[Generator]) -> CMatrix {
        payload
            .iter()
            .fold(CMatrix::identity(self.n_max, self.n_max), |acc, &g| {
                acc * self.exp_generator(g)
            })
    }

    /// `[φ̂, Π̂]`
    pub fn commutator(&self) -> CMatrix {
        &self.phi_op * &self.pi_op - &self.pi_op * &self.phi_op
    }
}

/// `e^{itH} = V e^{itΛ} V†` for Hermitian `H`.
pub fn exp_unitary(h: &CMatrix, t: f64) -> CMatrix {
    let herm = (h + h.adjoint()) * C64::new(0.5, 0.0);
    exp_from_spectrum(&hermitian_spectrum(&herm), t)
}

fn exp_from_spectrum(spec: &Spectrum, t: f64) -> CMatrix {
    let v = &spec.eigenvectors;
    let phases = CVector::from_iterator(
        spec.eigenvalues.len(),
        spec.eigenvalues.iter().map(|&l| C64::from_polar(1.0, t * l)),
    );
    let mut scaled = v.clone();
    for (mut col, p) in scaled.column_iter_mut().zip(phases.iter()) {
        col *= *p;
    }
    scaled * v.adjoint()
}

/// Fock realization with an explicit truncation, rejecting truncations that
/// cannot hold `e^{±iφ̂}|0⟩` and `e^{±iΠ̂}|0⟩`.
pub fn fock_realize(params: &ModelParams, n_max: usize) -> Result<FockRep> {
    let required = adaptive_levels(params.lambda_phi.max(params.lambda_pi));
    if n_max < required {
        return Err(Error::TruncationTooSmall {
            requested: n_max,
            required,
        });
    }
    FockRep::new(params, n_max)
}
