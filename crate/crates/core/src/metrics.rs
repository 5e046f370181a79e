//! Coherent information, single-letter capacity and diamond distance.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::channels::{build_channel, build_checked, Backend, Channel, ChannelSpec};
use crate::error::{Error, Result};
use crate::field::make_model;
use crate::gates::GateKind;
use crate::operator::{entropy_of_spectrum, hermitian_spectrum, CMatrix, CVector, Operator, C64, ZERO};

/// `S(Φ(ρ)) − S((id_R ⊗ Φ)(φ_ρ))` with `φ_ρ` the spectral purification of `ρ`.
pub fn coherent_information(ch: &Channel, rho: &Operator) -> Result<f64> {
    rho.check_density()?;
    if rho.dim() != ch.d_in() {
        return Err(Error::DimensionMismatch(format!(
            "input state has dimension {}, channel expects {}",
            rho.dim(),
            ch.d_in()
        )));
    }
    let spec = rho.eigh();
    let support: Vec<usize> = (0..spec.eigenvalues.len())
        .filter(|&k| spec.eigenvalues[k] > 1e-14)
        .collect();
    let r = support.len();
    let d_out = ch.d_out();
    let image = |a: &CVector, b: &CVector| -> CMatrix {
        let mut m = CMatrix::zeros(d_out, d_out);
        for i in 0..ch.d_in() {
            for j in 0..ch.d_in() {
                let c = a[i] * b[j].conj();
                if c != ZERO {
                    m += ch.unit_image(i, j) * c;
                }
            }
        }
        m
    };
    let mut joint = CMatrix::zeros(r * d_out, r * d_out);
    let mut out = CMatrix::zeros(d_out, d_out);
    for (k, &ek) in support.iter().enumerate() {
        let vk = spec.eigenvectors.column(ek).into_owned();
        for (l, &el) in support.iter().enumerate() {
            let vl = spec.eigenvectors.column(el).into_owned();
            let w = (spec.eigenvalues[ek] * spec.eigenvalues[el]).sqrt();
            let block = image(&vk, &vl) * C64::new(w, 0.0);
            if k == l {
                out += &block;
            }
            joint.view_mut((k * d_out, l * d_out), (d_out, d_out)).copy_from(&block);
        }
    }
    Ok(hermitian_entropy(&out) - hermitian_entropy(&joint))
}

fn hermitian_entropy(m: &CMatrix) -> f64 {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    entropy_of_spectrum(&hermitian_spectrum(&h).eigenvalues)
}

/// Coherent information at the maximally mixed input.
pub fn capacity_n1(ch: &Channel) -> Result<f64> {
    let d = ch.d_in();
    let rho = Operator::from_matrix(CMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0));
    coherent_information(ch, &rho)
}

/// Larger of [`capacity_n1`] and the best diagonal qubit input `diag(p, 1 − p)`.
pub fn capacity_n1_refined(ch: &Channel) -> Result<f64> {
    if ch.d_in() != 2 {
        return Err(Error::Unsupported("diagonal refinement is implemented for qubit inputs".into()));
    }
    let f = |p: f64| -> Result<f64> {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![C64::new(p, 0.0), C64::new(1.0 - p, 0.0)]));
        coherent_information(ch, &Operator::from_matrix(m))
    };
    let base = capacity_n1(ch)?;
    let grid: Vec<f64> = (0..=40).map(|k| k as f64 / 40.0).collect();
    let mut best = (0.5, base);
    for &p in &grid {
        let v = f(p)?;
        if v > best.1 {
            best = (p, v);
        }
    }
    // golden-section polish around the best grid point
    let (mut a, mut b) = ((best.0 - 0.025).max(0.0), (best.0 + 0.025).min(1.0));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c)? > f(d)? {
            b = d;
        } else {
            a = c;
        }
    }
    Ok(best.1.max(f(0.5 * (a + b))?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiamondOptions {
    pub coarse_samples: usize,
    pub top_k: usize,
    pub seed: u64,
    pub step_tol: f64,
    pub max_iter: usize,
}

impl Default for DiamondOptions {
    fn default() -> Self {
        Self {
            coarse_samples: 20_000,
            top_k: 20,
            seed: 0,
            step_tol: 1e-10,
            max_iter: 2_000,
        }
    }
}

/// Samples per independently seeded coarse chunk.
pub const COARSE_CHUNK: usize = 1_000;

#[derive(Clone, Debug, PartialEq)]
pub struct DiamondResult {
    pub value: f64,
    /// Maximizing state on `R ⊗ in`, reference factor first.
    pub argmax_state: CVector,
    pub starts_used: usize,
    pub converged: bool,
}

/// Choi matrix of `Φ₁ − Φ₂` plus the objective on pure states.
struct DiamondObjective {
    j: CMatrix,
    d_in: usize,
    d_out: usize,
}

impl DiamondObjective {
    fn new(a: &Channel, b: &Channel) -> Result<Self> {
        if a.d_in() != b.d_in() || a.d_out() != b.d_out() {
            return Err(Error::DimensionMismatch(format!(
                "channels map {}->{} and {}->{}",
                a.d_in(),
                a.d_out(),
                b.d_in(),
                b.d_out()
            )));
        }
        Ok(Self {
            j: a.choi().matrix() - b.choi().matrix(),
            d_in: a.d_in(),
            d_out: a.d_out(),
        })
    }

    /// `(Ψ ⊗ I) J (Ψ ⊗ I)†` with `Ψ[r, i] = ψ[r·d_in + i]`.
    fn output(&self, psi: &CVector) -> CMatrix {
        let (d, o) = (self.d_in, self.d_out);
        let psi_m = CMatrix::from_fn(d, d, |r, i| psi[r * d + i]);
        let lift = psi_m.kronecker(&CMatrix::identity(o, o));
        &lift * &self.j * lift.adjoint()
    }

    fn value(&self, psi: &CVector) -> f64 {
        let m = self.output(psi);
        let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        hermitian_spectrum(&h).eigenvalues.iter().map(|l| l.abs()).sum()
    }

    /// Quadratic form `G` with `Tr(W M(ψ)) = ψ† G ψ`.
    fn gram(&self, w: &CMatrix) -> CMatrix {
        let (d, o) = (self.d_in, self.d_out);
        let n = d * d;
        CMatrix::from_fn(n, n, |row, col| {
            let (rp, jj) = (row / d, row % d);
            let (r, i) = (col / d, col % d);
            let mut s = ZERO;
            for k in 0..o {
                for l in 0..o {
                    s += w[(rp * o + l, r * o + k)] * self.j[(i * o + k, jj * o + l)];
                }
            }
            s
        })
    }

    /// Alternating ascent: `W = sign(M(ψ))`, then `ψ` = top eigenvector of `G(W)`.
    fn refine(&self, start: &CVector, tol: f64, max_iter: usize) -> (f64, CVector, bool) {
        let mut psi = start.clone();
        let mut value = self.value(&psi);
        for _ in 0..max_iter {
            let m = self.output(&psi);
            let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
            let spec = hermitian_spectrum(&h);
            let signs = CVector::from_iterator(
                spec.eigenvalues.len(),
                spec.eigenvalues.iter().map(|&l| C64::new(l.signum() * (l.abs() > 0.0) as i32 as f64, 0.0)),
            );
            let w = &spec.eigenvectors * CMatrix::from_diagonal(&signs) * spec.eigenvectors.adjoint();
            let g = self.gram(&w);
            let g = (&g + g.adjoint()) * C64::new(0.5, 0.0);
            let top = hermitian_spectrum(&g).eigenvectors.column(0).into_owned();
            let phase = top.dotc(&psi);
            let aligned = if phase.norm() > 0.0 { top * (phase / phase.norm()) } else { top };
            let step = (&aligned - &psi).norm();
            let next = self.value(&aligned);
            if next + 1e-15 < value {
                return (value, psi, true);
            }
            psi = aligned;
            value = next;
            if step < tol {
                return (value, psi, true);
            }
        }
        (value, psi, false)
    }
}

fn haar_state(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    let v = CVector::from_iterator(
        n,
        (0..n).map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        }),
    );
    v.normalize()
}

/// `max_ψ ‖(id ⊗ (Φ₁ − Φ₂))(|ψ⟩⟨ψ|)‖₁` over pure states on `R ⊗ in`, `dim R = d_in`.
pub fn diamond_distance(a: &Channel, b: &Channel, opts: &DiamondOptions) -> Result<DiamondResult> {
    let obj = DiamondObjective::new(a, b)?;
    let n = obj.d_in * obj.d_in;
    let chunks = opts.coarse_samples.div_ceil(COARSE_CHUNK).max(1);
    let mut coarse: Vec<(f64, usize, CVector)> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(c as u64);
            let count = COARSE_CHUNK.min(opts.coarse_samples.saturating_sub(c * COARSE_CHUNK)).max(1);
            let obj = &obj;
            (0..count)
                .map(move |k| {
                    let psi = haar_state(&mut rng, n);
                    (obj.value(&psi), c * COARSE_CHUNK + k, psi)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    coarse.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    coarse.truncate(opts.top_k.max(1));
    let refined: Vec<(f64, usize, CVector, bool)> = coarse
        .par_iter()
        .map(|(_, idx, psi)| {
            let (v, s, ok) = obj.refine(psi, opts.step_tol, opts.max_iter);
            (v, *idx, s, ok)
        })
        .collect();
    let best = refined
        .iter()
        .max_by(|x, y| x.0.total_cmp(&y.0).then(y.1.cmp(&x.1)))
        .expect("at least one start");
    Ok(DiamondResult {
        value: best.0,
        argmax_state: best.2.clone(),
        starts_used: refined.len(),
        converged: best.3,
    })
}

/// Objective of [`diamond_distance`] at a given pure state.
pub fn diamond_objective(a: &Channel, b: &Channel, psi: &CVector) -> Result<f64> {
    let obj = DiamondObjective::new(a, b)?;
    if psi.len() != obj.d_in * obj.d_in {
        return Err(Error::DimensionMismatch("state must live on R ⊗ in".into()));
    }
    Ok(obj.value(&psi.normalize()))
}

/// `‖U·U† − V·V†‖_⋄ = 2√(1 − ν²)`, `ν` the distance from 0 to the hull of spec(V†U).
pub fn unitary_diamond_oracle(u: &Operator, v: &Operator) -> Result<f64> {
    for op in [u, v] {
        let deviation = op.unitarity_deviation();
        if deviation > 1e-10 {
            return Err(Error::NotUnitary { deviation });
        }
    }
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", u.dim(), v.dim())));
    }
    let w = v.matrix().adjoint() * u.matrix();
    let eig = w
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::Unsupported("Schur decomposition failed".into()))?;
    let mut angles: Vec<f64> = eig.iter().map(|z| z.arg()).collect();
    angles.sort_by(f64::total_cmp);
    let n = angles.len();
    let mut gap = 2.0 * std::f64::consts::PI - (angles[n - 1] - angles[0]);
    for k in 1..n {
        gap = gap.max(angles[k] - angles[k - 1]);
    }
    let span = 2.0 * std::f64::consts::PI - gap;
    if span >= std::f64::consts::PI {
        return Ok(2.0);
    }
    Ok(2.0 * (0.5 * span).sin())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Metric {
    Capacity,
    Diamond,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Capacity => "capacity",
            Metric::Diamond => "diamond",
        }
    }
}

/// Field channel and its qubit reference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pair {
    Qst,
    Cnot1,
    Cnot2q,
    Hadamard,
    /// `(identity, identity)` for calibration.
    Identity,
}

impl Pair {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qst" => Ok(Pair::Qst),
            "cnot1" => Ok(Pair::Cnot1),
            "cnot2q" => Ok(Pair::Cnot2q),
            "hadamard" => Ok(Pair::Hadamard),
            "identity" => Ok(Pair::Identity),
            other => Err(Error::Unsupported(format!("unknown channel pair '{other}'"))),
        }
    }

    pub fn specs(self, lambda_phi: f64, gamma: f64, smear_norm: f64, bob: &Operator) -> Result<(ChannelSpec, ChannelSpec)> {
        let params = make_model(lambda_phi, gamma, smear_norm)?;
        let frank = crate::operator::basis(2, 0);
        Ok(match self {
            Pair::Qst => (
                ChannelSpec::FieldQst { params, bob: bob.clone() },
                ChannelSpec::qubit_qst(),
            ),
            Pair::Cnot1 => (
                ChannelSpec::FieldCnot1 { params, bob: bob.clone() },
                ChannelSpec::QubitCnot1 {
                    frank,
                    bob: crate::channels::ket0(),
                },
            ),
            Pair::Cnot2q => (
                ChannelSpec::FieldCnot2q { params, bob: bob.clone() },
                ChannelSpec::QubitCnot2q {
                    bob: crate::channels::ket0(),
                },
            ),
            Pair::Hadamard => (ChannelSpec::FieldHadamard { params }, ChannelSpec::QubitGate(GateKind::H)),
            Pair::Identity => (ChannelSpec::QubitGate(GateKind::X), ChannelSpec::QubitGate(GateKind::X)),
        })
    }
}

/// Which backends a sweep point is built in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepBackend {
    Single(Backend),
    /// Symbolic result, cross-checked against Fock.
    Both { n_max: Option<usize> },
}

impl SweepBackend {
    pub fn tag(&self) -> &'static str {
        match self {
            SweepBackend::Single(b) => b.tag(),
            SweepBackend::Both { .. } => "both",
        }
    }

    pub fn build(&self, spec: &ChannelSpec) -> Result<Channel> {
        match self {
            SweepBackend::Single(b) => build_channel(spec, *b),
            SweepBackend::Both { n_max } => build_checked(spec, *n_max).map(|(c, _)| c),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub lambda_phi: f64,
    pub gamma: f64,
    pub metric: &'static str,
    pub value: f64,
    pub backend: &'static str,
    pub seed: u64,
    pub starts: Option<usize>,
    pub converged: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub metric: Metric,
    pub pair: Pair,
    pub gamma: f64,
    pub smear_norm: f64,
    pub bob: Operator,
    pub backend: SweepBackend,
    pub diamond: DiamondOptions,
}

/// One row per grid point, evaluated in parallel and returned in grid order.
pub fn sweep(cfg: &SweepConfig, grid: &[f64]) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::InvalidParams("sweep grid is empty".into()));
    }
    grid.par_iter()
        .map(|&lambda| {
            sweep_point(cfg, lambda).map_err(|e| Error::SweepPoint {
                params: format!("lambda_phi={lambda}, gamma={}", cfg.gamma),
                source: Box::new(e),
            })
        })
        .collect()
}

fn sweep_point(cfg: &SweepConfig, lambda: f64) -> Result<SweepRow> {
    let (field, reference) = cfg.pair.specs(lambda, cfg.gamma, cfg.smear_norm, &cfg.bob)?;
    let ch = cfg.backend.build(&field)?;
    let (value, starts, converged) = match cfg.metric {
        Metric::Capacity => (capacity_n1(&ch)?, None, None),
        Metric::Diamond => {
            let r = cfg.backend.build(&reference)?;
            let d = diamond_distance(&ch, &r, &cfg.diamond)?;
            (d.value, Some(d.starts_used), Some(d.converged))
        }
    };
    if !value.is_finite() {
        return Err(Error::InvalidParams(format!("metric evaluated to {value}")));
    }
    Ok(SweepRow {
        lambda_phi: lambda,
        gamma: cfg.gamma,
        metric: cfg.metric.name(),
        value,
        backend: cfg.backend.tag(),
        seed: cfg.diamond.seed,
        starts,
        converged,
    })
}
