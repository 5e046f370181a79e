//! Field-mediated (UDW) gates as sums of `qubit projector ⊗ field displacement`
//! terms, with an exact coherent-state engine and a truncated Fock realization.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{adaptive_levels, coherent_vector, overlap, FockRep, Generator, ModelParams};
use crate::gates::{eigenstate, projector, Axis, Sign};
use crate::operator::{max_abs_diff, CMatrix, CVector, Operator, C64, ONE, ZERO};

/// Field centers closer than this are merged into one coherent term.
pub const CENTER_TOL: f64 = 1e-12;
/// Fock realizations must be unitary to this tolerance.
pub const FOCK_UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UdwKind {
    Qst,
    ZPhi,
    XPi,
    ZPiXPhi,
    H,
    S,
    T,
    /// The `P_z`-controlled `e^{±iφ̂}` factor inside QST.
    QstZ,
    /// Adjoint of QST, used as the decoder on the receiving qubit.
    QstDag,
}

impl UdwKind {
    pub const ALL: [UdwKind; 7] = [
        UdwKind::Qst,
        UdwKind::ZPhi,
        UdwKind::XPi,
        UdwKind::ZPiXPhi,
        UdwKind::H,
        UdwKind::S,
        UdwKind::T,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UdwKind::Qst => "QST",
            UdwKind::ZPhi => "Zphi",
            UdwKind::XPi => "XPi",
            UdwKind::ZPiXPhi => "ZPiXphi",
            UdwKind::H => "H",
            UdwKind::S => "S",
            UdwKind::T => "T",
            UdwKind::QstZ => "QST-Z",
            UdwKind::QstDag => "QST-dag",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .chain([UdwKind::QstZ, UdwKind::QstDag])
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unsupported(format!("unknown UDW gate kind '{s}'")))
    }
}

impl fmt::Display for UdwKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `(product of qubit projectors) ⊗ (product of field exponentials)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GateTerm {
    pub projectors: Vec<(Axis, Sign)>,
    pub payload: Vec<Generator>,
}

impl GateTerm {
    fn new(projectors: &[(Axis, Sign)], payload: &[Generator]) -> Self {
        Self {
            projectors: projectors.to_vec(),
            payload: payload.to_vec(),
        }
    }

    pub fn qubit_operator(&self) -> CMatrix {
        self.projectors
            .iter()
            .fold(CMatrix::identity(2, 2), |acc, &(a, s)| acc * projector(a, s).into_matrix())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UdwGate {
    pub kind: UdwKind,
    pub params: ModelParams,
    pub terms: Vec<GateTerm>,
    /// Global field exponentials applied to the left of every term.
    pub prefactor: Vec<Generator>,
}

fn pm(s: Sign) -> f64 {
    s.value()
}

pub fn udw_gate(kind: UdwKind, params: &ModelParams) -> UdwGate {
    use Axis::{X, Z};
    let g = |terms: Vec<GateTerm>, prefactor: Vec<Generator>| UdwGate {
        kind,
        params: *params,
        terms,
        prefactor,
    };
    match kind {
        UdwKind::Qst => {
            let mut terms = Vec::new();
            for x in Sign::BOTH {
                for z in Sign::BOTH {
                    terms.push(GateTerm::new(
                        &[(X, x), (Z, z)],
                        &[Generator::pi(pm(x)), Generator::phi(pm(z))],
                    ));
                }
            }
            g(terms, vec![])
        }
        UdwKind::QstDag => {
            let mut terms = Vec::new();
            for z in Sign::BOTH {
                for x in Sign::BOTH {
                    terms.push(GateTerm::new(
                        &[(Z, z), (X, x)],
                        &[Generator::phi(-pm(z)), Generator::pi(-pm(x))],
                    ));
                }
            }
            g(terms, vec![])
        }
        UdwKind::QstZ => g(
            Sign::BOTH
                .iter()
                .map(|&z| GateTerm::new(&[(Z, z)], &[Generator::phi(pm(z))]))
                .collect(),
            vec![],
        ),
        UdwKind::ZPhi => g(
            Sign::BOTH
                .iter()
                .map(|&z| GateTerm::new(&[(Z, z)], &[Generator::phi(-pm(z))]))
                .collect(),
            vec![],
        ),
        UdwKind::XPi => g(
            Sign::BOTH
                .iter()
                .map(|&x| GateTerm::new(&[(X, x)], &[Generator::pi(pm(x))]))
                .collect(),
            vec![],
        ),
        UdwKind::ZPiXPhi => {
            let mut terms = Vec::new();
            for z in Sign::BOTH {
                for x in Sign::BOTH {
                    terms.push(GateTerm::new(
                        &[(Z, z), (X, x)],
                        &[Generator::pi(pm(z)), Generator::phi(pm(x))],
                    ));
                }
            }
            g(terms, vec![Generator::pi(-1.0)])
        }
        UdwKind::H => g(
            Sign::BOTH
                .iter()
                .map(|&x| GateTerm::new(&[(X, x)], &[Generator::phi(-pm(x))]))
                .collect(),
            vec![],
        ),
        UdwKind::S | UdwKind::T => {
            let scale = if kind == UdwKind::S { 1.0 } else { 0.5 };
            let terms = Sign::BOTH
                .iter()
                .map(|&z| {
                    let power = (1.0 - pm(z)) * scale;
                    let mut payload = Vec::new();
                    if power != 0.0 {
                        payload.push(Generator::pi(power));
                    }
                    payload.push(Generator::phi(1.0));
                    GateTerm::new(&[(Z, z)], &payload)
                })
                .collect();
            g(terms, vec![])
        }
    }
}

/// `[XΠ factor, Z factor]` of QST, in application order right to left.
pub fn qst_factors(params: &ModelParams) -> [UdwGate; 2] {
    [udw_gate(UdwKind::XPi, params), udw_gate(UdwKind::QstZ, params)]
}

impl UdwGate {
    fn term_generators(&self, t: &GateTerm) -> Vec<Generator> {
        self.prefactor.iter().chain(t.payload.iter()).copied().collect()
    }

    /// Largest field displacement any single term applies.
    pub fn max_displacement(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                self.params
                    .payload_displacement(&self.term_generators(t))
                    .center
                    .norm()
            })
            .fold(0.0, f64::max)
    }

    /// Fock levels sufficient for a field that starts at `|β| ≤ start`.
    pub fn levels_from(&self, start: f64) -> usize {
        adaptive_levels(start + self.max_displacement())
    }

    /// Realization on `qubit ⊗ field` with `n_max` levels, or adaptive when `None`.
    pub fn realize_fock(&self, n_max: Option<usize>) -> Result<Operator> {
        let required = self.levels_from(0.0);
        let n = n_max.unwrap_or(required);
        if n < required {
            return Err(Error::TruncationTooSmall {
                requested: n,
                required,
            });
        }
        let fock = FockRep::new(&self.params, n)?;
        let u = self.embed(&fock, &[2, n], 0, 1);
        let op = Operator::new(u, vec![2, n])?;
        let deviation = op.unitarity_deviation();
        if deviation > FOCK_UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(op)
    }

    /// Full matrix on a register of `dims`, acting on the qubit factor at
    /// `qubit` and the field factor at `field`.
    pub fn embed(&self, fock: &FockRep, dims: &[usize], qubit: usize, field: usize) -> CMatrix {
        let total: usize = dims.iter().product();
        let mut out = CMatrix::zeros(total, total);
        for t in &self.terms {
            let q = t.qubit_operator();
            let f = fock.payload(&self.term_generators(t));
            let factors: Vec<CMatrix> = dims
                .iter()
                .enumerate()
                .map(|(k, &d)| {
                    if k == qubit {
                        q.clone()
                    } else if k == field {
                        f.clone()
                    } else {
                        CMatrix::identity(d, d)
                    }
                })
                .collect();
            out += kron_list(&factors);
        }
        out
    }
}

pub(crate) fn kron_list(factors: &[CMatrix]) -> CMatrix {
    factors
        .iter()
        .skip(1)
        .fold(factors[0].clone(), |acc, f| acc.kronecker(f))
}

/// `1 ⊗ … ⊗ op ⊗ … ⊗ 1` on an `n`-qubit register.
pub fn embed_qubit_op(op: &CMatrix, index: usize, n_qubits: usize) -> CMatrix {
    let factors: Vec<CMatrix> = (0..n_qubits)
        .map(|k| if k == index { op.clone() } else { CMatrix::identity(2, 2) })
        .collect();
    kron_list(&factors)
}

/// `Σ_k |v_k⟩ ⊗ |β_k⟩` over an `n`-qubit register and one field mode.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentKet {
    pub n_qubits: usize,
    pub terms: Vec<(C64, CVector)>,
}

impl CoherentKet {
    pub fn product(qubits: CVector, center: C64) -> Self {
        let n_qubits = qubits.len().trailing_zeros() as usize;
        assert_eq!(1 << n_qubits, qubits.len(), "qubit register must have dimension 2^n");
        Self {
            n_qubits,
            terms: vec![(center, qubits)],
        }
    }

    pub fn apply(&self, gate: &UdwGate, qubit: usize) -> Self {
        let ops: Vec<(CMatrix, crate::field::Displacement)> = gate
            .terms
            .iter()
            .map(|t| {
                (
                    embed_qubit_op(&t.qubit_operator(), qubit, self.n_qubits),
                    gate.params.payload_displacement(&gate.term_generators(t)),
                )
            })
            .collect();
        let mut terms = Vec::with_capacity(self.terms.len() * ops.len());
        for (beta, v) in &self.terms {
            for (q, d) in &ops {
                let (scalar, center) = d.act_on_coherent(*beta);
                terms.push((center, q * v * scalar));
            }
        }
        let mut out = Self {
            n_qubits: self.n_qubits,
            terms,
        };
        out.merge();
        out
    }

    fn merge(&mut self) {
        let mut merged: Vec<(C64, CVector)> = Vec::new();
        for (c, v) in self.terms.drain(..) {
            match merged.iter_mut().find(|(m, _)| (*m - c).norm() < CENTER_TOL) {
                Some((_, acc)) => *acc += v,
                None => merged.push((c, v)),
            }
        }
        merged.retain(|(_, v)| v.norm() > 1e-300);
        self.terms = merged;
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &CoherentKet) -> C64 {
        let mut s = ZERO;
        for (b, w) in &self.terms {
            for (a, v) in &other.terms {
                s += overlap(*b, *a) * w.dotc(v);
            }
        }
        s
    }

    pub fn norm_sqr(&self) -> f64 {
        self.inner(self).re
    }

    /// `Tr_field |self⟩⟨other|` on the qubit register.
    pub fn field_traced_outer(&self, other: &CoherentKet) -> CMatrix {
        let d = 1 << self.n_qubits;
        let mut out = CMatrix::zeros(d, d);
        for (a, v) in &self.terms {
            for (b, w) in &other.terms {
                out += v * w.adjoint() * overlap(*b, *a);
            }
        }
        out
    }

    /// Dense vector in `qubits ⊗ field` with `levels` Fock levels.
    pub fn to_fock(&self, levels: usize) -> CVector {
        let d = 1 << self.n_qubits;
        let mut out = CVector::zeros(d * levels);
        for (c, v) in &self.terms {
            out += v.kronecker(&coherent_vector(*c, levels));
        }
        out
    }
}

/// `Σ_k Q_k ⊗ |β_k⟩⟨β'_k|`
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentJointState {
    pub n_qubits: usize,
    pub terms: Vec<JointTerm>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JointTerm {
    pub qubits: CMatrix,
    pub ket: C64,
    pub bra: C64,
}

impl CoherentJointState {
    pub fn product(qubits: &Operator, center: C64) -> Self {
        let n_qubits = qubits.dims().len();
        Self {
            n_qubits,
            terms: vec![JointTerm {
                qubits: qubits.matrix().clone(),
                ket: center,
                bra: center,
            }],
        }
    }

    pub fn from_ket(psi: &CoherentKet) -> Self {
        let mut terms = Vec::new();
        for (a, v) in &psi.terms {
            for (b, w) in &psi.terms {
                terms.push(JointTerm {
                    qubits: v * w.adjoint(),
                    ket: *a,
                    bra: *b,
                });
            }
        }
        Self {
            n_qubits: psi.n_qubits,
            terms,
        }
    }

    /// `U ρ U†` computed exactly on the coherent terms.
    pub fn apply(&self, gate: &UdwGate, qubit: usize) -> Self {
        let ops: Vec<(CMatrix, crate::field::Displacement)> = gate
            .terms
            .iter()
            .map(|t| {
                (
                    embed_qubit_op(&t.qubit_operator(), qubit, self.n_qubits),
                    gate.params.payload_displacement(&gate.term_generators(t)),
                )
            })
            .collect();
        let mut terms = Vec::new();
        for term in &self.terms {
            for (qt, dt) in &ops {
                let (ct, ket) = dt.act_on_coherent(term.ket);
                for (qs, ds) in &ops {
                    let (cs, bra) = ds.act_on_coherent(term.bra);
                    terms.push(JointTerm {
                        qubits: qt * &term.qubits * qs.adjoint() * (ct * cs.conj()),
                        ket,
                        bra,
                    });
                }
            }
        }
        let mut out = Self {
            n_qubits: self.n_qubits,
            terms,
        };
        out.merge();
        out
    }

    fn merge(&mut self) {
        let mut merged: Vec<JointTerm> = Vec::new();
        for t in self.terms.drain(..) {
            match merged
                .iter_mut()
                .find(|m| (m.ket - t.ket).norm() < CENTER_TOL && (m.bra - t.bra).norm() < CENTER_TOL)
            {
                Some(m) => m.qubits += t.qubits,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.qubits.norm() > 1e-300);
        self.terms = merged;
    }

    pub fn trace(&self) -> C64 {
        self.terms
            .iter()
            .map(|t| t.qubits.trace() * overlap(t.bra, t.ket))
            .sum()
    }

    /// Reduced qubit state after tracing the field out.
    pub fn trace_field(&self) -> Operator {
        let d = 1 << self.n_qubits;
        let m = self
            .terms
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, t| acc + &t.qubits * overlap(t.bra, t.ket));
        Operator::new(m, vec![2; self.n_qubits]).expect("qubit register dims")
    }

    /// Dense density matrix in `qubits ⊗ field`.
    pub fn to_fock(&self, levels: usize) -> CMatrix {
        let d = (1 << self.n_qubits) * levels;
        self.terms.iter().fold(CMatrix::zeros(d, d), |acc, t| {
            let f = coherent_vector(t.ket, levels) * coherent_vector(t.bra, levels).adjoint();
            acc + t.qubits.kronecker(&f)
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoherentProjectorKind {
    PlusAlpha,
    MinusAlpha,
    PZ,
    PX,
    HalfPiPlus,
    HalfPiMinus,
}

/// Largest overlap for which coherent projectors are built.
pub const MAX_PROJECTOR_OVERLAP: f64 = 0.99;

/// Coherent-state projector on `n_max` Fock levels over `|±α⟩`, `α = iλ_φ`.
///
/// With `naive = false` the bra side uses the Gram-inverse dual basis, so the
/// dyads act exactly on `span{|+α⟩, |−α⟩}`.
pub fn coherent_projector(
    kind: CoherentProjectorKind,
    params: &ModelParams,
    n_max: usize,
    naive: bool,
) -> Result<Operator> {
    if params.epsilon > MAX_PROJECTOR_OVERLAP {
        return Err(Error::IllConditioned {
            epsilon: params.epsilon,
        });
    }
    let alpha = params.alpha_phi();
    let required = adaptive_levels(alpha.norm());
    if n_max < required {
        return Err(Error::TruncationTooSmall {
            requested: n_max,
            required,
        });
    }
    let plus = coherent_vector(alpha, n_max);
    let minus = coherent_vector(-alpha, n_max);
    let (dual_plus, dual_minus) = if naive {
        (plus.clone(), minus.clone())
    } else {
        let g01 = overlap(alpha, -alpha);
        let det = ONE - g01 * g01.conj();
        // rows of G^{-1} for G = [[1, g01], [g01*, 1]]
        let dp = (&plus - &minus * g01.conj()) / det.conj();
        let dm = (&minus - &plus * g01) / det.conj();
        (dp, dm)
    };
    let dyad = |k: &CVector, b: &CVector| k * b.adjoint();
    let (pp, pm, mp, mm) = (
        dyad(&plus, &dual_plus),
        dyad(&plus, &dual_minus),
        dyad(&minus, &dual_plus),
        dyad(&minus, &dual_minus),
    );
    let m = match kind {
        CoherentProjectorKind::PlusAlpha => pp,
        CoherentProjectorKind::MinusAlpha => mm,
        CoherentProjectorKind::PZ => pp - mm,
        CoherentProjectorKind::PX => mp + pm,
        CoherentProjectorKind::HalfPiPlus => pp + mp + pm + mm,
        CoherentProjectorKind::HalfPiMinus => pp - mp - pm + mm,
    };
    Operator::new(m, vec![n_max])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SwapVariant {
    ExpEncode,
    PlusAlphaInit,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldAction {
    Identity,
    Exp(Vec<Generator>),
    Coherent(CoherentProjectorKind),
}

/// `Σ (qubit projector) ⊗ (field action)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SwapStage {
    pub terms: Vec<(Axis, Sign, FieldAction)>,
}

/// The three stages of the qubit-field SWAP, in application order.
pub fn udw_swap(variant: SwapVariant, params: &ModelParams) -> (ModelParams, Vec<SwapStage>) {
    let controlled_px = SwapStage {
        terms: vec![
            (Axis::Z, Sign::Plus, FieldAction::Identity),
            (Axis::Z, Sign::Minus, FieldAction::Coherent(CoherentProjectorKind::PX)),
        ],
    };
    let controlled_pz = SwapStage {
        terms: vec![
            (Axis::X, Sign::Plus, FieldAction::Identity),
            (Axis::X, Sign::Minus, FieldAction::Coherent(CoherentProjectorKind::PZ)),
        ],
    };
    let first = match variant {
        SwapVariant::ExpEncode => SwapStage {
            terms: vec![
                (Axis::Z, Sign::Plus, FieldAction::Exp(vec![Generator::phi(-1.0)])),
                (Axis::Z, Sign::Minus, FieldAction::Exp(vec![Generator::phi(1.0)])),
            ],
        },
        SwapVariant::PlusAlphaInit => controlled_px.clone(),
    };
    (*params, vec![first, controlled_pz, controlled_px])
}

/// Fock matrix of one SWAP stage on `qubit ⊗ field`.
pub fn realize_swap_stage(
    stage: &SwapStage,
    params: &ModelParams,
    n_max: usize,
    naive: bool,
) -> Result<CMatrix> {
    let fock = FockRep::new(params, n_max)?;
    let mut out = CMatrix::zeros(2 * n_max, 2 * n_max);
    for (axis, sign, action) in &stage.terms {
        let f = match action {
            FieldAction::Identity => CMatrix::identity(n_max, n_max),
            FieldAction::Exp(gens) => fock.payload(gens),
            FieldAction::Coherent(k) => coherent_projector(*k, params, n_max, naive)?.into_matrix(),
        };
        out += projector(*axis, *sign).into_matrix().kronecker(&f);
    }
    Ok(out)
}

/// Product of the SWAP stages plus its unitarity defect on the encoded
/// subspace `span{|q⟩⊗|±α⟩}`.
pub fn realize_swap(
    variant: SwapVariant,
    params: &ModelParams,
    n_max: usize,
    naive: bool,
) -> Result<(Operator, f64)> {
    let (_, stages) = udw_swap(variant, params);
    let mut u = CMatrix::identity(2 * n_max, 2 * n_max);
    for s in &stages {
        u = realize_swap_stage(s, params, n_max, naive)? * u;
    }
    let alpha = params.alpha_phi();
    let fields = match variant {
        SwapVariant::ExpEncode => vec![coherent_vector(ZERO, n_max)],
        SwapVariant::PlusAlphaInit => vec![
            coherent_vector(alpha, n_max),
            coherent_vector(-alpha, n_max),
        ],
    };
    let mut inputs = Vec::new();
    for q in 0..2 {
        for f in &fields {
            inputs.push(eigenstate(Axis::Z, if q == 0 { Sign::Plus } else { Sign::Minus }).kronecker(f));
        }
    }
    let basis = CMatrix::from_columns(&inputs);
    let basis = basis.qr().q();
    let image = &u * &basis;
    let gram_in = basis.adjoint() * &basis;
    let gram_out = image.adjoint() * &image;
    let defect = max_abs_diff(&gram_in, &gram_out);
    if defect > MAX_PROJECTOR_OVERLAP {
        return Err(Error::NotUnitary { deviation: defect });
    }
    Ok((Operator::new(u, vec![2, n_max])?, defect))
}
