//! Qubit channels built from field-mediated and qubit-mediated circuits.
//!
//! Superoperators use column stacking: `vec(ρ)[i + d·j] = ρ[i, j]`, so
//! `S[(a + d_out·b), (i + d_in·j)] = Φ(|i⟩⟨j|)[a, b]`.

use std::fmt;

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::field::{adaptive_levels, FockRep, ModelParams};
use crate::gates::{build_gate, GateKind};
use crate::operator::{
    basis, hermitian_spectrum, kron_vec, max_abs_diff, CMatrix, CVector, Operator, C64, ONE, ZERO,
};
use crate::udw::{kron_list, udw_gate, CoherentJointState, CoherentKet, UdwGate, UdwKind};

pub const TP_TOL: f64 = 1e-10;
pub const CP_TOL: f64 = 1e-8;
/// Largest entrywise superoperator gap tolerated between the two backends.
pub const BACKEND_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    superop: CMatrix,
    d_in: usize,
    d_out: usize,
    recipe: String,
}

impl Channel {
    /// Wraps a superoperator after checking trace preservation and complete positivity.
    pub fn from_superop(superop: CMatrix, d_in: usize, d_out: usize, recipe: impl Into<String>) -> Result<Self> {
        if superop.nrows() != d_out * d_out || superop.ncols() != d_in * d_in {
            return Err(Error::DimensionMismatch(format!(
                "superoperator is {}x{}, expected {}x{}",
                superop.nrows(),
                superop.ncols(),
                d_out * d_out,
                d_in * d_in
            )));
        }
        let ch = Self {
            superop,
            d_in,
            d_out,
            recipe: recipe.into(),
        };
        ch.check_cptp()?;
        Ok(ch)
    }

    /// Builds `Φ` from its action on the matrix units `|i⟩⟨j|`.
    pub fn from_fn<F>(d_in: usize, d_out: usize, recipe: impl Into<String>, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Result<CMatrix>,
    {
        let mut s = CMatrix::zeros(d_out * d_out, d_in * d_in);
        for j in 0..d_in {
            for i in 0..d_in {
                let out = f(i, j)?;
                if out.nrows() != d_out || out.ncols() != d_out {
                    return Err(Error::DimensionMismatch(format!(
                        "channel output is {}x{}, expected {d_out}x{d_out}",
                        out.nrows(),
                        out.ncols()
                    )));
                }
                s.set_column(i + d_in * j, &vec_col(&out));
            }
        }
        Self::from_superop(s, d_in, d_out, recipe)
    }

    pub fn from_unitary(u: &Operator, recipe: impl Into<String>) -> Result<Self> {
        let deviation = u.unitarity_deviation();
        if deviation > 1e-10 {
            return Err(Error::NotUnitary { deviation });
        }
        let m = u.matrix();
        // vec(U ρ U†) = (conj(U) ⊗ U) vec(ρ)
        let s = m.conjugate().kronecker(m);
        Self::from_superop(s, u.dim(), u.dim(), recipe)
    }

    pub fn from_kraus(kraus: &[CMatrix], recipe: impl Into<String>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::DimensionMismatch("empty Kraus set".into()))?;
        let (d_out, d_in) = first.shape();
        let mut s = CMatrix::zeros(d_out * d_out, d_in * d_in);
        for k in kraus {
            s += k.conjugate().kronecker(k);
        }
        Self::from_superop(s, d_in, d_out, recipe)
    }

    pub fn identity(d: usize) -> Self {
        Self::from_unitary(&Operator::identity(&[d]), format!("identity({d})")).expect("identity is CPTP")
    }

    /// `ρ ↦ Tr(ρ) I/d`
    pub fn completely_depolarizing(d: usize) -> Self {
        Self::from_fn(d, d, format!("depolarizing({d})"), |i, j| {
            let scale = if i == j { 1.0 / d as f64 } else { 0.0 };
            Ok(CMatrix::identity(d, d) * C64::new(scale, 0.0))
        })
        .expect("depolarizing is CPTP")
    }

    pub fn superop(&self) -> &CMatrix {
        &self.superop
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn recipe(&self) -> &str {
        &self.recipe
    }

    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.nrows() != self.d_in || rho.ncols() != self.d_in {
            return Err(Error::DimensionMismatch(format!(
                "channel input is {}-dimensional, got {}x{}",
                self.d_in,
                rho.nrows(),
                rho.ncols()
            )));
        }
        Ok(unvec(&(&self.superop * vec_col(rho)), self.d_out))
    }

    /// `Φ(|i⟩⟨j|)`
    pub fn unit_image(&self, i: usize, j: usize) -> CMatrix {
        unvec(&self.superop.column(i + self.d_in * j).into_owned(), self.d_out)
    }

    /// `J = Σ |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)` with dims `[d_in, d_out]`.
    pub fn choi(&self) -> Operator {
        let (di, dout) = (self.d_in, self.d_out);
        let mut j = CMatrix::zeros(di * dout, di * dout);
        for c in 0..di {
            for r in 0..di {
                let block = self.unit_image(r, c);
                j.view_mut((r * dout, c * dout), (dout, dout)).copy_from(&block);
            }
        }
        Operator::new(j, vec![di, dout]).expect("choi dims")
    }

    pub fn from_choi(choi: &Operator, recipe: impl Into<String>) -> Result<Self> {
        let dims = choi.dims();
        if dims.len() != 2 {
            return Err(Error::DimensionMismatch("Choi matrix needs dims [d_in, d_out]".into()));
        }
        let (di, dout) = (dims[0], dims[1]);
        let m = choi.matrix();
        Self::from_fn(di, dout, recipe, |i, j| {
            Ok(m.view((i * dout, j * dout), (dout, dout)).into_owned())
        })
    }

    /// Trace-preservation and complete-positivity check.
    pub fn check_cptp(&self) -> Result<()> {
        for j in 0..self.d_in {
            for i in 0..self.d_in {
                let t = self.unit_image(i, j).trace();
                let want = if i == j { ONE } else { ZERO };
                let gap = (t - want).norm();
                if gap > TP_TOL {
                    return Err(Error::NotCptp {
                        property: "trace preservation",
                        detail: format!("Tr Φ(|{i}><{j}|) off by {gap:.3e}"),
                    });
                }
            }
        }
        let choi = self.choi();
        let herm = choi.hermiticity_deviation();
        if herm > CP_TOL {
            return Err(Error::NotCptp {
                property: "complete positivity",
                detail: format!("Choi matrix not Hermitian (deviation {herm:.3e})"),
            });
        }
        let min = hermitian_spectrum(choi.matrix())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min < -CP_TOL {
            return Err(Error::NotCptp {
                property: "complete positivity",
                detail: format!("Choi matrix eigenvalue {min:.3e}"),
            });
        }
        Ok(())
    }

    /// `Φ₂ ∘ Φ₁` with `self = Φ₁`.
    pub fn then(&self, next: &Channel) -> Result<Channel> {
        if self.d_out != next.d_in {
            return Err(Error::DimensionMismatch(format!(
                "cannot feed a {}-dimensional output into a {}-dimensional input",
                self.d_out, next.d_in
            )));
        }
        Self::from_superop(
            &next.superop * &self.superop,
            self.d_in,
            next.d_out,
            format!("{} ; {}", self.recipe, next.recipe),
        )
    }

    pub fn max_abs_diff(&self, other: &Channel) -> Result<f64> {
        if self.superop.shape() != other.superop.shape() {
            return Err(Error::DimensionMismatch("channels have different shapes".into()));
        }
        Ok(max_abs_diff(&self.superop, &other.superop))
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{} -> {}]", self.recipe, self.d_in, self.d_out)
    }
}

fn vec_col(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

fn unvec(v: &CVector, d: usize) -> CMatrix {
    CMatrix::from_column_slice(d, d, v.as_slice())
}

pub fn superoperator_to_choi(ch: &Channel) -> Operator {
    ch.choi()
}

/// `(|0⟩ + i|1⟩)/√2` as a density operator.
pub fn plus_y() -> Operator {
    let v = crate::gates::eigenstate(crate::gates::Axis::Y, crate::gates::Sign::Plus);
    Operator::pure(&v, &[2]).expect("qubit state")
}

pub fn ket0() -> Operator {
    Operator::pure(&basis(2, 0), &[2]).expect("qubit state")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Symbolic,
    Fock { n_max: Option<usize> },
}

impl Backend {
    pub fn tag(&self) -> &'static str {
        match self {
            Backend::Symbolic => "symbolic",
            Backend::Fock { .. } => "fock",
        }
    }
}

/// Factor in the printed environment-dephasing exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DephasingForm {
    /// `e^{−γ_E (n−m)²/2}`
    #[default]
    Gaussian,
    /// `e^{−√γ_E (n−m)²/2}`
    SqrtCompat,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    Gate { gate: UdwGate, qubit: usize },
    /// Number-operator dephasing of the field; Fock backend only.
    FieldDephasing { gamma_e: f64, form: DephasingForm },
}

/// Qubits plus one field mode. In the Fock backend the field sits right
/// after qubit 0, giving the register `[A, φ, B, …]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldCircuit {
    pub n_qubits: usize,
    pub input: usize,
    /// Initial states of all non-input qubits, by register index.
    pub fixed: Vec<(usize, Operator)>,
    pub field_center: C64,
    pub steps: Vec<Step>,
    pub output: usize,
}

impl FieldCircuit {
    fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.n_qubits];
        if self.input >= self.n_qubits || self.output >= self.n_qubits {
            return Err(Error::FactorIndex {
                index: self.input.max(self.output),
                count: self.n_qubits,
            });
        }
        seen[self.input] = true;
        for (q, rho) in &self.fixed {
            if *q >= self.n_qubits || seen[*q] {
                return Err(Error::InvalidParams(format!("qubit {q} initialized twice or out of range")));
            }
            rho.check_density()?;
            seen[*q] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidParams("every non-input qubit needs an initial state".into()));
        }
        Ok(())
    }

    /// Pure-state ensemble of the fixed qubits: (weight, register vectors by index).
    fn fixed_ensemble(&self) -> Vec<(f64, Vec<(usize, CVector)>)> {
        let mut out = vec![(1.0, Vec::new())];
        for (q, rho) in &self.fixed {
            let spec = rho.eigh();
            let mut next = Vec::new();
            for (w, parts) in &out {
                for (k, &p) in spec.eigenvalues.iter().enumerate() {
                    if p <= 1e-15 {
                        continue;
                    }
                    let mut parts = parts.clone();
                    parts.push((*q, spec.eigenvectors.column(k).into_owned()));
                    next.push((w * p, parts));
                }
            }
            out = next;
        }
        out
    }

    fn register_vector(&self, input_bit: usize, parts: &[(usize, CVector)]) -> CVector {
        let mut factors = vec![basis(2, 0); self.n_qubits];
        factors[self.input] = basis(2, input_bit);
        for (q, v) in parts {
            factors[*q] = v.clone();
        }
        factors.iter().skip(1).fold(factors[0].clone(), |acc, f| kron_vec(&acc, f))
    }

    /// Largest coherent amplitude the field can reach.
    pub fn field_reach(&self) -> f64 {
        self.steps.iter().fold(self.field_center.norm(), |acc, s| match s {
            Step::Gate { gate, .. } => acc + gate.max_displacement(),
            Step::FieldDephasing { .. } => acc,
        })
    }

    pub fn required_levels(&self) -> usize {
        adaptive_levels(self.field_reach())
    }

    /// `Φ(|i⟩⟨j|)` for all `i, j`, on the output qubit.
    pub fn evaluate(&self, backend: Backend) -> Result<[[CMatrix; 2]; 2]> {
        self.validate()?;
        match backend {
            Backend::Symbolic => self.evaluate_symbolic(),
            Backend::Fock { n_max } => self.evaluate_fock(n_max),
        }
    }

    fn reduce_to_output(&self, m: CMatrix) -> Result<CMatrix> {
        let op = Operator::new(m, vec![2; self.n_qubits])?;
        Ok(op.partial_trace(&[self.output])?.into_matrix())
    }

    fn evaluate_symbolic(&self) -> Result<[[CMatrix; 2]; 2]> {
        let mut out: [[CMatrix; 2]; 2] = Default::default();
        for row in out.iter_mut() {
            for m in row.iter_mut() {
                *m = CMatrix::zeros(2, 2);
            }
        }
        for (w, parts) in self.fixed_ensemble() {
            let mut kets = Vec::with_capacity(2);
            for bit in 0..2 {
                let mut psi = CoherentKet::product(self.register_vector(bit, &parts), self.field_center);
                for step in &self.steps {
                    match step {
                        Step::Gate { gate, qubit } => psi = psi.apply(gate, *qubit),
                        Step::FieldDephasing { .. } => {
                            return Err(Error::Unsupported(
                                "field dephasing needs the Fock backend".into(),
                            ))
                        }
                    }
                }
                kets.push(psi);
            }
            for i in 0..2 {
                for j in 0..2 {
                    let m = kets[i].field_traced_outer(&kets[j]);
                    out[i][j] += self.reduce_to_output(m)? * C64::new(w, 0.0);
                }
            }
        }
        Ok(out)
    }

    fn evaluate_fock(&self, n_max: Option<usize>) -> Result<[[CMatrix; 2]; 2]> {
        let required = self.required_levels();
        let n = n_max.unwrap_or(required);
        if n < required {
            return Err(Error::TruncationTooSmall {
                requested: n,
                required,
            });
        }
        let mut dims = vec![2, n];
        dims.extend(std::iter::repeat(2).take(self.n_qubits - 1));
        let slot = |q: usize| if q == 0 { 0 } else { q + 1 };

        let mut fock_cache: Vec<(ModelParams, FockRep)> = Vec::new();
        enum Op {
            Unitary(CMatrix),
            Kraus(Vec<CMatrix>),
        }
        let mut ops = Vec::new();
        for step in &self.steps {
            match step {
                Step::Gate { gate, qubit } => {
                    let fock = match fock_cache.iter().find(|(p, _)| *p == gate.params) {
                        Some((_, f)) => f,
                        None => {
                            fock_cache.push((gate.params, FockRep::new(&gate.params, n)?));
                            &fock_cache.last().unwrap().1
                        }
                    };
                    ops.push(Op::Unitary(gate.embed(fock, &dims, slot(*qubit), 1)));
                }
                Step::FieldDephasing { gamma_e, form } => {
                    let kraus = dephasing_kraus(*gamma_e, *form, n)
                        .into_iter()
                        .map(|k| {
                            let factors: Vec<CMatrix> = dims
                                .iter()
                                .enumerate()
                                .map(|(s, &d)| if s == 1 { k.clone() } else { CMatrix::identity(d, d) })
                                .collect();
                            kron_list(&factors)
                        })
                        .collect();
                    ops.push(Op::Kraus(kraus));
                }
            }
        }

        let mut out: [[CMatrix; 2]; 2] = Default::default();
        for row in out.iter_mut() {
            for m in row.iter_mut() {
                *m = CMatrix::zeros(2, 2);
            }
        }
        let vacuum = crate::field::coherent_vector(self.field_center, n);
        for (w, parts) in self.fixed_ensemble() {
            // one entry per Kraus branch, holding the evolved |0⟩ and |1⟩ inputs
            let mut branches: Vec<[CVector; 2]> = Vec::new();
            let start = |bit: usize| -> CVector {
                let reg = self.register_vector(bit, &parts);
                // reorder to [A, φ, rest]
                let half = reg.len() / 2;
                let a0 = reg.rows(0, half).into_owned();
                let a1 = reg.rows(half, half).into_owned();
                let mut v = kron_vec(&basis(2, 0), &kron_vec(&vacuum, &a0));
                v += kron_vec(&basis(2, 1), &kron_vec(&vacuum, &a1));
                v
            };
            branches.push([start(0), start(1)]);
            for op in &ops {
                match op {
                    Op::Unitary(u) => {
                        for b in branches.iter_mut() {
                            b[0] = u * &b[0];
                            b[1] = u * &b[1];
                        }
                    }
                    Op::Kraus(ks) => {
                        branches = branches
                            .iter()
                            .flat_map(|b| ks.iter().map(move |k| [k * &b[0], k * &b[1]]))
                            .collect();
                    }
                }
            }
            for b in &branches {
                for i in 0..2 {
                    for j in 0..2 {
                        let full = Operator::new(&b[i] * b[j].adjoint(), dims.clone())?;
                        let m = full.partial_trace(&[slot(self.output)])?.into_matrix();
                        out[i][j] += m * C64::new(w, 0.0);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn to_channel(&self, backend: Backend, recipe: impl Into<String>) -> Result<Channel> {
        let images = self.evaluate(backend)?;
        Channel::from_fn(2, 2, recipe, |i, j| Ok(images[i][j].clone()))
    }
}

/// Diagonal Kraus operators of `ρ_nm ↦ ρ_nm f(n − m)` on `n` levels.
pub fn dephasing_kraus(gamma_e: f64, form: DephasingForm, n: usize) -> Vec<CMatrix> {
    let rate = match form {
        DephasingForm::Gaussian => gamma_e,
        DephasingForm::SqrtCompat => gamma_e.sqrt(),
    };
    let kernel = nalgebra::DMatrix::<f64>::from_fn(n, n, |r, c| {
        let k = r as f64 - c as f64;
        (-0.5 * rate * k * k).exp()
    });
    let eig = SymmetricEigen::new(kernel);
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    eig.eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 1e-16 * top)
        .map(|(k, &l)| {
            let col = eig.eigenvectors.column(k);
            CMatrix::from_diagonal(&CVector::from_iterator(
                n,
                col.iter().map(|&v| C64::new(v * l.sqrt(), 0.0)),
            ))
        })
        .collect()
}

/// Applies the number-operator dephasing map to a field density matrix.
pub fn dephase_field(rho: &CMatrix, gamma_e: f64, form: DephasingForm) -> CMatrix {
    let rate = match form {
        DephasingForm::Gaussian => gamma_e,
        DephasingForm::SqrtCompat => gamma_e.sqrt(),
    };
    CMatrix::from_fn(rho.nrows(), rho.ncols(), |r, c| {
        let k = r as f64 - c as f64;
        rho[(r, c)] * (-0.5 * rate * k * k).exp()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MediatedKind {
    Qst2,
    Swap3,
    Cnot1,
}

/// Alice → Bob through an intermediary qubit F, register `[A, F, B]`.
pub fn qubit_mediated_channel(kind: MediatedKind, frank: &CVector, bob: &Operator) -> Result<Channel> {
    let norm = frank.norm();
    if frank.len() != 2 || (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm });
    }
    bob.check_density()?;
    let pair = |k: GateKind, first: usize| -> CMatrix {
        let g = build_gate(k).into_matrix();
        if first == 0 {
            g.kronecker(&CMatrix::identity(2, 2))
        } else {
            CMatrix::identity(2, 2).kronecker(&g)
        }
    };
    let seq = match kind {
        MediatedKind::Qst2 => vec![pair(GateKind::Qst, 0), pair(GateKind::Qst, 1)],
        MediatedKind::Swap3 => vec![
            pair(GateKind::Swap, 0),
            pair(GateKind::Swap, 1),
            pair(GateKind::Swap, 0),
        ],
        MediatedKind::Cnot1 => vec![pair(GateKind::Cnot12, 0), pair(GateKind::Qst, 1)],
    };
    let u = seq.iter().fold(CMatrix::identity(8, 8), |acc, g| g * acc);
    let f = Operator::pure(frank, &[2])?;
    let env = f.kron(bob);
    let recipe = format!("Qubit{kind:?}(frank={:?})", frank.as_slice());
    Channel::from_fn(2, 2, recipe, |i, j| {
        let unit = basis(2, i) * basis(2, j).adjoint();
        let rho = unit.kronecker(env.matrix());
        let evolved = &u * rho * u.adjoint();
        Ok(Operator::new(evolved, vec![2, 2, 2])?.partial_trace(&[2])?.into_matrix())
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum ChannelSpec {
    FieldQst { params: ModelParams, bob: Operator },
    QubitQst { frank: CVector, bob: Operator },
    QubitSwap { frank: CVector, bob: Operator },
    FieldCnot1 { params: ModelParams, bob: Operator },
    QubitCnot1 { frank: CVector, bob: Operator },
    FieldCnot2q { params: ModelParams, bob: Operator },
    QubitCnot2q { bob: Operator },
    FieldHadamard { params: ModelParams },
    /// Unitary channel of a canonical single- or two-qubit gate.
    QubitGate(GateKind),
    /// FieldQST with number-operator dephasing between the two gates.
    FieldQstDephased {
        params: ModelParams,
        bob: Operator,
        gamma_e: f64,
        form: DephasingForm,
    },
    /// Only the encoding controlled unitary, output on the field's coherent span.
    FieldEncode { params: ModelParams },
}

impl ChannelSpec {
    pub fn field_qst(params: ModelParams) -> Self {
        ChannelSpec::FieldQst { params, bob: plus_y() }
    }

    pub fn qubit_qst() -> Self {
        ChannelSpec::QubitQst {
            frank: basis(2, 0),
            bob: ket0(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ChannelSpec::FieldQst { .. } => "FieldQST",
            ChannelSpec::QubitQst { .. } => "QubitQST",
            ChannelSpec::QubitSwap { .. } => "QubitSWAP3",
            ChannelSpec::FieldCnot1 { .. } => "FieldCNOT1",
            ChannelSpec::QubitCnot1 { .. } => "QubitCNOT1",
            ChannelSpec::FieldCnot2q { .. } => "FieldCNOT2q",
            ChannelSpec::QubitCnot2q { .. } => "QubitCNOT2q",
            ChannelSpec::FieldHadamard { .. } => "FieldHadamard",
            ChannelSpec::QubitGate(_) => "QubitGate",
            ChannelSpec::FieldQstDephased { .. } => "FieldQSTDephased",
            ChannelSpec::FieldEncode { .. } => "FieldEncode",
        }
    }

    fn params_label(p: &ModelParams) -> String {
        format!("lambda_phi={}, gamma={}", p.lambda_phi, p.gamma)
    }

    /// Field circuit for the field-mediated specs.
    pub fn circuit(&self) -> Option<FieldCircuit> {
        let two = |params: &ModelParams, bob: &Operator, a: UdwKind, b: UdwKind, mid: Option<Step>| {
            let mut steps = vec![Step::Gate {
                gate: udw_gate(a, params),
                qubit: 0,
            }];
            steps.extend(mid);
            steps.push(Step::Gate {
                gate: udw_gate(b, params),
                qubit: 1,
            });
            FieldCircuit {
                n_qubits: 2,
                input: 0,
                fixed: vec![(1, bob.clone())],
                field_center: ZERO,
                steps,
                output: 1,
            }
        };
        match self {
            ChannelSpec::FieldQst { params, bob } => Some(two(params, bob, UdwKind::Qst, UdwKind::QstDag, None)),
            ChannelSpec::FieldCnot1 { params, bob } => Some(two(params, bob, UdwKind::ZPhi, UdwKind::XPi, None)),
            ChannelSpec::FieldCnot2q { params, bob } => {
                Some(two(params, bob, UdwKind::ZPiXPhi, UdwKind::QstDag, None))
            }
            ChannelSpec::FieldQstDephased {
                params,
                bob,
                gamma_e,
                form,
            } => Some(two(
                params,
                bob,
                UdwKind::Qst,
                UdwKind::QstDag,
                Some(Step::FieldDephasing {
                    gamma_e: *gamma_e,
                    form: *form,
                }),
            )),
            ChannelSpec::FieldHadamard { params } => Some(FieldCircuit {
                n_qubits: 1,
                input: 0,
                fixed: vec![],
                field_center: ZERO,
                steps: vec![
                    Step::Gate {
                        gate: udw_gate(UdwKind::ZPhi, params),
                        qubit: 0,
                    },
                    Step::Gate {
                        gate: udw_gate(UdwKind::H, params),
                        qubit: 0,
                    },
                ],
                output: 0,
            }),
            _ => None,
        }
    }

    fn recipe(&self, backend: Backend) -> String {
        let detail = match self {
            ChannelSpec::FieldQst { params, .. }
            | ChannelSpec::FieldCnot1 { params, .. }
            | ChannelSpec::FieldCnot2q { params, .. }
            | ChannelSpec::FieldHadamard { params }
            | ChannelSpec::FieldEncode { params } => Self::params_label(params),
            ChannelSpec::FieldQstDephased { params, gamma_e, .. } => {
                format!("{}, gamma_E={gamma_e}", Self::params_label(params))
            }
            ChannelSpec::QubitGate(k) => k.name().to_string(),
            _ => String::new(),
        };
        format!("{}({detail}) backend={}", self.name(), backend.tag())
    }
}

/// Builds a CPTP channel; qubit-only specs ignore the backend.
pub fn build_channel(spec: &ChannelSpec, backend: Backend) -> Result<Channel> {
    let recipe = spec.recipe(backend);
    if let Some(circuit) = spec.circuit() {
        return circuit.to_channel(backend, recipe);
    }
    match spec {
        ChannelSpec::QubitQst { frank, bob } => qubit_mediated_channel(MediatedKind::Qst2, frank, bob),
        ChannelSpec::QubitSwap { frank, bob } => qubit_mediated_channel(MediatedKind::Swap3, frank, bob),
        ChannelSpec::QubitCnot1 { frank, bob } => qubit_mediated_channel(MediatedKind::Cnot1, frank, bob),
        ChannelSpec::QubitCnot2q { bob } => {
            bob.check_density()?;
            let u = build_gate(GateKind::Cnot12).into_matrix();
            Channel::from_fn(2, 2, recipe, |i, j| {
                let rho = (basis(2, i) * basis(2, j).adjoint()).kronecker(bob.matrix());
                let out = &u * rho * u.adjoint();
                Ok(Operator::new(out, vec![2, 2])?.partial_trace(&[1])?.into_matrix())
            })
        }
        ChannelSpec::QubitGate(k) => Channel::from_unitary(&build_gate(*k), recipe),
        ChannelSpec::FieldEncode { params } => field_encode_channel(params, backend, recipe),
        _ => unreachable!("field specs handled by their circuit"),
    }
}

/// Builds a spec in both backends and fails on disagreement above [`BACKEND_TOL`].
pub fn build_checked(spec: &ChannelSpec, n_max: Option<usize>) -> Result<(Channel, f64)> {
    let sym = build_channel(spec, Backend::Symbolic)?;
    if spec.circuit().is_none() {
        return Ok((sym, 0.0));
    }
    let fock = build_channel(spec, Backend::Fock { n_max })?;
    let deviation = sym.max_abs_diff(&fock)?;
    if deviation > BACKEND_TOL {
        return Err(Error::BackendDisagreement {
            deviation,
            limit: BACKEND_TOL,
        });
    }
    Ok((sym, deviation))
}

/// `ρ_A ↦ Tr_A[U^{Zφ}(ρ_A ⊗ |0⟩⟨0|)U^{Zφ†}]`, written in the orthonormal
/// (Löwdin) basis of `span{|−α⟩, |+α⟩}`.
fn field_encode_channel(params: &ModelParams, backend: Backend, recipe: String) -> Result<Channel> {
    if backend != Backend::Symbolic {
        return Err(Error::Unsupported(
            "the field-output encode channel is only built symbolically".into(),
        ));
    }
    let gate = udw_gate(UdwKind::ZPhi, params);
    let kets: Vec<CoherentKet> = (0..2)
        .map(|bit| CoherentKet::product(basis(2, bit), ZERO).apply(&gate, 0))
        .collect();
    let centers = [-params.alpha_phi(), params.alpha_phi()];
    let gram = CMatrix::from_fn(2, 2, |r, c| crate::field::overlap(centers[r], centers[c]));
    let sqrt_gram = {
        let spec = hermitian_spectrum(&gram);
        let d = CVector::from_iterator(2, spec.eigenvalues.iter().map(|&l| C64::new(l.max(0.0).sqrt(), 0.0)));
        &spec.eigenvectors * CMatrix::from_diagonal(&d) * spec.eigenvectors.adjoint()
    };
    // coefficient of |c_k⟩ in each output ket
    let coeffs = |psi: &CoherentKet| -> Result<CMatrix> {
        let mut m = CMatrix::zeros(2, 2);
        for (c, v) in &psi.terms {
            let k = centers
                .iter()
                .position(|x| (x - c).norm() < 1e-12)
                .ok_or_else(|| Error::Unsupported("unexpected field center".into()))?;
            m.set_row(k, &v.transpose());
        }
        Ok(m)
    };
    let cs: Vec<CMatrix> = kets.iter().map(coeffs).collect::<Result<_>>()?;
    Channel::from_fn(2, 2, recipe, |i, j| {
        // rows: field coefficient, cols: qubit A component; Tr_A contracts the qubit index
        let m = &cs[i] * cs[j].adjoint();
        Ok(&sqrt_gram * m * &sqrt_gram)
    })
}

/// QST applied to qubit A of a `(C, A)` register with the field in any state.
pub fn qst_output_state(params: &ModelParams, input: &CoherentJointState) -> Result<CoherentJointState> {
    if input.n_qubits != 2 {
        return Err(Error::DimensionMismatch(format!(
            "QST output needs a (C, A) register, got {} qubits",
            input.n_qubits
        )));
    }
    Ok(input.apply(&udw_gate(UdwKind::Qst, params), 1))
}
