//! Canonical qubit gates assembled from Pauli-basis projectors.
//!
//! Qubit 1 is the leftmost tensor factor. `CNOT12` is controlled by qubit 1,
//! `CNOT21_*` by qubit 2.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::fmt;

use crate::error::{Error, Result};
use crate::operator::{basis, ket, CVector, Operator, C64, I, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Eigenvalue label `μ ∈ {+1, −1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    /// `(−μ + 1)/2`: 0 for `+`, 1 for `−`.
    pub fn flip_power(self) -> u32 {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// Eigenvector `|μ_axis⟩`; `|+_z⟩ = |0⟩`.
pub fn eigenstate(axis: Axis, sign: Sign) -> CVector {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let m = sign.value();
    match axis {
        Axis::Z => basis(2, sign.flip_power() as usize),
        Axis::X => ket(&[s, s * m]),
        Axis::Y => ket(&[s, I * s * m]),
    }
}

/// `P^μ_axis = |μ_axis⟩⟨μ_axis|`.
pub fn projector(axis: Axis, sign: Sign) -> Operator {
    let v = eigenstate(axis, sign);
    Operator::pure(&v, &[2]).expect("2-dim projector")
}

/// `σ_axis = Σ_μ μ P^μ_axis`.
pub fn pauli(axis: Axis) -> Operator {
    projector(axis, Sign::Plus).sub(&projector(axis, Sign::Minus)).expect("same dims")
}

fn power(op: &Operator, k: u32) -> Operator {
    (0..k).fold(Operator::identity(op.dims()), |acc, _| acc.mul(op).expect("same dims"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    X,
    Y,
    Z,
    Cnot12,
    Cnot21X,
    Cnot21Z,
    Qst,
    Swap,
    H,
    S,
    T,
}

impl GateKind {
    pub const ALL: [GateKind; 11] = [
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::Cnot12,
        GateKind::Cnot21X,
        GateKind::Cnot21Z,
        GateKind::Qst,
        GateKind::Swap,
        GateKind::H,
        GateKind::S,
        GateKind::T,
    ];

    pub fn n_qubits(self) -> usize {
        match self {
            GateKind::X | GateKind::Y | GateKind::Z | GateKind::H | GateKind::S | GateKind::T => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::Cnot12 => "CNOT12",
            GateKind::Cnot21X => "CNOT21_X",
            GateKind::Cnot21Z => "CNOT21_Z",
            GateKind::Qst => "QST",
            GateKind::Swap => "SWAP",
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::T => "T",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `Σ_μ P^μ_z ⊗ X^{(−μ+1)/2}`
fn cnot12() -> Operator {
    let x = pauli(Axis::X);
    Sign::BOTH
        .iter()
        .map(|&m| projector(Axis::Z, m).kron(&power(&x, m.flip_power())))
        .reduce(|a, b| a.add(&b).unwrap())
        .unwrap()
}

/// `Σ_μ X^{(−μ+1)/2} ⊗ P^μ_z`
fn cnot21_x() -> Operator {
    let x = pauli(Axis::X);
    Sign::BOTH
        .iter()
        .map(|&m| power(&x, m.flip_power()).kron(&projector(Axis::Z, m)))
        .reduce(|a, b| a.add(&b).unwrap())
        .unwrap()
}

/// `Σ_μ P^μ_x ⊗ Z^{(−μ+1)/2}`
fn cnot21_z() -> Operator {
    let z = pauli(Axis::Z);
    Sign::BOTH
        .iter()
        .map(|&m| projector(Axis::X, m).kron(&power(&z, m.flip_power())))
        .reduce(|a, b| a.add(&b).unwrap())
        .unwrap()
}

pub fn build_gate(kind: GateKind) -> Operator {
    match kind {
        GateKind::X => pauli(Axis::X),
        GateKind::Y => pauli(Axis::Y),
        GateKind::Z => pauli(Axis::Z),
        GateKind::Cnot12 => cnot12(),
        GateKind::Cnot21X => cnot21_x(),
        GateKind::Cnot21Z => cnot21_z(),
        // CNOT(1,2) first, then CNOT(2,1): moves qubit 1 onto qubit 2
        GateKind::Qst => cnot21_z().mul(&cnot12()).unwrap(),
        GateKind::Swap => cnot21_z().mul(&cnot12()).unwrap().mul(&cnot21_z()).unwrap(),
        GateKind::H => pauli(Axis::X)
            .add(&pauli(Axis::Z))
            .unwrap()
            .scale(C64::new(FRAC_1_SQRT_2, 0.0)),
        GateKind::S => phase_gate(C64::new(0.0, 1.0)),
        GateKind::T => phase_gate(C64::from_polar(1.0, FRAC_PI_4)),
    }
}

/// `P^+_z + e^{iθ} P^−_z`
fn phase_gate(phase: C64) -> Operator {
    projector(Axis::Z, Sign::Plus)
        .add(&projector(Axis::Z, Sign::Minus).scale(phase))
        .unwrap()
}

/// One row of a printed truth table.
#[derive(Clone, Debug)]
pub struct TruthRow {
    pub input: String,
    /// Output as printed (unnormalized allowed).
    pub expected: CVector,
    pub computed: CVector,
    /// `computed = phase · expected` (after normalization) when the row matches.
    pub relative_phase: C64,
    pub matches: bool,
}

impl TruthRow {
    /// A matching row whose relative phase differs from 1.
    pub fn phase_flagged(&self) -> bool {
        self.matches && (self.relative_phase - ONE).norm() > 1e-12
    }
}

#[derive(Clone, Debug)]
pub struct TruthTable {
    pub gate: GateKind,
    pub rows: Vec<TruthRow>,
}

impl TruthTable {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.matches)
    }

    pub fn first_mismatch(&self) -> Option<&TruthRow> {
        self.rows.iter().find(|r| !r.matches)
    }
}

fn printed_table(kind: GateKind) -> Option<Vec<(&'static str, CVector)>> {
    let k = |i: usize, n: usize| basis(n, i);
    let scaled = |v: CVector, s: C64| v * s;
    let rows = match kind {
        GateKind::X => vec![("|0>", k(1, 2)), ("|1>", k(0, 2))],
        GateKind::Z => vec![("|0>", k(0, 2)), ("|1>", scaled(k(1, 2), -ONE))],
        GateKind::Y => vec![("|0>", scaled(k(1, 2), -I)), ("|1>", scaled(k(0, 2), I))],
        GateKind::Cnot12 => vec![
            ("|00>", k(0, 4)),
            ("|01>", k(1, 4)),
            ("|10>", k(3, 4)),
            ("|11>", k(2, 4)),
        ],
        // printed as (target, control)
        GateKind::Cnot21X | GateKind::Cnot21Z => vec![
            ("|00>", k(0, 4)),
            ("|01>", k(3, 4)),
            ("|10>", k(2, 4)),
            ("|11>", k(1, 4)),
        ],
        GateKind::H => vec![
            ("|0>", ket(&[ONE, ONE])),
            ("|1>", ket(&[ONE, -ONE])),
        ],
        _ => return None,
    };
    Some(rows)
}

/// Reproduces a printed truth table, comparing rows up to a global phase.
pub fn verify_truth_table(kind: GateKind) -> Result<TruthTable> {
    table_against(kind, &build_gate(kind))
}

fn table_against(kind: GateKind, gate: &Operator) -> Result<TruthTable> {
    let printed = printed_table(kind)
        .ok_or_else(|| Error::Unsupported(format!("no printed truth table for {kind}")))?;
    let n = gate.dim();
    let rows = printed
        .into_iter()
        .enumerate()
        .map(|(i, (label, expected))| {
            let computed = gate.apply(&basis(n, i));
            let e = expected.normalize();
            let overlap = e.dotc(&computed);
            let matches = (overlap.norm() - 1.0).abs() < 1e-12
                && (&computed - &e * overlap).norm() < 1e-12;
            TruthRow {
                input: label.to_string(),
                expected,
                computed,
                relative_phase: if overlap.norm() > 0.0 { overlap / overlap.norm() } else { ZERO },
                matches,
            }
        })
        .collect();
    Ok(TruthTable { gate: kind, rows })
}
