//! Dense complex operators with tensor-factor bookkeeping.
//!
//! Every [`Operator`] carries the ordered list of tensor-factor dimensions it
//! lives on, so partial traces over mixed qubit/Fock registers can map indices
//! without extra context.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Tolerances used by the invariant checks.
pub const UNITARY_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const EIGEN_CLAMP: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    mat: CMatrix,
    dims: Vec<usize>,
}

/// Eigen-decomposition of a Hermitian operator, eigenvalues descending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> CMatrix {
        let lam = CVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&l| C64::new(l, 0.0)),
        );
        let v = &self.eigenvectors;
        v * CMatrix::from_diagonal(&lam) * v.adjoint()
    }
}

impl Operator {
    pub fn new(mat: CMatrix, dims: Vec<usize>) -> Result<Self> {
        let prod: usize = dims.iter().product();
        if dims.is_empty() || dims.contains(&0) || prod != mat.nrows() || prod != mat.ncols() {
            return Err(Error::FactorMismatch {
                dims,
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        Ok(Self { mat, dims })
    }

    /// Square matrix treated as a single tensor factor.
    pub fn from_matrix(mat: CMatrix) -> Self {
        assert!(mat.is_square(), "operator matrices must be square");
        let d = mat.nrows();
        Self { mat, dims: vec![d] }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        Self::from_matrix(CMatrix::from_fn(n, n, |r, c| C64::new(rows[r][c], 0.0)))
    }

    pub fn identity(dims: &[usize]) -> Self {
        let d = dims.iter().product();
        Self {
            mat: CMatrix::identity(d, d),
            dims: dims.to_vec(),
        }
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let d = dims.iter().product();
        Self {
            mat: CMatrix::zeros(d, d),
            dims: dims.to_vec(),
        }
    }

    /// Projector `|ψ⟩⟨ψ|` onto a state vector living on `dims`.
    pub fn pure(psi: &CVector, dims: &[usize]) -> Result<Self> {
        Self::new(psi * psi.adjoint(), dims.to_vec())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn entry(&self, r: usize, c: usize) -> C64 {
        self.mat[(r, c)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            mat: self.mat.adjoint(),
            dims: self.dims.clone(),
        }
    }

    /// Matrix product; factor layout of `self` is kept.
    pub fn mul(&self, rhs: &Operator) -> Result<Self> {
        if self.dims != rhs.dims {
            return Err(Error::DimensionMismatch(format!(
                "product of {:?} and {:?}",
                self.dims, rhs.dims
            )));
        }
        Ok(Self {
            mat: &self.mat * &rhs.mat,
            dims: self.dims.clone(),
        })
    }

    pub fn add(&self, rhs: &Operator) -> Result<Self> {
        if self.dims != rhs.dims {
            return Err(Error::DimensionMismatch(format!(
                "sum of {:?} and {:?}",
                self.dims, rhs.dims
            )));
        }
        Ok(Self {
            mat: &self.mat + &rhs.mat,
            dims: self.dims.clone(),
        })
    }

    pub fn sub(&self, rhs: &Operator) -> Result<Self> {
        self.add(&rhs.scale(-ONE))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            mat: &self.mat * s,
            dims: self.dims.clone(),
        }
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, u: &Operator) -> Result<Self> {
        Ok(u.mul(self)?.mul(&u.adjoint())?)
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.mat * v
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// Kronecker product; the factor lists concatenate.
    pub fn kron(&self, other: &Operator) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self {
            mat: self.mat.kronecker(&other.mat),
            dims,
        }
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        max_abs_diff(&self.mat, &other.mat)
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.dim();
        max_abs_diff(&(self.mat.adjoint() * &self.mat), &CMatrix::identity(d, d))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() < tol
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        max_abs_diff(&self.mat, &self.mat.adjoint())
    }

    /// `(A + A†)/2`.
    pub fn hermitize(&self) -> Self {
        Self {
            mat: (&self.mat + self.mat.adjoint()) * C64::new(0.5, 0.0),
            dims: self.dims.clone(),
        }
    }

    /// Validates the density invariants: Hermitian, unit trace, PSD up to the clamp.
    pub fn check_density(&self) -> Result<()> {
        let h = self.hermiticity_deviation();
        if h > HERMITIAN_TOL {
            return Err(Error::NotDensity(format!("not Hermitian (deviation {h:.3e})")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::NotDensity(format!("trace {tr} differs from 1")));
        }
        let min = self.eigh().eigenvalues.last().copied().unwrap_or(0.0);
        if min < -EIGEN_CLAMP {
            return Err(Error::NotDensity(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    /// Spectrum of the Hermitian part, eigenvalues sorted descending.
    pub fn eigh(&self) -> Spectrum {
        hermitian_spectrum(&self.hermitize().mat)
    }

    /// Sum of singular values.
    pub fn trace_norm(&self) -> f64 {
        trace_norm(&self.mat)
    }

    /// Traces out every factor not listed in `keep`; kept factors retain their order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        let n = self.dims.len();
        let mut keep_sorted: Vec<usize> = keep.to_vec();
        keep_sorted.sort_unstable();
        keep_sorted.dedup();
        if let Some(&bad) = keep_sorted.iter().find(|&&k| k >= n) {
            return Err(Error::FactorIndex {
                index: bad,
                count: n,
            });
        }
        let kept_dims: Vec<usize> = keep_sorted.iter().map(|&k| self.dims[k]).collect();
        let traced: Vec<usize> = (0..n).filter(|k| !keep_sorted.contains(k)).collect();
        let traced_dims: Vec<usize> = traced.iter().map(|&k| self.dims[k]).collect();
        let d_keep: usize = kept_dims.iter().product();
        let d_trace: usize = traced_dims.iter().product();

        // strides of the full (row-major over factors) index
        let mut strides = vec![1usize; n];
        for k in (0..n.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        let compose = |kept_idx: usize, traced_idx: usize| -> usize {
            let mut full = 0;
            let mut rem = kept_idx;
            for (pos, &k) in keep_sorted.iter().enumerate().rev() {
                let d = kept_dims[pos];
                full += (rem % d) * strides[k];
                rem /= d;
            }
            let mut rem = traced_idx;
            for (pos, &k) in traced.iter().enumerate().rev() {
                let d = traced_dims[pos];
                full += (rem % d) * strides[k];
                rem /= d;
            }
            full
        };
        let index: Vec<Vec<usize>> = (0..d_keep)
            .map(|kk| (0..d_trace).map(|t| compose(kk, t)).collect())
            .collect();
        let out = CMatrix::from_fn(d_keep, d_keep, |r, c| {
            index[r]
                .iter()
                .zip(&index[c])
                .map(|(&i, &j)| self.mat[(i, j)])
                .sum()
        });
        Self::new(out, kept_dims)
    }
}

/// Kronecker product of a sequence of operators, left factor first.
pub fn kron_all(ops: &[&Operator]) -> Operator {
    let (first, rest) = ops.split_first().expect("kron_all needs at least one operator");
    rest.iter().fold((*first).clone(), |acc, op| acc.kron(op))
}

pub fn kron(a: &Operator, b: &Operator) -> Operator {
    a.kron(b)
}

pub fn partial_trace(a: &Operator, keep: &[usize]) -> Result<Operator> {
    a.partial_trace(keep)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermitian_spectrum(h: &CMatrix) -> Spectrum {
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = CMatrix::from_fn(h.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    Spectrum {
        eigenvalues,
        eigenvectors,
    }
}

pub fn trace_norm(m: &CMatrix) -> f64 {
    if m.iter().all(|z| z.norm() == 0.0) {
        return 0.0;
    }
    m.clone().singular_values().iter().sum()
}

/// Von Neumann entropy in bits.
pub fn entropy(rho: &Operator) -> Result<f64> {
    rho.check_density()?;
    Ok(entropy_of_spectrum(&rho.eigh().eigenvalues))
}

/// `−Σ λ log₂ λ` with tiny negative eigenvalues clamped to zero.
pub fn entropy_of_spectrum(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .map(|&l| if l <= 0.0 { 0.0 } else { -l * l.log2() })
        .sum()
}

/// Column vector from complex entries.
pub fn ket(entries: &[C64]) -> CVector {
    CVector::from_column_slice(entries)
}

/// Computational basis vector `|index⟩` in dimension `dim`.
pub fn basis(dim: usize, index: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[index] = ONE;
    v
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell() -> CVector {
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        ket(&[s, ZERO, ZERO, s])
    }

    fn pauli_x() -> Operator {
        Operator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    #[test]
    fn kron_x_identity_flips_first_qubit() {
        let xi = pauli_x().kron(&Operator::identity(&[2]));
        assert_eq!(xi.dims(), &[2, 2]);
        let out = xi.apply(&basis(4, 0));
        assert_eq!(out, basis(4, 2));
    }

    #[test]
    fn kron_identities_is_identity() {
        let i4 = Operator::identity(&[2]).kron(&Operator::identity(&[2]));
        assert_eq!(i4.matrix(), &CMatrix::identity(4, 4));
        assert_eq!(i4.dims(), &[2, 2]);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let rho = Operator::pure(&bell(), &[2, 2]).unwrap();
        let a = rho.partial_trace(&[0]).unwrap();
        let half = CMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        assert!(max_abs_diff(a.matrix(), &half) < 1e-15);
    }

    #[test]
    fn product_state_marginal() {
        let ra = Operator::from_real_rows(&[&[0.7, 0.1], &[0.1, 0.3]]);
        let rb = Operator::new(
            CMatrix::from_row_slice(2, 2, &[C64::new(0.25, 0.0), C64::new(0.0, 0.2), C64::new(0.0, -0.2), C64::new(0.75, 0.0)]),
            vec![2],
        )
        .unwrap();
        let out = ra.kron(&rb).partial_trace(&[1]).unwrap();
        assert!(out.max_abs_diff(&rb) < 1e-15);
    }

    #[test]
    fn empty_keep_set_rejected() {
        let rho = Operator::identity(&[2, 2]);
        assert_eq!(rho.partial_trace(&[]), Err(Error::EmptyKeepSet));
        assert!(matches!(
            rho.partial_trace(&[3]),
            Err(Error::FactorIndex { index: 3, count: 2 })
        ));
    }

    #[test]
    fn partial_trace_keeps_original_order() {
        // (2,3,2) register; keep factors 2 and 0, output must be ordered [0, 2]
        let a = Operator::from_real_rows(&[&[0.6, 0.2], &[0.2, 0.4]]);
        let f = Operator::identity(&[3]).scale(C64::new(1.0 / 3.0, 0.0));
        let b = Operator::from_real_rows(&[&[0.9, 0.0], &[0.0, 0.1]]);
        let full = kron_all(&[&a, &f, &b]);
        let ab = full.partial_trace(&[2, 0]).unwrap();
        assert_eq!(ab.dims(), &[2, 2]);
        assert!(ab.max_abs_diff(&a.kron(&b)) < 1e-15);
    }

    #[test]
    fn trace_norm_examples() {
        let z = Operator::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]);
        assert!((z.trace_norm() - 2.0).abs() < 1e-14);
        assert_eq!(Operator::zeros(&[3]).trace_norm(), 0.0);
    }

    #[test]
    fn entropy_examples() {
        let mixed = Operator::identity(&[2]).scale(C64::new(0.5, 0.0));
        assert!((entropy(&mixed).unwrap() - 1.0).abs() < 1e-14);
        let pure = Operator::pure(&bell(), &[2, 2]).unwrap();
        assert!(entropy(&pure).unwrap().abs() < 1e-12);
        // −(2/3)log₂(2/3) − (1/3)log₂(1/3)
        let d = Operator::from_real_rows(&[&[2.0 / 3.0, 0.0], &[0.0, 1.0 / 3.0]]);
        assert!((entropy(&d).unwrap() - 0.918_295_834_054_489_6).abs() < 1e-12);
    }

    #[test]
    fn entropy_rejects_non_density() {
        let bad = Operator::from_real_rows(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(entropy(&bad), Err(Error::NotDensity(_))));
        let neg = Operator::from_real_rows(&[&[1.2, 0.0], &[0.0, -0.2]]);
        assert!(matches!(entropy(&neg), Err(Error::NotDensity(_))));
    }

    #[test]
    fn spectrum_reconstructs() {
        let h = Operator::new(
            CMatrix::from_row_slice(
                2,
                2,
                &[C64::new(0.3, 0.0), C64::new(0.1, -0.4), C64::new(0.1, 0.4), C64::new(-1.2, 0.0)],
            ),
            vec![2],
        )
        .unwrap();
        let s = h.eigh();
        assert!(s.eigenvalues[0] >= s.eigenvalues[1]);
        assert!(max_abs_diff(&s.reconstruct(), h.matrix()) < 1e-12);
    }

    #[test]
    fn factor_mismatch_rejected() {
        assert!(Operator::new(CMatrix::identity(4, 4), vec![2, 3]).is_err());
        assert!(Operator::new(CMatrix::identity(4, 4), vec![]).is_err());
    }
}
