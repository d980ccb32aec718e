//! Dense complex-matrix substrate.
//!
//! Everything downstream is built from three pieces: [`ComplexMatrix`] for
//! operators, [`QuasiState`] for unit-trace Hermitian preparations (positivity
//! is not required), and [`Povm`] for the measurements applied to them.
//! Dimensions stay small (at most 81, a pair of nine-level systems), so
//! storage is dense throughout.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for exact arithmetic identities.
pub const ARITH_TOL: f64 = 1e-12;
/// Tolerance for spectral reconstruction and orthonormality.
pub const SPECTRAL_TOL: f64 = 1e-10;
/// Tolerance used when classifying an operator as positive semidefinite.
pub const PSD_TOL: f64 = 1e-9;

/// Magnitude above which a component can carry the eigenvector phase.
const PHASE_PIVOT: f64 = 1e-8;

pub type StateVector = DVector<Complex64>;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Dense complex matrix indexed as `(row, col)`.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[Complex64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must equal rows * cols");
        Self(DMatrix::from_row_slice(rows, cols, entries))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { re(diag[i]) } else { re(0.0) })
    }

    /// `|u><v|`
    pub fn outer(u: &StateVector, v: &StateVector) -> Self {
        Self(u * v.adjoint())
    }

    /// `|v><v|`
    pub fn projector(v: &StateVector) -> Self {
        Self::outer(v, v)
    }

    pub fn as_inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.0[(row, col)] = value;
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    pub fn scale_complex(&self, factor: Complex64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        &self.0 * v
    }

    /// `U M U^dagger`
    pub fn conjugate_by(&self, unitary: &ComplexMatrix) -> Self {
        Self(&unitary.0 * &self.0 * unitary.0.adjoint())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows(), self.cols()), (other.rows(), other.cols()), "shape mismatch in max_abs_diff");
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |M - M^dagger|`, or infinity for non-square input.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Largest entrywise deviation of `self^dagger self` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let gram = Self(self.0.adjoint() * &self.0);
        gram.max_abs_diff(&Self::identity(self.rows()))
    }

    /// Traces out the second factor of a `dim_a * dim_b` operator.
    pub fn partial_trace_second(&self, dim_a: usize, dim_b: usize) -> Result<Self> {
        self.check_bipartite(dim_a, dim_b)?;
        Ok(Self::from_fn(dim_a, dim_a, |i, j| (0..dim_b).map(|k| self.get(i * dim_b + k, j * dim_b + k)).sum()))
    }

    /// Traces out the first factor of a `dim_a * dim_b` operator.
    pub fn partial_trace_first(&self, dim_a: usize, dim_b: usize) -> Result<Self> {
        self.check_bipartite(dim_a, dim_b)?;
        Ok(Self::from_fn(dim_b, dim_b, |i, j| (0..dim_a).map(|k| self.get(k * dim_b + i, k * dim_b + j)).sum()))
    }

    fn check_bipartite(&self, dim_a: usize, dim_b: usize) -> Result<()> {
        let n = dim_a * dim_b;
        if self.rows() != n || self.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: format!("{n}x{n}"),
                found: format!("{}x{}", self.rows(), self.cols()),
            });
        }
        Ok(())
    }

    pub fn pauli_x() -> Self {
        Self::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)])
    }

    pub fn pauli_y() -> Self {
        Self::from_row_slice(2, 2, &[re(0.0), c(0.0, -1.0), c(0.0, 1.0), re(0.0)])
    }

    pub fn pauli_z() -> Self {
        Self::from_row_slice(2, 2, &[re(1.0), re(0.0), re(0.0), re(-1.0)])
    }

    /// `v . sigma` for a real coefficient triple.
    pub fn pauli_combination(v: [f64; 3]) -> Self {
        Self::from_row_slice(2, 2, &[re(v[2]), c(v[0], -v[1]), c(v[0], v[1]), re(-v[2])])
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.get(i, j);
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

impl From<DMatrix<Complex64>> for ComplexMatrix {
    fn from(m: DMatrix<Complex64>) -> Self {
        Self(m)
    }
}

/// Kronecker product `a (x) b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.rows(), b.cols());
    ComplexMatrix::from_fn(a.rows() * br, a.cols() * bc, |i, j| a.get(i / br, j / bc) * b.get(i % br, j % bc))
}

/// Kronecker product of two state vectors.
pub fn kron_vec(u: &StateVector, v: &StateVector) -> StateVector {
    let n = v.len();
    StateVector::from_fn(u.len() * n, |i, _| u[i / n] * v[i % n])
}

/// `Tr(a b)` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    if a.cols() != b.rows() || a.rows() != b.cols() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", a.cols(), a.rows()),
            found: format!("{}x{}", b.rows(), b.cols()),
        });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.rows() {
        for k in 0..a.cols() {
            acc += a.get(i, k) * b.get(k, i);
        }
    }
    Ok(acc)
}

/// Unit-trace Hermitian operator. Negative eigenvalues are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasiState {
    matrix: ComplexMatrix,
    label: Option<String>,
    min_eigenvalue: f64,
}

impl QuasiState {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Smallest eigenvalue, recorded at validation time.
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn is_positive(&self) -> bool {
        self.min_eigenvalue >= -PSD_TOL
    }

    pub fn eigensystem(&self) -> Eigensystem {
        hermitian_eigensystem(&self.matrix).expect("validated quasi-states are Hermitian")
    }

    /// `self (x) other`, still unit trace and Hermitian.
    pub fn tensor(&self, other: &QuasiState) -> QuasiState {
        validate_quasistate(kron(&self.matrix, &other.matrix)).expect("tensor product of quasi-states is a quasi-state")
    }

    /// Pure state `|v><v|` for a unit vector.
    pub fn pure(v: &StateVector) -> Result<QuasiState> {
        let norm = v.norm();
        if (norm - 1.0).abs() > ARITH_TOL {
            return Err(Error::NonUnitVector { norm });
        }
        validate_quasistate(ComplexMatrix::projector(v))
    }

    pub fn maximally_mixed(dim: usize) -> QuasiState {
        validate_quasistate(ComplexMatrix::identity(dim).scale(1.0 / dim as f64)).expect("I/d is a state")
    }
}

/// Accepts `m` iff it is Hermitian and has unit trace.
pub fn validate_quasistate(m: ComplexMatrix) -> Result<QuasiState> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let deviation = m.hermiticity_defect();
    if deviation > ARITH_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let trace = m.trace();
    if (trace.re - 1.0).abs() > ARITH_TOL || trace.im.abs() > ARITH_TOL {
        return Err(Error::TraceNotUnit { trace: trace.re });
    }
    let min_eigenvalue = *hermitian_eigensystem(&m)?.eigenvalues.last().expect("non-empty matrix");
    Ok(QuasiState { matrix: m, label: None, min_eigenvalue })
}

/// `Tr(state * op)` as a real number.
pub fn expectation(op: &ComplexMatrix, state: &QuasiState) -> Result<f64> {
    if op.rows() != state.dim() || op.cols() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0}", state.dim()),
            found: format!("{}x{}", op.rows(), op.cols()),
        });
    }
    let value = trace_product(state.matrix(), op)?;
    if value.im.abs() > SPECTRAL_TOL {
        return Err(Error::NotHermitian { deviation: value.im.abs() });
    }
    Ok(value.re)
}

/// Spectral decomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted in descending order. Each eigenvector is rescaled
/// by a global phase so that its first component with modulus above `1e-8`
/// is real and positive.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<StateVector>,
}

impl Eigensystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `sum_k lambda_k |v_k><v_k|`
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut acc = ComplexMatrix::zeros(n, n);
        for (lambda, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            acc = &acc + &ComplexMatrix::projector(v).scale(*lambda);
        }
        acc
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// Number of eigenvalues with modulus above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|l| l.abs() > tol).count()
    }
}

pub fn hermitian_eigensystem(m: &ComplexMatrix) -> Result<Eigensystem> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let deviation = m.hermiticity_defect();
    if deviation > ARITH_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let eig = SymmetricEigen::new(m.as_inner().clone());
    let mut order: Vec<usize> = (0..m.rows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = order.iter().map(|&k| fix_phase(eig.eigenvectors.column(k).into_owned())).collect();
    Ok(Eigensystem { eigenvalues, eigenvectors })
}

/// Rotates `v` by a global phase so its first large component is real positive.
pub fn fix_phase(mut v: StateVector) -> StateVector {
    if let Some(pivot) = v.iter().find(|z| z.norm() > PHASE_PIVOT).copied() {
        let phase = pivot.conj() / pivot.norm();
        v.iter_mut().for_each(|z| *z *= phase);
    }
    v
}

/// Positive operator-valued measure over a fixed dimension.
#[derive(Clone, Debug)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let first =
            elements.first().ok_or_else(|| Error::InvalidArgument("a POVM needs at least one element".into()))?;
        let dim = first.rows();
        let mut total = ComplexMatrix::zeros(dim, dim);
        for (index, e) in elements.iter().enumerate() {
            if e.rows() != dim || e.cols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: format!("{dim}x{dim}"),
                    found: format!("{}x{}", e.rows(), e.cols()),
                });
            }
            let spectrum = hermitian_eigensystem(e)?;
            if spectrum.min_eigenvalue() < -SPECTRAL_TOL {
                return Err(Error::NotPositive { index, min_eigenvalue: spectrum.min_eigenvalue() });
            }
            total = &total + e;
        }
        let deviation = total.max_abs_diff(&ComplexMatrix::identity(dim));
        if deviation > SPECTRAL_TOL {
            return Err(Error::IncompletePovm { deviation });
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    /// Outcome weights `Tr(state E_k)`, which may leave `[0, 1]` for non-positive states.
    pub fn probabilities(&self, state: &QuasiState) -> Result<Vec<f64>> {
        self.elements.iter().map(|e| expectation(e, state)).collect()
    }
}
