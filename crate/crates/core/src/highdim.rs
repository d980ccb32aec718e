//! Complementarity violations for d-level systems.
//!
//! A violating preparation has an eigenvalue `1 + eps > 1`:
//!
//! ```text
//! rho~ = (1 + eps)|psi_0><psi_0| + sum_k lambda_k |psi_k><psi_k|,  eps + sum_k lambda_k = 0
//! ```
//!
//! Pure states `nu_1` with `<nu_1|rho~|nu_1> = 1` and `nu_0` with
//! `<nu_0|rho~|nu_0> = 0` overlap, yet the projector onto the doubled
//! eigenbasis `span{|psi_j psi_j>}` tells them apart with certainty when
//! measured on `rho~ (x) |nu><nu|`.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{
    expectation, kron, kron_vec, re, validate_quasistate, ComplexMatrix, QuasiState, StateVector, ARITH_TOL,
    SPECTRAL_TOL,
};

/// Preparation with top eigenvalue `1 + epsilon`.
#[derive(Clone, Debug)]
pub struct ViolatingState {
    pub dim: usize,
    pub epsilon: f64,
    /// Remaining eigenvalues, summing to `-epsilon`.
    pub lambdas: Vec<f64>,
    /// `psi_0` first.
    pub eigenbasis: Vec<StateVector>,
    pub state: QuasiState,
}

impl ViolatingState {
    /// Eigenvalue attached to `psi_n`.
    pub fn eigenvalue(&self, n: usize) -> f64 {
        if n == 0 {
            1.0 + self.epsilon
        } else {
            self.lambdas[n - 1]
        }
    }
}

/// Builds the state in the computational basis. Without `lambdas` the
/// negative weight is split evenly, `lambda_k = -eps/(d-1)`.
pub fn build_violating_state(d: usize, epsilon: f64, lambdas: Option<&[f64]>) -> Result<ViolatingState> {
    let basis = (0..d).map(|n| StateVector::from_fn(d, |i, _| re(if i == n { 1.0 } else { 0.0 }))).collect();
    build_violating_state_in_basis(d, epsilon, lambdas, basis)
}

pub fn build_violating_state_in_basis(
    d: usize,
    epsilon: f64,
    lambdas: Option<&[f64]>,
    eigenbasis: Vec<StateVector>,
) -> Result<ViolatingState> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("dimension must be at least 2, got {d}")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidSpectrum(format!("epsilon must be positive, got {epsilon}")));
    }
    let lambdas = match lambdas {
        Some(l) => l.to_vec(),
        None => vec![-epsilon / (d - 1) as f64; d - 1],
    };
    if lambdas.len() != d - 1 {
        return Err(Error::InvalidSpectrum(format!("expected {} lambdas, got {}", d - 1, lambdas.len())));
    }
    let sum: f64 = lambdas.iter().sum();
    if (sum + epsilon).abs() > ARITH_TOL {
        return Err(Error::InvalidSpectrum(format!("lambdas sum to {sum}, expected {}", -epsilon)));
    }
    if let Some(l) = lambdas.iter().find(|&&l| l > 1.0 + epsilon) {
        return Err(Error::InvalidSpectrum(format!("lambda {l} exceeds the top eigenvalue {}", 1.0 + epsilon)));
    }
    check_orthonormal(&eigenbasis, d)?;

    let mut m = ComplexMatrix::zeros(d, d);
    for (n, v) in eigenbasis.iter().enumerate() {
        let weight = if n == 0 { 1.0 + epsilon } else { lambdas[n - 1] };
        m = &m + &ComplexMatrix::projector(v).scale(weight);
    }
    Ok(ViolatingState { dim: d, epsilon, lambdas, eigenbasis, state: validate_quasistate(m)? })
}

fn check_orthonormal(basis: &[StateVector], d: usize) -> Result<()> {
    if basis.len() != d || basis.iter().any(|v| v.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: format!("{d} vectors of length {d}"),
            found: format!("{} vectors", basis.len()),
        });
    }
    for (i, u) in basis.iter().enumerate() {
        for (j, v) in basis.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            let dev = (u.dotc(v) - re(target)).norm();
            if dev > SPECTRAL_TOL {
                return Err(Error::InvalidArgument(format!(
                    "eigenbasis is not orthonormal (<{i}|{j}> off by {dev:e})"
                )));
            }
        }
    }
    Ok(())
}

/// `nu_1` is certain under `rho~`, `nu_0` is impossible.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NuFamily {
    Zero,
    One,
}

impl NuFamily {
    pub fn target(self) -> f64 {
        match self {
            NuFamily::Zero => 0.0,
            NuFamily::One => 1.0,
        }
    }
}

/// Squared magnitudes `|alpha_n|^2` with equal weight on `n >= 1`.
///
/// `|alpha_0|^2 = (eps + d - 1)/(d eps + d - 1)` for family one and
/// `eps/(d eps + d - 1)` for family zero.
pub fn nu_coefficients(d: usize, epsilon: f64, family: NuFamily) -> Result<Vec<f64>> {
    if d < 2 || epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidArgument(format!("need d >= 2 and eps > 0, got d={d}, eps={epsilon}")));
    }
    let n = d as f64;
    let denom = n * epsilon + n - 1.0;
    let head = match family {
        NuFamily::One => (epsilon + n - 1.0) / denom,
        NuFamily::Zero => epsilon / denom,
    };
    let tail = (1.0 - head) / (n - 1.0);
    Ok(std::iter::once(head).chain(std::iter::repeat_n(tail, d - 1)).collect())
}

#[derive(Clone, Debug)]
pub struct NuState {
    pub family: NuFamily,
    pub weights: Vec<f64>,
    pub phases: Vec<f64>,
    /// `sum_n sqrt(|alpha_n|^2) e^{i phase_n} |psi_n>`
    pub vector: StateVector,
}

impl NuState {
    pub fn projector(&self) -> QuasiState {
        QuasiState::pure(&self.vector).expect("nu states are unit vectors")
    }
}

/// Phases default to zero; only the magnitudes matter for the certainty
/// condition.
pub fn build_nu_state(vs: &ViolatingState, family: NuFamily, phases: Option<&[f64]>) -> Result<NuState> {
    let d = vs.dim;
    let phases = match phases {
        Some(p) if p.len() != d => return Err(Error::InvalidArgument(format!("expected {d} phases, got {}", p.len()))),
        Some(p) => p.to_vec(),
        None => vec![0.0; d],
    };
    let weights = nu_coefficients(d, vs.epsilon, family)?;
    let mut vector = StateVector::zeros(d);
    for ((psi, mag), phase) in vs.eigenbasis.iter().zip(&weights).zip(&phases) {
        vector += psi * Complex64::from_polar(mag.sqrt(), *phase);
    }
    let nu = NuState { family, weights, phases, vector };
    let value = expectation(vs.state.matrix(), &nu.projector())?;
    if (value - family.target()).abs() > ARITH_TOL {
        return Err(Error::BrokenConstruction(format!("<nu|rho|nu> = {value}, expected {}", family.target())));
    }
    Ok(nu)
}

/// `|<a|b>|`
pub fn nu_overlap(a: &NuState, b: &NuState) -> f64 {
    a.vector.dotc(&b.vector).norm()
}

/// `P1` onto the doubled eigenbasis and its complement `P0 = I - P1`.
#[derive(Clone, Debug)]
pub struct EntangledProjector {
    /// `|phi_k> = d^{-1/2} sum_j omega^{jk} |psi_j psi_j>`
    pub phis: Vec<StateVector>,
    pub p1: ComplexMatrix,
    pub p0: ComplexMatrix,
}

pub fn entangled_projector(vs: &ViolatingState) -> Result<EntangledProjector> {
    let d = vs.dim;
    let doubled: Vec<StateVector> = vs.eigenbasis.iter().map(|psi| kron_vec(psi, psi)).collect();
    let scale = 1.0 / (d as f64).sqrt();
    let phis: Vec<StateVector> = (0..d)
        .map(|k| {
            let mut acc = StateVector::zeros(d * d);
            for (j, dj) in doubled.iter().enumerate() {
                let omega = Complex64::from_polar(scale, TAU * ((j * k) % d) as f64 / d as f64);
                acc += dj * omega;
            }
            acc
        })
        .collect();

    let mut p1 = ComplexMatrix::zeros(d * d, d * d);
    for phi in &phis {
        p1 = &p1 + &ComplexMatrix::projector(phi);
    }
    let mut diagonal = ComplexMatrix::zeros(d * d, d * d);
    for dj in &doubled {
        diagonal = &diagonal + &ComplexMatrix::projector(dj);
    }
    let dev = p1.max_abs_diff(&diagonal);
    if dev > SPECTRAL_TOL {
        return Err(Error::BrokenConstruction(format!(
            "Fourier sum differs from the doubled-basis projector by {dev:e}"
        )));
    }
    let p0 = &ComplexMatrix::identity(d * d) - &p1;
    Ok(EntangledProjector { phis, p1, p0 })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HighdimOutcome {
    pub label: NuFamily,
    /// `Tr[P1 (rho~ (x) |nu><nu|)]`
    pub q1: f64,
}

/// Measures `{P0, P1}` on `rho~ (x) |nu><nu|`.
pub fn discriminate_highdim(vs: &ViolatingState, nu: &NuState) -> Result<HighdimOutcome> {
    let projector = entangled_projector(vs)?;
    if nu.vector.len() != vs.dim {
        return Err(Error::DimensionMismatch { expected: vs.dim.to_string(), found: nu.vector.len().to_string() });
    }
    let joint = validate_quasistate(kron(vs.state.matrix(), nu.projector().matrix()))?;
    let q1 = expectation(&projector.p1, &joint)?;
    let label = if (q1 - 1.0).abs() <= SPECTRAL_TOL {
        NuFamily::One
    } else if q1.abs() <= SPECTRAL_TOL {
        NuFamily::Zero
    } else {
        return Err(Error::BrokenConstruction(format!("q1 = {q1} is neither 0 nor 1")));
    };
    Ok(HighdimOutcome { label, q1 })
}

/// Identifies `hidden` against `candidates` and prepares two copies of it.
pub fn clone_highdim(
    vs: &ViolatingState,
    candidates: (&NuState, &NuState),
    hidden: NuFamily,
) -> Result<(HighdimOutcome, QuasiState)> {
    let pick = |f: NuFamily| if candidates.0.family == f { candidates.0 } else { candidates.1 };
    let outcome = discriminate_highdim(vs, pick(hidden))?;
    let copy = pick(outcome.label).projector();
    Ok((outcome, copy.tensor(&copy)))
}

/// Principle test in d dimensions: some eigenvalue exceeds one.
pub fn violates_pc(state: &QuasiState) -> bool {
    state.eigensystem().max_eigenvalue() > 1.0 + ARITH_TOL
}

/// `0.85|b0><b0| + 0.25|b1><b1| - 0.1|b2><b2|`: non-positive, yet no pure
/// state is certain under it.
pub fn three_level_example() -> QuasiState {
    validate_quasistate(ComplexMatrix::from_real_diagonal(&[0.85, 0.25, -0.1]))
        .expect("unit trace")
        .with_label("three-level example")
}
