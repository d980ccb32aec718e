//! Bipartite boxes built from a single qubit preparation.
//!
//! Starting from `rho(r)` the pipeline diagonalizes it, applies a CNOT in
//! the rotated basis `|+/-_xi>` against an ancilla in `|+_xi>`, then maps
//! `|+/-_xi>` to the computational basis on both sides. The result is
//!
//! ```text
//! P' = 1/2 [ (1 + r) |phi'+><phi'+| + (1 - r) |phi'-><phi'-| ],
//! |phi'+/-> = (|00> +/- |11>) / sqrt 2
//! ```
//!
//! whose correlation tensor is `diag(r, -r, 1)`. For `r > 1` the CHSH value
//! exceeds Tsirelson's bound while both reductions stay maximally mixed.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use nalgebra::Vector3;

use crate::bloch::{projector_for_direction, to_operator, BlochVector, Direction, Outcome};
use crate::error::{Error, Result};
use crate::operator::{
    expectation, kron, re, validate_quasistate, ComplexMatrix, QuasiState, StateVector, ARITH_TOL, SPECTRAL_TOL,
};

/// `2 sqrt 2`
pub const TSIRELSON_BOUND: f64 = 2.0 * SQRT_2;

/// Four dichotomic observables `v . sigma` for the CHSH scenario.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChshSettings {
    pub a1: Direction,
    pub a2: Direction,
    pub b1: Direction,
    pub b2: Direction,
}

impl ChshSettings {
    pub fn new(a1: [f64; 3], a2: [f64; 3], b1: [f64; 3], b2: [f64; 3]) -> Result<Self> {
        Ok(Self {
            a1: Direction::from_array(a1)?,
            a2: Direction::from_array(a2)?,
            b1: Direction::from_array(b1)?,
            b2: Direction::from_array(b2)?,
        })
    }

    /// `A1 = (x + y)/sqrt 2`, `A2 = (x - y)/sqrt 2`, `B1 = x`, `B2 = -y`.
    pub fn tsirelson() -> Self {
        let s = FRAC_1_SQRT_2;
        Self::new([s, s, 0.0], [s, -s, 0.0], [1.0, 0.0, 0.0], [0.0, -1.0, 0.0]).expect("unit settings")
    }

    pub fn alice(&self, index: usize) -> Direction {
        [self.a1, self.a2][index]
    }

    pub fn bob(&self, index: usize) -> Direction {
        [self.b1, self.b2][index]
    }
}

/// Which family of settings a caller wants for a given resource.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SettingsChoice {
    /// [`chsh_settings_for`] the box's `r`.
    Auto,
    /// [`ChshSettings::tsirelson`] regardless of `r`.
    Tsirelson,
}

impl SettingsChoice {
    pub fn settings(self, r: f64) -> Result<ChshSettings> {
        match self {
            SettingsChoice::Auto => chsh_settings_for(r),
            SettingsChoice::Tsirelson => Ok(ChshSettings::tsirelson()),
        }
    }
}

/// Settings that realize the CHSH law for a box of norm `r`.
///
/// Up to `r = sqrt 2` the standard optimal settings give `2 sqrt 2 r`. Beyond
/// that Bob's observables are tilted towards `z`, which the box's
/// correlations see as a factor `sqrt 2 / r`, pinning the value at 4 with
/// every joint probability in `{0, 1/2}`.
pub fn chsh_settings_for(r: f64) -> Result<ChshSettings> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("settings need r > 0, got {r}")));
    }
    if r <= SQRT_2 {
        return Ok(ChshSettings::tsirelson());
    }
    let s = FRAC_1_SQRT_2;
    let planar = SQRT_2 / r;
    let tilt = (r * r - 2.0).sqrt() / r;
    ChshSettings::new([s, s, 0.0], [s, -s, 0.0], [planar, 0.0, tilt], [0.0, -planar, tilt])
}

/// `A1 B1 + A1 B2 + A2 B1 - A2 B2`
pub fn bell_operator(s: &ChshSettings) -> ComplexMatrix {
    let (a1, a2) = (s.a1.observable(), s.a2.observable());
    let (b1, b2) = (s.b1.observable(), s.b2.observable());
    let plus = &(&kron(&a1, &b1) + &kron(&a1, &b2)) + &kron(&a2, &b1);
    &plus - &kron(&a2, &b2)
}

/// `X_xi = |xi><xi| - |xi_perp><xi_perp|` for a unit qubit vector `xi`.
///
/// Equivalently `2|xi><xi| - I`, a Hermitian involution.
pub fn build_xpsi(xi: &StateVector) -> Result<ComplexMatrix> {
    if xi.len() != 2 {
        return Err(Error::DimensionMismatch { expected: "2".into(), found: xi.len().to_string() });
    }
    let norm = xi.norm();
    if (norm - 1.0).abs() > ARITH_TOL {
        return Err(Error::NonUnitVector { norm });
    }
    Ok(&ComplexMatrix::projector(xi).scale(2.0) - &ComplexMatrix::identity(2))
}

/// Two-qubit quasi-state with maximally mixed reductions.
#[derive(Clone, Debug)]
pub struct BipartiteBox {
    state: QuasiState,
    r: f64,
}

impl BipartiteBox {
    /// Validates a 4x4 quasi-state with `I/2` reductions on both sides.
    pub fn from_matrix(m: ComplexMatrix, r: f64) -> Result<Self> {
        if m.rows() != 4 || m.cols() != 4 {
            return Err(Error::DimensionMismatch {
                expected: "4x4".into(),
                found: format!("{}x{}", m.rows(), m.cols()),
            });
        }
        let half = ComplexMatrix::identity(2).scale(0.5);
        for (side, reduced) in [("first", m.partial_trace_second(2, 2)?), ("second", m.partial_trace_first(2, 2)?)] {
            let dev = reduced.max_abs_diff(&half);
            if dev > SPECTRAL_TOL {
                return Err(Error::BrokenConstruction(format!("{side} reduction deviates from I/2 by {dev:e}")));
            }
        }
        Ok(Self { state: validate_quasistate(m)?, r })
    }

    pub fn state(&self) -> &QuasiState {
        &self.state
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.state.matrix()
    }

    /// Norm of the source Bloch vector.
    pub fn r(&self) -> f64 {
        self.r
    }
}

/// Every intermediate of the box construction.
#[derive(Clone, Debug)]
pub struct BoxPipeline {
    pub rho: QuasiState,
    pub xi: StateVector,
    pub xi_perp: StateVector,
    pub plus_xi: StateVector,
    pub minus_xi: StateVector,
    pub x_xi: ComplexMatrix,
    /// Rotated-basis CNOT.
    pub u: ComplexMatrix,
    /// `U (rho (x) |+_xi><+_xi|) U^dagger`
    pub p: ComplexMatrix,
    /// Local map `|+_xi> -> |0>`, `|-_xi> -> |1>`.
    pub u_prime: ComplexMatrix,
    pub p_prime: ComplexMatrix,
    pub r: f64,
}

pub fn run_box_pipeline(r: &BlochVector) -> BoxPipeline {
    let rho = to_operator(r);
    let spectrum = rho.eigensystem();
    let xi = spectrum.eigenvectors[0].clone();
    let xi_perp = spectrum.eigenvectors[1].clone();
    let plus_xi = (&xi + &xi_perp) * re(FRAC_1_SQRT_2);
    let minus_xi = (&xi - &xi_perp) * re(FRAC_1_SQRT_2);

    let x_xi = build_xpsi(&xi).expect("eigenvectors are unit");
    let i2 = ComplexMatrix::identity(2);
    let u = &kron(&ComplexMatrix::projector(&plus_xi), &i2) + &kron(&ComplexMatrix::projector(&minus_xi), &x_xi);
    let p = kron(rho.matrix(), &ComplexMatrix::projector(&plus_xi)).conjugate_by(&u);

    let e0 = StateVector::from_vec(vec![re(1.0), re(0.0)]);
    let e1 = StateVector::from_vec(vec![re(0.0), re(1.0)]);
    let u_prime = &ComplexMatrix::outer(&e0, &plus_xi) + &ComplexMatrix::outer(&e1, &minus_xi);
    let p_prime = p.conjugate_by(&kron(&u_prime, &u_prime));

    BoxPipeline { rho, xi, xi_perp, plus_xi, minus_xi, x_xi, u, p, u_prime, p_prime, r: r.norm() }
}

/// Runs the full unitary pipeline on `rho(r)`.
pub fn build_box(r: &BlochVector) -> BipartiteBox {
    let pipeline = run_box_pipeline(r);
    BipartiteBox::from_matrix(pipeline.p_prime, pipeline.r).expect("pipeline output has unit trace and I/2 reductions")
}

/// `(|00> +/- |11>) / sqrt 2`
pub fn phi_prime(sign: f64) -> StateVector {
    let s = FRAC_1_SQRT_2;
    StateVector::from_vec(vec![re(s), re(0.0), re(0.0), re(sign * s)])
}

/// Closed form of the pipeline output for a resource of norm `r`.
pub fn closed_form_box(r: f64) -> ComplexMatrix {
    let plus = ComplexMatrix::projector(&phi_prime(1.0)).scale(0.5 * (1.0 + r));
    let minus = ComplexMatrix::projector(&phi_prime(-1.0)).scale(0.5 * (1.0 - r));
    &plus + &minus
}

/// `Tr(B P')`
pub fn chsh_value(bx: &BipartiteBox, s: &ChshSettings) -> f64 {
    expectation(&bell_operator(s), bx.state()).expect("4x4 Hermitian Bell operator")
}

/// Joint outcome weights for one pair of settings.
///
/// `p[a][b]` with index 0 for outcome `+1` and 1 for `-1`. Entries can be
/// negative when the box leaves the valid region; `valid` records that.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointDistribution {
    pub p: [[f64; 2]; 2],
    pub valid: bool,
}

impl JointDistribution {
    pub fn from_table(p: [[f64; 2]; 2]) -> Self {
        let valid = p.iter().flatten().all(|&x| (-ARITH_TOL..=1.0 + ARITH_TOL).contains(&x));
        Self { p, valid }
    }

    pub fn total(&self) -> f64 {
        self.p.iter().flatten().sum()
    }

    pub fn marginal_a(&self) -> [f64; 2] {
        [self.p[0][0] + self.p[0][1], self.p[1][0] + self.p[1][1]]
    }

    pub fn marginal_b(&self) -> [f64; 2] {
        [self.p[0][0] + self.p[1][0], self.p[0][1] + self.p[1][1]]
    }

    /// `sum_ab a b p(a, b)`
    pub fn correlator(&self) -> f64 {
        self.p[0][0] - self.p[0][1] - self.p[1][0] + self.p[1][1]
    }

    pub fn get(&self, a: Outcome, b: Outcome) -> f64 {
        self.p[outcome_index(a)][outcome_index(b)]
    }
}

fn outcome_index(o: Outcome) -> usize {
    match o {
        Outcome::Plus => 0,
        Outcome::Minus => 1,
    }
}

/// `p(x, y) = Tr[(Pi_a^x (x) Pi_b^y) P']`
pub fn joint_distribution(bx: &BipartiteBox, a: &Direction, b: &Direction) -> JointDistribution {
    let mut p = [[0.0; 2]; 2];
    for x in Outcome::BOTH {
        let pa = projector_for_direction(&signed(a, x));
        for y in Outcome::BOTH {
            let pb = projector_for_direction(&signed(b, y));
            p[outcome_index(x)][outcome_index(y)] =
                expectation(&kron(&pa, &pb), bx.state()).expect("4x4 product projector");
        }
    }
    JointDistribution::from_table(p)
}

fn signed(n: &Direction, o: Outcome) -> Direction {
    match o {
        Outcome::Plus => *n,
        Outcome::Minus => n.flipped(),
    }
}

/// Joint distributions for all four setting pairs, `dists[i][j]` for `(A_i, B_j)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationTable {
    pub dists: [[JointDistribution; 2]; 2],
}

impl CorrelationTable {
    /// Each party's marginals must not depend on the other party's choice.
    pub fn is_nonsignalling(&self, tol: f64) -> bool {
        let close = |u: [f64; 2], v: [f64; 2]| (u[0] - v[0]).abs() <= tol && (u[1] - v[1]).abs() <= tol;
        (0..2).all(|i| close(self.dists[i][0].marginal_a(), self.dists[i][1].marginal_a()))
            && (0..2).all(|j| close(self.dists[0][j].marginal_b(), self.dists[1][j].marginal_b()))
    }

    pub fn all_valid(&self) -> bool {
        self.dists.iter().flatten().all(|d| d.valid)
    }

    /// CHSH combination of the four correlators.
    pub fn chsh(&self) -> f64 {
        let e = |i: usize, j: usize| self.dists[i][j].correlator();
        e(0, 0) + e(0, 1) + e(1, 0) - e(1, 1)
    }
}

pub fn correlation_table(bx: &BipartiteBox, s: &ChshSettings) -> CorrelationTable {
    let dist = |i: usize, j: usize| joint_distribution(bx, &s.alice(i), &s.bob(j));
    CorrelationTable { dists: [[dist(0, 0), dist(0, 1)], [dist(1, 0), dist(1, 1)]] }
}

pub fn nonsignalling_check(bx: &BipartiteBox, s: &ChshSettings) -> bool {
    correlation_table(bx, s).is_nonsignalling(ARITH_TOL)
}

/// Unit vector along `(x, y, z)`, for building settings by hand.
pub fn unit(x: f64, y: f64, z: f64) -> Direction {
    Direction::normalize(Vector3::new(x, y, z)).expect("non-zero vector")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::hermitian_eigensystem;

    fn zr(r: f64) -> BlochVector {
        BlochVector::new(0.0, 0.0, r)
    }

    #[test]
    fn xpsi_examples() {
        let zero = StateVector::from_vec(vec![re(1.0), re(0.0)]);
        assert!(build_xpsi(&zero).unwrap().max_abs_diff(&ComplexMatrix::pauli_z()) < ARITH_TOL);
        let plus = StateVector::from_vec(vec![re(FRAC_1_SQRT_2), re(FRAC_1_SQRT_2)]);
        assert!(build_xpsi(&plus).unwrap().max_abs_diff(&ComplexMatrix::pauli_x()) < ARITH_TOL);
        let bad = StateVector::from_vec(vec![re(1.0), re(1.0)]);
        assert!(matches!(build_xpsi(&bad), Err(Error::NonUnitVector { .. })));
    }

    #[test]
    fn box_examples() {
        let pure = build_box(&zr(1.0));
        let bell = ComplexMatrix::projector(&phi_prime(1.0));
        assert!(pure.matrix().max_abs_diff(&bell) < SPECTRAL_TOL);

        let flat = build_box(&BlochVector::zero());
        let even = &ComplexMatrix::projector(&phi_prime(1.0)).scale(0.5)
            + &ComplexMatrix::projector(&phi_prime(-1.0)).scale(0.5);
        assert!(flat.matrix().max_abs_diff(&even) < SPECTRAL_TOL);

        let spectrum = hermitian_eigensystem(build_box(&zr(1.2)).matrix()).unwrap();
        for (got, want) in spectrum.eigenvalues.iter().zip([1.1, 0.0, 0.0, -0.1]) {
            assert!((got - want).abs() < SPECTRAL_TOL, "{got} vs {want}");
        }
    }

    #[test]
    fn bell_operator_examples() {
        let b = bell_operator(&ChshSettings::tsirelson());
        let phi = QuasiState::pure(&phi_prime(1.0)).unwrap();
        assert!((expectation(&b, &phi).unwrap() - TSIRELSON_BOUND).abs() < SPECTRAL_TOL);

        let z = [0.0, 0.0, 1.0];
        let b = bell_operator(&ChshSettings::new(z, z, z, z).unwrap());
        let zz = kron(&ComplexMatrix::pauli_z(), &ComplexMatrix::pauli_z()).scale(2.0);
        assert!(b.max_abs_diff(&zz) < ARITH_TOL);
        let spectrum = hermitian_eigensystem(&b).unwrap();
        assert!((spectrum.max_eigenvalue() - 2.0).abs() < ARITH_TOL);
        assert!((spectrum.min_eigenvalue() + 2.0).abs() < ARITH_TOL);
    }

    #[test]
    fn settings_reject_non_positive_r() {
        assert!(chsh_settings_for(0.0).is_err());
        assert!(chsh_settings_for(-1.0).is_err());
        assert!(chsh_settings_for(f64::NAN).is_err());
        assert!(ChshSettings::new([1.0, 1.0, 0.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn chsh_examples() {
        let v = chsh_value(&build_box(&zr(1.0)), &chsh_settings_for(1.0).unwrap());
        assert!((v - TSIRELSON_BOUND).abs() < SPECTRAL_TOL);
        let v = chsh_value(&build_box(&zr(1.2)), &chsh_settings_for(1.2).unwrap());
        assert!((v - TSIRELSON_BOUND * 1.2).abs() < SPECTRAL_TOL);
        let v = chsh_value(&build_box(&zr(SQRT_2)), &chsh_settings_for(SQRT_2).unwrap());
        assert!((v - 4.0).abs() < SPECTRAL_TOL);
        let v = chsh_value(&build_box(&zr(2.0)), &chsh_settings_for(2.0).unwrap());
        assert!((v - 4.0).abs() < SPECTRAL_TOL);

        let flat = build_box(&BlochVector::zero());
        for s in [ChshSettings::tsirelson(), chsh_settings_for(3.0).unwrap()] {
            assert!(chsh_value(&flat, &s).abs() < SPECTRAL_TOL);
        }
    }

    #[test]
    fn joint_distribution_examples() {
        let d = joint_distribution(&build_box(&zr(1.0)), &Direction::z(), &Direction::z());
        assert!((d.p[0][0] - 0.5).abs() < ARITH_TOL && (d.p[1][1] - 0.5).abs() < ARITH_TOL);
        assert!(d.p[0][1].abs() < ARITH_TOL && d.p[1][0].abs() < ARITH_TOL);
        assert!(d.valid);

        // sigma_x correlator is r, so p = (1 +/- r)/4
        let d = joint_distribution(&build_box(&zr(1.2)), &Direction::x(), &Direction::x());
        assert!((d.p[0][0] - 0.55).abs() < ARITH_TOL && (d.p[1][1] - 0.55).abs() < ARITH_TOL);
        assert!((d.p[0][1] + 0.05).abs() < ARITH_TOL && (d.p[1][0] + 0.05).abs() < ARITH_TOL);
        assert!(!d.valid);

        let table = correlation_table(&build_box(&zr(2.0)), &chsh_settings_for(2.0).unwrap());
        for x in table.dists.iter().flatten().flat_map(|d| d.p.iter().flatten()) {
            assert!(x.abs() < ARITH_TOL || (x - 0.5).abs() < ARITH_TOL, "{x}");
        }
        assert!(table.all_valid());
    }

    #[test]
    fn nonsignalling_examples() {
        for r in [1.0, 1.2, 2.0] {
            assert!(nonsignalling_check(&build_box(&zr(r)), &chsh_settings_for(r).unwrap()));
        }
        let arbitrary = ChshSettings {
            a1: unit(0.3, 0.1, -0.9),
            a2: unit(-1.0, 0.4, 0.2),
            b1: unit(0.0, 1.0, 1.0),
            b2: unit(0.5, -0.5, 0.1),
        };
        assert!(nonsignalling_check(&build_box(&BlochVector::new(0.9, 0.6, -0.9)), &arbitrary));
    }

    #[test]
    fn signalling_table_is_detected() {
        // Bob's outcome copies Alice's setting: his marginal depends on her choice.
        let copy_plus = JointDistribution::from_table([[0.5, 0.0], [0.5, 0.0]]);
        let copy_minus = JointDistribution::from_table([[0.0, 0.5], [0.0, 0.5]]);
        let table = CorrelationTable { dists: [[copy_plus, copy_plus], [copy_minus, copy_minus]] };
        assert!(!table.is_nonsignalling(ARITH_TOL));
    }

    #[test]
    fn table_chsh_matches_trace() {
        let bx = build_box(&BlochVector::new(0.4, 1.1, 0.2));
        let s = chsh_settings_for(bx.r()).unwrap();
        assert!((correlation_table(&bx, &s).chsh() - chsh_value(&bx, &s)).abs() < SPECTRAL_TOL);
    }

    #[test]
    fn box_rejects_signalling_matrix() {
        let m = ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(BipartiteBox::from_matrix(m, 1.0), Err(Error::BrokenConstruction(_))));
    }
}
