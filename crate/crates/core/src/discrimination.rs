//! Clonability, perfect discrimination and cloning of hyperplane states.
//!
//! A resource `r` with `|r| > 1` singles out the two planes `r . x = +/-1`.
//! Quantum states on those planes overlap, yet measuring
//! `P+/- = [I (x) I +/- (sigma.r_hat) (x) (sigma.r_hat)] / 2` on
//! `rho(r) (x) sigma` identifies which plane `sigma` lies on with certainty.

use nalgebra::Vector3;

use crate::bloch::{to_operator, transverse_pair, BlochVector, Direction, Outcome};
use crate::error::{Error, Result};
use crate::operator::{expectation, kron, trace_product, ComplexMatrix, Povm, QuasiState, ARITH_TOL, SPECTRAL_TOL};

/// `Tr(rho(a) rho(b))`, computed from the matrices.
pub fn overlap(a: &BlochVector, b: &BlochVector) -> f64 {
    trace_product(to_operator(a).matrix(), to_operator(b).matrix()).expect("2x2 operators").re
}

/// Two preparations can only be jointly cloned when `r . r' = +/-1`,
/// i.e. their overlap `(1 + r.r')/2` is 0 or 1.
pub fn clonability_check(r: &BlochVector, rp: &BlochVector) -> bool {
    (r.dot(rp).abs() - 1.0).abs() <= ARITH_TOL
}

/// Right-handed orthonormal frame `(r_hat, m_hat, n_hat)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub r_hat: Direction,
    pub m_hat: Direction,
    pub n_hat: Direction,
}

impl Frame {
    /// `m_hat = normalize(z x r_hat)` away from the poles, otherwise `x`
    /// projected off the axis; `n_hat = r_hat x m_hat`.
    pub fn for_axis(r_hat: Direction) -> Self {
        let (m, n) = transverse_pair(&r_hat);
        Self { r_hat, m_hat: Direction::normalize(m).expect("unit"), n_hat: Direction::normalize(n).expect("unit") }
    }

    /// Rotates the transverse pair about `r_hat` by `angle`.
    pub fn rotated(&self, angle: f64) -> Self {
        let (m, n) = (self.m_hat.vector(), self.n_hat.vector());
        let (s, co) = angle.sin_cos();
        Self {
            r_hat: self.r_hat,
            m_hat: Direction::normalize(co * m + s * n).expect("unit"),
            n_hat: Direction::normalize(-s * m + co * n).expect("unit"),
        }
    }

    pub fn is_right_handed(&self, tol: f64) -> bool {
        let (r, m, n) = (self.r_hat.vector(), self.m_hat.vector(), self.n_hat.vector());
        r.dot(&m).abs() <= tol && r.dot(&n).abs() <= tol && (r.cross(&m) - n).norm() <= tol
    }
}

/// Quantum states `r+/- = +/-(1/r) r_hat + y m_hat + z n_hat`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperplanePair {
    pub r_plus: BlochVector,
    pub r_minus: BlochVector,
    pub y: f64,
    pub z: f64,
    pub frame: Frame,
}

impl HyperplanePair {
    pub fn state(&self, which: Outcome) -> BlochVector {
        match which {
            Outcome::Plus => self.r_plus,
            Outcome::Minus => self.r_minus,
        }
    }

    /// `Tr(rho+ rho-) = (1 + y^2 + z^2 - 1/r^2) / 2`.
    pub fn overlap(&self) -> f64 {
        overlap(&self.r_plus, &self.r_minus)
    }
}

pub fn hyperplane_pair(r: &BlochVector, y: f64, z: f64) -> Result<HyperplanePair> {
    let axis = require_violating(r)?;
    hyperplane_pair_in_frame(r, y, z, Frame::for_axis(axis))
}

/// As [`hyperplane_pair`] with a caller-supplied transverse frame around `r_hat`.
pub fn hyperplane_pair_in_frame(r: &BlochVector, y: f64, z: f64, frame: Frame) -> Result<HyperplanePair> {
    let axis = require_violating(r)?;
    if (axis.dot(&frame.r_hat) - 1.0).abs() > ARITH_TOL || !frame.is_right_handed(ARITH_TOL) {
        return Err(Error::InvalidArgument("frame must be right-handed around r_hat".into()));
    }
    let norm = r.norm();
    let value = 1.0 / (norm * norm) + y * y + z * z;
    if value > 1.0 + ARITH_TOL {
        return Err(Error::TransverseTooLarge { value });
    }
    let transverse = y * frame.m_hat.vector() + z * frame.n_hat.vector();
    let along = axis.vector() / norm;
    Ok(HyperplanePair {
        r_plus: BlochVector(along + transverse),
        r_minus: BlochVector(-along + transverse),
        y,
        z,
        frame,
    })
}

fn require_violating(r: &BlochVector) -> Result<Direction> {
    let norm = r.norm();
    if norm <= 1.0 + ARITH_TOL {
        return Err(Error::NotViolating { norm });
    }
    Ok(r.direction().expect("non-zero"))
}

/// Rank-two projectors `P+` and `P-` on two qubits.
#[derive(Clone, Debug)]
pub struct DiscriminationPovm {
    pub p_plus: ComplexMatrix,
    pub p_minus: ComplexMatrix,
}

impl DiscriminationPovm {
    pub fn element(&self, which: Outcome) -> &ComplexMatrix {
        match which {
            Outcome::Plus => &self.p_plus,
            Outcome::Minus => &self.p_minus,
        }
    }

    pub fn to_povm(&self) -> Povm {
        Povm::new(vec![self.p_plus.clone(), self.p_minus.clone()]).expect("complementary projectors")
    }
}

pub fn discrimination_povm(r: &BlochVector) -> Result<DiscriminationPovm> {
    let axis = require_violating(r)?;
    Ok(parity_projectors(&axis))
}

/// `[I (x) I +/- (sigma.n) (x) (sigma.n)] / 2` for any axis.
pub fn parity_projectors(axis: &Direction) -> DiscriminationPovm {
    let obs = axis.observable();
    let parity = kron(&obs, &obs);
    let id = ComplexMatrix::identity(4);
    DiscriminationPovm { p_plus: (&id + &parity).scale(0.5), p_minus: (&id - &parity).scale(0.5) }
}

/// The four Bell projectors `[phi+, phi-, psi+, psi-]` expanded in a frame:
///
/// ```text
/// phi+/- = [I + / - RR - / + MM + NN] / 4
/// psi+/- = [I + / - RR + / - MM - NN] / 4
/// ```
///
/// with `RR = (sigma.r_hat)^(x)2` and so on. For the frame `(x, y, z)` these
/// are the usual computational-basis Bell states.
pub fn bell_projectors(frame: &Frame) -> [ComplexMatrix; 4] {
    let doubled = |d: &Direction| {
        let o = d.observable();
        kron(&o, &o)
    };
    let (rr, mm, nn) = (doubled(&frame.r_hat), doubled(&frame.m_hat), doubled(&frame.n_hat));
    let id = ComplexMatrix::identity(4);
    let combine = |sr: f64, sm: f64, sn: f64| {
        let acc = &(&id + &rr.scale(sr)) + &mm.scale(sm);
        (&acc + &nn.scale(sn)).scale(0.25)
    };
    [combine(1.0, -1.0, 1.0), combine(-1.0, 1.0, 1.0), combine(1.0, 1.0, -1.0), combine(-1.0, -1.0, -1.0)]
}

/// Outcome weights of `{P+, P-}` on `rho(r) (x) rho_which`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Discrimination {
    pub label: Outcome,
    pub q_plus: f64,
    pub q_minus: f64,
}

/// Measures `{P+, P-}` on `rho(r) (x) rho_which` and returns the label
/// that occurs with certainty.
///
/// Fails with [`Error::BrokenConstruction`] if neither outcome is certain.
pub fn discriminate(r: &BlochVector, pair: &HyperplanePair, which: Outcome) -> Result<Discrimination> {
    let povm = discrimination_povm(r)?;
    check_on_planes(r, pair)?;
    let joint = to_operator(r).tensor(&to_operator(&pair.state(which)));
    let q_plus = expectation(&povm.p_plus, &joint)?;
    let q_minus = expectation(&povm.p_minus, &joint)?;
    let label = match (q_plus, q_minus) {
        (p, m) if (p - 1.0).abs() <= SPECTRAL_TOL && m.abs() <= SPECTRAL_TOL => Outcome::Plus,
        (p, m) if (m - 1.0).abs() <= SPECTRAL_TOL && p.abs() <= SPECTRAL_TOL => Outcome::Minus,
        _ => return Err(Error::BrokenConstruction(format!("no certain outcome: q+ = {q_plus}, q- = {q_minus}"))),
    };
    if label != which {
        return Err(Error::BrokenConstruction(format!("identified {label:?} for hidden {which:?}")));
    }
    Ok(Discrimination { label, q_plus, q_minus })
}

fn check_on_planes(r: &BlochVector, pair: &HyperplanePair) -> Result<()> {
    let (dp, dm) = (r.dot(&pair.r_plus), r.dot(&pair.r_minus));
    if (dp - 1.0).abs() > ARITH_TOL || (dm + 1.0).abs() > ARITH_TOL {
        return Err(Error::InvalidArgument(format!("pair is not on the resource's planes: r.r+ = {dp}, r.r- = {dm}")));
    }
    for s in [pair.r_plus, pair.r_minus] {
        if s.norm() > 1.0 + ARITH_TOL {
            return Err(Error::InvalidArgument(format!("hyperplane state has |r| = {}", s.norm())));
        }
    }
    Ok(())
}

/// Result of the discriminate-then-prepare cloning protocol.
#[derive(Clone, Debug)]
pub struct CloneOutcome {
    pub discrimination: Discrimination,
    /// `rho_label (x) rho_label`
    pub output: QuasiState,
}

/// Identifies the hidden state, then prepares two copies of it.
///
/// The certain outcome leaves `rho (x) sigma` in place, so the resource is
/// available again after the protocol.
pub fn clone_protocol(r: &BlochVector, pair: &HyperplanePair, which: Outcome) -> Result<CloneOutcome> {
    let discrimination = discriminate(r, pair, which)?;
    let single = to_operator(&pair.state(discrimination.label));
    Ok(CloneOutcome { discrimination, output: single.tensor(&single) })
}

/// Disc where a plane `r . x = sign` cuts the Bloch ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneDisc {
    pub sign: f64,
    pub normal: Direction,
    /// Plane is `normal . x = offset`.
    pub offset: f64,
    pub center: Vector3<f64>,
    pub radius: f64,
    pub frame: Frame,
}

impl PlaneDisc {
    pub fn boundary(&self, count: usize) -> Vec<(f64, Vector3<f64>)> {
        (0..count)
            .map(|k| {
                let theta = std::f64::consts::TAU * k as f64 / count as f64;
                let p = self.center
                    + self.radius * (theta.cos() * self.frame.m_hat.vector() + theta.sin() * self.frame.n_hat.vector());
                (theta, p)
            })
            .collect()
    }
}

/// Both planes `r . x = +/-1` for a complementarity-violating `r`.
pub fn hyperplane_discs(r: &BlochVector) -> Result<[PlaneDisc; 2]> {
    let axis = require_violating(r)?;
    let frame = Frame::for_axis(axis);
    let norm = r.norm();
    let radius = (1.0 - 1.0 / (norm * norm)).sqrt();
    let disc = |sign: f64| PlaneDisc {
        sign,
        normal: axis,
        offset: sign / norm,
        center: axis.vector() * (sign / norm),
        radius,
        frame,
    };
    Ok([disc(1.0), disc(-1.0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::hermitian_eigensystem;

    fn resource() -> BlochVector {
        BlochVector::new(0.0, 0.0, 2.0)
    }

    #[test]
    fn clonability_examples() {
        let up = BlochVector::new(0.0, 0.0, 1.0);
        assert!(clonability_check(&up, &up));
        assert!((overlap(&up, &up) - 1.0).abs() < ARITH_TOL);
        let down = BlochVector::new(0.0, 0.0, -1.0);
        assert!(clonability_check(&up, &down));
        assert!(overlap(&up, &down).abs() < ARITH_TOL);
        assert!(clonability_check(&resource(), &BlochVector::new(0.6, 0.0, 0.5)));
        assert!(!clonability_check(&up, &BlochVector::new(0.6, 0.0, 0.5)));
    }

    #[test]
    fn hyperplane_examples() {
        let pair = hyperplane_pair(&resource(), 0.6, 0.0).unwrap();
        assert!((pair.r_plus.0 - Vector3::new(0.6, 0.0, 0.5)).norm() < ARITH_TOL);
        assert!((pair.r_minus.0 - Vector3::new(0.6, 0.0, -0.5)).norm() < ARITH_TOL);
        assert!((resource().dot(&pair.r_plus) - 1.0).abs() < ARITH_TOL);
        assert!((resource().dot(&pair.r_minus) + 1.0).abs() < ARITH_TOL);

        let axial = hyperplane_pair(&resource(), 0.0, 0.0).unwrap();
        assert!((axial.r_plus.0 - Vector3::new(0.0, 0.0, 0.5)).norm() < ARITH_TOL);
        assert!((axial.overlap() - 0.375).abs() < ARITH_TOL);

        assert!(matches!(
            hyperplane_pair(&BlochVector::new(0.0, 0.0, 1.0001), 0.9, 0.0),
            Err(Error::TransverseTooLarge { .. })
        ));
        assert!(matches!(hyperplane_pair(&BlochVector::new(0.0, 0.0, 0.9), 0.1, 0.0), Err(Error::NotViolating { .. })));
    }

    #[test]
    fn frame_is_right_handed_at_the_poles() {
        for axis in [Direction::z(), Direction::z().flipped(), Direction::x()] {
            assert!(Frame::for_axis(axis).is_right_handed(ARITH_TOL));
        }
        let f = Frame::for_axis(Direction::z());
        assert_eq!(f.m_hat, Direction::x());
        assert!(f.rotated(0.7).is_right_handed(ARITH_TOL));
    }

    #[test]
    fn povm_examples() {
        let povm = discrimination_povm(&resource()).unwrap();
        let even = ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 0.0, 1.0]);
        let odd = ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 1.0, 0.0]);
        assert!(povm.p_plus.max_abs_diff(&even) < ARITH_TOL);
        assert!(povm.p_minus.max_abs_diff(&odd) < ARITH_TOL);

        let povm = discrimination_povm(&BlochVector::new(1.0, -2.0, 0.3)).unwrap();
        assert!((&povm.p_plus * &povm.p_minus).max_abs() < ARITH_TOL);
        for p in [&povm.p_plus, &povm.p_minus] {
            assert_eq!(hermitian_eigensystem(p).unwrap().rank(1e-9), 2);
        }
        assert!(discrimination_povm(&BlochVector::new(0.0, 0.0, 0.9)).is_err());
    }

    #[test]
    fn discriminate_examples() {
        let pair = hyperplane_pair(&resource(), 0.6, 0.0).unwrap();
        let plus = discriminate(&resource(), &pair, Outcome::Plus).unwrap();
        assert_eq!(plus.label, Outcome::Plus);
        assert!((plus.q_plus - 1.0).abs() < SPECTRAL_TOL);
        let minus = discriminate(&resource(), &pair, Outcome::Minus).unwrap();
        assert_eq!(minus.label, Outcome::Minus);
        assert!((minus.q_minus - 1.0).abs() < SPECTRAL_TOL);

        // a quantum resource cannot be forced through
        let weak = BlochVector::new(0.0, 0.0, 0.9);
        assert!(matches!(discriminate(&weak, &pair, Outcome::Plus), Err(Error::NotViolating { .. })));
    }

    #[test]
    fn discriminate_rejects_pair_off_the_planes() {
        let mut pair = hyperplane_pair(&resource(), 0.3, 0.2).unwrap();
        pair.r_plus = BlochVector::new(0.3, 0.2, 0.1);
        assert!(matches!(discriminate(&resource(), &pair, Outcome::Plus), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn clone_examples() {
        let pair = hyperplane_pair(&resource(), 0.6, 0.0).unwrap();
        for which in Outcome::BOTH {
            let out = clone_protocol(&resource(), &pair, which).unwrap();
            let single = to_operator(&pair.state(which));
            assert!(out.output.matrix().max_abs_diff(&kron(single.matrix(), single.matrix())) < ARITH_TOL);
        }
        let out = clone_protocol(&resource(), &pair, Outcome::Plus).unwrap();
        let target = to_operator(&pair.r_plus).tensor(&to_operator(&pair.r_plus));
        let fidelity = expectation(target.matrix(), &out.output).unwrap();
        let purity = 0.5 * (1.0 + pair.r_plus.norm().powi(2));
        assert!((fidelity - purity * purity).abs() < ARITH_TOL);
    }

    #[test]
    fn bell_expansion_pattern() {
        let r = BlochVector::new(0.7, 1.2, -0.4);
        let pair = hyperplane_pair(&r, 0.25, -0.3).unwrap();
        let bells = bell_projectors(&pair.frame);
        for b in &bells {
            assert!((&(b * b) - b).max_abs() < ARITH_TOL);
            assert_eq!(hermitian_eigensystem(b).unwrap().rank(1e-9), 1);
        }
        let povm = discrimination_povm(&r).unwrap();
        assert!((&bells[0] + &bells[2]).max_abs_diff(&povm.p_plus) < ARITH_TOL);
        assert!((&bells[1] + &bells[3]).max_abs_diff(&povm.p_minus) < ARITH_TOL);

        let with_plus = to_operator(&r).tensor(&to_operator(&pair.r_plus));
        let with_minus = to_operator(&r).tensor(&to_operator(&pair.r_minus));
        // [phi+, phi-, psi+, psi-] against rho (x) rho+ and rho (x) rho-
        let expected_plus = [0.5, 0.0, 0.5, 0.0];
        let expected_minus = [0.0, 0.5, 0.0, 0.5];
        for (k, b) in bells.iter().enumerate() {
            assert!((expectation(b, &with_plus).unwrap() - expected_plus[k]).abs() < SPECTRAL_TOL);
            assert!((expectation(b, &with_minus).unwrap() - expected_minus[k]).abs() < SPECTRAL_TOL);
        }
    }

    #[test]
    fn bell_projectors_in_standard_frame() {
        let f = Frame { r_hat: Direction::x(), m_hat: Direction::y(), n_hat: Direction::z() };
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi_plus =
            crate::operator::StateVector::from_vec([s, 0.0, 0.0, s].iter().map(|&x| crate::operator::re(x)).collect());
        assert!(bell_projectors(&f)[0].max_abs_diff(&ComplexMatrix::projector(&phi_plus)) < ARITH_TOL);
    }

    #[test]
    fn plane_discs() {
        let discs = hyperplane_discs(&resource()).unwrap();
        for d in &discs {
            for (_, p) in d.boundary(16) {
                assert!((p.norm() - 1.0).abs() < ARITH_TOL);
                assert!((resource().0.dot(&p) - d.sign).abs() < ARITH_TOL);
            }
        }
        assert!(hyperplane_discs(&BlochVector::new(0.0, 0.5, 0.0)).is_err());
    }
}
