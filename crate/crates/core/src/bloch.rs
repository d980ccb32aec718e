//! Qubit preparations as Bloch vectors.
//!
//! A preparation is a real 3-vector `r` whose norm may exceed one. Outcome
//! probabilities for `sigma . n` are `(1 +/- r.n) / 2`, which stay inside
//! `[0, 1]` only for the allowed directions `|r.n| <= 1`. The operator form
//! `(I + r.sigma) / 2` is positive exactly when `|r| <= 1`.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::operator::{expectation, validate_quasistate, ComplexMatrix, QuasiState, ARITH_TOL};

/// Real Bloch vector. Any finite components are accepted.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector(pub Vector3<f64>);

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self(Vector3::new(x, y, z))
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self(Vector3::from(v))
    }

    pub fn to_array(self) -> [f64; 3] {
        self.0.into()
    }

    pub fn zero() -> Self {
        Self(Vector3::zeros())
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Unit direction of `r`, or `None` for the zero vector.
    pub fn direction(&self) -> Option<Direction> {
        let norm = self.norm();
        (norm > 0.0).then(|| Direction(self.0 / norm))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0 * factor)
    }
}

/// Unit real 3-vector selecting the dichotomic measurement `sigma . n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction(Vector3<f64>);

impl Direction {
    pub fn new(v: Vector3<f64>) -> Result<Self> {
        let norm = v.norm();
        if (norm - 1.0).abs() > ARITH_TOL {
            return Err(Error::NonUnitVector { norm });
        }
        Ok(Self(v))
    }

    pub fn from_array(v: [f64; 3]) -> Result<Self> {
        Self::new(Vector3::from(v))
    }

    /// Normalizes any non-zero vector.
    pub fn normalize(v: Vector3<f64>) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NonUnitVector { norm });
        }
        Ok(Self(v / norm))
    }

    pub fn x() -> Self {
        Self(Vector3::x())
    }

    pub fn y() -> Self {
        Self(Vector3::y())
    }

    pub fn z() -> Self {
        Self(Vector3::z())
    }

    pub fn vector(&self) -> Vector3<f64> {
        self.0
    }

    pub fn to_array(self) -> [f64; 3] {
        self.0.into()
    }

    pub fn flipped(&self) -> Self {
        Self(-self.0)
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        self.0.dot(&other.0)
    }

    /// The observable `sigma . n`.
    pub fn observable(&self) -> ComplexMatrix {
        ComplexMatrix::pauli_combination(self.to_array())
    }
}

/// Outcome of a dichotomic measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }
}

/// `p(outcome | r, sigma . n) = (1 +/- r.n) / 2`.
///
/// Directions with `|r.n| > 1` would produce values outside `[0, 1]` and are
/// rejected with [`Error::InvalidDirection`].
pub fn outcome_probability(r: &BlochVector, n: &Direction, outcome: Outcome) -> Result<f64> {
    let dot = r.0.dot(&n.0);
    if dot.abs() > 1.0 + ARITH_TOL {
        return Err(Error::InvalidDirection { dot: dot.abs() });
    }
    Ok((0.5 * (1.0 + outcome.sign() * dot)).clamp(0.0, 1.0))
}

/// Diagnostics of the qubit complementarity test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PcReport {
    pub satisfies: bool,
    pub norm: f64,
    /// `<sigma_x>, <sigma_y>, <sigma_z>` computed by the trace rule.
    pub axis_expectations: [f64; 3],
    /// Sum of the squared axis expectations.
    pub axis_sum: f64,
}

/// A preparation respects complementarity iff `|r| <= 1`.
pub fn pc_check(r: &BlochVector) -> PcReport {
    let norm = r.norm();
    let state = to_operator(r);
    let axis_expectations = [ComplexMatrix::pauli_x(), ComplexMatrix::pauli_y(), ComplexMatrix::pauli_z()]
        .map(|p| expectation(&p, &state).expect("2x2 Pauli against a qubit"));
    let axis_sum = axis_expectations.iter().map(|e| e * e).sum();
    PcReport { satisfies: norm <= 1.0 + ARITH_TOL, norm, axis_expectations, axis_sum }
}

/// `(I + r.sigma) / 2`
pub fn to_operator(r: &BlochVector) -> QuasiState {
    let m = &ComplexMatrix::identity(2) + &ComplexMatrix::pauli_combination(r.to_array());
    validate_quasistate(m.scale(0.5)).expect("(I + r.sigma)/2 is Hermitian with unit trace")
}

/// Inverts [`to_operator`]: `r_i = Tr(s sigma_i)`.
pub fn from_operator(s: &QuasiState) -> Result<BlochVector> {
    if s.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: "2x2".into(), found: format!("{0}x{0}", s.dim()) });
    }
    let m = s.matrix();
    // Tr(s sigma_x) = 2 Re s01, Tr(s sigma_y) = -2 Im s01, Tr(s sigma_z) = s00 - s11
    let off = m.get(0, 1);
    Ok(BlochVector::new(2.0 * off.re, -2.0 * off.im, m.get(0, 0).re - m.get(1, 1).re))
}

/// Rank-one projector `(I + n.sigma) / 2`.
pub fn projector_for_direction(n: &Direction) -> ComplexMatrix {
    (&ComplexMatrix::identity(2) + &n.observable()).scale(0.5)
}

/// Set of measurement directions whose `+1` outcome is certain.
///
/// For `|r| > 1` these form the circle where the plane `r_hat . n = 1/r`
/// cuts the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PredictabilityCircle {
    pub center: Vector3<f64>,
    pub radius: f64,
    pub plane_normal: Direction,
    // orthonormal pair spanning the plane
    u: Vector3<f64>,
    v: Vector3<f64>,
}

pub const DEFAULT_CIRCLE_SAMPLES: usize = 64;

impl PredictabilityCircle {
    pub fn is_degenerate(&self) -> bool {
        self.radius == 0.0
    }

    /// Point at angle `theta`, renormalized onto the sphere.
    pub fn point(&self, theta: f64) -> Direction {
        let p = self.center + self.radius * (theta.cos() * self.u + theta.sin() * self.v);
        Direction::normalize(p).expect("circle points are non-zero")
    }

    /// Deterministic grid of `count` equally spaced points.
    pub fn sample(&self, count: usize) -> Vec<Direction> {
        (0..count).map(|k| self.point(std::f64::consts::TAU * k as f64 / count as f64)).collect()
    }
}

/// Orthonormal pair completing `axis` to a right-handed frame `(axis, u, v)`.
pub(crate) fn transverse_pair(axis: &Direction) -> (Vector3<f64>, Vector3<f64>) {
    let a = axis.vector();
    let u = if a.z.abs() < 1.0 - 1e-6 {
        Vector3::z().cross(&a).normalize()
    } else {
        // near the poles: x projected off the axis (exactly x at the poles)
        (Vector3::x() - a.x * a).normalize()
    };
    let v = a.cross(&u);
    (u, v)
}

pub fn predictability_circle(r: &BlochVector) -> Option<PredictabilityCircle> {
    let norm = r.norm();
    if norm < 1.0 - ARITH_TOL {
        return None;
    }
    let axis = r.direction()?;
    let (u, v) = transverse_pair(&axis);
    if (norm - 1.0).abs() <= ARITH_TOL {
        return Some(PredictabilityCircle { center: axis.vector(), radius: 0.0, plane_normal: axis, u, v });
    }
    Some(PredictabilityCircle {
        center: axis.vector() / norm,
        radius: (1.0 - 1.0 / (norm * norm)).sqrt(),
        plane_normal: axis,
        u,
        v,
    })
}
