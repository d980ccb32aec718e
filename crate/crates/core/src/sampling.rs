//! Seeded random instances for sweeps and verification runs.

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bloch::{BlochVector, Direction};
use crate::operator::StateVector;

pub use rand::SeedableRng;

pub type SeededRng = ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 42;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform direction on the unit sphere.
pub fn direction(rng: &mut impl Rng) -> Direction {
    loop {
        let v = Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        if v.norm() > 1e-6 {
            return Direction::normalize(v).expect("non-zero");
        }
    }
}

/// Uniform direction scaled to `norm`.
pub fn bloch_with_norm(rng: &mut impl Rng, norm: f64) -> BlochVector {
    BlochVector(direction(rng).vector() * norm)
}

/// Bloch vector with norm drawn uniformly from `[lo, hi]`.
pub fn bloch_in_shell(rng: &mut impl Rng, lo: f64, hi: f64) -> BlochVector {
    let norm = rng.random_range(lo..=hi);
    bloch_with_norm(rng, norm)
}

/// Transverse components `(y, z)` uniform in the disc of radius `sqrt(1 - 1/r^2)`.
pub fn admissible_transverse(rng: &mut impl Rng, r: f64) -> (f64, f64) {
    let radius = (1.0 - 1.0 / (r * r)).max(0.0).sqrt();
    let rho = radius * rng.random::<f64>().sqrt();
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    (rho * angle.cos(), rho * angle.sin())
}

/// Haar-like orthonormal basis from Gram-Schmidt on Gaussian vectors.
pub fn unitary_basis(rng: &mut impl Rng, d: usize) -> Vec<StateVector> {
    let mut basis: Vec<StateVector> = Vec::with_capacity(d);
    while basis.len() < d {
        let mut v =
            StateVector::from_fn(d, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        for b in &basis {
            let proj = b.dotc(&v);
            v -= b * proj;
        }
        let norm = v.norm();
        if norm > 1e-6 {
            basis.push(v.unscale(norm));
        }
    }
    basis
}

/// `d - 1` eigenvalues summing exactly to `-epsilon`, none above `1 + epsilon`.
pub fn spectrum(rng: &mut impl Rng, d: usize, epsilon: f64) -> Vec<f64> {
    let k = d - 1;
    loop {
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mean = raw.iter().sum::<f64>() / k as f64;
        let mut lambdas: Vec<f64> = raw.iter().map(|x| x - mean - epsilon / k as f64).collect();
        // pin the sum exactly by absorbing the rounding residue in the last entry
        let head: f64 = lambdas[..k - 1].iter().sum();
        lambdas[k - 1] = -epsilon - head;
        if lambdas.iter().all(|&l| l <= 1.0 + epsilon) {
            return lambdas;
        }
    }
}

pub fn phases(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect()
}

/// Uniformly random pure state in `d` dimensions.
pub fn pure_state(rng: &mut impl Rng, d: usize) -> StateVector {
    loop {
        let v = StateVector::from_fn(d, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let norm = v.norm();
        if norm > 1e-6 {
            return v.unscale(norm);
        }
    }
}
