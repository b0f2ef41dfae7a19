//! Seeded random generators for states, local operators, and Hermitian
//! matrices. All samplers take an explicit `Rng` so parallel runs and
//! test fixtures stay deterministic.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::linalg::{CMatrix, CVector};
use crate::tensor::{HilbertShape, LocalOperator, PureState};

/// Standard normal via Box-Muller; avoids pulling in a distributions crate.
pub fn std_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn std_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(std_normal(rng), std_normal(rng))
}

pub fn random_complex_matrix(d: usize, rng: &mut impl Rng) -> CMatrix {
    DMatrix::from_fn(d, d, |_, _| std_complex(rng))
}

pub fn random_hermitian(d: usize, rng: &mut impl Rng) -> CMatrix {
    let g = random_complex_matrix(d, rng);
    (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Ginibre matrix rescaled to determinant one, rejecting condition numbers
/// above `cond_limit`.
pub fn random_special_factor(d: usize, cond_limit: f64, rng: &mut impl Rng) -> CMatrix {
    loop {
        let g = random_complex_matrix(d, rng);
        let det = g.determinant();
        if det.norm() < 1e-8 {
            continue;
        }
        let scale = det.powf(-1.0 / d as f64);
        let m = g * scale;
        let rc = crate::linalg::rcond(&m);
        if rc > 1.0 / cond_limit {
            return m;
        }
    }
}

/// Haar-like unitary from the QR of a Ginibre matrix, phase-fixed so the
/// determinant is one.
pub fn random_special_unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
    let g = random_complex_matrix(d, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    // fix column phases so the factorization is unique
    for j in 0..d {
        let rjj = r[(j, j)];
        if rjj.norm() > 0.0 {
            let phase = rjj / rjj.norm();
            for i in 0..d {
                q[(i, j)] *= phase;
            }
        }
    }
    let det = q.determinant();
    q * det.powf(-1.0 / d as f64)
}

/// Random element of G: per-party Ginibre factors scaled to determinant one.
pub fn random_local_special(shape: &HilbertShape, cond_limit: f64, rng: &mut impl Rng) -> LocalOperator {
    let factors = shape
        .dims()
        .iter()
        .map(|&d| random_special_factor(d, cond_limit, rng))
        .collect();
    LocalOperator::new(shape.clone(), factors).expect("sampled factors match shape")
}

/// Random element of K: per-party special unitaries.
pub fn random_local_unitary(shape: &HilbertShape, rng: &mut impl Rng) -> LocalOperator {
    let factors = shape
        .dims()
        .iter()
        .map(|&d| random_special_unitary(d, rng))
        .collect();
    LocalOperator::new(shape.clone(), factors).expect("sampled factors match shape")
}

pub fn random_state(shape: &HilbertShape, rng: &mut impl Rng) -> PureState {
    let d = shape.total_dim();
    let amp = CVector::from_fn(d, |_, _| std_complex(rng));
    PureState::new(shape.clone(), amp).expect("random amplitudes are nonzero")
}

/// Random point on the probability simplex (symmetric Dirichlet, alpha = 1).
pub fn random_distribution(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// Random descending Schmidt spectrum of full rank d.
pub fn random_schmidt_spectrum(d: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let mut v = random_distribution(d, rng);
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        if *v.last().unwrap() > 1e-3 {
            return v;
        }
    }
}
