//! Associate density matrices and their spectra.
//!
//! For a target phi = g psi / ||g psi|| in the orbit of a representative
//! psi, the ADM is g^dag g / ||g psi||^2: positive definite, a product
//! operator, with <psi|rho|psi> = 1, and defined up to conjugation by the
//! stabilizer of psi. Its ordered spectrum drives the tail-sum monotones
//! E_k and the majorization tests.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::stabilizer::StabilizerGroup;
use crate::tensor::{apply, LocalOperator, PureState};

/// Trace-equality tolerance for majorization comparisons.
pub const TRACE_TOL: f64 = 1e-9;

/// Associate density matrix in factored and assembled form.
#[derive(Clone, Debug)]
pub struct Adm {
    /// per-party g_l^dag g_l, unscaled
    local_factors: Vec<CMatrix>,
    /// per-party factors scaled so their Kronecker product is `matrix`
    scaled_factors: Vec<CMatrix>,
    matrix: CMatrix,
    norm_sq: f64,
    source: LocalOperator,
}

impl Adm {
    pub fn local_factors(&self) -> &[CMatrix] {
        &self.local_factors
    }

    /// Factors rescaled by ||g psi||^(-2/n); their Kronecker product equals
    /// the assembled matrix exactly.
    pub fn scaled_factors(&self) -> &[CMatrix] {
        &self.scaled_factors
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn source(&self) -> &LocalOperator {
        &self.source
    }

    pub fn dims(&self) -> &[usize] {
        self.source.shape().dims()
    }

    /// The target state g psi / ||g psi|| this ADM belongs to.
    pub fn target(&self, psi: &PureState) -> Result<PureState> {
        Ok(apply(&self.source, psi)?.0)
    }

    /// Descending spectrum of the assembled matrix.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::herm_eigenvalues(&self.matrix)
    }
}

/// Build the ADM of g with respect to the representative psi.
pub fn adm_of(psi: &PureState, g: &LocalOperator) -> Result<Adm> {
    let (_, norm) = apply(g, psi)?;
    let norm_sq = norm * norm;
    let n = g.shape().parties();
    let local_factors: Vec<CMatrix> = g.factors().iter().map(|f| f.adjoint() * f).collect();
    let scale = Complex64::new(norm_sq.powf(-1.0 / n as f64), 0.0);
    let scaled_factors: Vec<CMatrix> = local_factors.iter().map(|f| f * scale).collect();
    let matrix = linalg::kron_all(&scaled_factors);
    let min_eig = linalg::lambda_min(&matrix);
    if min_eig <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "associate density matrix is not positive definite (min eigenvalue {min_eig:.3e})"
        )));
    }
    Ok(Adm {
        local_factors,
        scaled_factors,
        matrix,
        norm_sq,
        source: g.clone(),
    })
}

/// Tail sums E_k = sum_{m >= k} lambda_m of a descending spectrum.
#[derive(Clone, Debug)]
pub struct MonotoneVector {
    e: Vec<f64>,
}

impl MonotoneVector {
    /// E_k for k = 1..D as e()[k-1].
    pub fn e(&self) -> &[f64] {
        &self.e
    }

    pub fn len(&self) -> usize {
        self.e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e.is_empty()
    }
}

pub fn monotones(rho: &Adm) -> MonotoneVector {
    monotones_of_spectrum(&rho.eigenvalues())
}

/// Monotones of any positive matrix (twirled ADMs included).
pub fn monotones_of_matrix(m: &CMatrix) -> MonotoneVector {
    monotones_of_spectrum(&linalg::herm_eigenvalues(m))
}

pub fn monotones_of_spectrum(descending: &[f64]) -> MonotoneVector {
    let mut e = vec![0.0; descending.len()];
    let mut acc = 0.0;
    for (i, &v) in descending.iter().enumerate().rev() {
        acc += v;
        e[i] = acc;
    }
    MonotoneVector { e }
}

/// True when `dominated` is majorized by `dominant`: every partial sum of
/// the descending spectrum of `dominated` is at most the corresponding sum
/// for `dominant`, and the totals agree within [`TRACE_TOL`]. A trace
/// mismatch beyond tolerance is a `false` verdict, not an error.
pub fn majorizes(dominant: &Adm, dominated: &Adm) -> bool {
    majorizes_spectra(&dominant.eigenvalues(), &dominated.eigenvalues())
}

pub fn majorizes_spectra(dominant: &[f64], dominated: &[f64]) -> bool {
    if dominant.len() != dominated.len() {
        return false;
    }
    let total_a: f64 = dominant.iter().sum();
    let total_b: f64 = dominated.iter().sum();
    if (total_a - total_b).abs() > TRACE_TOL {
        return false;
    }
    let mut sum_a = 0.0;
    let mut sum_b = 0.0;
    for (a, b) in dominant.iter().zip(dominated) {
        sum_a += a;
        sum_b += b;
        if sum_b > sum_a + 1e-9 {
            return false;
        }
    }
    true
}

/// True when the ADM commutes with every element of the (unitary)
/// stabilizer, which holds exactly when the target state's stabilizer is
/// unitary as well.
pub fn unitary_stab_test(rho: &Adm, stab: &StabilizerGroup) -> Result<bool> {
    if !stab.is_unitary() {
        return Err(Error::NonUnitaryStabilizer);
    }
    for e in stab.elements() {
        if linalg::commutator_norm(rho.matrix(), &e.assembled()) > 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}
