//! SL-invariant polynomial evaluation and null-cone detection.
//!
//! Implemented invariants: the two-qubit bilinear form (concurrence), the
//! three-qubit degree-4 invariant (3-tangle), and the four-qubit degree-2
//! invariant. `<psi*|` always means the component-wise complex conjugate in
//! the computational basis.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::stabilizer::StabilizerGroup;
use crate::tensor::{HilbertShape, PureState};

/// A named invariant value together with its homogeneity degree.
#[derive(Clone, Debug)]
pub struct InvariantValue {
    pub name: &'static str,
    pub degree: usize,
    pub value: Complex64,
}

/// Bilinear form a^T (sigma_y tensor ... tensor sigma_y) b on n qubits:
/// sum over basis states of a_b * b_{~b} * (-i)^n * (-1)^{weight(b)}.
pub(crate) fn sigma_y_bilinear(a: &CVector, b: &CVector, n: usize) -> Complex64 {
    let d = 1usize << n;
    debug_assert_eq!(a.len(), d);
    debug_assert_eq!(b.len(), d);
    let mut acc = Complex64::new(0.0, 0.0);
    for idx in 0..d {
        let comp = (d - 1) ^ idx;
        let sign = if (idx.count_ones() & 1) == 1 { -1.0 } else { 1.0 };
        acc += a[idx] * b[comp] * Complex64::new(sign, 0.0);
    }
    let minus_i = Complex64::new(0.0, -1.0);
    acc * minus_i.powu(n as u32)
}

fn require_qubits(psi: &PureState, n: usize) -> Result<()> {
    if psi.shape() != &HilbertShape::qubits(n).unwrap() {
        return Err(Error::ShapeMismatch(format!(
            "expected {n} qubits, got shape {}",
            psi.shape()
        )));
    }
    Ok(())
}

/// Degree-2 invariant of two qubits; |f2| is the concurrence.
pub fn f2_bipartite(psi: &PureState) -> Result<Complex64> {
    require_qubits(psi, 2)?;
    Ok(sigma_y_bilinear(psi.amplitudes(), psi.amplitudes(), 2))
}

/// Degree-4 invariant of three qubits; |f4| is the 3-tangle.
///
/// With |psi> = |0>|phi_0> + |1>|phi_1>, this is the determinant of the
/// 2x2 Gram-like matrix of the two-qubit bilinear forms (phi_i, phi_j).
pub fn f4_three_qubit(psi: &PureState) -> Result<Complex64> {
    require_qubits(psi, 3)?;
    let amp = psi.amplitudes();
    let phi0 = CVector::from_fn(4, |i, _| amp[i]);
    let phi1 = CVector::from_fn(4, |i, _| amp[4 + i]);
    let g00 = sigma_y_bilinear(&phi0, &phi0, 2);
    let g01 = sigma_y_bilinear(&phi0, &phi1, 2);
    let g10 = sigma_y_bilinear(&phi1, &phi0, 2);
    let g11 = sigma_y_bilinear(&phi1, &phi1, 2);
    Ok(g00 * g11 - g01 * g10)
}

/// Degree-2 invariant of four qubits; on the critical family it equals
/// z0^2 + z1^2 + z2^2 + z3^2 in the u-basis coefficients.
pub fn f2_four_qubit(psi: &PureState) -> Result<Complex64> {
    require_qubits(psi, 4)?;
    Ok(sigma_y_bilinear(psi.amplitudes(), psi.amplitudes(), 4))
}

/// Every implemented invariant applicable to the state's shape.
pub fn applicable_invariants(psi: &PureState) -> Vec<InvariantValue> {
    let mut out = Vec::new();
    if let Ok(v) = f2_bipartite(psi) {
        out.push(InvariantValue { name: "f2", degree: 2, value: v });
    }
    if let Ok(v) = f4_three_qubit(psi) {
        out.push(InvariantValue { name: "f4", degree: 4, value: v });
    }
    if let Ok(v) = f2_four_qubit(psi) {
        out.push(InvariantValue { name: "f2_four_qubit", degree: 2, value: v });
    }
    out
}

/// `Some(true)` when every applicable invariant vanishes below 1e-10 —
/// consistent with the null cone, never a proof. `None` when no invariant
/// is implemented for the shape.
pub fn null_cone_flag(psi: &PureState) -> Option<bool> {
    let values = applicable_invariants(psi);
    if values.is_empty() {
        None
    } else {
        Some(values.iter().all(|v| v.value.norm() < 1e-10))
    }
}

/// Outcome of the stabilizer phase check.
#[derive(Clone, Debug)]
pub struct PhaseCheck {
    pub pass: bool,
    pub degree: usize,
    /// (element index, extracted phase a) for every element with a^k != 1
    pub violations: Vec<(usize, Complex64)>,
}

/// Evaluate the invariant of the given degree for the state's shape.
fn invariant_of_degree(psi: &PureState, degree: usize) -> Result<Complex64> {
    let dims = psi.shape().dims();
    match (dims, degree) {
        ([2, 2], 2) => f2_bipartite(psi),
        ([2, 2, 2], 4) => f4_three_qubit(psi),
        ([2, 2, 2, 2], 2) => f2_four_qubit(psi),
        _ => Err(Error::UnknownInvariant {
            degree,
            shape: psi.shape().to_string(),
        }),
    }
}

/// For every stabilizer element g' = a g with g determinant-normalized,
/// check a^k = 1, where k is the degree of a non-vanishing invariant of
/// the state. The phase a is the product over parties of the d_l-th root
/// of the factor determinant (principal branch).
pub fn stabilizer_phase_check(
    group: &StabilizerGroup,
    degree: usize,
    psi: &PureState,
) -> Result<PhaseCheck> {
    let value = invariant_of_degree(psi, degree)?;
    if value.norm() <= 1e-10 {
        return Err(Error::VanishingInvariant(value.norm()));
    }
    let mut violations = Vec::new();
    for (index, e) in group.elements().iter().enumerate() {
        let mut a = Complex64::new(1.0, 0.0);
        for f in e.factors() {
            let det = f.determinant();
            a *= det.powf(1.0 / f.nrows() as f64);
        }
        let ak = a.powu(degree as u32);
        if (ak - Complex64::new(1.0, 0.0)).norm() > 1e-8 {
            violations.push((index, a));
        }
    }
    Ok(PhaseCheck {
        pass: violations.is_empty(),
        degree,
        violations,
    })
}
