//! Dense multi-qudit pure states and tensor-product (local) operators.
//!
//! Amplitudes are stored row-major with party 0 as the slowest index, so the
//! assembled matrix of a [`LocalOperator`] is the Kronecker product of its
//! factors in party order. Global phase is never stored or fixed; states are
//! compared through `|<a|b>|`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

/// Largest supported total dimension. Desk scale only.
pub const MAX_TOTAL_DIM: usize = 4096;

/// Construction-time tolerance for unit norm, unitarity, and det-1 flags.
pub const CONSTRUCTION_TOL: f64 = 1e-10;

/// Party dimensions d_0..d_{n-1} of a multi-qudit Hilbert space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HilbertShape {
    dims: Vec<usize>,
}

impl HilbertShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("at least one party required".into()));
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidShape(format!(
                "party dimension {d} below 2"
            )));
        }
        let total: usize = dims.iter().product();
        if total > MAX_TOTAL_DIM {
            return Err(Error::DimensionTooLarge(total, MAX_TOTAL_DIM));
        }
        Ok(Self { dims })
    }

    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// (block, stride) pair for party k: amp index = block*(d_k*stride) + i*stride + rest.
    fn split(&self, party: usize) -> (usize, usize) {
        let left: usize = self.dims[..party].iter().product();
        let right: usize = self.dims[party + 1..].iter().product();
        (left, right)
    }
}

impl std::fmt::Display for HilbertShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, d) in self.dims.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

/// A unit vector on a multi-qudit Hilbert space.
#[derive(Clone, Debug)]
pub struct PureState {
    shape: HilbertShape,
    amp: CVector,
}

impl PureState {
    /// Normalizes on construction; rejects the zero vector.
    pub fn new(shape: HilbertShape, amp: CVector) -> Result<Self> {
        if amp.len() != shape.total_dim() {
            return Err(Error::ShapeMismatch(format!(
                "amplitude length {} does not match shape {} (total {})",
                amp.len(),
                shape,
                shape.total_dim()
            )));
        }
        let norm = amp.norm();
        if norm < 1e-14 {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            shape,
            amp: amp / Complex64::new(norm, 0.0),
        })
    }

    pub fn shape(&self) -> &HilbertShape {
        &self.shape
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amp
    }

    /// Computational basis state |i_0 i_1 ... i_{n-1}>.
    pub fn basis(shape: HilbertShape, indices: &[usize]) -> Result<Self> {
        if indices.len() != shape.parties() {
            return Err(Error::ShapeMismatch(
                "one index per party required".into(),
            ));
        }
        let mut flat = 0usize;
        for (k, &i) in indices.iter().enumerate() {
            if i >= shape.dims()[k] {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    parties: shape.dims()[k],
                });
            }
            flat = flat * shape.dims()[k] + i;
        }
        let mut amp = CVector::zeros(shape.total_dim());
        amp[flat] = linalg::C_ONE;
        Self::new(shape, amp)
    }

    /// Bipartite maximally entangled state sum_i |ii> / sqrt(d).
    pub fn max_entangled(d: usize) -> Result<Self> {
        let shape = HilbertShape::new(vec![d, d])?;
        let mut amp = CVector::zeros(d * d);
        for i in 0..d {
            amp[i * d + i] = linalg::C_ONE;
        }
        Self::new(shape, amp)
    }

    pub fn bell() -> Self {
        Self::max_entangled(2).unwrap()
    }

    /// n-qubit GHZ state (|0..0> + |1..1>)/sqrt(2).
    pub fn ghz(n: usize) -> Result<Self> {
        let shape = HilbertShape::qubits(n)?;
        let d = shape.total_dim();
        let mut amp = CVector::zeros(d);
        amp[0] = linalg::C_ONE;
        amp[d - 1] = linalg::C_ONE;
        Self::new(shape, amp)
    }

    /// n-qubit W state: uniform superposition of weight-one basis states.
    pub fn w(n: usize) -> Result<Self> {
        let shape = HilbertShape::qubits(n)?;
        let d = shape.total_dim();
        let mut amp = CVector::zeros(d);
        let mut bit = 1usize;
        for _ in 0..n {
            amp[bit] = linalg::C_ONE;
            bit <<= 1;
        }
        Self::new(shape, amp)
    }

    /// Schmidt-diagonal bipartite state sum_i sqrt(p_i) |ii>.
    pub fn from_schmidt(spectrum: &[f64]) -> Result<Self> {
        let d = spectrum.len();
        if spectrum.iter().any(|&p| p < -1e-12) {
            return Err(Error::InvalidInput("negative Schmidt weight".into()));
        }
        let shape = HilbertShape::new(vec![d, d])?;
        let mut amp = CVector::zeros(d * d);
        for (i, &p) in spectrum.iter().enumerate() {
            amp[i * d + i] = Complex64::new(p.max(0.0).sqrt(), 0.0);
        }
        Self::new(shape, amp)
    }

    /// <self|other>, conjugate-linear in self.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amp.dotc(&other.amp)
    }

    /// |<self|other>|; 1 means equal up to global phase.
    pub fn overlap(&self, other: &Self) -> f64 {
        self.inner(other).norm()
    }

    pub fn projector(&self) -> CMatrix {
        let d = self.amp.len();
        CMatrix::from_fn(d, d, |i, j| self.amp[i] * self.amp[j].conj())
    }
}

/// A tensor product A_0 (x) ... (x) A_{n-1} of per-party square matrices.
#[derive(Clone, Debug)]
pub struct LocalOperator {
    shape: HilbertShape,
    factors: Vec<CMatrix>,
    is_unitary: bool,
    is_special: bool,
}

impl LocalOperator {
    pub fn new(shape: HilbertShape, factors: Vec<CMatrix>) -> Result<Self> {
        if factors.len() != shape.parties() {
            return Err(Error::ShapeMismatch(format!(
                "{} factors supplied for {} parties",
                factors.len(),
                shape.parties()
            )));
        }
        for (k, f) in factors.iter().enumerate() {
            let d = shape.dims()[k];
            if f.nrows() != d || f.ncols() != d {
                return Err(Error::ShapeMismatch(format!(
                    "factor {k} is {}x{}, expected {d}x{d}",
                    f.nrows(),
                    f.ncols()
                )));
            }
        }
        let is_unitary = factors.iter().all(|f| {
            let d = f.nrows();
            linalg::frobenius(&(f.adjoint() * f - linalg::identity(d))) <= CONSTRUCTION_TOL
        });
        let is_special = factors
            .iter()
            .all(|f| (f.determinant() - linalg::C_ONE).norm() <= CONSTRUCTION_TOL);
        Ok(Self {
            shape,
            factors,
            is_unitary,
            is_special,
        })
    }

    pub fn identity(shape: HilbertShape) -> Self {
        let factors = shape.dims().iter().map(|&d| linalg::identity(d)).collect();
        Self::new(shape, factors).unwrap()
    }

    pub fn shape(&self) -> &HilbertShape {
        &self.shape
    }

    pub fn factors(&self) -> &[CMatrix] {
        &self.factors
    }

    pub fn is_unitary(&self) -> bool {
        self.is_unitary
    }

    pub fn is_special(&self) -> bool {
        self.is_special
    }

    pub fn determinant(&self) -> Complex64 {
        self.factors.iter().map(|f| f.determinant()).product()
    }

    /// Smallest reciprocal condition number over the factors, with the party
    /// attaining it.
    pub fn min_rcond(&self) -> (usize, f64) {
        let mut worst = (0, f64::INFINITY);
        for (k, f) in self.factors.iter().enumerate() {
            let rc = linalg::rcond(f);
            if rc < worst.1 {
                worst = (k, rc);
            }
        }
        worst
    }

    fn require_invertible(&self) -> Result<()> {
        let (party, rc) = self.min_rcond();
        if rc < 1e-12 {
            return Err(Error::SingularFactor { party, rcond: rc });
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        let factors = self.factors.iter().map(|f| f.adjoint()).collect();
        Self::new(self.shape.clone(), factors).unwrap()
    }

    pub fn inverse(&self) -> Result<Self> {
        self.require_invertible()?;
        let mut factors = Vec::with_capacity(self.factors.len());
        for (k, f) in self.factors.iter().enumerate() {
            let inv = f.clone().try_inverse().ok_or(Error::SingularFactor {
                party: k,
                rcond: linalg::rcond(f),
            })?;
            factors.push(inv);
        }
        Self::new(self.shape.clone(), factors)
    }

    /// Assembled D x D matrix (Kronecker product of the factors).
    pub fn assembled(&self) -> CMatrix {
        linalg::kron_all(&self.factors)
    }

    /// Apply the operator to a raw amplitude vector, factor by factor.
    pub fn apply_vec(&self, amp: &CVector) -> CVector {
        let mut cur = amp.clone();
        for (party, f) in self.factors.iter().enumerate() {
            let d = self.shape.dims()[party];
            let (left, right) = self.shape.split(party);
            let mut next = CVector::zeros(cur.len());
            for l in 0..left {
                for r in 0..right {
                    for i in 0..d {
                        let mut acc = linalg::C_ZERO;
                        for j in 0..d {
                            acc += f[(i, j)] * cur[(l * d + j) * right + r];
                        }
                        next[(l * d + i) * right + r] = acc;
                    }
                }
            }
            cur = next;
        }
        cur
    }

    /// Conjugation adj(self) * sigma * self without assembling self.
    pub fn sandwich(&self, sigma: &CMatrix) -> CMatrix {
        let d = self.shape.total_dim();
        // adj(A) * sigma: apply adj factor-wise to each column
        let mut left = CMatrix::zeros(d, d);
        let adj = self.adjoint();
        for j in 0..d {
            let col = CVector::from_column_slice(sigma.column(j).as_slice());
            left.set_column(j, &adj.apply_vec(&col));
        }
        // (adj(A) sigma) * A = adjoint(adj(A) * adjoint(adj(A) sigma))
        let mut out = CMatrix::zeros(d, d);
        let left_adj = left.adjoint();
        for j in 0..d {
            let col = CVector::from_column_slice(left_adj.column(j).as_slice());
            out.set_column(j, &adj.apply_vec(&col));
        }
        out.adjoint()
    }
}

/// Orbit action: returns the normalized image g|s>/||g s|| together with the
/// pre-normalization norm ||g s||.
pub fn apply(op: &LocalOperator, s: &PureState) -> Result<(PureState, f64)> {
    if op.shape() != s.shape() {
        return Err(Error::ShapeMismatch(format!(
            "operator shape {} vs state shape {}",
            op.shape(),
            s.shape()
        )));
    }
    op.require_invertible()?;
    let image = op.apply_vec(s.amplitudes());
    let norm = image.norm();
    if norm < 1e-14 {
        return Err(Error::ZeroVector);
    }
    Ok((PureState::new(s.shape().clone(), image)?, norm))
}

/// Reduced density matrix of one party (all others traced out).
pub fn reduced_density(s: &PureState, party: usize) -> Result<CMatrix> {
    let n = s.shape().parties();
    if party >= n {
        return Err(Error::IndexOutOfRange { index: party, parties: n });
    }
    let d = s.shape().dims()[party];
    let (left, right) = s.shape().split(party);
    let amp = s.amplitudes();
    let mut rho = CMatrix::zeros(d, d);
    for l in 0..left {
        for r in 0..right {
            for i in 0..d {
                let ai = amp[(l * d + i) * right + r];
                for j in 0..d {
                    let aj = amp[(l * d + j) * right + r];
                    rho[(i, j)] += ai * aj.conj();
                }
            }
        }
    }
    Ok(rho)
}

/// Party-wise product: (a o b)_k = a_k b_k, flags recomputed.
pub fn compose(a: &LocalOperator, b: &LocalOperator) -> Result<LocalOperator> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "operator shapes {} vs {}",
            a.shape(),
            b.shape()
        )));
    }
    let factors = a
        .factors()
        .iter()
        .zip(b.factors())
        .map(|(x, y)| x * y)
        .collect();
    LocalOperator::new(a.shape().clone(), factors)
}

/// Pauli matrices and friends used by the catalogs.
pub mod gates {
    use super::*;

    pub fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[
            linalg::C_ZERO, linalg::C_ONE,
            linalg::C_ONE, linalg::C_ZERO,
        ])
    }

    pub fn pauli_y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[
            linalg::C_ZERO, Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0), linalg::C_ZERO,
        ])
    }

    pub fn pauli_z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[
            linalg::C_ONE, linalg::C_ZERO,
            linalg::C_ZERO, Complex64::new(-1.0, 0.0),
        ])
    }

    pub fn diag2(a: Complex64, b: Complex64) -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[a, linalg::C_ZERO, linalg::C_ZERO, b])
    }

    /// C (x) C (x) ... (x) C on n qubits.
    pub fn uniform_qubit_operator(c: &CMatrix, n: usize) -> LocalOperator {
        let shape = HilbertShape::qubits(n).unwrap();
        LocalOperator::new(shape, vec![c.clone(); n]).unwrap()
    }
}
