//! The four-qubit catalog: the critical family spanned by pairs of Bell
//! states, genericity tests, the Klein stabilizer, the L state with its
//! order-12 stabilizer, and the twirl characterization of reachable states.

use num_complex::Complex64;

use crate::adm;
use crate::error::{Error, Result};
use crate::invariants;
use crate::linalg::{self, CMatrix, CVector};
use crate::stabilizer::{twirl, StabilizerGroup};
use crate::tensor::{compose, gates, HilbertShape, LocalOperator, PureState};

pub fn omega() -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0)
}

fn bell_vector(kind: usize) -> CVector {
    // 0: phi+, 1: phi-, 2: psi+, 3: psi-
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = CVector::zeros(4);
    match kind {
        0 => {
            v[0] = Complex64::new(s, 0.0);
            v[3] = Complex64::new(s, 0.0);
        }
        1 => {
            v[0] = Complex64::new(s, 0.0);
            v[3] = Complex64::new(-s, 0.0);
        }
        2 => {
            v[1] = Complex64::new(s, 0.0);
            v[2] = Complex64::new(s, 0.0);
        }
        _ => {
            v[1] = Complex64::new(s, 0.0);
            v[2] = Complex64::new(-s, 0.0);
        }
    }
    v
}

fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

/// u_0 = |phi+>|phi+>, u_1 = |phi->|phi->, u_2 = |psi+>|psi+>,
/// u_3 = |psi->|psi->, each a Bell pair on qubits (1,2) and (3,4).
pub fn u_basis() -> [PureState; 4] {
    let shape = HilbertShape::qubits(4).unwrap();
    std::array::from_fn(|i| {
        let b = bell_vector(i);
        PureState::new(shape.clone(), kron_vec(&b, &b)).unwrap()
    })
}

/// A state z0 u0 + z1 u1 + z2 u2 + z3 u3 in the critical family.
#[derive(Clone, Debug)]
pub struct CritBasisState {
    z: [Complex64; 4],
    state: PureState,
    generic: bool,
}

impl CritBasisState {
    pub fn z(&self) -> &[Complex64; 4] {
        &self.z
    }

    pub fn state(&self) -> &PureState {
        &self.state
    }

    /// z_i^2 pairwise distinct (on the normalized coefficients).
    pub fn is_generic(&self) -> bool {
        self.generic
    }
}

/// Build the critical-family state with the given u-basis coefficients.
pub fn make_crit_state(z: &[Complex64; 4]) -> Result<CritBasisState> {
    let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-14 {
        return Err(Error::ZeroVector);
    }
    let zn: [Complex64; 4] = std::array::from_fn(|i| z[i] / norm);
    let basis = u_basis();
    let mut amp = CVector::zeros(16);
    for (i, u) in basis.iter().enumerate() {
        amp += u.amplitudes() * zn[i];
    }
    let state = PureState::new(HilbertShape::qubits(4).unwrap(), amp)?;
    let squares: Vec<Complex64> = zn.iter().map(|c| c * c).collect();
    let mut generic = true;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if (squares[i] - squares[j]).norm() <= 1e-10 {
                generic = false;
            }
        }
    }
    Ok(CritBasisState {
        z: zn,
        state,
        generic,
    })
}

/// The Klein group {I, XXXX, YYYY, ZZZZ}, the stabilizer of every generic
/// state in the critical family with non-vanishing degree-2 invariant.
pub fn klein_stabilizer() -> StabilizerGroup {
    let shape = HilbertShape::qubits(4).unwrap();
    let elements = vec![
        LocalOperator::identity(shape.clone()),
        gates::uniform_qubit_operator(&gates::pauli_x(), 4),
        gates::uniform_qubit_operator(&gates::pauli_y(), 4),
        gates::uniform_qubit_operator(&gates::pauli_z(), 4),
    ];
    StabilizerGroup::new(shape, elements).unwrap()
}

/// |L> = (u0 + w u1 + conj(w) u2)/sqrt(3), the generic critical state with
/// vanishing degree-2 invariant.
pub fn l_state() -> CritBasisState {
    let w = omega();
    make_crit_state(&[Complex64::new(1.0, 0.0), w, w.conj(), Complex64::new(0.0, 0.0)])
        .expect("L coefficients are nonzero")
}

/// Split a two-qubit operator into a Kronecker product a (x) b, rebalanced
/// so both factors are unitary. Fails when the operator is not a product.
fn kron_factorize_2q(v: &CMatrix, tol: f64) -> Result<(CMatrix, CMatrix)> {
    // reshuffle V[(i1 i2),(j1 j2)] into M[(i1 j1),(i2 j2)], rank one for products
    let mut m = CMatrix::zeros(4, 4);
    for i1 in 0..2 {
        for i2 in 0..2 {
            for j1 in 0..2 {
                for j2 in 0..2 {
                    m[(i1 * 2 + j1, i2 * 2 + j2)] = v[(i1 * 2 + i2, j1 * 2 + j2)];
                }
            }
        }
    }
    let svd = m.svd(true, true);
    let u = svd.u.as_ref().expect("svd u");
    let vt = svd.v_t.as_ref().expect("svd v_t");
    let s0 = svd.singular_values[0].sqrt();
    let mut a = CMatrix::zeros(2, 2);
    let mut b = CMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            a[(i, j)] = u[(i * 2 + j, 0)] * Complex64::new(s0, 0.0);
            b[(i, j)] = vt[(0, i * 2 + j)] * Complex64::new(s0, 0.0);
        }
    }
    // rebalance scale between the factors so each is unitary
    let t = (2.0_f64).sqrt() / a.norm();
    a *= Complex64::new(t, 0.0);
    b /= Complex64::new(t, 0.0);
    let residual = linalg::frobenius(&(a.kronecker(&b) - v));
    if residual > tol {
        return Err(Error::PermutationUnrealizable(format!(
            "operator is not a tensor product (residual {residual:.3e})"
        )));
    }
    Ok((a, b))
}

/// The local unitary cycling the u-basis as u0 -> u1 -> u2 -> u0, u3 fixed.
///
/// Built from per-pair Bell-basis maps with compensating phases:
/// on the first pair phi+ -> -i phi-, phi- -> psi+, psi+ -> i phi+, psi-
/// fixed; on the second pair the conjugate phases. Each map is real
/// orthogonal in the magic basis, hence an exact product of single-qubit
/// unitaries, recovered here by Kronecker factorization.
fn u_cycle_operator() -> Result<LocalOperator> {
    let phases_first = [
        Complex64::new(0.0, -1.0), // phi+ -> -i phi-
        Complex64::new(1.0, 0.0),  // phi- -> psi+
        Complex64::new(0.0, 1.0),  // psi+ -> i phi+
        Complex64::new(1.0, 0.0),  // psi- -> psi-
    ];
    let build = |phases: &[Complex64; 4]| -> CMatrix {
        // targets of (phi+, phi-, psi+, psi-) under the cycle
        let sources = [0usize, 1, 2, 3];
        let targets = [1usize, 2, 0, 3];
        let mut v = CMatrix::zeros(4, 4);
        for k in 0..4 {
            let src = bell_vector(sources[k]);
            let tgt = bell_vector(targets[k]);
            for r in 0..4 {
                for c in 0..4 {
                    v[(r, c)] += phases[k] * tgt[r] * src[c].conj();
                }
            }
        }
        v
    };
    let phases_second: [Complex64; 4] = std::array::from_fn(|i| phases_first[i].conj());
    let v1 = build(&phases_first);
    let v2 = build(&phases_second);
    let (a, b) = kron_factorize_2q(&v1, 1e-9)?;
    let (c, d) = kron_factorize_2q(&v2, 1e-9)?;
    LocalOperator::new(HilbertShape::qubits(4).unwrap(), vec![a, b, c, d])
}

/// The order-12 stabilizer of the L state: the Klein group extended by the
/// phased u-basis cycle of order three.
pub fn l_state_stabilizer() -> Result<StabilizerGroup> {
    let shape = HilbertShape::qubits(4).unwrap();
    let cyc = u_cycle_operator()?;
    let w = omega();
    let mut gen_factors: Vec<CMatrix> = cyc.factors().to_vec();
    gen_factors[0] *= w;
    let generator = LocalOperator::new(shape.clone(), gen_factors)?;

    // sanity: the generator must stabilize |L> exactly
    let l = l_state();
    let image = generator.apply_vec(l.state().amplitudes());
    let residual = (image - l.state().amplitudes()).norm();
    if residual > 1e-9 {
        return Err(Error::PermutationUnrealizable(format!(
            "phased u-basis cycle does not stabilize the L state (residual {residual:.3e})"
        )));
    }

    let klein = klein_stabilizer();
    let g2 = compose(&generator, &generator)?;
    let mut elements = Vec::with_capacity(12);
    for k in klein.elements() {
        elements.push(k.clone());
        elements.push(compose(k, &generator)?);
        elements.push(compose(k, &g2)?);
    }
    StabilizerGroup::new(shape, elements)
}

/// Verdict of the twirl characterization for conversions out of a generic
/// critical four-qubit state.
#[derive(Clone, Debug)]
pub struct SepCharacterization {
    pub convertible: bool,
    /// || G(sigma) - I ||_F for the Klein twirl G
    pub twirl_residual: f64,
}

/// A generic critical state with non-vanishing degree-2 invariant converts
/// to g psi / ||g psi|| by a separable operation exactly when the Klein
/// twirl of the associate density matrix is the identity.
pub fn sep_characterization_4q(
    psi: &CritBasisState,
    g: &LocalOperator,
) -> Result<SepCharacterization> {
    let f = invariants::f2_four_qubit(psi.state())?;
    if f.norm() <= 1e-10 {
        return Err(Error::VanishingInvariant(f.norm()));
    }
    let sigma = adm::adm_of(psi.state(), g)?;
    let twirled = twirl(&klein_stabilizer(), sigma.matrix())?;
    let twirl_residual = linalg::frobenius(&(twirled - linalg::identity(16)));
    Ok(SepCharacterization {
        convertible: twirl_residual <= 1e-8,
        twirl_residual,
    })
}
