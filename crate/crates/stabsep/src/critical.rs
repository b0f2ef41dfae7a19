//! Criticality tests and the normal-form iteration.
//!
//! A state is critical when every single-party reduced density matrix is
//! proportional to the identity; critical states are the norm-minimal
//! (maximally entangled) representatives of their SLOCC orbits. The iteration
//! in [`normalize_to_critical`] repeatedly filters each party by the inverse
//! square root of its reduced density matrix, rescaled to determinant one,
//! which converges exactly when the orbit closure contains a critical point.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::sampling;
use crate::tensor::{apply, compose, reduced_density, LocalOperator, PureState};

pub const DEFAULT_CRITICAL_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_SWEEPS: usize = 1000;

/// Per-party deviations of the reduced density matrices from I/d.
#[derive(Clone, Debug)]
pub struct CriticalityReport {
    pub is_critical: bool,
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    pub tolerance: f64,
}

/// Frobenius distance of every reduced density matrix from I/d_i.
pub fn check_critical(s: &PureState, tol: f64) -> Result<CriticalityReport> {
    let mut deviations = Vec::with_capacity(s.shape().parties());
    for party in 0..s.shape().parties() {
        let rho = reduced_density(s, party)?;
        let d = s.shape().dims()[party];
        let target = linalg::identity(d) * Complex64::new(1.0 / d as f64, 0.0);
        deviations.push(linalg::frobenius(&(rho - target)));
    }
    let max_deviation = deviations.iter().cloned().fold(0.0_f64, f64::max);
    Ok(CriticalityReport {
        is_critical: max_deviation <= tol,
        deviations,
        max_deviation,
        tolerance: tol,
    })
}

/// Minimum of ||g psi|| over random determinant-one local operators.
///
/// Refuses non-critical input: the norm inequality ||g psi|| >= ||psi|| is
/// only claimed for critical states. The identity is always included, so the
/// result is at most 1.
pub fn kempf_ness_probe(s: &PureState, trials: usize, seed: u64) -> Result<f64> {
    let report = check_critical(s, DEFAULT_CRITICAL_TOL)?;
    if !report.is_critical {
        return Err(Error::NotCritical(report.max_deviation));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_norm = apply(&LocalOperator::identity(s.shape().clone()), s)?.1;
    for _ in 0..trials {
        let g = sampling::random_local_special(s.shape(), 1e6, &mut rng);
        let (_, norm) = apply(&g, s)?;
        if norm < min_norm {
            min_norm = norm;
        }
    }
    Ok(min_norm)
}

struct SweepOutcome {
    state: PureState,
    accumulated: LocalOperator,
    /// norm of the accumulated operator applied to the original state
    cumulative_norm: f64,
}

/// rho^(-1/2) rescaled to determinant one.
fn filter_for_party(rho: &CMatrix) -> Result<CMatrix> {
    let inv_sqrt = linalg::herm_inv_sqrt(rho)?;
    let det = inv_sqrt.determinant();
    let d = rho.nrows();
    Ok(inv_sqrt * det.powf(-1.0 / d as f64))
}

fn sweep(current: &SweepOutcome, original: &PureState, order: &[usize]) -> Result<SweepOutcome> {
    let mut state = current.state.clone();
    let mut accumulated = current.accumulated.clone();
    for &party in order {
        let rho = reduced_density(&state, party)?;
        let rc = linalg::rcond(&rho);
        if rc < 1e-12 {
            return Err(Error::SingularReduction { party, rcond: rc });
        }
        let f = filter_for_party(&rho)?;
        let factors: Vec<CMatrix> = state
            .shape()
            .dims()
            .iter()
            .enumerate()
            .map(|(k, &d)| if k == party { f.clone() } else { linalg::identity(d) })
            .collect();
        let op = LocalOperator::new(state.shape().clone(), factors)?;
        let (next, _) = apply(&op, &state)?;
        state = next;
        accumulated = compose(&op, &accumulated)?;
    }
    // norm bookkeeping must not demand invertibility: the accumulated
    // operator degenerates on null-cone inputs
    let cumulative_norm = accumulated.apply_vec(original.amplitudes()).norm();
    Ok(SweepOutcome {
        state,
        accumulated,
        cumulative_norm,
    })
}

/// Iterate filter sweeps until the state is critical within `tol`.
///
/// Returns the accumulated determinant-one local operator g and the critical
/// state g|s>/||g s||. States in the null cone never converge; that is a
/// [`Error::NoConvergence`] verdict, not a panic. The cumulative norm
/// ||g_t s|| is non-increasing across sweeps and checked as such.
pub fn normalize_to_critical(
    s: &PureState,
    max_sweeps: usize,
    tol: f64,
) -> Result<(LocalOperator, PureState)> {
    let order: Vec<usize> = (0..s.shape().parties()).collect();
    normalize_with_order(s, max_sweeps, tol, &order)
}

pub(crate) fn normalize_with_order(
    s: &PureState,
    max_sweeps: usize,
    tol: f64,
    order: &[usize],
) -> Result<(LocalOperator, PureState)> {
    // precondition: every reduced density matrix safely nonsingular
    for party in 0..s.shape().parties() {
        let rho = reduced_density(s, party)?;
        let rc = linalg::rcond(&rho);
        if rc < 1e-10 {
            return Err(Error::SingularReduction { party, rcond: rc });
        }
    }

    let mut current = SweepOutcome {
        state: s.clone(),
        accumulated: LocalOperator::identity(s.shape().clone()),
        cumulative_norm: 1.0,
    };
    let mut last_deviation = check_critical(&current.state, tol)?.max_deviation;
    if last_deviation <= tol {
        return Ok((current.accumulated, current.state));
    }
    for sweeps in 1..=max_sweeps {
        let next = match sweep(&current, s, order) {
            Ok(n) => n,
            // a collapsing reduction or filter mid-iteration signals the
            // null cone: the orbit closure has no critical point
            Err(Error::SingularReduction { .. }) | Err(Error::SingularFactor { .. }) => {
                return Err(Error::NoConvergence {
                    sweeps,
                    deviation: last_deviation,
                })
            }
            Err(e) => return Err(e),
        };
        debug_assert!(
            next.cumulative_norm <= current.cumulative_norm + 1e-9,
            "filter sweep increased the norm: {} -> {}",
            current.cumulative_norm,
            next.cumulative_norm
        );
        current = next;
        last_deviation = check_critical(&current.state, tol)?.max_deviation;
        if last_deviation <= tol {
            return Ok((current.accumulated, current.state));
        }
    }
    Err(Error::NoConvergence {
        sweeps: max_sweeps,
        deviation: last_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use crate::tensor::HilbertShape;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ghz_is_critical() {
        let ghz = PureState::ghz(3).unwrap();
        let report = check_critical(&ghz, 1e-9).unwrap();
        assert!(report.is_critical);
        assert!(report.max_deviation < 1e-12);
    }

    #[test]
    fn w_is_not_critical() {
        let w = PureState::w(3).unwrap();
        let report = check_critical(&w, 1e-9).unwrap();
        assert!(!report.is_critical);
        // rho_1 = diag(2/3, 1/3): distance from I/2 is sqrt(2)/6
        let expected = (2.0_f64).sqrt() / 6.0;
        assert!((report.deviations[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn bell_pair_product_is_critical() {
        // u0 = |phi+>|phi+> as a 4-qubit state
        let shape = HilbertShape::qubits(4).unwrap();
        let mut amp = crate::linalg::CVector::zeros(16);
        for i in [0b0000, 0b0011, 0b1100, 0b1111] {
            amp[i] = Complex64::new(0.5, 0.0);
        }
        let u0 = PureState::new(shape, amp).unwrap();
        assert!(check_critical(&u0, 1e-9).unwrap().is_critical);
    }

    #[test]
    fn kempf_ness_on_ghz_and_bell() {
        for s in [PureState::ghz(3).unwrap(), PureState::bell()] {
            let min_norm = kempf_ness_probe(&s, 100, 7).unwrap();
            assert!(min_norm >= 1.0 - 1e-9, "min norm {min_norm}");
            assert!(min_norm <= 1.0 + 1e-12); // identity included
        }
    }

    #[test]
    fn kempf_ness_refuses_non_critical() {
        let w = PureState::w(3).unwrap();
        assert!(matches!(
            kempf_ness_probe(&w, 10, 0),
            Err(Error::NotCritical(_))
        ));
    }

    #[test]
    fn already_critical_returns_identity() {
        let ghz = PureState::ghz(3).unwrap();
        let (g, s_c) = normalize_to_critical(&ghz, 100, 1e-8).unwrap();
        assert!(check_critical(&s_c, 1e-8).unwrap().is_critical);
        assert!((s_c.overlap(&ghz) - 1.0).abs() < 1e-10);
        for (k, f) in g.factors().iter().enumerate() {
            let d = ghz.shape().dims()[k];
            assert!(linalg::frobenius(&(f - linalg::identity(d))) < 1e-10);
        }
    }

    #[test]
    fn schmidt_state_normalizes_to_bell() {
        let s = PureState::from_schmidt(&[0.6, 0.4]).unwrap();
        let (g, s_c) = normalize_to_critical(&s, 1000, 1e-10).unwrap();
        let bell = PureState::bell();
        assert!((s_c.overlap(&bell) - 1.0).abs() < 1e-8);
        let (mapped, _) = apply(&g, &s).unwrap();
        assert!((mapped.overlap(&s_c) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn product_state_reduction_is_rejected() {
        // |00> is not 2-way entangled: the precondition fails up front
        let shape = HilbertShape::qubits(2).unwrap();
        let s = PureState::basis(shape, &[0, 0]).unwrap();
        assert!(matches!(
            normalize_to_critical(&s, 100, 1e-8),
            Err(Error::SingularReduction { .. })
        ));
    }

    #[test]
    fn w_state_does_not_converge() {
        let w = PureState::w(3).unwrap();
        let result = normalize_to_critical(&w, 1000, 1e-8);
        assert!(
            matches!(result, Err(Error::NoConvergence { .. })),
            "{result:?}"
        );
    }

    #[test]
    fn converged_state_matches_applied_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let shape = HilbertShape::qubits(3).unwrap();
        for _ in 0..10 {
            // start from a perturbed GHZ-class state
            let g0 = sampling::random_local_special(&shape, 1e3, &mut rng);
            let (s, _) = apply(&g0, &PureState::ghz(3).unwrap()).unwrap();
            let (g, s_c) = normalize_to_critical(&s, 2000, 1e-9).unwrap();
            assert!(check_critical(&s_c, 1e-8).unwrap().is_critical);
            let (mapped, _) = apply(&g, &s).unwrap();
            assert!((mapped.overlap(&s_c) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn normalizers_reach_the_same_minimal_norm() {
        // the critical point of an orbit is unique up to local unitaries, so
        // any two iteration paths must reach the same minimal norm
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let shape = HilbertShape::qubits(4).unwrap();
        let z = crate::fourqubit::make_crit_state(&[
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 3.0),
            Complex64::new(5.0, 0.0),
        ])
        .unwrap();
        for _ in 0..5 {
            let g0 = sampling::random_local_special(&shape, 1e3, &mut rng);
            let (s, _) = apply(&g0, z.state()).unwrap();

            let (g1, c1) = normalize_to_critical(&s, 2000, 1e-10).unwrap();
            // a local unitary start perturbs the iteration path but not the orbit
            let u = sampling::random_local_unitary(&shape, &mut rng);
            let (s_rot, _) = apply(&u, &s).unwrap();
            let (g2, c2) = normalize_to_critical(&s_rot, 2000, 1e-10).unwrap();

            assert!(check_critical(&c1, 1e-8).unwrap().is_critical);
            assert!(check_critical(&c2, 1e-8).unwrap().is_critical);
            let n1 = apply(&g1, &s).unwrap().1;
            let n2 = apply(&g2, &s_rot).unwrap().1;
            assert!((n1 - n2).abs() < 1e-7, "minimal norms differ: {n1} vs {n2}");
        }
    }
}
