//! Feasibility of separable transformations inside an SLOCC orbit.
//!
//! Deterministic conversions reduce to a nonnegative feasibility problem
//! over the stabilizer of the orbit representative: psi_1 -> psi_2 is
//! possible exactly when some probability vector p satisfies
//! sum_k p_k U_k^dag rho_2 U_k = rho_1 in the associate density matrices.
//! Twirling both sides gives a cheap necessary test, which is also
//! sufficient when rho_1 is a twirl fixed point. The general case is solved
//! as equality-constrained nonnegative least squares on the realified
//! system. Ensembles generalize the right-hand side; the bipartite case
//! collapses to majorization; the three-qubit GHZ class is handled through
//! the torus twirl.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::adm::{self, Adm};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::stabilizer::{ghz_t0_twirl, twirl, StabilizerGroup};
use crate::tensor::{apply, compose, reduced_density, LocalOperator, PureState};

/// Residual at or below which the matrix equality counts as satisfied.
pub const FEASIBLE_TOL: f64 = 1e-8;

/// Residuals in (FEASIBLE_TOL, MARGINAL_TOL] are flagged marginal.
pub const MARGINAL_TOL: f64 = 1e-6;

/// Twirl-mismatch threshold for the fast necessary test.
pub const TWIRL_NECESSARY_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible,
    Infeasible,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// the two associate density matrices coincide
    Identity,
    /// the necessary twirl equality G(rho_1) = G(rho_2) failed
    TwirlNecessaryFailed,
    /// rho_1 is a twirl fixed point, so the twirl equality is decisive
    TwirlSufficient,
    /// nonnegative least squares over the stabilizer orbit
    Lp,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Identity => "identity",
            Method::TwirlNecessaryFailed => "twirl-necessary-failed",
            Method::TwirlSufficient => "twirl-sufficient",
            Method::Lp => "lp",
        }
    }
}

/// Feasibility certificate for a deterministic conversion.
#[derive(Clone, Debug)]
pub struct TransformationVerdict {
    pub feasibility: Feasibility,
    /// probability vector over stabilizer elements (sums to one)
    pub p: Vec<f64>,
    /// || sum_k p_k U_k^dag rho_2 U_k - rho_1 ||_F for the returned p
    pub residual: f64,
    pub method: Method,
    /// || G(rho_2) - G(rho_1) ||_F
    pub twirl_residual: f64,
    /// best residual fell in the marginal band
    pub marginal: bool,
}

fn clamp_distribution(mut p: Vec<f64>) -> Vec<f64> {
    for v in &mut p {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let s: f64 = p.iter().sum();
    if s > 1e-12 {
        for v in &mut p {
            *v /= s;
        }
    }
    p
}

fn mix_residual(targets: &[CMatrix], p: &[f64], rho1: &CMatrix) -> f64 {
    let d = rho1.nrows();
    let mut acc = CMatrix::zeros(d, d);
    for (c, &w) in targets.iter().zip(p) {
        acc += c * Complex64::new(w, 0.0);
    }
    linalg::frobenius(&(acc - rho1))
}

/// Weight for the probability-normalization rows in the realified system.
/// Moderate on purpose: it only has to steer the active-set support, and
/// heavier weights degrade the accuracy of the inner least-squares solves.
/// The support is afterwards refined by an exact equality-constrained
/// solve without the weighted row.
const NORMALIZATION_WEIGHT: f64 = 100.0;

/// Decide whether psi_1 = g1 psi/||.|| converts to psi_2 = g2 psi/||.||
/// deterministically by a separable operation. `stab` must be the finite
/// unitary stabilizer of the representative psi, verified against it.
pub fn check_deterministic(
    psi: &PureState,
    stab: &StabilizerGroup,
    g1: &LocalOperator,
    g2: &LocalOperator,
) -> Result<TransformationVerdict> {
    if !stab.is_unitary() {
        return Err(Error::NonUnitaryStabilizer);
    }
    let rho1 = adm::adm_of(psi, g1)?;
    let rho2 = adm::adm_of(psi, g2)?;
    let m = stab.order();

    let g_rho1 = twirl(stab, rho1.matrix())?;
    let g_rho2 = twirl(stab, rho2.matrix())?;
    let twirl_residual = linalg::frobenius(&(&g_rho2 - &g_rho1));

    // conjugated targets C_k = U_k^dag rho_2 U_k
    let targets: Vec<CMatrix> = stab
        .elements()
        .iter()
        .map(|u| u.sandwich(rho2.matrix()))
        .collect();

    // identical ADMs: the identity element alone does it
    if linalg::frobenius(&(rho2.matrix() - rho1.matrix())) <= 1e-10 {
        let mut p = vec![0.0; m];
        let idx = stab.identity_index().unwrap_or(0);
        p[idx] = 1.0;
        let residual = mix_residual(&targets, &p, rho1.matrix());
        return Ok(TransformationVerdict {
            feasibility: Feasibility::Feasible,
            p,
            residual,
            method: Method::Identity,
            twirl_residual,
            marginal: false,
        });
    }

    // necessary: twirls must agree
    if twirl_residual > TWIRL_NECESSARY_TOL {
        let p = vec![1.0 / m as f64; m];
        let residual = mix_residual(&targets, &p, rho1.matrix());
        return Ok(TransformationVerdict {
            feasibility: Feasibility::Infeasible,
            p,
            residual,
            method: Method::TwirlNecessaryFailed,
            twirl_residual,
            marginal: false,
        });
    }

    // sufficient: for a twirl-fixed rho_1 the twirl equality decides, and
    // the uniform distribution realizes it
    if linalg::frobenius(&(&g_rho1 - rho1.matrix())) <= 1e-9 {
        let p = vec![1.0 / m as f64; m];
        let residual = linalg::frobenius(&(&g_rho2 - rho1.matrix()));
        let feasible = residual <= FEASIBLE_TOL;
        return Ok(TransformationVerdict {
            feasibility: if feasible {
                Feasibility::Feasible
            } else {
                Feasibility::Infeasible
            },
            p,
            residual,
            method: Method::TwirlSufficient,
            twirl_residual,
            marginal: !feasible && residual <= MARGINAL_TOL,
        });
    }

    // general case: equality-constrained nonnegative least squares on the
    // realified Hermitian system plus one normalization row
    let d2 = psi.shape().total_dim().pow(2);
    let mut mat = DMatrix::<f64>::zeros(d2, m);
    for (k, c) in targets.iter().enumerate() {
        mat.view_mut((0, k), (d2, 1))
            .copy_from(&linalg::realify_hermitian(c));
    }
    let bv = linalg::realify_hermitian(rho1.matrix());

    let mut a = DMatrix::<f64>::zeros(d2 + 1, m);
    a.view_mut((0, 0), (d2, m)).copy_from(&mat);
    let mut b = DVector::<f64>::zeros(d2 + 1);
    b.view_mut((0, 0), (d2, 1)).copy_from(&bv);
    for k in 0..m {
        a[(d2, k)] = NORMALIZATION_WEIGHT;
    }
    b[d2] = NORMALIZATION_WEIGHT;
    let (x, _) = linalg::nnls(&a, &b);

    // exact probability normalization on the support the solver picked
    let mut support: Vec<usize> = (0..m).filter(|&k| x[k] > 1e-10).collect();
    if support.is_empty() {
        support = (0..m).collect();
    }
    let cons = DMatrix::<f64>::from_element(1, m, 1.0);
    let d_vec = DVector::<f64>::from_element(1, 1.0);
    let p = match linalg::constrained_ls_on_support(&mat, &bv, &cons, &d_vec, &support) {
        Some(refined) => refined.iter().copied().collect(),
        None => clamp_distribution(x.iter().copied().collect()),
    };
    let residual = mix_residual(&targets, &p, rho1.matrix());
    let feasible = residual <= FEASIBLE_TOL;
    Ok(TransformationVerdict {
        feasibility: if feasible {
            Feasibility::Feasible
        } else {
            Feasibility::Infeasible
        },
        p,
        residual,
        method: Method::Lp,
        twirl_residual,
        marginal: !feasible && residual <= MARGINAL_TOL,
    })
}

/// Kraus operators of a feasible deterministic conversion:
/// M_k = (||g1 psi|| / ||g2 psi||) sqrt(p_k) g2 U_k g1^{-1}.
/// Entries with p_k below 1e-12 are skipped.
pub fn kraus_operators(
    psi: &PureState,
    stab: &StabilizerGroup,
    g1: &LocalOperator,
    g2: &LocalOperator,
    p: &[f64],
) -> Result<Vec<LocalOperator>> {
    if p.len() != stab.order() {
        return Err(Error::InvalidInput(format!(
            "probability vector length {} vs group order {}",
            p.len(),
            stab.order()
        )));
    }
    let (_, n1) = apply(g1, psi)?;
    let (_, n2) = apply(g2, psi)?;
    let g1_inv = g1.inverse()?;
    let mut out = Vec::new();
    for (u, &w) in stab.elements().iter().zip(p) {
        if w <= 1e-12 {
            continue;
        }
        let core = compose(&compose(g2, u)?, &g1_inv)?;
        let scale = Complex64::new((n1 / n2) * w.sqrt(), 0.0);
        let mut factors: Vec<CMatrix> = core.factors().to_vec();
        factors[0] *= scale;
        out.push(LocalOperator::new(psi.shape().clone(), factors)?);
    }
    Ok(out)
}

/// An ensemble of targets (p_j, g_j): convert to g_j psi/||g_j psi|| with
/// probability p_j.
#[derive(Clone, Debug)]
pub struct EnsembleSpec {
    pub targets: Vec<(f64, LocalOperator)>,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.targets.is_empty() {
            return Err(Error::InconsistentEnsemble("no targets".into()));
        }
        if let Some((p, _)) = self.targets.iter().find(|(p, _)| *p < -1e-12) {
            return Err(Error::InconsistentEnsemble(format!(
                "negative probability {p}"
            )));
        }
        let total: f64 = self.targets.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InconsistentEnsemble(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(())
    }
}

/// Feasibility certificate for an ensemble transformation.
#[derive(Clone, Debug)]
pub struct EnsembleVerdict {
    pub feasibility: Feasibility,
    /// p[j][k]: weight of stabilizer element k used for target j;
    /// row j sums to p_j
    pub p: Vec<Vec<f64>>,
    pub residual: f64,
    pub method: Method,
    pub twirl_residual: f64,
    pub marginal: bool,
}

/// Decide whether phi = g psi/||g psi|| converts to the ensemble
/// { (p_j, g_j psi/||g_j psi||) } by a separable operation.
pub fn check_ensemble(
    psi: &PureState,
    stab: &StabilizerGroup,
    g: &LocalOperator,
    ensemble: &EnsembleSpec,
) -> Result<EnsembleVerdict> {
    if !stab.is_unitary() {
        return Err(Error::NonUnitaryStabilizer);
    }
    ensemble.validate()?;
    let rho = adm::adm_of(psi, g)?;
    let rhos: Vec<Adm> = ensemble
        .targets
        .iter()
        .map(|(_, gj)| adm::adm_of(psi, gj))
        .collect::<Result<_>>()?;
    let m = stab.order();
    let j_count = ensemble.targets.len();

    // necessary: sum_j p_j G(rho_j) = G(rho)
    let g_rho = twirl(stab, rho.matrix())?;
    let d = psi.shape().total_dim();
    let mut mixed = CMatrix::zeros(d, d);
    for ((pj, _), rj) in ensemble.targets.iter().zip(&rhos) {
        mixed += twirl(stab, rj.matrix())? * Complex64::new(*pj, 0.0);
    }
    let twirl_residual = linalg::frobenius(&(&mixed - &g_rho));

    let targets: Vec<Vec<CMatrix>> = rhos
        .iter()
        .map(|rj| {
            stab.elements()
                .iter()
                .map(|u| u.sandwich(rj.matrix()))
                .collect()
        })
        .collect();

    let ensemble_residual = |p: &[Vec<f64>]| -> f64 {
        let mut acc = CMatrix::zeros(d, d);
        for (j, row) in p.iter().enumerate() {
            for (k, &w) in row.iter().enumerate() {
                acc += &targets[j][k] * Complex64::new(w, 0.0);
            }
        }
        linalg::frobenius(&(acc - rho.matrix()))
    };

    if twirl_residual > TWIRL_NECESSARY_TOL {
        let p: Vec<Vec<f64>> = ensemble
            .targets
            .iter()
            .map(|(pj, _)| vec![pj / m as f64; m])
            .collect();
        let residual = ensemble_residual(&p);
        return Ok(EnsembleVerdict {
            feasibility: Feasibility::Infeasible,
            p,
            residual,
            method: Method::TwirlNecessaryFailed,
            twirl_residual,
            marginal: false,
        });
    }

    // sufficient: twirl-fixed rho makes the twirl equality decisive, with
    // the uniform split p_jk = p_j / m
    if linalg::frobenius(&(&g_rho - rho.matrix())) <= 1e-9 {
        let p: Vec<Vec<f64>> = ensemble
            .targets
            .iter()
            .map(|(pj, _)| vec![pj / m as f64; m])
            .collect();
        let residual = linalg::frobenius(&(&mixed - rho.matrix()));
        let feasible = residual <= FEASIBLE_TOL;
        return Ok(EnsembleVerdict {
            feasibility: if feasible {
                Feasibility::Feasible
            } else {
                Feasibility::Infeasible
            },
            p,
            residual,
            method: Method::TwirlSufficient,
            twirl_residual,
            marginal: !feasible && residual <= MARGINAL_TOL,
        });
    }

    // general nonnegative least squares over variables p_jk
    let d2 = d * d;
    let vars = j_count * m;
    let mut mat = DMatrix::<f64>::zeros(d2, vars);
    let mut cons = DMatrix::<f64>::zeros(j_count, vars);
    for j in 0..j_count {
        for k in 0..m {
            let col = j * m + k;
            mat.view_mut((0, col), (d2, 1))
                .copy_from(&linalg::realify_hermitian(&targets[j][k]));
            cons[(j, col)] = 1.0;
        }
    }
    let bv = linalg::realify_hermitian(rho.matrix());
    let d_vec = DVector::<f64>::from_iterator(
        j_count,
        ensemble.targets.iter().map(|(pj, _)| *pj),
    );

    let mut a = DMatrix::<f64>::zeros(d2 + j_count, vars);
    a.view_mut((0, 0), (d2, vars)).copy_from(&mat);
    a.view_mut((d2, 0), (j_count, vars))
        .copy_from(&(&cons * NORMALIZATION_WEIGHT));
    let mut b = DVector::<f64>::zeros(d2 + j_count);
    b.view_mut((0, 0), (d2, 1)).copy_from(&bv);
    b.view_mut((d2, 0), (j_count, 1))
        .copy_from(&(&d_vec * NORMALIZATION_WEIGHT));
    let (x, _) = linalg::nnls(&a, &b);

    // refine with exact row-sum constraints on the selected support,
    // keeping at least one variable per target with nonzero probability
    let mut support: Vec<usize> = (0..vars).filter(|&col| x[col] > 1e-10).collect();
    for (j, (pj, _)) in ensemble.targets.iter().enumerate() {
        if *pj > 1e-9 && !support.iter().any(|&col| col / m == j) {
            support.extend((0..m).map(|k| j * m + k));
        }
    }
    support.sort_unstable();
    support.dedup();
    let refined = linalg::constrained_ls_on_support(&mat, &bv, &cons, &d_vec, &support);

    let mut consistent = true;
    let p: Vec<Vec<f64>> = match refined {
        Some(xr) => (0..j_count)
            .map(|j| (0..m).map(|k| xr[j * m + k]).collect())
            .collect(),
        None => {
            // fall back to per-row renormalization of the soft solution
            let mut rows = Vec::with_capacity(j_count);
            for (j, (pj, _)) in ensemble.targets.iter().enumerate() {
                let mut row: Vec<f64> = (0..m).map(|k| x[j * m + k].max(0.0)).collect();
                let s: f64 = row.iter().sum();
                if *pj > 1e-9 {
                    if s > 1e-12 {
                        for v in &mut row {
                            *v *= pj / s;
                        }
                    } else {
                        consistent = false;
                    }
                } else {
                    row.iter_mut().for_each(|v| *v = 0.0);
                }
                rows.push(row);
            }
            rows
        }
    };
    let residual = ensemble_residual(&p);
    let feasible = consistent && residual <= FEASIBLE_TOL;
    Ok(EnsembleVerdict {
        feasibility: if feasible {
            Feasibility::Feasible
        } else {
            Feasibility::Infeasible
        },
        p,
        residual,
        method: Method::Lp,
        twirl_residual,
        marginal: !feasible && residual <= MARGINAL_TOL,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BipartiteOutcome {
    Feasible,
    Infeasible,
    /// the source has strictly smaller Schmidt rank than the target
    DifferentSloccClass,
}

/// Majorization verdict for bipartite conversions.
#[derive(Clone, Debug)]
pub struct BipartiteVerdict {
    pub outcome: BipartiteOutcome,
    pub source_spectrum: Vec<f64>,
    pub target_spectrum: Vec<f64>,
}

impl BipartiteVerdict {
    pub fn feasible(&self) -> bool {
        self.outcome == BipartiteOutcome::Feasible
    }
}

/// Nielsen test on the Schmidt spectra: the conversion is possible exactly
/// when the source spectrum is majorized by the target spectrum.
pub fn check_bipartite(source: &PureState, target: &PureState) -> Result<BipartiteVerdict> {
    let dims = source.shape().dims();
    if dims.len() != 2 || dims[0] != dims[1] {
        return Err(Error::ShapeMismatch(format!(
            "bipartite check needs shape (d,d), got {}",
            source.shape()
        )));
    }
    if source.shape() != target.shape() {
        return Err(Error::ShapeMismatch(format!(
            "source shape {} vs target shape {}",
            source.shape(),
            target.shape()
        )));
    }
    let src = linalg::herm_eigenvalues(&reduced_density(source, 0)?);
    let tgt = linalg::herm_eigenvalues(&reduced_density(target, 0)?);
    Ok(check_bipartite_spectra(&src, &tgt))
}

/// The same test on explicit Schmidt spectra (descending order enforced
/// internally).
pub fn check_bipartite_spectra(source: &[f64], target: &[f64]) -> BipartiteVerdict {
    let mut src: Vec<f64> = source.to_vec();
    let mut tgt: Vec<f64> = target.to_vec();
    src.sort_by(|a, b| b.partial_cmp(a).unwrap());
    tgt.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let rank = |v: &[f64]| v.iter().filter(|&&x| x > 1e-9).count();
    let outcome = if rank(&src) < rank(&tgt) {
        // Schmidt rank cannot increase under local operations
        BipartiteOutcome::DifferentSloccClass
    } else if adm::majorizes_spectra(&tgt, &src) {
        BipartiteOutcome::Feasible
    } else {
        BipartiteOutcome::Infeasible
    };
    BipartiteVerdict {
        outcome,
        source_spectrum: src,
        target_spectrum: tgt,
    }
}

/// Verdict for conversions inside the three-qubit GHZ class.
#[derive(Clone, Debug)]
pub struct GhzVerdict {
    pub feasibility: Feasibility,
    /// weights (x, y) on the torus coset and the h coset when decided
    pub weights: Option<(f64, f64)>,
    pub detail: String,
}

/// Decide (partially) whether g1 GHZ -> g2 GHZ is possible by a separable
/// operation, working through the torus twirl.
///
/// The infinite stabilizer is the diagonal torus St extended by h = XXX.
/// After the torus twirl every operator is diagonal plus the {000,111}
/// corner. The 000/111 positions and the corner see every torus element
/// with unit coefficient, so they yield a small nonnegative linear system
/// in the two coset weights; the complementary diagonal pairs obey product
/// inequalities because each element contributes reciprocal weights to a
/// pair. Failing any of these is a certified infeasibility. When the
/// source ADM is fixed by the torus twirl, solvability of the unit-weight
/// coset system over all diagonal positions is also sufficient. Anything
/// else is reported as unknown rather than guessed.
pub fn check_ghz_class(g1: &LocalOperator, g2: &LocalOperator) -> Result<GhzVerdict> {
    let ghz = PureState::ghz(3)?;
    if g1.shape() != ghz.shape() || g2.shape() != ghz.shape() {
        return Err(Error::ShapeMismatch(
            "GHZ-class check needs three-qubit operators".into(),
        ));
    }
    let rho1 = adm::adm_of(&ghz, g1)?;
    let rho2 = adm::adm_of(&ghz, g2)?;

    if linalg::frobenius(&(rho1.matrix() - rho2.matrix())) <= 1e-10 {
        return Ok(GhzVerdict {
            feasibility: Feasibility::Feasible,
            weights: Some((1.0, 0.0)),
            detail: "identical associate density matrices".into(),
        });
    }

    let d1: Vec<f64> = (0..8).map(|b| rho1.matrix()[(b, b)].re).collect();
    let d2: Vec<f64> = (0..8).map(|b| rho2.matrix()[(b, b)].re).collect();
    let c1 = rho1.matrix()[(0, 7)];
    let c2 = rho2.matrix()[(0, 7)];

    for b in 1..4 {
        let lhs = d1[b] * d1[7 - b];
        let rhs = d2[b] * d2[7 - b];
        if lhs < rhs - 1e-8 {
            return Ok(GhzVerdict {
                feasibility: Feasibility::Infeasible,
                weights: None,
                detail: format!(
                    "pair-product necessary condition violated on basis pair ({b:03b}, {:03b})",
                    7 - b
                ),
            });
        }
    }

    let solve_coset = |rows: &[(f64, f64, f64)]| -> (f64, f64, f64) {
        let mut a = DMatrix::<f64>::zeros(rows.len() + 1, 2);
        let mut b = DVector::<f64>::zeros(rows.len() + 1);
        for (i, &(ca, cb, rhs)) in rows.iter().enumerate() {
            a[(i, 0)] = ca;
            a[(i, 1)] = cb;
            b[i] = rhs;
        }
        a[(rows.len(), 0)] = 1.0;
        a[(rows.len(), 1)] = 1.0;
        b[rows.len()] = 1.0;
        let (x, _) = linalg::nnls(&a, &b);
        let res = (&a * &x - &b).norm();
        (x[0], x[1], res)
    };

    let base_rows = [
        (d2[0], d2[7], d1[0]),
        (d2[7], d2[0], d1[7]),
        (c2.re, c2.re, c1.re),
        (c2.im, -c2.im, c1.im),
    ];
    let (_, _, base_res) = solve_coset(&base_rows);
    if base_res > FEASIBLE_TOL {
        return Ok(GhzVerdict {
            feasibility: Feasibility::Infeasible,
            weights: None,
            detail: format!("weight-free coset system infeasible (residual {base_res:.3e})"),
        });
    }

    let t0_rho1 = ghz_t0_twirl(rho1.matrix())?;
    if linalg::frobenius(&(&t0_rho1 - rho1.matrix())) <= 1e-9 {
        let mut rows = Vec::new();
        for b in 0..8 {
            rows.push((d2[b], d2[7 - b], d1[b]));
        }
        rows.push((c2.re, c2.re, c1.re));
        rows.push((c2.im, -c2.im, c1.im));
        let (x, y, res) = solve_coset(&rows);
        if res <= FEASIBLE_TOL {
            return Ok(GhzVerdict {
                feasibility: Feasibility::Feasible,
                weights: Some((x, y)),
                detail: "torus-fixed source; unit-weight coset mix realizes the target".into(),
            });
        }
        return Ok(GhzVerdict {
            feasibility: Feasibility::Unknown,
            weights: None,
            detail: "torus-fixed source, but only non-unit torus weights could remain".into(),
        });
    }

    Ok(GhzVerdict {
        feasibility: Feasibility::Unknown,
        weights: None,
        detail: "necessary conditions hold; full weighted search is out of scope".into(),
    })
}
