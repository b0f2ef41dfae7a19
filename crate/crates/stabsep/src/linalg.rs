//! Dense complex linear algebra shared by the higher-level modules:
//! Hermitian eigendecompositions, matrix square roots, partial transposes,
//! and a small active-set nonnegative least-squares solver.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Symmetrize a nominally Hermitian matrix before an eigensolve.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Eigenvalues and eigenvectors of a Hermitian matrix, sorted descending.
/// Column k of the returned matrix is the eigenvector of the k-th eigenvalue.
pub fn herm_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let se = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[b]
            .partial_cmp(&se.eigenvalues[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &se.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Eigenvalues of a Hermitian matrix, sorted descending.
pub fn herm_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let se = hermitize(m).symmetric_eigen();
    let mut values: Vec<f64> = se.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    values
}

pub fn lambda_max(m: &CMatrix) -> f64 {
    herm_eigenvalues(m)[0]
}

pub fn lambda_min(m: &CMatrix) -> f64 {
    *herm_eigenvalues(m).last().unwrap()
}

/// Apply `f` to the spectrum of a Hermitian matrix.
pub fn herm_func(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = herm_eigen(m);
    let d = CMatrix::from_diagonal(&CVector::from_iterator(
        values.len(),
        values.iter().map(|&v| Complex64::new(f(v), 0.0)),
    ));
    &vectors * d * vectors.adjoint()
}

/// Principal square root of a positive semi-definite matrix.
/// Eigenvalues below `floor` are clamped to zero.
pub fn herm_sqrt(m: &CMatrix) -> CMatrix {
    herm_func(m, |v| v.max(0.0).sqrt())
}

/// Inverse square root of a positive definite matrix.
pub fn herm_inv_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let values = herm_eigenvalues(m);
    let min = *values.last().unwrap();
    let max = values[0].max(f64::MIN_POSITIVE);
    if min <= 0.0 || min / max < 1e-14 {
        return Err(Error::InvalidInput(format!(
            "matrix is not safely positive definite (min eigenvalue {min:.3e})"
        )));
    }
    Ok(herm_func(m, |v| 1.0 / v.sqrt()))
}

/// Reciprocal condition number sigma_min / sigma_max from the SVD.
pub fn rcond(m: &CMatrix) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.norm()
}

/// Kronecker product of a list of factors, first factor slowest.
pub fn kron_all(factors: &[CMatrix]) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for f in factors {
        out = out.kronecker(f);
    }
    out
}

pub fn commutator_norm(a: &CMatrix, b: &CMatrix) -> f64 {
    frobenius(&(a * b - b * a))
}

/// Partial transpose over the parties selected by `mask` (true = transposed).
pub fn partial_transpose(m: &CMatrix, dims: &[usize], mask: &[bool]) -> CMatrix {
    let d: usize = dims.iter().product();
    assert_eq!(m.nrows(), d);
    assert_eq!(dims.len(), mask.len());
    let n = dims.len();
    let mut out = CMatrix::zeros(d, d);
    let mut row_idx = vec![0usize; n];
    for row in 0..d {
        // decode multi-index of `row`, party 0 slowest
        let mut r = row;
        for k in (0..n).rev() {
            row_idx[k] = r % dims[k];
            r /= dims[k];
        }
        let mut col_idx = vec![0usize; n];
        for col in 0..d {
            let mut c = col;
            for k in (0..n).rev() {
                col_idx[k] = c % dims[k];
                c /= dims[k];
            }
            let (mut sr, mut sc) = (0usize, 0usize);
            for k in 0..n {
                let (ik, jk) = if mask[k] {
                    (col_idx[k], row_idx[k])
                } else {
                    (row_idx[k], col_idx[k])
                };
                sr = sr * dims[k] + ik;
                sc = sc * dims[k] + jk;
            }
            out[(row, col)] = m[(sr, sc)];
        }
    }
    out
}

/// Pack a Hermitian matrix into a real vector whose Euclidean norm equals
/// the Frobenius norm of the matrix: diagonal entries, then sqrt(2)-scaled
/// real and imaginary parts of the upper triangle.
pub fn realify_hermitian(m: &CMatrix) -> DVector<f64> {
    let d = m.nrows();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(m[(i, i)].re);
    }
    let s = std::f64::consts::SQRT_2;
    for i in 0..d {
        for j in (i + 1)..d {
            out.push(s * m[(i, j)].re);
            out.push(s * m[(i, j)].im);
        }
    }
    DVector::from_vec(out)
}

/// Nonnegative least squares min ||A x - b|| s.t. x >= 0 by the
/// Lawson-Hanson active-set method. Deterministic: ties break by index.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let (m, n) = a.shape();
    assert_eq!(b.len(), m);
    let mut x = DVector::<f64>::zeros(n);
    let mut passive = vec![false; n];
    let a_scale = a.norm().max(f64::MIN_POSITIVE);
    let max_outer = 6 * n + 30;

    for _ in 0..max_outer {
        let residual = b - a * &x;
        let w = a.transpose() * &residual;
        // dual feasibility up to a tolerance that tracks the residual scale
        let tol = 1e-11 * a_scale * residual.norm();
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if !passive[j] && w[j] > tol && best.is_none_or(|(_, bw)| w[j] > bw) {
                best = Some((j, w[j]));
            }
        }
        let Some((j_new, _)) = best else { break };
        passive[j_new] = true;

        // inner loop: restrict to the passive set, back off along the
        // segment to x when the unconstrained solution leaves the octant
        loop {
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            if idx.is_empty() {
                break;
            }
            let ap = a.select_columns(idx.iter());
            let svd = ap.clone().svd(true, true);
            // rank cutoff relative to the largest singular value, so the
            // weighted normalization rows cannot promote noise directions
            let smax = svd.singular_values.max().max(f64::MIN_POSITIVE);
            let z = svd.solve(b, 1e-12 * smax).expect("svd solve");
            if z.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (k, &j) in idx.iter().enumerate() {
                    x[j] = z[k];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (k, &j) in idx.iter().enumerate() {
                if z[k] <= 0.0 {
                    let step = x[j] / (x[j] - z[k]);
                    if step < alpha {
                        alpha = step;
                    }
                }
            }
            let alpha = alpha.clamp(0.0, 1.0);
            for (k, &j) in idx.iter().enumerate() {
                x[j] += alpha * (z[k] - x[j]);
                if x[j] <= 1e-13 {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
    let res = (b - a * &x).norm();
    (x, res)
}

/// Equality-constrained least squares min ||M x - v|| subject to C x = d
/// and x = 0 off the given support, x >= 0 on it. Solved through the KKT
/// system on the support, shrinking the support while negative entries
/// appear. Returns the full-length solution, or None when the support
/// cannot satisfy the constraints.
pub fn constrained_ls_on_support(
    m: &DMatrix<f64>,
    v: &DVector<f64>,
    cons: &DMatrix<f64>,
    d: &DVector<f64>,
    support: &[usize],
) -> Option<DVector<f64>> {
    let n = m.ncols();
    let r = cons.nrows();
    let mut sup: Vec<usize> = support.to_vec();
    while !sup.is_empty() {
        let ms = m.select_columns(sup.iter());
        let cs = cons.select_columns(sup.iter());
        let k = sup.len();
        let mut kkt = DMatrix::<f64>::zeros(k + r, k + r);
        kkt.view_mut((0, 0), (k, k)).copy_from(&(ms.transpose() * &ms));
        kkt.view_mut((0, k), (k, r)).copy_from(&cs.transpose());
        kkt.view_mut((k, 0), (r, k)).copy_from(&cs);
        let mut rhs = DVector::<f64>::zeros(k + r);
        rhs.view_mut((0, 0), (k, 1)).copy_from(&(ms.transpose() * v));
        rhs.view_mut((k, 0), (r, 1)).copy_from(d);
        let svd = kkt.svd(true, true);
        let smax = svd.singular_values.max().max(f64::MIN_POSITIVE);
        let sol = svd.solve(&rhs, 1e-12 * smax).ok()?;
        let worst = (0..k).min_by(|&a, &b| sol[a].partial_cmp(&sol[b]).unwrap())?;
        if sol[worst] >= -1e-10 {
            let mut x = DVector::<f64>::zeros(n);
            for (i, &j) in sup.iter().enumerate() {
                x[j] = sol[i].max(0.0);
            }
            // the KKT solve must actually meet the constraints
            if (cons * &x - d).norm() <= 1e-9 * (1.0 + d.norm()) {
                return Some(x);
            }
            return None;
        }
        sup.remove(worst);
    }
    None
}

/// Euclidean projection onto the scaled simplex { p >= 0, sum p = t }.
pub fn project_simplex(v: &DVector<f64>, t: f64) -> DVector<f64> {
    let n = v.len();
    let mut u: Vec<f64> = v.iter().copied().collect();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut css = 0.0;
    let mut rho = 0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        css += ui;
        let candidate = (css - t) / (i + 1) as f64;
        if ui - candidate > 0.0 {
            rho = i + 1;
            theta = candidate;
        }
    }
    let _ = rho;
    DVector::from_iterator(n, v.iter().map(|&vi| (vi - theta).max(0.0)))
}
