//! Python bindings for the stabsep toolkit: states, local operators,
//! stabilizer groups, criticality and convertibility checks, twirls,
//! SL invariants, and conversion-probability bounds.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use stabsep::linalg::{CMatrix, CVector};
use stabsep::sep_decide::Feasibility;
use stabsep::stabilizer::CatalogEntry;
use stabsep::tensor::{self, HilbertShape};
use stabsep::{adm, critical, fourqubit, invariants, pmax, sep_decide, stabilizer};

fn err(e: stabsep::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

type Grid = Vec<Vec<Complex64>>;

fn to_matrix(grid: &Grid) -> PyResult<CMatrix> {
    let rows = grid.len();
    if rows == 0 || grid.iter().any(|r| r.len() != rows) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    Ok(CMatrix::from_fn(rows, rows, |i, j| grid[i][j]))
}

fn from_matrix(m: &CMatrix) -> Grid {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// A normalized multi-qudit pure state.
#[pyclass(name = "PureState", from_py_object)]
#[derive(Clone)]
struct PyPureState {
    inner: tensor::PureState,
}

#[pymethods]
impl PyPureState {
    #[new]
    fn new(dims: Vec<usize>, amplitudes: Vec<Complex64>) -> PyResult<Self> {
        let shape = HilbertShape::new(dims).map_err(err)?;
        let amp = CVector::from_vec(amplitudes);
        Ok(Self {
            inner: tensor::PureState::new(shape, amp).map_err(err)?,
        })
    }

    #[staticmethod]
    fn bell() -> Self {
        Self { inner: tensor::PureState::bell() }
    }

    #[staticmethod]
    fn ghz(n: usize) -> PyResult<Self> {
        Ok(Self { inner: tensor::PureState::ghz(n).map_err(err)? })
    }

    #[staticmethod]
    fn w(n: usize) -> PyResult<Self> {
        Ok(Self { inner: tensor::PureState::w(n).map_err(err)? })
    }

    #[staticmethod]
    fn max_entangled(d: usize) -> PyResult<Self> {
        Ok(Self { inner: tensor::PureState::max_entangled(d).map_err(err)? })
    }

    #[staticmethod]
    fn from_schmidt(spectrum: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: tensor::PureState::from_schmidt(&spectrum).map_err(err)? })
    }

    /// State z0 u0 + z1 u1 + z2 u2 + z3 u3 in the four-qubit critical family.
    #[staticmethod]
    fn crit4(z: [Complex64; 4]) -> PyResult<Self> {
        Ok(Self {
            inner: fourqubit::make_crit_state(&z).map_err(err)?.state().clone(),
        })
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.inner.shape().dims().to_vec()
    }

    #[getter]
    fn amplitudes(&self) -> Vec<Complex64> {
        self.inner.amplitudes().iter().copied().collect()
    }

    /// |<self|other>|, 1 for states equal up to global phase.
    fn overlap(&self, other: &PyPureState) -> f64 {
        self.inner.overlap(&other.inner)
    }

    fn reduced_density(&self, party: usize) -> PyResult<Grid> {
        Ok(from_matrix(
            &tensor::reduced_density(&self.inner, party).map_err(err)?,
        ))
    }

    fn __repr__(&self) -> String {
        format!("PureState(dims={:?})", self.inner.shape().dims())
    }
}

/// A tensor product of per-party matrices.
#[pyclass(name = "LocalOperator", from_py_object)]
#[derive(Clone)]
struct PyLocalOperator {
    inner: tensor::LocalOperator,
}

#[pymethods]
impl PyLocalOperator {
    #[new]
    fn new(dims: Vec<usize>, factors: Vec<Grid>) -> PyResult<Self> {
        let shape = HilbertShape::new(dims).map_err(err)?;
        let mats = factors.iter().map(to_matrix).collect::<PyResult<Vec<_>>>()?;
        Ok(Self {
            inner: tensor::LocalOperator::new(shape, mats).map_err(err)?,
        })
    }

    #[staticmethod]
    fn identity(dims: Vec<usize>) -> PyResult<Self> {
        let shape = HilbertShape::new(dims).map_err(err)?;
        Ok(Self { inner: tensor::LocalOperator::identity(shape) })
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.inner.shape().dims().to_vec()
    }

    #[getter]
    fn is_unitary(&self) -> bool {
        self.inner.is_unitary()
    }

    #[getter]
    fn is_special(&self) -> bool {
        self.inner.is_special()
    }

    #[getter]
    fn factors(&self) -> Vec<Grid> {
        self.inner.factors().iter().map(from_matrix).collect()
    }

    /// Apply to a state; returns the normalized image and ||g psi||.
    fn apply(&self, state: &PyPureState) -> PyResult<(PyPureState, f64)> {
        let (out, norm) = tensor::apply(&self.inner, &state.inner).map_err(err)?;
        Ok((PyPureState { inner: out }, norm))
    }

    fn compose(&self, other: &PyLocalOperator) -> PyResult<PyLocalOperator> {
        Ok(Self {
            inner: tensor::compose(&self.inner, &other.inner).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "LocalOperator(dims={:?}, unitary={}, special={})",
            self.inner.shape().dims(),
            self.inner.is_unitary(),
            self.inner.is_special()
        )
    }
}

/// A finite stabilizer group given as an explicit element list.
#[pyclass(name = "StabilizerGroup", from_py_object)]
#[derive(Clone)]
struct PyStabilizerGroup {
    inner: stabilizer::StabilizerGroup,
}

#[pymethods]
impl PyStabilizerGroup {
    #[new]
    fn new(elements: Vec<PyLocalOperator>) -> PyResult<Self> {
        if elements.is_empty() {
            return Err(PyValueError::new_err("no elements"));
        }
        let shape = elements[0].inner.shape().clone();
        let ops = elements.into_iter().map(|e| e.inner).collect();
        Ok(Self {
            inner: stabilizer::StabilizerGroup::new(shape, ops).map_err(err)?,
        })
    }

    /// Catalog lookup: klein4 or l-state (finite groups only).
    #[staticmethod]
    fn catalog(name: &str) -> PyResult<Self> {
        match stabilizer::catalog(name).map_err(err)? {
            CatalogEntry::Finite(group) => Ok(Self { inner: group }),
            _ => Err(PyValueError::new_err(
                "catalog entry is not a finite group",
            )),
        }
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn is_unitary(&self) -> bool {
        self.inner.is_unitary()
    }

    #[getter]
    fn elements(&self) -> Vec<PyLocalOperator> {
        self.inner
            .elements()
            .iter()
            .map(|e| PyLocalOperator { inner: e.clone() })
            .collect()
    }

    /// Check the group against a reference state; returns
    /// (verified, max stabilization residual).
    fn verify(&self, state: &PyPureState) -> PyResult<(bool, f64)> {
        let report = stabilizer::verify_stabilizer(&state.inner, &self.inner).map_err(err)?;
        Ok((report.verified, report.max_residual))
    }

    /// Group average of conjugations of a Hermitian matrix.
    fn twirl(&self, sigma: Grid) -> PyResult<Grid> {
        let m = to_matrix(&sigma)?;
        Ok(from_matrix(&stabilizer::twirl(&self.inner, &m).map_err(err)?))
    }

    fn __repr__(&self) -> String {
        format!(
            "StabilizerGroup(order={}, unitary={})",
            self.inner.order(),
            self.inner.is_unitary()
        )
    }
}

/// (is_critical, max deviation of reduced density matrices from I/d).
#[pyfunction]
#[pyo3(signature = (state, tol = 1e-8))]
fn check_critical(state: &PyPureState, tol: f64) -> PyResult<(bool, f64)> {
    let report = critical::check_critical(&state.inner, tol).map_err(err)?;
    Ok((report.is_critical, report.max_deviation))
}

/// Minimum of ||g psi|| over random determinant-one local operators.
#[pyfunction]
#[pyo3(signature = (state, trials = 100, seed = 42))]
fn kempf_ness_probe(state: &PyPureState, trials: usize, seed: u64) -> PyResult<f64> {
    critical::kempf_ness_probe(&state.inner, trials, seed).map_err(err)
}

/// Iterate filter sweeps to the critical representative; returns (g, state).
#[pyfunction]
#[pyo3(signature = (state, max_sweeps = 1000, tol = 1e-8))]
fn normalize_to_critical(
    state: &PyPureState,
    max_sweeps: usize,
    tol: f64,
) -> PyResult<(PyLocalOperator, PyPureState)> {
    let (g, s) = critical::normalize_to_critical(&state.inner, max_sweeps, tol).map_err(err)?;
    Ok((PyLocalOperator { inner: g }, PyPureState { inner: s }))
}

/// Associate density matrix g^dag g / ||g psi||^2 of the target g psi.
#[pyfunction]
fn adm_matrix(state: &PyPureState, g: &PyLocalOperator) -> PyResult<Grid> {
    let rho = adm::adm_of(&state.inner, &g.inner).map_err(err)?;
    Ok(from_matrix(rho.matrix()))
}

/// Descending ADM spectrum.
#[pyfunction]
fn adm_spectrum(state: &PyPureState, g: &PyLocalOperator) -> PyResult<Vec<f64>> {
    Ok(adm::adm_of(&state.inner, &g.inner).map_err(err)?.eigenvalues())
}

/// Tail sums E_k of the descending ADM spectrum.
#[pyfunction]
fn monotones(state: &PyPureState, g: &PyLocalOperator) -> PyResult<Vec<f64>> {
    let rho = adm::adm_of(&state.inner, &g.inner).map_err(err)?;
    Ok(adm::monotones(&rho).e().to_vec())
}

/// True when `dominated` is majorized by `dominant`.
#[pyfunction]
fn majorizes(dominant: Vec<f64>, dominated: Vec<f64>) -> bool {
    adm::majorizes_spectra(&dominant, &dominated)
}

#[pyfunction]
fn f2_bipartite(state: &PyPureState) -> PyResult<Complex64> {
    invariants::f2_bipartite(&state.inner).map_err(err)
}

#[pyfunction]
fn f4_three_qubit(state: &PyPureState) -> PyResult<Complex64> {
    invariants::f4_three_qubit(&state.inner).map_err(err)
}

#[pyfunction]
fn f2_four_qubit(state: &PyPureState) -> PyResult<Complex64> {
    invariants::f2_four_qubit(&state.inner).map_err(err)
}

/// None when no invariant is implemented for the shape, otherwise whether
/// every applicable invariant vanishes.
#[pyfunction]
fn null_cone_flag(state: &PyPureState) -> Option<bool> {
    invariants::null_cone_flag(&state.inner)
}

fn feasibility_str(f: Feasibility) -> &'static str {
    match f {
        Feasibility::Feasible => "feasible",
        Feasibility::Infeasible => "infeasible",
        Feasibility::Unknown => "unknown",
    }
}

/// Deterministic SEP convertibility verdict.
#[pyclass(name = "TransformationVerdict")]
struct PyTransformationVerdict {
    #[pyo3(get)]
    feasible: bool,
    #[pyo3(get)]
    verdict: String,
    #[pyo3(get)]
    p: Vec<f64>,
    #[pyo3(get)]
    residual: f64,
    #[pyo3(get)]
    method: String,
    #[pyo3(get)]
    twirl_residual: f64,
    #[pyo3(get)]
    marginal: bool,
}

#[pymethods]
impl PyTransformationVerdict {
    fn __repr__(&self) -> String {
        format!(
            "TransformationVerdict({}, residual={:.3e}, method={})",
            self.verdict, self.residual, self.method
        )
    }
}

/// Decide psi_1 -> psi_2 over the stabilizer orbit of the representative.
#[pyfunction]
fn check_deterministic(
    state: &PyPureState,
    stab: &PyStabilizerGroup,
    g1: &PyLocalOperator,
    g2: &PyLocalOperator,
) -> PyResult<PyTransformationVerdict> {
    let v = sep_decide::check_deterministic(&state.inner, &stab.inner, &g1.inner, &g2.inner)
        .map_err(err)?;
    Ok(PyTransformationVerdict {
        feasible: v.feasibility == Feasibility::Feasible,
        verdict: feasibility_str(v.feasibility).into(),
        p: v.p,
        residual: v.residual,
        method: v.method.tag().into(),
        twirl_residual: v.twirl_residual,
        marginal: v.marginal,
    })
}

/// Bipartite majorization verdict on Schmidt spectra:
/// "feasible", "infeasible", or "different-slocc-class".
#[pyfunction]
fn check_bipartite(source: Vec<f64>, target: Vec<f64>) -> String {
    let v = sep_decide::check_bipartite_spectra(&source, &target);
    match v.outcome {
        sep_decide::BipartiteOutcome::Feasible => "feasible".into(),
        sep_decide::BipartiteOutcome::Infeasible => "infeasible".into(),
        sep_decide::BipartiteOutcome::DifferentSloccClass => "different-slocc-class".into(),
    }
}

/// GHZ-class verdict: ("feasible"|"infeasible"|"unknown", detail).
#[pyfunction]
fn check_ghz_class(g1: &PyLocalOperator, g2: &PyLocalOperator) -> PyResult<(String, String)> {
    let v = sep_decide::check_ghz_class(&g1.inner, &g2.inner).map_err(err)?;
    Ok((feasibility_str(v.feasibility).into(), v.detail))
}

/// Probability bounds for psi_1 -> psi_2.
#[pyclass(name = "PmaxBounds")]
struct PyPmaxBounds {
    #[pyo3(get)]
    lower: f64,
    #[pyo3(get)]
    upper_vidal: f64,
    #[pyo3(get)]
    upper_twirl: f64,
    #[pyo3(get)]
    upper_psd: f64,
    #[pyo3(get)]
    exact: Option<f64>,
    #[pyo3(get)]
    exact_reason: Option<String>,
}

#[pymethods]
impl PyPmaxBounds {
    fn __repr__(&self) -> String {
        format!(
            "PmaxBounds(lower={:.6}, vidal={:.6}, twirl={:.6}, psd={:.6}, exact={:?})",
            self.lower, self.upper_vidal, self.upper_twirl, self.upper_psd, self.exact
        )
    }
}

#[pyfunction]
fn pmax_bounds(
    state: &PyPureState,
    stab: &PyStabilizerGroup,
    g1: &PyLocalOperator,
    g2: &PyLocalOperator,
) -> PyResult<PyPmaxBounds> {
    let b = pmax::pmax_bounds(&state.inner, &stab.inner, &g1.inner, &g2.inner).map_err(err)?;
    Ok(PyPmaxBounds {
        lower: b.lower,
        upper_vidal: b.upper_vidal,
        upper_twirl: b.upper_twirl,
        upper_psd: b.upper_psd,
        exact: b.exact.map(|(v, _)| v),
        exact_reason: b.exact.map(|(_, r)| {
            match r {
                pmax::ExactReason::CriticalTarget => "critical-target",
                pmax::ExactReason::PsdOptimumSeparable => "psd-optimum-separable",
            }
            .into()
        }),
    })
}

/// Exact maximum probability of reaching the critical representative.
#[pyfunction]
fn pmax_to_critical(state: &PyPureState, g: &PyLocalOperator) -> PyResult<f64> {
    let rho = adm::adm_of(&state.inner, &g.inner).map_err(err)?;
    Ok(pmax::pmax_to_critical(&rho))
}

/// -log2 of the largest ADM eigenvalue.
#[pyfunction]
fn teleportation_monotone(state: &PyPureState, g: &PyLocalOperator) -> PyResult<f64> {
    let rho = adm::adm_of(&state.inner, &g.inner).map_err(err)?;
    Ok(pmax::teleportation_monotone(&rho))
}

/// Twirl characterization of conversions out of a generic four-qubit
/// critical state: (convertible, twirl residual).
#[pyfunction]
fn sep_characterization_4q(z: [Complex64; 4], g: &PyLocalOperator) -> PyResult<(bool, f64)> {
    let state = fourqubit::make_crit_state(&z).map_err(err)?;
    let v = fourqubit::sep_characterization_4q(&state, &g.inner).map_err(err)?;
    Ok((v.convertible, v.twirl_residual))
}

/// Analytic GHZ torus twirl of an 8x8 Hermitian matrix.
#[pyfunction]
fn ghz_t0_twirl(sigma: Grid) -> PyResult<Grid> {
    let m = to_matrix(&sigma)?;
    Ok(from_matrix(&stabilizer::ghz_t0_twirl(&m).map_err(err)?))
}

/// T-twirl: torus average followed by the h = XXX coset average.
#[pyfunction]
fn ghz_t_twirl(sigma: Grid) -> PyResult<Grid> {
    let m = to_matrix(&sigma)?;
    Ok(from_matrix(&stabilizer::ghz_t_twirl(&m).map_err(err)?))
}

#[pymodule]
fn stabsep_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPureState>()?;
    m.add_class::<PyLocalOperator>()?;
    m.add_class::<PyStabilizerGroup>()?;
    m.add_class::<PyTransformationVerdict>()?;
    m.add_class::<PyPmaxBounds>()?;
    m.add_function(wrap_pyfunction!(check_critical, m)?)?;
    m.add_function(wrap_pyfunction!(kempf_ness_probe, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_to_critical, m)?)?;
    m.add_function(wrap_pyfunction!(adm_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(adm_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(monotones, m)?)?;
    m.add_function(wrap_pyfunction!(majorizes, m)?)?;
    m.add_function(wrap_pyfunction!(f2_bipartite, m)?)?;
    m.add_function(wrap_pyfunction!(f4_three_qubit, m)?)?;
    m.add_function(wrap_pyfunction!(f2_four_qubit, m)?)?;
    m.add_function(wrap_pyfunction!(null_cone_flag, m)?)?;
    m.add_function(wrap_pyfunction!(check_deterministic, m)?)?;
    m.add_function(wrap_pyfunction!(check_bipartite, m)?)?;
    m.add_function(wrap_pyfunction!(check_ghz_class, m)?)?;
    m.add_function(wrap_pyfunction!(pmax_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(pmax_to_critical, m)?)?;
    m.add_function(wrap_pyfunction!(teleportation_monotone, m)?)?;
    m.add_function(wrap_pyfunction!(sep_characterization_4q, m)?)?;
    m.add_function(wrap_pyfunction!(ghz_t0_twirl, m)?)?;
    m.add_function(wrap_pyfunction!(ghz_t_twirl, m)?)?;
    Ok(())
}
