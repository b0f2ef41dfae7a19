//! Finite stabilizer groups, their verification and unitarization, the
//! group-averaging (twirling) superoperator, and the catalog of known
//! stabilizers: the Klein group of generic four-qubit critical states, the
//! order-12 group of the L state, the GHZ torus, and the bipartite family
//! S^{-1} (x) S^T.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::tensor::{apply, compose, gates, HilbertShape, LocalOperator, PureState};

/// Hard cap on explicit element lists.
pub const MAX_GROUP_ORDER: usize = 10_000;

/// Stabilization residual allowed per element, ||S psi - psi||.
pub const STABILIZE_TOL: f64 = 1e-8;

/// Unitarity residual allowed per factor, ||A^dag A - I||_F.
pub const UNITARY_TOL: f64 = 1e-9;

/// An explicit finite list of local operators closed under composition.
#[derive(Clone, Debug)]
pub struct StabilizerGroup {
    shape: HilbertShape,
    elements: Vec<LocalOperator>,
    is_unitary: bool,
}

impl StabilizerGroup {
    pub fn new(shape: HilbertShape, elements: Vec<LocalOperator>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidInput("stabilizer group has no elements".into()));
        }
        if elements.len() > MAX_GROUP_ORDER {
            return Err(Error::GroupTooLarge(elements.len(), MAX_GROUP_ORDER));
        }
        for e in &elements {
            if e.shape() != &shape {
                return Err(Error::ShapeMismatch(format!(
                    "element shape {} vs group shape {}",
                    e.shape(),
                    shape
                )));
            }
        }
        let is_unitary = elements.iter().all(|e| {
            e.factors().iter().all(|f| {
                let d = f.nrows();
                linalg::frobenius(&(f.adjoint() * f - linalg::identity(d))) <= UNITARY_TOL
            })
        });
        Ok(Self {
            shape,
            elements,
            is_unitary,
        })
    }

    pub fn shape(&self) -> &HilbertShape {
        &self.shape
    }

    pub fn elements(&self) -> &[LocalOperator] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn is_unitary(&self) -> bool {
        self.is_unitary
    }

    /// Index of the identity element, if present.
    pub fn identity_index(&self) -> Option<usize> {
        self.elements.iter().position(is_identity)
    }

    /// Largest unitarity residual over all factors of all elements.
    pub fn unitarity_residual(&self) -> f64 {
        self.elements
            .iter()
            .flat_map(|e| e.factors())
            .map(|f| {
                let d = f.nrows();
                linalg::frobenius(&(f.adjoint() * f - linalg::identity(d)))
            })
            .fold(0.0, f64::max)
    }
}

fn is_identity(op: &LocalOperator) -> bool {
    // per-party scalar factors whose scalars multiply to one
    let mut product = linalg::C_ONE;
    for f in op.factors() {
        let d = f.nrows();
        let c = f.trace() / Complex64::new(d as f64, 0.0);
        if linalg::frobenius(&(f - linalg::identity(d) * c)) > 1e-8 {
            return false;
        }
        product *= c;
    }
    (product - linalg::C_ONE).norm() <= 1e-8
}

/// Match two local operators up to a global phase, factor by factor.
/// Returns the largest per-party residual when the match succeeds.
fn phase_match(a: &LocalOperator, b: &LocalOperator) -> Option<f64> {
    let mut max_res = 0.0_f64;
    let mut phase = linalg::C_ONE;
    for (fa, fb) in a.factors().iter().zip(b.factors()) {
        let denom = fb.norm_squared();
        if denom < 1e-20 {
            return None;
        }
        // least-squares scalar c with fa ~ c fb
        let c = (fb.adjoint() * fa).trace() / Complex64::new(denom, 0.0);
        let res = linalg::frobenius(&(fa - fb * c));
        if res > 1e-6 {
            return None;
        }
        max_res = max_res.max(res);
        phase *= c;
    }
    // per-party scalars may be arbitrary, the overall phase must be unimodular
    if (phase.norm() - 1.0).abs() > 1e-6 {
        return None;
    }
    Some(max_res)
}

/// Outcome of checking a candidate group against its reference state.
#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub verified: bool,
    /// max over elements of ||S psi - psi||
    pub max_residual: f64,
    pub identity_found: bool,
    pub closed: bool,
    pub inverses_present: bool,
    pub closure_residual: f64,
    pub unitarity_residual: f64,
    /// set when the reference state is critical: a finite stabilizer of a
    /// critical state must be unitary
    pub unitary_on_critical_ok: Option<bool>,
}

/// Check all stabilizer-group invariants against a reference state:
/// phase-strict stabilization, identity membership, closure and inverses up
/// to global phase.
pub fn verify_stabilizer(psi: &PureState, group: &StabilizerGroup) -> Result<VerifyReport> {
    if psi.shape() != group.shape() {
        return Err(Error::ShapeMismatch(format!(
            "state shape {} vs group shape {}",
            psi.shape(),
            group.shape()
        )));
    }
    let mut max_residual = 0.0_f64;
    for e in group.elements() {
        let image = e.apply_vec(psi.amplitudes());
        max_residual = max_residual.max((image - psi.amplitudes()).norm());
    }

    let identity_found = group.identity_index().is_some();

    let mut closed = true;
    let mut closure_residual = 0.0_f64;
    'outer: for a in group.elements() {
        for b in group.elements() {
            let product = compose(a, b)?;
            let matched = group
                .elements()
                .iter()
                .filter_map(|e| phase_match(&product, e))
                .fold(None::<f64>, |best, r| {
                    Some(best.map_or(r, |b| b.min(r)))
                });
            match matched {
                Some(r) => closure_residual = closure_residual.max(r),
                None => {
                    closed = false;
                    break 'outer;
                }
            }
        }
    }

    let mut inverses_present = true;
    for e in group.elements() {
        let inv = e.inverse()?;
        if !group.elements().iter().any(|c| phase_match(&inv, c).is_some()) {
            inverses_present = false;
            break;
        }
    }

    let unitarity_residual = group.unitarity_residual();

    let crit = crate::critical::check_critical(psi, 1e-8)?;
    let unitary_on_critical_ok = if crit.is_critical {
        Some(group.is_unitary())
    } else {
        None
    };

    let verified = identity_found
        && closed
        && inverses_present
        && max_residual <= STABILIZE_TOL
        && closure_residual <= 1e-8
        && unitary_on_critical_ok.unwrap_or(true);

    Ok(VerifyReport {
        verified,
        max_residual,
        identity_found,
        closed,
        inverses_present,
        closure_residual,
        unitarity_residual,
        unitary_on_critical_ok,
    })
}

/// Result of the unitarization construction.
#[derive(Clone, Debug)]
pub struct Unitarized {
    /// product operator Delta = Delta_1 (x) ... (x) Delta_n
    pub delta: LocalOperator,
    /// Delta psi / ||Delta psi||
    pub state: PureState,
    /// the conjugated group { Delta S Delta^{-1} }, unitary
    pub group: StabilizerGroup,
}

/// Conjugate a finite stabilizer group into a unitary one.
///
/// Per party, Delta_l is the square root of the group sum of A^dag A; the
/// conjugated factors Delta_l A Delta_l^{-1} form a unitary representation,
/// and the conjugated group stabilizes Delta psi / ||Delta psi||.
pub fn unitarize(psi: &PureState, group: &StabilizerGroup) -> Result<Unitarized> {
    let shape = group.shape().clone();
    let n = shape.parties();
    let mut deltas = Vec::with_capacity(n);
    let mut delta_invs = Vec::with_capacity(n);
    for l in 0..n {
        let d = shape.dims()[l];
        let mut sum = CMatrix::zeros(d, d);
        for e in group.elements() {
            let f = &e.factors()[l];
            sum += f.adjoint() * f;
        }
        let delta = linalg::herm_sqrt(&sum);
        if linalg::rcond(&delta) < 1e-12 {
            return Err(Error::SingularDelta { party: l });
        }
        let inv = delta
            .clone()
            .try_inverse()
            .ok_or(Error::SingularDelta { party: l })?;
        deltas.push(delta);
        delta_invs.push(inv);
    }

    let delta_op = LocalOperator::new(shape.clone(), deltas.clone())?;
    let (state, _) = apply(&delta_op, psi)?;

    let mut elements = Vec::with_capacity(group.order());
    for e in group.elements() {
        let factors: Vec<CMatrix> = (0..n)
            .map(|l| &deltas[l] * &e.factors()[l] * &delta_invs[l])
            .collect();
        elements.push(LocalOperator::new(shape.clone(), factors)?);
    }
    let conjugated = StabilizerGroup::new(shape, elements)?;
    let residual = conjugated.unitarity_residual();
    if residual > UNITARY_TOL {
        return Err(Error::UnitarizationFailed(residual));
    }
    Ok(Unitarized {
        delta: delta_op,
        state,
        group: conjugated,
    })
}

/// Group average of conjugations: (1/m) sum_k U_k^dag sigma U_k.
pub fn twirl(group: &StabilizerGroup, sigma: &CMatrix) -> Result<CMatrix> {
    if !group.is_unitary() {
        return Err(Error::NonUnitaryStabilizer);
    }
    let d = group.shape().total_dim();
    if sigma.nrows() != d || sigma.ncols() != d {
        return Err(Error::ShapeMismatch(format!(
            "sigma is {}x{}, group acts on dimension {d}",
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    let mut acc = CMatrix::zeros(d, d);
    for e in group.elements() {
        acc += e.sandwich(sigma);
    }
    Ok(acc / Complex64::new(group.order() as f64, 0.0))
}

/// Torus phase exponents (c1, c2) of each three-qubit basis state:
/// t|b> = exp(i(c1 theta1 + c2 theta2))|b> for the GHZ torus element
/// t(theta1, theta2).
const GHZ_TORUS_PHASES: [(i32, i32); 8] = [
    (0, 0),   // 000
    (2, 2),   // 001: s3^-2
    (0, -2),  // 010: s2^-2
    (2, 0),   // 011: s1^2
    (-2, 0),  // 100: s1^-2
    (0, 2),   // 101: s2^2
    (-2, -2), // 110: s3^2
    (0, 0),   // 111
];

/// Average of t^dag sigma t over the GHZ torus, done analytically: an entry
/// (a, b) survives exactly when the torus phases of the two basis states
/// agree, which happens on the diagonal and on the {000, 111} corner.
pub fn ghz_t0_twirl(sigma: &CMatrix) -> Result<CMatrix> {
    if sigma.nrows() != 8 || sigma.ncols() != 8 {
        return Err(Error::ShapeMismatch(format!(
            "GHZ torus twirl needs an 8x8 matrix, got {}x{}",
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    let mut out = CMatrix::zeros(8, 8);
    for a in 0..8 {
        for b in 0..8 {
            if GHZ_TORUS_PHASES[a] == GHZ_TORUS_PHASES[b] {
                out[(a, b)] = sigma[(a, b)];
            }
        }
    }
    Ok(out)
}

/// T-twirl: (T0(sigma) + h T0(sigma) h)/2 with h = X (x) X (x) X.
pub fn ghz_t_twirl(sigma: &CMatrix) -> Result<CMatrix> {
    let t0 = ghz_t0_twirl(sigma)?;
    let mut conj = CMatrix::zeros(8, 8);
    for a in 0..8 {
        for b in 0..8 {
            conj[(a, b)] = t0[(7 - a, 7 - b)];
        }
    }
    Ok((t0 + conj) * Complex64::new(0.5, 0.0))
}

/// The two-parameter diagonal torus stabilizing the three-qubit GHZ state,
/// together with the coset element h = X (x) X (x) X.
#[derive(Clone, Debug)]
pub struct TorusStabilizer {
    shape: HilbertShape,
}

impl TorusStabilizer {
    pub fn new() -> Self {
        Self {
            shape: HilbertShape::qubits(3).unwrap(),
        }
    }

    pub fn shape(&self) -> &HilbertShape {
        &self.shape
    }

    /// diag(e^{i t1}, e^{-i t1}) (x) diag(e^{i t2}, e^{-i t2}) (x)
    /// diag(e^{-i(t1+t2)}, e^{i(t1+t2)})
    pub fn element(&self, theta1: f64, theta2: f64) -> LocalOperator {
        let phase = |t: f64| {
            gates::diag2(Complex64::from_polar(1.0, t), Complex64::from_polar(1.0, -t))
        };
        let factors = vec![phase(theta1), phase(theta2), phase(-theta1 - theta2)];
        LocalOperator::new(self.shape.clone(), factors).unwrap()
    }

    /// The nontrivial coset representative X (x) X (x) X.
    pub fn h(&self) -> LocalOperator {
        gates::uniform_qubit_operator(&gates::pauli_x(), 3)
    }

    pub fn sample(&self, rng: &mut impl Rng) -> LocalOperator {
        let two_pi = 2.0 * std::f64::consts::PI;
        self.element(rng.random::<f64>() * two_pi, rng.random::<f64>() * two_pi)
    }
}

impl Default for TorusStabilizer {
    fn default() -> Self {
        Self::new()
    }
}

/// The infinite stabilizer { S^{-1} (x) S^T } of the maximally entangled
/// state on C^d (x) C^d, exposed as a sampler, together with its compact
/// subfamily { V^dag (x) V^T }.
#[derive(Clone, Debug)]
pub struct BipartiteStabilizer {
    d: usize,
    shape: HilbertShape,
}

impl BipartiteStabilizer {
    pub fn new(d: usize) -> Result<Self> {
        let shape = HilbertShape::new(vec![d, d])?;
        Ok(Self { d, shape })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn shape(&self) -> &HilbertShape {
        &self.shape
    }

    /// S^{-1} (x) S^T for an invertible S.
    pub fn element(&self, s: &CMatrix) -> Result<LocalOperator> {
        if s.nrows() != self.d || s.ncols() != self.d {
            return Err(Error::ShapeMismatch(format!(
                "S is {}x{}, expected {}x{}",
                s.nrows(),
                s.ncols(),
                self.d,
                self.d
            )));
        }
        let inv = s.clone().try_inverse().ok_or(Error::SingularFactor {
            party: 0,
            rcond: linalg::rcond(s),
        })?;
        LocalOperator::new(self.shape.clone(), vec![inv, s.transpose()])
    }

    /// V^dag (x) V^T for unitary V: the compact subfamily.
    pub fn compact_element(&self, v: &CMatrix) -> Result<LocalOperator> {
        let residual = linalg::frobenius(&(v.adjoint() * v - linalg::identity(self.d)));
        if residual > UNITARY_TOL {
            return Err(Error::InvalidInput(format!(
                "V is not unitary (residual {residual:.3e})"
            )));
        }
        LocalOperator::new(
            self.shape.clone(),
            vec![v.adjoint(), v.transpose()],
        )
    }

    pub fn sample(&self, rng: &mut impl Rng) -> LocalOperator {
        let s = crate::sampling::random_special_factor(self.d, 1e6, rng);
        self.element(&s).unwrap()
    }

    pub fn compact_sample(&self, rng: &mut impl Rng) -> LocalOperator {
        let v = crate::sampling::random_special_unitary(self.d, rng);
        self.compact_element(&v).unwrap()
    }
}

/// A named stabilizer from the catalog.
pub enum CatalogEntry {
    Finite(StabilizerGroup),
    Torus(TorusStabilizer),
    Bipartite(BipartiteStabilizer),
}

/// Look up a known stabilizer: `klein4`, `l-state`, `ghz3`, or
/// `bipartite(d)`.
pub fn catalog(name: &str) -> Result<CatalogEntry> {
    let key = name.trim().to_ascii_lowercase();
    match key.as_str() {
        "klein4" => Ok(CatalogEntry::Finite(crate::fourqubit::klein_stabilizer())),
        "l-state" | "lstate" | "l_state" => Ok(CatalogEntry::Finite(
            crate::fourqubit::l_state_stabilizer()?,
        )),
        "ghz3" => Ok(CatalogEntry::Torus(TorusStabilizer::new())),
        _ => {
            if let Some(rest) = key.strip_prefix("bipartite(").and_then(|r| r.strip_suffix(')')) {
                let d: usize = rest
                    .parse()
                    .map_err(|_| Error::UnknownCatalogEntry(name.to_string()))?;
                return Ok(CatalogEntry::Bipartite(BipartiteStabilizer::new(d)?));
            }
            Err(Error::UnknownCatalogEntry(name.to_string()))
        }
    }
}
