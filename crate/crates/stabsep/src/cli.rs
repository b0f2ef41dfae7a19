//! Command-line front end: JSON file formats, structured reports, and the
//! exit-code contract (0 feasible/success, 1 usage, 2 invalid input,
//! 3 infeasible, 4 unknown or marginal).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::adm;
use crate::critical;
use crate::error::{Error, Result};
use crate::invariants;
use crate::linalg::{self, CMatrix, CVector};
use crate::pmax;
use crate::sep_decide::{self, Feasibility};
use crate::stabilizer::{self, CatalogEntry, StabilizerGroup};
use crate::tensor::{HilbertShape, LocalOperator, PureState};

pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const INVALID_INPUT: u8 = 2;
    pub const INFEASIBLE: u8 = 3;
    pub const UNKNOWN: u8 = 4;
}

/// Input-norm deviation above which a warning is recorded.
const INPUT_NORM_WARN: f64 = 1e-6;

// ---------------------------------------------------------------------------
// file formats

/// A pure state: `dims` and row-major amplitudes (party 0 slowest), each
/// amplitude a `[re, im]` pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub amplitudes: Vec<[f64; 2]>,
}

/// A local operator: one row-major `d x d` complex matrix per party.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorFile {
    pub dims: Vec<usize>,
    pub factors: Vec<Vec<Vec<[f64; 2]>>>,
}

/// A stabilizer group as a list of operator payloads, optionally with the
/// reference state it is supposed to stabilize.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilizerFile {
    pub elements: Vec<OperatorFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_state: Option<StateFile>,
}

/// A Hermitian matrix in the computational basis of `dims`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dims: Vec<usize>,
    pub entries: Vec<Vec<[f64; 2]>>,
}

/// A Schmidt spectrum, an alternative bipartite input.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchmidtFile {
    pub schmidt: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleTargetFile {
    pub probability: f64,
    pub operator: OperatorFile,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleFile {
    pub targets: Vec<EnsembleTargetFile>,
}

impl StateFile {
    pub fn from_state(s: &PureState) -> Self {
        Self {
            dims: s.shape().dims().to_vec(),
            amplitudes: s.amplitudes().iter().map(|c| [c.re, c.im]).collect(),
        }
    }

    /// Parse into a [`PureState`]; a norm deviating from one beyond 1e-6
    /// appends a warning.
    pub fn to_state(&self, warnings: &mut Vec<String>) -> Result<PureState> {
        let shape = HilbertShape::new(self.dims.clone())?;
        let amp = CVector::from_iterator(
            self.amplitudes.len(),
            self.amplitudes.iter().map(|[re, im]| Complex64::new(*re, *im)),
        );
        let norm = amp.norm();
        if (norm - 1.0).abs() > INPUT_NORM_WARN {
            warnings.push(format!(
                "input state norm {norm:.9} deviates from 1; renormalized"
            ));
        }
        PureState::new(shape, amp)
    }
}

fn matrix_from_grid(grid: &[Vec<[f64; 2]>], d: usize) -> Result<CMatrix> {
    if grid.len() != d || grid.iter().any(|row| row.len() != d) {
        return Err(Error::InvalidInput(format!(
            "matrix grid is not {d} x {d}"
        )));
    }
    Ok(CMatrix::from_fn(d, d, |i, j| {
        Complex64::new(grid[i][j][0], grid[i][j][1])
    }))
}

fn matrix_to_grid(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

impl OperatorFile {
    pub fn from_operator(op: &LocalOperator) -> Self {
        Self {
            dims: op.shape().dims().to_vec(),
            factors: op.factors().iter().map(matrix_to_grid).collect(),
        }
    }

    pub fn to_operator(&self) -> Result<LocalOperator> {
        let shape = HilbertShape::new(self.dims.clone())?;
        if self.factors.len() != shape.parties() {
            return Err(Error::InvalidInput(format!(
                "{} factors for {} parties",
                self.factors.len(),
                shape.parties()
            )));
        }
        let factors = self
            .factors
            .iter()
            .zip(shape.dims())
            .map(|(grid, &d)| matrix_from_grid(grid, d))
            .collect::<Result<Vec<_>>>()?;
        let op = LocalOperator::new(shape, factors)?;
        let (party, rc) = op.min_rcond();
        if rc < 1e-12 {
            return Err(Error::SingularFactor { party, rcond: rc });
        }
        Ok(op)
    }
}

impl StabilizerFile {
    pub fn to_group(&self, warnings: &mut Vec<String>) -> Result<StabilizerGroup> {
        if self.elements.is_empty() {
            return Err(Error::InvalidInput("stabilizer file has no elements".into()));
        }
        let elements = self
            .elements
            .iter()
            .map(|e| e.to_operator())
            .collect::<Result<Vec<_>>>()?;
        let shape = elements[0].shape().clone();
        let group = StabilizerGroup::new(shape, elements)?;
        if let Some(reference) = &self.reference_state {
            let psi = reference.to_state(warnings)?;
            let report = stabilizer::verify_stabilizer(&psi, &group)?;
            if !report.verified {
                return Err(Error::InvalidInput(format!(
                    "stabilizer does not verify against reference state \
                     (stabilization residual {:.3e}, closed: {}, identity: {})",
                    report.max_residual, report.closed, report.identity_found
                )));
            }
            if report.unitary_on_critical_ok == Some(false) {
                warnings.push(
                    "reference state is critical but the group is not unitary".into(),
                );
            }
        }
        Ok(group)
    }
}

impl MatrixFile {
    pub fn to_matrix(&self) -> Result<(HilbertShape, CMatrix)> {
        let shape = HilbertShape::new(self.dims.clone())?;
        let m = matrix_from_grid(&self.entries, shape.total_dim())?;
        Ok((shape, m))
    }
}

// ---------------------------------------------------------------------------
// report

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// The single structured report emitted by every command.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub inputs: Vec<InputDigest>,
    pub warnings: Vec<String>,
    pub result: serde_json::Value,
}

impl Report {
    fn new(command: &str, seed: u64) -> Self {
        Self {
            tool: "stabsep".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            tolerances: BTreeMap::new(),
            inputs: Vec::new(),
            warnings: Vec::new(),
            result: serde_json::Value::Null,
        }
    }

    fn tolerance(&mut self, name: &str, value: f64) -> &mut Self {
        self.tolerances.insert(name.into(), value);
        self
    }
}

fn digest_file(path: &Path) -> Result<(Vec<u8>, InputDigest)> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let digest = hasher.finalize();
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    Ok((
        bytes,
        InputDigest {
            path: path.display().to_string(),
            sha256: hex,
        },
    ))
}

fn load_json<T: for<'de> Deserialize<'de>>(path: &Path, report: &mut Report) -> Result<T> {
    let (bytes, digest) = digest_file(path)?;
    report.inputs.push(digest);
    serde_json::from_slice(&bytes)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// command line

#[derive(Parser, Debug)]
#[command(
    name = "stabsep",
    version,
    about = "Separable-operations convertibility of multipartite pure states",
    disable_help_subcommand = true
)]
pub struct Cli {
    /// RNG seed for randomized diagnostics (default: STABSEP_SEED or 42)
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Print a one-line verdict instead of the JSON report
    #[arg(long, global = true)]
    pub quiet: bool,

    /// Also write the JSON report to this file
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct StabSource {
    /// Stabilizer file (JSON)
    #[arg(long)]
    pub stab: Option<PathBuf>,

    /// Catalog name: klein4, l-state, ghz3, bipartite(d)
    #[arg(long)]
    pub stab_catalog: Option<String>,
}

/// Like [`StabSource`] but optional, for commands with other sources.
#[derive(Args, Debug)]
#[group(multiple = false)]
pub struct StabSourceOpt {
    /// Stabilizer file (JSON)
    #[arg(long)]
    pub stab: Option<PathBuf>,

    /// Catalog name: klein4, l-state, ghz3, bipartite(d)
    #[arg(long)]
    pub stab_catalog: Option<String>,
}

impl StabSourceOpt {
    fn as_source(&self) -> StabSource {
        StabSource {
            stab: self.stab.clone(),
            stab_catalog: self.stab_catalog.clone(),
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Criticality report, reduced spectra, and invariant values of a state
    Analyze {
        state: PathBuf,
        /// criticality tolerance
        #[arg(long, default_value_t = critical::DEFAULT_CRITICAL_TOL)]
        tol_critical: f64,
    },
    /// Deterministic convertibility psi_1 -> psi_2 over a stabilizer orbit
    Convert {
        /// orbit representative state
        #[arg(long)]
        rep: PathBuf,
        #[command(flatten)]
        stab: StabSource,
        /// group element reaching the source state
        #[arg(long)]
        g1: PathBuf,
        /// group element reaching the target state
        #[arg(long)]
        g2: PathBuf,
        /// feasibility residual threshold
        #[arg(long, default_value_t = sep_decide::FEASIBLE_TOL)]
        tol_feasible: f64,
    },
    /// Convertibility into an ensemble of targets
    Ensemble {
        #[arg(long)]
        rep: PathBuf,
        #[command(flatten)]
        stab: StabSource,
        /// group element reaching the source state
        #[arg(long)]
        g: PathBuf,
        /// ensemble file with (probability, operator) targets
        #[arg(long)]
        targets: PathBuf,
        #[arg(long, default_value_t = sep_decide::FEASIBLE_TOL)]
        tol_feasible: f64,
    },
    /// Maximum conversion probability bounds
    Pmax {
        #[arg(long)]
        rep: PathBuf,
        #[command(flatten)]
        stab: StabSource,
        #[arg(long)]
        g1: PathBuf,
        #[arg(long)]
        g2: PathBuf,
    },
    /// Bipartite majorization verdict (state or Schmidt files)
    Bipartite {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
    },
    /// GHZ-class conversion verdict for three qubits
    Ghz {
        #[arg(long)]
        g1: PathBuf,
        #[arg(long)]
        g2: PathBuf,
    },
    /// Stabilizer twirl of a Hermitian matrix or state projector
    Twirl {
        #[command(flatten)]
        stab: StabSourceOpt,
        /// GHZ torus twirl instead of a finite group: t0 or t
        #[arg(long, value_parser = ["t0", "t"])]
        torus: Option<String>,
        /// Hermitian matrix input
        #[arg(long, conflicts_with = "state")]
        sigma: Option<PathBuf>,
        /// state input, twirled as its projector
        #[arg(long)]
        state: Option<PathBuf>,
    },
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version with success-class errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => exit::SUCCESS,
                _ => exit::USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let seed = cli
        .seed
        .or_else(|| {
            std::env::var("STABSEP_SEED")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(42);
    match dispatch(&cli, seed) {
        Ok((report, code)) => {
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, render_report(&report)) {
                    eprintln!("stabsep: cannot write report: {e}");
                    return exit::INVALID_INPUT;
                }
            }
            let line = if cli.quiet {
                quiet_line(&report)
            } else {
                render_report(&report)
            };
            // tolerate a closed pipe on the consumer side
            use std::io::Write;
            let _ = writeln!(std::io::stdout(), "{line}");
            code
        }
        Err(e) => {
            eprintln!("stabsep: {e}");
            exit::INVALID_INPUT
        }
    }
}

fn render_report(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

fn quiet_line(report: &Report) -> String {
    let verdict = report.result.get("verdict").and_then(|v| v.as_str());
    match verdict {
        Some(v) => format!("{} {}", report.command, v),
        None => format!("{} ok", report.command),
    }
}

fn load_group(
    spec: &StabSource,
    report: &mut Report,
    warnings: &mut Vec<String>,
) -> Result<StabilizerGroup> {
    match (&spec.stab, &spec.stab_catalog) {
        (Some(path), None) => {
            let file: StabilizerFile = load_json(path, report)?;
            file.to_group(warnings)
        }
        (None, Some(name)) => match stabilizer::catalog(name)? {
            CatalogEntry::Finite(group) => Ok(group),
            CatalogEntry::Torus(_) => Err(Error::InvalidInput(
                "catalog entry ghz3 is a torus; use the ghz command".into(),
            )),
            CatalogEntry::Bipartite(_) => Err(Error::InvalidInput(
                "catalog entry bipartite(d) is infinite; use the bipartite command".into(),
            )),
        },
        _ => Err(Error::InvalidInput(
            "exactly one of --stab / --stab-catalog is required".into(),
        )),
    }
}

fn feasibility_verdict(f: Feasibility, marginal: bool) -> (&'static str, u8) {
    match (f, marginal) {
        (Feasibility::Feasible, _) => ("feasible", exit::SUCCESS),
        (Feasibility::Infeasible, false) => ("infeasible", exit::INFEASIBLE),
        (Feasibility::Infeasible, true) => ("marginal", exit::UNKNOWN),
        (Feasibility::Unknown, _) => ("unknown", exit::UNKNOWN),
    }
}

fn dispatch(cli: &Cli, seed: u64) -> Result<(Report, u8)> {
    match &cli.command {
        Command::Analyze { state, tol_critical } => cmd_analyze(state, *tol_critical, seed),
        Command::Convert {
            rep,
            stab,
            g1,
            g2,
            tol_feasible,
        } => cmd_convert(rep, stab, g1, g2, *tol_feasible, seed),
        Command::Ensemble {
            rep,
            stab,
            g,
            targets,
            tol_feasible,
        } => cmd_ensemble(rep, stab, g, targets, *tol_feasible, seed),
        Command::Pmax { rep, stab, g1, g2 } => cmd_pmax(rep, stab, g1, g2, seed),
        Command::Bipartite { source, target } => cmd_bipartite(source, target, seed),
        Command::Ghz { g1, g2 } => cmd_ghz(g1, g2, seed),
        Command::Twirl {
            stab,
            torus,
            sigma,
            state,
        } => cmd_twirl(stab, torus.as_deref(), sigma.as_deref(), state.as_deref(), seed),
    }
}

fn cmd_analyze(path: &Path, tol_critical: f64, seed: u64) -> Result<(Report, u8)> {
    let mut report = Report::new("analyze", seed);
    report.tolerance("critical", tol_critical);
    report.tolerance("null_cone", 1e-10);
    let mut warnings = Vec::new();
    let file: StateFile = load_json(path, &mut report)?;
    let state = file.to_state(&mut warnings)?;

    let crit = critical::check_critical(&state, tol_critical)?;
    let mut spectra = Vec::new();
    for party in 0..state.shape().parties() {
        let rho = crate::tensor::reduced_density(&state, party)?;
        spectra.push(linalg::herm_eigenvalues(&rho));
    }
    let invariant_values: Vec<serde_json::Value> = invariants::applicable_invariants(&state)
        .iter()
        .map(|v| {
            json!({
                "name": v.name,
                "degree": v.degree,
                "value": [v.value.re, v.value.im],
                "abs": v.value.norm(),
            })
        })
        .collect();
    let null_cone = invariants::null_cone_flag(&state);

    // norm-minimality spot check on critical states
    let kempf_ness_min_norm = if crit.is_critical {
        Some(critical::kempf_ness_probe(&state, 50, seed)?)
    } else {
        None
    };

    report.warnings = warnings;
    report.result = json!({
        "dims": state.shape().dims(),
        "critical": crit.is_critical,
        "max_deviation": crit.max_deviation,
        "per_party_deviation": crit.deviations,
        "reduced_spectra": spectra,
        "invariants": invariant_values,
        "consistent_with_null_cone": null_cone,
        "kempf_ness_min_norm": kempf_ness_min_norm,
        "verdict": if crit.is_critical { "critical" } else { "not-critical" },
    });
    Ok((report, exit::SUCCESS))
}

fn cmd_convert(
    rep: &Path,
    stab: &StabSource,
    g1: &Path,
    g2: &Path,
    tol_feasible: f64,
    seed: u64,
) -> Result<(Report, u8)> {
    let mut report = Report::new("convert", seed);
    report.tolerance("feasible", tol_feasible);
    report.tolerance("twirl_necessary", sep_decide::TWIRL_NECESSARY_TOL);
    let mut warnings = Vec::new();
    let psi = load_json::<StateFile>(rep, &mut report)?.to_state(&mut warnings)?;
    let group = load_group(stab, &mut report, &mut warnings)?;
    let g1 = load_json::<OperatorFile>(g1, &mut report)?.to_operator()?;
    let g2 = load_json::<OperatorFile>(g2, &mut report)?.to_operator()?;

    let mut verdict = sep_decide::check_deterministic(&psi, &group, &g1, &g2)?;
    if tol_feasible != sep_decide::FEASIBLE_TOL {
        // reinterpret the reported residual at the requested threshold
        if verdict.method != sep_decide::Method::TwirlNecessaryFailed {
            let feasible = verdict.residual <= tol_feasible;
            verdict.feasibility = if feasible {
                Feasibility::Feasible
            } else {
                Feasibility::Infeasible
            };
            verdict.marginal = !feasible && verdict.residual <= sep_decide::MARGINAL_TOL;
        }
        warnings.push("feasibility threshold overridden via --tol-feasible".into());
    }

    // reconstruct the separable channel on success
    let kraus_completeness = if verdict.feasibility == Feasibility::Feasible {
        let kraus = sep_decide::kraus_operators(&psi, &group, &g1, &g2, &verdict.p)?;
        let d = psi.shape().total_dim();
        let mut acc = CMatrix::zeros(d, d);
        for mk in &kraus {
            let a = mk.assembled();
            acc += a.adjoint() * a;
        }
        Some(linalg::frobenius(&(acc - linalg::identity(d))))
    } else {
        None
    };

    let (tag, code) = feasibility_verdict(verdict.feasibility, verdict.marginal);
    report.warnings = warnings;
    report.result = json!({
        "verdict": tag,
        "method": verdict.method.tag(),
        "p": verdict.p,
        "residual": verdict.residual,
        "twirl_residual": verdict.twirl_residual,
        "marginal": verdict.marginal,
        "kraus_completeness_residual": kraus_completeness,
    });
    Ok((report, code))
}

fn cmd_ensemble(
    rep: &Path,
    stab: &StabSource,
    g: &Path,
    targets: &Path,
    tol_feasible: f64,
    seed: u64,
) -> Result<(Report, u8)> {
    let mut report = Report::new("ensemble", seed);
    report.tolerance("feasible", tol_feasible);
    let mut warnings = Vec::new();
    let psi = load_json::<StateFile>(rep, &mut report)?.to_state(&mut warnings)?;
    let group = load_group(stab, &mut report, &mut warnings)?;
    let g = load_json::<OperatorFile>(g, &mut report)?.to_operator()?;
    let ens_file: EnsembleFile = load_json(targets, &mut report)?;
    let spec = sep_decide::EnsembleSpec {
        targets: ens_file
            .targets
            .iter()
            .map(|t| Ok((t.probability, t.operator.to_operator()?)))
            .collect::<Result<Vec<_>>>()?,
    };

    let mut verdict = sep_decide::check_ensemble(&psi, &group, &g, &spec)?;
    if tol_feasible != sep_decide::FEASIBLE_TOL
        && verdict.method != sep_decide::Method::TwirlNecessaryFailed
    {
        let feasible = verdict.residual <= tol_feasible;
        verdict.feasibility = if feasible {
            Feasibility::Feasible
        } else {
            Feasibility::Infeasible
        };
        verdict.marginal = !feasible && verdict.residual <= sep_decide::MARGINAL_TOL;
        warnings.push("feasibility threshold overridden via --tol-feasible".into());
    }

    let (tag, code) = feasibility_verdict(verdict.feasibility, verdict.marginal);
    report.warnings = warnings;
    report.result = json!({
        "verdict": tag,
        "method": verdict.method.tag(),
        "p": verdict.p,
        "residual": verdict.residual,
        "twirl_residual": verdict.twirl_residual,
        "marginal": verdict.marginal,
    });
    Ok((report, code))
}

fn cmd_pmax(
    rep: &Path,
    stab: &StabSource,
    g1: &Path,
    g2: &Path,
    seed: u64,
) -> Result<(Report, u8)> {
    let mut report = Report::new("pmax", seed);
    report.tolerance("psd_relaxation", 1e-6);
    let mut warnings = Vec::new();
    let psi = load_json::<StateFile>(rep, &mut report)?.to_state(&mut warnings)?;
    let group = load_group(stab, &mut report, &mut warnings)?;
    let g1 = load_json::<OperatorFile>(g1, &mut report)?.to_operator()?;
    let g2 = load_json::<OperatorFile>(g2, &mut report)?.to_operator()?;

    let bounds = pmax::pmax_bounds(&psi, &group, &g1, &g2)?;
    let rho1 = adm::adm_of(&psi, &g1)?;
    let teleportation = pmax::teleportation_monotone(&rho1);

    report.warnings = warnings;
    report.result = json!({
        "lower": bounds.lower,
        "upper_vidal": bounds.upper_vidal,
        "upper_twirl": bounds.upper_twirl,
        "upper_psd": bounds.upper_psd,
        "exact": bounds.exact.map(|(v, _)| v),
        "exact_reason": bounds.exact.map(|(_, r)| match r {
            pmax::ExactReason::CriticalTarget => "critical-target",
            pmax::ExactReason::PsdOptimumSeparable => "psd-optimum-separable",
        }),
        "teleportation_monotone_source": teleportation,
        "verdict": "bounds",
    });
    Ok((report, exit::SUCCESS))
}

/// Bipartite inputs may be state files or Schmidt files; sniff by key.
fn load_bipartite_spectrum(
    path: &Path,
    report: &mut Report,
    warnings: &mut Vec<String>,
) -> Result<Vec<f64>> {
    let (bytes, digest) = digest_file(path)?;
    report.inputs.push(digest);
    let value: serde_json::Value = serde_json::from_slice(&bytes)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    if value.get("schmidt").is_some() {
        let file: SchmidtFile = serde_json::from_value(value)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        if file.schmidt.iter().any(|&x| x < -1e-12) {
            return Err(Error::InvalidInput("negative Schmidt weight".into()));
        }
        let total: f64 = file.schmidt.iter().sum();
        if (total - 1.0).abs() > INPUT_NORM_WARN {
            warnings.push(format!("Schmidt weights sum to {total:.9}; renormalized"));
        }
        Ok(file.schmidt.iter().map(|&x| x.max(0.0) / total).collect())
    } else {
        let file: StateFile = serde_json::from_value(value)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        let state = file.to_state(warnings)?;
        let dims = state.shape().dims();
        if dims.len() != 2 || dims[0] != dims[1] {
            return Err(Error::ShapeMismatch(format!(
                "bipartite states need shape (d,d), got {}",
                state.shape()
            )));
        }
        Ok(linalg::herm_eigenvalues(&crate::tensor::reduced_density(
            &state, 0,
        )?))
    }
}

fn cmd_bipartite(source: &Path, target: &Path, seed: u64) -> Result<(Report, u8)> {
    let mut report = Report::new("bipartite", seed);
    report.tolerance("majorization", adm::TRACE_TOL);
    let mut warnings = Vec::new();
    let src = load_bipartite_spectrum(source, &mut report, &mut warnings)?;
    let tgt = load_bipartite_spectrum(target, &mut report, &mut warnings)?;
    if src.len() != tgt.len() {
        return Err(Error::ShapeMismatch(format!(
            "source dimension {} vs target dimension {}",
            src.len(),
            tgt.len()
        )));
    }
    let verdict = sep_decide::check_bipartite_spectra(&src, &tgt);
    let (tag, code) = match verdict.outcome {
        sep_decide::BipartiteOutcome::Feasible => ("feasible", exit::SUCCESS),
        sep_decide::BipartiteOutcome::Infeasible => ("infeasible", exit::INFEASIBLE),
        sep_decide::BipartiteOutcome::DifferentSloccClass => {
            ("different-slocc-class", exit::INFEASIBLE)
        }
    };
    report.warnings = warnings;
    report.result = json!({
        "verdict": tag,
        "source_spectrum": verdict.source_spectrum,
        "target_spectrum": verdict.target_spectrum,
    });
    Ok((report, code))
}

fn cmd_ghz(g1: &Path, g2: &Path, seed: u64) -> Result<(Report, u8)> {
    let mut report = Report::new("ghz", seed);
    report.tolerance("feasible", sep_decide::FEASIBLE_TOL);
    let g1 = load_json::<OperatorFile>(g1, &mut report)?.to_operator()?;
    let g2 = load_json::<OperatorFile>(g2, &mut report)?.to_operator()?;
    let verdict = sep_decide::check_ghz_class(&g1, &g2)?;
    let (tag, code) = feasibility_verdict(verdict.feasibility, false);
    report.result = json!({
        "verdict": tag,
        "weights": verdict.weights.map(|(x, y)| vec![x, y]),
        "detail": verdict.detail,
    });
    Ok((report, code))
}

fn cmd_twirl(
    stab: &StabSourceOpt,
    torus: Option<&str>,
    sigma: Option<&Path>,
    state: Option<&Path>,
    seed: u64,
) -> Result<(Report, u8)> {
    let mut report = Report::new("twirl", seed);
    let mut warnings = Vec::new();

    let (dims, matrix) = match (sigma, state) {
        (Some(path), None) => {
            let file: MatrixFile = load_json(path, &mut report)?;
            let (shape, m) = file.to_matrix()?;
            (shape.dims().to_vec(), m)
        }
        (None, Some(path)) => {
            let file: StateFile = load_json(path, &mut report)?;
            let s = file.to_state(&mut warnings)?;
            (s.shape().dims().to_vec(), s.projector())
        }
        _ => {
            return Err(Error::InvalidInput(
                "exactly one of --sigma / --state is required".into(),
            ))
        }
    };

    let twirled = match torus {
        Some(kind) => {
            if dims != [2, 2, 2] {
                return Err(Error::ShapeMismatch(
                    "torus twirl needs a three-qubit input".into(),
                ));
            }
            match kind {
                "t0" => stabilizer::ghz_t0_twirl(&matrix)?,
                _ => stabilizer::ghz_t_twirl(&matrix)?,
            }
        }
        None => {
            let group = load_group(&stab.as_source(), &mut report, &mut warnings)?;
            if group.shape().dims() != dims {
                return Err(Error::ShapeMismatch(format!(
                    "group acts on {:?}, input has dims {:?}",
                    group.shape().dims(),
                    dims
                )));
            }
            stabilizer::twirl(&group, &matrix)?
        }
    };

    report.warnings = warnings;
    report.result = json!({
        "dims": dims,
        "twirled": matrix_to_grid(&twirled),
        "trace": [twirled.trace().re, twirled.trace().im],
        "verdict": "ok",
    });
    Ok((report, exit::SUCCESS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourqubit;

    #[test]
    fn state_file_round_trip() {
        let bell = PureState::bell();
        let file = StateFile::from_state(&bell);
        let text = serde_json::to_string(&file).unwrap();
        let back: StateFile = serde_json::from_str(&text).unwrap();
        let mut warnings = Vec::new();
        let state = back.to_state(&mut warnings).unwrap();
        assert!(warnings.is_empty());
        assert!((state.overlap(&bell) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn operator_file_round_trip() {
        let op = crate::tensor::gates::uniform_qubit_operator(&crate::tensor::gates::pauli_y(), 3);
        let file = OperatorFile::from_operator(&op);
        let text = serde_json::to_string(&file).unwrap();
        let back: OperatorFile = serde_json::from_str(&text).unwrap();
        let op2 = back.to_operator().unwrap();
        for (a, b) in op.factors().iter().zip(op2.factors()) {
            assert!(linalg::frobenius(&(a - b)) < 1e-14);
        }
    }

    #[test]
    fn unnormalized_state_warns() {
        let file = StateFile {
            dims: vec![2],
            amplitudes: vec![[2.0, 0.0], [0.0, 0.0]],
        };
        let mut warnings = Vec::new();
        let state = file.to_state(&mut warnings).unwrap();
        assert_eq!(warnings.len(), 1);
        assert!((state.amplitudes().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_operator_file_rejected() {
        let file = OperatorFile {
            dims: vec![2],
            factors: vec![vec![
                vec![[1.0, 0.0], [0.0, 0.0]],
                vec![[0.0, 0.0], [0.0, 0.0]],
            ]],
        };
        assert!(matches!(
            file.to_operator(),
            Err(Error::SingularFactor { .. })
        ));
    }

    #[test]
    fn stabilizer_file_verifies_reference() {
        let klein = fourqubit::klein_stabilizer();
        let z = fourqubit::make_crit_state(&[
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 3.0),
            Complex64::new(5.0, 0.0),
        ])
        .unwrap();
        let file = StabilizerFile {
            elements: klein
                .elements()
                .iter()
                .map(OperatorFile::from_operator)
                .collect(),
            reference_state: Some(StateFile::from_state(z.state())),
        };
        let mut warnings = Vec::new();
        let group = file.to_group(&mut warnings).unwrap();
        assert_eq!(group.order(), 4);
        assert!(group.is_unitary());
    }
}
