//! Convertibility of multipartite pure quantum states under separable
//! operations (SEP).
//!
//! The toolkit decides when one pure state can be transformed into another
//! (or into an ensemble of targets) by separable operations, and quantifies
//! the maximum conversion probability when a deterministic transformation is
//! impossible. States are handled per SLOCC orbit: an orbit is described by a
//! representative state together with its stabilizer group of local invertible
//! product operators, and every other state in the orbit by the group element
//! reaching it. The central objects are
//!
//! - associate density matrices (ADMs) `g^dag g / ||g psi||^2`, which play the
//!   role the reduced density matrix plays for bipartite states,
//! - the stabilizer twirling operation (group average of conjugations), and
//! - SL-invariant polynomials (concurrence, 3-tangle, the degree-2 four-qubit
//!   invariant) for null-cone detection.
//!
//! Modules follow that structure: [`tensor`] holds dense states and local
//! operators, [`critical`] tests and constructs norm-minimal orbit
//! representatives, [`stabilizer`] verifies groups, unitarizes them, and
//! twirls, [`adm`] builds ADMs and their monotones, [`sep_decide`] answers
//! feasibility questions, [`pmax`] computes probability bounds, and
//! [`fourqubit`] carries the four-qubit catalog of critical states. The
//! `cli` module wraps everything behind file formats and exit codes; a
//! companion crate exposes the same operations to Python.

pub mod adm;
pub mod cli;
pub mod critical;
pub mod error;
pub mod fourqubit;
pub mod invariants;
pub mod linalg;
pub mod pmax;
pub mod sampling;
pub mod sep_decide;
pub mod stabilizer;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{HilbertShape, LocalOperator, PureState};
