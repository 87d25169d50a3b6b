//! Dense complex linear algebra over registers of named qubits.
//!
//! Every state and operator carries an explicit ordered list of qubit ids.
//! The first id in a list is the most significant bit of the basis index.
//! Operations that mix values with different orderings permute internally,
//! so callers never have to reason about positions.

mod kernel;
mod op;
mod random;
mod spectral;
mod state;

use std::fmt;

use nalgebra::{Complex, DMatrix};
use thiserror::Error;

pub use op::{choi, frob_dist, KrausSet, LinOp};
pub use random::{random_density, random_pure};
pub use spectral::spectral;
pub use state::{embed_apply, partial_trace, tensor, QRegisterState, StateForm};

/// Double-precision complex scalar used throughout the crate.
pub type C64 = Complex<f64>;

/// Frobenius tolerance for matrix and state equality.
pub const EQ_TOL: f64 = 1e-9;

/// Branches whose squared norm falls below this are dropped.
pub const PRUNE_TOL: f64 = 1e-12;

/// Globally unique qubit reference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QubitId(pub u32);

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for QubitId {
    fn from(v: u32) -> Self {
        QubitId(v)
    }
}

/// Shorthand for building id lists in tests and protocol definitions.
pub fn qids(ids: &[u32]) -> Vec<QubitId> {
    ids.iter().copied().map(QubitId).collect()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QnumError {
    #[error("qubit ids overlap: {0:?}")]
    OverlappingIds(Vec<QubitId>),
    #[error("unknown qubit {0}")]
    UnknownQubit(QubitId),
    #[error("duplicate qubit id {0}")]
    DuplicateId(QubitId),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("invalid state: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, QnumError>;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Complex matrix from real entries in row-major order.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> DMatrix<C64> {
    DMatrix::from_row_iterator(rows, cols, entries.iter().map(|&x| c(x, 0.0)))
}

/// Standard single-qubit gates.
pub mod gates {
    use super::*;

    pub fn identity(dim: usize) -> DMatrix<C64> {
        DMatrix::identity(dim, dim)
    }

    pub fn pauli_x() -> DMatrix<C64> {
        real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn pauli_z() -> DMatrix<C64> {
        real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0])
    }

    pub fn hadamard() -> DMatrix<C64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        real_matrix(2, 2, &[h, h, h, -h])
    }

    pub fn cz() -> DMatrix<C64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.0, 0.0),
            c(1.0, 0.0),
            c(1.0, 0.0),
            c(-1.0, 0.0),
        ]))
    }

    /// Row vector `<±_angle|` with `|±_a> = (|0> ± e^{ia}|1>)/√2`.
    pub fn equatorial_bra(angle: f64, outcome: u8) -> DMatrix<C64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let sign = if outcome == 0 { 1.0 } else { -1.0 };
        let phase = C64::from_polar(1.0, -angle);
        DMatrix::from_row_slice(1, 2, &[c(h, 0.0), phase * sign * h])
    }
}
