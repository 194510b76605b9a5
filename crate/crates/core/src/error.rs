//! Error type shared by the whole crate.
//!
//! The variants mirror the failure modes of exact p-adic computation: inputs
//! that are not units, windows too small to determine an answer, module data
//! that fails one of its structural invariants, and iterative schemes that do
//! not reach their fixed point within the configured bounds.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Structural parameter validation failed (p not an odd prime, reducible
    /// minimal polynomial, modulus overflow, torsion exponent out of range...).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// An element that must be invertible reduces to zero mod p.
    #[error("not a unit: {0}")]
    NotAUnit(String),

    /// The requested quantity is not determined by the known coefficients.
    #[error("window too small: {0}")]
    WindowTooSmall(String),

    /// det Φ is not a unit, so the image of φ does not generate the module.
    #[error("module is not etale: {0}")]
    NotEtale(String),

    /// The semilinear actions fail to commute on the given matrices.
    #[error("actions do not commute: {0}")]
    NotCommuting(String),

    /// Matrix entries are incompatible with the per-generator torsion
    /// exponents.
    #[error("torsion mismatch: {0}")]
    TorsionMismatch(String),

    /// Input to the (φ−1)-solver has terms below the contraction threshold.
    #[error("below contraction threshold: {0}")]
    BelowThreshold(String),

    /// An iterative series failed to leave the working window.
    #[error("series did not converge: {0}")]
    NoConvergence(String),

    /// Window doubling reached its cap without two consecutive equal
    /// invariant lists.
    #[error("cohomology did not stabilize: {0}")]
    NoStabilization(String),

    /// Ghost components were requested over a base with p-torsion.
    #[error("base ring has p-torsion: {0}")]
    TorsionBase(String),

    /// A Frobenius representation does not define an action of the stated
    /// quotient.
    #[error("inconsistent representation: {0}")]
    InconsistentRep(String),

    /// Cup products are only defined in total degree ≤ 2.
    #[error("degree overflow: {0}")]
    DegreeOverflow(String),

    /// An operation was applied to a module of the wrong shape (e.g. the H²
    /// isomorphism on a module that is not the differential twist).
    #[error("wrong module: {0}")]
    WrongModule(String),

    /// Text input could not be parsed; positions are 1-based.
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
}
