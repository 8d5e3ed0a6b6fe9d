use thiserror::Error;

use crate::ratpoly::Var;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown variable `{0}` (allowed: t, x, c, eps)")]
    UnknownVariable(String),

    #[error("variable `{0}` is not bound")]
    UnboundVariable(Var),

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("series has a zero or non-constant leading term and cannot be raised to a negative power")]
    NonInvertibleLeadingTerm,

    #[error("derivative order ({x}, {t}) exceeds the configured maximum {max}")]
    DerivativeOrderExceeded { x: u32, t: u32, max: u32 },

    #[error("reciprocal power of {value:e} is below the magnitude floor {floor:e}")]
    DivisionNearZero { value: f64, floor: f64 },

    #[error("minimum not bracketed in [{low}, {high}]: E is smallest at the bracket end {end}")]
    BracketError { low: f64, high: f64, end: f64 },

    #[error("invalid bracket [{low}, {high}] or tolerance {tol}")]
    InvalidBracket { low: f64, high: f64, tol: f64 },

    #[error("index {index} out of range for series of order {order}")]
    IndexOutOfRange { index: usize, order: usize },

    #[error("unknown problem `{0}` (catalog: heat_transfer, nems_vdw, burgers, rlw)")]
    UnknownProblem(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
