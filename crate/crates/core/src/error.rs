use alloc::string::String;
use alloc::vec::Vec;

/// Failures reported by the solver core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A model parameter violates one of its inequalities; the message names it.
    #[error("invalid parameters: {0}")]
    Param(String),

    #[error("incompatible initial datum at node {node} (x = {x}): {reason}")]
    Compatibility {
        node: usize,
        x: f64,
        reason: &'static str,
    },

    #[error("grid: {0}")]
    Grid(String),

    #[error("profile changes sign {changes} times; expected a single (+, 0, -) transition")]
    SignStructure { changes: usize },

    #[error("Gram matrix condition estimate {condition:.3e} exceeds {limit:.0e}")]
    IllConditioned { condition: f64, limit: f64 },

    #[error("finite-difference step matrix is singular: {0}")]
    SingularSystem(String),

    #[error("profile has no sign change in (-L, L)")]
    NoSignChange,

    #[error("profile has {} sign changes (near x = {brackets:?}); expected exactly one", brackets.len())]
    MultipleZeros { brackets: Vec<f64> },

    #[error("p = {p} lies within one grid step of the boundary")]
    Boundary { p: f64 },

    #[error(
        "no mass-conserving steady state: M_B/M_V = {ratio} lies outside [{lower}, {upper}]"
    )]
    Nonexistence { ratio: f64, lower: f64, upper: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = core::result::Result<T, Error>;
