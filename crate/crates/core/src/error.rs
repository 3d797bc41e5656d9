use thiserror::Error;

use crate::expression::{EvalError, ParseError};

/// Errors raised by the analysis pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("singular coefficient {name} = {value} at x = {x}")]
    SingularCoefficient {
        name: &'static str,
        x: f64,
        value: f64,
    },

    #[error("invalid initial conditions: {0}")]
    InvalidInitialConditions(String),

    #[error("step size collapsed to {step:e} at x = {x}")]
    StepSizeCollapse { x: f64, step: f64 },

    #[error("non-finite accessory state at x = {x}")]
    NonFiniteState { x: f64 },

    #[error("degenerate solution basis: {0}")]
    DegenerateBasis(String),

    #[error("infeasible length: ell = {ell} must exceed b - a = {span}")]
    InfeasibleLength { ell: f64, span: f64 },

    #[error("eigen-solver did not converge (residual {residual:e})")]
    NonConvergence { residual: f64 },

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
