use thiserror::Error;

use crate::convexity::Obstruction;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point:?} is outside the {chart} chart: {reason}")]
    Domain {
        chart: &'static str,
        point: [f64; 3],
        reason: String,
    },

    /// The pointwise Reeb / Hamiltonian system is singular (α∧dα vanishes).
    #[error("degenerate contact system at {point:?} (volume density {density:e})")]
    Degenerate { point: [f64; 3], density: f64 },

    #[error("parameter query at a collapsed pole (v = {v}); pole point {pole:?}")]
    Pole { v: f64, pole: [f64; 3] },

    /// A zero of the characteristic field whose divergence is numerically zero.
    /// Characteristic foliations of contact structures never have such zeros, so
    /// this points at a wrong model or a tolerance that is too loose.
    #[error("singularity at {location:?} has divergence {trace:e} below tolerance {tol:e}")]
    ZeroDivergence {
        location: [f64; 2],
        trace: f64,
        tol: f64,
    },

    #[error("unknown {kind} `{id}`; known: {known}")]
    UnknownId {
        kind: &'static str,
        id: String,
        known: String,
    },

    #[error("convexity obstructed by {} object(s)", .0.len())]
    Obstructed(Vec<Obstruction>),

    #[error("numerical resolution: {0}")]
    Resolution(String),

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("foliation structure: {0}")]
    Structure(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
