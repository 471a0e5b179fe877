//! Independent ground truth for the engine: an exact evaluator on heads for
//! rewrite-only systems, classical pre*/post* saturation, and a harness that
//! compares either against the engine.

use thiserror::Error;

use crate::engine::EngineError;

pub mod diff;
pub mod kripke;
pub mod random;
pub mod saturation;

pub use diff::{diff_check, DiffOptions, Disagreement, Mode, Report, Sample};
pub use kripke::{head_kripke, kripke_eval, Kripke};
pub use saturation::{poststar, prestar, MultiAutomaton};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("the head structure needs a system with only rewrite commands")]
    NotRewriteOnly,
    #[error("unknown proposition `{0}`")]
    UnknownProp(String),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("unknown mode `{0}` (expected kripke, prestar, poststar or invariant)")]
    UnknownMode(String),
    #[error("incompatible mode {mode}: {reason}")]
    IncompatibleMode { mode: Mode, reason: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
}
