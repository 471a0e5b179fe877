//! Saturation-based model checking of the modal μ-calculus with backwards
//! modalities over pushdown systems.
//!
//! Denotations are represented by alternating multi-automata ([`ama::Ama`])
//! built bottom-up over the formula; see [`engine::model_check`].

pub mod ama;
pub mod engine;
pub mod mucalc;
pub mod oracle;
pub mod pds;

pub use ama::{Ama, AmaError, Denotation, StateId, Stats};
pub use engine::{model_check, EngineError, Options};
pub use mucalc::{parse_closed, parse_formula, Fixpoint, Formula, FormulaError};
pub use pds::{parse_pds, Configuration, Control, Letter, PdsError, PushdownSystem};
