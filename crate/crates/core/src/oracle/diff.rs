//! Differential harness: engine membership against an oracle.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ama::Denotation;
use crate::engine::{model_check, Options};
use crate::mucalc::{alpha_normalize, Fixpoint, Formula};
use crate::pds::{Configuration, HeadSet, PushdownSystem};

use super::kripke::{head_kripke, kripke_eval, Kripke};
use super::random::random_config;
use super::saturation::{complement, poststar, prestar, MultiAutomaton};
use super::OracleError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Any closed formula, rewrite-only systems.
    Kripke,
    /// `mu Z. h \/ <>Z` against pre*.
    Prestar,
    /// `mu Z. h \/ ~<>Z` against post*.
    Poststar,
    /// `nu Z. h /\ ~[]Z` against the complement of post* of the other heads.
    Invariant,
}

impl FromStr for Mode {
    type Err = OracleError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "kripke" => Ok(Mode::Kripke),
            "prestar" => Ok(Mode::Prestar),
            "poststar" => Ok(Mode::Poststar),
            "invariant" => Ok(Mode::Invariant),
            _ => Err(OracleError::UnknownMode(s.to_string())),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Kripke => "kripke",
            Mode::Prestar => "prestar",
            Mode::Poststar => "poststar",
            Mode::Invariant => "invariant",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sample {
    /// Every configuration with at most `max_depth` letters above ⊥.
    Exhaustive { max_depth: usize },
    /// `samples` random configurations (duplicates removed).
    Random { max_depth: usize, samples: usize, seed: u64 },
}

impl Sample {
    pub fn configurations(&self, sys: &PushdownSystem) -> Vec<Configuration> {
        match *self {
            Sample::Exhaustive { max_depth } => sys.configurations(max_depth),
            Sample::Random {
                max_depth,
                samples,
                seed,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut out: Vec<Configuration> =
                    (0..samples).map(|_| random_config(&mut rng, sys, max_depth)).collect();
                out.sort();
                out.dedup();
                out
            }
        }
    }

    fn seed(&self) -> Option<u64> {
        match *self {
            Sample::Random { seed, .. } => Some(seed),
            Sample::Exhaustive { .. } => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiffOptions {
    pub mode: Mode,
    pub sample: Sample,
    pub engine: Options,
    /// Worker threads for membership checks; results do not depend on it.
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Disagreement {
    pub config: String,
    pub engine: bool,
    pub oracle: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub cases: usize,
    /// Sorted by stack depth, then configuration: the first entry is a
    /// smallest witness.
    pub disagreements: Vec<Disagreement>,
    pub seed: Option<u64>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.disagreements.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

enum Oracle {
    Kripke(Kripke, Vec<bool>),
    Automaton { ma: MultiAutomaton, negated: bool },
}

impl Oracle {
    fn holds(&self, c: &Configuration) -> bool {
        match self {
            Oracle::Kripke(k, set) => set[k.index(c.head())],
            Oracle::Automaton { ma, negated } => ma.accepts(c) != *negated,
        }
    }
}

/// Matches `σZ. h ⋆ M Z` (either operand order) and returns the heads of `h`.
fn reach_target(
    sys: &PushdownSystem,
    phi: &Formula,
    fix: Fixpoint,
    conj: bool,
    modal: fn(&Formula) -> Option<&Formula>,
) -> Option<Result<HeadSet, OracleError>> {
    let (kind, z, body) = phi.binder()?;
    if kind != fix {
        return None;
    }
    let (l, r) = match (body, conj) {
        (Formula::And(l, r), true) | (Formula::Or(l, r), false) => (l.as_ref(), r.as_ref()),
        _ => return None,
    };
    let is_step = |f: &Formula| matches!(modal(f), Some(Formula::Var(v)) if v == z);
    let h = if is_step(r) {
        l
    } else if is_step(l) {
        r
    } else {
        return None;
    };
    let (name, positive) = match h {
        Formula::Atom(x) => (x, true),
        Formula::NegAtom(x) => (x, false),
        _ => return None,
    };
    Some(match sys.prop(name) {
        None => Err(OracleError::UnknownProp(name.clone())),
        Some(heads) if positive => Ok(heads.clone()),
        Some(heads) => Ok(complement(sys, heads)),
    })
}

fn build_oracle(sys: &PushdownSystem, phi: &Formula, mode: Mode) -> Result<Oracle, OracleError> {
    let incompatible = |shape: &str| OracleError::IncompatibleMode {
        mode,
        reason: format!("formula must have the shape {shape}"),
    };
    match mode {
        Mode::Kripke => {
            let k = head_kripke(sys)?;
            let set = kripke_eval(&k, phi)?;
            Ok(Oracle::Kripke(k, set))
        }
        Mode::Prestar => {
            let heads = reach_target(sys, phi, Fixpoint::Least, false, |f| match f {
                Formula::Diamond(g) => Some(g),
                _ => None,
            })
            .ok_or_else(|| incompatible("mu Z. h \\/ <>Z"))??;
            Ok(Oracle::Automaton {
                ma: prestar(sys, &heads),
                negated: false,
            })
        }
        Mode::Poststar => {
            let heads = reach_target(sys, phi, Fixpoint::Least, false, |f| match f {
                Formula::BackDiamond(g) => Some(g),
                _ => None,
            })
            .ok_or_else(|| incompatible("mu Z. h \\/ ~<>Z"))??;
            Ok(Oracle::Automaton {
                ma: poststar(sys, &heads),
                negated: false,
            })
        }
        Mode::Invariant => {
            let heads = reach_target(sys, phi, Fixpoint::Greatest, true, |f| match f {
                Formula::BackBox(g) => Some(g),
                _ => None,
            })
            .ok_or_else(|| incompatible("nu Z. h /\\ ~[]Z"))??;
            Ok(Oracle::Automaton {
                ma: poststar(sys, &complement(sys, &heads)),
                negated: true,
            })
        }
    }
}

/// Runs the engine and the oracle selected by `options.mode` on every
/// configuration of the sample.
pub fn diff_check(sys: &PushdownSystem, phi: &Formula, options: &DiffOptions) -> Result<Report, OracleError> {
    if let Some(z) = phi.free_vars().into_iter().next() {
        return Err(OracleError::Unbound(z));
    }
    let phi = alpha_normalize(phi);
    let oracle = build_oracle(sys, &phi, options.mode)?;
    let denotation = model_check(sys, &phi, &options.engine)?;
    Ok(compare(sys, &denotation, &oracle, &options.sample, options.jobs))
}

fn compare(sys: &PushdownSystem, d: &Denotation, oracle: &Oracle, sample: &Sample, jobs: usize) -> Report {
    let configs = sample.configurations(sys);
    let jobs = jobs.max(1);
    let chunk = configs.len().div_ceil(jobs).max(1);
    let mut found: Vec<(Configuration, bool, bool)> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || {
                    part.iter()
                        .filter_map(|c| {
                            let e = d.accepts(c).expect("sampled configurations are well formed");
                            let o = oracle.holds(c);
                            (e != o).then(|| (c.clone(), e, o))
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    });
    found.sort_by(|a, b| a.0.depth().cmp(&b.0.depth()).then_with(|| a.0.cmp(&b.0)));
    Report {
        cases: configs.len(),
        disagreements: found
            .into_iter()
            .map(|(c, engine, oracle)| Disagreement {
                config: sys.format_config(&c),
                engine,
                oracle,
            })
            .collect(),
        seed: sample.seed(),
    }
}
