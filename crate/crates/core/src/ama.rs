//! Alternating multi-automata over stack words.
//!
//! A transition `(q, a, T)` reads the letter `a` and then requires every state
//! in `T` to accept the rest of the word. Words are read top-of-stack first
//! and always end with the bottom marker; final states are checked only once
//! the whole word (including ⊥) has been consumed. An empty target set accepts
//! any remainder.
//!
//! Within one `(state, letter)` bucket the target sets form a ⊆-antichain:
//! a target set that contains another one is redundant and is dropped.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pds::{Configuration, Control, Letter};

/// Identity of an automaton state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StateId {
    /// `(p, ψ, c)` for subformula index `sub` at level `level`.
    Tuple {
        control: Control,
        sub: u32,
        level: u32,
    },
    /// `(p, ψ, c, a)` for a backwards-modality subformula.
    Intermediate {
        control: Control,
        sub: u32,
        level: u32,
        letter: Letter,
    },
    /// `q*`, accepting every word.
    Star,
    /// `q^ε_f`, accepting only the empty word.
    EpsFinal,
    /// A state imported from an externally supplied valuation automaton.
    Valuation(u32),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AmaError {
    #[error("unknown state {0}")]
    UnknownState(String),
    #[error("automata are over different state sets")]
    StateSetMismatch,
    #[error("malformed configuration: {0}")]
    MalformedConfig(String),
    #[error("malformed automaton document: {0}")]
    Malformed(String),
}

/// A sorted, duplicate-free set of state indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateSet(Vec<u32>);

impl StateSet {
    pub fn empty() -> StateSet {
        StateSet(Vec::new())
    }

    pub fn singleton(q: u32) -> StateSet {
        StateSet(vec![q])
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, q: u32) -> bool {
        self.0.binary_search(&q).is_ok()
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        if self.0.len() > other.0.len() {
            return false;
        }
        let mut it = other.0.iter();
        'outer: for x in self.0.iter() {
            for y in it.by_ref() {
                if y == x {
                    continue 'outer;
                }
                if y > x {
                    return false;
                }
            }
            return false;
        }
        true
    }

    pub fn union(&self, other: &StateSet) -> StateSet {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        StateSet(out)
    }
}

impl FromIterator<u32> for StateSet {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        let mut v: Vec<u32> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        StateSet(v)
    }
}

/// The target sets of one `(state, letter)` pair, kept as a sorted ⊆-antichain.
pub type Bucket = Vec<StateSet>;

/// Inserts `t` into an antichain bucket. Returns whether the bucket changed.
pub fn antichain_insert(bucket: &mut Bucket, t: StateSet) -> bool {
    if bucket.iter().any(|u| u.is_subset(&t)) {
        return false;
    }
    bucket.retain(|u| !t.is_subset(u));
    let pos = bucket.binary_search(&t).unwrap_or_else(|p| p);
    bucket.insert(pos, t);
    true
}

/// Reduces arbitrary target sets to their ⊆-minimal elements, sorted.
pub fn minimize(sets: impl IntoIterator<Item = StateSet>) -> Bucket {
    let mut all: Vec<StateSet> = sets.into_iter().collect();
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    all.dedup();
    let mut out: Bucket = Vec::new();
    for t in all {
        if !out.iter().any(|u| u.is_subset(&t)) {
            out.push(t);
        }
    }
    out.sort();
    out
}

/// Cross product of choices: one target set from each list, unioned.
/// Empty when some list is empty; `[∅]` when there are no lists.
pub fn combine(choices: &[Bucket]) -> Bucket {
    let mut acc: Bucket = vec![StateSet::empty()];
    for options in choices {
        if options.is_empty() {
            return Vec::new();
        }
        acc = minimize(
            acc.iter()
                .flat_map(|r| options.iter().map(move |t| r.union(t))),
        );
    }
    acc
}

/// The fixed, sorted state set an automaton ranges over.
#[derive(Debug, PartialEq, Eq)]
pub struct StateSpace {
    states: Vec<StateId>,
    index: HashMap<StateId, u32>,
}

impl StateSpace {
    /// Builds a space containing `states` plus `q*` and `q^ε_f`.
    pub fn new(states: impl IntoIterator<Item = StateId>) -> StateSpace {
        let mut states: Vec<StateId> = states.into_iter().collect();
        states.push(StateId::Star);
        states.push(StateId::EpsFinal);
        states.sort();
        states.dedup();
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (*s, i as u32))
            .collect();
        StateSpace { states, index }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn id(&self, q: u32) -> StateId {
        self.states[q as usize]
    }

    pub fn index(&self, s: &StateId) -> Option<u32> {
        self.index.get(s).copied()
    }

    pub fn star(&self) -> u32 {
        self.index[&StateId::Star]
    }

    pub fn eps_final(&self) -> u32 {
        self.index[&StateId::EpsFinal]
    }
}

#[derive(Debug, Clone)]
pub struct Ama {
    space: Arc<StateSpace>,
    alphabet_len: usize,
    delta: Vec<Vec<Bucket>>,
    finals: Vec<bool>,
}

impl PartialEq for Ama {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.space, &other.space) || self.space == other.space)
            && self.alphabet_len == other.alphabet_len
            && self.delta == other.delta
            && self.finals == other.finals
    }
}

impl Eq for Ama {}

impl Ama {
    /// An automaton whose only transitions are the `q*` self-loops and whose
    /// final states are `q*` and `q^ε_f`.
    pub fn new(space: Arc<StateSpace>, alphabet_len: usize) -> Ama {
        let slots = alphabet_len + 1;
        let mut finals = vec![false; space.len()];
        let star = space.star();
        finals[star as usize] = true;
        finals[space.eps_final() as usize] = true;
        let mut delta = vec![vec![Vec::new(); slots]; space.len()];
        for bucket in delta[star as usize].iter_mut() {
            bucket.push(StateSet::singleton(star));
        }
        Ama {
            space,
            alphabet_len,
            delta,
            finals,
        }
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn alphabet_len(&self) -> usize {
        self.alphabet_len
    }

    /// Size of the reading alphabet, ⊥ included.
    pub fn slots(&self) -> usize {
        self.alphabet_len + 1
    }

    pub fn letter_slot(&self, a: Letter) -> usize {
        a.slot(self.alphabet_len)
    }

    pub fn is_final(&self, q: u32) -> bool {
        self.finals[q as usize]
    }

    pub fn set_final(&mut self, q: u32) {
        self.finals[q as usize] = true;
    }

    pub fn finals(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.finals.len() as u32).filter(|q| self.finals[*q as usize])
    }

    pub fn bucket(&self, q: u32, slot: usize) -> &Bucket {
        &self.delta[q as usize][slot]
    }

    pub fn buckets(&self, q: u32) -> &[Bucket] {
        &self.delta[q as usize]
    }

    /// Replaces a bucket wholesale; the caller supplies an antichain.
    pub fn set_bucket(&mut self, q: u32, slot: usize, bucket: Bucket) {
        self.delta[q as usize][slot] = bucket;
    }

    pub fn set_buckets(&mut self, q: u32, buckets: Vec<Bucket>) {
        debug_assert_eq!(buckets.len(), self.slots());
        self.delta[q as usize] = buckets;
    }

    pub fn clear_state(&mut self, q: u32) {
        for b in self.delta[q as usize].iter_mut() {
            b.clear();
        }
    }

    /// Adds `(q, a, targets)` unless an existing target set is contained in
    /// `targets`; drops existing target sets that strictly contain it.
    pub fn add_transition(&mut self, q: StateId, a: Letter, targets: &[StateId]) -> Result<bool, AmaError> {
        let qi = self.index_of(&q)?;
        let t = targets
            .iter()
            .map(|s| self.index_of(s))
            .collect::<Result<StateSet, _>>()?;
        Ok(self.add_transition_idx(qi, self.letter_slot(a), t))
    }

    pub fn add_transition_idx(&mut self, q: u32, slot: usize, targets: StateSet) -> bool {
        antichain_insert(&mut self.delta[q as usize][slot], targets)
    }

    fn index_of(&self, s: &StateId) -> Result<u32, AmaError> {
        self.space
            .index(s)
            .ok_or_else(|| AmaError::UnknownState(format!("{s:?}")))
    }

    /// Every ⊆-minimal set reachable from all of `from` in one `a`-step:
    /// unions choosing one target set per state. `[∅]` for empty `from`.
    pub fn set_step(&self, from: &StateSet, slot: usize) -> Bucket {
        if from.len() == 1 {
            return self.bucket(from.as_slice()[0], slot).clone();
        }
        let choices: Vec<Bucket> = from
            .as_slice()
            .iter()
            .map(|&q| self.bucket(q, slot).clone())
            .collect();
        combine(&choices)
    }

    /// Target sets reached from `q` by reading `first` then `second`.
    pub fn two_step(&self, q: u32, first: usize, second: usize) -> Bucket {
        minimize(
            self.bucket(q, first)
                .iter()
                .flat_map(|mid| self.set_step(mid, second)),
        )
    }

    pub fn transition_count(&self) -> usize {
        self.delta.iter().flatten().map(Vec::len).sum()
    }

    /// `(state, slot, targets)` in ascending order.
    pub fn transitions(&self) -> impl Iterator<Item = (u32, usize, &StateSet)> + '_ {
        self.delta.iter().enumerate().flat_map(|(q, row)| {
            row.iter()
                .enumerate()
                .flat_map(move |(slot, b)| b.iter().map(move |t| (q as u32, slot, t)))
        })
    }

    /// States accepting `suffix`, given the states accepting what follows it.
    fn accepting_before(&self, slot: usize, after: &[bool]) -> Vec<bool> {
        self.delta
            .iter()
            .map(|row| {
                row[slot]
                    .iter()
                    .any(|t| t.as_slice().iter().all(|&q| after[q as usize]))
            })
            .collect()
    }

    /// For every state, whether it accepts `word`.
    pub fn accepting_states(&self, word: &[Letter]) -> Vec<bool> {
        let mut acc = self.finals.clone();
        for &a in word.iter().rev() {
            acc = self.accepting_before(self.letter_slot(a), &acc);
        }
        acc
    }

    pub fn accepts_word(&self, q: u32, word: &[Letter]) -> bool {
        self.accepting_states(word)[q as usize]
    }

    /// Restriction to the transitions leaving `states` (plus the `q*` loops).
    pub fn restrict(&self, states: &[u32]) -> Ama {
        let mut out = Ama::new(self.space.clone(), self.alphabet_len);
        for &q in states {
            out.delta[q as usize] = self.delta[q as usize].clone();
        }
        out.finals = self.finals.clone();
        out
    }
}

/// `Q' ≪ Q`: set inclusion.
pub fn leq_sets(smaller: &StateSet, larger: &StateSet) -> bool {
    smaller.is_subset(larger)
}

/// `A₁ ⪯ A₂`: every transition of `A₁` is dominated by a transition of `A₂`
/// on the same state and letter whose target set is ≪ its own.
pub fn leq_ama(a1: &Ama, a2: &Ama) -> Result<bool, AmaError> {
    if !(Arc::ptr_eq(&a1.space, &a2.space) || a1.space == a2.space) || a1.alphabet_len != a2.alphabet_len {
        return Err(AmaError::StateSetMismatch);
    }
    Ok(a1.transitions().all(|(q, slot, t)| {
        a2.bucket(q, slot).iter().any(|u| leq_sets(u, t))
    }))
}

/// Size measures of a construction.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    /// States imported from valuation automata.
    pub n: usize,
    /// States allocated by the construction, `q*` and `q^ε_f` included.
    pub k: usize,
    /// Iterations per fixpoint binder, summed over all of its evaluations.
    pub iterations: Vec<usize>,
    pub transitions: usize,
}

impl fmt::Display for Stats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let iters: Vec<String> = self.iterations.iter().map(usize::to_string).collect();
        write!(
            f,
            "n={} k={} iters=[{}] delta={}",
            self.n,
            self.k,
            iters.join(","),
            self.transitions
        )
    }
}

/// An automaton together with one initial state per control: the regular
/// set of configurations `⟨p, w⟩` such that `init(p)` accepts `w`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Denotation {
    pub controls: Vec<String>,
    pub alphabet: Vec<String>,
    /// Printed subformulas, indexed like the `sub` field of [`StateId`].
    pub subformulas: Vec<String>,
    pub ama: Ama,
    /// Initial state per control, indexed by control.
    pub init: Vec<u32>,
    pub stats: Stats,
}

impl Denotation {
    /// Whether `c` belongs to the denotation.
    pub fn accepts(&self, c: &Configuration) -> Result<bool, AmaError> {
        self.check_config(c)?;
        Ok(self.ama.accepts_word(self.init[c.control.index()], &c.stack))
    }

    fn check_config(&self, c: &Configuration) -> Result<(), AmaError> {
        if c.control.index() >= self.init.len() {
            return Err(AmaError::MalformedConfig(format!("unknown control {}", c.control.0)));
        }
        if !c.is_well_formed() {
            return Err(AmaError::MalformedConfig(
                "stack must end with exactly one bottom marker".into(),
            ));
        }
        if c.stack.iter().any(|l| matches!(l, Letter::Char(i) if *i as usize >= self.alphabet.len())) {
            return Err(AmaError::MalformedConfig("unknown letter".into()));
        }
        Ok(())
    }

    /// All accepted configurations with at most `max_depth` letters above ⊥,
    /// in ascending order.
    pub fn sample_accepted(&self, max_depth: usize) -> Vec<Configuration> {
        let mut out = Vec::new();
        let bottom = self.ama.accepting_states(&[Letter::Bottom]);
        let mut suffix = vec![Letter::Bottom];
        self.collect_accepted(&bottom, &mut suffix, max_depth, &mut out);
        out.sort();
        out
    }

    /// Depth-first over suffixes: `acc` holds the states accepting `suffix`.
    fn collect_accepted(
        &self,
        acc: &[bool],
        suffix: &mut Vec<Letter>,
        remaining: usize,
        out: &mut Vec<Configuration>,
    ) {
        for (p, &q) in self.init.iter().enumerate() {
            if acc[q as usize] {
                out.push(Configuration {
                    control: Control(p as u32),
                    stack: suffix.iter().rev().copied().collect(),
                });
            }
        }
        if remaining == 0 {
            return;
        }
        for i in 0..self.alphabet.len() {
            let next = self.ama.accepting_before(i, acc);
            suffix.push(Letter::Char(i as u32));
            self.collect_accepted(&next, suffix, remaining - 1, out);
            suffix.pop();
        }
    }

    /// Human-readable name of a state.
    pub fn state_name(&self, q: u32) -> String {
        state_name(self.ama.space().id(q), &self.controls, &self.alphabet)
    }

    pub fn to_json(&self) -> String {
        let names: Vec<String> = (0..self.ama.space().len() as u32)
            .map(|q| self.state_name(q))
            .collect();
        let letter_name = |slot: usize| {
            if slot == self.alphabet.len() {
                crate::pds::BOTTOM.to_string()
            } else {
                self.alphabet[slot].clone()
            }
        };
        let doc = DenotationDoc {
            states: names.clone(),
            alphabet: self.alphabet.clone(),
            bottom: crate::pds::BOTTOM.to_string(),
            delta: self
                .ama
                .transitions()
                .map(|(q, slot, t)| TransitionDoc {
                    src: names[q as usize].clone(),
                    letter: letter_name(slot),
                    targets: t.as_slice().iter().map(|&s| names[s as usize].clone()).collect(),
                })
                .collect(),
            finals: self.ama.finals().map(|q| names[q as usize].clone()).collect(),
            controls: self.controls.clone(),
            init: self
                .init
                .iter()
                .enumerate()
                .map(|(p, &q)| (self.controls[p].clone(), names[q as usize].clone()))
                .collect(),
            subformulas: self.subformulas.clone(),
            stats: self.stats.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("denotation serializes")
    }

    pub fn from_json(text: &str) -> Result<Denotation, AmaError> {
        let doc: DenotationDoc =
            serde_json::from_str(text).map_err(|e| AmaError::Malformed(e.to_string()))?;
        if doc.bottom != crate::pds::BOTTOM {
            return Err(AmaError::Malformed(format!("unsupported bottom marker `{}`", doc.bottom)));
        }
        let parse = |s: &str| parse_state_name(s, &doc.controls, &doc.alphabet);
        let ids = doc
            .states
            .iter()
            .map(|s| parse(s))
            .collect::<Result<Vec<_>, _>>()?;
        let space = Arc::new(StateSpace::new(ids.iter().copied()));
        if space.len() != ids.len() {
            return Err(AmaError::Malformed("duplicate states or missing q*/q^ε_f".into()));
        }
        let mut ama = Ama::new(space.clone(), doc.alphabet.len());
        let lookup = |s: &str| -> Result<u32, AmaError> {
            let id = parse(s)?;
            space
                .index(&id)
                .ok_or_else(|| AmaError::Malformed(format!("state `{s}` is not declared")))
        };
        for tr in doc.delta.iter() {
            let q = lookup(&tr.src)?;
            let slot = if tr.letter == crate::pds::BOTTOM {
                doc.alphabet.len()
            } else {
                doc.alphabet
                    .iter()
                    .position(|a| *a == tr.letter)
                    .ok_or_else(|| AmaError::Malformed(format!("unknown letter `{}`", tr.letter)))?
            };
            let t = tr
                .targets
                .iter()
                .map(|s| lookup(s))
                .collect::<Result<StateSet, _>>()?;
            ama.add_transition_idx(q, slot, t);
        }
        for f in doc.finals.iter() {
            ama.set_final(lookup(f)?);
        }
        let init = doc
            .controls
            .iter()
            .map(|p| {
                let s = doc
                    .init
                    .get(p)
                    .ok_or_else(|| AmaError::Malformed(format!("no initial state for control `{p}`")))?;
                lookup(s)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Denotation {
            controls: doc.controls,
            alphabet: doc.alphabet,
            subformulas: doc.subformulas,
            ama,
            init,
            stats: doc.stats,
        })
    }

    /// Graphviz rendering of the part reachable from the initial states.
    /// Target sets of size other than one go through a point-shaped fan-out node.
    pub fn to_dot(&self) -> String {
        let mut reach: BTreeSet<u32> = self.init.iter().copied().collect();
        let mut work: Vec<u32> = reach.iter().copied().collect();
        while let Some(q) = work.pop() {
            for bucket in self.ama.buckets(q) {
                for t in bucket {
                    for &s in t.as_slice() {
                        if reach.insert(s) {
                            work.push(s);
                        }
                    }
                }
            }
        }
        let letter_name = |slot: usize| {
            if slot == self.alphabet.len() {
                crate::pds::BOTTOM
            } else {
                self.alphabet[slot].as_str()
            }
        };
        let mut out = String::from("digraph ama {\n  rankdir=LR;\n");
        for &q in reach.iter() {
            let shape = if self.ama.is_final(q) { "doublecircle" } else { "circle" };
            let _ = writeln!(out, "  s{q} [label=\"{}\", shape={shape}];", dot_escape(&self.state_name(q)));
        }
        for (p, &q) in self.init.iter().enumerate() {
            let _ = writeln!(out, "  init{p} [label=\"{}\", shape=plaintext];", dot_escape(&self.controls[p]));
            let _ = writeln!(out, "  init{p} -> s{q};");
        }
        // group letters sharing (source, target set)
        let mut edges: BTreeMap<(u32, &StateSet), Vec<&str>> = BTreeMap::new();
        for &q in reach.iter() {
            for (slot, bucket) in self.ama.buckets(q).iter().enumerate() {
                for t in bucket {
                    edges.entry((q, t)).or_default().push(letter_name(slot));
                }
            }
        }
        for (i, ((q, t), letters)) in edges.iter().enumerate() {
            let label = dot_escape(&letters.join(","));
            if t.len() == 1 {
                let _ = writeln!(out, "  s{q} -> s{} [label=\"{label}\"];", t.as_slice()[0]);
            } else {
                let _ = writeln!(out, "  h{i} [shape=point];");
                let _ = writeln!(out, "  s{q} -> h{i} [label=\"{label}\", arrowhead=none];");
                for &s in t.as_slice() {
                    let _ = writeln!(out, "  h{i} -> s{s};");
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[derive(Serialize, Deserialize)]
struct TransitionDoc {
    src: String,
    letter: String,
    targets: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct DenotationDoc {
    states: Vec<String>,
    alphabet: Vec<String>,
    bottom: String,
    delta: Vec<TransitionDoc>,
    finals: Vec<String>,
    controls: Vec<String>,
    init: BTreeMap<String, String>,
    subformulas: Vec<String>,
    stats: Stats,
}

/// `q*`, `qe`, `v3`, `(p,2,1)` or `(p,2,1,a)`.
pub fn state_name(id: StateId, controls: &[String], alphabet: &[String]) -> String {
    let letter = |l: Letter| match l {
        Letter::Char(i) => alphabet[i as usize].clone(),
        Letter::Bottom => crate::pds::BOTTOM.to_string(),
    };
    match id {
        StateId::Star => "q*".to_string(),
        StateId::EpsFinal => "qe".to_string(),
        StateId::Valuation(i) => format!("v{i}"),
        StateId::Tuple { control, sub, level } => {
            format!("({},{sub},{level})", controls[control.index()])
        }
        StateId::Intermediate {
            control,
            sub,
            level,
            letter: a,
        } => format!("({},{sub},{level},{})", controls[control.index()], letter(a)),
    }
}

pub fn parse_state_name(s: &str, controls: &[String], alphabet: &[String]) -> Result<StateId, AmaError> {
    let bad = || AmaError::Malformed(format!("bad state name `{s}`"));
    match s {
        "q*" => return Ok(StateId::Star),
        "qe" => return Ok(StateId::EpsFinal),
        _ => {}
    }
    if let Some(rest) = s.strip_prefix('v') {
        return u32::from_str(rest).map(StateId::Valuation).map_err(|_| bad());
    }
    let inner = s
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(bad)?;
    let parts: Vec<&str> = inner.split(',').collect();
    if parts.len() != 3 && parts.len() != 4 {
        return Err(bad());
    }
    let control = controls
        .iter()
        .position(|c| c == parts[0])
        .map(|i| Control(i as u32))
        .ok_or_else(bad)?;
    let sub = u32::from_str(parts[1]).map_err(|_| bad())?;
    let level = u32::from_str(parts[2]).map_err(|_| bad())?;
    if parts.len() == 3 {
        return Ok(StateId::Tuple { control, sub, level });
    }
    let letter = alphabet
        .iter()
        .position(|a| a == parts[3])
        .map(|i| Letter::Char(i as u32))
        .ok_or_else(bad)?;
    Ok(StateId::Intermediate {
        control,
        sub,
        level,
        letter,
    })
}
