//! Saturation: computes an alternating multi-automaton for the denotation of
//! a formula over a pushdown system.
//!
//! All states are allocated up front. Every subformula ψ living at level `c`
//! owns the states `(p, ψ, c)` (and `(p, ψ, c, a)` for backwards modalities);
//! evaluating ψ only ever rewrites the transitions leaving those states.
//! Fixpoints are evaluated by Kleene iteration over the fixed state set.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use thiserror::Error;

use crate::ama::{combine, minimize, Ama, Bucket, Denotation, StateId, StateSet, StateSpace, Stats};
use crate::mucalc::{alpha_normalize, analyze, Fixpoint, Formula};
use crate::pds::{Command, CommandKind, Control, Letter, PreIndex, PushdownSystem};

pub const DEFAULT_ITERATION_LIMIT: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("unknown proposition `{0}`")]
    UnknownProp(String),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("fixpoint {binder} did not stabilize within {limit} iterations")]
    IterationLimit { binder: String, limit: usize },
    #[error("valuation for `{var}` does not match the system: {msg}")]
    Valuation { var: String, msg: String },
}

/// Deliberate corruptions of the construction, used to check that the test
/// suites notice when something is missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Omit the vacuous transitions of `~[]` (no predecessors, or no push
    /// predecessors for an intermediate state).
    DropBackBoxVacuous,
}

#[derive(Debug, Clone)]
pub struct Options {
    pub iteration_limit: usize,
    /// Record the Z-layer after every iteration of every fixpoint.
    pub trace: bool,
    pub mutation: Option<Mutation>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            iteration_limit: DEFAULT_ITERATION_LIMIT,
            trace: false,
            mutation: None,
        }
    }
}

/// Successive Z-layers of one evaluation of a fixpoint: element 0 is the
/// initialization, element `i` the layer after iteration `i`.
#[derive(Debug, Clone)]
pub struct FixpointTrace {
    pub binder: String,
    pub kind: Fixpoint,
    pub level: u32,
    pub chain: Vec<Ama>,
}

/// The state set a construction will use, computed without running it.
#[derive(Debug, Clone)]
pub struct Allocation {
    pub space: Arc<StateSpace>,
    /// Number of allocated states, `q*` and `q^ε_f` included.
    pub k: usize,
    /// Maximal fixpoint nesting depth.
    pub depth: usize,
    pub subformulas: Vec<Formula>,
}

impl Allocation {
    /// `|P|·|sub|·(m+1)·(|Σ|+2)+2`.
    pub fn bound(&self, sys: &PushdownSystem) -> usize {
        sys.controls().len() * self.subformulas.len() * (self.depth + 1) * (sys.alphabet().len() + 2) + 2
    }
}

/// Tuple states for every control, subformula and level `0..=m`;
/// intermediate states for every backwards-modal subformula and letter.
pub fn allocate_states(sys: &PushdownSystem, phi: &Formula) -> Allocation {
    let phi = alpha_normalize(phi);
    allocate(sys, &phi, 0)
}

fn allocate(sys: &PushdownSystem, phi: &Formula, imported: u32) -> Allocation {
    let info = analyze(phi);
    let m = info.depth as u32;
    let mut states = Vec::new();
    for p in sys.control_ids() {
        for (s, f) in info.subformulas.iter().enumerate() {
            for c in 0..=m {
                states.push(StateId::Tuple {
                    control: p,
                    sub: s as u32,
                    level: c,
                });
                if f.is_back_modal() {
                    for a in sys.letters() {
                        states.push(StateId::Intermediate {
                            control: p,
                            sub: s as u32,
                            level: c,
                            letter: a,
                        });
                    }
                }
            }
        }
    }
    let k = states.len() + 2;
    states.extend((0..imported).map(StateId::Valuation));
    Allocation {
        space: Arc::new(StateSpace::new(states)),
        k,
        depth: info.depth,
        subformulas: info.subformulas,
    }
}

/// Denotation of a closed formula.
pub fn model_check(sys: &PushdownSystem, phi: &Formula, options: &Options) -> Result<Denotation, EngineError> {
    model_check_traced(sys, phi, options).map(|(d, _)| d)
}

/// Like [`model_check`], also returning the fixpoint traces when
/// `options.trace` is set.
pub fn model_check_traced(
    sys: &PushdownSystem,
    phi: &Formula,
    options: &Options,
) -> Result<(Denotation, Vec<FixpointTrace>), EngineError> {
    model_check_open(sys, phi, &BTreeMap::new(), options)
}

/// Denotation of a formula whose free variables are interpreted by the
/// given denotations. Their states are imported as `v0, v1, …` and left
/// untouched.
pub fn model_check_open(
    sys: &PushdownSystem,
    phi: &Formula,
    valuation: &BTreeMap<String, Denotation>,
    options: &Options,
) -> Result<(Denotation, Vec<FixpointTrace>), EngineError> {
    let phi = alpha_normalize(phi);
    for z in phi.free_vars() {
        let d = valuation.get(&z).ok_or_else(|| EngineError::Unbound(z.clone()))?;
        if d.controls != sys.controls() || d.alphabet != sys.alphabet() {
            return Err(EngineError::Valuation {
                var: z,
                msg: "controls or alphabet differ".into(),
            });
        }
    }
    let used: Vec<(&String, &Denotation)> = valuation
        .iter()
        .filter(|(z, _)| phi.free_vars().contains(*z))
        .collect();
    let imported: u32 = used
        .iter()
        .map(|(_, d)| imported_states(d).len() as u32)
        .sum();
    let alloc = allocate(sys, &phi, imported);
    let mut engine = Engine::new(sys, &alloc, options.clone());

    let mut var_inits = HashMap::new();
    let mut offset = 0;
    for (z, d) in used {
        var_inits.insert(z.clone(), engine.import(d, offset));
        offset += imported_states(d).len() as u32;
    }

    let root = engine.build(&phi, 0, &mut Vec::new(), &var_inits)?;
    engine.dispatch(root)?;
    let init: Vec<u32> = sys.control_ids().map(|p| engine.init(root, p)).collect();
    let subformulas = alloc.subformulas.iter().map(|f| f.to_string()).collect();
    let stats = Stats {
        n: imported as usize,
        k: alloc.k,
        iterations: engine.iterations.clone(),
        transitions: engine.ama.transition_count(),
    };
    let denotation = Denotation {
        controls: sys.controls().to_vec(),
        alphabet: sys.alphabet().to_vec(),
        subformulas,
        ama: engine.ama,
        init,
        stats,
    };
    Ok((denotation, engine.traces))
}

fn imported_states(d: &Denotation) -> Vec<u32> {
    let sp = d.ama.space();
    (0..sp.len() as u32)
        .filter(|&q| !matches!(sp.id(q), StateId::Star | StateId::EpsFinal))
        .collect()
}

#[derive(Debug, Clone)]
enum Kind {
    Atom(String),
    NegAtom(String),
    And,
    Or,
    Box,
    Diamond,
    BackBox,
    BackDiamond,
    Fix { kind: Fixpoint, name: String, ordinal: usize },
    /// Bound variable: shares the initial states of its binder node.
    Bound(usize),
    /// Free variable: initial states imported from a valuation.
    Free(Vec<u32>),
}

#[derive(Debug)]
struct Node {
    kind: Kind,
    sub: u32,
    level: u32,
    children: Vec<usize>,
}

struct Engine<'a> {
    sys: &'a PushdownSystem,
    pre: PreIndex,
    alloc: &'a Allocation,
    options: Options,
    nodes: Vec<Node>,
    ama: Ama,
    nletters: usize,
    iterations: Vec<usize>,
    traces: Vec<FixpointTrace>,
}

impl<'a> Engine<'a> {
    fn new(sys: &'a PushdownSystem, alloc: &'a Allocation, options: Options) -> Self {
        Engine {
            sys,
            pre: PreIndex::new(sys),
            alloc,
            options,
            nodes: Vec::new(),
            ama: Ama::new(alloc.space.clone(), sys.alphabet().len()),
            nletters: sys.alphabet().len(),
            iterations: Vec::new(),
            traces: Vec::new(),
        }
    }

    fn slots(&self) -> usize {
        self.nletters + 1
    }

    fn star(&self) -> u32 {
        self.alloc.space.star()
    }

    fn eps(&self) -> u32 {
        self.alloc.space.eps_final()
    }

    /// Copies the transitions of `d` into the `Valuation` states starting at
    /// `offset` and returns the imported initial state per control.
    fn import(&mut self, d: &Denotation, offset: u32) -> Vec<u32> {
        let src = d.ama.space();
        let mut map = vec![0u32; src.len()];
        for (i, q) in imported_states(d).into_iter().enumerate() {
            map[q as usize] = self.alloc.space.index(&StateId::Valuation(offset + i as u32)).unwrap();
        }
        map[src.star() as usize] = self.star();
        map[src.eps_final() as usize] = self.eps();
        for q in imported_states(d) {
            for slot in 0..self.slots() {
                let bucket = minimize(
                    d.ama
                        .bucket(q, slot)
                        .iter()
                        .map(|t| t.as_slice().iter().map(|&s| map[s as usize]).collect()),
                );
                self.ama.set_bucket(map[q as usize], slot, bucket);
            }
            if d.ama.is_final(q) {
                self.ama.set_final(map[q as usize]);
            }
        }
        d.init.iter().map(|&q| map[q as usize]).collect()
    }

    /// Builds the occurrence tree. `scope` maps bound variables to binder nodes.
    fn build(
        &mut self,
        f: &Formula,
        level: u32,
        scope: &mut Vec<(String, usize)>,
        free: &HashMap<String, Vec<u32>>,
    ) -> Result<usize, EngineError> {
        let sub = |f: &Formula| self.alloc.subformulas.iter().position(|g| g == f).unwrap() as u32;
        let (kind, children, level) = match f {
            Formula::Var(z) => {
                let kind = match scope.iter().rev().find(|(n, _)| n == z) {
                    Some(&(_, b)) => Kind::Bound(b),
                    None => Kind::Free(free.get(z).cloned().ok_or_else(|| EngineError::Unbound(z.clone()))?),
                };
                self.nodes.push(Node {
                    kind,
                    sub: u32::MAX,
                    level,
                    children: vec![],
                });
                return Ok(self.nodes.len() - 1);
            }
            Formula::Atom(x) => (Kind::Atom(x.clone()), vec![], level),
            Formula::NegAtom(x) => (Kind::NegAtom(x.clone()), vec![], level),
            Formula::And(l, r) | Formula::Or(l, r) => {
                let l = self.build(l, level, scope, free)?;
                let r = self.build(r, level, scope, free)?;
                let kind = if matches!(f, Formula::And(..)) { Kind::And } else { Kind::Or };
                (kind, vec![l, r], level)
            }
            Formula::Box(g) | Formula::Diamond(g) | Formula::BackBox(g) | Formula::BackDiamond(g) => {
                let kind = match f {
                    Formula::Box(_) => Kind::Box,
                    Formula::Diamond(_) => Kind::Diamond,
                    Formula::BackBox(_) => Kind::BackBox,
                    _ => Kind::BackDiamond,
                };
                (kind, vec![self.build(g, level, scope, free)?], level)
            }
            Formula::Mu(z, g) | Formula::Nu(z, g) => {
                let fix = if matches!(f, Formula::Mu(..)) {
                    Fixpoint::Least
                } else {
                    Fixpoint::Greatest
                };
                let inner = level_of_binder(scope.len());
                let ordinal = self.iterations.len();
                self.iterations.push(0);
                let id = self.nodes.len();
                self.nodes.push(Node {
                    kind: Kind::Fix {
                        kind: fix,
                        name: z.clone(),
                        ordinal,
                    },
                    sub: sub(f),
                    level: inner,
                    children: vec![],
                });
                scope.push((z.clone(), id));
                let body = self.build(g, inner, scope, free);
                scope.pop();
                self.nodes[id].children.push(body?);
                return Ok(id);
            }
        };
        self.nodes.push(Node {
            kind,
            sub: sub(f),
            level,
            children,
        });
        Ok(self.nodes.len() - 1)
    }

    fn tuple(&self, p: Control, sub: u32, level: u32) -> u32 {
        self.alloc
            .space
            .index(&StateId::Tuple {
                control: p,
                sub,
                level,
            })
            .expect("tuple state allocated")
    }

    /// The intermediate state `(p, ψ, c, a)`; for `a = ⊥` this is `q^ε_f`.
    fn intermediate(&self, p: Control, sub: u32, level: u32, a: Letter) -> u32 {
        if a.is_bottom() {
            return self.eps();
        }
        self.alloc
            .space
            .index(&StateId::Intermediate {
                control: p,
                sub,
                level,
                letter: a,
            })
            .expect("intermediate state allocated")
    }

    /// Initial state of a node for control `p`.
    fn init(&self, node: usize, p: Control) -> u32 {
        let n = &self.nodes[node];
        match &n.kind {
            Kind::Bound(b) => self.init(*b, p),
            Kind::Free(v) => v[p.index()],
            _ => self.tuple(p, n.sub, n.level),
        }
    }

    fn letter(&self, slot: usize) -> Letter {
        Letter::from_slot(slot, self.nletters)
    }

    fn slot(&self, a: Letter) -> usize {
        a.slot(self.nletters)
    }

    /// Evaluates a node, children first, installing its transitions.
    fn dispatch(&mut self, node: usize) -> Result<(), EngineError> {
        match self.nodes[node].kind {
            Kind::Fix { .. } => return self.fixpoint(node),
            Kind::Bound(_) | Kind::Free(_) => return Ok(()),
            _ => {}
        }
        for c in self.nodes[node].children.clone() {
            self.dispatch(c)?;
        }
        let (sub, level) = (self.nodes[node].sub, self.nodes[node].level);
        let kind = self.nodes[node].kind.clone();
        let children = self.nodes[node].children.clone();
        for p in self.sys.control_ids().collect::<Vec<_>>() {
            let own = self.tuple(p, sub, level);
            match &kind {
                Kind::Atom(x) | Kind::NegAtom(x) => {
                    let heads = self.sys.prop(x).ok_or_else(|| EngineError::UnknownProp(x.clone()))?;
                    let positive = matches!(kind, Kind::Atom(_));
                    let buckets = (0..self.slots())
                        .map(|slot| {
                            let a = self.letter(slot);
                            if heads.contains((p, a)) == positive {
                                vec![StateSet::singleton(if a.is_bottom() { self.eps() } else { self.star() })]
                            } else {
                                Vec::new()
                            }
                        })
                        .collect();
                    self.ama.set_buckets(own, buckets);
                }
                Kind::And | Kind::Or => {
                    let (l, r) = (self.init(children[0], p), self.init(children[1], p));
                    let buckets = (0..self.slots())
                        .map(|slot| {
                            let (bl, br) = (self.ama.bucket(l, slot), self.ama.bucket(r, slot));
                            if matches!(kind, Kind::And) {
                                combine(&[bl.clone(), br.clone()])
                            } else {
                                minimize(bl.iter().chain(br.iter()).cloned())
                            }
                        })
                        .collect();
                    self.ama.set_buckets(own, buckets);
                }
                Kind::Box | Kind::Diamond => {
                    let child = children[0];
                    let buckets = (0..self.slots())
                        .map(|slot| self.forward(p, self.letter(slot), child, matches!(kind, Kind::Box)))
                        .collect();
                    self.ama.set_buckets(own, buckets);
                }
                Kind::BackDiamond => self.back_diamond(p, sub, level, children[0]),
                Kind::BackBox => self.back_box(p, sub, level, children[0]),
                Kind::Bound(_) | Kind::Free(_) | Kind::Fix { .. } => unreachable!(),
            }
        }
        Ok(())
    }

    /// Target sets of a successor reached by `cmd`, as seen from the child.
    fn successor_runs(&self, cmd: &Command, child: usize) -> Bucket {
        let i = self.init(child, cmd.target());
        match cmd.kind {
            CommandKind::Pop { .. } => vec![StateSet::singleton(i)],
            CommandKind::Rewrite { top, .. } => self.ama.bucket(i, self.slot(top)).clone(),
            CommandKind::Push { top, below, .. } => self.ama.two_step(i, self.slot(top), self.slot(below)),
        }
    }

    fn forward(&self, p: Control, a: Letter, child: usize, universal: bool) -> Bucket {
        let per_command: Vec<Bucket> = self
            .sys
            .commands_from(p, a)
            .map(|cmd| self.successor_runs(cmd, child))
            .collect();
        if !universal {
            return minimize(per_command.into_iter().flatten());
        }
        if per_command.is_empty() {
            let t = if a.is_bottom() { self.eps() } else { self.star() };
            return vec![StateSet::singleton(t)];
        }
        combine(&per_command)
    }

    /// Runs of the child from a pop predecessor `(p', a')` of `⟨p, a…⟩`:
    /// read `a'` then `a`.
    fn pop_runs(&self, child: usize, pred: (Control, Letter), a: Letter) -> Bucket {
        self.ama
            .two_step(self.init(child, pred.0), self.slot(pred.1), self.slot(a))
    }

    /// Runs of the child reading only the predecessor's head letter.
    fn head_runs(&self, child: usize, pred: (Control, Letter)) -> Bucket {
        self.ama.bucket(self.init(child, pred.0), self.slot(pred.1)).clone()
    }

    fn back_diamond(&mut self, p: Control, sub: u32, level: u32, child: usize) {
        let letters: Vec<Letter> = self.sys.letters().collect();
        for &a in letters.iter() {
            let int = self.intermediate(p, sub, level, a);
            let buckets = (0..self.slots())
                .map(|slot| {
                    let b = self.letter(slot);
                    minimize(
                        self.pre
                            .prepush(p, a, b)
                            .iter()
                            .flat_map(|&h| self.head_runs(child, h)),
                    )
                })
                .collect();
            self.ama.set_buckets(int, buckets);
        }
        let own = self.tuple(p, sub, level);
        let buckets = (0..self.slots())
            .map(|slot| {
                let a = self.letter(slot);
                let pops = self.pre.prepop(p).iter().flat_map(|&h| self.pop_runs(child, h, a));
                let rews = self.pre.prerew(p, a).iter().flat_map(|&h| self.head_runs(child, h));
                let mut all: Vec<StateSet> = pops.chain(rews).collect();
                if !a.is_bottom() {
                    all.push(StateSet::singleton(self.intermediate(p, sub, level, a)));
                }
                minimize(all)
            })
            .collect();
        self.ama.set_buckets(own, buckets);
    }

    fn back_box(&mut self, p: Control, sub: u32, level: u32, child: usize) {
        let vacuous = self.options.mutation != Some(Mutation::DropBackBoxVacuous);
        let letters: Vec<Letter> = self.sys.letters().collect();
        for &a in letters.iter() {
            let int = self.intermediate(p, sub, level, a);
            let buckets = (0..self.slots())
                .map(|slot| {
                    let b = self.letter(slot);
                    let preds = self.pre.prepush(p, a, b);
                    if preds.is_empty() {
                        if !vacuous {
                            return Vec::new();
                        }
                        let t = if b.is_bottom() { self.eps() } else { self.star() };
                        return vec![StateSet::singleton(t)];
                    }
                    let choices: Vec<Bucket> = preds.iter().map(|&h| self.head_runs(child, h)).collect();
                    combine(&choices)
                })
                .collect();
            self.ama.set_buckets(int, buckets);
        }
        let own = self.tuple(p, sub, level);
        let buckets = (0..self.slots())
            .map(|slot| {
                let a = self.letter(slot);
                let mut choices: Vec<Bucket> = self.pre.prepop(p).iter().map(|&h| self.pop_runs(child, h, a)).collect();
                choices.extend(self.pre.prerew(p, a).iter().map(|&h| self.head_runs(child, h)));
                choices.push(vec![StateSet::singleton(self.intermediate(p, sub, level, a))]);
                let mut out = combine(&choices);
                if vacuous && self.no_predecessors(p, a) {
                    let t = if a.is_bottom() { self.eps() } else { self.star() };
                    crate::ama::antichain_insert(&mut out, StateSet::singleton(t));
                }
                out
            })
            .collect();
        self.ama.set_buckets(own, buckets);
    }

    /// `pre(p, a, b) = ∅` for every `b`.
    fn no_predecessors(&self, p: Control, a: Letter) -> bool {
        self.sys
            .letters_with_bottom()
            .all(|b| self.pre.pre(p, a, b).is_empty())
    }

    fn fixpoint(&mut self, node: usize) -> Result<(), EngineError> {
        let Kind::Fix { kind, ref name, ordinal } = self.nodes[node].kind else {
            unreachable!()
        };
        let name = name.clone();
        let (sub, level, body) = (self.nodes[node].sub, self.nodes[node].level, self.nodes[node].children[0]);
        let controls: Vec<Control> = self.sys.control_ids().collect();
        let zs: Vec<u32> = controls.iter().map(|&p| self.tuple(p, sub, level)).collect();
        let init: Vec<Bucket> = match kind {
            Fixpoint::Least => vec![Vec::new(); self.slots()],
            Fixpoint::Greatest => vec![vec![StateSet::empty()]; self.slots()],
        };
        for &z in zs.iter() {
            self.ama.set_buckets(z, init.clone());
        }
        let mut chain = Vec::new();
        if self.options.trace {
            chain.push(self.ama.restrict(&zs));
        }
        let mut iterations = 0;
        loop {
            let before: Vec<Vec<Bucket>> = zs.iter().map(|&z| self.ama.buckets(z).to_vec()).collect();
            self.dispatch(body)?;
            for (&p, &z) in controls.iter().zip(zs.iter()) {
                let b = self.init(body, p);
                if b != z {
                    let copied = self.ama.buckets(b).to_vec();
                    self.ama.set_buckets(z, copied);
                }
            }
            iterations += 1;
            if self.options.trace {
                chain.push(self.ama.restrict(&zs));
            }
            let stable = zs
                .iter()
                .zip(before.iter())
                .all(|(&z, old)| self.ama.buckets(z) == old.as_slice());
            if stable {
                break;
            }
            if iterations >= self.options.iteration_limit {
                return Err(EngineError::IterationLimit {
                    binder: name,
                    limit: self.options.iteration_limit,
                });
            }
        }
        self.iterations[ordinal] += iterations;
        if self.options.trace {
            self.traces.push(FixpointTrace {
                binder: name,
                kind,
                level,
                chain,
            });
        }
        Ok(())
    }
}

/// Level of a binder nested inside `enclosing` other binders.
fn level_of_binder(enclosing: usize) -> u32 {
    enclosing as u32 + 1
}
