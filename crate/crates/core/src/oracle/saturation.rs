//! Classical reachability by saturation of non-alternating multi-automata.
//!
//! Deliberately independent of the alternating construction: plain NFAs over
//! stack words, one initial state per control.

use std::collections::BTreeSet;

use crate::pds::{CommandKind, Configuration, HeadSet, PushdownSystem};

/// A non-alternating multi-automaton. States `0..|P|` are the initial states
/// of the controls; `None` labels are ε-moves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiAutomaton {
    pub states: usize,
    pub alphabet_len: usize,
    pub trans: BTreeSet<(usize, Option<usize>, usize)>,
    pub finals: BTreeSet<usize>,
}

impl MultiAutomaton {
    /// Controls as states `0..|P|`, then `any` (accepts every remainder) and
    /// `end` (the only final state), with edges `p -a-> any` and `p -$-> end` for
    /// each head in `heads`.
    fn seeded(sys: &PushdownSystem, heads: &HeadSet, extra: usize) -> (MultiAutomaton, usize) {
        let n = sys.alphabet().len();
        let nc = sys.controls().len();
        let (any, end) = (nc, nc + 1);
        let mut trans = BTreeSet::new();
        for a in 0..n {
            trans.insert((any, Some(a), any));
        }
        trans.insert((any, Some(n), end));
        for (p, a) in heads.iter() {
            let to = if a.is_bottom() { end } else { any };
            trans.insert((p.index(), Some(a.slot(n)), to));
        }
        let ma = MultiAutomaton {
            states: nc + 2 + extra,
            alphabet_len: n,
            trans,
            finals: BTreeSet::from([end]),
        };
        (ma, nc + 2)
    }

    fn closure(&self, from: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut out = from.clone();
        let mut work: Vec<usize> = from.iter().copied().collect();
        while let Some(s) = work.pop() {
            for &(_, _, t) in self.trans.range((s, None, 0)..(s, Some(0), 0)) {
                if out.insert(t) {
                    work.push(t);
                }
            }
        }
        out
    }

    /// States reachable from `from` reading `word`, ε-moves included.
    pub fn read(&self, from: usize, word: &[usize]) -> BTreeSet<usize> {
        let mut cur = self.closure(&BTreeSet::from([from]));
        for &a in word {
            let next: BTreeSet<usize> = cur
                .iter()
                .flat_map(|&s| {
                    self.trans
                        .range((s, Some(a), 0)..=(s, Some(a), usize::MAX))
                        .map(|&(_, _, t)| t)
                })
                .collect();
            cur = self.closure(&next);
        }
        cur
    }

    pub fn accepts(&self, c: &Configuration) -> bool {
        let word: Vec<usize> = c.stack.iter().map(|l| l.slot(self.alphabet_len)).collect();
        self.read(c.control.index(), &word)
            .iter()
            .any(|s| self.finals.contains(s))
    }
}

/// Configurations that can reach a configuration whose head is in `target`.
pub fn prestar(sys: &PushdownSystem, target: &HeadSet) -> MultiAutomaton {
    let (mut ma, _) = MultiAutomaton::seeded(sys, target, 0);
    let n = sys.alphabet().len();
    loop {
        let mut added = Vec::new();
        for cmd in sys.commands() {
            let word: Vec<usize> = cmd.written().iter().map(|l| l.slot(n)).collect();
            for s in ma.read(cmd.target().index(), &word) {
                let t = (cmd.control.index(), Some(cmd.letter.slot(n)), s);
                if !ma.trans.contains(&t) {
                    added.push(t);
                }
            }
        }
        if added.is_empty() {
            return ma;
        }
        ma.trans.extend(added);
    }
}

/// Configurations reachable from a configuration whose head is in `source`.
pub fn poststar(sys: &PushdownSystem, source: &HeadSet) -> MultiAutomaton {
    let pushes: Vec<usize> = sys
        .commands()
        .iter()
        .enumerate()
        .filter(|(_, c)| matches!(c.kind, CommandKind::Push { .. }))
        .map(|(i, _)| i)
        .collect();
    let (mut ma, first_aux) = MultiAutomaton::seeded(sys, source, pushes.len());
    let n = sys.alphabet().len();
    loop {
        let mut added = Vec::new();
        for (i, cmd) in sys.commands().iter().enumerate() {
            let (p, a) = (cmd.control.index(), cmd.letter.slot(n));
            let p2 = cmd.target().index();
            for q in ma.read(p, &[a]) {
                match cmd.kind {
                    CommandKind::Pop { .. } => added.push((p2, None, q)),
                    CommandKind::Rewrite { top, .. } => added.push((p2, Some(top.slot(n)), q)),
                    CommandKind::Push { top, below, .. } => {
                        let aux = first_aux + pushes.iter().position(|&j| j == i).unwrap();
                        added.push((p2, Some(top.slot(n)), aux));
                        added.push((aux, Some(below.slot(n)), q));
                    }
                }
            }
        }
        added.retain(|t| !ma.trans.contains(t));
        if added.is_empty() {
            return ma;
        }
        ma.trans.extend(added);
    }
}

/// The heads not in `heads`, ⊥-headed ones included.
pub fn complement(sys: &PushdownSystem, heads: &HeadSet) -> HeadSet {
    sys.heads().filter(|h| !heads.contains(*h)).collect()
}
