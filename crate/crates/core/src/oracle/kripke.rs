//! Finite Kripke structure on heads, exact for rewrite-only systems.
//!
//! With only rewrite commands the stack below the top letter never changes,
//! so every neighbour of `⟨p, a w⟩` has the form `⟨p', b w⟩` and membership
//! in any denotation depends on the head `(p, a)` alone.

use std::collections::BTreeMap;

use crate::mucalc::Formula;
use crate::pds::{CommandKind, Control, Head, Letter, PushdownSystem};

use super::OracleError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Kripke {
    /// `controls × (alphabet ∪ {⊥})`, indexed by `p·(|Σ|+1) + slot`.
    pub states: Vec<Head>,
    pub succ: Vec<Vec<usize>>,
    pub pred: Vec<Vec<usize>>,
    pub labels: BTreeMap<String, Vec<bool>>,
}

impl Kripke {
    pub fn index(&self, h: Head) -> usize {
        let slots = self.states.len() / self.controls();
        h.0.index() * slots + h.1.slot(slots - 1)
    }

    fn controls(&self) -> usize {
        self.states.iter().map(|h| h.0.index() + 1).max().unwrap_or(1)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

pub fn head_kripke(sys: &PushdownSystem) -> Result<Kripke, OracleError> {
    if !sys.is_rewrite_only() {
        return Err(OracleError::NotRewriteOnly);
    }
    let n = sys.alphabet().len();
    let states: Vec<Head> = sys
        .control_ids()
        .flat_map(|p| (0..=n).map(move |s| (p, Letter::from_slot(s, n))))
        .collect();
    let idx = |h: Head| h.0.index() * (n + 1) + h.1.slot(n);
    let mut succ = vec![Vec::new(); states.len()];
    let mut pred = vec![Vec::new(); states.len()];
    for cmd in sys.commands() {
        if let CommandKind::Rewrite { target, top } = cmd.kind {
            let (from, to) = (idx((cmd.control, cmd.letter)), idx((target, top)));
            succ[from].push(to);
            pred[to].push(from);
        }
    }
    for v in succ.iter_mut().chain(pred.iter_mut()) {
        v.sort_unstable();
        v.dedup();
    }
    let labels = sys
        .props()
        .iter()
        .map(|(name, heads)| {
            let mut set = vec![false; states.len()];
            for h in heads.iter() {
                set[idx(h)] = true;
            }
            (name.clone(), set)
        })
        .collect();
    Ok(Kripke {
        states,
        succ,
        pred,
        labels,
    })
}

/// The set of states satisfying a closed formula.
pub fn kripke_eval(k: &Kripke, phi: &Formula) -> Result<Vec<bool>, OracleError> {
    eval(k, phi, &mut Vec::new())
}

/// Head-level view of [`kripke_eval`].
pub fn kripke_heads(k: &Kripke, phi: &Formula) -> Result<Vec<Head>, OracleError> {
    let set = kripke_eval(k, phi)?;
    Ok(k.states
        .iter()
        .zip(set)
        .filter(|(_, b)| *b)
        .map(|(h, _)| *h)
        .collect())
}

fn eval(k: &Kripke, phi: &Formula, env: &mut Vec<(String, Vec<bool>)>) -> Result<Vec<bool>, OracleError> {
    let n = k.len();
    let modal = |set: Vec<bool>, edges: &Vec<Vec<usize>>, all: bool| -> Vec<bool> {
        (0..n)
            .map(|s| {
                if all {
                    edges[s].iter().all(|&t| set[t])
                } else {
                    edges[s].iter().any(|&t| set[t])
                }
            })
            .collect()
    };
    Ok(match phi {
        Formula::Atom(x) | Formula::NegAtom(x) => {
            let set = k.labels.get(x).ok_or_else(|| OracleError::UnknownProp(x.clone()))?;
            let positive = matches!(phi, Formula::Atom(_));
            set.iter().map(|&b| b == positive).collect()
        }
        Formula::Var(z) => env
            .iter()
            .rev()
            .find(|(v, _)| v == z)
            .map(|(_, s)| s.clone())
            .ok_or_else(|| OracleError::Unbound(z.clone()))?,
        Formula::And(l, r) | Formula::Or(l, r) => {
            let (l, r) = (eval(k, l, env)?, eval(k, r, env)?);
            let and = matches!(phi, Formula::And(..));
            l.iter().zip(r).map(|(&a, b)| if and { a && b } else { a || b }).collect()
        }
        Formula::Box(f) => modal(eval(k, f, env)?, &k.succ, true),
        Formula::Diamond(f) => modal(eval(k, f, env)?, &k.succ, false),
        Formula::BackBox(f) => modal(eval(k, f, env)?, &k.pred, true),
        Formula::BackDiamond(f) => modal(eval(k, f, env)?, &k.pred, false),
        Formula::Mu(z, f) | Formula::Nu(z, f) => {
            let mut set = vec![matches!(phi, Formula::Nu(..)); n];
            loop {
                env.push((z.clone(), set.clone()));
                let next = eval(k, f, env);
                env.pop();
                let next = next?;
                if next == set {
                    break set;
                }
                set = next;
            }
        }
    })
}

/// Whether `(p, a)` is in the set returned by [`kripke_eval`].
pub fn holds_at(k: &Kripke, set: &[bool], p: Control, a: Letter) -> bool {
    set[k.index((p, a))]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mucalc::parse_closed;
    use crate::pds::parse_pds;

    const CYCLE: &str = "controls s t\nalphabet a b\nrule s a -> t b\nrule t b -> s a\nprop x: t b\n";

    fn heads(sys: &PushdownSystem, k: &Kripke, f: &str) -> Vec<String> {
        kripke_heads(k, &parse_closed(f).unwrap())
            .unwrap()
            .into_iter()
            .map(|(p, a)| format!("{} {}", sys.control_name(p), sys.letter_name(a)))
            .collect()
    }

    #[test]
    fn two_cycle() {
        let sys = parse_pds(CYCLE).unwrap();
        let k = head_kripke(&sys).unwrap();
        assert_eq!(k.len(), 6);
        let edges: usize = k.succ.iter().map(Vec::len).sum();
        assert_eq!(edges, 2);
        for c in ["s b $", "t a $", "s $", "t $"] {
            let i = k.index(sys.parse_config(c).unwrap().head());
            assert!(k.succ[i].is_empty() && k.pred[i].is_empty());
        }
        assert_eq!(k.labels["x"].iter().filter(|b| **b).count(), 1);
    }

    #[test]
    fn pop_is_rejected() {
        let sys = parse_pds("controls p\nalphabet a\nrule p a -> p\n").unwrap();
        assert_eq!(head_kripke(&sys), Err(OracleError::NotRewriteOnly));
    }

    #[test]
    fn evaluation_examples() {
        let sys = parse_pds(CYCLE).unwrap();
        let k = head_kripke(&sys).unwrap();
        assert_eq!(heads(&sys, &k, "nu Z. Z").len(), 6);
        assert_eq!(heads(&sys, &k, "mu Z. x \\/ ~<>Z"), vec!["s a", "t b"]);
        assert_eq!(heads(&sys, &k, "[]ff"), vec!["s b", "s $", "t a", "t $"]);
    }
}
