//! Seeded random pushdown systems, formulas and configurations.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::mucalc::Formula;
use crate::pds::{Command, CommandKind, Configuration, Control, HeadSet, Letter, PushdownSystem};

/// Propositions defined on every generated system.
pub const PROPS: [&str; 2] = ["x", "y"];

#[derive(Debug, Clone, Copy)]
pub struct SystemParams {
    pub max_controls: usize,
    pub max_letters: usize,
    pub max_rules: usize,
    pub rewrite_only: bool,
    /// Probability that a given head belongs to a proposition.
    pub prop_density: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            max_controls: 4,
            max_letters: 3,
            max_rules: 8,
            rewrite_only: false,
            prop_density: 0.35,
        }
    }
}

pub fn random_system<R: Rng>(rng: &mut R, params: &SystemParams) -> PushdownSystem {
    let nc = rng.gen_range(1..=params.max_controls);
    let na = rng.gen_range(1..=params.max_letters);
    let nr = rng.gen_range(1..=params.max_rules);
    let control = |rng: &mut R| Control(rng.gen_range(0..nc as u32));
    let letter = |rng: &mut R| Letter::Char(rng.gen_range(0..na as u32));
    let commands = (0..nr)
        .map(|_| {
            let (from, read, target) = (control(rng), letter(rng), control(rng));
            let kind = match if params.rewrite_only { 1 } else { rng.gen_range(0..3) } {
                0 => CommandKind::Pop { target },
                1 => CommandKind::Rewrite { target, top: letter(rng) },
                _ => CommandKind::Push {
                    target,
                    top: letter(rng),
                    below: letter(rng),
                },
            };
            Command {
                control: from,
                letter: read,
                kind,
            }
        })
        .collect();
    let heads: Vec<(Control, Letter)> = (0..nc as u32)
        .flat_map(|p| (0..=na).map(move |s| (Control(p), Letter::from_slot(s, na))))
        .collect();
    let props: BTreeMap<String, HeadSet> = PROPS
        .iter()
        .map(|name| {
            let set = heads
                .iter()
                .copied()
                .filter(|_| rng.gen_bool(params.prop_density))
                .collect();
            (name.to_string(), set)
        })
        .collect();
    PushdownSystem::new(
        (0..nc).map(|i| format!("p{i}")).collect(),
        (0..na).map(|i| format!("a{i}")).collect(),
        commands,
        props,
    )
    .expect("generated system is valid")
}

#[derive(Debug, Clone, Copy)]
pub struct FormulaParams {
    /// Height of the syntax tree.
    pub max_depth: usize,
    pub max_nesting: usize,
}

impl Default for FormulaParams {
    fn default() -> Self {
        FormulaParams {
            max_depth: 5,
            max_nesting: 2,
        }
    }
}

/// A random closed formula over [`PROPS`].
pub fn random_formula<R: Rng>(rng: &mut R, params: &FormulaParams) -> Formula {
    let mut gen = FormulaGen { rng, fresh: 0 };
    gen.go(params.max_depth, params.max_nesting, &mut Vec::new())
}

struct FormulaGen<'r, R> {
    rng: &'r mut R,
    fresh: usize,
}

impl<R: Rng> FormulaGen<'_, R> {
    fn leaf(&mut self, scope: &[String]) -> Formula {
        let x = *PROPS.choose(self.rng).unwrap();
        match self.rng.gen_range(0..3) {
            0 if !scope.is_empty() => Formula::var(scope.choose(self.rng).unwrap()),
            0 | 1 => Formula::atom(x),
            _ => Formula::neg_atom(x),
        }
    }

    fn go(&mut self, depth: usize, nesting: usize, scope: &mut Vec<String>) -> Formula {
        if depth <= 1 || self.rng.gen_bool(0.2) {
            return self.leaf(scope);
        }
        let ops = if nesting > 0 { 8 } else { 6 };
        match self.rng.gen_range(0..ops) {
            0 => Formula::and(self.go(depth - 1, nesting, scope), self.go(depth - 1, nesting, scope)),
            1 => Formula::or(self.go(depth - 1, nesting, scope), self.go(depth - 1, nesting, scope)),
            2 => Formula::boxed(self.go(depth - 1, nesting, scope)),
            3 => Formula::diamond(self.go(depth - 1, nesting, scope)),
            4 => Formula::back_box(self.go(depth - 1, nesting, scope)),
            5 => Formula::back_diamond(self.go(depth - 1, nesting, scope)),
            k => {
                let z = format!("Z{}", self.fresh);
                self.fresh += 1;
                scope.push(z.clone());
                let body = self.go(depth - 1, nesting - 1, scope);
                scope.pop();
                if k == 6 {
                    Formula::mu(&z, body)
                } else {
                    Formula::nu(&z, body)
                }
            }
        }
    }
}

/// A random configuration with at most `max_depth` letters above ⊥.
pub fn random_config<R: Rng>(rng: &mut R, sys: &PushdownSystem, max_depth: usize) -> Configuration {
    let p = Control(rng.gen_range(0..sys.controls().len() as u32));
    let depth = rng.gen_range(0..=max_depth);
    let n = sys.alphabet().len() as u32;
    let word: Vec<Letter> = (0..depth).map(|_| Letter::Char(rng.gen_range(0..n))).collect();
    Configuration::new(p, &word)
}
