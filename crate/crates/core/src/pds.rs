//! Pushdown systems in normalized form.
//!
//! Every command reads the head `(control, top letter)` and either pops the
//! top letter, rewrites it, or replaces it by two letters. The bottom marker
//! `$` is read-only: it sits below every stack, is never consumed and never
//! produced, so `⟨p, $⟩` configurations have no successors.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Textual spelling of the bottom-of-stack marker.
pub const BOTTOM: &str = "$";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Control(pub u32);

impl Control {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A stack letter. `Bottom` sorts after every ordinary letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    Char(u32),
    Bottom,
}

impl Letter {
    pub fn is_bottom(self) -> bool {
        matches!(self, Letter::Bottom)
    }

    /// Dense index into `alphabet ∪ {⊥}`, with ⊥ last.
    pub fn slot(self, alphabet_len: usize) -> usize {
        match self {
            Letter::Char(i) => i as usize,
            Letter::Bottom => alphabet_len,
        }
    }

    pub fn from_slot(slot: usize, alphabet_len: usize) -> Letter {
        if slot == alphabet_len {
            Letter::Bottom
        } else {
            Letter::Char(slot as u32)
        }
    }
}

/// `(control, top letter)`.
pub type Head = (Control, Letter);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CommandKind {
    /// `⟨p, a w⟩ ↪ ⟨target, w⟩`
    Pop { target: Control },
    /// `⟨p, a w⟩ ↪ ⟨target, top w⟩`
    Rewrite { target: Control, top: Letter },
    /// `⟨p, a w⟩ ↪ ⟨target, top below w⟩`
    Push {
        target: Control,
        top: Letter,
        below: Letter,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Command {
    pub control: Control,
    pub letter: Letter,
    pub kind: CommandKind,
}

impl Command {
    pub fn target(&self) -> Control {
        match self.kind {
            CommandKind::Pop { target }
            | CommandKind::Rewrite { target, .. }
            | CommandKind::Push { target, .. } => target,
        }
    }

    /// Letters written on top of the untouched remainder, topmost first.
    pub fn written(&self) -> Vec<Letter> {
        match self.kind {
            CommandKind::Pop { .. } => vec![],
            CommandKind::Rewrite { top, .. } => vec![top],
            CommandKind::Push { top, below, .. } => vec![top, below],
        }
    }

    pub fn is_rewrite(&self) -> bool {
        matches!(self.kind, CommandKind::Rewrite { .. })
    }
}

/// A rule whose right-hand side may write any number of letters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralRule {
    pub control: Control,
    pub letter: Letter,
    pub target: Control,
    pub word: Vec<Letter>,
}

/// A head predicate: the configurations whose head lies in the set.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HeadSet(pub BTreeSet<Head>);

impl HeadSet {
    pub fn contains(&self, head: Head) -> bool {
        self.0.contains(&head)
    }

    pub fn contains_config(&self, c: &Configuration) -> bool {
        self.contains(c.head())
    }

    pub fn iter(&self) -> impl Iterator<Item = Head> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<Head> for HeadSet {
    fn from_iter<I: IntoIterator<Item = Head>>(iter: I) -> Self {
        HeadSet(iter.into_iter().collect())
    }
}

/// `⟨control, stack⟩` where the stack is listed top first and ends in ⊥.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub control: Control,
    pub stack: Vec<Letter>,
}

impl Configuration {
    /// Builds `⟨control, word ⊥⟩`.
    pub fn new(control: Control, word: &[Letter]) -> Configuration {
        let mut stack = word.to_vec();
        stack.push(Letter::Bottom);
        Configuration { control, stack }
    }

    pub fn head(&self) -> Head {
        (self.control, self.stack[0])
    }

    /// Number of letters above ⊥.
    pub fn depth(&self) -> usize {
        self.stack.len() - 1
    }

    pub fn is_well_formed(&self) -> bool {
        matches!(self.stack.split_last(), Some((Letter::Bottom, rest)) if rest.iter().all(|l| !l.is_bottom()))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PdsError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: undeclared {kind} `{name}`")]
    Undeclared {
        line: usize,
        kind: &'static str,
        name: String,
    },
    #[error("line {line}: {msg}")]
    Bottom { line: usize, msg: &'static str },
    #[error("line {line}: duplicate proposition `{name}`")]
    DuplicateProp { line: usize, name: String },
    #[error("no controls declared")]
    NoControls,
    #[error("no stack letters declared")]
    NoAlphabet,
    #[error("duplicate declaration of `{0}`")]
    DuplicateName(String),
    #[error("invalid system: {0}")]
    Invalid(String),
}

/// A validated pushdown system with a head-predicate proposition environment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushdownSystem {
    controls: Vec<String>,
    alphabet: Vec<String>,
    commands: Vec<Command>,
    props: BTreeMap<String, HeadSet>,
}

impl PushdownSystem {
    /// Validates and builds a system. Commands are sorted and deduplicated.
    pub fn new(
        controls: Vec<String>,
        alphabet: Vec<String>,
        mut commands: Vec<Command>,
        props: BTreeMap<String, HeadSet>,
    ) -> Result<PushdownSystem, PdsError> {
        if controls.is_empty() {
            return Err(PdsError::NoControls);
        }
        if alphabet.is_empty() {
            return Err(PdsError::NoAlphabet);
        }
        let mut seen = BTreeSet::new();
        for name in controls.iter() {
            if !seen.insert(name) {
                return Err(PdsError::DuplicateName(name.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for name in alphabet.iter() {
            if name == BOTTOM {
                return Err(PdsError::Invalid("`$` is reserved for the bottom marker".into()));
            }
            if !seen.insert(name) {
                return Err(PdsError::DuplicateName(name.clone()));
            }
        }
        let nc = controls.len() as u32;
        let na = alphabet.len() as u32;
        let ok_control = |c: Control| c.0 < nc;
        let ok_char = |l: Letter| matches!(l, Letter::Char(i) if i < na);
        let ok_letter = |l: Letter| l == Letter::Bottom || ok_char(l);
        for cmd in commands.iter() {
            if !ok_control(cmd.control) || !ok_control(cmd.target()) {
                return Err(PdsError::Invalid(format!("command {cmd:?} uses an unknown control")));
            }
            if cmd.letter.is_bottom() {
                return Err(PdsError::Invalid("commands may not read the bottom marker".into()));
            }
            if !ok_char(cmd.letter) || !cmd.written().into_iter().all(ok_char) {
                return Err(PdsError::Invalid(format!(
                    "command {cmd:?} uses an unknown letter or writes the bottom marker"
                )));
            }
        }
        for (name, heads) in props.iter() {
            for (c, l) in heads.iter() {
                if !ok_control(c) || !ok_letter(l) {
                    return Err(PdsError::Invalid(format!("proposition `{name}` has an unknown head")));
                }
            }
        }
        commands.sort();
        commands.dedup();
        Ok(PushdownSystem {
            controls,
            alphabet,
            commands,
            props,
        })
    }

    pub fn controls(&self) -> &[String] {
        &self.controls
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn commands(&self) -> &[Command] {
        &self.commands
    }

    pub fn props(&self) -> &BTreeMap<String, HeadSet> {
        &self.props
    }

    pub fn prop(&self, name: &str) -> Option<&HeadSet> {
        self.props.get(name)
    }

    pub fn control_ids(&self) -> impl Iterator<Item = Control> {
        (0..self.controls.len() as u32).map(Control)
    }

    /// Ordinary letters, without ⊥.
    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        (0..self.alphabet.len() as u32).map(Letter::Char)
    }

    /// The reading alphabet `alphabet ∪ {⊥}`, ⊥ last.
    pub fn letters_with_bottom(&self) -> impl Iterator<Item = Letter> {
        self.letters().chain(std::iter::once(Letter::Bottom))
    }

    /// Every head `(p, a)` with `a ∈ alphabet ∪ {⊥}`.
    pub fn heads(&self) -> impl Iterator<Item = Head> + '_ {
        self.control_ids()
            .flat_map(move |p| self.letters_with_bottom().map(move |a| (p, a)))
    }

    pub fn control_name(&self, c: Control) -> &str {
        &self.controls[c.index()]
    }

    pub fn letter_name(&self, l: Letter) -> &str {
        match l {
            Letter::Char(i) => &self.alphabet[i as usize],
            Letter::Bottom => BOTTOM,
        }
    }

    pub fn control_id(&self, name: &str) -> Option<Control> {
        self.controls.iter().position(|c| c == name).map(|i| Control(i as u32))
    }

    /// Resolves a letter name, accepting `$` for ⊥.
    pub fn letter_id(&self, name: &str) -> Option<Letter> {
        if name == BOTTOM {
            return Some(Letter::Bottom);
        }
        self.alphabet
            .iter()
            .position(|a| a == name)
            .map(|i| Letter::Char(i as u32))
    }

    pub fn is_rewrite_only(&self) -> bool {
        self.commands.iter().all(Command::is_rewrite)
    }

    /// Commands whose source head is `(p, a)`.
    pub fn commands_from(&self, p: Control, a: Letter) -> impl Iterator<Item = &Command> {
        self.commands
            .iter()
            .filter(move |c| c.control == p && c.letter == a)
    }

    /// Parses `p a b $` (control, then the stack top first, `$` last).
    pub fn parse_config(&self, text: &str) -> Result<Configuration, PdsError> {
        let mut toks = text.split_whitespace();
        let syntax = |msg: &str| PdsError::Syntax {
            line: 1,
            msg: msg.to_string(),
        };
        let control = toks.next().ok_or_else(|| syntax("empty configuration"))?;
        let control = self.control_id(control).ok_or_else(|| PdsError::Undeclared {
            line: 1,
            kind: "control",
            name: control.to_string(),
        })?;
        let mut stack = vec![];
        for t in toks {
            let l = self.letter_id(t).ok_or_else(|| PdsError::Undeclared {
                line: 1,
                kind: "letter",
                name: t.to_string(),
            })?;
            stack.push(l);
        }
        let c = Configuration { control, stack };
        if !c.is_well_formed() {
            return Err(syntax("a configuration must end with exactly one `$`"));
        }
        Ok(c)
    }

    pub fn format_config(&self, c: &Configuration) -> String {
        let mut out = self.control_name(c.control).to_string();
        for l in c.stack.iter() {
            out.push(' ');
            out.push_str(self.letter_name(*l));
        }
        out
    }

    /// One-step successors of `c`.
    pub fn step(&self, c: &Configuration) -> BTreeSet<Configuration> {
        let (p, a) = c.head();
        let rest = &c.stack[1..];
        self.commands_from(p, a)
            .map(|cmd| {
                let mut stack = cmd.written();
                stack.extend_from_slice(rest);
                Configuration {
                    control: cmd.target(),
                    stack,
                }
            })
            .collect()
    }

    /// One-step predecessors of `c`.
    pub fn pred(&self, c: &Configuration) -> BTreeSet<Configuration> {
        let mut out = BTreeSet::new();
        for cmd in self.commands.iter() {
            if cmd.target() != c.control {
                continue;
            }
            let written = cmd.written();
            if c.stack.len() > written.len() && c.stack[..written.len()] == written[..] {
                let mut stack = vec![cmd.letter];
                stack.extend_from_slice(&c.stack[written.len()..]);
                out.insert(Configuration {
                    control: cmd.control,
                    stack,
                });
            }
        }
        out
    }

    /// Every well-formed configuration with at most `max_depth` letters above ⊥,
    /// in ascending order.
    pub fn configurations(&self, max_depth: usize) -> Vec<Configuration> {
        let words = words_up_to(self.alphabet.len(), max_depth);
        let mut out: Vec<Configuration> = self
            .control_ids()
            .flat_map(|p| words.iter().map(move |w| Configuration::new(p, w)))
            .collect();
        out.sort();
        out
    }
}

/// All words over `Char(0..n)` of length at most `max_len`, shortest first.
pub fn words_up_to(n: usize, max_len: usize) -> Vec<Vec<Letter>> {
    let mut out = vec![vec![]];
    let mut frontier: Vec<Vec<Letter>> = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(frontier.len() * n);
        for w in frontier.iter() {
            for i in 0..n as u32 {
                let mut w2 = w.clone();
                w2.push(Letter::Char(i));
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

impl fmt::Display for PushdownSystem {
    /// Writes the system back in the line-based source format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "controls {}", self.controls.join(" "))?;
        writeln!(f, "alphabet {}", self.alphabet.join(" "))?;
        for cmd in self.commands.iter() {
            write!(
                f,
                "rule {} {} -> {}",
                self.control_name(cmd.control),
                self.letter_name(cmd.letter),
                self.control_name(cmd.target())
            )?;
            for l in cmd.written() {
                write!(f, " {}", self.letter_name(l))?;
            }
            writeln!(f)?;
        }
        for (name, heads) in self.props.iter() {
            let heads: Vec<String> = heads
                .iter()
                .map(|(c, l)| format!("{} {}", self.control_name(c), self.letter_name(l)))
                .collect();
            writeln!(f, "prop {name}: {}", heads.join(", "))?;
        }
        Ok(())
    }
}

/// Lookup tables for the predecessor heads of each command shape.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PreIndex {
    prepop: BTreeMap<Control, BTreeSet<Head>>,
    prerew: BTreeMap<Head, BTreeSet<Head>>,
    prepush: BTreeMap<(Control, Letter, Letter), BTreeSet<Head>>,
}

static EMPTY_HEADS: BTreeSet<Head> = BTreeSet::new();

impl PreIndex {
    pub fn new(sys: &PushdownSystem) -> PreIndex {
        let mut idx = PreIndex::default();
        for cmd in sys.commands() {
            let src = (cmd.control, cmd.letter);
            match cmd.kind {
                CommandKind::Pop { target } => {
                    idx.prepop.entry(target).or_default().insert(src);
                }
                CommandKind::Rewrite { target, top } => {
                    idx.prerew.entry((target, top)).or_default().insert(src);
                }
                CommandKind::Push { target, top, below } => {
                    idx.prepush
                        .entry((target, top, below))
                        .or_default()
                        .insert(src);
                }
            }
        }
        idx
    }

    /// Heads `(p', a')` with a command `p' a' → ε p`.
    pub fn prepop(&self, p: Control) -> &BTreeSet<Head> {
        self.prepop.get(&p).unwrap_or(&EMPTY_HEADS)
    }

    /// Heads `(p', a')` with a command `p' a' → a p`.
    pub fn prerew(&self, p: Control, a: Letter) -> &BTreeSet<Head> {
        self.prerew.get(&(p, a)).unwrap_or(&EMPTY_HEADS)
    }

    /// Heads `(p', a')` with a command `p' a' → a b p`.
    pub fn prepush(&self, p: Control, a: Letter, b: Letter) -> &BTreeSet<Head> {
        self.prepush.get(&(p, a, b)).unwrap_or(&EMPTY_HEADS)
    }

    /// `prepop(p) ∪ prerew(p, a) ∪ prepush(p, a, b)`.
    pub fn pre(&self, p: Control, a: Letter, b: Letter) -> BTreeSet<Head> {
        let mut out = self.prepop(p).clone();
        out.extend(self.prerew(p, a));
        out.extend(self.prepush(p, a, b));
        out
    }
}

/// Rewrites general rules into Pop/Rewrite/Push commands.
///
/// A rule writing `b1 … bn` with `n > 2` becomes `n − 1` pushes threaded
/// through `n − 2` fresh controls named `<source>_r<rule>_<k>` (with extra
/// underscores appended if that name is taken). Returns the
/// extended control list (declared controls first) and the commands.
pub fn normalize(
    controls: &[String],
    rules: &[GeneralRule],
) -> Result<(Vec<String>, Vec<Command>), PdsError> {
    let mut all_controls = controls.to_vec();
    let mut commands = Vec::new();
    for (ri, rule) in rules.iter().enumerate() {
        if rule.letter.is_bottom() || rule.word.iter().any(|l| l.is_bottom()) {
            return Err(PdsError::Bottom {
                line: ri + 1,
                msg: "rules may not read or write the bottom marker",
            });
        }
        let (p, a, q, w) = (rule.control, rule.letter, rule.target, &rule.word);
        let kind = match w.len() {
            0 => CommandKind::Pop { target: q },
            1 => CommandKind::Rewrite { target: q, top: w[0] },
            2 => CommandKind::Push {
                target: q,
                top: w[0],
                below: w[1],
            },
            n => {
                // p a → f1 (b_{n-1} b_n), f_k b_{n-k} → f_{k+1} (b_{n-k-1} b_{n-k}), …, → q (b1 b2)
                let base = &controls[p.index()];
                let fresh: Vec<Control> = (1..n - 1)
                    .map(|k| {
                        let mut name = format!("{base}_r{ri}_{k}");
                        while all_controls.contains(&name) {
                            name.push('_');
                        }
                        all_controls.push(name);
                        Control(all_controls.len() as u32 - 1)
                    })
                    .collect();
                let mut src = (p, a);
                for (k, &f) in fresh.iter().enumerate() {
                    let top = w[n - 2 - k];
                    commands.push(Command {
                        control: src.0,
                        letter: src.1,
                        kind: CommandKind::Push {
                            target: f,
                            top,
                            below: w[n - 1 - k],
                        },
                    });
                    src = (f, top);
                }
                commands.push(Command {
                    control: src.0,
                    letter: src.1,
                    kind: CommandKind::Push {
                        target: q,
                        top: w[0],
                        below: w[1],
                    },
                });
                continue;
            }
        };
        commands.push(Command {
            control: p,
            letter: a,
            kind,
        });
    }
    Ok((all_controls, commands))
}

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses the line-based system format.
///
/// ```text
/// controls p q
/// alphabet a b
/// rule p a -> q           # pop
/// rule q a -> p b         # rewrite
/// rule p b -> p a b       # push
/// prop x: q a
/// prop y: p b, * $        # `*` matches any control or letter
/// ```
pub fn parse_pds(text: &str) -> Result<PushdownSystem, PdsError> {
    let mut controls: Vec<String> = Vec::new();
    let mut alphabet: Vec<String> = Vec::new();
    let mut rule_lines: Vec<(usize, Vec<&str>)> = Vec::new();
    let mut prop_lines: Vec<(usize, &str, &str)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (kw, rest) = content
            .split_once(char::is_whitespace)
            .unwrap_or((content, ""));
        let rest = rest.trim();
        let syntax = |msg: String| PdsError::Syntax { line, msg };
        match kw {
            "controls" | "alphabet" => {
                let target = if kw == "controls" {
                    &mut controls
                } else {
                    &mut alphabet
                };
                for name in rest.split_whitespace() {
                    if name == BOTTOM {
                        return Err(PdsError::Bottom {
                            line,
                            msg: "`$` is the bottom marker and cannot be declared",
                        });
                    }
                    if !is_ident(name) {
                        return Err(syntax(format!("invalid identifier `{name}`")));
                    }
                    if target.iter().any(|n| n == name) {
                        return Err(syntax(format!("`{name}` declared twice")));
                    }
                    target.push(name.to_string());
                }
            }
            "rule" => {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                if toks.len() < 4 || toks[2] != "->" {
                    return Err(syntax("expected `rule <control> <letter> -> <control> <letters…>`".into()));
                }
                rule_lines.push((line, toks));
            }
            "prop" => {
                let (name, heads) = rest
                    .split_once(':')
                    .ok_or_else(|| syntax("expected `prop <name>: <control> <letter>`".into()))?;
                prop_lines.push((line, name.trim(), heads.trim()));
            }
            other => return Err(syntax(format!("unknown directive `{other}`"))),
        }
    }
    if controls.is_empty() {
        return Err(PdsError::NoControls);
    }
    if alphabet.is_empty() {
        return Err(PdsError::NoAlphabet);
    }

    let control = |line: usize, name: &str| {
        controls
            .iter()
            .position(|c| c == name)
            .map(|i| Control(i as u32))
            .ok_or_else(|| PdsError::Undeclared {
                line,
                kind: "control",
                name: name.to_string(),
            })
    };
    let letter = |line: usize, name: &str| {
        if name == BOTTOM {
            return Ok(Letter::Bottom);
        }
        alphabet
            .iter()
            .position(|a| a == name)
            .map(|i| Letter::Char(i as u32))
            .ok_or_else(|| PdsError::Undeclared {
                line,
                kind: "letter",
                name: name.to_string(),
            })
    };

    let mut rules = Vec::new();
    for (line, toks) in rule_lines.iter() {
        let line = *line;
        let src = control(line, toks[0])?;
        let read = letter(line, toks[1])?;
        let dst = control(line, toks[3])?;
        let word = toks[4..]
            .iter()
            .map(|t| letter(line, t))
            .collect::<Result<Vec<_>, _>>()?;
        if read.is_bottom() {
            let msg = match word.len() {
                0 => "bottom cannot be popped",
                _ => "bottom cannot be rewritten",
            };
            return Err(PdsError::Bottom { line, msg });
        }
        if word.iter().any(|l| l.is_bottom()) {
            let msg = if word.len() == 1 {
                "cannot rewrite to bottom"
            } else {
                "bottom cannot be pushed"
            };
            return Err(PdsError::Bottom { line, msg });
        }
        rules.push(GeneralRule {
            control: src,
            letter: read,
            target: dst,
            word,
        });
    }
    let (all_controls, commands) = normalize(&controls, &rules)?;

    let mut props: BTreeMap<String, HeadSet> = BTreeMap::new();
    for (line, name, heads) in prop_lines {
        let valid_name = name.starts_with(|c: char| c.is_ascii_lowercase())
            && is_ident(name)
            && !matches!(name, "mu" | "nu" | "tt" | "ff");
        if !valid_name {
            return Err(PdsError::Syntax {
                line,
                msg: format!("invalid proposition name `{name}`"),
            });
        }
        if props.contains_key(name) {
            return Err(PdsError::DuplicateProp {
                line,
                name: name.to_string(),
            });
        }
        let mut set = BTreeSet::new();
        for pat in heads.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let parts: Vec<&str> = pat.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(PdsError::Syntax {
                    line,
                    msg: format!("expected `<control> <letter>` in `{pat}`"),
                });
            }
            let cs: Vec<Control> = if parts[0] == "*" {
                (0..controls.len() as u32).map(Control).collect()
            } else {
                vec![control(line, parts[0])?]
            };
            let ls: Vec<Letter> = if parts[1] == "*" {
                (0..alphabet.len() as u32)
                    .map(Letter::Char)
                    .chain(std::iter::once(Letter::Bottom))
                    .collect()
            } else {
                vec![letter(line, parts[1])?]
            };
            for &c in cs.iter() {
                for &l in ls.iter() {
                    set.insert((c, l));
                }
            }
        }
        props.insert(name.to_string(), HeadSet(set));
    }
    PushdownSystem::new(all_controls, alphabet, commands, props)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub const P1: &str = "\
controls p q
alphabet a b            # '$' denotes the bottom marker in configs/props
rule p a -> q           # pop
rule q a -> p b         # rewrite
rule p b -> p a b       # push (new top 'a', then 'b')
prop x: q a
prop y: p b
";

    pub fn p1() -> PushdownSystem {
        parse_pds(P1).unwrap()
    }

    fn cfg(sys: &PushdownSystem, s: &str) -> Configuration {
        sys.parse_config(s).unwrap()
    }

    fn cfgs(sys: &PushdownSystem, xs: &[&str]) -> BTreeSet<Configuration> {
        xs.iter().map(|s| cfg(sys, s)).collect()
    }

    #[test]
    fn parses_p1() {
        let sys = p1();
        assert_eq!(sys.controls().len(), 2);
        assert_eq!(sys.alphabet().len(), 2);
        assert_eq!(sys.commands().len(), 3);
        assert_eq!(sys.props().len(), 2);
        let x = sys.prop("x").unwrap();
        assert_eq!(x.len(), 1);
        assert!(x.contains((Control(1), Letter::Char(0))));
    }

    #[test]
    fn display_reparses() {
        let sys = p1();
        assert_eq!(parse_pds(&sys.to_string()).unwrap(), sys);
    }

    #[test]
    fn rejects_popping_bottom() {
        let err = parse_pds("controls p q\nalphabet a\nrule p $ -> q\n").unwrap_err();
        assert_eq!(
            err,
            PdsError::Bottom {
                line: 3,
                msg: "bottom cannot be popped"
            }
        );
        assert!(err.to_string().contains("bottom cannot be popped"));
    }

    #[test]
    fn rejects_other_bottom_misuse() {
        for rule in ["rule p $ -> q a", "rule p a -> q $", "rule p a -> q a $"] {
            let text = format!("controls p q\nalphabet a\n{rule}\n");
            assert!(matches!(parse_pds(&text), Err(PdsError::Bottom { line: 3, .. })), "{rule}");
        }
    }

    #[test]
    fn rejects_empty_document() {
        let err = parse_pds("").unwrap_err();
        assert_eq!(err, PdsError::NoControls);
        assert_eq!(err.to_string(), "no controls declared");
        assert_eq!(parse_pds("# only a comment\n\n").unwrap_err(), PdsError::NoControls);
    }

    #[test]
    fn rejects_undeclared_and_duplicates() {
        let err = parse_pds("controls p\nalphabet a\nrule p a -> r\n").unwrap_err();
        assert!(matches!(err, PdsError::Undeclared { line: 3, kind: "control", .. }));
        let err = parse_pds("controls p\nalphabet a\nrule p c -> p\n").unwrap_err();
        assert!(matches!(err, PdsError::Undeclared { line: 3, kind: "letter", .. }));
        let err = parse_pds("controls p\nalphabet a\nprop x: p a\nprop x: p $\n").unwrap_err();
        assert_eq!(
            err,
            PdsError::DuplicateProp {
                line: 4,
                name: "x".into()
            }
        );
        let err = parse_pds("controls p\nalphabet a\nfoo\n").unwrap_err();
        assert!(matches!(err, PdsError::Syntax { line: 3, .. }));
    }

    #[test]
    fn wildcard_props() {
        let sys = parse_pds("controls p q\nalphabet a b\nprop x: * a\nprop y: p *, q $\n").unwrap();
        assert_eq!(sys.prop("x").unwrap().len(), 2);
        assert_eq!(sys.prop("y").unwrap().len(), 4);
    }

    #[test]
    fn pre_index_on_p1() {
        let sys = p1();
        let idx = PreIndex::new(&sys);
        let (p, q) = (Control(0), Control(1));
        let (a, b) = (Letter::Char(0), Letter::Char(1));
        assert_eq!(idx.prepop(q), &BTreeSet::from([(p, a)]));
        assert!(idx.prepop(p).is_empty());
        assert_eq!(idx.prerew(p, b), &BTreeSet::from([(q, a)]));
        assert_eq!(idx.prepush(p, a, b), &BTreeSet::from([(p, b)]));
        assert!(idx.prepush(p, a, Letter::Bottom).is_empty());
        assert_eq!(idx.pre(q, b, a), BTreeSet::from([(p, a)]));
    }

    #[test]
    fn step_on_p1() {
        let sys = p1();
        assert_eq!(sys.step(&cfg(&sys, "p a b $")), cfgs(&sys, &["q b $"]));
        assert_eq!(sys.step(&cfg(&sys, "p b $")), cfgs(&sys, &["p a b $"]));
        assert!(sys.step(&cfg(&sys, "q b $")).is_empty());
        assert!(sys.step(&cfg(&sys, "p $")).is_empty());
    }

    #[test]
    fn pred_on_p1() {
        let sys = p1();
        assert_eq!(sys.pred(&cfg(&sys, "q b $")), cfgs(&sys, &["p a b $"]));
        assert!(sys.pred(&cfg(&sys, "p a $")).is_empty());
        assert_eq!(sys.pred(&cfg(&sys, "p a b $")), cfgs(&sys, &["p b $"]));
        // pop-predecessors grow the stack: ⟨q, $⟩ ← ⟨p, a $⟩
        assert_eq!(sys.pred(&cfg(&sys, "q $")), cfgs(&sys, &["p a $"]));
    }

    #[test]
    fn config_parsing() {
        let sys = p1();
        let c = cfg(&sys, "p a b $");
        assert_eq!(c.depth(), 2);
        assert_eq!(sys.format_config(&c), "p a b $");
        assert!(sys.parse_config("p a b").is_err());
        assert!(sys.parse_config("p $ a $").is_err());
        assert!(sys.parse_config("r $").is_err());
        assert!(sys.parse_config("").is_err());
    }

    #[test]
    fn configurations_count() {
        let sys = p1();
        // 2 controls × (1 + 2 + 4) words
        assert_eq!(sys.configurations(2).len(), 14);
        assert_eq!(sys.configurations(1).len(), 6);
    }

    #[test]
    fn normalize_short_words() {
        let (p, q) = (Control(0), Control(1));
        let (a, b) = (Letter::Char(0), Letter::Char(1));
        let names = vec!["p".to_string(), "q".to_string()];
        let rule = |word: Vec<Letter>| GeneralRule {
            control: p,
            letter: a,
            target: q,
            word,
        };
        let (cs, cmds) = normalize(&names, &[rule(vec![])]).unwrap();
        assert_eq!(cs, names);
        assert_eq!(cmds[0].kind, CommandKind::Pop { target: q });
        let (_, cmds) = normalize(&names, &[rule(vec![b])]).unwrap();
        assert_eq!(cmds[0].kind, CommandKind::Rewrite { target: q, top: b });
        assert!(normalize(&names, &[rule(vec![Letter::Bottom])]).is_err());
    }

    #[test]
    fn normalize_long_word() {
        let sys = parse_pds("controls p q\nalphabet a b c d\nrule p a -> q b c d\n").unwrap();
        assert_eq!(sys.commands().len(), 2);
        assert_eq!(sys.controls().len(), 3);
        assert_eq!(sys.controls()[2], "p_r0_1");
        let mut c = sys.parse_config("p a $").unwrap();
        c = sys.step(&c).into_iter().next().unwrap();
        c = sys.step(&c).into_iter().next().unwrap();
        assert_eq!(sys.format_config(&c), "q b c d $");
        assert_eq!(parse_pds(&sys.to_string()).unwrap(), sys);

        let taken = parse_pds("controls p q p_r0_1\nalphabet a\nrule p a -> q a a a\n").unwrap();
        assert_eq!(taken.controls()[3], "p_r0_1_");
    }
}
