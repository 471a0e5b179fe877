//! Positive-form modal μ-calculus with forwards and backwards modalities.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(String),
    NegAtom(String),
    Var(String),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    /// All successors.
    Box(Box<Formula>),
    /// Some successor.
    Diamond(Box<Formula>),
    /// All predecessors.
    BackBox(Box<Formula>),
    /// Some predecessor.
    BackDiamond(Box<Formula>),
    Mu(String, Box<Formula>),
    Nu(String, Box<Formula>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Fixpoint {
    Least,
    Greatest,
}

impl Formula {
    pub fn atom(x: &str) -> Formula {
        Formula::Atom(x.to_string())
    }
    pub fn neg_atom(x: &str) -> Formula {
        Formula::NegAtom(x.to_string())
    }
    pub fn var(z: &str) -> Formula {
        Formula::Var(z.to_string())
    }
    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }
    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }
    pub fn boxed(f: Formula) -> Formula {
        Formula::Box(Box::new(f))
    }
    pub fn diamond(f: Formula) -> Formula {
        Formula::Diamond(Box::new(f))
    }
    pub fn back_box(f: Formula) -> Formula {
        Formula::BackBox(Box::new(f))
    }
    pub fn back_diamond(f: Formula) -> Formula {
        Formula::BackDiamond(Box::new(f))
    }
    pub fn mu(z: &str, f: Formula) -> Formula {
        Formula::Mu(z.to_string(), Box::new(f))
    }
    pub fn nu(z: &str, f: Formula) -> Formula {
        Formula::Nu(z.to_string(), Box::new(f))
    }

    pub fn children(&self) -> Vec<&Formula> {
        use Formula::*;
        match self {
            Atom(_) | NegAtom(_) | Var(_) => vec![],
            And(l, r) | Or(l, r) => vec![l, r],
            Box(f) | Diamond(f) | BackBox(f) | BackDiamond(f) | Mu(_, f) | Nu(_, f) => vec![f],
        }
    }

    pub fn binder(&self) -> Option<(Fixpoint, &str, &Formula)> {
        match self {
            Formula::Mu(z, f) => Some((Fixpoint::Least, z, f)),
            Formula::Nu(z, f) => Some((Fixpoint::Greatest, z, f)),
            _ => None,
        }
    }

    pub fn is_back_modal(&self) -> bool {
        matches!(self, Formula::BackBox(_) | Formula::BackDiamond(_))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        fn go(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match f {
                Formula::Var(z) => {
                    if !bound.contains(z) {
                        out.insert(z.clone());
                    }
                }
                Formula::Mu(z, body) | Formula::Nu(z, body) => {
                    bound.push(z.clone());
                    go(body, bound, out);
                    bound.pop();
                }
                other => {
                    for c in other.children() {
                        go(c, bound, out);
                    }
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut vec![], &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            match f {
                Formula::Atom(x) | Formula::NegAtom(x) => {
                    out.insert(x.clone());
                }
                other => stack.extend(other.children()),
            }
        }
        out
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Formula::size).sum::<usize>()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("negation only on atoms (offset {pos})")]
    NegationOnNonAtom { pos: usize },
    #[error("unbound variable `{0}`")]
    Unbound(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Mu,
    Nu,
    Tt,
    Ff,
    Dot,
    Or,
    And,
    Diamond,
    Box,
    BackDiamond,
    BackBox,
    Not,
    LParen,
    RParen,
    Atom(String),
    Var(String),
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, FormulaError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let rest = &text[i..];
        let fixed: &[(&str, Tok)] = &[
            ("~<>", Tok::BackDiamond),
            ("~[]", Tok::BackBox),
            ("<>", Tok::Diamond),
            ("[]", Tok::Box),
            ("\\/", Tok::Or),
            ("/\\", Tok::And),
            ("!", Tok::Not),
            (".", Tok::Dot),
            ("(", Tok::LParen),
            (")", Tok::RParen),
        ];
        if let Some((s, t)) = fixed.iter().find(|(s, _)| rest.starts_with(s)) {
            out.push((i, t.clone()));
            i += s.len();
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let len = rest
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .unwrap_or(rest.len());
            let word = &rest[..len];
            let tok = match word {
                "mu" => Tok::Mu,
                "nu" => Tok::Nu,
                "tt" => Tok::Tt,
                "ff" => Tok::Ff,
                w if w.starts_with(|ch: char| ch.is_ascii_uppercase()) => Tok::Var(w.to_string()),
                w if w.starts_with(|ch: char| ch.is_ascii_lowercase()) => Tok::Atom(w.to_string()),
                w => {
                    return Err(FormulaError::Syntax {
                        pos: i,
                        msg: format!("identifier `{w}` must start with a letter"),
                    })
                }
            };
            out.push((i, tok));
            i += len;
            continue;
        }
        return Err(FormulaError::Syntax {
            pos: i,
            msg: format!("unexpected character `{}`", rest.chars().next().unwrap()),
        });
    }
    Ok(out)
}

/// Parse tree before binder renaming; `tt`/`ff` stay symbolic until then.
enum Raw {
    F(Formula),
    Const(Fixpoint),
    And(Box<Raw>, Box<Raw>),
    Or(Box<Raw>, Box<Raw>),
    Modal(fn(Formula) -> Formula, Box<Raw>),
    Bind(Fixpoint, String, Box<Raw>),
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: &str) -> Result<T, FormulaError> {
        Err(FormulaError::Syntax {
            pos: self.offset(),
            msg: msg.to_string(),
        })
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn formula(&mut self) -> Result<Raw, FormulaError> {
        let kind = match self.peek() {
            Some(Tok::Mu) => Fixpoint::Least,
            Some(Tok::Nu) => Fixpoint::Greatest,
            _ => return self.disj(),
        };
        self.bump();
        let var = match self.bump() {
            Some(Tok::Var(z)) => z,
            _ => {
                self.pos -= 1;
                return self.err("expected an uppercase variable after the binder");
            }
        };
        if self.bump() != Some(Tok::Dot) {
            self.pos -= 1;
            return self.err("expected `.` after the bound variable");
        }
        let body = self.formula()?;
        Ok(Raw::Bind(kind, var, Box::new(body)))
    }

    fn disj(&mut self) -> Result<Raw, FormulaError> {
        let mut lhs = self.conj()?;
        while self.peek() == Some(&Tok::Or) {
            self.bump();
            let rhs = self.conj()?;
            lhs = Raw::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> Result<Raw, FormulaError> {
        let mut lhs = self.prefix()?;
        while self.peek() == Some(&Tok::And) {
            self.bump();
            let rhs = self.prefix()?;
            lhs = Raw::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Raw, FormulaError> {
        let start = self.offset();
        let modal: fn(Formula) -> Formula = match self.bump() {
            Some(Tok::Diamond) => Formula::diamond,
            Some(Tok::Box) => Formula::boxed,
            Some(Tok::BackDiamond) => Formula::back_diamond,
            Some(Tok::BackBox) => Formula::back_box,
            Some(Tok::Not) => {
                return match self.bump() {
                    Some(Tok::Atom(x)) => Ok(Raw::F(Formula::NegAtom(x))),
                    None => {
                        self.pos -= 1;
                        self.err("expected an atom after `!`")
                    }
                    _ => Err(FormulaError::NegationOnNonAtom { pos: start }),
                }
            }
            Some(Tok::Atom(x)) => return Ok(Raw::F(Formula::Atom(x))),
            Some(Tok::Var(z)) => return Ok(Raw::F(Formula::Var(z))),
            Some(Tok::Tt) => return Ok(Raw::Const(Fixpoint::Greatest)),
            Some(Tok::Ff) => return Ok(Raw::Const(Fixpoint::Least)),
            Some(Tok::LParen) => {
                let inner = self.formula()?;
                if self.bump() != Some(Tok::RParen) {
                    self.pos -= 1;
                    return self.err("expected `)`");
                }
                return Ok(inner);
            }
            Some(Tok::Mu) | Some(Tok::Nu) => {
                self.pos -= 1;
                return self.err("a binder inside an operand needs parentheses");
            }
            _ => {
                self.pos -= 1;
                return self.err("expected a formula");
            }
        };
        let arg = self.prefix()?;
        Ok(Raw::Modal(modal, Box::new(arg)))
    }
}

/// Gives every binder (including the ones introduced for `tt`/`ff`) a name
/// not used by any other binder or free variable.
struct Renamer {
    used: BTreeSet<String>,
}

impl Renamer {
    fn fresh(&mut self, base: &str) -> String {
        if self.used.insert(base.to_string()) {
            return base.to_string();
        }
        (1..)
            .map(|i| format!("{base}{i}"))
            .find(|n| self.used.insert(n.clone()))
            .unwrap()
    }

    fn go(&mut self, raw: Raw, env: &mut Vec<(String, String)>) -> Formula {
        match raw {
            Raw::F(Formula::Var(z)) => {
                let renamed = env.iter().rev().find(|(o, _)| *o == z).map(|(_, n)| n.clone());
                Formula::Var(renamed.unwrap_or(z))
            }
            Raw::F(f) => f,
            Raw::Const(kind) => {
                let z = match kind {
                    Fixpoint::Greatest => self.fresh("Tt"),
                    Fixpoint::Least => self.fresh("Ff"),
                };
                let body = std::boxed::Box::new(Formula::Var(z.clone()));
                match kind {
                    Fixpoint::Greatest => Formula::Nu(z, body),
                    Fixpoint::Least => Formula::Mu(z, body),
                }
            }
            Raw::And(l, r) => {
                let l = self.go(*l, env);
                Formula::and(l, self.go(*r, env))
            }
            Raw::Or(l, r) => {
                let l = self.go(*l, env);
                Formula::or(l, self.go(*r, env))
            }
            Raw::Modal(ctor, f) => ctor(self.go(*f, env)),
            Raw::Bind(kind, z, body) => {
                let n = self.fresh(&z);
                env.push((z, n.clone()));
                let body = std::boxed::Box::new(self.go(*body, env));
                env.pop();
                match kind {
                    Fixpoint::Least => Formula::Mu(n, body),
                    Fixpoint::Greatest => Formula::Nu(n, body),
                }
            }
        }
    }
}

fn raw_free_vars(raw: &Raw, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match raw {
        Raw::F(f) => {
            for z in f.free_vars() {
                if !bound.contains(&z) {
                    out.insert(z);
                }
            }
        }
        Raw::Const(_) => {}
        Raw::And(l, r) | Raw::Or(l, r) => {
            raw_free_vars(l, bound, out);
            raw_free_vars(r, bound, out);
        }
        Raw::Modal(_, f) => raw_free_vars(f, bound, out),
        Raw::Bind(_, z, f) => {
            bound.push(z.clone());
            raw_free_vars(f, bound, out);
            bound.pop();
        }
    }
}

/// Parses the ASCII grammar and alpha-normalizes binder names. Free
/// variables are allowed; see [`parse_closed`].
///
/// ```text
/// formula := ('mu'|'nu') VAR '.' formula | disj
/// disj    := conj ( '\/' conj )*
/// conj    := prefix ( '/\' prefix )*
/// prefix  := '<>' prefix | '[]' prefix | '~<>' prefix | '~[]' prefix
///          | '!' ATOM | ATOM | VAR | 'tt' | 'ff' | '(' formula ')'
/// ```
pub fn parse_formula(text: &str) -> Result<Formula, FormulaError> {
    let toks = lex(text)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let raw = parser.formula()?;
    if parser.pos < parser.toks.len() {
        return parser.err("unexpected trailing input");
    }
    let mut free = BTreeSet::new();
    raw_free_vars(&raw, &mut vec![], &mut free);
    let mut renamer = Renamer { used: free };
    Ok(renamer.go(raw, &mut vec![]))
}

/// Like [`parse_formula`] but rejects free variables.
pub fn parse_closed(text: &str) -> Result<Formula, FormulaError> {
    let f = parse_formula(text)?;
    match f.free_vars().into_iter().next() {
        Some(z) => Err(FormulaError::Unbound(z)),
        None => Ok(f),
    }
}

/// Renames binders apart so that every binder variable is distinct and none
/// clashes with a free variable. Parsed formulas are already in this form.
pub fn alpha_normalize(phi: &Formula) -> Formula {
    fn to_raw(f: &Formula) -> Raw {
        use Formula::*;
        match f {
            Atom(_) | NegAtom(_) | Var(_) => Raw::F(f.clone()),
            And(l, r) => Raw::And(std::boxed::Box::new(to_raw(l)), std::boxed::Box::new(to_raw(r))),
            Or(l, r) => Raw::Or(std::boxed::Box::new(to_raw(l)), std::boxed::Box::new(to_raw(r))),
            Box(g) => Raw::Modal(Formula::boxed, std::boxed::Box::new(to_raw(g))),
            Diamond(g) => Raw::Modal(Formula::diamond, std::boxed::Box::new(to_raw(g))),
            BackBox(g) => Raw::Modal(Formula::back_box, std::boxed::Box::new(to_raw(g))),
            BackDiamond(g) => Raw::Modal(Formula::back_diamond, std::boxed::Box::new(to_raw(g))),
            Mu(z, g) => Raw::Bind(Fixpoint::Least, z.clone(), std::boxed::Box::new(to_raw(g))),
            Nu(z, g) => Raw::Bind(Fixpoint::Greatest, z.clone(), std::boxed::Box::new(to_raw(g))),
        }
    }
    let mut renamer = Renamer { used: phi.free_vars() };
    renamer.go(to_raw(phi), &mut vec![])
}

impl std::str::FromStr for Formula {
    type Err = FormulaError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // 0: binder allowed, 1: disjunction, 2: conjunction, 3: prefix operand
        fn go(phi: &Formula, prec: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
            use Formula::*;
            match phi {
                Atom(x) => write!(out, "{x}"),
                NegAtom(x) => write!(out, "!{x}"),
                Var(z) => write!(out, "{z}"),
                Or(l, r) => {
                    if prec > 1 {
                        write!(out, "(")?;
                    }
                    go(l, 1, out)?;
                    write!(out, " \\/ ")?;
                    go(r, 2, out)?;
                    if prec > 1 {
                        write!(out, ")")?;
                    }
                    Ok(())
                }
                And(l, r) => {
                    if prec > 2 {
                        write!(out, "(")?;
                    }
                    go(l, 2, out)?;
                    write!(out, " /\\ ")?;
                    go(r, 3, out)?;
                    if prec > 2 {
                        write!(out, ")")?;
                    }
                    Ok(())
                }
                Box(g) => {
                    write!(out, "[]")?;
                    go(g, 3, out)
                }
                Diamond(g) => {
                    write!(out, "<>")?;
                    go(g, 3, out)
                }
                BackBox(g) => {
                    write!(out, "~[]")?;
                    go(g, 3, out)
                }
                BackDiamond(g) => {
                    write!(out, "~<>")?;
                    go(g, 3, out)
                }
                Mu(z, g) | Nu(z, g) => {
                    let kw = if matches!(phi, Mu(..)) { "mu" } else { "nu" };
                    if prec > 0 {
                        write!(out, "(")?;
                    }
                    write!(out, "{kw} {z}. ")?;
                    go(g, 0, out)?;
                    if prec > 0 {
                        write!(out, ")")?;
                    }
                    Ok(())
                }
            }
        }
        go(self, 0, f)
    }
}

/// Structural measures of a formula.
///
/// Variables are represented by their binders, so `Var` nodes are not listed
/// among the subformulas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaInfo {
    /// Distinct non-variable subformulas in preorder of first occurrence.
    pub subformulas: Vec<Formula>,
    /// Maximal fixpoint nesting depth.
    pub depth: usize,
    pub free_vars: BTreeSet<String>,
    pub atoms: BTreeSet<String>,
}

impl FormulaInfo {
    pub fn index_of(&self, f: &Formula) -> Option<usize> {
        self.subformulas.iter().position(|g| g == f)
    }
}

pub fn analyze(phi: &Formula) -> FormulaInfo {
    fn collect(f: &Formula, seen: &mut HashMap<Formula, ()>, out: &mut Vec<Formula>) {
        if !matches!(f, Formula::Var(_)) && seen.insert(f.clone(), ()).is_none() {
            out.push(f.clone());
        }
        for c in f.children() {
            collect(c, seen, out);
        }
    }
    let mut subformulas = Vec::new();
    collect(phi, &mut HashMap::new(), &mut subformulas);
    FormulaInfo {
        subformulas,
        depth: nesting_depth(phi),
        free_vars: phi.free_vars(),
        atoms: phi.atoms(),
    }
}

/// Maximal number of binders on any root-to-leaf path.
pub fn nesting_depth(phi: &Formula) -> usize {
    let inner = phi
        .children()
        .into_iter()
        .map(nesting_depth)
        .max()
        .unwrap_or(0);
    inner + usize::from(phi.binder().is_some())
}

/// Positive-form dual of a closed formula.
pub fn negate(phi: &Formula) -> Result<Formula, FormulaError> {
    if let Some(z) = phi.free_vars().into_iter().next() {
        return Err(FormulaError::Unbound(z));
    }
    Ok(dual(phi))
}

fn dual(phi: &Formula) -> Formula {
    use Formula::*;
    match phi {
        Atom(x) => NegAtom(x.clone()),
        NegAtom(x) => Atom(x.clone()),
        Var(z) => Var(z.clone()),
        And(l, r) => Formula::or(dual(l), dual(r)),
        Or(l, r) => Formula::and(dual(l), dual(r)),
        Box(f) => Formula::diamond(dual(f)),
        Diamond(f) => Formula::boxed(dual(f)),
        BackBox(f) => Formula::back_diamond(dual(f)),
        BackDiamond(f) => Formula::back_box(dual(f)),
        Mu(z, f) => Nu(z.clone(), std::boxed::Box::new(dual(f))),
        Nu(z, f) => Mu(z.clone(), std::boxed::Box::new(dual(f))),
    }
}

/// Counts of `(mu, nu)` binders.
pub fn binder_counts(phi: &Formula) -> (usize, usize) {
    let mut counts = (0, 0);
    let mut stack = vec![phi];
    while let Some(f) = stack.pop() {
        match f {
            Formula::Mu(..) => counts.0 += 1,
            Formula::Nu(..) => counts.1 += 1,
            _ => {}
        }
        stack.extend(f.children());
    }
    counts
}

/// Binder variable → (kind, body) for every binder in the formula.
pub fn binders(phi: &Formula) -> BTreeMap<String, (Fixpoint, Formula)> {
    let mut out = BTreeMap::new();
    let mut stack = vec![phi];
    while let Some(f) = stack.pop() {
        if let Some((kind, z, body)) = f.binder() {
            out.insert(z.to_string(), (kind, body.clone()));
        }
        stack.extend(f.children());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn parses_backwards_least_fixpoint() {
        let expected = Formula::mu("Z", Formula::or(Formula::atom("x"), Formula::back_diamond(Formula::var("Z"))));
        assert_eq!(p("mu Z. x \\/ ~<>Z"), expected);
    }

    #[test]
    fn parses_backwards_greatest_fixpoint() {
        let expected = Formula::nu("Z", Formula::and(Formula::atom("x"), Formula::back_box(Formula::var("Z"))));
        assert_eq!(p("nu Z. x /\\ ~[]Z"), expected);
    }

    #[test]
    fn negation_only_on_atoms() {
        let err = parse_formula("!(x \\/ y)").unwrap_err();
        assert_eq!(err, FormulaError::NegationOnNonAtom { pos: 0 });
        assert_eq!(err.to_string(), "negation only on atoms (offset 0)");
        assert!(matches!(parse_formula("!Z"), Err(FormulaError::NegationOnNonAtom { .. })));
        assert!(matches!(parse_formula("!<>x"), Err(FormulaError::NegationOnNonAtom { .. })));
    }

    #[test]
    fn syntax_errors() {
        for bad in ["", "x \\/", "mu z. x", "mu Z x", "(x", "x y", "x & y", "<> mu Z. Z"] {
            assert!(matches!(parse_formula(bad), Err(FormulaError::Syntax { .. })), "{bad}");
        }
    }

    #[test]
    fn precedence() {
        assert_eq!(p("x \\/ y /\\ z"), Formula::or(Formula::atom("x"), Formula::and(Formula::atom("y"), Formula::atom("z"))));
        assert_eq!(p("<>x /\\ y"), Formula::and(Formula::diamond(Formula::atom("x")), Formula::atom("y")));
        assert_eq!(
            p("mu Z. x \\/ Z /\\ y"),
            Formula::mu("Z", Formula::or(Formula::atom("x"), Formula::and(Formula::var("Z"), Formula::atom("y"))))
        );
    }

    #[test]
    fn constants_desugar() {
        assert_eq!(p("tt"), Formula::nu("Tt", Formula::var("Tt")));
        assert_eq!(p("ff"), Formula::mu("Ff", Formula::var("Ff")));
        assert_eq!(p("tt /\\ tt"), Formula::and(Formula::nu("Tt", Formula::var("Tt")), Formula::nu("Tt1", Formula::var("Tt1"))));
    }

    #[test]
    fn alpha_normalizes_binders() {
        let f = p("(mu Z. <>Z) /\\ (nu Z. []Z \\/ (mu Z. Z))");
        let names: Vec<String> = binders(&f).into_keys().collect();
        assert_eq!(names, vec!["Z", "Z1", "Z2"]);
        // a free variable keeps its name and is never captured
        let f = p("Z /\\ (mu Z. Z)");
        assert_eq!(f, Formula::and(Formula::var("Z"), Formula::mu("Z1", Formula::var("Z1"))));
        let built = Formula::and(Formula::var("Z"), Formula::mu("Z", Formula::var("Z")));
        assert_eq!(alpha_normalize(&built), f);
        let twice = Formula::or(Formula::mu("Y", Formula::var("Y")), Formula::mu("Y", Formula::var("Y")));
        assert_eq!(binders(&alpha_normalize(&twice)).len(), 2);
    }

    #[test]
    fn closed_parse() {
        assert_eq!(parse_closed("x /\\ Y"), Err(FormulaError::Unbound("Y".into())));
        assert!(parse_closed("mu Y. x /\\ Y").is_ok());
    }

    #[test]
    fn analyze_examples() {
        let info = analyze(&p("mu Z. x \\/ ~<>Z"));
        assert_eq!(info.depth, 1);
        assert_eq!(info.subformulas.len(), 4);
        assert!(info.free_vars.is_empty());
        assert_eq!(analyze(&p("x /\\ y")).depth, 0);
        assert_eq!(analyze(&p("nu Y. (mu Z. x \\/ <>Z) /\\ []Y")).depth, 2);
        let info = analyze(&p("<>x /\\ <>x"));
        assert_eq!(info.subformulas.len(), 3);
        assert_eq!(info.atoms, BTreeSet::from(["x".to_string()]));
    }

    #[test]
    fn negate_examples() {
        assert_eq!(negate(&p("mu Z. x \\/ <>Z")).unwrap(), p("nu Z. !x /\\ []Z"));
        assert_eq!(negate(&p("!x")).unwrap(), p("x"));
        assert_eq!(negate(&p("tt")).unwrap(), p("mu Tt. Tt"));
        assert_eq!(negate(&p("x /\\ Z")), Err(FormulaError::Unbound("Z".into())));
    }

    /// Closed formulas built from a small operator pool.
    pub(crate) fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            prop::sample::select(vec!["x", "y", "z"]).prop_map(Formula::atom),
            prop::sample::select(vec!["x", "y", "z"]).prop_map(Formula::neg_atom),
        ];
        let tree = leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::and(l, r)),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::or(l, r)),
                inner.clone().prop_map(Formula::boxed),
                inner.clone().prop_map(Formula::diamond),
                inner.clone().prop_map(Formula::back_box),
                inner.clone().prop_map(Formula::back_diamond),
                (inner.clone(), any::<bool>()).prop_map(|(f, least)| bind(f, least)),
            ]
        });
        tree.prop_map(|f| parse_formula(&f.to_string()).unwrap())
    }

    /// Wraps `f` in a binder and replaces one atom occurrence by the variable.
    fn bind(f: Formula, least: bool) -> Formula {
        fn subst_first(f: Formula, z: &str, done: &mut bool) -> Formula {
            use Formula::*;
            if *done {
                return f;
            }
            match f {
                Atom(_) => {
                    *done = true;
                    Var(z.to_string())
                }
                And(l, r) => {
                    let l = subst_first(*l, z, done);
                    Formula::and(l, subst_first(*r, z, done))
                }
                Or(l, r) => {
                    let l = subst_first(*l, z, done);
                    Formula::or(l, subst_first(*r, z, done))
                }
                Box(g) => Formula::boxed(subst_first(*g, z, done)),
                Diamond(g) => Formula::diamond(subst_first(*g, z, done)),
                BackBox(g) => Formula::back_box(subst_first(*g, z, done)),
                BackDiamond(g) => Formula::back_diamond(subst_first(*g, z, done)),
                other => other,
            }
        }
        let body = subst_first(f, "Z", &mut false);
        if least {
            Formula::mu("Z", body)
        } else {
            Formula::nu("Z", body)
        }
    }

    fn reference_depth(f: &Formula) -> usize {
        match f {
            Formula::Mu(_, g) | Formula::Nu(_, g) => 1 + reference_depth(g),
            Formula::And(l, r) | Formula::Or(l, r) => reference_depth(l).max(reference_depth(r)),
            Formula::Box(g) | Formula::Diamond(g) | Formula::BackBox(g) | Formula::BackDiamond(g) => reference_depth(g),
            _ => 0,
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn print_parse_round_trip(f in arb_formula()) {
            prop_assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
        }

        #[test]
        fn negate_is_an_involution(f in arb_formula()) {
            let n = negate(&f).unwrap();
            prop_assert_eq!(negate(&n).unwrap(), f.clone());
            let (mu, nu) = binder_counts(&f);
            prop_assert_eq!(binder_counts(&n), (nu, mu));
        }

        #[test]
        fn depth_matches_reference(f in arb_formula()) {
            prop_assert_eq!(analyze(&f).depth, reference_depth(&f));
        }

        #[test]
        fn subformulas_are_distinct(f in arb_formula()) {
            let info = analyze(&f);
            let set: BTreeSet<_> = info.subformulas.iter().collect();
            prop_assert_eq!(set.len(), info.subformulas.len());
            prop_assert_eq!(info.depth == 0, binder_counts(&f) == (0, 0));
        }
    }
}
