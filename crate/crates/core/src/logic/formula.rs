use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use super::vocab::{RelId, SortId, Vocabulary};
use crate::error::{Error, Result};

/// Which component of a pair or triple a symbol belongs to. Single-structure
/// formulas only use [`Side::Left`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: String,
    pub sort: SortId,
    pub side: Side,
}

impl Var {
    pub fn new(name: impl Into<String>, sort: SortId) -> Self {
        Var {
            name: name.into(),
            sort,
            side: Side::Left,
        }
    }

    pub fn primed(name: impl Into<String>, sort: SortId) -> Self {
        Var {
            name: name.into(),
            sort,
            side: Side::Right,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Const(bool),
    Atom {
        rel: RelId,
        side: Side,
        args: Vec<Var>,
    },
    Eq(Var, Var),
    /// Graph of the link bijection on a coupled sort (triple language only).
    Link {
        sort: SortId,
        left: Var,
        right: Var,
    },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(Var, Box<Formula>),
    Exists(Var, Box<Formula>),
}

impl Formula {
    pub fn atom(rel: RelId, args: Vec<Var>) -> Self {
        Formula::Atom {
            rel,
            side: Side::Left,
            args,
        }
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn forall(v: Var, body: Formula) -> Self {
        Formula::Forall(v, Box::new(body))
    }

    pub fn exists(v: Var, body: Formula) -> Self {
        Formula::Exists(v, Box::new(body))
    }

    pub fn forall_all(vars: &[Var], body: Formula) -> Self {
        vars.iter()
            .rev()
            .fold(body, |acc, v| Formula::forall(v.clone(), acc))
    }

    pub fn exists_all(vars: &[Var], body: Formula) -> Self {
        vars.iter()
            .rev()
            .fold(body, |acc, v| Formula::exists(v.clone(), acc))
    }

    /// Conjunction of a list; empty list is `true`.
    pub fn conj(items: Vec<Formula>) -> Self {
        let mut it = items.into_iter();
        match it.next() {
            None => Formula::Const(true),
            Some(first) => it.fold(first, Formula::and),
        }
    }

    pub fn disj(items: Vec<Formula>) -> Self {
        let mut it = items.into_iter();
        match it.next() {
            None => Formula::Const(false),
            Some(first) => it.fold(first, Formula::or),
        }
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<Var> {
        fn go(f: &Formula, bound: &mut Vec<String>, out: &mut Vec<Var>) {
            let note = |v: &Var, bound: &Vec<String>, out: &mut Vec<Var>| {
                if !bound.contains(&v.name) && !out.iter().any(|o| o.name == v.name) {
                    out.push(v.clone());
                }
            };
            match f {
                Formula::Const(_) => {}
                Formula::Atom { args, .. } => args.iter().for_each(|v| note(v, bound, out)),
                Formula::Eq(a, b)
                | Formula::Link {
                    left: a, right: b, ..
                } => {
                    note(a, bound, out);
                    note(b, bound, out);
                }
                Formula::Not(a) => go(a, bound, out),
                Formula::And(a, b)
                | Formula::Or(a, b)
                | Formula::Implies(a, b)
                | Formula::Iff(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Formula::Forall(v, body) | Formula::Exists(v, body) => {
                    bound.push(v.name.clone());
                    go(body, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Every variable name occurring in the formula, free or bound.
    pub fn var_names(&self) -> BTreeSet<String> {
        fn go(f: &Formula, out: &mut BTreeSet<String>) {
            match f {
                Formula::Const(_) => {}
                Formula::Atom { args, .. } => out.extend(args.iter().map(|v| v.name.clone())),
                Formula::Eq(a, b)
                | Formula::Link {
                    left: a, right: b, ..
                } => {
                    out.insert(a.name.clone());
                    out.insert(b.name.clone());
                }
                Formula::Not(a) => go(a, out),
                Formula::And(a, b)
                | Formula::Or(a, b)
                | Formula::Implies(a, b)
                | Formula::Iff(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                Formula::Forall(v, body) | Formula::Exists(v, body) => {
                    out.insert(v.name.clone());
                    go(body, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut out);
        out
    }

    /// Replaces free variables according to `map` (matched by name). Every
    /// bound variable is renamed to a fresh name, so nothing is captured.
    pub fn substitute(&self, map: &[(String, Var)], names: &mut NameSupply) -> Formula {
        let lookup = |v: &Var, map: &[(String, Var)]| {
            map.iter()
                .rev()
                .find(|(n, _)| *n == v.name)
                .map(|(_, w)| w.clone())
                .unwrap_or_else(|| v.clone())
        };
        match self {
            Formula::Const(b) => Formula::Const(*b),
            Formula::Atom { rel, side, args } => Formula::Atom {
                rel: *rel,
                side: *side,
                args: args.iter().map(|v| lookup(v, map)).collect(),
            },
            Formula::Eq(a, b) => Formula::Eq(lookup(a, map), lookup(b, map)),
            Formula::Link { sort, left, right } => Formula::Link {
                sort: *sort,
                left: lookup(left, map),
                right: lookup(right, map),
            },
            Formula::Not(a) => Formula::not(a.substitute(map, names)),
            Formula::And(a, b) => Formula::and(a.substitute(map, names), b.substitute(map, names)),
            Formula::Or(a, b) => Formula::or(a.substitute(map, names), b.substitute(map, names)),
            Formula::Implies(a, b) => {
                Formula::implies(a.substitute(map, names), b.substitute(map, names))
            }
            Formula::Iff(a, b) => Formula::iff(a.substitute(map, names), b.substitute(map, names)),
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let w = Var {
                    name: names.fresh(&v.name),
                    sort: v.sort,
                    side: v.side,
                };
                let mut inner = map.to_vec();
                inner.push((v.name.clone(), w.clone()));
                let body = body.substitute(&inner, names);
                if matches!(self, Formula::Forall(..)) {
                    Formula::forall(w, body)
                } else {
                    Formula::exists(w, body)
                }
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Maximum quantifier nesting depth.
    pub fn quantifier_rank(&self) -> usize {
        match self {
            Formula::Const(_) | Formula::Atom { .. } | Formula::Eq(..) | Formula::Link { .. } => 0,
            Formula::Not(a) => a.quantifier_rank(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => a.quantifier_rank().max(b.quantifier_rank()),
            Formula::Forall(_, body) | Formula::Exists(_, body) => 1 + body.quantifier_rank(),
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        self.quantifier_rank() == 0
    }

    /// Renders in the concrete formula grammar; `parse(render(f)) == f`.
    pub fn render(&self, vocab: &Vocabulary) -> String {
        let mut s = String::new();
        render(self, vocab, &mut s);
        s
    }
}

fn render_var_decl(v: &Var, vocab: &Vocabulary, out: &mut String) {
    let prime = if v.side == Side::Right { "'" } else { "" };
    let _ = write!(out, "{}:{}{}", v.name, vocab.sort_name(v.sort), prime);
}

fn render_operand(f: &Formula, vocab: &Vocabulary, out: &mut String) {
    if matches!(f, Formula::Forall(..) | Formula::Exists(..)) {
        out.push('(');
        render(f, vocab, out);
        out.push(')');
    } else {
        render(f, vocab, out);
    }
}

fn render(f: &Formula, vocab: &Vocabulary, out: &mut String) {
    match f {
        Formula::Const(true) => out.push_str("true"),
        Formula::Const(false) => out.push_str("false"),
        Formula::Atom { rel, side, args } => {
            out.push_str(&vocab.relation(*rel).name);
            if *side == Side::Right {
                out.push('\'');
            }
            let names: Vec<&str> = args.iter().map(|v| v.name.as_str()).collect();
            let _ = write!(out, "({})", names.join(", "));
        }
        Formula::Eq(a, b) => {
            let _ = write!(out, "{} = {}", a.name, b.name);
        }
        Formula::Link { left, right, .. } => {
            let _ = write!(out, "@f({}, {})", left.name, right.name);
        }
        Formula::Not(a) => {
            out.push('!');
            match **a {
                Formula::Atom { .. }
                | Formula::Const(_)
                | Formula::Link { .. }
                | Formula::Not(_) => render(a, vocab, out),
                _ => {
                    out.push('(');
                    render(a, vocab, out);
                    out.push(')');
                }
            }
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            let op = match f {
                Formula::And(..) => " & ",
                Formula::Or(..) => " | ",
                Formula::Implies(..) => " -> ",
                _ => " <-> ",
            };
            out.push('(');
            render_operand(a, vocab, out);
            out.push_str(op);
            render_operand(b, vocab, out);
            out.push(')');
        }
        Formula::Forall(v, body) | Formula::Exists(v, body) => {
            out.push_str(if matches!(f, Formula::Forall(..)) {
                "forall "
            } else {
                "exists "
            });
            render_var_decl(v, vocab, out);
            out.push_str(". ");
            render(body, vocab, out);
        }
    }
}

/// Hands out variable names not used so far.
#[derive(Debug, Clone, Default)]
pub struct NameSupply {
    used: BTreeSet<String>,
}

impl NameSupply {
    pub fn new(used: impl IntoIterator<Item = String>) -> Self {
        NameSupply {
            used: used.into_iter().collect(),
        }
    }

    pub fn reserve(&mut self, name: &str) {
        self.used.insert(name.to_string());
    }

    /// `base` itself if unused, otherwise `base` followed by the least
    /// positive integer giving an unused name.
    pub fn fresh(&mut self, base: &str) -> String {
        let stem = base.trim_end_matches(|c: char| c.is_ascii_digit() || c == '\'');
        let stem = if stem.is_empty() { "v" } else { stem };
        let mut name = base.to_string();
        let mut k = 1;
        while self.used.contains(&name) {
            name = format!("{stem}{k}");
            k += 1;
        }
        self.used.insert(name.clone());
        name
    }
}

/// Which pairing discipline a formula is checked against.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Ordinary formulas over one structure.
    Single,
    /// The pair language: coupled sorts are shared, decoupled sorts and all
    /// relations come in two copies.
    Pair { coupled: Vec<bool> },
    /// The triple language: two disjoint copies of everything plus link
    /// atoms on coupled sorts; no cross-copy equality.
    Triple { coupled: Vec<bool> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Language {
    pub vocab: Arc<Vocabulary>,
    pub mode: Mode,
}

impl Language {
    pub fn single(vocab: Arc<Vocabulary>) -> Self {
        Language {
            vocab,
            mode: Mode::Single,
        }
    }

    pub fn pair(vocab: Arc<Vocabulary>, coupled: Vec<bool>) -> Self {
        Language {
            vocab,
            mode: Mode::Pair { coupled },
        }
    }

    pub fn triple(vocab: Arc<Vocabulary>, coupled: Vec<bool>) -> Self {
        Language {
            vocab,
            mode: Mode::Triple { coupled },
        }
    }

    pub fn is_coupled(&self, sort: SortId) -> bool {
        match &self.mode {
            Mode::Single => true,
            Mode::Pair { coupled } | Mode::Triple { coupled } => coupled[sort],
        }
    }

    /// Side a variable in argument position `sort` of a relation copy on
    /// `atom_side` must have.
    pub fn arg_side(&self, atom_side: Side, sort: SortId) -> Side {
        match (&self.mode, atom_side) {
            (_, Side::Left) => Side::Left,
            (Mode::Pair { coupled }, Side::Right) if coupled[sort] => Side::Left,
            (_, Side::Right) => Side::Right,
        }
    }

    fn var_ok(&self, v: &Var) -> Result<()> {
        if v.sort >= self.vocab.num_sorts() {
            return Err(Error::UnknownSort(format!("#{}", v.sort)));
        }
        match (&self.mode, v.side) {
            (_, Side::Left) => Ok(()),
            (Mode::Single, Side::Right) => Err(Error::SortMismatch(format!(
                "primed sort on `{}` outside the pair language",
                v.name
            ))),
            (Mode::Pair { coupled }, Side::Right) if coupled[v.sort] => {
                Err(Error::SortMismatch(format!(
                    "coupled sort `{}` has no primed copy (variable `{}`)",
                    self.vocab.sort_name(v.sort),
                    v.name
                )))
            }
            _ => Ok(()),
        }
    }

    /// Checks well-sortedness of `f` with the given free variables in scope.
    pub fn validate(&self, f: &Formula, free: &[Var]) -> Result<()> {
        let mut scope: Vec<Var> = free.to_vec();
        for v in free {
            self.var_ok(v)?;
        }
        self.check(f, &mut scope)
    }

    fn lookup(&self, scope: &[Var], v: &Var) -> Result<()> {
        match scope.iter().rev().find(|s| s.name == v.name) {
            None => Err(Error::Unbound(v.name.clone())),
            Some(s) if s.sort != v.sort || s.side != v.side => Err(Error::SortMismatch(format!(
                "variable `{}` used at a different sort than declared",
                v.name
            ))),
            Some(_) => Ok(()),
        }
    }

    fn check(&self, f: &Formula, scope: &mut Vec<Var>) -> Result<()> {
        match f {
            Formula::Const(_) => Ok(()),
            Formula::Atom { rel, side, args } => {
                if *rel >= self.vocab.num_relations() {
                    return Err(Error::UnknownRelation(format!("#{rel}")));
                }
                let decl = self.vocab.relation(*rel);
                if *side == Side::Right && self.mode == Mode::Single {
                    return Err(Error::SortMismatch(format!(
                        "primed relation `{}'` outside the pair language",
                        decl.name
                    )));
                }
                if decl.profile.len() != args.len() {
                    return Err(Error::Arity {
                        name: decl.name.clone(),
                        expected: decl.profile.len(),
                        found: args.len(),
                    });
                }
                for (v, &s) in args.iter().zip(&decl.profile) {
                    self.lookup(scope, v)?;
                    if v.sort != s || v.side != self.arg_side(*side, s) {
                        return Err(Error::SortMismatch(format!(
                            "argument `{}` of `{}` has the wrong sort",
                            v.name, decl.name
                        )));
                    }
                }
                Ok(())
            }
            Formula::Eq(a, b) => {
                self.lookup(scope, a)?;
                self.lookup(scope, b)?;
                if a.sort != b.sort {
                    return Err(Error::EqualitySort(a.name.clone(), b.name.clone()));
                }
                if a.side != b.side {
                    return Err(Error::Validation(format!(
                        "equality `{} = {}` compares the two components",
                        a.name, b.name
                    )));
                }
                Ok(())
            }
            Formula::Link { sort, left, right } => {
                let Mode::Triple { coupled } = &self.mode else {
                    return Err(Error::Validation(
                        "link atoms only exist in the triple language".into(),
                    ));
                };
                if !coupled[*sort] {
                    return Err(Error::Validation(format!(
                        "link atom on decoupled sort `{}`",
                        self.vocab.sort_name(*sort)
                    )));
                }
                self.lookup(scope, left)?;
                self.lookup(scope, right)?;
                if left.sort != *sort
                    || right.sort != *sort
                    || left.side != Side::Left
                    || right.side != Side::Right
                {
                    return Err(Error::SortMismatch(format!(
                        "link atom expects an unprimed then a primed `{}` variable",
                        self.vocab.sort_name(*sort)
                    )));
                }
                Ok(())
            }
            Formula::Not(a) => self.check(a, scope),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                self.check(a, scope)?;
                self.check(b, scope)
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                self.var_ok(v)?;
                scope.push(v.clone());
                let r = self.check(body, scope);
                scope.pop();
                r
            }
        }
    }
}
