//! Concrete syntax for formulas.
//!
//! ```text
//! formula  := iff
//! iff      := implies ('<->' implies)*
//! implies  := or ('->' implies)?
//! or       := and ('|' and)*
//! and      := unary ('&' unary)*
//! unary    := '!' unary | quant | primary
//! quant    := ('forall' | 'exists') binder (',' binder)* '.' formula
//! binder   := name (':' Sort '\''?)?
//! primary  := '(' formula ')' | 'true' | 'false' | '@' name '(' v ',' v ')'
//!           | Rel '\''? '(' v (',' v)* ')' | v '=' v | v '!=' v
//! ```
//!
//! Variable names may end in primes (`x'`). Partitioned formulas either carry
//! a header `[p ; x, y] formula` or are a single atom whose argument list uses
//! `:` between blocks, e.g. `G(x : y)`.

use super::formula::{Formula, Language, Mode, Side, Var};
use super::vocab::SortId;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Prime,
    Colon,
    Semi,
    Dot,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Amp,
    Pipe,
    Arrow,
    DArrow,
    Bang,
    Eq,
    Neq,
    At,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Pos {
    line: usize,
    column: usize,
}

fn syntax(pos: Pos, message: impl Into<String>) -> Error {
    Error::Syntax {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        let step = |n: usize, tok: Tok, out: &mut Vec<(Tok, Pos)>| {
            out.push((tok, pos));
            n
        };
        let adv = if c == '\n' {
            line += 1;
            col = 0;
            1
        } else if c.is_whitespace() {
            1
        } else if c.is_alphanumeric() || c == '_' {
            let start = i;
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let word: String = chars[start..j].iter().collect();
            step(j - i, Tok::Ident(word), &mut out)
        } else {
            let next = chars.get(i + 1).copied();
            match (c, next) {
                ('<', Some('-')) if chars.get(i + 2) == Some(&'>') => {
                    step(3, Tok::DArrow, &mut out)
                }
                ('-', Some('>')) => step(2, Tok::Arrow, &mut out),
                ('!', Some('=')) => step(2, Tok::Neq, &mut out),
                ('\'', _) => step(1, Tok::Prime, &mut out),
                (':', _) => step(1, Tok::Colon, &mut out),
                (';', _) => step(1, Tok::Semi, &mut out),
                ('.', _) => step(1, Tok::Dot, &mut out),
                (',', _) => step(1, Tok::Comma, &mut out),
                ('(', _) => step(1, Tok::LParen, &mut out),
                (')', _) => step(1, Tok::RParen, &mut out),
                ('[', _) => step(1, Tok::LBracket, &mut out),
                (']', _) => step(1, Tok::RBracket, &mut out),
                ('&', _) => step(1, Tok::Amp, &mut out),
                ('|', _) => step(1, Tok::Pipe, &mut out),
                ('!', _) => step(1, Tok::Bang, &mut out),
                ('=', _) => step(1, Tok::Eq, &mut out),
                ('@', _) => step(1, Tok::At, &mut out),
                _ => return Err(syntax(pos, format!("unexpected character `{c}`"))),
            }
        };
        i += adv;
        col += adv;
    }
    out.push((Tok::End, Pos { line, column: col }));
    Ok(out)
}

#[derive(Debug, Clone)]
struct RawBinder {
    name: String,
    sort: Option<(String, bool)>,
    pos: Pos,
}

#[derive(Debug, Clone)]
enum Raw {
    Const(bool),
    Atom {
        name: String,
        primed: bool,
        args: Vec<(String, Pos)>,
        pos: Pos,
    },
    Eq {
        a: (String, Pos),
        b: (String, Pos),
        negated: bool,
    },
    Link {
        a: (String, Pos),
        b: (String, Pos),
    },
    Not(Box<Raw>),
    Bin(BinOp, Box<Raw>, Box<Raw>),
    Quant {
        forall: bool,
        binder: RawBinder,
        body: Box<Raw>,
    },
}

#[derive(Debug, Clone, Copy)]
enum BinOp {
    And,
    Or,
    Implies,
    Iff,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    /// Block separators seen inside the argument list of the last atom.
    blocks: Option<Vec<Vec<(String, Pos)>>>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(syntax(
                self.pos(),
                format!("expected {what}, found {:?}", self.peek()),
            ))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.bump() {
            Tok::Ident(s) => Ok(s),
            t => {
                self.at -= usize::from(t != Tok::End);
                Err(syntax(self.pos(), format!("expected {what}, found {t:?}")))
            }
        }
    }

    /// A variable name, possibly followed by primes.
    fn var_name(&mut self) -> Result<(String, Pos)> {
        let pos = self.pos();
        let mut name = self.ident("variable")?;
        while *self.peek() == Tok::Prime {
            self.bump();
            name.push('\'');
        }
        Ok((name, pos))
    }

    fn iff(&mut self) -> Result<Raw> {
        let mut lhs = self.implies()?;
        while *self.peek() == Tok::DArrow {
            self.bump();
            let rhs = self.implies()?;
            lhs = Raw::Bin(BinOp::Iff, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Raw> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implies()?;
            return Ok(Raw::Bin(BinOp::Implies, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Raw> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            let rhs = self.and()?;
            lhs = Raw::Bin(BinOp::Or, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Raw> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            lhs = Raw::Bin(BinOp::And, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Raw> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(Raw::Not(Box::new(self.unary()?)))
            }
            Tok::Ident(w) if w == "forall" || w == "exists" => {
                self.bump();
                let mut binders = vec![self.binder()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    binders.push(self.binder()?);
                }
                self.expect(Tok::Dot, "`.` after quantifier")?;
                let body = self.iff()?;
                Ok(binders
                    .into_iter()
                    .rev()
                    .fold(body, |acc, binder| Raw::Quant {
                        forall: w == "forall",
                        binder,
                        body: Box::new(acc),
                    }))
            }
            _ => self.primary(),
        }
    }

    fn binder(&mut self) -> Result<RawBinder> {
        let (name, pos) = self.var_name()?;
        let sort = if *self.peek() == Tok::Colon {
            self.bump();
            let s = self.ident("sort name")?;
            let primed = *self.peek() == Tok::Prime;
            if primed {
                self.bump();
            }
            Some((s, primed))
        } else {
            None
        };
        Ok(RawBinder { name, sort, pos })
    }

    fn primary(&mut self) -> Result<Raw> {
        let pos = self.pos();
        match self.bump() {
            Tok::LParen => {
                let f = self.iff()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::At => {
                self.ident("link symbol")?;
                self.expect(Tok::LParen, "`(`")?;
                let a = self.var_name()?;
                self.expect(Tok::Comma, "`,`")?;
                let b = self.var_name()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Raw::Link { a, b })
            }
            Tok::Ident(w) if w == "true" => Ok(Raw::Const(true)),
            Tok::Ident(w) if w == "false" => Ok(Raw::Const(false)),
            Tok::Ident(w) if w == "forall" || w == "exists" => {
                Err(syntax(pos, "quantifier must be parenthesised here"))
            }
            Tok::Ident(name) => {
                // Relation atom if a (possibly primed) name is followed by `(`.
                let save = self.at;
                let mut primes = 0;
                while *self.peek() == Tok::Prime {
                    self.bump();
                    primes += 1;
                }
                if *self.peek() == Tok::LParen && primes <= 1 {
                    self.bump();
                    let mut blocks: Vec<Vec<(String, Pos)>> = vec![Vec::new()];
                    if *self.peek() != Tok::RParen {
                        loop {
                            blocks.last_mut().unwrap().push(self.var_name()?);
                            match self.bump() {
                                Tok::Comma => {}
                                Tok::Colon => blocks.push(Vec::new()),
                                Tok::RParen => break,
                                t => {
                                    return Err(syntax(
                                        self.pos(),
                                        format!("expected `,` or `)`, found {t:?}"),
                                    ))
                                }
                            }
                        }
                    } else {
                        self.bump();
                    }
                    if blocks.iter().any(|b| b.is_empty()) && blocks.len() > 1 {
                        return Err(syntax(pos, "empty variable block"));
                    }
                    let args: Vec<(String, Pos)> = blocks.iter().flatten().cloned().collect();
                    if blocks.len() > 1 {
                        self.blocks = Some(blocks);
                    }
                    return Ok(Raw::Atom {
                        name,
                        primed: primes == 1,
                        args,
                        pos,
                    });
                }
                self.at = save;
                self.at -= 1;
                let a = self.var_name()?;
                let negated = match self.bump() {
                    Tok::Eq => false,
                    Tok::Neq => true,
                    t => {
                        return Err(syntax(
                            a.1,
                            format!("expected atom or equality after `{}`, found {t:?}", a.0),
                        ))
                    }
                };
                let b = self.var_name()?;
                Ok(Raw::Eq { a, b, negated })
            }
            t => Err(syntax(pos, format!("unexpected {t:?}"))),
        }
    }
}

struct Resolver<'a> {
    lang: &'a Language,
}

#[derive(Default, Clone, Copy)]
struct Hint {
    sort: Option<SortId>,
    side: Option<Side>,
}

impl<'a> Resolver<'a> {
    fn sort_by_name(&self, name: &str, primed: bool, pos: Pos) -> Result<(SortId, Side)> {
        let sort = self
            .lang
            .vocab
            .sort_id(name)
            .ok_or_else(|| Error::UnknownSort(name.to_string()))?;
        let side = if primed { Side::Right } else { Side::Left };
        if primed {
            match &self.lang.mode {
                Mode::Single => {
                    return Err(syntax(
                        pos,
                        format!("primed sort `{name}'` outside the pair language"),
                    ))
                }
                Mode::Pair { coupled } if coupled[sort] => {
                    return Err(syntax(
                        pos,
                        format!("coupled sort `{name}` has no primed copy"),
                    ))
                }
                _ => {}
            }
        }
        Ok((sort, side))
    }

    /// Finds how `name` is used in `raw` (ignoring shadowed occurrences).
    fn infer(&self, name: &str, raw: &Raw, hint: &mut Hint) {
        match raw {
            Raw::Const(_) | Raw::Eq { .. } => {}
            Raw::Atom {
                name: rel,
                primed,
                args,
                ..
            } => {
                let Some(r) = self.lang.vocab.relation_id(rel) else {
                    return;
                };
                let decl = self.lang.vocab.relation(r);
                for (i, (a, _)) in args.iter().enumerate() {
                    if a == name && i < decl.profile.len() && hint.sort.is_none() {
                        let s = decl.profile[i];
                        let atom_side = if *primed { Side::Right } else { Side::Left };
                        hint.sort = Some(s);
                        hint.side = Some(self.lang.arg_side(atom_side, s));
                    }
                }
            }
            Raw::Link { a, b } => {
                if hint.side.is_none() {
                    if a.0 == name {
                        hint.side = Some(Side::Left);
                    } else if b.0 == name {
                        hint.side = Some(Side::Right);
                    }
                }
            }
            Raw::Not(a) => self.infer(name, a, hint),
            Raw::Bin(_, a, b) => {
                self.infer(name, a, hint);
                self.infer(name, b, hint);
            }
            Raw::Quant { binder, body, .. } => {
                if binder.name != name {
                    self.infer(name, body, hint);
                }
            }
        }
    }

    fn declare(
        &self,
        name: &str,
        sort: Option<(String, bool)>,
        pos: Pos,
        body: &Raw,
    ) -> Result<Var> {
        if let Some((s, primed)) = sort {
            let (sort, side) = self.sort_by_name(&s, primed, pos)?;
            return Ok(Var {
                name: name.to_string(),
                sort,
                side,
            });
        }
        let mut hint = Hint::default();
        self.infer(name, body, &mut hint);
        let sort = match hint.sort {
            Some(s) => s,
            None if self.lang.vocab.num_sorts() == 1 => 0,
            None => {
                return Err(syntax(
                    pos,
                    format!("cannot infer the sort of `{name}`; annotate it as `{name}:Sort`"),
                ))
            }
        };
        let side = match (&self.lang.mode, hint.side) {
            (Mode::Pair { coupled }, Some(Side::Right)) if coupled[sort] => Side::Left,
            (_, Some(side)) => side,
            (_, None) => Side::Left,
        };
        Ok(Var {
            name: name.to_string(),
            sort,
            side,
        })
    }

    fn lookup(scope: &[Var], name: &str, pos: Pos) -> Result<Var> {
        scope
            .iter()
            .rev()
            .find(|v| v.name == name)
            .cloned()
            .ok_or_else(|| syntax(pos, format!("unbound variable `{name}`")))
    }

    fn resolve(&self, raw: &Raw, scope: &mut Vec<Var>) -> Result<Formula> {
        Ok(match raw {
            Raw::Const(b) => Formula::Const(*b),
            Raw::Atom {
                name,
                primed,
                args,
                pos,
            } => {
                let rel = self
                    .lang
                    .vocab
                    .relation_id(name)
                    .ok_or_else(|| Error::UnknownRelation(name.clone()))?;
                let decl = self.lang.vocab.relation(rel);
                if decl.profile.len() != args.len() {
                    return Err(Error::Arity {
                        name: name.clone(),
                        expected: decl.profile.len(),
                        found: args.len(),
                    });
                }
                let side = if *primed { Side::Right } else { Side::Left };
                if *primed && self.lang.mode == Mode::Single {
                    return Err(syntax(
                        *pos,
                        format!("primed relation `{name}'` outside the pair language"),
                    ));
                }
                let mut vars = Vec::with_capacity(args.len());
                for ((a, apos), &s) in args.iter().zip(&decl.profile) {
                    let v = Self::lookup(scope, a, *apos)?;
                    if v.sort != s {
                        return Err(Error::SortMismatch(format!(
                            "`{a}` has sort `{}` but `{name}` expects `{}`",
                            self.lang.vocab.sort_name(v.sort),
                            self.lang.vocab.sort_name(s)
                        )));
                    }
                    if v.side != self.lang.arg_side(side, s) {
                        return Err(Error::SortMismatch(format!(
                            "`{a}` is on the wrong copy of sort `{}` for `{name}{}`",
                            self.lang.vocab.sort_name(s),
                            if *primed { "'" } else { "" }
                        )));
                    }
                    vars.push(v);
                }
                Formula::Atom {
                    rel,
                    side,
                    args: vars,
                }
            }
            Raw::Eq { a, b, negated } => {
                let va = Self::lookup(scope, &a.0, a.1)?;
                let vb = Self::lookup(scope, &b.0, b.1)?;
                if va.sort != vb.sort {
                    return Err(Error::EqualitySort(va.name, vb.name));
                }
                if va.side != vb.side {
                    return Err(Error::Validation(format!(
                        "equality `{} = {}` compares the two components",
                        va.name, vb.name
                    )));
                }
                let eq = Formula::Eq(va, vb);
                if *negated {
                    Formula::not(eq)
                } else {
                    eq
                }
            }
            Raw::Link { a, b } => {
                let va = Self::lookup(scope, &a.0, a.1)?;
                let vb = Self::lookup(scope, &b.0, b.1)?;
                let f = Formula::Link {
                    sort: va.sort,
                    left: va,
                    right: vb,
                };
                self.lang.validate(&f, scope)?;
                f
            }
            Raw::Not(a) => Formula::not(self.resolve(a, scope)?),
            Raw::Bin(op, a, b) => {
                let a = self.resolve(a, scope)?;
                let b = self.resolve(b, scope)?;
                match op {
                    BinOp::And => Formula::and(a, b),
                    BinOp::Or => Formula::or(a, b),
                    BinOp::Implies => Formula::implies(a, b),
                    BinOp::Iff => Formula::iff(a, b),
                }
            }
            Raw::Quant {
                forall,
                binder,
                body,
            } => {
                let v = self.declare(&binder.name, binder.sort.clone(), binder.pos, body)?;
                scope.push(v.clone());
                let inner = self.resolve(body, scope);
                scope.pop();
                let inner = inner?;
                if *forall {
                    Formula::forall(v, inner)
                } else {
                    Formula::exists(v, inner)
                }
            }
        })
    }
}

fn free_names(raw: &Raw, bound: &mut Vec<String>, out: &mut Vec<(String, Pos)>) {
    let note = |n: &(String, Pos), bound: &Vec<String>, out: &mut Vec<(String, Pos)>| {
        if !bound.contains(&n.0) && !out.iter().any(|o| o.0 == n.0) {
            out.push(n.clone());
        }
    };
    match raw {
        Raw::Const(_) => {}
        Raw::Atom { args, .. } => args.iter().for_each(|a| note(a, bound, out)),
        Raw::Eq { a, b, .. } | Raw::Link { a, b } => {
            note(a, bound, out);
            note(b, bound, out);
        }
        Raw::Not(a) => free_names(a, bound, out),
        Raw::Bin(_, a, b) => {
            free_names(a, bound, out);
            free_names(b, bound, out);
        }
        Raw::Quant { binder, body, .. } => {
            bound.push(binder.name.clone());
            free_names(body, bound, out);
            bound.pop();
        }
    }
}

/// Parsed partition header or atom block structure.
type RawBlocks = Vec<Vec<RawBinder>>;

fn parse_raw(text: &str, allow_header: bool) -> Result<(Raw, Option<RawBlocks>)> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        blocks: None,
    };
    let mut header = None;
    if allow_header && *p.peek() == Tok::LBracket {
        p.bump();
        let mut blocks: RawBlocks = vec![Vec::new()];
        loop {
            blocks.last_mut().unwrap().push(p.binder()?);
            match p.bump() {
                Tok::Comma => {}
                Tok::Semi => blocks.push(Vec::new()),
                Tok::RBracket => break,
                t => {
                    return Err(syntax(
                        p.pos(),
                        format!("expected `,`, `;` or `]`, found {t:?}"),
                    ))
                }
            }
        }
        header = Some(blocks);
    }
    let raw = p.iff()?;
    if *p.peek() != Tok::End {
        return Err(syntax(
            p.pos(),
            format!("unexpected trailing {:?}", p.peek()),
        ));
    }
    if header.is_none() {
        if p.blocks.is_some() && matches!(raw, Raw::Atom { .. }) {
            let blocks = p.blocks.take().unwrap_or_default();
            header = Some(
                blocks
                    .into_iter()
                    .map(|b| {
                        b.into_iter()
                            .map(|(name, pos)| RawBinder {
                                name,
                                sort: None,
                                pos,
                            })
                            .collect()
                    })
                    .collect(),
            );
        } else if p.blocks.is_some() {
            return Err(syntax(
                Pos { line: 1, column: 1 },
                "block separators are only allowed in a lone atom",
            ));
        }
    }
    Ok((raw, header))
}

fn resolve_open(raw: &Raw, lang: &Language, declared: &[RawBinder]) -> Result<(Formula, Vec<Var>)> {
    let r = Resolver { lang };
    let mut names = Vec::new();
    free_names(raw, &mut Vec::new(), &mut names);
    let mut free: Vec<Var> = Vec::new();
    for b in declared {
        if free.iter().any(|v| v.name == b.name) {
            return Err(syntax(b.pos, format!("variable `{}` listed twice", b.name)));
        }
        free.push(r.declare(&b.name, b.sort.clone(), b.pos, raw)?);
    }
    for (name, pos) in names {
        if !free.iter().any(|v| v.name == name) {
            free.push(r.declare(&name, None, pos, raw)?);
        }
    }
    let mut scope = free.clone();
    let f = r.resolve(raw, &mut scope)?;
    Ok((f, free))
}

/// Parses a formula; free variables are allowed and their sorts inferred.
pub fn parse_formula(text: &str, lang: &Language) -> Result<Formula> {
    parse_open(text, lang).map(|(f, _)| f)
}

/// Parses a formula and returns its free variables in order of first use.
pub fn parse_open(text: &str, lang: &Language) -> Result<(Formula, Vec<Var>)> {
    let (raw, _) = parse_raw(text, false)?;
    resolve_open(&raw, lang, &[])
}

/// Parses a closed formula.
pub fn parse_sentence(text: &str, lang: &Language) -> Result<Formula> {
    let (f, free) = parse_open(text, lang)?;
    if !free.is_empty() {
        let names: Vec<&str> = free.iter().map(|v| v.name.as_str()).collect();
        return Err(Error::NotClosed(names.join(", ")));
    }
    Ok(f)
}

/// Parses a formula with its variable blocks, either `[a ; b, c] φ` or a
/// single atom `R(a : b, c)`. Every free variable must appear in a block.
pub fn parse_blocks(text: &str, lang: &Language) -> Result<(Formula, Vec<Vec<Var>>)> {
    let (raw, header) = parse_raw(text, true)?;
    let Some(header) = header else {
        let (f, free) = resolve_open(&raw, lang, &[])?;
        return Ok((f, vec![free]));
    };
    let declared: Vec<RawBinder> = header.iter().flatten().cloned().collect();
    let (f, free) = resolve_open(&raw, lang, &declared)?;
    if free.len() != declared.len() {
        let extra: Vec<&str> = free[declared.len()..]
            .iter()
            .map(|v| v.name.as_str())
            .collect();
        return Err(Error::Validation(format!(
            "free variables not assigned to a block: {}",
            extra.join(", ")
        )));
    }
    let mut it = free.into_iter();
    let blocks = header
        .iter()
        .map(|b| it.by_ref().take(b.len()).collect())
        .collect();
    Ok((f, blocks))
}
