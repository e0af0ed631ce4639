//! The workspace file format: vocabularies, theories, structures and MER
//! declarations.
//!
//! ```text
//! vocab Bip { sort P; sort Q; rel G(P, Q); }
//! theory Loopless over Bip { axiom "nonempty": "exists x:P. x = x"; }
//! structure M over Bip { P = 2; Q = 2; G = {(0,1),(1,0)}; }
//! mer AdjSets over Bip coupled(P, Q) { family "G(x : y)"; }
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use merlab_core::catalog::catalog_get;
use merlab_core::logic::Theory;
use merlab_core::{CoupledSignature, FiniteMetric, FiniteStructure, Mer, Rational, Scalar, Vocabulary};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(String),
    Punct(char),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::Num(s) => write!(f, "{s}"),
            Tok::Punct(c) => write!(f, "`{c}`"),
        }
    }
}

fn syntax(pos: Pos, message: impl Into<String>) -> CliError {
    CliError::Syntax {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, CliError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let bump = |i: &mut usize, line: &mut usize, col: &mut usize| {
        if chars[*i] == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
        *i += 1;
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c.is_whitespace() {
            bump(&mut i, &mut line, &mut col);
        } else if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                bump(&mut i, &mut line, &mut col);
            }
        } else if c == '"' {
            bump(&mut i, &mut line, &mut col);
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None => return Err(syntax(pos, "unterminated string")),
                    Some('"') => break,
                    Some('\\') if matches!(chars.get(i + 1), Some('"' | '\\')) => {
                        bump(&mut i, &mut line, &mut col);
                        s.push(chars[i]);
                    }
                    Some(&ch) => s.push(ch),
                }
                bump(&mut i, &mut line, &mut col);
            }
            bump(&mut i, &mut line, &mut col);
            out.push((Tok::Str(s), pos));
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.' || chars[i] == '/') {
                s.push(chars[i]);
                bump(&mut i, &mut line, &mut col);
            }
            out.push((Tok::Num(s), pos));
        } else if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_alphanumeric() || matches!(chars[i], '_' | '-' | '\'')) {
                s.push(chars[i]);
                bump(&mut i, &mut line, &mut col);
            }
            out.push((Tok::Ident(s), pos));
        } else if "{}();:,=".contains(c) {
            bump(&mut i, &mut line, &mut col);
            out.push((Tok::Punct(c), pos));
        } else {
            return Err(syntax(pos, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map_or(self.end, |(_, p)| *p)
    }

    fn next(&mut self, what: &str) -> Result<(Tok, Pos), CliError> {
        let t = self
            .toks
            .get(self.at)
            .cloned()
            .ok_or_else(|| syntax(self.end, format!("expected {what}, found end of input")))?;
        self.at += 1;
        Ok(t)
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos), CliError> {
        match self.next(what)? {
            (Tok::Ident(s), p) => Ok((s, p)),
            (t, p) => Err(syntax(p, format!("expected {what}, found {t}"))),
        }
    }

    fn string(&mut self, what: &str) -> Result<(String, Pos), CliError> {
        match self.next(what)? {
            (Tok::Str(s), p) => Ok((s, p)),
            (t, p) => Err(syntax(p, format!("expected {what}, found {t}"))),
        }
    }

    fn number(&mut self, what: &str) -> Result<(String, Pos), CliError> {
        match self.next(what)? {
            (Tok::Num(s), p) => Ok((s, p)),
            (t, p) => Err(syntax(p, format!("expected {what}, found {t}"))),
        }
    }

    fn usize(&mut self, what: &str) -> Result<usize, CliError> {
        let (s, p) = self.number(what)?;
        s.parse().map_err(|_| syntax(p, format!("expected {what}, found {s}")))
    }

    fn punct(&mut self, c: char) -> Result<Pos, CliError> {
        match self.next(&format!("`{c}`"))? {
            (Tok::Punct(d), p) if d == c => Ok(p),
            (t, p) => Err(syntax(p, format!("expected `{c}`, found {t}"))),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.at += 1;
            true
        } else {
            false
        }
    }
}

/// Where a declaration appeared, for diagnostics.
#[derive(Debug, Clone)]
pub struct Site {
    pub name: String,
    pub pos: Pos,
}

#[derive(Debug, Clone)]
pub struct MerDecl {
    pub name: String,
    pub pos: Pos,
    pub spec: Mer,
    pub theory: Theory,
}

/// A loaded and validated workspace file.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    pub path: Option<PathBuf>,
    pub vocabs: BTreeMap<String, (Arc<Vocabulary>, Pos)>,
    pub theories: BTreeMap<String, (Theory, Pos)>,
    pub structures: BTreeMap<String, (FiniteStructure, Pos)>,
    pub mers: BTreeMap<String, MerDecl>,
    /// Declaration order of every name.
    pub order: Vec<Site>,
}

pub fn load_workspace(path: &Path) -> Result<Workspace, CliError> {
    let src = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut ws = parse_workspace(&src, path.parent())?;
    ws.path = Some(path.to_path_buf());
    Ok(ws)
}

/// Parses a workspace; relative metric paths resolve against `base`.
pub fn parse_workspace(src: &str, base: Option<&Path>) -> Result<Workspace, CliError> {
    let toks = lex(src)?;
    let end = Pos {
        line: src.lines().count().max(1),
        column: src.lines().last().map_or(1, |l| l.chars().count() + 1),
    };
    let mut p = Parser { toks, at: 0, end };
    let mut ws = Workspace::default();
    while p.peek().is_some() {
        let (kw, pos) = p.ident("a declaration")?;
        let (name, name_pos) = p.ident("a name")?;
        if ws.order.iter().any(|s| s.name == name) {
            return Err(CliError::Resolve {
                line: name_pos.line,
                column: name_pos.column,
                message: format!("duplicate declaration `{name}`"),
            });
        }
        match kw.as_str() {
            "vocab" => {
                let v = vocab_body(&mut p)?;
                ws.vocabs.insert(name.clone(), (Arc::new(v), pos));
            }
            "theory" => {
                let vocab = over_vocab(&mut p, &ws, &name)?;
                let t = theory_body(&mut p, vocab)?;
                ws.theories.insert(name.clone(), (t, pos));
            }
            "structure" => {
                let vocab = over_vocab(&mut p, &ws, &name)?;
                p.punct('{')?;
                let m = structure_items(&mut p, &vocab, Some('}'))?;
                p.punct('}')?;
                ws.structures.insert(name.clone(), (m, pos));
            }
            "mer" => {
                let decl = mer_decl(&mut p, &ws, &name, pos, base)?;
                ws.mers.insert(name.clone(), decl);
            }
            other => {
                return Err(syntax(
                    pos,
                    format!("expected `vocab`, `theory`, `structure` or `mer`, found `{other}`"),
                ))
            }
        }
        ws.order.push(Site { name, pos });
    }
    Ok(ws)
}

fn core_at(pos: Pos, e: merlab_core::Error) -> CliError {
    CliError::Resolve {
        line: pos.line,
        column: pos.column,
        message: e.to_string(),
    }
}

fn vocab_body(p: &mut Parser) -> Result<Vocabulary, CliError> {
    let mut v = Vocabulary::new();
    p.punct('{')?;
    while !p.eat('}') {
        let (kw, pos) = p.ident("`sort` or `rel`")?;
        match kw.as_str() {
            "sort" => loop {
                let (s, sp) = p.ident("a sort name")?;
                v.add_sort(&s).map_err(|e| core_at(sp, e))?;
                if !p.eat(',') {
                    break;
                }
            },
            "rel" => {
                let (r, rp) = p.ident("a relation name")?;
                p.punct('(')?;
                let mut profile = Vec::new();
                loop {
                    profile.push(p.ident("a sort name")?.0);
                    if !p.eat(',') {
                        break;
                    }
                }
                p.punct(')')?;
                let refs: Vec<&str> = profile.iter().map(String::as_str).collect();
                v.add_relation(&r, &refs).map_err(|e| core_at(rp, e))?;
            }
            other => return Err(syntax(pos, format!("expected `sort` or `rel`, found `{other}`"))),
        }
        p.punct(';')?;
    }
    Ok(v)
}

fn over_vocab(p: &mut Parser, ws: &Workspace, owner: &str) -> Result<Arc<Vocabulary>, CliError> {
    if !p.keyword("over") {
        return Err(syntax(p.pos(), format!("expected `over` after `{owner}`")));
    }
    let (v, pos) = p.ident("a vocabulary name")?;
    ws.vocabs.get(&v).map(|(v, _)| v.clone()).ok_or_else(|| CliError::Resolve {
        line: pos.line,
        column: pos.column,
        message: format!("`{owner}` refers to unknown vocabulary `{v}`"),
    })
}

fn theory_body(p: &mut Parser, vocab: Arc<Vocabulary>) -> Result<Theory, CliError> {
    let mut t = Theory::empty(vocab.clone());
    let lang = merlab_core::logic::Language::single(vocab);
    p.punct('{')?;
    let mut count = 0;
    while !p.eat('}') {
        let (kw, pos) = p.ident("`axiom`")?;
        if kw != "axiom" {
            return Err(syntax(pos, format!("expected `axiom`, found `{kw}`")));
        }
        count += 1;
        let (first, fp) = p.string("an axiom")?;
        let (name, (text, tp)) = if p.eat(':') {
            (first, p.string("an axiom sentence")?)
        } else {
            (format!("axiom{count}"), (first, fp))
        };
        let phi = merlab_core::logic::parse_sentence(&text, &lang).map_err(|e| core_at(tp, e))?;
        t.add(&name, phi).map_err(|e| core_at(fp, e))?;
        p.punct(';')?;
    }
    Ok(t)
}

/// `S = 3; R = {(0,1),(1,2)};` items; separators may be `;` or `,`.
fn structure_items(p: &mut Parser, vocab: &Arc<Vocabulary>, close: Option<char>) -> Result<FiniteStructure, CliError> {
    let mut sizes: Vec<Option<usize>> = vec![None; vocab.num_sorts()];
    let mut rels: Vec<(String, Vec<Vec<u32>>, Pos)> = Vec::new();
    let start = p.pos();
    loop {
        match (p.peek(), close) {
            (None, _) => break,
            (Some(Tok::Punct(c)), Some(d)) if *c == d => break,
            _ => {}
        }
        let (name, pos) = p.ident("a sort or relation name")?;
        p.punct('=')?;
        if let Some(s) = vocab.sort_id(&name) {
            sizes[s] = Some(p.usize("a universe size")?);
        } else if vocab.relation_id(&name).is_some() {
            p.punct('{')?;
            let mut tuples = Vec::new();
            while !p.eat('}') {
                if p.eat('(') {
                    let mut t = Vec::new();
                    while !p.eat(')') {
                        t.push(p.usize("an element")? as u32);
                        p.eat(',');
                    }
                    tuples.push(t);
                } else {
                    tuples.push(vec![p.usize("an element")? as u32]);
                }
                p.eat(',');
            }
            rels.push((name, tuples, pos));
        } else {
            return Err(CliError::Resolve {
                line: pos.line,
                column: pos.column,
                message: format!("`{name}` is neither a sort nor a relation"),
            });
        }
        if !(p.eat(';') || p.eat(',')) {
            break;
        }
    }
    let sizes = sizes
        .into_iter()
        .enumerate()
        .map(|(s, n)| {
            n.ok_or_else(|| CliError::Resolve {
                line: start.line,
                column: start.column,
                message: format!("no size given for sort `{}`", vocab.sort_name(s)),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut m = FiniteStructure::empty(vocab.clone(), sizes).map_err(|e| core_at(start, e))?;
    for (name, tuples, pos) in rels {
        let r = vocab.relation_id(&name).expect("checked");
        for t in tuples {
            m.insert(r, &t).map_err(|e| core_at(pos, e))?;
        }
    }
    Ok(m)
}

/// Reads a structure literal such as `P=2,Q=2; G={(0,1)}`, the format used
/// in reports.
pub fn parse_structure(text: &str, vocab: &Arc<Vocabulary>) -> Result<FiniteStructure, CliError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: Pos { line: 1, column: text.chars().count() + 1 },
    };
    let m = structure_items(&mut p, vocab, None)?;
    if p.peek().is_some() {
        return Err(syntax(p.pos(), "trailing input after structure"));
    }
    Ok(m)
}

#[derive(Default)]
struct MerClauses {
    sentence: Option<(String, Pos)>,
    reduct: Vec<(String, Pos)>,
    family: Vec<(String, Pos)>,
    order: Option<(String, Pos)>,
    metric: Option<(FiniteMetric<Rational>, Pos)>,
    eps: Option<Rational>,
    labels: Vec<(String, Pos)>,
    builtin: Option<(String, Pos)>,
}

fn mer_decl(
    p: &mut Parser,
    ws: &Workspace,
    name: &str,
    pos: Pos,
    base: Option<&Path>,
) -> Result<MerDecl, CliError> {
    let mut over: Option<(Arc<Vocabulary>, Theory)> = None;
    if p.keyword("over") {
        let (v, vp) = p.ident("a vocabulary or theory name")?;
        over = Some(if let Some((t, _)) = ws.theories.get(&v) {
            (t.vocab().clone(), t.clone())
        } else if let Some((voc, _)) = ws.vocabs.get(&v) {
            (voc.clone(), Theory::empty(voc.clone()))
        } else {
            return Err(CliError::Resolve {
                line: vp.line,
                column: vp.column,
                message: format!("mer `{name}` refers to unknown vocabulary `{v}`"),
            });
        });
    }
    let mut coupled: Option<(Vec<String>, Pos)> = None;
    if p.keyword("coupled") {
        let cp = p.punct('(')?;
        let mut names = Vec::new();
        while !p.eat(')') {
            names.push(p.ident("a sort name")?.0);
            p.eat(',');
        }
        coupled = Some((names, cp));
    }
    let c = mer_clauses(p, base)?;

    if let Some((id, bp)) = &c.builtin {
        let entry = catalog_get(id).map_err(|e| core_at(*bp, e))?;
        if let Some((v, _)) = &over {
            if **v != *entry.vocab {
                return Err(CliError::Resolve {
                    line: bp.line,
                    column: bp.column,
                    message: format!("builtin `{id}` is over a different vocabulary"),
                });
            }
        }
        let theory = match over {
            Some((_, t)) if !t.is_empty() => t,
            _ => entry.theory.clone(),
        };
        return Ok(MerDecl {
            name: name.to_string(),
            pos,
            spec: entry.builtin(),
            theory,
        });
    }

    let Some((vocab, theory)) = over else {
        return Err(syntax(pos, format!("mer `{name}` needs `over VOCAB`")));
    };
    let sig = match &coupled {
        None => CoupledSignature::all(vocab.clone()),
        Some((names, cp)) => {
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            CoupledSignature::new(vocab.clone(), &refs).map_err(|e| core_at(*cp, e))?
        }
    };
    let texts = |v: &[(String, Pos)]| v.iter().map(|(s, _)| s.clone()).collect::<Vec<_>>();
    let first = |v: &[(String, Pos)]| v.first().map_or(pos, |(_, p)| *p);
    let spec = if let Some((text, sp)) = &c.sentence {
        Mer::sentence(sig, text).map_err(|e| core_at(*sp, e))?
    } else if !c.reduct.is_empty() {
        let t = texts(&c.reduct);
        let refs: Vec<&str> = t.iter().map(String::as_str).collect();
        Mer::reduct(sig, &refs).map_err(|e| core_at(first(&c.reduct), e))?
    } else if let Some((order, op)) = &c.order {
        let [(family, _)] = c.family.as_slice() else {
            return Err(syntax(*op, "a cofinal mer needs exactly one `family`"));
        };
        Mer::cofinal(sig, order, family).map_err(|e| core_at(*op, e))?
    } else if !c.family.is_empty() {
        let t = texts(&c.family);
        let refs: Vec<&str> = t.iter().map(String::as_str).collect();
        Mer::tower(sig, &refs).map_err(|e| core_at(first(&c.family), e))?
    } else if let Some((metric, mp)) = c.metric {
        let eps = c.eps.ok_or_else(|| syntax(mp, "`approx` needs `eps`"))?;
        let t = texts(&c.labels);
        let refs: Vec<&str> = t.iter().map(String::as_str).collect();
        Mer::approx(sig, &refs, metric, eps).map_err(|e| core_at(first(&c.labels), e))?
    } else {
        return Err(syntax(pos, format!("mer `{name}` has no definition")));
    };
    Ok(MerDecl {
        name: name.to_string(),
        pos,
        spec,
        theory,
    })
}

fn mer_clauses(p: &mut Parser, base: Option<&Path>) -> Result<MerClauses, CliError> {
    let mut c = MerClauses::default();
    let mut last = "";
    p.punct('{')?;
    while !p.eat('}') {
        if let Some(Tok::Str(_)) = p.peek() {
            let item = p.string("a formula")?;
            match last {
                "reduct" => c.reduct.push(item),
                "labels" => c.labels.push(item),
                "family" => c.family.push(item),
                _ => return Err(syntax(item.1, "a formula needs a clause keyword")),
            }
            p.punct(';')?;
            continue;
        }
        let (kw, pos) = p.ident("a mer clause")?;
        match kw.as_str() {
            "sentence" => c.sentence = Some(p.string("a pair sentence")?),
            "reduct" | "labels" | "family" => {
                loop {
                    let item = p.string("a formula")?;
                    match kw.as_str() {
                        "reduct" => c.reduct.push(item),
                        "labels" => c.labels.push(item),
                        _ => c.family.push(item),
                    }
                    if !p.eat(',') {
                        break;
                    }
                }
                last = match kw.as_str() {
                    "reduct" => "reduct",
                    "labels" => "labels",
                    _ => "family",
                };
                p.punct(';')?;
                continue;
            }
            "order" => c.order = Some(p.string("an order formula")?),
            "builtin" => c.builtin = Some(p.ident("a catalog id")?),
            "approx" => {
                if !p.keyword("metric") {
                    return Err(syntax(p.pos(), "expected `metric`"));
                }
                let metric = if p.keyword("discrete") {
                    p.punct('(')?;
                    let n = p.usize("a point count")?;
                    p.punct(')')?;
                    FiniteMetric::discrete(n)
                } else {
                    let (file, fp) = p.string("a metric file")?;
                    let path = base.map_or_else(|| PathBuf::from(&file), |b| b.join(&file));
                    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io {
                        path: path.display().to_string(),
                        message: e.to_string(),
                    })?;
                    FiniteMetric::parse(&text).map_err(|e| core_at(fp, e))?
                };
                c.metric = Some((metric, pos));
                if !p.keyword("eps") {
                    return Err(syntax(p.pos(), "expected `eps`"));
                }
                let (eps, ep) = match p.next("a threshold")? {
                    (Tok::Num(s) | Tok::Str(s), ep) => (s, ep),
                    (t, ep) => return Err(syntax(ep, format!("expected a threshold, found {t}"))),
                };
                c.eps = Some(Rational::parse_scalar(&eps).map_err(|e| core_at(ep, e))?);
            }
            other => return Err(syntax(pos, format!("unknown mer clause `{other}`"))),
        }
        last = "";
        p.punct(';')?;
    }
    Ok(c)
}
