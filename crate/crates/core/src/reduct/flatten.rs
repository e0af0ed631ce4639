//! Rewriting a two-level tower into a single base-language 2-set.

use super::nset::{nset_value, NSetValue, PartitionedFormula};
use super::shelah::ShelahVocab;
use crate::error::{Error, Result};
use crate::logic::formula::{Formula, Language, NameSupply, Var};
use crate::logic::structure::FiniteStructure;

/// Flattens the tower `level1` followed by the definable set `level2` over
/// the Shelahization of `level1` (one free imaginary variable, any number
/// of free base variables).
///
/// With `level1 = [p ; y] φ1(p, y)` and `level2 = φ2(o, x)` the result is
/// `[p ; y, x] φ1(p, y) & φ2*(p, x)`, where `φ2*` reads `C_F(o, z)` as
/// `φ1(p, z)`, quantifiers over the imaginary sort as quantifiers over
/// parameters, and imaginary equality as equality of member sets. Agreement
/// on the level-1 2-set together with agreement on this 2-set is the tower
/// equivalence, provided `φ2` does not distinguish the empty member set by
/// relations of the base; other shapes are rejected.
pub fn flatten_2ydlept(
    level1: &PartitionedFormula,
    level2: &Formula,
) -> Result<PartitionedFormula> {
    if level1.depth() != 2 {
        return Err(Error::Validation("level 1 must have two blocks".into()));
    }
    let sv = ShelahVocab::for_family(level1, "")?;
    let free = level2.free_vars();
    Language::single(sv.vocab.clone()).validate(level2, &free)?;
    let imaginary: Vec<&Var> = free.iter().filter(|v| v.sort == sv.sort).collect();
    if imaginary.len() != 1 {
        return Err(Error::Unsupported(format!(
            "level 2 must have exactly one free variable of sort `S_F`, found {}",
            imaginary.len()
        )));
    }
    let o = imaginary[0].clone();
    let base_free: Vec<Var> = free.iter().filter(|v| v.sort != sv.sort).cloned().collect();

    if let Formula::Atom { rel, args, .. } = level2 {
        let member_vars = &level1.blocks()[1];
        if *rel == sv.rel
            && args[0] == o
            && args[1..]
                .iter()
                .zip(member_vars)
                .all(|(a, b)| a.sort == b.sort)
        {
            let distinct = args[1..]
                .iter()
                .enumerate()
                .all(|(i, a)| !args[1..i + 1].contains(a));
            if distinct {
                return Ok(level1.clone());
            }
        }
    }

    let empty = empty_member_case(level2, &sv);
    if mentions_relation(&fold(&empty)) {
        return Err(Error::Unsupported(
            "level 2 distinguishes the empty member set using base relations".into(),
        ));
    }

    let mut names = NameSupply::new(
        level2
            .var_names()
            .into_iter()
            .chain(level1.formula().var_names()),
    );
    let params: Vec<Var> = level1.blocks()[0]
        .iter()
        .map(|v| Var {
            name: names.fresh(&v.name),
            ..v.clone()
        })
        .collect();
    let members: Vec<Var> = level1.blocks()[1]
        .iter()
        .map(|v| Var {
            name: names.fresh(&v.name),
            ..v.clone()
        })
        .collect();
    let cx = Ctx { level1, sv: &sv };
    let head = cx.instance(&params, &members, &mut names);
    let mut env = vec![(o.name.clone(), params.clone())];
    let tail = cx.translate(level2, &mut env, &mut names)?;
    let mut blocks = vec![params, members];
    blocks[1].extend(base_free);
    PartitionedFormula::new(level1.vocab().clone(), Formula::and(head, tail), blocks)
}

struct Ctx<'a> {
    level1: &'a PartitionedFormula,
    sv: &'a ShelahVocab,
}

impl Ctx<'_> {
    /// `φ1(params, members)` with its bound variables renamed apart.
    fn instance(&self, params: &[Var], members: &[Var], names: &mut NameSupply) -> Formula {
        let b = self.level1.blocks();
        let map: Vec<(String, Var)> = b[0]
            .iter()
            .zip(params)
            .chain(b[1].iter().zip(members))
            .map(|(from, to)| (from.name.clone(), to.clone()))
            .collect();
        self.level1.formula().substitute(&map, names)
    }

    fn fresh_params(&self, names: &mut NameSupply) -> Vec<Var> {
        self.level1.blocks()[0]
            .iter()
            .map(|v| Var {
                name: names.fresh(&v.name),
                ..v.clone()
            })
            .collect()
    }

    fn fresh_members(&self, names: &mut NameSupply) -> Vec<Var> {
        self.level1.blocks()[1]
            .iter()
            .map(|v| Var {
                name: names.fresh(&v.name),
                ..v.clone()
            })
            .collect()
    }

    fn params_of(&self, v: &Var, env: &[(String, Vec<Var>)]) -> Result<Vec<Var>> {
        env.iter()
            .rev()
            .find(|(n, _)| *n == v.name)
            .map(|(_, p)| p.clone())
            .ok_or_else(|| Error::Unbound(v.name.clone()))
    }

    fn translate(
        &self,
        f: &Formula,
        env: &mut Vec<(String, Vec<Var>)>,
        names: &mut NameSupply,
    ) -> Result<Formula> {
        let is_imag = |v: &Var| v.sort == self.sv.sort;
        Ok(match f {
            Formula::Const(b) => Formula::Const(*b),
            Formula::Atom { rel, args, .. } if *rel == self.sv.rel => {
                let params = self.params_of(&args[0], env)?;
                self.instance(&params, &args[1..], names)
            }
            Formula::Atom { .. } | Formula::Link { .. } => f.clone(),
            Formula::Eq(a, b) if is_imag(a) => {
                let pa = self.params_of(a, env)?;
                let pb = self.params_of(b, env)?;
                let ys = self.fresh_members(names);
                let lhs = self.instance(&pa, &ys, names);
                let rhs = self.instance(&pb, &ys, names);
                Formula::forall_all(&ys, Formula::iff(lhs, rhs))
            }
            Formula::Eq(..) => f.clone(),
            Formula::Not(a) => Formula::not(self.translate(a, env, names)?),
            Formula::And(a, b) => Formula::and(
                self.translate(a, env, names)?,
                self.translate(b, env, names)?,
            ),
            Formula::Or(a, b) => Formula::or(
                self.translate(a, env, names)?,
                self.translate(b, env, names)?,
            ),
            Formula::Implies(a, b) => Formula::implies(
                self.translate(a, env, names)?,
                self.translate(b, env, names)?,
            ),
            Formula::Iff(a, b) => Formula::iff(
                self.translate(a, env, names)?,
                self.translate(b, env, names)?,
            ),
            Formula::Forall(v, body) | Formula::Exists(v, body) if is_imag(v) => {
                let params = self.fresh_params(names);
                env.push((v.name.clone(), params.clone()));
                let body = self.translate(body, env, names);
                env.pop();
                let body = body?;
                if matches!(f, Formula::Forall(..)) {
                    Formula::forall_all(&params, body)
                } else {
                    Formula::exists_all(&params, body)
                }
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                // Shadowing an imaginary name with a base variable.
                env.push((v.name.clone(), Vec::new()));
                let body = self.translate(body, env, names);
                env.pop();
                let body = body?;
                if matches!(f, Formula::Forall(..)) {
                    Formula::forall(v.clone(), body)
                } else {
                    Formula::exists(v.clone(), body)
                }
            }
        })
    }
}

/// `φ2` evaluated at the empty member set: every `C_F` atom made false.
fn empty_member_case(f: &Formula, sv: &ShelahVocab) -> Formula {
    match f {
        Formula::Atom { rel, .. } if *rel == sv.rel => Formula::Const(false),
        Formula::Const(_) | Formula::Atom { .. } | Formula::Eq(..) | Formula::Link { .. } => {
            f.clone()
        }
        Formula::Not(a) => Formula::not(empty_member_case(a, sv)),
        Formula::And(a, b) => Formula::and(empty_member_case(a, sv), empty_member_case(b, sv)),
        Formula::Or(a, b) => Formula::or(empty_member_case(a, sv), empty_member_case(b, sv)),
        Formula::Implies(a, b) => {
            Formula::implies(empty_member_case(a, sv), empty_member_case(b, sv))
        }
        Formula::Iff(a, b) => Formula::iff(empty_member_case(a, sv), empty_member_case(b, sv)),
        Formula::Forall(v, b) => Formula::forall(v.clone(), empty_member_case(b, sv)),
        Formula::Exists(v, b) => Formula::exists(v.clone(), empty_member_case(b, sv)),
    }
}

/// Folds constants through connectives and vacuous quantifiers.
fn fold(f: &Formula) -> Formula {
    use Formula::Const;
    match f {
        Formula::Not(a) => match fold(a) {
            Const(b) => Const(!b),
            a => Formula::not(a),
        },
        Formula::And(a, b) => match (fold(a), fold(b)) {
            (Const(false), _) | (_, Const(false)) => Const(false),
            (Const(true), x) | (x, Const(true)) => x,
            (a, b) => Formula::and(a, b),
        },
        Formula::Or(a, b) => match (fold(a), fold(b)) {
            (Const(true), _) | (_, Const(true)) => Const(true),
            (Const(false), x) | (x, Const(false)) => x,
            (a, b) => Formula::or(a, b),
        },
        Formula::Implies(a, b) => fold(&Formula::or(Formula::not((**a).clone()), (**b).clone())),
        Formula::Iff(a, b) => match (fold(a), fold(b)) {
            (Const(x), Const(y)) => Const(x == y),
            (Const(true), x) | (x, Const(true)) => x,
            (Const(false), x) | (x, Const(false)) => fold(&Formula::not(x)),
            (a, b) => Formula::iff(a, b),
        },
        Formula::Forall(v, body) => match fold(body) {
            Const(true) => Const(true),
            b => Formula::forall(v.clone(), b),
        },
        Formula::Exists(v, body) => match fold(body) {
            Const(false) => Const(false),
            b => Formula::exists(v.clone(), b),
        },
        _ => f.clone(),
    }
}

fn mentions_relation(f: &Formula) -> bool {
    match f {
        Formula::Const(_) | Formula::Eq(..) => false,
        Formula::Atom { .. } | Formula::Link { .. } => true,
        Formula::Not(a) => mentions_relation(a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            mentions_relation(a) || mentions_relation(b)
        }
        Formula::Forall(_, b) | Formula::Exists(_, b) => mentions_relation(b),
    }
}

/// The data compared by the flattened form: the level-1 2-set and the
/// flattened 2-set.
pub fn flat_key(
    m: &FiniteStructure,
    level1: &PartitionedFormula,
    flat: &PartitionedFormula,
) -> (NSetValue, NSetValue) {
    (nset_value(m, level1), nset_value(m, flat))
}
