//! Tarskian satisfaction over anything that looks like a (pair of) finite
//! structure(s).

use super::formula::{Formula, Side, Var};
use super::structure::FiniteStructure;
use super::vocab::{RelId, SortId};
use crate::error::{Error, Result};

/// Read access to the universes and relations a formula is evaluated in.
pub trait Interpretation {
    fn universe(&self, sort: SortId, side: Side) -> usize;
    fn holds(&self, rel: RelId, side: Side, tuple: &[u32]) -> bool;
    fn link(&self, _sort: SortId, _a: u32) -> Option<u32> {
        None
    }
}

impl Interpretation for FiniteStructure {
    fn universe(&self, sort: SortId, _side: Side) -> usize {
        self.size(sort)
    }

    fn holds(&self, rel: RelId, _side: Side, tuple: &[u32]) -> bool {
        FiniteStructure::holds(self, rel, tuple)
    }
}

const MAX_ARITY: usize = 16;

#[derive(Debug, Clone)]
enum Node {
    Const(bool),
    Atom {
        rel: RelId,
        side: Side,
        args: Vec<usize>,
    },
    Eq(usize, usize),
    Link {
        sort: SortId,
        left: usize,
        right: usize,
    },
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Implies(Box<Node>, Box<Node>),
    Iff(Box<Node>, Box<Node>),
    Quant {
        forall: bool,
        slot: usize,
        sort: SortId,
        side: Side,
        body: Box<Node>,
    },
}

/// A formula with variables resolved to environment slots. Free variables
/// occupy slots `0..free.len()` in the order given at compile time.
#[derive(Debug, Clone)]
pub struct Compiled {
    node: Node,
    free: Vec<Var>,
    slots: usize,
}

impl Compiled {
    pub fn new(f: &Formula, free: &[Var]) -> Result<Self> {
        let mut scope: Vec<Var> = free.to_vec();
        let mut slots = scope.len();
        let node = compile(f, &mut scope, &mut slots)?;
        Ok(Compiled {
            node,
            free: free.to_vec(),
            slots,
        })
    }

    /// Compiles with the formula's own free variables in first-use order.
    pub fn closed_over(f: &Formula) -> Result<Self> {
        Self::new(f, &f.free_vars())
    }

    pub fn free(&self) -> &[Var] {
        &self.free
    }

    /// Scratch environment large enough for every bound variable.
    pub fn env(&self) -> Vec<u32> {
        vec![0; self.slots]
    }

    /// Evaluates with the free slots of `env` already filled in.
    pub fn eval<I: Interpretation + ?Sized>(&self, m: &I, env: &mut [u32]) -> bool {
        debug_assert!(env.len() >= self.slots);
        run(&self.node, m, env)
    }

    /// Evaluates at the given free-variable values.
    pub fn eval_at<I: Interpretation + ?Sized>(&self, m: &I, values: &[u32]) -> bool {
        let mut env = self.env();
        env[..values.len()].copy_from_slice(values);
        run(&self.node, m, &mut env)
    }

    pub fn holds_in<I: Interpretation + ?Sized>(&self, m: &I) -> bool {
        self.eval_at(m, &[])
    }
}

fn slot_of(scope: &[Var], v: &Var) -> Result<usize> {
    scope
        .iter()
        .rposition(|s| s.name == v.name)
        .filter(|&i| scope[i].sort == v.sort && scope[i].side == v.side)
        .ok_or_else(|| Error::Unbound(v.name.clone()))
}

fn compile(f: &Formula, scope: &mut Vec<Var>, slots: &mut usize) -> Result<Node> {
    let bin = |a: &Formula,
               b: &Formula,
               scope: &mut Vec<Var>,
               slots: &mut usize|
     -> Result<(Box<Node>, Box<Node>)> {
        Ok((
            Box::new(compile(a, scope, slots)?),
            Box::new(compile(b, scope, slots)?),
        ))
    };
    Ok(match f {
        Formula::Const(b) => Node::Const(*b),
        Formula::Atom { rel, side, args } => {
            if args.len() > MAX_ARITY {
                return Err(Error::Unsupported(format!("arity above {MAX_ARITY}")));
            }
            Node::Atom {
                rel: *rel,
                side: *side,
                args: args
                    .iter()
                    .map(|v| slot_of(scope, v))
                    .collect::<Result<_>>()?,
            }
        }
        Formula::Eq(a, b) => Node::Eq(slot_of(scope, a)?, slot_of(scope, b)?),
        Formula::Link { sort, left, right } => Node::Link {
            sort: *sort,
            left: slot_of(scope, left)?,
            right: slot_of(scope, right)?,
        },
        Formula::Not(a) => Node::Not(Box::new(compile(a, scope, slots)?)),
        Formula::And(a, b) => {
            let (a, b) = bin(a, b, scope, slots)?;
            Node::And(a, b)
        }
        Formula::Or(a, b) => {
            let (a, b) = bin(a, b, scope, slots)?;
            Node::Or(a, b)
        }
        Formula::Implies(a, b) => {
            let (a, b) = bin(a, b, scope, slots)?;
            Node::Implies(a, b)
        }
        Formula::Iff(a, b) => {
            let (a, b) = bin(a, b, scope, slots)?;
            Node::Iff(a, b)
        }
        Formula::Forall(v, body) | Formula::Exists(v, body) => {
            let slot = scope.len();
            scope.push(v.clone());
            *slots = (*slots).max(scope.len());
            let body = compile(body, scope, slots);
            scope.pop();
            Node::Quant {
                forall: matches!(f, Formula::Forall(..)),
                slot,
                sort: v.sort,
                side: v.side,
                body: Box::new(body?),
            }
        }
    })
}

fn run<I: Interpretation + ?Sized>(n: &Node, m: &I, env: &mut [u32]) -> bool {
    match n {
        Node::Const(b) => *b,
        Node::Atom { rel, side, args } => {
            let mut buf = [0u32; MAX_ARITY];
            for (i, &s) in args.iter().enumerate() {
                buf[i] = env[s];
            }
            m.holds(*rel, *side, &buf[..args.len()])
        }
        Node::Eq(a, b) => env[*a] == env[*b],
        Node::Link { sort, left, right } => m.link(*sort, env[*left]) == Some(env[*right]),
        Node::Not(a) => !run(a, m, env),
        Node::And(a, b) => run(a, m, env) && run(b, m, env),
        Node::Or(a, b) => run(a, m, env) || run(b, m, env),
        Node::Implies(a, b) => !run(a, m, env) || run(b, m, env),
        Node::Iff(a, b) => run(a, m, env) == run(b, m, env),
        Node::Quant {
            forall,
            slot,
            sort,
            side,
            body,
        } => {
            let n = m.universe(*sort, *side) as u32;
            for v in 0..n {
                env[*slot] = v;
                if run(body, m, env) != *forall {
                    return !*forall;
                }
            }
            *forall
        }
    }
}

/// Evaluates `phi` in `m` under `env`, which must assign exactly the free
/// variables of `phi`.
pub fn evaluate<I: Interpretation + ?Sized>(
    phi: &Formula,
    m: &I,
    env: &[(Var, u32)],
) -> Result<bool> {
    let free = phi.free_vars();
    let mut values = Vec::with_capacity(free.len());
    for v in &free {
        let Some((bound, value)) = env.iter().find(|(w, _)| w.name == v.name) else {
            return Err(Error::Unbound(v.name.clone()));
        };
        if bound.sort != v.sort || bound.side != v.side {
            return Err(Error::SortMismatch(format!(
                "assignment to `{}` has the wrong sort",
                v.name
            )));
        }
        if *value as usize >= m.universe(v.sort, v.side) {
            return Err(Error::SortMismatch(format!(
                "value {value} for `{}` is outside its universe",
                v.name
            )));
        }
        values.push(*value);
    }
    Ok(Compiled::new(phi, &free)?.eval_at(m, &values))
}

/// Checks every sentence in `m`.
pub fn satisfies_all(m: &FiniteStructure, sentences: &[Compiled]) -> bool {
    sentences.iter().all(|s| s.holds_in(m))
}
