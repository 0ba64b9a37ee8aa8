//! Per-clause grammar construction.
//!
//! For a clause `H :- B1, ..., Bn` and the current grammar, each implication
//! "if `H` is a call and `B1..B(l-1)` succeeded then `Bl` is a call" (and the
//! final one concluding that `H` succeeds) is turned into a small grammar
//! holding one new `Ca` or `Su` rule.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::grammar::{GrammarVar, Overlay, RuleStore, RuleView, TermGrammar};
use crate::term::{Atom, Clause, FunctionSymbol, Signature, Term};

/// Clause variable to grammar variable.
pub type Binding = BTreeMap<Arc<str>, GrammarVar>;

/// Which conclusion an implication of a clause draws.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum Implication {
    /// The body atom at this (0-based) position is called.
    Call(usize),
    /// The head succeeds.
    Success,
}

impl Implication {
    /// All implications of `clause`: one call per body atom, then the success.
    pub fn all(clause: &Clause) -> impl Iterator<Item = Implication> {
        (0..clause.body.len())
            .map(Implication::Call)
            .chain(std::iter::once(Implication::Success))
    }

    /// 1-based index `j`; the success implication is `n + 1`.
    pub fn index(self, clause: &Clause) -> usize {
        match self {
            Implication::Call(l) => l + 1,
            Implication::Success => clause.body.len() + 1,
        }
    }

    pub fn from_index(j: usize, clause: &Clause) -> Option<Implication> {
        let n = clause.body.len();
        match j {
            0 => None,
            j if j <= n => Some(Implication::Call(j - 1)),
            j if j == n + 1 => Some(Implication::Success),
            _ => None,
        }
    }
}

/// The grammar one implication adds: a single `Ca` or `Su` rule plus the
/// fresh variables it needs. Shares only `Ca` and `Su` with anything else.
#[derive(Clone, Debug)]
pub struct Contribution {
    pub grammar: TermGrammar,
    pub clause: usize,
    pub implication: Implication,
}

impl Contribution {
    pub fn root(&self) -> GrammarVar {
        match self.implication {
            Implication::Call(_) => GrammarVar::CA,
            Implication::Success => GrammarVar::SU,
        }
    }
}

impl fmt::Display for Contribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.grammar.display_names();
        let root = self.root();
        for (sym, cs) in self.grammar.rules_or_empty(root) {
            write!(f, "{} > {}", names[&root], sym.name())?;
            if !cs.is_empty() {
                let kids: Vec<&str> = cs.iter().map(|c| names[c].as_str()).collect();
                write!(f, "({})", kids.join(", "))?;
            }
        }
        Ok(())
    }
}

/// Matches `t` against `x`, refining `env`. `None` when the match fails or
/// some variable would denote the empty set; `env` is left untouched then.
pub fn match_term(t: &Term, x: GrammarVar, env: &Binding, ws: &mut Overlay) -> Option<Binding> {
    let mut out = env.clone();
    match_into(t, x, &mut out, ws).then_some(out)
}

fn match_into(t: &Term, x: GrammarVar, env: &mut Binding, ws: &mut Overlay) -> bool {
    match t {
        Term::Var(v) => {
            let bound = match env.get(v) {
                None => x,
                Some(&prev) => ws.intersect(prev, x),
            };
            if ws.is_empty(bound) {
                return false;
            }
            env.insert(v.clone(), bound);
            true
        }
        Term::App(f, args) => {
            let Some(children) = ws.rules_or_empty(x).get(f).cloned() else {
                return false;
            };
            args.iter()
                .zip(children)
                .all(|(a, c)| match_into(a, c, env, ws))
        }
    }
}

fn match_atom(atom: &Atom, root: GrammarVar, env: &mut Binding, ws: &mut Overlay) -> bool {
    let Some(children) = ws.rules_or_empty(root).get(&atom.predicate).cloned() else {
        return false;
    };
    atom.args
        .iter()
        .zip(children)
        .all(|(a, c)| match_into(a, c, env, ws))
}

/// The grammar variable for `t` under `env`. Unbound variables denote `any`;
/// repeated variables share one grammar variable.
pub fn build_term(t: &Term, env: &Binding, ws: &mut Overlay, any: GrammarVar) -> GrammarVar {
    match t {
        Term::Var(v) => env.get(v).copied().unwrap_or(any),
        Term::App(f, args) => {
            let children = args.iter().map(|a| build_term(a, env, ws, any)).collect();
            let v = ws.fresh();
            ws.define(v, [(f.clone(), children)].into_iter().collect());
            v
        }
    }
}

/// Builds the contribution of one implication of `clause` against the
/// normalized grammar `g`. `None` means the implication holds vacuously:
/// `g` has no call rule for the head, no success rule for a premise, or a
/// binding became empty.
pub fn solve_clause(
    clause: &Clause,
    clause_id: usize,
    implication: Implication,
    g: &TermGrammar,
    sig: &Signature,
) -> Option<Contribution> {
    let mut ws = Overlay::new(g);
    let mut env = Binding::new();
    if !match_atom(&clause.head, GrammarVar::CA, &mut env, &mut ws) {
        return None;
    }
    let premises = match implication {
        Implication::Call(l) => &clause.body[..l],
        Implication::Success => &clause.body[..],
    };
    for b in premises {
        if !match_atom(b, GrammarVar::SU, &mut env, &mut ws) {
            return None;
        }
    }
    let any = ws.add_universal(sig);
    let (root, atom): (GrammarVar, &Atom) = match implication {
        Implication::Call(l) => (GrammarVar::CA, &clause.body[l]),
        Implication::Success => (GrammarVar::SU, &clause.head),
    };
    let children: Vec<GrammarVar> = atom
        .args
        .iter()
        .map(|a| build_term(a, &env, &mut ws, any))
        .collect();
    let symbol: FunctionSymbol = atom.predicate.clone();
    Some(Contribution {
        grammar: ws.extract(&[(root, symbol, children)]),
        clause: clause_id,
        implication,
    })
}
