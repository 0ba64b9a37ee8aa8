//! A bounded interpreter for LD-resolution, used to observe concrete calls
//! and successes and to check analysis results against them.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::engine::analysis_signature;
use crate::grammar::{GrammarError, GrammarVar, TermGrammar};
use crate::term::{Atom, Clause, FunctionSymbol, Program, Signature, Term};

/// Calls and successes seen during bounded derivations, up to variable renaming.
#[derive(Clone, Default, Debug, PartialEq, Eq)]
pub struct DerivationObservation {
    pub calls: BTreeSet<Atom>,
    pub successes: BTreeSet<Atom>,
    /// Some branch hit the step bound.
    pub truncated: bool,
}

type Subst = BTreeMap<Arc<str>, Term>;

fn walk<'a>(t: &'a Term, s: &'a Subst) -> &'a Term {
    let mut t = t;
    while let Term::Var(v) = t {
        match s.get(v) {
            Some(u) => t = u,
            None => break,
        }
    }
    t
}

fn resolve(t: &Term, s: &Subst) -> Term {
    match walk(t, s) {
        Term::Var(v) => Term::Var(v.clone()),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| resolve(a, s)).collect()),
    }
}

fn occurs(v: &str, t: &Term, s: &Subst) -> bool {
    match walk(t, s) {
        Term::Var(w) => &**w == v,
        Term::App(_, args) => args.iter().any(|a| occurs(v, a, s)),
    }
}

fn unify(a: &Term, b: &Term, s: &mut Subst) -> bool {
    let (a, b) = (walk(a, s).clone(), walk(b, s).clone());
    match (&a, &b) {
        (Term::Var(x), Term::Var(y)) if x == y => true,
        (Term::Var(x), t) | (t, Term::Var(x)) => {
            if occurs(x, t, s) {
                return false;
            }
            s.insert(x.clone(), t.clone());
            true
        }
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g && xs.iter().zip(ys).all(|(x, y)| unify(x, y, s))
        }
    }
}

fn resolve_atom(a: &Atom, s: &Subst) -> Atom {
    Atom {
        predicate: a.predicate.clone(),
        args: a.args.iter().map(|t| resolve(t, s)).collect(),
    }
}

/// Renames variables to `_0, _1, ...` in order of first occurrence.
pub fn canonicalize(a: &Atom) -> Atom {
    fn go(t: &Term, map: &mut BTreeMap<Arc<str>, Arc<str>>) -> Term {
        match t {
            Term::Var(v) => {
                let n = map.len();
                Term::Var(map.entry(v.clone()).or_insert_with(|| Arc::from(format!("_{n}"))).clone())
            }
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| go(a, map)).collect()),
        }
    }
    let mut map = BTreeMap::new();
    Atom {
        predicate: a.predicate.clone(),
        args: a.args.iter().map(|t| go(t, &mut map)).collect(),
    }
}

fn rename_term(t: &Term, suffix: &str) -> Term {
    match t {
        Term::Var(v) => Term::Var(Arc::from(format!("{v}#{suffix}"))),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| rename_term(a, suffix)).collect()),
    }
}

fn rename_atom(a: &Atom, suffix: &str) -> Atom {
    Atom {
        predicate: a.predicate.clone(),
        args: a.args.iter().map(|t| rename_term(t, suffix)).collect(),
    }
}

#[derive(Clone)]
enum Item {
    Call(Atom),
    /// Marks the end of the body of a call; reaching it means the call succeeded.
    Done(Atom),
}

struct Interp<'a> {
    by_pred: BTreeMap<&'a FunctionSymbol, Vec<&'a Clause>>,
    program: &'a Program,
    builtin: &'a TermGrammar,
    sig: &'a Signature,
    max_steps: usize,
    fresh: usize,
    obs: DerivationObservation,
}

impl Interp<'_> {
    fn builtin_succeeds(&self, a: &Atom) -> bool {
        self.builtin
            .member_all_instances(&a.to_term(), GrammarVar::SU, self.sig)
    }

    fn solve(&mut self, goals: Vec<Item>, s: Subst, steps: usize) {
        let mut goals = goals;
        let Some(first) = goals.pop() else { return };
        match first {
            Item::Done(a) => {
                self.obs.successes.insert(canonicalize(&resolve_atom(&a, &s)));
                self.solve(goals, s, steps);
            }
            Item::Call(a) => {
                let call = resolve_atom(&a, &s);
                self.obs.calls.insert(canonicalize(&call));
                if steps >= self.max_steps {
                    self.obs.truncated = true;
                    return;
                }
                if self.program.is_constraint(&call.predicate) {
                    if self.builtin_succeeds(&call) {
                        self.obs.successes.insert(canonicalize(&call));
                        self.solve(goals, s, steps + 1);
                    }
                    return;
                }
                let clauses = self.by_pred.get(&call.predicate).cloned().unwrap_or_default();
                for c in clauses {
                    self.fresh += 1;
                    let suffix = self.fresh.to_string();
                    let head = rename_atom(&c.head, &suffix);
                    let mut s2 = s.clone();
                    let ok = head
                        .args
                        .iter()
                        .zip(&call.args)
                        .all(|(h, t)| unify(h, t, &mut s2));
                    if !ok {
                        continue;
                    }
                    let mut next = goals.clone();
                    next.push(Item::Done(call.clone()));
                    for b in c.body.iter().rev() {
                        next.push(Item::Call(rename_atom(b, &suffix)));
                    }
                    self.solve(next, s2, steps + 1);
                }
            }
        }
    }
}

/// Explores every LD-derivation of `goal` up to `max_steps` resolution steps.
/// Constraint predicates succeed without binding when all instances of the
/// call lie in the `Su` part of `builtin`.
pub fn run_bounded(
    p: &Program,
    goal: &Atom,
    max_steps: usize,
    builtin: &TermGrammar,
    sig: &Signature,
) -> DerivationObservation {
    let mut interp = Interp {
        by_pred: p.clauses_by_pred(),
        program: p,
        builtin,
        sig,
        max_steps,
        fresh: 0,
        obs: DerivationObservation::default(),
    };
    interp.solve(vec![Item::Call(goal.clone())], Subst::new(), 0);
    interp.obs
}

/// An observed atom the analysis result does not cover.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub goal: Atom,
    pub atom: Atom,
    pub is_call: bool,
}

#[derive(Clone, Debug, Default)]
pub struct SoundnessOutcome {
    pub goals: usize,
    pub calls: usize,
    pub successes: usize,
    pub truncated: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl SoundnessOutcome {
    pub fn is_sound(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Runs every goal of `g0`'s call set up to `goal_depth` and checks each
/// observed call and success against `result`.
pub fn soundness_suite(
    p: &Program,
    g0: &TermGrammar,
    result: &TermGrammar,
    goal_depth: usize,
    max_steps: usize,
) -> Result<SoundnessOutcome, GrammarError> {
    let sig = analysis_signature(p, g0);
    let g0n = g0.normalize();
    let goals = g0n.enumerate(GrammarVar::CA, goal_depth)?;
    let mut out = SoundnessOutcome::default();
    for t in goals {
        let Some(goal) = Atom::from_term(&t) else { continue };
        if !p.predicates().contains(&goal.predicate) {
            continue;
        }
        out.goals += 1;
        let obs = run_bounded(p, &goal, max_steps, &g0n, &sig);
        out.truncated += usize::from(obs.truncated);
        out.calls += obs.calls.len();
        out.successes += obs.successes.len();
        for (set, root, is_call) in [
            (&obs.calls, GrammarVar::CA, true),
            (&obs.successes, GrammarVar::SU, false),
        ] {
            for a in set {
                if !result.member_all_instances(&a.to_term(), root, &sig) {
                    out.counterexamples.push(Counterexample {
                        goal: goal.clone(),
                        atom: a.clone(),
                        is_call,
                    });
                }
            }
        }
    }
    Ok(out)
}
