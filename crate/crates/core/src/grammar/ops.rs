//! Semantic queries on grammars: emptiness, membership, inclusion, enumeration.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::{reachable, GrammarError, GrammarVar, RuleView, TermGrammar, DEFAULT_ENUMERATION_CAP};
use crate::term::{Signature, Term};

/// Least fixpoint of productive variables among `vars`.
///
/// `known` short-circuits variables already known to be nonempty.
pub(crate) fn productive(
    view: &impl RuleView,
    vars: &BTreeSet<GrammarVar>,
    known: impl Fn(GrammarVar) -> bool,
) -> BTreeSet<GrammarVar> {
    let mut prod: BTreeSet<GrammarVar> = BTreeSet::new();
    let mut queue: Vec<GrammarVar> = Vec::new();
    // rule index -> (lhs, number of children not yet productive)
    let mut pending: Vec<(GrammarVar, usize)> = Vec::new();
    let mut waiting: BTreeMap<GrammarVar, Vec<usize>> = BTreeMap::new();

    for &x in vars {
        if known(x) {
            if prod.insert(x) {
                queue.push(x);
            }
            continue;
        }
        for cs in view.rules_or_empty(x).values() {
            let distinct: BTreeSet<GrammarVar> = cs.iter().copied().collect();
            if distinct.is_empty() {
                if prod.insert(x) {
                    queue.push(x);
                }
                continue;
            }
            let idx = pending.len();
            pending.push((x, distinct.len()));
            for c in distinct {
                waiting.entry(c).or_default().push(idx);
            }
        }
    }
    while let Some(y) = queue.pop() {
        let Some(rules) = waiting.remove(&y) else {
            continue;
        };
        for idx in rules {
            let (lhs, count) = &mut pending[idx];
            *count -= 1;
            if *count == 0 && prod.insert(*lhs) {
                queue.push(*lhs);
            }
        }
    }
    prod
}

/// Shortest (then symbol-order least) term of each variable reachable from `roots`.
pub(crate) fn min_terms(view: &impl RuleView, roots: &[GrammarVar]) -> BTreeMap<GrammarVar, Term> {
    let vars = reachable(view, roots);
    let mut best: BTreeMap<GrammarVar, Term> = BTreeMap::new();
    loop {
        let mut round: Vec<(GrammarVar, Term)> = Vec::new();
        for &x in &vars {
            if best.contains_key(&x) {
                continue;
            }
            for (f, cs) in view.rules_or_empty(x) {
                if cs.iter().all(|c| best.contains_key(c)) {
                    let args = cs.iter().map(|c| best[c].clone()).collect();
                    round.push((x, Term::App(f.clone(), args)));
                    break;
                }
            }
        }
        if round.is_empty() {
            return best;
        }
        best.extend(round);
    }
}

/// Does `gy`'s `y` contain everything `gx`'s `x` denotes?
///
/// Coinductive simulation; exact when both grammars are normalized.
pub(crate) fn simulates(
    gy: &impl RuleView,
    y: GrammarVar,
    gx: &impl RuleView,
    x: GrammarVar,
    same: bool,
) -> bool {
    let mut assumed: HashSet<(GrammarVar, GrammarVar)> = HashSet::new();
    let mut stack = vec![(x, y)];
    while let Some((a, b)) = stack.pop() {
        if same && a == b {
            continue;
        }
        if !assumed.insert((a, b)) {
            continue;
        }
        let rb = gy.rules_or_empty(b);
        for (f, cs) in gx.rules_or_empty(a) {
            let Some(ds) = rb.get(f) else {
                return false;
            };
            stack.extend(cs.iter().copied().zip(ds.iter().copied()));
        }
    }
    true
}

/// A term in `sem[gx](x) \ sem[gy](y)` found along a mismatch path of at most `depth` steps.
///
/// `gx` must be normalized so every child has a term.
pub(crate) fn difference_witness(
    gx: &impl RuleView,
    x: GrammarVar,
    gy: &impl RuleView,
    y: GrammarVar,
    depth: usize,
) -> Option<Term> {
    let mins = min_terms(gx, &[x]);
    witness_rec(gx, x, gy, y, depth, &mins)
}

fn witness_rec(
    gx: &impl RuleView,
    a: GrammarVar,
    gy: &impl RuleView,
    b: GrammarVar,
    depth: usize,
    mins: &BTreeMap<GrammarVar, Term>,
) -> Option<Term> {
    if depth == 0 {
        return None;
    }
    let ra = gx.rules_or_empty(a);
    let rb = gy.rules_or_empty(b);
    let build = |cs: &[GrammarVar]| -> Option<Vec<Term>> {
        cs.iter().map(|c| mins.get(c).cloned()).collect()
    };
    for (f, cs) in ra {
        if !rb.contains_key(f) {
            if let Some(args) = build(cs) {
                return Some(Term::App(f.clone(), args));
            }
        }
    }
    for (f, cs) in ra {
        let Some(ds) = rb.get(f) else { continue };
        for (i, (&c, &d)) in cs.iter().zip(ds).enumerate() {
            if simulates(gy, d, gx, c, false) {
                continue;
            }
            if let Some(w) = witness_rec(gx, c, gy, d, depth - 1, mins) {
                let mut args = build(cs)?;
                args[i] = w;
                return Some(Term::App(f.clone(), args));
            }
        }
    }
    None
}

/// Does `x` denote every ground term over `sig`?
pub(crate) fn is_universal(view: &impl RuleView, x: GrammarVar, sig: &Signature) -> bool {
    let mut seen = BTreeSet::new();
    let mut stack = vec![x];
    while let Some(v) = stack.pop() {
        if !seen.insert(v) {
            continue;
        }
        let rules = view.rules_or_empty(v);
        for f in sig {
            match rules.get(f) {
                Some(cs) => stack.extend(cs.iter().copied()),
                None => return false,
            }
        }
    }
    true
}

fn member_rec(view: &impl RuleView, t: &Term, x: GrammarVar) -> Result<bool, GrammarError> {
    match t {
        Term::Var(_) => Err(GrammarError::NonGround(t.to_string())),
        Term::App(f, args) => match view.rules_or_empty(x).get(f) {
            None => {
                if t.is_ground() {
                    Ok(false)
                } else {
                    Err(GrammarError::NonGround(t.to_string()))
                }
            }
            Some(cs) => {
                let mut all = true;
                for (a, &c) in args.iter().zip(cs) {
                    all &= member_rec(view, a, c)?;
                }
                Ok(all)
            }
        },
    }
}

fn member_instances_rec(view: &impl RuleView, t: &Term, x: GrammarVar, sig: &Signature) -> bool {
    match t {
        Term::Var(_) => is_universal(view, x, sig),
        Term::App(f, args) => match view.rules_or_empty(x).get(f) {
            None => false,
            Some(cs) => args
                .iter()
                .zip(cs)
                .all(|(a, &c)| member_instances_rec(view, a, c, sig)),
        },
    }
}

impl TermGrammar {
    /// Variables denoting the empty set.
    pub fn empties(&self) -> BTreeSet<GrammarVar> {
        let all: BTreeSet<GrammarVar> = self.vars().collect();
        let prod = productive(self, &all, |_| false);
        all.difference(&prod).copied().collect()
    }

    /// Removes every rule with an empty child. Semantics is unchanged.
    pub fn normalize(&self) -> TermGrammar {
        let empty = self.empties();
        if empty.is_empty() {
            return self.clone();
        }
        let mut g = self.clone();
        let vars: Vec<GrammarVar> = g.vars().collect();
        for x in vars {
            let mut rules = g.rules_or_empty(x).clone();
            rules.retain(|_, cs| cs.iter().all(|c| !empty.contains(c)));
            g.set_rules(x, rules);
        }
        g
    }

    pub fn is_normalized(&self) -> bool {
        let empty = self.empties();
        self.vars()
            .flat_map(|x| self.rules_or_empty(x).values())
            .all(|cs| cs.iter().all(|c| !empty.contains(c)))
    }

    /// Is the ground term `t` in `sem(x)`? A single top-down walk.
    pub fn member(&self, t: &Term, x: GrammarVar) -> Result<bool, GrammarError> {
        self.check_var(x)?;
        if !t.is_ground() {
            return Err(GrammarError::NonGround(t.to_string()));
        }
        member_rec(self, t, x)
    }

    /// Are all ground instances (over `sig`) of the possibly open term `t` in `sem(x)`?
    ///
    /// Expects a normalized grammar.
    pub fn member_all_instances(&self, t: &Term, x: GrammarVar, sig: &Signature) -> bool {
        member_instances_rec(self, t, x, sig)
    }

    /// `sem(x) ⊆ sem(y)`.
    pub fn includes(&self, y: GrammarVar, x: GrammarVar) -> Result<bool, GrammarError> {
        self.check_var(x)?;
        self.check_var(y)?;
        let g = self.normalize();
        Ok(simulates(&g, y, &g, x, true))
    }

    /// `sem[gx](x) ⊆ sem[gy](y)` for variables of two different grammars.
    pub fn includes_across(
        gy: &TermGrammar,
        y: GrammarVar,
        gx: &TermGrammar,
        x: GrammarVar,
    ) -> Result<bool, GrammarError> {
        gx.check_var(x)?;
        gy.check_var(y)?;
        Ok(simulates(&gy.normalize(), y, &gx.normalize(), x, false))
    }

    /// Both interface inclusions `sem[other](Ca) ⊆ sem[self](Ca)` and likewise `Su`.
    pub fn interface_includes(&self, other: &TermGrammar) -> bool {
        let a = self.normalize();
        let b = other.normalize();
        simulates(&a, GrammarVar::CA, &b, GrammarVar::CA, false)
            && simulates(&a, GrammarVar::SU, &b, GrammarVar::SU, false)
    }

    pub fn is_universal(&self, x: GrammarVar, sig: &Signature) -> bool {
        is_universal(&self.normalize(), x, sig)
    }

    /// A term of `sem[self](x)` missing from `sem[other](y)`, searched to `depth`.
    pub fn witness_outside(
        &self,
        x: GrammarVar,
        other: &TermGrammar,
        y: GrammarVar,
        depth: usize,
    ) -> Option<Term> {
        difference_witness(&self.normalize(), x, &other.normalize(), y, depth)
    }

    /// A smallest term of `sem(x)`, if nonempty.
    pub fn min_term(&self, x: GrammarVar) -> Option<Term> {
        min_terms(self, &[x]).remove(&x)
    }

    /// All terms of `sem(x)` of height at most `depth`.
    pub fn enumerate(&self, x: GrammarVar, depth: usize) -> Result<BTreeSet<Term>, GrammarError> {
        self.enumerate_capped(x, depth, DEFAULT_ENUMERATION_CAP)
    }

    pub fn enumerate_capped(
        &self,
        x: GrammarVar,
        depth: usize,
        cap: usize,
    ) -> Result<BTreeSet<Term>, GrammarError> {
        self.check_var(x)?;
        let vars = self.reachable_from(&[x]);
        let mut level: BTreeMap<GrammarVar, BTreeSet<Term>> =
            vars.iter().map(|&v| (v, BTreeSet::new())).collect();
        for _ in 0..depth {
            let mut next: BTreeMap<GrammarVar, BTreeSet<Term>> = BTreeMap::new();
            for &v in &vars {
                let mut out = BTreeSet::new();
                for (f, cs) in self.rules_or_empty(v) {
                    let mut partial: Vec<Vec<Term>> = vec![Vec::new()];
                    for c in cs {
                        let choices = &level[c];
                        if choices.is_empty() {
                            partial.clear();
                            break;
                        }
                        let mut grown = Vec::with_capacity(partial.len() * choices.len());
                        for p in &partial {
                            for t in choices {
                                let mut q = p.clone();
                                q.push(t.clone());
                                grown.push(q);
                            }
                            if grown.len() > cap {
                                return Err(GrammarError::EnumerationOverflow { cap });
                            }
                        }
                        partial = grown;
                    }
                    for args in partial {
                        out.insert(Term::App(f.clone(), args));
                    }
                    if out.len() > cap {
                        return Err(GrammarError::EnumerationOverflow { cap });
                    }
                }
                next.insert(v, out);
            }
            level = next;
        }
        Ok(level.remove(&x).unwrap_or_default())
    }
}
