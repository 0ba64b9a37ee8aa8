//! Grammar constructions: intersection, union, discriminative approximation
//! and renaming.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::ops::productive;
use super::{reachable, GrammarError, GrammarRule, GrammarVar, RuleMap, RuleView, TermGrammar};
use crate::term::FunctionSymbol;

/// A store new variables and rules can be written into.
pub trait RuleStore: RuleView {
    fn fresh(&mut self) -> GrammarVar;
    fn define(&mut self, x: GrammarVar, rules: RuleMap);
}

impl RuleStore for TermGrammar {
    fn fresh(&mut self) -> GrammarVar {
        TermGrammar::fresh(self)
    }

    fn define(&mut self, x: GrammarVar, rules: RuleMap) {
        self.set_rules(x, rules);
    }
}

/// Product construction for `sem(x) ∩ sem(y)`, memoized on variable pairs.
pub(crate) fn intersect_in<S: RuleStore>(
    store: &mut S,
    memo: &mut HashMap<(GrammarVar, GrammarVar), GrammarVar>,
    x: GrammarVar,
    y: GrammarVar,
) -> GrammarVar {
    let mut work = Vec::new();
    let top = pair_var(store, memo, &mut work, x, y);
    while let Some((v, a, b)) = work.pop() {
        let ra = store.rules_or_empty(a).clone();
        let rb = store.rules_or_empty(b).clone();
        let mut rules = RuleMap::new();
        for (f, cs) in &ra {
            if let Some(ds) = rb.get(f) {
                let children = cs
                    .iter()
                    .zip(ds)
                    .map(|(&c, &d)| pair_var(store, memo, &mut work, c, d))
                    .collect();
                rules.insert(f.clone(), children);
            }
        }
        store.define(v, rules);
    }
    top
}

fn pair_var<S: RuleStore>(
    store: &mut S,
    memo: &mut HashMap<(GrammarVar, GrammarVar), GrammarVar>,
    work: &mut Vec<(GrammarVar, GrammarVar, GrammarVar)>,
    a: GrammarVar,
    b: GrammarVar,
) -> GrammarVar {
    if a == b {
        return a;
    }
    let key = (a.min(b), a.max(b));
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let v = store.fresh();
    memo.insert(key, v);
    work.push((v, key.0, key.1));
    v
}

/// A possibly non-discriminative rule set.
#[derive(Clone, Debug, Default)]
pub struct NondetRules {
    rules: BTreeMap<GrammarVar, BTreeMap<FunctionSymbol, BTreeSet<Vec<GrammarVar>>>>,
    names: BTreeMap<GrammarVar, String>,
}

impl NondetRules {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, rule: GrammarRule) {
        for &c in &rule.children {
            self.rules.entry(c).or_default();
        }
        self.rules
            .entry(rule.lhs)
            .or_default()
            .entry(rule.symbol)
            .or_default()
            .insert(rule.children);
    }

    /// Adds every rule of `g` as is; ids must already be apart.
    pub fn add_grammar(&mut self, g: &TermGrammar) {
        self.add_grammar_mapped(g, |v| v);
    }

    /// Adds every rule of `g` with variables renamed through `map`.
    pub fn add_grammar_mapped(&mut self, g: &TermGrammar, map: impl Fn(GrammarVar) -> GrammarVar) {
        for x in g.vars() {
            let lhs = map(x);
            self.rules.entry(lhs).or_default();
            if let Some(n) = g.name(x) {
                self.names.entry(lhs).or_insert_with(|| n.to_string());
            }
            for (f, cs) in g.rules_or_empty(x) {
                let children: Vec<GrammarVar> = cs.iter().map(|&c| map(c)).collect();
                self.add(GrammarRule {
                    lhs,
                    symbol: f.clone(),
                    children,
                });
            }
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = GrammarVar> + '_ {
        self.rules.keys().copied()
    }

    fn max_id(&self) -> u32 {
        self.rules.keys().map(|v| v.id()).max().unwrap_or(1)
    }

    /// Subset construction from `seeds`: a singleton `{x}` keeps the id of `x`,
    /// larger sets get fresh variables. Only what the seeds reach is built.
    pub fn determinize(&self, seeds: &[GrammarVar]) -> TermGrammar {
        self.determinize_with_members(seeds).0
    }

    /// Like [`determinize`](Self::determinize), also returning the source
    /// variables each output variable stands for.
    pub fn determinize_with_members(
        &self,
        seeds: &[GrammarVar],
    ) -> (TermGrammar, BTreeMap<GrammarVar, BTreeSet<GrammarVar>>) {
        let mut out = TermGrammar::new();
        out.reserve(self.max_id() + 1);
        let mut det = Determinizer {
            src: self,
            memo: BTreeMap::new(),
            work: Vec::new(),
        };
        for &s in seeds {
            det.var_for(&mut out, [s].into_iter().collect(), true);
        }
        det.run(&mut out, true);
        for (v, n) in &self.names {
            if out.contains(*v) {
                out.set_name(*v, n);
            }
        }
        let members = det.memo.into_iter().map(|(set, v)| (v, set)).collect();
        (out, members)
    }
}

struct Determinizer<'a> {
    src: &'a NondetRules,
    memo: BTreeMap<BTreeSet<GrammarVar>, GrammarVar>,
    work: Vec<(GrammarVar, BTreeSet<GrammarVar>)>,
}

impl Determinizer<'_> {
    fn var_for(
        &mut self,
        out: &mut TermGrammar,
        set: BTreeSet<GrammarVar>,
        rebuild_singletons: bool,
    ) -> GrammarVar {
        if let Some(&v) = self.memo.get(&set) {
            return v;
        }
        let v = if set.len() == 1 {
            let x = *set.iter().next().expect("singleton");
            out.ensure_var(x);
            if !rebuild_singletons {
                self.memo.insert(set, x);
                return x;
            }
            x
        } else {
            out.fresh()
        };
        self.memo.insert(set.clone(), v);
        self.work.push((v, set));
        v
    }

    fn run(&mut self, out: &mut TermGrammar, rebuild_singletons: bool) {
        while let Some((v, set)) = self.work.pop() {
            let mut merged: BTreeMap<FunctionSymbol, Vec<BTreeSet<GrammarVar>>> = BTreeMap::new();
            for m in &set {
                let Some(rules) = self.src.rules.get(m) else {
                    continue;
                };
                for (f, alts) in rules {
                    let slot = merged
                        .entry(f.clone())
                        .or_insert_with(|| vec![BTreeSet::new(); f.arity()]);
                    for alt in alts {
                        for (i, c) in alt.iter().enumerate() {
                            slot[i].insert(*c);
                        }
                    }
                }
            }
            let mut rules = RuleMap::new();
            for (f, sets) in merged {
                let children = sets
                    .into_iter()
                    .map(|s| self.var_for(out, s, rebuild_singletons))
                    .collect();
                rules.insert(f, children);
            }
            out.set_rules(v, rules);
        }
    }
}

/// Replaces every rule set that is not discriminative by merging same-symbol
/// rules position-wise with unions. The result over-approximates every variable.
pub fn discriminative_approx(rules: impl IntoIterator<Item = GrammarRule>) -> TermGrammar {
    let mut src = NondetRules::new();
    src.rules.entry(GrammarVar::CA).or_default();
    src.rules.entry(GrammarVar::SU).or_default();
    for r in rules {
        src.add(r);
    }
    let seeds: Vec<GrammarVar> = src.vars().collect();
    src.determinize(&seeds)
}

impl TermGrammar {
    /// `x ∪̇ y`: a variable whose semantics contains both, in an extended grammar.
    pub fn union(&self, x: GrammarVar, y: GrammarVar) -> Result<(GrammarVar, TermGrammar), GrammarError> {
        self.check_var(x)?;
        self.check_var(y)?;
        let mut src = NondetRules::new();
        src.add_grammar(self);
        let mut out = self.clone();
        let mut det = Determinizer {
            src: &src,
            memo: BTreeMap::new(),
            work: Vec::new(),
        };
        let u = det.var_for(&mut out, [x, y].into_iter().collect(), false);
        det.run(&mut out, false);
        Ok((u, out))
    }

    /// Product construction: `sem(result) = sem(x) ∩ sem(y)`. Not normalized.
    pub fn intersect(
        &self,
        x: GrammarVar,
        y: GrammarVar,
    ) -> Result<(GrammarVar, TermGrammar), GrammarError> {
        self.check_var(x)?;
        self.check_var(y)?;
        let mut out = self.clone();
        let v = intersect_in(&mut out, &mut HashMap::new(), x, y);
        Ok((v, out))
    }

    /// A grammar whose `Ca` and `Su` over-approximate the unions of those of
    /// `self` and `other`.
    pub fn interface_union(&self, other: &TermGrammar) -> TermGrammar {
        let (b, _) = other.rename_apart(self.next_id());
        let mut src = NondetRules::new();
        src.add_grammar(self);
        src.add_grammar(&b);
        src.determinize(&[GrammarVar::CA, GrammarVar::SU]).normalize().prune()
    }

    /// A grammar whose `Ca` and `Su` are exactly the intersections of those
    /// of `self` and `other`.
    pub fn interface_intersection(&self, other: &TermGrammar) -> TermGrammar {
        let start = self.next_id();
        let (bca, bsu) = (GrammarVar::from_id(start), GrammarVar::from_id(start + 1));
        let (b, _) = other.rename_apart(start + 2);
        let mut src = NondetRules::new();
        src.add_grammar(self);
        src.add_grammar_mapped(&b, |x| match x {
            GrammarVar::CA => bca,
            GrammarVar::SU => bsu,
            x => x,
        });
        let seeds: Vec<GrammarVar> = src.vars().chain([bca, bsu]).collect();
        let mut g = src.determinize(&seeds);
        let mut memo = HashMap::new();
        let ica = intersect_in(&mut g, &mut memo, GrammarVar::CA, bca);
        let isu = intersect_in(&mut g, &mut memo, GrammarVar::SU, bsu);
        let (rca, rsu) = (g.rules_or_empty(ica).clone(), g.rules_or_empty(isu).clone());
        g.set_rules(GrammarVar::CA, rca);
        g.set_rules(GrammarVar::SU, rsu);
        g.normalize().prune()
    }

    /// Renames every variable except `Ca` and `Su` to ids starting at `start`.
    /// Returns the renamed grammar and the old-to-new map.
    pub fn rename_apart(&self, start: u32) -> (TermGrammar, BTreeMap<GrammarVar, GrammarVar>) {
        let mut map = BTreeMap::new();
        let mut next = start.max(2);
        for x in self.vars() {
            if x.is_root() {
                map.insert(x, x);
            } else {
                map.insert(x, GrammarVar::from_id(next));
                next += 1;
            }
        }
        let mut out = TermGrammar::new();
        for x in self.vars() {
            let rules = self
                .rules_or_empty(x)
                .iter()
                .map(|(f, cs)| (f.clone(), cs.iter().map(|c| map[c]).collect()))
                .collect();
            out.set_rules(map[&x], rules);
            if let Some(n) = self.name(x) {
                out.set_name(map[&x], n);
            }
        }
        out.reserve(next);
        (out, map)
    }
}

/// A scratch layer of new variables over a read-only base grammar.
///
/// Variables below `base.next_id()` read from the base; the rest live in the
/// overlay. Intersections are memoized for the lifetime of the overlay.
pub struct Overlay<'a> {
    base: &'a TermGrammar,
    top: BTreeMap<GrammarVar, RuleMap>,
    next: u32,
    memo: HashMap<(GrammarVar, GrammarVar), GrammarVar>,
}

impl RuleView for Overlay<'_> {
    fn rules(&self, x: GrammarVar) -> Option<&RuleMap> {
        self.top.get(&x).or_else(|| self.base.rules(x))
    }
}

impl RuleStore for Overlay<'_> {
    fn fresh(&mut self) -> GrammarVar {
        let v = GrammarVar::from_id(self.next);
        self.next += 1;
        self.top.insert(v, RuleMap::new());
        v
    }

    fn define(&mut self, x: GrammarVar, rules: RuleMap) {
        self.top.insert(x, rules);
    }
}

impl<'a> Overlay<'a> {
    /// `base` is expected to be normalized.
    pub fn new(base: &'a TermGrammar) -> Self {
        Overlay {
            base,
            top: BTreeMap::new(),
            next: base.next_id(),
            memo: HashMap::new(),
        }
    }

    pub fn base(&self) -> &TermGrammar {
        self.base
    }

    pub fn intersect(&mut self, x: GrammarVar, y: GrammarVar) -> GrammarVar {
        let mut memo = std::mem::take(&mut self.memo);
        let v = intersect_in(self, &mut memo, x, y);
        self.memo = memo;
        v
    }

    pub fn is_empty(&self, x: GrammarVar) -> bool {
        let vars = reachable(self, &[x]);
        let base = self.base;
        let known = |v: GrammarVar| {
            v.id() < base.next_id() && base.rules(v).is_some_and(|r| !r.is_empty())
        };
        !productive(self, &vars, known).contains(&x)
    }

    pub fn add_universal(&mut self, sig: &crate::term::Signature) -> GrammarVar {
        let any = self.fresh();
        let rules = sig.iter().map(|f| (f.clone(), vec![any; f.arity()])).collect();
        self.top.insert(any, rules);
        any
    }

    /// Copies `root_rules` and everything their children reach into a
    /// standalone grammar, renumbering non-root variables from 2.
    pub fn extract(
        &self,
        root_rules: &[(GrammarVar, FunctionSymbol, Vec<GrammarVar>)],
    ) -> TermGrammar {
        let starts: Vec<GrammarVar> = root_rules
            .iter()
            .flat_map(|(_, _, cs)| cs.iter().copied())
            .collect();
        // deterministic numbering: discovery order of a DFS over sorted rules
        let mut order: Vec<GrammarVar> = Vec::new();
        let mut seen = BTreeSet::new();
        let mut stack: Vec<GrammarVar> = starts.iter().rev().copied().collect();
        while let Some(x) = stack.pop() {
            if x.is_root() || !seen.insert(x) {
                continue;
            }
            order.push(x);
            let kids: Vec<GrammarVar> = self.rules_or_empty(x).values().flatten().copied().collect();
            stack.extend(kids.into_iter().rev());
        }
        let map: BTreeMap<GrammarVar, GrammarVar> = order
            .iter()
            .enumerate()
            .map(|(i, &x)| (x, GrammarVar::from_id(i as u32 + 2)))
            .collect();
        let m = |v: GrammarVar| if v.is_root() { v } else { map[&v] };
        let mut out = TermGrammar::new();
        for &x in &order {
            let rules = self
                .rules_or_empty(x)
                .iter()
                .map(|(f, cs)| (f.clone(), cs.iter().map(|&c| m(c)).collect()))
                .collect();
            out.set_rules(m(x), rules);
            if let Some(n) = self.base.name(x) {
                out.set_name(m(x), n);
            }
        }
        for (lhs, f, cs) in root_rules {
            out.add_rule(*lhs, f.clone(), cs.iter().map(|&c| m(c)).collect())
                .expect("root rules of one contribution are distinct");
        }
        out
    }
}
