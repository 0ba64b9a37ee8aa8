//! Discriminative term grammars.
//!
//! A grammar is a finite set of rules `X > f(X1, ..., Xn)` with at most one
//! rule per pair `(X, f)`. Each variable denotes the least set of ground terms
//! closed under its rules. Two variables are distinguished: `Ca` (call atoms)
//! and `Su` (success atoms); both are present in every grammar.

mod build;
mod ops;
mod text;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::term::{FunctionSymbol, Signature};

pub use build::{discriminative_approx, NondetRules, Overlay, RuleStore};
pub use text::{GrammarExport, RuleRecord};

/// Default cap on the number of terms `enumerate` may produce.
pub const DEFAULT_ENUMERATION_CAP: usize = 200_000;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GrammarVar(u32);

impl GrammarVar {
    pub const CA: GrammarVar = GrammarVar(0);
    pub const SU: GrammarVar = GrammarVar(1);

    pub fn from_id(id: u32) -> GrammarVar {
        GrammarVar(id)
    }

    pub fn id(self) -> u32 {
        self.0
    }

    pub fn is_root(self) -> bool {
        self == Self::CA || self == Self::SU
    }
}

impl fmt::Debug for GrammarVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::CA => write!(f, "Ca"),
            Self::SU => write!(f, "Su"),
            GrammarVar(n) => write!(f, "V{n}"),
        }
    }
}

/// The rules of one variable, keyed by symbol. Discriminative by construction.
pub type RuleMap = BTreeMap<FunctionSymbol, Vec<GrammarVar>>;

static NO_RULES: RuleMap = BTreeMap::new();

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct GrammarRule {
    pub lhs: GrammarVar,
    pub symbol: FunctionSymbol,
    pub children: Vec<GrammarVar>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("unknown grammar variable {0:?}")]
    UnknownVar(GrammarVar),
    #[error("grammar is not discriminative: {lhs:?} has two rules for {symbol}")]
    NotDiscriminative {
        lhs: GrammarVar,
        symbol: FunctionSymbol,
    },
    #[error("rule for {symbol} has {found} children")]
    ArityMismatch { symbol: FunctionSymbol, found: usize },
    #[error("term {0} is not ground")]
    NonGround(String),
    #[error("enumeration exceeded the cap of {cap} terms")]
    EnumerationOverflow { cap: usize },
}

/// Read access to the rules of a grammar-like store.
pub trait RuleView {
    /// `None` for a variable the store does not know.
    fn rules(&self, x: GrammarVar) -> Option<&RuleMap>;

    fn rules_or_empty(&self, x: GrammarVar) -> &RuleMap {
        self.rules(x).unwrap_or(&NO_RULES)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TermGrammar {
    rules: BTreeMap<GrammarVar, RuleMap>,
    names: BTreeMap<GrammarVar, String>,
    next: u32,
}

impl Default for TermGrammar {
    fn default() -> Self {
        Self::new()
    }
}

impl RuleView for TermGrammar {
    fn rules(&self, x: GrammarVar) -> Option<&RuleMap> {
        self.rules.get(&x)
    }
}

impl TermGrammar {
    /// A grammar with empty `Ca` and `Su` and nothing else.
    pub fn new() -> Self {
        let mut rules = BTreeMap::new();
        rules.insert(GrammarVar::CA, RuleMap::new());
        rules.insert(GrammarVar::SU, RuleMap::new());
        TermGrammar {
            rules,
            names: BTreeMap::new(),
            next: 2,
        }
    }

    pub fn fresh(&mut self) -> GrammarVar {
        let v = GrammarVar(self.next);
        self.next += 1;
        self.rules.insert(v, RuleMap::new());
        v
    }

    pub fn fresh_named(&mut self, name: &str) -> GrammarVar {
        let v = self.fresh();
        self.names.insert(v, name.to_string());
        v
    }

    /// Smallest id never handed out by this grammar.
    pub fn next_id(&self) -> u32 {
        self.next
    }

    pub fn contains(&self, x: GrammarVar) -> bool {
        self.rules.contains_key(&x)
    }

    pub fn check_var(&self, x: GrammarVar) -> Result<(), GrammarError> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(GrammarError::UnknownVar(x))
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = GrammarVar> + '_ {
        self.rules.keys().copied()
    }

    pub fn num_vars(&self) -> usize {
        self.rules.len()
    }

    /// Total number of rules.
    pub fn size(&self) -> usize {
        self.rules.values().map(BTreeMap::len).sum()
    }

    pub fn rule(&self, x: GrammarVar, f: &FunctionSymbol) -> Option<&[GrammarVar]> {
        self.rules.get(&x)?.get(f).map(Vec::as_slice)
    }

    pub fn name(&self, x: GrammarVar) -> Option<&str> {
        self.names.get(&x).map(String::as_str)
    }

    pub fn set_name(&mut self, x: GrammarVar, name: &str) {
        self.names.insert(x, name.to_string());
    }

    /// Adds `lhs > f(children)`, creating entries for unseen variables.
    pub fn add_rule(
        &mut self,
        lhs: GrammarVar,
        symbol: FunctionSymbol,
        children: Vec<GrammarVar>,
    ) -> Result<(), GrammarError> {
        if children.len() != symbol.arity() {
            return Err(GrammarError::ArityMismatch {
                found: children.len(),
                symbol,
            });
        }
        for &c in children.iter().chain(std::iter::once(&lhs)) {
            self.ensure_var(c);
        }
        let entry = self.rules.get_mut(&lhs).expect("lhs ensured");
        if entry.contains_key(&symbol) {
            return Err(GrammarError::NotDiscriminative { lhs, symbol });
        }
        entry.insert(symbol, children);
        Ok(())
    }

    /// Replaces all rules of `x`.
    pub fn set_rules(&mut self, x: GrammarVar, rules: RuleMap) {
        for c in rules.values().flatten() {
            self.ensure_var(*c);
        }
        self.ensure_var(x);
        self.rules.insert(x, rules);
    }

    pub fn remove_rule(&mut self, x: GrammarVar, f: &FunctionSymbol) -> Option<Vec<GrammarVar>> {
        self.rules.get_mut(&x)?.remove(f)
    }

    /// Makes sure `fresh` never returns an id below `next`.
    pub(crate) fn reserve(&mut self, next: u32) {
        self.next = self.next.max(next);
    }

    pub(crate) fn ensure_var(&mut self, x: GrammarVar) {
        self.rules.entry(x).or_default();
        if x.0 >= self.next {
            self.next = x.0 + 1;
        }
    }

    pub fn rule_list(&self) -> Vec<GrammarRule> {
        self.rules
            .iter()
            .flat_map(|(&lhs, m)| {
                m.iter().map(move |(f, cs)| GrammarRule {
                    lhs,
                    symbol: f.clone(),
                    children: cs.clone(),
                })
            })
            .collect()
    }

    /// Adds a fresh variable denoting every ground term over `sig`.
    pub fn add_universal(&mut self, sig: &Signature) -> GrammarVar {
        let any = self.fresh_named("Any");
        let rules = sig
            .iter()
            .map(|f| (f.clone(), vec![any; f.arity()]))
            .collect();
        self.rules.insert(any, rules);
        any
    }

    /// Principal label: the set of symbols on the right-hand sides of `x`'s rules.
    pub fn label(&self, x: GrammarVar) -> BTreeSet<FunctionSymbol> {
        self.rules_or_empty(x).keys().cloned().collect()
    }

    /// Variables reachable from `roots` (roots included).
    pub fn reachable_from(&self, roots: &[GrammarVar]) -> BTreeSet<GrammarVar> {
        reachable(self, roots)
    }

    /// Drops every variable not reachable from `Ca` or `Su`.
    pub fn prune(&self) -> TermGrammar {
        let keep = self.reachable_from(&[GrammarVar::CA, GrammarVar::SU]);
        TermGrammar {
            rules: self
                .rules
                .iter()
                .filter(|(v, _)| keep.contains(v))
                .map(|(v, m)| (*v, m.clone()))
                .collect(),
            names: self
                .names
                .iter()
                .filter(|(v, _)| keep.contains(v))
                .map(|(v, n)| (*v, n.clone()))
                .collect(),
            next: self.next,
        }
    }

    /// Keeps only the root rules whose symbol satisfies `keep`, then prunes.
    pub fn filter_root_rules(
        &self,
        root: GrammarVar,
        mut keep: impl FnMut(&FunctionSymbol) -> bool,
    ) -> TermGrammar {
        let mut g = self.clone();
        if let Some(m) = g.rules.get_mut(&root) {
            m.retain(|f, _| keep(f));
        }
        g.prune()
    }
}

pub(crate) fn reachable(view: &impl RuleView, roots: &[GrammarVar]) -> BTreeSet<GrammarVar> {
    let mut seen: BTreeSet<GrammarVar> = BTreeSet::new();
    let mut stack: Vec<GrammarVar> = roots.to_vec();
    while let Some(x) = stack.pop() {
        if seen.insert(x) {
            stack.extend(view.rules_or_empty(x).values().flatten().copied());
        }
    }
    seen
}
