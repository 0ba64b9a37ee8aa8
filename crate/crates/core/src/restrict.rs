//! The restriction operator: a widening that maps grammars into a finite set.
//!
//! The principal label of a variable is the set of symbols its rules start
//! with. Walking a fixed depth-first spanning forest of the grammar graph
//! (from `Ca`, then `Su`), no branch may hold more than `k` variables with the
//! same principal label. A variable breaking the bound is merged into the
//! nearest ancestor sharing its label, and the walk restarts. Since the
//! signature is finite, only finitely many grammars (up to renaming) pass.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::grammar::{GrammarError, GrammarVar, NondetRules, RuleView, TermGrammar};
use crate::term::FunctionSymbol;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// At most `k` variables per principal label on a branch.
    PrincipalLabel,
    /// At most `k` variables whose label contains a given symbol on a branch.
    OccurrenceCount,
    /// Branches of at most `k` non-root variables.
    DepthBound,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::PrincipalLabel => "principal",
            Variant::OccurrenceCount => "count",
            Variant::DepthBound => "depth",
        })
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "principal" | "principal-label" => Ok(Variant::PrincipalLabel),
            "count" | "occurrence-count" => Ok(Variant::OccurrenceCount),
            "depth" | "depth-bound" => Ok(Variant::DepthBound),
            _ => Err(format!("unknown widening `{s}` (expected principal, count or depth)")),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct WideningConfig {
    pub variant: Variant,
    pub k: usize,
}

impl Default for WideningConfig {
    fn default() -> Self {
        WideningConfig {
            variant: Variant::PrincipalLabel,
            k: 1,
        }
    }
}

impl WideningConfig {
    pub fn new(variant: Variant, k: usize) -> Result<Self, String> {
        if k == 0 {
            return Err("the widening bound k must be at least 1".into());
        }
        Ok(WideningConfig { variant, k })
    }
}

impl fmt::Display for WideningConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, k={}", self.variant, self.k)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct PrincipalLabel(pub BTreeSet<FunctionSymbol>);

pub fn principal_label(x: GrammarVar, g: &TermGrammar) -> Result<PrincipalLabel, GrammarError> {
    g.check_var(x)?;
    Ok(PrincipalLabel(g.label(x)))
}

/// Directed graph with an edge `(X, Y)` whenever some rule `X > f(..., Y, ...)` exists.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct GrammarGraph {
    pub vertices: BTreeSet<GrammarVar>,
    pub edges: BTreeSet<(GrammarVar, GrammarVar)>,
}

pub fn grammar_graph(g: &TermGrammar) -> GrammarGraph {
    let mut graph = GrammarGraph {
        vertices: g.vars().collect(),
        edges: BTreeSet::new(),
    };
    for x in g.vars() {
        for &c in g.rules_or_empty(x).values().flatten() {
            graph.edges.insert((x, c));
        }
    }
    graph
}

/// A tree edge into `var` that breaks the bound; `var` should be merged into `target`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct Violation {
    var: GrammarVar,
    target: GrammarVar,
}

fn check_child(
    g: &TermGrammar,
    labels: &mut BTreeMap<GrammarVar, BTreeSet<FunctionSymbol>>,
    path: &[GrammarVar],
    child: GrammarVar,
    cfg: &WideningConfig,
) -> Option<GrammarVar> {
    let mut label_of = |x: GrammarVar| labels.entry(x).or_insert_with(|| g.label(x)).clone();
    match cfg.variant {
        Variant::PrincipalLabel => {
            let lc = label_of(child);
            let same: Vec<GrammarVar> = path
                .iter()
                .copied()
                .filter(|&a| label_of(a) == lc)
                .collect();
            (same.len() >= cfg.k).then(|| *same.last().expect("k >= 1"))
        }
        Variant::OccurrenceCount => {
            let lc = label_of(child);
            let path_labels: Vec<(usize, BTreeSet<FunctionSymbol>)> = path
                .iter()
                .enumerate()
                .map(|(i, &a)| (i, label_of(a)))
                .collect();
            let mut nearest: Option<usize> = None;
            for f in &lc {
                let holders: Vec<usize> = path_labels
                    .iter()
                    .filter(|(_, l)| l.contains(f))
                    .map(|(i, _)| *i)
                    .collect();
                if holders.len() >= cfg.k {
                    let last = *holders.last().expect("k >= 1");
                    nearest = Some(nearest.map_or(last, |n| n.max(last)));
                }
            }
            nearest.map(|i| path[i])
        }
        Variant::DepthBound => (path.len() + 1 > cfg.k).then(|| *path.last().expect("k >= 1")),
    }
}

/// Violations along the deterministic spanning forest. The walk does not
/// descend below a violating variable; with `first_only` it stops at the first.
fn violations(g: &TermGrammar, cfg: &WideningConfig, first_only: bool) -> Vec<Violation> {
    let mut found = Vec::new();
    let mut labels = BTreeMap::new();
    let mut visited: BTreeSet<GrammarVar> = [GrammarVar::CA, GrammarVar::SU].into_iter().collect();
    for root in [GrammarVar::CA, GrammarVar::SU] {
        // frames: (var, its children in rule order, next child index)
        let kids = |x: GrammarVar| -> Vec<GrammarVar> {
            g.rules_or_empty(x).values().flatten().copied().collect()
        };
        let mut path: Vec<GrammarVar> = Vec::new();
        let mut stack: Vec<(GrammarVar, Vec<GrammarVar>, usize)> = vec![(root, kids(root), 0)];
        while let Some(frame) = stack.last_mut() {
            if frame.2 == frame.1.len() {
                let (x, _, _) = stack.pop().expect("nonempty");
                if !x.is_root() {
                    path.pop();
                }
                continue;
            }
            let child = frame.1[frame.2];
            frame.2 += 1;
            if child.is_root() || !visited.insert(child) {
                continue;
            }
            if let Some(target) = check_child(g, &mut labels, &path, child, cfg) {
                found.push(Violation { var: child, target });
                if first_only {
                    return found;
                }
                continue;
            }
            path.push(child);
            stack.push((child, kids(child), 0));
        }
    }
    found
}

/// Does `g` satisfy the spanning-tree bound of `cfg`?
pub fn codomain_certificate(g: &TermGrammar, cfg: &WideningConfig) -> bool {
    violations(g, cfg, true).is_empty()
}

/// The quotient of `base` by `class`, made discriminative again. Also
/// returns the classes each output variable stands for.
fn quotient(
    base: &TermGrammar,
    class: &BTreeMap<GrammarVar, GrammarVar>,
) -> (TermGrammar, BTreeMap<GrammarVar, BTreeSet<GrammarVar>>) {
    let mut src = NondetRules::new();
    src.add_grammar_mapped(base, |x| class.get(&x).copied().unwrap_or(x));
    let (g, members) = src.determinize_with_members(&[GrammarVar::CA, GrammarVar::SU]);
    (g.normalize().prune(), members)
}

/// The restriction operator: an over-approximation of `g` (on `Ca` and `Su`)
/// that satisfies the spanning-tree bound of `cfg`. Output is normalized and
/// pruned to what `Ca` and `Su` reach.
///
/// Merging works on classes of the variables of `g`. A violation between two
/// output variables joins every class either stands for, so each round has
/// strictly fewer classes and the loop ends after at most `|vars(g)|` rounds.
/// All violations found in one walk are resolved together.
pub fn restrict(g: &TermGrammar, cfg: &WideningConfig) -> TermGrammar {
    let base = g.normalize().prune();
    let mut class: BTreeMap<GrammarVar, GrammarVar> = base
        .vars()
        .filter(|x| !x.is_root())
        .map(|x| (x, x))
        .collect();
    loop {
        let (cur, members) = quotient(&base, &class);
        let found = violations(&cur, cfg, false);
        if found.is_empty() {
            return cur;
        }
        for v in found {
            let joined: BTreeSet<GrammarVar> = members[&v.var]
                .iter()
                .chain(&members[&v.target])
                .map(|c| class[c])
                .collect();
            let rep = *joined.iter().next().expect("nonempty");
            for c in class.values_mut() {
                if joined.contains(c) {
                    *c = rep;
                }
            }
        }
    }
}
