//! Textual and structured serialization of grammars.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{GrammarVar, RuleView, TermGrammar};

const RESERVED: [&str; 3] = ["ca", "su", "any"];

fn valid_var_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED.contains(&name.to_ascii_lowercase().as_str())
}

/// One rule of the structured export.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct RuleRecord {
    pub lhs: String,
    pub symbol: String,
    pub arity: usize,
    pub children: Vec<String>,
}

/// Structured export: one record per rule, in canonical order.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct GrammarExport {
    pub rules: Vec<RuleRecord>,
}

/// Roots keep their ids; everything else is numbered from 2 in `order`.
fn canonical_map(order: &[GrammarVar]) -> BTreeMap<GrammarVar, GrammarVar> {
    let mut next = 2;
    order
        .iter()
        .map(|&x| {
            if x.is_root() {
                (x, x)
            } else {
                next += 1;
                (x, GrammarVar::from_id(next - 1))
            }
        })
        .collect()
}

impl TermGrammar {
    /// Printable, reparseable names for every variable.
    ///
    /// Stored names are used when valid and unique; otherwise `V<id>`.
    pub fn display_names(&self) -> BTreeMap<GrammarVar, String> {
        let mut used: BTreeSet<String> = BTreeSet::new();
        let mut out = BTreeMap::new();
        out.insert(GrammarVar::CA, "ca".to_string());
        out.insert(GrammarVar::SU, "su".to_string());
        for x in self.vars().filter(|x| !x.is_root()) {
            let base = match self.name(x) {
                Some(n) if valid_var_name(n) => n.to_string(),
                _ => format!("V{}", x.id()),
            };
            let mut name = base.clone();
            if used.contains(&name) {
                name = format!("{base}_{}", x.id());
            }
            while used.contains(&name) {
                name.push('_');
            }
            used.insert(name.clone());
            out.insert(x, name);
        }
        out
    }

    /// Variables in canonical order: DFS from `Ca` then `Su` over sorted
    /// rules, then anything unreachable by id.
    pub fn canonical_order(&self) -> Vec<GrammarVar> {
        let mut order = Vec::new();
        let mut seen = BTreeSet::new();
        for root in [GrammarVar::CA, GrammarVar::SU] {
            let mut stack = vec![root];
            while let Some(x) = stack.pop() {
                if !seen.insert(x) {
                    continue;
                }
                order.push(x);
                let kids: Vec<GrammarVar> =
                    self.rules_or_empty(x).values().flatten().copied().collect();
                stack.extend(kids.into_iter().rev());
            }
        }
        order.extend(self.vars().filter(|x| !seen.contains(x)));
        order
    }

    /// The grammar renumbered in canonical order, keeping names.
    pub fn renumbered(&self) -> TermGrammar {
        let mut out = self.canonical_form();
        let map = canonical_map(&self.canonical_order());
        for (x, y) in map {
            if let Some(n) = self.name(x) {
                out.set_name(y, n);
            }
        }
        out
    }

    /// The grammar renumbered in canonical order with names dropped.
    ///
    /// Two grammars that differ only by variable naming have equal canonical forms.
    pub fn canonical_form(&self) -> TermGrammar {
        let order = self.canonical_order();
        let map = canonical_map(&order);
        let mut out = TermGrammar::new();
        for &x in &order {
            let rules = self
                .rules_or_empty(x)
                .iter()
                .map(|(f, cs)| (f.clone(), cs.iter().map(|c| map[c]).collect()))
                .collect();
            out.set_rules(map[&x], rules);
        }
        out
    }

    /// Renders rules as `Lhs > f(C1, ..., Cn).`, one per line, sorted by
    /// variable then symbol.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn export(&self) -> GrammarExport {
        let names = self.display_names();
        let rules = self
            .canonical_order()
            .into_iter()
            .flat_map(|x| {
                let names = &names;
                self.rules_or_empty(x).iter().map(move |(f, cs)| RuleRecord {
                    lhs: names[&x].clone(),
                    symbol: f.name().to_string(),
                    arity: f.arity(),
                    children: cs.iter().map(|c| names[c].clone()).collect(),
                })
            })
            .collect();
        GrammarExport { rules }
    }
}

impl fmt::Display for TermGrammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.display_names();
        for x in self.canonical_order() {
            for (sym, cs) in self.rules_or_empty(x) {
                write!(f, "{} > {}", names[&x], sym.name())?;
                if !cs.is_empty() {
                    let kids: Vec<&str> = cs.iter().map(|c| names[c].as_str()).collect();
                    write!(f, "({})", kids.join(", "))?;
                }
                writeln!(f, ".")?;
            }
        }
        Ok(())
    }
}
