//! Analysis results and their text and JSON renderings.

use std::fmt::Write as _;
use std::time::Duration;

use serde::Serialize;

use crate::engine::Warning;
use crate::grammar::{GrammarExport, GrammarVar, TermGrammar};
use crate::restrict::WideningConfig;
use crate::term::FunctionSymbol;

/// What one implication contributed in one step.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct TraceRecord {
    pub clause: usize,
    pub j: usize,
    /// The new root rule, or `None` when the implication held vacuously.
    pub rule: Option<String>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct StepSummary {
    pub iteration: usize,
    pub contributions: usize,
    pub rules_before_widening: usize,
    pub rules: usize,
    pub vars: usize,
    pub warnings: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub records: Vec<TraceRecord>,
}

#[derive(Clone, Debug)]
pub struct AnalysisReport {
    pub grammar: TermGrammar,
    /// Predicates of the program in sorted order.
    pub predicates: Vec<FunctionSymbol>,
    pub iterations: usize,
    pub warnings: Vec<Warning>,
    pub trace: Vec<StepSummary>,
    pub widening: Option<WideningConfig>,
    pub elapsed: Duration,
    /// Every `H_i`, when requested.
    pub history: Vec<TermGrammar>,
}

/// Rendering switches.
#[derive(Clone, Copy, Default, Debug)]
pub struct RenderOptions {
    pub trace: bool,
    pub timing: bool,
}

#[derive(Serialize)]
struct JsonWarning {
    kind: String,
    predicate: Option<String>,
    message: String,
    witness: Option<String>,
}

#[derive(Serialize)]
struct JsonType {
    predicate: String,
    calls: Option<String>,
    successes: Option<String>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    iterations: usize,
    widening: String,
    types: Vec<JsonType>,
    grammar: GrammarExport,
    grammar_text: String,
    warnings: Vec<JsonWarning>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<&'a [StepSummary]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<f64>,
}

impl AnalysisReport {
    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty()
    }

    fn root_rule(&self, root: GrammarVar, p: &FunctionSymbol) -> Option<String> {
        let cs = self.grammar.rule(root, p)?;
        let names = self.grammar.display_names();
        Some(if cs.is_empty() {
            p.name().to_string()
        } else {
            let kids: Vec<&str> = cs.iter().map(|c| names[c].as_str()).collect();
            format!("{}({})", p.name(), kids.join(", "))
        })
    }

    /// `(calls, successes)` for predicate `p`, as atoms over grammar variables.
    pub fn directional_type(&self, p: &FunctionSymbol) -> (Option<String>, Option<String>) {
        (
            self.root_rule(GrammarVar::CA, p),
            self.root_rule(GrammarVar::SU, p),
        )
    }

    fn widening_label(&self) -> String {
        match &self.widening {
            Some(cfg) => cfg.to_string(),
            None => "off".to_string(),
        }
    }

    pub fn render_text(&self, opts: RenderOptions) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "% iterations: {}", self.iterations);
        let _ = writeln!(out, "% widening: {}", self.widening_label());
        if opts.timing {
            let _ = writeln!(out, "% elapsed: {:.3} ms", self.elapsed.as_secs_f64() * 1e3);
        }
        out.push_str("\n% directional types\n");
        for p in &self.predicates {
            let (ca, su) = self.directional_type(p);
            let _ = writeln!(
                out,
                "% {p}: {} -> {}",
                ca.as_deref().unwrap_or("never called"),
                su.as_deref().unwrap_or("never succeeds"),
            );
        }
        out.push_str("\n% grammar\n");
        out.push_str(&self.grammar.to_text());
        if !self.warnings.is_empty() {
            out.push_str("\n% warnings\n");
            for w in &self.warnings {
                let _ = writeln!(out, "% {w}");
            }
        }
        if opts.trace {
            out.push_str("\n% trace\n");
            for s in &self.trace {
                let _ = writeln!(
                    out,
                    "% step {}: {} contributions, {} rules before widening, {} rules, {} vars, {} warnings",
                    s.iteration, s.contributions, s.rules_before_widening, s.rules, s.vars, s.warnings
                );
                for r in &s.records {
                    let _ = writeln!(
                        out,
                        "%   clause {} j={}: {}",
                        r.clause,
                        r.j,
                        r.rule.as_deref().unwrap_or("-")
                    );
                }
            }
        }
        out
    }

    pub fn render_json(&self, opts: RenderOptions) -> String {
        let report = JsonReport {
            iterations: self.iterations,
            widening: self.widening_label(),
            types: self
                .predicates
                .iter()
                .map(|p| {
                    let (calls, successes) = self.directional_type(p);
                    JsonType {
                        predicate: p.to_string(),
                        calls,
                        successes,
                    }
                })
                .collect(),
            grammar: self.grammar.export(),
            grammar_text: self.grammar.to_text(),
            warnings: self
                .warnings
                .iter()
                .map(|w| JsonWarning {
                    kind: w.kind.to_string(),
                    predicate: w.predicate.as_ref().map(ToString::to_string),
                    message: w.message.clone(),
                    witness: w.witness.as_ref().map(ToString::to_string),
                })
                .collect(),
            trace: opts.trace.then_some(self.trace.as_slice()),
            elapsed_ms: opts.timing.then_some(self.elapsed.as_secs_f64() * 1e3),
        };
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
    }
}
