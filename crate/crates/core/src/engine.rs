//! The fixpoint iteration and the single-step specification checker.

use std::collections::BTreeSet;
use std::fmt;
use std::time::Instant;

use serde::Serialize;

use crate::grammar::{GrammarVar, NondetRules, RuleView, TermGrammar};
use crate::report::{AnalysisReport, StepSummary, TraceRecord};
use crate::restrict::{restrict, WideningConfig};
use crate::solver::{solve_clause, Implication};
use crate::term::{Atom, FunctionSymbol, Program, Signature};

/// Default bound on the number of iteration steps.
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Mismatch paths longer than this are not searched for witnesses.
pub const WITNESS_DEPTH: usize = 4;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WarningKind {
    ConstraintCallViolation,
    IterationCapReached,
}

impl fmt::Display for WarningKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WarningKind::ConstraintCallViolation => "constraint-call-violation",
            WarningKind::IterationCapReached => "iteration-cap-reached",
        })
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Warning {
    pub kind: WarningKind,
    pub predicate: Option<FunctionSymbol>,
    pub message: String,
    /// A call outside the allowed call type, when one was found.
    pub witness: Option<Atom>,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)?;
        if let Some(w) = &self.witness {
            write!(f, " (witness: {w})")?;
        }
        Ok(())
    }
}

/// Function symbols of `p` together with those `g0` uses below its roots.
pub fn analysis_signature(p: &Program, g0: &TermGrammar) -> Signature {
    let mut sig = p.signature.clone();
    for x in g0.vars().filter(|x| !x.is_root()) {
        sig.extend(g0.rules_or_empty(x).keys().cloned());
    }
    sig
}

/// One application of the transformer: every clause contribution, renamed
/// apart, merged with `g` into a discriminative grammar.
pub fn iteration_step(g: &TermGrammar, p: &Program, sig: &Signature) -> TermGrammar {
    step_with_trace(g, p, sig, false).0
}

pub(crate) fn step_with_trace(
    g: &TermGrammar,
    p: &Program,
    sig: &Signature,
    detailed: bool,
) -> (TermGrammar, usize, Vec<TraceRecord>) {
    let g = g.normalize();
    let mut src = NondetRules::new();
    src.add_grammar(&g);
    let mut next = g.next_id();
    let mut count = 0;
    let mut records = Vec::new();
    for (ci, clause) in p.clauses.iter().enumerate() {
        for imp in Implication::all(clause) {
            let contribution = solve_clause(clause, ci, imp, &g, sig);
            if detailed {
                records.push(TraceRecord {
                    clause: ci,
                    j: imp.index(clause),
                    rule: contribution.as_ref().map(ToString::to_string),
                });
            }
            if let Some(c) = contribution {
                let (renamed, _) = c.grammar.rename_apart(next);
                next = renamed.next_id();
                src.add_grammar(&renamed);
                count += 1;
            }
        }
    }
    let out = src
        .determinize(&[GrammarVar::CA, GrammarVar::SU])
        .normalize()
        .prune();
    (out, count, records)
}

fn atom_of(t: crate::term::Term) -> Option<Atom> {
    Atom::from_term(&t)
}

/// Checks that calls of constraint predicates in `g` stay within `g0`'s call
/// types. One warning per offending predicate.
pub fn constraint_call_check(g: &TermGrammar, g0: &TermGrammar, p: &Program) -> Vec<Warning> {
    let mut out = Vec::new();
    for q in &p.constraint_preds {
        if g.rule(GrammarVar::CA, q).is_none() {
            continue;
        }
        let calls = g.filter_root_rules(GrammarVar::CA, |f| f == q);
        let allowed = g0.filter_root_rules(GrammarVar::CA, |f| f == q);
        let ok = TermGrammar::includes_across(&allowed, GrammarVar::CA, &calls, GrammarVar::CA)
            .expect("roots always exist");
        if ok {
            continue;
        }
        let witness = calls
            .witness_outside(GrammarVar::CA, &allowed, GrammarVar::CA, WITNESS_DEPTH)
            .and_then(atom_of);
        let message = if g0.rule(GrammarVar::CA, q).is_none() {
            format!("{q} is called but the initial specification allows no calls of it")
        } else {
            format!("{q} may be called outside its allowed call type")
        };
        out.push(Warning {
            kind: WarningKind::ConstraintCallViolation,
            predicate: Some(q.clone()),
            message,
            witness,
        });
    }
    out
}

/// Replaces the root rules of `g` for symbols that `frozen` defines with
/// `frozen`'s, keeping everything discriminative.
fn restore_frozen(g: &TermGrammar, frozen: &TermGrammar) -> TermGrammar {
    let mut base = g.clone();
    for root in [GrammarVar::CA, GrammarVar::SU] {
        for f in frozen.rules_or_empty(root).keys() {
            base.remove_rule(root, f);
        }
    }
    let (renamed, _) = frozen.rename_apart(base.next_id());
    let mut src = NondetRules::new();
    src.add_grammar(&base);
    src.add_grammar(&renamed);
    src.determinize(&[GrammarVar::CA, GrammarVar::SU]).prune()
}

/// Drives the iteration from an initial specification grammar.
#[derive(Clone, Debug)]
pub struct Analyzer<'a> {
    program: &'a Program,
    g0: &'a TermGrammar,
    sig: Signature,
    widening: Option<WideningConfig>,
    max_iter: Option<usize>,
    detailed_trace: bool,
    keep_history: bool,
}

impl<'a> Analyzer<'a> {
    pub fn new(program: &'a Program, g0: &'a TermGrammar) -> Self {
        Analyzer {
            program,
            g0,
            sig: analysis_signature(program, g0),
            widening: Some(WideningConfig::default()),
            max_iter: Some(DEFAULT_MAX_ITER),
            detailed_trace: false,
            keep_history: false,
        }
    }

    /// `None` disables the restriction operator.
    pub fn widening(mut self, cfg: Option<WideningConfig>) -> Self {
        self.widening = cfg;
        self
    }

    pub fn max_iter(mut self, cap: Option<usize>) -> Self {
        self.max_iter = cap;
        self
    }

    /// Record one trace line per clause implication and step.
    pub fn detailed_trace(mut self, on: bool) -> Self {
        self.detailed_trace = on;
        self
    }

    /// Keep every intermediate grammar `H_i` in the report.
    pub fn keep_history(mut self, on: bool) -> Self {
        self.keep_history = on;
        self
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    /// Root rules of `g0` for predicates the program does not define. These
    /// are fixed by the user and never widened.
    fn frozen(&self) -> TermGrammar {
        let defined = &self.program.defined_preds;
        let mut g = self.g0.normalize();
        for root in [GrammarVar::CA, GrammarVar::SU] {
            let drop: Vec<FunctionSymbol> = g
                .rules_or_empty(root)
                .keys()
                .filter(|f| defined.contains(*f))
                .cloned()
                .collect();
            for f in drop {
                g.remove_rule(root, &f);
            }
        }
        g.prune()
    }

    fn widen(&self, g: &TermGrammar, frozen: &TermGrammar) -> TermGrammar {
        match &self.widening {
            None => restore_frozen(g, frozen),
            Some(cfg) => {
                let mut open = g.clone();
                for root in [GrammarVar::CA, GrammarVar::SU] {
                    for f in frozen.rules_or_empty(root).keys() {
                        open.remove_rule(root, f);
                    }
                }
                restore_frozen(&restrict(&open, cfg), frozen)
            }
        }
    }

    fn missing_call_types(&self) -> Vec<Warning> {
        let called: BTreeSet<&FunctionSymbol> = self
            .program
            .clauses
            .iter()
            .flat_map(|c| c.body.iter().map(|b| &b.predicate))
            .filter(|q| self.program.is_constraint(q))
            .collect();
        called
            .into_iter()
            .filter(|q| self.g0.rule(GrammarVar::CA, q).is_none())
            .map(|q| Warning {
                kind: WarningKind::ConstraintCallViolation,
                predicate: Some(q.clone()),
                message: format!(
                    "{q} is called but the initial specification allows no calls of it"
                ),
                witness: None,
            })
            .collect()
    }

    pub fn run(&self) -> AnalysisReport {
        let start = Instant::now();
        let mut warnings: Vec<Warning> = Vec::new();
        let mut seen: BTreeSet<(WarningKind, Option<FunctionSymbol>)> = BTreeSet::new();
        let mut push = |warnings: &mut Vec<Warning>, w: Warning| {
            if seen.insert((w.kind, w.predicate.clone())) {
                warnings.push(w);
            }
        };
        for w in self.missing_call_types() {
            push(&mut warnings, w);
        }

        let frozen = self.frozen();
        let mut current = self.widen(&self.g0.normalize(), &frozen);
        let mut history = Vec::new();
        if self.keep_history {
            history.push(current.clone());
        }
        let mut trace = Vec::new();
        let mut i = 0;
        loop {
            if self.max_iter.is_some_and(|cap| i >= cap) {
                push(
                    &mut warnings,
                    Warning {
                        kind: WarningKind::IterationCapReached,
                        predicate: None,
                        message: format!("stopped after {i} iterations without reaching a fixpoint"),
                        witness: None,
                    },
                );
                break;
            }
            i += 1;
            let (stepped, contributions, records) =
                step_with_trace(&current, self.program, &self.sig, self.detailed_trace);
            let step_warnings = constraint_call_check(&stepped, self.g0, self.program);
            let n_warn = step_warnings.len();
            for w in step_warnings {
                push(&mut warnings, w);
            }
            let next = self.widen(&stepped, &frozen);
            trace.push(StepSummary {
                iteration: i,
                contributions,
                rules_before_widening: stepped.size(),
                rules: next.size(),
                vars: next.num_vars(),
                warnings: n_warn,
                records,
            });
            let fixpoint = current.interface_includes(&next);
            current = next;
            if self.keep_history {
                history.push(current.clone());
            }
            if fixpoint {
                break;
            }
        }

        AnalysisReport {
            grammar: current.renumbered(),
            predicates: self.program.predicates().into_iter().collect(),
            iterations: i,
            warnings,
            trace,
            widening: self.widening,
            elapsed: start.elapsed(),
            history,
        }
    }
}

/// Runs the analysis with widening `cfg` and an optional iteration cap.
pub fn analyze(
    p: &Program,
    g0: &TermGrammar,
    cfg: &WideningConfig,
    cap: Option<usize>,
) -> AnalysisReport {
    Analyzer::new(p, g0)
        .widening(Some(*cfg))
        .max_iter(cap)
        .run()
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    Calls,
    Successes,
    ConstraintCalls,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Calls => "calls",
            Condition::Successes => "successes",
            Condition::ConstraintCalls => "constraint calls",
        })
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Reason {
    pub condition: Condition,
    pub message: String,
    pub witness: Option<Atom>,
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.condition, self.message)?;
        if let Some(w) = &self.witness {
            write!(f, " (witness: {w})")?;
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Verdict {
    Correct,
    /// The sufficient condition failed; the program may still be correct.
    NotVerified(Vec<Reason>),
}

impl Verdict {
    pub fn is_correct(&self) -> bool {
        matches!(self, Verdict::Correct)
    }
}

/// Checks `p` against `spec` with one unwidened step: the specification is
/// verified when the step adds no call and no success outside it.
pub fn check_specification(p: &Program, spec: &TermGrammar) -> Verdict {
    let sig = analysis_signature(p, spec);
    let spec = spec.normalize();
    let stepped = iteration_step(&spec, p, &sig);
    let mut reasons = Vec::new();
    for w in constraint_call_check(&stepped, &spec, p) {
        reasons.push(Reason {
            condition: Condition::ConstraintCalls,
            message: w.message,
            witness: w.witness,
        });
    }
    for (root, condition, what) in [
        (GrammarVar::CA, Condition::Calls, "call"),
        (GrammarVar::SU, Condition::Successes, "success"),
    ] {
        let ok = TermGrammar::includes_across(&spec, root, &stepped, root).expect("roots exist");
        if !ok {
            reasons.push(Reason {
                condition,
                message: format!("the program may produce a {what} the specification does not allow"),
                witness: stepped
                    .witness_outside(root, &spec, root, WITNESS_DEPTH)
                    .and_then(atom_of),
            });
        }
    }
    if reasons.is_empty() {
        Verdict::Correct
    } else {
        Verdict::NotVerified(reasons)
    }
}
