//! Directional type inference for logic programs.
//!
//! Call and success sets of a program are approximated by discriminative term
//! grammars. The analysis iterates a grammar transformer built from the
//! program's clauses, keeps the grammars in a finite domain with a
//! principal-label widening, and checks that calls of constraint (built-in or
//! undefined) predicates stay within the types the user allowed for them.

pub mod engine;
pub mod grammar;
pub mod oracle;
pub mod parse;
pub mod report;
pub mod restrict;
pub mod solver;
pub mod term;

pub use engine::{analyze, check_specification, iteration_step, Analyzer, Verdict, Warning, WarningKind};
pub use grammar::{GrammarError, GrammarRule, GrammarVar, TermGrammar};
pub use parse::{parse_grammar, parse_program, ParseError};
pub use report::AnalysisReport;
pub use restrict::{restrict, Variant, WideningConfig};
pub use term::{Atom, Clause, FunctionSymbol, Program, Signature, Term};
