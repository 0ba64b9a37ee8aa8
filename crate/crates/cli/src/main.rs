use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use regal::engine::{Condition, Verdict};
use regal::oracle::soundness_suite;
use regal::report::RenderOptions;
use regal::{
    check_specification, parse_grammar, parse_program, restrict, Analyzer, Program, Signature,
    TermGrammar, Variant, WideningConfig,
};

#[derive(Parser)]
#[command(name = "regal", version, about = "Directional type inference for logic programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Infer call and success types starting from an initial specification.
    Infer(InferArgs),
    /// Check a program against a call/success specification.
    Check(CheckArgs),
    /// Grammar algebra on grammar files.
    Gram {
        #[command(subcommand)]
        op: GramOp,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum WideningArg {
    Principal,
    Count,
    Depth,
    Off,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct WideningArgs {
    /// Widening bound.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, value_enum, default_value = "principal")]
    widening: WideningArg,
}

impl WideningArgs {
    fn config(&self) -> Result<Option<WideningConfig>, String> {
        let variant = match self.widening {
            WideningArg::Principal => Variant::PrincipalLabel,
            WideningArg::Count => Variant::OccurrenceCount,
            WideningArg::Depth => Variant::DepthBound,
            WideningArg::Off => return Ok(None),
        };
        WideningConfig::new(variant, self.k).map(Some)
    }
}

/// Iteration cap; `none` means unbounded.
#[derive(Clone, Copy)]
struct MaxIter(Option<usize>);

fn parse_max_iter(s: &str) -> Result<MaxIter, String> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(MaxIter(None));
    }
    s.parse::<usize>()
        .map(|n| MaxIter(Some(n)))
        .map_err(|_| format!("expected a number or `none`, got `{s}`"))
}

#[derive(Args)]
struct InferArgs {
    program: PathBuf,
    /// Initial specification grammar.
    #[arg(long)]
    spec: PathBuf,
    #[command(flatten)]
    widening: WideningArgs,
    #[arg(long, default_value = "10000", value_parser = parse_max_iter)]
    max_iter: MaxIter,
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    timing: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Run the bounded interpreter and check the result against it.
    #[arg(long)]
    verify_sound: bool,
    #[arg(long, default_value_t = 3)]
    goal_depth: usize,
    #[arg(long, default_value_t = 12)]
    deriv_depth: usize,
}

#[derive(Args)]
struct CheckArgs {
    program: PathBuf,
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Subcommand)]
enum GramOp {
    /// Over-approximating union of the Ca and Su sets of two grammars.
    Union { a: PathBuf, b: PathBuf },
    /// Intersection of the Ca and Su sets of two grammars.
    Intersect { a: PathBuf, b: PathBuf },
    /// Does A include B on Ca and Su?
    Includes { a: PathBuf, b: PathBuf },
    /// Apply the restriction operator.
    Restrict {
        grammar: PathBuf,
        #[command(flatten)]
        widening: WideningArgs,
    },
}

struct InputError(String);

fn read(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<Program, InputError> {
    parse_program(&read(path)?).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_grammar(path: &Path, sig: &mut Signature) -> Result<TermGrammar, InputError> {
    parse_grammar(&read(path)?, sig).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn infer(args: &InferArgs) -> Result<(String, bool), InputError> {
    let program = load_program(&args.program)?;
    let mut sig = program.signature.clone();
    let g0 = load_grammar(&args.spec, &mut sig)?;
    let widening = args.widening.config().map_err(InputError)?;
    let report = Analyzer::new(&program, &g0)
        .widening(widening)
        .max_iter(args.max_iter.0)
        .detailed_trace(args.trace)
        .run();
    let opts = RenderOptions {
        trace: args.trace,
        timing: args.timing,
    };
    let mut clean = report.is_clean();
    let mut out = match args.format {
        Format::Text => report.render_text(opts),
        Format::Json => report.render_json(opts),
    };
    if args.verify_sound {
        let outcome = soundness_suite(&program, &g0, &report.grammar, args.goal_depth, args.deriv_depth)
            .map_err(|e| InputError(format!("soundness check: {e}")))?;
        clean &= outcome.is_sound();
        match args.format {
            Format::Text => {
                let _ = writeln!(
                    out,
                    "\n% soundness: {} goals, {} calls, {} successes observed, {} truncated",
                    outcome.goals, outcome.calls, outcome.successes, outcome.truncated
                );
                for c in &outcome.counterexamples {
                    let what = if c.is_call { "call" } else { "success" };
                    let _ = writeln!(out, "% not covered: {what} {} (goal {})", c.atom, c.goal);
                }
            }
            Format::Json => {
                let mut v: serde_json::Value =
                    serde_json::from_str(&out).expect("report is valid json");
                v["soundness"] = serde_json::json!({
                    "goals": outcome.goals,
                    "calls": outcome.calls,
                    "successes": outcome.successes,
                    "truncated": outcome.truncated,
                    "counterexamples": outcome.counterexamples.iter().map(|c| serde_json::json!({
                        "kind": if c.is_call { "call" } else { "success" },
                        "atom": c.atom.to_string(),
                        "goal": c.goal.to_string(),
                    })).collect::<Vec<_>>(),
                });
                out = serde_json::to_string_pretty(&v).expect("json") + "\n";
            }
        }
    }
    Ok((out, clean))
}

fn condition_key(c: Condition) -> &'static str {
    match c {
        Condition::Calls => "calls",
        Condition::Successes => "successes",
        Condition::ConstraintCalls => "constraint-calls",
    }
}

fn check(args: &CheckArgs) -> Result<(String, bool), InputError> {
    let program = load_program(&args.program)?;
    let mut sig = program.signature.clone();
    let spec = load_grammar(&args.spec, &mut sig)?;
    let verdict = check_specification(&program, &spec);
    let reasons = match &verdict {
        Verdict::Correct => Vec::new(),
        Verdict::NotVerified(r) => r.clone(),
    };
    let out = match args.format {
        Format::Text => {
            let mut out = String::new();
            if verdict.is_correct() {
                out.push_str("correct\n");
            } else {
                out.push_str("not verified\n");
                for r in &reasons {
                    let _ = writeln!(out, "% {r}");
                }
            }
            out
        }
        Format::Json => {
            let v = serde_json::json!({
                "verdict": if verdict.is_correct() { "correct" } else { "not-verified" },
                "reasons": reasons.iter().map(|r| serde_json::json!({
                    "condition": condition_key(r.condition),
                    "message": r.message,
                    "witness": r.witness.as_ref().map(ToString::to_string),
                })).collect::<Vec<_>>(),
            });
            serde_json::to_string_pretty(&v).expect("json") + "\n"
        }
    };
    Ok((out, verdict.is_correct()))
}

fn gram(op: &GramOp) -> Result<(String, bool), InputError> {
    let mut sig = Signature::new();
    match op {
        GramOp::Union { a, b } => {
            let (a, b) = (load_grammar(a, &mut sig)?, load_grammar(b, &mut sig)?);
            Ok((a.interface_union(&b).to_text(), true))
        }
        GramOp::Intersect { a, b } => {
            let (a, b) = (load_grammar(a, &mut sig)?, load_grammar(b, &mut sig)?);
            Ok((a.interface_intersection(&b).to_text(), true))
        }
        GramOp::Includes { a, b } => {
            let (a, b) = (load_grammar(a, &mut sig)?, load_grammar(b, &mut sig)?);
            if a.interface_includes(&b) {
                return Ok(("true\n".into(), true));
            }
            let mut out = String::from("false\n");
            for root in [regal::GrammarVar::CA, regal::GrammarVar::SU] {
                if let Some(w) = b.normalize().witness_outside(root, &a, root, 4) {
                    let _ = writeln!(out, "% witness: {w}");
                }
            }
            Ok((out, false))
        }
        GramOp::Restrict { grammar, widening } => {
            let g = load_grammar(grammar, &mut sig)?;
            let out = match widening.config().map_err(InputError)? {
                Some(cfg) => restrict(&g, &cfg),
                None => g.normalize().prune(),
            };
            Ok((out.to_text(), true))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Infer(args) => infer(args),
        Command::Check(args) => check(args),
        Command::Gram { op } => gram(op),
    };
    match result {
        Ok((out, clean)) => {
            print!("{out}");
            ExitCode::from(if clean { 0 } else { 1 })
        }
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
