//! Readers for program files and grammar files.
//!
//! Programs use a small Edinburgh-style subset: `head.` and
//! `head :- b1, ..., bn.` clauses, `%` line comments, integers (abstracted to
//! `$num`) and the directive `:- constraint name/arity.`.
//!
//! Grammars are sequences of rules `Lhs > f(V1, ..., Vn).`; `ca`, `su` and
//! `any` (any case) name the call root, the success root and the universal set.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::grammar::{GrammarError, GrammarVar, TermGrammar};
use crate::term::{Atom, Clause, FunctionSymbol, Program, Signature, Term, NUMERAL};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: `{name}` used with arity {found}, earlier with arity {previous}")]
    ArityClash {
        line: usize,
        col: usize,
        name: String,
        previous: usize,
        found: usize,
    },
    #[error("{line}:{col}: grammar is not discriminative: `{var}` has two rules for {symbol}")]
    NotDiscriminative {
        line: usize,
        col: usize,
        var: String,
        symbol: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(String),
    Numeral,
    LParen,
    RParen,
    Comma,
    Dot,
    Neck,
    Gt,
    Slash,
    Eof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pos {
    line: usize,
    col: usize,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) | Tok::Var(s) => format!("`{s}`"),
        Tok::Int(n) => format!("`{n}`"),
        Tok::Numeral => format!("`{NUMERAL}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Dot => "`.`".into(),
        Tok::Neck => "`:-`".into(),
        Tok::Gt => "`>`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Eof => "end of input".into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let syntax = |pos: Pos, msg: String| ParseError::Syntax {
        line: pos.line,
        col: pos.col,
        msg,
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if c.is_ascii_lowercase() {
                Tok::Ident(word)
            } else {
                Tok::Var(word)
            }
        } else if c.is_ascii_digit()
            || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            Tok::Int(chars[start..i].iter().collect())
        } else if c == '$' {
            i += 1;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if word != NUMERAL {
                return Err(syntax(pos, format!("unexpected `{word}`")));
            }
            Tok::Numeral
        } else if c == ':' && chars.get(i + 1) == Some(&'-') {
            i += 2;
            Tok::Neck
        } else {
            i += 1;
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                '>' => Tok::Gt,
                '/' => Tok::Slash,
                _ => return Err(syntax(pos, format!("unexpected character `{c}`"))),
            }
        };
        col += i - start;
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

struct Cursor {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Cursor {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let pos = self.pos();
        Err(ParseError::Syntax {
            line: pos.line,
            col: pos.col,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, want: Tok) -> Result<Pos, ParseError> {
        if *self.peek() == want {
            Ok(self.bump().1)
        } else {
            self.error(format!(
                "expected {}, found {}",
                describe(&want),
                describe(self.peek())
            ))
        }
    }

    fn eat(&mut self, want: &Tok) -> bool {
        if self.peek() == want {
            self.bump();
            true
        } else {
            false
        }
    }
}

/// Remembers the arity each name was first used with.
#[derive(Default)]
struct Arities(BTreeMap<String, usize>);

impl Arities {
    fn check(&mut self, name: &str, arity: usize, pos: Pos) -> Result<(), ParseError> {
        match self.0.get(name) {
            Some(&previous) if previous != arity => Err(ParseError::ArityClash {
                line: pos.line,
                col: pos.col,
                name: name.to_string(),
                previous,
                found: arity,
            }),
            Some(_) => Ok(()),
            None => {
                self.0.insert(name.to_string(), arity);
                Ok(())
            }
        }
    }
}

struct ProgramParser {
    cur: Cursor,
    functions: Arities,
    predicates: Arities,
    anon: usize,
}

impl ProgramParser {
    fn term(&mut self) -> Result<Term, ParseError> {
        let (tok, pos) = self.bump_term_start()?;
        match tok {
            Tok::Var(v) if v == "_" => {
                self.anon += 1;
                Ok(Term::var(&format!("_{}", self.anon)))
            }
            Tok::Var(v) => Ok(Term::var(&v)),
            Tok::Int(_) | Tok::Numeral => {
                self.functions.check(NUMERAL, 0, pos)?;
                Ok(Term::App(FunctionSymbol::numeral(), Vec::new()))
            }
            Tok::Ident(name) => {
                let args = self.args()?;
                self.functions.check(&name, args.len(), pos)?;
                Ok(Term::App(FunctionSymbol::new(&name, args.len()), args))
            }
            _ => unreachable!("filtered by bump_term_start"),
        }
    }

    fn bump_term_start(&mut self) -> Result<(Tok, Pos), ParseError> {
        match self.cur.peek() {
            Tok::Var(_) | Tok::Int(_) | Tok::Numeral | Tok::Ident(_) => Ok(self.cur.bump()),
            other => {
                let msg = format!("expected a term, found {}", describe(other));
                self.cur.error(msg)
            }
        }
    }

    fn args(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut args = Vec::new();
        if self.cur.eat(&Tok::LParen) {
            loop {
                args.push(self.term()?);
                if !self.cur.eat(&Tok::Comma) {
                    break;
                }
            }
            self.cur.expect(Tok::RParen)?;
        }
        Ok(args)
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let pos = self.cur.pos();
        match self.cur.peek().clone() {
            Tok::Ident(name) => {
                self.cur.bump();
                let args = self.args()?;
                self.predicates.check(&name, args.len(), pos)?;
                Ok(Atom::new(&name, args))
            }
            other => self
                .cur
                .error(format!("expected an atom, found {}", describe(&other))),
        }
    }

    fn directive(&mut self) -> Result<FunctionSymbol, ParseError> {
        match self.cur.bump().0 {
            Tok::Ident(d) if d == "constraint" => {}
            _ => return self.cur.error("unknown directive; only `constraint` is supported"),
        }
        let pos = self.cur.pos();
        let name = match self.cur.bump().0 {
            Tok::Ident(n) => n,
            _ => return self.cur.error("expected a predicate name"),
        };
        self.cur.expect(Tok::Slash)?;
        let arity = match self.cur.peek().clone() {
            Tok::Int(n) => match n.parse::<usize>() {
                Ok(a) => {
                    self.cur.bump();
                    a
                }
                Err(_) => return self.cur.error(format!("invalid arity `{n}`")),
            },
            _ => return self.cur.error("expected an arity"),
        };
        self.cur.expect(Tok::Dot)?;
        self.predicates.check(&name, arity, pos)?;
        Ok(FunctionSymbol::new(&name, arity))
    }
}

/// Parses a program and classifies its predicates.
///
/// Predicates called but never defined become constraint predicates, as do
/// predicates named in a `:- constraint p/n.` directive (their clauses are
/// set aside in `Program::overridden`).
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let toks = lex(text)?;
    let mut p = ProgramParser {
        cur: Cursor { toks, at: 0 },
        functions: Arities::default(),
        predicates: Arities::default(),
        anon: 0,
    };
    let mut clauses = Vec::new();
    let mut declared = BTreeSet::new();
    while *p.cur.peek() != Tok::Eof {
        if p.cur.eat(&Tok::Neck) {
            declared.insert(p.directive()?);
            continue;
        }
        let head = p.atom()?;
        let mut body = Vec::new();
        if p.cur.eat(&Tok::Neck) {
            loop {
                body.push(p.atom()?);
                if !p.cur.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        p.cur.expect(Tok::Dot)?;
        clauses.push(Clause { head, body });
    }
    Ok(build_program(clauses, declared))
}

fn build_program(all: Vec<Clause>, declared: BTreeSet<FunctionSymbol>) -> Program {
    let (overridden, clauses): (Vec<Clause>, Vec<Clause>) = all
        .into_iter()
        .partition(|c| declared.contains(&c.head.predicate));
    let defined_preds: BTreeSet<FunctionSymbol> =
        clauses.iter().map(|c| c.head.predicate.clone()).collect();
    let mut constraint_preds = declared.clone();
    let mut signature = Signature::new();
    for c in clauses.iter().chain(&overridden) {
        for a in std::iter::once(&c.head).chain(&c.body) {
            if !defined_preds.contains(&a.predicate) {
                constraint_preds.insert(a.predicate.clone());
            }
            a.args.iter().for_each(|t| t.collect_symbols(&mut signature));
        }
    }
    Program {
        clauses,
        defined_preds,
        constraint_preds,
        declared_constraints: declared,
        overridden,
        signature,
    }
}

struct RawRule {
    lhs: String,
    lhs_pos: Pos,
    symbol: String,
    sym_pos: Pos,
    children: Vec<String>,
}

fn is_reserved(name: &str, word: &str) -> bool {
    name.eq_ignore_ascii_case(word)
}

/// Parses a grammar file.
///
/// Function symbols outside `Ca`/`Su` rules that are new to `sig` are added to
/// it; a symbol clashing in arity with `sig` is an error. `any` becomes a
/// variable with one rule per symbol of the final signature.
pub fn parse_grammar(text: &str, sig: &mut Signature) -> Result<TermGrammar, ParseError> {
    let mut cur = Cursor {
        toks: lex(text)?,
        at: 0,
    };
    let mut raw = Vec::new();
    while *cur.peek() != Tok::Eof {
        let lhs_pos = cur.pos();
        let lhs = match cur.bump().0 {
            Tok::Ident(n) if is_reserved(&n, "ca") || is_reserved(&n, "su") => n,
            Tok::Var(n) if n != "_" => n,
            t => {
                return Err(ParseError::Syntax {
                    line: lhs_pos.line,
                    col: lhs_pos.col,
                    msg: format!("expected a grammar variable, found {}", describe(&t)),
                })
            }
        };
        if is_reserved(&lhs, "any") {
            return Err(ParseError::Syntax {
                line: lhs_pos.line,
                col: lhs_pos.col,
                msg: "`any` is predefined and cannot be given rules".into(),
            });
        }
        cur.expect(Tok::Gt)?;
        let sym_pos = cur.pos();
        let symbol = match cur.bump().0 {
            Tok::Ident(n) => n,
            Tok::Int(_) | Tok::Numeral => NUMERAL.to_string(),
            t => {
                return Err(ParseError::Syntax {
                    line: sym_pos.line,
                    col: sym_pos.col,
                    msg: format!("expected a function symbol, found {}", describe(&t)),
                })
            }
        };
        let mut children = Vec::new();
        if cur.eat(&Tok::LParen) {
            if symbol == NUMERAL {
                return cur.error("`$num` takes no arguments");
            }
            loop {
                let p = cur.pos();
                match cur.bump().0 {
                    Tok::Var(n) if n != "_" => children.push(n),
                    Tok::Ident(n)
                        if ["ca", "su", "any"].iter().any(|w| is_reserved(&n, w)) =>
                    {
                        children.push(n)
                    }
                    t => {
                        return Err(ParseError::Syntax {
                            line: p.line,
                            col: p.col,
                            msg: format!("expected a grammar variable, found {}", describe(&t)),
                        })
                    }
                }
                if !cur.eat(&Tok::Comma) {
                    break;
                }
            }
            cur.expect(Tok::RParen)?;
        }
        cur.expect(Tok::Dot)?;
        raw.push(RawRule {
            lhs,
            lhs_pos,
            symbol,
            sym_pos,
            children,
        });
    }

    // settle the signature first so `any` covers the grammar's own symbols
    let mut functions = Arities(sig.iter().map(|f| (f.name().to_string(), f.arity())).collect());
    let mut predicates = Arities::default();
    for r in &raw {
        let root = is_reserved(&r.lhs, "ca") || is_reserved(&r.lhs, "su");
        let table = if root { &mut predicates } else { &mut functions };
        table.check(&r.symbol, r.children.len(), r.sym_pos)?;
        if !root {
            sig.insert(FunctionSymbol::new(&r.symbol, r.children.len()));
        }
    }

    let mut g = TermGrammar::new();
    let mut vars: BTreeMap<String, GrammarVar> = BTreeMap::new();
    let mut any: Option<GrammarVar> = None;
    let mut resolve = |g: &mut TermGrammar, name: &str| -> GrammarVar {
        if is_reserved(name, "ca") {
            GrammarVar::CA
        } else if is_reserved(name, "su") {
            GrammarVar::SU
        } else if is_reserved(name, "any") {
            *any.get_or_insert_with(|| g.add_universal(sig))
        } else {
            *vars
                .entry(name.to_string())
                .or_insert_with(|| g.fresh_named(name))
        }
    };
    for r in &raw {
        let lhs = resolve(&mut g, &r.lhs);
        let children: Vec<GrammarVar> = r.children.iter().map(|c| resolve(&mut g, c)).collect();
        let symbol = FunctionSymbol::new(&r.symbol, children.len());
        match g.add_rule(lhs, symbol, children) {
            Ok(()) => {}
            Err(GrammarError::NotDiscriminative { symbol, .. }) => {
                return Err(ParseError::NotDiscriminative {
                    line: r.lhs_pos.line,
                    col: r.lhs_pos.col,
                    var: r.lhs.clone(),
                    symbol: symbol.to_string(),
                })
            }
            Err(e) => unreachable!("arity fixed by construction: {e}"),
        }
    }
    Ok(g)
}
