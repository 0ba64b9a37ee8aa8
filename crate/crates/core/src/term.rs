//! The object language: function symbols, terms, atoms, clauses and programs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// Name of the constant every numeric literal is abstracted to.
pub const NUMERAL: &str = "$num";

/// A function (or predicate) symbol together with its arity.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FunctionSymbol {
    name: Arc<str>,
    arity: usize,
}

impl FunctionSymbol {
    pub fn new(name: &str, arity: usize) -> Self {
        FunctionSymbol {
            name: Arc::from(name),
            arity,
        }
    }

    pub fn numeral() -> Self {
        FunctionSymbol::new(NUMERAL, 0)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }
}

impl fmt::Display for FunctionSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

impl fmt::Debug for FunctionSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// The finite set of function symbols terms may be built from.
pub type Signature = BTreeSet<FunctionSymbol>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Arc<str>),
    App(FunctionSymbol, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Arc::from(name))
    }

    pub fn constant(name: &str) -> Term {
        Term::App(FunctionSymbol::new(name, 0), Vec::new())
    }

    /// Builds `name(args...)`; the arity is taken from `args`.
    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(FunctionSymbol::new(name, args.len()), args)
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Height of the term tree; constants and variables have height 1.
    pub fn height(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::height).max().unwrap_or(0),
        }
    }

    pub fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Term::Var(v) => {
                if !out.contains(&&**v) {
                    out.push(v);
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn collect_symbols(&self, out: &mut Signature) {
        if let Term::App(f, args) = self {
            out.insert(f.clone());
            args.iter().for_each(|a| a.collect_symbols(out));
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(sym, args) => write_app(f, sym.name(), args),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn write_app(f: &mut fmt::Formatter<'_>, name: &str, args: &[Term]) -> fmt::Result {
    write!(f, "{name}")?;
    if !args.is_empty() {
        write!(f, "(")?;
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")?;
    }
    Ok(())
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: FunctionSymbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(name: &str, args: Vec<Term>) -> Atom {
        Atom {
            predicate: FunctionSymbol::new(name, args.len()),
            args,
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    /// The atom viewed as a term, with the predicate in function position.
    pub fn to_term(&self) -> Term {
        Term::App(self.predicate.clone(), self.args.clone())
    }

    pub fn from_term(t: &Term) -> Option<Atom> {
        match t {
            Term::App(f, args) => Some(Atom {
                predicate: f.clone(),
                args: args.clone(),
            }),
            Term::Var(_) => None,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_app(f, self.predicate.name(), &self.args)
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl Clause {
    /// Variables of the clause in order of first occurrence.
    pub fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for a in std::iter::once(&self.head).chain(&self.body) {
            a.args.iter().for_each(|t| t.collect_vars(&mut out));
        }
        out
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        for (i, b) in self.body.iter().enumerate() {
            write!(f, "{}{b}", if i == 0 { " :- " } else { ", " })?;
        }
        write!(f, ".")
    }
}

/// A logic program with its predicates split into defined and constraint ones.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Program {
    pub clauses: Vec<Clause>,
    pub defined_preds: BTreeSet<FunctionSymbol>,
    pub constraint_preds: BTreeSet<FunctionSymbol>,
    /// Predicates declared with `:- constraint p/n.`, kept so printing round-trips.
    pub declared_constraints: BTreeSet<FunctionSymbol>,
    /// Clauses of declared constraint predicates; not analyzed.
    pub overridden: Vec<Clause>,
    pub signature: Signature,
}

impl Program {
    pub fn is_constraint(&self, pred: &FunctionSymbol) -> bool {
        self.constraint_preds.contains(pred)
    }

    /// Clauses grouped by head predicate, in program order.
    pub fn clauses_by_pred(&self) -> BTreeMap<&FunctionSymbol, Vec<&Clause>> {
        let mut out: BTreeMap<_, Vec<_>> = BTreeMap::new();
        for c in &self.clauses {
            out.entry(&c.head.predicate).or_default().push(c);
        }
        out
    }

    /// Every predicate mentioned, defined or not.
    pub fn predicates(&self) -> BTreeSet<FunctionSymbol> {
        self.defined_preds
            .union(&self.constraint_preds)
            .cloned()
            .collect()
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.declared_constraints {
            writeln!(f, ":- constraint {p}.")?;
        }
        for c in self.clauses.iter().chain(&self.overridden) {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}
