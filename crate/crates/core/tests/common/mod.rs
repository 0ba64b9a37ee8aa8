#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use regal::grammar::{discriminative_approx, GrammarRule, RuleView};
use regal::restrict::codomain_certificate;
use regal::{
    parse_grammar, parse_program, restrict, Analyzer, FunctionSymbol, GrammarVar, Program,
    Signature, Term, TermGrammar, Variant, WideningConfig,
};

pub fn seed() -> u64 {
    std::env::var("REGAL_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(20_240_917)
}

pub fn rng(stream: u64) -> StdRng {
    StdRng::seed_from_u64(seed() ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

pub fn sym(name: &str, arity: usize) -> FunctionSymbol {
    FunctionSymbol::new(name, arity)
}

/// `{a/0, b/0, f/1, g/2}`
pub fn sig4() -> Vec<FunctionSymbol> {
    vec![sym("a", 0), sym("b", 0), sym("f", 1), sym("g", 2)]
}

// ---------------------------------------------------------------------------
// Brute-force semantics over plain rule lists, independent of grammar-core.

pub fn rules_of(g: &TermGrammar) -> Vec<GrammarRule> {
    g.rule_list()
}

/// All terms of height at most `depth` derivable from `x`.
pub fn oracle_enum(rules: &[GrammarRule], x: GrammarVar, depth: usize) -> BTreeSet<Term> {
    let mut vars: BTreeSet<GrammarVar> = BTreeSet::new();
    for r in rules {
        vars.insert(r.lhs);
        vars.extend(r.children.iter().copied());
    }
    vars.insert(x);
    let mut level: std::collections::BTreeMap<GrammarVar, BTreeSet<Term>> =
        vars.iter().map(|&v| (v, BTreeSet::new())).collect();
    for _ in 0..depth {
        let mut next = level.clone();
        for r in rules {
            let mut tuples: Vec<Vec<Term>> = vec![vec![]];
            for c in &r.children {
                let mut grown = Vec::new();
                for t in &tuples {
                    for u in &level[c] {
                        let mut t = t.clone();
                        t.push(u.clone());
                        grown.push(t);
                    }
                }
                tuples = grown;
            }
            let out = next.get_mut(&r.lhs).unwrap();
            for args in tuples {
                out.insert(Term::App(r.symbol.clone(), args));
            }
        }
        level = next;
    }
    level.remove(&x).unwrap_or_default()
}

pub fn oracle_member(rules: &[GrammarRule], t: &Term, x: GrammarVar) -> bool {
    let Term::App(f, args) = t else { return false };
    rules.iter().any(|r| {
        r.lhs == x
            && &r.symbol == f
            && r.children
                .iter()
                .zip(args)
                .all(|(&c, a)| oracle_member(rules, a, c))
    })
}

/// Every ground term over `sig` of height at most `depth`.
pub fn universe(sig: &[FunctionSymbol], depth: usize) -> BTreeSet<Term> {
    let mut cur: BTreeSet<Term> = BTreeSet::new();
    for _ in 0..depth {
        let prev: Vec<Term> = cur.iter().cloned().collect();
        let mut next = BTreeSet::new();
        for f in sig {
            let mut tuples: Vec<Vec<Term>> = vec![vec![]];
            for _ in 0..f.arity() {
                tuples = tuples
                    .into_iter()
                    .flat_map(|t| {
                        prev.iter().map(move |u| {
                            let mut t = t.clone();
                            t.push(u.clone());
                            t
                        })
                    })
                    .collect();
            }
            next.extend(tuples.into_iter().map(|a| Term::App(f.clone(), a)));
        }
        cur = next;
    }
    cur
}

// ---------------------------------------------------------------------------
// Generators.

/// A discriminative grammar with `n` non-root variables over `sig`.
pub fn random_grammar(
    rng: &mut StdRng,
    sig: &[FunctionSymbol],
    n: usize,
    density: f64,
) -> (TermGrammar, Vec<GrammarVar>) {
    let mut g = TermGrammar::new();
    let vars: Vec<GrammarVar> = (0..n).map(|_| g.fresh()).collect();
    for &x in &vars {
        for f in sig {
            if rng.gen_bool(density) {
                let kids = (0..f.arity()).map(|_| *vars.choose(rng).unwrap()).collect();
                g.add_rule(x, f.clone(), kids).unwrap();
            }
        }
    }
    (g, vars)
}

/// Rules that may violate discriminativity.
pub fn random_rules(rng: &mut StdRng, sig: &[FunctionSymbol], n: usize) -> Vec<GrammarRule> {
    let vars: Vec<GrammarVar> = (2..2 + n as u32).map(GrammarVar::from_id).collect();
    let mut out = Vec::new();
    for &x in &vars {
        for f in sig {
            for _ in 0..rng.gen_range(0..=2) {
                out.push(GrammarRule {
                    lhs: x,
                    symbol: f.clone(),
                    children: (0..f.arity()).map(|_| *vars.choose(rng).unwrap()).collect(),
                });
            }
        }
    }
    out
}

/// A grammar shaped like the ones the analysis produces: `Ca` and `Su` rules
/// for predicates `p/1` and `q/2` over a random body.
pub fn random_analysis_grammar(rng: &mut StdRng, sig: &[FunctionSymbol], n: usize) -> TermGrammar {
    let (mut g, vars) = random_grammar(rng, sig, n, 0.45);
    for root in [GrammarVar::CA, GrammarVar::SU] {
        for p in [sym("p", 1), sym("q", 2)] {
            if rng.gen_bool(0.8) {
                let kids = (0..p.arity()).map(|_| *vars.choose(rng).unwrap()).collect();
                g.add_rule(root, p, kids).unwrap();
            }
        }
    }
    g
}

fn random_term(rng: &mut StdRng, depth: usize, vars: &[&str]) -> String {
    if depth == 0 || rng.gen_bool(0.45) {
        return if rng.gen_bool(0.6) {
            vars.choose(rng).unwrap().to_string()
        } else {
            ["a", "b"].choose(rng).unwrap().to_string()
        };
    }
    if rng.gen_bool(0.5) {
        format!("f({})", random_term(rng, depth - 1, vars))
    } else {
        format!(
            "g({}, {})",
            random_term(rng, depth - 1, vars),
            random_term(rng, depth - 1, vars)
        )
    }
}

const PREDS: [(&str, usize); 5] = [("p", 1), ("q", 2), ("r", 1), ("s", 0), ("c", 1)];

fn random_atom(rng: &mut StdRng, pred: (&str, usize), vars: &[&str]) -> String {
    let (name, arity) = pred;
    if arity == 0 {
        return name.to_string();
    }
    let args: Vec<String> = (0..arity).map(|_| random_term(rng, 2, vars)).collect();
    format!("{name}({})", args.join(", "))
}

/// A random program of at most `max_clauses` clauses over `p/1, q/2, r/1,
/// s/0`, calling the constraint predicate `c/1`, together with an initial
/// specification.
pub fn random_program(rng: &mut StdRng, max_clauses: usize) -> (Program, TermGrammar, String) {
    let vars = ["X", "Y", "Z", "W"];
    let n = rng.gen_range(1..=max_clauses);
    let mut text = String::new();
    for _ in 0..n {
        let head = PREDS[rng.gen_range(0..4)];
        text.push_str(&random_atom(rng, head, &vars));
        let body_len = rng.gen_range(0..=3);
        if body_len > 0 {
            let body: Vec<String> = (0..body_len)
                .map(|_| {
                    let pred = *PREDS.choose(rng).unwrap();
                    random_atom(rng, pred, &vars)
                })
                .collect();
            text.push_str(" :- ");
            text.push_str(&body.join(", "));
        }
        text.push_str(".\n");
    }
    let program = parse_program(&text).expect("generated program parses");

    let mut g0 = String::new();
    let entry = PREDS[rng.gen_range(0..4)];
    match entry.1 {
        0 => g0.push_str(&format!("ca > {}.\n", entry.0)),
        1 => g0.push_str(&format!("ca > {}(T).\n", entry.0)),
        _ => g0.push_str(&format!("ca > {}(T, any).\n", entry.0)),
    }
    g0.push_str("T > a.\n");
    if rng.gen_bool(0.5) {
        g0.push_str("T > f(T).\n");
    }
    if rng.gen_bool(0.5) {
        g0.push_str("T > g(T, T).\n");
    }
    g0.push_str("ca > c(any).\nsu > c(C).\nC > b.\nC > f(C).\n");
    let mut sig = program.signature.clone();
    let g0 = parse_grammar(&g0, &mut sig).expect("generated spec parses");
    (program, g0, text)
}

/// `n` clauses over a layered call graph with list and tree builders.
pub fn synthetic_program(n: usize) -> (Program, TermGrammar) {
    let mut text = String::new();
    let preds = n / 5;
    for i in 0..preds {
        let next = (i + 1) % preds;
        let skip = (i * 7 + 3) % preds;
        text.push_str(&format!("p{i}(nil, nil).\n"));
        text.push_str(&format!(
            "p{i}(cons(H, T), cons(f(H), R)) :- p{next}(T, R).\n"
        ));
        text.push_str(&format!(
            "p{i}(cons(g(H, H), T), R) :- p{skip}(T, R), app(R, cons(H, nil), _).\n"
        ));
        text.push_str(&format!("p{i}(node(L, X, Rt), R) :- p{next}(L, R1), p{skip}(Rt, R2), app(R1, cons(X, R2), R).\n"));
        text.push_str(&format!("p{i}(leaf(X), cons(X, nil)) :- check(X).\n"));
    }
    text.push_str("app(nil, Y, Y).\napp(cons(H, T), Y, cons(H, Z)) :- app(T, Y, Z).\n");
    let program = parse_program(&text).unwrap();
    let g0 = "ca > p0(L, any).\nL > nil.\nL > cons(E, L).\nE > a.\nE > b.\n\
              ca > check(any).\nsu > check(any).\n";
    let mut sig = program.signature.clone();
    let g0 = parse_grammar(g0, &mut sig).unwrap();
    (program, g0)
}

// ---------------------------------------------------------------------------
// Corpus.

pub struct CorpusEntry {
    pub name: String,
    pub program: Program,
    pub g0: TermGrammar,
}

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

pub fn load(name: &str) -> CorpusEntry {
    let dir = corpus_dir();
    let prog = std::fs::read_to_string(dir.join(format!("{name}.pl"))).unwrap();
    let gram = std::fs::read_to_string(dir.join(format!("{name}.tg"))).unwrap();
    let program = parse_program(&prog).unwrap();
    let mut sig = program.signature.clone();
    let g0 = parse_grammar(&gram, &mut sig).unwrap();
    CorpusEntry {
        name: name.to_string(),
        program,
        g0,
    }
}

pub fn corpus() -> Vec<CorpusEntry> {
    let mut names: Vec<String> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension()? == "pl").then(|| p.file_stem().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    names.iter().map(|n| load(n)).collect()
}

/// Corpus programs that are meant to violate their specification.
pub const FAULTY: [&str; 1] = ["badcall"];

// ---------------------------------------------------------------------------
// Property suites, shared by the property tests and the acceptance target.

#[derive(Default, Debug)]
pub struct Tally {
    pub cases: usize,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok && self.failures.len() < 20 {
            self.failures.push(what());
        }
    }

    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

const DEPTH: usize = 4;

/// Checks intersection, union, inclusion, membership, normalization and
/// approximation against the brute-force semantics on `n` random grammars.
pub fn algebra_suite(n: usize, stream: u64) -> Tally {
    let sig = sig4();
    let sigset: Signature = sig.iter().cloned().collect();
    let small_universe = universe(&sig, 3);
    let mut rng = rng(stream);
    let mut t = Tally::default();
    for case in 0..n {
        t.cases += 1;
        let nv = rng.gen_range(1..=4);
        let density = rng.gen_range(0.2..0.7);
        let (g, vars) = random_grammar(&mut rng, &sig, nv, density);
        let rules = rules_of(&g);
        let x = *vars.choose(&mut rng).unwrap();
        let y = *vars.choose(&mut rng).unwrap();
        let z = *vars.choose(&mut rng).unwrap();
        let ex = oracle_enum(&rules, x, DEPTH);
        let ey = oracle_enum(&rules, y, DEPTH);

        let gn = g.normalize();
        let nrules = rules_of(&gn);
        for &v in &vars {
            t.check(oracle_enum(&nrules, v, DEPTH) == oracle_enum(&rules, v, DEPTH), || {
                format!("case {case}: normalize changed {v:?}")
            });
        }
        for e in gn.empties() {
            t.check(gn.rules_or_empty(e).is_empty(), || {
                format!("case {case}: empty {e:?} kept rules")
            });
        }

        let (i, h) = g.intersect(x, y).unwrap();
        let want: BTreeSet<Term> = ex.intersection(&ey).cloned().collect();
        t.check(oracle_enum(&rules_of(&h), i, DEPTH) == want, || {
            format!("case {case}: intersect not exact\n{g}")
        });

        let (u, h) = g.union(x, y).unwrap();
        let eu = oracle_enum(&rules_of(&h), u, DEPTH);
        t.check(ex.is_subset(&eu) && ey.is_subset(&eu), || {
            format!("case {case}: union misses terms\n{g}")
        });

        let (u2, h2) = g.union(y, x).unwrap();
        t.check(
            TermGrammar::includes_across(&h, u, &h2, u2).unwrap()
                && TermGrammar::includes_across(&h2, u2, &h, u).unwrap(),
            || format!("case {case}: union not commutative\n{g}"),
        );
        let (i2, h2) = g.intersect(y, x).unwrap();
        let (i1, h1) = g.intersect(x, y).unwrap();
        t.check(
            TermGrammar::includes_across(&h1, i1, &h2, i2).unwrap()
                && TermGrammar::includes_across(&h2, i2, &h1, i1).unwrap(),
            || format!("case {case}: intersect not commutative\n{g}"),
        );
        let (xy, hxy) = g.union(x, y).unwrap();
        let (l, hl) = hxy.union(xy, z).unwrap();
        let (yz, hyz) = g.union(y, z).unwrap();
        let (r, hr) = hyz.union(x, yz).unwrap();
        t.check(
            TermGrammar::includes_across(&hl, l, &hr, r).unwrap()
                && TermGrammar::includes_across(&hr, r, &hl, l).unwrap(),
            || format!("case {case}: union not associative\n{g}"),
        );
        let (xy, hxy) = g.intersect(x, y).unwrap();
        let (l, hl) = hxy.intersect(xy, z).unwrap();
        let (yz, hyz) = g.intersect(y, z).unwrap();
        let (r, hr) = hyz.intersect(x, yz).unwrap();
        t.check(
            TermGrammar::includes_across(&hl, l, &hr, r).unwrap()
                && TermGrammar::includes_across(&hr, r, &hl, l).unwrap(),
            || format!("case {case}: intersect not associative\n{g}"),
        );

        let inc = gn.includes(y, x).unwrap();
        let sub = ex.is_subset(&ey);
        if inc {
            t.check(sub, || format!("case {case}: includes unsound\n{g}"));
        } else if sub {
            // no difference up to the enumeration depth; it must lie deeper
            let w = gn.witness_outside(x, &gn, y, 16);
            t.check(
                w.as_ref().is_some_and(|w| {
                    oracle_member(&rules, w, x) && !oracle_member(&rules, w, y)
                }),
                || format!("case {case}: includes incomplete\n{g}"),
            );
        }

        for term in &small_universe {
            let want = oracle_member(&rules, term, x);
            t.check(g.member(term, x).unwrap() == want, || {
                format!("case {case}: member({term}) wrong\n{g}")
            });
        }
        let e3 = oracle_enum(&rules, x, 3);
        t.check(
            small_universe.iter().filter(|s| g.member(s, x).unwrap()).count() == e3.len(),
            || format!("case {case}: member disagrees with enumeration\n{g}"),
        );
        t.check(g.enumerate(x, DEPTH).unwrap() == ex, || {
            format!("case {case}: enumerate disagrees with oracle\n{g}")
        });
        t.check(g.is_universal(x, &sigset) == (oracle_enum(&rules, x, 3) == small_universe), || {
            format!("case {case}: universality\n{g}")
        });

        let nr = rng.gen_range(1..=3);
        let nd = random_rules(&mut rng, &sig, nr);
        let d = discriminative_approx(nd.clone());
        let drules = rules_of(&d);
        for v in nd.iter().map(|r| r.lhs).collect::<BTreeSet<_>>() {
            t.check(
                oracle_enum(&nd, v, 3).is_subset(&oracle_enum(&drules, v, 3)),
                || format!("case {case}: discriminative_approx lost terms"),
            );
        }
    }
    t
}

pub fn widening_configs() -> Vec<WideningConfig> {
    let mut out = Vec::new();
    for variant in [Variant::PrincipalLabel, Variant::OccurrenceCount, Variant::DepthBound] {
        for k in [1, 2] {
            out.push(WideningConfig::new(variant, k).unwrap());
        }
    }
    out
}

/// Over-approximation, idempotence, certificate, normalization and
/// determinism of the restriction operator on `n` random grammars.
pub fn restrict_suite(n: usize, stream: u64) -> Tally {
    let sig = sig4();
    let configs = widening_configs();
    let mut rng = rng(stream);
    let mut t = Tally::default();
    for case in 0..n {
        t.cases += 1;
        let nv = rng.gen_range(1..=6);
        let g = random_analysis_grammar(&mut rng, &sig, nv);
        let cfg = if case % 2 == 0 {
            WideningConfig::default()
        } else {
            *configs.choose(&mut rng).unwrap()
        };
        let r = restrict(&g, &cfg);
        let (gr, rr) = (rules_of(&g), rules_of(&r));
        for root in [GrammarVar::CA, GrammarVar::SU] {
            t.check(
                oracle_enum(&gr, root, DEPTH).is_subset(&oracle_enum(&rr, root, DEPTH)),
                || format!("case {case} ({cfg}): not an over-approximation\n{g}"),
            );
        }
        t.check(codomain_certificate(&r, &cfg), || {
            format!("case {case} ({cfg}): certificate fails\n{g}")
        });
        t.check(r.is_normalized(), || format!("case {case}: not normalized"));
        let rr2 = restrict(&r, &cfg);
        t.check(rr2.canonical_form() == r.canonical_form(), || {
            format!("case {case} ({cfg}): not idempotent\n{g}")
        });
        t.check(restrict(&g, &cfg).to_text() == r.to_text(), || {
            format!("case {case}: not deterministic")
        });
    }
    t
}

/// Every canonical grammar `Ca > p(X)` over `{a/0, f/1}` whose reachable
/// part passes the default certificate.
pub fn codomain_af() -> BTreeSet<String> {
    let a = sym("a", 0);
    let f = sym("f", 1);
    let p = sym("p", 1);
    let cfg = WideningConfig::default();
    let mut out = BTreeSet::new();
    // labels per variable: 0 = {a}, 1 = {f}, 2 = {a, f}
    for n in 1..=4usize {
        let mut label = vec![0usize; n];
        let mut child = vec![0usize; n];
        loop {
            let mut g = TermGrammar::new();
            let vars: Vec<GrammarVar> = (0..n).map(|_| g.fresh()).collect();
            g.add_rule(GrammarVar::CA, p.clone(), vec![vars[0]]).unwrap();
            for i in 0..n {
                if label[i] != 1 {
                    g.add_rule(vars[i], a.clone(), vec![]).unwrap();
                }
                if label[i] != 0 {
                    g.add_rule(vars[i], f.clone(), vec![vars[child[i]]]).unwrap();
                }
            }
            let h = g.normalize().prune();
            if h.num_vars() == n + 2 && h.size() == g.size() && codomain_certificate(&h, &cfg) {
                out.insert(h.canonical_form().to_text());
            }
            // odometer over (label, child)
            let mut i = 0;
            loop {
                if i == n {
                    break;
                }
                child[i] += 1;
                if child[i] < n {
                    break;
                }
                child[i] = 0;
                label[i] += 1;
                if label[i] < 3 {
                    break;
                }
                label[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
    out
}

/// Grammar sizes of the unwidened iteration on the chain program, and the
/// iteration count with widening.
pub fn chain_growth(steps: usize) -> (Vec<usize>, usize, bool) {
    let e = load("chain");
    let open = Analyzer::new(&e.program, &e.g0)
        .widening(None)
        .max_iter(Some(steps))
        .keep_history(true)
        .run();
    let sizes = open.history.iter().map(TermGrammar::size).collect();
    let widened = Analyzer::new(&e.program, &e.g0).run();
    (sizes, widened.iterations, widened.warnings.is_empty())
}

// ---------------------------------------------------------------------------
// Engine suites.

pub fn analyze_default(e: &CorpusEntry) -> regal::AnalysisReport {
    regal::analyze(&e.program, &e.g0, &WideningConfig::default(), None)
}

/// Bounded LD-derivations from every goal of depth `goal_depth` must stay
/// inside the inferred call and success sets.
pub fn soundness_corpus(goal_depth: usize, deriv_depth: usize) -> Tally {
    let mut t = Tally::default();
    for e in corpus() {
        t.cases += 1;
        let r = analyze_default(&e);
        let out = regal::oracle::soundness_suite(&e.program, &e.g0, &r.grammar, goal_depth, deriv_depth)
            .expect("goal enumeration fits");
        let faulty = FAULTY.contains(&e.name.as_str());
        // a faulty program calls a constraint predicate outside its type;
        // those calls are reported as warnings, not covered by the result
        let uncovered: Vec<_> = out
            .counterexamples
            .iter()
            .filter(|c| !(faulty && c.is_call && e.program.is_constraint(&c.atom.predicate)))
            .collect();
        t.check(out.goals > 0, || format!("{}: no goals", e.name));
        t.check(uncovered.is_empty(), || format!("{}: {:?}", e.name, uncovered));
    }
    t
}

pub fn self_verification() -> Tally {
    let mut t = Tally::default();
    for e in corpus() {
        t.cases += 1;
        let r = analyze_default(&e);
        let verdict = regal::check_specification(&e.program, &r.grammar);
        if FAULTY.contains(&e.name.as_str()) {
            t.check(!verdict.is_correct(), || format!("{}: faulty program verified", e.name));
        } else {
            t.check(verdict.is_correct(), || format!("{}: {verdict:?}", e.name));
        }
    }
    t
}

/// `H_i ⊆ H_{i+1}` on the interface, by enumeration, and constraint
/// predicates keep exactly their initial types.
pub fn monotone_and_stable() -> Tally {
    let mut t = Tally::default();
    for e in corpus() {
        t.cases += 1;
        let r = Analyzer::new(&e.program, &e.g0).keep_history(true).run();
        for w in r.history.windows(2) {
            let (a, b) = (rules_of(&w[0]), rules_of(&w[1]));
            for root in [GrammarVar::CA, GrammarVar::SU] {
                t.check(
                    oracle_enum(&a, root, 3).is_subset(&oracle_enum(&b, root, 3)),
                    || format!("{}: iteration shrank", e.name),
                );
            }
        }
        for q in &e.program.constraint_preds {
            for root in [GrammarVar::CA, GrammarVar::SU] {
                let fin = only(&r.grammar, root, q);
                let init = only(&e.g0, root, q);
                t.check(fin.interface_includes(&init) && init.interface_includes(&fin), || {
                    format!("{}: type of {q} changed", e.name)
                });
            }
        }
    }
    t
}

/// The rules of `root` for `q` and nothing else.
pub fn only(g: &TermGrammar, root: GrammarVar, q: &FunctionSymbol) -> TermGrammar {
    let other = if root == GrammarVar::CA { GrammarVar::SU } else { GrammarVar::CA };
    g.filter_root_rules(root, |f| f == q)
        .filter_root_rules(other, |_| false)
}

pub struct Termination {
    pub tally: Tally,
    pub max_iterations: usize,
}

pub fn termination_random(n: usize, stream: u64, cap: usize) -> Termination {
    let mut rng = rng(stream);
    let mut t = Tally::default();
    let mut max_iterations = 0;
    for case in 0..n {
        t.cases += 1;
        let (p, g0, text) = random_program(&mut rng, 30);
        let r = regal::analyze(&p, &g0, &WideningConfig::default(), Some(cap));
        max_iterations = max_iterations.max(r.iterations);
        let capped = r
            .warnings
            .iter()
            .any(|w| w.kind == regal::WarningKind::IterationCapReached);
        t.check(!capped, || format!("case {case}: hit the cap\n{text}"));
    }
    Termination {
        tally: t,
        max_iterations,
    }
}

/// Renders every corpus analysis twice in both formats.
pub fn determinism() -> Tally {
    use regal::report::RenderOptions;
    let mut t = Tally::default();
    for e in corpus() {
        t.cases += 1;
        let opts = RenderOptions {
            trace: true,
            timing: false,
        };
        let render = || {
            let r = Analyzer::new(&e.program, &e.g0).detailed_trace(true).run();
            (r.render_text(opts), r.render_json(opts))
        };
        let (a, b) = (render(), render());
        t.check(a == b, || format!("{}: output differs between runs", e.name));
    }
    t
}
