//! Randomized law suites: monad laws with the named-variable oracle,
//! linearity of operations, quotient laws and substitution stability of
//! derivations.

use bindsem_core::equation::{equal_mod, normal_form};
use bindsem_core::monad::{subst, SubstMap};
use bindsem_core::operational::{cbv_decompose, PiShape};
use bindsem_core::term::{print_term, Layer};
use bindsem_core::{Engine, SignatureDoc, Term};
use rand::seq::IndexedRandom;
use rand::Rng;
use serde_json::{json, Value};

use crate::gen::{case_rng, Gen};
use crate::oracle::subst_via_names;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Monad,
    Module,
    Equation,
    Reduction,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Monad => "monad",
            Suite::Module => "module",
            Suite::Equation => "equation",
            Suite::Reduction => "reduction",
        }
    }
}

/// Bounds on generated cases.
#[derive(Clone, Copy, Debug)]
pub struct Bounds {
    pub scope: usize,
    pub size: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { scope: 4, size: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub suite: &'static str,
    pub cases: usize,
    pub passed: usize,
    /// Cases the generator could not produce (e.g. no redex found).
    pub skipped: usize,
    /// The first few failures, described.
    pub failures: Vec<String>,
}

impl Report {
    fn new(suite: Suite) -> Report {
        Report { suite: suite.name(), cases: 0, passed: 0, skipped: 0, failures: Vec::new() }
    }

    pub fn ok(&self) -> bool {
        self.passed == self.cases
    }

    fn record(&mut self, pass: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if pass {
            self.passed += 1;
        } else if self.failures.len() < 5 {
            self.failures.push(what());
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite,
            "cases": self.cases,
            "passed": self.passed,
            "skipped": self.skipped,
            "failures": self.failures,
        })
    }
}

pub fn run(suite: Suite, doc: &SignatureDoc, count: usize, seed: u64, b: Bounds) -> Report {
    match suite {
        Suite::Monad => monad(doc, count, seed, b),
        Suite::Module => module(doc, count, seed, b),
        Suite::Equation => equation(doc, count, seed, b),
        Suite::Reduction => reduction(doc, count, seed, b),
    }
}

fn show(t: &Term) -> String {
    print_term(t, &[])
}

/// Least scope at which the generator can produce terms.
fn min_scope(g: &Gen, doc: &SignatureDoc) -> usize {
    let mut rng = case_rng(0, 0);
    usize::from(!doc.ops.iter().any(|o| o.binders.is_empty() && !o.variadic) && g.term(&mut rng, Layer::Term, 0, 8).is_none())
}

fn scope<R: Rng>(rng: &mut R, lo: usize, hi: usize) -> usize {
    rng.random_range(lo..=hi.max(lo))
}

/// Left and right unit, associativity, and agreement with capture-avoiding
/// substitution on named terms.
pub fn monad(doc: &SignatureDoc, count: usize, seed: u64, b: Bounds) -> Report {
    let g = Gen::new(doc);
    let lo = min_scope(&g, doc);
    let mut r = Report::new(Suite::Monad);
    for i in 0..count as u64 {
        let mut rng = case_rng(seed, i);
        let (n, m, k) = (scope(&mut rng, lo, b.scope), scope(&mut rng, lo, b.scope), scope(&mut rng, lo, b.scope));
        let (Some(t), Some(f), Some(h)) = (
            g.term(&mut rng, Layer::Term, n, b.size),
            g.subst(&mut rng, n, m, 4),
            g.subst(&mut rng, m, k, 4),
        ) else {
            r.skipped += 1;
            continue;
        };
        let left = (0..n).all(|i| subst(&Term::Var(i), &f).ok().as_ref() == Some(f.image(i)));
        r.record(left, || format!("left unit fails for {}", show(&t)));
        let right = subst(&t, &SubstMap::identity(n)).ok() == Some(t.clone());
        r.record(right, || format!("right unit fails for {}", show(&t)));
        let once = subst(&t, &f).and_then(|u| subst(&u, &h)).ok();
        let composed = f.then(&h).and_then(|fh| subst(&t, &fh)).ok();
        r.record(once.is_some() && once == composed, || format!("associativity fails for {}", show(&t)));
        let oracle = subst_via_names(&t, n, &f);
        r.record(oracle.is_some() && oracle == subst(&t, &f).ok(), || format!("named-variable oracle disagrees on {}", show(&t)));
    }
    r
}

/// Every operation commutes with substitution, lifted under its binders.
pub fn module(doc: &SignatureDoc, count: usize, seed: u64, b: Bounds) -> Report {
    let g = Gen::new(doc);
    let lo = min_scope(&g, doc);
    let mut ops: Vec<(bindsem_core::OpRef, bool)> = doc.ops.iter().map(|o| (o.clone(), false)).collect();
    if let Some((t1, t2)) = &doc.state {
        ops.extend(t1.ops.iter().chain(&t2.ops).map(|o| (o.clone(), true)));
    }
    let renamings_only = doc.ops.is_empty();
    let mut r = Report::new(Suite::Module);
    if ops.is_empty() {
        return r;
    }
    for i in 0..count as u64 {
        let mut rng = case_rng(seed, i);
        let (o, _) = ops.choose(&mut rng).expect("operations").clone();
        let n = scope(&mut rng, lo.max(1), b.scope);
        let m = scope(&mut rng, lo.max(1), b.scope);
        let arity = if o.variadic { rng.random_range(0..=3) } else { o.binders.len() };
        let args: Option<Vec<Term>> = (0..arity)
            .map(|j| g.term(&mut rng, o.layer_of(j), n + o.binders_of(j), b.size / arity.max(1) + 1))
            .collect();
        let f = if renamings_only {
            Some(SubstMap::new(m, (0..n).map(|_| Term::Var(rng.random_range(0..m))).collect()))
        } else {
            g.subst(&mut rng, n, m, 4)
        };
        let (Some(args), Some(f)) = (args, f) else {
            r.skipped += 1;
            continue;
        };
        let whole = subst(&Term::op(o.clone(), args.clone()), &f).ok();
        let parts: Option<Vec<Term>> = args
            .iter()
            .enumerate()
            .map(|(j, a)| subst(a, &f.lift(o.binders_of(j))).ok())
            .collect();
        let pass = whole.is_some() && whole == parts.map(|p| Term::op(o.clone(), p));
        r.record(pass, || format!("`{}` does not commute with substitution", o.name));
    }
    r
}

/// Normal forms are idempotent and stable under substitution.
pub fn equation(doc: &SignatureDoc, count: usize, seed: u64, b: Bounds) -> Report {
    let g = Gen::new(doc);
    let lo = min_scope(&g, doc);
    let mut r = Report::new(Suite::Equation);
    let Some(layer) = doc.equations.first().map(|e| e.layer) else {
        return r;
    };
    let lo = if layer == Layer::State { lo.max(1) } else { lo };
    for i in 0..count as u64 {
        let mut rng = case_rng(seed, i);
        let (n, m) = (scope(&mut rng, lo, b.scope), scope(&mut rng, lo, b.scope));
        let f = if doc.ops.is_empty() {
            Some(SubstMap::new(m, (0..n).map(|_| Term::Var(rng.random_range(0..m))).collect()))
        } else {
            g.subst(&mut rng, n, m, 4)
        };
        let (Some(t), Some(f)) = (g.term(&mut rng, layer, n, b.size), f) else {
            r.skipped += 1;
            continue;
        };
        let Ok(nf) = normal_form(&t, n, doc) else {
            r.record(false, || format!("normalization fails on {}", show(&t)));
            continue;
        };
        r.record(normal_form(&nf, n, doc).ok() == Some(nf.clone()), || format!("normal form of {} is not normal", show(&t)));
        let stable = match (subst(&t, &f), subst(&nf, &f)) {
            (Ok(a), Ok(c)) => equal_mod(&a, &c, m, doc).unwrap_or(false),
            _ => false,
        };
        r.record(stable, || format!("normalization of {} is not substitution-stable", show(&t)));
    }
    r
}

/// Substituting into a derivation moves its endpoints by the same
/// substitution.
pub fn reduction(doc: &SignatureDoc, count: usize, seed: u64, b: Bounds) -> Report {
    let mut r = Report::new(Suite::Reduction);
    let Ok(e) = Engine::new(doc.clone()) else {
        return r;
    };
    if doc.rules.is_empty() {
        return r;
    }
    let g = Gen::new(doc);
    let lo = min_scope(&g, doc).max(usize::from(doc.state.is_some()));
    let cbv = doc.embeds.iter().any(|x| x.kind == "cbv");
    let pi = PiShape::from_doc(doc);
    for i in 0..count as u64 {
        let mut rng = case_rng(seed, i);
        let (n, m) = (scope(&mut rng, lo, b.scope), scope(&mut rng, lo.max(1), b.scope));
        let mut found = None;
        for _ in 0..50 {
            let start = match (&doc.state, cbv) {
                (None, _) => g.term(&mut rng, Layer::Term, n, b.size),
                (Some(_), true) => g.term(&mut rng, Layer::Term, n, b.size).and_then(|t| cbv_decompose(&t, doc).ok()),
                (Some(_), false) => match &pi {
                    Some(pi) => plant_comm(&g, pi, &mut rng, n, b.size),
                    None => g.term(&mut rng, Layer::State, n, b.size),
                },
            };
            let Some(start) = start else { continue };
            let Ok(steps) = e.step(&start, n) else { continue };
            if let Some(d) = steps.choose(&mut rng) {
                found = Some(d.clone());
                break;
            }
        }
        // heterogeneous signatures are stable under value substitutions only
        let f = if doc.state.is_some() {
            let vals = (0..n).map(|_| {
                let t = g.term(&mut rng, Layer::Term, m, 4).unwrap_or(Term::Var(0));
                if t.op_name() == Some("app") || doc.ops.is_empty() { Term::Var(rng.random_range(0..m)) } else { t }
            });
            Some(SubstMap::new(m, vals.collect()))
        } else {
            g.subst(&mut rng, n, m, 4)
        };
        let (Some(d), Some(f)) = (found, f) else {
            r.skipped += 1;
            continue;
        };
        let moved = e.subst_derivation(&d, &f);
        let pass = match &moved {
            Ok(d2) => {
                let src = subst(&d.source, &f).and_then(|s| e.nf(&s, m)).ok();
                let tgt = subst(&d.target, &f).and_then(|t| e.nf(&t, m)).ok();
                e.check(d2) && src.as_ref() == Some(&d2.source) && tgt.as_ref() == Some(&d2.target)
            }
            Err(_) => false,
        };
        r.record(pass, || format!("`{}` derivation from {} is not substitution-stable", d.rule, show(&d.source)));
    }
    r
}

/// A random process with a communication redex among its components:
/// random processes almost never have one.
fn plant_comm<R: Rng>(g: &Gen, pi: &PiShape, rng: &mut R, n: usize, max: usize) -> Option<Term> {
    let c = Term::Var(rng.random_range(0..n));
    let v = Term::Var(rng.random_range(0..n));
    let budget = (max / 3).max(1);
    let p = g.term(rng, Layer::State, n, budget)?;
    let q = g.term(rng, Layer::State, n + 1, budget)?;
    let mut comps = vec![
        Term::op(pi.out.clone(), vec![c.clone(), v, p]),
        Term::op(pi.inp.clone(), vec![c, q]),
    ];
    if rng.random_bool(0.5) {
        comps.push(g.term(rng, Layer::State, n, budget)?);
    }
    let k = rng.random_range(0..comps.len());
    comps.swap(0, k);
    Some(pi.chain(&comps))
}
