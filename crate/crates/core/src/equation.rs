//! Canonical forms modulo the equations of a signature.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::metaterm::{eval, match_pattern, Assignment};
use crate::signature::{EqMode, EquationSpec, Hook, SignatureDoc};
use crate::term::Term;

pub const DEFAULT_BUDGET: usize = 100_000;

/// Largest orbit explored by the `orbit-min` canonicalizer.
pub const ORBIT_CAP: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormStep {
    pub position: Vec<usize>,
    pub equation: String,
    pub before: Term,
    pub after: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizationTrace {
    pub steps: Vec<NormStep>,
    pub result: Term,
}

/// Subterms in preorder with their paths and scopes.
pub fn positions(t: &Term, n: usize) -> Vec<(Vec<usize>, usize, &Term)> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    collect_positions(t, n, &mut path, &mut out);
    out
}

fn collect_positions<'a>(t: &'a Term, n: usize, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, usize, &'a Term)>) {
    out.push((path.clone(), n, t));
    if let Term::Op(o, args) = t {
        for (j, a) in args.iter().enumerate() {
            path.push(j);
            collect_positions(a, n + o.binders_of(j), path, out);
            path.pop();
        }
    }
}

/// `t` with the subterm at `path` replaced (sorted collections re-sorted).
pub fn replace_at(t: &Term, path: &[usize], new: Term) -> Term {
    match path.split_first() {
        None => new,
        Some((&j, rest)) => match t {
            Term::Op(o, args) => {
                let mut args = args.clone();
                args[j] = replace_at(&args[j], rest, new);
                Term::op(o.clone(), args)
            }
            Term::Var(_) => t.clone(),
        },
    }
}

/// Matches `side` of `eq` at a subterm living at scope `n`.
fn match_side(eq: &EquationSpec, lhs: bool, t: &Term, n: usize) -> Option<Result<Term>> {
    if n < eq.level {
        return None;
    }
    let (from, to) = if lhs { (&eq.lhs, &eq.rhs) } else { (&eq.rhs, &eq.lhs) };
    let a = match_pattern(from, eq.level, t, &Assignment::new(n - eq.level), &eq.metavars)?;
    Some(eval(to, eq.level, &a))
}

struct Normalizer<'a> {
    doc: &'a SignatureDoc,
    rewrites: Vec<&'a EquationSpec>,
    hooks: Vec<(Hook, &'a EquationSpec)>,
    budget: usize,
    used: usize,
    steps: Option<Vec<NormStep>>,
}

impl<'a> Normalizer<'a> {
    fn new(doc: &'a SignatureDoc, budget: usize, record: bool) -> Self {
        let rewrites = doc.equations.iter().filter(|e| e.mode == EqMode::Rewrite).collect();
        let mut hooks: Vec<(Hook, &EquationSpec)> = Vec::new();
        for e in &doc.equations {
            if let EqMode::Canonical(h) = e.mode {
                if !hooks.iter().any(|(g, _)| *g == h) || h == Hook::OrbitMin {
                    hooks.push((h, e));
                }
            }
        }
        Normalizer { doc, rewrites, hooks, budget, used: 0, steps: record.then(Vec::new) }
    }

    fn tick(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.budget {
            Err(Error::Budget("normalization"))
        } else {
            Ok(())
        }
    }

    fn record(&mut self, path: &[usize], eq: &str, before: &Term, after: &Term) {
        if let Some(steps) = &mut self.steps {
            steps.push(NormStep { position: path.to_vec(), equation: eq.into(), before: before.clone(), after: after.clone() });
        }
    }

    /// Innermost-leftmost rewriting to a rewrite normal form.
    fn rewrite(&mut self, t: &Term, n: usize, path: &mut Vec<usize>) -> Result<Term> {
        let mut cur = match t {
            Term::Var(_) => return Ok(t.clone()),
            Term::Op(o, args) => {
                let mut out = Vec::with_capacity(args.len());
                for (j, a) in args.iter().enumerate() {
                    path.push(j);
                    out.push(self.rewrite(a, n + o.binders_of(j), path)?);
                    path.pop();
                }
                Term::op(o.clone(), out)
            }
        };
        'outer: loop {
            for k in 0..self.rewrites.len() {
                let eq = self.rewrites[k];
                if let Some(next) = match_side(eq, true, &cur, n) {
                    let next = next?;
                    self.tick()?;
                    self.record(path, &eq.name, &cur, &next);
                    cur = self.rewrite(&next, n, path)?;
                    continue 'outer;
                }
            }
            return Ok(cur);
        }
    }

    fn hook(&mut self, h: Hook, eq: &EquationSpec, t: &Term, n: usize) -> Result<Term> {
        match h {
            // collections are kept sorted by construction
            Hook::SortArgs | Hook::SortDedupArgs => Ok(t.clone()),
            Hook::PiStruct => crate::operational::pi_canonical(t, n, self.doc),
            Hook::OrbitMin => orbit_min(eq, t, n, ORBIT_CAP),
        }
    }

    fn run(&mut self, t: &Term, n: usize) -> Result<Term> {
        let mut cur = t.clone();
        loop {
            let mut path = Vec::new();
            cur = self.rewrite(&cur, n, &mut path)?;
            let mut changed = false;
            for k in 0..self.hooks.len() {
                let (h, eq) = self.hooks[k];
                let next = self.hook(h, eq, &cur, n)?;
                if next != cur {
                    self.tick()?;
                    self.record(&[], &eq.name, &cur, &next);
                    cur = next;
                    changed = true;
                }
            }
            if !changed {
                return Ok(cur);
            }
        }
    }
}

/// Least element of the orbit of `t` (at scope `n`) under `eq` applied in
/// both directions at every position.
pub fn orbit_min(eq: &EquationSpec, t: &Term, n: usize, cap: usize) -> Result<Term> {
    let mut seen: BTreeSet<Term> = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(t.clone());
    queue.push_back(t.clone());
    while let Some(cur) = queue.pop_front() {
        for (path, scope, sub) in positions(&cur, n) {
            for lhs in [true, false] {
                if let Some(r) = match_side(eq, lhs, sub, scope) {
                    let next = replace_at(&cur, &path, r?);
                    if !seen.contains(&next) {
                        if seen.len() >= cap {
                            return Err(Error::Budget("orbit"));
                        }
                        seen.insert(next.clone());
                        queue.push_back(next);
                    }
                }
            }
        }
    }
    Ok(seen.into_iter().next().expect("orbit contains its start"))
}

/// Normal form with the trace of rewrite and canonicalizer steps.
pub fn normalize(t: &Term, n: usize, doc: &SignatureDoc) -> Result<NormalizationTrace> {
    normalize_with(t, n, doc, DEFAULT_BUDGET)
}

pub fn normalize_with(t: &Term, n: usize, doc: &SignatureDoc, budget: usize) -> Result<NormalizationTrace> {
    let mut nz = Normalizer::new(doc, budget, true);
    let result = nz.run(t, n)?;
    Ok(NormalizationTrace { steps: nz.steps.unwrap_or_default(), result })
}

/// Normal form without a trace.
pub fn normal_form(t: &Term, n: usize, doc: &SignatureDoc) -> Result<Term> {
    normal_form_with(t, n, doc, DEFAULT_BUDGET)
}

pub fn normal_form_with(t: &Term, n: usize, doc: &SignatureDoc, budget: usize) -> Result<Term> {
    if doc.equations.is_empty() {
        return Ok(t.clone());
    }
    Normalizer::new(doc, budget, false).run(t, n)
}

pub fn equal_mod(t: &Term, u: &Term, n: usize, doc: &SignatureDoc) -> Result<bool> {
    Ok(normal_form(t, n, doc)? == normal_form(u, n, doc)?)
}

/// Whether the instance of `eq` under `a` holds modulo `doc`.
pub fn check_equation(eq: &EquationSpec, a: &Assignment, doc: &SignatureDoc) -> Result<bool> {
    let l = eval(&eq.lhs, eq.level, a)?;
    let r = eval(&eq.rhs, eq.level, a)?;
    equal_mod(&l, &r, a.base + eq.level, doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::{builtin, parse_signature};
    use crate::term::parse_term;
    use alloc::string::ToString;
    use alloc::vec;

    fn names(ns: &[&str]) -> Vec<String> {
        ns.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn monoid_normal_forms() {
        let m = builtin("monoid").unwrap();
        let ns = names(&["a", "b", "c"]);
        let p = |s: &str| parse_term(s, &ns, &m).unwrap();
        let tr = normalize(&p("m(m(a, b), c)"), 3, &m).unwrap();
        assert_eq!(tr.result, p("m(a, m(b, c))"));
        assert_eq!(tr.steps.len(), 1);
        assert_eq!(tr.steps[0].equation, "assoc");
        assert_eq!(normalize(&p("m(e(), a)"), 3, &m).unwrap().result, p("a"));
        assert_eq!(
            normal_form(&p("m(m(m(a, e()), m(e(), b)), m(c, e()))"), 3, &m).unwrap(),
            p("m(a, m(b, c))")
        );
    }

    #[test]
    fn trace_positions_are_innermost_leftmost() {
        let m = builtin("monoid").unwrap();
        let ns = names(&["a", "b"]);
        let t = parse_term("m(m(e(), a), m(e(), b))", &ns, &m).unwrap();
        let tr = normalize(&t, 2, &m).unwrap();
        let pos: Vec<Vec<usize>> = tr.steps.iter().map(|s| s.position.clone()).collect();
        assert_eq!(pos, vec![vec![0], vec![1]]);
        for s in &tr.steps {
            assert_eq!(tr.steps[0].position.len(), 1);
            assert_ne!(s.before, s.after);
        }
    }

    #[test]
    fn sorted_collections() {
        let d = parse_signature("op por 2 0 0 sorted; op pset 1 0 sorted-dedup variadic;").unwrap();
        let ns = names(&["a", "b"]);
        let t = parse_term("por(b, a)", &ns, &d).unwrap();
        assert_eq!(t, parse_term("por(a, b)", &ns, &d).unwrap());
        let s = parse_term("pset(b, a, b)", &ns, &d).unwrap();
        let Term::Op(_, args) = &s else { panic!() };
        assert_eq!(args, &vec![Term::Var(0), Term::Var(1)]);
    }

    #[test]
    fn explicit_substitutions_commute() {
        let lx = builtin("lc_ex").unwrap();
        let ns = names(&["u", "v", "w"]);
        let p = |s: &str| parse_term(s, &ns, &lx).unwrap();
        let a = p("esubst(y. esubst(x. app(x, app(y, w)), u), v)");
        let b = p("esubst(x. esubst(y. app(x, app(y, w)), v), u)");
        assert!(equal_mod(&a, &b, 3, &lx).unwrap());
        assert!(equal_mod(&a, &a, 3, &lx).unwrap());
        // dependent: the inner substituend mentions the outer variable
        let c = p("esubst(y. esubst(x. app(x, y), y), v)");
        assert_eq!(normal_form(&c, 3, &lx).unwrap(), c);
        let lc = builtin("lc").unwrap();
        let q = |s: &str| parse_term(s, &ns, &lc).unwrap();
        assert!(!equal_mod(&q("app(u, v)"), &q("app(v, u)"), 3, &lc).unwrap());
    }

    #[test]
    fn false_equation_fails_its_instances() {
        let d = parse_signature("op app 2 0 0; eq swap meta T:0 U:0 : app(T, U) = app(U, T) canonical orbit-min;").unwrap();
        let lc = builtin("lc").unwrap();
        let a = Assignment::new(2).with("T", Term::Var(0)).with("U", Term::Var(1));
        assert!(!check_equation(&d.equations[0], &a, &lc).unwrap());
        assert!(check_equation(&d.equations[0], &a, &d).unwrap());
        let same = Assignment::new(2).with("T", Term::Var(0)).with("U", Term::Var(0));
        assert!(check_equation(&d.equations[0], &same, &lc).unwrap());
    }

    #[test]
    fn divergent_rewrites_hit_the_budget() {
        let d = parse_signature("op f 1 0; op g 1 0; eq a meta X:0 : f(X) = g(f(X)) rewrite;").unwrap();
        let t = parse_term("f(x)", &names(&["x"]), &d).unwrap();
        assert!(matches!(normalize_with(&t, 1, &d, 50), Err(Error::Budget(_))));
    }
}
