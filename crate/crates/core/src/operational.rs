//! State terms: the call-by-value tree embedding, substitution on states and
//! the pi-calculus structural canonicalizer and stepper.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::metaterm::{Assignment, EmbedHook, Embedding};
use crate::monad::{rename, shift, subst, SubstMap};
use crate::reduction::{Derivation, Engine};
use crate::signature::SignatureDoc;
use crate::term::{print_term, Layer, OpRef, Term};

/// Operations used by the CBV embedding: monad `app`, state `app` and the
/// value leaf `v`.
#[derive(Clone, Debug)]
pub struct Cbv {
    name: String,
    app: OpRef,
    node: OpRef,
    leaf: OpRef,
}

impl Cbv {
    pub fn from_doc(name: &str, doc: &SignatureDoc) -> Result<Cbv> {
        let need = |n: &str, layer: Layer| doc.op(n, layer).cloned().ok_or_else(|| Error::UnknownOp(n.to_string()));
        let app = need("app", Layer::Term)?;
        let node = need("app", Layer::State)?;
        let leaf = need("v", Layer::State)?;
        let ok = app.binders == [0, 0]
            && node.binders == [0, 0]
            && node.arg_layers == [Layer::State, Layer::State]
            && leaf.binders == [0]
            && leaf.arg_layers == [Layer::Term];
        if !ok {
            return Err(Error::Malformed("cbv needs app 2 0 0, state app term:0 term:0 and state v base".into()));
        }
        Ok(Cbv { name: name.to_string(), app, node, leaf })
    }

    /// Splits a term at applications; the leaves are values.
    pub fn decompose(&self, t: &Term) -> Term {
        match t {
            Term::Op(o, args) if *o == self.app => {
                Term::Op(self.node.clone(), vec![self.decompose(&args[0]), self.decompose(&args[1])])
            }
            _ => Term::Op(self.leaf.clone(), vec![t.clone()]),
        }
    }

    /// Inverse of [`decompose`](Self::decompose); `None` on states that are
    /// not value trees.
    pub fn compose(&self, s: &Term) -> Option<Term> {
        match s {
            Term::Op(o, args) if *o == self.node && args.len() == 2 => {
                Some(Term::Op(self.app.clone(), vec![self.compose(&args[0])?, self.compose(&args[1])?]))
            }
            Term::Op(o, args) if *o == self.leaf && args.len() == 1 => match &args[0] {
                Term::Op(a, _) if *a == self.app => None,
                v => Some(v.clone()),
            },
            _ => None,
        }
    }
}

impl EmbedHook for Cbv {
    fn name(&self) -> &str {
        &self.name
    }

    fn apply(&self, t: &Term) -> Result<Term> {
        Ok(self.decompose(t))
    }

    fn invert(&self, s: &Term) -> Option<Term> {
        self.compose(s)
    }
}

pub fn cbv_embedding(name: &str, doc: &SignatureDoc) -> Result<Embedding> {
    Ok(Embedding(Arc::new(Cbv::from_doc(name, doc)?)))
}

pub fn cbv_decompose(t: &Term, doc: &SignatureDoc) -> Result<Term> {
    Ok(Cbv::from_doc("j", doc)?.decompose(t))
}

pub fn cbv_compose(s: &Term, doc: &SignatureDoc) -> Result<Term> {
    Cbv::from_doc("j", doc)?
        .compose(s)
        .ok_or_else(|| Error::Malformed("not a tree of values".into()))
}

/// Substitution on a state term. When the monad has no operations (the pi
/// layer, where base slots are channel names) images must be variables.
pub fn state_subst(s: &Term, f: &SubstMap, doc: &SignatureDoc) -> Result<Term> {
    if doc.ops.is_empty() {
        if let Some(bad) = f.images().iter().find(|t| !matches!(t, Term::Var(_))) {
            return Err(Error::NonVariableBase(print_term(bad, &[])));
        }
    }
    subst(s, f)
}

/// The pi-calculus state operations.
#[derive(Clone, Debug)]
pub struct PiShape {
    pub zero: OpRef,
    pub par: OpRef,
    pub bang: OpRef,
    pub nu: OpRef,
    pub out: OpRef,
    pub inp: OpRef,
}

impl PiShape {
    pub fn from_doc(doc: &SignatureDoc) -> Option<PiShape> {
        use Layer::{State as S, Term as T};
        let get = |n: &str, binders: &[usize], layers: &[Layer]| {
            doc.op(n, S).filter(|o| o.binders == binders && o.arg_layers == layers).cloned()
        };
        Some(PiShape {
            zero: get("zero", &[], &[])?,
            par: get("par", &[0, 0], &[S, S])?,
            bang: get("bang", &[0], &[S])?,
            nu: get("nu", &[1], &[S])?,
            out: get("out", &[0, 0, 0], &[T, T, S])?,
            inp: get("inp", &[0, 1], &[T, S])?,
        })
    }

    fn zero(&self) -> Term {
        Term::Op(self.zero.clone(), Vec::new())
    }

    /// Right-nested parallel composition; `zero()` when empty.
    pub fn chain(&self, comps: &[Term]) -> Term {
        match comps.split_last() {
            None => self.zero(),
            Some((last, init)) => init
                .iter()
                .rev()
                .fold(last.clone(), |acc, c| Term::Op(self.par.clone(), vec![c.clone(), acc])),
        }
    }

    /// Components of a right-nested chain.
    pub fn components(&self, t: &Term) -> Vec<Term> {
        let mut out = Vec::new();
        let mut cur = t;
        loop {
            match cur {
                Term::Op(o, args) if *o == self.par => {
                    out.push(args[0].clone());
                    cur = &args[1];
                }
                Term::Op(o, _) if *o == self.zero => return out,
                _ => {
                    out.push(cur.clone());
                    return out;
                }
            }
        }
    }

    /// Prenex form: `k` restricted names (scope `n..n+k`) over canonical
    /// prefixed components at scope `n + k`.
    fn flatten(&self, t: &Term, n: usize) -> (usize, Vec<Term>) {
        match t {
            Term::Op(o, _) if *o == self.zero => (0, Vec::new()),
            Term::Op(o, args) if *o == self.par => {
                let (k1, c1) = self.flatten(&args[0], n);
                let (k2, c2) = self.flatten(&args[1], n);
                let m = n + k1 + k2;
                let r: Vec<usize> = (0..n).chain(n + k1..m).collect();
                let mut comps: Vec<Term> = c1.iter().map(|c| shift(c, n + k1, k2)).collect();
                comps.extend(c2.iter().map(|c| rename(c, &r, m).expect("component in scope")));
                (k1 + k2, comps)
            }
            Term::Op(o, args) if *o == self.nu => {
                let (k, comps) = self.flatten(&args[0], n + 1);
                (k + 1, comps)
            }
            Term::Op(o, args) if *o == self.out => {
                let p = self.canon(&args[2], n);
                (0, vec![Term::Op(o.clone(), vec![args[0].clone(), args[1].clone(), p])])
            }
            Term::Op(o, args) if *o == self.inp => {
                let p = self.canon(&args[1], n + 1);
                (0, vec![Term::Op(o.clone(), vec![args[0].clone(), p])])
            }
            Term::Op(o, args) if *o == self.bang => (0, vec![Term::Op(o.clone(), vec![self.canon(&args[0], n)])]),
            _ => (0, vec![t.clone()]),
        }
    }

    /// Canonical form at scope `n`.
    pub fn canon(&self, t: &Term, n: usize) -> Term {
        let (k, comps) = self.flatten(t, n);
        let build = |perm: &[usize]| -> Term {
            let r: Vec<usize> = (0..n).chain(perm.iter().map(|&p| n + p)).collect();
            let mut cs: Vec<Term> = comps
                .iter()
                .map(|c| self.canon_component(&rename(c, &r, n + k).expect("component in scope"), n + k))
                .collect();
            cs.sort();
            let mut body = self.chain(&cs);
            for _ in 0..k {
                body = Term::Op(self.nu.clone(), vec![body]);
            }
            body
        };
        let mut perm: Vec<usize> = (0..k).collect();
        if k <= 1 || k > 7 {
            return build(&perm);
        }
        let mut best = build(&perm);
        while next_permutation(&mut perm) {
            let cand = build(&perm);
            if cand < best {
                best = cand;
            }
        }
        best
    }

    fn canon_component(&self, c: &Term, n: usize) -> Term {
        self.flatten(c, n).1.into_iter().next().unwrap_or_else(|| self.zero())
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else { return false };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Structural canonical form of a pi process at scope `n`. The scope must be
/// given: with levels a free name and a restricted one look alike.
pub fn pi_canonical(t: &Term, n: usize, doc: &SignatureDoc) -> Result<Term> {
    let shape = PiShape::from_doc(doc).ok_or_else(|| Error::Malformed("not a pi signature".into()))?;
    Ok(shape.canon(t, n))
}

/// One-step pi reductions of a canonical process at scope `n`.
pub fn pi_step(e: &Engine, t: &Term, n: usize, unfold: usize) -> Result<Vec<Derivation>> {
    let shape = PiShape::from_doc(e.doc()).ok_or_else(|| Error::Malformed("not a pi signature".into()))?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for d in pi_step_in(e, &shape, t, n, unfold)? {
        if seen.insert(d.target.clone()) || d.rule != "rep-unfold" && d.rule != "rep-solo" {
            out.push(d);
        }
    }
    Ok(out)
}

fn pi_step_in(e: &Engine, shape: &PiShape, t: &Term, n: usize, unfold: usize) -> Result<Vec<Derivation>> {
    let t = e.nf(t, n)?;
    let mut out = Vec::new();
    if let Term::Op(o, args) = &t {
        if *o == shape.nu {
            let body = e.nf(&args[0], n + 1)?;
            for d in pi_step_in(e, shape, &body, n + 1, unfold)? {
                let a = Assignment::new(n).with("P", body.clone()).with("Q", d.target.clone());
                out.push(e.instantiate("nu-cong", a, vec![d])?);
            }
            return Ok(out);
        }
    }
    let comps = shape.components(&t);
    let rest_of = |skip: &[usize]| -> Vec<Term> {
        comps.iter().enumerate().filter(|(k, _)| !skip.contains(k)).map(|(_, c)| c.clone()).collect()
    };
    // communication between every ordered pair
    for i in 0..comps.len() {
        for j in 0..comps.len() {
            let (Term::Op(oi, ai), Term::Op(oj, aj)) = (&comps[i], &comps[j]) else { continue };
            if i == j || *oi != shape.out || *oj != shape.inp || ai[0] != aj[0] {
                continue;
            }
            let a = Assignment::new(n)
                .with("A", ai[0].clone())
                .with("B", ai[1].clone())
                .with("P", ai[2].clone())
                .with("Q", aj[1].clone());
            let d = e.instantiate("comm", a, Vec::new())?;
            out.push(wrap_par(e, shape, d, &rest_of(&[i, j]), n)?);
        }
    }
    if unfold == 0 {
        return Ok(out);
    }
    let direct: BTreeSet<Term> = out.iter().map(|d| d.target.clone()).collect();
    for i in 0..comps.len() {
        let Term::Op(o, args) = &comps[i] else { continue };
        if *o != shape.bang {
            continue;
        }
        let p = args[0].clone();
        let rest = rest_of(&[i]);
        let (rule, a, hyp_src) = if rest.is_empty() {
            let src = Term::Op(shape.par.clone(), vec![p.clone(), comps[i].clone()]);
            ("rep-solo", Assignment::new(n).with("P", p.clone()), src)
        } else {
            let r = shape.chain(&rest);
            let src = Term::Op(
                shape.par.clone(),
                vec![p.clone(), Term::Op(shape.par.clone(), vec![comps[i].clone(), r.clone()])],
            );
            ("rep-unfold", Assignment::new(n).with("P", p.clone()).with("R", r), src)
        };
        let src = e.nf(&hyp_src, n)?;
        for d in pi_step_in(e, shape, &src, n, unfold - 1)? {
            if direct.contains(&d.target) {
                continue;
            }
            let a = a.clone().with("Q", d.target.clone());
            out.push(e.instantiate(rule, a, vec![d])?);
        }
    }
    Ok(out)
}

/// `d` on a pair of components, carried into the whole parallel composition.
fn wrap_par(e: &Engine, shape: &PiShape, d: Derivation, rest: &[Term], n: usize) -> Result<Derivation> {
    if rest.is_empty() {
        return Ok(d);
    }
    let a = Assignment::new(n)
        .with("P", d.source.clone())
        .with("Q", d.target.clone())
        .with("R", shape.chain(rest));
    e.instantiate("par-cong", a, vec![d])
}

/// Display helper for error messages.
pub fn describe(t: &Term) -> String {
    format!("{}", print_term(t, &[]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::builtin;
    use crate::term::parse_term_at;

    fn names(ns: &[&str]) -> Vec<String> {
        ns.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn decompose_splits_at_applications() {
        let d = builtin("cbv_small").unwrap();
        let ns = names(&["x", "z"]);
        let t = crate::term::parse_term("app(app(x, abs(y. y)), z)", &ns, &d).unwrap();
        let s = cbv_decompose(&t, &d).unwrap();
        let want = parse_term_at("app(app(v(x), v(abs(y. y))), v(z))", &ns, &d, Layer::State).unwrap();
        assert_eq!(s, want);
        assert_eq!(cbv_compose(&s, &d).unwrap(), t);
        let leaf = crate::term::parse_term("abs(y. y)", &ns, &d).unwrap();
        assert_eq!(cbv_decompose(&leaf, &d).unwrap().op_name(), Some("v"));
        let bad = parse_term_at("v(app(x, x))", &ns, &d, Layer::State).unwrap();
        assert!(cbv_compose(&bad, &d).is_err());
    }

    #[test]
    fn pi_structural_examples() {
        let d = builtin("pi").unwrap();
        let ns = names(&["a", "b"]);
        let p = |s: &str| parse_term_at(s, &ns, &d, Layer::State).unwrap();
        let c = |s: &str| pi_canonical(&p(s), 2, &d).unwrap();
        assert_eq!(c("par(zero(), out(a, b, zero()))"), p("out(a, b, zero())"));
        assert_eq!(c("par(out(b, b, zero()), out(a, b, zero()))"), p("par(out(a, b, zero()), out(b, b, zero()))"));
        assert_eq!(
            c("par(nu(x. out(x, a, zero())), out(b, b, zero()))"),
            p("nu(x. par(out(b, b, zero()), out(x, a, zero())))")
        );
        let t = p("nu(x. nu(y. par(out(y, x, zero()), out(x, y, zero()))))");
        assert_eq!(c(&describe_in(&t, &ns)), pi_canonical(&t, 2, &d).unwrap());
        let once = pi_canonical(&t, 2, &d).unwrap();
        assert_eq!(pi_canonical(&once, 2, &d).unwrap(), once);
    }

    fn describe_in(t: &Term, ns: &[String]) -> String {
        print_term(t, ns)
    }

    #[test]
    fn pi_communication() {
        let e = Engine::new(builtin("pi").unwrap()).unwrap();
        let ns = names(&["a", "b"]);
        let p = |s: &str| parse_term_at(s, &ns, e.doc(), Layer::State).unwrap();
        let t = p("par(out(a, b, zero()), inp(a, c. out(c, c, zero())))");
        let steps = e.step(&t, 2).unwrap();
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].target, p("out(b, b, zero())"));
        assert!(e.check(&steps[0]));
        assert!(e.step(&p("zero()"), 2).unwrap().is_empty());
        let under = p("nu(x. par(out(x, b, zero()), inp(x, c. out(c, a, zero()))))");
        let steps = e.step(&under, 2).unwrap();
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].rule, "nu-cong");
        assert_eq!(steps[0].target, p("nu(x. out(b, a, zero()))"));
        let three = p("par(out(a, b, zero()), par(inp(a, c. zero()), out(b, a, zero())))");
        let steps = e.step(&three, 2).unwrap();
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].rule, "par-cong");
        assert!(e.check(&steps[0]));
    }

    #[test]
    fn pi_replication_unfolds() {
        let e = Engine::new(builtin("pi").unwrap()).unwrap();
        let ns = names(&["a", "b"]);
        let p = |s: &str| parse_term_at(s, &ns, e.doc(), Layer::State).unwrap();
        let t = p("par(bang(out(a, b, zero())), inp(a, c. out(c, c, zero())))");
        let steps = e.step(&t, 2).unwrap();
        assert!(!steps.is_empty());
        assert!(steps.iter().all(|d| e.check(d)));
        assert!(steps.iter().any(|d| d.target == p("par(bang(out(a, b, zero())), out(b, b, zero()))")));
    }

    #[test]
    fn state_subst_rules() {
        let d = builtin("pi").unwrap();
        let ns = names(&["a", "b"]);
        let p = |s: &str| parse_term_at(s, &ns, &d, Layer::State).unwrap();
        let f = SubstMap::new(2, vec![Term::Var(1), Term::Var(1)]);
        assert_eq!(state_subst(&p("out(a, b, zero())"), &f, &d).unwrap(), p("out(b, b, zero())"));
        assert_eq!(state_subst(&p("out(a, b, zero())"), &SubstMap::identity(2), &d).unwrap(), p("out(a, b, zero())"));
    }
}
