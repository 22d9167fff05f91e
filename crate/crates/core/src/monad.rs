//! Parallel substitution and its special cases.
//!
//! With de Bruijn levels a term's bound variables are numbered after its
//! scope, so weakening renumbers bound variables and leaves free ones alone.
//! Lifting a substitution under `k` binders weakens the old images and sends
//! the fresh source variables `n..n+k` to the fresh target variables
//! `m..m+k`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::term::Term;

/// A substitution from scope `domain` to scope `codomain`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubstMap {
    codomain: usize,
    images: Vec<Term>,
}

impl SubstMap {
    pub fn new(codomain: usize, images: Vec<Term>) -> SubstMap {
        SubstMap { codomain, images }
    }

    pub fn identity(n: usize) -> SubstMap {
        SubstMap::inclusion(n, n)
    }

    /// Variables `0..n` to themselves at the larger scope `m`.
    pub fn inclusion(n: usize, m: usize) -> SubstMap {
        debug_assert!(n <= m);
        SubstMap::new(m, (0..n).map(Term::Var).collect())
    }

    pub fn from_renaming(r: &[usize], codomain: usize) -> SubstMap {
        SubstMap::new(codomain, r.iter().map(|&i| Term::Var(i)).collect())
    }

    pub fn domain(&self) -> usize {
        self.images.len()
    }

    pub fn codomain(&self) -> usize {
        self.codomain
    }

    pub fn image(&self, i: usize) -> &Term {
        &self.images[i]
    }

    pub fn images(&self) -> &[Term] {
        &self.images
    }

    /// The substitution under `k` binders: `n+i` goes to `m+i`.
    pub fn lift(&self, k: usize) -> SubstMap {
        let mut images: Vec<Term> = self.images.iter().map(|t| shift(t, self.codomain, k)).collect();
        images.extend((0..k).map(|i| Term::Var(self.codomain + i)));
        SubstMap::new(self.codomain + k, images)
    }

    /// `(self ; g)(i) = subst(self(i), g)`.
    pub fn then(&self, g: &SubstMap) -> Result<SubstMap> {
        let images = self.images.iter().map(|t| subst(t, g)).collect::<Result<_>>()?;
        Ok(SubstMap::new(g.codomain, images))
    }

    /// Variable-valued images, if all images are variables.
    pub fn as_renaming(&self) -> Option<Vec<usize>> {
        self.images
            .iter()
            .map(|t| match t {
                Term::Var(i) => Some(*i),
                Term::Op(..) => None,
            })
            .collect()
    }
}

pub fn subst(t: &Term, f: &SubstMap) -> Result<Term> {
    subst_under(t, f, 0)
}

fn subst_under(t: &Term, f: &SubstMap, depth: usize) -> Result<Term> {
    let n = f.domain();
    match t {
        Term::Var(i) if *i < n => Ok(shift(&f.images[*i], f.codomain, depth)),
        Term::Var(i) if *i < n + depth => Ok(Term::Var(f.codomain + (i - n))),
        Term::Var(i) => Err(Error::ScopeMismatch { index: *i, scope: n + depth }),
        Term::Op(o, args) => {
            let args = args
                .iter()
                .enumerate()
                .map(|(j, a)| subst_under(a, f, depth + o.binders_of(j)))
                .collect::<Result<_>>()?;
            Ok(Term::op(o.clone(), args))
        }
    }
}

/// The term at scope `n` viewed at scope `n + k`.
pub fn weaken(t: &Term, n: usize, k: usize) -> Term {
    shift(t, n, k)
}

/// Moves every variable at or above `n` (all bound, for a term at scope `n`)
/// up by `k`.
pub(crate) fn shift(t: &Term, n: usize, k: usize) -> Term {
    if k == 0 {
        return t.clone();
    }
    match t {
        Term::Var(i) if *i < n => t.clone(),
        Term::Var(i) => Term::Var(i + k),
        Term::Op(o, args) => Term::Op(o.clone(), args.iter().map(|a| shift(a, n, k)).collect()),
    }
}

/// `t` at scope `n + 1`, with its top variable `n` replaced by `u`.
pub fn unary_subst(t: &Term, u: &Term, n: usize) -> Result<Term> {
    let mut images: Vec<Term> = (0..n).map(Term::Var).collect();
    images.push(u.clone());
    subst(t, &SubstMap::new(n, images))
}

/// Exchanges the two top variables of a term at scope `n`.
pub fn swap(t: &Term, n: usize) -> Result<Term> {
    if n < 2 {
        return Err(Error::Malformed("swap needs scope at least 2".into()));
    }
    let mut r: Vec<usize> = (0..n).collect();
    r.swap(n - 2, n - 1);
    rename(t, &r, n)
}

/// `subst(t, i -> Var(r[i]))` without building term images.
pub fn rename(t: &Term, r: &[usize], m: usize) -> Result<Term> {
    rename_under(t, r, m, 0)
}

fn rename_under(t: &Term, r: &[usize], m: usize, depth: usize) -> Result<Term> {
    let n = r.len();
    match t {
        Term::Var(i) if *i < n => Ok(Term::Var(r[*i])),
        Term::Var(i) if *i < n + depth => Ok(Term::Var(m + (i - n))),
        Term::Var(i) => Err(Error::ScopeMismatch { index: *i, scope: n + depth }),
        Term::Op(o, args) => {
            let args = args
                .iter()
                .enumerate()
                .map(|(j, a)| rename_under(a, r, m, depth + o.binders_of(j)))
                .collect::<Result<_>>()?;
            Ok(Term::op(o.clone(), args))
        }
    }
}

/// Partial renaming: `r[i] = None` means variable `i` must not occur.
/// Returns `None` when it does (the occurs-check of pattern matching).
pub fn retract(t: &Term, r: &[Option<usize>], m: usize) -> Option<Term> {
    retract_under(t, r, m, 0)
}

fn retract_under(t: &Term, r: &[Option<usize>], m: usize, depth: usize) -> Option<Term> {
    let n = r.len();
    match t {
        Term::Var(i) if *i < n => r[*i].map(Term::Var),
        Term::Var(i) if *i < n + depth => Some(Term::Var(m + (i - n))),
        Term::Var(_) => None,
        Term::Op(o, args) => {
            let args = args
                .iter()
                .enumerate()
                .map(|(j, a)| retract_under(a, r, m, depth + o.binders_of(j)))
                .collect::<Option<_>>()?;
            Some(Term::op(o.clone(), args))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::builtin;
    use crate::term::parse_term;
    use alloc::format;
    use alloc::string::{String, ToString};
    use alloc::vec;
    use proptest::prelude::*;

    fn ns(n: &[&str]) -> Vec<String> {
        n.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn unary_subst_examples() {
        let lc = builtin("lc").unwrap();
        let names = ns(&["y", "h"]);
        let t = parse_term("app(h, y)", &names, &lc).unwrap();
        let id = parse_term("abs(z. z)", &names[..1], &lc).unwrap();
        let r = unary_subst(&t, &id, 1).unwrap();
        assert_eq!(r, parse_term("app(abs(z. z), y)", &names[..1], &lc).unwrap());
        assert_eq!(unary_subst(&Term::Var(1), &id, 1).unwrap(), id);
        let w = weaken(&id, 1, 1);
        assert_eq!(unary_subst(&w, &Term::Var(0), 1).unwrap(), id);
    }

    #[test]
    fn swap_examples() {
        let lc = builtin("lc").unwrap();
        let names = ns(&["a", "b"]);
        let t = parse_term("app(a, b)", &names, &lc).unwrap();
        assert_eq!(swap(&t, 2).unwrap(), parse_term("app(b, a)", &names, &lc).unwrap());
        assert!(swap(&t, 1).is_err());
    }

    #[test]
    fn substitution_under_binder_keeps_fresh() {
        let lc = builtin("lc").unwrap();
        let t = parse_term("abs(z. app(z, x))", &ns(&["x"]), &lc).unwrap();
        let u = parse_term("abs(w. app(w, y))", &ns(&["y"]), &lc).unwrap();
        let f = SubstMap::new(1, vec![u.clone()]);
        let r = subst(&t, &f).unwrap();
        assert_eq!(r, parse_term("abs(z. app(z, abs(w. app(w, y))))", &ns(&["y"]), &lc).unwrap());
    }

    #[test]
    fn scope_mismatch_is_an_error() {
        assert!(subst(&Term::Var(3), &SubstMap::identity(2)).is_err());
        assert!(rename(&Term::Var(2), &[0, 1], 2).is_err());
    }

    fn arb_term(n: usize) -> impl Strategy<Value = String> {
        let names = ["a", "b", "c"];
        let leaf = proptest::sample::select(names[..n].to_vec()).prop_map(|s| s.to_string());
        leaf.prop_recursive(4, 20, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(t, u)| format!("app({t}, {u})")),
                inner.clone().prop_map(|t| format!("abs(a. {t})")),
                inner.prop_map(|t| format!("abs(q. app(q, {t}))")),
            ]
        })
    }

    proptest! {
        #[test]
        fn swap_is_involution(src in arb_term(3)) {
            let lc = builtin("lc").unwrap();
            let t = parse_term(&src, &ns(&["a", "b", "c"]), &lc).unwrap();
            prop_assert_eq!(swap(&swap(&t, 3).unwrap(), 3).unwrap(), t);
        }

        #[test]
        fn rename_agrees_with_subst(src in arb_term(3), r in proptest::collection::vec(0usize..4, 3)) {
            let lc = builtin("lc").unwrap();
            let t = parse_term(&src, &ns(&["a", "b", "c"]), &lc).unwrap();
            let f = SubstMap::from_renaming(&r, 4);
            prop_assert_eq!(rename(&t, &r, 4).unwrap(), subst(&t, &f).unwrap());
        }

        #[test]
        fn lift_commutes_with_weakening(src in arb_term(2), img in arb_term(3)) {
            let lc = builtin("lc").unwrap();
            let t = parse_term(&src, &ns(&["a", "b"]), &lc).unwrap();
            let u = parse_term(&img, &ns(&["a", "b", "c"]), &lc).unwrap();
            let f = SubstMap::new(3, vec![u, Term::Var(1)]);
            let lhs = weaken(&subst(&t, &f).unwrap(), 3, 1);
            let rhs = subst(&weaken(&t, 2, 1), &f.lift(1)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
