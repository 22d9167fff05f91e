//! The catalog translations.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::metaterm::{parse_metaterm, Assignment, MetaCtx, MetaVarDecl};
use crate::model::{trans, translate_unary_cong, RuleCtx, RuleImage, Translation};
use crate::monad::{weaken, SubstMap};
use crate::reduction::{Derivation, Engine};
use crate::signature::builtin;
use crate::term::{parse_term, Layer, Term};

/// `(name, source builtin, target builtin)`.
pub const TRANSLATIONS: &[(&str, &str, &str)] = &[
    ("lj-ll", "lj", "ll"),
    ("fix-lc", "lc_fix", "lc_closure"),
    ("lc_ex-lc_1cong", "lc_ex", "lc_1cong"),
    ("lc_1cong-lc_closure", "lc_1cong", "lc_closure"),
];

/// Turing's fixpoint combinator: `app(Y, g)` reaches `app(g, app(Y, g))`
/// by three beta steps.
pub const THETA: &str = "app(abs(x. abs(f. app(f, app(app(x, x), f)))), abs(x. abs(f. app(f, app(app(x, x), f)))))";

pub fn theta(doc: &crate::signature::SignatureDoc) -> Result<Term> {
    parse_term(THETA, &[], doc)
}

pub fn translation(name: &str) -> Result<Translation> {
    let &(_, from, to) = TRANSLATIONS
        .iter()
        .find(|t| t.0 == name)
        .ok_or_else(|| Error::UnknownBuiltin(format!("translation {name}")))?;
    let source = Engine::new(builtin(from)?)?;
    let target = Engine::new(builtin(to)?)?;
    let (ops, rules): (&[(&str, &str)], Vec<(&str, RuleImage)>) = match name {
        "lj-ll" => (
            &[
                ("not", "lolli(bang(A1), zero())"),
                ("and", "with(A1, A2)"),
                ("or", "oplus(bang(A1), bang(A2))"),
                ("imp", "lolli(bang(A1), A2)"),
                ("forall", "forall(x. A1[x])"),
                ("exists", "exists(x. bang(A1[x]))"),
            ],
            Vec::new(),
        ),
        "fix-lc" => (
            &[("app", "app(A1, A2)"), ("abs", "abs(x. A1[x])"), ("fix", "")],
            vec![
                ("beta-red", RuleImage::Same("beta-red")),
                ("eta-exp", RuleImage::Same("eta-exp")),
                ("app-cong1", RuleImage::Same("app-cong1")),
                ("app-cong2", RuleImage::Same("app-cong2")),
                ("abs-cong", RuleImage::Same("abs-cong")),
                ("fix-exp", RuleImage::Custom(fix_exp)),
                ("fix-cong", RuleImage::Custom(fix_cong)),
            ],
        ),
        "lc_ex-lc_1cong" => (
            &[("app", "app(A1, A2)"), ("abs", "abs(x. A1[x])"), ("esubst", "A1[A2]")],
            vec![
                ("beta-red", RuleImage::Same("beta-red")),
                ("gc", RuleImage::Refl),
                ("var-sub", RuleImage::Refl),
                ("app-sub", RuleImage::Refl),
                ("abs-sub", RuleImage::Refl),
                ("comp-sub", RuleImage::Refl),
                ("app-cong1", RuleImage::Same("app-cong1")),
                ("app-cong2", RuleImage::Same("app-cong2")),
                ("abs-cong", RuleImage::Same("abs-cong")),
                ("esubst-cong1", RuleImage::Custom(esubst_cong1)),
                ("esubst-cong2", RuleImage::Custom(esubst_cong2)),
            ],
        ),
        _ => (
            &[("app", "app(A1, A2)"), ("abs", "abs(x. A1[x])")],
            vec![
                ("beta-red", RuleImage::Same("beta-red")),
                ("eta-exp", RuleImage::Same("eta-exp")),
                ("app-cong1", RuleImage::Same("app-cong1")),
                ("app-cong2", RuleImage::Same("app-cong2")),
                ("abs-cong", RuleImage::Same("abs-cong")),
                ("unary-cong", RuleImage::Custom(unary_cong)),
            ],
        ),
    };
    let theta_text = format!("app({THETA}, abs(x. A1[x]))");
    let mut op_map = BTreeMap::new();
    for &(op, text) in ops {
        let decl = source.doc().op(op, Layer::Term).ok_or_else(|| Error::UnknownOp(op.to_string()))?;
        let decls = decl
            .binders
            .iter()
            .enumerate()
            .map(|(j, &k)| MetaVarDecl::new(&format!("A{}", j + 1), k))
            .collect();
        let text = if op == "fix" { theta_text.as_str() } else { text };
        let mut ctx = MetaCtx::new(target.doc(), decls);
        op_map.insert(op.to_string(), parse_metaterm(text, &mut ctx, 0, Layer::Term)?);
    }
    let rules = rules.into_iter().map(|(r, i)| (r.to_string(), i)).collect();
    Ok(Translation { name: name.to_string(), source, target, ops: op_map, rules })
}

fn lc_op(e: &Engine, name: &str) -> Result<crate::term::OpRef> {
    e.doc().op(name, Layer::Term).cloned().ok_or_else(|| Error::UnknownOp(name.to_string()))
}

fn beta(e: &Engine, fun: &Term, arg: &Term, n: usize) -> Result<Derivation> {
    let Term::Op(_, body) = fun else { return Err(Error::Malformed("beta needs an abstraction".into())) };
    e.instantiate("beta-red", Assignment::new(n).with("T", body[0].clone()).with("U", arg.clone()), Vec::new())
}

/// `fix(x. T) ~> T[fix(x. T)]` becomes the three beta steps of
/// `app(Y, abs T)` followed by the final beta.
fn fix_exp(c: &RuleCtx<'_>) -> Result<Derivation> {
    let (e, n) = (c.target, c.scope);
    let app = lc_op(e, "app")?;
    let abs = lc_op(e, "abs")?;
    let y = weaken(&theta(e.doc())?, 0, n);
    let Term::Op(_, aa) = &y else { unreachable!() };
    let a = aa[0].clone();
    let g = Term::Op(abs, vec![c.get("T")?.clone()]);
    let unfold = beta(e, &a, &a, n)?;
    let d1 = e.instantiate(
        "app-cong1",
        Assignment::new(n)
            .with("T1", y.clone())
            .with("T2", g.clone())
            .with("T1'", unfold.target.clone()),
        vec![unfold.clone()],
    )?;
    let d2 = beta(e, &unfold.target, &g, n)?;
    let yg = Term::Op(app, vec![y, g.clone()]);
    let d3 = beta(e, &g, &yg, n)?;
    trans(e, trans(e, d1, d2)?, d3)
}

/// `fix(x. T) ~> fix(x. T')` becomes the right congruence of `app(Y, -)`
/// over the abstraction congruence.
fn fix_cong(c: &RuleCtx<'_>) -> Result<Derivation> {
    let (e, n) = (c.target, c.scope);
    let inner = c.subs[0].clone();
    let under = e.instantiate(
        "abs-cong",
        Assignment::new(n).with("T1", inner.source.clone()).with("T1'", inner.target.clone()),
        vec![inner],
    )?;
    let y = weaken(&theta(e.doc())?, 0, n);
    e.instantiate(
        "app-cong2",
        Assignment::new(n)
            .with("T1", y)
            .with("T2", under.source.clone())
            .with("T2'", under.target.clone()),
        vec![under],
    )
}

/// The body reduction transported by the substitution `x := U`.
fn esubst_cong1(c: &RuleCtx<'_>) -> Result<Derivation> {
    let n = c.scope;
    let mut images: Vec<Term> = (0..n).map(Term::Var).collect();
    images.push(c.get("T2")?.clone());
    c.target.subst_derivation(&c.subs[0], &SubstMap::new(n, images))
}

/// The argument reduction under the context `T1`.
fn esubst_cong2(c: &RuleCtx<'_>) -> Result<Derivation> {
    let a = Assignment::new(c.scope)
        .with("U", c.get("T1")?.clone())
        .with("T", c.subs[0].source.clone())
        .with("T'", c.subs[0].target.clone());
    c.target.instantiate("unary-cong", a, c.subs.clone())
}

fn unary_cong(c: &RuleCtx<'_>) -> Result<Derivation> {
    translate_unary_cong(c.get("U")?, &c.subs[0], c.target)
}

/// Checks the image of `fix(t)` against the definition.
pub fn fix_image(t: &Term, n: usize, e: &Engine) -> Result<Term> {
    let app = lc_op(e, "app")?;
    let abs = lc_op(e, "abs")?;
    Ok(Term::Op(app, vec![weaken(&theta(e.doc())?, 0, n), Term::Op(abs, vec![t.clone()])]))
}

pub fn names() -> Vec<String> {
    TRANSLATIONS.iter().map(|t| t.0.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::{Budgets, Goal, SearchMode};

    fn ns(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn lj_to_ll() {
        let tr = translation("lj-ll").unwrap();
        let names = ns(&["p", "q"]);
        let t = parse_term("or(p, not(q))", &names, tr.source.doc()).unwrap();
        let want = parse_term("oplus(bang(p), bang(lolli(bang(q), zero())))", &names, tr.target.doc()).unwrap();
        assert_eq!(tr.translate(&t, 2).unwrap(), want);
        let t = parse_term("exists(x. imp(x, p))", &names, tr.source.doc()).unwrap();
        let want = parse_term("exists(x. bang(lolli(bang(x), p)))", &names, tr.target.doc()).unwrap();
        assert_eq!(tr.translate(&t, 2).unwrap(), want);
    }

    #[test]
    fn fix_expansion_becomes_beta_steps() {
        let tr = translation("fix-lc").unwrap();
        let names = ns(&["z"]);
        let t = parse_term("fix(x. app(z, x))", &names, tr.source.doc()).unwrap();
        let Term::Op(_, body) = &t else { unreachable!() };
        assert_eq!(tr.translate(&t, 1).unwrap(), fix_image(&body[0], 1, &tr.target).unwrap());
        let d = tr.source.step(&t, 1).unwrap().into_iter().find(|d| d.rule == "fix-exp").unwrap();
        let img = tr.translate_derivation(&d).unwrap();
        assert!(tr.target.check(&img));
        assert_eq!(img.target, tr.translate(&d.target, 1).unwrap());
        let cong = parse_term("fix(x. app(abs(y. y), x))", &names, tr.source.doc()).unwrap();
        for d in tr.source.step(&cong, 1).unwrap() {
            let img = tr.translate_derivation(&d).unwrap();
            assert!(tr.target.check(&img), "{}", d.rule);
        }
    }

    #[test]
    fn explicit_substitutions_to_unary_congruence() {
        let tr = translation("lc_ex-lc_1cong").unwrap();
        let names = ns(&["z"]);
        let t = parse_term("esubst(x. app(x, x), app(abs(y. y), z))", &names, tr.source.doc()).unwrap();
        for d in tr.source.step(&t, 1).unwrap() {
            let img = tr.translate_derivation(&d).unwrap();
            assert!(tr.target.check(&img), "{}", d.rule);
            let kept = matches!(d.rule.as_str(), "beta-red" | "app-cong1" | "app-cong2" | "abs-cong");
            assert_eq!(img.rule == d.rule, kept, "{}", d.rule);
        }
        let gc = parse_term("esubst(x. z, z)", &names, tr.source.doc()).unwrap();
        let d = tr.source.step(&gc, 1).unwrap().into_iter().find(|d| d.rule == "gc").unwrap();
        let img = tr.translate_derivation(&d).unwrap();
        assert_eq!((img.rule.as_str(), &img.source, &img.target), ("unary-cong", &Term::Var(0), &Term::Var(0)));
    }

    #[test]
    fn one_hole_congruence_into_closure() {
        let tr = translation("lc_1cong-lc_closure").unwrap();
        let e = &tr.source;
        let names = ns(&["z"]);
        let t = parse_term("app(abs(x. x), z)", &names, e.doc()).unwrap();
        let d = e.step(&t, 1).unwrap().into_iter().find(|d| d.rule == "beta-red").unwrap();
        let u = parse_term("abs(y. app(y, h))", &ns(&["z", "h"]), e.doc()).unwrap();
        let a = Assignment::new(1).with("U", u).with("T", d.source.clone()).with("T'", d.target.clone());
        let big = e.instantiate("unary-cong", a, vec![d]).unwrap();
        assert!(e.check(&big));
        let img = tr.translate_derivation(&big).unwrap();
        assert!(tr.target.check(&img));
        let shallow = tr.target.clone().with_budgets(Budgets { depth: 1, ..Budgets::default() });
        let out = shallow.derive(&img.source, 1, &Goal::Term(img.target.clone()), SearchMode::OnePerTarget).unwrap();
        assert!(!out.truncated);
        assert!(!out.derivations.is_empty());
    }
}
