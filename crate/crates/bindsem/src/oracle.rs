//! Named-variable syntax with textbook capture-avoiding substitution, used
//! as an independent check of the level-based substitution.

use std::collections::{BTreeMap, BTreeSet};

use bindsem_core::monad::SubstMap;
use bindsem_core::term::OpRef;
use bindsem_core::Term;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Named {
    Var(String),
    Op(OpRef, Vec<(Vec<String>, Named)>),
}

/// Variable names shared by free and bound positions, so that substitution
/// really has to rename: level `i` is `v<i>` wherever it was bound.
pub fn name(i: usize) -> String {
    format!("v{i}")
}

/// Named form of a term at scope `n`: free variable `i` is `v<i>`, a binder
/// at level `l` is `v<l>`.
pub fn named_at(t: &Term, n: usize) -> Named {
    match t {
        Term::Var(i) => Named::Var(name(*i)),
        Term::Op(o, args) => Named::Op(
            o.clone(),
            args.iter()
                .enumerate()
                .map(|(j, a)| {
                    let k = o.binders_of(j);
                    ((n..n + k).map(name).collect(), named_at(a, n + k))
                })
                .collect(),
        ),
    }
}

pub fn free_vars(t: &Named) -> BTreeSet<String> {
    match t {
        Named::Var(x) => BTreeSet::from([x.clone()]),
        Named::Op(_, args) => args
            .iter()
            .flat_map(|(bs, body)| {
                let mut fv = free_vars(body);
                for b in bs {
                    fv.remove(b);
                }
                fv
            })
            .collect(),
    }
}

fn all_names(t: &Named, out: &mut BTreeSet<String>) {
    match t {
        Named::Var(x) => {
            out.insert(x.clone());
        }
        Named::Op(_, args) => {
            for (bs, body) in args {
                out.extend(bs.iter().cloned());
                all_names(body, out);
            }
        }
    }
}

/// Simultaneous capture-avoiding substitution.
pub fn subst_named(t: &Named, sigma: &BTreeMap<String, Named>) -> Named {
    match t {
        Named::Var(x) => sigma.get(x).cloned().unwrap_or_else(|| t.clone()),
        Named::Op(o, args) => Named::Op(
            o.clone(),
            args.iter()
                .map(|(bs, body)| {
                    let mut s = sigma.clone();
                    for b in bs {
                        s.remove(b);
                    }
                    let body_fv = free_vars(body);
                    let danger: BTreeSet<String> = s
                        .iter()
                        .filter(|(x, _)| body_fv.contains(*x))
                        .flat_map(|(_, u)| free_vars(u))
                        .collect();
                    let mut avoid = danger.clone();
                    all_names(body, &mut avoid);
                    avoid.extend(s.keys().cloned());
                    let mut new_bs = Vec::with_capacity(bs.len());
                    for b in bs {
                        if danger.contains(b) {
                            let mut fresh = format!("{b}'");
                            while avoid.contains(&fresh) {
                                fresh.push('\'');
                            }
                            avoid.insert(fresh.clone());
                            s.insert(b.clone(), Named::Var(fresh.clone()));
                            new_bs.push(fresh);
                        } else {
                            new_bs.push(b.clone());
                        }
                    }
                    (new_bs, subst_named(body, &s))
                })
                .collect(),
        ),
    }
}

/// Back to levels: free names are looked up in `scope`, bound names in the
/// binders in force (innermost wins).
pub fn from_named(t: &Named, scope: &[String]) -> Option<Term> {
    let mut env = scope.to_vec();
    back(t, &mut env)
}

fn back(t: &Named, env: &mut Vec<String>) -> Option<Term> {
    match t {
        Named::Var(x) => env.iter().rposition(|e| e == x).map(Term::Var),
        Named::Op(o, args) => {
            let mut out = Vec::with_capacity(args.len());
            for (bs, body) in args {
                let base = env.len();
                env.extend(bs.iter().cloned());
                let b = back(body, env);
                env.truncate(base);
                out.push(b?);
            }
            Some(Term::op(o.clone(), out))
        }
    }
}

/// `subst(t, f)` computed through named syntax.
pub fn subst_via_names(t: &Term, n: usize, f: &SubstMap) -> Option<Term> {
    let sigma: BTreeMap<String, Named> = (0..n).map(|i| (name(i), named_at(f.image(i), f.codomain()))).collect();
    let scope: Vec<String> = (0..f.codomain()).map(name).collect();
    from_named(&subst_named(&named_at(t, n), &sigma), &scope)
}
