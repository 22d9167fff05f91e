//! Folds into models and translations between signatures.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::metaterm::{eval, Assignment, MetaTerm};
use crate::monad::{rename, subst, unary_subst, SubstMap};
use crate::reduction::{Derivation, Engine};
use crate::signature::congruence_name;
use crate::term::{OpRef, Term};

/// Argument `j` of an operation: given values for its `k_j` bound
/// variables, the value of the argument.
pub type Evaluator<'a, V> = &'a dyn Fn(Vec<V>) -> V;

/// A model of a signature: a value domain with one action per operation.
pub trait Model {
    type V: Clone;

    fn action(&self, op: &OpRef, args: &[Evaluator<'_, Self::V>]) -> Self::V;
}

/// The initial morphism: variables read `env`, operations apply the model.
pub fn fold<M: Model>(t: &Term, env: &[M::V], m: &M) -> M::V {
    match t {
        Term::Var(i) => env[*i].clone(),
        Term::Op(o, args) => {
            let evals: Vec<_> = args
                .iter()
                .map(|a| {
                    move |vs: Vec<M::V>| {
                        let mut env2 = env.to_vec();
                        env2.extend(vs);
                        fold(a, &env2, m)
                    }
                })
                .collect();
            let refs: Vec<Evaluator<'_, M::V>> = evals.iter().map(|f| f as Evaluator<'_, M::V>).collect();
            m.action(o, &refs)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    /// Free variables, as levels.
    Names(BTreeSet<usize>),
    Nat(u64),
    /// Redex count and whether the term is an abstraction.
    Counted(u64, bool),
}

impl Value {
    pub fn names(&self) -> Option<&BTreeSet<usize>> {
        match self {
            Value::Names(s) => Some(s),
            _ => None,
        }
    }

    pub fn nat(&self) -> Option<u64> {
        match self {
            Value::Nat(k) | Value::Counted(k, _) => Some(*k),
            Value::Names(_) => None,
        }
    }

    /// Text form, naming variables with `names`.
    pub fn render(&self, names: &[String]) -> String {
        match self {
            Value::Names(s) => {
                let items: Vec<&str> = s.iter().map(|i| names.get(*i).map(String::as_str).unwrap_or("?")).collect();
                format!("{{{}}}", items.join(", "))
            }
            Value::Nat(k) | Value::Counted(k, _) => k.to_string(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Names(s) => {
                let items: Vec<String> = s.iter().map(|i| i.to_string()).collect();
                write!(f, "{{{}}}", items.join(", "))
            }
            Value::Nat(k) | Value::Counted(k, _) => write!(f, "{k}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuiltinModel {
    FreeVars,
    Size,
    RedexCount,
}

pub const MODEL_NAMES: &[&str] = &["free_vars", "size", "redex_count"];

pub fn builtin_model(name: &str) -> Result<BuiltinModel> {
    match name {
        "free_vars" => Ok(BuiltinModel::FreeVars),
        "size" => Ok(BuiltinModel::Size),
        "redex_count" => Ok(BuiltinModel::RedexCount),
        _ => Err(Error::UnknownBuiltin(format!("model {name}"))),
    }
}

impl BuiltinModel {
    /// Value of a variable of the term being measured.
    pub fn var(self, i: usize) -> Value {
        match self {
            BuiltinModel::FreeVars => Value::Names(BTreeSet::from([i])),
            BuiltinModel::Size => Value::Nat(0),
            BuiltinModel::RedexCount => Value::Counted(0, false),
        }
    }

    /// Value given to bound variables.
    fn fresh(self) -> Value {
        match self {
            BuiltinModel::FreeVars => Value::Names(BTreeSet::new()),
            other => other.var(0),
        }
    }

    /// Folds a term at scope `n` with every variable at its own value.
    pub fn run(self, t: &Term, n: usize) -> Value {
        let env: Vec<Value> = (0..n).map(|i| self.var(i)).collect();
        fold(t, &env, &self)
    }
}

impl Model for BuiltinModel {
    type V = Value;

    fn action(&self, op: &OpRef, args: &[Evaluator<'_, Value>]) -> Value {
        let vals: Vec<Value> = args
            .iter()
            .enumerate()
            .map(|(j, f)| f(vec![self.fresh(); op.binders_of(j)]))
            .collect();
        match self {
            BuiltinModel::FreeVars => Value::Names(vals.iter().filter_map(Value::names).flatten().copied().collect()),
            BuiltinModel::Size => Value::Nat(1 + vals.iter().filter_map(Value::nat).sum::<u64>()),
            BuiltinModel::RedexCount => {
                let sum: u64 = vals.iter().filter_map(Value::nat).sum();
                match (op.name.as_str(), vals.as_slice()) {
                    ("app", [Value::Counted(_, head), _]) => Value::Counted(sum + u64::from(*head), false),
                    ("abs", _) => Value::Counted(sum, true),
                    _ => Value::Counted(sum, false),
                }
            }
        }
    }
}

/// What a source rule becomes in the target.
#[derive(Clone, Copy)]
pub enum RuleImage {
    /// The target rule of this name, same metavariables.
    Same(&'static str),
    /// Reflexivity at the translated source.
    Refl,
    Custom(fn(&RuleCtx<'_>) -> Result<Derivation>),
}

impl fmt::Debug for RuleImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleImage::Same(r) => write!(f, "Same({r})"),
            RuleImage::Refl => f.write_str("Refl"),
            RuleImage::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// A translated rule node: assignment and hypotheses already translated.
pub struct RuleCtx<'a> {
    pub target: &'a Engine,
    pub scope: usize,
    pub assignment: Assignment,
    pub subs: Vec<Derivation>,
    pub source: Term,
}

impl RuleCtx<'_> {
    pub fn get(&self, m: &str) -> Result<&Term> {
        self.assignment.get(m).ok_or_else(|| Error::MissingMetavar(m.to_string()))
    }
}

/// A signature morphism: each source operation `o` with binders `k1..kp`
/// becomes a target metaterm over `A1:k1 .. Ap:kp`.
#[derive(Clone, Debug)]
pub struct Translation {
    pub name: String,
    pub source: Engine,
    pub target: Engine,
    pub ops: BTreeMap<String, MetaTerm>,
    pub rules: BTreeMap<String, RuleImage>,
}

impl Translation {
    /// Image of a term at scope `n`, normalized in the target.
    pub fn translate(&self, t: &Term, n: usize) -> Result<Term> {
        self.target.nf(&self.raw(t, n)?, n)
    }

    fn raw(&self, t: &Term, n: usize) -> Result<Term> {
        match t {
            Term::Var(_) => Ok(t.clone()),
            Term::Op(o, args) => {
                let mt = self.ops.get(&o.name).ok_or_else(|| Error::UnknownOp(o.name.clone()))?;
                let mut a = Assignment::new(n);
                for (j, x) in args.iter().enumerate() {
                    a = a.with(&format!("A{}", j + 1), self.raw(x, n + o.binders_of(j))?);
                }
                eval(mt, 0, &a)
            }
        }
    }

    /// Image of a derivation; its endpoints are the images of `d`'s.
    pub fn translate_derivation(&self, d: &Derivation) -> Result<Derivation> {
        let image = self.rules.get(&d.rule).ok_or_else(|| Error::Uncovered(d.rule.clone()))?;
        let (_, r) = self.source.rule(&d.rule)?;
        let mut a = Assignment::new(d.scope);
        for (m, v) in &d.assignment.map {
            let level = r.decl(m).map(|x| x.level).ok_or_else(|| Error::UnboundName(m.clone()))?;
            a = a.with(m, self.translate(v, d.scope + level)?);
        }
        let subs = d.subs.iter().map(|s| self.translate_derivation(s)).collect::<Result<Vec<_>>>()?;
        let source = self.translate(&d.source, d.scope)?;
        let target = self.translate(&d.target, d.scope)?;
        let ctx = RuleCtx { target: &self.target, scope: d.scope, assignment: a, subs, source: source.clone() };
        let out = match image {
            RuleImage::Same(name) => self.target.instantiate(name, ctx.assignment, ctx.subs)?,
            RuleImage::Refl => refl(&self.target, &ctx.source, ctx.scope)?,
            RuleImage::Custom(f) => f(&ctx)?,
        };
        if out.scope != d.scope || out.source != source || out.target != target {
            return Err(Error::Malformed(format!("image of `{}` has the wrong endpoints", d.rule)));
        }
        Ok(out)
    }
}

/// A reflexivity derivation at `t`: the `refl` rule when the target has one,
/// otherwise the one-hole congruence with a context that ignores its hole,
/// fed a fixed beta step.
pub fn refl(e: &Engine, t: &Term, n: usize) -> Result<Derivation> {
    if e.rule("refl").is_ok() {
        return e.instantiate("refl", Assignment::new(n).with("T", t.clone()), Vec::new());
    }
    let abs = e.doc().op("abs", crate::term::Layer::Term).cloned().ok_or_else(|| Error::UnknownOp("abs".into()))?;
    let app = e.doc().op("app", crate::term::Layer::Term).cloned().ok_or_else(|| Error::UnknownOp("app".into()))?;
    let id = Term::Op(abs, vec![Term::Var(n)]);
    let beta = e.instantiate(
        "beta-red",
        Assignment::new(n).with("T", Term::Var(n)).with("U", id.clone()),
        Vec::new(),
    )?;
    debug_assert_eq!(beta.source, Term::Op(app, vec![id.clone(), id]));
    let u = crate::monad::weaken(t, n, 1);
    let a = Assignment::new(n)
        .with("U", u)
        .with("T", beta.source.clone())
        .with("T'", beta.target.clone());
    e.instantiate("unary-cong", a, vec![beta])
}

/// `d1` then `d2`.
pub fn trans(e: &Engine, d1: Derivation, d2: Derivation) -> Result<Derivation> {
    let a = Assignment::new(d1.scope)
        .with("T", d1.source.clone())
        .with("U", d1.target.clone())
        .with("W", d2.target.clone());
    e.instantiate("trans", a, vec![d1, d2])
}

/// From `d : T ~> T'` at scope `n` and a context `u` at scope `n + 1` whose
/// hole is variable `n`, a derivation `u[T] ~> u[T']` in a closure signature
/// with congruences.
pub fn translate_unary_cong(u: &Term, d: &Derivation, e: &Engine) -> Result<Derivation> {
    let n = d.scope;
    match u {
        Term::Var(i) if *i == n => Ok(d.clone()),
        Term::Var(i) if *i < n => refl(e, u, n),
        Term::Var(i) => Err(Error::ScopeMismatch { index: *i, scope: n + 1 }),
        Term::Op(_, args) if args.is_empty() => refl(e, u, n),
        Term::Op(o, args) => {
            let mut done: Option<Derivation> = None;
            for j in 0..args.len() {
                let k = o.binders_of(j);
                let arg = hole_on_top(&args[j], n, k)?;
                let dk = if k == 0 { d.clone() } else { e.subst_derivation(d, &SubstMap::inclusion(n, n + k))? };
                let inner = translate_unary_cong(&arg, &dk, e)?;
                let mut a = Assignment::new(n);
                for (i, x) in args.iter().enumerate() {
                    let ki = o.binders_of(i);
                    let filled = if i < j { &d.target } else { &d.source };
                    let v = if i == j {
                        inner.source.clone()
                    } else {
                        fill(x, filled, n, ki)?
                    };
                    a = a.with(&format!("T{}", i + 1), v);
                }
                a = a.with(&format!("T{}'", j + 1), inner.target.clone());
                let step = e.instantiate(&congruence_name(o, j), a, vec![inner])?;
                done = Some(match done {
                    None => step,
                    Some(prev) => trans(e, prev, step)?,
                });
            }
            Ok(done.expect("at least one argument"))
        }
    }
}

/// An argument under `k` binders of a context with hole `n`, renamed so the
/// hole is the top variable `n + k`.
fn hole_on_top(x: &Term, n: usize, k: usize) -> Result<Term> {
    let r: Vec<usize> = (0..n).chain(core::iter::once(n + k)).chain(n..n + k).collect();
    rename(x, &r, n + k + 1)
}

/// Argument `x` (under `k` binders, hole `n`) with the hole filled by `t`.
fn fill(x: &Term, t: &Term, n: usize, k: usize) -> Result<Term> {
    unary_subst(&hole_on_top(x, n, k)?, &crate::monad::weaken(t, n, k), n + k)
}

/// `u[t]` for a context `u` at scope `n + 1` with hole `n`.
pub fn plug(u: &Term, t: &Term, n: usize) -> Result<Term> {
    let mut images: Vec<Term> = (0..n).map(Term::Var).collect();
    images.push(t.clone());
    subst(u, &SubstMap::new(n, images))
}
