//! Term schemas over metavariables, their evaluation and pattern matching.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::monad::{rename, retract, shift, subst, SubstMap};
use crate::signature::SignatureDoc;
use crate::syntax::{Lexer, Tok};
use crate::term::{fresh_name, print_term, Layer, OpRef, Term};

/// A map from monad terms into state terms usable inside metaterms
/// (the paper's `j`). Matching through it uses `invert`.
pub trait EmbedHook: Send + Sync {
    fn name(&self) -> &str;
    fn apply(&self, t: &Term) -> Result<Term>;
    fn invert(&self, s: &Term) -> Option<Term>;
}

#[derive(Clone)]
pub struct Embedding(pub Arc<dyn EmbedHook>);

impl Embedding {
    pub fn name(&self) -> &str {
        self.0.name()
    }
}

impl PartialEq for Embedding {
    fn eq(&self, other: &Self) -> bool {
        self.name() == other.name()
    }
}
impl Eq for Embedding {}

impl fmt::Debug for Embedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A metaterm at some level `n`: `Fresh(i)` with `i < n` is a variable
/// outside the instantiation's base scope; operation arguments sit at level
/// `n + binders[j]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MetaTerm {
    Fresh(usize),
    Op(OpRef, Vec<MetaTerm>),
    /// Metavariable with each of its fresh slots substituted.
    Var(String, Vec<MetaTerm>),
    Embed(Embedding, alloc::boxed::Box<MetaTerm>),
    /// A fixed term over the base scope.
    Const(Term),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetaVarDecl {
    pub name: String,
    pub level: usize,
    pub uses_fresh: bool,
    pub layer: Layer,
}

impl MetaVarDecl {
    pub fn new(name: &str, level: usize) -> MetaVarDecl {
        MetaVarDecl { name: name.to_string(), level, uses_fresh: false, layer: Layer::Term }
    }
}

/// Values for metavariables over base scope `base`; `M` of level `l` maps to
/// a term at scope `base + l`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment {
    pub base: usize,
    pub map: BTreeMap<String, Term>,
}

impl Assignment {
    pub fn new(base: usize) -> Assignment {
        Assignment { base, map: BTreeMap::new() }
    }

    pub fn get(&self, name: &str) -> Option<&Term> {
        self.map.get(name)
    }

    pub fn with(mut self, name: &str, t: Term) -> Assignment {
        self.map.insert(name.to_string(), t);
        self
    }

    /// The same instantiation seen from base scope `base + k`: each value's
    /// slot variables move up by `k`.
    pub fn rebase(&self, k: usize, decls: &[MetaVarDecl]) -> Result<Assignment> {
        let mut out = Assignment::new(self.base + k);
        for (name, t) in &self.map {
            let level = level_of(decls, name)?;
            let r: Vec<usize> = (0..self.base)
                .chain((0..level).map(|s| self.base + k + s))
                .collect();
            out.map.insert(name.clone(), rename(t, &r, self.base + k + level)?);
        }
        Ok(out)
    }
}

fn level_of(decls: &[MetaVarDecl], name: &str) -> Result<usize> {
    decls
        .iter()
        .find(|d| d.name == name)
        .map(|d| d.level)
        .ok_or_else(|| Error::UnboundName(name.to_string()))
}

impl MetaTerm {
    pub fn var(name: &str, sub: Vec<MetaTerm>) -> MetaTerm {
        MetaTerm::Var(name.to_string(), sub)
    }

    /// `M` applied to its own slots at the start of the level: `M[*1..*m]`.
    pub fn identity_var(name: &str, level: usize) -> MetaTerm {
        MetaTerm::Var(name.to_string(), (0..level).map(MetaTerm::Fresh).collect())
    }

    /// Metavariable names in left-to-right occurrence order (with repeats).
    pub fn metavars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_metavars(&mut out);
        out
    }

    fn collect_metavars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            MetaTerm::Fresh(_) | MetaTerm::Const(_) => {}
            MetaTerm::Op(_, args) => args.iter().for_each(|a| a.collect_metavars(out)),
            MetaTerm::Var(m, sub) => {
                out.push(m);
                sub.iter().for_each(|a| a.collect_metavars(out));
            }
            MetaTerm::Embed(_, x) => x.collect_metavars(out),
        }
    }

    /// Linear Miller pattern: every metavariable applied to distinct fresh
    /// variables, and each metavariable at most once.
    pub fn is_pattern(&self) -> bool {
        self.is_matchable() && {
            let vs = self.metavars();
            let set: BTreeSet<&str> = vs.iter().copied().collect();
            set.len() == vs.len()
        }
    }

    /// Like [`is_pattern`](Self::is_pattern) but repeated metavariables are
    /// allowed (later occurrences are equality checks).
    pub fn is_matchable(&self) -> bool {
        match self {
            MetaTerm::Fresh(_) | MetaTerm::Const(_) => true,
            MetaTerm::Op(_, args) => args.iter().all(MetaTerm::is_matchable),
            MetaTerm::Var(_, sub) => distinct_fresh(sub).is_some(),
            MetaTerm::Embed(_, x) => x.is_matchable(),
        }
    }

    /// A bare metavariable (possibly under an embedding): such a source
    /// matches every term.
    pub fn is_bare_var(&self) -> bool {
        match self {
            MetaTerm::Var(..) => true,
            MetaTerm::Embed(_, x) => x.is_bare_var(),
            _ => false,
        }
    }

    /// Path of argument indices to the (first) occurrence of metavariable `m`.
    pub fn path_to(&self, m: &str) -> Option<Vec<usize>> {
        match self {
            MetaTerm::Var(n, _) if n == m => Some(Vec::new()),
            MetaTerm::Op(_, args) => args.iter().enumerate().find_map(|(j, a)| {
                a.path_to(m).map(|mut p| {
                    p.insert(0, j);
                    p
                })
            }),
            MetaTerm::Embed(_, x) => x.path_to(m),
            _ => None,
        }
    }

    /// Renames metavariables.
    pub fn map_vars(&self, f: &dyn Fn(&str) -> MetaTerm) -> MetaTerm {
        match self {
            MetaTerm::Fresh(_) | MetaTerm::Const(_) => self.clone(),
            MetaTerm::Op(o, args) => MetaTerm::Op(o.clone(), args.iter().map(|a| a.map_vars(f)).collect()),
            MetaTerm::Var(m, sub) => {
                let sub: Vec<MetaTerm> = sub.iter().map(|a| a.map_vars(f)).collect();
                match f(m) {
                    MetaTerm::Var(m2, _) => MetaTerm::Var(m2, sub),
                    other => other,
                }
            }
            MetaTerm::Embed(e, x) => MetaTerm::Embed(e.clone(), alloc::boxed::Box::new(x.map_vars(f))),
        }
    }

    /// Applies `f` to every operation reference.
    pub fn map_ops(&self, f: &dyn Fn(&OpRef) -> OpRef) -> MetaTerm {
        match self {
            MetaTerm::Fresh(_) | MetaTerm::Const(_) => self.clone(),
            MetaTerm::Op(o, args) => MetaTerm::Op(f(o), args.iter().map(|a| a.map_ops(f)).collect()),
            MetaTerm::Var(m, sub) => MetaTerm::Var(m.clone(), sub.iter().map(|a| a.map_ops(f)).collect()),
            MetaTerm::Embed(e, x) => MetaTerm::Embed(e.clone(), alloc::boxed::Box::new(x.map_ops(f))),
        }
    }

    /// Replaces `Fresh(i)` for `i < n` by `with[i]` and shifts the others down
    /// by `n` (used to uncurry a level-`n` judgment).
    pub fn instantiate_fresh(&self, with: &[MetaTerm]) -> MetaTerm {
        let n = with.len();
        match self {
            MetaTerm::Fresh(i) if *i < n => with[*i].clone(),
            MetaTerm::Fresh(i) => MetaTerm::Fresh(i - n),
            MetaTerm::Const(_) => self.clone(),
            MetaTerm::Op(o, args) => MetaTerm::Op(o.clone(), args.iter().map(|a| a.instantiate_fresh(with)).collect()),
            MetaTerm::Var(m, sub) => MetaTerm::Var(m.clone(), sub.iter().map(|a| a.instantiate_fresh(with)).collect()),
            MetaTerm::Embed(e, x) => MetaTerm::Embed(e.clone(), alloc::boxed::Box::new(x.instantiate_fresh(with))),
        }
    }
}

fn distinct_fresh(sub: &[MetaTerm]) -> Option<Vec<usize>> {
    let mut slots = Vec::with_capacity(sub.len());
    for s in sub {
        match s {
            MetaTerm::Fresh(i) if !slots.contains(i) => slots.push(*i),
            _ => return None,
        }
    }
    Some(slots)
}

/// Instantiates `mt` (at level `level`) under `a`, giving a term at scope
/// `a.base + level`.
pub fn eval(mt: &MetaTerm, level: usize, a: &Assignment) -> Result<Term> {
    match mt {
        MetaTerm::Fresh(i) if *i < level => Ok(Term::Var(a.base + i)),
        MetaTerm::Fresh(i) => Err(Error::Malformed(format!("fresh slot *{} above level {level}", i + 1))),
        MetaTerm::Const(t) => Ok(shift(t, a.base, level)),
        MetaTerm::Op(o, args) => {
            if !o.accepts(args.len()) {
                return Err(Error::Arity {
                    op: o.name.clone(),
                    expected: o.binders.len(),
                    found: args.len(),
                });
            }
            let args = args
                .iter()
                .enumerate()
                .map(|(j, x)| eval(x, level + o.binders_of(j), a))
                .collect::<Result<_>>()?;
            Ok(Term::op(o.clone(), args))
        }
        MetaTerm::Var(m, sub) => {
            let value = a.get(m).ok_or_else(|| Error::MissingMetavar(m.clone()))?;
            if let Some(slots) = distinct_fresh(sub) {
                if slots.iter().enumerate().all(|(k, s)| *s == k) && sub.len() == level {
                    value.check_scope(a.base + level)?;
                    return Ok(value.clone());
                }
            }
            let mut images: Vec<Term> = (0..a.base).map(Term::Var).collect();
            for s in sub {
                images.push(eval(s, level, a)?);
            }
            subst(value, &SubstMap::new(a.base + level, images))
        }
        MetaTerm::Embed(e, x) => e.0.apply(&eval(x, level, a)?),
    }
}

/// Extends `partial` so that `eval(p, level, result) == t`, or fails.
/// `decls` supplies uses-fresh constraints.
pub fn match_pattern(
    p: &MetaTerm,
    level: usize,
    t: &Term,
    partial: &Assignment,
    decls: &[MetaVarDecl],
) -> Option<Assignment> {
    let mut a = partial.clone();
    match_into(p, level, t, &mut a, decls).then_some(a)
}

fn match_into(p: &MetaTerm, level: usize, t: &Term, a: &mut Assignment, decls: &[MetaVarDecl]) -> bool {
    match p {
        MetaTerm::Fresh(i) => *t == Term::Var(a.base + i),
        MetaTerm::Const(c) => *t == shift(c, a.base, level),
        MetaTerm::Op(o, ps) => match t {
            Term::Op(o2, ts) if o == o2 && ps.len() == ts.len() => ps
                .iter()
                .zip(ts)
                .enumerate()
                .all(|(j, (p, t))| match_into(p, level + o.binders_of(j), t, a, decls)),
            _ => false,
        },
        MetaTerm::Embed(e, x) => match e.0.invert(t) {
            Some(u) => match_into(x, level, &u, a, decls),
            None => false,
        },
        MetaTerm::Var(m, sub) => {
            let Some(slots) = distinct_fresh(sub) else {
                return match a.get(m) {
                    Some(_) => eval(p, level, a).map(|v| v == *t).unwrap_or(false),
                    None => false,
                };
            };
            let base = a.base;
            let width = slots.len();
            let mut r: Vec<Option<usize>> = (0..base).map(Some).collect();
            r.extend((0..level).map(|i| slots.iter().position(|s| *s == i).map(|k| base + k)));
            let Some(value) = retract(t, &r, base + width) else {
                return false;
            };
            if let Some(d) = decls.iter().find(|d| d.name == *m) {
                if d.uses_fresh && !(0..width).all(|k| value.mentions(base + k)) {
                    return false;
                }
            }
            match a.map.get(m) {
                Some(old) => *old == value,
                None => {
                    a.map.insert(m.clone(), value);
                    true
                }
            }
        }
    }
}

/// Checks that every declared metavariable has a well-scoped value and that
/// uses-fresh constraints hold.
pub fn check_assignment(a: &Assignment, decls: &[MetaVarDecl]) -> bool {
    a.map.len() == decls.len()
        && decls.iter().all(|d| match a.get(&d.name) {
            Some(v) => {
                v.closed_under(a.base + d.level)
                    && (!d.uses_fresh || (0..d.level).all(|k| v.mentions(a.base + k)))
            }
            None => false,
        })
}

/// Parsing context for metaterms.
pub struct MetaCtx<'a> {
    pub doc: &'a SignatureDoc,
    pub metavars: Vec<MetaVarDecl>,
    /// Names resolving to base-scope variables (`Const(Var(i))`).
    pub free: Vec<String>,
    /// Declare unknown capitalized names as metavariables on first use.
    pub auto_declare: bool,
    seen: Vec<bool>,
}

impl<'a> MetaCtx<'a> {
    pub fn new(doc: &'a SignatureDoc, metavars: Vec<MetaVarDecl>) -> MetaCtx<'a> {
        let seen = alloc::vec![false; metavars.len()];
        MetaCtx { doc, metavars, free: Vec::new(), auto_declare: false, seen }
    }

    pub fn with_free(mut self, free: &[String]) -> Self {
        self.free = free.to_vec();
        self
    }

    pub fn auto(mut self) -> Self {
        self.auto_declare = true;
        self
    }

    fn decl_index(&self, name: &str) -> Option<usize> {
        self.metavars.iter().position(|d| d.name == name)
    }

    fn note_layer(&mut self, i: usize, layer: Layer, lx: &Lexer) -> Result<()> {
        if self.seen[i] && self.metavars[i].layer != layer {
            return Err(lx.error(format!(
                "metavariable `{}` used both as a term and as a state",
                self.metavars[i].name
            )));
        }
        self.seen[i] = true;
        self.metavars[i].layer = layer;
        Ok(())
    }
}

/// Parses a complete metaterm.
pub fn parse_metaterm(text: &str, ctx: &mut MetaCtx<'_>, level: usize, layer: Layer) -> Result<MetaTerm> {
    let mut lx = Lexer::new(text)?;
    let mt = parse_mt(&mut lx, ctx, level, layer)?;
    lx.expect_end()?;
    Ok(mt)
}

pub(crate) fn parse_mt(lx: &mut Lexer, ctx: &mut MetaCtx<'_>, level: usize, layer: Layer) -> Result<MetaTerm> {
    let mut env = Vec::new();
    parse_mt_in(lx, ctx, &mut env, level, layer)
}

fn parse_mt_in(
    lx: &mut Lexer,
    ctx: &mut MetaCtx<'_>,
    env: &mut Vec<(String, usize)>,
    level: usize,
    layer: Layer,
) -> Result<MetaTerm> {
    if lx.eat(&Tok::Star) {
        let k = lx.num()?;
        if k == 0 || k > level {
            return Err(lx.error(format!("fresh slot *{k} outside level {level}")));
        }
        return Ok(MetaTerm::Fresh(k - 1));
    }
    let name = lx.ident()?;
    if lx.eat(&Tok::LParen) {
        if let Some(op) = ctx.doc.op(&name, layer).cloned() {
            let mut args = Vec::new();
            if !lx.eat(&Tok::RParen) {
                loop {
                    let j = args.len();
                    if !op.variadic && j >= op.binders.len() {
                        return Err(lx.error(format!("too many arguments for `{name}`")));
                    }
                    let names = lx.binder_names()?;
                    let k = op.binders_of(j);
                    if names.len() != k {
                        return Err(lx.error(format!(
                            "argument {} of `{name}` binds {k} variables, found {}",
                            j + 1,
                            names.len()
                        )));
                    }
                    let mark = env.len();
                    env.extend(names.into_iter().enumerate().map(|(b, n)| (n, level + b)));
                    let arg = parse_mt_in(lx, ctx, env, level + k, op.layer_of(j));
                    env.truncate(mark);
                    args.push(arg?);
                    if lx.eat(&Tok::RParen) {
                        break;
                    }
                    lx.expect(&Tok::Comma)?;
                }
            }
            if !op.accepts(args.len()) {
                return Err(lx.error(format!(
                    "operation `{name}` expects {} arguments, found {}",
                    op.binders.len(),
                    args.len()
                )));
            }
            return Ok(MetaTerm::Op(op, args));
        }
        if layer == Layer::State {
            if let Some(e) = ctx.doc.embedding(&name) {
                let x = parse_mt_in(lx, ctx, env, level, Layer::Term)?;
                lx.expect(&Tok::RParen)?;
                return Ok(MetaTerm::Embed(e.clone(), alloc::boxed::Box::new(x)));
            }
        }
        return Err(lx.error(format!("unknown operation `{name}`")));
    }
    if let Some(i) = ctx.decl_index(&name) {
        ctx.note_layer(i, layer, lx)?;
        let m = ctx.metavars[i].level;
        let sub = parse_sub(lx, ctx, env, level, m, &name)?;
        return Ok(MetaTerm::Var(name, sub));
    }
    if let Some((_, idx)) = env.iter().rev().find(|(n, _)| *n == name) {
        return Ok(MetaTerm::Fresh(*idx));
    }
    if let Some(i) = ctx.free.iter().rposition(|n| *n == name) {
        return Ok(MetaTerm::Const(Term::Var(i)));
    }
    if ctx.auto_declare && name.starts_with(|c: char| c.is_uppercase()) {
        let sub = if lx.peek() == Some(&Tok::LBrack) {
            parse_positional(lx, ctx, env, level)?
        } else {
            Vec::new()
        };
        let mut d = MetaVarDecl::new(&name, sub.len());
        d.layer = layer;
        ctx.metavars.push(d);
        ctx.seen.push(true);
        return Ok(MetaTerm::Var(name, sub));
    }
    Err(lx.error(format!("unbound name `{name}`")))
}

fn parse_positional(
    lx: &mut Lexer,
    ctx: &mut MetaCtx<'_>,
    env: &mut Vec<(String, usize)>,
    level: usize,
) -> Result<Vec<MetaTerm>> {
    lx.expect(&Tok::LBrack)?;
    let mut sub = Vec::new();
    if lx.eat(&Tok::RBrack) {
        return Ok(sub);
    }
    loop {
        sub.push(parse_mt_in(lx, ctx, env, level, Layer::Term)?);
        if lx.eat(&Tok::RBrack) {
            return Ok(sub);
        }
        lx.expect(&Tok::Comma)?;
    }
}

fn parse_sub(
    lx: &mut Lexer,
    ctx: &mut MetaCtx<'_>,
    env: &mut Vec<(String, usize)>,
    level: usize,
    m: usize,
    name: &str,
) -> Result<Vec<MetaTerm>> {
    if lx.peek() != Some(&Tok::LBrack) {
        if m > level {
            return Err(lx.error(format!("`{name}` has {m} slots but only {level} fresh variables are in scope")));
        }
        return Ok((0..m).map(MetaTerm::Fresh).collect());
    }
    let named = lx.peek_at(1) == Some(&Tok::Star)
        && matches!(lx.peek_at(2), Some(Tok::Num(_)))
        && lx.peek_at(3) == Some(&Tok::Assign);
    if !named {
        let sub = parse_positional(lx, ctx, env, level)?;
        if sub.len() != m {
            return Err(lx.error(format!("`{name}` has {m} slots, {} given", sub.len())));
        }
        return Ok(sub);
    }
    lx.expect(&Tok::LBrack)?;
    let mut sub: Vec<Option<MetaTerm>> = alloc::vec![None; m];
    loop {
        lx.expect(&Tok::Star)?;
        let k = lx.num()?;
        lx.expect(&Tok::Assign)?;
        if k == 0 || k > m {
            return Err(lx.error(format!("`{name}` has no slot *{k}")));
        }
        let e = parse_mt_in(lx, ctx, env, level, Layer::Term)?;
        sub[k - 1] = Some(e);
        if lx.eat(&Tok::RBrack) {
            break;
        }
        lx.expect(&Tok::Comma)?;
    }
    sub.into_iter()
        .enumerate()
        .map(|(k, s)| match s {
            Some(s) => Ok(s),
            None if k < level => Ok(MetaTerm::Fresh(k)),
            None => Err(lx.error(format!("slot *{} of `{name}` needs a value", k + 1))),
        })
        .collect()
}

/// Prints a metaterm at judgment level `level`: slots of the judgment print
/// as `*k`, binder-introduced variables get names.
pub fn print_metaterm(mt: &MetaTerm, level: usize) -> String {
    let mut env: Vec<String> = (0..level).map(|i| format!("*{}", i + 1)).collect();
    let mut out = String::new();
    print_mt(mt, &mut env, &[], &mut out);
    out
}

/// As [`print_metaterm`] with names for base-scope constants.
pub fn print_metaterm_with(mt: &MetaTerm, level: usize, free: &[String]) -> String {
    let mut env: Vec<String> = (0..level).map(|i| format!("*{}", i + 1)).collect();
    let mut out = String::new();
    print_mt(mt, &mut env, free, &mut out);
    out
}

fn print_mt(mt: &MetaTerm, env: &mut Vec<String>, free: &[String], out: &mut String) {
    match mt {
        MetaTerm::Fresh(i) => match env.get(*i) {
            Some(n) => out.push_str(n),
            None => out.push_str(&format!("*{}", i + 1)),
        },
        MetaTerm::Const(t) => out.push_str(&print_term(t, free)),
        MetaTerm::Var(m, sub) => {
            out.push_str(m);
            if !sub.is_empty() {
                out.push('[');
                for (k, s) in sub.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    print_mt(s, env, free, out);
                }
                out.push(']');
            }
        }
        MetaTerm::Embed(e, x) => {
            out.push_str(e.name());
            out.push('(');
            print_mt(x, env, free, out);
            out.push(')');
        }
        MetaTerm::Op(o, args) => {
            out.push_str(&o.name);
            out.push('(');
            for (j, a) in args.iter().enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                let k = o.binders_of(j);
                let mark = env.len();
                for b in 0..k {
                    let mut taken: Vec<String> = env.clone();
                    taken.extend(free.iter().cloned());
                    let name = fresh_name(&taken, mark + b);
                    out.push_str(&name);
                    out.push(if b + 1 == k { '.' } else { ' ' });
                    env.push(name);
                }
                if k > 0 {
                    out.push(' ');
                }
                print_mt(a, env, free, out);
                env.truncate(mark);
            }
            out.push(')');
        }
    }
}
