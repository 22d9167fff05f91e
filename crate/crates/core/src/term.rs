//! Well-scoped terms.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::hash::{Hash, Hasher};
use core::ops::Deref;

use crate::error::{Error, Result};
use crate::signature::SignatureDoc;
use crate::syntax::{Lexer, Tok};

/// Which sort a position holds: a term of the monad or a state term
/// (the endpoints of heterogeneous reductions).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Layer {
    Term,
    State,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Collection {
    Ordered,
    Sorted,
    SortedDedup,
}

/// An operation declaration. Monad operations have every argument in
/// [`Layer::Term`]; state operations mix base slots (monad terms) and nested
/// state slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpDecl {
    pub name: String,
    pub layer: Layer,
    pub binders: Vec<usize>,
    pub arg_layers: Vec<Layer>,
    pub collection: Collection,
    pub variadic: bool,
}

impl OpDecl {
    pub fn term(name: &str, binders: &[usize]) -> OpDecl {
        OpDecl {
            name: name.to_string(),
            layer: Layer::Term,
            binders: binders.to_vec(),
            arg_layers: binders.iter().map(|_| Layer::Term).collect(),
            collection: Collection::Ordered,
            variadic: false,
        }
    }

    pub fn binders_of(&self, j: usize) -> usize {
        if self.variadic {
            self.binders[0]
        } else {
            self.binders[j]
        }
    }

    pub fn layer_of(&self, j: usize) -> Layer {
        if self.variadic {
            self.arg_layers[0]
        } else {
            self.arg_layers[j]
        }
    }

    pub fn accepts(&self, n: usize) -> bool {
        self.variadic || n == self.binders.len()
    }

    /// Number of arguments, `None` for variadic operations.
    pub fn arity(&self) -> Option<usize> {
        (!self.variadic).then_some(self.binders.len())
    }
}

/// Shared handle on a declaration. Identity is the pair (name, layer).
#[derive(Clone)]
pub struct OpRef(Arc<OpDecl>);

impl OpRef {
    pub fn new(decl: OpDecl) -> OpRef {
        OpRef(Arc::new(decl))
    }

    pub fn decl(&self) -> &OpDecl {
        &self.0
    }
}

impl Deref for OpRef {
    type Target = OpDecl;
    fn deref(&self) -> &OpDecl {
        &self.0
    }
}

impl PartialEq for OpRef {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.layer == other.layer
    }
}
impl Eq for OpRef {}

impl PartialOrd for OpRef {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OpRef {
    fn cmp(&self, other: &Self) -> Ordering {
        self.name
            .cmp(&other.name)
            .then(self.layer.cmp(&other.layer))
    }
}

impl Hash for OpRef {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.name.hash(state);
        self.layer.hash(state);
    }
}

impl fmt::Debug for OpRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// A term at some scope `n`. `Var(i)` requires `i < n`; argument `j` of an
/// operation lives at scope `n + binders[j]`.
///
/// The derived order is the canonical one: variables before operations,
/// variables by index, operations by name then argument-wise.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(usize),
    Op(OpRef, Vec<Term>),
}

impl Term {
    /// Builds an operation node, putting sorted collections in canonical order.
    pub fn op(op: OpRef, mut args: Vec<Term>) -> Term {
        match op.collection {
            Collection::Ordered => {}
            Collection::Sorted => args.sort(),
            Collection::SortedDedup => {
                args.sort();
                args.dedup();
            }
        }
        Term::Op(op, args)
    }

    pub fn op_name(&self) -> Option<&str> {
        match self {
            Term::Op(o, _) => Some(&o.name),
            Term::Var(_) => None,
        }
    }

    /// Number of nodes (variables and operations).
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Op(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    /// Whether variable `i` (free at the root) occurs.
    pub fn mentions(&self, i: usize) -> bool {
        match self {
            Term::Var(j) => *j == i,
            Term::Op(_, args) => args.iter().any(|a| a.mentions(i)),
        }
    }

    /// Whether every variable is below `n`.
    pub fn closed_under(&self, n: usize) -> bool {
        self.check_scope(n).is_ok()
    }

    /// Checks variable bounds only (no signature involved).
    pub fn check_scope(&self, n: usize) -> Result<()> {
        match self {
            Term::Var(i) if *i < n => Ok(()),
            Term::Var(i) => Err(Error::ScopeMismatch { index: *i, scope: n }),
            Term::Op(o, args) => args
                .iter()
                .enumerate()
                .try_for_each(|(j, a)| a.check_scope(n + o.binders_of(j))),
        }
    }

    /// Subterm at a preorder path.
    pub fn at(&self, path: &[usize]) -> Option<&Term> {
        match path.split_first() {
            None => Some(self),
            Some((&j, rest)) => match self {
                Term::Op(_, args) => args.get(j)?.at(rest),
                Term::Var(_) => None,
            },
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(i) => write!(f, "#{i}"),
            Term::Op(o, args) => {
                write!(f, "{}(", o.name)?;
                for (j, a) in args.iter().enumerate() {
                    if j > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a:?}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Checks scope, arity, layers and canonical collection order against `doc`.
pub fn well_scoped(t: &Term, n: usize, doc: &SignatureDoc) -> bool {
    well_scoped_at(t, n, doc, Layer::Term)
}

pub fn well_scoped_at(t: &Term, n: usize, doc: &SignatureDoc, layer: Layer) -> bool {
    match t {
        Term::Var(i) => layer == Layer::Term && *i < n,
        Term::Op(o, args) => {
            let Some(decl) = doc.op(&o.name, layer) else {
                return false;
            };
            if decl.decl() != o.decl() || !o.accepts(args.len()) {
                return false;
            }
            let ordered = match o.collection {
                Collection::Ordered => true,
                Collection::Sorted => args.windows(2).all(|w| w[0] <= w[1]),
                Collection::SortedDedup => args.windows(2).all(|w| w[0] < w[1]),
            };
            ordered
                && args.iter().enumerate().all(|(j, a)| {
                    well_scoped_at(a, n + o.binders_of(j), doc, o.layer_of(j))
                })
        }
    }
}

/// Default display names: `x0, x1, ...` by level.
pub fn default_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

/// Prints a term whose free variables are named by `names` (variables beyond
/// `names` print with default names). Binders get `x<level>`, primed until
/// they clash with nothing in scope.
pub fn print_term(t: &Term, names: &[String]) -> String {
    let mut env: Vec<String> = names.to_vec();
    let mut out = String::new();
    print_into(t, &mut env, &mut out);
    out
}

fn var_name(env: &[String], i: usize) -> String {
    env.get(i).cloned().unwrap_or_else(|| format!("x{i}"))
}

pub(crate) fn fresh_name(env: &[String], level: usize) -> String {
    let mut name = format!("x{level}");
    while env.iter().any(|e| *e == name) {
        name.push('\'');
    }
    name
}

fn print_into(t: &Term, env: &mut Vec<String>, out: &mut String) {
    match t {
        Term::Var(i) => out.push_str(&var_name(env, *i)),
        Term::Op(o, args) => {
            out.push_str(&o.name);
            out.push('(');
            for (j, a) in args.iter().enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                let k = o.binders_of(j);
                let base = env.len();
                for b in 0..k {
                    let name = fresh_name(env, base + b);
                    out.push_str(&name);
                    out.push(if b + 1 == k { '.' } else { ' ' });
                    env.push(name);
                }
                if k > 0 {
                    out.push(' ');
                }
                print_into(a, env, out);
                env.truncate(base);
            }
            out.push(')');
        }
    }
}

/// Parses a term at the scope named by `names` (index = position).
pub fn parse_term(text: &str, names: &[String], doc: &SignatureDoc) -> Result<Term> {
    parse_term_at(text, names, doc, Layer::Term)
}

pub fn parse_term_at(text: &str, names: &[String], doc: &SignatureDoc, layer: Layer) -> Result<Term> {
    let mut lx = Lexer::new(text)?;
    let mut env = names.to_vec();
    let t = parse_in(&mut lx, &mut env, doc, layer)?;
    lx.expect_end()?;
    Ok(t)
}

fn parse_in(lx: &mut Lexer, env: &mut Vec<String>, doc: &SignatureDoc, layer: Layer) -> Result<Term> {
    let name = lx.ident()?;
    if !lx.eat(&Tok::LParen) {
        return match env.iter().rposition(|e| *e == name) {
            Some(i) => Ok(Term::Var(i)),
            None => Err(Error::UnboundName(name)),
        };
    }
    let op = doc
        .op(&name, layer)
        .cloned()
        .ok_or_else(|| lx.error(format!("unknown operation `{name}`")))?;
    let mut args = Vec::new();
    if !lx.eat(&Tok::RParen) {
        loop {
            let j = args.len();
            if !op.variadic && j >= op.binders.len() {
                return Err(lx.error(format!(
                    "operation `{name}` expects {} arguments",
                    op.binders.len()
                )));
            }
            let binders = lx.binder_names()?;
            let k = op.binders_of(j);
            if binders.len() != k {
                return Err(lx.error(format!(
                    "argument {} of `{name}` binds {k} variables, found {}",
                    j + 1,
                    binders.len()
                )));
            }
            let base = env.len();
            env.extend(binders);
            let a = parse_in(lx, env, doc, op.layer_of(j));
            env.truncate(base);
            args.push(a?);
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
    Ok(Term::op(op, args))
}
