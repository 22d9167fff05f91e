//! Signature documents: operations, equations, reduction rules and optional
//! state functors, with validation, coproducts and derived rule packs.

mod catalog;
mod parse;
mod print;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::metaterm::{Embedding, MetaTerm, MetaVarDecl};
use crate::term::{Collection, Layer, OpDecl, OpRef};

pub use catalog::{builtin, builtin_names, builtin_text};
pub use parse::parse_signature;
pub use print::print_signature;

/// Canonicalizer hooks for canonical-mode equations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Hook {
    SortArgs,
    SortDedupArgs,
    PiStruct,
    /// Least element of the finite orbit under the equation.
    OrbitMin,
}

impl Hook {
    pub fn name(self) -> &'static str {
        match self {
            Hook::SortArgs => "sort-args",
            Hook::SortDedupArgs => "sort-dedup-args",
            Hook::PiStruct => "pi-struct",
            Hook::OrbitMin => "orbit-min",
        }
    }

    pub fn from_name(s: &str) -> Option<Hook> {
        [Hook::SortArgs, Hook::SortDedupArgs, Hook::PiStruct, Hook::OrbitMin]
            .into_iter()
            .find(|h| h.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EqMode {
    Rewrite,
    Canonical(Hook),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationSpec {
    pub name: String,
    pub metavars: Vec<MetaVarDecl>,
    pub level: usize,
    pub layer: Layer,
    pub lhs: MetaTerm,
    pub rhs: MetaTerm,
    pub mode: EqMode,
}

/// `src ~> tgt` at a level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Judgment {
    pub level: usize,
    pub src: MetaTerm,
    pub tgt: MetaTerm,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionRuleSpec {
    pub name: String,
    pub metavars: Vec<MetaVarDecl>,
    pub hypotheses: Vec<Judgment>,
    pub conclusion: Judgment,
}

impl ReductionRuleSpec {
    pub fn decl(&self, name: &str) -> Option<&MetaVarDecl> {
        self.metavars.iter().find(|d| d.name == name)
    }

    /// Whether hypothesis `i` works on a strict part of the conclusion source:
    /// its source is a metavariable (possibly under an embedding) applied to
    /// distinct fresh variables, bound strictly below the root.
    pub fn is_structural(&self, i: usize) -> bool {
        let h = &self.hypotheses[i];
        let mut src = &h.src;
        while let MetaTerm::Embed(_, x) = src {
            src = x;
        }
        let MetaTerm::Var(m, _) = src else { return false };
        h.src.is_matchable()
            && matches!(self.conclusion.src.path_to(m), Some(p) if !p.is_empty())
    }

    pub fn all_structural(&self) -> bool {
        (0..self.hypotheses.len()).all(|i| self.is_structural(i))
    }

    /// Rules whose conclusion source is a (linear or not) pattern can be
    /// fired by matching; the others are only checked.
    pub fn is_searchable(&self) -> bool {
        self.conclusion.level == 0 && self.conclusion.src.is_matchable()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateFunctorSpec {
    pub name: String,
    pub ops: Vec<OpRef>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbedDecl {
    pub name: String,
    pub kind: String,
    pub hook: Embedding,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SignatureDoc {
    pub ops: Vec<OpRef>,
    pub equations: Vec<EquationSpec>,
    pub rules: Vec<ReductionRuleSpec>,
    pub state: Option<(StateFunctorSpec, StateFunctorSpec)>,
    pub embeds: Vec<EmbedDecl>,
}

impl SignatureDoc {
    pub fn empty() -> SignatureDoc {
        SignatureDoc::default()
    }

    pub fn op(&self, name: &str, layer: Layer) -> Option<&OpRef> {
        match layer {
            Layer::Term => self.ops.iter().find(|o| o.name == name),
            Layer::State => self.state.as_ref().and_then(|(t1, t2)| {
                t1.ops.iter().chain(&t2.ops).find(|o| o.name == name)
            }),
        }
    }

    pub fn embedding(&self, name: &str) -> Option<&Embedding> {
        self.embeds.iter().find(|e| e.name == name).map(|e| &e.hook)
    }

    pub fn rule(&self, name: &str) -> Option<&ReductionRuleSpec> {
        self.rules.iter().find(|r| r.name == name)
    }

    pub fn equation(&self, name: &str) -> Option<&EquationSpec> {
        self.equations.iter().find(|e| e.name == name)
    }

    /// Canonicalizer hooks declared by canonical-mode equations.
    pub fn hooks(&self) -> Vec<Hook> {
        let set: BTreeSet<Hook> = self
            .equations
            .iter()
            .filter_map(|e| match e.mode {
                EqMode::Canonical(h) => Some(h),
                EqMode::Rewrite => None,
            })
            .collect();
        set.into_iter().collect()
    }

    /// Layer of rule endpoints.
    pub fn judgment_layer(&self) -> Layer {
        if self.state.is_some() {
            Layer::State
        } else {
            Layer::Term
        }
    }

    /// This document with extra rules appended, skipping names already present.
    pub fn with_rules(&self, extra: Vec<ReductionRuleSpec>) -> SignatureDoc {
        let mut doc = self.clone();
        for r in extra {
            if doc.rule(&r.name).is_none() {
                doc.rules.push(r);
            }
        }
        doc
    }

    pub fn without_rules(&self, names: &[&str]) -> SignatureDoc {
        let mut doc = self.clone();
        doc.rules.retain(|r| !names.contains(&r.name.as_str()));
        doc
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Note,
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportItem {
    pub subject: String,
    pub status: Status,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub items: Vec<ReportItem>,
}

impl ValidationReport {
    pub fn accepted(&self) -> bool {
        self.items.iter().all(|i| i.status != Status::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &ReportItem> {
        self.items.iter().filter(|i| i.status == Status::Error)
    }

    fn push(&mut self, subject: &str, status: Status, message: String) {
        self.items.push(ReportItem { subject: subject.to_string(), status, message });
    }

    fn close(&mut self, subject: &str, mark: usize) {
        if !self.items[mark..].iter().any(|i| i.status == Status::Error || i.status == Status::Warning) {
            self.push(subject, Status::Pass, "ok".into());
        }
    }
}

/// Checks a metaterm at `level` against declarations and arities.
fn well_formed(mt: &MetaTerm, level: usize, decls: &[MetaVarDecl], out: &mut Vec<String>) {
    match mt {
        MetaTerm::Fresh(i) => {
            if *i >= level {
                out.push(format!("fresh slot *{} outside level {level}", i + 1));
            }
        }
        MetaTerm::Const(_) => {}
        MetaTerm::Op(o, args) => {
            if !o.accepts(args.len()) {
                out.push(format!("`{}` expects {} arguments, found {}", o.name, o.binders.len(), args.len()));
                return;
            }
            for (j, a) in args.iter().enumerate() {
                well_formed(a, level + o.binders_of(j), decls, out);
            }
        }
        MetaTerm::Var(m, sub) => {
            match decls.iter().find(|d| d.name == *m) {
                None => out.push(format!("unbound metavariable `{m}`")),
                Some(d) if d.level != sub.len() => {
                    out.push(format!("`{m}` has {} slots, {} given", d.level, sub.len()))
                }
                Some(_) => {}
            }
            for s in sub {
                well_formed(s, level, decls, out);
            }
        }
        MetaTerm::Embed(_, x) => well_formed(x, level, decls, out),
    }
}

fn vars_of(mts: &[&MetaTerm]) -> BTreeSet<String> {
    mts.iter().flat_map(|m| m.metavars()).map(String::from).collect()
}

/// Runs the three validation stages (operations, equations, rules).
pub fn validate(doc: &SignatureDoc) -> ValidationReport {
    let mut rep = ValidationReport::default();

    let mut seen = BTreeSet::new();
    for o in &doc.ops {
        let subject = format!("op {}", o.name);
        let mark = rep.items.len();
        if !seen.insert(o.name.clone()) {
            rep.push(&subject, Status::Error, "duplicate operation name".into());
        }
        check_op(o, &subject, &mut rep);
        rep.close(&subject, mark);
    }
    if let Some((t1, t2)) = &doc.state {
        for f in [t1, t2] {
            let mut names = BTreeSet::new();
            for o in &f.ops {
                let subject = format!("state {} op {}", f.name, o.name);
                let mark = rep.items.len();
                if !names.insert(o.name.clone()) {
                    rep.push(&subject, Status::Error, "duplicate state operation".into());
                }
                for (j, l) in o.arg_layers.iter().enumerate() {
                    if *l == Layer::Term && o.binders[j] != 0 {
                        rep.push(&subject, Status::Error, "base slots bind nothing".into());
                    }
                }
                if let Some(other) = doc.op(&o.name, Layer::State) {
                    if other.decl() != o.decl() {
                        rep.push(&subject, Status::Error, "declared differently in T1 and T2".into());
                    }
                }
                rep.close(&subject, mark);
            }
        }
    }
    for e in &doc.embeds {
        let subject = format!("embed {}", e.name);
        if e.kind != "cbv" {
            rep.push(&subject, Status::Error, format!("unknown embedding kind `{}`", e.kind));
        } else {
            rep.push(&subject, Status::Pass, "ok".into());
        }
    }

    let mut eq_names = BTreeSet::new();
    for eq in &doc.equations {
        let subject = format!("eq {}", eq.name);
        let mark = rep.items.len();
        if !eq_names.insert(eq.name.clone()) {
            rep.push(&subject, Status::Error, "duplicate equation name".into());
        }
        check_decls(&eq.metavars, &subject, &mut rep);
        let mut problems = Vec::new();
        well_formed(&eq.lhs, eq.level, &eq.metavars, &mut problems);
        well_formed(&eq.rhs, eq.level, &eq.metavars, &mut problems);
        for p in problems {
            rep.push(&subject, Status::Error, p);
        }
        match &eq.mode {
            EqMode::Rewrite => {
                if !eq.lhs.is_pattern() {
                    rep.push(&subject, Status::Error, "rewrite lhs is not a pattern".into());
                } else if eq.lhs.is_bare_var() {
                    rep.push(&subject, Status::Error, "rewrite lhs is a bare metavariable".into());
                }
                let lhs = vars_of(&[&eq.lhs]);
                for v in vars_of(&[&eq.rhs]) {
                    if !lhs.contains(&v) {
                        rep.push(&subject, Status::Error, format!("rhs metavariable `{v}` does not occur in lhs"));
                    }
                }
            }
            EqMode::Canonical(h) => check_hook(doc, eq, *h, &subject, &mut rep),
        }
        rep.close(&subject, mark);
    }

    let mut rule_names = BTreeSet::new();
    for r in &doc.rules {
        let subject = format!("rule {}", r.name);
        let mark = rep.items.len();
        if !rule_names.insert(r.name.clone()) {
            rep.push(&subject, Status::Error, "duplicate rule name".into());
        }
        check_rule(r, &subject, &mut rep);
        rep.close(&subject, mark);
    }
    rep
}

fn check_op(o: &OpDecl, subject: &str, rep: &mut ValidationReport) {
    if o.variadic && o.binders.len() != 1 {
        rep.push(subject, Status::Error, "variadic operations take one binder count".into());
    }
    if o.collection != Collection::Ordered
        && !o.variadic
        && o.binders.windows(2).any(|w| w[0] != w[1])
    {
        rep.push(subject, Status::Error, "unordered arguments must bind alike".into());
    }
}

fn check_decls(decls: &[MetaVarDecl], subject: &str, rep: &mut ValidationReport) {
    let mut names = BTreeSet::new();
    for d in decls {
        if !names.insert(&d.name) {
            rep.push(subject, Status::Error, format!("metavariable `{}` declared twice", d.name));
        }
    }
}

fn check_hook(doc: &SignatureDoc, eq: &EquationSpec, h: Hook, subject: &str, rep: &mut ValidationReport) {
    match h {
        Hook::SortArgs | Hook::SortDedupArgs => {
            let want = if h == Hook::SortArgs { Collection::Sorted } else { Collection::SortedDedup };
            match &eq.lhs {
                MetaTerm::Op(o, _) if o.collection == want => {}
                _ => rep.push(subject, Status::Error, format!("`{}` needs an lhs rooted at a {} operation", h.name(), h.name().trim_start_matches("sort-"))),
            }
        }
        Hook::PiStruct => {
            if crate::operational::PiShape::from_doc(doc).is_none() {
                rep.push(subject, Status::Error, "pi-struct needs state operations zero, par, bang, nu, out, inp".into());
            }
        }
        Hook::OrbitMin => {
            if !eq.lhs.is_pattern() || !eq.rhs.is_pattern() || eq.lhs.is_bare_var() || eq.rhs.is_bare_var() {
                rep.push(subject, Status::Error, "orbit-min needs both sides to be non-variable patterns".into());
            }
            if vars_of(&[&eq.lhs]) != vars_of(&[&eq.rhs]) {
                rep.push(subject, Status::Error, "orbit-min needs both sides over the same metavariables".into());
            }
        }
    }
}

fn check_rule(r: &ReductionRuleSpec, subject: &str, rep: &mut ValidationReport) {
    check_decls(&r.metavars, subject, rep);
    let mut problems = Vec::new();
    for h in &r.hypotheses {
        well_formed(&h.src, h.level, &r.metavars, &mut problems);
        well_formed(&h.tgt, h.level, &r.metavars, &mut problems);
    }
    well_formed(&r.conclusion.src, r.conclusion.level, &r.metavars, &mut problems);
    well_formed(&r.conclusion.tgt, r.conclusion.level, &r.metavars, &mut problems);
    if !problems.is_empty() {
        for p in problems {
            rep.push(subject, Status::Error, p);
        }
        return;
    }
    let r = &normalize_rule(r);
    if r.metavars.len() > 0 && r.conclusion.src.is_pattern() != r.conclusion.src.is_matchable() {
        rep.push(subject, Status::Note, "nonlinear source: repeated metavariables are matched by equality".into());
    }
    if !r.conclusion.src.is_matchable() {
        rep.push(subject, Status::Warning, "check-only: conclusion source is not a pattern".into());
        let mut known = vars_of(&[&r.conclusion.src]);
        for h in &r.hypotheses {
            known.extend(vars_of(&[&h.src, &h.tgt]));
        }
        for v in vars_of(&[&r.conclusion.tgt]) {
            if !known.contains(&v) {
                rep.push(subject, Status::Error, format!("unbound metavariable `{v}` in conclusion target"));
            }
        }
        return;
    }
    let mut bound = vars_of(&[&r.conclusion.src]);
    for (i, h) in r.hypotheses.iter().enumerate() {
        for v in vars_of(&[&h.src]) {
            if !bound.contains(&v) {
                rep.push(subject, Status::Error, format!("unbound metavariable `{v}` in source of hypothesis {}", i + 1));
            }
        }
        let tgt = vars_of(&[&h.tgt]);
        if !tgt.is_subset(&bound) {
            if h.tgt.is_matchable() {
                bound.extend(tgt);
            } else {
                rep.push(subject, Status::Error, format!("target of hypothesis {} is neither determined nor a pattern", i + 1));
            }
        }
        if !r.is_structural(i) {
            rep.push(subject, Status::Note, format!("hypothesis {} is not structurally decreasing: step skips this rule, derive charges depth", i + 1));
        }
    }
    for v in vars_of(&[&r.conclusion.tgt]) {
        if !bound.contains(&v) {
            rep.push(subject, Status::Error, format!("unbound metavariable `{v}` in conclusion target"));
        }
    }
}

/// Validates and fails with the first error.
pub fn accept(doc: &SignatureDoc) -> Result<()> {
    let rep = validate(doc);
    let first = rep.errors().next().map(|e| format!("{}: {}", e.subject, e.message));
    match first {
        None => Ok(()),
        Some(m) => Err(Error::Rejected(m)),
    }
}

/// Union of two documents. Names must be disjoint.
pub fn coproduct(a: &SignatureDoc, b: &SignatureDoc) -> Result<SignatureDoc> {
    coproduct_renamed(a, b, &BTreeMap::new())
}

/// Union after renaming `b`'s operations, equations and rules through `renames`.
pub fn coproduct_renamed(
    a: &SignatureDoc,
    b: &SignatureDoc,
    renames: &BTreeMap<String, String>,
) -> Result<SignatureDoc> {
    let b = rename_doc(b, renames);
    let mut out = a.clone();
    for o in &b.ops {
        if out.op(&o.name, Layer::Term).is_some() {
            return Err(Error::NameClash(o.name.clone()));
        }
        out.ops.push(o.clone());
    }
    for e in &b.equations {
        if out.equation(&e.name).is_some() {
            return Err(Error::NameClash(e.name.clone()));
        }
        out.equations.push(e.clone());
    }
    for r in &b.rules {
        if out.rule(&r.name).is_some() {
            return Err(Error::NameClash(r.name.clone()));
        }
        out.rules.push(r.clone());
    }
    out.state = match (&out.state, &b.state) {
        (None, s) => s.clone(),
        (s, None) => s.clone(),
        (Some((a1, a2)), Some((b1, b2))) => Some((merge_functor(a1, b1)?, merge_functor(a2, b2)?)),
    };
    for e in &b.embeds {
        match out.embeds.iter().find(|x| x.name == e.name) {
            Some(x) if x.kind != e.kind => return Err(Error::NameClash(e.name.clone())),
            Some(_) => {}
            None => out.embeds.push(e.clone()),
        }
    }
    Ok(out)
}

fn merge_functor(a: &StateFunctorSpec, b: &StateFunctorSpec) -> Result<StateFunctorSpec> {
    let mut out = a.clone();
    for o in &b.ops {
        match out.ops.iter().find(|x| x.name == o.name) {
            Some(x) if x.decl() != o.decl() => return Err(Error::NameClash(o.name.clone())),
            Some(_) => {}
            None => out.ops.push(o.clone()),
        }
    }
    Ok(out)
}

fn rename_doc(doc: &SignatureDoc, renames: &BTreeMap<String, String>) -> SignatureDoc {
    if renames.is_empty() {
        return doc.clone();
    }
    let pick = |n: &str| renames.get(n).cloned().unwrap_or_else(|| n.to_string());
    let renamed: BTreeMap<String, OpRef> = doc
        .ops
        .iter()
        .map(|o| {
            let mut d = o.decl().clone();
            d.name = pick(&o.name);
            (o.name.clone(), OpRef::new(d))
        })
        .collect();
    let f = |o: &OpRef| match (o.layer, renamed.get(&o.name)) {
        (Layer::Term, Some(n)) => n.clone(),
        _ => o.clone(),
    };
    let j = |j: &Judgment| Judgment { level: j.level, src: j.src.map_ops(&f), tgt: j.tgt.map_ops(&f) };
    SignatureDoc {
        ops: doc.ops.iter().map(|o| renamed[&o.name].clone()).collect(),
        equations: doc
            .equations
            .iter()
            .map(|e| EquationSpec {
                name: pick(&e.name),
                lhs: e.lhs.map_ops(&f),
                rhs: e.rhs.map_ops(&f),
                ..e.clone()
            })
            .collect(),
        rules: doc
            .rules
            .iter()
            .map(|r| ReductionRuleSpec {
                name: pick(&r.name),
                metavars: r.metavars.clone(),
                hypotheses: r.hypotheses.iter().map(j).collect(),
                conclusion: j(&r.conclusion),
            })
            .collect(),
        state: doc.state.clone(),
        embeds: doc.embeds.clone(),
    }
}

/// Name of the congruence rule for argument `j` (0-based) of `op`.
pub fn congruence_name(op: &OpDecl, j: usize) -> String {
    if op.binders.len() == 1 {
        format!("{}-cong", op.name)
    } else {
        format!("{}-cong{}", op.name, j + 1)
    }
}

/// One congruence rule per argument of every fixed-arity monad operation.
/// Documents with state functors get none (their congruences are explicit).
pub fn congruence_pack(doc: &SignatureDoc) -> Vec<ReductionRuleSpec> {
    if doc.state.is_some() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for o in &doc.ops {
        if o.variadic {
            continue;
        }
        let p = o.binders.len();
        for i in 0..p {
            let mut metavars: Vec<MetaVarDecl> = (0..p)
                .map(|j| MetaVarDecl::new(&format!("T{}", j + 1), o.binders[j]))
                .collect();
            let primed = format!("T{}'", i + 1);
            metavars.push(MetaVarDecl::new(&primed, o.binders[i]));
            let arg = |j: usize, name: &str| MetaTerm::identity_var(name, o.binders[j]);
            let src = MetaTerm::Op(o.clone(), (0..p).map(|j| arg(j, &format!("T{}", j + 1))).collect());
            let tgt = MetaTerm::Op(
                o.clone(),
                (0..p)
                    .map(|j| if j == i { arg(j, &primed) } else { arg(j, &format!("T{}", j + 1)) })
                    .collect(),
            );
            let k = o.binders[i];
            out.push(ReductionRuleSpec {
                name: congruence_name(o, i),
                metavars,
                hypotheses: vec![Judgment {
                    level: k,
                    src: MetaTerm::identity_var(&format!("T{}", i + 1), k),
                    tgt: MetaTerm::identity_var(&primed, k),
                }],
                conclusion: Judgment { level: 0, src, tgt },
            });
        }
    }
    out
}

/// Reflexivity and transitivity.
pub fn closure_pack() -> Vec<ReductionRuleSpec> {
    let v = |n: &str| MetaTerm::var(n, Vec::new());
    vec![
        ReductionRuleSpec {
            name: "refl".into(),
            metavars: vec![MetaVarDecl::new("T", 0)],
            hypotheses: Vec::new(),
            conclusion: Judgment { level: 0, src: v("T"), tgt: v("T") },
        },
        ReductionRuleSpec {
            name: "trans".into(),
            metavars: vec![MetaVarDecl::new("T", 0), MetaVarDecl::new("U", 0), MetaVarDecl::new("W", 0)],
            hypotheses: vec![
                Judgment { level: 0, src: v("T"), tgt: v("U") },
                Judgment { level: 0, src: v("U"), tgt: v("W") },
            ],
            conclusion: Judgment { level: 0, src: v("T"), tgt: v("W") },
        },
    ]
}

/// Brings the conclusion to level 0: the `n` fresh slots of the conclusion
/// become new level-0 metavariables `V1..Vn`.
pub fn normalize_rule(r: &ReductionRuleSpec) -> ReductionRuleSpec {
    let n = r.conclusion.level;
    if n == 0 {
        return r.clone();
    }
    let mut out = r.clone();
    let mut with = Vec::with_capacity(n);
    for k in 1..=n {
        let mut name = format!("V{k}");
        while out.metavars.iter().any(|d| d.name == name) {
            name.push('\'');
        }
        out.metavars.push(MetaVarDecl::new(&name, 0));
        with.push(MetaTerm::var(&name, Vec::new()));
    }
    out.conclusion = Judgment {
        level: 0,
        src: r.conclusion.src.instantiate_fresh(&with),
        tgt: r.conclusion.tgt.instantiate_fresh(&with),
    };
    out
}
