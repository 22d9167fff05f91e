//! Derivation trees for reduction rules: validity, substitution, one-step
//! enumeration, bounded search, traces and reduction graphs.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::rc::Rc;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::equation::normal_form_with;
use crate::error::{Error, Result};
use crate::metaterm::{check_assignment, eval, match_pattern, Assignment, MetaTerm, MetaVarDecl};
use crate::monad::{subst, SubstMap};
use crate::signature::{accept, normalize_rule, Hook, ReductionRuleSpec, SignatureDoc};
use crate::term::Term;

/// A derivation of `source ~> target` at scope `scope` (the base scope of
/// its assignment). `subs[i]` derives hypothesis `i` at scope
/// `scope + level_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub rule: String,
    pub scope: usize,
    pub assignment: Assignment,
    pub subs: Vec<Derivation>,
    pub source: Term,
    pub target: Term,
}

impl Derivation {
    pub fn endpoints(&self) -> (&Term, &Term) {
        (&self.source, &self.target)
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.subs.iter().map(Derivation::size).sum::<usize>()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budgets {
    pub normalize: usize,
    /// Search depth: nodes with a non-structural hypothesis cost one unit.
    pub depth: usize,
    /// Search steps (rule attempts plus produced derivations).
    pub steps: usize,
    /// Replication unfoldings per process in the pi layer.
    pub unfold: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { normalize: crate::equation::DEFAULT_BUDGET, depth: 32, steps: 10_000, unfold: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Goal {
    Any,
    Term(Term),
    /// A level-0 metaterm whose metavariables are bound by matching.
    Pattern(MetaTerm, Vec<MetaVarDecl>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    All,
    /// Keep one (cheapest) derivation per target at every search node.
    OnePerTarget,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeriveOutcome {
    pub derivations: Vec<Derivation>,
    /// Bindings of the goal pattern, one per derivation.
    pub bindings: Vec<Assignment>,
    pub truncated: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    LeftmostOutermost,
    LeftmostInnermost,
    EnumerateAll,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub start: Term,
    pub steps: Vec<Derivation>,
    /// Stopped at the step bound with redexes left.
    pub truncated: bool,
}

impl Trace {
    pub fn last(&self) -> &Term {
        self.steps.last().map(|d| &d.target).unwrap_or(&self.start)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GraphBounds {
    pub nodes: usize,
    pub edges: usize,
}

impl Default for GraphBounds {
    fn default() -> Self {
        GraphBounds { nodes: 200, edges: 1000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    pub scope: usize,
    pub nodes: Vec<Term>,
    pub edges: Vec<(usize, usize, String)>,
    pub truncated: bool,
}

/// Reduction engine over an accepted signature. Rules are stored normalized.
#[derive(Clone, Debug)]
pub struct Engine {
    doc: SignatureDoc,
    rules: Vec<ReductionRuleSpec>,
    costs: Vec<usize>,
    pi: bool,
    pub budgets: Budgets,
}

impl Engine {
    pub fn new(doc: SignatureDoc) -> Result<Engine> {
        accept(&doc)?;
        let rules: Vec<ReductionRuleSpec> = doc.rules.iter().map(normalize_rule).collect();
        let costs = rules.iter().map(|r| usize::from(!r.all_structural())).collect();
        let pi = doc.hooks().contains(&Hook::PiStruct);
        Ok(Engine { doc, rules, costs, pi, budgets: Budgets::default() })
    }

    pub fn with_budgets(mut self, b: Budgets) -> Engine {
        self.budgets = b;
        self
    }

    pub fn doc(&self) -> &SignatureDoc {
        &self.doc
    }

    pub fn rules(&self) -> &[ReductionRuleSpec] {
        &self.rules
    }

    pub fn rule(&self, name: &str) -> Result<(usize, &ReductionRuleSpec)> {
        self.rules
            .iter()
            .enumerate()
            .find(|(_, r)| r.name == name)
            .ok_or_else(|| Error::UnknownRule(name.to_string()))
    }

    pub fn nf(&self, t: &Term, n: usize) -> Result<Term> {
        normal_form_with(t, n, &self.doc, self.budgets.normalize)
    }

    fn eval_nf(&self, mt: &MetaTerm, level: usize, a: &Assignment) -> Result<Term> {
        self.nf(&eval(mt, level, a)?, a.base + level)
    }

    /// Builds the derivation of `rule` at `a` from hypothesis derivations,
    /// checking that they prove the instantiated hypotheses.
    pub fn instantiate(&self, rule: &str, a: Assignment, subs: Vec<Derivation>) -> Result<Derivation> {
        let (_, r) = self.rule(rule)?;
        if !check_assignment(&a, &r.metavars) {
            return Err(Error::Malformed(format!("assignment does not fit rule `{rule}`")));
        }
        if subs.len() != r.hypotheses.len() {
            return Err(Error::Malformed(format!("rule `{rule}` takes {} hypotheses", r.hypotheses.len())));
        }
        for (i, (h, d)) in r.hypotheses.iter().zip(&subs).enumerate() {
            let (s, t) = (self.eval_nf(&h.src, h.level, &a)?, self.eval_nf(&h.tgt, h.level, &a)?);
            if d.scope != a.base + h.level || d.source != s || d.target != t {
                return Err(Error::Malformed(format!("hypothesis {} of `{rule}` is not derived by `{}`", i + 1, d.rule)));
            }
        }
        self.finish(r, a, subs)
    }

    fn finish(&self, r: &ReductionRuleSpec, a: Assignment, subs: Vec<Derivation>) -> Result<Derivation> {
        Ok(Derivation {
            rule: r.name.clone(),
            scope: a.base,
            source: self.eval_nf(&r.conclusion.src, 0, &a)?,
            target: self.eval_nf(&r.conclusion.tgt, 0, &a)?,
            assignment: a,
            subs,
        })
    }

    /// Recomputes every endpoint from the rules.
    pub fn check(&self, d: &Derivation) -> bool {
        let Ok((_, r)) = self.rule(&d.rule) else { return false };
        if d.assignment.base != d.scope || !check_assignment(&d.assignment, &r.metavars) || d.subs.len() != r.hypotheses.len() {
            return false;
        }
        let ends = |mt: &MetaTerm, level: usize| self.eval_nf(mt, level, &d.assignment).ok();
        if ends(&r.conclusion.src, 0).as_ref() != Some(&d.source) || ends(&r.conclusion.tgt, 0).as_ref() != Some(&d.target) {
            return false;
        }
        r.hypotheses.iter().zip(&d.subs).all(|(h, s)| {
            s.scope == d.scope + h.level
                && ends(&h.src, h.level).as_ref() == Some(&s.source)
                && ends(&h.tgt, h.level).as_ref() == Some(&s.target)
                && self.check(s)
        })
    }

    /// The derivation transported along `f`.
    pub fn subst_derivation(&self, d: &Derivation, f: &SubstMap) -> Result<Derivation> {
        if f.domain() != d.scope {
            return Err(Error::ScopeMismatch { index: f.domain(), scope: d.scope });
        }
        let (_, r) = self.rule(&d.rule)?;
        let mut a = Assignment::new(f.codomain());
        for (name, v) in &d.assignment.map {
            let level = r.decl(name).map(|x| x.level).ok_or_else(|| Error::UnboundName(name.clone()))?;
            a.map.insert(name.clone(), subst(v, &f.lift(level))?);
        }
        let subs = r
            .hypotheses
            .iter()
            .zip(&d.subs)
            .map(|(h, s)| self.subst_derivation(s, &f.lift(h.level)))
            .collect::<Result<Vec<_>>>()?;
        self.finish(r, a, subs)
    }

    /// Rule index and position of the innermost rule application, following
    /// structural hypotheses from the root.
    pub fn redex(&self, d: &Derivation) -> (usize, Vec<usize>) {
        let Ok((idx, r)) = self.rule(&d.rule) else { return (usize::MAX, Vec::new()) };
        if d.subs.is_empty() || !r.is_structural(0) {
            return (idx, Vec::new());
        }
        let mut src = &r.hypotheses[0].src;
        while let MetaTerm::Embed(_, x) = src {
            src = x;
        }
        let MetaTerm::Var(m, _) = src else { return (idx, Vec::new()) };
        let mut path = r.conclusion.src.path_to(m).unwrap_or_default();
        let (k, rest) = self.redex(&d.subs[0]);
        path.extend(rest);
        (k, path)
    }

    pub fn redex_rule<'a>(&'a self, d: &'a Derivation) -> &'a str {
        let (k, _) = self.redex(d);
        self.rules.get(k).map(|r| r.name.as_str()).unwrap_or(&d.rule)
    }

    /// All one-step derivations from the normal form of `t` at scope `n`,
    /// ordered by redex rule, then redex position (preorder).
    pub fn step(&self, t: &Term, n: usize) -> Result<Vec<Derivation>> {
        let t = self.nf(t, n)?;
        if self.pi {
            return crate::operational::pi_step(self, &t, n, self.budgets.unfold);
        }
        let mut s = Search::new(self, SearchMode::All, usize::MAX);
        let found = s.all(&t, n, 0)?;
        let mut out: Vec<(usize, Vec<usize>, usize, Derivation)> = found
            .iter()
            .enumerate()
            .map(|(i, (d, _))| {
                let (k, p) = self.redex(d);
                (k, p, i, d.clone())
            })
            .collect();
        out.sort_by(|x, y| (x.0, &x.1, x.2).cmp(&(y.0, &y.1, y.2)));
        Ok(out.into_iter().map(|x| x.3).collect())
    }

    /// Derivations from `t` whose target meets `goal`, within the depth and
    /// step budgets.
    pub fn derive(&self, t: &Term, n: usize, goal: &Goal, mode: SearchMode) -> Result<DeriveOutcome> {
        let t = self.nf(t, n)?;
        let mut s = Search::new(self, mode, self.budgets.steps);
        let found = s.all(&t, n, self.budgets.depth)?;
        let mut out = DeriveOutcome { derivations: Vec::new(), bindings: Vec::new(), truncated: s.truncated };
        for (d, _) in found.iter() {
            let binding = match goal {
                Goal::Any => Some(Assignment::new(n)),
                Goal::Term(u) => (d.target == self.nf(u, n)?).then(|| Assignment::new(n)),
                Goal::Pattern(p, decls) => match_pattern(p, 0, &d.target, &Assignment::new(n), decls),
            };
            if let Some(b) = binding {
                out.derivations.push(d.clone());
                out.bindings.push(b);
            }
        }
        Ok(out)
    }

    /// Iterated single steps. Rules whose source is a bare metavariable
    /// apply everywhere and are left out.
    pub fn trace(&self, t: &Term, n: usize, max_steps: usize, strategy: Strategy) -> Result<Trace> {
        let start = self.nf(t, n)?;
        let mut cur = start.clone();
        let mut steps = Vec::new();
        loop {
            let cands: Vec<(usize, Vec<usize>, Derivation)> = self
                .step(&cur, n)?
                .into_iter()
                .filter_map(|d| {
                    let (k, p) = self.redex(&d);
                    let bare = self.rules.get(k).is_some_and(|r| r.conclusion.src.is_bare_var());
                    (!bare).then_some((k, p, d))
                })
                .collect();
            if cands.is_empty() {
                return Ok(Trace { start, steps, truncated: false });
            }
            if steps.len() >= max_steps {
                return Ok(Trace { start, steps, truncated: true });
            }
            let pick = match strategy {
                Strategy::EnumerateAll => 0,
                Strategy::LeftmostOutermost => (0..cands.len()).min_by(|&i, &j| (&cands[i].1, cands[i].0).cmp(&(&cands[j].1, cands[j].0))).unwrap_or(0),
                Strategy::LeftmostInnermost => (0..cands.len())
                    .filter(|&i| !cands.iter().any(|c| c.1.len() > cands[i].1.len() && c.1.starts_with(&cands[i].1)))
                    .min_by(|&i, &j| (&cands[i].1, cands[i].0).cmp(&(&cands[j].1, cands[j].0)))
                    .unwrap_or(0),
            };
            let d = cands.into_iter().nth(pick).expect("candidate").2;
            cur = d.target.clone();
            steps.push(d);
        }
    }

    /// Breadth-first reduction graph from `seeds`.
    pub fn graph(&self, seeds: &[Term], n: usize, bounds: GraphBounds) -> Result<Graph> {
        let mut g = Graph { scope: n, nodes: Vec::new(), edges: Vec::new(), truncated: false };
        let mut index: BTreeMap<Term, usize> = BTreeMap::new();
        let mut queue = VecDeque::new();
        for s in seeds {
            let s = self.nf(s, n)?;
            if index.contains_key(&s) {
                continue;
            }
            if g.nodes.len() >= bounds.nodes {
                g.truncated = true;
                break;
            }
            index.insert(s.clone(), g.nodes.len());
            queue.push_back(g.nodes.len());
            g.nodes.push(s);
        }
        let mut seen_edges = BTreeSet::new();
        while let Some(i) = queue.pop_front() {
            for d in self.step(&g.nodes[i].clone(), n)? {
                let j = match index.get(&d.target) {
                    Some(&j) => j,
                    None if g.nodes.len() < bounds.nodes => {
                        let j = g.nodes.len();
                        index.insert(d.target.clone(), j);
                        g.nodes.push(d.target.clone());
                        queue.push_back(j);
                        j
                    }
                    None => {
                        g.truncated = true;
                        continue;
                    }
                };
                let label = self.redex_rule(&d).to_string();
                if seen_edges.insert((i, j, label.clone())) {
                    if g.edges.len() >= bounds.edges {
                        g.truncated = true;
                        continue;
                    }
                    g.edges.push((i, j, label));
                }
            }
        }
        Ok(g)
    }
}

type Found = Rc<Vec<(Derivation, usize)>>;

struct Search<'e> {
    e: &'e Engine,
    mode: SearchMode,
    memo: BTreeMap<(Term, usize, usize), Found>,
    ticks: usize,
    limit: usize,
    truncated: bool,
}

impl<'e> Search<'e> {
    fn new(e: &'e Engine, mode: SearchMode, limit: usize) -> Self {
        Search { e, mode, memo: BTreeMap::new(), ticks: 0, limit, truncated: false }
    }

    fn tick(&mut self) -> bool {
        self.ticks += 1;
        if self.ticks > self.limit {
            self.truncated = true;
        }
        !self.truncated
    }

    /// Derivations from `t` (normal, at scope `n`) of cost at most `fuel`,
    /// paired with their cost.
    fn all(&mut self, t: &Term, n: usize, fuel: usize) -> Result<Found> {
        let key = (t.clone(), n, fuel);
        if let Some(f) = self.memo.get(&key) {
            return Ok(f.clone());
        }
        let mut out: Vec<(Derivation, usize)> = Vec::new();
        if self.e.pi {
            for d in crate::operational::pi_step(self.e, t, n, self.e.budgets.unfold)? {
                if !self.tick() {
                    break;
                }
                out.push((d, 0));
            }
        } else {
            for ri in 0..self.e.rules.len() {
                let r = &self.e.rules[ri];
                if !r.is_searchable() || self.e.costs[ri] > fuel || !self.tick() {
                    continue;
                }
                let Some(a) = match_pattern(&r.conclusion.src, 0, t, &Assignment::new(n), &r.metavars) else {
                    continue;
                };
                self.hyps(ri, 0, a, Vec::new(), fuel - self.e.costs[ri], self.e.costs[ri], &mut out)?;
            }
        }
        if self.mode == SearchMode::OnePerTarget {
            let mut best: BTreeMap<Term, usize> = BTreeMap::new();
            let mut kept: Vec<(Derivation, usize)> = Vec::new();
            for (d, c) in out {
                match best.get(&d.target) {
                    Some(&i) if kept[i].1 <= c => {}
                    Some(&i) => kept[i] = (d, c),
                    None => {
                        best.insert(d.target.clone(), kept.len());
                        kept.push((d, c));
                    }
                }
            }
            out = kept;
        }
        let out = Rc::new(out);
        if !self.truncated {
            self.memo.insert(key, out.clone());
        }
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn hyps(
        &mut self,
        ri: usize,
        i: usize,
        a: Assignment,
        subs: Vec<Derivation>,
        fuel: usize,
        cost: usize,
        out: &mut Vec<(Derivation, usize)>,
    ) -> Result<()> {
        let r = &self.e.rules[ri];
        if i == r.hypotheses.len() {
            if self.tick() {
                out.push((self.e.finish(r, a, subs)?, cost));
            }
            return Ok(());
        }
        let h = &r.hypotheses[i];
        let n = a.base;
        let src = self.e.eval_nf(&h.src, h.level, &a)?;
        let cands = self.all(&src, n + h.level, fuel)?;
        for (d, c) in cands.iter() {
            if self.truncated {
                break;
            }
            if *c > fuel {
                continue;
            }
            let Some(a2) = match_pattern(&h.tgt, h.level, &d.target, &a, &r.metavars) else { continue };
            let mut subs2 = subs.clone();
            subs2.push(d.clone());
            self.hyps(ri, i + 1, a2, subs2, fuel - c, cost + c, out)?;
        }
        Ok(())
    }
}

/// Free-standing entry points mirroring the engine methods.
pub fn check(d: &Derivation, doc: &SignatureDoc) -> bool {
    Engine::new(doc.clone()).is_ok_and(|e| e.check(d))
}
