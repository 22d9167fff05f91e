//! Seeded random terms and substitutions, and exhaustive enumeration.

use std::collections::BTreeMap;

use bindsem_core::monad::SubstMap;
use bindsem_core::term::{Layer, OpRef};
use bindsem_core::{SignatureDoc, Term};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The generator for case `i` of a run seeded with `seed`: one stream per
/// case, so cases do not depend on each other.
pub fn case_rng(seed: u64, i: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    rng
}

/// Random terms over the operations of a signature.
#[derive(Clone, Debug)]
pub struct Gen {
    term_ops: Vec<OpRef>,
    state_ops: Vec<OpRef>,
    mins: [Option<usize>; 4],
    /// Upper bound on the length of variadic argument lists.
    pub max_variadic: usize,
}

impl Gen {
    pub fn new(doc: &SignatureDoc) -> Gen {
        let state_ops = match &doc.state {
            Some((t1, t2)) => {
                let mut v: Vec<OpRef> = t1.ops.clone();
                v.extend(t2.ops.iter().filter(|o| !t1.ops.contains(o)).cloned());
                v
            }
            None => Vec::new(),
        };
        let mut g = Gen { term_ops: doc.ops.clone(), state_ops, mins: [None; 4], max_variadic: 3 };
        g.compute_mins();
        g
    }

    /// Only the state operations of the first state functor.
    pub fn with_state_ops(mut self, ops: Vec<OpRef>) -> Gen {
        self.state_ops = ops;
        self.compute_mins();
        self
    }

    fn ops(&self, layer: Layer) -> &[OpRef] {
        match layer {
            Layer::Term => &self.term_ops,
            Layer::State => &self.state_ops,
        }
    }

    /// Smallest term of `layer` at scope `n`, `None` if there is none. It
    /// only depends on whether `n` is zero.
    fn min_size(&self, layer: Layer, n: usize) -> Option<usize> {
        self.mins[Self::slot(layer, n)]
    }

    fn slot(layer: Layer, n: usize) -> usize {
        2 * usize::from(layer == Layer::State) + usize::from(n > 0)
    }

    fn min_op_size(&self, o: &OpRef, n: usize) -> Option<usize> {
        Self::op_size_in(&self.mins, o, n)
    }

    fn op_size_in(mins: &[Option<usize>; 4], o: &OpRef, n: usize) -> Option<usize> {
        if o.variadic {
            return Some(1);
        }
        let mut total = 1;
        for j in 0..o.binders.len() {
            total += mins[Self::slot(o.layer_of(j), n + o.binders_of(j))]?;
        }
        Some(total)
    }

    /// Least sizes by fixpoint iteration.
    fn compute_mins(&mut self) {
        let mut mins = [None, Some(1), None, None];
        loop {
            let mut next = mins;
            for (slot, layer, n) in [(0, Layer::Term, 0), (2, Layer::State, 0), (3, Layer::State, 1)] {
                let best = self.ops(layer).iter().filter_map(|o| Self::op_size_in(&mins, o, n)).min();
                next[slot] = match (mins[slot], best) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                };
            }
            if next == mins {
                break;
            }
            mins = next;
        }
        self.mins = mins;
    }

    /// A random term of `layer` at scope `n` with at most `max` nodes.
    pub fn term<R: Rng>(&self, rng: &mut R, layer: Layer, n: usize, max: usize) -> Option<Term> {
        let vars = layer == Layer::Term && n > 0;
        let ops: Vec<&OpRef> = self
            .ops(layer)
            .iter()
            .filter(|o| self.min_op_size(o, n).is_some_and(|m| m <= max))
            .collect();
        let pick_var = vars && (ops.is_empty() || max <= 1 || rng.random_bool(0.3));
        if pick_var {
            return Some(Term::Var(rng.random_range(0..n)));
        }
        let o = (*ops.choose(rng)?).clone();
        let arity = if o.variadic {
            rng.random_range(0..=self.max_variadic.min(max.saturating_sub(1)))
        } else {
            o.binders.len()
        };
        let mins: Vec<usize> = (0..arity)
            .map(|j| self.min_size(o.layer_of(j), n + o.binders_of(j)).unwrap_or(1))
            .collect();
        let mut spare = max.saturating_sub(1 + mins.iter().sum::<usize>());
        let mut args = Vec::with_capacity(arity);
        for j in 0..arity {
            let extra = if j + 1 == arity { spare } else { rng.random_range(0..=spare) };
            spare -= extra;
            args.push(self.term(rng, o.layer_of(j), n + o.binders_of(j), mins[j] + extra)?);
        }
        Some(Term::op(o, args))
    }

    /// A random substitution from scope `n` to scope `m`.
    pub fn subst<R: Rng>(&self, rng: &mut R, n: usize, m: usize, max: usize) -> Option<SubstMap> {
        let images = (0..n)
            .map(|_| {
                let lo = self.min_size(Layer::Term, m)?;
                let size = rng.random_range(lo..=max.max(lo));
                self.term(rng, Layer::Term, m, size)
            })
            .collect::<Option<Vec<_>>>()?;
        Some(SubstMap::new(m, images))
    }

    /// Every term of `layer` at scope `n` with exactly `size` nodes
    /// (variadic operations take up to `max_variadic` arguments).
    pub fn enumerate(&self, layer: Layer, n: usize, size: usize) -> Vec<Term> {
        let mut memo = BTreeMap::new();
        self.enum_in(layer, n, size, &mut memo)
    }

    /// Every term with at most `size` nodes, by increasing size.
    pub fn enumerate_upto(&self, layer: Layer, n: usize, size: usize) -> Vec<Term> {
        let mut memo = BTreeMap::new();
        (1..=size).flat_map(|s| self.enum_in(layer, n, s, &mut memo)).collect()
    }

    fn enum_in(&self, layer: Layer, n: usize, size: usize, memo: &mut BTreeMap<(Layer, usize, usize), Vec<Term>>) -> Vec<Term> {
        if let Some(v) = memo.get(&(layer, n, size)) {
            return v.clone();
        }
        let mut out = Vec::new();
        if size == 1 && layer == Layer::Term {
            out.extend((0..n).map(Term::Var));
        }
        if size >= 1 {
            for o in self.ops(layer).to_vec() {
                let arities: Vec<usize> = if o.variadic { (0..=self.max_variadic).collect() } else { vec![o.binders.len()] };
                for arity in arities {
                    for args in self.enum_args(&o, arity, 0, n, size - 1, memo) {
                        out.push(Term::op(o.clone(), args));
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        memo.insert((layer, n, size), out.clone());
        out
    }

    fn enum_args(
        &self,
        o: &OpRef,
        arity: usize,
        j: usize,
        n: usize,
        budget: usize,
        memo: &mut BTreeMap<(Layer, usize, usize), Vec<Term>>,
    ) -> Vec<Vec<Term>> {
        if j == arity {
            return if budget == 0 { vec![Vec::new()] } else { Vec::new() };
        }
        let mut out = Vec::new();
        for s in 1..=budget {
            let heads = self.enum_in(o.layer_of(j), n + o.binders_of(j), s, memo);
            if heads.is_empty() {
                continue;
            }
            let tails = self.enum_args(o, arity, j + 1, n, budget - s, memo);
            for h in &heads {
                for t in &tails {
                    let mut v = Vec::with_capacity(arity);
                    v.push(h.clone());
                    v.extend(t.iter().cloned());
                    out.push(v);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use bindsem_core::builtin;
    use bindsem_core::term::well_scoped_at;

    #[test]
    fn random_terms_are_well_scoped_and_bounded() {
        for name in ["lc", "lc_ex", "monoid", "ll", "pi", "cbv_small"] {
            let d = builtin(name).unwrap();
            let g = Gen::new(&d);
            for i in 0..200 {
                let mut rng = case_rng(7, i);
                let n = (i % 4) as usize;
                if let Some(t) = g.term(&mut rng, Layer::Term, n, 8) {
                    assert!(t.size() <= 8, "{name}: {t:?}");
                    assert!(well_scoped_at(&t, n, &d, Layer::Term), "{name}: {t:?}");
                }
                if d.state.is_some() {
                    let s = g.term(&mut rng, Layer::State, n, 8).unwrap();
                    assert!(well_scoped_at(&s, n, &d, Layer::State), "{name}: {s:?}");
                }
            }
        }
    }

    #[test]
    fn enumeration_counts() {
        let d = builtin("lc").unwrap();
        let g = Gen::new(&d);
        // scope 1: x; app(x, x); abs(y. x), abs(y. y)
        assert_eq!(g.enumerate(Layer::Term, 1, 1).len(), 1);
        assert_eq!(g.enumerate(Layer::Term, 1, 2).len(), 2);
        assert_eq!(g.enumerate(Layer::Term, 1, 3).len(), 1 + 3);
        let m = Gen::new(&builtin("monoid").unwrap());
        assert_eq!(m.enumerate(Layer::Term, 0, 1).len(), 1);
        assert_eq!(m.enumerate(Layer::Term, 0, 3).len(), 1);
    }

    #[test]
    fn streams_are_reproducible() {
        let g = Gen::new(&builtin("lc").unwrap());
        let a = g.term(&mut case_rng(3, 9), Layer::Term, 2, 8);
        let b = g.term(&mut case_rng(3, 9), Layer::Term, 2, 8);
        assert_eq!(a, b);
    }
}
