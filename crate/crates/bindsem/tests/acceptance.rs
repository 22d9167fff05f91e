//! Acceptance criteria 1-9, one PASS/FAIL line each. Run with
//! `cargo test -p bindsem --test acceptance`.

mod common;

use std::collections::{BTreeSet, VecDeque};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use bindsem::gen::{case_rng, Gen};
use bindsem::laws::{self, Bounds};
use bindsem::oracle::subst_via_names;
use bindsem_core::equation::normal_form;
use bindsem_core::model::{plug, translate_unary_cong};
use bindsem_core::monad::weaken;
use bindsem_core::operational::{cbv_compose, cbv_decompose, pi_canonical, pi_step, PiShape};
use bindsem_core::reduction::{Budgets, Goal, SearchMode, Strategy};
use bindsem_core::signature::{builtin, builtin_names, closure_pack};
use bindsem_core::term::{parse_term_at, print_term};
use bindsem_core::translations::{theta, translation};
use bindsem_core::{Derivation, Engine, Layer, OpRef, SubstMap, Term};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

/// Wall-clock limit per criterion.
const LIMIT: Duration = Duration::from_secs(60);
/// Seed for every randomized criterion.
const SEED: u64 = 2024;

type Outcome = Result<String, String>;

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("monad laws and named-variable oracle", monad_laws),
        ("linearity of operations", linearity),
        ("quotient laws and monoid normal forms", quotient),
        ("step and derive against brute-force oracles", reduction_oracle),
        ("substitution stability of derivations", derivation_stability),
        ("translations", translations),
        ("call-by-value decomposition and big-step agreement", cbv),
        ("pi structural congruence and communication", pi),
        ("CLI determinism over the corpus", determinism),
    ];
    let mut all = true;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = f();
        let took = start.elapsed();
        let (pass, detail) = match out {
            Ok(d) if took <= LIMIT => (true, d),
            Ok(d) => (false, format!("{d}; over the {} s limit", LIMIT.as_secs())),
            Err(e) => (false, e),
        };
        all &= pass;
        println!(
            "criterion {}: {} {name} ({detail}; {:.1} s)",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn show(t: &Term) -> String {
    print_term(t, &[])
}

fn doc(name: &str) -> bindsem_core::SignatureDoc {
    builtin(name).expect("builtin")
}

fn suite_over(names: &[&str], count: usize, run: fn(&bindsem_core::SignatureDoc, usize, u64, Bounds) -> laws::Report) -> Outcome {
    let mut total = 0;
    for name in names {
        let r = run(&doc(name), count, SEED, Bounds { scope: 4, size: 8 });
        ensure(r.ok(), || format!("{name}: {:?}", r.failures))?;
        ensure(r.skipped == 0, || format!("{name}: {} cases could not be generated", r.skipped))?;
        total += r.cases;
    }
    Ok(format!("{total} checks over {} signatures", names.len()))
}

// 1 -----------------------------------------------------------------------

fn monad_laws() -> Outcome {
    suite_over(builtin_names(), 1000, laws::monad)
}

// 2 -----------------------------------------------------------------------

fn linearity() -> Outcome {
    suite_over(builtin_names(), 1000, laws::module)
}

// 3 -----------------------------------------------------------------------

/// Right-nested product of the variables of a monoid term, units dropped.
fn monoid_nf(t: &Term, m: &OpRef, e: &OpRef) -> Term {
    fn leaves(t: &Term, out: &mut Vec<Term>) {
        match t {
            Term::Var(_) => out.push(t.clone()),
            Term::Op(_, args) => args.iter().for_each(|a| leaves(a, out)),
        }
    }
    let mut vs = Vec::new();
    leaves(t, &mut vs);
    let mut it = vs.into_iter().rev();
    match it.next() {
        None => Term::Op(e.clone(), Vec::new()),
        Some(last) => it.fold(last, |acc, v| Term::Op(m.clone(), vec![v, acc])),
    }
}

fn quotient() -> Outcome {
    let detail = suite_over(&["monoid", "lc_ex"], 500, laws::equation)?;
    let d = doc("monoid");
    let (m, e) = (d.op("m", Layer::Term).unwrap().clone(), d.op("e", Layer::Term).unwrap().clone());
    let g = Gen::new(&d);
    let mut count = 0;
    for n in 0..=3 {
        for t in g.enumerate_upto(Layer::Term, n, 6) {
            let got = normal_form(&t, n, &d).map_err(|err| format!("{}: {err}", show(&t)))?;
            let want = monoid_nf(&t, &m, &e);
            ensure(got == want, || format!("{} normalizes to {}, expected {}", show(&t), show(&got), show(&want)))?;
            count += 1;
        }
    }
    Ok(format!("{detail}; {count} monoid terms of size <= 6 normalize right-associated and unit-free"))
}

// 4 -----------------------------------------------------------------------

/// Independent weakening: variables from `k` on move up by one.
fn shift(t: &Term, k: usize) -> Term {
    match t {
        Term::Var(i) if *i >= k => Term::Var(i + 1),
        Term::Var(_) => t.clone(),
        Term::Op(o, args) => Term::Op(o.clone(), args.iter().map(|a| shift(a, k)).collect()),
    }
}

fn replace(t: &Term, path: &[usize], new: Term) -> Term {
    match (path.split_first(), t) {
        (None, _) => new,
        (Some((&j, rest)), Term::Op(o, args)) => {
            let mut args = args.clone();
            args[j] = replace(&args[j], rest, new);
            Term::Op(o.clone(), args)
        }
        _ => unreachable!("path into a variable"),
    }
}

fn positions(t: &Term, n: usize, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, usize, Term)>) {
    out.push((path.clone(), n, t.clone()));
    if let Term::Op(o, args) = t {
        for (j, a) in args.iter().enumerate() {
            path.push(j);
            positions(a, n + o.binders_of(j), path, out);
            path.pop();
        }
    }
}

/// Every beta and eta-expansion step, by position.
fn brute_force_steps(t: &Term, n: usize, abs: &OpRef, app: &OpRef) -> BTreeSet<(Term, String, Vec<usize>)> {
    let mut ps = Vec::new();
    positions(t, n, &mut Vec::new(), &mut ps);
    let mut out = BTreeSet::new();
    for (path, k, s) in ps {
        if let Term::Op(o, args) = &s {
            if o == app {
                if let Term::Op(a, body) = &args[0] {
                    if a == abs {
                        let mut images: Vec<Term> = (0..k).map(Term::Var).collect();
                        images.push(args[1].clone());
                        let r = subst_via_names(&body[0], k + 1, &SubstMap::new(k, images)).expect("named substitution");
                        out.insert((replace(t, &path, r), "beta-red".to_string(), path.clone()));
                    }
                }
            }
        }
        let eta = Term::Op(abs.clone(), vec![Term::Op(app.clone(), vec![shift(&s, k), Term::Var(k)])]);
        out.insert((replace(t, &path, eta), "eta-exp".to_string(), path));
    }
    out
}

/// Terms reachable in at most `k` steps, the start included.
fn reachable(e: &Engine, t: &Term, n: usize, k: usize) -> Result<BTreeSet<Term>, String> {
    let mut seen = BTreeSet::from([t.clone()]);
    let mut queue = VecDeque::from([(t.clone(), 0)]);
    while let Some((u, d)) = queue.pop_front() {
        if d == k {
            continue;
        }
        for s in e.step(&u, n).map_err(|x| x.to_string())? {
            if seen.insert(s.target.clone()) {
                queue.push_back((s.target, d + 1));
            }
        }
    }
    Ok(seen)
}

fn reduction_oracle() -> Outcome {
    let d = doc("lc_beta_eta");
    let (abs, app) = (d.op("abs", Layer::Term).unwrap().clone(), d.op("app", Layer::Term).unwrap().clone());
    let e = Engine::new(d.clone()).unwrap();
    let g = Gen::new(&d);
    let mut terms = 0;
    let mut steps = 0;
    for n in 0..=2 {
        for t in g.enumerate_upto(Layer::Term, n, 7) {
            let ds = e.step(&t, n).map_err(|x| x.to_string())?;
            let got: BTreeSet<(Term, String, Vec<usize>)> = ds
                .iter()
                .map(|s| (s.target.clone(), e.redex_rule(s).to_string(), e.redex(s).1))
                .collect();
            ensure(got.len() == ds.len(), || format!("duplicate steps from {}", show(&t)))?;
            let want = brute_force_steps(&t, n, &abs, &app);
            ensure(got == want, || format!("steps from {} differ: engine {} vs oracle {}", show(&t), got.len(), want.len()))?;
            terms += 1;
            steps += ds.len();
        }
    }
    // derive with reflexivity and transitivity at depth 2 reaches exactly
    // the terms at most 3 steps away
    let beta = doc("lc_beta");
    let one = Engine::new(beta.clone()).unwrap();
    let closed = Engine::new(beta.with_rules(closure_pack()))
        .unwrap()
        .with_budgets(Budgets { depth: 2, steps: 5_000_000, ..Budgets::default() });
    let g = Gen::new(&beta);
    for i in 0..200 {
        let mut rng = case_rng(SEED, i);
        let n = rng.random_range(0..=2);
        let t = g.term(&mut rng, Layer::Term, n, 7).ok_or("no seed term")?;
        let out = closed.derive(&t, n, &Goal::Any, SearchMode::OnePerTarget).map_err(|x| x.to_string())?;
        ensure(!out.truncated, || format!("derive from {} was truncated", show(&t)))?;
        ensure(out.derivations.iter().all(|x| closed.check(x)), || format!("invalid derivation from {}", show(&t)))?;
        let got: BTreeSet<Term> = out.derivations.iter().map(|x| x.target.clone()).collect();
        let want = reachable(&one, &t, n, 3)?;
        ensure(got == want, || format!("from {}: derive reaches {} terms, the graph {}", show(&t), got.len(), want.len()))?;
    }
    Ok(format!("{terms} terms and {steps} steps match the enumerator; 200 closure seeds match 3-step reachability"))
}

// 5 -----------------------------------------------------------------------

fn derivation_stability() -> Outcome {
    let names = ["lc_beta_eta", "lc_fix", "lc_ex", "lc_1cong", "cbv_small", "pi"];
    let detail = suite_over(&names, 500, laws::reduction)?;
    // derivations with transitivity, from the search
    let d = doc("lc_closure");
    let e = Engine::new(d.clone()).unwrap().with_budgets(Budgets { depth: 1, steps: 1_000_000, ..Budgets::default() });
    let g = Gen::new(&d);
    let mut done = 0;
    for i in 0..500 {
        let mut rng = case_rng(SEED ^ 5, i);
        let n = rng.random_range(1..=3);
        let m = rng.random_range(1..=3);
        let t = g.term(&mut rng, Layer::Term, n, 5).ok_or("no term")?;
        let out = e.derive(&t, n, &Goal::Any, SearchMode::OnePerTarget).map_err(|x| x.to_string())?;
        let Some(dv) = out.derivations.iter().filter(|x| x.rule == "trans").collect::<Vec<_>>().choose(&mut rng).copied() else {
            continue;
        };
        let f = g.subst(&mut rng, n, m, 4).ok_or("no substitution")?;
        let moved = e.subst_derivation(dv, &f).map_err(|x| x.to_string())?;
        let src = bindsem_core::monad::subst(&dv.source, &f).unwrap();
        let tgt = bindsem_core::monad::subst(&dv.target, &f).unwrap();
        ensure(e.check(&moved) && moved.source == src && moved.target == tgt, || format!("trans derivation from {}", show(&t)))?;
        done += 1;
    }
    ensure(done >= 250, || format!("only {done} transitive derivations generated"))?;
    Ok(format!("{detail}; {done} transitive derivations"))
}

// 6 -----------------------------------------------------------------------

fn translations() -> Outcome {
    // fix -> lc
    let tr = translation("fix-lc").map_err(|x| x.to_string())?;
    let src_doc = tr.source.doc().clone();
    let fix = src_doc.op("fix", Layer::Term).unwrap().clone();
    let y = theta(tr.target.doc()).unwrap();
    let (app, abs) = (
        tr.target.doc().op("app", Layer::Term).unwrap().clone(),
        tr.target.doc().op("abs", Layer::Term).unwrap().clone(),
    );
    let g = Gen::new(&src_doc);
    for i in 0..200 {
        let mut rng = case_rng(SEED ^ 6, i);
        let n = rng.random_range(0..=2);
        let body = g.term(&mut rng, Layer::Term, n + 1, 6).ok_or("no body")?;
        let t = Term::Op(fix.clone(), vec![body.clone()]);
        let image = tr.translate(&t, n).map_err(|x| x.to_string())?;
        let want = Term::Op(app.clone(), vec![weaken(&y, 0, n), Term::Op(abs.clone(), vec![tr.translate(&body, n + 1).unwrap()])]);
        ensure(image == want, || format!("fix image of {} at scope {n}: {} vs {}", show(&t), show(&image), show(&want)))?;
        // fix-exp steps anywhere in a term, translated
        let ctx = g.term(&mut rng, Layer::Term, n + 1, 5).filter(|c| c.mentions(n)).unwrap_or(Term::Var(n));
        let whole = plug(&ctx, &t, n).unwrap();
        let steps = tr.source.step(&whole, n).map_err(|x| x.to_string())?;
        let fx: Vec<&Derivation> = steps.iter().filter(|d| tr.source.redex_rule(d) == "fix-exp").collect();
        let d = fx.choose(&mut rng).ok_or_else(|| format!("no fix-exp step in {}", show(&whole)))?;
        let img = tr.translate_derivation(d).map_err(|x| format!("{}: {x}", show(&whole)))?;
        ensure(tr.target.check(&img), || format!("invalid image of the fix-exp step from {}", show(&whole)))?;
        ensure(
            img.source == tr.translate(&d.source, n).unwrap() && img.target == tr.translate(&d.target, n).unwrap(),
            || format!("endpoints of the fix-exp image from {}", show(&whole)),
        )?;
    }
    // lc_ex -> lc_1cong
    let tr = translation("lc_ex-lc_1cong").map_err(|x| x.to_string())?;
    let g = Gen::new(tr.source.doc());
    let same = ["beta-red", "app-cong1", "app-cong2", "abs-cong"];
    let to_refl = ["gc", "var-sub", "app-sub", "abs-sub", "comp-sub"];
    let mut cases = 0;
    let mut attempt = 0;
    while cases < 200 {
        attempt += 1;
        ensure(attempt < 5000, || "too few lc_ex steps generated".to_string())?;
        let mut rng = case_rng(SEED ^ 7, attempt);
        let n = rng.random_range(1..=2);
        let t = g.term(&mut rng, Layer::Term, n, 8).ok_or("no term")?;
        let steps = tr.source.step(&t, n).map_err(|x| x.to_string())?;
        let Some(d) = steps.choose(&mut rng) else { continue };
        let img = tr.translate_derivation(d).map_err(|x| format!("{}: {x}", show(&t)))?;
        ensure(tr.target.check(&img), || format!("invalid image of {} from {}", d.rule, show(&t)))?;
        ensure(
            img.source == tr.translate(&d.source, n).unwrap() && img.target == tr.translate(&d.target, n).unwrap(),
            || format!("endpoints of the image of {} from {}", d.rule, show(&t)),
        )?;
        if same.contains(&d.rule.as_str()) {
            ensure(img.rule == d.rule, || format!("{} became {}", d.rule, img.rule))?;
        } else if to_refl.contains(&d.rule.as_str()) {
            let u = img.assignment.get("U").cloned();
            ensure(
                img.rule == "unary-cong" && img.source == img.target && u.is_some_and(|u| !u.mentions(n)),
                || format!("{} did not become reflexivity", d.rule),
            )?;
        }
        cases += 1;
    }
    // one-hole congruence into the closure signature
    let target = Engine::new(doc("lc_closure")).unwrap();
    let ns = ["a".to_string()];
    let ds: Vec<Derivation> = ["app(abs(x. x), a)", "a", "app(abs(x. app(x, x)), abs(y. y))"]
        .iter()
        .map(|s| {
            let t = parse_term_at(s, &ns, target.doc(), Layer::Term).unwrap();
            target.step(&t, 1).unwrap().into_iter().next().unwrap()
        })
        .collect();
    let g = Gen::new(target.doc());
    let mut contexts = 0;
    for u in g.enumerate_upto(Layer::Term, 2, 7) {
        for d in &ds {
            let r = translate_unary_cong(&u, d, &target).map_err(|x| format!("{}: {x}", show(&u)))?;
            let fill = |t: &Term| subst_via_names(&u, 2, &SubstMap::new(1, vec![Term::Var(0), t.clone()])).unwrap();
            ensure(
                target.check(&r) && r.source == fill(&d.source) && r.target == fill(&d.target),
                || format!("context {} with {} step", show(&u), d.rule),
            )?;
        }
        contexts += 1;
    }
    Ok(format!("200 fix cases, {cases} lc_ex steps, {contexts} contexts x {} steps", ds.len()))
}

// 7 -----------------------------------------------------------------------

fn cbv() -> Outcome {
    let small_doc = doc("cbv_small");
    let g = Gen::new(&small_doc);
    let mut back = 0;
    for i in 0..500 {
        let mut rng = case_rng(SEED ^ 8, i);
        let n = rng.random_range(0..=3);
        let t = g.term(&mut rng, Layer::Term, n, 10).ok_or("no term")?;
        let s = cbv_decompose(&t, &small_doc).unwrap();
        ensure(cbv_compose(&s, &small_doc).ok() == Some(t.clone()), || format!("round trip of {}", show(&t)))?;
        let s = g.term(&mut rng, Layer::State, n, 10).ok_or("no state")?;
        if let Ok(t) = cbv_compose(&s, &small_doc) {
            ensure(cbv_decompose(&t, &small_doc).unwrap() == s, || format!("round trip of state {}", show(&s)))?;
            back += 1;
        }
    }
    ensure(back >= 100, || format!("only {back} value trees generated"))?;
    // big-step against small-step
    let small = Engine::new(small_doc.clone()).unwrap();
    let big_doc = doc("cbv_big");
    let big = Engine::new(big_doc.clone()).unwrap().with_budgets(Budgets { depth: 500, steps: 1_000_000, ..Budgets::default() });
    let mut agreed = 0;
    let mut nontrivial = 0;
    let mut attempt = 0;
    while agreed < 200 {
        attempt += 1;
        ensure(attempt < 20_000, || format!("only {agreed} normalizing terms found"))?;
        let mut rng = case_rng(SEED ^ 9, attempt);
        let t = g.term(&mut rng, Layer::Term, 0, 12).ok_or("no closed term")?;
        let tr = small.trace(&cbv_decompose(&t, &small_doc).unwrap(), 0, 50, Strategy::LeftmostOutermost).map_err(|x| x.to_string())?;
        if tr.truncated {
            continue;
        }
        let nf = tr.last().clone();
        let out = big
            .derive(&cbv_decompose(&t, &big_doc).unwrap(), 0, &Goal::Any, SearchMode::All)
            .map_err(|x| format!("{}: {x}", show(&t)))?;
        ensure(!out.truncated && out.derivations.len() == 1, || {
            format!("{}: {} big-step results (truncated: {})", show(&t), out.derivations.len(), out.truncated)
        })?;
        let Term::Op(w, args) = &out.derivations[0].target else { return Err("big-step result is a variable".into()) };
        ensure(w.name == "w", || "big-step result is not a value".to_string())?;
        let v = cbv_decompose(&args[0], &small_doc).unwrap();
        let v_nf = small.trace(&v, 0, 200, Strategy::LeftmostOutermost).map_err(|x| x.to_string())?;
        ensure(!v_nf.truncated && *v_nf.last() == nf, || {
            format!("{}: big-step value {} does not normalize to {}", show(&t), show(&args[0]), show(&nf))
        })?;
        agreed += 1;
        nontrivial += usize::from(!tr.steps.is_empty());
    }
    Ok(format!("500 term and {back} state round trips; 200 closed terms agree ({nontrivial} take steps)"))
}

// 8 -----------------------------------------------------------------------

/// A random binary bracketing of `comps` (in order) with `par`.
fn bracket<R: Rng>(rng: &mut R, par: &OpRef, comps: &[Term]) -> Term {
    if comps.len() == 1 {
        return comps[0].clone();
    }
    let k = rng.random_range(1..comps.len());
    Term::Op(par.clone(), vec![bracket(rng, par, &comps[..k]), bracket(rng, par, &comps[k..])])
}

fn pi() -> Outcome {
    let d = doc("pi");
    let shape = PiShape::from_doc(&d).ok_or("pi shape")?;
    let g = Gen::new(&d);
    for i in 0..500 {
        let mut rng = case_rng(SEED ^ 10, i);
        let n = rng.random_range(1..=3);
        let k = rng.random_range(1..=4);
        let comps: Vec<Term> = (0..k).map(|_| g.term(&mut rng, Layer::State, n, 6)).collect::<Option<_>>().ok_or("no process")?;
        let t = bracket(&mut rng, &shape.par, &comps);
        let c = pi_canonical(&t, n, &d).map_err(|x| x.to_string())?;
        ensure(pi_canonical(&c, n, &d).ok() == Some(c.clone()), || format!("not idempotent on {}", show(&t)))?;
        let mut shuffled = comps.clone();
        shuffled.shuffle(&mut rng);
        let u = bracket(&mut rng, &shape.par, &shuffled);
        ensure(pi_canonical(&u, n, &d).ok() == Some(c.clone()), || format!("{} and {} differ", show(&t), show(&u)))?;
    }
    let e = Engine::new(d.clone()).unwrap();
    let ns = ["a".to_string(), "b".to_string()];
    let p = |s: &str| parse_term_at(s, &ns, &d, Layer::State).unwrap();
    let canon = |s: &str| print_term(&pi_canonical(&p(s), 2, &d).unwrap(), &ns);
    let steps = pi_step(&e, &p("par(out(a, b, zero()), inp(a, x. out(x, x, zero())))"), 2, 2).map_err(|x| x.to_string())?;
    let got: Vec<(String, String)> = steps.iter().map(|s| (s.rule.clone(), print_term(&s.target, &ns))).collect();
    ensure(got == [("comm".to_string(), "out(b, b, zero())".to_string())], || format!("comm example gives {got:?}"))?;
    let extruded = "nu(x2. par(inp(a, x3. zero()), out(x2, a, zero())))";
    for s in [
        "par(nu(c. out(c, a, zero())), inp(a, x. zero()))",
        "par(inp(a, x. zero()), nu(c. out(c, a, zero())))",
        "nu(c. par(out(c, a, zero()), inp(a, x. zero())))",
    ] {
        ensure(canon(s) == extruded, || format!("{s} canonicalizes to {}", canon(s)))?;
    }
    for (s, want) in [
        ("par(zero(), out(a, b, zero()))", "out(a, b, zero())"),
        ("par(out(a, b, zero()), zero())", "out(a, b, zero())"),
        ("par(zero(), par(zero(), zero()))", "zero()"),
        ("nu(c. par(inp(c, x. zero()), zero()))", "nu(x2. inp(x2, x3. zero()))"),
    ] {
        ensure(canon(s) == want, || format!("{s} canonicalizes to {}", canon(s)))?;
    }
    Ok("500 random processes; comm, extrusion and 0-elimination examples".to_string())
}

// 9 -----------------------------------------------------------------------

fn determinism() -> Outcome {
    let cases = common::cases();
    for (name, args) in &cases {
        let first = common::run(args);
        ensure(first == common::run(args), || format!("{name} differs between runs"))?;
        let stored = std::fs::read_to_string(common::golden_dir().join(format!("{name}.out"))).map_err(|e| format!("{name}: {e}"))?;
        ensure(first == stored, || format!("{name} differs from its golden file"))?;
    }
    Ok(format!("{} commands byte-identical across runs and to their golden files", cases.len()))
}
