//! The `bindsem` command line.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use bindsem_core::model::{builtin_model, MODEL_NAMES};
use bindsem_core::operational::{cbv_decompose, pi_step, PiShape};
use bindsem_core::reduction::{Budgets, Goal, GraphBounds, SearchMode, Strategy};
use bindsem_core::signature::{
    builtin, builtin_names, closure_pack, congruence_pack, parse_signature, validate,
};
use bindsem_core::term::{parse_term_at, Layer};
use bindsem_core::translations::{translation, TRANSLATIONS};
use bindsem_core::{equation, Engine, Error, SignatureDoc, Term};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::laws::{self, Bounds, Suite};
use crate::render::{pretty, report, Printer};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_NO_DERIVATION: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "bindsem", version, about = "Signatures with binding: substitution, equations and reduction")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Validate a signature.
    Check(SigArgs),
    /// Normal form modulo the equations.
    Normalize {
        #[command(flatten)]
        sig: SigArgs,
        #[command(flatten)]
        term: TermArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Also print the equation steps.
        #[arg(long)]
        trace: bool,
    },
    /// All one-step reducts.
    Step {
        #[command(flatten)]
        sig: SigArgs,
        #[command(flatten)]
        term: TermArgs,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Iterate single steps until no rule applies.
    Trace {
        #[command(flatten)]
        sig: SigArgs,
        #[command(flatten)]
        term: TermArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long, default_value_t = 100)]
        max: usize,
        #[arg(long, value_enum, default_value_t = StrategyArg::Outermost)]
        strategy: StrategyArg,
    },
    /// Search for derivations, including rules with non-structural hypotheses.
    Derive {
        #[command(flatten)]
        sig: SigArgs,
        #[command(flatten)]
        term: TermArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Keep only derivations ending in this term.
        #[arg(long)]
        goal: Option<String>,
        /// Every derivation instead of one per target.
        #[arg(long)]
        all: bool,
    },
    /// Evaluate a term in a builtin model.
    Fold {
        #[command(flatten)]
        sig: SigArgs,
        #[command(flatten)]
        term: TermArgs,
        #[arg(long)]
        model: String,
    },
    /// Apply a catalog translation to a term or to its one-step derivations.
    Translate {
        /// Translation name, e.g. fix-lc.
        #[arg(long)]
        map: Option<String>,
        /// Select the translation by source signature.
        #[arg(long)]
        from: Option<String>,
        /// Select the translation by target signature.
        #[arg(long)]
        to: Option<String>,
        #[command(flatten)]
        term: TermArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Translate every one-step derivation from the term.
        #[arg(long)]
        step: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run randomized law suites.
    Laws {
        #[command(flatten)]
        sig: SigArgs,
        /// Run only this suite.
        #[arg(long, value_enum)]
        suite: Option<SuiteArg>,
        /// Cases per suite.
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        max_scope: usize,
        #[arg(long, default_value_t = 8)]
        max_size: usize,
    },
    /// Reduction graph from one or more seed terms.
    Graph {
        #[command(flatten)]
        sig: SigArgs,
        #[command(flatten)]
        term: TermArgs,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

#[derive(Args, Debug, Clone)]
pub struct SigArgs {
    /// Signature file, or the name of a builtin.
    #[arg(long)]
    pub sig: String,
    /// Add the congruence rules of every operation.
    #[arg(long)]
    pub congruence: bool,
    /// Add reflexivity and transitivity.
    #[arg(long)]
    pub closure: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct TermArgs {
    /// Term text; repeat for several graph seeds.
    #[arg(long = "term", required = true)]
    pub terms: Vec<String>,
    /// Free variable names in order (default: order of first occurrence).
    #[arg(long, value_delimiter = ',')]
    pub scope: Option<Vec<String>>,
    #[arg(long, value_enum)]
    pub layer: Option<LayerArg>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct BudgetArgs {
    /// Equation steps per normalization.
    #[arg(long)]
    pub normalize_budget: Option<usize>,
    /// Derivation search depth.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Derivation search steps.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Replication unfoldings per process.
    #[arg(long)]
    pub unfold: Option<usize>,
    /// Graph node bound.
    #[arg(long)]
    pub max_nodes: Option<usize>,
    #[arg(long)]
    pub max_edges: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerArg {
    Term,
    State,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrategyArg {
    Outermost,
    Innermost,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuiteArg {
    Monad,
    Module,
    Equation,
    Reduction,
}

/// A signature that failed to parse or validate.
#[derive(Debug)]
struct Invalid(String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

/// A result that is not an error but sets a non-zero exit code.
pub struct Output {
    pub text: String,
    pub code: i32,
}

impl Output {
    fn ok(text: String) -> Output {
        Output { text, code: EXIT_OK }
    }
}

pub fn exit_code(e: &anyhow::Error) -> i32 {
    if e.downcast_ref::<Invalid>().is_some() {
        return EXIT_INVALID;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::Budget(_)) => EXIT_BUDGET,
        Some(Error::Rejected(_)) => EXIT_INVALID,
        _ => EXIT_ERROR,
    }
}

/// Parses `args`, runs the command and returns what to print with the exit
/// code. Errors go to the returned text prefixed with `error:`.
pub fn run<I, T>(args: I) -> (String, String, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK { (text, String::new(), code) } else { (String::new(), text, code) };
        }
    };
    match dispatch(cli.cmd) {
        Ok(o) => (o.text, String::new(), o.code),
        Err(e) => (String::new(), format!("error: {e:#}\n"), exit_code(&e)),
    }
}

pub fn main() -> i32 {
    let (out, err, code) = run(std::env::args_os());
    print!("{out}");
    eprint!("{err}");
    code
}

pub fn load_signature(spec: &str) -> Result<SignatureDoc> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
        return parse_signature(&text).map_err(|e| anyhow!(Invalid(format!("{spec}:{e}"))));
    }
    if builtin_names().contains(&spec) {
        return Ok(builtin(spec)?);
    }
    bail!("`{spec}` is neither a file nor a builtin signature (builtins: {})", builtin_names().join(", "))
}

fn signature(a: &SigArgs) -> Result<SignatureDoc> {
    let mut doc = load_signature(&a.sig)?;
    if a.congruence {
        doc = doc.with_rules(congruence_pack(&doc));
    }
    if a.closure {
        doc = doc.with_rules(closure_pack());
    }
    Ok(doc)
}

fn engine(doc: SignatureDoc, b: &BudgetArgs) -> Result<Engine> {
    let e = Engine::new(doc).map_err(|e| anyhow!(Invalid(e.to_string())))?;
    Ok(e.with_budgets(budgets(b)?))
}

/// Flags win over `BINDSEM_BUDGET_*`, which win over the defaults.
fn budget_value(flag: Option<usize>, var: &str, default: usize) -> Result<usize> {
    let v = match flag {
        Some(v) => v,
        None => match std::env::var(format!("BINDSEM_BUDGET_{var}")) {
            Ok(s) => s.trim().parse().with_context(|| format!("BINDSEM_BUDGET_{var}={s}"))?,
            Err(_) => default,
        },
    };
    if v == 0 {
        bail!("budget {} must be positive", var.to_lowercase());
    }
    Ok(v)
}

fn budgets(b: &BudgetArgs) -> Result<Budgets> {
    let d = Budgets::default();
    Ok(Budgets {
        normalize: budget_value(b.normalize_budget, "NORMALIZE", d.normalize)?,
        depth: budget_value(b.depth, "DEPTH", d.depth)?,
        steps: budget_value(b.steps, "STEPS", d.steps)?,
        unfold: budget_value(b.unfold, "UNFOLD", d.unfold)?,
    })
}

fn graph_bounds(b: &BudgetArgs) -> Result<GraphBounds> {
    let d = GraphBounds::default();
    Ok(GraphBounds {
        nodes: budget_value(b.max_nodes, "NODES", d.nodes)?,
        edges: budget_value(b.max_edges, "EDGES", d.edges)?,
    })
}

fn default_layer(doc: &SignatureDoc, a: &TermArgs) -> Layer {
    match a.layer {
        Some(LayerArg::Term) => Layer::Term,
        Some(LayerArg::State) => Layer::State,
        None if doc.ops.is_empty() && doc.state.is_some() => Layer::State,
        None => Layer::Term,
    }
}

/// Parses every text in one shared scope. Without `--scope`, unknown names
/// become free variables in order of first occurrence.
fn parse_all(texts: &[String], doc: &SignatureDoc, layer: Layer, scope: Option<&[String]>) -> Result<(Vec<Term>, Vec<String>)> {
    let mut names: Vec<String> = scope.map(<[String]>::to_vec).unwrap_or_default();
    'retry: loop {
        let mut out = Vec::with_capacity(texts.len());
        for text in texts {
            match parse_term_at(text, &names, doc, layer) {
                Ok(t) => out.push(t),
                Err(Error::UnboundName(x)) if scope.is_none() && !names.contains(&x) => {
                    names.push(x);
                    continue 'retry;
                }
                Err(e) => return Err(anyhow!(e).context(format!("parsing `{text}`"))),
            }
        }
        return Ok((out, names));
    }
}

/// Terms ready for the engine: state terms for heterogeneous signatures,
/// lambda terms decomposed through the CBV embedding when one is declared.
fn judged_terms(texts: &[String], a: &TermArgs, doc: &SignatureDoc) -> Result<(Vec<Term>, Vec<String>)> {
    let layer = default_layer(doc, a);
    let (ts, names) = parse_all(texts, doc, layer, a.scope.as_deref())?;
    if layer == doc.judgment_layer() {
        return Ok((ts, names));
    }
    if layer == Layer::Term && doc.embeds.iter().any(|x| x.kind == "cbv") {
        let ts = ts.iter().map(|t| cbv_decompose(t, doc)).collect::<bindsem_core::Result<Vec<_>>>()?;
        return Ok((ts, names));
    }
    bail!("this signature reduces {} terms; pass --layer accordingly", match doc.judgment_layer() {
        Layer::Term => "monad",
        Layer::State => "state",
    })
}

fn single(mut ts: Vec<Term>) -> Result<Term> {
    if ts.len() != 1 {
        bail!("expected exactly one --term");
    }
    Ok(ts.remove(0))
}

fn no_dot(f: Format) -> Result<bool> {
    match f {
        Format::Dot => bail!("--format dot is only available for graph"),
        Format::Json => Ok(true),
        Format::Text => Ok(false),
    }
}

fn dispatch(cmd: Cmd) -> Result<Output> {
    match cmd {
        Cmd::Check(sig) => check(&sig),
        Cmd::Normalize { sig, term, budget, trace } => {
            let json = no_dot(sig.format)?;
            let doc = signature(&sig)?;
            let layer = default_layer(&doc, &term);
            let (ts, names) = parse_all(&term.terms, &doc, layer, term.scope.as_deref())?;
            let t = single(ts)?;
            let b = budgets(&budget)?;
            let tr = equation::normalize_with(&t, names.len(), &doc, b.normalize)?;
            Ok(Output::ok(Printer::new(names).normalization(&tr, json, trace)))
        }
        Cmd::Step { sig, term, budget } => {
            let json = no_dot(sig.format)?;
            let doc = signature(&sig)?;
            let (ts, names) = judged_terms(&term.terms, &term, &doc)?;
            let t = single(ts)?;
            let e = engine(doc, &budget)?;
            let n = names.len();
            let t = e.nf(&t, n)?;
            let ds = if PiShape::from_doc(e.doc()).is_some() { pi_step(&e, &t, n, e.budgets.unfold)? } else { e.step(&t, n)? };
            Ok(Output::ok(Printer::new(names).steps(&e, &t, &ds, json)))
        }
        Cmd::Trace { sig, term, budget, max, strategy } => {
            let json = no_dot(sig.format)?;
            let doc = signature(&sig)?;
            let (ts, names) = judged_terms(&term.terms, &term, &doc)?;
            let t = single(ts)?;
            let e = engine(doc, &budget)?;
            let strategy = match strategy {
                StrategyArg::Outermost => Strategy::LeftmostOutermost,
                StrategyArg::Innermost => Strategy::LeftmostInnermost,
            };
            let tr = e.trace(&t, names.len(), max, strategy)?;
            let code = if tr.truncated { EXIT_BUDGET } else { EXIT_OK };
            Ok(Output { text: Printer::new(names).trace(&e, &tr, json), code })
        }
        Cmd::Derive { sig, term, budget, goal, all } => {
            let json = no_dot(sig.format)?;
            let doc = signature(&sig)?;
            let mut texts = term.terms.clone();
            texts.extend(goal.iter().cloned());
            let (mut ts, names) = judged_terms(&texts, &term, &doc)?;
            let goal = match goal {
                Some(_) => Goal::Term(ts.pop().expect("goal term")),
                None => Goal::Any,
            };
            let t = single(ts)?;
            let e = engine(doc, &budget)?;
            let mode = if all { SearchMode::All } else { SearchMode::OnePerTarget };
            let out = e.derive(&t, names.len(), &goal, mode)?;
            let p = Printer::new(names);
            let code = match (out.derivations.is_empty(), out.truncated) {
                (true, true) => EXIT_BUDGET,
                (true, false) => EXIT_NO_DERIVATION,
                _ => EXIT_OK,
            };
            let text = if json {
                pretty(&json!({
                    "derivations": out.derivations.iter().map(|d| p.derivation_json(d)).collect::<Vec<_>>(),
                    "truncated": out.truncated,
                }))
            } else {
                let mut s = String::new();
                for (i, d) in out.derivations.iter().enumerate() {
                    s.push_str(&format!("derivation {} of {}: {}\n", i + 1, out.derivations.len(), p.term(&d.target)));
                    s.push_str(&p.derivation(d));
                }
                if out.derivations.is_empty() {
                    s.push_str("no derivation\n");
                }
                if out.truncated {
                    s.push_str("search truncated by the budget\n");
                }
                s
            };
            Ok(Output { text, code })
        }
        Cmd::Fold { sig, term, model } => {
            let json = no_dot(sig.format)?;
            let doc = signature(&sig)?;
            let m = builtin_model(&model).map_err(|_| anyhow!("unknown model `{model}` (models: {})", MODEL_NAMES.join(", ")))?;
            let layer = default_layer(&doc, &term);
            let (ts, names) = parse_all(&term.terms, &doc, layer, term.scope.as_deref())?;
            let t = single(ts)?;
            let v = m.run(&t, names.len()).render(&names);
            Ok(Output::ok(if json { pretty(&json!({"model": model, "value": v})) } else { format!("{v}\n") }))
        }
        Cmd::Translate { map, from, to, term, budget, step, format } => translate(map, from, to, &term, &budget, step, format),
        Cmd::Laws { sig, suite, count, seed, max_scope, max_size } => {
            let json = no_dot(sig.format)?;
            let doc = signature(&sig)?;
            let suites = match suite {
                Some(SuiteArg::Monad) => vec![Suite::Monad],
                Some(SuiteArg::Module) => vec![Suite::Module],
                Some(SuiteArg::Equation) => vec![Suite::Equation],
                Some(SuiteArg::Reduction) => vec![Suite::Reduction],
                None => vec![Suite::Monad, Suite::Module, Suite::Equation, Suite::Reduction],
            };
            let b = Bounds { scope: max_scope, size: max_size };
            let reports: Vec<laws::Report> = suites.iter().map(|s| laws::run(*s, &doc, count, seed, b)).collect();
            let code = if reports.iter().all(laws::Report::ok) { EXIT_OK } else { EXIT_INVALID };
            let text = if json {
                pretty(&json!({"seed": seed, "suites": reports.iter().map(laws::Report::to_json).collect::<Vec<_>>()}))
            } else {
                let mut s = String::new();
                for r in &reports {
                    s.push_str(&format!(
                        "{}: {}/{} passed, {} skipped{}\n",
                        r.suite,
                        r.passed,
                        r.cases,
                        r.skipped,
                        if r.ok() { "" } else { " FAILED" }
                    ));
                    for f in &r.failures {
                        s.push_str(&format!("  {f}\n"));
                    }
                }
                s
            };
            Ok(Output { text, code })
        }
        Cmd::Graph { sig, term, budget } => {
            let doc = signature(&sig)?;
            let (ts, names) = judged_terms(&term.terms, &term, &doc)?;
            let bounds = graph_bounds(&budget)?;
            let e = engine(doc, &budget)?;
            let g = e.graph(&ts, names.len(), bounds)?;
            let p = Printer::new(names);
            let text = match sig.format {
                Format::Text => p.graph_text(&g),
                Format::Json => p.graph_json(&g),
                Format::Dot => p.graph_dot(&g),
            };
            Ok(Output { text, code: if g.truncated { EXIT_BUDGET } else { EXIT_OK } })
        }
    }
}

fn check(sig: &SigArgs) -> Result<Output> {
    let json = no_dot(sig.format)?;
    let doc = signature(sig)?;
    let r = validate(&doc);
    let text = report(&r, json);
    Ok(Output { text, code: if r.accepted() { EXIT_OK } else { EXIT_INVALID } })
}

fn translate(
    map: Option<String>,
    from: Option<String>,
    to: Option<String>,
    term: &TermArgs,
    budget: &BudgetArgs,
    step: bool,
    format: Format,
) -> Result<Output> {
    let json = no_dot(format)?;
    let &(name, src, tgt) = TRANSLATIONS
        .iter()
        .find(|(n, s, t)| {
            map.as_deref().is_none_or(|m| m == *n) && from.as_deref().is_none_or(|f| f == *s) && to.as_deref().is_none_or(|x| x == *t)
        })
        .ok_or_else(|| {
            let known: Vec<String> = TRANSLATIONS.iter().map(|(n, s, t)| format!("{n} ({s} -> {t})")).collect();
            anyhow!("no catalog translation matches (known: {})", known.join(", "))
        })?;
    let mut tr = translation(name)?;
    let b = budgets(budget)?;
    tr.source = tr.source.clone().with_budgets(b);
    tr.target = tr.target.clone().with_budgets(b);
    let (ts, names) = judged_terms(&term.terms, term, tr.source.doc())?;
    let t = single(ts)?;
    let n = names.len();
    let p = Printer::new(names);
    let image = tr.translate(&t, n)?;
    if !step {
        let text = if json {
            pretty(&json!({"map": name, "from": src, "to": tgt, "term": p.term(&t), "image": p.term(&image)}))
        } else {
            format!("{}\n", p.term(&image))
        };
        return Ok(Output::ok(text));
    }
    let mut items = Vec::new();
    let mut text = String::new();
    for d in tr.source.step(&tr.source.nf(&t, n)?, n)? {
        let img = tr.translate_derivation(&d)?;
        if json {
            items.push(json!({"source": p.derivation_json(&d), "image": p.derivation_json(&img)}));
        } else {
            text.push_str(&p.derivation(&d));
            text.push_str("=>\n");
            text.push_str(&p.derivation(&img));
            text.push('\n');
        }
    }
    if json {
        text = pretty(&json!({"map": name, "from": src, "to": tgt, "term": p.term(&t), "image": p.term(&image), "steps": items}));
    } else if items.is_empty() && text.is_empty() {
        text = "no steps\n".to_string();
    }
    Ok(Output::ok(text))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (String, String, i32) {
        run(std::iter::once("bindsem").chain(args.iter().copied()))
    }

    #[test]
    fn fold_size() {
        let (out, _, code) = run_args(&["fold", "--sig", "lc", "--model", "size", "--term", "abs(x. app(x,x))"]);
        assert_eq!((out.as_str(), code), ("2\n", 0));
    }

    #[test]
    fn free_names_are_detected_in_order() {
        let (out, _, code) = run_args(&["normalize", "--sig", "monoid", "--term", "m(m(b, e()), a)"]);
        assert_eq!((out.as_str(), code), ("m(b, a)\n", 0));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_args(&["check", "--sig", "nope"]).2, EXIT_ERROR);
        assert_eq!(run_args(&["derive", "--sig", "lc_beta", "--term", "abs(x. x)"]).2, EXIT_NO_DERIVATION);
        let omega = "app(abs(x. app(x, x)), abs(x. app(x, x)))";
        assert_eq!(run_args(&["trace", "--sig", "lc_beta", "--term", omega, "--max", "3"]).2, EXIT_BUDGET);
        assert_eq!(run_args(&["fold", "--sig", "lc", "--model", "size", "--term", "abs(x. x)", "--format", "dot"]).2, EXIT_ERROR);
    }

    #[test]
    fn budget_flag_beats_default() {
        assert_eq!(budget_value(Some(5), "NO_SUCH_VARIABLE", 9).unwrap(), 5);
        assert_eq!(budget_value(None, "NO_SUCH_VARIABLE", 9).unwrap(), 9);
        assert!(budget_value(Some(0), "NO_SUCH_VARIABLE", 9).is_err());
    }
}
