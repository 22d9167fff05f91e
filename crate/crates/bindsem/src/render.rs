//! Text, JSON and DOT renderings of engine results.

use bindsem_core::equation::NormalizationTrace;
use bindsem_core::reduction::{Graph, Trace};
use bindsem_core::signature::{Status, ValidationReport};
use bindsem_core::term::print_term;
use bindsem_core::{Derivation, Engine, Term};
use serde_json::{json, Value};

/// Prints terms with the free names of the run.
#[derive(Clone, Debug, Default)]
pub struct Printer {
    pub names: Vec<String>,
}

impl Printer {
    pub fn new(names: Vec<String>) -> Printer {
        Printer { names }
    }

    pub fn term(&self, t: &Term) -> String {
        print_term(t, &self.names)
    }

    /// Names in scope under `k` further binders.
    fn under(&self, k: usize) -> Printer {
        let mut names = self.names.clone();
        let base = names.len();
        for i in 0..k {
            let mut name = format!("x{}", base + i);
            while names.contains(&name) {
                name.push('\'');
            }
            names.push(name);
        }
        Printer { names }
    }

    fn at(&self, scope: usize) -> Printer {
        self.under(scope.saturating_sub(self.names.len()))
    }

    /// Derivation tree, one judgment per line, hypotheses indented.
    pub fn derivation(&self, d: &Derivation) -> String {
        let mut out = String::new();
        self.derivation_into(d, 0, &mut out);
        out
    }

    fn derivation_into(&self, d: &Derivation, indent: usize, out: &mut String) {
        let p = self.at(d.scope);
        let binders = &p.names[self.names.len().min(p.names.len())..];
        let ctx = if binders.is_empty() { String::new() } else { format!("{} |- ", binders.join(" ")) };
        out.push_str(&format!(
            "{:indent$}{}: {ctx}{} ~> {}\n",
            "",
            d.rule,
            p.term(&d.source),
            p.term(&d.target),
        ));
        for s in &d.subs {
            p.derivation_into(s, indent + 2, out);
        }
    }

    pub fn derivation_json(&self, d: &Derivation) -> Value {
        let p = self.at(d.scope);
        json!({
            "rule": d.rule,
            "scope": d.scope,
            "source": p.term(&d.source),
            "target": p.term(&d.target),
            "subs": d.subs.iter().map(|s| p.derivation_json(s)).collect::<Vec<_>>(),
        })
    }

    /// One-step reducts with the rule and position of each redex.
    pub fn steps(&self, e: &Engine, t: &Term, ds: &[Derivation], json: bool) -> String {
        if json {
            let steps: Vec<Value> = ds
                .iter()
                .map(|d| {
                    let (_, path) = e.redex(d);
                    json!({
                        "rule": e.redex_rule(d),
                        "path": path,
                        "target": self.term(&d.target),
                        "derivation": self.derivation_json(d),
                    })
                })
                .collect();
            return pretty(&json!({"term": self.term(t), "steps": steps}));
        }
        let mut out = String::new();
        if ds.is_empty() {
            out.push_str("no steps\n");
        }
        for d in ds {
            let (_, path) = e.redex(d);
            out.push_str(&format!("{} @ {}: {}\n", e.redex_rule(d), show_path(&path), self.term(&d.target)));
        }
        out
    }

    pub fn trace(&self, e: &Engine, tr: &Trace, json: bool) -> String {
        if json {
            let steps: Vec<Value> = tr
                .steps
                .iter()
                .map(|d| {
                    let (_, path) = e.redex(d);
                    json!({"rule": e.redex_rule(d), "path": path, "term": self.term(&d.target)})
                })
                .collect();
            return pretty(&json!({
                "start": self.term(&tr.start),
                "steps": steps,
                "result": self.term(tr.last()),
                "truncated": tr.truncated,
            }));
        }
        let mut out = format!("   {}\n", self.term(&tr.start));
        for d in &tr.steps {
            let (_, path) = e.redex(d);
            out.push_str(&format!("~> {}    [{} @ {}]\n", self.term(&d.target), e.redex_rule(d), show_path(&path)));
        }
        out.push_str(&format!(
            "{} step{}{}\n",
            tr.steps.len(),
            if tr.steps.len() == 1 { "" } else { "s" },
            if tr.truncated { ", stopped at the step bound" } else { "" }
        ));
        out
    }

    pub fn normalization(&self, tr: &NormalizationTrace, json: bool, with_trace: bool) -> String {
        if json {
            let mut v = json!({"result": self.term(&tr.result)});
            if with_trace {
                v["steps"] = tr
                    .steps
                    .iter()
                    .map(|s| json!({"equation": s.equation, "path": s.position, "term": self.term(&s.after)}))
                    .collect();
            }
            return pretty(&v);
        }
        let mut out = String::new();
        if with_trace {
            for s in &tr.steps {
                out.push_str(&format!("= {}    [{} @ {}]\n", self.term(&s.after), s.equation, show_path(&s.position)));
            }
        }
        out.push_str(&self.term(&tr.result));
        out.push('\n');
        out
    }

    pub fn graph_text(&self, g: &Graph) -> String {
        let mut out = String::new();
        for (i, t) in g.nodes.iter().enumerate() {
            out.push_str(&format!("n{i} {}\n", self.term(t)));
        }
        for (s, t, r) in &g.edges {
            out.push_str(&format!("n{s} -> n{t} [{r}]\n"));
        }
        if g.truncated {
            out.push_str("truncated\n");
        }
        out
    }

    pub fn graph_json(&self, g: &Graph) -> String {
        pretty(&json!({
            "nodes": g.nodes.iter().enumerate().map(|(i, t)| json!({"id": i, "term": self.term(t)})).collect::<Vec<_>>(),
            "edges": g.edges.iter().map(|(s, t, r)| json!({"src": s, "dst": t, "rule": r})).collect::<Vec<_>>(),
            "truncated": g.truncated,
        }))
    }

    pub fn graph_dot(&self, g: &Graph) -> String {
        let mut out = String::from("digraph reductions {\n");
        for (i, t) in g.nodes.iter().enumerate() {
            out.push_str(&format!("  n{i} [label={}];\n", dot_string(&self.term(t))));
        }
        for (s, t, r) in &g.edges {
            out.push_str(&format!("  n{s} -> n{t} [label={}];\n", dot_string(r)));
        }
        out.push_str("}\n");
        out
    }
}

pub fn report(r: &ValidationReport, json: bool) -> String {
    let status = |s: Status| match s {
        Status::Pass => "pass",
        Status::Note => "note",
        Status::Warning => "warning",
        Status::Error => "error",
    };
    if json {
        return pretty(&json!({
            "accepted": r.accepted(),
            "items": r.items.iter().map(|i| json!({
                "subject": i.subject,
                "status": status(i.status),
                "message": i.message,
            })).collect::<Vec<_>>(),
        }));
    }
    let mut out = String::new();
    for i in &r.items {
        out.push_str(&format!("{:<7} {}: {}\n", status(i.status), i.subject, i.message));
    }
    out.push_str(if r.accepted() { "accepted\n" } else { "rejected\n" });
    out
}

pub fn show_path(p: &[usize]) -> String {
    if p.is_empty() {
        "root".to_string()
    } else {
        p.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
    }
}

fn dot_string(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use bindsem_core::builtin;
    use bindsem_core::reduction::GraphBounds;
    use bindsem_core::term::parse_term;

    #[test]
    fn dot_escapes_quotes() {
        assert_eq!(dot_string("a\"b"), "\"a\\\"b\"");
    }

    #[test]
    fn graph_json_shape() {
        let e = Engine::new(builtin("lc_beta").unwrap()).unwrap();
        let t = parse_term("app(abs(x. x), abs(y. y))", &[], e.doc()).unwrap();
        let g = e.graph(&[t], 0, GraphBounds::default()).unwrap();
        let v: Value = serde_json::from_str(&Printer::default().graph_json(&g)).unwrap();
        assert_eq!(v["nodes"].as_array().unwrap().len(), 2);
        assert_eq!(v["edges"][0]["rule"], "beta-red");
        assert_eq!(v["edges"][0]["src"], 0);
    }

    #[test]
    fn nested_derivations_name_bound_variables() {
        let e = Engine::new(builtin("lc_beta").unwrap()).unwrap();
        let t = parse_term("abs(z. app(abs(x. x), z))", &[], e.doc()).unwrap();
        let ds = e.step(&t, 0).unwrap();
        let text = Printer::default().derivation(&ds[0]);
        assert_eq!(text, "abs-cong: abs(x0. app(abs(x1. x1), x0)) ~> abs(x0. x0)\n  beta-red: x0 |- app(abs(x1. x1), x0) ~> x0\n");
    }
}
