use alloc::format;
use alloc::string::String;
use core::fmt::Write;

use super::{EqMode, Judgment, MetaVarDecl, SignatureDoc};
use crate::metaterm::print_metaterm;
use crate::term::{Collection, Layer, OpDecl};

fn decls(ds: &[MetaVarDecl]) -> String {
    let mut out = String::from("meta");
    for d in ds {
        let _ = write!(out, " {}:{}", d.name, d.level);
        if d.uses_fresh {
            out.push_str("!*");
        }
    }
    out
}

fn judgment(j: &Judgment, always_level: bool) -> String {
    let mut s = format!("{} ~> {}", print_metaterm(&j.src, j.level), print_metaterm(&j.tgt, j.level));
    if always_level || j.level > 0 {
        let _ = write!(s, " @{}", j.level);
    }
    s
}

fn op_line(o: &OpDecl) -> String {
    let mut s = format!("op {} {}", o.name, o.binders.len());
    for b in &o.binders {
        let _ = write!(s, " {b}");
    }
    match o.collection {
        Collection::Ordered => {}
        Collection::Sorted => s.push_str(" sorted"),
        Collection::SortedDedup => s.push_str(" sorted-dedup"),
    }
    if o.variadic {
        s.push_str(" variadic");
    }
    s.push(';');
    s
}

/// Prints a document in the signature-file grammar; parsing the output gives
/// back an equal document.
pub fn print_signature(doc: &SignatureDoc) -> String {
    let mut out = String::new();
    for o in &doc.ops {
        out.push_str(&op_line(o));
        out.push('\n');
    }
    if let Some((t1, t2)) = &doc.state {
        for f in [t1, t2] {
            let _ = writeln!(out, "state {} {{", f.name);
            for o in &f.ops {
                let _ = write!(out, "  op {}", o.name);
                for (j, l) in o.arg_layers.iter().enumerate() {
                    match l {
                        Layer::Term => out.push_str(" base"),
                        Layer::State => {
                            let _ = write!(out, " term:{}", o.binders[j]);
                        }
                    }
                }
                out.push_str(";\n");
            }
            out.push_str("}\n");
        }
    }
    for e in &doc.embeds {
        let _ = writeln!(out, "embed {} {};", e.name, e.kind);
    }
    for eq in &doc.equations {
        let _ = write!(out, "eq {}", eq.name);
        if eq.level > 0 {
            let _ = write!(out, " level {}", eq.level);
        }
        let _ = write!(
            out,
            " {} : {} = {}",
            decls(&eq.metavars),
            print_metaterm(&eq.lhs, eq.level),
            print_metaterm(&eq.rhs, eq.level)
        );
        match eq.mode {
            EqMode::Rewrite => out.push_str(" rewrite;\n"),
            EqMode::Canonical(h) => {
                let _ = writeln!(out, " canonical {};", h.name());
            }
        }
    }
    for r in &doc.rules {
        let _ = write!(out, "rule {} {} : {{", r.name, decls(&r.metavars));
        if r.hypotheses.is_empty() {
            out.push('}');
        } else {
            for h in &r.hypotheses {
                let _ = write!(out, " {};", judgment(h, true));
            }
            out.push_str(" }");
        }
        let _ = writeln!(out, " => {};", judgment(&r.conclusion, false));
    }
    out
}
