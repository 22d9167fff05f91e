//! The golden CLI cases, shared by the golden test and the acceptance target.

use std::path::PathBuf;
use std::process::Command;

pub const OMEGA_ID: &str = "app(abs(x. app(x, x)), abs(y. y))";

pub fn cases() -> Vec<(&'static str, Vec<&'static str>)> {
    let mut v: Vec<(&'static str, Vec<&'static str>)> = vec![
        ("trace_lc_beta_eta", vec!["trace", "--sig", "lc_beta_eta", "--term", OMEGA_ID, "--max", "10"]),
        ("trace_lc_fix_json", vec!["trace", "--sig", "examples/lc_fix.sig", "--term", OMEGA_ID, "--format", "json"]),
        ("fold_size", vec!["fold", "--sig", "lc", "--model", "size", "--term", "abs(x. app(x,x))"]),
        ("fold_free_vars", vec!["fold", "--sig", "examples/lc.sig", "--model", "free_vars", "--term", "app(a, abs(x. app(x, b)))"]),
        ("fold_redex_count", vec!["fold", "--sig", "lc", "--model", "redex_count", "--term", OMEGA_ID]),
        ("normalize_monoid", vec!["normalize", "--sig", "examples/monoid.sig", "--term", "m(m(a, e()), m(m(b, e()), c))", "--trace"]),
        ("normalize_lc_ex", vec!["normalize", "--sig", "examples/lc_ex.sig", "--term", "esubst(x. esubst(y. app(x, y), b), a)"]),
        ("normalize_pi", vec!["normalize", "--sig", "examples/pi.sig", "--term", "par(zero(), par(nu(c. out(c, a, zero())), inp(a, x. zero())))"]),
        ("step_lc_eta", vec!["step", "--sig", "lc_beta_eta", "--term", "abs(x. app(f, x))"]),
        ("step_lc_ex", vec!["step", "--sig", "examples/lc_ex.sig", "--term", "app(abs(x. app(x, x)), y)"]),
        ("step_pi_comm", vec!["step", "--sig", "examples/pi.sig", "--term", "par(out(a, b, zero()), inp(a, x. out(x, x, zero())))"]),
        ("step_pi_bang", vec!["step", "--sig", "pi", "--term", "par(bang(out(a, b, zero())), inp(a, x. zero()))", "--format", "json"]),
        ("trace_cbv_small", vec!["trace", "--sig", "examples/cbv_small.sig", "--term", "app(app(abs(x. x), abs(y. y)), abs(z. z))"]),
        ("derive_cbv_big", vec!["derive", "--sig", "examples/cbv_big.sig", "--term", "app(app(abs(x. x), abs(y. y)), abs(z. z))"]),
        ("derive_closure", vec!["derive", "--sig", "lc_closure", "--term", OMEGA_ID, "--depth", "1", "--goal", "abs(y. y)"]),
        ("derive_none", vec!["derive", "--sig", "lc_beta", "--term", "abs(x. x)"]),
        ("derive_fix", vec!["derive", "--sig", "examples/lc_fix.sig", "--closure", "--term", "fix(x. app(g, x))", "--depth", "1", "--goal", "app(g, app(g, fix(x. app(g, x))))"]),
        ("translate_lj", vec!["translate", "--map", "lj-ll", "--term", "forall(x. imp(x, exists(y. or(x, y))))"]),
        ("translate_fix", vec!["translate", "--from", "lc_fix", "--to", "lc_closure", "--term", "fix(f. abs(x. app(f, x)))"]),
        ("translate_lc_ex_steps", vec!["translate", "--map", "lc_ex-lc_1cong", "--term", "esubst(x. app(x, a), b)", "--step"]),
        ("graph_dot", vec!["graph", "--sig", "lc_beta_eta", "--term", OMEGA_ID, "--format", "dot", "--max-nodes", "20"]),
        ("graph_json", vec!["graph", "--sig", "examples/lc_ex.sig", "--term", "app(abs(x. x), abs(y. y))", "--format", "json"]),
        ("laws_lc", vec!["laws", "--sig", "examples/lc.sig", "--count", "200", "--seed", "7"]),
        ("laws_pi_json", vec!["laws", "--sig", "examples/pi.sig", "--count", "100", "--seed", "3", "--format", "json"]),
        ("laws_cbv_reduction", vec!["laws", "--sig", "examples/cbv_small.sig", "--suite", "reduction", "--count", "100"]),
        ("budget_exhausted", vec!["trace", "--sig", "lc_beta", "--term", "app(abs(x. app(x, x)), abs(x. app(x, x)))", "--max", "3"]),
        ("unknown_sig", vec!["check", "--sig", "examples/missing.sig"]),
    ];
    for (name, file) in [
        ("check_lc", "examples/lc.sig"),
        ("check_lc_fix", "examples/lc_fix.sig"),
        ("check_monoid", "examples/monoid.sig"),
        ("check_lj", "examples/lj.sig"),
        ("check_ll", "examples/ll.sig"),
        ("check_lc_ex", "examples/lc_ex.sig"),
        ("check_cbv_small", "examples/cbv_small.sig"),
        ("check_cbv_big", "examples/cbv_big.sig"),
        ("check_pi", "examples/pi.sig"),
    ] {
        v.push((name, vec!["check", "--sig", file]));
    }
    v
}

pub fn run(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_bindsem"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .env_remove("BINDSEM_BUDGET_NORMALIZE")
        .env_remove("BINDSEM_BUDGET_DEPTH")
        .env_remove("BINDSEM_BUDGET_STEPS")
        .env_remove("BINDSEM_BUDGET_UNFOLD")
        .env_remove("BINDSEM_BUDGET_NODES")
        .env_remove("BINDSEM_BUDGET_EDGES")
        .output()
        .unwrap();
    format!(
        "$ bindsem {}\n{}{}[exit {}]\n",
        args.join(" "),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
        out.status.code().unwrap_or(-1)
    )
}

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}
