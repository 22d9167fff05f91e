//! The builtin signatures.

use alloc::string::{String, ToString};

use super::{closure_pack, coproduct, parse_signature, print_signature, SignatureDoc};
use crate::error::{Error, Result};

const LC: &str = "\
op app 2 0 0;
op abs 1 1;
";

const LC_BETA_ETA: &str = "\
op app 2 0 0;
op abs 1 1;
rule beta-red meta T:1 U:0 : {} => app(abs(x. T[x]), U) ~> T[U];
rule eta-exp meta T:0 : {} => T ~> abs(x. app(T, x));
rule app-cong1 meta T1:0 T2:0 T1':0 : { T1 ~> T1' @0; } => app(T1, T2) ~> app(T1', T2);
rule app-cong2 meta T1:0 T2:0 T2':0 : { T2 ~> T2' @0; } => app(T1, T2) ~> app(T1, T2');
rule abs-cong meta T1:1 T1':1 : { T1 ~> T1' @1; } => abs(x. T1[x]) ~> abs(x. T1'[x]);
";

const FIX: &str = "\
op fix 1 1;
rule fix-exp meta T:1 : {} => fix(x. T[x]) ~> T[fix(x. T[x])];
rule fix-cong meta T1:1 T1':1 : { T1 ~> T1' @1; } => fix(x. T1[x]) ~> fix(x. T1'[x]);
";

// The one-hole congruence: a context U with hole *1 carries any reduction of
// its argument. Its source is not a pattern, so it is check-only.
const UNARY_CONG: &str = "\
rule unary-cong meta U:1 T:0 T':0 : { T ~> T' @0; } => U[T] ~> U[T'];
";

const MONOID: &str = "\
op m 2 0 0;
op e 0;
eq assoc meta A:0 B:0 C:0 : m(m(A, B), C) = m(A, m(B, C)) rewrite;
eq unit-left meta A:0 : m(e(), A) = A rewrite;
eq unit-right meta A:0 : m(A, e()) = A rewrite;
";

const LJ: &str = "\
op not 1 0;
op and 2 0 0;
op or 2 0 0;
op imp 2 0 0;
op forall 1 1;
op exists 1 1;
";

const LL: &str = "\
op top 0;
op bot 0;
op zero 0;
op one 0;
op bang 1 0;
op whynot 1 0;
op with 2 0 0;
op parr 2 0 0;
op tensor 2 0 0;
op oplus 2 0 0;
op lolli 2 0 0;
op forall 1 1;
op exists 1 1;
";

const LC_EX: &str = "\
op app 2 0 0;
op abs 1 1;
op esubst 2 1 0;
# independent substitutions commute
eq esubst-comm meta T:2 U:0 V:0 : esubst(y. esubst(x. T[y, x], U), V) = esubst(x. esubst(y. T[y, x], V), U) canonical orbit-min;
rule beta-red meta T:1 U:0 : {} => app(abs(x. T[x]), U) ~> esubst(x. T[x], U);
rule gc meta T:0 U:0 : {} => esubst(x. T, U) ~> T;
rule var-sub meta T:0 : {} => esubst(x. x, T) ~> T;
rule app-sub meta T:1 U:1 V:0 : {} => esubst(x. app(T[x], U[x]), V) ~> app(esubst(x. T[x], V), esubst(x. U[x], V));
rule abs-sub meta T:2 V:0 : {} => esubst(x. abs(y. T[x, y]), V) ~> abs(y. esubst(x. T[x, y], V));
rule comp-sub meta T:2 U:1!* V:0 : {} => esubst(y. esubst(x. T[y, x], U[y]), V) ~> esubst(x. esubst(y. T[y, x], V), esubst(y. U[y], V));
rule app-cong1 meta T1:0 T2:0 T1':0 : { T1 ~> T1' @0; } => app(T1, T2) ~> app(T1', T2);
rule app-cong2 meta T1:0 T2:0 T2':0 : { T2 ~> T2' @0; } => app(T1, T2) ~> app(T1, T2');
rule abs-cong meta T1:1 T1':1 : { T1 ~> T1' @1; } => abs(x. T1[x]) ~> abs(x. T1'[x]);
rule esubst-cong1 meta T1:1 T2:0 T1':1 : { T1 ~> T1' @1; } => esubst(x. T1[x], T2) ~> esubst(x. T1'[x], T2);
rule esubst-cong2 meta T1:1 T2:0 T2':0 : { T2 ~> T2' @0; } => esubst(x. T1[x], T2) ~> esubst(x. T1[x], T2');
";

const CBV_SMALL: &str = "\
op app 2 0 0;
op abs 1 1;
# binary trees whose leaves are values
state T1 {
  op app term:0 term:0;
  op v base;
}
state T2 {
  op app term:0 term:0;
  op v base;
}
embed j cbv;
rule beta meta T:1 U:0 : {} => app(v(abs(x. T[x])), v(U)) ~> j(T[U]);
rule abs-cong meta T:1 T':1 : { j(T) ~> j(T') @1; } => v(abs(x. T[x])) ~> v(abs(x. T'[x]));
rule app-cong1 meta T:0 T':0 U:0 : { T ~> T' @0; } => app(T, U) ~> app(T', U);
rule app-cong2 meta T:0 U:0 U':0 : { U ~> U' @0; } => app(T, U) ~> app(T, U');
";

const CBV_BIG: &str = "\
op app 2 0 0;
op abs 1 1;
state T1 {
  op app term:0 term:0;
  op v base;
}
# results are single values
state T2 {
  op w base;
}
embed j cbv;
rule val meta T:0 : {} => v(T) ~> w(T);
rule beta meta T:0 U:0 T1:1 U1:0 V:0 : { T ~> w(abs(x. T1[x])) @0; U ~> w(U1) @0; j(T1[U1]) ~> V @0; } => app(T, U) ~> V;
";

const PI: &str = "\
state T1 {
  op zero;
  op par term:0 term:0;
  op bang term:0;
  op nu term:1;
  op out base base term:0;
  op inp base term:1;
}
state T2 {
  op zero;
  op par term:0 term:0;
  op bang term:0;
  op nu term:1;
  op out base base term:0;
  op inp base term:1;
}
eq par-unit meta P:0 : par(zero(), P) = P canonical pi-struct;
eq par-comm meta P:0 Q:0 : par(P, Q) = par(Q, P) canonical pi-struct;
eq par-assoc meta P:0 Q:0 R:0 : par(par(P, Q), R) = par(P, par(Q, R)) canonical pi-struct;
eq nu-extrude meta P:1 Q:0 : par(nu(a. P[a]), Q) = nu(a. par(P[a], Q)) canonical pi-struct;
eq nu-swap meta P:2 : nu(a. nu(b. P[a, b])) = nu(b. nu(a. P[a, b])) canonical pi-struct;
rule comm meta A:0 B:0 P:0 Q:1 : {} => par(out(A, B, P), inp(A, c. Q[c])) ~> par(P, Q[B]);
rule par-cong meta P:0 Q:0 R:0 : { P ~> Q @0; } => par(P, R) ~> par(Q, R);
rule nu-cong meta P:1 Q:1 : { P ~> Q @1; } => nu(a. P[a]) ~> nu(a. Q[a]);
rule rep-unfold meta P:0 Q:0 R:0 : { par(P, par(bang(P), R)) ~> Q @0; } => par(bang(P), R) ~> Q;
rule rep-solo meta P:0 Q:0 : { par(P, bang(P)) ~> Q @0; } => bang(P) ~> Q;
";

const NAMES: &[&str] = &[
    "lc",
    "lc_beta_eta",
    "lc_beta",
    "fix",
    "lc_fix",
    "lc_closure",
    "lc_1cong",
    "monoid",
    "lj",
    "ll",
    "lc_ex",
    "cbv_small",
    "cbv_big",
    "pi",
];

pub fn builtin_names() -> &'static [&'static str] {
    NAMES
}

pub fn builtin(name: &str) -> Result<SignatureDoc> {
    let parse = |s: &str| parse_signature(s);
    match name {
        "lc" => parse(LC),
        "lc_beta_eta" => parse(LC_BETA_ETA),
        "lc_beta" => Ok(parse(LC_BETA_ETA)?.without_rules(&["eta-exp"])),
        "fix" => parse(FIX),
        "lc_fix" => coproduct(&parse(LC_BETA_ETA)?, &parse(FIX)?),
        "lc_closure" => Ok(parse(LC_BETA_ETA)?.with_rules(closure_pack())),
        "lc_1cong" => parse(&[LC_BETA_ETA, UNARY_CONG].concat()),
        "monoid" => parse(MONOID),
        "lj" => parse(LJ),
        "ll" => parse(LL),
        "lc_ex" => parse(LC_EX),
        "cbv_small" => parse(CBV_SMALL),
        "cbv_big" => parse(CBV_BIG),
        "pi" => parse(PI),
        _ => Err(Error::UnknownBuiltin(name.to_string())),
    }
}

/// The builtin in the signature-file grammar.
pub fn builtin_text(name: &str) -> Result<String> {
    Ok(print_signature(&builtin(name)?))
}
