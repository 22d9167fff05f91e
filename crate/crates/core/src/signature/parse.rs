use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{EmbedDecl, EqMode, EquationSpec, Hook, Judgment, ReductionRuleSpec, SignatureDoc, StateFunctorSpec};
use crate::error::{Error, Result};
use crate::metaterm::{parse_mt, MetaCtx, MetaVarDecl};
use crate::syntax::{Lexer, Tok};
use crate::term::{Collection, Layer, OpDecl, OpRef};

/// Parses a signature file.
pub fn parse_signature(text: &str) -> Result<SignatureDoc> {
    let mut lx = Lexer::new(text)?;
    let mut doc = SignatureDoc::empty();
    while !lx.at_end() {
        if lx.keyword("op") {
            let o = parse_op(&mut lx)?;
            if doc.op(&o.name, Layer::Term).is_some() {
                return Err(Error::Duplicate(o.name));
            }
            doc.ops.push(OpRef::new(o));
        } else if lx.keyword("eq") {
            let eq = parse_eq(&mut lx, &doc)?;
            if doc.equation(&eq.name).is_some() {
                return Err(Error::Duplicate(eq.name));
            }
            doc.equations.push(eq);
        } else if lx.keyword("rule") {
            let r = parse_rule(&mut lx, &doc)?;
            if doc.rule(&r.name).is_some() {
                return Err(Error::Duplicate(r.name));
            }
            doc.rules.push(r);
        } else if lx.keyword("state") {
            let f = parse_state(&mut lx)?;
            doc.state = match doc.state.take() {
                None => Some((f.clone(), StateFunctorSpec { name: String::new(), ops: Vec::new() })),
                Some((t1, t2)) if t2.name.is_empty() => Some((t1, f)),
                Some(_) => return Err(lx.error("at most two state functors".into())),
            };
        } else if lx.keyword("embed") {
            let name = lx.ident()?;
            let kind = lx.ident()?;
            lx.expect(&Tok::Semi)?;
            if doc.embeds.iter().any(|e| e.name == name) {
                return Err(Error::Duplicate(name));
            }
            let hook = match kind.as_str() {
                "cbv" => crate::operational::cbv_embedding(&name, &doc).map_err(|e| lx.error(format!("{e}")))?,
                _ => return Err(lx.error(format!("unknown embedding kind `{kind}`"))),
            };
            doc.embeds.push(EmbedDecl { name, kind, hook });
        } else {
            return Err(lx.unexpected("`op`, `eq`, `rule`, `state` or `embed`"));
        }
    }
    if let Some((_, t2)) = &doc.state {
        if t2.name.is_empty() {
            return Err(lx.error("state functor T2 missing".into()));
        }
    }
    Ok(doc)
}

fn parse_op(lx: &mut Lexer) -> Result<OpDecl> {
    let name = lx.ident()?;
    let argc = lx.num()?;
    let mut binders = Vec::with_capacity(argc);
    for _ in 0..argc {
        binders.push(lx.num()?);
    }
    let mut o = OpDecl::term(&name, &binders);
    if lx.keyword("sorted") {
        o.collection = Collection::Sorted;
    } else if lx.keyword("sorted-dedup") {
        o.collection = Collection::SortedDedup;
    }
    if lx.keyword("variadic") {
        if argc != 1 {
            return Err(lx.error("variadic operations declare exactly one binder count".into()));
        }
        o.variadic = true;
    }
    lx.expect(&Tok::Semi)?;
    Ok(o)
}

fn parse_state(lx: &mut Lexer) -> Result<StateFunctorSpec> {
    let name = lx.ident()?;
    lx.expect(&Tok::LBrace)?;
    let mut ops: Vec<OpRef> = Vec::new();
    while !lx.eat(&Tok::RBrace) {
        if !lx.keyword("op") {
            return Err(lx.unexpected("`op` or `}`"));
        }
        let op_name = lx.ident()?;
        let mut binders = Vec::new();
        let mut layers = Vec::new();
        while !lx.eat(&Tok::Semi) {
            if lx.keyword("base") {
                binders.push(0);
                layers.push(Layer::Term);
            } else if lx.keyword("term") {
                lx.expect(&Tok::Colon)?;
                binders.push(lx.num()?);
                layers.push(Layer::State);
            } else {
                return Err(lx.unexpected("`base`, `term:<level>` or `;`"));
            }
        }
        if ops.iter().any(|o| o.name == op_name) {
            return Err(Error::Duplicate(op_name));
        }
        ops.push(OpRef::new(OpDecl {
            name: op_name,
            layer: Layer::State,
            binders,
            arg_layers: layers,
            collection: Collection::Ordered,
            variadic: false,
        }));
    }
    Ok(StateFunctorSpec { name, ops })
}

fn parse_decls(lx: &mut Lexer) -> Result<Vec<MetaVarDecl>> {
    if !lx.keyword("meta") {
        return Err(lx.unexpected("`meta`"));
    }
    let mut decls: Vec<MetaVarDecl> = Vec::new();
    while !lx.eat(&Tok::Colon) {
        let name = lx.ident()?;
        lx.expect(&Tok::Colon)?;
        let mut d = MetaVarDecl::new(&name, lx.num()?);
        if lx.eat(&Tok::Bang) {
            lx.expect(&Tok::Star)?;
            d.uses_fresh = true;
        }
        if decls.iter().any(|x| x.name == name) {
            return Err(lx.error(format!("metavariable `{name}` declared twice")));
        }
        decls.push(d);
    }
    Ok(decls)
}

/// Layer of an equation side: that of its root operation, monad first.
fn side_layer(lx: &Lexer, doc: &SignatureDoc) -> Layer {
    match (lx.peek(), lx.peek_at(1)) {
        (Some(Tok::Ident(n)), Some(Tok::LParen)) if doc.op(n, Layer::Term).is_none() && doc.op(n, Layer::State).is_some() => {
            Layer::State
        }
        _ => Layer::Term,
    }
}

fn parse_eq(lx: &mut Lexer, doc: &SignatureDoc) -> Result<EquationSpec> {
    let name = lx.ident()?;
    let level = if lx.keyword("level") { lx.num()? } else { 0 };
    let decls = parse_decls(lx)?;
    let layer = side_layer(lx, doc);
    let mut ctx = MetaCtx::new(doc, decls);
    let lhs = parse_mt(lx, &mut ctx, level, layer)?;
    lx.expect(&Tok::Eq)?;
    let rhs = parse_mt(lx, &mut ctx, level, layer)?;
    let mode = if lx.keyword("canonical") {
        let h = lx.ident()?;
        EqMode::Canonical(Hook::from_name(&h).ok_or_else(|| lx.error(format!("unknown canonicalizer `{h}`")))?)
    } else {
        lx.keyword("rewrite");
        EqMode::Rewrite
    };
    lx.expect(&Tok::Semi)?;
    Ok(EquationSpec { name, metavars: ctx.metavars, level, layer, lhs, rhs, mode })
}

fn parse_judgment(lx: &mut Lexer, ctx: &mut MetaCtx<'_>, layer: Layer) -> Result<Judgment> {
    let level = lx.lookahead_level().unwrap_or(0);
    let src = parse_mt(lx, ctx, level, layer)?;
    lx.expect(&Tok::Squig)?;
    let tgt = parse_mt(lx, ctx, level, layer)?;
    if lx.eat(&Tok::At) {
        lx.num()?;
    }
    Ok(Judgment { level, src, tgt })
}

fn parse_rule(lx: &mut Lexer, doc: &SignatureDoc) -> Result<ReductionRuleSpec> {
    let name = lx.ident()?;
    let decls = parse_decls(lx)?;
    let layer = doc.judgment_layer();
    let mut ctx = MetaCtx::new(doc, decls);
    lx.expect(&Tok::LBrace)?;
    let mut hypotheses = Vec::new();
    while !lx.eat(&Tok::RBrace) {
        hypotheses.push(parse_judgment(lx, &mut ctx, layer)?);
        if !lx.eat(&Tok::Semi) && lx.peek() != Some(&Tok::RBrace) {
            return Err(lx.unexpected("`;` or `}`"));
        }
    }
    lx.expect(&Tok::Arrow)?;
    let conclusion = parse_judgment(lx, &mut ctx, layer)?;
    lx.expect(&Tok::Semi)?;
    Ok(ReductionRuleSpec { name, metavars: ctx.metavars, hypotheses, conclusion })
}
