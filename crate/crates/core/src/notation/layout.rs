//! Shared layout: picks the form of every node and decides where fences go.
//! Both the linear writer and the MathML writer are driven from here, so the
//! two outputs always agree on structure.

use super::table::{Assoc, Fixity, NotationDef, NotationTable, CALL_PRECEDENCE};
use crate::om::{OMObject, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Punct {
    CallOpen,
    CallClose,
    ArgSep,
    VarSep,
    Dot,
    BinderOpen,
    BinderClose,
}

/// How a symbol token is written.
#[derive(Debug, Clone, Copy)]
pub(crate) enum SymbolText<'a> {
    /// The notation glyph; `operator` for infix, prefix, postfix and binder use.
    Glyph { glyph: &'a str, operator: bool },
    /// The `cd#name` reference of the default notation.
    Ref,
}

pub(crate) trait Sink {
    fn leaf(&mut self, o: &OMObject, id: usize);
    fn symbol(&mut self, s: &Symbol, text: SymbolText<'_>, id: usize);
    fn bvar(&mut self, name: &str);
    fn punct(&mut self, p: Punct);
    fn open_fence(&mut self);
    fn close_fence(&mut self);
    fn begin(&mut self) {}
    fn end(&mut self) {}
}

/// Surrounding constraints: operators binding looser than `lmin` on the left
/// would escape, and `follow` is the precedence of the operator that comes
/// next in the output, if any.
#[derive(Debug, Clone, Copy)]
struct Ctx {
    lmin: u32,
    follow: Option<u32>,
}

const TOP: Ctx = Ctx { lmin: 0, follow: None };

enum Form<'a> {
    Atom,
    Symbol(&'a Symbol, SymbolText<'a>),
    Infix(&'a NotationDef, &'a Symbol, &'a OMObject, &'a OMObject),
    Prefix(&'a NotationDef, &'a Symbol, &'a OMObject),
    Postfix(&'a NotationDef, &'a Symbol, &'a OMObject),
    Call(&'a OMObject, &'a [OMObject]),
    Bind(Option<&'a NotationDef>, &'a OMObject, &'a [String], &'a OMObject),
}

fn arity_ok(def: &NotationDef, n: usize) -> bool {
    def.arity.is_none_or(|a| a == n)
}

fn form<'a>(o: &'a OMObject, table: &'a NotationTable) -> Form<'a> {
    match o {
        OMObject::Symbol(s) => match table.get(&s.key()) {
            Some(d) if d.fixity == Fixity::Function => Form::Symbol(
                s,
                SymbolText::Glyph {
                    glyph: &d.glyph,
                    operator: false,
                },
            ),
            _ => Form::Symbol(s, SymbolText::Ref),
        },
        OMObject::Application(els) => {
            let (head, args) = els.split_first().expect("application has a head");
            if let OMObject::Symbol(s) = head {
                if let Some(d) = table.get(&s.key()) {
                    if arity_ok(d, args.len()) {
                        match (d.fixity, args) {
                            (Fixity::Infix, [l, r]) => return Form::Infix(d, s, l, r),
                            (Fixity::Prefix, [x]) => return Form::Prefix(d, s, x),
                            (Fixity::Postfix, [x]) => return Form::Postfix(d, s, x),
                            _ => {}
                        }
                    }
                }
            }
            Form::Call(head, args)
        }
        OMObject::Binding { binder, bvars, body } => {
            let def = match &**binder {
                OMObject::Symbol(s) => table.get(&s.key()).filter(|d| d.fixity == Fixity::Binder),
                _ => None,
            };
            Form::Bind(def, binder, bvars, body)
        }
        _ => Form::Atom,
    }
}

fn rhs_min(p: u32, assoc: Option<Assoc>) -> u32 {
    match assoc {
        Some(Assoc::Right) => p,
        _ => p + 1,
    }
}

fn fenced(f: &Form<'_>, ctx: Ctx) -> bool {
    match f {
        Form::Atom | Form::Symbol(..) | Form::Call(..) => false,
        Form::Infix(d, ..) => {
            let p = d.precedence;
            let fits = p >= ctx.lmin
                && ctx.follow.is_none_or(|f| f < rhs_min(p, d.assoc))
                && !(d.assoc == Some(Assoc::None) && ctx.follow == Some(p));
            !fits
        }
        Form::Prefix(d, ..) => ctx.follow.is_some_and(|f| f >= d.precedence),
        Form::Postfix(d, ..) => d.precedence < ctx.lmin,
        Form::Bind(..) => ctx.follow.is_some(),
    }
}

pub(crate) fn lay_out(o: &OMObject, table: &NotationTable, sink: &mut dyn Sink) {
    node(o, 0, TOP, table, sink);
}

fn node(o: &OMObject, id: usize, ctx: Ctx, table: &NotationTable, sink: &mut dyn Sink) {
    let f = form(o, table);
    let fence = fenced(&f, ctx);
    let ctx = if fence { TOP } else { ctx };
    if fence {
        sink.open_fence();
    }
    match f {
        Form::Atom => sink.leaf(o, id),
        Form::Symbol(s, text) => sink.symbol(s, text, id),
        Form::Infix(d, s, l, r) => {
            let p = d.precedence;
            sink.begin();
            node(l, id + 2, Ctx { lmin: ctx.lmin, follow: Some(p) }, table, sink);
            sink.symbol(s, glyph(d, true), id + 1);
            let r_id = id + 2 + l.size();
            node(r, r_id, Ctx { lmin: rhs_min(p, d.assoc), follow: ctx.follow }, table, sink);
            sink.end();
        }
        Form::Prefix(d, s, x) => {
            sink.begin();
            sink.symbol(s, glyph(d, true), id + 1);
            node(x, id + 2, Ctx { lmin: d.precedence, follow: ctx.follow }, table, sink);
            sink.end();
        }
        Form::Postfix(d, s, x) => {
            sink.begin();
            node(x, id + 2, Ctx { lmin: ctx.lmin, follow: Some(d.precedence) }, table, sink);
            sink.symbol(s, glyph(d, true), id + 1);
            sink.end();
        }
        Form::Call(head, args) => {
            sink.begin();
            node(head, id + 1, Ctx { lmin: ctx.lmin, follow: Some(CALL_PRECEDENCE) }, table, sink);
            sink.punct(Punct::CallOpen);
            let mut next = id + 1 + head.size();
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    sink.punct(Punct::ArgSep);
                }
                node(a, next, TOP, table, sink);
                next += a.size();
            }
            sink.punct(Punct::CallClose);
            sink.end();
        }
        Form::Bind(def, binder, bvars, body) => {
            sink.begin();
            match (def, binder) {
                (Some(d), OMObject::Symbol(s)) => sink.symbol(s, glyph(d, true), id + 1),
                _ => {
                    sink.punct(Punct::BinderOpen);
                    node(binder, id + 1, TOP, table, sink);
                    sink.punct(Punct::BinderClose);
                }
            }
            for (i, v) in bvars.iter().enumerate() {
                if i > 0 {
                    sink.punct(Punct::VarSep);
                }
                sink.bvar(v);
            }
            sink.punct(Punct::Dot);
            node(body, id + 1 + binder.size(), TOP, table, sink);
            sink.end();
        }
    }
    if fence {
        sink.close_fence();
    }
}

fn glyph(d: &NotationDef, operator: bool) -> SymbolText<'_> {
    SymbolText::Glyph {
        glyph: &d.glyph,
        operator,
    }
}
