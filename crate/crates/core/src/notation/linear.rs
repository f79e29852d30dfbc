//! Linear text form. Written by the shared layout, read back by a
//! precedence-climbing parser over the same table.

use base64::Engine;
use num_bigint::BigInt;

use super::layout::{lay_out, Punct, Sink, SymbolText};
use super::table::{is_ident_char, Assoc, Fixity, NotationTable, CALL_PRECEDENCE};
use super::NotationError;
use crate::om::{OMObject, Symbol};
use crate::xml::line_col;

/// Plain-text rendering of `o` under `table`, with only the brackets the
/// precedences require.
pub fn linearize(o: &OMObject, table: &NotationTable) -> String {
    linearize_with_fences(o, table).0
}

/// Like [`linearize`], also returning the byte offsets of every bracket
/// pair inserted for precedence (call parentheses are not included).
pub fn linearize_with_fences(o: &OMObject, table: &NotationTable) -> (String, Vec<(usize, usize)>) {
    let mut w = TextSink {
        out: String::new(),
        table,
        open: Vec::new(),
        fences: Vec::new(),
    };
    lay_out(o, table, &mut w);
    (w.out, w.fences)
}

struct TextSink<'t> {
    out: String,
    table: &'t NotationTable,
    open: Vec<usize>,
    fences: Vec<(usize, usize)>,
}

impl TextSink<'_> {
    fn push(&mut self, tok: &str) {
        let (Some(last), Some(first)) = (self.out.chars().next_back(), tok.chars().next()) else {
            self.out.push_str(tok);
            return;
        };
        if is_ident_char(last) && (is_ident_char(first) || first == '#') {
            self.out.push(' ');
        }
        self.out.push_str(tok);
    }
}

impl Sink for TextSink<'_> {
    fn leaf(&mut self, o: &OMObject, _id: usize) {
        let tok = match o {
            OMObject::Integer(v) => v.to_string(),
            OMObject::Float(v) if v.is_finite() => format!("{v:?}"),
            OMObject::Float(v) => format!("#f{:016X}", v.to_bits()),
            OMObject::Str(s) => quote_string(s),
            OMObject::Bytes(b) => format!("#\"{}\"", base64::engine::general_purpose::STANDARD.encode(b)),
            OMObject::Variable(v) => var_text(v, self.table),
            _ => unreachable!("compound objects are laid out elsewhere"),
        };
        self.push(&tok);
    }

    fn symbol(&mut self, s: &Symbol, text: SymbolText<'_>, _id: usize) {
        match text {
            SymbolText::Glyph { glyph, .. } => self.push(glyph),
            SymbolText::Ref => {
                let tok = format!("{}#{}", name_text(&s.cd), name_text(&s.name));
                self.push(&tok)
            }
        }
    }

    fn bvar(&mut self, name: &str) {
        let tok = var_text(name, self.table);
        self.push(&tok);
    }

    fn punct(&mut self, p: Punct) {
        self.push(match p {
            Punct::CallOpen => "(",
            Punct::CallClose => ")",
            Punct::ArgSep => ", ",
            Punct::VarSep => ",",
            Punct::Dot => ".",
            Punct::BinderOpen => "[",
            Punct::BinderClose => "]",
        });
    }

    fn open_fence(&mut self) {
        self.push("(");
        self.open.push(self.out.len() - 1);
    }

    fn close_fence(&mut self) {
        self.push(")");
        let start = self.open.pop().expect("balanced fences");
        self.fences.push((start, self.out.len() - 1));
    }
}

fn is_simple(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if is_ident_char(c) && !c.is_numeric()) && chars.all(is_ident_char)
}

fn backtick(name: &str) -> String {
    let mut out = String::with_capacity(name.len() + 2);
    out.push('`');
    for c in name.chars() {
        if c == '`' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('`');
    out
}

fn name_text(name: &str) -> String {
    if is_simple(name) {
        name.to_string()
    } else {
        backtick(name)
    }
}

fn var_text(name: &str, table: &NotationTable) -> String {
    if is_simple(name) && !table.is_operand_word(name) {
        name.to_string()
    } else {
        backtick(name)
    }
}

fn quote_string(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c.is_control() => out.push_str(&format!("\\u{{{:x}}}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Read the linear form back into an object.
pub fn parse_linear(text: &str, table: &NotationTable) -> Result<OMObject, NotationError> {
    let mut p = Parser { src: text, pos: 0, table };
    let o = p.expr(0)?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.error("end of input"));
    }
    Ok(o)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    table: &'a NotationTable,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn error(&self, expected: &str) -> NotationError {
        let (line, column) = line_col(self.src, self.pos);
        let found = match self.peek() {
            Some(c) => format!("'{c}'"),
            None => "end of input".to_string(),
        };
        NotationError::Parse {
            line,
            column,
            message: format!("expected {expected}, found {found}"),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), NotationError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("'{c}'")))
        }
    }

    fn expr(&mut self, min: u32) -> Result<OMObject, NotationError> {
        let mut left = self.primary()?;
        let mut after_none: Option<u32> = None;
        loop {
            self.skip_ws();
            if self.peek() == Some('(') {
                if CALL_PRECEDENCE < min {
                    break;
                }
                self.pos += 1;
                let mut els = vec![left];
                els.extend(self.args(')')?);
                left = OMObject::Application(els);
                after_none = None;
                continue;
            }
            let Some(def) = self.table.match_operator(self.rest()) else {
                break;
            };
            let p = def.precedence;
            if p < min {
                break;
            }
            if after_none == Some(p) {
                return Err(self.error("no further operator of the same precedence after a non-associative one"));
            }
            self.pos += def.glyph.len();
            let op = OMObject::Symbol(Symbol::new(&def.symbol.cd, &def.symbol.name));
            after_none = None;
            left = match def.fixity {
                Fixity::Infix => {
                    let rmin = if def.assoc == Some(Assoc::Right) { p } else { p + 1 };
                    let right = self.expr(rmin)?;
                    if def.assoc == Some(Assoc::None) {
                        after_none = Some(p);
                    }
                    OMObject::Application(vec![op, left, right])
                }
                _ => OMObject::Application(vec![op, left]),
            };
        }
        Ok(left)
    }

    /// Comma-separated expressions up to `close`; the opener is consumed.
    fn args(&mut self, close: char) -> Result<Vec<OMObject>, NotationError> {
        let mut out = Vec::new();
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            out.push(self.expr(0)?);
            if self.eat(close) {
                return Ok(out);
            }
            if !self.eat(',') {
                return Err(self.error(&format!("',' or '{close}'")));
            }
        }
    }

    fn primary(&mut self) -> Result<OMObject, NotationError> {
        self.skip_ws();
        let Some(c) = self.peek() else {
            return Err(self.error("an expression"));
        };
        match c {
            '(' => {
                self.pos += 1;
                let e = self.expr(0)?;
                self.expect(')')?;
                return Ok(e);
            }
            '[' => {
                self.pos += 1;
                let binder = self.expr(0)?;
                self.expect(']')?;
                return self.binding(binder);
            }
            '"' => return self.string().map(OMObject::Str),
            '#' => return self.hash_literal(),
            '`' => {
                let name = self.name()?;
                return self.after_name(name);
            }
            '-' => return self.number(),
            c if c.is_ascii_digit() => return self.number(),
            _ => {}
        }
        let run = self.ident_run();
        if !run.is_empty() && self.rest()[run.len()..].starts_with('#') {
            let name = self.name()?;
            return self.after_name(name);
        }
        if let Some(def) = self.table.match_operand(self.rest()) {
            self.pos += def.glyph.len();
            let sym = OMObject::Symbol(Symbol::new(&def.symbol.cd, &def.symbol.name));
            return match def.fixity {
                Fixity::Prefix => {
                    let operand = self.expr(def.precedence)?;
                    Ok(OMObject::Application(vec![sym, operand]))
                }
                Fixity::Binder => self.binding(sym),
                _ => Ok(sym),
            };
        }
        if is_simple(run) {
            self.pos += run.len();
            return Ok(OMObject::Variable(run.to_string()));
        }
        Err(self.error("an expression"))
    }

    fn ident_run(&self) -> &'a str {
        let rest = self.rest();
        let end = rest.find(|c: char| !is_ident_char(c)).unwrap_or(rest.len());
        &rest[..end]
    }

    /// A bare identifier or a backtick-quoted name.
    fn name(&mut self) -> Result<String, NotationError> {
        self.skip_ws();
        if self.peek() == Some('`') {
            self.pos += 1;
            let mut out = String::new();
            let mut chars = self.rest().char_indices();
            while let Some((i, c)) = chars.next() {
                match c {
                    '`' => {
                        self.pos += i + 1;
                        return Ok(out);
                    }
                    '\\' => match chars.next() {
                        Some((_, e)) => out.push(e),
                        None => break,
                    },
                    c => out.push(c),
                }
            }
            self.pos = self.src.len();
            return Err(self.error("closing '`'"));
        }
        let run = self.ident_run();
        if run.is_empty() {
            return Err(self.error("a name"));
        }
        self.pos += run.len();
        Ok(run.to_string())
    }

    /// A name followed by `#name` is a symbol reference, otherwise a variable.
    fn after_name(&mut self, first: String) -> Result<OMObject, NotationError> {
        if self.peek() == Some('#') {
            self.pos += 1;
            let second = self.name()?;
            Ok(OMObject::Symbol(Symbol::new(first, second)))
        } else {
            Ok(OMObject::Variable(first))
        }
    }

    fn binding(&mut self, binder: OMObject) -> Result<OMObject, NotationError> {
        let mut bvars = Vec::new();
        if !self.eat('.') {
            loop {
                bvars.push(self.name()?);
                if self.eat('.') {
                    break;
                }
                if !self.eat(',') {
                    return Err(self.error("',' or '.'"));
                }
            }
        }
        let body = self.expr(0)?;
        Ok(OMObject::Binding {
            binder: Box::new(binder),
            bvars,
            body: Box::new(body),
        })
    }

    fn string(&mut self) -> Result<String, NotationError> {
        self.pos += 1;
        let mut out = String::new();
        loop {
            let Some(c) = self.peek() else {
                return Err(self.error("closing '\"'"));
            };
            self.pos += c.len_utf8();
            match c {
                '"' => return Ok(out),
                '\\' => {
                    let Some(e) = self.peek() else {
                        return Err(self.error("an escape"));
                    };
                    self.pos += e.len_utf8();
                    match e {
                        'n' => out.push('\n'),
                        't' => out.push('\t'),
                        'r' => out.push('\r'),
                        'u' => {
                            let rest = self.rest();
                            let code = rest
                                .strip_prefix('{')
                                .and_then(|r| r.split_once('}'))
                                .and_then(|(hex, _)| u32::from_str_radix(hex, 16).ok().map(|v| (hex.len(), v)))
                                .and_then(|(n, v)| char::from_u32(v).map(|c| (n, c)));
                            let Some((n, ch)) = code else {
                                return Err(self.error("a \\u{...} escape"));
                            };
                            self.pos += n + 2;
                            out.push(ch);
                        }
                        other => out.push(other),
                    }
                }
                c => out.push(c),
            }
        }
    }

    fn hash_literal(&mut self) -> Result<OMObject, NotationError> {
        self.pos += 1;
        match self.peek() {
            Some('"') => {
                self.pos += 1;
                let rest = self.rest();
                let Some(end) = rest.find('"') else {
                    return Err(self.error("closing '\"'"));
                };
                let bytes = base64::engine::general_purpose::STANDARD
                    .decode(&rest[..end])
                    .map_err(|_| self.error("base64 data"))?;
                self.pos += end + 1;
                Ok(OMObject::Bytes(bytes))
            }
            Some('f') => {
                self.pos += 1;
                let hex = self.rest().get(..16).filter(|h| h.chars().all(|c| c.is_ascii_hexdigit()));
                let Some(hex) = hex else {
                    return Err(self.error("16 hex digits"));
                };
                let bits = u64::from_str_radix(hex, 16).expect("checked hex");
                self.pos += 16;
                Ok(OMObject::Float(f64::from_bits(bits)))
            }
            _ => Err(self.error("'\"' or 'f' after '#'")),
        }
    }

    fn number(&mut self) -> Result<OMObject, NotationError> {
        let rest = self.rest().as_bytes();
        let mut i = usize::from(rest.first() == Some(&b'-'));
        let digits = |from: usize| rest[from..].iter().take_while(|b| b.is_ascii_digit()).count();
        let n = digits(i);
        if n == 0 {
            return Err(self.error("a number"));
        }
        i += n;
        let mut float = false;
        if rest.get(i) == Some(&b'.') && digits(i + 1) > 0 {
            i += 1 + digits(i + 1);
            float = true;
        }
        if matches!(rest.get(i), Some(b'e' | b'E')) {
            let mut j = i + 1;
            if matches!(rest.get(j), Some(b'+' | b'-')) {
                j += 1;
            }
            if digits(j) > 0 {
                i = j + digits(j);
                float = true;
            }
        }
        let tok = &self.rest()[..i];
        let o = if float {
            OMObject::Float(tok.parse().map_err(|_| self.error("a number"))?)
        } else {
            OMObject::Integer(tok.parse::<BigInt>().map_err(|_| self.error("a number"))?)
        };
        self.pos += i;
        Ok(o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::notation::NotationDef;

    fn table() -> NotationTable {
        NotationTable::new([
            NotationDef::infix("arith1", "plus", "+", 500, Assoc::Left),
            NotationDef::infix("arith1", "minus", "-", 500, Assoc::Left),
            NotationDef::infix("arith1", "power", "^", 800, Assoc::Right),
            NotationDef::prefix("arith1", "unary_minus", "−", 700),
            NotationDef::postfix("integer1", "factorial", "!", 900),
            NotationDef::infix("relation1", "eq", "=", 200, Assoc::None),
            NotationDef::binder("quant1", "forall", "∀"),
            NotationDef::prefix("logic1", "not", "not", 100),
            NotationDef::function("transc1", "sin", "sin"),
        ])
        .unwrap()
    }

    fn plus(a: OMObject, b: OMObject) -> OMObject {
        OMObject::app(vec![OMObject::sym("arith1", "plus"), a, b])
    }

    fn v(n: &str) -> OMObject {
        OMObject::var(n)
    }

    fn round_trip(o: &OMObject) -> String {
        let t = table();
        let text = linearize(o, &t);
        assert_eq!(&parse_linear(&text, &t).unwrap(), o, "{text}");
        text
    }

    #[test]
    fn commutativity() {
        let body = OMObject::app(vec![
            OMObject::sym("relation1", "eq"),
            plus(v("a"), v("b")),
            plus(v("b"), v("a")),
        ]);
        let o = OMObject::bind(OMObject::sym("quant1", "forall"), &["a", "b"], body);
        assert_eq!(round_trip(&o), "∀a,b.a+b=b+a");
    }

    #[test]
    fn associativity_brackets() {
        assert_eq!(round_trip(&plus(v("a"), plus(v("b"), v("c")))), "a+(b+c)");
        assert_eq!(round_trip(&plus(plus(v("a"), v("b")), v("c"))), "a+b+c");
        let pow = |a, b| OMObject::app(vec![OMObject::sym("arith1", "power"), a, b]);
        assert_eq!(round_trip(&pow(v("a"), pow(v("b"), v("c")))), "a^b^c");
        assert_eq!(round_trip(&pow(pow(v("a"), v("b")), v("c"))), "(a^b)^c");
        let eq = |a, b| OMObject::app(vec![OMObject::sym("relation1", "eq"), a, b]);
        assert_eq!(round_trip(&eq(eq(v("a"), v("b")), v("c"))), "(a=b)=c");
    }

    #[test]
    fn default_notation_and_atoms() {
        let o = OMObject::app(vec![OMObject::sym("set1", "in"), v("x"), OMObject::int(-3), OMObject::Float(1.5)]);
        assert_eq!(round_trip(&o), "set1#in(x, -3, 1.5)");
        assert_eq!(round_trip(&OMObject::int(5)), "5");
        round_trip(&OMObject::Str("a \"q\"\n".into()));
        round_trip(&OMObject::Bytes(vec![0, 1, 255]));
        round_trip(&OMObject::Float(f64::NAN));
        round_trip(&OMObject::var("not"));
        round_trip(&OMObject::var("a.b-c"));
        round_trip(&OMObject::app(vec![OMObject::sym("logic1", "not"), OMObject::sym("logic1", "true")]));
        round_trip(&OMObject::app(vec![OMObject::sym("logic1", "not"), OMObject::Bytes(vec![1])]));
        round_trip(&OMObject::app(vec![OMObject::sym("transc1", "sin"), v("x")]));
        round_trip(&OMObject::bind(v("lambda"), &[], v("x")));
        round_trip(&plus(v("a"), OMObject::int(-1)));
    }

    #[test]
    fn chained_non_associative_is_an_error() {
        let err = parse_linear("a=b=c", &table()).unwrap_err();
        assert_eq!(err.code(), "ParseError");
        assert!(parse_linear("a+", &table()).is_err());
    }
}
