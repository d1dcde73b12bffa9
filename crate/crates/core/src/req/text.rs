//! Line-oriented `.req` format.
//!
//! ```text
//! type Count = int 0..2
//! type Event = enum { CONT ERROR }
//! const LIMIT : int = 3 min=0 max=9 tol=1
//! signal n : Count init=0
//! mode A { X Y } init { X }
//! def is_x "A is in X" := mode(A.X) at start
//! def twice(v) "doubles v" := v * 2
//! req 1.01 TRIGGER "X to Y" is_x => activate A.Y
//! req MS MODESET "A exclusive" A exclusive
//! req C1 CASE "count" is_x => [n < 2 -> n := n + 1] [true -> n := 0] total
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use super::expr::{BinOp, Expr, ModeQuery, TimePoint, Value};
use super::model::*;
use crate::spec_io::ParseError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReqLoadError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid model: {0}")]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    Sym(String),
    Punct(&'static str),
}

const PUNCTS: [&str; 24] = [
    ":=", "=>", "->", "<-", "<=", ">=", "!=", "..", "(", ")", ",", "=", "<", ">", "+", "-", "*",
    "/", ".", "{", "}", "[", "]", ":",
];

struct Lexer<'a> {
    line_no: usize,
    raw: &'a str,
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(line_no: usize, raw: &'a str, start: usize) -> Result<Self, ParseError> {
        let mut toks = Vec::new();
        let bytes = raw.as_bytes();
        let mut i = start;
        while i < bytes.len() {
            let c = bytes[i] as char;
            let col = i + 1;
            if c.is_whitespace() {
                i += 1;
            } else if c == '"' || c == '\'' {
                let end = raw[i + 1..]
                    .find(c)
                    .map(|e| i + 1 + e)
                    .ok_or_else(|| ParseError {
                        line: line_no,
                        column: col,
                        message: "unterminated literal".into(),
                        snippet: raw.to_owned(),
                    })?;
                let body = raw[i + 1..end].to_owned();
                toks.push((
                    col,
                    if c == '"' {
                        Tok::Str(body)
                    } else {
                        Tok::Sym(body)
                    },
                ));
                i = end + 1;
            } else if c.is_ascii_digit() {
                let end = raw[i..]
                    .find(|ch: char| !ch.is_ascii_digit())
                    .map_or(raw.len(), |e| i + e);
                let n = raw[i..end].parse().map_err(|_| ParseError {
                    line: line_no,
                    column: col,
                    message: "integer out of range".into(),
                    snippet: raw.to_owned(),
                })?;
                toks.push((col, Tok::Int(n)));
                i = end;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let end = raw[i..]
                    .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                    .map_or(raw.len(), |e| i + e);
                toks.push((col, Tok::Ident(raw[i..end].to_owned())));
                i = end;
            } else if let Some(p) = PUNCTS.iter().find(|p| raw[i..].starts_with(**p)) {
                toks.push((col, Tok::Punct(p)));
                i += p.len();
            } else {
                return Err(ParseError {
                    line: line_no,
                    column: col,
                    message: format!("unexpected character `{c}`"),
                    snippet: raw.to_owned(),
                });
            }
        }
        Ok(Lexer {
            line_no,
            raw,
            toks,
            pos: 0,
        })
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        let column = self
            .toks
            .get(self.pos)
            .map_or(self.raw.trim_end().len() + 1, |(c, _)| *c);
        ParseError {
            line: self.line_no,
            column,
            message: message.into(),
            snippet: self.raw.to_owned(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Tok::Punct(q)) if *q == p)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        let hit = self.is_punct(p);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        let hit = self.is_kw(kw);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), ParseError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{p}`")))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{kw}`")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn string(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Str(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err(format!("expected quoted {what}"))),
        }
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        let neg = self.eat_punct("-");
        match self.next() {
            Some(Tok::Int(n)) => Ok(if neg { -n } else { n }),
            _ => {
                self.pos -= 1;
                Err(self.err("expected an integer"))
            }
        }
    }

    fn nat(&mut self) -> Result<u32, ParseError> {
        match self.peek() {
            Some(Tok::Int(n)) if u32::try_from(*n).is_ok() => {
                let n = *n as u32;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.err("expected a natural number")),
        }
    }

    fn end(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }

    fn value(&mut self) -> Result<Value, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == "true" || s == "false" => {
                let b = s == "true";
                self.pos += 1;
                Ok(Value::Bool(b))
            }
            Some(Tok::Ident(s)) if s == "nil" => {
                self.pos += 1;
                Ok(Value::Nil)
            }
            Some(Tok::Sym(s)) => {
                let v = Value::Sym(s.clone());
                self.pos += 1;
                Ok(v)
            }
            _ => self.int().map(Value::Int),
        }
    }

    fn ident_list(&mut self) -> Result<Vec<String>, ParseError> {
        self.expect_punct("{")?;
        let mut out = Vec::new();
        while !self.eat_punct("}") {
            out.push(self.ident("a name or `}`")?);
        }
        Ok(out)
    }

    // expression grammar, loosest first

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.or_expr()?;
        if self.eat_kw("implies") {
            let rhs = self.expr()?;
            return Ok(Expr::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.and_expr()?;
        while self.eat_kw("or") {
            e = Expr::or(e, self.and_expr()?);
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.not_expr()?;
        while self.eat_kw("and") {
            e = Expr::and(e, self.not_expr()?);
        }
        Ok(e)
    }

    fn not_expr(&mut self) -> Result<Expr, ParseError> {
        if self.eat_kw("not") {
            return Ok(Expr::not(self.not_expr()?));
        }
        self.cmp_expr()
    }

    fn cmp_expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Some(Tok::Punct("=")) => BinOp::Eq,
            Some(Tok::Punct("!=")) => BinOp::Ne,
            Some(Tok::Punct("<")) => BinOp::Lt,
            Some(Tok::Punct("<=")) => BinOp::Le,
            Some(Tok::Punct(">")) => BinOp::Gt,
            Some(Tok::Punct(">=")) => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.pos += 1;
        Ok(Expr::bin(op, lhs, self.add_expr()?))
    }

    fn add_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Punct("+")) => BinOp::Add,
                Some(Tok::Punct("-")) => BinOp::Sub,
                _ => return Ok(e),
            };
            self.pos += 1;
            e = Expr::bin(op, e, self.mul_expr()?);
        }
    }

    fn mul_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Punct("*")) => BinOp::Mul,
                Some(Tok::Punct("/")) => BinOp::Div,
                _ => return Ok(e),
            };
            self.pos += 1;
            e = Expr::bin(op, e, self.unary()?);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat_punct("-") {
            if let Some(Tok::Int(n)) = self.peek() {
                let n = -*n;
                self.pos += 1;
                return Ok(Expr::Int(n));
            }
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.next() {
            Some(Tok::Int(n)) => Ok(Expr::Int(n)),
            Some(Tok::Sym(s)) => Ok(Expr::Sym(s)),
            Some(Tok::Punct("(")) => {
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Some(Tok::Ident(s)) => match s.as_str() {
                "true" => Ok(Expr::Bool(true)),
                "false" => Ok(Expr::Bool(false)),
                "nil" => Ok(Expr::Nil),
                "old" => {
                    self.expect_punct("(")?;
                    let name = self.ident("a signal name")?;
                    self.expect_punct(")")?;
                    Ok(Expr::Old(name))
                }
                "mode" => self.mode_expr(),
                _ if self.eat_punct("(") => {
                    let mut args = Vec::new();
                    if !self.eat_punct(")") {
                        loop {
                            args.push(self.expr()?);
                            if self.eat_punct(")") {
                                break;
                            }
                            self.expect_punct(",")?;
                        }
                    }
                    Ok(Expr::Call(s, args))
                }
                _ => Ok(Expr::Ref(s)),
            },
            _ => {
                self.pos -= 1;
                Err(self.err("expected an expression"))
            }
        }
    }

    fn mode_ref(&mut self) -> Result<(String, String), ParseError> {
        let component = self.ident("a mode component")?;
        self.expect_punct(".")?;
        let mode = self.ident("a mode name")?;
        Ok((component, mode))
    }

    fn mode_expr(&mut self) -> Result<Expr, ParseError> {
        self.expect_punct("(")?;
        let (component, mode) = self.mode_ref()?;
        self.expect_punct(")")?;
        let status = |lx: &mut Self| {
            if lx.eat_kw("inactive") {
                false
            } else {
                lx.eat_kw("active");
                true
            }
        };
        let (query, active) = if self.eat_kw("becomes") {
            (ModeQuery::Becomes, status(self))
        } else if self.eat_kw("ever") {
            (ModeQuery::Ever, status(self))
        } else {
            let active = status(self);
            self.expect_kw("at")?;
            let at = if self.eat_kw("start") {
                TimePoint::Start
            } else if self.eat_kw("end") {
                TimePoint::End
            } else {
                return Err(self.err("expected `start` or `end`"));
            };
            (ModeQuery::At(at), active)
        };
        Ok(Expr::Mode {
            component,
            mode,
            query,
            active,
        })
    }

    fn effects(&mut self) -> Result<Vec<Effect>, ParseError> {
        if self.eat_kw("nothing") {
            return Ok(Vec::new());
        }
        let mut out = vec![self.effect()?];
        while self.eat_punct(",") {
            out.push(self.effect()?);
        }
        Ok(out)
    }

    fn effect(&mut self) -> Result<Effect, ParseError> {
        if self.eat_kw("activate") {
            let (component, mode) = self.mode_ref()?;
            return Ok(Effect::Activate { component, mode });
        }
        if self.eat_kw("deactivate") {
            let (component, mode) = self.mode_ref()?;
            return Ok(Effect::Deactivate { component, mode });
        }
        if self.eat_kw("sync") {
            let target = self.ident("a signal name")?;
            self.expect_punct("<-")?;
            let source = self.ident("a signal name")?;
            return Ok(Effect::Sync { target, source });
        }
        let target = self.ident("an effect")?;
        self.expect_punct(":=")?;
        Ok(Effect::Assign {
            target,
            value: self.expr()?,
        })
    }
}

fn raw_word(raw: &str, from: usize) -> (usize, &str, usize) {
    let rest = &raw[from..];
    let lead = rest.len() - rest.trim_start().len();
    let start = from + lead;
    let len = raw[start..]
        .find(|c: char| c.is_whitespace() || c == '(')
        .unwrap_or(raw.len() - start);
    (start, &raw[start..start + len], start + len)
}

/// Parses `.req` text. The result is validated.
pub fn parse_req(text: &str) -> Result<RequirementsModel, ReqLoadError> {
    let mut dict = DataDictionary::default();
    let mut defs = Vec::new();
    let mut reqs = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let raw = raw_line.trim_end_matches('\r');
        let content = match raw.find('#') {
            Some(h) if !in_literal(raw, h) => &raw[..h],
            _ => raw,
        };
        if content.trim().is_empty() {
            continue;
        }
        let (kcol, keyword, after_kw) = raw_word(content, 0);
        match keyword {
            "def" => {
                let (icol, id, after) = raw_word(content, after_kw);
                if id.is_empty() {
                    return Err(err_at(line_no, icol + 1, "expected a definition id", raw).into());
                }
                let mut lx = Lexer::new(line_no, content, after)?;
                let mut params = Vec::new();
                if lx.eat_punct("(") && !lx.eat_punct(")") {
                    loop {
                        params.push(lx.ident("a parameter")?);
                        if lx.eat_punct(")") {
                            break;
                        }
                        lx.expect_punct(",")?;
                    }
                }
                let text = lx.string("description")?;
                lx.expect_punct(":=")?;
                let expr = lx.expr()?;
                lx.end()?;
                defs.push(Definition {
                    id: id.to_owned(),
                    text,
                    params,
                    expr,
                });
            }
            "req" => {
                let (icol, id, after) = raw_word(content, after_kw);
                if id.is_empty() {
                    return Err(err_at(line_no, icol + 1, "expected a requirement id", raw).into());
                }
                let mut lx = Lexer::new(line_no, content, after)?;
                reqs.push(parse_requirement(id, &mut lx)?);
            }
            "type" | "const" | "signal" | "mode" => {
                let mut lx = Lexer::new(line_no, content, after_kw)?;
                match keyword {
                    "type" => dict.types.push(parse_type(&mut lx)?),
                    "const" => dict.constants.push(parse_const(&mut lx)?),
                    "signal" => dict.signals.push(parse_signal(&mut lx)?),
                    _ => {
                        let component = lx.ident("a component name")?;
                        let modes = lx.ident_list()?;
                        let initial = if lx.eat_kw("init") {
                            lx.ident_list()?
                        } else {
                            Vec::new()
                        };
                        lx.end()?;
                        dict.modes.push(ModeDef {
                            component,
                            modes,
                            initial,
                        });
                    }
                }
            }
            other => {
                return Err(
                    err_at(line_no, kcol + 1, &format!("unknown record `{other}`"), raw).into(),
                )
            }
        }
    }
    Ok(RequirementsModel::new(dict, defs, reqs)?)
}

fn in_literal(raw: &str, idx: usize) -> bool {
    let mut quote: Option<char> = None;
    for (i, c) in raw.char_indices() {
        if i == idx {
            return quote.is_some();
        }
        match quote {
            Some(q) if c == q => quote = None,
            None if c == '"' || c == '\'' => quote = Some(c),
            _ => {}
        }
    }
    false
}

fn err_at(line: usize, column: usize, message: &str, raw: &str) -> ParseError {
    ParseError {
        line,
        column,
        message: message.to_owned(),
        snippet: raw.to_owned(),
    }
}

fn parse_type(lx: &mut Lexer<'_>) -> Result<TypeDef, ParseError> {
    let name = lx.ident("a type name")?;
    lx.expect_punct("=")?;
    let kind = match lx.ident("`bool`, `int`, `enum` or `array`")?.as_str() {
        "bool" => TypeKind::Bool,
        "int" => {
            let (mut min, mut max) = (None, None);
            if !lx.at_end() {
                min = Some(lx.int()?);
                lx.expect_punct("..")?;
                max = Some(lx.int()?);
            }
            TypeKind::Int { min, max }
        }
        "enum" => TypeKind::Enum(lx.ident_list()?),
        "array" => {
            let element = lx.ident("an element type")?;
            lx.expect_punct("[")?;
            let len = lx.nat()?;
            lx.expect_punct("]")?;
            TypeKind::Array { element, len }
        }
        _ => {
            lx.pos -= 1;
            return Err(lx.err("expected `bool`, `int`, `enum` or `array`"));
        }
    };
    lx.end()?;
    Ok(TypeDef { name, kind })
}

fn bound_opts(lx: &mut Lexer<'_>, keys: &[&str]) -> Result<Vec<Option<i64>>, ParseError> {
    let mut out = vec![None; keys.len()];
    while let Some(Tok::Ident(k)) = lx.peek() {
        let Some(slot) = keys.iter().position(|x| x == k) else {
            break;
        };
        lx.pos += 1;
        lx.expect_punct("=")?;
        out[slot] = Some(lx.int()?);
    }
    Ok(out)
}

fn parse_const(lx: &mut Lexer<'_>) -> Result<ConstantDef, ParseError> {
    let name = lx.ident("a constant name")?;
    lx.expect_punct(":")?;
    let ty = lx.ident("a type")?;
    lx.expect_punct("=")?;
    let value = lx.value()?;
    let b = bound_opts(lx, &["min", "max", "tol"])?;
    lx.end()?;
    Ok(ConstantDef {
        name,
        ty,
        value,
        min: b[0],
        max: b[1],
        tolerance: b[2],
    })
}

fn parse_signal(lx: &mut Lexer<'_>) -> Result<SignalDef, ParseError> {
    let name = lx.ident("a signal name")?;
    lx.expect_punct(":")?;
    let ty = lx.ident("a type")?;
    let b = bound_opts(lx, &["min", "max"])?;
    let initial = if lx.eat_kw("init") {
        lx.expect_punct("=")?;
        lx.value()?
    } else {
        Value::Nil
    };
    lx.end()?;
    Ok(SignalDef {
        name,
        ty,
        min: b[0],
        max: b[1],
        initial,
    })
}

fn parse_requirement(id: &str, lx: &mut Lexer<'_>) -> Result<Requirement, ParseError> {
    let kind = lx.ident("a template name")?;
    let title = lx.string("title")?;
    let template = match kind.as_str() {
        "EVERY" => {
            lx.expect_punct("=>")?;
            Template::Every {
                required: lx.expr()?,
            }
        }
        "WHEN" => {
            let guard = lx.expr()?;
            lx.expect_punct("=>")?;
            Template::When {
                guard,
                required: lx.expr()?,
            }
        }
        "TRIGGER" => {
            let trigger = lx.expr()?;
            lx.expect_punct("=>")?;
            let response = if lx.eat_kw("require") {
                Response::Require(lx.expr()?)
            } else {
                Response::Effects(lx.effects()?)
            };
            let within = if lx.eat_kw("within") {
                Some(lx.nat()?)
            } else {
                None
            };
            let at_some_point = lx.eat_kw("atsomepoint");
            Template::TriggerOnEvent {
                trigger,
                response,
                within,
                at_some_point,
            }
        }
        "LATCH" => {
            let signal = lx.ident("a signal name")?;
            lx.expect_punct(":=")?;
            let value = lx.expr()?;
            lx.expect_kw("when")?;
            Template::Latch {
                signal,
                value,
                condition: lx.expr()?,
            }
        }
        "ONCHANGE" => {
            let signal = lx.ident("a signal name")?;
            lx.expect_punct("=>")?;
            if lx.eat_kw("do") {
                Template::TriggerOnChange {
                    signal,
                    required: Expr::Bool(true),
                    effects: lx.effects()?,
                }
            } else {
                Template::TriggerOnChange {
                    signal,
                    required: lx.expr()?,
                    effects: Vec::new(),
                }
            }
        }
        "MODESET" => {
            let component = lx.ident("a mode component")?;
            let exclusive = if lx.eat_kw("exclusive") {
                true
            } else if lx.eat_kw("shared") {
                false
            } else {
                return Err(lx.err("expected `exclusive` or `shared`"));
            };
            Template::ModeSet {
                component,
                exclusive,
            }
        }
        "CASE" => {
            let guard = lx.expr()?;
            lx.expect_punct("=>")?;
            let mut branches = Vec::new();
            while lx.eat_punct("[") {
                let condition = lx.expr()?;
                lx.expect_punct("->")?;
                let effects = lx.effects()?;
                lx.expect_punct("]")?;
                branches.push(CaseBranch { condition, effects });
            }
            let total = lx.eat_kw("total");
            Template::Case {
                guard,
                branches,
                total,
            }
        }
        _ => {
            lx.pos -= 2;
            return Err(lx.err(format!("unknown template `{kind}`")));
        }
    };
    lx.end()?;
    Ok(Requirement {
        id: id.to_owned(),
        title,
        template,
    })
}

// printing

/// Renders an expression so that parsing it yields the same tree.
pub fn expr_to_string(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0);
    s
}

const NOT_PREC: u8 = 4;
const UNARY_PREC: u8 = 8;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(op, ..) => op.precedence(),
        Expr::Not(_) => NOT_PREC,
        Expr::Neg(_) => UNARY_PREC,
        Expr::Int(n) if *n < 0 => UNARY_PREC,
        _ => 9,
    }
}

fn write_expr(out: &mut String, e: &Expr, min_prec: u8) {
    let paren = prec(e) < min_prec;
    if paren {
        out.push('(');
    }
    match e {
        Expr::Bool(b) => write!(out, "{b}").unwrap(),
        Expr::Int(n) => write!(out, "{n}").unwrap(),
        Expr::Nil => out.push_str("nil"),
        Expr::Sym(s) => write!(out, "'{s}'").unwrap(),
        Expr::Ref(n) => out.push_str(n),
        Expr::Old(n) => write!(out, "old({n})").unwrap(),
        Expr::Call(n, args) => {
            write!(out, "{n}(").unwrap();
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a, 0);
            }
            out.push(')');
        }
        Expr::Not(inner) => {
            out.push_str("not ");
            write_expr(out, inner, NOT_PREC);
        }
        Expr::Neg(inner) => {
            out.push('-');
            let wrap = matches!(**inner, Expr::Int(_)) || prec(inner) < 9;
            if wrap {
                out.push('(');
                write_expr(out, inner, 0);
                out.push(')');
            } else {
                write_expr(out, inner, UNARY_PREC);
            }
        }
        Expr::Bin(op, l, r) => {
            let p = op.precedence();
            let (lp, rp) = match op {
                BinOp::Implies => (p + 1, p),
                BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    (p + 1, p + 1)
                }
                _ => (p, p + 1),
            };
            write_expr(out, l, lp);
            write!(out, " {} ", op.symbol()).unwrap();
            write_expr(out, r, rp);
        }
        Expr::Mode {
            component,
            mode,
            query,
            active,
        } => {
            let status = if *active { "active" } else { "inactive" };
            match query {
                ModeQuery::At(TimePoint::Start) => {
                    write!(out, "mode({component}.{mode}) {status} at start").unwrap()
                }
                ModeQuery::At(TimePoint::End) => {
                    write!(out, "mode({component}.{mode}) {status} at end").unwrap()
                }
                ModeQuery::Becomes => {
                    write!(out, "mode({component}.{mode}) becomes {status}").unwrap()
                }
                ModeQuery::Ever => write!(out, "mode({component}.{mode}) ever {status}").unwrap(),
            }
        }
    }
    if paren {
        out.push(')');
    }
}

fn value_to_string(v: &Value) -> String {
    v.to_string()
}

fn effects_to_string(effects: &[Effect]) -> String {
    if effects.is_empty() {
        return "nothing".into();
    }
    effects
        .iter()
        .map(|e| match e {
            Effect::Assign { target, value } => format!("{target} := {}", expr_to_string(value)),
            Effect::Activate { component, mode } => format!("activate {component}.{mode}"),
            Effect::Deactivate { component, mode } => format!("deactivate {component}.{mode}"),
            Effect::Sync { target, source } => format!("sync {target} <- {source}"),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn opt_bounds(pairs: &[(&str, Option<i64>)]) -> String {
    pairs
        .iter()
        .filter_map(|(k, v)| v.map(|v| format!(" {k}={v}")))
        .collect()
}

pub fn requirement_to_string(r: &Requirement) -> String {
    let head = format!("req {} {} \"{}\"", r.id, r.template.name(), r.title);
    let body = match &r.template {
        Template::Every { required } => format!("=> {}", expr_to_string(required)),
        Template::When { guard, required } => {
            format!("{} => {}", expr_to_string(guard), expr_to_string(required))
        }
        Template::TriggerOnEvent {
            trigger,
            response,
            within,
            at_some_point,
        } => {
            let mut s = format!("{} => ", expr_to_string(trigger));
            match response {
                Response::Effects(effs) => s.push_str(&effects_to_string(effs)),
                Response::Require(c) => write!(s, "require {}", expr_to_string(c)).unwrap(),
            }
            if let Some(n) = within {
                write!(s, " within {n}").unwrap();
            }
            if *at_some_point {
                s.push_str(" atsomepoint");
            }
            s
        }
        Template::Latch {
            signal,
            value,
            condition,
        } => format!(
            "{signal} := {} when {}",
            expr_to_string(value),
            expr_to_string(condition)
        ),
        Template::TriggerOnChange {
            signal,
            required,
            effects,
        } => {
            if effects.is_empty() {
                format!("{signal} => {}", expr_to_string(required))
            } else {
                format!("{signal} => do {}", effects_to_string(effects))
            }
        }
        Template::ModeSet {
            component,
            exclusive,
        } => format!(
            "{component} {}",
            if *exclusive { "exclusive" } else { "shared" }
        ),
        Template::Case {
            guard,
            branches,
            total,
        } => {
            let mut s = format!("{} =>", expr_to_string(guard));
            for b in branches {
                write!(
                    s,
                    " [{} -> {}]",
                    expr_to_string(&b.condition),
                    effects_to_string(&b.effects)
                )
                .unwrap();
            }
            if *total {
                s.push_str(" total");
            }
            s
        }
    };
    format!("{head} {body}")
}

/// Canonical `.req` text. `parse_req(&serialize_req(m)) == Ok(m)`.
pub fn serialize_req(model: &RequirementsModel) -> String {
    let mut out = String::new();
    let d = model.dictionary();
    for t in &d.types {
        let kind = match &t.kind {
            TypeKind::Bool => "bool".to_owned(),
            TypeKind::Int { min, max } => match (min, max) {
                (Some(a), Some(b)) => format!("int {a}..{b}"),
                _ => "int".to_owned(),
            },
            TypeKind::Enum(vs) => format!("enum {{ {} }}", vs.join(" ")),
            TypeKind::Array { element, len } => format!("array {element} [{len}]"),
        };
        writeln!(out, "type {} = {kind}", t.name).unwrap();
    }
    for c in &d.constants {
        writeln!(
            out,
            "const {} : {} = {}{}",
            c.name,
            c.ty,
            value_to_string(&c.value),
            opt_bounds(&[("min", c.min), ("max", c.max), ("tol", c.tolerance)])
        )
        .unwrap();
    }
    for s in &d.signals {
        write!(
            out,
            "signal {} : {}{}",
            s.name,
            s.ty,
            opt_bounds(&[("min", s.min), ("max", s.max)])
        )
        .unwrap();
        if s.initial != Value::Nil {
            write!(out, " init={}", value_to_string(&s.initial)).unwrap();
        }
        out.push('\n');
    }
    for m in &d.modes {
        write!(out, "mode {} {{ {} }}", m.component, m.modes.join(" ")).unwrap();
        if !m.initial.is_empty() {
            write!(out, " init {{ {} }}", m.initial.join(" ")).unwrap();
        }
        out.push('\n');
    }
    for def in model.definitions() {
        let params = if def.params.is_empty() {
            String::new()
        } else {
            format!("({})", def.params.join(", "))
        };
        writeln!(
            out,
            "def {}{params} \"{}\" := {}",
            def.id,
            def.text,
            expr_to_string(&def.expr)
        )
        .unwrap();
    }
    for r in model.requirements() {
        out.push_str(&requirement_to_string(r));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
# sample model
type Count = int 0..2
type Event = enum { CONT ERROR }
type Flags = array bool [4]
const LIMIT : int = 3 min=0 max=9 tol=1
signal n : Count init=0
signal m : Count init=0
signal ev : Event init='CONT'
mode A { X Y } init { X }
def is_x "A is in X" := mode(A.X) at start
def twice(v) "doubles v" := v * 2
req 1.01 TRIGGER "X to Y" is_x and ev = 'CONT' => activate A.Y
req MS MODESET "A exclusive" A exclusive
req EV EVERY "never both" => not (mode(A.X) at end and mode(A.Y) at end)
req W WHEN "bounded" is_x => n <= twice(1) implies m >= 0
req C CASE "count" is_x => [n < 2 -> m := n + 1] [true -> m := 0] total
req S TRIGGER "commit" is_x => sync n <- m within 0
req L LATCH "latch" n := 0 when mode(A.Y) becomes active
req O ONCHANGE "watch" n => n = old(n) + 1
req R TRIGGER "eventually" true => require mode(A.Y) ever active atsomepoint
"#;

    #[test]
    fn parses_sample() {
        let m = parse_req(SAMPLE).unwrap();
        assert_eq!(m.dictionary().record_count(), 8);
        assert_eq!(m.definitions().len(), 2);
        assert_eq!(m.requirements().len(), 9);
        assert_eq!(m.requirement("1.01").unwrap().title, "X to Y");
    }

    #[test]
    fn round_trip() {
        let m = parse_req(SAMPLE).unwrap();
        let text = serialize_req(&m);
        assert_eq!(parse_req(&text).unwrap(), m);
        assert_eq!(serialize_req(&parse_req(&text).unwrap()), text);
    }

    #[test]
    fn precedence_printing() {
        let cases = [
            "(a or b) and c",
            "a implies b implies c",
            "(a implies b) implies c",
            "a - (b - c)",
            "a - b - c",
            "not (a = b)",
            "-(3)",
            "-x * 2",
            "(a = b) = c",
        ];
        for src in cases {
            let mut lx = Lexer::new(1, src, 0).unwrap();
            let e = lx.expr().unwrap();
            let printed = expr_to_string(&e);
            let mut lx2 = Lexer::new(1, &printed, 0).unwrap();
            assert_eq!(lx2.expr().unwrap(), e, "{src} -> {printed}");
        }
    }

    #[test]
    fn error_positions() {
        let err = parse_req("signal n : int\nreq X WHEN \"t\" n = => true\n").unwrap_err();
        match err {
            ReqLoadError::Parse(p) => {
                assert_eq!(p.line, 2);
                assert_eq!(p.column, 20);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_req("bogus line"),
            Err(ReqLoadError::Parse(ParseError {
                line: 1,
                column: 1,
                ..
            }))
        ));
    }

    #[test]
    fn load_time_end_read_rejected() {
        let src = "mode A { X } init { X }\nreq W WHEN \"t\" mode(A.X) at end => true\n";
        assert_eq!(
            parse_req(src).unwrap_err(),
            ReqLoadError::Model(ModelError::IllegalEndOfRoundRead("W".into()))
        );
    }
}
