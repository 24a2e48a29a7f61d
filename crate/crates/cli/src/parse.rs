//! Expression language for functions and maps.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | number 'i' | 'z' | 'pi' | 'e' | 'i'
//!          | func '(' expr ')' | 'compose' '(' map ',' expr ')' | '(' expr ')'
//! map     := mapname '(' expr (',' expr)* ')' | 'compose' '(' map ',' map ')'
//! ```
//!
//! `compose(m, f)` is `f(m(z))`; for two maps `compose(m1, m2)` is `m2(m1(z))`.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;
use zerofree::{Complex, FuncExpr, MapExpr};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message} at position {pos}")]
pub struct ParseError {
    /// Byte offset into the input.
    pub pos: usize,
    pub message: String,
    pub suggestions: Vec<String>,
}

impl ParseError {
    fn new(pos: usize, message: impl Into<String>) -> Self {
        Self {
            pos,
            message: message.into(),
            suggestions: Vec::new(),
        }
    }

    /// The input with a caret under the offending position.
    pub fn render(&self, input: &str) -> String {
        let col = input[..self.pos.min(input.len())].chars().count();
        let mut out = format!("{input}\n{}^ {}", " ".repeat(col), self.message);
        if !self.suggestions.is_empty() {
            out.push_str(&format!(" (did you mean {}?)", self.suggestions.join(", ")));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    Affine,
    Moebius,
    Lens,
    Parabolic,
}

impl MapKind {
    fn name(self) -> &'static str {
        match self {
            MapKind::Affine => "affine",
            MapKind::Moebius => "moebius",
            MapKind::Lens => "lens",
            MapKind::Parabolic => "parabolic",
        }
    }

    fn arity(self) -> usize {
        match self {
            MapKind::Affine => 2,
            MapKind::Moebius => 4,
            MapKind::Lens | MapKind::Parabolic => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapAst {
    Call(MapKind, Vec<Expr>),
    /// First map, then second.
    Compose(Box<MapAst>, Box<MapAst>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Real(f64),
    /// `b i`
    Imag(f64),
    Var,
    Pi,
    E,
    I,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
    Compose(MapAst, Box<Expr>),
}

const FUNCS: [&str; 4] = ["exp", "sin", "cos", "compose"];
const MAPS: [&str; 5] = ["affine", "moebius", "lens", "parabolic", "compose"];
const ATOMS: [&str; 4] = ["z", "pi", "e", "i"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
}

impl<'a> Lexer<'a> {
    fn run(src: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer { src, toks: Vec::new() };
        let bytes = src.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let ch = bytes[i] as char;
            if ch.is_ascii_whitespace() {
                i += 1;
            } else if ch.is_ascii_digit() || (ch == '.' && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit())) {
                i = lx.number(i)?;
            } else if ch.is_ascii_alphabetic() || ch == '_' {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                lx.toks.push((Tok::Ident(src[start..i].to_string()), start));
            } else if "+-*/^(),".contains(ch) {
                lx.toks.push((Tok::Sym(ch), i));
                i += 1;
            } else {
                let c = src[i..].chars().next().unwrap_or(ch);
                return Err(ParseError::new(i, format!("unexpected character '{c}'")));
            }
        }
        lx.toks.push((Tok::End, src.len()));
        Ok(lx.toks)
    }

    fn number(&mut self, start: usize) -> Result<usize, ParseError> {
        let b = self.src.as_bytes();
        let mut i = start;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i < b.len() && b[i] == b'.' {
            i += 1;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
        }
        if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
            let mut j = i + 1;
            if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                j += 1;
            }
            if j < b.len() && b[j].is_ascii_digit() {
                while j < b.len() && b[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = &self.src[start..i];
        let v: f64 = text
            .parse()
            .map_err(|_| ParseError::new(start, format!("malformed number '{text}'")))?;
        // `2i` is an imaginary literal, `2in` is not
        if i < b.len() && b[i] == b'i' && !b.get(i + 1).is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_') {
            self.toks.push((Tok::Imag(v), start));
            return Ok(i + 1);
        }
        self.toks.push((Tok::Num(v), start));
        Ok(i)
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

fn suggest(name: &str, pool: &[&str]) -> Vec<String> {
    // Jaro-Winkler misses single edits on very short names like "sn".
    let mut scored: Vec<(usize, f64, &str)> = pool
        .iter()
        .map(|&c| (strsim::damerau_levenshtein(name, c), strsim::jaro_winkler(name, c), c))
        .filter(|&(d, s, _)| s >= 0.7 || d <= 1)
        .collect();
    scored.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.total_cmp(&a.1)).then(a.2.cmp(b.2)));
    scored.into_iter().map(|(_, _, c)| c.to_string()).collect()
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected '{c}'")))
        }
    }

    fn unexpected(&self, what: &str) -> ParseError {
        let found = match self.peek() {
            Tok::End => "end of input".to_string(),
            Tok::Num(v) => format!("number {v}"),
            Tok::Imag(v) => format!("imaginary number {v}i"),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Sym(c) => format!("'{c}'"),
        };
        ParseError::new(self.pos(), format!("{what}, found {found}"))
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Real(v)),
            Tok::Imag(v) => Ok(Expr::Imag(v)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "z" => Ok(Expr::Var),
                "pi" => Ok(Expr::Pi),
                "e" => Ok(Expr::E),
                "i" => Ok(Expr::I),
                "exp" | "sin" | "cos" => {
                    let f = match name.as_str() {
                        "exp" => Func::Exp,
                        "sin" => Func::Sin,
                        _ => Func::Cos,
                    };
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    Ok(Expr::Call(f, Box::new(arg)))
                }
                "compose" => {
                    self.expect('(')?;
                    let m = self.map()?;
                    self.expect(',')?;
                    let f = self.expr()?;
                    self.expect(')')?;
                    Ok(Expr::Compose(m, Box::new(f)))
                }
                "affine" | "moebius" | "lens" | "parabolic" => Err(ParseError::new(
                    pos,
                    format!("map '{name}' used as a function; apply it with compose({name}(...), f)"),
                )),
                _ => {
                    let pool: Vec<&str> = ATOMS.iter().chain(FUNCS.iter()).copied().collect();
                    let mut e = ParseError::new(pos, format!("unknown identifier '{name}'"));
                    e.suggestions = suggest(&name, &pool);
                    Err(e)
                }
            },
            _ => {
                self.at -= usize::from(self.at > 0 && tok != Tok::End);
                if tok == Tok::End {
                    Err(ParseError::new(pos, "unexpected end of input"))
                } else {
                    Err(self.unexpected("expected an operand"))
                }
            }
        }
    }

    fn map(&mut self) -> Result<MapAst, ParseError> {
        let (tok, pos) = self.bump();
        let Tok::Ident(name) = tok else {
            if tok != Tok::End {
                self.at -= 1;
            }
            return Err(self.unexpected("expected a map"));
        };
        let kind = match name.as_str() {
            "affine" => MapKind::Affine,
            "moebius" => MapKind::Moebius,
            "lens" => MapKind::Lens,
            "parabolic" => MapKind::Parabolic,
            "compose" => {
                self.expect('(')?;
                let first = self.map()?;
                self.expect(',')?;
                let second = self.map()?;
                self.expect(')')?;
                return Ok(MapAst::Compose(Box::new(first), Box::new(second)));
            }
            _ => {
                let mut e = ParseError::new(pos, format!("unknown map '{name}'"));
                e.suggestions = suggest(&name, &MAPS);
                return Err(e);
            }
        };
        self.expect('(')?;
        let mut args = vec![self.expr()?];
        while self.eat(',') {
            args.push(self.expr()?);
        }
        let close = self.pos();
        self.expect(')')?;
        if args.len() != kind.arity() {
            return Err(ParseError::new(
                close,
                format!("{} takes {} argument(s), got {}", kind.name(), kind.arity(), args.len()),
            ));
        }
        Ok(MapAst::Call(kind, args))
    }

    fn finish<T>(&mut self, v: T) -> Result<T, ParseError> {
        if *self.peek() != Tok::End {
            return Err(self.unexpected("expected an operator or end of input"));
        }
        Ok(v)
    }
}

pub fn parse_expr(s: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: Lexer::run(s)?,
        at: 0,
    };
    let e = p.expr()?;
    p.finish(e)
}

pub fn parse_map(s: &str) -> Result<MapAst, ParseError> {
    let mut p = Parser {
        toks: Lexer::run(s)?,
        at: 0,
    };
    let m = p.map()?;
    p.finish(m)
}

fn fmt_number(v: f64) -> String {
    // shortest round-trip form; exponent form keeps very large or small values short
    let plain = format!("{v}");
    let sci = format!("{v:e}");
    if sci.len() < plain.len() {
        sci
    } else {
        plain
    }
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(op, ..) => op.precedence(),
            Expr::Neg(_) => 3,
            _ => 5,
        }
    }

    fn write_operand(&self, f: &mut fmt::Formatter<'_>, parens: bool) -> fmt::Result {
        if parens {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Real(v) => f.write_str(&fmt_number(*v)),
            Expr::Imag(v) => write!(f, "{}i", fmt_number(*v)),
            Expr::Var => f.write_str("z"),
            Expr::Pi => f.write_str("pi"),
            Expr::E => f.write_str("e"),
            Expr::I => f.write_str("i"),
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.write_operand(f, a.precedence() < 3)
            }
            Expr::Bin(op, a, b) => {
                let p = op.precedence();
                if *op == BinOp::Pow {
                    // right associative; the exponent may be a unary minus
                    a.write_operand(f, a.precedence() <= p)?;
                    f.write_str("^")?;
                    b.write_operand(f, b.precedence() < 3)
                } else {
                    a.write_operand(f, a.precedence() < p)?;
                    write!(f, " {} ", op.symbol())?;
                    b.write_operand(f, b.precedence() <= p)
                }
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Compose(m, a) => write!(f, "compose({m}, {a})"),
        }
    }
}

impl fmt::Display for MapAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapAst::Call(kind, args) => {
                write!(f, "{}(", kind.name())?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            MapAst::Compose(a, b) => write!(f, "compose({a}, {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LowerError {
    #[error("'{0}' must be a constant")]
    NotConstant(String),
    #[error("exponent in '{0}' must be real")]
    ComplexExponent(String),
    #[error("invalid map '{expr}': {reason}")]
    Map { expr: String, reason: String },
}

/// Intermediate value during lowering: polynomials stay as coefficient lists
/// so products and powers of polynomials fold.
enum Lowered {
    Poly(Vec<Complex64>),
    Func(FuncExpr<f64>),
}

/// Largest exponent expanded into polynomial coefficients.
const MAX_FOLDED_POWER: f64 = 64.0;

fn trim(mut cs: Vec<Complex64>) -> Vec<Complex64> {
    while cs.len() > 1 && cs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
        cs.pop();
    }
    cs
}

fn poly_add(a: &[Complex64], b: &[Complex64], sign: f64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len().max(b.len())];
    for (k, c) in a.iter().enumerate() {
        out[k] += c;
    }
    for (k, c) in b.iter().enumerate() {
        out[k] += c * sign;
    }
    trim(out)
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

impl Lowered {
    fn constant(&self) -> Option<Complex64> {
        match self {
            Lowered::Poly(cs) if cs.len() == 1 => Some(cs[0]),
            _ => None,
        }
    }

    fn into_func(self) -> FuncExpr<f64> {
        match self {
            Lowered::Poly(cs) if cs.len() == 1 => FuncExpr::Const(cs[0]),
            Lowered::Poly(cs) => FuncExpr::Poly(cs),
            Lowered::Func(f) => f,
        }
    }
}

/// Lowers an expression to an evaluable function.
pub fn lower(e: &Expr) -> Result<FuncExpr<f64>, LowerError> {
    Ok(lower_inner(e)?.into_func())
}

fn lower_inner(e: &Expr) -> Result<Lowered, LowerError> {
    let c = |re: f64, im: f64| Lowered::Poly(vec![Complex64::new(re, im)]);
    Ok(match e {
        Expr::Real(v) => c(*v, 0.0),
        Expr::Imag(v) => c(0.0, *v),
        Expr::Pi => c(std::f64::consts::PI, 0.0),
        Expr::E => c(std::f64::consts::E, 0.0),
        Expr::I => c(0.0, 1.0),
        Expr::Var => Lowered::Poly(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]),
        Expr::Neg(a) => match lower_inner(a)? {
            Lowered::Poly(cs) => Lowered::Poly(cs.into_iter().map(|x| -x).collect()),
            Lowered::Func(f) => Lowered::Func(FuncExpr::product(FuncExpr::Const(Complex::new(-1.0, 0.0)), f)),
        },
        Expr::Bin(op, a, b) => {
            let (la, lb) = (lower_inner(a)?, lower_inner(b)?);
            match (op, la, lb) {
                (BinOp::Add, Lowered::Poly(x), Lowered::Poly(y)) => Lowered::Poly(poly_add(&x, &y, 1.0)),
                (BinOp::Sub, Lowered::Poly(x), Lowered::Poly(y)) => Lowered::Poly(poly_add(&x, &y, -1.0)),
                (BinOp::Mul, Lowered::Poly(x), Lowered::Poly(y)) => Lowered::Poly(poly_mul(&x, &y)),
                (BinOp::Div, Lowered::Poly(x), Lowered::Poly(y)) if y.len() == 1 && y[0].norm() != 0.0 => {
                    Lowered::Poly(x.into_iter().map(|v| v / y[0]).collect())
                }
                (BinOp::Pow, base, exp) => {
                    let k = exp.constant().ok_or_else(|| LowerError::NotConstant(b.to_string()))?;
                    if k.im != 0.0 {
                        return Err(LowerError::ComplexExponent(e.to_string()));
                    }
                    let k = k.re;
                    match base {
                        Lowered::Poly(x) if k >= 0.0 && k.fract() == 0.0 && k <= MAX_FOLDED_POWER => {
                            let mut acc = vec![Complex64::new(1.0, 0.0)];
                            for _ in 0..k as usize {
                                acc = poly_mul(&acc, &x);
                            }
                            Lowered::Poly(acc)
                        }
                        base => Lowered::Func(FuncExpr::Pow {
                            base: Box::new(base.into_func()),
                            exponent: k,
                        }),
                    }
                }
                (op, x, y) => {
                    let (x, y) = (Box::new(x.into_func()), Box::new(y.into_func()));
                    Lowered::Func(match op {
                        BinOp::Add => FuncExpr::Sum(x, y),
                        BinOp::Sub => FuncExpr::Sum(
                            x,
                            Box::new(FuncExpr::product(FuncExpr::Const(Complex::new(-1.0, 0.0)), *y)),
                        ),
                        BinOp::Mul => FuncExpr::Product(x, y),
                        _ => FuncExpr::Quotient(x, y),
                    })
                }
            }
        }
        Expr::Call(func, a) => {
            let outer = match func {
                Func::Exp => FuncExpr::Exp,
                Func::Sin => FuncExpr::Sin,
                Func::Cos => FuncExpr::Cos,
            };
            match lower_inner(a)? {
                Lowered::Poly(cs) if cs.len() == 2 && cs[0].norm() == 0.0 && cs[1] == Complex64::new(1.0, 0.0) => {
                    Lowered::Func(outer)
                }
                Lowered::Poly(cs) if cs.len() == 2 => {
                    let m = MapExpr::affine(cs[1], cs[0]).map_err(|err| LowerError::Map {
                        expr: e.to_string(),
                        reason: err.to_string(),
                    })?;
                    Lowered::Func(outer.compose_map(m))
                }
                inner => Lowered::Func(FuncExpr::Compose {
                    outer: Box::new(outer),
                    inner: Box::new(inner.into_func()),
                }),
            }
        }
        Expr::Compose(m, a) => Lowered::Func(lower_inner(a)?.into_func().compose_map(lower_map(m)?)),
    })
}

/// Lowers a map expression; arguments must be constants.
pub fn lower_map(m: &MapAst) -> Result<MapExpr<f64>, LowerError> {
    match m {
        MapAst::Compose(first, second) => Ok(MapExpr::compose(lower_map(second)?, lower_map(first)?)),
        MapAst::Call(kind, args) => {
            let vals = args
                .iter()
                .map(|a| {
                    lower_inner(a)?
                        .constant()
                        .ok_or_else(|| LowerError::NotConstant(a.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let real = |k: usize| -> Result<f64, LowerError> {
                if vals[k].im != 0.0 {
                    return Err(LowerError::Map {
                        expr: m.to_string(),
                        reason: format!("argument {} must be real", k + 1),
                    });
                }
                Ok(vals[k].re)
            };
            let built = match kind {
                MapKind::Affine => MapExpr::affine(vals[0], vals[1]),
                MapKind::Moebius => MapExpr::moebius(vals[0], vals[1], vals[2], vals[3]),
                MapKind::Lens => MapExpr::lens(real(0)?),
                MapKind::Parabolic => MapExpr::parabolic(real(0)?),
            };
            built.map_err(|err| LowerError::Map {
                expr: m.to_string(),
                reason: err.to_string(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn variable_is_identity_polynomial() {
        assert_eq!(lower(&parse_expr("z").unwrap()).unwrap(), FuncExpr::identity());
    }

    #[test]
    fn sine_of_scaled_variable() {
        let f = lower(&parse_expr("sin(pi*z)").unwrap()).unwrap();
        let want = FuncExpr::Sin.compose_map(MapExpr::affine(c(std::f64::consts::PI, 0.0), c(0.0, 0.0)).unwrap());
        assert_eq!(f, want);
    }

    #[test]
    fn product_folds_to_coefficients() {
        let f = lower(&parse_expr("(z-1)*(z-2)").unwrap()).unwrap();
        assert_eq!(f, FuncExpr::Poly(vec![c(2.0, 0.0), c(-3.0, 0.0), c(1.0, 0.0)]));
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expr("-z^2").unwrap();
        assert_eq!(e, Expr::Neg(Box::new(Expr::Bin(BinOp::Pow, Box::new(Expr::Var), Box::new(Expr::Real(2.0))))));
        let e = parse_expr("2^3^2").unwrap();
        let f = lower(&e).unwrap();
        assert_eq!(f.as_constant(), Some(c(512.0, 0.0)));
        let f = lower(&parse_expr("8 - 2 - 1").unwrap()).unwrap();
        assert_eq!(f.as_constant(), Some(c(5.0, 0.0)));
        let f = lower(&parse_expr("8 / 2 / 2").unwrap()).unwrap();
        assert_eq!(f.as_constant(), Some(c(2.0, 0.0)));
        let f = lower(&parse_expr("1 + 2 * 3").unwrap()).unwrap();
        assert_eq!(f.as_constant(), Some(c(7.0, 0.0)));
        let f = lower(&parse_expr("z^-1").unwrap()).unwrap();
        assert!(matches!(f, FuncExpr::Pow { exponent, .. } if exponent == -1.0));
    }

    #[test]
    fn imaginary_literals_and_constants() {
        let f = lower(&parse_expr("1 + 2.5i").unwrap()).unwrap();
        assert_eq!(f.as_constant(), Some(c(1.0, 2.5)));
        let f = lower(&parse_expr("i*i").unwrap()).unwrap();
        assert_eq!(f.as_constant(), Some(c(-1.0, 0.0)));
        let f = lower(&parse_expr("e").unwrap()).unwrap();
        assert_eq!(f.as_constant(), Some(c(std::f64::consts::E, 0.0)));
        assert_eq!(parse_expr("1e-3").unwrap(), Expr::Real(1e-3));
        assert_eq!(parse_expr("2e").unwrap_err().pos, 1);
    }

    #[test]
    fn whitespace_insensitive() {
        assert_eq!(parse_expr(" ( z -1 ) * ( z-2 )").unwrap(), parse_expr("(z-1)*(z-2)").unwrap());
    }

    #[test]
    fn unclosed_call_reports_position() {
        let e = parse_expr("sin((z").unwrap_err();
        assert_eq!(e.pos, 6);
        let shown = e.render("sin((z");
        assert!(shown.ends_with("      ^ expected ')', found end of input"), "{shown}");
    }

    #[test]
    fn unknown_identifier_suggests() {
        let e = parse_expr("sn(z)").unwrap_err();
        assert_eq!(e.pos, 0);
        assert!(e.suggestions.contains(&"sin".to_string()), "{:?}", e.suggestions);
        let e = parse_expr("compose(lense(0.5), z)").unwrap_err();
        assert_eq!(e.suggestions.first().map(String::as_str), Some("lens"));
    }

    #[test]
    fn maps_lower_with_validation() {
        let f = lower(&parse_expr("compose(lens(0.5), z)").unwrap()).unwrap();
        assert_eq!(f, FuncExpr::identity().compose_map(MapExpr::lens(0.5).unwrap()));
        let m = lower_map(&parse_map("affine(2, -1)").unwrap()).unwrap();
        assert_eq!(m, MapExpr::affine(c(2.0, 0.0), c(-1.0, 0.0)).unwrap());
        assert!(lower_map(&parse_map("affine(0, 1)").unwrap()).is_err());
        assert!(lower_map(&parse_map("lens(z)").unwrap()).is_err());
        assert!(parse_map("moebius(1, 2)").is_err());
        let m = lower_map(&parse_map("compose(affine(2, 0), affine(1, 1))").unwrap()).unwrap();
        assert_eq!(m.eval(c(1.0, 0.0)).unwrap(), c(3.0, 0.0));
    }

    #[test]
    fn printer_round_trips() {
        for s in [
            "z",
            "sin(pi*z)",
            "(z-1)*(z-2)",
            "z*z-0.25",
            "-z^2",
            "(-z)^2",
            "2^3^2",
            "(2^3)^2",
            "z^-1",
            "1 - (2 - z)",
            "1/(z/2)",
            "exp(-z) + cos(2.5i*z)",
            "compose(compose(affine(2, 0), lens(0.25)), z - 1e-300)",
            "compose(moebius(1, 0, 0.5, 1), exp(z))",
            "--z",
        ] {
            let ast = parse_expr(s).unwrap();
            let printed = ast.to_string();
            assert_eq!(parse_expr(&printed).unwrap(), ast, "{s} printed as {printed}");
        }
    }
}
