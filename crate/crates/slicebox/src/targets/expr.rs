//! Density expression language: a small infix grammar over one free
//! variable `x`, parsed by recursive descent into [`ExprAst`].
//!
//! Expression text denotes the unnormalized density f(x) in linear space.
//! Log-domain evaluation ([`ExprAst::log_of`]) rewrites structure instead of
//! taking `log` of the finished value wherever it can, in particular
//! `log(exp(g)) = g`, so targets like `exp(-(x-1000)^2/100)` stay finite far
//! from their mode.
//!
//! Grammar (precedence high to low: `^`, unary `-`, `* /`, `+ -`):
//!
//! ```text
//! expression := term (('+'|'-') term)*
//! term       := unary (('*'|'/') unary)*
//! unary      := '-' unary | power
//! power      := atom ('^' exponent)?        exponent must be constant
//! atom       := NUMBER | 'x' | IDENT '(' expression (',' expression)* ')'
//!             | '(' expression ')'
//! ```
//!
//! Built-in functions: `exp`, `log`, `abs`, `gaussian_logpdf(e, mean, sd)`,
//! and `mixture(w1, g1, w2, g2, ...)` whose components `gi` are log-densities
//! (so the Gaussian-mixture targets are expressible without overflow).

use std::fmt;

use thiserror::Error;

pub const KNOWN_FUNCTIONS: &[&str] = &["exp", "log", "abs", "gaussian_logpdf", "mixture"];

const LN_2PI: f64 = 1.8378770664093453;

#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Const(f64),
    Var,
    Add(Box<ExprAst>, Box<ExprAst>),
    Sub(Box<ExprAst>, Box<ExprAst>),
    Mul(Box<ExprAst>, Box<ExprAst>),
    Div(Box<ExprAst>, Box<ExprAst>),
    Neg(Box<ExprAst>),
    /// Power with a constant exponent.
    Pow(Box<ExprAst>, f64),
    Exp(Box<ExprAst>),
    Log(Box<ExprAst>),
    Abs(Box<ExprAst>),
    GaussLogPdf {
        arg: Box<ExprAst>,
        mean: f64,
        sd: f64,
    },
    /// Weighted mixture of log-density components: value is sum of
    /// `w_i * exp(g_i(x))`.
    Mixture(Vec<(f64, ExprAst)>),
}

/// Evaluation failed to produce a finite-or-(-inf) log-density.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("log-density is undefined at x = {x} in subexpression `{subexpr}`")]
pub struct EvalError {
    pub x: f64,
    pub subexpr: String,
}

impl ExprAst {
    /// Linear-space value of the expression at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ExprAst::Const(c) => *c,
            ExprAst::Var => x,
            ExprAst::Add(a, b) => a.eval(x) + b.eval(x),
            ExprAst::Sub(a, b) => a.eval(x) - b.eval(x),
            ExprAst::Mul(a, b) => a.eval(x) * b.eval(x),
            ExprAst::Div(a, b) => a.eval(x) / b.eval(x),
            ExprAst::Neg(a) => -a.eval(x),
            ExprAst::Pow(a, k) => a.eval(x).powf(*k),
            ExprAst::Exp(a) => a.eval(x).exp(),
            ExprAst::Log(a) => a.eval(x).ln(),
            ExprAst::Abs(a) => a.eval(x).abs(),
            ExprAst::GaussLogPdf { arg, mean, sd } => gauss_logpdf(arg.eval(x), *mean, *sd),
            ExprAst::Mixture(parts) => parts
                .iter()
                .map(|(w, g)| w * g.eval(x).exp())
                .sum(),
        }
    }

    /// log of the linear value, rewriting structure where the direct `ln`
    /// would overflow or lose the sign: `log(exp g) = g`, products and
    /// quotients split into sums, powers become multiples, and mixtures go
    /// through log-sum-exp.
    pub fn log_of(&self, x: f64) -> Result<f64, EvalError> {
        match self {
            ExprAst::Exp(g) => Ok(g.eval(x)),
            ExprAst::Mul(a, b) => Ok(a.log_of(x)? + b.log_of(x)?),
            ExprAst::Div(a, b) => Ok(a.log_of(x)? - b.log_of(x)?),
            ExprAst::Pow(a, k) => {
                let v = a.eval(x);
                if v > 0.0 {
                    Ok(k * v.ln())
                } else if v == 0.0 {
                    if *k > 0.0 {
                        Ok(f64::NEG_INFINITY)
                    } else if *k == 0.0 {
                        Ok(0.0)
                    } else {
                        Err(self.eval_error(x))
                    }
                } else if k.fract() == 0.0 && (*k as i64).rem_euclid(2) == 0 {
                    Ok(k * v.abs().ln())
                } else {
                    Err(self.eval_error(x))
                }
            }
            ExprAst::Mixture(parts) => Ok(log_sum_exp(
                parts.iter().map(|(w, g)| w.ln() + g.eval(x)),
            )),
            ExprAst::Neg(a) => self.log_of_value(-a.eval(x), x),
            _ => self.log_of_value(self.eval(x), x),
        }
    }

    fn log_of_value(&self, v: f64, x: f64) -> Result<f64, EvalError> {
        if v > 0.0 && v.is_finite() {
            Ok(v.ln())
        } else if v == 0.0 {
            Ok(f64::NEG_INFINITY)
        } else {
            Err(self.eval_error(x))
        }
    }

    fn eval_error(&self, x: f64) -> EvalError {
        EvalError {
            x,
            subexpr: self.to_string(),
        }
    }

    /// Collapse every variable-free subtree with a finite value into a
    /// constant. Non-finite folds are left in place so evaluation errors keep
    /// naming the original subexpression.
    pub fn fold(&self) -> ExprAst {
        let folded = match self {
            ExprAst::Const(_) | ExprAst::Var => self.clone(),
            ExprAst::Add(a, b) => ExprAst::Add(Box::new(a.fold()), Box::new(b.fold())),
            ExprAst::Sub(a, b) => ExprAst::Sub(Box::new(a.fold()), Box::new(b.fold())),
            ExprAst::Mul(a, b) => ExprAst::Mul(Box::new(a.fold()), Box::new(b.fold())),
            ExprAst::Div(a, b) => ExprAst::Div(Box::new(a.fold()), Box::new(b.fold())),
            ExprAst::Neg(a) => ExprAst::Neg(Box::new(a.fold())),
            ExprAst::Pow(a, k) => ExprAst::Pow(Box::new(a.fold()), *k),
            ExprAst::Exp(a) => ExprAst::Exp(Box::new(a.fold())),
            ExprAst::Log(a) => ExprAst::Log(Box::new(a.fold())),
            ExprAst::Abs(a) => ExprAst::Abs(Box::new(a.fold())),
            ExprAst::GaussLogPdf { arg, mean, sd } => ExprAst::GaussLogPdf {
                arg: Box::new(arg.fold()),
                mean: *mean,
                sd: *sd,
            },
            ExprAst::Mixture(parts) => {
                ExprAst::Mixture(parts.iter().map(|(w, g)| (*w, g.fold())).collect())
            }
        };
        if folded.is_const_tree() {
            let v = folded.eval(f64::NAN);
            if v.is_finite() {
                return ExprAst::Const(v);
            }
        }
        folded
    }

    fn is_const_tree(&self) -> bool {
        match self {
            ExprAst::Const(_) => true,
            ExprAst::Var => false,
            ExprAst::Add(a, b)
            | ExprAst::Sub(a, b)
            | ExprAst::Mul(a, b)
            | ExprAst::Div(a, b) => a.is_const_tree() && b.is_const_tree(),
            ExprAst::Neg(a)
            | ExprAst::Pow(a, _)
            | ExprAst::Exp(a)
            | ExprAst::Log(a)
            | ExprAst::Abs(a) => a.is_const_tree(),
            ExprAst::GaussLogPdf { arg, .. } => arg.is_const_tree(),
            ExprAst::Mixture(parts) => parts.iter().all(|(_, g)| g.is_const_tree()),
        }
    }
}

pub(crate) fn gauss_logpdf(v: f64, mean: f64, sd: f64) -> f64 {
    let z = (v - mean) / sd;
    -sd.ln() - 0.5 * LN_2PI - 0.5 * z * z
}

pub(crate) fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.collect();
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY || m.is_nan() {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

// Precedence levels used by both the parser and the printer.
const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl ExprAst {
    fn prec(&self) -> u8 {
        match self {
            ExprAst::Add(..) | ExprAst::Sub(..) => PREC_ADD,
            ExprAst::Mul(..) | ExprAst::Div(..) => PREC_MUL,
            ExprAst::Neg(_) => PREC_NEG,
            ExprAst::Pow(..) => PREC_POW,
            // A negative literal prints with a leading minus, so it binds
            // like a negation: (-2)^2 must not print as -2^2.
            ExprAst::Const(c) if c.is_sign_negative() => PREC_NEG,
            _ => PREC_ATOM,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let needs_parens = self.prec() < min_prec;
        if needs_parens {
            write!(f, "(")?;
        }
        match self {
            ExprAst::Const(c) => write!(f, "{c}")?,
            ExprAst::Var => write!(f, "x")?,
            ExprAst::Add(a, b) => {
                a.fmt_prec(f, PREC_ADD)?;
                write!(f, " + ")?;
                b.fmt_prec(f, PREC_ADD + 1)?;
            }
            ExprAst::Sub(a, b) => {
                a.fmt_prec(f, PREC_ADD)?;
                write!(f, " - ")?;
                b.fmt_prec(f, PREC_ADD + 1)?;
            }
            ExprAst::Mul(a, b) => {
                a.fmt_prec(f, PREC_MUL)?;
                write!(f, " * ")?;
                b.fmt_prec(f, PREC_MUL + 1)?;
            }
            ExprAst::Div(a, b) => {
                a.fmt_prec(f, PREC_MUL)?;
                write!(f, " / ")?;
                b.fmt_prec(f, PREC_MUL + 1)?;
            }
            ExprAst::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, PREC_NEG)?;
            }
            ExprAst::Pow(a, k) => {
                a.fmt_prec(f, PREC_ATOM)?;
                write!(f, "^{k}")?;
            }
            ExprAst::Exp(a) => write!(f, "exp({a})")?,
            ExprAst::Log(a) => write!(f, "log({a})")?,
            ExprAst::Abs(a) => write!(f, "abs({a})")?,
            ExprAst::GaussLogPdf { arg, mean, sd } => {
                write!(f, "gaussian_logpdf({arg}, {mean}, {sd})")?
            }
            ExprAst::Mixture(parts) => {
                write!(f, "mixture(")?;
                for (i, (w, g)) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{w}, {g}")?;
                }
                write!(f, ")")?;
            }
        }
        if needs_parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Lexer and parser
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at offset {pos}")]
pub struct ParseError {
    pub pos: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    Syntax { expected: String, found: String },
    UnknownIdentifier { name: String },
    Arity { name: String, expected: String, got: usize },
    NonConstant { what: String },
    BadNumber { text: String },
    BadArgument { what: String },
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax { expected, found } => {
                write!(f, "syntax error: expected {expected}, found {found}")
            }
            ParseErrorKind::UnknownIdentifier { name } => write!(
                f,
                "unknown identifier `{name}`; the variable is `x` and functions are {}",
                KNOWN_FUNCTIONS.join(", ")
            ),
            ParseErrorKind::Arity { name, expected, got } => {
                write!(f, "`{name}` takes {expected} argument(s), got {got}")
            }
            ParseErrorKind::NonConstant { what } => {
                write!(f, "{what} must be a constant expression")
            }
            ParseErrorKind::BadNumber { text } => write!(f, "malformed number `{text}`"),
            ParseErrorKind::BadArgument { what } => write!(f, "{what}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Num(n) => format!("number `{n}`"),
            Token::Ident(s) => format!("`{s}`"),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Slash => "`/`".into(),
            Token::Caret => "`^`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::Comma => "`,`".into(),
            Token::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => push_one(&mut out, Token::Plus, &mut i),
            b'-' => push_one(&mut out, Token::Minus, &mut i),
            b'*' => push_one(&mut out, Token::Star, &mut i),
            b'/' => push_one(&mut out, Token::Slash, &mut i),
            b'^' => push_one(&mut out, Token::Caret, &mut i),
            b'(' => push_one(&mut out, Token::LParen, &mut i),
            b')' => push_one(&mut out, Token::RParen, &mut i),
            b',' => push_one(&mut out, Token::Comma, &mut i),
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let slice = &text[start..i];
                let value: f64 = slice.parse().map_err(|_| ParseError {
                    pos: start,
                    kind: ParseErrorKind::BadNumber { text: slice.into() },
                })?;
                if !value.is_finite() {
                    return Err(ParseError {
                        pos: start,
                        kind: ParseErrorKind::BadNumber { text: slice.into() },
                    });
                }
                out.push((Token::Num(value), start));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push((Token::Ident(text[start..i].into()), start));
            }
            _ => {
                return Err(ParseError {
                    pos: i,
                    kind: ParseErrorKind::Syntax {
                        expected: "a token".into(),
                        found: format!("`{}`", &text[i..i + 1]),
                    },
                })
            }
        }
    }
    out.push((Token::End, text.len()));
    Ok(out)
}

fn push_one(out: &mut Vec<(Token, usize)>, tok: Token, i: &mut usize) {
    out.push((tok, *i));
    *i += 1;
}

/// Parse density text into an AST. The sole free variable is `x`.
pub fn parse_density(text: &str) -> Result<ExprAst, ParseError> {
    let toks = lex(text)?;
    let mut parser = Parser { toks, i: 0 };
    let ast = parser.expression()?;
    parser.expect_end()?;
    Ok(ast)
}

struct Parser {
    toks: Vec<(Token, usize)>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.i].0
    }

    fn pos(&self) -> usize {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Token) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn syntax_error(&self, expected: &str) -> ParseError {
        ParseError {
            pos: self.pos(),
            kind: ParseErrorKind::Syntax {
                expected: expected.into(),
                found: self.peek().describe(),
            },
        }
    }

    fn expect(&mut self, tok: Token, expected: &str) -> Result<(), ParseError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.syntax_error(expected))
        }
    }

    fn expect_end(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Token::End {
            Ok(())
        } else {
            Err(self.syntax_error("an operator or end of input"))
        }
    }

    fn expression(&mut self) -> Result<ExprAst, ParseError> {
        let mut node = self.term()?;
        loop {
            if self.eat(&Token::Plus) {
                node = ExprAst::Add(Box::new(node), Box::new(self.term()?));
            } else if self.eat(&Token::Minus) {
                node = ExprAst::Sub(Box::new(node), Box::new(self.term()?));
            } else {
                return Ok(node);
            }
        }
    }

    fn term(&mut self) -> Result<ExprAst, ParseError> {
        let mut node = self.unary()?;
        loop {
            if self.eat(&Token::Star) {
                node = ExprAst::Mul(Box::new(node), Box::new(self.unary()?));
            } else if self.eat(&Token::Slash) {
                node = ExprAst::Div(Box::new(node), Box::new(self.unary()?));
            } else {
                return Ok(node);
            }
        }
    }

    fn unary(&mut self) -> Result<ExprAst, ParseError> {
        if self.eat(&Token::Minus) {
            Ok(ExprAst::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<ExprAst, ParseError> {
        let base = self.atom()?;
        if self.eat(&Token::Caret) {
            let k = self.exponent()?;
            Ok(ExprAst::Pow(Box::new(base), k))
        } else {
            Ok(base)
        }
    }

    /// `^` binds right-associatively; the whole exponent must fold to a
    /// constant.
    fn exponent(&mut self) -> Result<f64, ParseError> {
        if self.eat(&Token::Minus) {
            return Ok(-self.exponent()?);
        }
        let pos = self.pos();
        let mut node = self.atom()?;
        if self.eat(&Token::Caret) {
            let k = self.exponent()?;
            node = ExprAst::Pow(Box::new(node), k);
        }
        match node.fold() {
            ExprAst::Const(v) => Ok(v),
            _ => Err(ParseError {
                pos,
                kind: ParseErrorKind::NonConstant {
                    what: "power exponent".into(),
                },
            }),
        }
    }

    fn atom(&mut self) -> Result<ExprAst, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Token::Num(v) => {
                self.bump();
                Ok(ExprAst::Const(v))
            }
            Token::LParen => {
                self.bump();
                let inner = self.expression()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(inner)
            }
            Token::Ident(name) => {
                self.bump();
                if name == "x" {
                    return Ok(ExprAst::Var);
                }
                if !KNOWN_FUNCTIONS.contains(&name.as_str()) {
                    return Err(ParseError {
                        pos,
                        kind: ParseErrorKind::UnknownIdentifier { name },
                    });
                }
                self.expect(Token::LParen, "`(`")?;
                let mut args = vec![self.expression()?];
                while self.eat(&Token::Comma) {
                    args.push(self.expression()?);
                }
                self.expect(Token::RParen, "`)` or `,`")?;
                self.build_call(&name, args, pos)
            }
            _ => Err(self.syntax_error("a number, `x`, a function call, or `(`")),
        }
    }

    fn build_call(
        &self,
        name: &str,
        mut args: Vec<ExprAst>,
        pos: usize,
    ) -> Result<ExprAst, ParseError> {
        let arity = |expected: &str, got: usize| ParseError {
            pos,
            kind: ParseErrorKind::Arity {
                name: name.into(),
                expected: expected.into(),
                got,
            },
        };
        match name {
            "exp" | "log" | "abs" => {
                if args.len() != 1 {
                    return Err(arity("exactly 1", args.len()));
                }
                let inner = Box::new(args.pop().unwrap());
                Ok(match name {
                    "exp" => ExprAst::Exp(inner),
                    "log" => ExprAst::Log(inner),
                    _ => ExprAst::Abs(inner),
                })
            }
            "gaussian_logpdf" => {
                if args.len() != 3 {
                    return Err(arity("exactly 3 (value, mean, sd)", args.len()));
                }
                let sd = self.constant_arg(&args[2], "gaussian_logpdf standard deviation", pos)?;
                let mean = self.constant_arg(&args[1], "gaussian_logpdf mean", pos)?;
                if sd <= 0.0 {
                    return Err(ParseError {
                        pos,
                        kind: ParseErrorKind::BadArgument {
                            what: format!("standard deviation must be positive, got {sd}"),
                        },
                    });
                }
                Ok(ExprAst::GaussLogPdf {
                    arg: Box::new(args.swap_remove(0)),
                    mean,
                    sd,
                })
            }
            "mixture" => {
                if args.len() < 2 || !args.len().is_multiple_of(2) {
                    return Err(arity("an even number (weight, component pairs)", args.len()));
                }
                let mut parts = Vec::with_capacity(args.len() / 2);
                for pair in args.chunks(2) {
                    let w = self.constant_arg(&pair[0], "mixture weight", pos)?;
                    if w <= 0.0 {
                        return Err(ParseError {
                            pos,
                            kind: ParseErrorKind::BadArgument {
                                what: format!("mixture weights must be positive, got {w}"),
                            },
                        });
                    }
                    parts.push((w, pair[1].clone()));
                }
                Ok(ExprAst::Mixture(parts))
            }
            _ => unreachable!("name filtered against KNOWN_FUNCTIONS"),
        }
    }

    fn constant_arg(&self, arg: &ExprAst, what: &str, pos: usize) -> Result<f64, ParseError> {
        match arg.fold() {
            ExprAst::Const(v) => Ok(v),
            _ => Err(ParseError {
                pos,
                kind: ParseErrorKind::NonConstant { what: what.into() },
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn peaked_gaussian_is_one_at_mode() {
        let ast = parse_density("exp(-(x-500)^2/10)").unwrap();
        assert_eq!(ast.eval(500.0), 1.0);
        assert_eq!(ast.log_of(500.0).unwrap(), 0.0);
    }

    #[test]
    fn gamma_shape_log_value() {
        let ast = parse_density("x^4 * exp(-x)").unwrap();
        assert_relative_eq!(ast.log_of(1.0).unwrap(), -1.0, max_relative = 1e-15);
    }

    #[test]
    fn unbalanced_paren_reports_offset() {
        let err = parse_density("exp(-(x").unwrap_err();
        assert_eq!(err.pos, 7);
        assert!(matches!(err.kind, ParseErrorKind::Syntax { .. }));
    }

    #[test]
    fn log_rewrite_avoids_overflow_far_from_mode() {
        // exp(-(x-1000)^2/100) at x = 0 underflows to zero in linear space;
        // the structural log keeps the exact exponent.
        let ast = parse_density("exp(-(x-1000)^2/100)").unwrap();
        assert_relative_eq!(ast.log_of(0.0).unwrap(), -10_000.0, max_relative = 1e-12);
    }

    #[test]
    fn precedence_and_associativity() {
        let ast = parse_density("1 - 2 - 3").unwrap();
        assert_eq!(ast.eval(0.0), -4.0);
        let ast = parse_density("2 + 3 * 4").unwrap();
        assert_eq!(ast.eval(0.0), 14.0);
        let ast = parse_density("-x^2").unwrap();
        assert_eq!(ast.eval(3.0), -9.0);
        let ast = parse_density("2^3^2").unwrap();
        assert_eq!(ast.eval(0.0), 512.0);
        let ast = parse_density("x^-1").unwrap();
        assert_eq!(ast.eval(4.0), 0.25);
    }

    #[test]
    fn unknown_identifier_and_arity_errors() {
        let err = parse_density("foo(x)").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::UnknownIdentifier { .. }));
        let err = parse_density("y + 1").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::UnknownIdentifier { .. }));
        let err = parse_density("exp(x, 1)").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Arity { .. }));
        let err = parse_density("mixture(0.5, x, 0.5)").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Arity { .. }));
    }

    #[test]
    fn non_constant_exponent_is_rejected() {
        let err = parse_density("2^x").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::NonConstant { .. }));
    }

    #[test]
    fn malformed_numbers_and_tokens_are_rejected() {
        let err = parse_density("1e999 + x").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::BadNumber { .. }));
        let err = parse_density("x @ 2").unwrap_err();
        assert_eq!(err.pos, 2);
        let err = parse_density("").unwrap_err();
        assert_eq!(err.pos, 0);
        let err = parse_density("x x").unwrap_err();
        assert_eq!(err.pos, 2);
    }

    #[test]
    fn bad_function_arguments_are_rejected() {
        let err = parse_density("gaussian_logpdf(x, 0, 0)").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::BadArgument { .. }));
        let err = parse_density("gaussian_logpdf(x, x, 1)").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::NonConstant { .. }));
        let err = parse_density("mixture(-0.5, x, 0.5, x)").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::BadArgument { .. }));
    }

    #[test]
    fn mixture_log_is_log_sum_exp() {
        let ast = parse_density(
            "mixture(0.8, gaussian_logpdf(x, 0, 1), 0.2, gaussian_logpdf(x, 10, 1))",
        )
        .unwrap();
        // Oracle: log(0.8 * phi(0) + 0.2 * phi(10)).
        assert_relative_eq!(
            ast.log_of(0.0).unwrap(),
            -1.1420820845188824,
            max_relative = 1e-12
        );
    }

    #[test]
    fn eval_error_names_offending_subexpression() {
        let ast = parse_density("log(x)").unwrap();
        // f(0.5) = log(0.5) < 0, not a density value.
        let err = ast.log_of(0.5).unwrap_err();
        assert_eq!(err.subexpr, "log(x)");
        let ast = parse_density("exp(-x) * (x - 2)").unwrap();
        let err = ast.log_of(0.0).unwrap_err();
        assert_eq!(err.subexpr, "x - 2");
    }

    #[test]
    fn folding_preserves_values() {
        let ast = parse_density("(1 + 2) * x + exp(1)").unwrap();
        let folded = ast.fold();
        for x in [-2.0, 0.0, 0.7, 5.0] {
            assert_relative_eq!(ast.eval(x), folded.eval(x), max_relative = 1e-12);
        }
        assert_eq!(parse_density("2 + 3 * 4").unwrap().fold(), ExprAst::Const(14.0));
    }

    #[test]
    fn print_parse_print_is_stable() {
        for text in [
            "exp(-(x-500)^2/10)",
            "x^4 * exp(-x)",
            "mixture(0.8, gaussian_logpdf(x, 0, 1), 0.2, gaussian_logpdf(x, 10, 1))",
            "-x^2 + 3 * (x - 1)",
            "1 - 2 - 3 / x",
            "abs(x)^-2",
        ] {
            let once = parse_density(text).unwrap().to_string();
            let twice = parse_density(&once).unwrap().to_string();
            assert_eq!(once, twice, "printing `{text}` is not a fixed point");
        }
    }

    #[test]
    fn negative_base_powers_print_unambiguously() {
        let ast = ExprAst::Pow(Box::new(ExprAst::Const(-2.0)), 2.0);
        let printed = ast.to_string();
        let back = parse_density(&printed).unwrap();
        assert_eq!(back.eval(0.0), 4.0);
        assert_eq!(ast.eval(0.0), 4.0);
    }
}
