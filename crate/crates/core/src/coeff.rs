//! Scalar coefficient expressions `V(x)`.
//!
//! Grammar: real literals, the variable `x`, binary `+ - * /`, unary `-`,
//! parentheses and the functions `sin`, `cos`, `exp`. Unary minus binds
//! tighter than `*` and `/`, which bind tighter than `+` and `-`; binary
//! operators associate to the left. Parsing is precedence climbing over a
//! byte-offset token stream.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }

    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Num(f64),
    X,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::X => x,
            Expr::Neg(e) => -e.eval(x),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                }
            }
            Expr::Call(f, e) => {
                let v = e.eval(x);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                }
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(op, _, _) => op.precedence(),
            Expr::Neg(_) => 3,
            _ => 4,
        }
    }
}

/// Prints with the minimal parentheses that reparse to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::X => f.write_str("x"),
            Expr::Neg(e) => {
                if e.precedence() < 3 {
                    write!(f, "-({e})")
                } else {
                    write!(f, "-{e}")
                }
            }
            Expr::Bin(op, a, b) => {
                let p = op.precedence();
                if a.precedence() < p {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, " {} ", op.symbol())?;
                if b.precedence() <= p {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' | b'-' | b'*' | b'/' => {
                out.push((i, Tok::Op(c as char)));
                i += 1;
            }
            b'(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| Error::Parse {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        offset: start,
                        message: format!("number `{text}` overflows"),
                    });
                }
                out.push((start, Tok::Num(v)));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
            }
            _ => {
                let ch = src[i..].chars().next().unwrap();
                return Err(Error::Parse {
                    offset: i,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &(usize, Tok) {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> (usize, Tok) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self, min_prec: u8) -> Result<Expr> {
        let mut lhs = self.prefix()?;
        loop {
            let op = match self.peek().1 {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => break,
            };
            let p = op.precedence();
            if p < min_prec {
                break;
            }
            self.next();
            let rhs = self.expr(p + 1)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr> {
        let (offset, tok) = self.next();
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Op('-') => Ok(Expr::Neg(Box::new(self.prefix()?))),
            Tok::LParen => {
                let e = self.expr(0)?;
                self.expect_rparen(offset)?;
                Ok(e)
            }
            Tok::Ident(name) if name == "x" => Ok(Expr::X),
            Tok::Ident(name) => {
                let func = Func::lookup(&name).ok_or_else(|| Error::Parse {
                    offset,
                    message: format!("unknown function `{name}` (expected sin, cos or exp)"),
                })?;
                let (lp, t) = self.next();
                if t != Tok::LParen {
                    return Err(Error::Parse {
                        offset: lp,
                        message: format!("expected `(` after `{name}`"),
                    });
                }
                let arg = self.expr(0)?;
                self.expect_rparen(lp)?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Tok::End => Err(Error::Parse {
                offset,
                message: "unexpected end of input".into(),
            }),
            Tok::RParen => Err(Error::Parse {
                offset,
                message: "unexpected `)`".into(),
            }),
            Tok::Op(c) => Err(Error::Parse {
                offset,
                message: format!("unexpected operator `{c}`"),
            }),
        }
    }

    fn expect_rparen(&mut self, open: usize) -> Result<()> {
        let (offset, tok) = self.next();
        match tok {
            Tok::RParen => Ok(()),
            Tok::End => Err(Error::Parse {
                offset,
                message: format!("unbalanced `(` opened at byte {open}"),
            }),
            _ => Err(Error::Parse {
                offset,
                message: "expected `)`".into(),
            }),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
    };
    let e = p.expr(0)?;
    match p.peek() {
        (_, Tok::End) => Ok(e),
        (offset, Tok::RParen) => Err(Error::Parse {
            offset: *offset,
            message: "unbalanced `)`".into(),
        }),
        (offset, _) => Err(Error::Parse {
            offset: *offset,
            message: "unexpected token after expression".into(),
        }),
    }
}

pub fn eval(tree: &Expr, x: f64) -> f64 {
    tree.eval(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffSource {
    Builtin(String),
    Expressions { v1: String, v2: String },
}

/// Diffusion `v1` and drift `v2` of `dX = v2(X) dt + v1(X) dB`.
///
/// Boundedness of the coefficients is assumed by the theory but not
/// enforced; loading only checks finiteness on a probe grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSpec {
    pub v1: Expr,
    pub v2: Expr,
    pub source: CoeffSource,
}

pub const BUILTINS: [&str; 2] = ["sde1", "sde2"];

/// Probe grid for the finiteness check at load time.
pub const PROBE_RANGE: (f64, f64) = (-50.0, 50.0);
const PROBE_POINTS: usize = 1001;

impl CoefficientSpec {
    pub fn from_exprs(v1: &str, v2: &str) -> Result<Self> {
        let spec = CoefficientSpec {
            v1: parse(v1)?,
            v2: parse(v2)?,
            source: CoeffSource::Expressions {
                v1: v1.to_string(),
                v2: v2.to_string(),
            },
        };
        spec.probe()?;
        Ok(spec)
    }

    /// Checks both coefficients are finite on [`PROBE_RANGE`].
    pub fn probe(&self) -> Result<()> {
        let (lo, hi) = PROBE_RANGE;
        for k in 0..PROBE_POINTS {
            let x = lo + (hi - lo) * k as f64 / (PROBE_POINTS - 1) as f64;
            for e in [&self.v1, &self.v2] {
                if !e.eval(x).is_finite() {
                    return Err(Error::NonFiniteCoefficient { expr: e.to_string(), x });
                }
            }
        }
        Ok(())
    }

    pub fn diffusion(&self, x: f64) -> f64 {
        self.v1.eval(x)
    }

    pub fn drift(&self, x: f64) -> f64 {
        self.v2.eval(x)
    }
}

/// The two test equations: `sde1` is `dX = X dt + (2 + sin X) dB`, `sde2` is
/// `dX = sin X dt + (2 + cos X) dB`.
pub fn builtin(name: &str) -> Result<CoefficientSpec> {
    let (v1, v2) = match name {
        "sde1" => ("2+sin(x)", "x"),
        "sde2" => ("2+cos(x)", "sin(x)"),
        _ => {
            return Err(Error::UnknownBuiltin {
                name: name.to_string(),
                available: BUILTINS.join(", "),
            })
        }
    };
    Ok(CoefficientSpec {
        v1: parse(v1)?,
        v2: parse(v2)?,
        source: CoeffSource::Builtin(name.to_string()),
    })
}
