//! Expressions in `r`, `theta` and `t` for boundary and initial data.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! `^` is right associative and binds tighter than unary minus, so `-x^2`
//! is `-(x^2)`. The only named constant is `pi`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    R,
    Theta,
    T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
    Abs,
    Min,
    Max,
}

impl Func {
    pub const ALL: [Func; 12] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
        Func::Min,
        Func::Max,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply(self, args: &[f64]) -> Result<f64> {
        let x = args[0];
        Ok(match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Tanh => x.tanh(),
            Func::Exp => x.exp(),
            Func::Log if x > 0.0 => x.ln(),
            Func::Log => return Err(Error::EvalDomain { func: "log", arg: x }),
            Func::Sqrt if x >= 0.0 => x.sqrt(),
            Func::Sqrt => return Err(Error::EvalDomain { func: "sqrt", arg: x }),
            Func::Abs => x.abs(),
            Func::Min => x.min(args[1]),
            Func::Max => x.max(args[1]),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    pub fn eval(&self, r: f64, theta: f64, t: f64) -> Result<f64> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::R) => r,
            Expr::Var(Var::Theta) => theta,
            Expr::Var(Var::T) => t,
            Expr::Neg(e) => -e.eval(r, theta, t)?,
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(r, theta, t)?, b.eval(r, theta, t)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(f, args) => {
                let vals = args.iter().map(|a| a.eval(r, theta, t)).collect::<Result<Vec<_>>>()?;
                f.apply(&vals)?
            }
        })
    }

    /// True if the expression mentions `v`.
    pub fn uses(&self, v: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(w) => *w == v,
            Expr::Neg(e) => e.uses(v),
            Expr::Bin(_, a, b) => a.uses(v) || b.uses(v),
            Expr::Call(_, args) => args.iter().any(|a| a.uses(v)),
        }
    }
}

/// Fully parenthesized; parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => write!(f, "(-{:?})", -v),
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(Var::R) => f.write_str("r"),
            Expr::Var(Var::Theta) => f.write_str("theta"),
            Expr::Var(Var::T) => f.write_str("t"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, a, b) => {
                let sym = match op {
                    BinOp::Add => '+',
                    BinOp::Sub => '-',
                    BinOp::Mul => '*',
                    BinOp::Div => '/',
                    BinOp::Pow => '^',
                };
                write!(f, "({a}{sym}{b})")
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Sym(char),
    End,
}

struct Parser<'s> {
    src: &'s str,
    pos: usize,
    tok: Tok,
    start: usize,
}

impl<'s> Parser<'s> {
    fn new(src: &'s str) -> Result<Self> {
        let mut p = Parser {
            src,
            pos: 0,
            tok: Tok::End,
            start: 0,
        };
        p.advance()?;
        Ok(p)
    }

    fn syntax(&self, expected: &[&str]) -> Error {
        Error::Syntax {
            offset: self.start,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn advance(&mut self) -> Result<()> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            self.tok = Tok::End;
            return Ok(());
        };
        if c.is_ascii_digit() || c == b'.' {
            let digits = |p: &mut usize| {
                let s = *p;
                while *p < bytes.len() && bytes[*p].is_ascii_digit() {
                    *p += 1;
                }
                *p > s
            };
            let mut p = self.pos;
            let mut any = digits(&mut p);
            if bytes.get(p) == Some(&b'.') {
                p += 1;
                any |= digits(&mut p);
            }
            if !any {
                return Err(self.syntax(&["number"]));
            }
            if matches!(bytes.get(p), Some(b'e' | b'E')) {
                let mut q = p + 1;
                if matches!(bytes.get(q), Some(b'+' | b'-')) {
                    q += 1;
                }
                if digits(&mut q) {
                    p = q;
                }
            }
            let value = self.src[self.pos..p].parse::<f64>().map_err(|_| self.syntax(&["number"]))?;
            self.tok = Tok::Num(value);
            self.pos = p;
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let mut p = self.pos;
            while p < bytes.len() && (bytes[p].is_ascii_alphanumeric() || bytes[p] == b'_') {
                p += 1;
            }
            self.tok = Tok::Name(self.src[self.pos..p].to_string());
            self.pos = p;
        } else if b"+-*/^(),".contains(&c) {
            self.tok = Tok::Sym(c as char);
            self.pos += 1;
        } else {
            return Err(self.syntax(&["number", "name", "operator"]));
        }
        Ok(())
    }

    fn eat(&mut self, c: char) -> Result<bool> {
        if self.tok == Tok::Sym(c) {
            self.advance()?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-')? {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.primary()?;
        if self.eat('^')? {
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Expr::Num(v))
            }
            Tok::Sym('(') => {
                self.advance()?;
                let e = self.expr()?;
                if !self.eat(')')? {
                    return Err(self.syntax(&[")"]));
                }
                Ok(e)
            }
            Tok::Name(name) => {
                let offset = self.start;
                self.advance()?;
                if self.tok == Tok::Sym('(') {
                    let func = Func::from_name(&name).ok_or(Error::UnknownIdentifier { name, offset })?;
                    self.advance()?;
                    let mut args = vec![self.expr()?];
                    while args.len() < func.arity() {
                        if !self.eat(',')? {
                            return Err(self.syntax(&[","]));
                        }
                        args.push(self.expr()?);
                    }
                    if !self.eat(')')? {
                        return Err(self.syntax(&[")"]));
                    }
                    return Ok(Expr::Call(func, args));
                }
                match name.as_str() {
                    "r" => Ok(Expr::Var(Var::R)),
                    "theta" => Ok(Expr::Var(Var::Theta)),
                    "t" => Ok(Expr::Var(Var::T)),
                    "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    _ => Err(Error::UnknownIdentifier { name, offset }),
                }
            }
            _ => Err(self.syntax(&["number", "name", "("])),
        }
    }
}

pub fn parse_expression(src: &str) -> Result<Expr> {
    if src.trim().is_empty() {
        return Err(Error::Syntax {
            offset: 0,
            expected: vec!["expression".into()],
        });
    }
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return Err(p.syntax(&["operator", "end of input"]));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(src: &str, r: f64, theta: f64) -> f64 {
        parse_expression(src).unwrap().eval(r, theta, 0.0).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(eval("0.5*cos(2*theta)", 0.0, 0.0), 0.5);
        assert!((eval("cosh(r)", 1.0, 0.0) - 1.5430806348152437).abs() < 1e-15);
        match parse_expression("cos(theta") {
            Err(Error::Syntax { offset, expected }) => {
                assert_eq!(offset, 9);
                assert_eq!(expected, vec![")"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn precedence() {
        assert_eq!(eval("-2^2", 0.0, 0.0), -4.0);
        assert_eq!(eval("2^3^2", 0.0, 0.0), 512.0);
        assert_eq!(eval("2^-1", 0.0, 0.0), 0.5);
        assert_eq!(eval("1-2-3", 0.0, 0.0), -4.0);
        assert_eq!(eval("8/4/2", 0.0, 0.0), 1.0);
        assert_eq!(eval("1+2*3", 0.0, 0.0), 7.0);
        assert_eq!(eval("max(r, 1e-1) + min(1, 2)", 0.0, 0.0), 1.1);
        assert_eq!(eval("pi", 0.0, 0.0), std::f64::consts::PI);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_expression("foo + 1"),
            Err(Error::UnknownIdentifier { offset: 0, .. })
        ));
        assert!(matches!(
            parse_expression("1 + bar(2)"),
            Err(Error::UnknownIdentifier { offset: 4, .. })
        ));
        assert!(matches!(parse_expression("min(1)"), Err(Error::Syntax { offset: 5, .. })));
        assert!(matches!(parse_expression("1 +"), Err(Error::Syntax { offset: 3, .. })));
        assert!(matches!(parse_expression("1 2"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse_expression("  "), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expression("1 # 2"), Err(Error::Syntax { offset: 2, .. })));
        let e = parse_expression("log(r) + sqrt(r)").unwrap();
        assert!(matches!(e.eval(-1.0, 0.0, 0.0), Err(Error::EvalDomain { func: "log", .. })));
        assert!(matches!(e.eval(0.0, 0.0, 0.0), Err(Error::EvalDomain { func: "log", .. })));
    }

    #[test]
    fn printing_round_trips() {
        for src in ["-r^2 + 3*theta/t", "min(-1.5e-3, cos(theta))^0.5", "--1", "1e300*r"] {
            let e = parse_expression(src).unwrap();
            let printed = e.to_string();
            let again = parse_expression(&printed).unwrap();
            assert_eq!(again, e, "{src} -> {printed}");
            assert_eq!(again.to_string(), printed);
        }
        assert_eq!(
            parse_expression(&Expr::Num(-2.5).to_string()).unwrap().eval(0.0, 0.0, 0.0).unwrap(),
            -2.5
        );
    }
}
