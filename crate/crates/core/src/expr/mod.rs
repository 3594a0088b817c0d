//! A small arithmetic expression language for user-supplied integrands.
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = primary [ "^" unary ] ;
//! primary = number | ident | func "(" expr { "," expr } ")" | "(" expr ")" ;
//! func    = "ln" | "exp" | "sqrt" | "abs" | "min" | "max" | "pow" ;
//! number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
//!         | "." digits [ ... ] ;
//! ident   = (letter | "_") { letter | digit | "_" } ;
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-2^2`
//! is `-4` and `2^3^2` is `512`. Evaluation is total: every failure is an
//! [`EvalError`].

mod eval;
mod lexer;
mod parser;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

pub use eval::Compiled;
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse, parse_bytes, MAX_DEPTH, MAX_INPUT_BYTES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Ln,
    Exp,
    Sqrt,
    Abs,
    Min,
    Max,
    Pow,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "ln" => Func::Ln,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            "pow" => Func::Pow,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Ln => "ln",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
            Func::Pow => "pow",
        }
    }

    /// `(min, max)` argument count.
    pub fn arity(self) -> (usize, usize) {
        match self {
            Func::Min | Func::Max => (1, usize::MAX),
            Func::Pow => (2, 2),
            _ => (1, 1),
        }
    }
}

/// Parsed expression. Literals produced by the parser are finite and
/// non-negative; a leading minus is a [`Expr::Neg`] node.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: expected {expected}")]
pub struct SyntaxError {
    pub offset: usize,
    pub expected: String,
}

impl SyntaxError {
    pub(crate) fn new(offset: usize, expected: impl Into<String>) -> Self {
        Self { offset, expected: expected.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable '{0}'")]
    UnboundVariable(String),
    #[error("{op} is undefined at {arg}")]
    DomainError { op: &'static str, arg: f64 },
    #[error("division by zero")]
    DivByZero,
    #[error("{op} produced a non-finite value")]
    NonFinite { op: &'static str },
}

/// Variable bindings for [`Expr::eval`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VarEnv {
    values: HashMap<String, f64>,
}

impl VarEnv {
    /// Names the command-line tools bind: `u`, `v`, `z`, `n`, `x1`..`x64`.
    pub fn is_reserved(name: &str) -> bool {
        match name {
            "u" | "v" | "z" | "n" => true,
            _ => name
                .strip_prefix('x')
                .and_then(|d| if d.starts_with('0') { None } else { d.parse::<usize>().ok() })
                .is_some_and(|k| (1..=64).contains(&k)),
        }
    }

    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.values.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }
}

impl Expr {
    pub fn num(x: f64) -> Self {
        Expr::Num(x)
    }

    pub fn var(name: &str) -> Self {
        Expr::Var(name.to_string())
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Self {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn eval(&self, env: &VarEnv) -> Result<f64, EvalError> {
        eval::eval(self, env)
    }

    /// Compile with variables resolved to positions in `slots`.
    pub fn compile(&self, slots: &[&str]) -> Result<Compiled, EvalError> {
        Compiled::new(self, slots)
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(name) => {
                out.insert(name.clone());
            }
            Expr::Neg(e) => e.collect_vars(out),
            Expr::Binary(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    // Binding strength: 1 for + -, 2 for * /, 3 for unary minus, 4 for ^,
    // 5 for atoms.
    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Binary(BinOp::Pow, ..) => 4,
            Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => 5,
        }
    }
}

// Shortest of the plain and the exponent forms; both round-trip exactly.
fn number(x: f64) -> String {
    let plain = format!("{x}");
    let sci = format!("{x:e}");
    if sci.len() < plain.len() {
        sci
    } else {
        plain
    }
}

fn wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Prints with the fewest parentheses that parse back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => f.write_str(&number(*x)),
            Expr::Var(name) => f.write_str(name),
            Expr::Neg(e) => {
                f.write_str("-")?;
                wrapped(f, e, e.precedence() < 3)
            }
            Expr::Binary(op, l, r) => {
                let p = self.precedence();
                let (symbol, left_parens, right_parens) = match op {
                    BinOp::Add => (" + ", l.precedence() < p, r.precedence() <= p),
                    BinOp::Sub => (" - ", l.precedence() < p, r.precedence() <= p),
                    BinOp::Mul => ("*", l.precedence() < p, r.precedence() <= p),
                    BinOp::Div => ("/", l.precedence() < p, r.precedence() <= p),
                    BinOp::Pow => ("^", l.precedence() <= p, r.precedence() < 3),
                };
                wrapped(f, l, left_parens)?;
                f.write_str(symbol)?;
                wrapped(f, r, right_parens)
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[cfg(test)]
mod tests;
