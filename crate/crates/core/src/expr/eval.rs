use super::{BinOp, EvalError, Expr, Func, VarEnv};

pub(super) fn eval(e: &Expr, env: &VarEnv) -> Result<f64, EvalError> {
    match e {
        Expr::Num(x) => Ok(*x),
        Expr::Var(name) => env.get(name).ok_or_else(|| EvalError::UnboundVariable(name.clone())),
        Expr::Neg(inner) => Ok(-eval(inner, env)?),
        Expr::Binary(op, l, r) => binary(*op, eval(l, env)?, eval(r, env)?),
        Expr::Call(func, args) => {
            let values = args.iter().map(|a| eval(a, env)).collect::<Result<Vec<_>, _>>()?;
            call(*func, &values)
        }
    }
}

fn finite(value: f64, op: &'static str) -> Result<f64, EvalError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(EvalError::NonFinite { op })
    }
}

pub(super) fn binary(op: BinOp, a: f64, b: f64) -> Result<f64, EvalError> {
    match op {
        BinOp::Add => finite(a + b, "+"),
        BinOp::Sub => finite(a - b, "-"),
        BinOp::Mul => finite(a * b, "*"),
        BinOp::Div => {
            if b == 0.0 {
                Err(EvalError::DivByZero)
            } else {
                finite(a / b, "/")
            }
        }
        BinOp::Pow => power(a, b),
    }
}

fn power(a: f64, b: f64) -> Result<f64, EvalError> {
    if a < 0.0 && b.fract() != 0.0 {
        return Err(EvalError::DomainError { op: "^ (negative base, fractional exponent)", arg: a });
    }
    if a == 0.0 && b < 0.0 {
        return Err(EvalError::DivByZero);
    }
    finite(a.powf(b), "^")
}

pub(super) fn call(func: Func, args: &[f64]) -> Result<f64, EvalError> {
    match func {
        Func::Ln => {
            let x = args[0];
            if x <= 0.0 {
                Err(EvalError::DomainError { op: "ln", arg: x })
            } else {
                finite(x.ln(), "ln")
            }
        }
        Func::Exp => finite(args[0].exp(), "exp"),
        Func::Sqrt => {
            let x = args[0];
            if x < 0.0 {
                Err(EvalError::DomainError { op: "sqrt", arg: x })
            } else {
                finite(x.sqrt(), "sqrt")
            }
        }
        Func::Abs => finite(args[0].abs(), "abs"),
        Func::Min => finite(args.iter().copied().fold(f64::INFINITY, f64::min), "min"),
        Func::Max => finite(args.iter().copied().fold(f64::NEG_INFINITY, f64::max), "max"),
        Func::Pow => power(args[0], args[1]),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Slot(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// An expression with variables replaced by argument positions, for fast
/// repeated evaluation inside integrators.
#[derive(Debug, Clone, PartialEq)]
pub struct Compiled {
    root: Node,
    slots: usize,
}

impl Compiled {
    pub(super) fn new(e: &Expr, slots: &[&str]) -> Result<Self, EvalError> {
        Ok(Self { root: lower(e, slots)?, slots: slots.len() })
    }

    /// Evaluate with `args[i]` bound to the `i`-th slot name.
    pub fn eval(&self, args: &[f64]) -> Result<f64, EvalError> {
        debug_assert_eq!(args.len(), self.slots);
        run(&self.root, args)
    }

    pub fn slots(&self) -> usize {
        self.slots
    }
}

fn lower(e: &Expr, slots: &[&str]) -> Result<Node, EvalError> {
    Ok(match e {
        Expr::Num(x) => Node::Num(*x),
        Expr::Var(name) => match slots.iter().position(|s| s == name) {
            Some(i) => Node::Slot(i),
            None => return Err(EvalError::UnboundVariable(name.clone())),
        },
        Expr::Neg(inner) => Node::Neg(Box::new(lower(inner, slots)?)),
        Expr::Binary(op, l, r) => Node::Binary(*op, Box::new(lower(l, slots)?), Box::new(lower(r, slots)?)),
        Expr::Call(func, args) => Node::Call(*func, args.iter().map(|a| lower(a, slots)).collect::<Result<_, _>>()?),
    })
}

fn run(node: &Node, args: &[f64]) -> Result<f64, EvalError> {
    match node {
        Node::Num(x) => Ok(*x),
        Node::Slot(i) => Ok(args[*i]),
        Node::Neg(inner) => Ok(-run(inner, args)?),
        Node::Binary(op, l, r) => binary(*op, run(l, args)?, run(r, args)?),
        Node::Call(func, items) => match items.as_slice() {
            [x] => call(*func, &[run(x, args)?]),
            [x, y] => call(*func, &[run(x, args)?, run(y, args)?]),
            _ => {
                let values = items.iter().map(|a| run(a, args)).collect::<Result<Vec<_>, _>>()?;
                call(*func, &values)
            }
        },
    }
}
