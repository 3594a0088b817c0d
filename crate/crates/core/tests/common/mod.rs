//! Strategies and oracles shared by the integration tests.
#![allow(dead_code)]

use minmax_core::expr::{tokenize, BinOp, Expr, Func, TokenKind};
use proptest::prelude::*;

const NAMES: [&str; 8] = ["u", "v", "n", "x1", "x2", "z", "alpha", "_t0"];

fn arb_number() -> impl Strategy<Value = f64> {
    prop_oneof![
        (0u32..1000).prop_map(f64::from),
        (0u32..1000, 1u32..1000).prop_map(|(a, b)| f64::from(a) / f64::from(b)),
        (0.0..1e6f64),
        (1e-300..1e-3f64),
        (1e10..1e300f64),
    ]
}

fn arb_func() -> impl Strategy<Value = Func> {
    prop::sample::select(vec![Func::Ln, Func::Exp, Func::Sqrt, Func::Abs, Func::Min, Func::Max, Func::Pow])
}

fn arb_op() -> impl Strategy<Value = BinOp> {
    prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow])
}

/// Random trees as the parser produces them: literals are finite and
/// non-negative, variables never collide with function names.
pub fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![arb_number().prop_map(Expr::Num), prop::sample::select(NAMES.to_vec()).prop_map(Expr::var)];
    leaf.prop_recursive(6, 64, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (arb_op(), inner.clone(), inner.clone()).prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            (arb_func(), prop::collection::vec(inner, 1..4)).prop_map(|(f, mut args)| {
                let (lo, hi) = f.arity();
                args.truncate(hi);
                while args.len() < lo {
                    args.push(Expr::num(1.0));
                }
                Expr::Call(f, args)
            }),
        ]
    })
}

/// Valid sources over numbers, names, the five binary operators, unary
/// minus and parentheses.
pub fn arb_source() -> impl Strategy<Value = String> {
    let operand = prop_oneof![(0u32..100).prop_map(|k| k.to_string()), prop::sample::select(vec!["a", "b", "c"]).prop_map(String::from)];
    operand.prop_recursive(5, 48, 4, |inner| {
        prop_oneof![
            inner.clone().prop_map(|s| format!("({s})")),
            inner.clone().prop_map(|s| format!("-{s}")),
            (inner.clone(), prop::collection::vec((prop::sample::select(vec!["+", "-", "*", "/", "^"]), inner), 1..4)).prop_map(|(first, rest)| {
                let mut s = first;
                for (op, operand) in rest {
                    s.push_str(op);
                    s.push_str(&operand);
                }
                s
            }),
        ]
    })
}

/// Arbitrary short strings biased towards the expression alphabet.
pub fn arb_noise() -> impl Strategy<Value = String> {
    let alphabet: Vec<char> = "0123456789.eE+-*/^(),uvxnz_ lnexpsqrtabsminmaxpow\t\n".chars().collect();
    prop::collection::vec(prop_oneof![4 => prop::sample::select(alphabet), 1 => any::<char>()], 0..48).prop_map(|cs| cs.into_iter().collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Bin(BinOp),
    Neg,
    Open,
}

fn precedence(op: Op) -> u8 {
    match op {
        Op::Bin(BinOp::Add | BinOp::Sub) => 1,
        Op::Bin(BinOp::Mul | BinOp::Div) => 2,
        Op::Neg => 3,
        Op::Bin(BinOp::Pow) => 4,
        Op::Open => 0,
    }
}

fn reduce(out: &mut Vec<Expr>, op: Op) {
    match op {
        Op::Neg => {
            let e = out.pop().expect("operand");
            out.push(Expr::Neg(Box::new(e)));
        }
        Op::Bin(b) => {
            let r = out.pop().expect("right operand");
            let l = out.pop().expect("left operand");
            out.push(Expr::binary(b, l, r));
        }
        Op::Open => unreachable!(),
    }
}

/// Shunting-yard over the token stream of a source from [`arb_source`]:
/// `^` right-associative and above unary minus, the others left-associative.
pub fn shunting_yard(source: &str) -> Expr {
    let tokens = tokenize(source).expect("valid source");
    let mut out: Vec<Expr> = Vec::new();
    let mut ops: Vec<Op> = Vec::new();
    let mut expect_operand = true;
    for t in tokens {
        match t.kind {
            TokenKind::Number(x) => {
                out.push(Expr::Num(x));
                expect_operand = false;
            }
            TokenKind::Ident(name) => {
                out.push(Expr::Var(name));
                expect_operand = false;
            }
            TokenKind::LParen => ops.push(Op::Open),
            TokenKind::RParen => {
                while let Some(op) = ops.pop() {
                    if op == Op::Open {
                        break;
                    }
                    reduce(&mut out, op);
                }
                expect_operand = false;
            }
            TokenKind::Minus if expect_operand => ops.push(Op::Neg),
            kind => {
                let b = match kind {
                    TokenKind::Plus => BinOp::Add,
                    TokenKind::Minus => BinOp::Sub,
                    TokenKind::Star => BinOp::Mul,
                    TokenKind::Slash => BinOp::Div,
                    TokenKind::Caret => BinOp::Pow,
                    other => panic!("unexpected token {other:?}"),
                };
                let p = precedence(Op::Bin(b));
                let right_assoc = b == BinOp::Pow;
                while let Some(&top) = ops.last() {
                    let q = precedence(top);
                    if top != Op::Open && (q > p || (q == p && !right_assoc)) {
                        ops.pop();
                        reduce(&mut out, top);
                    } else {
                        break;
                    }
                }
                ops.push(Op::Bin(b));
                expect_operand = true;
            }
        }
    }
    while let Some(op) = ops.pop() {
        reduce(&mut out, op);
    }
    assert_eq!(out.len(), 1, "source {source:?}");
    out.pop().unwrap()
}
