use super::*;

fn eval_str(text: &str, env: &VarEnv) -> Result<f64, EvalError> {
    parse(text).unwrap().eval(env)
}

fn vars(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}

#[test]
fn precedence() {
    let e = parse("u+v*2").unwrap();
    assert_eq!(e, Expr::binary(BinOp::Add, Expr::var("u"), Expr::binary(BinOp::Mul, Expr::var("v"), Expr::num(2.0))));
    let env = VarEnv::new();
    assert_eq!(eval_str("2^3^2", &env).unwrap(), 512.0);
    assert_eq!(eval_str("-2^2", &env).unwrap(), -4.0);
    assert_eq!(eval_str("2^-1", &env).unwrap(), 0.5);
    assert_eq!(eval_str("8/4/2", &env).unwrap(), 1.0);
    assert_eq!(eval_str("1-2-3", &env).unwrap(), -4.0);
    assert_eq!(eval_str("2*-3", &env).unwrap(), -6.0);
    assert_eq!(eval_str("--3", &env).unwrap(), 3.0);
}

#[test]
fn kernel_expressions() {
    let k = parse("(sqrt(u*v)-u)/(v-u)").unwrap();
    assert_eq!(k.free_vars(), vars(&["u", "v"]));
    let env = VarEnv::new().with("u", 0.25).with("v", 1.0);
    assert!((k.eval(&env).unwrap() - 1.0 / 3.0).abs() < 1e-15);

    let env = VarEnv::new().with("u", 0.2).with("v", 0.7).with("n", 4.0);
    assert!((eval_str("(v-u)^(n-2)", &env).unwrap() - 0.25).abs() < 1e-15);

    let env = VarEnv::new().with("x1", 3.0).with("x2", 1.0).with("x3", 2.0);
    assert_eq!(eval_str("min(x1,x2,x3)", &env).unwrap(), 1.0);
    assert_eq!(eval_str("max(x1,x2,x3)", &env).unwrap(), 3.0);
    assert_eq!(eval_str("pow(x2 + 1, x3) + abs(-x1)", &env).unwrap(), 7.0);
    assert!((eval_str("ln(exp(x3))", &env).unwrap() - 2.0).abs() < 1e-15);
}

#[test]
fn free_variables() {
    assert_eq!(parse("u+v").unwrap().free_vars(), vars(&["u", "v"]));
    assert!(parse("3.0").unwrap().free_vars().is_empty());
    assert_eq!(parse("x1*u").unwrap().free_vars(), vars(&["u", "x1"]));
}

#[test]
fn evaluation_errors() {
    let env = VarEnv::new().with("u", -1.0);
    assert_eq!(eval_str("v", &env), Err(EvalError::UnboundVariable("v".into())));
    assert!(matches!(eval_str("ln(u)", &env), Err(EvalError::DomainError { op: "ln", .. })));
    assert!(matches!(eval_str("ln(0)", &env), Err(EvalError::DomainError { .. })));
    assert!(matches!(eval_str("sqrt(u)", &env), Err(EvalError::DomainError { op: "sqrt", .. })));
    assert_eq!(eval_str("1/0", &env), Err(EvalError::DivByZero));
    assert_eq!(eval_str("0/0", &env), Err(EvalError::DivByZero));
    assert_eq!(eval_str("0^-1", &env), Err(EvalError::DivByZero));
    assert!(matches!(eval_str("u^0.5", &env), Err(EvalError::DomainError { .. })));
    assert_eq!(eval_str("u^3", &env), Ok(-1.0));
    assert!(matches!(eval_str("exp(1000)", &env), Err(EvalError::NonFinite { .. })));
    assert!(matches!(eval_str("1/exp(1000)", &env), Err(EvalError::NonFinite { .. })));
}

#[test]
fn syntax_errors_carry_offsets() {
    let cases = [
        ("u +", 3),
        ("(u", 2),
        ("u)", 1),
        ("2 3", 2),
        ("sqrt u", 5),
        ("sqrt(1, 2)", 0),
        ("pow(1)", 0),
        ("min()", 4),
        ("", 0),
        ("u # v", 2),
    ];
    for (text, offset) in cases {
        let err = parse(text).unwrap_err();
        assert_eq!(err.offset, offset, "{text}: {err}");
    }
    assert_eq!(parse_bytes(b"u+\xff").unwrap_err().offset, 2);
    assert!(parse_bytes(b"u+v").is_ok());
}

#[test]
fn size_and_depth_limits() {
    let long = "1+".repeat(MAX_INPUT_BYTES / 2) + "1";
    assert!(parse(&long).is_err());
    let deep = "(".repeat(MAX_DEPTH + 1) + "1" + &")".repeat(MAX_DEPTH + 1);
    assert!(parse(&deep).is_err());
    let chain = "1+".repeat(MAX_DEPTH + 5) + "1";
    assert!(parse(&chain).is_err());
    let ok = "(".repeat(100) + "u" + &")".repeat(100);
    assert_eq!(parse(&ok).unwrap(), Expr::var("u"));
    let sum = (1..=64).map(|i| format!("x{i}")).collect::<Vec<_>>().join("+");
    assert_eq!(parse(&sum).unwrap().free_vars().len(), 64);
}

#[test]
fn printing_round_trips() {
    for text in [
        "u + v*2",
        "(u + v)*2",
        "u - (v - 1)",
        "u/(v*2)",
        "2^3^2",
        "(2^3)^2",
        "-u^2",
        "(-u)^2",
        "u^-v",
        "--u",
        "u - -v",
        "min(u, v, 1.5e-7) + pow(u, 2)",
        "(sqrt(u*v) - u)/(v - u)",
        "1e300*u",
    ] {
        let e = parse(text).unwrap();
        let printed = e.to_string();
        assert_eq!(parse(&printed).unwrap(), e, "{text} -> {printed}");
    }
    assert_eq!(parse("(u+v)*2").unwrap().to_string(), "(u + v)*2");
    assert_eq!(parse("((u))").unwrap().to_string(), "u");
}

#[test]
fn compiled_matches_tree_evaluation() {
    let e = parse("(sqrt(u*v)-u)/(v-u) + min(u, v, 0.3)^2 - ln(v)").unwrap();
    let c = e.compile(&["u", "v"]).unwrap();
    for (u, v) in [(0.1, 0.9), (0.25, 1.0), (0.5, 0.6)] {
        let env = VarEnv::new().with("u", u).with("v", v);
        assert_eq!(c.eval(&[u, v]).unwrap(), e.eval(&env).unwrap());
    }
    assert_eq!(c.eval(&[0.5, 0.5]), Err(EvalError::DivByZero));
    assert_eq!(e.compile(&["u"]), Err(EvalError::UnboundVariable("v".into())));
}

#[test]
fn reserved_names() {
    for name in ["u", "v", "z", "n", "x1", "x64"] {
        assert!(VarEnv::is_reserved(name), "{name}");
    }
    for name in ["x0", "x65", "x01", "y", "xx"] {
        assert!(!VarEnv::is_reserved(name), "{name}");
    }
}
