use std::collections::BTreeSet;

use cpcf_core::lang::{
    parse, print_program, substitute, vars_of, ExprContext, ParseError, Program, StmtKind,
};

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!(
        "{}/../../fixtures/{name}",
        env!("CARGO_MANIFEST_DIR")
    ))
    .unwrap()
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

#[test]
fn minimal_program_has_two_statements() {
    let p = parse("n = int(input())\nprint(n)").unwrap();
    assert_eq!(p.body.len(), 2);
    assert_eq!(p.stmt_count(), 2);
}

#[test]
fn factorial_shape() {
    let p = parse(&fixture("factorial_cp.py")).unwrap();
    assert_eq!(p.body.len(), 5);
    let StmtKind::While { body, .. } = &p.body[3].kind else {
        panic!("expected while")
    };
    assert_eq!(body.len(), 3);
}

#[test]
fn ids_are_dense_preorder() {
    let p = parse(&fixture("factorial_cp.py")).unwrap();
    let mut ids = Vec::new();
    p.walk(&mut |s| ids.push(s.id));
    assert_eq!(ids, (0..8).collect::<Vec<_>>());
}

#[test]
fn class_is_unsupported() {
    assert!(matches!(
        parse("class A: pass"),
        Err(ParseError::Unsupported { .. })
    ));
}

#[test]
fn other_unsupported_constructs() {
    for src in [
        "f = lambda x: x",
        "a = [x for x in y]",
        "import os",
        "a, b = 1, 2",
        "x = 1 if y else 2",
        "while x:\n    break",
        "d = {}",
        "a < b < c",
        "x = y.z",
    ] {
        assert!(
            matches!(parse(src), Err(ParseError::Unsupported { .. })),
            "{src}"
        );
    }
}

#[test]
fn malformed_input_is_a_syntax_error() {
    match parse("x = (1 +\n") {
        Err(ParseError::Syntax { .. }) => {}
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        parse("if x\n    y = 1"),
        Err(ParseError::Syntax { .. })
    ));
}

#[test]
fn folded_factorial_prints_canonically() {
    let p = parse(&fixture("factorial_cf_final.py")).unwrap();
    let lines: Vec<String> = print_program(&p).lines().map(str::to_string).collect();
    assert_eq!(
        lines,
        [
            "n = int(input())",
            "tmp = 1",
            "m = 1",
            "while n > 1:",
            "    m = m * n",
            "    n = n - 1",
            "print(m)"
        ]
    );
}

#[test]
fn empty_program_prints_pass() {
    assert_eq!(print_program(&Program::default()), "pass\n");
}

#[test]
fn round_trip_preserves_structure() {
    let srcs = [
        "x = (-1) ** 2\ny = -x ** 2\nz = 2 ** -1\nw = -(-1)\n",
        "a = (1 + 2) * 3 - (4 - 5)\nb = 1 - (2 - 3)\nc = not (a and b) or c\n",
        "if a:\n    pass\nelif b:\n    x = 1\nelse:\n    x = 2\n",
        "def f(a, b):\n    return a[1:] + b[:2] + a[i][j]\n",
        "s = 'it\\'s' + \"x\\n\"\nv = 1e-05 + 0.1 + 1e+16 + 2.5\n",
        "x += 1; y -= 2\nfor i in range(3): print(i)\n",
        "a = (b < c) == d\nl.append([1, [2, 3]])\n",
    ];
    for src in srcs {
        let p = parse(src).unwrap();
        let text = print_program(&p);
        let q = parse(&text).unwrap_or_else(|e| panic!("{text}: {e}"));
        assert_eq!(p, q, "{text}");
        assert_eq!(text, print_program(&q));
    }
}

#[test]
fn vars_examples() {
    let e = cpcf_core::lang::parse_expr("m * n").unwrap();
    assert_eq!(vars_of(&e), set(&["m", "n"]));
    let s = parse("tmp = n - 1").unwrap();
    assert_eq!(vars_of(&s.body[0]), set(&["n", "tmp"]));
    let f = parse("for i in range(k):\n    s = s + i").unwrap();
    assert_eq!(vars_of(&f.body[0]), set(&["i", "k", "s"]));
    let d = parse("def g(a):\n    return h(a)").unwrap();
    assert_eq!(vars_of(&d), set(&["a"]));
}

#[test]
fn substitute_examples() {
    let g = cpcf_core::lang::parse_expr("n > 1").unwrap();
    let r = substitute(&g, "n", "tmp").unwrap();
    assert_eq!(cpcf_core::lang::print_expr(&r), "tmp > 1");

    let s = parse("m = m * n").unwrap().body.remove(0);
    assert_eq!(substitute(&s, "m", "m").unwrap(), s);

    let s = parse("x = 1").unwrap().body.remove(0);
    assert!(substitute(&s, "x", "y").is_err());
}

#[test]
fn substitute_laws() {
    let s = parse("while a < n:\n    print(a + b)\n    c = a * 2")
        .unwrap()
        .body
        .remove(0);
    let out = substitute(&s, "a", "z").unwrap();
    let mut expect = vars_of(&s);
    expect.remove("a");
    expect.insert("z".into());
    assert_eq!(vars_of(&out), expect);
    assert_eq!(substitute(&out, "z", "a").unwrap(), s);
}

#[test]
fn expression_context_plugs_hole() {
    let e = cpcf_core::lang::parse_expr("x + f(y * 2)").unwrap();
    let ctx = ExprContext::new(e, vec![1, 0]).unwrap();
    assert_eq!(cpcf_core::lang::print_expr(ctx.focus()), "y * 2");
    let plugged = ctx.plug(cpcf_core::lang::Expr::int(7));
    assert_eq!(cpcf_core::lang::print_expr(&plugged), "x + f(7)");
    assert!(ExprContext::new(plugged, vec![5]).is_none());
}
