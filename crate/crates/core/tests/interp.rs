use cpcf_core::interp::{
    equivalent, run, Case, Entry, ErrorKind, Status, TestManifest, VerdictKind, DEFAULT_FUEL,
};
use cpcf_core::lang::{parse, Program};

fn fixture_path(name: &str) -> String {
    format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn fixture(name: &str) -> Program {
    parse(&std::fs::read_to_string(fixture_path(name)).unwrap()).unwrap()
}

fn tape(items: &[&str]) -> Case {
    Case::Tape(items.iter().map(|s| s.to_string()).collect())
}

fn script(src: &str, input: &[&str]) -> cpcf_core::interp::Outcome {
    run(
        &parse(src).unwrap(),
        &Entry::Script,
        &tape(input),
        DEFAULT_FUEL,
    )
}

#[test]
fn factorial_variants_compute_factorial() {
    let out = run(
        &fixture("factorial_cp.py"),
        &Entry::Script,
        &tape(&["5"]),
        DEFAULT_FUEL,
    );
    assert_eq!(out.stdout, ["120"]);
    assert_eq!(out.status, Status::Normal);
    let out = run(
        &fixture("factorial_cf.py"),
        &Entry::Script,
        &tape(&["1"]),
        DEFAULT_FUEL,
    );
    assert_eq!(out.stdout, ["1"]);
    let out = run(
        &fixture("factorial_cf.py"),
        &Entry::Script,
        &tape(&["6"]),
        DEFAULT_FUEL,
    );
    assert_eq!(out.stdout, ["720"]);
}

#[test]
fn runtime_errors_are_reported() {
    assert_eq!(
        script("x = 1 // 0", &[]).status,
        Status::RuntimeError(ErrorKind::DivByZero)
    );
    assert_eq!(
        script("print(y)", &[]).status,
        Status::RuntimeError(ErrorKind::UnboundVariable)
    );
    assert_eq!(
        script("a = [1]\nprint(a[3])", &[]).status,
        Status::RuntimeError(ErrorKind::IndexOutOfRange)
    );
    assert_eq!(
        script("x = input()", &[]).status,
        Status::RuntimeError(ErrorKind::TapeExhausted)
    );
}

#[test]
fn non_termination_exhausts_fuel() {
    let out = run(
        &parse("while True:\n    pass").unwrap(),
        &Entry::Script,
        &tape(&[]),
        1000,
    );
    assert_eq!(out.status, Status::FuelExhausted);
}

#[test]
fn lists_alias() {
    let out = script(
        "a = [1, 2]\nb = a\nb[0] = 9\nprint(a[0])\nc = a[:]\nc[1] = 7\nprint(a)",
        &[],
    );
    assert_eq!(out.stdout, ["9", "[9, 2]"]);
}

#[test]
fn python_arithmetic() {
    let out = script("print(-7 // 2, -7 % 2, 7 / 2, 2 ** 10, 1 / 4 + 0.5)", &[]);
    assert_eq!(out.stdout, ["-4 1 3.5 1024 0.75"]);
    let out = script(
        "print(True + 1, 'ab' * 2, [1] + [2], str(3.0), int('12'))",
        &[],
    );
    assert_eq!(out.stdout, ["2 abab [1, 2] 3.0 12"]);
}

#[test]
fn function_entry_returns_value() {
    let p = parse("def f(xs):\n    xs.append(1)\n    return len(xs)").unwrap();
    let out = run(
        &p,
        &Entry::Function("f".into()),
        &Case::Args(vec![serde_json::json!([5, 6])]),
        DEFAULT_FUEL,
    );
    assert_eq!(out.result.as_deref(), Some("3"));
}

#[test]
fn factorial_variants_are_equivalent() {
    let m = TestManifest::load(fixture_path("factorial.json")).unwrap();
    let base = fixture("factorial_cp.py");
    for other in [
        "factorial_cp_step1.py",
        "factorial_cp_final.py",
        "factorial_cf.py",
        "factorial_cf_final.py",
        "factorial.py",
    ] {
        let v = equivalent(&base, &fixture(other), &m).unwrap();
        assert_eq!(v.equivalent, VerdictKind::Yes, "{other}");
        assert!(v.cases >= 20);
    }
}

#[test]
fn a_bug_is_witnessed() {
    let m = TestManifest::load(fixture_path("factorial.json")).unwrap();
    let base = fixture("factorial.py");
    let buggy =
        parse("n = int(input())\nm = 1\nwhile n > 2:\n    m = m * n\n    n = n - 1\nprint(m)")
            .unwrap();
    let v = equivalent(&base, &buggy, &m).unwrap();
    assert_eq!(v.equivalent, VerdictKind::No);
    let w = v.witness.unwrap();
    assert_ne!(w.left, w.right);
}

#[test]
fn self_containing_lists_print_with_ellipsis() {
    let out = script(
        "xs = [1, 2]\nxs[0] = xs\nprint(xs)\nprint(xs == xs)\nprint(xs.count(xs))",
        &[],
    );
    assert_eq!(out.status, Status::Normal);
    assert_eq!(out.stdout, ["[[...], 2]", "True", "1"]);

    let out = script("d = dict()\nd[1] = d\nprint(d)", &[]);
    assert_eq!(out.stdout, ["{1: {...}}"]);
}

#[test]
fn comparing_distinct_cyclic_lists_fails_cleanly() {
    let out = script("a = [0]\na[0] = a\nb = [0]\nb[0] = b\nprint(a == b)", &[]);
    assert_eq!(out.status, Status::RuntimeError(ErrorKind::RecursionDepth));
    let out = script(
        "a = [0]\na[0] = a\nb = [0]\nb[0] = b\nc = [a, b]\nc.sort()",
        &[],
    );
    assert_eq!(out.status, Status::RuntimeError(ErrorKind::RecursionDepth));
}

#[test]
fn very_deep_nesting_is_a_recursion_error() {
    let out = script(
        "xs = []\ni = 0\nwhile i < 1000:\n    xs = [xs]\n    i = i + 1\nprint(len(xs))\nprint(xs)",
        &[],
    );
    assert_eq!(out.status, Status::RuntimeError(ErrorKind::RecursionDepth));
    let out = script("xs = []\ni = 0\nwhile i < 1000:\n    xs = [xs]\n    i = i + 1\nprint(len(str(xs[0][0])) > 0)", &[]);
    assert_eq!(out.status, Status::RuntimeError(ErrorKind::RecursionDepth));
}

#[test]
fn deeply_nested_values_are_released_without_overflow() {
    // Runs until the fuel is gone, then drops a list nested far deeper
    // than the host stack could unwind recursively.
    let out = script(
        "xs = []\ni = 0\nwhile i < 300000:\n    xs = [xs]\n    i = i + 1\nprint(i)",
        &[],
    );
    assert_eq!(out.status, Status::FuelExhausted);
}
