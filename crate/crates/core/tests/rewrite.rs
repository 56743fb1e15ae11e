use cpcf_core::interp::{equivalent, TestManifest, VerdictKind};
use cpcf_core::lang::{parse, print_program, Program};
use cpcf_core::rewrite::{apply_cf, apply_cp, garbage_collect, normalize, replay, Rule};

fn fixture(name: &str) -> Program {
    let src = std::fs::read_to_string(format!(
        "{}/../../fixtures/{name}",
        env!("CARGO_MANIFEST_DIR")
    ))
    .unwrap();
    parse(&src).unwrap()
}

fn manifest() -> TestManifest {
    TestManifest::load(format!(
        "{}/../../fixtures/factorial.json",
        env!("CARGO_MANIFEST_DIR")
    ))
    .unwrap()
}

fn same(a: &Program, b: &Program) {
    assert_eq!(print_program(a), print_program(b));
}

#[test]
fn copy_propagation_chain() {
    let start = fixture("factorial_cp.py");
    let (out, trace) = apply_cp(&start).unwrap();
    assert_eq!(
        trace.rules(),
        [Rule::Cp3, Rule::Cp4, Rule::Cp2, Rule::Cp1],
        "{trace}"
    );
    same(&out, &fixture("factorial_cp_final.py"));
    let chain = [
        "factorial_cp_step1.py",
        "factorial_cp_step2.py",
        "factorial_cp_step3.py",
        "factorial_cp_final.py",
    ];
    let mut cur = start.clone();
    for (step, name) in trace.steps.iter().zip(chain) {
        cur = step.edit.apply(&cur);
        same(&cur, &fixture(name));
    }
    same(&replay(&start, &trace), &out);
    let (collected, gc) = garbage_collect(&out).unwrap();
    assert_eq!(gc.rules(), [Rule::Gc]);
    same(&collected, &fixture("factorial.py"));
}

#[test]
fn constant_folding_chain() {
    let start = fixture("factorial_cf.py");
    let (out, trace) = apply_cf(&start).unwrap();
    same(&out, &fixture("factorial_cf_final.py"));
    let rules = trace.rules();
    let folds = rules.iter().take_while(|r| **r == Rule::Cf1).count();
    assert!(folds >= 1);
    assert_eq!(
        &rules[folds..],
        [Rule::Cf3a, Rule::Cf3b, Rule::Cf2],
        "{trace}"
    );
    let mut cur = start.clone();
    for (i, step) in trace.steps.iter().enumerate() {
        cur = step.edit.apply(&cur);
        if i + 1 < folds {
            continue;
        }
        let expected = match i + 1 - folds {
            0 => "factorial_cf_step1.py",
            1 => "factorial_cf_step2.py",
            2 => "factorial_cf_step3.py",
            3 => "factorial_cf_final.py",
            _ => unreachable!(),
        };
        same(&cur, &fixture(expected));
    }
    let (cp_out, cp_trace) = apply_cp(&out).unwrap();
    assert!(cp_trace.is_empty());
    let (collected, _) = garbage_collect(&cp_out).unwrap();
    same(&collected, &fixture("factorial.py"));
}

#[test]
fn normalize_both_variants_to_six_lines() {
    for name in ["factorial_cp.py", "factorial_cf.py"] {
        let (out, trace) = normalize(&fixture(name)).unwrap();
        same(&out, &fixture("factorial.py"));
        let v = equivalent(&fixture(name), &out, &manifest()).unwrap();
        assert_eq!(v.equivalent, VerdictKind::Yes);
        same(&replay(&fixture(name), &trace), &out);
    }
    let six = fixture("factorial.py");
    let (again, t) = normalize(&six).unwrap();
    assert!(t.is_empty());
    same(&again, &six);
}

#[test]
fn small_examples() {
    let p = parse("x = 2 + 3").unwrap();
    same(&apply_cf(&p).unwrap().0, &parse("x = 5").unwrap());

    let p = parse("if 1 < 2:\n    y = 1\nelse:\n    y = 2").unwrap();
    let (out, t) = apply_cf(&p).unwrap();
    same(&out, &parse("y = 1").unwrap());
    assert_eq!(t.rules()[0], Rule::Cf4IfTrue);

    let p = parse("b = int(input())\na = b\nprint(a)").unwrap();
    let (out, t) = apply_cp(&p).unwrap();
    assert_eq!(t.rules(), [Rule::Cp2]);
    same(&out, &parse("b = int(input())\nprint(b)\na = b").unwrap());

    let p = parse("n = int(input())\nprint(n * 2)").unwrap();
    assert!(apply_cp(&p).unwrap().1.is_empty());

    let p = parse("x = input()\nprint(1)").unwrap();
    assert!(garbage_collect(&p).unwrap().1.is_empty());
    let p = parse("a = 1\na = 2\nprint(a)").unwrap();
    same(
        &garbage_collect(&p).unwrap().0,
        &parse("a = 2\nprint(a)").unwrap(),
    );
}

#[test]
fn trace_lines() {
    let (_, trace) = apply_cp(&fixture("factorial_cp.py")).unwrap();
    let text = trace.to_string();
    let first = text.lines().next().unwrap();
    assert_eq!(
        first,
        "step 1: CP3 at stmt 5: «tmp = n - 1 ⏎ n = tmp» => «n = n - 1 ⏎ tmp = n»"
    );
}
