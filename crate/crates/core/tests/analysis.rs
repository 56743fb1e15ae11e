use cpcf_core::analysis::cf::{
    abstract_eval, infer_cf, infer_cf_history, join_memory, join_value, AbstractMemory,
    AbstractValue,
};
use cpcf_core::analysis::cp::{infer_cp, infer_cp_history, st_closure, CopySet};
use cpcf_core::analysis::dump::{dump_cf, dump_cp};
use cpcf_core::lang::{parse, parse_expr, Literal, Program, StmtKind};

fn fixture(name: &str) -> Program {
    let src = std::fs::read_to_string(format!(
        "{}/../../fixtures/{name}",
        env!("CARGO_MANIFEST_DIR")
    ))
    .unwrap();
    parse(&src).unwrap()
}

fn k(i: i64) -> AbstractValue {
    AbstractValue::Const(Literal::Int(i))
}

use AbstractValue::{Err, Top};

fn mem(items: &[(&str, AbstractValue)]) -> AbstractMemory {
    items
        .iter()
        .map(|(x, v)| (x.to_string(), v.clone()))
        .collect()
}

fn copies(pairs: &[(&str, &str)]) -> CopySet {
    st_closure(pairs.iter().copied())
}

#[test]
fn closure_adds_transitive_pair() {
    let c = copies(&[("x", "y"), ("y", "z")]);
    assert!(c.contains("x", "z") && c.contains("z", "x"));
    assert_eq!(c.len(), 3);
    assert!(copies(&[("x", "x")]).is_empty());
}

#[test]
fn copy_annotations_of_factorial_cp() {
    let p = fixture("factorial_cp.py");
    let history = infer_cp_history(&p).unwrap();
    assert_eq!(history.len(), 3);
    let m = infer_cp(&p).unwrap();
    let nt = copies(&[("n", "tmp")]);
    // while header, then the three body statements
    assert_eq!((m.pre(3), m.post(3)), (&nt, &nt));
    assert_eq!((m.pre(4), m.post(4)), (&nt, &nt));
    assert_eq!((m.pre(5), m.post(5)), (&nt, &CopySet::new()));
    assert_eq!((m.pre(6), m.post(6)), (&CopySet::new(), &nt));
    assert_eq!(m.pre(7), &nt);
}

#[test]
fn dump_lists_every_statement() {
    let p = fixture("factorial_cp.py");
    let text = dump_cp(&p, &infer_cp(&p).unwrap());
    assert_eq!(text.lines().count(), 8);
    assert!(
        text.contains("while n > 1: ⊨ pre={n∼tmp} post={n∼tmp}"),
        "{text}"
    );
    assert!(
        text.contains("    tmp = n - 1 ⊨ pre={n∼tmp} post={}"),
        "{text}"
    );
}

#[test]
fn value_joins() {
    assert_eq!(join_value(&k(1), &k(1)), k(1));
    assert_eq!(join_value(&k(1), &k(2)), Top);
    assert_eq!(join_value(&Top, &Err), Err);
    assert_eq!(join_value(&k(3), &Err), Err);
}

#[test]
fn memory_joins() {
    assert_eq!(
        join_memory(&mem(&[("tmp", k(1))]), &mem(&[("tmp", k(2))])),
        mem(&[("tmp", Top)])
    );
    assert_eq!(
        join_memory(&mem(&[("n", Top)]), &AbstractMemory::new()),
        mem(&[("n", Top)])
    );
    let c1 = mem(&[("n", Top), ("tmp", k(1)), ("m", k(1))]);
    let c4 = mem(&[("n", Top), ("tmp", k(1)), ("m", Top)]);
    assert_eq!(join_memory(&c1, &c4), c4);
}

#[test]
fn abstract_evaluation() {
    let c = mem(&[("n", Top), ("tmp", k(1))]);
    assert_eq!(abstract_eval(&parse_expr("2*tmp - 1").unwrap(), &c), k(1));
    assert_eq!(abstract_eval(&parse_expr("n > tmp").unwrap(), &c), Top);
    assert_eq!(abstract_eval(&parse_expr("1 // 0").unwrap(), &c), Err);
    assert_eq!(abstract_eval(&parse_expr("q + 1").unwrap(), &c), Err);
    assert_eq!(abstract_eval(&parse_expr("int(input())").unwrap(), &c), Top);
    assert_eq!(
        abstract_eval(&parse_expr("len('abc') + abs(-2)").unwrap(), &c),
        k(5)
    );
}

#[test]
fn constant_annotations_of_factorial_cf() {
    let p = fixture("factorial_cf.py");
    let history = infer_cf_history(&p).unwrap();
    assert_eq!(history.len(), 3);
    let m = infer_cf(&p).unwrap();
    let c1 = mem(&[("n", Top), ("tmp", k(1)), ("m", k(1))]);
    let c2 = mem(&[("n", Top), ("tmp", k(2)), ("m", k(1))]);
    let c3 = mem(&[("n", Top), ("tmp", k(2)), ("m", Top)]);
    let c4 = mem(&[("n", Top), ("tmp", k(1)), ("m", Top)]);
    assert_eq!(m.post(2), &c1);
    assert_eq!((m.pre(3), m.post(3)), (&c4, &c4));
    assert_eq!((m.pre(4), m.post(4)), (&c4, &c3));
    assert_eq!((m.pre(5), m.post(5)), (&c3, &c3));
    assert_eq!((m.pre(6), m.post(6)), (&c3, &c3));
    assert_eq!((m.pre(7), m.post(7)), (&c3, &c4));
    assert_eq!((m.pre(8), m.post(8)), (&c4, &c4));
    // the first round reaches the loop body with m still constant
    assert_eq!(history[1].post(4), &c2);
}

#[test]
fn straight_line_folding() {
    let p = parse("x = 3\ny = x + 4").unwrap();
    let m = infer_cf(&p).unwrap();
    assert_eq!(m.post(1), &mem(&[("x", k(3)), ("y", k(7))]));
}

#[test]
fn input_is_unknown_everywhere_after() {
    let p = parse("n = int(input())\nx = n\nprint(x)").unwrap();
    let m = infer_cf(&p).unwrap();
    assert_eq!(m.post(0), &mem(&[("n", Top)]));
    assert_eq!(m.post(2), &mem(&[("n", Top), ("x", Top)]));
}

#[test]
fn constant_guard_selects_branch() {
    let p = parse("if False:\n    x = 1\nelse:\n    x = 2").unwrap();
    assert_eq!(infer_cf(&p).unwrap().post(0), &mem(&[("x", k(2))]));
}

#[test]
fn empty_range_skips_loop() {
    let p = parse("s = 0\nfor i in range(0):\n    s = s + 1\nprint(s)").unwrap();
    let m = infer_cf(&p).unwrap();
    assert_eq!(m.pre(3), &mem(&[("s", k(0))]));
    let p = parse("s = 0\nfor i in range(2):\n    s = s + 1\nprint(s)").unwrap();
    let m = infer_cf(&p).unwrap();
    assert_eq!(m.pre(3), &mem(&[("i", Top), ("s", Top)]));
}

#[test]
fn functions_start_from_unknown_locals() {
    let p = parse("def f(a):\n    b = 2\n    return a + b\nx = 1").unwrap();
    let m = infer_cf(&p).unwrap();
    assert_eq!(m.post(2), &mem(&[("a", Top), ("b", k(2))]));
    assert_eq!(m.post(3), &mem(&[("x", k(1))]));
    let StmtKind::FunDef { .. } = &p.body[0].kind else {
        panic!()
    };
}

#[test]
fn mutation_demotes() {
    let p = parse("a = [1]\nb = 3\na.append(b)\nprint(a)").unwrap();
    let m = infer_cf(&p).unwrap();
    assert_eq!(m.post(2), &mem(&[("a", Top), ("b", k(3))]));
}

#[test]
fn cf_dump_format() {
    let p = fixture("factorial_cf.py");
    let text = dump_cf(&p, &infer_cf(&p).unwrap());
    assert!(
        text.contains("    m = m * n ⊨ pre={m:⊤, n:⊤, tmp:2} post={m:⊤, n:⊤, tmp:2}"),
        "{text}"
    );
}
