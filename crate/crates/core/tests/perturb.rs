use std::path::PathBuf;

use cpcf_core::interp::{equivalent, run, TestManifest, VerdictKind};
use cpcf_core::lang::{parse, print_program, Program};
use cpcf_core::perturb::dataset::load_corpus;
use cpcf_core::perturb::{
    inject_bug, obfuscate, perturb, perturb_both, perturb_both_traced, perturb_cf,
    perturb_cf_traced, perturb_cp, perturb_cp_traced, NameMap, PerturbError, PerturbationKind,
};
use cpcf_core::rewrite::normalize;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> Program {
    parse(&std::fs::read_to_string(root().join("fixtures").join(name)).unwrap()).unwrap()
}

fn factorial_manifest() -> TestManifest {
    TestManifest::load(root().join("fixtures/factorial.json")).unwrap()
}

fn rename(p: &Program, from: &str, to: &str) -> Program {
    let mut names = NameMap::default();
    names.variables.insert(from.into(), to.into());
    names.apply(p)
}

#[test]
fn corpus_variants_are_equivalent_before_and_after_normalization() {
    let corpus = load_corpus(root().join("corpus")).unwrap();
    assert_eq!(corpus.len(), 11);
    for e in &corpus {
        let (norm_ref, _) = normalize(&e.program).unwrap();
        for kind in PerturbationKind::ALL {
            for seed in [0, 1, 2, 42] {
                let (v, trace) = perturb(&e.program, kind, seed)
                    .unwrap_or_else(|err| panic!("{} {kind} {seed}: {err}", e.name));
                assert!(
                    (2..=12).contains(&trace.len()),
                    "{} {kind}: depth {}",
                    e.name,
                    trace.len()
                );
                assert_eq!(trace.replay(&e.program), v);
                let verdict = equivalent(&e.program, &v, &e.manifest).unwrap();
                assert!(verdict.cases >= 20);
                assert_eq!(
                    verdict.equivalent,
                    VerdictKind::Yes,
                    "{} {kind} seed {seed}\n{}\n{:?}",
                    e.name,
                    print_program(&v),
                    verdict.witness
                );
                let (norm_v, _) = normalize(&v).unwrap();
                let back = equivalent(&norm_ref, &norm_v, &e.manifest).unwrap();
                assert!(
                    back.is_yes(),
                    "{} {kind} seed {seed}: normalized variant differs",
                    e.name
                );
            }
        }
    }
}

#[test]
fn same_seed_same_variant_and_seeds_differ() {
    let p = fixture("factorial.py");
    assert_eq!(perturb_both(&p, 7).unwrap(), perturb_both(&p, 7).unwrap());
    let distinct: std::collections::BTreeSet<String> = (0..10)
        .map(|s| print_program(&perturb_both(&p, s).unwrap()))
        .collect();
    assert!(distinct.len() > 5);
}

#[test]
fn some_seed_rebuilds_the_copy_propagation_example() {
    let target = rename(&fixture("factorial_cp.py"), "tmp", "t1");
    let p = fixture("factorial.py");
    let hit = (0..5000u64).find(|&s| perturb_cp(&p, s).is_ok_and(|q| q == target));
    let seed = hit.expect("no seed reaches the original copy-propagation example");
    let (_, trace) = perturb_cp_traced(&p, seed).unwrap();
    assert_eq!(trace.ops(), ["loop-copy", "rotate"]);
}

#[test]
fn constant_folding_perturbation_can_unfold_and_bump() {
    let p = fixture("factorial.py");
    let m = factorial_manifest();
    let (seed, q) = (0..2000u64)
        .find_map(|s| {
            let (q, t) = perturb_cf_traced(&p, s).ok()?;
            let ops = t.ops();
            (ops.contains(&"unfold") && ops.contains(&"bump")).then_some((s, q))
        })
        .expect("some seed unfolds a literal and bumps a loop");
    assert!(equivalent(&p, &q, &m).unwrap().is_yes(), "seed {seed}");
    let (back, _) = normalize(&q).unwrap();
    assert!(equivalent(&p, &back, &m).unwrap().is_yes());
}

#[test]
fn combined_perturbation_mixes_both_kinds() {
    let p = fixture("factorial.py");
    let cf_ops = ["unfold", "reuse", "bump", "dead-store", "hoist", "wrap"];
    let cp_ops = ["split", "route", "redundant-copy", "loop-copy", "rotate"];
    let mixed = (0..50u64).any(|s| {
        let (_, t) = perturb_both_traced(&p, s).unwrap();
        let ops = t.ops();
        ops.iter().any(|o| cf_ops.contains(o)) && ops.iter().any(|o| cp_ops.contains(o))
    });
    assert!(mixed);
}

#[test]
fn straight_line_print_has_no_copy_site() {
    let p = parse("print(1)\n").unwrap();
    assert!(matches!(
        perturb_cp(&p, 0),
        Err(PerturbError::NoOpportunity(PerturbationKind::Cp))
    ));
}

#[test]
fn print_five_unfolds_into_an_equivalent_constant_expression() {
    let p = parse("print(5)\n").unwrap();
    let m = TestManifest::script([vec![]]);
    for seed in 0..20 {
        let q = perturb_cf(&p, seed).unwrap();
        assert!(print_program(&q).contains("t1"), "{}", print_program(&q));
        assert!(equivalent(&p, &q, &m).unwrap().is_yes());
    }
}

#[test]
fn no_literals_no_constants_no_folding_site() {
    let p = parse("x = input()\ny = x\nprint(y)\n").unwrap();
    assert!(matches!(
        perturb_cf(&p, 3),
        Err(PerturbError::NoOpportunity(PerturbationKind::Cf))
    ));
    assert!(perturb_cp(&p, 3).is_ok());
}

#[test]
fn obfuscation_labels_and_inverse() {
    let corpus = load_corpus(root().join("corpus")).unwrap();
    let fib = corpus.iter().find(|e| e.name == "fibonacci").unwrap();
    let (q, _) = obfuscate(&fib.program);
    assert!(
        print_program(&q).starts_with("def f1(a):"),
        "{}",
        print_program(&q)
    );
    for e in &corpus {
        let (q, names) = obfuscate(&e.program);
        assert_eq!(names.inverse().apply(&q), e.program, "{}", e.name);
        let mut m = e.manifest.clone();
        if let cpcf_core::interp::Entry::Function(f) = &m.entry {
            m.entry = cpcf_core::interp::Entry::Function(names.function(f).unwrap().to_string());
        }
        let runs_ref: Vec<_> = m
            .generate_cases()
            .iter()
            .map(|c| run(&e.program, &e.manifest.entry, c, m.fuel))
            .collect();
        let runs_obf: Vec<_> = m
            .generate_cases()
            .iter()
            .map(|c| run(&q, &m.entry, c, m.fuel))
            .collect();
        assert_eq!(runs_ref, runs_obf, "{}", e.name);
    }

    let single = parse("x = int(input())\nprint(len([x, x]))\n").unwrap();
    let (q, _) = obfuscate(&single);
    assert_eq!(print_program(&q), "a = int(input())\nprint(len([a, a]))\n");
}

#[test]
fn bug_injection_yields_reproducible_witnesses() {
    let corpus = load_corpus(root().join("corpus")).unwrap();
    for e in &corpus {
        for seed in [0, 5] {
            let (mutant, bug) = inject_bug(&e.program, seed, &e.manifest).unwrap();
            let w = &bug.witness;
            let left = run(&e.program, &e.manifest.entry, &w.case, e.manifest.fuel);
            let right = run(&mutant, &e.manifest.entry, &w.case, e.manifest.fuel);
            assert_eq!((&left, &right), (&w.left, &w.right), "{}", e.name);
            assert_ne!(left, right);
            assert!(equivalent(&e.program, &mutant, &e.manifest)
                .unwrap()
                .is_no());
        }
    }
}

#[test]
fn dead_code_mutants_are_skipped() {
    let p = parse("x = 1\nprint(2)\n").unwrap();
    let m = TestManifest::script([vec![]]);
    for seed in 0..10 {
        let (_, bug) = inject_bug(&p, seed, &m).unwrap();
        assert_eq!(bug.stmt, 1);
    }
    let silent = parse("x = 1\ny = x + 2\n").unwrap();
    assert!(matches!(
        inject_bug(&silent, 0, &m),
        Err(PerturbError::NoKillableMutant { .. })
    ));
}
