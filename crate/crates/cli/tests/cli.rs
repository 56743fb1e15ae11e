mod common;

use std::fs;

use common::*;

use cpcf_core::lang::{parse, print_program};

fn path(name: &str) -> String {
    fixture(name).to_str().unwrap().to_string()
}

#[test]
fn annotations_match_goldens() {
    for (flag, program, golden) in [
        ("--cp", "factorial_cp.py", "factorial_cp.annotations.txt"),
        ("--cf", "factorial_cf.py", "factorial_cf.annotations.txt"),
    ] {
        let (code, out, err) = cpcf(&["annotate", flag, &path(program)]);
        assert_eq!(code, 0, "{err}");
        assert_eq!(out, fs::read_to_string(fixture(golden)).unwrap(), "{flag}");
    }
}

#[test]
fn annotate_needs_exactly_one_analysis() {
    assert_eq!(cpcf(&["annotate", &path("factorial.py")]).0, 2);
    assert_eq!(
        cpcf(&["annotate", "--cp", "--cf", &path("factorial.py")]).0,
        2
    );
}

#[test]
fn optimize_phases_and_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let trace = tmp.path().join("trace.txt");
    let (code, out, _) = cpcf(&[
        "optimize",
        &path("factorial_cp.py"),
        "--phase",
        "cp",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(
        out,
        fs::read_to_string(fixture("factorial_cp_final.py")).unwrap()
    );
    let rules: Vec<String> = fs::read_to_string(&trace)
        .unwrap()
        .lines()
        .map(|l| l.split_whitespace().nth(2).unwrap().to_string())
        .collect();
    assert_eq!(rules, ["CP3", "CP4", "CP2", "CP1"]);

    let (code, out, _) = cpcf(&["optimize", &path("factorial_cf.py")]);
    assert_eq!(code, 0);
    assert_eq!(out, fs::read_to_string(fixture("factorial.py")).unwrap());
}

#[test]
fn verify_exit_codes() {
    let manifest = path("factorial.json");
    let (code, out, _) = cpcf(&[
        "verify",
        &path("factorial.py"),
        &path("factorial_cf.py"),
        "--manifest",
        &manifest,
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("yes after "), "{out}");

    let tmp = tempfile::tempdir().unwrap();
    let bug = tmp.path().join("bug.py");
    let (code, _, err) = cpcf(&[
        "perturb",
        &path("factorial.py"),
        "--bug",
        "--manifest",
        &manifest,
        "-o",
        bug.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let (code, out, _) = cpcf(&[
        "verify",
        &path("factorial.py"),
        bug.to_str().unwrap(),
        "--manifest",
        &manifest,
        "--json",
    ]);
    assert_eq!(code, 1);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["witness"].is_object(), "{out}");
}

#[test]
fn usage_and_input_errors_exit_two() {
    assert_eq!(cpcf(&[]).0, 2);
    assert_eq!(cpcf(&["frobnicate"]).0, 2);
    assert_eq!(cpcf(&["parse", "/nonexistent/file.py"]).0, 2);

    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.py");
    fs::write(&bad, "class A:\n    pass\n").unwrap();
    let (code, _, err) = cpcf(&["parse", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error: "), "{err}");
}

#[test]
fn help_lists_every_verb() {
    let (code, out, _) = cpcf(&["--help"]);
    assert_eq!(code, 0);
    for verb in [
        "parse", "annotate", "optimize", "verify", "perturb", "dataset", "prompts", "score",
    ] {
        assert!(out.contains(verb), "{verb}");
    }
}

#[test]
fn perturbations_stay_equivalent() {
    let tmp = tempfile::tempdir().unwrap();
    for kind in ["cp", "cf", "cp_cf"] {
        let out = tmp.path().join(format!("{kind}.py"));
        let (code, _, err) = cpcf(&[
            "perturb",
            &path("factorial.py"),
            "--kind",
            kind,
            "--seed",
            "3",
            "--obfuscate",
            "-o",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{kind}: {err}");
        let text = fs::read_to_string(&out).unwrap();
        assert_eq!(print_program(&parse(&text).unwrap()), text);
        let (code, _, _) = cpcf(&[
            "verify",
            &path("factorial.py"),
            out.to_str().unwrap(),
            "--manifest",
            &path("factorial.json"),
        ]);
        assert_eq!(code, 0, "{kind}");
    }
    // Nothing to perturb.
    let trivial = tmp.path().join("trivial.py");
    fs::write(&trivial, "print(1)\n").unwrap();
    assert_eq!(
        cpcf(&["perturb", trivial.to_str().unwrap(), "--kind", "cp"]).0,
        1
    );
}

#[test]
fn score_verb_reports_tables_and_json() {
    let dataset = dataset();
    let tmp = tempfile::tempdir().unwrap();
    let mut rows = String::from("algorithm,prompt,chatbot,round,variant,answer\n");
    for v in ["cp", "cf", "cp_cf"] {
        rows.push_str(&format!("fibonacci,P1,bot,1,{v},yes\n"));
    }
    rows.push_str("fibonacci,P2,bot,1,cp,no\n");
    let log = tmp.path().join("runs.csv");
    fs::write(&log, &rows).unwrap();
    let json = tmp.path().join("report.json");
    let (code, out, err) = cpcf(&[
        "score",
        "--log",
        log.to_str().unwrap(),
        "--dataset",
        dataset.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("100.00%"), "{out}");
    assert!(out.contains("0.00%"), "{out}");
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(v["design"]["reading"], "neither");
    assert_eq!(
        v["report"]["correct_class"]["rows"][0]["cells"][0],
        serde_json::json!(100.0)
    );

    fs::write(&log, format!("{rows}nosuch,P1,bot,1,cp,yes\n")).unwrap();
    let (code, _, err) = cpcf(&[
        "score",
        "--log",
        log.to_str().unwrap(),
        "--dataset",
        dataset.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("nosuch"), "{err}");
}
