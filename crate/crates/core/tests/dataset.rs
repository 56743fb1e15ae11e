use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use cpcf_core::interp::{equivalent, run, VerdictKind};
use cpcf_core::lang::parse;
use cpcf_core::par::ExecMode;
use cpcf_core::perturb::dataset::{
    build_dataset, load_corpus, Class, DatasetReport, Labels, VARIANTS,
};

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

#[test]
fn dataset_is_complete_labelled_and_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let report = build_dataset(corpus(), &first, 42, ExecMode::Parallel).unwrap();
    assert!(report.all_ok(), "{report:?}");
    assert_eq!(
        DatasetReport::load(first.join("dataset.json")).unwrap(),
        report
    );

    let files = snapshot(&first);
    let programs: Vec<&String> = files.keys().filter(|k| k.ends_with(".py")).collect();
    assert_eq!(programs.len(), 88);

    let entries = load_corpus(corpus()).unwrap();
    for e in &entries {
        let dir = first.join(&e.name);
        let labels = Labels::load(dir.join("labels.json")).unwrap();
        assert_eq!(labels.variants.len(), 8);
        let load =
            |v: &str| parse(&fs::read_to_string(dir.join(format!("{v}.py"))).unwrap()).unwrap();
        let reference = load("ref");
        // Renaming alone must not change what the reference computes.
        for case in e.manifest.generate_cases() {
            assert_eq!(
                run(&e.program, &e.manifest.entry, &case, e.manifest.fuel),
                run(&reference, &labels.manifest.entry, &case, e.manifest.fuel),
                "{}",
                e.name
            );
        }
        for (i, v) in VARIANTS.iter().enumerate() {
            let label = labels.get(v).unwrap();
            let verdict = equivalent(&reference, &load(v), &labels.manifest).unwrap();
            assert_eq!(verdict.equivalent, label.equivalent, "{} {v}", e.name);
            let (class, kind) = if i < 4 {
                (Class::Correct, VerdictKind::Yes)
            } else {
                (Class::Incorrect, VerdictKind::No)
            };
            assert_eq!(
                (label.class, label.equivalent),
                (class, kind),
                "{} {v}",
                e.name
            );
            assert_eq!(label.bug.is_some(), i >= 4);
            assert!(verdict.cases >= 20);
        }
        let text = fs::read_to_string(dir.join("ref.py")).unwrap();
        assert!(!text.contains(&e.name), "{}: original name leaks", e.name);
    }

    let second = tmp.path().join("second");
    build_dataset(corpus(), &second, 42, ExecMode::Sequential).unwrap();
    assert_eq!(files, snapshot(&second), "reruns differ");

    let other = tmp.path().join("other");
    build_dataset(corpus(), &other, 43, ExecMode::Parallel).unwrap();
    assert_ne!(files, snapshot(&other));
}
