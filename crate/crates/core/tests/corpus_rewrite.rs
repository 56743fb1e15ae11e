use cpcf_core::interp::{equivalent, TestManifest, VerdictKind};
use cpcf_core::lang::{parse, print_program, Program};
use cpcf_core::rewrite::{normalize, replay};

fn corpus() -> Vec<(String, Program, TestManifest)> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut out = Vec::new();
    for e in std::fs::read_dir(&dir).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "py") {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            let prog = parse(&std::fs::read_to_string(&p).unwrap()).unwrap();
            let m = TestManifest::load(dir.join(format!("{name}.json"))).unwrap();
            out.push((name, prog, m));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

#[test]
fn normalize_preserves_corpus_semantics() {
    for (name, p, m) in corpus() {
        let (out, trace) = normalize(&p).unwrap();
        if !trace.is_empty() {
            println!("== {name}\n{trace}{}", print_program(&out));
        }
        assert_eq!(
            equivalent(&p, &out, &m).unwrap().equivalent,
            VerdictKind::Yes,
            "{name}"
        );
        assert_eq!(replay(&p, &trace), out);
        let (again, t2) = normalize(&out).unwrap();
        assert!(t2.is_empty(), "{name} not idempotent:\n{t2}");
        assert_eq!(again, out);
    }
}
