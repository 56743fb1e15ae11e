//! Cross-checks the interpreter against the host `python3` on the corpus.

use std::io::Write;
use std::process::{Command, Stdio};

use cpcf_core::interp::{outcomes_match, run, Case, Entry, Outcome, Status, TestManifest};
use cpcf_core::lang::parse;

const DRIVER: &str = r#"
import json, sys
src = open(sys.argv[1]).read()
entry = sys.argv[2]
env = {}
exec(src, env)
for line in sys.stdin:
    args = json.loads(line)
    try:
        print("ok " + repr(env[entry](*args)))
    except Exception as e:
        print("error " + type(e).__name__)
"#;

fn corpus_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

#[test]
fn interpreter_agrees_with_host_python() {
    if Command::new("python3").arg("--version").output().is_err() {
        eprintln!("python3 not available; skipping host oracle");
        return;
    }
    let dir = corpus_dir();
    let mut algos: Vec<String> = std::fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension()? == "py").then(|| p.file_stem().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    algos.sort();
    assert_eq!(algos.len(), 11);
    let driver = tempfile_path("driver.py");
    std::fs::write(&driver, DRIVER).unwrap();
    for algo in algos {
        let src_path = dir.join(format!("{algo}.py"));
        let program = parse(&std::fs::read_to_string(&src_path).unwrap()).unwrap();
        let m = TestManifest::load(dir.join(format!("{algo}.json"))).unwrap();
        let Entry::Function(entry) = &m.entry else {
            panic!("corpus entries are functions")
        };
        let cases = m.generate_cases();
        assert!(cases.len() >= 20, "{algo}: {} cases", cases.len());
        let mut child = Command::new("python3")
            .arg(&driver)
            .arg(&src_path)
            .arg(entry)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .unwrap();
        {
            let stdin = child.stdin.as_mut().unwrap();
            for c in &cases {
                let Case::Args(args) = c else { panic!() };
                writeln!(stdin, "{}", serde_json::to_string(args).unwrap()).unwrap();
            }
        }
        let out = child.wait_with_output().unwrap();
        let lines: Vec<String> = String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .map(str::to_string)
            .collect();
        assert_eq!(lines.len(), cases.len(), "{algo}");
        for (c, line) in cases.iter().zip(&lines) {
            let ours = run(&program, &m.entry, c, m.fuel);
            if let Some(repr) = line.strip_prefix("ok ") {
                let host = Outcome {
                    stdout: Vec::new(),
                    result: Some(repr.to_string()),
                    status: Status::Normal,
                };
                assert!(
                    outcomes_match(&ours, &host, m.compare),
                    "{algo} {}: ours {ours:?}, python {repr}",
                    c.describe()
                );
            } else {
                assert!(
                    matches!(ours.status, Status::RuntimeError(_)),
                    "{algo} {}: python raised {line}, ours {ours:?}",
                    c.describe()
                );
            }
        }
    }
}

fn tempfile_path(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("cpcf-host-oracle-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}
