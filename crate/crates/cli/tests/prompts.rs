mod common;

use std::fs;
use std::path::Path;

use common::*;

use cpcf_cli::cli::load_variants;
use cpcf_cli::prompt::{render_prompt, PromptKind, CONTEXTLESS_PREAMBLE, CONTEXTUAL_PREAMBLE};
use cpcf_core::lang::{parse, print_program, StmtKind};

const CONTEXTUAL_LINES: [&str; 5] = [
    "You are a chatbot for comparing the semantics of small Python programs.",
    "I will provide you with multiple implementations of the same Python function.",
    "The first function is the reference version.",
    "The other functions are perturbed with copy propagation, constant folding or a combination of the two.",
    "Tell me whether the functions are semantically equivalent to the reference version or not.",
];

fn render_all(out: &Path, seed: &str) {
    let (code, stdout, err) = cpcf(&[
        "prompts",
        "--dataset",
        dataset().to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        seed,
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("44"), "{stdout}");
}

/// Splits a prompt into (header, preamble, snippet source).
fn split(text: &str, kind: PromptKind) -> (&str, &str, &str) {
    let (header, rest) = text.split_once('\n').unwrap();
    let preamble = &rest[..kind.preamble().len()];
    (header, preamble, &rest[preamble.len()..])
}

fn function_defs(src: &str) -> usize {
    parse(src)
        .unwrap()
        .body
        .iter()
        .filter(|s| matches!(s.kind, StmtKind::FunDef { .. }))
        .count()
}

#[test]
fn preambles_are_verbatim() {
    assert_eq!(
        CONTEXTLESS_PREAMBLE,
        "Are the following functions semantically equivalent to the first one?"
    );
    assert_eq!(CONTEXTUAL_PREAMBLE, CONTEXTUAL_LINES.join("\n"));
    for k in PromptKind::ALL {
        let expected = if k.contextual() {
            CONTEXTUAL_PREAMBLE
        } else {
            CONTEXTLESS_PREAMBLE
        };
        assert_eq!(k.preamble(), expected, "{k}");
    }
}

#[test]
fn forty_four_prompt_files_with_expected_snippets() {
    let tmp = tempfile::tempdir().unwrap();
    render_all(tmp.path(), "0");
    let mut txt: Vec<String> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".txt"))
        .collect();
    txt.sort();
    assert_eq!(txt.len(), 44);

    for dir in fs::read_dir(dataset()).unwrap() {
        let dir = dir.unwrap().path();
        if !dir.is_dir() {
            continue;
        }
        let (labels, programs) = load_variants(&dir).unwrap();
        let reference = print_program(&programs[0].1);
        for k in PromptKind::ALL {
            let name = format!("{}_{}.txt", labels.algorithm, k.name().to_lowercase());
            let text = fs::read_to_string(tmp.path().join(&name)).unwrap();
            let (header, preamble, body) = split(&text, k);
            assert!(header.starts_with("# order-seed: "), "{name}");
            assert_eq!(preamble, k.preamble(), "{name}");
            assert_eq!(function_defs(body), k.snippet_count(), "{name}");
            assert_eq!(k.snippet_count(), if k.multi_class() { 8 } else { 4 });
            assert!(
                body.trim_start().starts_with(reference.trim_end()),
                "{name}: reference is not first"
            );
        }
    }
}

#[test]
fn prompt_order_is_recorded_and_reproducible() {
    let dir = dataset().join("fibonacci");
    let (_, programs) = load_variants(&dir).unwrap();
    let a = render_prompt(&programs, PromptKind::P4, 7).unwrap();
    let b = render_prompt(&programs, PromptKind::P4, 7).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.order[0], "ref");
    let mut sorted = a.order.clone();
    sorted.sort();
    let mut expected: Vec<String> = PromptKind::P4
        .variants()
        .iter()
        .map(|v| v.to_string())
        .collect();
    expected.sort();
    assert_eq!(sorted, expected);
    // The order follows the snippets in the text.
    let mut at = 0;
    for v in &a.order {
        let src = print_program(&programs.iter().find(|(n, _)| n == v).unwrap().1);
        let found = a.text[at..].find(&src).unwrap();
        at += found + src.len();
    }
    let orders: std::collections::BTreeSet<Vec<String>> = (0..20)
        .map(|s| render_prompt(&programs, PromptKind::P4, s).unwrap().order)
        .collect();
    assert!(orders.len() > 1);
}

#[test]
fn rerendering_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    render_all(a.path(), "3");
    render_all(b.path(), "3");
    for e in fs::read_dir(a.path()).unwrap() {
        let name = e.unwrap().file_name();
        assert_eq!(
            fs::read(a.path().join(&name)).unwrap(),
            fs::read(b.path().join(&name)).unwrap(),
            "{name:?}"
        );
    }
    let index: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.path().join("prompts.json")).unwrap()).unwrap();
    assert_eq!(index.as_array().unwrap().len(), 44);
}

#[test]
fn prompt_kinds_parse_from_names() {
    assert_eq!("p3".parse::<PromptKind>().unwrap(), PromptKind::P3);
    assert_eq!("4".parse::<PromptKind>().unwrap(), PromptKind::P4);
    assert!("P5".parse::<PromptKind>().is_err());
}
