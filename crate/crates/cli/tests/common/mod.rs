#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use serde::Deserialize;

use cpcf_cli::prompt::PromptKind;
use cpcf_cli::score::{Answer, ClassCounts, Count, LogRow, Tally, Truth};
use cpcf_core::perturb::dataset::{Class, VARIANTS};

pub fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fixture(name: &str) -> PathBuf {
    root().join("fixtures").join(name)
}

/// Runs the CLI in-process and returns (exit code, stdout, stderr).
pub fn cpcf(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("cpcf").chain(args.iter().copied());
    let code = cpcf_cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

/// A seed-42 dataset of the corpus, generated once per test binary.
pub fn dataset() -> &'static Path {
    static DIR: OnceLock<(tempfile::TempDir, PathBuf)> = OnceLock::new();
    let (_, out) = DIR.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("dataset");
        let corpus = root().join("corpus");
        let (code, _, err) = cpcf(&[
            "dataset",
            "--corpus",
            corpus.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
        (dir, out)
    });
    out
}

#[derive(Debug, Deserialize)]
pub struct PublishedRow {
    pub label: String,
    pub cells: Vec<f64>,
    pub average: f64,
}

#[derive(Debug, Deserialize)]
pub struct PublishedTable {
    pub rows: Vec<PublishedRow>,
    #[serde(default)]
    pub footer: Vec<f64>,
}

#[derive(Debug, Deserialize)]
pub struct Published {
    pub chatbots: Vec<String>,
    pub correct_class: PublishedTable,
    pub multi_class: PublishedTable,
}

pub fn published() -> Published {
    let text = std::fs::read_to_string(fixture("published_accuracy.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

impl PublishedTable {
    pub fn row(&self, label: &str) -> &PublishedRow {
        self.rows.iter().find(|r| r.label == label).unwrap()
    }
}

/// Counts matching a two-decimal percentage exactly: `pct` of `scale`
/// hundredths of answers.
pub fn count(pct: f64, scale: u64) -> Count {
    Count::new((pct * scale as f64).round() as u64, 100 * scale)
}

/// Tallies whose percentages are the published class cells. Correct and
/// incorrect answers are in the ratio 3:4 of the multi-class prompts.
pub fn published_tally(p: &Published) -> Tally {
    let mut t = Tally::default();
    for (j, chatbot) in p.chatbots.iter().enumerate() {
        for k in PromptKind::ALL {
            let mut cell = ClassCounts::default();
            if k.multi_class() {
                let correct = p.multi_class.row(&format!("{k} / Correct")).cells[j];
                let incorrect = p.multi_class.row(&format!("{k} / Incorrect")).cells[j];
                cell.correct = count(correct, 300);
                cell.incorrect = count(incorrect, 400);
            } else {
                cell.correct = count(p.correct_class.row(k.name()).cells[j], 300);
            }
            t.prompts.insert((chatbot.clone(), k), cell);
        }
    }
    t
}

pub fn algorithms(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("algo{i:02}")).collect()
}

pub fn truth_for(algorithms: &[String]) -> Truth {
    let classes: BTreeMap<String, Class> = VARIANTS
        .iter()
        .map(|v| {
            let class = if v.starts_with("bug_") {
                Class::Incorrect
            } else {
                Class::Correct
            };
            (v.to_string(), class)
        })
        .collect();
    Truth {
        algorithms: algorithms
            .iter()
            .map(|a| (a.clone(), classes.clone()))
            .collect(),
    }
}

/// One answer per non-reference snippet of every prompt submission;
/// `answer` decides each one.
pub fn synthetic_log(
    truth: &Truth,
    chatbots: &[String],
    rounds: u32,
    answer: &dyn Fn(&str, PromptKind, &str, u32, &str) -> Answer,
) -> Vec<LogRow> {
    let mut log = Vec::new();
    for a in truth.algorithms.keys() {
        for k in PromptKind::ALL {
            for c in chatbots {
                for round in 1..=rounds {
                    for v in k.variants().into_iter().filter(|v| *v != "ref") {
                        log.push(LogRow {
                            algorithm: a.clone(),
                            prompt: k,
                            chatbot: c.clone(),
                            round,
                            variant: v.to_string(),
                            answer: answer(a, k, c, round, v),
                        });
                    }
                }
            }
        }
    }
    log
}

pub fn truthful(v: &str) -> Answer {
    if v.starts_with("bug_") {
        Answer::No
    } else {
        Answer::Yes
    }
}
