//! Scoring of labelled response logs into accuracy tables.
//!
//! A log is a CSV with columns `algorithm,prompt,chatbot,round,variant,answer`,
//! one row per yes/no answer about one snippet. Accuracies are computed from
//! exact counts; every average is taken over unrounded values and only the
//! emitted numbers are rounded (two decimals, half up).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use cpcf_core::perturb::dataset::{Class, Labels};

use crate::prompt::PromptKind;

/// Perturbed variants broken down per algorithm.
pub const PERTURBATIONS: [&str; 3] = ["cp", "cf", "cp_cf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogRow {
    pub algorithm: String,
    pub prompt: PromptKind,
    pub chatbot: String,
    pub round: u32,
    pub variant: String,
    pub answer: Answer,
}

#[derive(Debug, thiserror::Error)]
pub enum ScoreError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed log: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}: {1}")]
    Labels(String, String),
    #[error("log rows without a matching dataset entry:\n{}", .0.join("\n"))]
    LogTruthMismatch(Vec<String>),
}

pub fn read_log(reader: impl Read) -> Result<Vec<LogRow>, ScoreError> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    Ok(r.deserialize().collect::<Result<Vec<LogRow>, _>>()?)
}

pub fn load_log(path: impl AsRef<Path>) -> Result<Vec<LogRow>, ScoreError> {
    let path = path.as_ref();
    let f = fs::File::open(path).map_err(|source| ScoreError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_log(f)
}

pub fn write_log(rows: &[LogRow]) -> Result<String, ScoreError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| ScoreError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Ground truth: the class of every variant of every algorithm.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Truth {
    pub algorithms: BTreeMap<String, BTreeMap<String, Class>>,
}

impl Truth {
    pub fn from_labels<'a>(labels: impl IntoIterator<Item = &'a Labels>) -> Truth {
        let algorithms = labels
            .into_iter()
            .map(|l| {
                (
                    l.algorithm.clone(),
                    l.variants
                        .iter()
                        .map(|v| (v.variant.clone(), v.class))
                        .collect(),
                )
            })
            .collect();
        Truth { algorithms }
    }

    /// Reads `<dir>/<algorithm>/labels.json` for every algorithm directory.
    pub fn load(dir: impl AsRef<Path>) -> Result<Truth, ScoreError> {
        let dir = dir.as_ref();
        let io = |source| ScoreError::Io {
            path: dir.display().to_string(),
            source,
        };
        let mut labels = Vec::new();
        for entry in fs::read_dir(dir).map_err(io)? {
            let path = entry.map_err(io)?.path().join("labels.json");
            if path.is_file() {
                labels.push(
                    Labels::load(&path).map_err(|e| {
                        ScoreError::Labels(path.display().to_string(), e.to_string())
                    })?,
                );
            }
        }
        Ok(Truth::from_labels(&labels))
    }

    fn expected(&self, row: &LogRow) -> Option<Answer> {
        if !row.prompt.variants().contains(&row.variant.as_str()) {
            return None;
        }
        match self.algorithms.get(&row.algorithm)?.get(&row.variant)? {
            Class::Correct => Some(Answer::Yes),
            Class::Incorrect => Some(Answer::No),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Count {
    pub hits: u64,
    pub total: u64,
}

impl Count {
    pub fn new(hits: u64, total: u64) -> Count {
        Count { hits, total }
    }

    fn add(&mut self, hit: bool) {
        self.hits += hit as u64;
        self.total += 1;
    }

    fn merge(self, other: Count) -> Count {
        Count::new(self.hits + other.hits, self.total + other.total)
    }

    /// Accuracy in percent, unrounded.
    pub fn percent(self) -> Option<f64> {
        (self.total > 0).then(|| 100.0 * self.hits as f64 / self.total as f64)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub correct: Count,
    pub incorrect: Count,
}

impl ClassCounts {
    /// Both classes pooled: the mean of the class accuracies weighted by
    /// their instance counts.
    pub fn overall(self) -> Count {
        self.correct.merge(self.incorrect)
    }
}

/// Exact answer counts, keyed by chatbot and prompt, and per algorithm,
/// perturbation and chatbot.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tally {
    pub prompts: BTreeMap<(String, PromptKind), ClassCounts>,
    pub perturbations: BTreeMap<(String, String, String), Count>,
}

impl Tally {
    pub fn chatbots(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.prompts.keys().map(|(c, _)| c).collect();
        set.into_iter().cloned().collect()
    }
}

/// Counts agreements with the ground truth, rejecting rows that match no
/// dataset variant of their prompt.
pub fn tally(log: &[LogRow], truth: &Truth) -> Result<Tally, ScoreError> {
    let mut t = Tally::default();
    let mut orphans = Vec::new();
    for (i, row) in log.iter().enumerate() {
        let Some(expected) = truth.expected(row) else {
            orphans.push(format!(
                "row {}: {},{},{},{},{}",
                i + 1,
                row.algorithm,
                row.prompt,
                row.chatbot,
                row.round,
                row.variant
            ));
            continue;
        };
        let hit = row.answer == expected;
        let cell = t
            .prompts
            .entry((row.chatbot.clone(), row.prompt))
            .or_default();
        match expected {
            Answer::Yes => cell.correct.add(hit),
            Answer::No => cell.incorrect.add(hit),
        }
        if PERTURBATIONS.contains(&row.variant.as_str()) {
            t.perturbations
                .entry((
                    row.algorithm.clone(),
                    row.variant.clone(),
                    row.chatbot.clone(),
                ))
                .or_default()
                .add(hit);
        }
    }
    if orphans.is_empty() {
        Ok(t)
    } else {
        Err(ScoreError::LogTruthMismatch(orphans))
    }
}

/// Two decimals, ties away from zero (percentages are never negative).
pub fn round2(x: f64) -> f64 {
    ((x * 100.0) + 1e-9).round() / 100.0
}

fn mean(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let present: Vec<f64> = values.into_iter().flatten().collect();
    (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub label: String,
    pub cells: Vec<Option<f64>>,
    pub average: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<TableRow>,
    /// Column averages over the rows, when the table has them.
    pub footer: Option<TableRow>,
}

impl Table {
    /// Builds a table from unrounded percentages; averages are computed
    /// before rounding.
    pub fn build(
        title: &str,
        columns: Vec<String>,
        rows: Vec<(String, Vec<Option<f64>>)>,
        footer: bool,
    ) -> Table {
        let footer = footer.then(|| {
            let cells: Vec<Option<f64>> = (0..columns.len())
                .map(|j| mean(rows.iter().map(|(_, r)| r[j])))
                .collect();
            TableRow {
                label: "Average".into(),
                cells: cells.iter().map(|c| c.map(round2)).collect(),
                average: None,
            }
        });
        let rows = rows
            .into_iter()
            .map(|(label, cells)| TableRow {
                average: mean(cells.iter().copied()).map(round2),
                cells: cells.into_iter().map(|c| c.map(round2)).collect(),
                label,
            })
            .collect();
        Table {
            title: title.to_string(),
            columns,
            rows,
            footer,
        }
    }

    pub fn row(&self, label: &str) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn render(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.2}%"));
        let mut header = vec![String::new()];
        header.extend(self.columns.iter().cloned());
        header.push("Average".into());
        let mut lines = vec![header];
        for r in self.rows.iter().chain(&self.footer) {
            let mut line = vec![r.label.clone()];
            line.extend(r.cells.iter().map(|&c| fmt(c)));
            line.push(if self.footer.as_ref() == Some(r) {
                String::new()
            } else {
                fmt(r.average)
            });
            lines.push(line);
        }
        let widths: Vec<usize> = (0..lines[0].len())
            .map(|j| {
                lines
                    .iter()
                    .map(|l| l[j].chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = format!("{}\n", self.title);
        for line in &lines {
            let cells: Vec<String> = line
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    let pad = widths[j] - c.chars().count();
                    if j == 0 {
                        format!("{c}{}", " ".repeat(pad))
                    } else {
                        format!("{}{c}", " ".repeat(pad))
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        }
        out
    }
}

/// How the per-variant answers of a log relate to the prompts' snippets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reading {
    /// Every snippet but the reference is answered (3 or 7 per prompt).
    ReferenceExcluded,
    /// The reference is answered too (4 or 8 per prompt).
    ReferenceIncluded,
    Neither,
}

/// Shape of an experiment: algorithms × prompts × chatbots × rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Design {
    pub algorithms: usize,
    pub prompts: usize,
    pub chatbots: usize,
    pub rounds: usize,
}

/// The published experiment: 11 algorithms, 4 prompts, 7 chatbots, 10 rounds.
pub const PUBLISHED_DESIGN: Design = Design {
    algorithms: 11,
    prompts: 4,
    chatbots: 7,
    rounds: 10,
};

impl Design {
    /// One response per prompt submission.
    pub fn responses(self) -> usize {
        self.algorithms * self.prompts * self.chatbots * self.rounds
    }

    /// Fine-grained yes/no answers for the single-class and multi-class
    /// prompts under a reading (assumes the four prompts split evenly).
    pub fn answers(self, reading: Reading) -> Option<(usize, usize)> {
        let per_kind = self.algorithms * (self.prompts / 2) * self.chatbots * self.rounds;
        match reading {
            Reading::ReferenceExcluded => Some((per_kind * 3, per_kind * 7)),
            Reading::ReferenceIncluded => Some((per_kind * 4, per_kind * 8)),
            Reading::Neither => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignCheck {
    pub design: Design,
    pub expected_responses: usize,
    pub responses: usize,
    pub single_class_answers: usize,
    pub multi_class_answers: usize,
    pub reading: Reading,
    /// `(algorithm, prompt, chatbot, round)` cells of the grid with no answer.
    pub missing: Vec<String>,
}

impl DesignCheck {
    pub fn complete(&self) -> bool {
        self.missing.is_empty()
            && self.responses == self.expected_responses
            && self.reading != Reading::Neither
    }
}

/// Checks a log against the full grid implied by the dataset's algorithms,
/// the four prompts, the chatbots present and rounds `1..=max round`.
pub fn check_design(log: &[LogRow], truth: &Truth) -> DesignCheck {
    let mut answered: BTreeMap<(&str, PromptKind, &str, u32), BTreeSet<&str>> = BTreeMap::new();
    for r in log {
        answered
            .entry((r.algorithm.as_str(), r.prompt, r.chatbot.as_str(), r.round))
            .or_default()
            .insert(r.variant.as_str());
    }
    let chatbots: BTreeSet<&str> = log.iter().map(|r| r.chatbot.as_str()).collect();
    let rounds = log.iter().map(|r| r.round).max().unwrap_or(0);
    let design = Design {
        algorithms: truth.algorithms.len(),
        prompts: PromptKind::ALL.len(),
        chatbots: chatbots.len(),
        rounds: rounds as usize,
    };
    let mut missing = Vec::new();
    for a in truth.algorithms.keys() {
        for k in PromptKind::ALL {
            for c in &chatbots {
                for round in 1..=rounds {
                    if !answered.contains_key(&(a.as_str(), k, *c, round)) {
                        missing.push(format!("{a},{k},{c},{round}"));
                    }
                }
            }
        }
    }
    let matches = |with_ref: bool| {
        answered.iter().all(|((_, k, _, _), seen)| {
            let expected: BTreeSet<&str> = k
                .variants()
                .into_iter()
                .filter(|v| with_ref || *v != "ref")
                .collect();
            *seen == expected
        })
    };
    let reading = if answered.is_empty() {
        Reading::Neither
    } else if matches(false) {
        Reading::ReferenceExcluded
    } else if matches(true) {
        Reading::ReferenceIncluded
    } else {
        Reading::Neither
    };
    DesignCheck {
        design,
        expected_responses: design.responses(),
        responses: answered.len(),
        single_class_answers: log.iter().filter(|r| !r.prompt.multi_class()).count(),
        multi_class_answers: log.iter().filter(|r| r.prompt.multi_class()).count(),
        reading,
        missing,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyReport {
    /// Correct class per prompt, then both classes of the multi-class
    /// prompts, then each perturbation of each algorithm.
    pub correct_class: Table,
    pub multi_class: Table,
    pub perturbations: Table,
}

pub fn report(t: &Tally) -> AccuracyReport {
    let chatbots = t.chatbots();
    let cell =
        |c: &String, k: PromptKind| t.prompts.get(&(c.clone(), k)).copied().unwrap_or_default();
    let prompts: Vec<PromptKind> = PromptKind::ALL
        .into_iter()
        .filter(|k| {
            chatbots
                .iter()
                .any(|c| t.prompts.contains_key(&(c.clone(), *k)))
        })
        .collect();

    let correct_rows = prompts
        .iter()
        .map(|&k| {
            let label = if k.multi_class() {
                format!("{k} / Correct")
            } else {
                k.to_string()
            };
            (
                label,
                chatbots
                    .iter()
                    .map(|c| cell(c, k).correct.percent())
                    .collect(),
            )
        })
        .collect();
    let correct_class = Table::build("Correct class", chatbots.clone(), correct_rows, true);

    let mut multi_rows = Vec::new();
    for &k in prompts.iter().filter(|k| k.multi_class()) {
        let part = |f: &dyn Fn(ClassCounts) -> Count| {
            chatbots.iter().map(|c| f(cell(c, k)).percent()).collect()
        };
        multi_rows.push((format!("{k} / Correct"), part(&|x| x.correct)));
        multi_rows.push((format!("{k} / Incorrect"), part(&|x| x.incorrect)));
        multi_rows.push((format!("{k} / Overall"), part(&|x| x.overall())));
    }
    let multi_class = Table::build("Multi-class prompts", chatbots.clone(), multi_rows, false);

    let algorithms: BTreeSet<&String> = t.perturbations.keys().map(|(a, _, _)| a).collect();
    let mut perturb_rows = Vec::new();
    for a in algorithms {
        for p in PERTURBATIONS {
            let cells = chatbots
                .iter()
                .map(|c| {
                    t.perturbations
                        .get(&(a.clone(), p.to_string(), c.clone()))
                        .and_then(|n| n.percent())
                })
                .collect();
            perturb_rows.push((format!("{a} / {p}"), cells));
        }
    }
    let perturbations = Table::build("Per perturbation", chatbots, perturb_rows, false);

    AccuracyReport {
        correct_class,
        multi_class,
        perturbations,
    }
}

/// Reads, validates and scores a log.
pub fn score(log: &[LogRow], truth: &Truth) -> Result<(AccuracyReport, DesignCheck), ScoreError> {
    let t = tally(log, truth)?;
    Ok((report(&t), check_design(log, truth)))
}

pub fn render_report(r: &AccuracyReport, d: &DesignCheck) -> String {
    let mut out = String::new();
    for t in [&r.correct_class, &r.multi_class, &r.perturbations] {
        out.push_str(&t.render());
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "responses: {} of {} expected ({} algorithms x {} prompts x {} chatbots x {} rounds)",
        d.responses,
        d.expected_responses,
        d.design.algorithms,
        d.design.prompts,
        d.design.chatbots,
        d.design.rounds
    );
    let _ = writeln!(
        out,
        "answers: {} single-class, {} multi-class; reading: {}",
        d.single_class_answers,
        d.multi_class_answers,
        serde_json::to_value(d.reading)
            .expect("plain enum")
            .as_str()
            .unwrap_or("?")
    );
    if !d.missing.is_empty() {
        let _ = writeln!(out, "missing responses: {}", d.missing.len());
    }
    out
}
