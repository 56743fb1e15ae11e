//! Test manifests: the input domain of one program and the cases drawn
//! from it.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use super::DEFAULT_FUEL;

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed manifest: {0}")]
    Json(#[from] serde_json::Error),
    #[error("manifest does not fit the program: {0}")]
    Mismatch(String),
}

/// How a program is started.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum Entry {
    /// Run the top level, feeding `input()` from a tape.
    Script,
    /// Run the top level, then call this function with the case arguments.
    Function(String),
}

impl From<String> for Entry {
    fn from(s: String) -> Entry {
        if s == "script" {
            Entry::Script
        } else {
            Entry::Function(s)
        }
    }
}

impl From<Entry> for String {
    fn from(e: Entry) -> String {
        match e {
            Entry::Script => "script".into(),
            Entry::Function(f) => f,
        }
    }
}

/// One test input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Case {
    /// Strings returned by successive `input()` calls.
    Tape(Vec<String>),
    /// Arguments of the entry function.
    Args(Vec<Json>),
}

impl Case {
    pub fn describe(&self) -> String {
        match self {
            Case::Tape(t) => format!("tape {}", serde_json::to_string(t).unwrap_or_default()),
            Case::Args(a) => format!("args {}", serde_json::to_string(a).unwrap_or_default()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Compare {
    #[default]
    Exact,
    /// Numbers in outputs may differ by this relative tolerance.
    FloatTolerance(f64),
}

/// Value domain of one argument (or one tape entry).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Int {
        min: i64,
        max: i64,
    },
    Float {
        min: f64,
        max: f64,
    },
    IntList {
        min_len: usize,
        max_len: usize,
        min: i64,
        max: i64,
    },
    FloatList {
        min_len: usize,
        max_len: usize,
        min: f64,
        max: f64,
    },
    Grid {
        min_rows: usize,
        max_rows: usize,
        min_cols: usize,
        max_cols: usize,
        min: i64,
        max: i64,
    },
    Choice {
        values: Vec<Json>,
    },
}

fn spread(min: i64, max: i64, n: usize) -> Vec<i64> {
    let width = (max - min) as i128 + 1;
    if width <= n as i128 {
        return (min..=max).collect();
    }
    (0..n)
        .map(|k| min + ((width - 1) * k as i128 / (n as i128 - 1)) as i64)
        .collect()
}

fn pattern(len: usize, min: i64, max: i64, salt: i64) -> Vec<Json> {
    let width = max - min + 1;
    (0..len as i64)
        .map(|k| Json::from(min + (k * 7 + salt * 3 + k * k * salt).rem_euclid(width)))
        .collect()
}

fn float_json(v: f64) -> Json {
    // Keep a fractional representation so the value stays a float.
    serde_json::Number::from_f64(v)
        .map(Json::Number)
        .unwrap_or(Json::Null)
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

impl Domain {
    /// Deterministic representative values.
    fn sweep(&self) -> Vec<Json> {
        match self {
            Domain::Int { min, max } => {
                spread(*min, *max, 16).into_iter().map(Json::from).collect()
            }
            Domain::Float { min, max } => (0..5)
                .map(|k| float_json(round3(min + (max - min) * k as f64 / 4.0) + 0.125))
                .collect(),
            Domain::IntList {
                min_len,
                max_len,
                min,
                max,
            } => {
                let mut out = Vec::new();
                for len in *min_len..=*max_len {
                    out.push(Json::Array(pattern(len, *min, *max, 1)));
                    if len > 1 {
                        out.push(Json::Array(pattern(len, *min, *max, 2)));
                    }
                }
                out
            }
            Domain::FloatList {
                min_len,
                max_len,
                min,
                max,
            } => (*min_len..=*max_len)
                .map(|len| {
                    Json::Array(
                        (0..len)
                            .map(|k| {
                                float_json(round3(
                                    min + (max - min) * ((k * 5 + 2) % 9) as f64 / 8.0,
                                ))
                            })
                            .collect(),
                    )
                })
                .collect(),
            Domain::Grid {
                min_rows,
                max_rows,
                min_cols,
                max_cols,
                min,
                max,
            } => {
                let mut out = Vec::new();
                for r in *min_rows..=*max_rows {
                    for c in *min_cols..=*max_cols {
                        let rows = (0..r)
                            .map(|i| Json::Array(pattern(c, *min, *max, i as i64 + 1)))
                            .collect();
                        out.push(Json::Array(rows));
                    }
                }
                out
            }
            Domain::Choice { values } => values.clone(),
        }
    }

    fn random(&self, rng: &mut ChaCha8Rng) -> Json {
        match self {
            Domain::Int { min, max } => Json::from(rng.gen_range(*min..=*max)),
            Domain::Float { min, max } => float_json(round3(rng.gen_range(*min..=*max))),
            Domain::IntList {
                min_len,
                max_len,
                min,
                max,
            } => {
                let len = rng.gen_range(*min_len..=*max_len);
                Json::Array(
                    (0..len)
                        .map(|_| Json::from(rng.gen_range(*min..=*max)))
                        .collect(),
                )
            }
            Domain::FloatList {
                min_len,
                max_len,
                min,
                max,
            } => {
                let len = rng.gen_range(*min_len..=*max_len);
                Json::Array(
                    (0..len)
                        .map(|_| float_json(round3(rng.gen_range(*min..=*max))))
                        .collect(),
                )
            }
            Domain::Grid {
                min_rows,
                max_rows,
                min_cols,
                max_cols,
                min,
                max,
            } => {
                let r = rng.gen_range(*min_rows..=*max_rows);
                let c = rng.gen_range(*min_cols..=*max_cols);
                Json::Array(
                    (0..r)
                        .map(|_| {
                            Json::Array(
                                (0..c)
                                    .map(|_| Json::from(rng.gen_range(*min..=*max)))
                                    .collect(),
                            )
                        })
                        .collect(),
                )
            }
            Domain::Choice { values } => values[rng.gen_range(0..values.len())].clone(),
        }
    }
}

fn default_min_cases() -> usize {
    20
}

fn default_fuel() -> u64 {
    DEFAULT_FUEL
}

const MAX_SWEEP: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestManifest {
    pub entry: Entry,
    #[serde(default)]
    pub domains: Vec<Domain>,
    /// Hand-picked cases, run before the generated ones.
    #[serde(default)]
    pub cases: Vec<Case>,
    #[serde(default = "default_min_cases")]
    pub min_cases: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_fuel")]
    pub fuel: u64,
    #[serde(default)]
    pub compare: Compare,
}

impl TestManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<TestManifest, ManifestError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    /// A script manifest over explicit tapes.
    pub fn script(tapes: impl IntoIterator<Item = Vec<String>>) -> TestManifest {
        TestManifest {
            entry: Entry::Script,
            domains: Vec::new(),
            cases: tapes.into_iter().map(Case::Tape).collect(),
            min_cases: 0,
            seed: 0,
            fuel: DEFAULT_FUEL,
            compare: Compare::Exact,
        }
    }

    fn to_case(&self, values: Vec<Json>) -> Case {
        match self.entry {
            Entry::Script => Case::Tape(
                values
                    .into_iter()
                    .map(|v| match v {
                        Json::String(s) => s,
                        other => other.to_string(),
                    })
                    .collect(),
            ),
            Entry::Function(_) => Case::Args(values),
        }
    }

    /// All cases: explicit ones, then the domain sweep (cartesian product of
    /// representative values, capped), then seeded random draws until
    /// `min_cases` is reached. Deterministic.
    pub fn generate_cases(&self) -> Vec<Case> {
        let mut out: Vec<Case> = self.cases.clone();
        let mut seen: std::collections::BTreeSet<String> =
            out.iter().map(|c| c.describe()).collect();
        let mut push = |out: &mut Vec<Case>, c: Case| {
            if seen.insert(c.describe()) {
                out.push(c);
            }
        };
        if !self.domains.is_empty() {
            let sweeps: Vec<Vec<Json>> = self.domains.iter().map(Domain::sweep).collect();
            let mut product: Vec<Vec<Json>> = vec![Vec::new()];
            for sw in &sweeps {
                let mut next = Vec::new();
                for prefix in &product {
                    for v in sw {
                        if next.len() >= MAX_SWEEP {
                            break;
                        }
                        let mut p = prefix.clone();
                        p.push(v.clone());
                        next.push(p);
                    }
                }
                product = next;
            }
            for values in product {
                let c = self.to_case(values);
                push(&mut out, c);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            let mut attempts = 0;
            while out.len() < self.min_cases && attempts < self.min_cases * 50 {
                attempts += 1;
                let values = self.domains.iter().map(|d| d.random(&mut rng)).collect();
                let c = self.to_case(values);
                push(&mut out, c);
            }
        }
        out
    }
}
