//! Execution-based equivalence: two programs agree if every manifest case
//! yields matching outcomes.

use serde::{Deserialize, Serialize};

use crate::lang::{Program, StmtKind};
use crate::par::{map_indexed, ExecMode};

use super::eval::run;
use super::manifest::{Case, Compare, Entry, ManifestError, TestManifest};
use super::{Outcome, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictKind {
    Yes,
    No,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub case_index: usize,
    pub case: Case,
    pub left: Outcome,
    pub right: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub equivalent: VerdictKind,
    /// First case with differing outcomes (present iff `No`), or the first
    /// fuel-exhausted case for `Inconclusive`.
    pub witness: Option<Witness>,
    pub cases: usize,
}

impl Verdict {
    pub fn is_yes(&self) -> bool {
        self.equivalent == VerdictKind::Yes
    }

    pub fn is_no(&self) -> bool {
        self.equivalent == VerdictKind::No
    }
}

fn check_arity(p: &Program, m: &TestManifest, cases: &[Case]) -> Result<(), ManifestError> {
    match &m.entry {
        Entry::Script => {
            if let Some(c) = cases.iter().find(|c| matches!(c, Case::Args(_))) {
                return Err(ManifestError::Mismatch(format!(
                    "script entry given arguments: {}",
                    c.describe()
                )));
            }
        }
        Entry::Function(name) => {
            let arity = p
                .body
                .iter()
                .find_map(|s| match &s.kind {
                    StmtKind::FunDef {
                        name: n, params, ..
                    } if n == name => Some(params.len()),
                    _ => None,
                })
                .ok_or_else(|| {
                    ManifestError::Mismatch(format!("no top-level function '{name}'"))
                })?;
            for c in cases {
                let n = match c {
                    Case::Args(a) => a.len(),
                    Case::Tape(t) => t.len(),
                };
                if n != arity {
                    return Err(ManifestError::Mismatch(format!(
                        "'{name}' takes {arity} arguments but case has {n}: {}",
                        c.describe()
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Numbers compared with a relative tolerance, everything else exactly.
fn tolerant_eq(a: &str, b: &str, tol: f64) -> bool {
    fn tokens(s: &str) -> Vec<Result<f64, String>> {
        let chars: Vec<char> = s.chars().collect();
        let mut out = Vec::new();
        let mut i = 0;
        let mut text = String::new();
        while i < chars.len() {
            let c = chars[i];
            let starts_num = c.is_ascii_digit()
                || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()));
            if starts_num {
                if !text.is_empty() {
                    out.push(Err(std::mem::take(&mut text)));
                }
                let start = i;
                i += 1;
                while i < chars.len() {
                    let d = chars[i];
                    let exp_sign = (d == '+' || d == '-') && matches!(chars[i - 1], 'e' | 'E');
                    if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let lit: String = chars[start..i].iter().collect();
                match lit.parse::<f64>() {
                    Ok(v) => out.push(Ok(v)),
                    Err(_) => out.push(Err(lit)),
                }
            } else {
                text.push(c);
                i += 1;
            }
        }
        if !text.is_empty() {
            out.push(Err(text));
        }
        out
    }
    let (ta, tb) = (tokens(a), tokens(b));
    ta.len() == tb.len()
        && ta.iter().zip(tb.iter()).all(|(x, y)| match (x, y) {
            (Ok(u), Ok(v)) => (u - v).abs() <= tol * 1f64.max(u.abs()).max(v.abs()),
            (Err(s), Err(t)) => s == t,
            _ => false,
        })
}

fn text_eq(a: &str, b: &str, cmp: Compare) -> bool {
    match cmp {
        Compare::Exact => a == b,
        Compare::FloatTolerance(t) => a == b || tolerant_eq(a, b, t),
    }
}

/// Outcomes agree on status, printed lines and return value.
pub fn outcomes_match(a: &Outcome, b: &Outcome, cmp: Compare) -> bool {
    a.status == b.status
        && a.stdout.len() == b.stdout.len()
        && a.stdout
            .iter()
            .zip(b.stdout.iter())
            .all(|(x, y)| text_eq(x, y, cmp))
        && match (&a.result, &b.result) {
            (None, None) => true,
            (Some(x), Some(y)) => text_eq(x, y, cmp),
            _ => false,
        }
}

/// Runs both programs on every case of the manifest.
pub fn equivalent(p1: &Program, p2: &Program, m: &TestManifest) -> Result<Verdict, ManifestError> {
    equivalent_with(p1, p2, m, ExecMode::default())
}

pub fn equivalent_with(
    p1: &Program,
    p2: &Program,
    m: &TestManifest,
    mode: ExecMode,
) -> Result<Verdict, ManifestError> {
    let cases = m.generate_cases();
    check_arity(p1, m, &cases)?;
    check_arity(p2, m, &cases)?;
    let outcomes = map_indexed(mode, &cases, |c| {
        (run(p1, &m.entry, c, m.fuel), run(p2, &m.entry, c, m.fuel))
    });
    let witness = |i: usize, (l, r): &(Outcome, Outcome)| Witness {
        case_index: i,
        case: cases[i].clone(),
        left: l.clone(),
        right: r.clone(),
    };
    let exhausted = |(l, r): &(Outcome, Outcome)| {
        l.status == Status::FuelExhausted || r.status == Status::FuelExhausted
    };
    if let Some((i, o)) = outcomes
        .iter()
        .enumerate()
        .find(|(_, o)| !exhausted(o) && !outcomes_match(&o.0, &o.1, m.compare))
    {
        return Ok(Verdict {
            equivalent: VerdictKind::No,
            witness: Some(witness(i, o)),
            cases: cases.len(),
        });
    }
    if let Some((i, o)) = outcomes.iter().enumerate().find(|(_, o)| exhausted(o)) {
        return Ok(Verdict {
            equivalent: VerdictKind::Inconclusive,
            witness: Some(witness(i, o)),
            cases: cases.len(),
        });
    }
    Ok(Verdict {
        equivalent: VerdictKind::Yes,
        witness: None,
        cases: cases.len(),
    })
}
