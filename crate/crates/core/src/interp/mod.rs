//! Reference interpreter and execution-based equivalence checking.

pub mod equiv;
pub mod eval;
pub mod manifest;
pub mod value;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use equiv::{equivalent, outcomes_match, Verdict, VerdictKind, Witness};
pub use eval::{instrumented_run, run, ProbePoint, ProbeRecord, ProbeSpec};
pub use manifest::{Case, Compare, Entry, ManifestError, TestManifest};
pub use value::Value;

/// Default step budget per case.
pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorKind {
    DivByZero,
    UnboundVariable,
    IndexOutOfRange,
    TapeExhausted,
    TypeError,
    ValueError,
    KeyError,
    Overflow,
    RecursionDepth,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorKind::DivByZero => "div-by-zero",
            ErrorKind::UnboundVariable => "unbound-variable",
            ErrorKind::IndexOutOfRange => "index-out-of-range",
            ErrorKind::TapeExhausted => "tape-exhausted",
            ErrorKind::TypeError => "type-error",
            ErrorKind::ValueError => "value-error",
            ErrorKind::KeyError => "key-error",
            ErrorKind::Overflow => "overflow",
            ErrorKind::RecursionDepth => "recursion-depth",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "status", content = "kind")]
pub enum Status {
    Normal,
    RuntimeError(ErrorKind),
    FuelExhausted,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Normal => f.write_str("normal"),
            Status::RuntimeError(k) => write!(f, "runtime-error({k})"),
            Status::FuelExhausted => f.write_str("fuel-exhausted"),
        }
    }
}

/// Observable result of one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub stdout: Vec<String>,
    /// `repr` of the entry function's return value (function entries only).
    pub result: Option<String>,
    pub status: Status,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.status)?;
        if let Some(r) = &self.result {
            write!(f, ", result {r}")?;
        }
        write!(f, ", stdout {:?}", self.stdout)
    }
}
