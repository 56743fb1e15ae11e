//! Rendering of the four zero-shot prompt formats.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use cpcf_core::lang::{print_program, Program};

pub const CONTEXTLESS_PREAMBLE: &str =
    "Are the following functions semantically equivalent to the first one?";

pub const CONTEXTUAL_PREAMBLE: &str = "You are a chatbot for comparing the semantics of small Python programs.
I will provide you with multiple implementations of the same Python function.
The first function is the reference version.
The other functions are perturbed with copy propagation, constant folding or a combination of the two.
Tell me whether the functions are semantically equivalent to the reference version or not.";

const CORRECT: [&str; 4] = ["ref", "cp", "cf", "cp_cf"];
const INCORRECT: [&str; 4] = ["bug_ref", "bug_cp", "bug_cf", "bug_cp_cf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PromptKind {
    P1,
    P2,
    P3,
    P4,
}

impl PromptKind {
    pub const ALL: [PromptKind; 4] = [
        PromptKind::P1,
        PromptKind::P2,
        PromptKind::P3,
        PromptKind::P4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PromptKind::P1 => "P1",
            PromptKind::P2 => "P2",
            PromptKind::P3 => "P3",
            PromptKind::P4 => "P4",
        }
    }

    pub fn contextual(self) -> bool {
        matches!(self, PromptKind::P2 | PromptKind::P4)
    }

    pub fn multi_class(self) -> bool {
        matches!(self, PromptKind::P3 | PromptKind::P4)
    }

    pub fn preamble(self) -> &'static str {
        if self.contextual() {
            CONTEXTUAL_PREAMBLE
        } else {
            CONTEXTLESS_PREAMBLE
        }
    }

    /// Variants shown in a prompt of this kind, reference included.
    pub fn variants(self) -> Vec<&'static str> {
        let mut v = CORRECT.to_vec();
        if self.multi_class() {
            v.extend(INCORRECT);
        }
        v
    }

    pub fn snippet_count(self) -> usize {
        self.variants().len()
    }
}

impl fmt::Display for PromptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown prompt kind `{0}` (expected P1, P2, P3 or P4)")]
pub struct UnknownPromptKind(pub String);

impl FromStr for PromptKind {
    type Err = UnknownPromptKind;

    fn from_str(s: &str) -> Result<PromptKind, UnknownPromptKind> {
        match s.trim().to_ascii_uppercase().as_str() {
            "P1" | "1" => Ok(PromptKind::P1),
            "P2" | "2" => Ok(PromptKind::P2),
            "P3" | "3" => Ok(PromptKind::P3),
            "P4" | "4" => Ok(PromptKind::P4),
            _ => Err(UnknownPromptKind(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("variant `{0}` is missing")]
pub struct MissingVariant(pub String);

/// A rendered prompt and the variant shown at each position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prompt {
    pub kind: PromptKind,
    pub order_seed: u64,
    pub order: Vec<String>,
    pub text: String,
}

/// Renders one prompt. The reference comes first; the remaining snippets
/// follow in an order drawn from `order_seed`, which the header records.
pub fn render_prompt(
    programs: &[(String, Program)],
    kind: PromptKind,
    order_seed: u64,
) -> Result<Prompt, MissingVariant> {
    let lookup = |name: &str| {
        programs
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, p)| p)
            .ok_or_else(|| MissingVariant(name.to_string()))
    };
    let mut rest: Vec<&str> = kind.variants()[1..].to_vec();
    rest.shuffle(&mut ChaCha8Rng::seed_from_u64(order_seed));
    let order: Vec<String> = std::iter::once("ref")
        .chain(rest)
        .map(str::to_string)
        .collect();

    let mut text = format!("# order-seed: {order_seed}\n{}\n", kind.preamble());
    for name in &order {
        text.push('\n');
        text.push_str(&print_program(lookup(name)?));
    }
    Ok(Prompt {
        kind,
        order_seed,
        order,
        text,
    })
}
