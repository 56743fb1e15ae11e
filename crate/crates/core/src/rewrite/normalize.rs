//! Alternates constant folding, copy propagation and garbage collection
//! until a whole round leaves the program unchanged.

use crate::lang::Program;

use super::{apply_cf, apply_cp, garbage_collect, RewriteError, Trace};

pub const NORMALIZE_ROUND_LIMIT: usize = 64;

pub fn normalize(p: &Program) -> Result<(Program, Trace), RewriteError> {
    let mut cur = p.clone();
    let mut trace = Trace::default();
    for _ in 0..NORMALIZE_ROUND_LIMIT {
        let mut changed = false;
        for phase in [apply_cf, apply_cp, garbage_collect] {
            let (next, t) = phase(&cur)?;
            changed |= !t.is_empty();
            trace.extend(t);
            cur = next;
        }
        if !changed {
            return Ok((cur, trace));
        }
    }
    Err(RewriteError::NormalizationDiverged {
        limit: NORMALIZE_ROUND_LIMIT,
    })
}
