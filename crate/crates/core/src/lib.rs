//! Copy propagation and constant folding for a small Python subset, used
//! forward as optimizations and backward as semantics-preserving
//! perturbations, together with a reference interpreter that certifies
//! equivalence by execution.

pub mod analysis;
pub mod fuzz;
pub mod interp;
pub mod lang;
pub mod par;
pub mod perturb;
pub mod rewrite;
