//! Annotation inference for copy propagation and constant folding.

pub mod cf;
pub mod cp;
pub mod defs;
pub mod dump;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("annotation fixpoint not reached within {limit} rounds")]
    IterationLimitExceeded { limit: usize },
}
