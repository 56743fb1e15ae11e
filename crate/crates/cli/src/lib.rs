//! Command-line front end: analysis and rewrite verbs, dataset generation,
//! prompt rendering and scoring of response logs.

pub mod cli;
pub mod prompt;
pub mod score;

pub use cli::run;
