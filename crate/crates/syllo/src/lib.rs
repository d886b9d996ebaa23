//! File formats, dataset pipeline and command-line front end for the
//! syllogistic premise-selection workbench. The pure logic lives in
//! `syllo-core`.

pub mod io;
pub mod pipeline;
pub mod records;
pub mod text;

pub use io::DataError;
pub use pipeline::{BuildConfig, BuildSummary, PipelineError, VocabSpec};
