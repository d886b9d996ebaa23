//! Syllogistic premise-selection workbench core.
//!
//! Everything in this crate is pure and allocation-only (`no_std` + `alloc`):
//! the syllogistic fragment and its derivability procedure, a brute-force
//! model-checking oracle, the two-stage knowledge-base generator, minimal
//! inference enumeration, text rendering/parsing, episode construction and
//! prediction scoring. File formats, the CLI and parallel orchestration live
//! in the companion `syllo` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod episode;
pub mod eval;
pub mod inference;
pub mod kbgen;
pub mod logic;
pub mod oracle;
pub mod render;
pub mod rng;

mod premise_set;

pub use episode::{
    flatten_to_baseline, pick_support, Alignment, BaselinePair, BuildReport, BuiltSplit, Datapoint, Episode,
    EpisodeBuilder, Experiment, Split, SplitSpec, StudyPair,
};
pub use eval::{aggregate, compare_reports, score, ErrorLabel, MetricsReport, Outcome, ReportDiff, Scored};
pub use inference::{classify, enumerate_inferences, length_ranges, LengthRange, TypeLengthGrid, MAX_GRID_LENGTH};
pub use kbgen::{gen_kbs, GenConfig, GenError, GenReport, KbStream, Purpose};
pub use logic::{
    a_reachable, consistent_syntactic, entails, minimal_premises, negate, Formula, InferenceType, KnowledgeBase,
    LogicError, MinimalInference, Minimality, Quantifier, Reasoner, Term,
};
pub use premise_set::PremiseSet;
pub use render::{Assignment, RenderError, Vocabulary, VocabularyKind};

/// Version tag embedded in every rendered dataset record.
pub const FORMAT_VERSION: &str = "syllo-text/1";
