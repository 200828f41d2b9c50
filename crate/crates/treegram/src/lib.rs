//! Tree-gram constituency parsing toolkit.
//!
//! The pipeline: read a bracketed treebank, mark head children and
//! complements, enrich phrasal labels with pre-heads, rename rare words and
//! build a tagging lexicon (`treebank`); extract role-tagged tree fragments
//! with completeness markers and subcat frames (`tgram`); accumulate
//! direct-estimate count tables over conditioning histories (`model`); parse
//! with a two-pass CKY searcher for the most probable derivation (`parser`);
//! and score output against gold trees with PARSEVAL measures (`eval`).

pub mod eval;
pub mod model;
pub mod pipeline;
pub mod parser;
pub mod tgram;
pub mod treebank;

#[cfg(test)]
pub(crate) mod testutil;

pub use eval::Scorecard;
pub use model::{CountTable, History, ModelFile};
pub use tgram::{ExtractionConfig, Frame, NodeLabel, Role, TGram};
pub use treebank::{ParseTree, PreHead, TagLexicon};
