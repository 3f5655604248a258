//! Core engine of the post-editing workbench.
//!
//! The crate covers the whole matching pipeline for translation-memory
//! suggestions and the bookkeeping around human post-editing:
//!
//! - [`text`]: tokenization into [`Token`]s and [`Segment`]s.
//! - [`ter`]: word-level edit alignment with block shifts.
//! - [`similarity`]: the normalized match-reward / edit-penalty score.
//! - [`retrieval`]: TF-IDF inverted index and similarity re-ranking.
//! - [`color`]: green/red token labels for source and target sides.
//! - [`suggestions`]: TM, MT, APE and scratch options for one segment.
//! - [`editlog`]: post-edit records, XML logs and alignment export.
//! - [`analytics`]: selection rates, Cohen's kappa, Pearson correlation.

pub mod analytics;
pub mod color;
pub mod editlog;
pub mod error;
pub mod retrieval;
pub mod similarity;
pub mod suggestions;
pub mod ter;
pub mod text;
pub mod tmfile;

pub use color::{Color, ColoredSuggestion, Span, TokenLabel};
pub use editlog::{EditLogRecord, Session};
pub use error::{Error, Result};
pub use retrieval::{Index, RankedCandidate, RetrievalConfig, TmEntry, TranslationMemory};
pub use similarity::{similarity, SimilarityScore};
pub use suggestions::{ExternalTables, Origin, SuggestionSet};
pub use ter::{ter_align, EditKind, EditOp, EditScript};
pub use text::{tokenize, Segment, Token};
