//! Similarity between a query and a TM source segment.
//!
//! Matches found by the edit alignment earn +1, every insertion, deletion,
//! substitution and shift costs 1. The balance is normalized by the longer
//! side and clamped to `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::ter::{ter_align, EditScript};
use crate::text::Segment;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimilarityScore(f64);

impl SimilarityScore {
    pub const ZERO: SimilarityScore = SimilarityScore(0.0);
    pub const ONE: SimilarityScore = SimilarityScore(1.0);

    /// Clamps into `[0, 1]`; NaN maps to 0.
    pub fn new(value: f64) -> Self {
        if value.is_nan() {
            return Self::ZERO;
        }
        SimilarityScore(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Score of an existing edit script over segments of the given lengths.
pub fn score_script(script: &EditScript, query_len: usize, source_len: usize) -> SimilarityScore {
    let longest = query_len.max(source_len);
    if longest == 0 {
        return SimilarityScore::ONE;
    }
    let balance = script.matches as f64 - script.cost() as f64;
    SimilarityScore::new(balance / longest as f64)
}

/// Aligns `query` (as hypothesis) against `tm_source` and scores the result.
/// Two empty segments count as identical.
pub fn similarity(query: &Segment, tm_source: &Segment) -> SimilarityScore {
    if query.is_empty() && tm_source.is_empty() {
        return SimilarityScore::ONE;
    }
    let script = ter_align(query, tm_source);
    score_script(&script, query.len(), tm_source.len())
}
