//! Green/red coding of TM suggestions.
//!
//! A TM source token is green when the alignment against the query matched
//! it, red otherwise. Target tokens inherit through the word alignment: a
//! target token is green only if it is linked to at least one source token
//! and every linked source token is green.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::retrieval::{RankedCandidate, TmEntry};
use crate::similarity::SimilarityScore;
use crate::ter::{ter_align, EditOp, EditScript};
use crate::text::Segment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    #[serde(rename = "G")]
    Green,
    #[serde(rename = "R")]
    Red,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenLabel {
    pub index: usize,
    pub color: Color,
}

/// Run of equally colored tokens, `start..end`. Serialized as
/// `[start, end, "G" | "R"]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "(usize, usize, Color)", from = "(usize, usize, Color)")]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub color: Color,
}

impl From<Span> for (usize, usize, Color) {
    fn from(s: Span) -> Self {
        (s.start, s.end, s.color)
    }
}

impl From<(usize, usize, Color)> for Span {
    fn from((start, end, color): (usize, usize, Color)) -> Self {
        Span { start, end, color }
    }
}

pub fn label_source(query: &Segment, tm_source: &Segment, script: &EditScript) -> Result<Vec<TokenLabel>> {
    if script.hyp_len() != query.len() || script.ref_len() != tm_source.len() {
        return Err(Error::ScriptMismatch(format!(
            "script covers {}x{} tokens, segments have {}x{}",
            script.hyp_len(),
            script.ref_len(),
            query.len(),
            tm_source.len()
        )));
    }
    let mut colors = vec![Color::Red; tm_source.len()];
    for op in &script.ops {
        if let Some(j) = op.ref_index() {
            if j >= colors.len() {
                return Err(Error::ScriptMismatch(format!("reference index {j} out of range")));
            }
        }
        if let Some(i) = op.hyp_index() {
            if i >= query.len() {
                return Err(Error::ScriptMismatch(format!("hypothesis index {i} out of range")));
            }
        }
        if let EditOp::Match { reference, .. } = *op {
            colors[reference] = Color::Green;
        }
    }
    Ok(to_labels(colors))
}

fn to_labels(colors: Vec<Color>) -> Vec<TokenLabel> {
    colors
        .into_iter()
        .enumerate()
        .map(|(index, color)| TokenLabel { index, color })
        .collect()
}

/// Links target token `j` to source token `round(j * |source| / |target|)`,
/// clamped to the last source token.
pub fn diagonal_alignment(source_len: usize, target_len: usize) -> BTreeSet<(usize, usize)> {
    if source_len == 0 {
        return BTreeSet::new();
    }
    (0..target_len)
        .map(|j| {
            let s = (j as f64 * source_len as f64 / target_len as f64).round() as usize;
            (s.min(source_len - 1), j)
        })
        .collect()
}

pub fn project_to_target(source_labels: &[TokenLabel], entry: &TmEntry) -> Vec<TokenLabel> {
    let fallback;
    let alignment = if entry.alignment.is_empty() {
        fallback = diagonal_alignment(entry.source.len(), entry.target.len());
        &fallback
    } else {
        &entry.alignment
    };
    let source_green = |i: usize| {
        source_labels
            .iter()
            .any(|l| l.index == i && l.color == Color::Green)
    };
    let mut linked = vec![false; entry.target.len()];
    let mut all_green = vec![true; entry.target.len()];
    for &(s, t) in alignment {
        if t >= linked.len() {
            continue;
        }
        linked[t] = true;
        all_green[t] &= source_green(s);
    }
    to_labels(
        linked
            .into_iter()
            .zip(all_green)
            .map(|(l, g)| if l && g { Color::Green } else { Color::Red })
            .collect(),
    )
}

/// Collapses labels into maximal single-color runs. Labels must cover
/// `0..n` exactly once; order does not matter.
pub fn merge_spans(labels: &[TokenLabel]) -> Result<Vec<Span>> {
    let mut sorted = labels.to_vec();
    sorted.sort_by_key(|l| l.index);
    for (pos, l) in sorted.iter().enumerate() {
        if l.index != pos {
            let what = if l.index < pos { "duplicate" } else { "missing" };
            let at = if l.index < pos { l.index } else { pos };
            return Err(Error::InvalidLabels(format!("{what} index {at}")));
        }
    }
    let mut spans: Vec<Span> = Vec::new();
    for l in sorted {
        match spans.last_mut() {
            Some(last) if last.color == l.color => last.end = l.index + 1,
            _ => spans.push(Span {
                start: l.index,
                end: l.index + 1,
                color: l.color,
            }),
        }
    }
    Ok(spans)
}

pub fn expand_spans(spans: &[Span]) -> Vec<TokenLabel> {
    spans
        .iter()
        .flat_map(|s| (s.start..s.end).map(move |index| TokenLabel { index, color: s.color }))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColoredSuggestion {
    pub entry_id: String,
    pub source_labels: Vec<TokenLabel>,
    pub target_labels: Vec<TokenLabel>,
    pub sim_score: SimilarityScore,
    pub ir_score: f64,
    pub green_target_count: usize,
}

impl ColoredSuggestion {
    /// Aligns the query with the entry's source and colors both sides.
    pub fn build(query: &Segment, entry: &TmEntry, candidate: &RankedCandidate) -> Self {
        let script = ter_align(query, &entry.source);
        let source_labels =
            label_source(query, &entry.source, &script).expect("script comes from the same segments");
        let target_labels = project_to_target(&source_labels, entry);
        let green_target_count = target_labels.iter().filter(|l| l.color == Color::Green).count();
        ColoredSuggestion {
            entry_id: entry.id.clone(),
            source_labels,
            target_labels,
            sim_score: candidate
                .sim_score
                .unwrap_or_else(|| crate::similarity::score_script(&script, query.len(), entry.source.len())),
            ir_score: candidate.ir_score,
            green_target_count,
        }
    }

    /// Wire form used by the service and the editor UI.
    pub fn view(&self, entry: &TmEntry) -> SuggestionView {
        let surfaces = |s: &Segment| s.tokens.iter().map(|t| t.surface.clone()).collect();
        SuggestionView {
            entry_id: self.entry_id.clone(),
            sim: self.sim_score.value(),
            source_spans: merge_spans(&self.source_labels).expect("labels cover the source"),
            target_spans: merge_spans(&self.target_labels).expect("labels cover the target"),
            ir: self.ir_score,
            green_target_count: self.green_target_count,
            source: entry.source.raw.clone(),
            target: entry.target.raw.clone(),
            source_tokens: surfaces(&entry.source),
            target_tokens: surfaces(&entry.target),
        }
    }
}

/// `{"entryId", "sim", "sourceSpans", "targetSpans", ...}`; span indices
/// refer to `sourceTokens` / `targetTokens`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SuggestionView {
    pub entry_id: String,
    pub sim: f64,
    pub source_spans: Vec<Span>,
    pub target_spans: Vec<Span>,
    pub ir: f64,
    pub green_target_count: usize,
    pub source: String,
    pub target: String,
    pub source_tokens: Vec<String>,
    pub target_tokens: Vec<String>,
}
