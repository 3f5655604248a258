//! Candidate retrieval for TM lookups.
//!
//! Comparing a query with every stored source segment is too slow for large
//! memories, so lookups run in two stages. A TF-IDF inverted index over the
//! source-side norms returns the `k` entries with the highest cosine score,
//! and only those are aligned and re-ranked by [`similarity`].
//!
//! Term weights use the raw count as tf and a smoothed idf,
//! `ln((N + 1) / (df + 1)) + 1`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::similarity::{similarity, SimilarityScore};
use crate::text::Segment;

/// Memories up to this size may bypass the index entirely.
pub const BRUTE_FORCE_LIMIT: usize = 1_000;

/// A stored translation unit: source, target and word links between them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TmEntry {
    pub id: String,
    pub source: Segment,
    pub target: Segment,
    /// `(source index, target index)` links.
    pub alignment: BTreeSet<(usize, usize)>,
}

impl TmEntry {
    pub fn new(
        id: impl Into<String>,
        source: Segment,
        target: Segment,
        alignment: BTreeSet<(usize, usize)>,
    ) -> Result<Self> {
        let id = id.into();
        if let Some(&(s, t)) = alignment
            .iter()
            .find(|&&(s, t)| s >= source.len() || t >= target.len())
        {
            return Err(Error::AlignmentOutOfRange { entry: id, link: (s, t) });
        }
        Ok(TmEntry {
            id,
            source,
            target,
            alignment,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub entry_id: String,
    pub tf: u32,
}

/// Inverted index over TM source segments.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Index {
    /// Sorted by entry id.
    postings: BTreeMap<String, Vec<Posting>>,
    doc_freq: BTreeMap<String, usize>,
    lengths: BTreeMap<String, usize>,
    doc_terms: BTreeMap<String, BTreeMap<String, u32>>,
    sequences: BTreeMap<String, Vec<String>>,
    norms: BTreeMap<String, f64>,
}

fn term_counts(segment: &Segment) -> BTreeMap<String, u32> {
    let mut counts = BTreeMap::new();
    for t in &segment.tokens {
        *counts.entry(t.norm.clone()).or_insert(0) += 1;
    }
    counts
}

/// Builds an index over the source side of `entries`.
pub fn build_index(entries: &[TmEntry]) -> Result<Index> {
    let mut index = Index::default();
    index.add_entries(entries)?;
    Ok(index)
}

impl Index {
    pub fn doc_count(&self) -> usize {
        self.lengths.len()
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.doc_freq.get(term).copied().unwrap_or(0)
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map_or(&[], Vec::as_slice)
    }

    pub fn length(&self, entry_id: &str) -> Option<usize> {
        self.lengths.get(entry_id).copied()
    }

    pub fn contains(&self, entry_id: &str) -> bool {
        self.lengths.contains_key(entry_id)
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    fn idf(&self, term: &str) -> f64 {
        let n = self.doc_count() as f64;
        ((n + 1.0) / (self.doc_freq(term) as f64 + 1.0)).ln() + 1.0
    }

    pub fn add_entry(&mut self, entry: &TmEntry) -> Result<()> {
        self.add_entries(std::slice::from_ref(entry))
    }

    /// Adds several entries at once. Either all are added or, when one id is
    /// already indexed or repeated in the batch, none.
    pub fn add_entries(&mut self, entries: &[TmEntry]) -> Result<()> {
        let mut batch = BTreeSet::new();
        for e in entries {
            if self.contains(&e.id) || !batch.insert(e.id.as_str()) {
                return Err(Error::DuplicateEntry(e.id.clone()));
            }
        }
        for e in entries {
            let counts = term_counts(&e.source);
            for (term, &tf) in &counts {
                let list = self.postings.entry(term.clone()).or_default();
                let at = list.partition_point(|p| p.entry_id < e.id);
                list.insert(
                    at,
                    Posting {
                        entry_id: e.id.clone(),
                        tf,
                    },
                );
                *self.doc_freq.entry(term.clone()).or_insert(0) += 1;
            }
            self.lengths.insert(e.id.clone(), e.source.len());
            self.sequences.insert(
                e.id.clone(),
                e.source.tokens.iter().map(|t| t.norm.clone()).collect(),
            );
            self.doc_terms.insert(e.id.clone(), counts);
        }
        self.refresh_norms();
        Ok(())
    }

    /// Document vector lengths depend on N, so every add invalidates them.
    fn refresh_norms(&mut self) {
        let norms = self
            .doc_terms
            .iter()
            .map(|(id, terms)| (id.clone(), self.vector_norm(terms)))
            .collect();
        self.norms = norms;
    }

    fn vector_norm(&self, terms: &BTreeMap<String, u32>) -> f64 {
        terms
            .iter()
            .map(|(t, &tf)| {
                let w = tf as f64 * self.idf(t);
                w * w
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Cosine score of `query` against every entry sharing at least one term,
    /// unsorted.
    fn score_all(&self, query: &Segment) -> Vec<(String, f64)> {
        let q_terms = term_counts(query);
        let q_norm = self.vector_norm(&q_terms);
        if q_norm == 0.0 {
            return Vec::new();
        }
        let mut dots: BTreeMap<&str, f64> = BTreeMap::new();
        for (term, &q_tf) in &q_terms {
            let idf = self.idf(term);
            let wq = q_tf as f64 * idf;
            for p in self.postings(term) {
                *dots.entry(p.entry_id.as_str()).or_insert(0.0) += wq * (p.tf as f64 * idf);
            }
        }
        dots.into_iter()
            .map(|(id, dot)| {
                let score = (dot / (q_norm * self.norms[id])).min(1.0);
                (id.to_string(), score)
            })
            .collect()
    }

    fn is_verbatim(&self, entry_id: &str, query: &Segment) -> bool {
        self.sequences
            .get(entry_id)
            .is_some_and(|seq| seq.iter().map(String::as_str).eq(query.tokens.iter().map(|t| t.norm.as_str())))
    }

    /// Top-`k` entries by TF-IDF cosine. Equal scores keep verbatim source
    /// matches ahead, then ascending entry id.
    pub fn ir_query(&self, query: &Segment, k: usize) -> Vec<RankedCandidate> {
        if k == 0 {
            return Vec::new();
        }
        let mut scored: Vec<(String, f64, bool)> = self
            .score_all(query)
            .into_iter()
            .map(|(id, score)| {
                let verbatim = self.is_verbatim(&id, query);
                (id, score, verbatim)
            })
            .collect();
        scored.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| b.2.cmp(&a.2))
                .then_with(|| a.0.cmp(&b.0))
        });
        scored.truncate(k);
        scored
            .into_iter()
            .map(|(entry_id, ir_score, _)| RankedCandidate {
                entry_id,
                ir_score,
                sim_score: None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub entry_id: String,
    pub ir_score: f64,
    /// Set once the candidate has been re-ranked.
    pub sim_score: Option<SimilarityScore>,
}

impl RankedCandidate {
    pub fn sim(&self) -> f64 {
        self.sim_score.map_or(0.0, SimilarityScore::value)
    }
}

/// Final ordering: similarity, then IR score (both descending), then id.
fn rerank_order(a: &RankedCandidate, b: &RankedCandidate) -> Ordering {
    b.sim()
        .total_cmp(&a.sim())
        .then_with(|| b.ir_score.total_cmp(&a.ir_score))
        .then_with(|| a.entry_id.cmp(&b.entry_id))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalConfig {
    /// IR candidates passed to re-ranking.
    pub k: usize,
    /// Suggestions returned.
    pub n: usize,
    /// Candidates scoring below this similarity are dropped.
    pub threshold: f64,
    /// Score every entry instead of consulting the index, for memories of
    /// at most [`BRUTE_FORCE_LIMIT`] entries.
    pub brute_force: bool,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        RetrievalConfig {
            k: 20,
            n: 5,
            threshold: 0.0,
            brute_force: false,
        }
    }
}

/// Re-ranks the top-`k` IR candidates by similarity and keeps `n`.
pub fn retrieve_matches(
    index: &Index,
    entries: &BTreeMap<String, TmEntry>,
    query: &Segment,
    k: usize,
    n: usize,
) -> Vec<RankedCandidate> {
    let candidates = index.ir_query(query, k);
    rerank(candidates, entries, query, n, 0.0)
}

fn rerank(
    candidates: Vec<RankedCandidate>,
    entries: &BTreeMap<String, TmEntry>,
    query: &Segment,
    n: usize,
    threshold: f64,
) -> Vec<RankedCandidate> {
    let mut ranked: Vec<RankedCandidate> = candidates
        .into_iter()
        .filter_map(|mut c| {
            let entry = entries.get(&c.entry_id)?;
            c.sim_score = Some(similarity(query, &entry.source));
            Some(c)
        })
        .filter(|c| c.sim() >= threshold)
        .collect();
    ranked.sort_by(rerank_order);
    ranked.truncate(n);
    ranked
}

/// Entry store plus its index, kept in step.
#[derive(Debug, Clone, Default)]
pub struct TranslationMemory {
    entries: BTreeMap<String, TmEntry>,
    index: Index,
}

impl TranslationMemory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: Vec<TmEntry>) -> Result<Self> {
        let mut tm = Self::new();
        tm.insert_all(entries)?;
        Ok(tm)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&TmEntry> {
        self.entries.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.contains_key(id)
    }

    pub fn entries(&self) -> &BTreeMap<String, TmEntry> {
        &self.entries
    }

    pub fn index(&self) -> &Index {
        &self.index
    }

    pub fn insert(&mut self, entry: TmEntry) -> Result<()> {
        self.insert_all(vec![entry])
    }

    /// All-or-nothing batch insert.
    pub fn insert_all(&mut self, entries: Vec<TmEntry>) -> Result<()> {
        self.index.add_entries(&entries)?;
        for e in entries {
            self.entries.insert(e.id.clone(), e);
        }
        Ok(())
    }

    pub fn retrieve(&self, query: &Segment, config: &RetrievalConfig) -> Vec<RankedCandidate> {
        let candidates = if config.brute_force && self.len() <= BRUTE_FORCE_LIMIT {
            self.index.ir_query(query, usize::MAX)
                .into_iter()
                .chain(self.unscored(query))
                .collect()
        } else {
            self.index.ir_query(query, config.k)
        };
        rerank(candidates, &self.entries, query, config.n, config.threshold)
    }

    /// Entries sharing no term with the query, for the brute-force path.
    fn unscored<'a>(&'a self, query: &'a Segment) -> impl Iterator<Item = RankedCandidate> + 'a {
        let terms: BTreeSet<&str> = query.tokens.iter().map(|t| t.norm.as_str()).collect();
        self.entries
            .values()
            .filter(move |e| !e.source.tokens.iter().any(|t| terms.contains(t.norm.as_str())))
            .map(|e| RankedCandidate {
                entry_id: e.id.clone(),
                ir_score: 0.0,
                sim_score: None,
            })
    }
}
