//! Per-segment suggestion sets.
//!
//! MT and APE output is not produced here; it is uploaded as
//! `segmentId TAB translation` tables and looked up by segment id.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::color::{ColoredSuggestion, SuggestionView};
use crate::error::{Error, Result};
use crate::retrieval::{RetrievalConfig, TranslationMemory};
use crate::text::Segment;
use crate::tmfile::LineWarning;

/// Where the text a translator started from came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Origin {
    #[serde(rename = "TM")]
    Tm,
    #[serde(rename = "MT")]
    Mt,
    #[serde(rename = "APE")]
    Ape,
    #[serde(rename = "SCRATCH")]
    Scratch,
}

impl Origin {
    pub const ALL: [Origin; 4] = [Origin::Tm, Origin::Mt, Origin::Ape, Origin::Scratch];

    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Tm => "TM",
            Origin::Mt => "MT",
            Origin::Ape => "APE",
            Origin::Scratch => "SCRATCH",
        }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Origin {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "TM" => Ok(Origin::Tm),
            "MT" => Ok(Origin::Mt),
            "APE" => Ok(Origin::Ape),
            "SCRATCH" | "NONE" => Ok(Origin::Scratch),
            _ => Err(format!("unknown origin `{s}`")),
        }
    }
}

/// Source of ready-made translations for a segment.
pub trait SuggestionProvider {
    fn suggestion(&self, origin: Origin, segment: &Segment) -> Option<String>;
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub stored: usize,
    pub warnings: Vec<LineWarning>,
}

/// Parses an external translation table without storing anything.
pub fn parse_external_table(text: &str) -> (Vec<(String, String)>, Vec<LineWarning>) {
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        let problem = match line.split_once('\t') {
            None => "missing tab between segment id and translation",
            Some((id, _)) if id.trim().is_empty() => "empty segment id",
            Some((_, tr)) if tr.trim().is_empty() => "empty translation",
            Some((id, tr)) => {
                rows.push((id.trim().to_string(), tr.to_string()));
                continue;
            }
        };
        warnings.push(LineWarning {
            line: i + 1,
            message: problem.to_string(),
        });
    }
    (rows, warnings)
}

/// Uploaded MT and APE outputs, keyed by segment id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalTables {
    mt: BTreeMap<String, String>,
    ape: BTreeMap<String, String>,
}

impl ExternalTables {
    pub fn new() -> Self {
        Self::default()
    }

    fn table_mut(&mut self, origin: Origin) -> Result<&mut BTreeMap<String, String>> {
        match origin {
            Origin::Mt => Ok(&mut self.mt),
            Origin::Ape => Ok(&mut self.ape),
            other => Err(Error::NotIngestible(other.to_string())),
        }
    }

    /// Stores every well-formed line, last write wins; bad lines are
    /// reported and skipped.
    pub fn ingest_external_table(&mut self, origin: Origin, text: &str) -> Result<IngestReport> {
        let table = self.table_mut(origin)?;
        let (rows, warnings) = parse_external_table(text);
        let stored = rows.len();
        table.extend(rows);
        Ok(IngestReport { stored, warnings })
    }

    /// Stores already-parsed rows.
    pub fn store(&mut self, origin: Origin, rows: impl IntoIterator<Item = (String, String)>) -> Result<usize> {
        let table = self.table_mut(origin)?;
        let mut n = 0;
        for (id, text) in rows {
            table.insert(id, text);
            n += 1;
        }
        Ok(n)
    }

    /// `(segment id, translation)` rows of one table, by segment id.
    pub fn rows(&self, origin: Origin) -> impl Iterator<Item = (&str, &str)> {
        let table = match origin {
            Origin::Mt => Some(&self.mt),
            Origin::Ape => Some(&self.ape),
            _ => None,
        };
        table
            .into_iter()
            .flatten()
            .map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn get(&self, origin: Origin, segment_id: &str) -> Option<&str> {
        match origin {
            Origin::Mt => self.mt.get(segment_id),
            Origin::Ape => self.ape.get(segment_id),
            _ => None,
        }
        .map(String::as_str)
    }
}

impl SuggestionProvider for ExternalTables {
    fn suggestion(&self, origin: Origin, segment: &Segment) -> Option<String> {
        self.get(origin, &segment.id).map(str::to_string)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuggestionSet {
    pub segment_id: String,
    /// Best TM match first.
    pub tm: Vec<ColoredSuggestion>,
    pub mt: Option<String>,
    pub ape: Option<String>,
}

/// TM matches (colored), MT and APE output for one segment. Translating
/// from scratch is always available and is not represented.
pub fn assemble_suggestions(
    segment: &Segment,
    tm: &TranslationMemory,
    provider: &dyn SuggestionProvider,
    config: &RetrievalConfig,
) -> SuggestionSet {
    let matches = tm
        .retrieve(segment, config)
        .iter()
        .filter_map(|c| Some(ColoredSuggestion::build(segment, tm.get(&c.entry_id)?, c)))
        .collect();
    SuggestionSet {
        segment_id: segment.id.clone(),
        tm: matches,
        mt: provider.suggestion(Origin::Mt, segment),
        ape: provider.suggestion(Origin::Ape, segment),
    }
}

impl SuggestionSet {
    pub fn view(&self, segment: &Segment, tm: &TranslationMemory) -> SuggestionSetView {
        SuggestionSetView {
            segment_id: self.segment_id.clone(),
            source: segment.raw.clone(),
            source_tokens: segment.tokens.iter().map(|t| t.surface.clone()).collect(),
            tm: self
                .tm
                .iter()
                .filter_map(|s| Some(s.view(tm.get(&s.entry_id)?)))
                .collect(),
            mt: self.mt.clone(),
            ape: self.ape.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SuggestionSetView {
    pub segment_id: String,
    pub source: String,
    pub source_tokens: Vec<String>,
    pub tm: Vec<SuggestionView>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mt: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ape: Option<String>,
}
