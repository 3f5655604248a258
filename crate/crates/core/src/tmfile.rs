//! Tab-separated TM upload format.
//!
//! One entry per line: `source TAB target [TAB alignment]`, where the
//! alignment is a space-separated list of `i-j` links (source index `i`,
//! target index `j`). Lines starting with `#` and blank lines are skipped.
//! Malformed lines are reported and skipped; a malformed alignment only
//! drops the alignment.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::retrieval::TmEntry;
use crate::text::Segment;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineWarning {
    /// 1-based.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LineWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TmUpload {
    pub entries: Vec<TmEntry>,
    /// 1-based line of each entry, parallel to `entries`.
    pub lines: Vec<usize>,
    pub warnings: Vec<LineWarning>,
}

/// Content-derived entry id, so re-uploading a file yields the same ids.
pub fn entry_id(source: &str, target: &str) -> String {
    let mut h = Sha256::new();
    h.update(source.as_bytes());
    h.update(b"\t");
    h.update(target.as_bytes());
    let digest = h.finalize();
    let hex: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
    format!("tm-{hex}")
}

fn parse_alignment(field: &str) -> Result<BTreeSet<(usize, usize)>, String> {
    field
        .split_whitespace()
        .map(|link| {
            link.split_once('-')
                .and_then(|(s, t)| Some((s.parse().ok()?, t.parse().ok()?)))
                .ok_or_else(|| format!("bad alignment token `{link}`"))
        })
        .collect()
}

pub fn parse_tm(text: &str, source_lang: &str, target_lang: &str) -> TmUpload {
    let mut upload = TmUpload::default();
    let mut seen = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let mut warn = |message: String| {
            upload.warnings.push(LineWarning {
                line: line_no,
                message,
            })
        };
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if !(2..=3).contains(&fields.len()) {
            warn(format!("expected 2 or 3 tab-separated fields, found {}", fields.len()));
            continue;
        }
        let (source, target) = (fields[0].trim(), fields[1].trim());
        if source.is_empty() || target.is_empty() {
            warn("empty source or target".to_string());
            continue;
        }
        let id = entry_id(source, target);
        if !seen.insert(id.clone()) {
            warn(format!("duplicate entry `{id}` within upload"));
            continue;
        }
        let src = Segment::new(id.clone(), source_lang, source);
        let tgt = Segment::new(id.clone(), target_lang, target);
        let alignment = match fields.get(2).map(|f| parse_alignment(f)) {
            None => BTreeSet::new(),
            Some(Ok(links)) => links,
            Some(Err(msg)) => {
                warn(format!("{msg}; alignment dropped"));
                BTreeSet::new()
            }
        };
        let entry = match TmEntry::new(id.clone(), src.clone(), tgt.clone(), alignment) {
            Ok(e) => e,
            Err(e) => {
                warn(format!("{e}; alignment dropped"));
                TmEntry::new(id, src, tgt, BTreeSet::new()).expect("empty alignment is always valid")
            }
        };
        upload.entries.push(entry);
        upload.lines.push(line_no);
    }
    upload
}
