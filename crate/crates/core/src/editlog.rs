//! Post-editing logs.
//!
//! Every submitted segment becomes an [`EditLogRecord`] carrying the chosen
//! origin, both texts, the wall-clock editing time and the edit counts of
//! the alignment from the initial to the final text. Sessions serialize to
//! a strict XML format:
//!
//! ```xml
//! <session id="…" project="…" translator="…">
//!   <records>
//!     <record segment="…" origin="MT" timeMs="…" ins="…" del="…" sub="…" shift="…"
//!             started="…" finished="…">
//!       <initial>…</initial>
//!       <final>…</final>
//!     </record>
//!   </records>
//! </session>
//! ```
//!
//! Timestamps are RFC 3339 in UTC. Import rejects anything else: unknown
//! elements or attributes, missing attributes, and records whose counts or
//! times disagree with their texts.

use std::borrow::Cow;
use std::collections::BTreeSet;

use chrono::{DateTime, SecondsFormat, Utc};
use quick_xml::escape::{escape, resolve_predefined_entity};
use quick_xml::events::{BytesStart, Event};
use quick_xml::{Reader, XmlVersion};
use serde::{Deserialize, Serialize};

use crate::color::diagonal_alignment;
use crate::error::{Error, Result};
use crate::retrieval::TmEntry;
use crate::suggestions::Origin;
use crate::ter::{ter_align, EditOp, EditScript};
use crate::text::Segment;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EditLogRecord {
    pub segment_id: String,
    pub translator_id: String,
    pub origin: Origin,
    pub initial_text: String,
    pub final_text: String,
    pub edit_time_ms: u64,
    pub insertions: usize,
    pub deletions: usize,
    pub substitutions: usize,
    pub shifts: usize,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
}

impl EditLogRecord {
    /// Validates the inputs and computes time and edit counts.
    pub fn compute(
        segment_id: impl Into<String>,
        translator_id: impl Into<String>,
        origin: Origin,
        initial_text: impl Into<String>,
        final_text: impl Into<String>,
        started_at: DateTime<Utc>,
        finished_at: DateTime<Utc>,
    ) -> Result<Self> {
        let initial_text = initial_text.into();
        let final_text = final_text.into();
        if finished_at < started_at {
            return Err(Error::NegativeDuration);
        }
        if origin == Origin::Scratch && !initial_text.is_empty() {
            return Err(Error::ScratchWithInitialText);
        }
        let script = edit_script(&initial_text, &final_text);
        Ok(EditLogRecord {
            segment_id: segment_id.into(),
            translator_id: translator_id.into(),
            origin,
            initial_text,
            final_text,
            edit_time_ms: (finished_at - started_at).num_milliseconds() as u64,
            insertions: script.insertions,
            deletions: script.deletions,
            substitutions: script.substitutions,
            shifts: script.shifts,
            started_at,
            finished_at,
        })
    }

    pub fn total_edits(&self) -> usize {
        self.insertions + self.deletions + self.substitutions + self.shifts
    }
}

fn text_segment(text: &str) -> Segment {
    Segment::new("", "und", text)
}

fn edit_script(initial: &str, final_text: &str) -> EditScript {
    ter_align(&text_segment(initial), &text_segment(final_text))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Session {
    pub session_id: String,
    pub project_id: String,
    pub translator_id: String,
    /// Ordered by `finished_at`; at most one per segment.
    pub records: Vec<EditLogRecord>,
}

impl Session {
    pub fn new(
        session_id: impl Into<String>,
        project_id: impl Into<String>,
        translator_id: impl Into<String>,
    ) -> Self {
        Session {
            session_id: session_id.into(),
            project_id: project_id.into(),
            translator_id: translator_id.into(),
            records: Vec::new(),
        }
    }

    pub fn has_record(&self, segment_id: &str) -> bool {
        self.records.iter().any(|r| r.segment_id == segment_id)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn record_postedit(
        &mut self,
        segment_id: &str,
        origin: Origin,
        initial_text: &str,
        final_text: &str,
        started_at: DateTime<Utc>,
        finished_at: DateTime<Utc>,
    ) -> Result<EditLogRecord> {
        let record = EditLogRecord::compute(
            segment_id,
            self.translator_id.clone(),
            origin,
            initial_text,
            final_text,
            started_at,
            finished_at,
        )?;
        self.append(record.clone())?;
        Ok(record)
    }

    /// Appends a computed record, keeping `finished_at` order.
    pub fn append(&mut self, record: EditLogRecord) -> Result<()> {
        if self.has_record(&record.segment_id) {
            return Err(Error::DuplicateRecord {
                segment: record.segment_id,
                translator: record.translator_id,
            });
        }
        let at = self
            .records
            .partition_point(|r| r.finished_at <= record.finished_at);
        self.records.insert(at, record);
        Ok(())
    }
}

fn timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

fn escape_text(s: &str) -> Cow<'_, str> {
    let escaped = escape(s);
    if escaped.contains('\r') {
        Cow::Owned(escaped.replace('\r', "&#13;"))
    } else {
        escaped
    }
}

fn escape_attr(s: &str) -> String {
    escape(s)
        .replace('\t', "&#9;")
        .replace('\n', "&#10;")
        .replace('\r', "&#13;")
}

/// Serializes a session. Output depends only on the session's contents.
pub fn export_xml(session: &Session) -> Vec<u8> {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&format!(
        "<session id=\"{}\" project=\"{}\" translator=\"{}\">\n",
        escape_attr(&session.session_id),
        escape_attr(&session.project_id),
        escape_attr(&session.translator_id)
    ));
    if session.records.is_empty() {
        out.push_str("  <records/>\n");
    } else {
        out.push_str("  <records>\n");
        for r in &session.records {
            out.push_str(&format!(
                "    <record segment=\"{}\" origin=\"{}\" timeMs=\"{}\" ins=\"{}\" del=\"{}\" sub=\"{}\" shift=\"{}\" started=\"{}\" finished=\"{}\">\n",
                escape_attr(&r.segment_id),
                r.origin,
                r.edit_time_ms,
                r.insertions,
                r.deletions,
                r.substitutions,
                r.shifts,
                timestamp(&r.started_at),
                timestamp(&r.finished_at),
            ));
            out.push_str(&format!("      <initial>{}</initial>\n", escape_text(&r.initial_text)));
            out.push_str(&format!("      <final>{}</final>\n", escape_text(&r.final_text)));
            out.push_str("    </record>\n");
        }
        out.push_str("  </records>\n");
    }
    out.push_str("</session>\n");
    out.into_bytes()
}

struct Parser<'a> {
    reader: Reader<&'a [u8]>,
}

const SESSION_ATTRS: [&str; 3] = ["id", "project", "translator"];
const RECORD_ATTRS: [&str; 9] = [
    "segment", "origin", "timeMs", "ins", "del", "sub", "shift", "started", "finished",
];

enum Node<'a> {
    Open(BytesStart<'a>),
    Empty(BytesStart<'a>),
    Close,
    Eof,
}

impl<'a> Parser<'a> {
    fn xml_err(&self, path: &str, e: impl std::fmt::Display) -> Error {
        Error::schema(path, format!("malformed XML at byte {}: {e}", self.reader.buffer_position()))
    }

    /// Next structural event; whitespace-only text, comments and the
    /// declaration are skipped.
    fn next_node(&mut self, path: &str) -> Result<Node<'a>> {
        loop {
            match self.reader.read_event().map_err(|e| self.xml_err(path, e))? {
                Event::Start(e) => return Ok(Node::Open(e)),
                Event::Empty(e) => return Ok(Node::Empty(e)),
                Event::End(_) => return Ok(Node::Close),
                Event::Eof => return Ok(Node::Eof),
                Event::Decl(_) | Event::Comment(_) => {}
                Event::Text(t) if t.trim().is_empty() => {}
                Event::Text(_) | Event::CData(_) | Event::GeneralRef(_) => {
                    return Err(Error::schema(path, "unexpected text content"))
                }
                Event::PI(_) | Event::DocType(_) => {
                    return Err(Error::schema(path, "unexpected processing instruction or doctype"))
                }
            }
        }
    }

    fn expect_open(&mut self, path: &str, name: &str) -> Result<(BytesStart<'a>, bool)> {
        match self.next_node(path)? {
            Node::Open(e) if e.name().as_ref() == name => Ok((e, false)),
            Node::Empty(e) if e.name().as_ref() == name => Ok((e, true)),
            Node::Open(e) | Node::Empty(e) => Err(Error::schema(
                path,
                format!("unexpected element <{}>, expected <{name}>", e.name().as_ref()),
            )),
            Node::Close | Node::Eof => Err(Error::schema(path, format!("missing element <{name}>"))),
        }
    }

    fn expect_close(&mut self, path: &str) -> Result<()> {
        match self.next_node(path)? {
            Node::Close => Ok(()),
            Node::Open(e) | Node::Empty(e) => Err(Error::schema(
                path,
                format!("unexpected element <{}>", e.name().as_ref()),
            )),
            Node::Eof => Err(Error::schema(path, "unexpected end of document")),
        }
    }

    /// Text of a leaf element whose start tag was just read.
    fn text_until_close(&mut self, path: &str) -> Result<String> {
        let mut text = String::new();
        loop {
            match self.reader.read_event().map_err(|e| self.xml_err(path, e))? {
                Event::Text(t) => text.push_str(&t.into_inner()),
                Event::CData(c) => text.push_str(&c.into_inner()),
                Event::GeneralRef(r) => {
                    if let Some(c) = r.resolve_char_ref().map_err(|e| self.xml_err(path, e))? {
                        text.push(c);
                    } else if let Some(s) = resolve_predefined_entity(&r) {
                        text.push_str(s);
                    } else {
                        return Err(Error::schema(path, format!("unknown entity &{};", &*r)));
                    }
                }
                Event::End(_) => return Ok(text),
                Event::Comment(_) => {}
                Event::Eof => return Err(Error::schema(path, "unexpected end of document")),
                _ => return Err(Error::schema(path, "unexpected markup in text element")),
            }
        }
    }
}

fn attributes(e: &BytesStart<'_>, path: &str, allowed: &[&str]) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for attr in e.attributes() {
        let attr = attr.map_err(|err| Error::schema(path, format!("bad attribute: {err}")))?;
        let key = attr.key.as_ref().to_string();
        if !allowed.contains(&key.as_str()) {
            return Err(Error::schema(format!("{path}/@{key}"), "unknown attribute"));
        }
        if out.iter().any(|(k, _)| *k == key) {
            return Err(Error::schema(format!("{path}/@{key}"), "repeated attribute"));
        }
        let value = attr
            .normalized_value(XmlVersion::Implicit1_0)
            .map_err(|err| Error::schema(format!("{path}/@{key}"), err.to_string()))?
            .into_owned();
        out.push((key, value));
    }
    Ok(out)
}

fn required<'v>(attrs: &'v [(String, String)], path: &str, name: &str) -> Result<&'v str> {
    attrs
        .iter()
        .find(|(k, _)| k == name)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| Error::schema(format!("{path}/@{name}"), format!("missing required attribute `{name}`")))
}

fn parse_attr<T: std::str::FromStr>(attrs: &[(String, String)], path: &str, name: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = required(attrs, path, name)?;
    raw.parse()
        .map_err(|e| Error::schema(format!("{path}/@{name}"), format!("invalid value `{raw}`: {e}")))
}

fn parse_time(attrs: &[(String, String)], path: &str, name: &str) -> Result<DateTime<Utc>> {
    let raw = required(attrs, path, name)?;
    DateTime::parse_from_rfc3339(raw)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| Error::schema(format!("{path}/@{name}"), format!("invalid timestamp `{raw}`: {e}")))
}

/// Parses a session log written by [`export_xml`].
pub fn import_xml(bytes: &[u8]) -> Result<Session> {
    let mut p = Parser {
        reader: Reader::from_reader(bytes),
    };
    p.reader.config_mut().trim_text(false);
    p.reader.config_mut().check_end_names = true;

    let path = "/session";
    let (start, empty) = p.expect_open("/", "session")?;
    let attrs = attributes(&start, path, &SESSION_ATTRS)?;
    let mut session = Session::new(
        required(&attrs, path, "id")?,
        required(&attrs, path, "project")?,
        required(&attrs, path, "translator")?,
    );
    if empty {
        return Err(Error::schema(path, "missing element <records>"));
    }

    let (_, records_empty) = p.expect_open(path, "records")?;
    if !records_empty {
        let mut n = 0;
        loop {
            let rec_path = format!("/session/records/record[{}]", n + 1);
            match p.next_node("/session/records")? {
                Node::Close => break,
                Node::Open(e) if e.name().as_ref() == "record" => {
                    n += 1;
                    let record = parse_record(&mut p, &e, &rec_path, &session.translator_id)?;
                    if session.records.last().is_some_and(|last| last.finished_at > record.finished_at) {
                        return Err(Error::schema(&rec_path, "records are not ordered by finish time"));
                    }
                    session
                        .append(record)
                        .map_err(|e| Error::schema(&rec_path, e.to_string()))?;
                }
                Node::Open(e) | Node::Empty(e) => {
                    return Err(Error::schema(
                        "/session/records",
                        format!("unknown element <{}>", e.name().as_ref()),
                    ))
                }
                Node::Eof => return Err(Error::schema("/session/records", "unexpected end of document")),
            }
        }
    }
    p.expect_close(path)?;
    match p.next_node("/")? {
        Node::Eof => Ok(session),
        _ => Err(Error::schema("/", "content after </session>")),
    }
}

fn parse_record(p: &mut Parser<'_>, start: &BytesStart<'_>, path: &str, translator: &str) -> Result<EditLogRecord> {
    let attrs = attributes(start, path, &RECORD_ATTRS)?;
    let segment = required(&attrs, path, "segment")?.to_string();
    let origin: Origin = parse_attr(&attrs, path, "origin")?;
    let time_ms: u64 = parse_attr(&attrs, path, "timeMs")?;
    let counts: [usize; 4] = [
        parse_attr(&attrs, path, "ins")?,
        parse_attr(&attrs, path, "del")?,
        parse_attr(&attrs, path, "sub")?,
        parse_attr(&attrs, path, "shift")?,
    ];
    let started = parse_time(&attrs, path, "started")?;
    let finished = parse_time(&attrs, path, "finished")?;

    let mut texts = Vec::with_capacity(2);
    for child in ["initial", "final"] {
        let child_path = format!("{path}/{child}");
        let (_, empty) = p.expect_open(path, child)?;
        texts.push(if empty { String::new() } else { p.text_until_close(&child_path)? });
    }
    p.expect_close(path)?;
    let final_text = texts.pop().unwrap_or_default();
    let initial_text = texts.pop().unwrap_or_default();

    let record = EditLogRecord::compute(segment, translator, origin, initial_text, final_text, started, finished)
        .map_err(|e| Error::schema(path, e.to_string()))?;
    if record.edit_time_ms != time_ms {
        return Err(Error::schema(
            format!("{path}/@timeMs"),
            format!("{time_ms} does not match started/finished ({})", record.edit_time_ms),
        ));
    }
    let expected = [record.insertions, record.deletions, record.substitutions, record.shifts];
    for ((name, got), want) in ["ins", "del", "sub", "shift"].iter().zip(counts).zip(expected) {
        if got != want {
            return Err(Error::schema(
                format!("{path}/@{name}"),
                format!("{got} does not match the texts ({want})"),
            ));
        }
    }
    Ok(record)
}

/// Word links between the source segment and the record's final text.
///
/// For a TM-based record the chosen entry's links are carried through the
/// edits from the initial to the final text: links to deleted tokens are
/// dropped, substituted and matched tokens keep theirs. Otherwise, or when
/// no entry is given, the diagonal fallback alignment is returned.
pub fn export_alignments(
    record: &EditLogRecord,
    source: &Segment,
    chosen_entry: Option<&TmEntry>,
) -> Vec<(usize, usize)> {
    let final_len = text_segment(&record.final_text).len();
    let links: BTreeSet<(usize, usize)> = match chosen_entry {
        Some(entry) if record.origin == Origin::Tm => {
            let initial = text_segment(&record.initial_text);
            let script = edit_script(&record.initial_text, &record.final_text);
            let mut moved_to = vec![None; initial.len()];
            for op in &script.ops {
                if let EditOp::Match { hyp, reference } | EditOp::Substitute { hyp, reference } = *op {
                    moved_to[hyp] = Some(reference);
                }
            }
            entry
                .alignment
                .iter()
                .filter_map(|&(s, t)| Some((s, moved_to.get(t).copied().flatten()?)))
                .collect()
        }
        _ => diagonal_alignment(source.len(), final_len),
    };
    links.into_iter().collect()
}
