//! In-memory workbench state and the domain events that change it.
//!
//! Every mutation is first *planned* against the current state, which
//! validates it and yields an [`Event`]; the event is then applied. Replaying
//! the same events in order rebuilds the same state, which is what the
//! journal relies on.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use postedit_core::editlog::EditLogRecord;
use postedit_core::suggestions::{parse_external_table, IngestReport};
use postedit_core::tmfile::{parse_tm, LineWarning};
use postedit_core::{ExternalTables, Origin, Segment, Session, TmEntry, TranslationMemory};

use crate::error::{ServiceError, ServiceResult};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SegmentRow {
    pub id: String,
    pub text: String,
}

/// TM entry as stored on disk; tokens are recomputed on load.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TmRow {
    pub id: String,
    pub source: String,
    pub target: String,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub alignment: BTreeSet<(usize, usize)>,
}

impl TmRow {
    fn from_entry(e: &TmEntry) -> Self {
        TmRow {
            id: e.id.clone(),
            source: e.source.raw.clone(),
            target: e.target.raw.clone(),
            alignment: e.alignment.clone(),
        }
    }

    fn into_entry(self, source_lang: &str, target_lang: &str) -> ServiceResult<TmEntry> {
        let source = Segment::new(self.id.clone(), source_lang, self.source);
        let target = Segment::new(self.id.clone(), target_lang, self.target);
        Ok(TmEntry::new(self.id, source, target, self.alignment)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Event {
    ProjectCreated {
        project_id: String,
        name: String,
        source_lang: String,
        target_lang: String,
    },
    SegmentsAdded {
        project_id: String,
        segments: Vec<SegmentRow>,
    },
    TmEntriesAdded {
        project_id: String,
        entries: Vec<TmRow>,
    },
    ExternalIngested {
        project_id: String,
        origin: Origin,
        rows: Vec<(String, String)>,
    },
    SessionCreated {
        project_id: String,
        session_id: String,
        translator_id: String,
    },
    RecordAppended {
        project_id: String,
        session_id: String,
        record: EditLogRecord,
    },
}

/// Ordered segment list with lookup by id.
#[derive(Debug, Clone, Default)]
pub struct Segments {
    list: Vec<Segment>,
    by_id: BTreeMap<String, usize>,
}

impl Segments {
    pub fn get(&self, id: &str) -> Option<&Segment> {
        self.by_id.get(id).map(|&i| &self.list[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = &Segment> {
        self.list.iter()
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }
}

/// Project state. Fields behind `Arc` are shared between snapshots and
/// copied only when changed.
#[derive(Debug, Clone)]
pub struct Project {
    pub id: String,
    pub name: String,
    pub source_lang: String,
    pub target_lang: String,
    pub segments: Arc<Segments>,
    pub tm: Arc<TranslationMemory>,
    pub external: Arc<ExternalTables>,
    pub sessions: BTreeMap<String, Arc<Session>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProjectSummary {
    pub project_id: String,
    pub name: String,
    pub source_lang: String,
    pub target_lang: String,
    pub segments: usize,
    pub tm_entries: usize,
    pub sessions: usize,
}

impl Project {
    pub fn summary(&self) -> ProjectSummary {
        ProjectSummary {
            project_id: self.id.clone(),
            name: self.name.clone(),
            source_lang: self.source_lang.clone(),
            target_lang: self.target_lang.clone(),
            segments: self.segments.len(),
            tm_entries: self.tm.len(),
            sessions: self.sessions.len(),
        }
    }

    pub fn segment(&self, segment_id: &str) -> ServiceResult<&Segment> {
        self.segments
            .get(segment_id)
            .ok_or_else(|| ServiceError::SegmentNotFound {
                project: self.id.clone(),
                segment: segment_id.to_string(),
            })
    }

    pub fn session(&self, session_id: &str) -> ServiceResult<&Session> {
        self.sessions
            .get(session_id)
            .map(|s| s.as_ref())
            .ok_or_else(|| ServiceError::SessionNotFound {
                project: self.id.clone(),
                session: session_id.to_string(),
            })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TmUploadReport {
    pub added: usize,
    pub warnings: Vec<LineWarning>,
}

/// What a client submits for one post-edited segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PostEdit {
    pub segment_id: String,
    pub origin: Origin,
    pub initial_text: String,
    pub final_text: String,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Default)]
pub struct Store {
    projects: BTreeMap<String, Arc<Project>>,
    /// Number of events applied so far.
    seq: u64,
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn seq(&self) -> u64 {
        self.seq
    }

    pub(crate) fn set_seq(&mut self, seq: u64) {
        self.seq = seq;
    }

    pub fn projects(&self) -> impl Iterator<Item = &Project> {
        self.projects.values().map(|p| p.as_ref())
    }

    pub fn project(&self, project_id: &str) -> ServiceResult<&Project> {
        self.projects
            .get(project_id)
            .map(|p| p.as_ref())
            .ok_or_else(|| ServiceError::ProjectNotFound(project_id.to_string()))
    }

    /// Project ids ordered by creation.
    pub fn project_ids(&self) -> Vec<String> {
        let mut ids: Vec<&String> = self.projects.keys().collect();
        ids.sort_by_key(|id| (id.len(), *id));
        ids.into_iter().cloned().collect()
    }

    fn project_mut(&mut self, project_id: &str) -> ServiceResult<&mut Project> {
        self.projects
            .get_mut(project_id)
            .map(Arc::make_mut)
            .ok_or_else(|| ServiceError::ProjectNotFound(project_id.to_string()))
    }

    // ---- planning: validate and produce an event, never mutate ----

    pub fn plan_create_project(&self, name: &str, source_lang: &str, target_lang: &str) -> ServiceResult<Event> {
        let name = name.trim();
        if name.is_empty() {
            return Err(ServiceError::Invalid("project name must not be empty".into()));
        }
        if source_lang.trim().is_empty() || target_lang.trim().is_empty() {
            return Err(ServiceError::Invalid("language tags must not be empty".into()));
        }
        if self.projects.values().any(|p| p.name == name) {
            return Err(ServiceError::Conflict(format!("project name `{name}` already exists")));
        }
        Ok(Event::ProjectCreated {
            project_id: format!("p{}", self.projects.len() + 1),
            name: name.to_string(),
            source_lang: source_lang.trim().to_string(),
            target_lang: target_lang.trim().to_string(),
        })
    }

    pub fn plan_segments(&self, project_id: &str, segments: Vec<SegmentRow>) -> ServiceResult<Event> {
        let project = self.project(project_id)?;
        let mut seen = BTreeSet::new();
        for s in &segments {
            if s.id.trim().is_empty() || s.id.trim() != s.id {
                return Err(ServiceError::Invalid(format!("bad segment id `{}`", s.id)));
            }
            if project.segments.get(&s.id).is_some() || !seen.insert(s.id.as_str()) {
                return Err(ServiceError::Conflict(format!("duplicate segment id `{}`", s.id)));
            }
        }
        Ok(Event::SegmentsAdded {
            project_id: project_id.to_string(),
            segments,
        })
    }

    /// Parses a TM file. Entries already in the memory are reported and
    /// skipped; `None` means nothing new to store.
    pub fn plan_tm_upload(&self, project_id: &str, text: &str) -> ServiceResult<(Option<Event>, TmUploadReport)> {
        let project = self.project(project_id)?;
        let upload = parse_tm(text, &project.source_lang, &project.target_lang);
        let mut report = TmUploadReport {
            added: 0,
            warnings: upload.warnings,
        };
        let mut rows = Vec::new();
        for (entry, line) in upload.entries.iter().zip(upload.lines) {
            if project.tm.contains(&entry.id) {
                report.warnings.push(LineWarning {
                    line,
                    message: format!("duplicate entry `{}` already in memory", entry.id),
                });
            } else {
                rows.push(TmRow::from_entry(entry));
            }
        }
        report.warnings.sort_by_key(|w| w.line);
        report.added = rows.len();
        let event = (!rows.is_empty()).then(|| Event::TmEntriesAdded {
            project_id: project_id.to_string(),
            entries: rows,
        });
        Ok((event, report))
    }

    pub fn plan_external(&self, project_id: &str, origin: Origin, text: &str) -> ServiceResult<(Option<Event>, IngestReport)> {
        self.project(project_id)?;
        // Rejects TM and scratch before anything is parsed.
        ExternalTables::new().store(origin, [])?;
        let (rows, warnings) = parse_external_table(text);
        let report = IngestReport {
            stored: rows.len(),
            warnings,
        };
        let event = (!rows.is_empty()).then(|| Event::ExternalIngested {
            project_id: project_id.to_string(),
            origin,
            rows,
        });
        Ok((event, report))
    }

    pub fn plan_session(&self, project_id: &str, translator_id: &str) -> ServiceResult<Event> {
        let project = self.project(project_id)?;
        let translator_id = translator_id.trim();
        if translator_id.is_empty() {
            return Err(ServiceError::Invalid("translator id must not be empty".into()));
        }
        Ok(Event::SessionCreated {
            project_id: project_id.to_string(),
            session_id: format!("s{}", project.sessions.len() + 1),
            translator_id: translator_id.to_string(),
        })
    }

    pub fn plan_record(&self, project_id: &str, session_id: &str, edit: &PostEdit) -> ServiceResult<Event> {
        let project = self.project(project_id)?;
        let session = project.session(session_id)?;
        project.segment(&edit.segment_id)?;
        if session.has_record(&edit.segment_id) {
            return Err(postedit_core::Error::DuplicateRecord {
                segment: edit.segment_id.clone(),
                translator: session.translator_id.clone(),
            }
            .into());
        }
        let record = EditLogRecord::compute(
            &edit.segment_id,
            session.translator_id.clone(),
            edit.origin,
            &edit.initial_text,
            &edit.final_text,
            edit.started_at,
            edit.finished_at,
        )?;
        Ok(Event::RecordAppended {
            project_id: project_id.to_string(),
            session_id: session_id.to_string(),
            record,
        })
    }

    // ---- applying ----

    /// Applies one event. On error the store is unchanged.
    pub fn apply(&mut self, event: &Event) -> ServiceResult<()> {
        match event {
            Event::ProjectCreated {
                project_id,
                name,
                source_lang,
                target_lang,
            } => {
                if self.projects.contains_key(project_id) {
                    return Err(ServiceError::Conflict(format!("project `{project_id}` already exists")));
                }
                self.projects.insert(
                    project_id.clone(),
                    Arc::new(Project {
                        id: project_id.clone(),
                        name: name.clone(),
                        source_lang: source_lang.clone(),
                        target_lang: target_lang.clone(),
                        segments: Arc::default(),
                        tm: Arc::default(),
                        external: Arc::default(),
                        sessions: BTreeMap::new(),
                    }),
                );
            }
            Event::SegmentsAdded { project_id, segments } => {
                let project = self.project(project_id)?;
                let mut next = (*project.segments).clone();
                for row in segments {
                    if next.by_id.contains_key(&row.id) {
                        return Err(ServiceError::Conflict(format!("duplicate segment id `{}`", row.id)));
                    }
                    next.by_id.insert(row.id.clone(), next.list.len());
                    next.list.push(Segment::new(row.id.clone(), &project.source_lang, row.text.clone()));
                }
                self.project_mut(project_id)?.segments = Arc::new(next);
            }
            Event::TmEntriesAdded { project_id, entries } => {
                let project = self.project(project_id)?;
                let entries = entries
                    .iter()
                    .map(|r| r.clone().into_entry(&project.source_lang, &project.target_lang))
                    .collect::<ServiceResult<Vec<_>>>()?;
                let mut tm = (*project.tm).clone();
                tm.insert_all(entries)?;
                self.project_mut(project_id)?.tm = Arc::new(tm);
            }
            Event::ExternalIngested {
                project_id,
                origin,
                rows,
            } => {
                let mut tables = (*self.project(project_id)?.external).clone();
                tables.store(*origin, rows.iter().cloned())?;
                self.project_mut(project_id)?.external = Arc::new(tables);
            }
            Event::SessionCreated {
                project_id,
                session_id,
                translator_id,
            } => {
                let project = self.project_mut(project_id)?;
                if project.sessions.contains_key(session_id) {
                    return Err(ServiceError::Conflict(format!("session `{session_id}` already exists")));
                }
                project.sessions.insert(
                    session_id.clone(),
                    Arc::new(Session::new(session_id.clone(), project_id.clone(), translator_id.clone())),
                );
            }
            Event::RecordAppended {
                project_id,
                session_id,
                record,
            } => {
                let project = self.project(project_id)?;
                let mut session = project.session(session_id)?.clone();
                if record.translator_id != session.translator_id {
                    return Err(ServiceError::Invalid(format!(
                        "record translator `{}` does not own session `{session_id}`",
                        record.translator_id
                    )));
                }
                session.append(record.clone())?;
                self.project_mut(project_id)?
                    .sessions
                    .insert(session_id.clone(), Arc::new(session));
            }
        }
        self.seq += 1;
        Ok(())
    }

    /// A compact event sequence that rebuilds this state from empty.
    pub fn to_events(&self) -> Vec<Event> {
        let mut events = Vec::new();
        for id in self.project_ids() {
            let p = &self.projects[&id];
            events.push(Event::ProjectCreated {
                project_id: p.id.clone(),
                name: p.name.clone(),
                source_lang: p.source_lang.clone(),
                target_lang: p.target_lang.clone(),
            });
            if !p.segments.is_empty() {
                events.push(Event::SegmentsAdded {
                    project_id: p.id.clone(),
                    segments: p
                        .segments
                        .iter()
                        .map(|s| SegmentRow {
                            id: s.id.clone(),
                            text: s.raw.clone(),
                        })
                        .collect(),
                });
            }
            if !p.tm.is_empty() {
                events.push(Event::TmEntriesAdded {
                    project_id: p.id.clone(),
                    entries: p.tm.entries().values().map(TmRow::from_entry).collect(),
                });
            }
            for origin in [Origin::Mt, Origin::Ape] {
                let rows: Vec<(String, String)> = p
                    .external
                    .rows(origin)
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .collect();
                if !rows.is_empty() {
                    events.push(Event::ExternalIngested {
                        project_id: p.id.clone(),
                        origin,
                        rows,
                    });
                }
            }
            let mut session_ids: Vec<&String> = p.sessions.keys().collect();
            session_ids.sort_by_key(|id| (id.len(), *id));
            for sid in session_ids {
                let s = &p.sessions[sid];
                events.push(Event::SessionCreated {
                    project_id: p.id.clone(),
                    session_id: s.session_id.clone(),
                    translator_id: s.translator_id.clone(),
                });
                for r in &s.records {
                    events.push(Event::RecordAppended {
                        project_id: p.id.clone(),
                        session_id: s.session_id.clone(),
                        record: r.clone(),
                    });
                }
            }
        }
        events
    }
}
