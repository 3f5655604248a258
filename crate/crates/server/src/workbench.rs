//! The service facade shared by the HTTP API and the command line.
//!
//! Writes are serialized through one journal lock: each is planned against
//! a clone of the current state, applied to the clone, made durable, and
//! only then published. A failing write therefore leaves the visible state
//! untouched. Reads take an `Arc` of the published state and never wait for
//! a write in progress.

use std::path::Path;
use std::sync::{Arc, Mutex, PoisonError, RwLock};

use postedit_core::suggestions::{assemble_suggestions, IngestReport, SuggestionSetView};
use postedit_core::{editlog, EditLogRecord, Origin, RetrievalConfig};

use crate::error::ServiceResult;
use crate::journal::Journal;
use crate::store::{Event, PostEdit, ProjectSummary, SegmentRow, Store, TmUploadReport};

#[derive(Debug)]
pub struct Workbench {
    state: RwLock<Arc<Store>>,
    journal: Mutex<Journal>,
    config: RetrievalConfig,
}

impl Workbench {
    pub fn open(dir: impl AsRef<Path>, config: RetrievalConfig) -> ServiceResult<Self> {
        let (journal, store) = Journal::open(dir)?;
        Ok(Workbench {
            state: RwLock::new(Arc::new(store)),
            journal: Mutex::new(journal),
            config,
        })
    }

    pub fn config(&self) -> &RetrievalConfig {
        &self.config
    }

    /// The current published state.
    pub fn snapshot(&self) -> Arc<Store> {
        self.state.read().unwrap_or_else(PoisonError::into_inner).clone()
    }

    pub fn set_snapshot_every(&self, n: u64) {
        self.journal.lock().unwrap_or_else(PoisonError::into_inner).set_snapshot_every(n);
    }

    /// Forces a snapshot and compacts the journal.
    pub fn compact(&self) -> ServiceResult<()> {
        let mut journal = self.journal.lock().unwrap_or_else(PoisonError::into_inner);
        journal.snapshot(&self.snapshot())
    }

    fn commit<T>(&self, plan: impl FnOnce(&Store) -> ServiceResult<(Option<Event>, T)>) -> ServiceResult<T> {
        let mut journal = self.journal.lock().unwrap_or_else(PoisonError::into_inner);
        let current = self.snapshot();
        let (event, out) = plan(&current)?;
        if let Some(event) = event {
            let mut next = (*current).clone();
            next.apply(&event)?;
            journal.append(&event, &next)?;
            *self.state.write().unwrap_or_else(PoisonError::into_inner) = Arc::new(next);
        }
        Ok(out)
    }

    pub fn create_project(&self, name: &str, source_lang: &str, target_lang: &str) -> ServiceResult<ProjectSummary> {
        let id = self.commit(|s| {
            let event = s.plan_create_project(name, source_lang, target_lang)?;
            let Event::ProjectCreated { project_id, .. } = &event else { unreachable!() };
            let id = project_id.clone();
            Ok((Some(event), id))
        })?;
        self.project(&id)
    }

    pub fn projects(&self) -> Vec<ProjectSummary> {
        let s = self.snapshot();
        s.project_ids().iter().map(|id| s.project(id).expect("listed").summary()).collect()
    }

    pub fn project(&self, project_id: &str) -> ServiceResult<ProjectSummary> {
        Ok(self.snapshot().project(project_id)?.summary())
    }

    pub fn segments(&self, project_id: &str) -> ServiceResult<Vec<SegmentRow>> {
        let s = self.snapshot();
        Ok(s.project(project_id)?
            .segments
            .iter()
            .map(|seg| SegmentRow {
                id: seg.id.clone(),
                text: seg.raw.clone(),
            })
            .collect())
    }

    pub fn add_segments(&self, project_id: &str, segments: Vec<SegmentRow>) -> ServiceResult<usize> {
        let n = segments.len();
        self.commit(|s| {
            let event = s.plan_segments(project_id, segments)?;
            Ok(((n > 0).then_some(event), n))
        })
    }

    pub fn upload_tm(&self, project_id: &str, text: &str) -> ServiceResult<TmUploadReport> {
        self.commit(|s| s.plan_tm_upload(project_id, text))
    }

    pub fn ingest_external(&self, project_id: &str, origin: Origin, text: &str) -> ServiceResult<IngestReport> {
        self.commit(|s| s.plan_external(project_id, origin, text))
    }

    pub fn create_session(&self, project_id: &str, translator_id: &str) -> ServiceResult<String> {
        self.commit(|s| {
            let event = s.plan_session(project_id, translator_id)?;
            let Event::SessionCreated { session_id, .. } = &event else { unreachable!() };
            let id = session_id.clone();
            Ok((Some(event), id))
        })
    }

    pub fn submit_postedit(&self, project_id: &str, session_id: &str, edit: &PostEdit) -> ServiceResult<EditLogRecord> {
        self.commit(|s| {
            let event = s.plan_record(project_id, session_id, edit)?;
            let Event::RecordAppended { record, .. } = &event else { unreachable!() };
            let record = record.clone();
            Ok((Some(event), record))
        })
    }

    pub fn suggestions(&self, project_id: &str, segment_id: &str) -> ServiceResult<SuggestionSetView> {
        let s = self.snapshot();
        let project = s.project(project_id)?;
        let segment = project.segment(segment_id)?;
        let set = assemble_suggestions(segment, &project.tm, project.external.as_ref(), &self.config);
        Ok(set.view(segment, &project.tm))
    }

    pub fn session(&self, project_id: &str, session_id: &str) -> ServiceResult<postedit_core::Session> {
        Ok(self.snapshot().project(project_id)?.session(session_id)?.clone())
    }

    pub fn log_xml(&self, project_id: &str, session_id: &str) -> ServiceResult<Vec<u8>> {
        let s = self.snapshot();
        Ok(editlog::export_xml(s.project(project_id)?.session(session_id)?))
    }
}

