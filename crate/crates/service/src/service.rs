//! Session and recording state, independent of the HTTP layer.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{SystemTime, UNIX_EPOCH};

use tokio::sync::broadcast;

use romkit_core::engine::{angle_between_deg, evaluate_movement, EngineConfig, SegmentVector};
use romkit_core::io::{append_result, FrameAppender, ResultContext, ResultRecord};
use romkit_core::landmark::{
    frame_passes, resolve_segment, LandmarkFrame, LandmarkId, Recording, RecordingMeta, Source,
};
use romkit_core::registry::{MovementDefinition, Registry};
use romkit_core::Error as CoreError;

use crate::api::{
    FrameBatch, FrameRejection, LiveAngleUpdate, MovementResults, RecordingStarted, RecordingStatus, RecordingSummary,
    RepetitionResult, RomResponse, Session, SessionResults, StartRecording,
};

const EVENT_CAPACITY: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub enum ServiceError {
    NotFound(String),
    Conflict(String),
    Invalid(String),
    Unusable(String),
    Internal(String),
}

impl std::fmt::Display for ServiceError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ServiceError::NotFound(m)
            | ServiceError::Conflict(m)
            | ServiceError::Invalid(m)
            | ServiceError::Unusable(m)
            | ServiceError::Internal(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for ServiceError {}

impl From<CoreError> for ServiceError {
    fn from(e: CoreError) -> Self {
        match e.root() {
            CoreError::Io { .. } => ServiceError::Internal(e.to_string()),
            CoreError::UnusableRecording(_) | CoreError::DegenerateSegment { .. } => {
                ServiceError::Unusable(e.to_string())
            }
            _ => ServiceError::Invalid(e.to_string()),
        }
    }
}

pub type ServiceResult<T> = Result<T, ServiceError>;

/// Messages pushed to live subscribers of a recording.
#[derive(Debug, Clone)]
pub enum LiveEvent {
    Update(LiveAngleUpdate),
    Result(RomResponse),
    Failed(String),
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    pub engine: EngineConfig,
    pub registry: Registry,
}

impl ServiceConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            data_dir: data_dir.into(),
            engine: EngineConfig::default(),
            registry: Registry::builtin(),
        }
    }

    pub fn sessions_dir(&self) -> PathBuf {
        self.data_dir.join("sessions")
    }

    pub fn recordings_dir(&self) -> PathBuf {
        self.data_dir.join("recordings")
    }

    pub fn results_path(&self) -> PathBuf {
        self.data_dir.join("results.jsonl")
    }

    pub fn recording_path(&self, recording_id: &str) -> PathBuf {
        self.recordings_dir().join(format!("{recording_id}.jsonl"))
    }
}

struct LiveRecording {
    session_id: String,
    definition: MovementDefinition,
    meta: RecordingMeta,
    required: BTreeSet<LandmarkId>,
    frames: Vec<LandmarkFrame>,
    appender: FrameAppender,
    reference: Option<SegmentVector>,
    latest: Option<(f64, f64)>,
    running_max: Option<f64>,
    frames_received: usize,
    dropped_low_visibility: usize,
    events: broadcast::Sender<LiveEvent>,
}

impl LiveRecording {
    fn update(&self, rejected: Vec<FrameRejection>) -> LiveAngleUpdate {
        LiveAngleUpdate {
            t: self.latest.map(|(t, _)| t),
            alpha: self.latest.map(|(_, a)| a),
            running_max: self.running_max,
            frames_received: self.frames_received,
            dropped_low_visibility: self.dropped_low_visibility,
            rejected,
        }
    }
}

#[derive(Default)]
struct Inner {
    sessions: BTreeMap<String, Session>,
    live: HashMap<String, LiveRecording>,
}

/// Shared handle to the session store. Cloning is cheap.
#[derive(Clone)]
pub struct Service {
    config: Arc<ServiceConfig>,
    fingerprint: Arc<str>,
    inner: Arc<Mutex<Inner>>,
}

fn internal(e: impl std::fmt::Display) -> ServiceError {
    ServiceError::Internal(e.to_string())
}

fn now_secs() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn new_id() -> String {
    uuid::Uuid::new_v4().simple().to_string()
}

fn write_atomic(path: &Path, bytes: &[u8]) -> ServiceResult<()> {
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, bytes).map_err(|e| internal(format!("{}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| internal(format!("{}: {e}", path.display())))
}

impl Service {
    /// Opens or creates the store under `config.data_dir`. Recordings left open by a
    /// previous process are marked failed.
    pub fn open(config: ServiceConfig) -> ServiceResult<Self> {
        config
            .engine
            .validate()
            .map_err(|e| ServiceError::Invalid(e.to_string()))?;
        for dir in [config.sessions_dir(), config.recordings_dir()] {
            fs::create_dir_all(&dir).map_err(|e| internal(format!("{}: {e}", dir.display())))?;
        }
        let fingerprint = config.engine.fingerprint();
        let service = Service {
            config: Arc::new(config),
            fingerprint: fingerprint.into(),
            inner: Arc::new(Mutex::new(Inner::default())),
        };
        service.load_sessions()?;
        Ok(service)
    }

    fn load_sessions(&self) -> ServiceResult<()> {
        let dir = self.config.sessions_dir();
        let mut entries: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(|e| internal(format!("{}: {e}", dir.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        entries.sort();
        let mut inner = self.lock();
        for path in entries {
            let text = fs::read_to_string(&path).map_err(|e| internal(format!("{}: {e}", path.display())))?;
            let mut session: Session =
                serde_json::from_str(&text).map_err(|e| internal(format!("{}: {e}", path.display())))?;
            let mut changed = false;
            for rec in session
                .recordings
                .iter_mut()
                .filter(|r| r.status == RecordingStatus::Recording)
            {
                rec.status = RecordingStatus::Failed;
                rec.error = Some("service restarted before the recording was stopped".into());
                changed = true;
            }
            if changed {
                tracing::warn!(session = %session.id, "marked interrupted recordings as failed");
                self.persist_session(&session)?;
            }
            inner.sessions.insert(session.id.clone(), session);
        }
        Ok(())
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|p| p.into_inner())
    }

    fn persist_session(&self, session: &Session) -> ServiceResult<()> {
        let path = self.config.sessions_dir().join(format!("{}.json", session.id));
        let bytes = serde_json::to_vec_pretty(session).map_err(internal)?;
        write_atomic(&path, &bytes)
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn create_session(&self, subject: &str) -> ServiceResult<Session> {
        let subject = subject.trim();
        if subject.is_empty() {
            return Err(ServiceError::Invalid("subject must not be empty".into()));
        }
        let session = Session {
            id: new_id(),
            subject: subject.to_string(),
            created_at: now_secs(),
            recordings: Vec::new(),
        };
        self.persist_session(&session)?;
        self.lock().sessions.insert(session.id.clone(), session.clone());
        Ok(session)
    }

    pub fn get_session(&self, id: &str) -> ServiceResult<Session> {
        self.lock()
            .sessions
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(format!("no session {id}")))
    }

    pub fn list_sessions(&self) -> Vec<Session> {
        let mut out: Vec<Session> = self.lock().sessions.values().cloned().collect();
        out.sort_by(|a, b| a.created_at.cmp(&b.created_at).then_with(|| a.id.cmp(&b.id)));
        out
    }

    pub fn start_recording(&self, session_id: &str, req: &StartRecording) -> ServiceResult<RecordingStarted> {
        let definition = self
            .config
            .registry
            .lookup(&req.movement, req.side)
            .map_err(|e| ServiceError::Invalid(e.to_string()))?;
        let source = req.source.unwrap_or(Source::WebcamPose);
        let nominal_rate = req.nominal_rate.unwrap_or(match source {
            Source::WebcamPose => 15.0,
            Source::Mocap => 120.0,
        });
        if !(nominal_rate > 0.0 && nominal_rate.is_finite()) {
            return Err(ServiceError::Invalid(format!(
                "nominal_rate {nominal_rate} must be positive"
            )));
        }

        let mut inner = self.lock();
        let session = inner
            .sessions
            .get(session_id)
            .ok_or_else(|| ServiceError::NotFound(format!("no session {session_id}")))?;
        if let Some(open) = session
            .recordings
            .iter()
            .find(|r| r.status == RecordingStatus::Recording)
        {
            return Err(ServiceError::Conflict(format!(
                "session {session_id} already has recording {} open",
                open.recording_id
            )));
        }
        let meta = RecordingMeta {
            source,
            movement: definition.name.clone(),
            subject: session.subject.clone(),
            repetition: req.repetition,
            nominal_rate,
            side: definition.side,
        };
        let recording_id = new_id();
        let appender = FrameAppender::create(&self.config.recording_path(&recording_id), &meta)?;
        let spec = *definition.segment_for(source);

        let mut session = session.clone();
        session.recordings.push(RecordingSummary {
            recording_id: recording_id.clone(),
            movement: definition.name.clone(),
            side: definition.side,
            repetition: req.repetition,
            source,
            status: RecordingStatus::Recording,
            rom_deg: None,
            needs_review: None,
            error: None,
        });
        self.persist_session(&session)?;
        inner.sessions.insert(session.id.clone(), session);

        let started = RecordingStarted {
            recording_id: recording_id.clone(),
            movement: definition.name.clone(),
            orientation: definition.orientation,
            orientation_hint: definition.orientation.hint().to_string(),
            segment: spec.to_string(),
            segment_landmarks: spec.landmarks().iter().map(|id| id.name().to_string()).collect(),
        };
        let (events, _) = broadcast::channel(EVENT_CAPACITY);
        inner.live.insert(
            recording_id,
            LiveRecording {
                session_id: session_id.to_string(),
                required: spec.landmarks(),
                definition,
                meta,
                frames: Vec::new(),
                appender,
                reference: None,
                latest: None,
                running_max: None,
                frames_received: 0,
                dropped_low_visibility: 0,
                events,
            },
        );
        Ok(started)
    }

    fn closed_or_missing(&self, inner: &Inner, recording_id: &str) -> ServiceError {
        let known = inner
            .sessions
            .values()
            .any(|s| s.recordings.iter().any(|r| r.recording_id == recording_id));
        if known {
            ServiceError::Conflict(format!("recording {recording_id} is no longer open"))
        } else {
            ServiceError::NotFound(format!("no recording {recording_id}"))
        }
    }

    /// Validates, persists and gates a batch, then reports the live angle.
    ///
    /// Frames that fail validation or arrive out of order are listed in `rejected`
    /// and do not affect the recording.
    pub fn append_frames(&self, recording_id: &str, batch: FrameBatch) -> ServiceResult<LiveAngleUpdate> {
        let mut inner = self.lock();
        if !inner.live.contains_key(recording_id) {
            return Err(self.closed_or_missing(&inner, recording_id));
        }
        let threshold = self.config.engine.visibility_threshold;
        let live = inner.live.get_mut(recording_id).expect("checked above");
        let spec = *live.definition.segment_for(live.meta.source);

        let mut rejected = Vec::new();
        let mut accepted = Vec::new();
        for (index, record) in batch.frames.into_iter().enumerate() {
            live.frames_received += 1;
            let frame = match record.into_frame(live.meta.source) {
                Ok(f) => f,
                Err(e) => {
                    rejected.push(FrameRejection {
                        index,
                        reason: e.to_string(),
                    });
                    continue;
                }
            };
            let last_t = accepted
                .last()
                .map(LandmarkFrame::t)
                .or_else(|| live.frames.last().map(LandmarkFrame::t));
            if let Some(prev) = last_t.filter(|prev| frame.t() <= *prev) {
                rejected.push(FrameRejection {
                    index,
                    reason: format!("timestamp {}s does not follow {prev}s", frame.t()),
                });
                continue;
            }
            if !frame_passes(&frame, threshold, &live.required) {
                live.dropped_low_visibility += 1;
            } else {
                let vector =
                    resolve_segment(&frame, &spec).and_then(|(p1, p2)| SegmentVector::between(frame.t(), p1, p2));
                match vector {
                    Ok(v) => {
                        let reference = *live.reference.get_or_insert(v);
                        let alpha = angle_between_deg(&v.v, &reference.v);
                        live.latest = Some((frame.t(), alpha));
                        live.running_max = Some(live.running_max.map_or(alpha, |m| m.max(alpha)));
                    }
                    Err(e) => rejected.push(FrameRejection {
                        index,
                        reason: e.to_string(),
                    }),
                }
            }
            accepted.push(frame);
        }
        live.appender.append(&accepted)?;
        live.frames.extend(accepted);
        let update = live.update(rejected);
        let _ = live.events.send(LiveEvent::Update(update.clone()));
        Ok(update)
    }

    pub fn subscribe(&self, recording_id: &str) -> ServiceResult<(broadcast::Receiver<LiveEvent>, LiveAngleUpdate)> {
        let inner = self.lock();
        match inner.live.get(recording_id) {
            Some(live) => Ok((live.events.subscribe(), live.update(Vec::new()))),
            None => Err(self.closed_or_missing(&inner, recording_id)),
        }
    }

    /// Runs the full analysis over every accepted frame and closes the recording.
    pub fn stop_recording(&self, recording_id: &str) -> ServiceResult<RomResponse> {
        let mut inner = self.lock();
        let Some(mut live) = inner.live.remove(recording_id) else {
            return Err(self.closed_or_missing(&inner, recording_id));
        };
        live.appender.sync()?;
        let outcome = Recording::new(live.meta.clone(), std::mem::take(&mut live.frames))
            .and_then(|rec| evaluate_movement(&rec, &live.definition, &self.config.engine));

        let mut session = inner
            .sessions
            .get(&live.session_id)
            .cloned()
            .ok_or_else(|| internal(format!("session {} vanished", live.session_id)))?;
        let summary = session
            .recordings
            .iter_mut()
            .find(|r| r.recording_id == recording_id)
            .ok_or_else(|| internal(format!("recording {recording_id} missing from its session")))?;

        let result = match outcome {
            Ok(eval) => {
                let record = ResultRecord::new(
                    &eval.rom,
                    ResultContext {
                        subject: live.meta.subject.clone(),
                        movement: live.meta.movement.clone(),
                        rater: live.meta.source.as_str().to_string(),
                        repetition: live.meta.repetition,
                        side: live.meta.side,
                        config_fingerprint: self.fingerprint.to_string(),
                    },
                );
                append_result(&self.config.results_path(), &record)?;
                summary.status = RecordingStatus::Completed;
                summary.rom_deg = Some(eval.rom.rom_deg);
                summary.needs_review = Some(eval.rom.needs_review);
                Ok(RomResponse::new(
                    recording_id.to_string(),
                    &eval.rom,
                    eval.warnings,
                    self.fingerprint.to_string(),
                ))
            }
            Err(e) => {
                summary.status = RecordingStatus::Failed;
                summary.error = Some(e.to_string());
                Err(ServiceError::from(e))
            }
        };
        self.persist_session(&session)?;
        inner.sessions.insert(session.id.clone(), session);
        let _ = live.events.send(match &result {
            Ok(r) => LiveEvent::Result(r.clone()),
            Err(e) => LiveEvent::Failed(e.to_string()),
        });
        result
    }

    /// Completed repetitions of a session grouped by movement and side, with the
    /// within-session mean and range.
    pub fn results(&self, session_id: &str) -> ServiceResult<SessionResults> {
        let session = self.get_session(session_id)?;
        let mut movements: Vec<MovementResults> = Vec::new();
        for rec in &session.recordings {
            let (Some(rom_deg), RecordingStatus::Completed) = (rec.rom_deg, rec.status) else {
                continue;
            };
            let rep = RepetitionResult {
                recording_id: rec.recording_id.clone(),
                repetition: rec.repetition,
                source: rec.source,
                rom_deg,
                needs_review: rec.needs_review.unwrap_or(false),
            };
            match movements
                .iter_mut()
                .find(|m| m.movement == rec.movement && m.side == rec.side)
            {
                Some(m) => m.repetitions.push(rep),
                None => movements.push(MovementResults {
                    movement: rec.movement.clone(),
                    side: rec.side,
                    repetitions: vec![rep],
                    mean_deg: 0.0,
                    range_deg: 0.0,
                }),
            }
        }
        for m in &mut movements {
            let values: Vec<f64> = m.repetitions.iter().map(|r| r.rom_deg).collect();
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            m.mean_deg = values.iter().sum::<f64>() / values.len() as f64;
            m.range_deg = max - min;
        }
        Ok(SessionResults {
            session_id: session.id,
            movements,
        })
    }

    /// Flushes open frame files to disk.
    pub fn flush(&self) -> ServiceResult<()> {
        let mut inner = self.lock();
        for live in inner.live.values_mut() {
            live.appender.sync()?;
        }
        Ok(())
    }
}
