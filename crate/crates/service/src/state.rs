//! Shared service state.
//!
//! Each resource (the device, every session) has a single owner guarded by a
//! FIFO async mutex, so mutations on it are applied one at a time in arrival
//! order. After every mutation the owner publishes an immutable snapshot on a
//! watch channel; reads take the latest snapshot without queueing behind writers.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use tactile_core::device::{
    apply_command, format_command, parse_command, Command, DeviceLimits, DeviceState, Mode, Response, SimulatedDriver, Verb,
};
use tactile_core::drivechain::BoosterModel;
use tactile_core::experiment::{
    plan_session, Condition, ExperimentError, Likert, ResponseRecord, SessionFile, SessionLog, GRID_SIZE,
};
use tokio::sync::{watch, Mutex};
use uuid::Uuid;

use crate::error::ApiError;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub limits: DeviceLimits,
    pub booster: BoosterModel,
    /// Sessions are persisted as `<id>.jsonl` here when set.
    pub data_dir: Option<PathBuf>,
    /// Static console assets served at `/` when set.
    pub assets_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        let limits = DeviceLimits::default();
        ServiceConfig { limits, booster: BoosterModel::ideal(limits.max_voltage), data_dir: None, assets_dir: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Active,
    Complete,
}

/// Experimenter-facing snapshot of one session.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionView {
    pub id: Uuid,
    pub participant_id: String,
    pub seed: u64,
    pub order: Vec<Condition>,
    /// Index of the next unanswered condition.
    pub cursor: usize,
    pub total: usize,
    pub state: SessionState,
    pub distinct_sensation_count: Option<u8>,
}

impl SessionView {
    fn of(id: Uuid, log: &SessionLog) -> Self {
        SessionView {
            id,
            participant_id: log.plan.participant_id.clone(),
            seed: log.plan.seed,
            order: log.plan.order.clone(),
            cursor: log.responses.len(),
            total: GRID_SIZE,
            state: if log.is_complete() { SessionState::Complete } else { SessionState::Active },
            distinct_sensation_count: log.distinct_sensation_count,
        }
    }

    pub fn current(&self) -> Option<Condition> {
        self.order.get(self.cursor).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LiveStep {
    pub session: Uuid,
    #[serde(skip)]
    pub condition: Condition,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviceView {
    pub mode: Mode,
    pub set_voltage: Option<f64>,
    pub set_frequency: Option<f64>,
    pub status: String,
    pub live: Option<LiveStep>,
}

/// One device exchange with the party that issued it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditEntry {
    pub seq: usize,
    /// `session:<id>` or `passthrough`.
    pub source: String,
    pub command: String,
    pub response: String,
    pub mode_after: Mode,
    /// Whether a session step was live after the exchange.
    pub live_after: bool,
}

struct Desk {
    driver: SimulatedDriver,
    live: Option<LiveStep>,
    audit: Vec<AuditEntry>,
}

impl Desk {
    fn exec_line(&mut self, source: &str, line: &str) -> Response {
        let response = self.driver.send_line(line);
        self.record(source, line, &response);
        response
    }

    fn exec(&mut self, source: &str, cmd: &Command) -> Response {
        self.exec_line(source, &format_command(cmd))
    }

    fn record(&mut self, source: &str, line: &str, response: &Response) {
        let mode = self.driver.state().mode;
        self.audit.push(AuditEntry {
            seq: self.audit.len(),
            source: source.to_string(),
            command: line.to_string(),
            response: response.to_string(),
            mode_after: mode,
            live_after: self.live.is_some(),
        });
        tracing::info!(source, command = line, response = %response, "device");
    }

    fn view(&self) -> DeviceView {
        let s = self.driver.state();
        DeviceView {
            mode: s.mode,
            set_voltage: s.set_voltage,
            set_frequency: s.set_frequency,
            status: apply_command(s, &Command::status()).1.to_string(),
            live: self.live,
        }
    }

    fn matches(state: &DeviceState, condition: Condition) -> bool {
        match (condition.voltage(), condition.frequency()) {
            (Some(v), Some(f)) => {
                state.mode == Mode::Driving
                    && state.set_voltage == Some(f64::from(v))
                    && state.set_frequency == Some(f64::from(f))
            }
            _ => state.mode != Mode::Driving,
        }
    }
}

enum Store {
    Memory(SessionLog),
    File(SessionFile),
}

impl Store {
    fn log(&self) -> &SessionLog {
        match self {
            Store::Memory(log) => log,
            Store::File(file) => file.log(),
        }
    }

    fn record_response(&mut self, rec: ResponseRecord) -> Result<(), ExperimentError> {
        match self {
            Store::Memory(log) => log.record_response(rec),
            Store::File(file) => file.record_response(rec),
        }
    }

    fn set_distinct_count(&mut self, count: u8) -> Result<(), ExperimentError> {
        match self {
            Store::Memory(log) => log.set_distinct_count(count),
            Store::File(file) => file.set_distinct_count(count),
        }
    }
}

struct SessionSlot {
    store: Mutex<Store>,
    view: watch::Sender<SessionView>,
}

type Registry = BTreeMap<Uuid, Arc<SessionSlot>>;

struct Inner {
    config: ServiceConfig,
    desk: Mutex<Desk>,
    device_view: watch::Sender<DeviceView>,
    sessions: watch::Sender<Arc<Registry>>,
}

/// Questionnaire answers for the current step. The condition defaults to the
/// live one and the timestamp to the time of receipt.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ResponseSubmission {
    #[serde(default)]
    pub condition: Option<Condition>,
    pub likert: Likert,
    pub acceptable: bool,
    #[serde(default)]
    pub free_text: String,
    pub similar_fabric: u8,
    #[serde(default)]
    pub timestamp: Option<String>,
}

/// Result of putting the cloth into the current condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Presentation {
    pub session_id: Uuid,
    pub step: usize,
    pub commands: Vec<String>,
    pub device: DeviceView,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommandReply {
    pub command: String,
    pub response: String,
    pub ok: bool,
    pub device: DeviceView,
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

impl AppState {
    /// Builds the state, resuming any sessions found in the data directory.
    pub fn new(config: ServiceConfig) -> Result<Self, ExperimentError> {
        let driver = SimulatedDriver::new(config.limits).with_booster(config.booster);
        let desk = Desk { driver, live: None, audit: Vec::new() };
        let mut registry = Registry::new();
        if let Some(dir) = &config.data_dir {
            std::fs::create_dir_all(dir)?;
            for entry in std::fs::read_dir(dir)? {
                let path = entry?.path();
                let id = path
                    .extension()
                    .filter(|e| *e == "jsonl")
                    .and_then(|_| path.file_stem()?.to_str()?.parse::<Uuid>().ok());
                if let Some(id) = id {
                    let file = SessionFile::resume(&path)?;
                    registry.insert(id, Arc::new(Self::slot(id, Store::File(file))));
                }
            }
        }
        let view = desk.view();
        Ok(AppState {
            inner: Arc::new(Inner {
                config,
                desk: Mutex::new(desk),
                device_view: watch::channel(view).0,
                sessions: watch::channel(Arc::new(registry)).0,
            }),
        })
    }

    fn slot(id: Uuid, store: Store) -> SessionSlot {
        let view = SessionView::of(id, store.log());
        SessionSlot { store: Mutex::new(store), view: watch::channel(view).0 }
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.inner.config
    }

    fn find(&self, id: Uuid) -> Result<Arc<SessionSlot>, ApiError> {
        self.inner.sessions.borrow().get(&id).cloned().ok_or_else(|| ApiError::not_found(format!("session {id}")))
    }

    pub fn sessions(&self) -> Vec<SessionView> {
        let registry = self.inner.sessions.borrow().clone();
        registry.values().map(|s| s.view.borrow().clone()).collect()
    }

    pub fn session(&self, id: Uuid) -> Result<SessionView, ApiError> {
        Ok(self.find(id)?.view.borrow().clone())
    }

    pub fn device(&self) -> DeviceView {
        self.inner.device_view.borrow().clone()
    }

    pub async fn audit(&self) -> Vec<AuditEntry> {
        self.inner.desk.lock().await.audit.clone()
    }

    pub fn create_session(&self, participant_id: &str, seed: u64) -> Result<SessionView, ApiError> {
        let plan = plan_session(participant_id, seed)?;
        let id = Uuid::new_v4();
        let store = match &self.inner.config.data_dir {
            Some(dir) => Store::File(SessionFile::create(&dir.join(format!("{id}.jsonl")), plan)?),
            None => Store::Memory(SessionLog::new(plan)),
        };
        let slot = Arc::new(Self::slot(id, store));
        let view = slot.view.borrow().clone();
        self.inner.sessions.send_modify(|registry| {
            Arc::make_mut(registry).insert(id, slot);
        });
        Ok(view)
    }

    fn publish_device(&self, desk: &Desk) {
        self.inner.device_view.send_replace(desk.view());
    }

    /// Issues the current condition's commands to the device and marks the step live.
    pub async fn present(&self, id: Uuid) -> Result<Presentation, ApiError> {
        let slot = self.find(id)?;
        let store = slot.store.lock().await;
        let view = SessionView::of(id, store.log());
        let condition = view
            .current()
            .ok_or_else(|| ApiError::conflict("SESSION_COMPLETE", "every condition has been answered"))?;
        let mut desk = self.inner.desk.lock().await;
        if let Some(other) = desk.live.filter(|l| l.session != id) {
            return Err(ApiError::conflict("INTERLOCK", format!("session {} holds the device", other.session)));
        }
        let source = format!("session:{id}");
        let mut commands = Vec::new();
        desk.live = Some(LiveStep { session: id, condition });
        for cmd in condition.device_commands() {
            let line = format_command(&cmd);
            let response = desk.exec(&source, &cmd);
            commands.push(line.clone());
            if let Response::Err(code) = response {
                desk.live = None;
                desk.exec(&source, &Command::off());
                self.publish_device(&desk);
                return Err(ApiError::new(
                    axum::http::StatusCode::BAD_GATEWAY,
                    code.as_str(),
                    format!("device rejected '{line}' with ERR {}", code.as_str()),
                ));
            }
        }
        self.publish_device(&desk);
        Ok(Presentation { session_id: id, step: view.cursor, commands, device: desk.view() })
    }

    /// Switches the cloth off if this session holds the device.
    pub async fn release(&self, id: Uuid) -> Result<DeviceView, ApiError> {
        let _slot = self.find(id)?;
        let mut desk = self.inner.desk.lock().await;
        if desk.live.is_some_and(|l| l.session == id) {
            desk.live = None;
            desk.exec(&format!("session:{id}"), &Command::off());
            self.publish_device(&desk);
        }
        Ok(desk.view())
    }

    pub async fn record_response(&self, id: Uuid, sub: ResponseSubmission) -> Result<SessionView, ApiError> {
        let slot = self.find(id)?;
        let mut store = slot.store.lock().await;
        let current = SessionView::of(id, store.log()).current();
        let condition = match (sub.condition, current) {
            (Some(c), _) => c,
            (None, Some(c)) => c,
            (None, None) => return Err(ApiError::conflict("SESSION_COMPLETE", "every condition has been answered")),
        };
        if store.log().is_answered(&condition) {
            return Err(ExperimentError::DuplicateResponse(condition).into());
        }
        let record = ResponseRecord {
            condition,
            likert: sub.likert,
            acceptable: sub.acceptable,
            free_text: sub.free_text,
            similar_fabric: sub.similar_fabric,
            timestamp: sub
                .timestamp
                .unwrap_or_else(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
        };
        record.validate()?;
        let mut desk = self.inner.desk.lock().await;
        let live = Some(condition) == current
            && desk.live == Some(LiveStep { session: id, condition })
            && Desk::matches(desk.driver.state(), condition);
        if !live {
            return Err(ApiError::conflict(
                "NOT_LIVE",
                format!("condition {condition} is not being presented; present the current step first"),
            ));
        }
        store.record_response(record)?;
        desk.live = None;
        desk.exec(&format!("session:{id}"), &Command::off());
        self.publish_device(&desk);
        let view = SessionView::of(id, store.log());
        slot.view.send_replace(view.clone());
        Ok(view)
    }

    pub async fn record_distinct(&self, id: Uuid, count: u8) -> Result<SessionView, ApiError> {
        let slot = self.find(id)?;
        let mut store = slot.store.lock().await;
        store.set_distinct_count(count)?;
        let view = SessionView::of(id, store.log());
        slot.view.send_replace(view.clone());
        Ok(view)
    }

    pub async fn export(&self, id: Uuid) -> Result<String, ApiError> {
        Ok(self.find(id)?.store.lock().await.log().to_jsonl())
    }

    /// Every complete session, in registry order.
    pub async fn complete_logs(&self) -> Vec<SessionLog> {
        let registry = self.inner.sessions.borrow().clone();
        let mut logs = Vec::new();
        for slot in registry.values() {
            let store = slot.store.lock().await;
            if store.log().is_complete() {
                logs.push(store.log().clone());
            }
        }
        logs
    }

    pub async fn ensure_session(&self, id: Uuid) -> Result<(), ApiError> {
        self.find(id).map(|_| ())
    }

    /// Protocol passthrough. ON is reserved for session steps and set-points
    /// are locked while a step is live; OFF and STATUS are always accepted.
    /// An OFF during a live step leaves the step held but no longer answerable
    /// until it is presented again.
    pub async fn device_command(&self, line: &str) -> Result<CommandReply, ApiError> {
        let line = line.trim_end_matches(['\r', '\n']);
        let mut desk = self.inner.desk.lock().await;
        if let Ok(cmd) = parse_command(line) {
            match cmd.verb {
                Verb::On => {
                    return Err(ApiError::conflict("INTERLOCK", "ON is only issued by a live session step"))
                }
                Verb::SetVoltage | Verb::SetFrequency if desk.live.is_some() => {
                    return Err(ApiError::conflict("INTERLOCK", "set-points are locked while a session step is live"))
                }
                _ => {}
            }
        }
        let response = desk.exec_line("passthrough", line);
        self.publish_device(&desk);
        Ok(CommandReply { command: line.to_string(), response: response.to_string(), ok: response.is_ok(), device: desk.view() })
    }
}
