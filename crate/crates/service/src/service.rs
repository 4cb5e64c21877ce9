//! Request handling independent of HTTP: authorization, validation against
//! current state, and event commits through the single writer.

use std::collections::HashMap;
use std::fs;
use std::path::{Component, Path, PathBuf};
use std::sync::{Mutex, RwLock};

use axum::http::StatusCode;
use chrono::Utc;
use serde::{Deserialize, Serialize};

use crisis_mt_core::leaderboard::{
    build_leaderboard, for_direction, load_baselines, load_records_json, shipped_baselines, Leaderboard, SystemRecord,
};
use crisis_mt_core::{deduplicate, export_split, split, Corpus, CorpusError, CrisisPhase, LanguagePair, ReviewStatus, Segment, Stream};

use crate::config::{Role, ServiceConfig};
use crate::state::{EventBody, ExportOptions, ExportRecord, PairStats, State, StoredSegment};
use crate::store::{replay, Store, StoreError};

/// An error with its HTTP status and a stable machine-readable code.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub error: &'static str,
    pub message: String,
    /// For duplicate submissions: the id of the surviving segment.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub existing_id: Option<String>,
}

impl ApiError {
    pub fn new(status: StatusCode, error: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            error,
            message: message.into(),
            existing_id: None,
        }
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_input", message)
    }

    fn not_found(what: &str, id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("{what} {id:?} not found"))
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}: {}", self.status.as_u16(), self.error, self.message)
    }
}

impl std::error::Error for ApiError {}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        ApiError::internal(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Principal {
    pub name: String,
    pub role: Role,
}

impl Principal {
    fn require(&self, role: Role) -> Result<(), ApiError> {
        if self.role >= role {
            Ok(())
        } else {
            Err(ApiError::new(
                StatusCode::FORBIDDEN,
                "forbidden",
                format!("{} role required, token has {}", role.as_str(), self.role.as_str()),
            ))
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct SubmitRequest {
    pub source_text: String,
    pub target_text: String,
    #[serde(default)]
    pub stream: Option<Stream>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ReviewRequest {
    pub verdict: ReviewStatus,
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairInfo {
    pub pair: LanguagePair,
    pub phase: CrisisPhase,
    pub phase_label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentPage {
    pub total: usize,
    pub offset: usize,
    pub segments: Vec<StoredSegment>,
}

pub struct Service {
    config: ServiceConfig,
    tokens: HashMap<String, Principal>,
    writer: Mutex<Store>,
    state: RwLock<State>,
    records: Vec<SystemRecord>,
}

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("leaderboard records: {0}")]
    Records(#[from] crisis_mt_core::LeaderboardError),
}

pub fn parse_pair(raw: &str) -> Result<LanguagePair, ApiError> {
    raw.parse()
        .map_err(|e: CorpusError| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_pair", e.to_string()))
}

impl Service {
    /// Recovers the store and loads leaderboard records. Fails on any log
    /// corruption rather than serving partial state.
    pub fn open(config: ServiceConfig) -> Result<Self, StartupError> {
        let (store, state) = Store::open(&config.store, &config.pairs, config.snapshot_every)?;
        let mut records = match &config.baselines {
            Some(path) => load_baselines(path)?,
            None => shipped_baselines(),
        };
        for path in &config.records {
            records.extend(load_records_json(path)?);
        }
        let tokens = config
            .resolved_tokens()
            .into_iter()
            .map(|(secret, name, role)| (secret, Principal { name, role }))
            .collect();
        Ok(Service {
            config,
            tokens,
            writer: Mutex::new(store),
            state: RwLock::new(state),
            records,
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    /// A copy of the current state.
    pub fn state(&self) -> State {
        self.read().clone()
    }

    /// Refolds the on-disk log from scratch.
    pub fn replay(&self) -> Result<State, StoreError> {
        let _writer = self.writer.lock().expect("writer lock");
        replay(&self.config.store, &self.config.pairs)
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, State> {
        self.state.read().expect("state lock")
    }

    /// Runs `f` with exclusive write access. `f` validates against the state
    /// and returns the event to commit, or `None` for no change.
    fn write<T>(
        &self,
        f: impl FnOnce(&State, &Store) -> Result<(EventBody, T), ApiError>,
    ) -> Result<T, ApiError> {
        let mut store = self.writer.lock().expect("writer lock");
        let (body, out) = f(&self.read(), &store)?;
        let mut state = self.state.write().expect("state lock");
        store.commit(&mut state, body)?;
        Ok(out)
    }

    /// Resolves an `Authorization` header value.
    pub fn authenticate(&self, header: Option<&str>) -> Result<Principal, ApiError> {
        let unauthorized = |msg: &str| ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", msg);
        let header = header.ok_or_else(|| unauthorized("missing bearer token"))?;
        let token = header
            .strip_prefix("Bearer ")
            .map(str::trim)
            .ok_or_else(|| unauthorized("expected 'Authorization: Bearer <token>'"))?;
        self.tokens.get(token).cloned().ok_or_else(|| unauthorized("unknown token"))
    }

    fn served(&self, state: &State, raw: &str) -> Result<(LanguagePair, CrisisPhase), ApiError> {
        let pair = parse_pair(raw)?;
        match state.phase(&pair) {
            Some(phase) => Ok((pair, phase)),
            None => Err(ApiError::new(
                StatusCode::NOT_FOUND,
                "unknown_pair",
                format!("language pair {pair} is not served"),
            )),
        }
    }

    pub fn pairs(&self) -> Vec<PairInfo> {
        let state = self.read();
        state
            .phases
            .iter()
            .map(|(pair, phase)| PairInfo {
                pair: pair.parse().expect("stored pair"),
                phase: *phase,
                phase_label: phase.label().to_owned(),
            })
            .collect()
    }

    pub fn submit(&self, who: &Principal, pair: &str, req: SubmitRequest) -> Result<StoredSegment, ApiError> {
        let stream = req.stream.unwrap_or(Stream::Community);
        if stream != Stream::Community {
            who.require(Role::Reviewer)?;
        }
        self.write(|state, _| {
            let (pair, phase) = self.served(state, pair)?;
            let id = format!("seg-{}", state.last_sequence + 1);
            let segment = Segment::new(id, pair, &req.source_text, &req.target_text)
                .map_err(|e| ApiError::unprocessable(e.to_string()))?
                .with_contributor(who.name.clone())
                .with_stream(stream)
                .with_phase(phase)
                .with_created_at(Utc::now());
            if let Some(existing) = state.live_duplicate(&segment) {
                let mut err = ApiError::new(
                    StatusCode::CONFLICT,
                    "duplicate",
                    format!("an identical segment already exists as {existing}"),
                );
                err.existing_id = Some(existing.to_owned());
                return Err(err);
            }
            let stored = StoredSegment {
                segment: segment.clone(),
                note: None,
                reviewed_by: None,
                reviewed_at: None,
            };
            Ok((EventBody::SegmentSubmitted { segment }, stored))
        })
    }

    /// Bulk import of already-built segments, e.g. from files. Duplicates are
    /// kept (export-time dedup handles them); ids must be new.
    pub fn import(&self, segments: Vec<Segment>) -> Result<usize, ApiError> {
        let mut store = self.writer.lock().expect("writer lock");
        {
            let state = self.read();
            let mut seen = std::collections::HashSet::new();
            for s in &segments {
                self.served(&state, &s.pair.to_string())?;
                if state.segments.contains_key(&s.id) || !seen.insert(s.id.as_str()) {
                    return Err(ApiError::new(
                        StatusCode::CONFLICT,
                        "conflict",
                        format!("segment id {} already exists", s.id),
                    ));
                }
            }
        }
        let n = segments.len();
        let mut state = self.state.write().expect("state lock");
        for segment in segments {
            store.commit(&mut state, EventBody::SegmentSubmitted { segment })?;
        }
        Ok(n)
    }

    pub fn segment(&self, who: &Principal, id: &str) -> Result<StoredSegment, ApiError> {
        who.require(Role::Reviewer)?;
        self.read().segments.get(id).cloned().ok_or_else(|| ApiError::not_found("segment", id))
    }

    pub fn list(
        &self,
        who: &Principal,
        pair: &str,
        status: Option<ReviewStatus>,
        offset: usize,
        limit: usize,
    ) -> Result<SegmentPage, ApiError> {
        who.require(Role::Reviewer)?;
        let state = self.read();
        let (pair, _) = self.served(&state, pair)?;
        let matching: Vec<&StoredSegment> = state
            .segments_of(&pair)
            .filter(|s| status.is_none_or(|st| s.segment.status == st))
            .collect();
        Ok(SegmentPage {
            total: matching.len(),
            offset,
            segments: matching.into_iter().skip(offset).take(limit).cloned().collect(),
        })
    }

    pub fn review(&self, who: &Principal, id: &str, req: ReviewRequest) -> Result<StoredSegment, ApiError> {
        who.require(Role::Reviewer)?;
        if req.verdict == ReviewStatus::Pending {
            return Err(ApiError::unprocessable("verdict must be accepted or rejected"));
        }
        self.write(|state, _| {
            let current = state.segments.get(id).ok_or_else(|| ApiError::not_found("segment", id))?;
            if !current.segment.status.can_transition_to(req.verdict) {
                return Err(ApiError::new(
                    StatusCode::CONFLICT,
                    "already_reviewed",
                    format!("segment {id} is already {}", current.segment.status.as_str()),
                ));
            }
            let body = EventBody::SegmentReviewed {
                id: id.to_owned(),
                verdict: req.verdict,
                note: req.note,
                reviewer: who.name.clone(),
            };
            Ok((body, ()))
        })?;
        Ok(self.read().segments[id].clone())
    }

    pub fn advance_phase(&self, who: &Principal, pair: &str) -> Result<PairInfo, ApiError> {
        who.require(Role::Coordinator)?;
        self.write(|state, _| {
            let (pair, from) = self.served(state, pair)?;
            let to = from.next().ok_or_else(|| {
                ApiError::new(StatusCode::CONFLICT, "final_phase", format!("{pair} is already at phase {}", from.ordinal()))
            })?;
            let info = PairInfo {
                pair: pair.clone(),
                phase: to,
                phase_label: to.label().to_owned(),
            };
            Ok((EventBody::PhaseAdvanced { pair, from, to }, info))
        })
    }

    pub fn stats(&self, pair: &str) -> Result<PairStats, ApiError> {
        let state = self.read();
        let (pair, _) = self.served(&state, pair)?;
        Ok(state.stats(&pair).expect("served pair"))
    }

    /// Deduplicates (optionally), splits and writes the accepted segments of
    /// `pair` to a new bundle under `exports/<id>/`.
    pub fn create_export(&self, who: &Principal, pair: &str, options: ExportOptions) -> Result<ExportRecord, ApiError> {
        who.require(Role::Coordinator)?;
        options
            .ratios
            .validate()
            .map_err(|e| ApiError::unprocessable(e.to_string()))?;
        self.write(|state, store| {
            let (pair, _) = self.served(state, pair)?;
            let accepted: Vec<Segment> = state
                .segments_of(&pair)
                .filter(|s| s.segment.status == ReviewStatus::Accepted)
                .map(|s| s.segment.clone())
                .collect();
            if accepted.is_empty() {
                return Err(ApiError::unprocessable(format!("{pair} has no accepted segments")));
            }
            let n_accepted = accepted.len();
            let corpus = Corpus::new(pair.clone(), accepted).map_err(ApiError::internal)?;
            let (corpus, duplicates_removed) = if options.dedup {
                let (c, report) = deduplicate(&corpus);
                (c, report.removals.len())
            } else {
                (corpus, 0)
            };
            let manifest = split(&corpus, options.ratios, options.seed).map_err(|e| ApiError::unprocessable(e.to_string()))?;

            let id = format!("exp-{}", state.last_sequence + 1);
            let dir = store.exports_dir().join(&id);
            // Leftover from an export that crashed before its event was written.
            if dir.exists() {
                fs::remove_dir_all(&dir).map_err(ApiError::internal)?;
            }
            fs::create_dir_all(&dir).map_err(ApiError::internal)?;
            let receipt = export_split(&corpus, &manifest, options.format, &dir).map_err(|e| match e {
                e if e.is_io() => ApiError::internal(e),
                e => ApiError::unprocessable(e.to_string()),
            })?;
            let record = ExportRecord {
                id,
                pair,
                created_by: who.name.clone(),
                options,
                accepted: n_accepted,
                duplicates_removed,
                receipt,
            };
            Ok((EventBody::ExportCreated { export: record.clone() }, record))
        })
    }

    pub fn export(&self, who: &Principal, id: &str) -> Result<ExportRecord, ApiError> {
        let _ = who;
        self.read().exports.get(id).cloned().ok_or_else(|| ApiError::not_found("export", id))
    }

    /// Raw bytes of one file listed in an export receipt.
    pub fn export_file(&self, who: &Principal, id: &str, name: &str) -> Result<Vec<u8>, ApiError> {
        let record = self.export(who, id)?;
        if !record.receipt.files.iter().any(|f| f.name == name) || !is_plain_name(name) {
            return Err(ApiError::not_found("export file", name));
        }
        let path: PathBuf = self.config.store.join(crate::store::EXPORTS_DIR).join(id).join(name);
        fs::read(&path).map_err(ApiError::internal)
    }

    pub fn records(&self) -> &[SystemRecord] {
        &self.records
    }

    /// Leaderboard for `direction`. Without a reference the lowest-BLEU row is used.
    pub fn leaderboard(&self, direction: &str, reference: Option<&str>) -> Result<Leaderboard, ApiError> {
        let pair = parse_pair(direction)?;
        let records = for_direction(&self.records, &pair);
        if records.is_empty() {
            return Err(ApiError::not_found("leaderboard", direction));
        }
        let reference = match reference {
            Some(r) => r.to_owned(),
            None => records
                .iter()
                .min_by(|a, b| a.bleu.total_cmp(&b.bleu).then_with(|| b.system_name.cmp(&a.system_name)))
                .map(|r| r.system_name.clone())
                .expect("nonempty"),
        };
        build_leaderboard(&records, &reference).map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_reference", e.to_string()))
    }
}

fn is_plain_name(name: &str) -> bool {
    let mut parts = Path::new(name).components();
    matches!((parts.next(), parts.next()), (Some(Component::Normal(_)), None))
}
