//! Event types and the state they fold into.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crisis_mt_core::io::ExportFormat;
use crisis_mt_core::{CorpusStats, CrisisPhase, ExportReceipt, LanguagePair, ReviewStatus, Segment, SplitRatios};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub sequence: u64,
    pub at: DateTime<Utc>,
    #[serde(flatten)]
    pub body: EventBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EventBody {
    SegmentSubmitted {
        segment: Segment,
    },
    SegmentReviewed {
        id: String,
        verdict: ReviewStatus,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        note: Option<String>,
        reviewer: String,
    },
    PhaseAdvanced {
        pair: LanguagePair,
        from: CrisisPhase,
        to: CrisisPhase,
    },
    ExportCreated {
        export: ExportRecord,
    },
}

fn default_true() -> bool {
    true
}

fn default_format() -> ExportFormat {
    ExportFormat::Bitext
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExportOptions {
    #[serde(default = "default_true")]
    pub dedup: bool,
    #[serde(default)]
    pub ratios: SplitRatios,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_format")]
    pub format: ExportFormat,
}

impl Default for ExportOptions {
    fn default() -> Self {
        ExportOptions {
            dedup: true,
            ratios: SplitRatios::default(),
            seed: 0,
            format: ExportFormat::Bitext,
        }
    }
}

/// A stored export bundle. Files live under `exports/<id>/` in the store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportRecord {
    pub id: String,
    pub pair: LanguagePair,
    pub created_by: String,
    pub options: ExportOptions,
    /// Accepted segments before deduplication.
    pub accepted: usize,
    pub duplicates_removed: usize,
    pub receipt: ExportReceipt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredSegment {
    #[serde(flatten)]
    pub segment: Segment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reviewed_by: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reviewed_at: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairStats {
    pub pair: LanguagePair,
    pub phase: CrisisPhase,
    pub phase_label: String,
    #[serde(flatten)]
    pub counts: CorpusStats,
    pub contributors: usize,
    pub last_submission: Option<DateTime<Utc>>,
    pub exports: usize,
}

/// Everything the service knows; a pure fold over the event log.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub last_sequence: u64,
    /// Current phase per served pair, keyed by `src-tgt`.
    pub phases: BTreeMap<String, CrisisPhase>,
    pub segments: BTreeMap<String, StoredSegment>,
    /// Segment ids per pair in submission order.
    pub order: BTreeMap<String, Vec<String>>,
    /// Pending or accepted segment ids per `pair` + dedup key, oldest first.
    pub live_keys: BTreeMap<String, Vec<String>>,
    pub exports: BTreeMap<String, ExportRecord>,
}

pub fn live_key(segment: &Segment) -> String {
    format!("{}\u{1f}{}", segment.pair, segment.dedup_key())
}

impl State {
    pub fn new<'a>(pairs: impl IntoIterator<Item = &'a LanguagePair>) -> Self {
        let mut state = State::default();
        state.serve(pairs);
        state
    }

    /// Adds pairs not seen before, at phase 1.
    pub fn serve<'a>(&mut self, pairs: impl IntoIterator<Item = &'a LanguagePair>) {
        for pair in pairs {
            self.phases.entry(pair.to_string()).or_insert(CrisisPhase::CustomGpt);
            self.order.entry(pair.to_string()).or_default();
        }
    }

    pub fn phase(&self, pair: &LanguagePair) -> Option<CrisisPhase> {
        self.phases.get(&pair.to_string()).copied()
    }

    /// The surviving id for a segment's dedup key, if one is live.
    pub fn live_duplicate(&self, segment: &Segment) -> Option<&str> {
        self.live_keys.get(&live_key(segment)).and_then(|ids| ids.first()).map(String::as_str)
    }

    pub fn segments_of<'a>(&'a self, pair: &LanguagePair) -> impl Iterator<Item = &'a StoredSegment> + 'a {
        self.order
            .get(&pair.to_string())
            .into_iter()
            .flatten()
            .map(|id| &self.segments[id])
    }

    pub fn stats(&self, pair: &LanguagePair) -> Option<PairStats> {
        let phase = self.phase(pair)?;
        let mut counts = CorpusStats::empty();
        let mut contributors = std::collections::BTreeSet::new();
        let mut last_submission = None;
        for s in self.segments_of(pair) {
            counts.add(&s.segment);
            contributors.insert(s.segment.contributor.as_str());
            last_submission = last_submission.max(Some(s.segment.created_at));
        }
        Some(PairStats {
            pair: pair.clone(),
            phase,
            phase_label: phase.label().to_owned(),
            counts,
            contributors: contributors.len(),
            last_submission,
            exports: self.exports.values().filter(|e| &e.pair == pair).count(),
        })
    }

    /// Applies one event. Fails, leaving the state untouched, if the event
    /// is out of sequence or inconsistent with the state.
    pub fn apply(&mut self, event: &Event) -> Result<(), String> {
        if event.sequence != self.last_sequence + 1 {
            return Err(format!("expected sequence {}, found {}", self.last_sequence + 1, event.sequence));
        }
        match &event.body {
            EventBody::SegmentSubmitted { segment } => {
                if self.segments.contains_key(&segment.id) {
                    return Err(format!("segment id {} already exists", segment.id));
                }
                if segment.status != ReviewStatus::Rejected {
                    self.live_keys.entry(live_key(segment)).or_default().push(segment.id.clone());
                }
                self.serve([&segment.pair]);
                self.order.get_mut(&segment.pair.to_string()).expect("served").push(segment.id.clone());
                self.segments.insert(
                    segment.id.clone(),
                    StoredSegment {
                        segment: segment.clone(),
                        note: None,
                        reviewed_by: None,
                        reviewed_at: None,
                    },
                );
            }
            EventBody::SegmentReviewed { id, verdict, note, reviewer } => {
                let stored = self.segments.get_mut(id).ok_or_else(|| format!("unknown segment {id}"))?;
                if !stored.segment.status.can_transition_to(*verdict) {
                    return Err(format!("segment {id} cannot move from {:?} to {verdict:?}", stored.segment.status));
                }
                stored.segment.status = *verdict;
                stored.note = note.clone();
                stored.reviewed_by = Some(reviewer.clone());
                stored.reviewed_at = Some(event.at);
                if *verdict == ReviewStatus::Rejected {
                    let key = live_key(&stored.segment);
                    if let Some(ids) = self.live_keys.get_mut(&key) {
                        ids.retain(|x| x != id);
                        if ids.is_empty() {
                            self.live_keys.remove(&key);
                        }
                    }
                }
            }
            EventBody::PhaseAdvanced { pair, from, to } => {
                let current = self.phases.get_mut(&pair.to_string()).ok_or_else(|| format!("unknown pair {pair}"))?;
                if current != from || from.next() != Some(*to) {
                    return Err(format!("pair {pair} is at phase {}, cannot go {} -> {}", current.ordinal(), from.ordinal(), to.ordinal()));
                }
                *current = *to;
            }
            EventBody::ExportCreated { export } => {
                if self.exports.contains_key(&export.id) {
                    return Err(format!("export {} already exists", export.id));
                }
                self.exports.insert(export.id.clone(), export.clone());
            }
        }
        self.last_sequence = event.sequence;
        Ok(())
    }
}
