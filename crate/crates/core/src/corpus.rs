//! Segment and corpus data model.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::CorpusError;
use crate::text::{normalize_text, pair_key};

/// Ordered language pair, e.g. `en-ga`. Tags are lowercase ISO-639-1 codes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LanguagePair {
    source: String,
    target: String,
}

fn valid_tag(tag: &str) -> bool {
    tag.len() == 2 && tag.bytes().all(|b| b.is_ascii_lowercase())
}

impl LanguagePair {
    pub fn new(source: &str, target: &str) -> Result<Self, CorpusError> {
        if !valid_tag(source) || !valid_tag(target) {
            return Err(CorpusError::InvalidPair(format!(
                "{source}-{target}: tags must be two lowercase ASCII letters"
            )));
        }
        if source == target {
            return Err(CorpusError::InvalidPair(format!(
                "{source}-{target}: source and target must differ"
            )));
        }
        Ok(LanguagePair {
            source: source.to_owned(),
            target: target.to_owned(),
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn reversed(&self) -> LanguagePair {
        LanguagePair {
            source: self.target.clone(),
            target: self.source.clone(),
        }
    }
}

impl fmt::Display for LanguagePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.source, self.target)
    }
}

impl FromStr for LanguagePair {
    type Err = CorpusError;

    /// Accepts `en-ga`, `en_ga` and `en→ga`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(['-', '_', '→']).collect();
        match parts.as_slice() {
            [src, tgt] => LanguagePair::new(src, tgt),
            _ => Err(CorpusError::InvalidPair(s.to_owned())),
        }
    }
}

impl TryFrom<String> for LanguagePair {
    type Error = CorpusError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<LanguagePair> for String {
    fn from(pair: LanguagePair) -> Self {
        pair.to_string()
    }
}

/// Where a segment came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stream {
    Community,
    Expert,
    LlmEnsemble,
}

impl Stream {
    pub const ALL: [Stream; 3] = [Stream::Community, Stream::Expert, Stream::LlmEnsemble];

    pub fn as_str(self) -> &'static str {
        match self {
            Stream::Community => "community",
            Stream::Expert => "expert",
            Stream::LlmEnsemble => "llm_ensemble",
        }
    }
}

impl FromStr for Stream {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stream::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| CorpusError::InvalidSegment {
                id: String::new(),
                reason: format!("unknown stream {s:?}"),
            })
    }
}

/// Review state. Only `Pending -> Accepted` and `Pending -> Rejected` exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReviewStatus {
    Pending,
    Accepted,
    Rejected,
}

impl ReviewStatus {
    pub const ALL: [ReviewStatus; 3] = [
        ReviewStatus::Pending,
        ReviewStatus::Accepted,
        ReviewStatus::Rejected,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReviewStatus::Pending => "pending",
            ReviewStatus::Accepted => "accepted",
            ReviewStatus::Rejected => "rejected",
        }
    }

    pub fn can_transition_to(self, next: ReviewStatus) -> bool {
        self == ReviewStatus::Pending && next != ReviewStatus::Pending
    }
}

impl FromStr for ReviewStatus {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ReviewStatus::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| CorpusError::InvalidSegment {
                id: String::new(),
                reason: format!("unknown status {s:?}"),
            })
    }
}

/// Stage of the crisis response. Serialized as its ordinal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum CrisisPhase {
    /// Prompted hosted model with an uploaded knowledge base.
    CustomGpt = 1,
    /// Fine-tuned general-purpose LLM.
    FinetunedLlm = 2,
    /// Fine-tuned multilingual translation model.
    FinetunedMllm = 3,
}

impl CrisisPhase {
    pub const ALL: [CrisisPhase; 3] = [
        CrisisPhase::CustomGpt,
        CrisisPhase::FinetunedLlm,
        CrisisPhase::FinetunedMllm,
    ];

    pub fn ordinal(self) -> u8 {
        self as u8
    }

    pub fn from_ordinal(ordinal: u8) -> Option<CrisisPhase> {
        CrisisPhase::ALL.into_iter().find(|p| p.ordinal() == ordinal)
    }

    pub fn label(self) -> &'static str {
        match self {
            CrisisPhase::CustomGpt => "custom_gpt",
            CrisisPhase::FinetunedLlm => "finetuned_llm",
            CrisisPhase::FinetunedMllm => "finetuned_mllm",
        }
    }

    pub fn from_label(label: &str) -> Option<CrisisPhase> {
        CrisisPhase::ALL.into_iter().find(|p| p.label() == label)
    }

    pub fn next(self) -> Option<CrisisPhase> {
        CrisisPhase::from_ordinal(self.ordinal() + 1)
    }
}

impl Default for CrisisPhase {
    fn default() -> Self {
        CrisisPhase::CustomGpt
    }
}

impl TryFrom<u8> for CrisisPhase {
    type Error = String;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        CrisisPhase::from_ordinal(value).ok_or_else(|| format!("phase must be 1-3, got {value}"))
    }
}

impl From<CrisisPhase> for u8 {
    fn from(phase: CrisisPhase) -> Self {
        phase.ordinal()
    }
}

/// One contributed sentence pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub id: String,
    pub pair: LanguagePair,
    pub source_text: String,
    pub target_text: String,
    pub contributor: String,
    pub stream: Stream,
    pub phase: CrisisPhase,
    pub status: ReviewStatus,
    pub created_at: DateTime<Utc>,
    /// 1-based line in the file the segment was ingested from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_line: Option<usize>,
}

impl Segment {
    /// Builds a pending community segment, normalizing both sides.
    pub fn new(
        id: impl Into<String>,
        pair: LanguagePair,
        source_text: &str,
        target_text: &str,
    ) -> Result<Self, CorpusError> {
        let id = id.into();
        let source_text = normalize_text(source_text);
        let target_text = normalize_text(target_text);
        if source_text.is_empty() || target_text.is_empty() {
            return Err(CorpusError::InvalidSegment {
                id,
                reason: "source and target must be nonempty after normalization".into(),
            });
        }
        Ok(Segment {
            id,
            pair,
            source_text,
            target_text,
            contributor: String::new(),
            stream: Stream::Community,
            phase: CrisisPhase::CustomGpt,
            status: ReviewStatus::Pending,
            created_at: Utc::now(),
            source_line: None,
        })
    }

    pub fn with_contributor(mut self, contributor: impl Into<String>) -> Self {
        self.contributor = contributor.into();
        self
    }

    pub fn with_stream(mut self, stream: Stream) -> Self {
        self.stream = stream;
        self
    }

    pub fn with_phase(mut self, phase: CrisisPhase) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_status(mut self, status: ReviewStatus) -> Self {
        self.status = status;
        self
    }

    pub fn with_created_at(mut self, at: DateTime<Utc>) -> Self {
        self.created_at = at;
        self
    }

    /// Canonical identity used for duplicate and overlap detection.
    pub fn dedup_key(&self) -> String {
        pair_key(&self.source_text, &self.target_text)
    }
}

/// Same as [`Segment::dedup_key`].
pub fn dedup_key(seg: &Segment) -> String {
    seg.dedup_key()
}

/// Counts by status, stream and phase. Every category is present, zero or not.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total: usize,
    pub by_status: BTreeMap<String, usize>,
    pub by_stream: BTreeMap<String, usize>,
    pub by_phase: BTreeMap<String, usize>,
}

impl CorpusStats {
    pub fn empty() -> Self {
        CorpusStats {
            total: 0,
            by_status: ReviewStatus::ALL
                .iter()
                .map(|s| (s.as_str().to_owned(), 0))
                .collect(),
            by_stream: Stream::ALL
                .iter()
                .map(|s| (s.as_str().to_owned(), 0))
                .collect(),
            by_phase: CrisisPhase::ALL
                .iter()
                .map(|p| (p.ordinal().to_string(), 0))
                .collect(),
        }
    }

    pub fn add(&mut self, seg: &Segment) {
        self.total += 1;
        *self.by_status.entry(seg.status.as_str().to_owned()).or_default() += 1;
        *self.by_stream.entry(seg.stream.as_str().to_owned()).or_default() += 1;
        *self.by_phase.entry(seg.phase.ordinal().to_string()).or_default() += 1;
    }

    pub fn status(&self, status: ReviewStatus) -> usize {
        self.by_status.get(status.as_str()).copied().unwrap_or(0)
    }
}

/// Segments of a single language pair, in insertion order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pair: LanguagePair,
    segments: Vec<Segment>,
}

impl Corpus {
    pub fn empty(pair: LanguagePair) -> Self {
        Corpus {
            pair,
            segments: Vec::new(),
        }
    }

    pub fn new(pair: LanguagePair, segments: Vec<Segment>) -> Result<Self, CorpusError> {
        if let Some(bad) = segments.iter().find(|s| s.pair != pair) {
            return Err(CorpusError::InvalidSegment {
                id: bad.id.clone(),
                reason: format!("pair {} does not match corpus pair {pair}", bad.pair),
            });
        }
        Ok(Corpus { pair, segments })
    }

    pub fn pair(&self) -> &LanguagePair {
        &self.pair
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn into_segments(self) -> Vec<Segment> {
        self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn stats(&self) -> CorpusStats {
        let mut stats = CorpusStats::empty();
        for seg in &self.segments {
            stats.add(seg);
        }
        stats
    }

    /// Subset with the given status, order preserved.
    pub fn with_status(&self, status: ReviewStatus) -> Corpus {
        Corpus {
            pair: self.pair.clone(),
            segments: self
                .segments
                .iter()
                .filter(|s| s.status == status)
                .cloned()
                .collect(),
        }
    }
}
