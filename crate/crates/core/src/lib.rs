//! Corpus engineering and evaluation for crisis-response machine translation.
//!
//! * [`corpus`], [`pipeline`], [`split`], [`contamination`], [`io`]: collect,
//!   deduplicate, partition and export parallel segments.
//! * [`metrics`]: corpus BLEU, TER and ChrF.
//! * [`leaderboard`]: system records, published baselines and ranked tables.
//! * [`backend`]: translation backend configuration and offline mocks.

pub mod backend;
pub mod contamination;
pub mod corpus;
pub mod error;
pub mod finetune;
pub mod io;
pub mod leaderboard;
pub mod metrics;
pub mod pipeline;
pub mod split;
pub mod text;

pub use contamination::{contamination_check, OverlapHit, OverlapReport};
pub use corpus::{dedup_key, Corpus, CorpusStats, CrisisPhase, LanguagePair, ReviewStatus, Segment, Stream};
pub use error::{CorpusError, LeaderboardError, MetricError};
pub use io::{export_corpus, export_split, ingest_file, ExportFormat, ExportReceipt};
pub use pipeline::{concat_histories, deduplicate, DedupReport};
pub use split::{split, SplitManifest, SplitName, SplitRatios};
pub use text::normalize_text;
