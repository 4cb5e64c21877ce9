//! System records, published baselines and BLEU-ranked leaderboards.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::LanguagePair;
use crate::error::LeaderboardError;

/// Published baseline table shipped with the crate.
pub const SHIPPED_BASELINES: &str = include_str!("../data/baselines.tsv");

pub const BASELINE_HEADER: &str = "direction\tsystem\tbleu\tter\tchrf3\tprovenance\tcitation";

const CHECKSUM_PREFIX: &str = "# sha256:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    PaperBaseline,
    LocalRun,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::PaperBaseline => "paper_baseline",
            Provenance::LocalRun => "local_run",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub backend_config_hash: String,
    pub testset_fingerprint: String,
    pub timestamp: String,
    pub segments_total: usize,
    pub segments_failed: usize,
    /// Some segments failed and were left out of scoring.
    pub partial: bool,
    pub prompt_template: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemRecord {
    pub system_name: String,
    pub direction: LanguagePair,
    pub bleu: f64,
    pub ter: f64,
    pub chrf3: f64,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub citation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_metadata: Option<RunMetadata>,
}

impl SystemRecord {
    /// Checks the provenance-specific fields are present.
    pub fn validate(&self) -> Result<(), String> {
        match self.provenance {
            Provenance::PaperBaseline if self.citation.as_deref().unwrap_or("").is_empty() => {
                Err(format!("{}: baseline records need a citation", self.system_name))
            }
            Provenance::LocalRun if self.run_metadata.is_none() => {
                Err(format!("{}: local runs need run metadata", self.system_name))
            }
            _ => Ok(()),
        }
    }
}

fn parse_field<T: std::str::FromStr>(value: &str, name: &str, line: usize) -> Result<T, LeaderboardError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| LeaderboardError::Parse {
        line,
        reason: format!("{name} {value:?}: {e}"),
    })
}

/// Appends the checksum trailer to a baseline table body.
pub fn seal_baselines(body: &str) -> String {
    let digest = hex::encode(Sha256::digest(body.as_bytes()));
    format!("{body}{CHECKSUM_PREFIX}{digest}\n")
}

/// Parses a baseline table and verifies its trailing `# sha256:` line, which
/// covers every byte before it.
pub fn parse_baselines(text: &str) -> Result<Vec<SystemRecord>, LeaderboardError> {
    let trailer_start = text.trim_end_matches('\n').rfind('\n').map(|i| i + 1).unwrap_or(0);
    let (body, trailer) = text.split_at(trailer_start);
    let mut lines = body.lines().enumerate().map(|(i, l)| (i + 1, l));

    match lines.next() {
        None => {
            return Err(LeaderboardError::Parse {
                line: 1,
                reason: "empty baseline file".into(),
            })
        }
        Some((_, header)) if header != BASELINE_HEADER => {
            return Err(LeaderboardError::Parse {
                line: 1,
                reason: format!("expected header {BASELINE_HEADER:?}"),
            })
        }
        Some(_) => {}
    }

    let trailer_line = body.lines().count() + 1;
    let Some(expected) = trailer.trim_end().strip_prefix(CHECKSUM_PREFIX) else {
        return Err(LeaderboardError::Parse {
            line: trailer_line,
            reason: format!("missing {CHECKSUM_PREFIX} trailer"),
        });
    };
    let actual = hex::encode(Sha256::digest(body.as_bytes()));
    if expected != actual {
        return Err(LeaderboardError::Checksum {
            expected: expected.to_owned(),
            actual,
        });
    }

    let mut records = Vec::new();
    for (line, row) in lines {
        let fields: Vec<&str> = row.split('\t').collect();
        let [direction, system, bleu, ter, chrf3, provenance, citation] = fields.as_slice() else {
            return Err(LeaderboardError::Parse {
                line,
                reason: format!("expected 7 tab-separated fields, got {}", fields.len()),
            });
        };
        let provenance = match *provenance {
            "paper_baseline" => Provenance::PaperBaseline,
            "local_run" => Provenance::LocalRun,
            other => {
                return Err(LeaderboardError::Parse {
                    line,
                    reason: format!("unknown provenance {other:?}"),
                })
            }
        };
        let record = SystemRecord {
            system_name: (*system).to_owned(),
            direction: parse_field(direction, "direction", line)?,
            bleu: parse_field(bleu, "bleu", line)?,
            ter: parse_field(ter, "ter", line)?,
            chrf3: parse_field(chrf3, "chrf3", line)?,
            provenance,
            citation: Some((*citation).to_owned()).filter(|c| !c.is_empty()),
            run_metadata: None,
        };
        record
            .validate()
            .map_err(|reason| LeaderboardError::Parse { line, reason })?;
        records.push(record);
    }
    Ok(records)
}

pub fn load_baselines(path: &Path) -> Result<Vec<SystemRecord>, LeaderboardError> {
    let text = std::fs::read_to_string(path).map_err(|source| LeaderboardError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_baselines(&text)
}

pub fn shipped_baselines() -> Vec<SystemRecord> {
    parse_baselines(SHIPPED_BASELINES).expect("shipped baselines are valid")
}

/// Records from a JSON document: one record, an array of records, or an
/// evaluation sidecar with a `record` field.
pub fn parse_records_json(text: &str) -> Result<Vec<SystemRecord>, LeaderboardError> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Doc {
        Many(Vec<SystemRecord>),
        Sidecar { record: SystemRecord },
        One(SystemRecord),
    }
    let doc: Doc = serde_json::from_str(text).map_err(|e| LeaderboardError::Parse {
        line: e.line(),
        reason: format!("not a system record, record list or run sidecar: {e}"),
    })?;
    let records = match doc {
        Doc::Many(v) => v,
        Doc::Sidecar { record } | Doc::One(record) => vec![record],
    };
    for r in &records {
        r.validate().map_err(|reason| LeaderboardError::Parse { line: 1, reason })?;
    }
    Ok(records)
}

pub fn load_records_json(path: &Path) -> Result<Vec<SystemRecord>, LeaderboardError> {
    let text = std::fs::read_to_string(path).map_err(|source| LeaderboardError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_records_json(&text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub record: SystemRecord,
    /// BLEU minus the reference row's BLEU.
    pub delta_bleu: f64,
    /// `delta_bleu / reference BLEU`, absent when the reference BLEU is 0.
    pub relative_improvement: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub direction: LanguagePair,
    pub reference_system: String,
    pub rows: Vec<LeaderboardRow>,
}

fn rank(a: &SystemRecord, b: &SystemRecord) -> Ordering {
    b.bleu
        .total_cmp(&a.bleu)
        .then_with(|| a.system_name.cmp(&b.system_name))
}

/// Orders records by BLEU (descending, ties by name) and computes deltas
/// against `reference_system`.
pub fn build_leaderboard(records: &[SystemRecord], reference_system: &str) -> Result<Leaderboard, LeaderboardError> {
    let first = records.first().ok_or(LeaderboardError::Empty)?;
    if let Some(other) = records.iter().find(|r| r.direction != first.direction) {
        return Err(LeaderboardError::MixedDirections(
            first.direction.to_string(),
            other.direction.to_string(),
        ));
    }
    let reference = records
        .iter()
        .find(|r| r.system_name == reference_system)
        .ok_or_else(|| LeaderboardError::MissingReference(reference_system.to_owned()))?;
    let base = reference.bleu;

    let mut ordered: Vec<&SystemRecord> = records.iter().collect();
    ordered.sort_by(|a, b| rank(a, b));
    let rows = ordered
        .into_iter()
        .map(|record| {
            let delta_bleu = record.bleu - base;
            LeaderboardRow {
                record: record.clone(),
                delta_bleu,
                relative_improvement: (base != 0.0).then(|| delta_bleu / base),
            }
        })
        .collect();

    Ok(Leaderboard {
        direction: first.direction.clone(),
        reference_system: reference_system.to_owned(),
        rows,
    })
}

/// Records for one direction, in file order.
pub fn for_direction(records: &[SystemRecord], direction: &LanguagePair) -> Vec<SystemRecord> {
    records
        .iter()
        .filter(|r| &r.direction == direction)
        .cloned()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Markdown,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown report format {other:?}")),
        }
    }
}

pub fn render_report(board: &Leaderboard, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(board).expect("leaderboard serializes"),
        ReportFormat::Markdown => {
            let mut out = String::new();
            let _ = writeln!(out, "| System | BLEU | TER | ChrF3 | Δ | Rel% |");
            let _ = writeln!(out, "|---|---:|---:|---:|---:|---:|");
            for row in &board.rows {
                let rel = row
                    .relative_improvement
                    .map(|r| format!("{:+.1}%", r * 100.0))
                    .unwrap_or_else(|| "n/a".into());
                let _ = writeln!(
                    out,
                    "| {} | {:.1} | {:.3} | {:.3} | {:+.1} | {} |",
                    row.record.system_name,
                    row.record.bleu,
                    row.record.ter,
                    row.record.chrf3,
                    row.delta_bleu,
                    rel
                );
            }
            out
        }
    }
}
