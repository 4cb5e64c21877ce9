//! Scoring a backend on a test set.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crisis_mt_core::backend::{BackendConfig, BackendKind, TranslationResult};
use crisis_mt_core::io::bitext_paths;
use crisis_mt_core::leaderboard::{Provenance, RunMetadata, SystemRecord};
use crisis_mt_core::metrics::{score_all, ScoreConfig, ScoreReport};
use crisis_mt_core::{normalize_text, LanguagePair, MetricError, Segment};

use crate::{BackendError, Translator};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("test set is empty")]
    EmptyTestset,
    #[error("test set mixes directions: segment {index} is {found}, expected {expected}")]
    MixedDirections {
        index: usize,
        expected: LanguagePair,
        found: LanguagePair,
    },
    #[error("system name {0:?} is empty or unusable as a file name")]
    InvalidName(String),
    #[error("all {total} segments failed; first error: {first_error}")]
    AllFailed { total: usize, first_error: String },
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub record: SystemRecord,
    pub report: ScoreReport,
    /// One per test segment, in test-set order, including failures.
    pub results: Vec<TranslationResult>,
}

/// JSON written next to the hypothesis bitext.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSidecar {
    pub record: SystemRecord,
    pub scores: ScoreReport,
    pub results: Vec<TranslationResult>,
    /// Ids of the scored segments, one per bitext line.
    pub scored_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunFiles {
    pub sources: PathBuf,
    pub hypotheses: PathBuf,
    pub sidecar: PathBuf,
}

/// SHA-256 over ids and both sides of every segment, in order.
pub fn testset_fingerprint(testset: &[Segment]) -> String {
    let mut hasher = Sha256::new();
    for s in testset {
        for field in [s.id.as_str(), s.source_text.as_str(), s.target_text.as_str()] {
            hasher.update((field.len() as u64).to_le_bytes());
            hasher.update(field.as_bytes());
        }
    }
    hex::encode(hasher.finalize())
}

fn valid_name(name: &str) -> bool {
    !name.trim().is_empty() && !name.contains(['/', '\\', '\0', '\n', '\r', '\t']) && name != "." && name != ".."
}

fn check_testset(testset: &[Segment], name: &str) -> Result<(), EvalError> {
    if !valid_name(name) {
        return Err(EvalError::InvalidName(name.to_owned()));
    }
    let first = testset.first().ok_or(EvalError::EmptyTestset)?;
    match testset.iter().enumerate().find(|(_, s)| s.pair != first.pair) {
        Some((index, s)) => Err(EvalError::MixedDirections {
            index,
            expected: first.pair.clone(),
            found: s.pair.clone(),
        }),
        None => Ok(()),
    }
}

/// Translates every source with `cfg`, scores the successful hypotheses
/// against their targets with default metric settings, and returns a
/// `local_run` record. Failed segments are excluded and counted.
pub async fn evaluate_system(cfg: &BackendConfig, testset: &[Segment], name: &str) -> Result<Evaluation, EvalError> {
    check_testset(testset, name)?;
    let translator = Translator::new(cfg)?;
    evaluate_with(&translator, testset, name).await
}

pub async fn evaluate_with(translator: &Translator, testset: &[Segment], name: &str) -> Result<Evaluation, EvalError> {
    check_testset(testset, name)?;
    let cfg = translator.config();
    let results = translator.translate_batch(testset).await?;

    let mut hypotheses = Vec::new();
    let mut references = Vec::new();
    for (segment, result) in testset.iter().zip(&results) {
        if let Some(h) = &result.hypothesis {
            hypotheses.push(h.as_str());
            references.push(segment.target_text.as_str());
        }
    }
    let failed = testset.len() - hypotheses.len();
    if hypotheses.is_empty() {
        let first_error = results.iter().find_map(|r| r.error.clone()).unwrap_or_default();
        return Err(EvalError::AllFailed {
            total: testset.len(),
            first_error,
        });
    }

    let report = score_all(&hypotheses, &references, &ScoreConfig::default())?;
    let record = SystemRecord {
        system_name: name.to_owned(),
        direction: testset[0].pair.clone(),
        bleu: report.bleu,
        ter: report.ter,
        chrf3: report.chrf3,
        provenance: Provenance::LocalRun,
        citation: None,
        run_metadata: Some(RunMetadata {
            backend_config_hash: cfg.config_hash(),
            testset_fingerprint: testset_fingerprint(testset),
            timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
            segments_total: testset.len(),
            segments_failed: failed,
            partial: failed > 0,
            prompt_template: (cfg.kind == BackendKind::RemoteChat).then(|| cfg.prompt_template.clone()),
        }),
    };
    Ok(Evaluation { record, report, results })
}

impl Evaluation {
    /// Writes `<dir>/<name>.<src>` and `<dir>/<name>.<tgt>` holding the scored
    /// sources and hypotheses (whitespace collapsed to one line each), plus
    /// `<dir>/<name>.run.json` with the verbatim results.
    pub fn persist(&self, testset: &[Segment], dir: &Path) -> Result<RunFiles, EvalError> {
        let io_err = |path: &Path| {
            let path = path.to_path_buf();
            move |source| EvalError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let base = dir.join(&self.record.system_name);
        let (sources, hypotheses) = bitext_paths(&base, &self.record.direction);
        let mut sidecar = base.into_os_string();
        sidecar.push(".run.json");
        let sidecar = PathBuf::from(sidecar);

        let mut src_text = String::new();
        let mut hyp_text = String::new();
        let mut scored_ids = Vec::new();
        for (segment, result) in testset.iter().zip(&self.results) {
            if let Some(h) = &result.hypothesis {
                src_text.push_str(&segment.source_text);
                src_text.push('\n');
                hyp_text.push_str(&normalize_text(h));
                hyp_text.push('\n');
                scored_ids.push(segment.id.clone());
            }
        }
        let doc = RunSidecar {
            record: self.record.clone(),
            scores: self.report.clone(),
            results: self.results.clone(),
            scored_ids,
        };
        let json = serde_json::to_string_pretty(&doc).expect("sidecar serializes");

        for (path, body) in [(&sources, src_text), (&hypotheses, hyp_text), (&sidecar, json + "\n")] {
            let mut file = fs::File::create(path).map_err(io_err(path))?;
            file.write_all(body.as_bytes()).map_err(io_err(path))?;
        }
        Ok(RunFiles {
            sources,
            hypotheses,
            sidecar,
        })
    }
}
