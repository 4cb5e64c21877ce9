//! wasm-bindgen bindings for the static page in `www/`.
//!
//! Each export is a thin wrapper over a plain function returning
//! `Result<String, String>`, so the logic is testable natively.

use std::collections::BTreeMap;

use serde::Serialize;
use wasm_bindgen::prelude::*;

use crisis_mt_core::leaderboard::{
    build_leaderboard, for_direction, parse_records_json, render_report, shipped_baselines, ReportFormat,
};
use crisis_mt_core::metrics::{score_all, ScoreConfig};
use crisis_mt_core::{deduplicate, split, Corpus, LanguagePair, Segment, SplitName, SplitRatios};

fn lines(text: &str) -> Vec<&str> {
    text.lines().collect()
}

/// Scores newline-separated hypotheses against references. Returns the
/// report as JSON.
pub fn score_metrics_json(hypotheses: &str, references: &str) -> Result<String, String> {
    let report = score_all(&lines(hypotheses), &lines(references), &ScoreConfig::default()).map_err(|e| e.to_string())?;
    Ok(report.to_json())
}

/// Ranks the shipped baselines for `direction`, plus any records pasted as
/// JSON, against `reference`. `format` is `markdown` or `json`.
pub fn leaderboard_report(direction: &str, reference: &str, extra_records: &str, format: &str) -> Result<String, String> {
    let pair: LanguagePair = direction.parse().map_err(|e: crisis_mt_core::CorpusError| e.to_string())?;
    let format: ReportFormat = format.parse()?;
    let mut records = shipped_baselines();
    if !extra_records.trim().is_empty() {
        records.extend(parse_records_json(extra_records).map_err(|e| e.to_string())?);
    }
    let board = build_leaderboard(&for_direction(&records, &pair), reference).map_err(|e| e.to_string())?;
    Ok(render_report(&board, format))
}

#[derive(Serialize)]
struct SplitPreview {
    input: usize,
    duplicates_removed: usize,
    counts: BTreeMap<&'static str, usize>,
    samples: BTreeMap<&'static str, Vec<[String; 2]>>,
    manifest_fingerprint: String,
}

/// Splits line-aligned `source` / `target` text and reports sizes plus up to
/// `sample` segments per split.
pub fn split_preview_json(
    source: &str,
    target: &str,
    direction: &str,
    ratios: &str,
    seed: u64,
    dedup: bool,
    sample: usize,
) -> Result<String, String> {
    let pair: LanguagePair = direction.parse().map_err(|e: crisis_mt_core::CorpusError| e.to_string())?;
    let ratios: SplitRatios = ratios.parse().map_err(|e: crisis_mt_core::CorpusError| e.to_string())?;
    let (src, tgt) = (lines(source), lines(target));
    if src.len() != tgt.len() {
        return Err(format!("{} source lines but {} target lines", src.len(), tgt.len()));
    }
    let segments = src
        .iter()
        .zip(&tgt)
        .enumerate()
        .map(|(i, (s, t))| Segment::new(format!("line-{}", i + 1), pair.clone(), s, t).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    let corpus = Corpus::new(pair, segments).map_err(|e| e.to_string())?;
    let input = corpus.len();
    let corpus = if dedup { deduplicate(&corpus).0 } else { corpus };
    let manifest = split(&corpus, ratios, seed).map_err(|e| e.to_string())?;

    let mut counts = BTreeMap::new();
    let mut samples = BTreeMap::new();
    for name in SplitName::ALL {
        let part = manifest.select(&corpus, name);
        counts.insert(name.as_str(), part.len());
        let picked = part
            .segments()
            .iter()
            .take(sample)
            .map(|s| [s.source_text.clone(), s.target_text.clone()])
            .collect();
        samples.insert(name.as_str(), picked);
    }
    let preview = SplitPreview {
        input,
        duplicates_removed: input - corpus.len(),
        counts,
        samples,
        manifest_fingerprint: manifest.fingerprint(),
    };
    Ok(serde_json::to_string_pretty(&preview).expect("preview serializes"))
}

#[wasm_bindgen]
pub fn score_metrics(hypotheses: &str, references: &str) -> Result<String, JsError> {
    score_metrics_json(hypotheses, references).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn leaderboard(direction: &str, reference: &str, extra_records: &str, format: &str) -> Result<String, JsError> {
    leaderboard_report(direction, reference, extra_records, format).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn split_preview(
    source: &str,
    target: &str,
    direction: &str,
    ratios: &str,
    seed: u64,
    dedup: bool,
    sample: usize,
) -> Result<String, JsError> {
    split_preview_json(source, target, direction, ratios, seed, dedup, sample).map_err(|e| JsError::new(&e))
}
