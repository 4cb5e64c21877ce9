//! Corpus-level MT evaluation: case-insensitive BLEU, TER with phrase shifts
//! and ChrF.
//!
//! BLEU is reported on a 0-100 scale, TER and ChrF on 0-1. Every metric takes
//! one reference per hypothesis.

mod bleu;
mod chrf;
mod ter;
mod tokenize;

use serde::{Deserialize, Serialize};

pub use bleu::{bleu_corpus, BleuConfig};
pub use chrf::{chrf, ChrfConfig};
pub use ter::{edit_distance, segment_ter, ter, ter_with, TerConfig};
pub use tokenize::{tokenize, Tokenizer};

use crate::error::MetricError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Bleu,
    Ter,
    Chrf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Components {
    Bleu {
        precisions: Vec<f64>,
        matches: Vec<usize>,
        totals: Vec<usize>,
        brevity_penalty: f64,
        hyp_len: usize,
        ref_len: usize,
    },
    Ter {
        edits: usize,
        shifts: usize,
        ref_len: usize,
    },
    Chrf {
        precisions: Vec<f64>,
        recalls: Vec<f64>,
        chr_p: f64,
        chr_r: f64,
        beta: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricScore {
    pub metric: Metric,
    pub value: f64,
    pub components: Components,
}

fn check_lengths(hypotheses: usize, references: usize) -> Result<(), MetricError> {
    if hypotheses != references {
        return Err(MetricError::LengthMismatch {
            hypotheses,
            references,
        });
    }
    if hypotheses == 0 {
        return Err(MetricError::EmptyCorpus);
    }
    Ok(())
}

/// Configuration echoed in a [`ScoreReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreConfig {
    pub bleu: BleuConfig,
    pub ter: TerConfig,
    pub chrf: ChrfConfig,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig {
            bleu: BleuConfig::default(),
            ter: TerConfig::default(),
            chrf: ChrfConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportComponents {
    pub bleu: Components,
    pub ter: Components,
    pub chrf3: Components,
}

/// All three metrics for one hypothesis set. Serializes with a fixed key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub bleu: f64,
    pub ter: f64,
    pub chrf3: f64,
    pub components: ReportComponents,
    pub config: ScoreConfig,
}

impl ScoreReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn score_all<H, R>(hypotheses: &[H], references: &[R], config: &ScoreConfig) -> Result<ScoreReport, MetricError>
where
    H: AsRef<str>,
    R: AsRef<str>,
{
    let bleu = bleu_corpus(hypotheses, references, &config.bleu)?;
    let ter = ter_with(hypotheses, references, &config.ter)?;
    let chrf = chrf(hypotheses, references, &config.chrf)?;
    Ok(ScoreReport {
        bleu: bleu.value,
        ter: ter.value,
        chrf3: chrf.value,
        components: ReportComponents {
            bleu: bleu.components,
            ter: ter.components,
            chrf3: chrf.components,
        },
        config: config.clone(),
    })
}
