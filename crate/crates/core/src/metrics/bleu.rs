use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{check_lengths, tokenize, Components, Metric, MetricScore, Tokenizer};
use crate::error::MetricError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BleuConfig {
    pub max_order: usize,
    pub case_insensitive: bool,
    pub tokenizer: Tokenizer,
}

impl Default for BleuConfig {
    fn default() -> Self {
        BleuConfig {
            max_order: 4,
            case_insensitive: true,
            tokenizer: Tokenizer::International,
        }
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

fn prepare(text: &str, cfg: &BleuConfig) -> Vec<String> {
    if cfg.case_insensitive {
        tokenize(&text.to_lowercase(), cfg.tokenizer)
    } else {
        tokenize(text, cfg.tokenizer)
    }
}

/// Corpus BLEU with clipped n-gram counts pooled over all segments.
///
/// No smoothing: if any order has zero matches the score is 0.
pub fn bleu_corpus<H, R>(hypotheses: &[H], references: &[R], cfg: &BleuConfig) -> Result<MetricScore, MetricError>
where
    H: AsRef<str>,
    R: AsRef<str>,
{
    check_lengths(hypotheses.len(), references.len())?;
    if cfg.max_order == 0 {
        return Err(MetricError::InvalidConfig("max_order must be at least 1".into()));
    }

    let orders = cfg.max_order;
    let mut matches = vec![0usize; orders];
    let mut totals = vec![0usize; orders];
    let mut hyp_len = 0;
    let mut ref_len = 0;

    for (hyp, reference) in hypotheses.iter().zip(references) {
        let hyp = prepare(hyp.as_ref(), cfg);
        let reference = prepare(reference.as_ref(), cfg);
        hyp_len += hyp.len();
        ref_len += reference.len();
        for n in 1..=orders {
            let hyp_counts = ngram_counts(&hyp, n);
            let ref_counts = ngram_counts(&reference, n);
            for (gram, count) in &hyp_counts {
                let clip = ref_counts.get(gram).copied().unwrap_or(0);
                matches[n - 1] += (*count).min(clip);
            }
            totals[n - 1] += hyp.len().saturating_sub(n - 1);
        }
    }

    let precisions: Vec<f64> = matches
        .iter()
        .zip(&totals)
        .map(|(&m, &t)| if t == 0 { 0.0 } else { m as f64 / t as f64 })
        .collect();

    let brevity_penalty = if hyp_len > ref_len {
        1.0
    } else if hyp_len == 0 {
        0.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };

    let value = if precisions.iter().any(|&p| p == 0.0) {
        0.0
    } else {
        let log_mean = precisions.iter().map(|p| p.ln()).sum::<f64>() / orders as f64;
        brevity_penalty * log_mean.exp() * 100.0
    };

    Ok(MetricScore {
        metric: Metric::Bleu,
        value,
        components: Components::Bleu {
            precisions,
            matches,
            totals,
            brevity_penalty,
            hyp_len,
            ref_len,
        },
    })
}
