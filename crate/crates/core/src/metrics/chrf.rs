use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{check_lengths, Components, Metric, MetricScore};
use crate::error::MetricError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChrfConfig {
    pub max_char_order: usize,
    pub beta: f64,
    pub remove_whitespace: bool,
}

impl Default for ChrfConfig {
    fn default() -> Self {
        ChrfConfig {
            max_char_order: 6,
            beta: 3.0,
            remove_whitespace: true,
        }
    }
}

fn char_ngrams(chars: &[char], n: usize) -> HashMap<&[char], usize> {
    let mut counts = HashMap::new();
    if chars.len() >= n {
        for gram in chars.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

fn mean_over_nonzero(matches: &[usize], totals: &[usize]) -> (Vec<f64>, f64) {
    let per_order: Vec<f64> = matches
        .iter()
        .zip(totals)
        .map(|(&m, &t)| if t == 0 { 0.0 } else { m as f64 / t as f64 })
        .collect();
    let used: Vec<f64> = per_order
        .iter()
        .zip(totals)
        .filter(|(_, &t)| t > 0)
        .map(|(&p, _)| p)
        .collect();
    let mean = if used.is_empty() {
        0.0
    } else {
        used.iter().sum::<f64>() / used.len() as f64
    };
    (per_order, mean)
}

/// Character n-gram F-score with corpus-pooled counts per order.
pub fn chrf<H, R>(hypotheses: &[H], references: &[R], cfg: &ChrfConfig) -> Result<MetricScore, MetricError>
where
    H: AsRef<str>,
    R: AsRef<str>,
{
    check_lengths(hypotheses.len(), references.len())?;
    if cfg.max_char_order == 0 {
        return Err(MetricError::InvalidConfig("max_char_order must be at least 1".into()));
    }
    if !(cfg.beta > 0.0) {
        return Err(MetricError::InvalidConfig("beta must be positive".into()));
    }

    let orders = cfg.max_char_order;
    let mut matches = vec![0usize; orders];
    let mut hyp_totals = vec![0usize; orders];
    let mut ref_totals = vec![0usize; orders];

    let chars = |text: &str| -> Vec<char> {
        if cfg.remove_whitespace {
            text.chars().filter(|c| !c.is_whitespace()).collect()
        } else {
            text.chars().collect()
        }
    };

    for (hyp, reference) in hypotheses.iter().zip(references) {
        let hyp = chars(hyp.as_ref());
        let reference = chars(reference.as_ref());
        for n in 1..=orders {
            let hyp_counts = char_ngrams(&hyp, n);
            let ref_counts = char_ngrams(&reference, n);
            for (gram, count) in &hyp_counts {
                if let Some(r) = ref_counts.get(gram) {
                    matches[n - 1] += (*count).min(*r);
                }
            }
            hyp_totals[n - 1] += hyp.len().saturating_sub(n - 1);
            ref_totals[n - 1] += reference.len().saturating_sub(n - 1);
        }
    }

    let (precisions, chr_p) = mean_over_nonzero(&matches, &hyp_totals);
    let (recalls, chr_r) = mean_over_nonzero(&matches, &ref_totals);
    let beta2 = cfg.beta * cfg.beta;
    let denominator = beta2 * chr_p + chr_r;
    let value = if denominator == 0.0 {
        0.0
    } else {
        (1.0 + beta2) * chr_p * chr_r / denominator
    };

    Ok(MetricScore {
        metric: Metric::Chrf,
        value,
        components: Components::Chrf {
            precisions,
            recalls,
            chr_p,
            chr_r,
            beta: cfg.beta,
        },
    })
}
