//! Translation edit rate with greedy phrase shifts.
//!
//! Each segment's edit count is the number of shifts applied plus the
//! word-level Levenshtein distance of the shifted hypothesis. A shift moves a
//! contiguous hypothesis span that exactly matches a reference span which is
//! not yet aligned; the shift with the largest distance reduction is applied
//! until none reduces it.

use serde::{Deserialize, Serialize};

use super::{check_lengths, tokenize, Components, Metric, MetricScore, Tokenizer};
use crate::error::MetricError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TerConfig {
    pub case_insensitive: bool,
    /// Longest span a single shift may move.
    pub max_shift_len: usize,
    /// Largest allowed distance between a span and its matching reference position.
    pub max_shift_distance: usize,
}

impl Default for TerConfig {
    fn default() -> Self {
        TerConfig {
            case_insensitive: false,
            max_shift_len: 10,
            max_shift_distance: 50,
        }
    }
}

/// Word-level Levenshtein distance with unit costs.
pub fn edit_distance<T: PartialEq>(hyp: &[T], reference: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=reference.len()).collect();
    let mut row = vec![0; reference.len() + 1];
    for (i, h) in hyp.iter().enumerate() {
        row[0] = i + 1;
        for (j, r) in reference.iter().enumerate() {
            let sub = prev[j] + usize::from(h != r);
            row[j + 1] = sub.min(prev[j + 1] + 1).min(row[j] + 1);
        }
        std::mem::swap(&mut prev, &mut row);
    }
    prev[reference.len()]
}

struct Alignment {
    hyp_matched: Vec<bool>,
    ref_matched: Vec<bool>,
    /// Hypothesis position each reference word is aligned to (or would be
    /// inserted before).
    ref_anchor: Vec<usize>,
}

fn align<T: PartialEq>(hyp: &[T], reference: &[T]) -> Alignment {
    let (n, m) = (hyp.len(), reference.len());
    let width = m + 1;
    let mut d = vec![0usize; (n + 1) * width];
    for j in 0..=m {
        d[j] = j;
    }
    for i in 1..=n {
        d[i * width] = i;
        for j in 1..=m {
            let sub = d[(i - 1) * width + j - 1] + usize::from(hyp[i - 1] != reference[j - 1]);
            let del = d[(i - 1) * width + j] + 1;
            let ins = d[i * width + j - 1] + 1;
            d[i * width + j] = sub.min(del).min(ins);
        }
    }

    let mut hyp_matched = vec![false; n];
    let mut ref_matched = vec![false; m];
    let mut ref_anchor = vec![0; m];
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = d[i * width + j];
        if i > 0 && j > 0 {
            let same = hyp[i - 1] == reference[j - 1];
            if here == d[(i - 1) * width + j - 1] + usize::from(!same) {
                if same {
                    hyp_matched[i - 1] = true;
                    ref_matched[j - 1] = true;
                }
                ref_anchor[j - 1] = i - 1;
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && here == d[(i - 1) * width + j] + 1 {
            i -= 1;
        } else {
            ref_anchor[j - 1] = i;
            j -= 1;
        }
    }
    Alignment {
        hyp_matched,
        ref_matched,
        ref_anchor,
    }
}

fn moved<T: Clone>(tokens: &[T], start: usize, len: usize, dest: usize) -> Vec<T> {
    let mut rest: Vec<T> = Vec::with_capacity(tokens.len());
    rest.extend_from_slice(&tokens[..start]);
    rest.extend_from_slice(&tokens[start + len..]);
    let mut out = Vec::with_capacity(tokens.len());
    out.extend_from_slice(&rest[..dest]);
    out.extend_from_slice(&tokens[start..start + len]);
    out.extend_from_slice(&rest[dest..]);
    out
}

/// Best single shift as `(new_distance, shifted_tokens)`, if one lowers the distance.
fn best_shift<T: PartialEq + Clone>(
    hyp: &[T],
    reference: &[T],
    distance: usize,
    cfg: &TerConfig,
) -> Option<(usize, Vec<T>)> {
    let alignment = align(hyp, reference);
    let mut best: Option<(usize, Vec<T>)> = None;
    let mut best_distance = distance;

    for start in 0..hyp.len() {
        let longest = cfg.max_shift_len.min(hyp.len() - start);
        for len in (1..=longest).rev() {
            let span = &hyp[start..start + len];
            if alignment.hyp_matched[start..start + len].iter().all(|&m| m) {
                continue;
            }
            if len > reference.len() {
                continue;
            }
            for j in 0..=reference.len() - len {
                if start.abs_diff(j) > cfg.max_shift_distance
                    || &reference[j..j + len] != span
                    || alignment.ref_matched[j..j + len].iter().all(|&m| m)
                {
                    continue;
                }
                let mut targets = vec![alignment.ref_anchor[j]];
                if j > 0 {
                    targets.push(alignment.ref_anchor[j - 1] + 1);
                }
                for target in targets {
                    if target > hyp.len() || (start..=start + len).contains(&target) {
                        continue;
                    }
                    let dest = if target > start + len { target - len } else { target };
                    let candidate = moved(hyp, start, len, dest);
                    let d = edit_distance(&candidate, reference);
                    if d < best_distance {
                        best_distance = d;
                        best = Some((d, candidate));
                    }
                }
            }
        }
    }
    best
}

/// `(edits, shifts)` for one tokenized segment; `edits` includes the shifts.
pub fn segment_ter<T: PartialEq + Clone>(hyp: &[T], reference: &[T], cfg: &TerConfig) -> (usize, usize) {
    let mut current = hyp.to_vec();
    let mut distance = edit_distance(&current, reference);
    let mut shifts = 0;
    while distance > 0 {
        match best_shift(&current, reference, distance, cfg) {
            Some((d, next)) => {
                current = next;
                distance = d;
                shifts += 1;
            }
            None => break,
        }
    }
    (distance + shifts, shifts)
}

/// Corpus TER: total edits over total reference words.
pub fn ter<H, R>(hypotheses: &[H], references: &[R], case_insensitive: bool) -> Result<MetricScore, MetricError>
where
    H: AsRef<str>,
    R: AsRef<str>,
{
    let cfg = TerConfig {
        case_insensitive,
        ..TerConfig::default()
    };
    ter_with(hypotheses, references, &cfg)
}

pub fn ter_with<H, R>(hypotheses: &[H], references: &[R], cfg: &TerConfig) -> Result<MetricScore, MetricError>
where
    H: AsRef<str>,
    R: AsRef<str>,
{
    check_lengths(hypotheses.len(), references.len())?;
    let prepare = |text: &str| {
        if cfg.case_insensitive {
            tokenize(&text.to_lowercase(), Tokenizer::Whitespace)
        } else {
            tokenize(text, Tokenizer::Whitespace)
        }
    };

    let mut edits = 0;
    let mut shifts = 0;
    let mut ref_len = 0;
    for (index, (hyp, reference)) in hypotheses.iter().zip(references).enumerate() {
        let reference = prepare(reference.as_ref());
        if reference.is_empty() {
            return Err(MetricError::EmptyReference { index });
        }
        let hyp = prepare(hyp.as_ref());
        let (e, s) = segment_ter(&hyp, &reference, cfg);
        edits += e;
        shifts += s;
        ref_len += reference.len();
    }

    Ok(MetricScore {
        metric: Metric::Ter,
        value: edits as f64 / ref_len as f64,
        components: Components::Ter {
            edits,
            shifts,
            ref_len,
        },
    })
}
