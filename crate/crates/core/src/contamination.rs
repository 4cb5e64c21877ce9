//! Train/test overlap detection.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Segment;
use crate::text::fold;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OverlapHit {
    pub train_id: String,
    pub test_id: String,
}

/// Overlaps at two granularities: same source sentence, and same sentence pair.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub source_hits: Vec<OverlapHit>,
    pub pair_hits: Vec<OverlapHit>,
    pub source_count: usize,
    pub pair_count: usize,
}

impl OverlapReport {
    pub fn is_empty(&self) -> bool {
        self.source_hits.is_empty() && self.pair_hits.is_empty()
    }
}

fn hits<F>(train: &[Segment], test: &[Segment], key: F) -> Vec<OverlapHit>
where
    F: Fn(&Segment) -> String,
{
    let mut index: HashMap<String, Vec<&str>> = HashMap::new();
    for seg in train {
        index.entry(key(seg)).or_default().push(&seg.id);
    }
    let mut out: Vec<OverlapHit> = test
        .iter()
        .flat_map(|t| {
            index
                .get(&key(t))
                .into_iter()
                .flatten()
                .map(|train_id| OverlapHit {
                    train_id: (*train_id).to_owned(),
                    test_id: t.id.clone(),
                })
        })
        .collect();
    out.sort();
    out
}

/// Every (train, test) pair whose folded source matches, and every pair whose
/// full dedup key matches. Hits are sorted.
pub fn contamination_check(train: &[Segment], test: &[Segment]) -> OverlapReport {
    let source_hits = hits(train, test, |s| fold(&s.source_text));
    let pair_hits = hits(train, test, Segment::dedup_key);
    OverlapReport {
        source_count: source_hits.len(),
        pair_count: pair_hits.len(),
        source_hits,
        pair_hits,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LanguagePair;

    fn seg(id: &str, s: &str, t: &str) -> Segment {
        let pair: LanguagePair = "en-ga".parse().unwrap();
        Segment::new(id, pair, s, t).unwrap()
    }

    #[test]
    fn source_level_hit_up_to_case() {
        let train = vec![seg("tr1", "Wash your hands", "Nigh do lámha")];
        let test = vec![seg("te1", "wash your HANDS", "Glan do lámha")];
        let report = contamination_check(&train, &test);
        assert_eq!(report.source_count, 1);
        assert_eq!(report.pair_count, 0);
        assert_eq!(report.source_hits[0].train_id, "tr1");
    }

    #[test]
    fn disjoint_is_empty() {
        let train = vec![seg("a", "one two", "aon dó")];
        let test = vec![seg("b", "three", "trí")];
        let report = contamination_check(&train, &test);
        assert!(report.is_empty());
        assert_eq!(report, OverlapReport::default());
    }

    #[test]
    fn pair_hit_is_also_source_hit() {
        let train = vec![seg("a", "Stay home", "Fan sa bhaile")];
        let test = vec![seg("b", "stay  home", "fan sa bhaile")];
        let report = contamination_check(&train, &test);
        assert_eq!((report.source_count, report.pair_count), (1, 1));
    }
}
