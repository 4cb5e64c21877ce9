//! Stream concatenation and exact deduplication.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, LanguagePair};
use crate::error::CorpusError;

/// Joins exported conversation histories into one corpus.
///
/// Streams are kept in the given order; inside a stream segments are ordered
/// by `created_at` (stable, so equal timestamps keep their file order).
/// Nothing is removed here.
pub fn concat_histories(pair: &LanguagePair, streams: &[Corpus]) -> Result<Corpus, CorpusError> {
    let mut segments = Vec::with_capacity(streams.iter().map(Corpus::len).sum());
    for (index, stream) in streams.iter().enumerate() {
        if stream.pair() != pair {
            return Err(CorpusError::MixedPairs {
                index,
                expected: pair.to_string(),
                found: stream.pair().to_string(),
            });
        }
        let mut ordered = stream.segments().to_vec();
        ordered.sort_by_key(|s| s.created_at);
        segments.extend(ordered);
    }
    Corpus::new(pair.clone(), segments)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Removal {
    pub removed: String,
    pub kept: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DedupReport {
    pub input: usize,
    pub kept: usize,
    pub removals: Vec<Removal>,
}

/// Keeps the first segment for every dedup key.
pub fn deduplicate(corpus: &Corpus) -> (Corpus, DedupReport) {
    let mut first_by_key: HashMap<String, &str> = HashMap::with_capacity(corpus.len());
    let mut kept = Vec::with_capacity(corpus.len());
    let mut removals = Vec::new();
    for seg in corpus.segments() {
        match first_by_key.get(&seg.dedup_key()) {
            Some(survivor) => removals.push(Removal {
                removed: seg.id.clone(),
                kept: (*survivor).to_owned(),
            }),
            None => {
                first_by_key.insert(seg.dedup_key(), &seg.id);
                kept.push(seg.clone());
            }
        }
    }
    let report = DedupReport {
        input: corpus.len(),
        kept: kept.len(),
        removals,
    };
    let out = Corpus::new(corpus.pair().clone(), kept).expect("subset of a valid corpus");
    (out, report)
}

#[cfg(test)]
mod tests {
    use chrono::{TimeZone, Utc};

    use super::*;
    use crate::corpus::Segment;

    fn pair() -> LanguagePair {
        "en-ga".parse().unwrap()
    }

    fn corpus(rows: &[(&str, &str, &str)]) -> Corpus {
        let segs = rows
            .iter()
            .map(|(id, s, t)| Segment::new(*id, pair(), s, t).unwrap())
            .collect();
        Corpus::new(pair(), segs).unwrap()
    }

    #[test]
    fn concat_sizes() {
        let a = corpus(&[("a1", "x", "y"), ("a2", "x2", "y2"), ("a3", "x3", "y3")]);
        let b = corpus(&[("b1", "x", "y"), ("b2", "p", "q")]);
        let joined = concat_histories(&pair(), &[a, b]).unwrap();
        assert_eq!(joined.len(), 5);
        let ids: Vec<_> = joined.segments().iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, ["a1", "a2", "a3", "b1", "b2"]);
        assert!(concat_histories(&pair(), &[]).unwrap().is_empty());
    }

    #[test]
    fn concat_orders_by_time_within_stream() {
        let t0 = Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap();
        let late = Segment::new("late", pair(), "a", "b")
            .unwrap()
            .with_created_at(t0 + chrono::Duration::hours(1));
        let early = Segment::new("early", pair(), "c", "d").unwrap().with_created_at(t0);
        let stream = Corpus::new(pair(), vec![late, early]).unwrap();
        let joined = concat_histories(&pair(), &[stream]).unwrap();
        assert_eq!(joined.segments()[0].id, "early");
    }

    #[test]
    fn concat_rejects_mixed_pairs() {
        let a = corpus(&[("a1", "x", "y")]);
        let other = Corpus::empty("en-mr".parse().unwrap());
        let err = concat_histories(&pair(), &[a, other]).unwrap_err();
        assert!(matches!(err, CorpusError::MixedPairs { index: 1, .. }));
    }

    #[test]
    fn dedup_keeps_first() {
        let c = corpus(&[
            ("1", "The Cat", "An Cat"),
            ("2", "dog", "madra"),
            ("3", "the cat", "an  cat"),
            ("4", "a", "b"),
            ("5", "a", "c"),
        ]);
        let (out, report) = deduplicate(&c);
        assert_eq!(out.len(), 4);
        assert_eq!(
            report.removals,
            vec![Removal {
                removed: "3".into(),
                kept: "1".into()
            }]
        );
        let (again, report2) = deduplicate(&out);
        assert_eq!(again, out);
        assert!(report2.removals.is_empty());
    }
}
