//! Seeded, order-independent Train/Validation/Test partitioning.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Corpus, ReviewStatus, Segment};
use crate::error::CorpusError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitName {
    Train,
    Validation,
    Test,
}

impl SplitName {
    pub const ALL: [SplitName; 3] = [SplitName::Train, SplitName::Validation, SplitName::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::Validation => "validation",
            SplitName::Test => "test",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.8,
            validation: 0.1,
            test: 0.1,
        }
    }
}

impl SplitRatios {
    pub fn new(train: f64, validation: f64, test: f64) -> Result<Self, CorpusError> {
        let ratios = SplitRatios {
            train,
            validation,
            test,
        };
        ratios.validate()?;
        Ok(ratios)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        for (name, r) in [
            ("train", self.train),
            ("validation", self.validation),
            ("test", self.test),
        ] {
            if !(r > 0.0 && r < 1.0) {
                return Err(CorpusError::InvalidSplit(format!(
                    "{name} ratio {r} is outside (0, 1)"
                )));
            }
        }
        let sum = self.train + self.validation + self.test;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(CorpusError::InvalidSplit(format!("ratios sum to {sum}, not 1")));
        }
        Ok(())
    }

    /// `(train, validation, test)` sizes for `n` items: validation and test
    /// are floored, train takes the remainder.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let floor = |r: f64| ((n as f64) * r + 1e-9).floor() as usize;
        let validation = floor(self.validation);
        let test = floor(self.test);
        (n - validation - test, validation, test)
    }
}

impl std::str::FromStr for SplitRatios {
    type Err = CorpusError;

    /// Parses `"0.8,0.1,0.1"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CorpusError::InvalidSplit(format!("{s:?}: {e}")))?;
        match parts.as_slice() {
            [train, validation, test] => SplitRatios::new(*train, *validation, *test),
            _ => Err(CorpusError::InvalidSplit(format!(
                "{s:?}: expected three comma-separated ratios"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub corpus_fingerprint: String,
    pub seed: u64,
    pub ratios: SplitRatios,
    pub assignments: BTreeMap<String, SplitName>,
}

impl SplitManifest {
    pub fn ids(&self, split: SplitName) -> impl Iterator<Item = &str> {
        self.assignments
            .iter()
            .filter(move |(_, s)| **s == split)
            .map(|(id, _)| id.as_str())
    }

    pub fn count(&self, split: SplitName) -> usize {
        self.assignments.values().filter(|s| **s == split).count()
    }

    /// Canonical JSON; identical manifests serialize to identical bytes.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    /// SHA-256 over [`SplitManifest::to_json`].
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    /// Segments of `corpus` assigned to `split`, in corpus order.
    pub fn select(&self, corpus: &Corpus, split: SplitName) -> Corpus {
        let segs = corpus
            .segments()
            .iter()
            .filter(|s| self.assignments.get(&s.id) == Some(&split))
            .cloned()
            .collect();
        Corpus::new(corpus.pair().clone(), segs).expect("subset of a valid corpus")
    }
}

fn eligible(seg: &Segment) -> bool {
    seg.status != ReviewStatus::Rejected
}

/// Order-independent content hash over the (id, dedup key) set.
pub fn corpus_fingerprint(corpus: &Corpus) -> String {
    let mut rows: Vec<(String, String)> = corpus
        .segments()
        .iter()
        .filter(|s| eligible(s))
        .map(|s| (s.id.clone(), s.dedup_key()))
        .collect();
    rows.sort();
    let mut hasher = Sha256::new();
    hasher.update(corpus.pair().to_string().as_bytes());
    for (id, key) in rows {
        hasher.update([0u8]);
        hasher.update(id.as_bytes());
        hasher.update([0u8]);
        hasher.update(key.as_bytes());
    }
    hex::encode(hasher.finalize())
}

fn keyed_rank(seed: u64, key: &str) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(key.as_bytes());
    hasher.finalize().into()
}

/// Partitions every non-rejected segment of a deduplicated corpus.
///
/// Segments are ranked by `SHA-256(seed || dedup_key)`; the first
/// `floor(n * test)` go to test, the next `floor(n * validation)` to
/// validation and the rest to train. The result depends only on the segment
/// set, never on input order.
pub fn split(corpus: &Corpus, ratios: SplitRatios, seed: u64) -> Result<SplitManifest, CorpusError> {
    ratios.validate()?;
    let pool: Vec<&Segment> = corpus.segments().iter().filter(|s| eligible(s)).collect();
    if pool.len() < 3 {
        return Err(CorpusError::InvalidSplit(format!(
            "need at least 3 segments, got {}",
            pool.len()
        )));
    }

    let mut ranked = Vec::with_capacity(pool.len());
    let mut seen = HashSet::with_capacity(pool.len());
    for seg in pool {
        let key = seg.dedup_key();
        if !seen.insert(key.clone()) {
            return Err(CorpusError::InvalidSplit(format!(
                "corpus is not deduplicated: segment {} repeats an earlier key",
                seg.id
            )));
        }
        ranked.push((keyed_rank(seed, &key), key, seg.id.as_str()));
    }
    ranked.sort();

    let (_, n_val, n_test) = ratios.sizes(ranked.len());
    let assignments = ranked
        .iter()
        .enumerate()
        .map(|(i, (_, _, id))| {
            let split = if i < n_test {
                SplitName::Test
            } else if i < n_test + n_val {
                SplitName::Validation
            } else {
                SplitName::Train
            };
            ((*id).to_owned(), split)
        })
        .collect();

    Ok(SplitManifest {
        corpus_fingerprint: corpus_fingerprint(corpus),
        seed,
        ratios,
        assignments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LanguagePair;

    fn corpus(n: usize) -> Corpus {
        let pair: LanguagePair = "en-ga".parse().unwrap();
        let segs = (0..n)
            .map(|i| Segment::new(format!("s{i}"), pair.clone(), &format!("src {i}"), &format!("tgt {i}")).unwrap())
            .collect();
        Corpus::new(pair, segs).unwrap()
    }

    fn sizes(m: &SplitManifest) -> (usize, usize, usize) {
        (
            m.count(SplitName::Train),
            m.count(SplitName::Validation),
            m.count(SplitName::Test),
        )
    }

    #[test]
    fn exact_division() {
        let m = split(&corpus(1000), SplitRatios::default(), 42).unwrap();
        assert_eq!(sizes(&m), (800, 100, 100));
    }

    #[test]
    fn remainder_goes_to_train() {
        // floor(10 * 0.25) = 2 for validation and test; 10 - 4 = 6 for train.
        let ratios = SplitRatios::new(0.5, 0.25, 0.25).unwrap();
        let m = split(&corpus(10), ratios, 7).unwrap();
        assert_eq!(sizes(&m), (6, 2, 2));
    }

    #[test]
    fn input_order_does_not_matter() {
        let c = corpus(50);
        let mut segs = c.segments().to_vec();
        segs.reverse();
        segs.swap(3, 17);
        let shuffled = Corpus::new(c.pair().clone(), segs).unwrap();
        let a = split(&c, SplitRatios::default(), 9).unwrap();
        let b = split(&shuffled, SplitRatios::default(), 9).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let other_seed = split(&c, SplitRatios::default(), 10).unwrap();
        assert_ne!(a.assignments, other_seed.assignments);
        assert_eq!(a.corpus_fingerprint, other_seed.corpus_fingerprint);
    }

    #[test]
    fn rejects_bad_requests() {
        assert!(SplitRatios::new(0.8, 0.2, 0.0).is_err());
        assert!(SplitRatios::new(0.8, 0.1, 0.2).is_err());
        assert!(SplitRatios::new(1.0, 0.1, -0.1).is_err());
        assert!(split(&corpus(2), SplitRatios::default(), 1).is_err());
        let c = corpus(5);
        let mut segs = c.segments().to_vec();
        segs.push(Segment::new("dup", c.pair().clone(), "SRC 0", "tgt 0").unwrap());
        let dup = Corpus::new(c.pair().clone(), segs).unwrap();
        assert!(split(&dup, SplitRatios::default(), 1).is_err());
    }

    #[test]
    fn rejected_segments_are_left_out() {
        let c = corpus(10);
        let mut segs = c.segments().to_vec();
        segs[0].status = ReviewStatus::Rejected;
        let c = Corpus::new(c.pair().clone(), segs).unwrap();
        let m = split(&c, SplitRatios::default(), 1).unwrap();
        assert_eq!(m.assignments.len(), 9);
        assert!(!m.assignments.contains_key("s0"));
    }

    #[test]
    fn parses_ratio_lists() {
        let r: SplitRatios = "0.8,0.1,0.1".parse().unwrap();
        assert_eq!(r, SplitRatios::default());
        assert!("0.8,0.2".parse::<SplitRatios>().is_err());
        assert!("a,b,c".parse::<SplitRatios>().is_err());
    }

    proptest::proptest! {
        #[test]
        fn partitions_are_disjoint_and_complete(n in 3usize..200, seed: u64, t in 1u32..8, v in 1u32..8) {
            let total = (t + v + 10) as f64;
            let ratios = SplitRatios::new(10.0 / total, v as f64 / total, t as f64 / total);
            proptest::prop_assume!(ratios.is_ok());
            let ratios = ratios.unwrap();
            let m = split(&corpus(n), ratios, seed).unwrap();
            proptest::prop_assert_eq!(m.assignments.len(), n);
            let (train, val, test) = sizes(&m);
            proptest::prop_assert_eq!(train + val + test, n);
            // Floored splits are within 1 of their target; train absorbs both
            // remainders, so it can sit up to 2 above its own.
            for (got, ratio, slack) in [(train, ratios.train, 2.0), (val, ratios.validation, 1.0), (test, ratios.test, 1.0)] {
                let target = (n as f64 * ratio).round();
                proptest::prop_assert!((got as f64 - target).abs() <= slack);
            }
        }
    }
}
