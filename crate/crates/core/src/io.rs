//! Parallel-corpus file formats: JSONL, TSV and aligned bitext.

use std::fs::{self, File};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Corpus, CrisisPhase, LanguagePair, ReviewStatus, Segment, Stream};
use crate::error::CorpusError;
use crate::split::{SplitManifest, SplitName};
use crate::text::normalize_text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Jsonl,
    Tsv,
    Bitext,
}

impl ExportFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            ExportFormat::Jsonl => "jsonl",
            ExportFormat::Tsv => "tsv",
            ExportFormat::Bitext => "bitext",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(ExportFormat::Jsonl),
            "tsv" => Ok(ExportFormat::Tsv),
            "bitext" => Ok(ExportFormat::Bitext),
            other => Err(format!("unknown format {other:?} (expected jsonl, tsv or bitext)")),
        }
    }
}

/// Wire form of a segment, one per JSONL line. Field order is fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub id: String,
    pub src_lang: String,
    pub tgt_lang: String,
    pub source: String,
    pub target: String,
    pub contributor: String,
    pub stream: String,
    pub phase: u8,
    pub status: String,
    pub created_at: String,
}

impl From<&Segment> for SegmentRecord {
    fn from(seg: &Segment) -> Self {
        SegmentRecord {
            id: seg.id.clone(),
            src_lang: seg.pair.source().to_owned(),
            tgt_lang: seg.pair.target().to_owned(),
            source: seg.source_text.clone(),
            target: seg.target_text.clone(),
            contributor: seg.contributor.clone(),
            stream: seg.stream.as_str().to_owned(),
            phase: seg.phase.ordinal(),
            status: seg.status.as_str().to_owned(),
            created_at: seg.created_at.to_rfc3339_opts(SecondsFormat::AutoSi, true),
        }
    }
}

impl SegmentRecord {
    pub fn into_segment(self) -> Result<Segment, String> {
        let pair = LanguagePair::new(&self.src_lang, &self.tgt_lang).map_err(|e| e.to_string())?;
        let stream = Stream::from_str(&self.stream).map_err(|e| e.to_string())?;
        let status = ReviewStatus::from_str(&self.status).map_err(|e| e.to_string())?;
        let phase = CrisisPhase::from_ordinal(self.phase)
            .ok_or_else(|| format!("phase must be 1-3, got {}", self.phase))?;
        let created_at = DateTime::parse_from_rfc3339(&self.created_at)
            .map_err(|e| format!("created_at: {e}"))?
            .with_timezone(&Utc);
        let seg = Segment::new(self.id, pair, &self.source, &self.target).map_err(|e| e.to_string())?;
        Ok(seg
            .with_contributor(self.contributor)
            .with_stream(stream)
            .with_status(status)
            .with_phase(phase)
            .with_created_at(created_at))
    }
}

/// One written file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportedFile {
    pub name: String,
    pub lines: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportReceipt {
    pub format: ExportFormat,
    pub segment_count: usize,
    pub files: Vec<ExportedFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest_fingerprint: Option<String>,
}

/// `<base>.<src>` and `<base>.<tgt>`.
pub fn bitext_paths(base: &Path, pair: &LanguagePair) -> (PathBuf, PathBuf) {
    let with_ext = |lang: &str| {
        let mut name = base.as_os_str().to_owned();
        name.push(".");
        name.push(lang);
        PathBuf::from(name)
    };
    (with_ext(pair.source()), with_ext(pair.target()))
}

fn check_line_safe(seg: &Segment, format: ExportFormat) -> Result<(), CorpusError> {
    let fields = [&seg.source_text, &seg.target_text];
    let newline = fields.iter().any(|t| t.contains(['\n', '\r']));
    let tab = format == ExportFormat::Tsv && fields.iter().any(|t| t.contains('\t'));
    let what = if newline {
        "a line break"
    } else if tab {
        "a tab"
    } else {
        return Ok(());
    };
    Err(CorpusError::Unrepresentable {
        id: seg.id.clone(),
        format: format.as_str(),
        what,
    })
}

fn write_file(dir: &Path, name: &str, body: &str, lines: usize) -> Result<ExportedFile, CorpusError> {
    let path = dir.join(name);
    fs::write(&path, body).map_err(|e| CorpusError::io(&path, e))?;
    Ok(ExportedFile {
        name: name.to_owned(),
        lines,
        sha256: hex::encode(Sha256::digest(body.as_bytes())),
    })
}

/// Renders `corpus` into files named after `name` inside `dir`.
///
/// JSONL writes `<name>.jsonl`, TSV writes `<name>.tsv`, bitext writes
/// `<name>.<src>` and `<name>.<tgt>`.
pub fn export_corpus(
    corpus: &Corpus,
    format: ExportFormat,
    dir: &Path,
    name: &str,
) -> Result<ExportReceipt, CorpusError> {
    if format != ExportFormat::Jsonl {
        for seg in corpus.segments() {
            check_line_safe(seg, format)?;
        }
    }
    fs::create_dir_all(dir).map_err(|e| CorpusError::io(dir, e))?;
    let n = corpus.len();
    let files = match format {
        ExportFormat::Jsonl => {
            let mut body = String::new();
            for seg in corpus.segments() {
                body.push_str(&serde_json::to_string(&SegmentRecord::from(seg)).expect("record serializes"));
                body.push('\n');
            }
            vec![write_file(dir, &format!("{name}.jsonl"), &body, n)?]
        }
        ExportFormat::Tsv => {
            let mut body = String::new();
            for seg in corpus.segments() {
                body.push_str(&seg.source_text);
                body.push('\t');
                body.push_str(&seg.target_text);
                body.push('\n');
            }
            vec![write_file(dir, &format!("{name}.tsv"), &body, n)?]
        }
        ExportFormat::Bitext => {
            let mut src = String::new();
            let mut tgt = String::new();
            for seg in corpus.segments() {
                src.push_str(&seg.source_text);
                src.push('\n');
                tgt.push_str(&seg.target_text);
                tgt.push('\n');
            }
            let pair = corpus.pair();
            vec![
                write_file(dir, &format!("{name}.{}", pair.source()), &src, n)?,
                write_file(dir, &format!("{name}.{}", pair.target()), &tgt, n)?,
            ]
        }
    };
    Ok(ExportReceipt {
        format,
        segment_count: n,
        files,
        manifest_fingerprint: None,
    })
}

/// Writes one file set per split (`train`, `validation`, `test`) plus the
/// manifest as `manifest.json`.
pub fn export_split(
    corpus: &Corpus,
    manifest: &SplitManifest,
    format: ExportFormat,
    dir: &Path,
) -> Result<ExportReceipt, CorpusError> {
    let mut files = Vec::new();
    let mut segment_count = 0;
    for split in SplitName::ALL {
        let part = manifest.select(corpus, split);
        let receipt = export_corpus(&part, format, dir, split.as_str())?;
        segment_count += receipt.segment_count;
        files.extend(receipt.files);
    }
    let manifest_json = manifest.to_json();
    files.push(write_file(dir, "manifest.json", &manifest_json, manifest_json.lines().count())?);
    Ok(ExportReceipt {
        format,
        segment_count,
        files,
        manifest_fingerprint: Some(manifest.fingerprint()),
    })
}

struct NumberedLines {
    path: PathBuf,
    reader: BufReader<File>,
    line: usize,
    buf: Vec<u8>,
}

impl NumberedLines {
    fn open(path: &Path) -> Result<Self, CorpusError> {
        let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
        Ok(NumberedLines {
            path: path.to_owned(),
            reader: BufReader::new(file),
            line: 0,
            buf: Vec::new(),
        })
    }

    /// Next line without its terminator, or `None` at end of file.
    fn next_line(&mut self) -> Result<Option<String>, CorpusError> {
        self.buf.clear();
        let read = self
            .reader
            .read_until(b'\n', &mut self.buf)
            .map_err(|e| CorpusError::io(&self.path, e))?;
        if read == 0 {
            return Ok(None);
        }
        self.line += 1;
        if self.buf.last() == Some(&b'\n') {
            self.buf.pop();
            if self.buf.last() == Some(&b'\r') {
                self.buf.pop();
            }
        }
        match std::str::from_utf8(&self.buf) {
            Ok(s) => Ok(Some(s.to_owned())),
            Err(e) => Err(self.malformed(format!("invalid UTF-8 at byte {}", e.valid_up_to()))),
        }
    }

    fn malformed(&self, reason: impl Into<String>) -> CorpusError {
        CorpusError::Malformed {
            path: self.path.clone(),
            line: self.line,
            reason: reason.into(),
        }
    }
}

fn file_stem(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into())
}

/// Loads a corpus file. TSV and bitext lines become pending segments tagged
/// with `stream` and `phase`; JSONL records keep their own metadata but must
/// carry `pair`. For bitext, `path` is the shared base name.
pub fn ingest_file(
    path: &Path,
    format: ExportFormat,
    pair: &LanguagePair,
    stream: Stream,
    phase: CrisisPhase,
) -> Result<Corpus, CorpusError> {
    let now = Utc::now();
    let stem = file_stem(path);
    let fresh = |line: usize, source: &str, target: &str, lines: &NumberedLines| {
        let seg = Segment::new(format!("{stem}:{line}"), pair.clone(), source, target)
            .map_err(|_| lines.malformed("empty source or target after normalization"))?;
        let mut seg = seg.with_stream(stream).with_phase(phase).with_created_at(now);
        seg.source_line = Some(line);
        Ok::<_, CorpusError>(seg)
    };

    let mut segments = Vec::new();
    match format {
        ExportFormat::Jsonl => {
            let mut lines = NumberedLines::open(path)?;
            while let Some(line) = lines.next_line()? {
                if line.trim().is_empty() {
                    continue;
                }
                let record: SegmentRecord =
                    serde_json::from_str(&line).map_err(|e| lines.malformed(e.to_string()))?;
                let mut seg = record.into_segment().map_err(|e| lines.malformed(e))?;
                if &seg.pair != pair {
                    return Err(lines.malformed(format!("pair {} does not match {pair}", seg.pair)));
                }
                seg.source_line = Some(lines.line);
                segments.push(seg);
            }
        }
        ExportFormat::Tsv => {
            let mut lines = NumberedLines::open(path)?;
            while let Some(line) = lines.next_line()? {
                let Some((source, target)) = line.split_once('\t') else {
                    return Err(lines.malformed("expected source<TAB>target"));
                };
                if target.contains('\t') {
                    return Err(lines.malformed("more than two fields"));
                }
                segments.push(fresh(lines.line, source, target, &lines)?);
            }
        }
        ExportFormat::Bitext => {
            let (src_path, tgt_path) = bitext_paths(path, pair);
            let mut src = NumberedLines::open(&src_path)?;
            let mut tgt = NumberedLines::open(&tgt_path)?;
            loop {
                match (src.next_line()?, tgt.next_line()?) {
                    (None, None) => break,
                    (Some(_), None) => {
                        return Err(CorpusError::Misaligned {
                            path: tgt_path,
                            line: tgt.line,
                        })
                    }
                    (None, Some(_)) => {
                        return Err(CorpusError::Misaligned {
                            path: src_path,
                            line: src.line,
                        })
                    }
                    (Some(s), Some(t)) => {
                        segments.push(fresh(src.line, &s, &t, &src)?);
                    }
                }
            }
        }
    }
    Corpus::new(pair.clone(), segments)
}

/// Normalized (source, target) pairs, sorted; the multiset a round trip keeps.
pub fn text_multiset(corpus: &Corpus) -> Vec<(String, String)> {
    let mut pairs: Vec<_> = corpus
        .segments()
        .iter()
        .map(|s| (normalize_text(&s.source_text), normalize_text(&s.target_text)))
        .collect();
    pairs.sort();
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> LanguagePair {
        "en-ga".parse().unwrap()
    }

    fn corpus(rows: &[(&str, &str)]) -> Corpus {
        let segs = rows
            .iter()
            .enumerate()
            .map(|(i, (s, t))| Segment::new(format!("id{i}"), pair(), s, t).unwrap())
            .collect();
        Corpus::new(pair(), segs).unwrap()
    }

    #[test]
    fn bitext_writes_aligned_files() {
        let dir = tempfile::tempdir().unwrap();
        let c = corpus(&[("hello", "dia dhuit"), ("thanks", "go raibh maith agat"), ("yes", "tá")]);
        let receipt = export_corpus(&c, ExportFormat::Bitext, dir.path(), "corpus").unwrap();
        assert_eq!(receipt.segment_count, 3);
        let en = fs::read_to_string(dir.path().join("corpus.en")).unwrap();
        let ga = fs::read_to_string(dir.path().join("corpus.ga")).unwrap();
        assert_eq!(en.lines().count(), 3);
        assert_eq!(ga.lines().count(), 3);
        assert_eq!(receipt.files[0].sha256, hex::encode(Sha256::digest(en.as_bytes())));
    }

    #[test]
    fn empty_corpus_writes_empty_files() {
        let dir = tempfile::tempdir().unwrap();
        let receipt = export_corpus(&Corpus::empty(pair()), ExportFormat::Bitext, dir.path(), "c").unwrap();
        assert_eq!(receipt.segment_count, 0);
        assert_eq!(fs::read(dir.path().join("c.en")).unwrap(), b"");
        assert_eq!(fs::read(dir.path().join("c.ga")).unwrap(), b"");
        let back = ingest_file(&dir.path().join("c"), ExportFormat::Bitext, &pair(), Stream::Community, CrisisPhase::CustomGpt).unwrap();
        assert!(back.is_empty());
    }

    #[test]
    fn tab_in_tsv_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut seg = Segment::new("bad", pair(), "a", "b").unwrap();
        seg.source_text = "a\tb".into();
        let c = Corpus::new(pair(), vec![seg]).unwrap();
        let err = export_corpus(&c, ExportFormat::Tsv, dir.path(), "x").unwrap_err();
        assert!(matches!(err, CorpusError::Unrepresentable { ref id, .. } if id == "bad"));
        // Tabs are harmless in bitext.
        assert!(export_corpus(&c, ExportFormat::Bitext, dir.path(), "x").is_ok());
        let mut seg = Segment::new("nl", pair(), "a", "b").unwrap();
        seg.target_text = "b\nc".into();
        let c = Corpus::new(pair(), vec![seg]).unwrap();
        assert!(export_corpus(&c, ExportFormat::Bitext, dir.path(), "y").is_err());
    }

    #[test]
    fn misaligned_bitext() {
        let dir = tempfile::tempdir().unwrap();
        let src: String = (0..501).map(|i| format!("s{i}\n")).collect();
        let tgt: String = (0..500).map(|i| format!("t{i}\n")).collect();
        fs::write(dir.path().join("d.en"), src).unwrap();
        fs::write(dir.path().join("d.ga"), tgt).unwrap();
        let err = ingest_file(&dir.path().join("d"), ExportFormat::Bitext, &pair(), Stream::Community, CrisisPhase::CustomGpt).unwrap_err();
        match err {
            CorpusError::Misaligned { path, line } => {
                assert!(path.ends_with("d.ga"));
                assert_eq!(line, 500);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_tsv_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.tsv");
        fs::write(&path, "a\tb\nno tab here\n").unwrap();
        let err = ingest_file(&path, ExportFormat::Tsv, &pair(), Stream::Expert, CrisisPhase::CustomGpt).unwrap_err();
        assert!(matches!(err, CorpusError::Malformed { line: 2, .. }), "{err}");
    }

    #[test]
    fn malformed_jsonl_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.jsonl");
        let c = corpus(&[("a", "b")]);
        export_corpus(&c, ExportFormat::Jsonl, dir.path(), "x").unwrap();
        let mut body = fs::read_to_string(&path).unwrap();
        body.push_str("{\"id\": 3}\n");
        fs::write(&path, body).unwrap();
        let err = ingest_file(&path, ExportFormat::Jsonl, &pair(), Stream::Expert, CrisisPhase::CustomGpt).unwrap_err();
        assert!(matches!(err, CorpusError::Malformed { line: 2, .. }), "{err}");
    }

    #[test]
    fn jsonl_schema_field_order() {
        let seg = Segment::new("s1", pair(), "hi", "dia duit")
            .unwrap()
            .with_created_at(DateTime::parse_from_rfc3339("2024-03-01T12:00:00Z").unwrap().with_timezone(&Utc));
        let line = serde_json::to_string(&SegmentRecord::from(&seg)).unwrap();
        assert_eq!(
            line,
            r#"{"id":"s1","src_lang":"en","tgt_lang":"ga","source":"hi","target":"dia duit","contributor":"","stream":"community","phase":1,"status":"pending","created_at":"2024-03-01T12:00:00Z"}"#
        );
    }

    #[test]
    fn ingest_preserves_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.tsv");
        fs::write(&path, "a\tb\r\nc\td\n").unwrap();
        let c = ingest_file(&path, ExportFormat::Tsv, &pair(), Stream::LlmEnsemble, CrisisPhase::FinetunedLlm).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.segments()[1].source_line, Some(2));
        assert_eq!(c.segments()[1].target_text, "d");
        assert_eq!(c.segments()[0].status, ReviewStatus::Pending);
        assert_eq!(c.segments()[0].phase, CrisisPhase::FinetunedLlm);
    }
}
