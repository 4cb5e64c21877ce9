//! Text canonicalization shared by ingestion, deduplication and scoring.

use unicode_normalization::UnicodeNormalization;

use crate::error::CorpusError;

/// Unit separator placed between the two sides of a dedup key.
pub const KEY_SEPARATOR: char = '\u{1F}';

/// NFC-composes `raw`, collapses whitespace runs to a single space and trims
/// both ends. Casing is preserved.
pub fn normalize_text(raw: &str) -> String {
    let composed: String = raw.nfc().collect();
    let mut out = String::with_capacity(composed.len());
    for word in composed.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Byte-level entry point for [`normalize_text`]; rejects invalid UTF-8.
pub fn normalize_bytes(raw: &[u8]) -> Result<String, CorpusError> {
    let text = std::str::from_utf8(raw).map_err(|e| CorpusError::Encoding {
        offset: e.valid_up_to(),
    })?;
    Ok(normalize_text(text))
}

/// Case-folded canonical form used for matching.
pub fn fold(raw: &str) -> String {
    normalize_text(raw).to_lowercase().nfc().collect()
}

/// Pair identity of a (source, target) sentence pair.
pub fn pair_key(source: &str, target: &str) -> String {
    let mut key = fold(source);
    key.push(KEY_SEPARATOR);
    key.push_str(&fold(target));
    key
}
