use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tokenizer {
    /// Split on whitespace only.
    Whitespace,
    /// Split on whitespace, then isolate every punctuation or symbol codepoint.
    #[default]
    International,
}

static PIECES: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[\p{P}\p{S}]|[^\p{P}\p{S}]+").expect("static pattern"));

pub fn tokenize(text: &str, mode: Tokenizer) -> Vec<String> {
    match mode {
        Tokenizer::Whitespace => text.split_whitespace().map(str::to_owned).collect(),
        Tokenizer::International => text
            .split_whitespace()
            .flat_map(|word| PIECES.find_iter(word).map(|m| m.as_str().to_owned()))
            .collect(),
    }
}
