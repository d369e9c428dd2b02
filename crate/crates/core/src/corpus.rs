//! Token-pair datasets and contemporary lexicons.
//!
//! Every string that enters a model passes through the same preprocessing
//! pipeline: lowercasing, removal of empty and punctuation-only tokens,
//! digit zeroing, replacement of spaces by [`JOIN_SYMBOL`] and NFC
//! composition.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use log::info;
use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// Stand-in for internal space characters (U+2581 LOWER ONE EIGHTH BLOCK).
pub const JOIN_SYMBOL: char = '\u{2581}';

pub fn is_punctuation(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::ConnectorPunctuation
            | GeneralCategory::DashPunctuation
            | GeneralCategory::OpenPunctuation
            | GeneralCategory::ClosePunctuation
            | GeneralCategory::InitialPunctuation
            | GeneralCategory::FinalPunctuation
            | GeneralCategory::OtherPunctuation
    )
}

pub fn is_digit(c: char) -> bool {
    get_general_category(c) == GeneralCategory::DecimalNumber
}

fn punctuation_only(s: &str) -> bool {
    s.chars().all(is_punctuation)
}

fn zero_digits(s: &str) -> String {
    s.chars()
        .map(|c| if is_digit(c) { '0' } else { c })
        .collect()
}

/// An aligned (historical, gold) word pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenPair {
    pub source: String,
    pub target: String,
}

impl TokenPair {
    pub fn new(source: impl Into<String>, target: impl Into<String>) -> Self {
        TokenPair {
            source: source.into(),
            target: target.into(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target
    }
}

/// Runs the pair preprocessing pipeline. Returns `None` when the pair is
/// filtered out (empty or punctuation-only on either side).
pub fn preprocess_pair(raw_source: &str, raw_target: &str) -> Option<TokenPair> {
    let source = raw_source.to_lowercase();
    let target = raw_target.to_lowercase();
    if source.is_empty() || target.is_empty() {
        return None;
    }
    if punctuation_only(&source) || punctuation_only(&target) {
        return None;
    }

    // digits are only neutralised when both sides carry the same digit sequence
    let source_digits = source.chars().filter(|&c| is_digit(c));
    let target_digits = target.chars().filter(|&c| is_digit(c));
    let (source, target) = if source_digits.eq(target_digits) {
        (zero_digits(&source), zero_digits(&target))
    } else {
        (source, target)
    };

    let finish = |s: String| -> String { s.replace(' ', &JOIN_SYMBOL.to_string()).nfc().collect() };
    Some(TokenPair {
        source: finish(source),
        target: finish(target),
    })
}

/// Preprocessing for a standalone token (lexicon material, raw input to
/// `normalize`). Digits are zeroed unconditionally since there is no
/// counterpart to compare against.
pub fn preprocess_token(raw: &str) -> Option<String> {
    let token = raw.to_lowercase();
    if token.is_empty() || punctuation_only(&token) {
        return None;
    }
    let token = zero_digits(&token).replace(' ', &JOIN_SYMBOL.to_string());
    Some(token.nfc().collect())
}

/// Lexicon tokenization: trims punctuation off both ends of a
/// whitespace-delimited word before preprocessing.
pub fn preprocess_running_word(raw: &str) -> Option<String> {
    let trimmed = raw.trim_matches(is_punctuation);
    if trimmed.is_empty() {
        return None;
    }
    preprocess_token(trimmed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(Error::Config(format!(
                "unknown split '{other}' (expected train, dev or test)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub split: Split,
    pub pairs: Vec<TokenPair>,
}

/// What happened while reading a dataset file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub lines: usize,
    pub dropped: usize,
    pub blank: usize,
}

/// Splits raw bytes into lines, accepting LF and CRLF endings and
/// rejecting invalid UTF-8 with the offending line number.
pub fn decode_lines(bytes: &[u8]) -> Result<Vec<&str>> {
    let mut lines = Vec::new();
    if bytes.is_empty() {
        return Ok(lines);
    }
    let body = bytes.strip_suffix(b"\n").unwrap_or(bytes);
    for (idx, raw) in body.split(|&b| b == b'\n').enumerate() {
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        let line = std::str::from_utf8(raw).map_err(|e| Error::Ingest {
            line: idx + 1,
            message: format!("invalid UTF-8: {e}"),
        })?;
        lines.push(line);
    }
    Ok(lines)
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

impl Dataset {
    pub fn new(name: impl Into<String>, split: Split, pairs: Vec<TokenPair>) -> Self {
        Dataset {
            name: name.into(),
            split,
            pairs,
        }
    }

    /// Parses `source<TAB>target` lines. Blank lines are skipped; lines
    /// that preprocessing filters out are counted as dropped.
    pub fn parse(name: &str, split: Split, bytes: &[u8]) -> Result<(Dataset, LoadStats)> {
        let lines = decode_lines(bytes)?;
        let mut stats = LoadStats {
            lines: lines.len(),
            ..LoadStats::default()
        };
        let mut pairs = Vec::with_capacity(lines.len());
        for (idx, line) in lines.iter().enumerate() {
            let lineno = idx + 1;
            if line.is_empty() {
                stats.blank += 1;
                continue;
            }
            if line.contains(JOIN_SYMBOL) {
                return Err(Error::Ingest {
                    line: lineno,
                    message: format!("input contains the reserved join symbol {JOIN_SYMBOL:?}"),
                });
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 2 {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected 2 tab-separated columns, found {}", cols.len()),
                });
            }
            match preprocess_pair(cols[0], cols[1]) {
                Some(pair) => pairs.push(pair),
                None => stats.dropped += 1,
            }
        }
        Ok((Dataset::new(name, split, pairs), stats))
    }

    pub fn load_with_stats(path: &Path, split: Split) -> Result<(Dataset, LoadStats)> {
        let bytes = read_file(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let (dataset, stats) = Dataset::parse(&name, split, &bytes)?;
        if stats.dropped > 0 {
            info!(
                "{}: dropped {} of {} lines during preprocessing",
                path.display(),
                stats.dropped,
                stats.lines
            );
        }
        Ok((dataset, stats))
    }

    pub fn load(path: &Path, split: Split) -> Result<Dataset> {
        Dataset::load_with_stats(path, split).map(|(d, _)| d)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn sources(&self) -> Vec<&str> {
        self.pairs.iter().map(|p| p.source.as_str()).collect()
    }

    pub fn targets(&self) -> Vec<&str> {
        self.pairs.iter().map(|p| p.target.as_str()).collect()
    }

    /// Contiguous sub-dataset, used by the learning-curve chunker.
    pub fn slice(&self, start: usize, len: usize) -> Dataset {
        Dataset::new(
            self.name.clone(),
            self.split,
            self.pairs[start..start + len].to_vec(),
        )
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for p in &self.pairs {
            out.push_str(&p.source);
            out.push('\t');
            out.push_str(&p.target);
            out.push('\n');
        }
        out
    }
}

/// Contemporary word types with corpus frequencies.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicon {
    pub entries: BTreeMap<String, u64>,
}

impl Lexicon {
    pub fn new() -> Self {
        Lexicon::default()
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut lex = Lexicon::new();
        for w in words {
            if let Some(w) = preprocess_token(w.as_ref()) {
                *lex.entries.entry(w).or_insert(0) += 1;
            }
        }
        lex
    }

    /// Adds every token of a running text.
    pub fn add_text(&mut self, text: &str) {
        for raw in text.split_whitespace() {
            if let Some(w) = preprocess_running_word(raw) {
                *self.entries.entry(w).or_insert(0) += 1;
            }
        }
    }

    /// Adds one word per line; words already present keep their count.
    pub fn add_wordlist(&mut self, text: &str) {
        for raw in text.lines() {
            if let Some(w) = preprocess_token(raw.trim_end_matches('\r')) {
                self.entries.entry(w).or_insert(1);
            }
        }
    }

    pub fn merge(&mut self, other: &Lexicon) {
        for (w, &f) in &other.entries {
            *self.entries.entry(w.clone()).or_insert(0) += f;
        }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn frequency(&self, word: &str) -> u64 {
        self.entries.get(word).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.entries.iter().map(|(w, &f)| (w.as_str(), f))
    }

    /// `type<TAB>frequency` lines sorted by type.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (w, f) in &self.entries {
            out.push_str(&format!("{w}\t{f}\n"));
        }
        out
    }

    pub fn from_tsv(bytes: &[u8]) -> Result<Lexicon> {
        let mut entries = BTreeMap::new();
        for (idx, line) in decode_lines(bytes)?.into_iter().enumerate() {
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: idx + 1,
                message,
            };
            let (word, freq) = line
                .split_once('\t')
                .ok_or_else(|| parse_err("expected 'type<TAB>frequency'".into()))?;
            let freq: u64 = freq
                .parse()
                .map_err(|e| parse_err(format!("bad frequency '{freq}': {e}")))?;
            if freq == 0 {
                return Err(parse_err(format!("frequency of '{word}' must be >= 1")));
            }
            entries.insert(word.to_string(), freq);
        }
        Ok(Lexicon { entries })
    }

    pub fn load(path: &Path) -> Result<Lexicon> {
        Lexicon::from_tsv(&read_file(path)?)
    }
}

/// Builds a lexicon from running-text corpora plus optional wordlists.
pub fn build_lexicon(corpus_paths: &[&Path], extra_wordlists: &[&Path]) -> Result<Lexicon> {
    if corpus_paths.is_empty() && extra_wordlists.is_empty() {
        return Err(Error::Config(
            "building a lexicon needs at least one corpus or wordlist".into(),
        ));
    }
    let mut lexicon = Lexicon::new();
    for path in corpus_paths {
        let bytes = read_file(path)?;
        for line in decode_lines(&bytes)? {
            lexicon.add_text(line);
        }
    }
    for path in extra_wordlists {
        let bytes = read_file(path)?;
        for line in decode_lines(&bytes)? {
            lexicon.add_wordlist(line);
        }
    }
    Ok(lexicon)
}
