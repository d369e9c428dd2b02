//! Suffix-stripping stemmers for stem-level comparison of normalizations.
//!
//! English uses the Porter algorithm. German, Spanish, Hungarian,
//! Portuguese and Swedish use bundled suffix tables, applied to the
//! diacritic-folded word. Icelandic and Slovene have no stemmer.

mod porter;

use std::fmt;
use std::path::Path;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::corpus::read_file;
use crate::error::{Error, Result};

pub use porter::porter_stem;

/// Languages [`StemmerSpec::for_language`] accepts.
pub const SUPPORTED_LANGUAGES: &[&str] = &["de", "en", "es", "hu", "pt", "sv"];
/// Languages known to have no stemmer.
pub const UNSUPPORTED_LANGUAGES: &[&str] = &["is", "sl"];

const TABLE_DE: &str = include_str!("tables/de.tsv");
const TABLE_ES: &str = include_str!("tables/es.tsv");
const TABLE_HU: &str = include_str!("tables/hu.tsv");
const TABLE_PT: &str = include_str!("tables/pt.tsv");
const TABLE_SV: &str = include_str!("tables/sv.tsv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixRule {
    pub suffix: String,
    pub replacement: String,
    /// Minimum number of characters left before the suffix.
    pub min_stem: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Algorithm {
    PorterEnglish,
    /// Rules sorted longest suffix first.
    SuffixTable(Vec<SuffixRule>),
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::PorterEnglish => "porter-english",
            Algorithm::SuffixTable(_) => "suffix-table",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StemmerSpec {
    pub language: String,
    pub algorithm: Algorithm,
}

impl fmt::Display for StemmerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.language, self.algorithm.name())
    }
}

fn unsupported(language: &str) -> Error {
    Error::UnsupportedLanguage {
        language: language.to_string(),
        supported: SUPPORTED_LANGUAGES.join(", "),
    }
}

/// Whether a stemmer exists for `language`.
pub fn is_supported(language: &str) -> bool {
    SUPPORTED_LANGUAGES.contains(&language.to_lowercase().as_str())
}

impl StemmerSpec {
    /// The bundled stemmer for a language code.
    pub fn for_language(language: &str) -> Result<StemmerSpec> {
        let code = language.to_lowercase();
        let table = match code.as_str() {
            "en" => {
                return Ok(StemmerSpec {
                    language: code,
                    algorithm: Algorithm::PorterEnglish,
                })
            }
            "de" => TABLE_DE,
            "es" => TABLE_ES,
            "hu" => TABLE_HU,
            "pt" => TABLE_PT,
            "sv" => TABLE_SV,
            _ => return Err(unsupported(language)),
        };
        StemmerSpec::suffix_table(&code, parse_table(table)?)
    }

    pub fn suffix_table(language: &str, rules: Vec<SuffixRule>) -> Result<StemmerSpec> {
        let mut folded = Vec::with_capacity(rules.len());
        for r in rules {
            let rule = SuffixRule {
                suffix: fold_diacritics(&r.suffix),
                replacement: fold_diacritics(&r.replacement),
                min_stem: r.min_stem,
            };
            if rule.suffix.is_empty() {
                return Err(Error::Config("suffix rule with empty suffix".into()));
            }
            if rule.min_stem < 1 {
                return Err(Error::Config(format!(
                    "suffix '{}': minimum stem length must be at least 1",
                    rule.suffix
                )));
            }
            if rule.replacement.chars().count() > rule.suffix.chars().count() {
                return Err(Error::Config(format!(
                    "suffix '{}': replacement '{}' is longer than the suffix",
                    rule.suffix, rule.replacement
                )));
            }
            folded.push(rule);
        }
        // stable: equal lengths keep file order
        folded.sort_by_key(|r| std::cmp::Reverse(r.suffix.chars().count()));
        Ok(StemmerSpec {
            language: language.to_lowercase(),
            algorithm: Algorithm::SuffixTable(folded),
        })
    }

    /// Loads a `suffix<TAB>replacement<TAB>minlen` file.
    pub fn from_table_file(language: &str, path: &Path) -> Result<StemmerSpec> {
        let bytes = read_file(path)?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|e| Error::Format(format!("{}: not valid UTF-8: {e}", path.display())))?;
        StemmerSpec::suffix_table(language, parse_table(text)?)
    }

    pub fn stem(&self, word: &str) -> String {
        match &self.algorithm {
            Algorithm::PorterEnglish => porter_stem(word),
            Algorithm::SuffixTable(rules) => strip_suffix(rules, &fold_diacritics(word)),
        }
    }
}

/// Parses suffix rules. Blank lines and lines starting with `#` are
/// skipped; the replacement column may be empty.
pub fn parse_table(text: &str) -> Result<Vec<SuffixRule>> {
    let mut rules = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected 3 tab-separated columns, found {}", cols.len()),
            });
        }
        let min_stem = cols[2].trim().parse().map_err(|_| Error::Parse {
            line: i + 1,
            message: format!("bad minimum stem length '{}'", cols[2]),
        })?;
        rules.push(SuffixRule {
            suffix: cols[0].to_string(),
            replacement: cols[1].to_string(),
            min_stem,
        });
    }
    Ok(rules)
}

fn strip_suffix(rules: &[SuffixRule], word: &str) -> String {
    let len = word.chars().count();
    for r in rules {
        if let Some(stem) = word.strip_suffix(r.suffix.as_str()) {
            if len - r.suffix.chars().count() >= r.min_stem {
                return format!("{stem}{}", r.replacement);
            }
        }
    }
    word.to_string()
}

/// Canonical decomposition with combining marks removed, recomposed.
pub fn fold_diacritics(s: &str) -> String {
    s.nfd().filter(|&c| !is_combining_mark(c)).nfc().collect()
}

pub fn stem(spec: &StemmerSpec, word: &str) -> String {
    spec.stem(word)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let en = StemmerSpec::for_language("en").unwrap();
        assert_eq!(en.stem("kings"), "king");
        assert_eq!(en.stem("the"), "the");
        let es = StemmerSpec::for_language("es").unwrap();
        assert_eq!(es.stem("ésta"), es.stem("esta"));
        assert_eq!(es.stem("canción"), es.stem("cancion"));
    }

    #[test]
    fn unsupported_languages() {
        for lang in ["is", "sl", "xx"] {
            let err = StemmerSpec::for_language(lang).unwrap_err();
            let msg = err.to_string();
            assert!(msg.contains("de, en, es, hu, pt, sv"), "{msg}");
        }
        assert!(is_supported("EN"));
        assert!(!is_supported("is"));
    }

    #[test]
    fn longest_suffix_wins() {
        let spec = StemmerSpec::suffix_table(
            "xx",
            vec![
                SuffixRule {
                    suffix: "s".into(),
                    replacement: "".into(),
                    min_stem: 1,
                },
                SuffixRule {
                    suffix: "ies".into(),
                    replacement: "y".into(),
                    min_stem: 2,
                },
            ],
        )
        .unwrap();
        assert_eq!(spec.stem("ponies"), "pony");
        // "ies" blocked by the minimum, falls back to "s"
        assert_eq!(spec.stem("lies"), "lie");
        assert_eq!(spec.stem("s"), "s");
    }

    #[test]
    fn table_validation() {
        let bad = [("", "", 1), ("a", "", 0), ("a", "bb", 1)];
        for (s, r, m) in bad {
            let rules = vec![SuffixRule {
                suffix: s.into(),
                replacement: r.into(),
                min_stem: m,
            }];
            assert!(StemmerSpec::suffix_table("xx", rules).is_err());
        }
        assert!(parse_table("a\tb").is_err());
        assert!(parse_table("a\t\tx").is_err());
        let rules = parse_table("# c\n\nen\t\t3\r\n").unwrap();
        assert_eq!(rules.len(), 1);
    }

    #[test]
    fn table_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("xx.tsv");
        std::fs::write(&path, "ung\t\t2\nen\t\t2\n").unwrap();
        let spec = StemmerSpec::from_table_file("xx", &path).unwrap();
        assert_eq!(spec.stem("zeitung"), "zeit");
        assert_eq!(spec.algorithm.name(), "suffix-table");
    }

    #[test]
    fn folding() {
        assert_eq!(fold_diacritics("üdvözülendőek"), "udvozulendoek");
        assert_eq!(fold_diacritics("한국"), "한국");
        assert_eq!(fold_diacritics("straße"), "straße");
    }

    proptest! {
        #[test]
        fn never_longer(w in "\\PC{0,12}", lang in proptest::sample::select(SUPPORTED_LANGUAGES)) {
            let spec = StemmerSpec::for_language(lang).unwrap();
            prop_assert!(spec.stem(&w).chars().count() <= w.chars().count());
        }
    }
}
