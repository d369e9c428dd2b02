//! Substitution units extracted from character alignments.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::align::{align_chars, UnitCosts};
use crate::corpus::Dataset;
use crate::distance::pair_counts;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_UNIT: usize = 3;
/// Additive smoothing constant for unit translation probabilities.
pub const SMOOTHING: f64 = 0.1;

/// A minimal aligned unit: one matched character, or a run of edits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Unit {
    pub source: String,
    pub target: String,
    pub edited: bool,
}

/// Splits an alignment into minimal units. Runs of non-match operations
/// become one unit of at most `max_unit` source characters. Runs without
/// target characters are absorbed by a neighbouring unit when the result
/// stays within `max_unit`, preferring the following one; insert-only runs
/// attach to the preceding unit, or the following one at the start.
pub(crate) fn minimal_units(source: &[char], target: &[char], max_unit: usize) -> Vec<Unit> {
    let ops = align_chars(source, target, &UnitCosts).ops;
    let mut units: Vec<Unit> = Vec::new();
    let mut pending_prefix = String::new();
    // a deletion waiting to join the next matched character
    let mut pending_source = String::new();
    let len = |s: &str| s.chars().count();
    let mut i = 0;
    while i < ops.len() {
        if ops[i].is_match() {
            let c = ops[i].source.expect("match has a source char");
            let mut target = std::mem::take(&mut pending_prefix);
            let mut edited = !target.is_empty();
            let mut src = std::mem::take(&mut pending_source);
            if !src.is_empty() {
                edited = true;
            }
            src.push(c);
            target.push(c);
            units.push(Unit {
                source: src,
                target,
                edited,
            });
            i += 1;
            continue;
        }
        let start = i;
        while i < ops.len() && !ops[i].is_match() {
            i += 1;
        }
        let run = &ops[start..i];
        let mut chunks: Vec<Unit> = Vec::new();
        let mut chunk = Unit {
            source: String::new(),
            target: std::mem::take(&mut pending_prefix),
            edited: true,
        };
        let mut chunk_len = 0;
        for op in run {
            if let Some(s) = op.source {
                if chunk_len == max_unit {
                    chunks.push(std::mem::replace(
                        &mut chunk,
                        Unit {
                            source: String::new(),
                            target: String::new(),
                            edited: true,
                        },
                    ));
                    chunk_len = 0;
                }
                chunk.source.push(s);
                chunk_len += 1;
            }
            chunk.target.extend(op.target);
        }
        chunks.push(chunk);
        let n_chunks = chunks.len();
        for (k, chunk) in chunks.into_iter().enumerate() {
            if chunk.source.is_empty() {
                // insert-only run
                match units.last_mut() {
                    Some(prev) => {
                        prev.target.push_str(&chunk.target);
                        prev.edited = true;
                    }
                    None => pending_prefix = chunk.target,
                }
            } else if chunk.target.is_empty() {
                let joins_next =
                    k + 1 == n_chunks && i < ops.len() && len(&chunk.source) < max_unit;
                match units.last_mut() {
                    _ if joins_next => pending_source = chunk.source,
                    Some(prev) if len(&prev.source) + len(&chunk.source) <= max_unit => {
                        prev.source.push_str(&chunk.source);
                        prev.edited = true;
                    }
                    _ => units.push(chunk),
                }
            } else {
                units.push(chunk);
            }
        }
    }
    units
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TableRepr {
    max_unit: usize,
    counts: BTreeMap<String, BTreeMap<String, u64>>,
}

/// Translation probabilities `p(target unit | source unit)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "TableRepr", into = "TableRepr")]
pub struct SubstitutionTable {
    max_unit: usize,
    counts: BTreeMap<String, BTreeMap<String, u64>>,
    probs: BTreeMap<String, Vec<(String, f64)>>,
}

impl PartialEq for SubstitutionTable {
    fn eq(&self, other: &Self) -> bool {
        self.max_unit == other.max_unit && self.counts == other.counts
    }
}

impl From<TableRepr> for SubstitutionTable {
    fn from(r: TableRepr) -> Self {
        SubstitutionTable::from_counts(r.max_unit, r.counts)
    }
}

impl From<SubstitutionTable> for TableRepr {
    fn from(t: SubstitutionTable) -> Self {
        TableRepr {
            max_unit: t.max_unit,
            counts: t.counts,
        }
    }
}

impl SubstitutionTable {
    pub fn empty(max_unit: usize) -> Self {
        SubstitutionTable::from_counts(max_unit, BTreeMap::new())
    }

    /// Smoothed relative frequencies: every observed target, plus the
    /// identity, receives `SMOOTHING` extra counts.
    fn from_counts(max_unit: usize, counts: BTreeMap<String, BTreeMap<String, u64>>) -> Self {
        let probs = counts
            .iter()
            .map(|(source, targets)| {
                let mut smoothed: BTreeMap<&str, f64> = targets
                    .iter()
                    .map(|(t, &c)| (t.as_str(), c as f64 + SMOOTHING))
                    .collect();
                smoothed.entry(source.as_str()).or_insert(SMOOTHING);
                let total: f64 = smoothed.values().sum();
                let dist = smoothed
                    .into_iter()
                    .map(|(t, c)| (t.to_string(), c / total))
                    .collect();
                (source.clone(), dist)
            })
            .collect();
        SubstitutionTable {
            max_unit,
            counts,
            probs,
        }
    }

    pub fn extract(pairs: &Dataset, max_unit: usize) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Training(
                "cannot extract units from an empty dataset".into(),
            ));
        }
        if !(1..=3).contains(&max_unit) {
            return Err(Error::Config(format!(
                "max_unit must be in 1..=3, got {max_unit}"
            )));
        }
        let mut counts: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
        let mut add = |s: &str, t: &str, n: u64| {
            *counts
                .entry(s.to_string())
                .or_default()
                .entry(t.to_string())
                .or_insert(0) += n;
        };
        for ((s, t), n) in pair_counts(pairs) {
            let s: Vec<char> = s.chars().collect();
            let t: Vec<char> = t.chars().collect();
            let units = minimal_units(&s, &t, max_unit);
            for u in &units {
                add(&u.source, &u.target, n);
            }
            // longer units spanning an edit, for context
            for a in 0..units.len() {
                let mut src_len = units[a].source.chars().count();
                let mut edited = units[a].edited;
                for b in a + 1..units.len() {
                    src_len += units[b].source.chars().count();
                    if src_len > max_unit {
                        break;
                    }
                    edited |= units[b].edited;
                    if edited {
                        let src: String = units[a..=b].iter().map(|u| u.source.as_str()).collect();
                        let tgt: String = units[a..=b].iter().map(|u| u.target.as_str()).collect();
                        add(&src, &tgt, n);
                    }
                }
            }
        }
        Ok(SubstitutionTable::from_counts(max_unit, counts))
    }

    pub fn max_unit(&self) -> usize {
        self.max_unit
    }

    /// Target options for a source unit, sorted by target.
    pub fn get(&self, source: &str) -> Option<&[(String, f64)]> {
        self.probs.get(source).map(Vec::as_slice)
    }

    pub fn prob(&self, source: &str, target: &str) -> Option<f64> {
        self.get(source)?
            .iter()
            .find(|(t, _)| t == target)
            .map(|(_, p)| *p)
    }

    pub fn count(&self, source: &str, target: &str) -> u64 {
        self.counts
            .get(source)
            .and_then(|m| m.get(target))
            .copied()
            .unwrap_or(0)
    }

    pub fn sources(&self) -> impl Iterator<Item = &str> {
        self.probs.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// `source<TAB>target<TAB>count` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (s, targets) in &self.counts {
            for (t, c) in targets {
                out.push_str(&format!("{s}\t{t}\t{c}\n"));
            }
        }
        out
    }
}

pub fn extract_units(pairs: &Dataset, max_unit: usize) -> Result<SubstitutionTable> {
    SubstitutionTable::extract(pairs, max_unit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Split, TokenPair};
    use proptest::prelude::*;

    fn dataset(pairs: &[(&str, &str, usize)]) -> Dataset {
        let mut v = Vec::new();
        for &(s, t, n) in pairs {
            v.extend(std::iter::repeat_n(TokenPair::new(s, t), n));
        }
        Dataset::new("t", Split::Train, v)
    }

    fn chars(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    #[test]
    fn smoothed_probability() {
        let t = SubstitutionTable::extract(&dataset(&[("vnd", "und", 10)]), 3).unwrap();
        // observed {u: 10} plus the identity target
        let p = t.prob("v", "u").unwrap();
        assert!((p - 10.1 / 10.2).abs() < 1e-12);
        assert!((t.prob("v", "v").unwrap() - 0.1 / 10.2).abs() < 1e-12);
        assert_eq!(t.prob("n", "n"), Some(1.0));
        assert_eq!(t.count("vn", "un"), 10);
        assert_eq!(t.count("vnd", "und"), 10);
        assert_eq!(t.count("nd", "nd"), 0);
    }

    #[test]
    fn identity_corpus_is_deterministic() {
        let t =
            SubstitutionTable::extract(&dataset(&[("abc", "abc", 4), ("ba", "ba", 1)]), 3).unwrap();
        for s in t.sources() {
            assert_eq!(t.get(s).unwrap(), &[(s.to_string(), 1.0)]);
        }
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn runs_merge_into_units() {
        let t = SubstitutionTable::extract(&dataset(&[("sch", "s", 1)]), 3).unwrap();
        assert_eq!(t.count("sch", "s"), 1);
        assert_eq!(t.count("ch", ""), 0);

        let units = minimal_units(&chars("abcdx"), &chars("wxyzx"), 3);
        assert_eq!(units[0].source, "abc");
        assert_eq!(units[1].source, "d");
        assert_eq!(
            units[2],
            Unit {
                source: "x".into(),
                target: "x".into(),
                edited: false
            }
        );
    }

    #[test]
    fn deletions_attach_to_neighbours() {
        let units = minimal_units(&chars("badd"), &chars("bad"), 3);
        assert!(units.iter().all(|u| !u.target.is_empty()));
        assert_eq!(units.last().unwrap().source, "dd");
        let units = minimal_units(&chars("xab"), &chars("ab"), 3);
        assert_eq!(
            units[0],
            Unit {
                source: "xa".into(),
                target: "a".into(),
                edited: true
            }
        );
        // nothing after: joins the preceding unit
        let units = minimal_units(&chars("abx"), &chars("ab"), 3);
        assert_eq!(
            units[1],
            Unit {
                source: "bx".into(),
                target: "b".into(),
                edited: true
            }
        );
        // too long to absorb
        let units = minimal_units(&chars("abcd"), &chars("a"), 2);
        assert!(units.iter().any(|u| u.target.is_empty()));
        let units = minimal_units(&chars("abc"), &chars(""), 3);
        assert_eq!(
            units,
            vec![Unit {
                source: "abc".into(),
                target: "".into(),
                edited: true
            }]
        );
    }

    #[test]
    fn inserts_attach_to_neighbours() {
        let units = minimal_units(&chars("ther"), &chars("there"), 3);
        assert_eq!(units.last().unwrap().target, "re");
        let units = minimal_units(&chars("ab"), &chars("xab"), 3);
        assert_eq!(units[0].target, "xa");
        assert!(units[0].edited);
    }

    #[test]
    fn bad_config() {
        assert!(SubstitutionTable::extract(&dataset(&[]), 3).is_err());
        assert!(SubstitutionTable::extract(&dataset(&[("a", "a", 1)]), 4).is_err());
    }

    proptest! {
        #[test]
        fn normalized_and_reconstructing(
            raw in proptest::collection::vec(("[abc]{1,5}", "[abcd]{0,5}"), 1..12),
            max_unit in 1usize..=3
        ) {
            let pairs: Vec<(&str, &str, usize)> = raw.iter().map(|(s, t)| (s.as_str(), t.as_str(), 1)).collect();
            let table = SubstitutionTable::extract(&dataset(&pairs), max_unit).unwrap();
            for s in table.sources() {
                let dist = table.get(s).unwrap();
                let sum: f64 = dist.iter().map(|(_, p)| p).sum();
                prop_assert!((sum - 1.0).abs() < 1e-9);
                prop_assert!(dist.iter().all(|(_, p)| *p > 0.0));
                prop_assert!((1..=max_unit).contains(&s.chars().count()));
            }
            for (s, t) in &raw {
                let units = minimal_units(&chars(s), &chars(t), max_unit);
                let src: String = units.iter().map(|u| u.source.as_str()).collect();
                let tgt: String = units.iter().map(|u| u.target.as_str()).collect();
                prop_assert_eq!(&src, s);
                prop_assert_eq!(&tgt, t);
            }
        }
    }
}
