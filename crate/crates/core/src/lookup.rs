//! Memorization baseline: every seen historical type maps to its most
//! frequent training normalization.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{decode_lines, Dataset};
use crate::error::{Error, Result};
use crate::normalizer::{Candidate, Origin};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LookupEntry {
    pub target: String,
    pub count: u64,
    pub total: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LookupTable {
    pub mapping: BTreeMap<String, LookupEntry>,
}

/// Per-source majority target. Ties go to the target that sorts first.
pub fn majority_map<'a, I>(pairs: I) -> BTreeMap<String, LookupEntry>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let mut counts: BTreeMap<&str, BTreeMap<&str, u64>> = BTreeMap::new();
    for (s, t) in pairs {
        *counts.entry(s).or_default().entry(t).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .map(|(source, targets)| {
            let total = targets.values().sum();
            // BTreeMap iterates targets in order, so the first maximum wins
            let (target, count) =
                targets.into_iter().fold(
                    ("", 0u64),
                    |best, (t, c)| {
                        if c > best.1 {
                            (t, c)
                        } else {
                            best
                        }
                    },
                );
            (
                source.to_string(),
                LookupEntry {
                    target: target.to_string(),
                    count,
                    total,
                },
            )
        })
        .collect()
}

impl LookupTable {
    pub fn train(pairs: &Dataset) -> LookupTable {
        LookupTable {
            mapping: majority_map(
                pairs
                    .pairs
                    .iter()
                    .map(|p| (p.source.as_str(), p.target.as_str())),
            ),
        }
    }

    pub fn get(&self, token: &str) -> Option<&LookupEntry> {
        self.mapping.get(token)
    }

    pub fn normalize(&self, token: &str) -> Candidate {
        match self.mapping.get(token) {
            Some(e) => Candidate::new(
                e.target.clone(),
                (e.count as f64 / e.total as f64).ln(),
                Origin::Lookup,
            ),
            None => Candidate::identity(token),
        }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    /// `source<TAB>target<TAB>count<TAB>total` lines sorted by source.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (s, e) in &self.mapping {
            out.push_str(&format!("{s}\t{}\t{}\t{}\n", e.target, e.count, e.total));
        }
        out
    }

    pub fn from_tsv(bytes: &[u8]) -> Result<LookupTable> {
        let mut mapping = BTreeMap::new();
        for (idx, line) in decode_lines(bytes)?.into_iter().enumerate() {
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: idx + 1,
                message,
            };
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(err(format!("expected 4 columns, found {}", cols.len())));
            }
            let count: u64 = cols[2]
                .parse()
                .map_err(|e| err(format!("bad count: {e}")))?;
            let total: u64 = cols[3]
                .parse()
                .map_err(|e| err(format!("bad total: {e}")))?;
            if count == 0 || count > total {
                return Err(err(format!(
                    "need 1 <= count <= total, got {count}/{total}"
                )));
            }
            mapping.insert(
                cols[0].to_string(),
                LookupEntry {
                    target: cols[1].to_string(),
                    count,
                    total,
                },
            );
        }
        Ok(LookupTable { mapping })
    }
}

pub fn train_lookup(pairs: &Dataset) -> LookupTable {
    LookupTable::train(pairs)
}

pub fn lookup_normalize(table: &LookupTable, token: &str) -> Candidate {
    table.normalize(token)
}
