//! Context-aware character rewrite rules induced from aligned pairs.
//!
//! Every source character is rewritten by exactly one rule keyed by the
//! character and its immediate source-side neighbours (`#` at word edges).
//! Inserted characters are folded into the rule of the preceding source
//! character, or the following one at the start of a word.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::align::{align_chars, UnitCosts};
use crate::corpus::{decode_lines, Dataset};
use crate::distance::pair_counts;
use crate::error::{Error, Result};
use crate::normalizer::{Candidate, Origin};

pub const BOUNDARY: char = '#';

/// Left or right neighbour of a source character; `None` is the word edge.
pub type Context = Option<char>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RuleKey {
    pub source: char,
    pub left: Context,
    pub right: Context,
}

impl fmt::Display for RuleKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ctx = |c: Context| c.unwrap_or(BOUNDARY);
        write!(
            f,
            "{} | {}_{}",
            self.source,
            ctx(self.left),
            ctx(self.right)
        )
    }
}

/// A single rule with its training count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub key: RuleKey,
    pub target: String,
    pub count: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<RuleLine>", into = "Vec<RuleLine>")]
pub struct RuleSet {
    rules: BTreeMap<RuleKey, BTreeMap<String, u64>>,
    totals: BTreeMap<RuleKey, u64>,
    // aggregation over all contexts, the first backoff level
    context_free: BTreeMap<char, BTreeMap<String, u64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RuleLine {
    left: Context,
    source: char,
    right: Context,
    target: String,
    count: u64,
}

impl From<Vec<RuleLine>> for RuleSet {
    fn from(lines: Vec<RuleLine>) -> Self {
        let mut set = RuleSet::default();
        for l in lines {
            set.add(
                RuleKey {
                    source: l.source,
                    left: l.left,
                    right: l.right,
                },
                l.target,
                l.count,
            );
        }
        set
    }
}

impl From<RuleSet> for Vec<RuleLine> {
    fn from(set: RuleSet) -> Self {
        set.iter()
            .map(|r| RuleLine {
                left: r.key.left,
                source: r.key.source,
                right: r.key.right,
                target: r.target,
                count: r.count,
            })
            .collect()
    }
}

/// Target string for each source position of an alignment.
pub(crate) fn position_targets(source: &[char], target: &[char]) -> Vec<String> {
    let ops = align_chars(source, target, &UnitCosts).ops;
    let mut out: Vec<String> = Vec::with_capacity(source.len());
    let mut prefix = String::new();
    for op in ops {
        match op.source {
            Some(_) => {
                let mut t = std::mem::take(&mut prefix);
                t.extend(op.target);
                out.push(t);
            }
            None => match out.last_mut() {
                Some(last) => last.extend(op.target),
                None => prefix.extend(op.target),
            },
        }
    }
    out
}

fn key_at(chars: &[char], i: usize) -> RuleKey {
    RuleKey {
        source: chars[i],
        left: i.checked_sub(1).map(|j| chars[j]),
        right: chars.get(i + 1).copied(),
    }
}

fn best_of(dist: &BTreeMap<String, u64>) -> (&str, u64) {
    // first maximum in key order
    dist.iter().fold(
        ("", 0),
        |best, (t, &c)| if c > best.1 { (t.as_str(), c) } else { best },
    )
}

/// Backoff level that supplied a position's distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backoff {
    Exact,
    ContextFree,
    Identity,
}

impl RuleSet {
    fn add(&mut self, key: RuleKey, target: String, count: u64) {
        *self
            .context_free
            .entry(key.source)
            .or_default()
            .entry(target.clone())
            .or_insert(0) += count;
        *self
            .rules
            .entry(key)
            .or_default()
            .entry(target)
            .or_insert(0) += count;
        *self.totals.entry(key).or_insert(0) += count;
    }

    pub fn learn(pairs: &Dataset) -> Result<RuleSet> {
        if pairs.is_empty() {
            return Err(Error::Training(
                "cannot learn rules from an empty dataset".into(),
            ));
        }
        let mut set = RuleSet::default();
        for ((s, t), n) in pair_counts(pairs) {
            let s: Vec<char> = s.chars().collect();
            let t: Vec<char> = t.chars().collect();
            if s.is_empty() {
                continue;
            }
            for (i, target) in position_targets(&s, &t).into_iter().enumerate() {
                set.add(key_at(&s, i), target, n);
            }
        }
        Ok(set)
    }

    pub fn iter(&self) -> impl Iterator<Item = Rule> + '_ {
        self.rules.iter().flat_map(|(key, targets)| {
            targets.iter().map(move |(t, &c)| Rule {
                key: *key,
                target: t.clone(),
                count: c,
            })
        })
    }

    pub fn len(&self) -> usize {
        self.rules.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn context_total(&self, key: &RuleKey) -> u64 {
        self.totals.get(key).copied().unwrap_or(0)
    }

    pub fn count(&self, key: &RuleKey, target: &str) -> u64 {
        self.rules
            .get(key)
            .and_then(|d| d.get(target))
            .copied()
            .unwrap_or(0)
    }

    /// Rewrite options at position `i` with their probabilities, and the
    /// backoff level they came from.
    pub fn options_at(&self, chars: &[char], i: usize) -> (Vec<(String, f64)>, Backoff) {
        let key = key_at(chars, i);
        let (dist, level) = match self.rules.get(&key) {
            Some(d) => (d, Backoff::Exact),
            None => match self.context_free.get(&key.source) {
                Some(d) => (d, Backoff::ContextFree),
                None => return (vec![(key.source.to_string(), 1.0)], Backoff::Identity),
            },
        };
        let total: u64 = dist.values().sum();
        let opts = dist
            .iter()
            .map(|(t, &c)| (t.clone(), c as f64 / total as f64))
            .collect();
        (opts, level)
    }

    /// Applies the most probable rule at every position independently.
    pub fn apply(&self, token: &str) -> Candidate {
        let chars: Vec<char> = token.chars().collect();
        let mut form = String::with_capacity(token.len());
        let mut score = 0.0;
        let mut any_rule = false;
        for i in 0..chars.len() {
            let key = key_at(&chars, i);
            let dist = self
                .rules
                .get(&key)
                .or_else(|| self.context_free.get(&key.source));
            match dist {
                Some(d) => {
                    any_rule = true;
                    let (t, c) = best_of(d);
                    let total: u64 = d.values().sum();
                    form.push_str(t);
                    score += (c as f64 / total as f64).ln();
                }
                None => form.push(key.source),
            }
        }
        if !any_rule || form.is_empty() {
            return Candidate::identity(token);
        }
        Candidate::new(form, score, Origin::Rules)
    }

    /// Sorted `left<TAB>source<TAB>right<TAB>target<TAB>count` lines; `#`
    /// marks a word edge, literal `#` and `\` are backslash-escaped.
    pub fn to_tsv(&self) -> String {
        let esc = |c: char| match c {
            '#' | '\\' => format!("\\{c}"),
            c => c.to_string(),
        };
        let ctx = |c: Context| c.map(esc).unwrap_or_else(|| BOUNDARY.to_string());
        let mut out = String::new();
        for r in self.iter() {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                ctx(r.key.left),
                esc(r.key.source),
                ctx(r.key.right),
                r.target,
                r.count
            ));
        }
        out
    }

    pub fn from_tsv(bytes: &[u8]) -> Result<RuleSet> {
        fn unesc(s: &str) -> Option<char> {
            let mut it = s.chars();
            match (it.next(), it.next(), it.next()) {
                (Some('\\'), Some(c), None) => Some(c),
                (Some(c), None, None) if c != '\\' => Some(c),
                _ => None,
            }
        }
        fn ctx(s: &str) -> Option<Context> {
            if s == "#" {
                Some(None)
            } else {
                unesc(s).map(Some)
            }
        }
        let mut set = RuleSet::default();
        for (idx, line) in decode_lines(bytes)?.into_iter().enumerate() {
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: idx + 1,
                message,
            };
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 5 {
                return Err(err(format!("expected 5 columns, found {}", cols.len())));
            }
            let left = ctx(cols[0]).ok_or_else(|| err("bad left context".into()))?;
            let source = unesc(cols[1]).ok_or_else(|| err("bad source character".into()))?;
            let right = ctx(cols[2]).ok_or_else(|| err("bad right context".into()))?;
            let count: u64 = cols[4]
                .parse()
                .map_err(|e| err(format!("bad count: {e}")))?;
            if count == 0 {
                return Err(err("rule count must be positive".into()));
            }
            set.add(
                RuleKey {
                    source,
                    left,
                    right,
                },
                cols[3].to_string(),
                count,
            );
        }
        Ok(set)
    }
}

pub fn learn_rules(pairs: &Dataset) -> Result<RuleSet> {
    RuleSet::learn(pairs)
}

pub fn apply_rules(rules: &RuleSet, token: &str) -> Candidate {
    rules.apply(token)
}
