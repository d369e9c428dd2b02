//! Character-level noisy-channel normalizer.
//!
//! A historical word is segmented into source units of up to `max_unit`
//! characters, each rewritten through the substitution table, and the
//! output is scored by a character language model over contemporary
//! forms. Decoding is a monotone beam search.

mod lm;
mod table;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use lm::{train_lm, CharLm, Event, DEFAULT_ORDER};
pub use table::{extract_units, SubstitutionTable, DEFAULT_MAX_UNIT, SMOOTHING};

use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::normalizer::{Candidate, Origin};

/// Log-probability charged for copying a character the table has never
/// seen as a single-character unit.
pub const COPY_PENALTY: f64 = -9.210340371976182; // ln(1e-4)
pub const DEFAULT_BEAM_WIDTH: usize = 10;
pub const DEFAULT_LM_WEIGHT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelConfig {
    pub max_unit: usize,
    pub lm_order: usize,
    pub lm_weight: f64,
    pub beam_width: usize,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            max_unit: DEFAULT_MAX_UNIT,
            lm_order: DEFAULT_ORDER,
            lm_weight: DEFAULT_LM_WEIGHT,
            beam_width: DEFAULT_BEAM_WIDTH,
        }
    }
}

/// One rewrite step of a decoding path.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub source: String,
    pub target: String,
    /// `ln p(target | source)`, or [`COPY_PENALTY`] for copy-through.
    pub log_prob: f64,
}

/// A complete decoding path with its score.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivation {
    pub output: String,
    pub steps: Vec<Step>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub table: SubstitutionTable,
    pub lm: CharLm,
    pub lm_weight: f64,
    pub beam_width: usize,
}

#[derive(Debug, Clone)]
struct Hyp {
    output: Vec<char>,
    steps: Vec<Step>,
    score: f64,
}

fn better(a: &Hyp, b: &Hyp) -> bool {
    a.score > b.score || (a.score == b.score && a.output < b.output)
}

/// Hypotheses that consumed the same number of source characters.
/// Paths with identical output are recombined, keeping the better one.
#[derive(Default)]
struct Bucket {
    hyps: Vec<Hyp>,
    by_output: HashMap<Vec<char>, usize>,
}

impl Bucket {
    fn offer(&mut self, hyp: Hyp) {
        match self.by_output.get(&hyp.output) {
            Some(&i) => {
                if better(&hyp, &self.hyps[i]) {
                    self.hyps[i] = hyp;
                }
            }
            None => {
                self.by_output.insert(hyp.output.clone(), self.hyps.len());
                self.hyps.push(hyp);
            }
        }
    }

    fn into_pruned(self, width: usize) -> Vec<Hyp> {
        let mut hyps = self.hyps;
        hyps.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| a.output.cmp(&b.output))
        });
        hyps.truncate(width);
        hyps
    }
}

impl ChannelModel {
    pub fn new(
        table: SubstitutionTable,
        lm: CharLm,
        lm_weight: f64,
        beam_width: usize,
    ) -> Result<Self> {
        if beam_width < 1 {
            return Err(Error::Config("beam width must be at least 1".into()));
        }
        if !(lm_weight > 0.0 && lm_weight.is_finite()) {
            return Err(Error::Config(format!(
                "lm weight must be positive, got {lm_weight}"
            )));
        }
        Ok(ChannelModel {
            table,
            lm,
            lm_weight,
            beam_width,
        })
    }

    /// Trains the table on `pairs` and the language model on the gold
    /// targets, plus `extra_lm` when given.
    pub fn train(
        pairs: &Dataset,
        extra_lm: Option<&[String]>,
        config: &ChannelConfig,
    ) -> Result<Self> {
        let table = SubstitutionTable::extract(pairs, config.max_unit)?;
        let targets: Vec<String> = pairs.pairs.iter().map(|p| p.target.clone()).collect();
        let lm = CharLm::train(&targets, extra_lm, config.lm_order)?;
        ChannelModel::new(table, lm, config.lm_weight, config.beam_width)
    }

    pub fn with_beam_width(mut self, beam_width: usize) -> Self {
        self.beam_width = beam_width.max(1);
        self
    }

    /// Rewrite options for the source unit starting at `pos` with `len`
    /// characters.
    pub fn options(&self, chars: &[char], pos: usize, len: usize) -> Vec<(String, f64)> {
        let source: String = chars[pos..pos + len].iter().collect();
        match self.table.get(&source) {
            Some(opts) => opts.iter().map(|(t, p)| (t.clone(), p.ln())).collect(),
            None if len == 1 => vec![(source, COPY_PENALTY)],
            None => Vec::new(),
        }
    }

    fn lm_chars(&self, history: &[char], added: &str) -> f64 {
        let mut h = history.to_vec();
        let mut total = 0.0;
        for c in added.chars() {
            total += self.lm.log_prob(&h, Event::Char(c));
            h.push(c);
        }
        total
    }

    /// Best derivation found by the beam search, if any non-empty output
    /// is reachable.
    pub fn decode_derivation(&self, token: &str) -> Option<Derivation> {
        let chars: Vec<char> = token.chars().collect();
        let n = chars.len();
        if n == 0 {
            return None;
        }
        let max_unit = self.table.max_unit().max(1);
        let mut buckets: Vec<Bucket> = (0..=n).map(|_| Bucket::default()).collect();
        buckets[0].offer(Hyp {
            output: Vec::new(),
            steps: Vec::new(),
            score: 0.0,
        });
        for pos in 0..n {
            let frontier = std::mem::take(&mut buckets[pos]).into_pruned(self.beam_width);
            for hyp in &frontier {
                for len in 1..=max_unit.min(n - pos) {
                    for (target, log_p) in self.options(&chars, pos, len) {
                        let mut score = hyp.score
                            + log_p
                            + self.lm_weight * self.lm_chars(&hyp.output, &target);
                        let mut output = hyp.output.clone();
                        output.extend(target.chars());
                        let end = pos + len;
                        if end == n {
                            if output.is_empty() {
                                continue;
                            }
                            score += self.lm_weight * self.lm.log_prob(&output, Event::End);
                        }
                        let mut steps = hyp.steps.clone();
                        steps.push(Step {
                            source: chars[pos..end].iter().collect(),
                            target,
                            log_prob: log_p,
                        });
                        buckets[end].offer(Hyp {
                            output,
                            steps,
                            score,
                        });
                    }
                }
            }
        }
        let last = std::mem::take(&mut buckets[n]).into_pruned(1);
        last.into_iter().next().map(|h| Derivation {
            output: h.output.into_iter().collect(),
            steps: h.steps,
            score: h.score,
        })
    }

    /// Recomputes the score of a derivation from its parts.
    pub fn rescore(&self, steps: &[Step]) -> f64 {
        let channel: f64 = steps.iter().map(|s| s.log_prob).sum();
        let output: String = steps.iter().map(|s| s.target.as_str()).collect();
        channel + self.lm_weight * self.lm.score_word(&output)
    }

    pub fn decode(&self, token: &str) -> Candidate {
        match self.decode_derivation(token) {
            Some(d) => Candidate::new(d.output, d.score, Origin::Channel),
            None => Candidate::identity(token),
        }
    }
}

pub fn decode(model: &ChannelModel, token: &str) -> Candidate {
    model.decode(token)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Split, TokenPair};

    fn dataset(pairs: &[(&str, &str, usize)]) -> Dataset {
        let mut v = Vec::new();
        for &(s, t, n) in pairs {
            v.extend(std::iter::repeat_n(TokenPair::new(s, t), n));
        }
        Dataset::new("t", Split::Train, v)
    }

    #[test]
    fn toy_model_rewrites() {
        let m = ChannelModel::train(
            &dataset(&[("vn", "un", 20)]),
            None,
            &ChannelConfig::default(),
        )
        .unwrap();
        let c = m.decode("vn");
        assert_eq!(c.form, "un");
        assert_eq!(c.origin, Origin::Channel);
    }

    #[test]
    fn empty_table_copies_through() {
        let lm = CharLm::train(&["abc"], None, 3).unwrap();
        let m = ChannelModel::new(SubstitutionTable::empty(3), lm, 1.0, 5).unwrap();
        for w in ["abc", "xyz", "a"] {
            let d = m.decode_derivation(w).unwrap();
            assert_eq!(d.output, w);
            assert!(d.steps.iter().all(|s| s.log_prob == COPY_PENALTY));
        }
    }

    #[test]
    fn stored_score_matches_rescoring() {
        let m = ChannelModel::train(
            &dataset(&[
                ("vnd", "und", 5),
                ("ſo", "so", 3),
                ("ther", "there", 2),
                ("yn", "in", 4),
            ]),
            None,
            &ChannelConfig::default(),
        )
        .unwrap();
        for w in ["vnd", "ſo", "ther", "yn", "vſe", "q"] {
            let d = m.decode_derivation(w).unwrap();
            assert!((d.score - m.rescore(&d.steps)).abs() < 1e-9, "{w}");
        }
    }

    #[test]
    fn invalid_parameters() {
        let lm = CharLm::train(&["a"], None, 2).unwrap();
        assert!(ChannelModel::new(SubstitutionTable::empty(3), lm.clone(), 1.0, 0).is_err());
        assert!(ChannelModel::new(SubstitutionTable::empty(3), lm, 0.0, 3).is_err());
    }

    #[test]
    fn deterministic_serialization() {
        let d = dataset(&[("vnd", "und", 5), ("ther", "there", 2)]);
        let a = ChannelModel::train(&d, None, &ChannelConfig::default()).unwrap();
        let b = ChannelModel::train(&d, None, &ChannelConfig::default()).unwrap();
        let sa = serde_json::to_string(&a).unwrap();
        assert_eq!(sa, serde_json::to_string(&b).unwrap());
        let back: ChannelModel = serde_json::from_str(&sa).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.decode("vnd"), a.decode("vnd"));
    }
}
