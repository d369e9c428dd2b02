//! Character n-gram language model with interpolated Witten–Bell smoothing.
//!
//! Words are padded on the left with begin markers and terminated by an
//! explicit end event. The base distribution is uniform over the observed
//! alphabet plus the end event and an unknown-character class, so every
//! conditional distribution sums to one over that event set.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ORDER: usize = 5;

/// Begin-of-word padding inside contexts.
const BOS: char = '\u{2}';
/// End-of-word event.
const EOS: char = '\u{3}';
/// Stands for every character outside the training alphabet.
const UNK: char = '\u{1A}';

/// A predicted event: a character or the end of the word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Event {
    Char(char),
    End,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct ContextStats {
    total: u64,
    followers: HashMap<char, u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LmRepr {
    order: usize,
    counts: BTreeMap<String, BTreeMap<char, u64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "LmRepr", into = "LmRepr")]
pub struct CharLm {
    order: usize,
    counts: BTreeMap<String, BTreeMap<char, u64>>,
    // derived
    stats: HashMap<String, ContextStats>,
    alphabet: BTreeSet<char>,
}

impl PartialEq for CharLm {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.counts == other.counts
    }
}

impl From<LmRepr> for CharLm {
    fn from(r: LmRepr) -> Self {
        CharLm::from_counts(r.order, r.counts)
    }
}

impl From<CharLm> for LmRepr {
    fn from(lm: CharLm) -> Self {
        LmRepr {
            order: lm.order,
            counts: lm.counts,
        }
    }
}

impl CharLm {
    /// Trains on `targets`, with `extra` appended as additional material.
    pub fn train<S: AsRef<str>>(
        targets: &[S],
        extra: Option<&[S]>,
        order: usize,
    ) -> Result<CharLm> {
        if order < 1 {
            return Err(Error::Config(
                "language model order must be at least 1".into(),
            ));
        }
        let extra = extra.unwrap_or(&[]);
        if targets.is_empty() && extra.is_empty() {
            return Err(Error::Training(
                "language model needs at least one training string".into(),
            ));
        }
        let mut counts: BTreeMap<String, BTreeMap<char, u64>> = BTreeMap::new();
        for word in targets.iter().chain(extra) {
            let mut padded: Vec<char> = std::iter::repeat_n(BOS, order - 1).collect();
            padded.extend(
                word.as_ref()
                    .chars()
                    .map(|c| if is_reserved(c) { UNK } else { c }),
            );
            padded.push(EOS);
            for j in order - 1..padded.len() {
                for k in 0..order {
                    let ctx: String = padded[j - k..j].iter().collect();
                    *counts.entry(ctx).or_default().entry(padded[j]).or_insert(0) += 1;
                }
            }
        }
        Ok(CharLm::from_counts(order, counts))
    }

    fn from_counts(order: usize, counts: BTreeMap<String, BTreeMap<char, u64>>) -> CharLm {
        let mut alphabet = BTreeSet::new();
        let stats = counts
            .iter()
            .map(|(ctx, next)| {
                alphabet.extend(next.keys().copied().filter(|&c| c != EOS));
                let stats = ContextStats {
                    total: next.values().sum(),
                    followers: next.iter().map(|(&c, &n)| (c, n)).collect(),
                };
                (ctx.clone(), stats)
            })
            .collect();
        CharLm {
            order,
            counts,
            stats,
            alphabet,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Characters seen in training.
    pub fn alphabet(&self) -> impl Iterator<Item = char> + '_ {
        self.alphabet.iter().copied()
    }

    /// Size of the event set the distributions are defined over:
    /// alphabet, end event and the unknown class.
    pub fn vocab_size(&self) -> usize {
        self.alphabet.len() + if self.alphabet.contains(&UNK) { 1 } else { 2 }
    }

    fn symbol(&self, event: Event) -> char {
        match event {
            Event::End => EOS,
            Event::Char(c) if self.alphabet.contains(&c) && !is_reserved(c) => c,
            Event::Char(_) => UNK,
        }
    }

    /// `p(event | history)`, where `history` holds the word so far.
    pub fn prob(&self, history: &[char], event: Event) -> f64 {
        let sym = self.symbol(event);
        let width = self.order - 1;
        // last `width` symbols of the padded history
        let mut ctx: Vec<char> = Vec::with_capacity(width);
        let have = history.len().min(width);
        ctx.extend(std::iter::repeat_n(BOS, width - have));
        ctx.extend(history[history.len() - have..].iter().map(|&c| {
            if self.alphabet.contains(&c) && !is_reserved(c) {
                c
            } else {
                UNK
            }
        }));

        let mut p = 1.0 / self.vocab_size() as f64;
        let mut key = String::with_capacity(width * 4);
        for k in 0..=width {
            key.clear();
            key.extend(&ctx[width - k..]);
            let Some(stats) = self.stats.get(&key) else {
                // longer contexts cannot exist either
                break;
            };
            let types = stats.followers.len() as f64;
            let c = stats.followers.get(&sym).copied().unwrap_or(0) as f64;
            p = (c + types * p) / (stats.total as f64 + types);
        }
        p
    }

    pub fn log_prob(&self, history: &[char], event: Event) -> f64 {
        self.prob(history, event).ln()
    }

    /// Log-probability of a whole word including its end event.
    pub fn score_word(&self, word: &str) -> f64 {
        let chars: Vec<char> = word.chars().collect();
        let mut total = 0.0;
        for i in 0..chars.len() {
            total += self.log_prob(&chars[..i], Event::Char(chars[i]));
        }
        total + self.log_prob(&chars, Event::End)
    }

    /// Contexts that occur in training, as histories usable with [`prob`].
    /// Begin padding is dropped.
    ///
    /// [`prob`]: CharLm::prob
    pub fn histories(&self) -> Vec<Vec<char>> {
        self.counts
            .keys()
            .map(|k| k.chars().filter(|&c| c != BOS).collect())
            .collect()
    }
}

fn is_reserved(c: char) -> bool {
    c == BOS || c == EOS || c == UNK
}

pub fn train_lm<S: AsRef<str>>(
    targets: &[S],
    extra_corpus: Option<&[S]>,
    order: usize,
) -> Result<CharLm> {
    CharLm::train(targets, extra_corpus, order)
}
