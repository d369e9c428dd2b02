//! A small synthetic historical corpus built from a modern English
//! wordlist with four invertible spelling variations:
//!
//! * word-initial `u` written `v` (`vnto`)
//! * non-final `s` written `ſ` (`ſeaſon`)
//! * `i` before a consonant written `y` (`kyng`)
//! * a final consonant after a, e, o or u doubled (`badd`)
//!
//! Words for which the variations could not be undone unambiguously are
//! left out, so every historical form has exactly one modern reading.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Dataset, Lexicon, Split, TokenPair};
use crate::rules::{position_targets, Backoff, RuleSet};

pub const WORDLIST: &str = include_str!("words.txt");
pub const DEFAULT_SEED: u64 = 1611;

const VOWELS: &str = "aeiouy";
const DOUBLED: &str = "bdgmnpt";
/// Vowels after which a final consonant may be doubled.
const BEFORE_DOUBLE: &str = "aeou";

fn is_consonant(c: char) -> bool {
    c.is_alphabetic() && !VOWELS.contains(c)
}

/// Which variations to apply, in the order listed in the module docs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Variations {
    pub initial_v: bool,
    pub long_s: bool,
    pub y_for_i: bool,
    pub doubled_final: bool,
}

impl Variations {
    pub const ALL: Variations = Variations {
        initial_v: true,
        long_s: true,
        y_for_i: true,
        doubled_final: true,
    };

    fn from_bits(bits: u8) -> Self {
        Variations {
            initial_v: bits & 1 != 0,
            long_s: bits & 2 != 0,
            y_for_i: bits & 4 != 0,
            doubled_final: bits & 8 != 0,
        }
    }

    /// All sixteen combinations.
    pub fn every() -> impl Iterator<Item = Variations> {
        (0u8..16).map(Variations::from_bits)
    }
}

/// Historical spelling of a modern word.
pub fn historicize(word: &str, v: Variations) -> String {
    let mut w: Vec<char> = word.chars().collect();
    let n = w.len();
    if v.doubled_final && n >= 2 && DOUBLED.contains(w[n - 1]) && BEFORE_DOUBLE.contains(w[n - 2]) {
        w.push(w[n - 1]);
    }
    if v.y_for_i {
        for i in 0..w.len().saturating_sub(1) {
            if w[i] == 'i' && is_consonant(w[i + 1]) {
                w[i] = 'y';
            }
        }
    }
    if v.long_s {
        let last = w.len().saturating_sub(1);
        for c in &mut w[..last] {
            if *c == 's' {
                *c = 'ſ';
            }
        }
    }
    if v.initial_v && w.first() == Some(&'u') {
        w[0] = 'v';
    }
    w.into_iter().collect()
}

/// Undoes every variation.
pub fn modernize(form: &str) -> String {
    let mut w: Vec<char> = form
        .chars()
        .map(|c| if c == 'ſ' { 's' } else { c })
        .collect();
    if w.first() == Some(&'v') {
        w[0] = 'u';
    }
    for i in 0..w.len().saturating_sub(1) {
        if w[i] == 'y' && is_consonant(w[i + 1]) {
            w[i] = 'i';
        }
    }
    let n = w.len();
    if n >= 3
        && w[n - 1] == w[n - 2]
        && DOUBLED.contains(w[n - 1])
        && BEFORE_DOUBLE.contains(w[n - 3])
    {
        w.pop();
    }
    w.into_iter().collect()
}

/// Words from `words` whose every historical spelling maps back to them
/// and to no other word.
pub fn invertible_words<'a>(words: &[&'a str]) -> Vec<&'a str> {
    let roundtrips: Vec<&str> = words
        .iter()
        .copied()
        .filter(|w| Variations::every().all(|v| modernize(&historicize(w, v)) == *w))
        .collect();
    let mut readings: BTreeMap<String, BTreeSet<&str>> = BTreeMap::new();
    for &w in &roundtrips {
        for v in Variations::every() {
            readings.entry(historicize(w, v)).or_default().insert(w);
        }
    }
    roundtrips
        .into_iter()
        .filter(|w| Variations::every().all(|v| readings[&historicize(w, v)].len() == 1))
        .collect()
}

pub fn modern_words() -> Vec<&'static str> {
    WORDLIST
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub train_tokens: usize,
    /// Share of the usable vocabulary kept out of training.
    pub held_out_share: f64,
    /// Chance that each applicable variation is used on a token.
    pub variation_rate: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: DEFAULT_SEED,
            train_tokens: 1850,
            held_out_share: 0.25,
            variation_rate: 0.8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub train: Dataset,
    /// One token per held-out word; none of these words occur in training,
    /// but every character context they contain does, with the same
    /// rewrite as its most frequent one in training.
    pub held_out: Dataset,
    /// Held-out words left out for contexts that training lacks or
    /// rewrites differently.
    pub uncovered: Vec<TokenPair>,
    /// The whole modern wordlist.
    pub lexicon: Lexicon,
}

fn sample_variations(rng: &mut ChaCha8Rng, rate: f64) -> Variations {
    Variations {
        initial_v: rng.gen_bool(rate),
        long_s: rng.gen_bool(rate),
        y_for_i: rng.gen_bool(rate),
        doubled_final: rng.gen_bool(rate),
    }
}

/// Deterministic for a given config. Training tokens follow a Zipf-like
/// distribution over the training words.
pub fn generate(config: &SyntheticConfig) -> SyntheticCorpus {
    let all = modern_words();
    let mut usable = invertible_words(&all);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    usable.shuffle(&mut rng);
    let n_held = ((usable.len() as f64) * config.held_out_share).round() as usize;
    let (held, train_words) = usable.split_at(n_held);

    let weights: Vec<f64> = (1..=train_words.len())
        .map(|r| 1.0 / (r as f64).powf(0.8))
        .collect();
    let dist = rand::distributions::WeightedIndex::new(&weights).expect("wordlist is nonempty");
    let mut train = Vec::with_capacity(config.train_tokens);
    for _ in 0..config.train_tokens {
        let w = train_words[rng.sample(&dist)];
        let v = sample_variations(&mut rng, config.variation_rate);
        train.push(TokenPair::new(historicize(w, v), w));
    }
    let mut held_pairs: Vec<TokenPair> = held
        .iter()
        .map(|w| {
            let v = sample_variations(&mut rng, config.variation_rate);
            TokenPair::new(historicize(w, v), *w)
        })
        .collect();
    held_pairs.sort_by(|a, b| a.target.cmp(&b.target));
    let train = Dataset::new("synthetic", Split::Train, train);
    let rules = RuleSet::learn(&train).expect("training tokens were generated");
    let (held_pairs, uncovered) = held_pairs.into_iter().partition(|p| covered(&rules, p));

    SyntheticCorpus {
        train,
        held_out: Dataset::new("synthetic", Split::Test, held_pairs),
        uncovered,
        lexicon: Lexicon::from_words(all),
    }
}

/// Whether every position of `pair` has a context seen in training with
/// the rewrite `pair` needs there.
fn covered(rules: &RuleSet, pair: &TokenPair) -> bool {
    let s: Vec<char> = pair.source.chars().collect();
    let t: Vec<char> = pair.target.chars().collect();
    position_targets(&s, &t)
        .iter()
        .enumerate()
        .all(|(i, gold)| {
            let (opts, level) = rules.options_at(&s, i);
            level == Backoff::Exact && opts.iter().any(|(t, _)| t == gold)
        })
}
