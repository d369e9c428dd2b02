//! Weighted-Levenshtein normalization against a contemporary lexicon.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::align::{align_chars, bounded_distance, EditCosts};
use crate::corpus::{decode_lines, Dataset, Lexicon};
use crate::error::{Error, Result};
use crate::normalizer::{Candidate, Origin};

/// Lower bound for learned costs so that no edit becomes free.
pub const MIN_COST: f64 = 0.01;
pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_ITERATIONS: usize = 2;

/// Zero or one character on either side of an edit.
pub type Segment = Option<char>;

fn seg_str(s: Segment) -> String {
    s.map(String::from).unwrap_or_default()
}

fn parse_seg(s: &str) -> Option<Segment> {
    let mut it = s.chars();
    match (it.next(), it.next()) {
        (None, _) => Some(None),
        (Some(c), None) => Some(Some(c)),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct WeightEntry {
    source: String,
    target: String,
    cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct WeightRepr {
    default_cost: f64,
    entries: Vec<WeightEntry>,
}

/// Costs for non-match edit operations; matches always cost 0 and
/// operations without an entry cost `default_cost`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightRepr", into = "WeightRepr")]
pub struct EditWeightMatrix {
    costs: HashMap<(Segment, Segment), f64>,
    default_cost: f64,
    min_indel: f64,
}

impl Default for EditWeightMatrix {
    fn default() -> Self {
        EditWeightMatrix::unit()
    }
}

impl EditWeightMatrix {
    pub fn unit() -> Self {
        EditWeightMatrix::from_costs(HashMap::new(), 1.0)
    }

    fn from_costs(costs: HashMap<(Segment, Segment), f64>, default_cost: f64) -> Self {
        let min_indel = costs
            .iter()
            .filter(|((s, t), _)| s.is_none() || t.is_none())
            .map(|(_, &c)| c)
            .fold(default_cost, f64::min);
        EditWeightMatrix {
            costs,
            default_cost,
            min_indel,
        }
    }

    /// Builds a matrix from explicit entries. Match entries (`c → c`) and
    /// empty-to-empty entries are rejected.
    pub fn with_costs<I>(entries: I, default_cost: f64) -> Result<Self>
    where
        I: IntoIterator<Item = ((Segment, Segment), f64)>,
    {
        if !(default_cost > 0.0 && default_cost.is_finite()) {
            return Err(Error::Format(format!(
                "default cost must be positive, got {default_cost}"
            )));
        }
        let mut costs = HashMap::new();
        for ((s, t), c) in entries {
            if s == t {
                return Err(Error::Format(format!(
                    "entry '{}' → '{}' is not an edit operation",
                    seg_str(s),
                    seg_str(t)
                )));
            }
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::Format(format!("invalid cost {c}")));
            }
            costs.insert((s, t), c);
        }
        Ok(EditWeightMatrix::from_costs(costs, default_cost))
    }

    pub fn default_cost(&self) -> f64 {
        self.default_cost
    }

    /// Cost of an operation; `(Some(c), Some(c))` is a match and costs 0.
    pub fn cost(&self, source: Segment, target: Segment) -> f64 {
        if source == target {
            return 0.0;
        }
        self.costs
            .get(&(source, target))
            .copied()
            .unwrap_or(self.default_cost)
    }

    pub fn learned(&self) -> impl Iterator<Item = ((Segment, Segment), f64)> + '_ {
        self.costs.iter().map(|(&k, &v)| (k, v))
    }

    /// Cheapest insertion or deletion; lower-bounds the cost of a length
    /// difference of one.
    pub fn min_indel_cost(&self) -> f64 {
        self.min_indel
    }

    fn sorted_entries(&self) -> Vec<WeightEntry> {
        let sorted: BTreeMap<(String, String), f64> = self
            .costs
            .iter()
            .map(|(&(s, t), &c)| ((seg_str(s), seg_str(t)), c))
            .collect();
        sorted
            .into_iter()
            .map(|((source, target), cost)| WeightEntry {
                source,
                target,
                cost,
            })
            .collect()
    }

    /// `#default_cost<TAB>c` header followed by sorted
    /// `source<TAB>target<TAB>cost` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("#default_cost\t{}\n", self.default_cost);
        for e in self.sorted_entries() {
            out.push_str(&format!("{}\t{}\t{}\n", e.source, e.target, e.cost));
        }
        out
    }

    pub fn from_tsv(bytes: &[u8]) -> Result<Self> {
        let lines = decode_lines(bytes)?;
        let mut default_cost = None;
        let mut entries = Vec::new();
        for (idx, line) in lines.into_iter().enumerate() {
            let err = |message: String| Error::Parse {
                line: idx + 1,
                message,
            };
            if let Some(rest) = line.strip_prefix("#default_cost\t") {
                let c: f64 = rest
                    .parse()
                    .map_err(|e| err(format!("bad default cost: {e}")))?;
                default_cost = Some(c);
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(err(format!("expected 3 columns, found {}", cols.len())));
            }
            let s = parse_seg(cols[0]).ok_or_else(|| err("segment longer than 1 char".into()))?;
            let t = parse_seg(cols[1]).ok_or_else(|| err("segment longer than 1 char".into()))?;
            let c: f64 = cols[2].parse().map_err(|e| err(format!("bad cost: {e}")))?;
            entries.push(((s, t), c));
        }
        let default_cost =
            default_cost.ok_or_else(|| Error::Format("missing #default_cost header".into()))?;
        EditWeightMatrix::with_costs(entries, default_cost)
    }
}

impl From<EditWeightMatrix> for WeightRepr {
    fn from(m: EditWeightMatrix) -> Self {
        WeightRepr {
            default_cost: m.default_cost,
            entries: m.sorted_entries(),
        }
    }
}

impl TryFrom<WeightRepr> for EditWeightMatrix {
    type Error = Error;

    fn try_from(r: WeightRepr) -> Result<Self> {
        let mut entries = Vec::with_capacity(r.entries.len());
        for e in r.entries {
            let s = parse_seg(&e.source)
                .ok_or_else(|| Error::Format(format!("bad segment '{}'", e.source)))?;
            let t = parse_seg(&e.target)
                .ok_or_else(|| Error::Format(format!("bad segment '{}'", e.target)))?;
            entries.push(((s, t), e.cost));
        }
        EditWeightMatrix::with_costs(entries, r.default_cost)
    }
}

impl EditCosts for EditWeightMatrix {
    fn substitute(&self, a: char, b: char) -> f64 {
        self.cost(Some(a), Some(b))
    }

    fn delete(&self, a: char) -> f64 {
        self.cost(Some(a), None)
    }

    fn insert(&self, b: char) -> f64 {
        self.cost(None, Some(b))
    }
}

/// Distinct (source, target) pairs with token counts, in sorted order.
pub(crate) fn pair_counts(pairs: &Dataset) -> BTreeMap<(&str, &str), u64> {
    let mut counts = BTreeMap::new();
    for p in &pairs.pairs {
        *counts
            .entry((p.source.as_str(), p.target.as_str()))
            .or_insert(0) += 1;
    }
    counts
}

/// Estimates edit costs by repeated re-alignment. Each round aligns every
/// pair under the current costs, counts non-match operations and sets
/// `cost(op) = -ln(count(op) / total)` scaled into `(0, 1]` by the largest
/// such value (floored at [`MIN_COST`]).
pub fn learn_weights(pairs: &Dataset, iterations: usize) -> Result<EditWeightMatrix> {
    if pairs.is_empty() {
        return Err(Error::Training(
            "cannot learn edit weights from an empty dataset".into(),
        ));
    }
    if iterations == 0 {
        return Err(Error::Config("iterations must be at least 1".into()));
    }
    let distinct: Vec<(Vec<char>, Vec<char>, u64)> = pair_counts(pairs)
        .into_iter()
        .map(|((s, t), n)| (s.chars().collect(), t.chars().collect(), n))
        .collect();

    let mut weights = EditWeightMatrix::unit();
    for _ in 0..iterations {
        let mut counts: BTreeMap<(Segment, Segment), u64> = BTreeMap::new();
        for (s, t, n) in &distinct {
            for op in align_chars(s, t, &weights).ops {
                if !op.is_match() {
                    *counts.entry((op.source, op.target)).or_insert(0) += n;
                }
            }
        }
        let total: u64 = counts.values().sum();
        if total == 0 {
            weights = EditWeightMatrix::unit();
            continue;
        }
        let raw: Vec<((Segment, Segment), f64)> = counts
            .into_iter()
            .map(|(op, c)| (op, -(c as f64 / total as f64).ln()))
            .collect();
        let max_raw = raw.iter().map(|(_, r)| *r).fold(0.0, f64::max);
        let scaled = raw.into_iter().map(|(op, r)| {
            let c = if max_raw > 0.0 { r / max_raw } else { 0.0 };
            (op, c.max(MIN_COST))
        });
        weights = EditWeightMatrix::with_costs(scaled, 1.0)?;
    }
    Ok(weights)
}

#[derive(Debug, Clone)]
struct LexEntry {
    chars: Vec<char>,
    word: String,
    freq: u64,
}

/// Lexicon entries bucketed by length in characters.
#[derive(Debug, Clone, Default)]
struct LengthIndex {
    buckets: Vec<Vec<LexEntry>>,
}

impl LengthIndex {
    fn build(lexicon: &Lexicon) -> Self {
        let mut buckets: Vec<Vec<LexEntry>> = Vec::new();
        for (word, freq) in lexicon.iter() {
            let chars: Vec<char> = word.chars().collect();
            if buckets.len() <= chars.len() {
                buckets.resize_with(chars.len() + 1, Vec::new);
            }
            buckets[chars.len()].push(LexEntry {
                chars,
                word: word.to_string(),
                freq,
            });
        }
        LengthIndex { buckets }
    }

    /// Bucket lengths ordered by distance from `n`, shorter first on ties.
    fn lengths_around(&self, n: usize) -> Vec<usize> {
        let mut lens: Vec<usize> = (0..self.buckets.len())
            .filter(|&l| !self.buckets[l].is_empty())
            .collect();
        lens.sort_by_key(|&l| (l.abs_diff(n), l));
        lens
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DistanceRepr {
    weights: EditWeightMatrix,
    threshold: f64,
    lexicon: Lexicon,
}

/// Learned weights plus the lexicon they search.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "DistanceRepr", into = "DistanceRepr")]
pub struct DistanceModel {
    pub weights: EditWeightMatrix,
    pub threshold: f64,
    pub lexicon: Lexicon,
    index: LengthIndex,
}

impl PartialEq for DistanceModel {
    fn eq(&self, other: &Self) -> bool {
        self.weights == other.weights
            && self.threshold == other.threshold
            && self.lexicon == other.lexicon
    }
}

impl From<DistanceRepr> for DistanceModel {
    fn from(r: DistanceRepr) -> Self {
        DistanceModel::new(r.weights, r.lexicon, r.threshold)
    }
}

impl From<DistanceModel> for DistanceRepr {
    fn from(m: DistanceModel) -> Self {
        DistanceRepr {
            weights: m.weights,
            threshold: m.threshold,
            lexicon: m.lexicon,
        }
    }
}

/// Best lexicon match for a token, before thresholding.
#[derive(Debug, Clone, PartialEq)]
pub struct Nearest {
    pub word: String,
    pub distance: f64,
    pub frequency: u64,
}

impl DistanceModel {
    pub fn new(weights: EditWeightMatrix, lexicon: Lexicon, threshold: f64) -> Self {
        let index = LengthIndex::build(&lexicon);
        DistanceModel {
            weights,
            threshold,
            lexicon,
            index,
        }
    }

    pub fn train(
        pairs: &Dataset,
        lexicon: Lexicon,
        iterations: usize,
        threshold: f64,
    ) -> Result<Self> {
        if lexicon.is_empty() {
            return Err(Error::Config(
                "distance normalization needs a non-empty lexicon".into(),
            ));
        }
        if threshold.is_nan() || threshold <= 0.0 {
            return Err(Error::Config(format!(
                "threshold must be positive, got {threshold}"
            )));
        }
        let weights = learn_weights(pairs, iterations)?;
        Ok(DistanceModel::new(weights, lexicon, threshold))
    }

    /// Nearest lexicon entry with distance at most `bound`. Ties go to the
    /// more frequent entry, then to the lexicographically smaller one.
    pub fn nearest_within(&self, token: &str, bound: f64) -> Option<Nearest> {
        let tok: Vec<char> = token.chars().collect();
        let min_indel = self.weights.min_indel_cost();
        let mut bound = bound;
        let mut best: Option<&LexEntry> = None;
        let mut best_dist = f64::INFINITY;
        for len in self.index.lengths_around(tok.len()) {
            // admissible: a length gap needs at least that many indels
            if len.abs_diff(tok.len()) as f64 * min_indel > bound {
                break;
            }
            for entry in &self.index.buckets[len] {
                let Some(d) = bounded_distance(&tok, &entry.chars, &self.weights, bound) else {
                    continue;
                };
                let better = match best {
                    None => true,
                    Some(b) => {
                        d < best_dist
                            || (d == best_dist
                                && (entry.freq > b.freq
                                    || (entry.freq == b.freq && entry.word < b.word)))
                    }
                };
                if better {
                    best = Some(entry);
                    best_dist = d;
                    bound = d;
                }
            }
        }
        best.map(|e| Nearest {
            word: e.word.clone(),
            distance: best_dist,
            frequency: e.freq,
        })
    }

    pub fn nearest(&self, token: &str) -> Option<Nearest> {
        self.nearest_within(token, f64::INFINITY)
    }

    fn allowed_distance(&self, token: &str) -> f64 {
        self.threshold * token.chars().count().max(1) as f64
    }

    /// Nearest entry if its length-normalized distance is within the
    /// threshold; the identity candidate otherwise.
    pub fn normalize(&self, token: &str) -> Candidate {
        match self.nearest_within(token, self.allowed_distance(token)) {
            Some(n) => Candidate::new(n.word, -n.distance, Origin::Distance),
            None => Candidate::identity(token),
        }
    }

    /// Whether `normalize` produced a lexicon-backed answer.
    pub fn fires(&self, candidate: &Candidate) -> bool {
        candidate.origin == Origin::Distance
    }
}

/// Free-function form of [`DistanceModel::normalize`] with an explicit
/// threshold.
pub fn distance_normalize(
    weights: &EditWeightMatrix,
    lexicon: &Lexicon,
    token: &str,
    threshold: f64,
) -> Candidate {
    DistanceModel::new(weights.clone(), lexicon.clone(), threshold).normalize(token)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::{distance_chars, UnitCosts};
    use crate::corpus::{Split, TokenPair};
    use proptest::prelude::*;

    fn dataset(pairs: &[(&str, &str, usize)]) -> Dataset {
        let mut v = Vec::new();
        for &(s, t, n) in pairs {
            for _ in 0..n {
                v.push(TokenPair::new(s, t));
            }
        }
        Dataset::new("t", Split::Train, v)
    }

    fn lex(words: &[(&str, u64)]) -> Lexicon {
        Lexicon {
            entries: words.iter().map(|&(w, f)| (w.to_string(), f)).collect(),
        }
    }

    #[test]
    fn frequent_ops_are_cheaper() {
        let d = dataset(&[("yn", "in", 90), ("yn", "on", 10)]);
        let w = learn_weights(&d, 2).unwrap();
        assert!(w.cost(Some('y'), Some('i')) < w.cost(Some('y'), Some('o')));
        assert!(w.cost(Some('y'), Some('o')) <= 1.0);
    }

    #[test]
    fn identical_pairs_give_unit_costs() {
        let d = dataset(&[("the", "the", 3), ("and", "and", 2)]);
        let w = learn_weights(&d, 2).unwrap();
        assert_eq!(w, EditWeightMatrix::unit());
        assert_eq!(w.cost(Some('a'), Some('a')), 0.0);
        assert_eq!(w.cost(Some('a'), Some('b')), 1.0);
    }

    #[test]
    fn single_op_gets_floor_cost() {
        let d = dataset(&[("vnd", "und", 1)]);
        let w = learn_weights(&d, 2).unwrap();
        assert_eq!(w.cost(Some('v'), Some('u')), MIN_COST);
        assert_eq!(w.learned().count(), 1);
    }

    #[test]
    fn empty_training_fails() {
        assert!(matches!(
            learn_weights(&dataset(&[]), 2),
            Err(Error::Training(_))
        ));
    }

    #[test]
    fn nearest_examples() {
        let lexicon = lex(&[("their", 1), ("there", 1), ("the", 1)]);
        let c = distance_normalize(&EditWeightMatrix::unit(), &lexicon, "theyr", 0.5);
        assert_eq!(c.form, "their");
        assert_eq!(c.score, -1.0);

        let c = distance_normalize(&EditWeightMatrix::unit(), &lexicon, "there", 0.5);
        assert_eq!((c.form.as_str(), c.score), ("there", -0.0));

        let c = distance_normalize(&EditWeightMatrix::unit(), &lex(&[("the", 1)]), "zzzzz", 0.5);
        assert_eq!(c, Candidate::identity("zzzzz"));
    }

    #[test]
    fn ties_prefer_frequency_then_order() {
        let m = DistanceModel::new(
            EditWeightMatrix::unit(),
            lex(&[("bat", 1), ("cat", 5), ("hat", 5)]),
            1.0,
        );
        assert_eq!(m.normalize("xat").form, "cat");
    }

    #[test]
    fn tsv_roundtrip() {
        let d = dataset(&[("vnd", "und", 3), ("ſo", "so", 2), ("ther", "there", 1)]);
        let w = learn_weights(&d, 2).unwrap();
        let back = EditWeightMatrix::from_tsv(w.to_tsv().as_bytes()).unwrap();
        assert_eq!(back, w);
        let json = serde_json::to_string(&w).unwrap();
        assert_eq!(serde_json::from_str::<EditWeightMatrix>(&json).unwrap(), w);
    }

    fn small_lexicon() -> impl Strategy<Value = Vec<String>> {
        proptest::collection::vec("[abc]{1,5}", 1..12)
    }

    proptest! {
        #[test]
        fn search_matches_brute_force(words in small_lexicon(), tok in "[abcd]{1,5}") {
            let lexicon = Lexicon::from_words(&words);
            let m = DistanceModel::new(EditWeightMatrix::unit(), lexicon.clone(), 10.0);
            let t: Vec<char> = tok.chars().collect();
            let best = lexicon
                .iter()
                .map(|(w, f)| (distance_chars(&t, &w.chars().collect::<Vec<_>>(), &UnitCosts), std::cmp::Reverse(f), w.to_string()))
                .min_by(|a, b| a.partial_cmp(b).unwrap())
                .unwrap();
            let got = m.nearest(&tok).unwrap();
            prop_assert_eq!(got.word, best.2);
            prop_assert_eq!(got.distance, best.0);
        }

        #[test]
        fn output_is_lexicon_entry_or_input(words in small_lexicon(), tok in "[abcd]{1,5}") {
            let lexicon = Lexicon::from_words(&words);
            let m = DistanceModel::new(EditWeightMatrix::unit(), lexicon.clone(), 0.5);
            let c = m.normalize(&tok);
            prop_assert!(c.form == tok || lexicon.contains(&c.form));
            if lexicon.contains(&tok) {
                prop_assert_eq!(c.form, tok);
            }
        }

        #[test]
        fn lowering_threshold_only_switches_to_identity(words in small_lexicon(), tok in "[abcd]{1,5}") {
            let lexicon = Lexicon::from_words(&words);
            let answers: Vec<Candidate> = [2.0, 1.0, 0.75, 0.5, 0.25, 0.1]
                .iter()
                .map(|&th| DistanceModel::new(EditWeightMatrix::unit(), lexicon.clone(), th).normalize(&tok))
                .collect();
            let non_identity: Vec<&str> = answers
                .iter()
                .filter(|c| c.origin == Origin::Distance)
                .map(|c| c.form.as_str())
                .collect();
            prop_assert!(non_identity.windows(2).all(|w| w[0] == w[1]));
        }

        #[test]
        fn learned_cost_ordering_follows_frequency(a in 2usize..40, b in 2usize..40) {
            prop_assume!(a != b);
            let d = dataset(&[("xy", "xi", a), ("xy", "xo", b)]);
            let w = learn_weights(&d, 2).unwrap();
            let (ci, co) = (w.cost(Some('y'), Some('i')), w.cost(Some('y'), Some('o')));
            if a > b { prop_assert!(ci < co); } else { prop_assert!(co < ci); }
        }
    }
}
