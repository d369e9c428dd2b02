//! Metrics and significance testing.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::align::edit_distance;
use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::lookup::majority_map;
use crate::stemmer::StemmerSpec;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
/// χ²(1) critical value at α = 0.05.
pub const CHI2_CRITICAL_05: f64 = 3.841;
/// Below this many discordant tokens McNemar uses the exact binomial test.
pub const EXACT_BELOW: u64 = 25;
pub const ALPHA: f64 = 0.05;

fn check_aligned(gold: usize, pred: usize) -> Result<()> {
    if gold != pred {
        return Err(Error::Evaluation(format!(
            "length mismatch: {gold} gold tokens, {pred} predictions"
        )));
    }
    Ok(())
}

pub fn correctness<G: AsRef<str>, P: AsRef<str>>(gold: &[G], pred: &[P]) -> Result<Vec<bool>> {
    check_aligned(gold.len(), pred.len())?;
    Ok(gold
        .iter()
        .zip(pred)
        .map(|(g, p)| g.as_ref() == p.as_ref())
        .collect())
}

pub fn word_accuracy<G: AsRef<str>, P: AsRef<str>>(gold: &[G], pred: &[P]) -> Result<f64> {
    let bits = correctness(gold, pred)?;
    if bits.is_empty() {
        return Err(Error::Evaluation("cannot score an empty token list".into()));
    }
    Ok(bits.iter().filter(|&&b| b).count() as f64 / bits.len() as f64)
}

pub fn identity_baseline(dataset: &Dataset) -> Result<f64> {
    word_accuracy(&dataset.targets(), &dataset.sources())
}

/// Accuracy of the dataset's own majority map on itself.
pub fn maximum_accuracy(dataset: &Dataset) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::Evaluation("cannot score an empty dataset".into()));
    }
    let map = majority_map(
        dataset
            .pairs
            .iter()
            .map(|p| (p.source.as_str(), p.target.as_str())),
    );
    let hits: u64 = map.values().map(|e| e.count).sum();
    Ok(hits as f64 / dataset.len() as f64)
}

/// Mean per-token unit edit distance over gold length. With
/// `incorrect_only`, exact matches are left out; `None` when nothing is
/// left to average.
pub fn cer<G, P>(gold: &[G], pred: &[P], incorrect_only: bool) -> Result<Option<f64>>
where
    G: AsRef<str> + Sync,
    P: AsRef<str> + Sync,
{
    check_aligned(gold.len(), pred.len())?;
    let rates: Vec<f64> = gold
        .par_iter()
        .zip(pred.par_iter())
        .filter(|(g, p)| !incorrect_only || g.as_ref() != p.as_ref())
        .map(|(g, p)| {
            let len = g.as_ref().chars().count();
            if len == 0 {
                return Err(Error::Evaluation("empty gold token".into()));
            }
            Ok(edit_distance(p.as_ref(), g.as_ref(), None) / len as f64)
        })
        .collect::<Result<_>>()?;
    if rates.is_empty() {
        return Ok(None);
    }
    Ok(Some(rates.iter().sum::<f64>() / rates.len() as f64))
}

/// Share of incorrect predictions whose stem equals the gold stem.
pub fn stem_accuracy_incorrect<G: AsRef<str>, P: AsRef<str>>(
    gold: &[G],
    pred: &[P],
    spec: &StemmerSpec,
) -> Result<Option<f64>> {
    check_aligned(gold.len(), pred.len())?;
    let mut wrong = 0usize;
    let mut same_stem = 0usize;
    for (g, p) in gold.iter().zip(pred) {
        let (g, p) = (g.as_ref(), p.as_ref());
        if g != p {
            wrong += 1;
            same_stem += usize::from(spec.stem(g) == spec.stem(p));
        }
    }
    Ok((wrong > 0).then(|| same_stem as f64 / wrong as f64))
}

/// A metric that may be missing, with the reason it is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric<T> {
    Value(T),
    Absent(String),
}

impl<T> Metric<T> {
    pub fn value(&self) -> Option<&T> {
        match self {
            Metric::Value(v) => Some(v),
            Metric::Absent(_) => None,
        }
    }

    fn from_option(v: Option<T>, reason: &str) -> Self {
        match v {
            Some(v) => Metric::Value(v),
            None => Metric::Absent(reason.to_string()),
        }
    }
}

pub const NO_INCORRECT: &str = "no incorrect tokens";

/// Stem accuracy for a language code, absent with a reason when the
/// language has no stemmer.
pub fn stem_accuracy_for_language<G: AsRef<str>, P: AsRef<str>>(
    gold: &[G],
    pred: &[P],
    language: &str,
) -> Result<Metric<f64>> {
    match StemmerSpec::for_language(language) {
        Ok(spec) => Ok(Metric::from_option(
            stem_accuracy_incorrect(gold, pred, &spec)?,
            NO_INCORRECT,
        )),
        Err(Error::UnsupportedLanguage { .. }) => {
            check_aligned(gold.len(), pred.len())?;
            Ok(Metric::Absent(format!("unsupported language '{language}'")))
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubReport {
    pub n: usize,
    pub n_correct: usize,
    /// Absent for an empty partition.
    pub word_accuracy: Option<f64>,
}

impl SubReport {
    fn from_counts(n: usize, n_correct: usize) -> Self {
        SubReport {
            n,
            n_correct,
            word_accuracy: (n > 0).then(|| n_correct as f64 / n as f64),
        }
    }
}

/// Accuracy on positions whose source is in `train_vocab`, and on the rest.
pub fn seen_unseen_split<G, P, S>(
    train_vocab: &BTreeSet<String>,
    gold: &[G],
    pred: &[P],
    source: &[S],
) -> Result<(SubReport, SubReport)>
where
    G: AsRef<str>,
    P: AsRef<str>,
    S: AsRef<str>,
{
    check_aligned(gold.len(), pred.len())?;
    check_aligned(gold.len(), source.len())?;
    let (mut seen, mut seen_ok, mut unseen_ok) = (0, 0, 0);
    for ((g, p), s) in gold.iter().zip(pred).zip(source) {
        let ok = g.as_ref() == p.as_ref();
        if train_vocab.contains(s.as_ref()) {
            seen += 1;
            seen_ok += usize::from(ok);
        } else {
            unseen_ok += usize::from(ok);
        }
    }
    Ok((
        SubReport::from_counts(seen, seen_ok),
        SubReport::from_counts(gold.len() - seen, unseen_ok),
    ))
}

mod bits {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[bool], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(
            &v.iter()
                .map(|&b| if b { '1' } else { '0' })
                .collect::<String>(),
        )
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let s = String::deserialize(d)?;
        s.chars()
            .map(|c| match c {
                '1' => Ok(true),
                '0' => Ok(false),
                other => Err(serde::de::Error::custom(format!(
                    "bad correctness bit '{other}'"
                ))),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions<'a> {
    pub system: String,
    /// Source types seen in training, for the seen/unseen breakdown.
    pub train_vocabulary: Option<&'a BTreeSet<String>>,
    /// Stemmer language code.
    pub stem_language: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub system: String,
    pub dataset: String,
    pub n_total: usize,
    pub n_correct: usize,
    pub word_accuracy: f64,
    pub identity_baseline: f64,
    pub maximum_accuracy: f64,
    pub cer: f64,
    pub cer_incorrect: Metric<f64>,
    pub stem_accuracy_incorrect: Metric<f64>,
    pub seen: Metric<SubReport>,
    pub unseen: Metric<SubReport>,
    #[serde(with = "bits")]
    pub per_token_correctness: Vec<bool>,
}

pub const REPORT_TSV_HEADER: &str = "system\tdataset\tn_total\tn_correct\tword_accuracy\tidentity_baseline\tmaximum_accuracy\tcer\tcer_incorrect\tstem_accuracy_incorrect\tseen_n\tseen_accuracy\tunseen_n\tunseen_accuracy";

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"))
}

/// Scores predictions for `dataset`.
pub fn evaluate<P: AsRef<str> + Sync>(
    dataset: &Dataset,
    pred: &[P],
    options: &EvalOptions,
) -> Result<EvalReport> {
    let gold = dataset.targets();
    let source = dataset.sources();
    let bits = correctness(&gold, pred)?;
    let word_accuracy = word_accuracy(&gold, pred)?;
    let n_correct = bits.iter().filter(|&&b| b).count();
    let cer_all = cer(&gold, pred, false)?.expect("dataset is nonempty");
    let cer_incorrect = Metric::from_option(cer(&gold, pred, true)?, NO_INCORRECT);
    let stem = match &options.stem_language {
        Some(lang) => stem_accuracy_for_language(&gold, pred, lang)?,
        None => Metric::Absent("no stemmer language given".into()),
    };
    let (seen, unseen) = match options.train_vocabulary {
        Some(vocab) => {
            let (s, u) = seen_unseen_split(vocab, &gold, pred, &source)?;
            (Metric::Value(s), Metric::Value(u))
        }
        None => {
            let reason = "no training vocabulary given";
            (Metric::Absent(reason.into()), Metric::Absent(reason.into()))
        }
    };
    Ok(EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        system: options.system.clone(),
        dataset: dataset.name.clone(),
        n_total: bits.len(),
        n_correct,
        word_accuracy,
        identity_baseline: identity_baseline(dataset)?,
        maximum_accuracy: maximum_accuracy(dataset)?,
        cer: cer_all,
        cer_incorrect,
        stem_accuracy_incorrect: stem,
        seen,
        unseen,
        per_token_correctness: bits,
    })
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<EvalReport> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(REPORT_SCHEMA_VERSION) => {}
            Some(v) => {
                return Err(Error::Format(format!(
                    "unsupported report schema version {v}"
                )))
            }
            None => return Err(Error::Format("report has no schema_version".into())),
        }
        let report: EvalReport =
            serde_json::from_value(value).map_err(|e| Error::Format(e.to_string()))?;
        if report.per_token_correctness.len() != report.n_total {
            return Err(Error::Format(format!(
                "report claims {} tokens but carries {} correctness bits",
                report.n_total,
                report.per_token_correctness.len()
            )));
        }
        Ok(report)
    }

    /// One row under [`REPORT_TSV_HEADER`]; absent values print as `-`.
    pub fn to_tsv_row(&self) -> String {
        let sub = |m: &Metric<SubReport>| match m.value() {
            Some(s) => (s.n.to_string(), cell(s.word_accuracy)),
            None => ("-".to_string(), "-".to_string()),
        };
        let (seen_n, seen_acc) = sub(&self.seen);
        let (unseen_n, unseen_acc) = sub(&self.unseen);
        [
            self.system.clone(),
            self.dataset.clone(),
            self.n_total.to_string(),
            self.n_correct.to_string(),
            cell(Some(self.word_accuracy)),
            cell(Some(self.identity_baseline)),
            cell(Some(self.maximum_accuracy)),
            cell(Some(self.cer)),
            cell(self.cer_incorrect.value().copied()),
            cell(self.stem_accuracy_incorrect.value().copied()),
            seen_n,
            seen_acc,
            unseen_n,
            unseen_acc,
        ]
        .join("\t")
    }
}

/// Accuracy of a system that takes the seen tokens from `seen_system` and
/// the unseen ones from `unseen_system`, recombined from the two reports'
/// partitions.
pub fn recombined_accuracy(seen_system: &EvalReport, unseen_system: &EvalReport) -> Result<f64> {
    let (Some(seen), Some(unseen)) = (seen_system.seen.value(), unseen_system.unseen.value())
    else {
        return Err(Error::Evaluation(
            "both reports need a seen/unseen breakdown".into(),
        ));
    };
    let n = seen.n + unseen.n;
    if n != seen_system.n_total || n != unseen_system.n_total {
        return Err(Error::Evaluation(
            "reports cover different token sets".into(),
        ));
    }
    let part = |s: &SubReport| s.word_accuracy.map_or(0.0, |a| s.n as f64 * a);
    Ok((part(seen) + part(unseen)) / n as f64)
}

/// Agreement counts of two systems: first index system A, second system B,
/// 0 wrong and 1 right.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contingency {
    pub n00: u64,
    pub n01: u64,
    pub n10: u64,
    pub n11: u64,
}

impl Contingency {
    pub fn from_correctness(a: &[bool], b: &[bool]) -> Result<Contingency> {
        if a.len() != b.len() {
            return Err(Error::Evaluation(format!(
                "correctness vectors differ in length: {} vs {}",
                a.len(),
                b.len()
            )));
        }
        let mut c = Contingency::default();
        for (&x, &y) in a.iter().zip(b) {
            match (x, y) {
                (false, false) => c.n00 += 1,
                (false, true) => c.n01 += 1,
                (true, false) => c.n10 += 1,
                (true, true) => c.n11 += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> u64 {
        self.n00 + self.n01 + self.n10 + self.n11
    }

    pub fn discordant(&self) -> u64 {
        self.n01 + self.n10
    }

    /// The table with the systems exchanged.
    pub fn swapped(&self) -> Contingency {
        Contingency {
            n00: self.n00,
            n01: self.n10,
            n10: self.n01,
            n11: self.n11,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McNemar {
    /// Continuity-corrected χ² statistic.
    pub statistic: f64,
    pub p_value: f64,
    /// Whether the verdict came from the exact binomial test.
    pub exact: bool,
    pub significant: bool,
}

/// Two-sided exact binomial p-value for `k` successes out of `n` at 1/2.
fn binomial_two_sided(k: u64, n: u64) -> f64 {
    let k = k.min(n - k);
    let mut coef = 1.0f64;
    let mut tail = 0.0;
    for i in 0..=k {
        if i > 0 {
            coef = coef * (n - i + 1) as f64 / i as f64;
        }
        tail += coef;
    }
    (2.0 * tail * 0.5f64.powi(n as i32)).min(1.0)
}

pub fn mcnemar(c: &Contingency) -> McNemar {
    let n = c.discordant();
    if n == 0 {
        return McNemar {
            statistic: 0.0,
            p_value: 1.0,
            exact: true,
            significant: false,
        };
    }
    let diff = c.n01.abs_diff(c.n10) as f64;
    let statistic = (diff - 1.0).max(0.0).powi(2) / n as f64;
    if n < EXACT_BELOW {
        let p_value = binomial_two_sided(c.n01.min(c.n10), n);
        McNemar {
            statistic,
            p_value,
            exact: true,
            significant: p_value < ALPHA,
        }
    } else {
        // χ²(1) survival function
        let p_value = statrs::function::erf::erfc((statistic / 2.0).sqrt());
        McNemar {
            statistic,
            p_value,
            exact: false,
            significant: statistic > CHI2_CRITICAL_05,
        }
    }
}

/// One row of a comparison against the most accurate system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub system: String,
    pub word_accuracy: f64,
    pub is_best: bool,
    /// Against the best system; absent for the best system itself.
    pub test: Option<McNemar>,
    pub contingency: Option<Contingency>,
    /// Best, or not significantly worse than it.
    pub tied_with_best: bool,
}

/// Tests every report against the most accurate one (first wins ties).
pub fn compare_to_best(reports: &[EvalReport]) -> Result<Vec<Comparison>> {
    let Some(best) = reports
        .iter()
        .enumerate()
        .fold(None::<(usize, &EvalReport)>, |acc, (i, r)| match acc {
            Some((_, b)) if b.word_accuracy >= r.word_accuracy => acc,
            _ => Some((i, r)),
        })
        .map(|(i, _)| i)
    else {
        return Ok(Vec::new());
    };
    reports
        .iter()
        .enumerate()
        .map(|(i, r)| {
            if i == best {
                return Ok(Comparison {
                    system: r.system.clone(),
                    word_accuracy: r.word_accuracy,
                    is_best: true,
                    test: None,
                    contingency: None,
                    tied_with_best: true,
                });
            }
            let c = Contingency::from_correctness(
                &reports[best].per_token_correctness,
                &r.per_token_correctness,
            )?;
            let test = mcnemar(&c);
            Ok(Comparison {
                system: r.system.clone(),
                word_accuracy: r.word_accuracy,
                is_best: false,
                test: Some(test),
                contingency: Some(c),
                tied_with_best: !test.significant,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Split, TokenPair};
    use proptest::prelude::*;

    fn dataset(pairs: &[(&str, &str)]) -> Dataset {
        Dataset::new(
            "d",
            Split::Test,
            pairs.iter().map(|&(s, t)| TokenPair::new(s, t)).collect(),
        )
    }

    #[test]
    fn accuracy_examples() {
        assert!(
            (word_accuracy(&["a", "b", "c"], &["a", "x", "c"]).unwrap() - 2.0 / 3.0).abs() < 1e-15
        );
        assert_eq!(word_accuracy(&["a", "b"], &["a", "b"]).unwrap(), 1.0);
        assert!(word_accuracy(&["a"], &["a", "b"]).is_err());
        assert!(word_accuracy::<&str, &str>(&[], &[]).is_err());
    }

    #[test]
    fn baselines() {
        assert_eq!(
            identity_baseline(&dataset(&[("a", "a"), ("b", "b")])).unwrap(),
            1.0
        );
        assert_eq!(
            identity_baseline(&dataset(&[("a", "a"), ("b", "c")])).unwrap(),
            0.5
        );
        let d = dataset(&[("a", "x"), ("a", "y"), ("a", "x")]);
        assert!((maximum_accuracy(&d).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            maximum_accuracy(&dataset(&[("a", "x"), ("b", "y")])).unwrap(),
            1.0
        );
    }

    #[test]
    fn cer_examples() {
        let v = cer(&["üdvözülendőek"], &["üdvözülendők"], true)
            .unwrap()
            .unwrap();
        assert!((v - 1.0 / 13.0).abs() < 1e-15);
        assert_eq!(cer(&["a", "b"], &["a", "b"], true).unwrap(), None);
        let v = cer(&["ab", "cd"], &["ab", "ce"], false).unwrap().unwrap();
        assert!((v - 0.25).abs() < 1e-15);
        assert!(cer(&[""], &["x"], false).is_err());
    }

    #[test]
    fn stem_accuracy() {
        let en = StemmerSpec::for_language("en").unwrap();
        let v = stem_accuracy_incorrect(&["king", "beds", "same"], &["kings", "bids", "same"], &en)
            .unwrap();
        assert_eq!(v, Some(0.5));
        assert_eq!(stem_accuracy_incorrect(&["a"], &["a"], &en).unwrap(), None);
        let m = stem_accuracy_for_language(&["hús"], &["hus"], "is").unwrap();
        assert!(matches!(m, Metric::Absent(ref r) if r.contains("unsupported")));
    }

    #[test]
    fn seen_unseen() {
        let vocab: BTreeSet<String> = ["a".to_string()].into();
        let (s, u) = seen_unseen_split(&vocab, &["x", "y"], &["x", "y"], &["a", "b"]).unwrap();
        assert_eq!((s.word_accuracy, u.word_accuracy), (Some(1.0), Some(1.0)));
        let (s, u) = seen_unseen_split(&vocab, &["x"], &["x"], &["a"]).unwrap();
        assert_eq!((s.n, u.n, u.word_accuracy), (1, 0, None));
    }

    #[test]
    fn mcnemar_example() {
        let c = Contingency {
            n00: 0,
            n01: 5,
            n10: 15,
            n11: 0,
        };
        let m = mcnemar(&c);
        assert!((m.statistic - 4.05).abs() < 1e-12);
        assert!(m.exact);
        // 2 * P(X <= 5), X ~ Bin(20, 1/2) = 2 * 21700 / 2^20
        assert!((m.p_value - 2.0 * 21700.0 / 1048576.0).abs() < 1e-15);
        assert!(m.significant);
        let none = mcnemar(&Contingency {
            n00: 4,
            n01: 0,
            n10: 0,
            n11: 9,
        });
        assert_eq!((none.statistic, none.significant), (0.0, false));
        assert!(
            !mcnemar(&Contingency {
                n00: 0,
                n01: 30,
                n10: 30,
                n11: 0
            })
            .significant
        );
    }

    #[test]
    fn report_roundtrip_and_row() {
        let d = dataset(&[("vnd", "und"), ("der", "der"), ("vnnd", "und")]);
        let vocab: BTreeSet<String> = ["vnd".to_string()].into();
        let opts = EvalOptions {
            system: "sys".into(),
            train_vocabulary: Some(&vocab),
            stem_language: Some("en".into()),
        };
        let r = evaluate(&d, &["und", "der", "vnnd"], &opts).unwrap();
        assert_eq!(r.n_correct, 2);
        assert_eq!(r.per_token_correctness, vec![true, true, false]);
        let back = EvalReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        assert!(r
            .to_json()
            .unwrap()
            .contains("\"per_token_correctness\": \"110\""));
        let row = r.to_tsv_row();
        assert_eq!(
            row.split('\t').count(),
            REPORT_TSV_HEADER.split('\t').count()
        );
        let bare = evaluate(&d, &["und", "der", "und"], &EvalOptions::default()).unwrap();
        assert!(bare.to_tsv_row().ends_with("-\t-\t-\t-"));
        assert!(matches!(bare.cer_incorrect, Metric::Absent(_)));
    }

    #[test]
    fn report_version_checked() {
        let d = dataset(&[("a", "a")]);
        let r = evaluate(&d, &["a"], &EvalOptions::default()).unwrap();
        let json = r
            .to_json()
            .unwrap()
            .replace("\"schema_version\": 1", "\"schema_version\": 9");
        assert!(EvalReport::from_json(&json).is_err());
    }

    #[test]
    fn best_system_comparison() {
        let d = dataset(&[("a", "a"); 40]);
        let good = evaluate(
            &d,
            &vec!["a"; 40],
            &EvalOptions {
                system: "good".into(),
                ..Default::default()
            },
        )
        .unwrap();
        let mut pred = vec!["a"; 40];
        pred[0] = "b";
        let close = evaluate(
            &d,
            &pred,
            &EvalOptions {
                system: "close".into(),
                ..Default::default()
            },
        )
        .unwrap();
        let bad = evaluate(
            &d,
            &vec!["b"; 40],
            &EvalOptions {
                system: "bad".into(),
                ..Default::default()
            },
        )
        .unwrap();
        let rows = compare_to_best(&[close, good, bad]).unwrap();
        assert!(rows[1].is_best);
        assert!(rows[0].tied_with_best);
        assert!(!rows[2].tied_with_best);
    }

    proptest! {
        #[test]
        fn invariants(
            raw in proptest::collection::vec(("[ab]{1,3}", "[ab]{1,3}", "[ab]{1,3}"), 1..30),
            vocab in proptest::collection::btree_set("[ab]{1,3}", 0..6),
        ) {
            let d = Dataset::new("p", Split::Test, raw.iter().map(|(s, t, _)| TokenPair::new(s.as_str(), t.as_str())).collect());
            let pred: Vec<&str> = raw.iter().map(|(_, _, p)| p.as_str()).collect();
            let id = identity_baseline(&d).unwrap();
            prop_assert_eq!(id, word_accuracy(&d.targets(), &d.sources()).unwrap());
            prop_assert!(maximum_accuracy(&d).unwrap() >= id);

            let r = evaluate(&d, &pred, &EvalOptions { train_vocabulary: Some(&vocab), ..Default::default() }).unwrap();
            prop_assert_eq!(r.word_accuracy, r.n_correct as f64 / r.n_total as f64);
            prop_assert_eq!(r.cer == 0.0, r.word_accuracy == 1.0);
            prop_assert_eq!(r.cer_incorrect.value().is_none(), r.n_correct == r.n_total);
            let (s, u) = (r.seen.value().unwrap(), r.unseen.value().unwrap());
            prop_assert_eq!(s.n + u.n, r.n_total);
            prop_assert!((recombined_accuracy(&r, &r).unwrap() - r.word_accuracy).abs() < 1e-12);
        }

        #[test]
        fn mcnemar_symmetric(n00 in 0u64..50, n01 in 0u64..60, n10 in 0u64..60, n11 in 0u64..50) {
            let c = Contingency { n00, n01, n10, n11 };
            let a = mcnemar(&c);
            let b = mcnemar(&c.swapped());
            prop_assert_eq!(a, b);
            let other = mcnemar(&Contingency { n00: 0, n01, n10, n11: 0 });
            prop_assert_eq!(a, other);
        }
    }
}
