use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use histnorm::corpus::{
    build_lexicon, decode_lines, preprocess_pair, preprocess_running_word, preprocess_token,
    Dataset, Lexicon, Split,
};
use histnorm::eval::{
    self, compare_to_best, mcnemar, Contingency, EvalOptions, EvalReport, REPORT_TSV_HEADER,
};
use histnorm::experiments::{curve_csv, default_sizes, learning_curve, CurveConfig};
use histnorm::normalizer::{Backend, NormalizerModel};
use histnorm::Error;

use crate::config::RunConfig;

/// 1 for failures of the data or models themselves, 2 for usage,
/// configuration and file problems.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(Error::Training(_) | Error::Evaluation(_)) => 1,
        _ => 2,
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load_dataset(path: &Path, split: Split) -> Result<Dataset> {
    Ok(Dataset::load(path, split)?)
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn preprocess(input: &Path, output: &Path, drop_log: Option<&Path>) -> Result<()> {
    let bytes = std::fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let (dataset, stats) = Dataset::parse(&file_stem(input), Split::Train, &bytes)?;
    std::fs::write(output, dataset.to_tsv())
        .with_context(|| format!("writing {}", output.display()))?;
    eprintln!(
        "{}: kept {} pairs, dropped {}, skipped {} blank lines",
        input.display(),
        dataset.len(),
        stats.dropped,
        stats.blank
    );
    if let Some(log_path) = drop_log {
        let mut log = String::new();
        for (i, line) in decode_lines(&bytes)?.iter().enumerate() {
            if let Some((s, t)) = line.split_once('\t') {
                if preprocess_pair(s, t).is_none() {
                    writeln!(log, "{}\t{line}", i + 1)?;
                }
            }
        }
        std::fs::write(log_path, log).with_context(|| format!("writing {}", log_path.display()))?;
    }
    Ok(())
}

pub fn lexicon(corpora: &[PathBuf], wordlists: &[PathBuf], output: &Path) -> Result<()> {
    let corpora: Vec<&Path> = corpora.iter().map(PathBuf::as_path).collect();
    let wordlists: Vec<&Path> = wordlists.iter().map(PathBuf::as_path).collect();
    let lexicon = build_lexicon(&corpora, &wordlists)?;
    std::fs::write(output, lexicon.to_tsv())
        .with_context(|| format!("writing {}", output.display()))?;
    eprintln!("{} types", lexicon.len());
    Ok(())
}

fn load_lexicon(path: Option<&Path>) -> Result<Option<Lexicon>> {
    path.map(|p| Lexicon::load(p).map_err(anyhow::Error::from))
        .transpose()
}

pub fn train(
    backend: Backend,
    train: &Path,
    lexicon: Option<&Path>,
    lm_corpus: &[PathBuf],
    output: &Path,
    config: &RunConfig,
) -> Result<()> {
    let data = load_dataset(train, Split::Train)?;
    let lexicon = load_lexicon(lexicon)?;
    let model = if backend == Backend::Channel && !lm_corpus.is_empty() {
        let mut extra = Vec::new();
        for path in lm_corpus {
            let bytes =
                std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            for line in decode_lines(&bytes)? {
                extra.extend(line.split_whitespace().filter_map(preprocess_running_word));
            }
        }
        log::info!("{} extra language model tokens", extra.len());
        NormalizerModel::train_channel(&data, Some(&extra), &config.train.channel)?
    } else {
        if !lm_corpus.is_empty() {
            log::warn!("--lm-corpus only affects the channel backend");
        }
        NormalizerModel::train(backend, &data, lexicon.as_ref(), &config.train)?
    };
    model.save(output)?;
    eprintln!(
        "{backend}: trained on {} pairs ({} source types)",
        data.len(),
        model.source_vocabulary.len()
    );
    Ok(())
}

pub fn normalize(
    model: &Path,
    input: Option<&Path>,
    output: Option<&Path>,
    details: bool,
) -> Result<()> {
    let model = NormalizerModel::load(model)?;
    let bytes = match input {
        Some(p) => std::fs::read(p).with_context(|| format!("reading {}", p.display()))?,
        None => {
            let mut buf = Vec::new();
            std::io::stdin().read_to_end(&mut buf)?;
            buf
        }
    };
    let raw: Vec<&str> = decode_lines(&bytes)?
        .into_iter()
        .map(|l| l.split('\t').next().unwrap_or(""))
        .collect();
    let tokens: Vec<Option<String>> = raw.iter().map(|t| preprocess_token(t)).collect();
    let present: Vec<&str> = tokens.iter().flatten().map(String::as_str).collect();
    let mut results = model.normalize_all(&present).into_iter();
    let mut out = String::new();
    for (raw, token) in raw.iter().zip(&tokens) {
        match token {
            Some(t) => {
                let c = results.next().expect("one candidate per token");
                if details {
                    writeln!(out, "{t}\t{}\t{}\t{}", c.form, c.score, c.origin)?;
                } else {
                    writeln!(out, "{}", c.form)?;
                }
            }
            // punctuation and empty lines pass through so line numbers stay aligned
            None if details => writeln!(out, "{raw}\t{raw}\t-\tidentity")?,
            None => writeln!(out, "{raw}")?,
        }
    }
    write_output(output, &out)
}

pub enum PredictionSource {
    Model(PathBuf),
    File(PathBuf),
}

fn predictions(test: &Dataset, source: &PredictionSource) -> Result<(Vec<String>, String)> {
    match source {
        PredictionSource::Model(path) => {
            let model = NormalizerModel::load(path)?;
            let pred = model
                .normalize_all(&test.sources())
                .into_iter()
                .map(|c| c.form)
                .collect();
            Ok((pred, file_stem(path)))
        }
        PredictionSource::File(path) => {
            let bytes =
                std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            let pred: Vec<String> = decode_lines(&bytes)?
                .into_iter()
                .map(str::to_string)
                .collect();
            if pred.len() != test.len() {
                return Err(Error::Evaluation(format!(
                    "{} has {} lines but the test set has {} pairs",
                    path.display(),
                    pred.len(),
                    test.len()
                ))
                .into());
            }
            Ok((pred, file_stem(path)))
        }
    }
}

fn summary(r: &EvalReport) -> String {
    let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{:.2}%", 100.0 * x));
    let mut s = format!(
        "{} on {}: accuracy {} ({}/{}), identity {}, maximum {}, CER {:.4}, CER_I {}, stem {}",
        r.system,
        r.dataset,
        opt(Some(r.word_accuracy)),
        r.n_correct,
        r.n_total,
        opt(Some(r.identity_baseline)),
        opt(Some(r.maximum_accuracy)),
        r.cer,
        r.cer_incorrect
            .value()
            .map_or_else(|| "-".to_string(), |x| format!("{x:.4}")),
        opt(r.stem_accuracy_incorrect.value().copied()),
    );
    if let (Some(seen), Some(unseen)) = (r.seen.value(), r.unseen.value()) {
        let _ = write!(
            s,
            ", seen {} (n={}), unseen {} (n={})",
            opt(seen.word_accuracy),
            seen.n,
            opt(unseen.word_accuracy),
            unseen.n
        );
    }
    s
}

pub fn evaluate(
    test: &Path,
    source: &PredictionSource,
    train: Option<&Path>,
    stem_lang: Option<String>,
    system: Option<String>,
    output: Option<&Path>,
    tsv: bool,
) -> Result<()> {
    let test = load_dataset(test, Split::Test)?;
    let (pred, default_name) = predictions(&test, source)?;
    let vocab: Option<BTreeSet<String>> = match train {
        Some(p) => Some(
            load_dataset(p, Split::Train)?
                .pairs
                .into_iter()
                .map(|p| p.source)
                .collect(),
        ),
        None => None,
    };
    let options = EvalOptions {
        system: system.unwrap_or(default_name),
        train_vocabulary: vocab.as_ref(),
        stem_language: stem_lang,
    };
    let report = eval::evaluate(&test, &pred, &options)?;
    let json = report.to_json()? + "\n";
    let line = if tsv {
        format!("{REPORT_TSV_HEADER}\n{}", report.to_tsv_row())
    } else {
        summary(&report)
    };
    match output {
        Some(_) => {
            write_output(output, &json)?;
            println!("{line}");
        }
        None => {
            write_output(None, &json)?;
            eprintln!("{line}");
        }
    }
    Ok(())
}

fn load_report(path: &Path) -> Result<EvalReport> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    EvalReport::from_json(&text).with_context(|| format!("reading report {}", path.display()))
}

pub fn compare(paths: &[PathBuf]) -> Result<()> {
    let reports = paths
        .iter()
        .map(|p| load_report(p))
        .collect::<Result<Vec<_>>>()?;
    let mut out = String::new();
    if let [a, b] = reports.as_slice() {
        let c = Contingency::from_correctness(&a.per_token_correctness, &b.per_token_correctness)?;
        let t = mcnemar(&c);
        writeln!(out, "A = {} ({:.2}%)", a.system, 100.0 * a.word_accuracy)?;
        writeln!(out, "B = {} ({:.2}%)", b.system, 100.0 * b.word_accuracy)?;
        writeln!(out, "\t\tB wrong\tB right")?;
        writeln!(out, "A wrong\t\t{}\t{}", c.n00, c.n01)?;
        writeln!(out, "A right\t\t{}\t{}", c.n10, c.n11)?;
        writeln!(out, "statistic\t{:.4}", t.statistic)?;
        writeln!(
            out,
            "p-value\t{:.6}\t({})",
            t.p_value,
            if t.exact {
                "exact binomial"
            } else {
                "chi-square, 1 df"
            }
        )?;
        writeln!(
            out,
            "verdict\t{}",
            if t.significant {
                "significantly different at p < 0.05"
            } else {
                "not significantly different at p < 0.05"
            }
        )?;
    } else {
        out.push_str(&comparison_table(&reports)?);
    }
    write_output(None, &out)
}

/// Systems against the best one: `best` marks the winner, `*` the systems
/// not significantly worse than it.
fn comparison_table(reports: &[EvalReport]) -> Result<String> {
    let rows = compare_to_best(reports)?;
    let mut out = String::from("system\taccuracy\tmark\tstatistic\tp-value\n");
    for (row, r) in rows.iter().zip(reports) {
        let mark = if row.is_best {
            "best"
        } else if row.tied_with_best {
            "*"
        } else {
            ""
        };
        let (stat, p) = row.test.map_or(("-".to_string(), "-".to_string()), |t| {
            (format!("{:.4}", t.statistic), format!("{:.6}", t.p_value))
        });
        writeln!(
            out,
            "{}\t{:.2}\t{mark}\t{stat}\t{p}",
            r.system,
            100.0 * row.word_accuracy
        )?;
    }
    Ok(out)
}

pub fn hybrid(
    lookup: &Path,
    backoff: &Path,
    test: &Path,
    output: Option<&Path>,
    save_model: Option<&Path>,
) -> Result<()> {
    let lookup = NormalizerModel::load(lookup)?;
    let backoff = NormalizerModel::load(backoff)?;
    let lookup_name = lookup.backend().to_string();
    let backoff_name = backoff.backend().to_string();
    let hybrid = NormalizerModel::hybrid(lookup.clone(), backoff.clone())?;
    let test = load_dataset(test, Split::Test)?;
    let vocab = lookup.source_vocabulary.clone();
    let run = |model: &NormalizerModel, name: String| -> Result<EvalReport> {
        let pred: Vec<String> = model
            .normalize_all(&test.sources())
            .into_iter()
            .map(|c| c.form)
            .collect();
        let options = EvalOptions {
            system: name,
            train_vocabulary: Some(&vocab),
            stem_language: None,
        };
        Ok(eval::evaluate(&test, &pred, &options)?)
    };
    let reports = vec![
        run(&lookup, lookup_name.clone())?,
        run(&backoff, backoff_name.clone())?,
        run(&hybrid, format!("{lookup_name}+{backoff_name}"))?,
    ];
    let rows = compare_to_best(&reports)?;
    let mut out = String::from("system\taccuracy\tseen\tunseen\tmark\n");
    for (row, r) in rows.iter().zip(&reports) {
        let sub = |m: &histnorm::eval::Metric<histnorm::eval::SubReport>| {
            m.value()
                .and_then(|s| s.word_accuracy)
                .map_or_else(|| "-".to_string(), |a| format!("{:.2}", 100.0 * a))
        };
        let mark = if row.is_best {
            "best"
        } else if row.tied_with_best {
            "*"
        } else {
            ""
        };
        writeln!(
            out,
            "{}\t{:.2}\t{}\t{}\t{mark}",
            r.system,
            100.0 * r.word_accuracy,
            sub(&r.seen),
            sub(&r.unseen)
        )?;
    }
    write_output(None, &out)?;
    if let Some(path) = output {
        write_output(Some(path), &(reports[2].to_json()? + "\n"))?;
    }
    if let Some(path) = save_model {
        hybrid.save(path)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn curve(
    backend: Backend,
    train: &Path,
    dev: &Path,
    sizes: &[usize],
    max_splits: usize,
    lexicon: Option<&Path>,
    output: Option<&Path>,
    config: &RunConfig,
) -> Result<()> {
    let train = load_dataset(train, Split::Train)?;
    let dev = load_dataset(dev, Split::Dev)?;
    let sizes = if sizes.is_empty() {
        default_sizes(train.len())
    } else {
        sizes.to_vec()
    };
    let curve_config = CurveConfig {
        max_splits,
        train: config.train.clone(),
        lexicon: load_lexicon(lexicon)?,
    };
    let points = learning_curve(&train, &dev, backend, &sizes, &curve_config)?;
    for p in points.iter().filter(|p| p.flagged()) {
        eprintln!(
            "warning: n={}: {} of {} splits failed",
            p.train_size,
            p.failures.len(),
            p.splits_used
        );
    }
    write_output(output, &curve_csv(&points))
}
