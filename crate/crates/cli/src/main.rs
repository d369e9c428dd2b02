mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use histnorm::normalizer::Backend;

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "histnorm",
    version,
    about = "Train, apply and evaluate historical spelling normalizers"
)]
struct Cli {
    /// TOML file with run and training settings.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Write the effective settings to FILE as TOML.
    #[arg(long, global = true, value_name = "FILE")]
    save_config: Option<PathBuf>,

    /// Seed for randomized steps [default: 0].
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads, 0 for one per core [default: 0].
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// More log output; repeat for more detail.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Preprocess a two-column source/target file.
    Preprocess {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
        /// Write the numbers of dropped lines here.
        #[arg(long)]
        drop_log: Option<PathBuf>,
    },
    /// Build a lexicon from running text and wordlists.
    Lexicon {
        /// Running-text corpus, tokenized on whitespace.
        #[arg(long = "corpus")]
        corpora: Vec<PathBuf>,
        /// Wordlist with one word per line.
        #[arg(long = "wordlist")]
        wordlists: Vec<PathBuf>,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Train a model and write it as JSON.
    Train {
        #[arg(long, short)]
        backend: Backend,
        #[arg(long)]
        train: PathBuf,
        /// Lexicon file (`type<TAB>frequency`), needed by distance and chain.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Extra running text for the channel language model.
        #[arg(long)]
        lm_corpus: Vec<PathBuf>,
        #[arg(long, short)]
        output: PathBuf,
        #[command(flatten)]
        overrides: TrainOverrides,
    },
    /// Normalize tokens, one per line (first column of tab-separated input).
    Normalize {
        #[arg(long, short)]
        model: PathBuf,
        /// Defaults to standard input.
        #[arg(long, short)]
        input: Option<PathBuf>,
        /// Defaults to standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Print token, form, score and origin per line.
        #[arg(long)]
        details: bool,
    },
    /// Score a model or a predictions file against a test set.
    Evaluate {
        #[arg(long)]
        test: PathBuf,
        #[arg(
            long,
            conflicts_with = "predictions",
            required_unless_present = "predictions"
        )]
        model: Option<PathBuf>,
        /// One prediction per line, aligned with the preprocessed test set.
        #[arg(long)]
        predictions: Option<PathBuf>,
        /// Training file, for the seen/unseen breakdown.
        #[arg(long)]
        train: Option<PathBuf>,
        /// Language code for stem accuracy (de, en, es, hu, pt, sv).
        #[arg(long)]
        stem_lang: Option<String>,
        /// Name stored in the report [default: model or predictions file stem].
        #[arg(long)]
        system: Option<String>,
        /// Report file (JSON); printed to standard output when omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Print a tab-separated header and row instead of the summary line.
        #[arg(long)]
        tsv: bool,
    },
    /// McNemar tests between evaluation reports.
    Compare {
        /// Two reports, or more to test each against the best.
        #[arg(required = true, num_args = 2..)]
        reports: Vec<PathBuf>,
    },
    /// Lookup for seen tokens, a learned model for unseen ones.
    Hybrid {
        #[arg(long)]
        lookup: PathBuf,
        #[arg(long)]
        backoff: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Hybrid report file (JSON).
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Also save the combined model.
        #[arg(long)]
        save_model: Option<PathBuf>,
    },
    /// Learning curve over training-set sizes, written as CSV.
    Curve {
        #[arg(long, short)]
        backend: Backend,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        dev: PathBuf,
        /// Comma-separated sizes [default: 100,250,...,50000 up to the training size].
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        /// Most splits per size [default: 10].
        #[arg(long, default_value_t = histnorm::experiments::DEFAULT_MAX_SPLITS)]
        max_splits: usize,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Defaults to standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

/// Command-line overrides of the training settings.
#[derive(Debug, Args)]
struct TrainOverrides {
    /// Longest substitution unit in source characters [default: 3].
    #[arg(long)]
    max_unit: Option<usize>,
    /// Character language model order [default: 5].
    #[arg(long)]
    lm_order: Option<usize>,
    /// Language model weight [default: 1.0].
    #[arg(long)]
    lm_weight: Option<f64>,
    /// Beam width [default: 10].
    #[arg(long)]
    beam_width: Option<usize>,
    /// Distance threshold per source character [default: 0.5].
    #[arg(long)]
    threshold: Option<f64>,
    /// Weight re-estimation rounds [default: 2].
    #[arg(long)]
    iterations: Option<usize>,
}

impl TrainOverrides {
    fn apply(&self, config: &mut RunConfig) {
        let t = &mut config.train;
        if let Some(v) = self.max_unit {
            t.channel.max_unit = v;
        }
        if let Some(v) = self.lm_order {
            t.channel.lm_order = v;
        }
        if let Some(v) = self.lm_weight {
            t.channel.lm_weight = v;
        }
        if let Some(v) = self.beam_width {
            t.channel.beam_width = v;
        }
        if let Some(v) = self.threshold {
            t.distance.threshold = v;
        }
        if let Some(v) = self.iterations {
            t.distance.iterations = v;
        }
    }
}

fn effective_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(threads) = cli.threads {
        config.threads = threads;
    }
    config.verbosity = config.verbosity.max(cli.verbose);
    if let Command::Train { overrides, .. } = &cli.command {
        overrides.apply(&mut config);
    }
    Ok(config)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = effective_config(&cli)?;
    let level = match config.verbosity {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();
    if config.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build_global()?;
    }
    if let Some(path) = &cli.save_config {
        config.save(path)?;
    }
    log::debug!("seed {}, threads {}", config.seed, config.threads);

    match cli.command {
        Command::Preprocess {
            input,
            output,
            drop_log,
        } => commands::preprocess(&input, &output, drop_log.as_deref()),
        Command::Lexicon {
            corpora,
            wordlists,
            output,
        } => commands::lexicon(&corpora, &wordlists, &output),
        Command::Train {
            backend,
            train,
            lexicon,
            lm_corpus,
            output,
            ..
        } => commands::train(
            backend,
            &train,
            lexicon.as_deref(),
            &lm_corpus,
            &output,
            &config,
        ),
        Command::Normalize {
            model,
            input,
            output,
            details,
        } => commands::normalize(&model, input.as_deref(), output.as_deref(), details),
        Command::Evaluate {
            test,
            model,
            predictions,
            train,
            stem_lang,
            system,
            output,
            tsv,
        } => {
            let source = match (model, predictions) {
                (Some(m), _) => commands::PredictionSource::Model(m),
                (None, Some(p)) => commands::PredictionSource::File(p),
                (None, None) => unreachable!("clap requires one of --model and --predictions"),
            };
            commands::evaluate(
                &test,
                &source,
                train.as_deref(),
                stem_lang,
                system,
                output.as_deref(),
                tsv,
            )
        }
        Command::Compare { reports } => commands::compare(&reports),
        Command::Hybrid {
            lookup,
            backoff,
            test,
            output,
            save_model,
        } => commands::hybrid(
            &lookup,
            &backoff,
            &test,
            output.as_deref(),
            save_model.as_deref(),
        ),
        Command::Curve {
            backend,
            train,
            dev,
            sizes,
            max_splits,
            lexicon,
            output,
        } => commands::curve(
            backend,
            &train,
            &dev,
            &sizes,
            max_splits,
            lexicon.as_deref(),
            output.as_deref(),
            &config,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
