//! The shared normalizer contract: candidates, trained models of every
//! backend, the chained combination and the seen/unseen hybrid.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelConfig, ChannelModel};
use crate::corpus::{Dataset, Lexicon};
use crate::distance::{DistanceModel, DEFAULT_ITERATIONS, DEFAULT_THRESHOLD};
use crate::error::{Error, Result};
use crate::lookup::LookupTable;
use crate::rules::RuleSet;

/// Score of a candidate that no backend supports. Finite so that scores
/// can always be compared and summed.
pub const SENTINEL_SCORE: f64 = -1e9;

pub const MODEL_FORMAT: &str = "histnorm-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Identity,
    Lookup,
    Rules,
    Distance,
    Channel,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Origin::Identity => "identity",
            Origin::Lookup => "lookup",
            Origin::Rules => "rules",
            Origin::Distance => "distance",
            Origin::Channel => "channel",
        })
    }
}

/// A proposed normalization. Higher scores are better.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub form: String,
    pub score: f64,
    pub origin: Origin,
}

impl Candidate {
    pub fn new(form: impl Into<String>, score: f64, origin: Origin) -> Self {
        Candidate {
            form: form.into(),
            score,
            origin,
        }
    }

    /// The unchanged token with the sentinel score.
    pub fn identity(token: &str) -> Self {
        Candidate::new(token, SENTINEL_SCORE, Origin::Identity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Lookup,
    Rules,
    Distance,
    Channel,
    Chain,
    Hybrid,
}

impl Backend {
    pub const TRAINABLE: [Backend; 5] = [
        Backend::Lookup,
        Backend::Rules,
        Backend::Distance,
        Backend::Channel,
        Backend::Chain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Backend::Lookup => "lookup",
            Backend::Rules => "rules",
            Backend::Distance => "distance",
            Backend::Channel => "channel",
            Backend::Chain => "chain",
            Backend::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lookup" => Ok(Backend::Lookup),
            "rules" => Ok(Backend::Rules),
            "distance" => Ok(Backend::Distance),
            "channel" => Ok(Backend::Channel),
            "chain" | "combined" => Ok(Backend::Chain),
            "hybrid" => Ok(Backend::Hybrid),
            other => Err(Error::Config(format!(
                "unknown backend '{other}' (expected lookup, rules, distance, channel or chain)"
            ))),
        }
    }
}

/// Members of a chained normalizer, tried in this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Lookup,
    Rules,
    Distance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DistanceConfig {
    pub iterations: usize,
    pub threshold: f64,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        DistanceConfig {
            iterations: DEFAULT_ITERATIONS,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainConfig {
    pub components: Vec<Component>,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            components: vec![Component::Lookup, Component::Rules, Component::Distance],
        }
    }
}

/// Per-backend training settings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub distance: DistanceConfig,
    pub channel: ChannelConfig,
    pub chain: ChainConfig,
}

/// Lookup, then lexicon-verified rules, then thresholded distance search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainModel {
    components: Vec<Component>,
    lookup: Option<LookupTable>,
    rules: Option<RuleSet>,
    distance: Option<DistanceModel>,
    // only stored separately when there is no distance member
    lexicon: Option<Lexicon>,
}

impl ChainModel {
    pub fn train(pairs: &Dataset, lexicon: Option<&Lexicon>, config: &TrainConfig) -> Result<Self> {
        let components = config.chain.components.clone();
        if components.is_empty() {
            return Err(Error::Config("a chain needs at least one component".into()));
        }
        let needs_lexicon = components
            .iter()
            .any(|c| matches!(c, Component::Rules | Component::Distance));
        let lexicon = match (needs_lexicon, lexicon) {
            (true, None) => {
                return Err(Error::Config(
                    "the chain backend requires a lexicon (--lexicon)".into(),
                ))
            }
            (true, Some(l)) if l.is_empty() => {
                return Err(Error::Config(
                    "the chain backend requires a non-empty lexicon".into(),
                ))
            }
            (_, l) => l,
        };
        let has = |c: Component| components.contains(&c);
        let lookup = has(Component::Lookup).then(|| LookupTable::train(pairs));
        let rules = if has(Component::Rules) {
            Some(RuleSet::learn(pairs)?)
        } else {
            None
        };
        let distance = if has(Component::Distance) {
            Some(DistanceModel::train(
                pairs,
                lexicon.cloned().unwrap_or_default(),
                config.distance.iterations,
                config.distance.threshold,
            )?)
        } else {
            None
        };
        let lexicon = if distance.is_none() && rules.is_some() {
            lexicon.cloned()
        } else {
            None
        };
        Ok(ChainModel {
            components,
            lookup,
            rules,
            distance,
            lexicon,
        })
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn lookup(&self) -> Option<&LookupTable> {
        self.lookup.as_ref()
    }

    pub fn rules(&self) -> Option<&RuleSet> {
        self.rules.as_ref()
    }

    pub fn distance(&self) -> Option<&DistanceModel> {
        self.distance.as_ref()
    }

    fn lexicon(&self) -> Option<&Lexicon> {
        self.distance
            .as_ref()
            .map(|d| &d.lexicon)
            .or(self.lexicon.as_ref())
    }

    pub fn normalize(&self, token: &str) -> Candidate {
        for component in &self.components {
            match component {
                Component::Lookup => {
                    if let Some(c) = self.lookup.as_ref().map(|t| t.normalize(token)) {
                        if c.origin == Origin::Lookup {
                            return c;
                        }
                    }
                }
                Component::Rules => {
                    if let (Some(rules), Some(lexicon)) = (&self.rules, self.lexicon()) {
                        let c = rules.apply(token);
                        if lexicon.contains(&c.form) {
                            return c;
                        }
                    }
                }
                Component::Distance => {
                    if let Some(d) = &self.distance {
                        let c = d.normalize(token);
                        if d.fires(&c) {
                            return c;
                        }
                    }
                }
            }
        }
        Candidate::identity(token)
    }
}

/// Lookup for tokens seen in training, a learned model for the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridModel {
    pub lookup: NormalizerModel,
    pub backoff: NormalizerModel,
}

impl HybridModel {
    pub fn new(lookup: NormalizerModel, backoff: NormalizerModel) -> Result<Self> {
        if lookup.backend() != Backend::Lookup {
            return Err(Error::Config(format!(
                "hybrid needs a lookup model first, got {}",
                lookup.backend()
            )));
        }
        if lookup.source_vocabulary != backoff.source_vocabulary {
            return Err(Error::Config(
                "lookup and backoff models were trained on different data (source vocabularies differ)"
                    .into(),
            ));
        }
        Ok(HybridModel { lookup, backoff })
    }

    pub fn normalize(&self, token: &str) -> Candidate {
        if self.lookup.is_seen(token) {
            self.lookup.normalize(token)
        } else {
            self.backoff.normalize(token)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", content = "payload", rename_all = "lowercase")]
pub enum Payload {
    Lookup(LookupTable),
    Rules(RuleSet),
    Distance(DistanceModel),
    Channel(ChannelModel),
    Chain(ChainModel),
    Hybrid(Box<HybridModel>),
}

/// A trained normalizer of any backend, with the set of source types it
/// saw in training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizerModel {
    format: String,
    version: u32,
    pub source_vocabulary: BTreeSet<String>,
    pub model: Payload,
}

fn vocabulary(pairs: &Dataset) -> BTreeSet<String> {
    pairs.pairs.iter().map(|p| p.source.clone()).collect()
}

fn require_data(backend: Backend, pairs: &Dataset) -> Result<()> {
    if pairs.is_empty() {
        Err(Error::Training(format!(
            "the {backend} backend needs at least one training pair"
        )))
    } else {
        Ok(())
    }
}

impl NormalizerModel {
    pub fn from_parts(source_vocabulary: BTreeSet<String>, model: Payload) -> Self {
        NormalizerModel {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            source_vocabulary,
            model,
        }
    }

    pub fn train(
        backend: Backend,
        pairs: &Dataset,
        lexicon: Option<&Lexicon>,
        config: &TrainConfig,
    ) -> Result<Self> {
        let payload =
            match backend {
                Backend::Lookup => Payload::Lookup(LookupTable::train(pairs)),
                Backend::Rules => {
                    require_data(backend, pairs)?;
                    Payload::Rules(RuleSet::learn(pairs)?)
                }
                Backend::Distance => {
                    let lexicon = lexicon.ok_or_else(|| {
                        Error::Config("the distance backend requires a lexicon (--lexicon)".into())
                    })?;
                    require_data(backend, pairs)?;
                    Payload::Distance(DistanceModel::train(
                        pairs,
                        lexicon.clone(),
                        config.distance.iterations,
                        config.distance.threshold,
                    )?)
                }
                Backend::Channel => {
                    return NormalizerModel::train_channel(pairs, None, &config.channel)
                }
                Backend::Chain => {
                    if config
                        .chain
                        .components
                        .iter()
                        .any(|c| *c != Component::Lookup)
                    {
                        require_data(backend, pairs)?;
                    }
                    Payload::Chain(ChainModel::train(pairs, lexicon, config)?)
                }
                Backend::Hybrid => return Err(Error::Config(
                    "hybrid models are assembled from a trained lookup and a trained backoff model"
                        .into(),
                )),
            };
        Ok(NormalizerModel::from_parts(vocabulary(pairs), payload))
    }

    /// Channel model, optionally with extra language-model material.
    pub fn train_channel(
        pairs: &Dataset,
        extra_lm: Option<&[String]>,
        config: &ChannelConfig,
    ) -> Result<Self> {
        require_data(Backend::Channel, pairs)?;
        let model = ChannelModel::train(pairs, extra_lm, config)?;
        Ok(NormalizerModel::from_parts(
            vocabulary(pairs),
            Payload::Channel(model),
        ))
    }

    pub fn hybrid(lookup: NormalizerModel, backoff: NormalizerModel) -> Result<Self> {
        let vocab = lookup.source_vocabulary.clone();
        let h = HybridModel::new(lookup, backoff)?;
        Ok(NormalizerModel::from_parts(
            vocab,
            Payload::Hybrid(Box::new(h)),
        ))
    }

    pub fn backend(&self) -> Backend {
        match &self.model {
            Payload::Lookup(_) => Backend::Lookup,
            Payload::Rules(_) => Backend::Rules,
            Payload::Distance(_) => Backend::Distance,
            Payload::Channel(_) => Backend::Channel,
            Payload::Chain(_) => Backend::Chain,
            Payload::Hybrid(_) => Backend::Hybrid,
        }
    }

    pub fn is_seen(&self, token: &str) -> bool {
        self.source_vocabulary.contains(token)
    }

    /// Always yields exactly one candidate with a non-empty form.
    pub fn normalize(&self, token: &str) -> Candidate {
        let c = match &self.model {
            Payload::Lookup(t) => t.normalize(token),
            Payload::Rules(r) => r.apply(token),
            Payload::Distance(d) => d.normalize(token),
            Payload::Channel(m) => m.decode(token),
            Payload::Chain(c) => c.normalize(token),
            Payload::Hybrid(h) => h.normalize(token),
        };
        if c.form.is_empty() && !token.is_empty() {
            return Candidate::identity(token);
        }
        c
    }

    /// Normalizes a token stream in parallel, preserving order.
    pub fn normalize_all<S: AsRef<str> + Sync>(&self, tokens: &[S]) -> Vec<Candidate> {
        tokens
            .par_iter()
            .map(|t| self.normalize(t.as_ref()))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: NormalizerModel =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if model.format != MODEL_FORMAT {
            return Err(Error::Format(format!(
                "not a model file (format tag '{}')",
                model.format
            )));
        }
        if model.version != MODEL_VERSION {
            return Err(Error::Format(format!(
                "unsupported model version {} (expected {MODEL_VERSION})",
                model.version
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        NormalizerModel::from_json(&text)
    }
}

/// Lookup output for seen tokens, backoff output otherwise.
pub fn normalize_hybrid(
    lookup: &NormalizerModel,
    backoff: &NormalizerModel,
    token: &str,
) -> Result<Candidate> {
    if lookup.source_vocabulary != backoff.source_vocabulary {
        return Err(Error::Config(
            "lookup and backoff models were trained on different data (source vocabularies differ)"
                .into(),
        ));
    }
    Ok(if lookup.is_seen(token) {
        lookup.normalize(token)
    } else {
        backoff.normalize(token)
    })
}
