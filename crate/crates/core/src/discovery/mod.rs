//! Discovery of unreliable domains through link schemes.
//!
//! Known unreliable seeds pull their top backlinks; backlinking domains that
//! link broadly and heavily to unreliable seeds are flagged as link schemes;
//! the schemes' top outlinks become raw candidates, which are then narrowed by
//! a backlink-total floor and by the news, absolute-bias, and reliability
//! classifiers in that order.

mod client;
mod evaluate;
mod expand;
mod news;
pub mod planted;
mod schemes;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::baselines::{predict_proba, FittedModel};
use crate::error::{Error, Result};
use crate::ingest::{BinaryLabels, Reliability};
use crate::webgraph::{build_graph, AttributeManifest, AttributedWebgraph, NodeRecord};

pub use client::{FeatureSource, FixtureLinkClient, LinkDataClient, TableFeatureSource};
pub use evaluate::{misinfo_rate, partial_f1, MisinfoRate, OracleLabel, PartialF1};
pub use expand::{expand_outlinks, Expansion};
pub use news::{train_news_classifier, NewsClassifier};
pub use planted::{generate_planted_ecosystem, PlantedConfig, PlantedEcosystem};
pub use schemes::{identify_link_schemes, scheme_candidates, LinkScheme, LinkSchemeCriteria, SchemeMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub backlinks_per_seed: usize,
    pub criteria: LinkSchemeCriteria,
    pub scheme_mode: SchemeMode,
    pub outlinks_per_scheme: usize,
    /// Candidates need at least this many provider-reported backlinks.
    pub backlink_filter_threshold: u64,
    pub news_model: Option<PathBuf>,
    pub abs_bias_model: Option<PathBuf>,
    pub reliability_model: Option<PathBuf>,
    /// Candidates pass a classifier when its positive probability exceeds
    /// the threshold.
    pub news_threshold: f64,
    pub abs_bias_threshold: f64,
    pub reliability_threshold: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            backlinks_per_seed: 100,
            criteria: LinkSchemeCriteria::default(),
            scheme_mode: SchemeMode::default(),
            outlinks_per_scheme: 100,
            backlink_filter_threshold: crate::ingest::DEFAULT_BACKLINK_THRESHOLD,
            news_model: None,
            abs_bias_model: None,
            reliability_model: None,
            news_threshold: 0.5,
            abs_bias_threshold: 0.5,
            reliability_threshold: 0.5,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.backlinks_per_seed == 0 || self.outlinks_per_scheme == 0 {
            return Err(Error::Config(
                "backlinks_per_seed and outlinks_per_scheme must be positive".into(),
            ));
        }
        for (name, t) in [
            ("news_threshold", self.news_threshold),
            ("abs_bias_threshold", self.abs_bias_threshold),
            ("reliability_threshold", self.reliability_threshold),
        ] {
            if t.is_nan() {
                return Err(Error::Config(format!("{name} is NaN")));
            }
        }
        Ok(())
    }

    /// Every classifier threshold set to accept all candidates.
    pub fn accept_all(mut self) -> Self {
        self.backlink_filter_threshold = 0;
        self.news_threshold = f64::NEG_INFINITY;
        self.abs_bias_threshold = f64::NEG_INFINITY;
        self.reliability_threshold = f64::NEG_INFINITY;
        self
    }
}

/// The three fitted filters, positive class first: news, extreme, unreliable.
#[derive(Debug, Clone, PartialEq)]
pub struct Classifiers {
    pub news: FittedModel,
    pub abs_bias: FittedModel,
    pub reliability: FittedModel,
}

impl Classifiers {
    /// Loads the checkpoints named in the config.
    pub fn load(config: &PipelineConfig) -> Result<Self> {
        let get = |p: &Option<PathBuf>, name: &str| match p {
            Some(p) => FittedModel::load(p),
            None => Err(Error::Config(format!("no {name} checkpoint configured"))),
        };
        Ok(Self {
            news: get(&config.news_model, "news_model")?,
            abs_bias: get(&config.abs_bias_model, "abs_bias_model")?,
            reliability: get(&config.reliability_model, "reliability_model")?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub domain: String,
    /// Schemes whose outlinks contained the domain.
    pub provenance: Vec<String>,
    pub passed_backlink_filter: bool,
    pub news_score: Option<f64>,
    pub passed_news: bool,
    pub abs_bias_score: Option<f64>,
    pub passed_abs_bias: bool,
    pub reliability_score: Option<f64>,
    pub passed_reliability: bool,
}

impl Candidate {
    /// Each stage flag implies every earlier one.
    pub fn flags_monotone(&self) -> bool {
        let f = [
            self.passed_backlink_filter,
            self.passed_news,
            self.passed_abs_bias,
            self.passed_reliability,
        ];
        f.windows(2).all(|w| w[0] || !w[1])
    }
}

/// Raw candidates in domain order, with per-stage outcomes.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CandidateSet {
    pub records: Vec<Candidate>,
}

pub const CANDIDATE_COLUMNS: [&str; 9] = [
    "domain",
    "provenance",
    "passed_backlink_filter",
    "news_score",
    "passed_news",
    "abs_bias_score",
    "passed_abs_bias",
    "reliability_score",
    "passed_reliability",
];

fn opt_float(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn domains(&self) -> BTreeSet<String> {
        self.records.iter().map(|c| c.domain.clone()).collect()
    }

    /// Domains that passed every filter.
    pub fn discovered(&self) -> BTreeSet<String> {
        self.records
            .iter()
            .filter(|c| c.passed_reliability)
            .map(|c| c.domain.clone())
            .collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CANDIDATE_COLUMNS)?;
        for c in &self.records {
            w.write_record([
                c.domain.clone(),
                c.provenance.join(";"),
                c.passed_backlink_filter.to_string(),
                opt_float(c.news_score),
                c.passed_news.to_string(),
                opt_float(c.abs_bias_score),
                c.passed_abs_bias.to_string(),
                opt_float(c.reliability_score),
                c.passed_reliability.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageRecord {
    pub stage: String,
    pub in_count: usize,
    pub out_count: usize,
    /// `key=value` pairs joined by `;`.
    pub parameters: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct StageReport {
    pub stages: Vec<StageRecord>,
}

pub const STAGE_COLUMNS: [&str; 4] = ["stage", "in_count", "out_count", "parameters"];

/// Stage names in execution order.
pub const STAGES: [&str; 7] = [
    "backlink_pull",
    "link_schemes",
    "expand_outlinks",
    "backlink_filter",
    "news",
    "abs_bias",
    "reliability",
];

impl StageReport {
    fn push(&mut self, stage: &str, in_count: usize, out_count: usize, parameters: String) {
        self.stages.push(StageRecord {
            stage: stage.into(),
            in_count,
            out_count,
            parameters,
        });
    }

    pub fn get(&self, stage: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.stage == stage)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(STAGE_COLUMNS)?;
        for s in &self.stages {
            w.write_record([
                s.stage.clone(),
                s.in_count.to_string(),
                s.out_count.to_string(),
                s.parameters.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Parameters and stage counts in the layout of the discovery summary table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiscoverySummary {
    pub seeds: usize,
    pub backlinks_per_seed: usize,
    pub alpha_min: u64,
    pub beta_min: u64,
    pub link_schemes: usize,
    pub outlinks_per_scheme: usize,
    /// Candidates past the backlink floor.
    pub candidates: usize,
    pub news: usize,
    /// News candidates classified unreliable.
    pub news_misinfo: usize,
    /// News candidates classified unreliable and extreme.
    pub news_misinfo_biased: usize,
}

pub const SUMMARY_COLUMNS: [&str; 10] = [
    "Seed",
    "Backlinks",
    "alpha_min",
    "beta_min",
    "L",
    "Outlinks",
    "MC",
    "& News",
    "& Misinfo",
    "& Biased",
];

impl DiscoverySummary {
    pub fn write_csv<W: Write>(rows: &[Self], writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(SUMMARY_COLUMNS)?;
        for r in rows {
            w.write_record(
                [
                    r.seeds,
                    r.backlinks_per_seed,
                    r.alpha_min as usize,
                    r.beta_min as usize,
                    r.link_schemes,
                    r.outlinks_per_scheme,
                    r.candidates,
                    r.news,
                    r.news_misinfo,
                    r.news_misinfo_biased,
                ]
                .map(|v| v.to_string()),
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscoveryRun {
    pub backlink_graph: AttributedWebgraph,
    pub schemes: Vec<LinkScheme>,
    pub skipped: Vec<String>,
    pub candidates: CandidateSet,
    pub report: StageReport,
    pub summary: DiscoverySummary,
}

fn params(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

/// Graph of the backlink pull; only the nodes and edges it touches.
fn backlink_graph(
    unreliable: &[String],
    client: &dyn LinkDataClient,
    per_seed: usize,
) -> Result<(AttributedWebgraph, BTreeSet<String>)> {
    let mut records = Vec::new();
    for seed in unreliable {
        records.extend(client.get_backlinks(seed, per_seed)?);
    }
    let mut domains = BTreeSet::new();
    let mut sources = BTreeSet::new();
    for r in &records {
        domains.insert(r.source.clone());
        domains.insert(r.target.clone());
        sources.insert(r.source.clone());
    }
    let nodes = domains
        .into_iter()
        .map(|domain| NodeRecord {
            domain,
            provider_backlink_total: None,
            provider_outlink_total: None,
            attributes: Vec::new(),
        })
        .collect();
    let manifest = AttributeManifest::new(Vec::<String>::new())?;
    Ok((build_graph(nodes, records, manifest)?, sources))
}

fn score_stage(
    records: &[Candidate],
    eligible: impl Fn(&Candidate) -> bool,
    model: &FittedModel,
    features: &dyn FeatureSource,
) -> Result<Vec<(usize, f64)>> {
    let idx: Vec<usize> = (0..records.len()).filter(|&i| eligible(&records[i])).collect();
    let domains: Vec<String> = idx.iter().map(|&i| records[i].domain.clone()).collect();
    let (fm, found, _) = features.matrix(&domains)?;
    if found.is_empty() {
        return Ok(Vec::new());
    }
    let probs = predict_proba(model, &fm)?;
    let pos: BTreeMap<&str, usize> = records.iter().enumerate().map(|(i, c)| (c.domain.as_str(), i)).collect();
    Ok(found.iter().zip(probs).map(|(d, p)| (pos[d.as_str()], p)).collect())
}

/// Runs the full discovery pipeline.
///
/// Candidates lacking features fail the classifier stages. Reliability is
/// scored for every news candidate so the summary can report it, but the
/// reliability flag is only set after the bias filter.
pub fn run_discovery(
    seeds: &BTreeMap<String, BinaryLabels>,
    client: &dyn LinkDataClient,
    features: &dyn FeatureSource,
    classifiers: &Classifiers,
    config: &PipelineConfig,
) -> Result<DiscoveryRun> {
    config.validate()?;
    let mut report = StageReport::default();
    let unreliable: Vec<String> = seeds
        .iter()
        .filter(|(_, l)| l.reliability == Reliability::Unreliable)
        .map(|(d, _)| d.clone())
        .collect();

    let (graph, backlinkers) = backlink_graph(&unreliable, client, config.backlinks_per_seed)?;
    report.push(
        STAGES[0],
        unreliable.len(),
        backlinkers.len(),
        params(&[("backlinks_per_seed", config.backlinks_per_seed.to_string())]),
    );

    let candidates = scheme_candidates(&graph, seeds);
    let schemes = identify_link_schemes(&graph, seeds, config.criteria, config.scheme_mode);
    report.push(
        STAGES[1],
        candidates.len(),
        schemes.len(),
        params(&[
            ("alpha_min", config.criteria.alpha_min.to_string()),
            ("beta_min", config.criteria.beta_min.to_string()),
            ("mode", config.scheme_mode.as_str().to_string()),
        ]),
    );

    let scheme_names: Vec<String> = schemes.iter().map(|s| s.domain.clone()).collect();
    let exclude: BTreeSet<String> = seeds.keys().cloned().collect();
    let expansion = expand_outlinks(&scheme_names, client, config.outlinks_per_scheme, &exclude)?;
    report.push(
        STAGES[2],
        scheme_names.len(),
        expansion.candidates.len(),
        params(&[
            ("outlinks_per_scheme", config.outlinks_per_scheme.to_string()),
            ("skipped", expansion.skipped.len().to_string()),
        ]),
    );

    let mut records: Vec<Candidate> = expansion
        .candidates
        .iter()
        .map(|(domain, provenance)| Candidate {
            domain: domain.clone(),
            provenance: provenance.clone(),
            passed_backlink_filter: features
                .backlink_total(domain)
                .is_some_and(|t| t >= config.backlink_filter_threshold),
            news_score: None,
            passed_news: false,
            abs_bias_score: None,
            passed_abs_bias: false,
            reliability_score: None,
            passed_reliability: false,
        })
        .collect();
    let count = |records: &[Candidate], f: fn(&Candidate) -> bool| records.iter().filter(|c| f(c)).count();
    let mc = count(&records, |c| c.passed_backlink_filter);
    report.push(
        STAGES[3],
        records.len(),
        mc,
        params(&[("threshold", config.backlink_filter_threshold.to_string())]),
    );

    for (i, p) in score_stage(&records, |c| c.passed_backlink_filter, &classifiers.news, features)? {
        records[i].news_score = Some(p);
        records[i].passed_news = p > config.news_threshold;
    }
    let news = count(&records, |c| c.passed_news);
    report.push(
        STAGES[4],
        mc,
        news,
        params(&[("threshold", config.news_threshold.to_string())]),
    );

    for (i, p) in score_stage(&records, |c| c.passed_news, &classifiers.abs_bias, features)? {
        records[i].abs_bias_score = Some(p);
        records[i].passed_abs_bias = p > config.abs_bias_threshold;
    }
    let biased = count(&records, |c| c.passed_abs_bias);
    report.push(
        STAGES[5],
        news,
        biased,
        params(&[("threshold", config.abs_bias_threshold.to_string())]),
    );

    for (i, p) in score_stage(&records, |c| c.passed_news, &classifiers.reliability, features)? {
        records[i].reliability_score = Some(p);
        records[i].passed_reliability = records[i].passed_abs_bias && p > config.reliability_threshold;
    }
    let final_count = count(&records, |c| c.passed_reliability);
    report.push(
        STAGES[6],
        biased,
        final_count,
        params(&[("threshold", config.reliability_threshold.to_string())]),
    );

    let news_misinfo = records
        .iter()
        .filter(|c| c.passed_news && c.reliability_score.is_some_and(|p| p > config.reliability_threshold))
        .count();
    let summary = DiscoverySummary {
        seeds: unreliable.len(),
        backlinks_per_seed: config.backlinks_per_seed,
        alpha_min: config.criteria.alpha_min,
        beta_min: config.criteria.beta_min,
        link_schemes: schemes.len(),
        outlinks_per_scheme: config.outlinks_per_scheme,
        candidates: mc,
        news,
        news_misinfo,
        news_misinfo_biased: final_count,
    };
    Ok(DiscoveryRun {
        backlink_graph: graph,
        schemes,
        skipped: expansion.skipped,
        candidates: CandidateSet { records },
        report,
        summary,
    })
}
