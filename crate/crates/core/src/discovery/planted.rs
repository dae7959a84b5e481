//! Synthetic link ecosystems with planted link schemes.
//!
//! Known unreliable seeds are linked heavily by a few scheme domains, which
//! also link to hidden unreliable domains absent from the seed list. Ordinary
//! backlinking sites touch at most a couple of seeds with few links. Every
//! domain gets features with separate news, unreliability, and extremity
//! signals so the flat classifiers have something to learn.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{index, IndexedRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::client::TableFeatureSource;
use super::evaluate::OracleLabel;
use crate::error::{Error, Result};
use crate::ingest::{BinaryLabels, ReliabilityGrade};
use crate::webgraph::{AttributeManifest, EdgeKind, EdgeRecord, NodeRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantedConfig {
    pub unreliable_seeds: usize,
    pub reliable_seeds: usize,
    pub hidden: usize,
    pub schemes: usize,
    /// Unreliable seeds each scheme links to.
    pub seeds_per_scheme: usize,
    /// Schemes linking to each hidden domain.
    pub schemes_per_hidden: usize,
    pub ordinary_sites: usize,
    pub noise_sites: usize,
    pub noise_per_scheme: usize,
    /// Probability that an unreliable seed links to one hidden domain.
    pub seed_hidden_probability: f64,
    pub mainstream: usize,
    pub random_domains: usize,
    /// Fraction of random domains that are news sites.
    pub random_news_fraction: f64,
    /// Fraction of unreliable domains with extreme bias.
    pub extreme_fraction: f64,
    /// Mean shift of each informative feature.
    pub signal: f64,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        Self {
            unreliable_seeds: 60,
            reliable_seeds: 60,
            hidden: 50,
            schemes: 12,
            seeds_per_scheme: 8,
            schemes_per_hidden: 3,
            ordinary_sites: 100,
            noise_sites: 400,
            noise_per_scheme: 15,
            seed_hidden_probability: 0.7,
            mainstream: 3,
            random_domains: 400,
            random_news_fraction: 0.02,
            extreme_fraction: 0.8,
            signal: 4.0,
            seed: 0,
        }
    }
}

impl PlantedConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::invalid(format!("planted config: {m}")));
        if self.unreliable_seeds < 2 || self.reliable_seeds < 2 {
            return bad("need at least 2 seeds of each class");
        }
        if self.schemes == 0 || self.mainstream == 0 || self.noise_sites == 0 {
            return bad("schemes, mainstream and noise_sites must be positive");
        }
        if self.seeds_per_scheme > self.unreliable_seeds {
            return bad("seeds_per_scheme exceeds unreliable_seeds");
        }
        if self.schemes_per_hidden == 0 || self.schemes_per_hidden > self.schemes {
            return bad("schemes_per_hidden must lie in 1..=schemes");
        }
        if self.noise_per_scheme > self.noise_sites {
            return bad("noise_per_scheme exceeds noise_sites");
        }
        for (name, v) in [
            ("seed_hidden_probability", self.seed_hidden_probability),
            ("random_news_fraction", self.random_news_fraction),
            ("extreme_fraction", self.extreme_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(&format!("{name} must lie in [0, 1]"));
            }
        }
        if !self.signal.is_finite() {
            return bad("signal must be finite");
        }
        Ok(())
    }
}

/// Feature columns of planted domains.
pub const PLANTED_FEATURES: [&str; 6] = ["news", "unreliability", "extremity", "authority", "noise_a", "noise_b"];

#[derive(Debug, Clone)]
pub struct PlantedEcosystem {
    pub manifest: AttributeManifest,
    pub nodes: Vec<NodeRecord>,
    /// Backlink pulls into seeds and outlink pulls from every linking domain.
    pub edges: Vec<EdgeRecord>,
    /// Labeled seed list.
    pub seeds: BTreeMap<String, BinaryLabels>,
    pub hidden: BTreeSet<String>,
    pub schemes: BTreeSet<String>,
    /// Hidden domains are unreliable and mainstream sites reliable.
    pub oracle: BTreeMap<String, OracleLabel>,
    pub random_domains: Vec<String>,
}

impl PlantedEcosystem {
    pub fn features(&self) -> TableFeatureSource {
        TableFeatureSource::new(&self.manifest, self.nodes.iter().cloned()).expect("generated nodes are consistent")
    }

    /// Backlinking and outlinked domains of the seeds, seeds excluded.
    pub fn seed_neighbourhood(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for e in &self.edges {
            let (s, t) = (self.seeds.contains_key(&e.source), self.seeds.contains_key(&e.target));
            if s && !t {
                out.insert(e.target.clone());
            } else if t && !s {
                out.insert(e.source.clone());
            }
        }
        out
    }
}

struct Profile {
    news: bool,
    unreliable: bool,
    extreme: bool,
    authority: f64,
}

pub fn generate_planted_ecosystem(config: &PlantedConfig) -> Result<PlantedEcosystem> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let names = |prefix: &str, n: usize| -> Vec<String> { (0..n).map(|i| format!("{prefix}{i:04}.test")).collect() };
    let useeds = names("unreliable-seed", config.unreliable_seeds);
    let rseeds = names("reliable-seed", config.reliable_seeds);
    let hidden = names("hidden", config.hidden);
    let schemes = names("scheme", config.schemes);
    let ordinary = names("site", config.ordinary_sites);
    let noise = names("noise", config.noise_sites);
    let mainstream = names("mainstream", config.mainstream);
    let random = names("random", config.random_domains);

    let mut edges = Vec::new();
    let mut push = |s: &str, t: &str, links: u64, into_seed: bool, rng: &mut ChaCha8Rng| {
        let ref_pages = rng.random_range(1..=links);
        for kind in [EdgeKind::Outlink, EdgeKind::Backlink] {
            if kind == EdgeKind::Backlink && !into_seed {
                continue;
            }
            edges.push(EdgeRecord {
                source: s.to_string(),
                target: t.to_string(),
                kind,
                links,
                ref_pages,
            });
        }
    };

    // Link counts are tiered: mainstream > seeds > hidden > everything else.
    let mut hidden_of: Vec<Vec<usize>> = vec![Vec::new(); config.schemes];
    for h in 0..config.hidden {
        for k in index::sample(&mut rng, config.schemes, config.schemes_per_hidden) {
            hidden_of[k].push(h);
        }
    }
    for (k, scheme) in schemes.iter().enumerate() {
        for m in &mainstream {
            push(scheme, m, rng.random_range(5000..10_000), false, &mut rng);
        }
        for s in index::sample(&mut rng, useeds.len(), config.seeds_per_scheme) {
            push(scheme, &useeds[s], rng.random_range(500..3000), true, &mut rng);
        }
        for &h in &hidden_of[k] {
            push(scheme, &hidden[h], rng.random_range(100..500), false, &mut rng);
        }
        for s in index::sample(&mut rng, rseeds.len(), 2.min(rseeds.len())) {
            push(scheme, &rseeds[s], rng.random_range(1..100), true, &mut rng);
        }
        for n in index::sample(&mut rng, noise.len(), config.noise_per_scheme) {
            push(scheme, &noise[n], rng.random_range(1..100), false, &mut rng);
        }
    }
    for site in &ordinary {
        let touches = if rng.random::<f64>() < 0.2 { 2 } else { 1 };
        for s in index::sample(&mut rng, useeds.len(), touches) {
            push(site, &useeds[s], rng.random_range(1..100), true, &mut rng);
        }
        for s in index::sample(&mut rng, rseeds.len(), 2) {
            push(site, &rseeds[s], rng.random_range(1..300), true, &mut rng);
        }
        let m = mainstream.choose(&mut rng).expect("mainstream is non-empty");
        push(site, m, rng.random_range(1..1000), false, &mut rng);
    }
    for (i, seed) in useeds.iter().enumerate() {
        for s in index::sample(&mut rng, useeds.len() - 1, 2.min(useeds.len() - 1)) {
            let s = if s >= i { s + 1 } else { s };
            push(seed, &useeds[s], rng.random_range(1..200), true, &mut rng);
        }
        if !hidden.is_empty() && rng.random::<f64>() < config.seed_hidden_probability {
            let h = hidden.choose(&mut rng).expect("hidden is non-empty");
            push(seed, h, rng.random_range(1..200), false, &mut rng);
        }
        let n = noise.choose(&mut rng).expect("noise is non-empty");
        push(seed, n, rng.random_range(1..50), false, &mut rng);
    }
    for (i, seed) in rseeds.iter().enumerate() {
        for s in index::sample(&mut rng, rseeds.len() - 1, 2.min(rseeds.len() - 1)) {
            let s = if s >= i { s + 1 } else { s };
            push(seed, &rseeds[s], rng.random_range(1..200), true, &mut rng);
        }
        let m = mainstream.choose(&mut rng).expect("mainstream is non-empty");
        push(seed, m, rng.random_range(1..500), false, &mut rng);
        let n = noise.choose(&mut rng).expect("noise is non-empty");
        push(seed, n, rng.random_range(1..50), false, &mut rng);
    }

    let mut seeds = BTreeMap::new();
    let mut profiles: Vec<(String, Profile)> = Vec::new();
    let bias = |extreme: bool, rng: &mut ChaCha8Rng| -> i8 {
        let sign = if rng.random::<bool>() { 1 } else { -1 };
        sign * if extreme { 2 } else { 1 }
    };
    for d in &useeds {
        let extreme = rng.random::<f64>() < config.extreme_fraction;
        let grade = *[ReliabilityGrade::VeryLow, ReliabilityGrade::Low, ReliabilityGrade::Mixed]
            .choose(&mut rng)
            .expect("non-empty");
        seeds.insert(d.clone(), BinaryLabels::from_parts(grade, Some(bias(extreme, &mut rng))));
        profiles.push((d.clone(), news_profile(true, extreme)));
    }
    for d in &rseeds {
        let extreme = rng.random::<f64>() < 0.1;
        let grade = if rng.random::<bool>() {
            ReliabilityGrade::High
        } else {
            ReliabilityGrade::VeryHigh
        };
        seeds.insert(d.clone(), BinaryLabels::from_parts(grade, Some(bias(extreme, &mut rng))));
        profiles.push((d.clone(), news_profile(false, extreme)));
    }
    for d in &hidden {
        let extreme = rng.random::<f64>() < config.extreme_fraction;
        profiles.push((d.clone(), news_profile(true, extreme)));
    }
    for d in &mainstream {
        let mut p = news_profile(false, false);
        p.authority = 3.0;
        profiles.push((d.clone(), p));
    }
    for d in schemes.iter().chain(&ordinary).chain(&noise) {
        profiles.push((d.clone(), other_profile()));
    }
    for d in &random {
        let p = if rng.random::<f64>() < config.random_news_fraction {
            news_profile(rng.random::<f64>() < 0.1, false)
        } else {
            other_profile()
        };
        profiles.push((d.clone(), p));
    }

    let nodes = profiles
        .into_iter()
        .map(|(domain, p)| {
            let shift = |on: bool| if on { config.signal } else { 0.0 };
            let attributes = [shift(p.news), shift(p.unreliable), shift(p.extreme), p.authority, 0.0, 0.0]
                .iter()
                .map(|m| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    m + z
                })
                .collect();
            // News sites clear the usual 10k backlink bar; other sites straddle it.
            let exponent = if p.news {
                rng.random_range(4.5..6.5)
            } else {
                rng.random_range(2.0..6.0)
            };
            NodeRecord {
                domain,
                provider_backlink_total: Some(10f64.powf(exponent).round() as u64),
                provider_outlink_total: Some(10f64.powf(rng.random_range(2.0..5.0)).round() as u64),
                attributes,
            }
        })
        .collect();

    let mut oracle: BTreeMap<String, OracleLabel> = hidden.iter().map(|d| (d.clone(), OracleLabel::Unreliable)).collect();
    oracle.extend(mainstream.iter().map(|d| (d.clone(), OracleLabel::Reliable)));

    Ok(PlantedEcosystem {
        manifest: AttributeManifest::new(PLANTED_FEATURES).expect("unique names"),
        nodes,
        edges,
        seeds,
        hidden: hidden.into_iter().collect(),
        schemes: schemes.into_iter().collect(),
        oracle,
        random_domains: random,
    })
}

fn news_profile(unreliable: bool, extreme: bool) -> Profile {
    Profile {
        news: true,
        unreliable,
        extreme,
        authority: 1.0,
    }
}

fn other_profile() -> Profile {
    Profile {
        news: false,
        unreliable: false,
        extreme: false,
        authority: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure_matches_config() {
        let cfg = PlantedConfig::default();
        let eco = generate_planted_ecosystem(&cfg).unwrap();
        assert_eq!(eco.seeds.len(), cfg.unreliable_seeds + cfg.reliable_seeds);
        assert_eq!(eco.hidden.len(), cfg.hidden);
        assert_eq!(eco.schemes.len(), cfg.schemes);
        let features = eco.features();
        for e in &eco.edges {
            assert!(e.links >= 1 && e.ref_pages >= 1 && e.ref_pages <= e.links);
            assert!(crate::discovery::FeatureSource::features(&features, &e.source).is_some());
            assert!(crate::discovery::FeatureSource::features(&features, &e.target).is_some());
            if e.kind == EdgeKind::Backlink {
                assert!(eco.seeds.contains_key(&e.target));
            }
        }
        assert!(eco.hidden.iter().all(|h| !eco.seeds.contains_key(h)));
    }

    #[test]
    fn same_seed_same_ecosystem() {
        let a = generate_planted_ecosystem(&PlantedConfig::default()).unwrap();
        let b = generate_planted_ecosystem(&PlantedConfig::default()).unwrap();
        assert_eq!(a.edges, b.edges);
        assert_eq!(a.nodes, b.nodes);
    }

    #[test]
    fn rejects_impossible_sampling() {
        let cfg = PlantedConfig {
            schemes_per_hidden: 13,
            ..PlantedConfig::default()
        };
        assert!(generate_planted_ecosystem(&cfg).is_err());
    }
}
