use std::collections::BTreeMap;
use std::path::Path;

use crate::baselines::FeatureMatrix;
use crate::error::{Error, Result};
use crate::webgraph::io::{read_edges, NodeTable};
use crate::webgraph::{normalize_domain, AttributeManifest, EdgeKind, EdgeRecord, NodeRecord};

/// Source of top backlink and outlink records for a domain.
pub trait LinkDataClient {
    /// Up to `n` records `source -> domain`, most links first.
    fn get_backlinks(&self, domain: &str, n: usize) -> Result<Vec<EdgeRecord>>;
    /// Up to `n` records `domain -> target`, most links first.
    fn get_outlinks(&self, domain: &str, n: usize) -> Result<Vec<EdgeRecord>>;
}

/// Replays edge records in the edges-file format.
///
/// Backlink queries read `backlink` records by target, outlink queries read
/// `outlink` records by source. Ties in `links` are broken by the other
/// endpoint's name.
#[derive(Debug, Clone, Default)]
pub struct FixtureLinkClient {
    backlinks: BTreeMap<String, Vec<EdgeRecord>>,
    outlinks: BTreeMap<String, Vec<EdgeRecord>>,
}

impl FixtureLinkClient {
    pub fn new(records: impl IntoIterator<Item = EdgeRecord>) -> Result<Self> {
        let mut client = Self::default();
        for mut r in records {
            r.source = normalize_domain(&r.source)?;
            r.target = normalize_domain(&r.target)?;
            match r.kind {
                EdgeKind::Backlink => client.backlinks.entry(r.target.clone()).or_default().push(r),
                EdgeKind::Outlink => client.outlinks.entry(r.source.clone()).or_default().push(r),
            }
        }
        for list in client.backlinks.values_mut() {
            list.sort_by(|a, b| b.links.cmp(&a.links).then_with(|| a.source.cmp(&b.source)));
        }
        for list in client.outlinks.values_mut() {
            list.sort_by(|a, b| b.links.cmp(&a.links).then_with(|| a.target.cmp(&b.target)));
        }
        Ok(client)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::new(read_edges(path)?)
    }

    pub fn has_outlinks(&self, domain: &str) -> bool {
        self.outlinks.contains_key(domain)
    }
}

fn top(map: &BTreeMap<String, Vec<EdgeRecord>>, domain: &str, n: usize) -> Vec<EdgeRecord> {
    map.get(domain)
        .map(|v| v.iter().take(n).cloned().collect())
        .unwrap_or_default()
}

impl LinkDataClient for FixtureLinkClient {
    fn get_backlinks(&self, domain: &str, n: usize) -> Result<Vec<EdgeRecord>> {
        Ok(top(&self.backlinks, domain, n))
    }

    fn get_outlinks(&self, domain: &str, n: usize) -> Result<Vec<EdgeRecord>> {
        Ok(top(&self.outlinks, domain, n))
    }
}

/// Per-domain SEO features and provider backlink totals.
pub trait FeatureSource {
    fn feature_names(&self) -> &[String];
    fn features(&self, domain: &str) -> Option<&[f64]>;
    fn backlink_total(&self, domain: &str) -> Option<u64>;

    /// Feature rows of the domains that have them, plus the domains that do not.
    fn matrix(&self, domains: &[String]) -> Result<(FeatureMatrix, Vec<String>, Vec<String>)> {
        let mut rows = Vec::new();
        let mut found = Vec::new();
        let mut missing = Vec::new();
        for d in domains {
            match self.features(d) {
                Some(f) => {
                    rows.push(f.to_vec());
                    found.push(d.clone());
                }
                None => missing.push(d.clone()),
            }
        }
        Ok((FeatureMatrix::from_rows(self.feature_names().to_vec(), &rows)?, found, missing))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TableFeatureSource {
    names: Vec<String>,
    rows: BTreeMap<String, (Vec<f64>, Option<u64>)>,
}

impl TableFeatureSource {
    pub fn new(manifest: &AttributeManifest, records: impl IntoIterator<Item = NodeRecord>) -> Result<Self> {
        let mut rows = BTreeMap::new();
        for r in records {
            let domain = normalize_domain(&r.domain)?;
            if r.attributes.len() != manifest.len() {
                return Err(Error::ManifestMismatch {
                    domain,
                    expected: manifest.len(),
                    found: r.attributes.len(),
                });
            }
            if rows.insert(domain.clone(), (r.attributes, r.provider_backlink_total)).is_some() {
                return Err(Error::DuplicateDomain(domain));
            }
        }
        Ok(Self {
            names: manifest.names().to_vec(),
            rows,
        })
    }

    pub fn from_table(table: NodeTable) -> Result<Self> {
        let (manifest, records) = table.into_records()?;
        Self::new(&manifest, records)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

impl FeatureSource for TableFeatureSource {
    fn feature_names(&self) -> &[String] {
        &self.names
    }

    fn features(&self, domain: &str) -> Option<&[f64]> {
        self.rows.get(domain).map(|(f, _)| f.as_slice())
    }

    fn backlink_total(&self, domain: &str) -> Option<u64> {
        self.rows.get(domain).and_then(|(_, t)| *t)
    }
}
