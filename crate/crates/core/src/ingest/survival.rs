use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use super::labels::LabelSource;
use crate::error::Result;
use crate::webgraph::io::parse_err;
use crate::webgraph::normalize_domain;

/// The backlink count below which a domain is treated as dead or marginal.
pub const DEFAULT_BACKLINK_THRESHOLD: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BacklinkFilter {
    pub kept: Vec<String>,
    pub below_threshold: Vec<String>,
    /// Domains without a provider total; excluded and reported here.
    pub unknown: Vec<String>,
}

/// Keeps domains whose provider backlink total is at least `threshold`.
pub fn filter_by_backlinks<'a, I>(domains: I, threshold: u64) -> BacklinkFilter
where
    I: IntoIterator<Item = (&'a str, Option<u64>)>,
{
    let mut out = BacklinkFilter::default();
    for (d, total) in domains {
        match total {
            Some(t) if t >= threshold => out.kept.push(d.to_string()),
            Some(_) => out.below_threshold.push(d.to_string()),
            None => out.unknown.push(d.to_string()),
        }
    }
    out
}

/// Liveness probe of one listed domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeResult {
    pub domain: String,
    pub source: LabelSource,
    /// `None` when the request produced no status at all.
    pub http_status: Option<u16>,
    pub parked: Option<bool>,
    pub provider_backlink_total: Option<u64>,
}

impl ProbeResult {
    pub fn not_404(&self) -> bool {
        matches!(self.http_status, Some(s) if s != 404)
    }

    pub fn not_parked(&self) -> bool {
        self.parked == Some(false)
    }

    pub fn over_threshold(&self) -> bool {
        matches!(self.provider_backlink_total, Some(t) if t >= DEFAULT_BACKLINK_THRESHOLD)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalRow {
    pub source: LabelSource,
    pub url_count: usize,
    pub not_404: usize,
    pub not_parked: usize,
    pub both_alive: usize,
    pub over_10k_backlinks: usize,
}

impl SurvivalRow {
    fn pct(&self, n: usize) -> f64 {
        if self.url_count == 0 {
            0.0
        } else {
            100.0 * n as f64 / self.url_count as f64
        }
    }

    pub fn pct_not_404(&self) -> f64 {
        self.pct(self.not_404)
    }

    pub fn pct_not_parked(&self) -> f64 {
        self.pct(self.not_parked)
    }

    pub fn pct_both_alive(&self) -> f64 {
        self.pct(self.both_alive)
    }

    pub fn pct_over_10k_backlinks(&self) -> f64 {
        self.pct(self.over_10k_backlinks)
    }
}

/// Per-source survival table. Unknown probe outcomes count as failures.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalReport {
    pub rows: Vec<SurvivalRow>,
}

/// Column headers, in table order.
pub const SURVIVAL_COLUMNS: [&str; 6] = ["Source", "URLs", "!404", "!Parked", "Both", ">10k"];

pub fn survival_report(probes: &[ProbeResult]) -> SurvivalReport {
    let mut rows: BTreeMap<LabelSource, SurvivalRow> = BTreeMap::new();
    for p in probes {
        let row = rows.entry(p.source).or_insert(SurvivalRow {
            source: p.source,
            url_count: 0,
            not_404: 0,
            not_parked: 0,
            both_alive: 0,
            over_10k_backlinks: 0,
        });
        row.url_count += 1;
        row.not_404 += p.not_404() as usize;
        row.not_parked += p.not_parked() as usize;
        row.both_alive += (p.not_404() && p.not_parked()) as usize;
        row.over_10k_backlinks += p.over_threshold() as usize;
    }
    SurvivalReport {
        rows: rows.into_values().collect(),
    }
}

impl SurvivalReport {
    pub fn total(&self) -> SurvivalRow {
        let mut t = SurvivalRow {
            source: LabelSource::Other,
            url_count: 0,
            not_404: 0,
            not_parked: 0,
            both_alive: 0,
            over_10k_backlinks: 0,
        };
        for r in &self.rows {
            t.url_count += r.url_count;
            t.not_404 += r.not_404;
            t.not_parked += r.not_parked;
            t.both_alive += r.both_alive;
            t.over_10k_backlinks += r.over_10k_backlinks;
        }
        t
    }

    /// Percentages per source, then a `Total` row of counts.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(SURVIVAL_COLUMNS)?;
        for r in &self.rows {
            w.write_record([
                r.source.display_name().to_string(),
                r.url_count.to_string(),
                r.pct_not_404().to_string(),
                r.pct_not_parked().to_string(),
                r.pct_both_alive().to_string(),
                r.pct_over_10k_backlinks().to_string(),
            ])?;
        }
        let t = self.total();
        w.write_record([
            "Total".to_string(),
            t.url_count.to_string(),
            t.not_404.to_string(),
            t.not_parked.to_string(),
            t.both_alive.to_string(),
            t.over_10k_backlinks.to_string(),
        ])?;
        w.flush()?;
        Ok(())
    }
}

/// A probe row before its domain is joined to a list source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeRow {
    pub domain: String,
    pub http_status: Option<u16>,
    pub parked: Option<bool>,
    pub provider_backlink_total: Option<u64>,
}

const PROBE_HEADER: [&str; 4] = ["domain", "http_status", "parked", "provider_backlink_total"];

pub fn read_probes(path: impl AsRef<Path>) -> Result<Vec<ProbeRow>> {
    let path = path.as_ref();
    read_probes_from(std::fs::File::open(path)?, &path.display().to_string())
}

pub fn read_probes_from<R: Read>(reader: R, label: &str) -> Result<Vec<ProbeRow>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|s| s.to_string()).collect();
    if header != PROBE_HEADER {
        return Err(parse_err(label, 1, format!("probe header must be {}", PROBE_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |what: &str, v: &str| parse_err(label, line, format!("bad {what} {v:?}"));
        let http_status = match &rec[1] {
            "" => None,
            v => Some(v.parse::<u16>().map_err(|_| bad("http_status", v))?),
        };
        let parked = match &rec[2] {
            "" => None,
            "0" => Some(false),
            "1" => Some(true),
            v => return Err(bad("parked flag", v)),
        };
        let provider_backlink_total = match &rec[3] {
            "" => None,
            v => Some(v.parse::<u64>().map_err(|_| bad("backlink total", v))?),
        };
        out.push(ProbeRow {
            domain: normalize_domain(&rec[0])?,
            http_status,
            parked,
            provider_backlink_total,
        });
    }
    Ok(out)
}

/// Joins probe rows to the sources listing each domain; a domain listed by
/// several sources is counted once per source.
pub fn attach_sources(
    probes: &[ProbeRow],
    sources: &BTreeMap<String, Vec<LabelSource>>,
) -> Vec<ProbeResult> {
    let mut out = Vec::new();
    for p in probes {
        let listed = sources.get(&p.domain).map(Vec::as_slice).unwrap_or(&[]);
        let fallback = [LabelSource::Other];
        let listed = if listed.is_empty() { &fallback[..] } else { listed };
        for &source in listed {
            out.push(ProbeResult {
                domain: p.domain.clone(),
                source,
                http_status: p.http_status,
                parked: p.parked,
                provider_backlink_total: p.provider_backlink_total,
            });
        }
    }
    out
}
