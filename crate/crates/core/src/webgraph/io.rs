//! Delimited-text readers and writers for node and edge files.
//!
//! Nodes: `domain,provider_backlink_total,provider_outlink_total,<attributes...>`
//! where the header row after the first three columns is the attribute
//! manifest. Edges: `source,target,kind,links,ref_pages`. Empty provider
//! totals mean unknown and are never read as 0.

use std::io::{Read, Write};
use std::path::Path;

use super::{AttributeManifest, EdgeKind, EdgeRecord, NodeRecord};
use crate::error::{Error, Result};

const NODE_PREFIX: [&str; 3] = ["domain", "provider_backlink_total", "provider_outlink_total"];
const EDGE_HEADER: [&str; 5] = ["source", "target", "kind", "links", "ref_pages"];

/// Suffix of the indicator column added for an attribute with gaps.
pub const MISSING_SUFFIX: &str = "_missing";

/// A parsed nodes file; attribute cells may be missing.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTable {
    pub attribute_names: Vec<String>,
    pub rows: Vec<NodeRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeRow {
    pub domain: String,
    pub provider_backlink_total: Option<u64>,
    pub provider_outlink_total: Option<u64>,
    pub attributes: Vec<Option<f64>>,
}

impl NodeTable {
    /// Imputes missing attributes to 0 and appends a `<name>_missing`
    /// indicator column for every attribute that had a gap.
    pub fn into_records(self) -> Result<(AttributeManifest, Vec<NodeRecord>)> {
        let width = self.attribute_names.len();
        let gappy: Vec<usize> = (0..width)
            .filter(|&c| self.rows.iter().any(|r| r.attributes[c].is_none()))
            .collect();
        let mut names = self.attribute_names.clone();
        names.extend(gappy.iter().map(|&c| format!("{}{MISSING_SUFFIX}", self.attribute_names[c])));
        let manifest = AttributeManifest::new(names)?;
        let records = self
            .rows
            .into_iter()
            .map(|r| {
                let mut attrs: Vec<f64> = r.attributes.iter().map(|v| v.unwrap_or(0.0)).collect();
                attrs.extend(
                    gappy
                        .iter()
                        .map(|&c| if r.attributes[c].is_none() { 1.0 } else { 0.0 }),
                );
                NodeRecord {
                    domain: r.domain,
                    provider_backlink_total: r.provider_backlink_total,
                    provider_outlink_total: r.provider_outlink_total,
                    attributes: attrs,
                }
            })
            .collect();
        Ok((manifest, records))
    }
}

pub fn read_nodes(path: impl AsRef<Path>) -> Result<NodeTable> {
    let path = path.as_ref();
    read_nodes_from(std::fs::File::open(path)?, &path.display().to_string())
}

pub fn read_nodes_from<R: Read>(reader: R, label: &str) -> Result<NodeTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|s| s.to_string()).collect();
    if header.len() < 3 || header[..3] != NODE_PREFIX {
        return Err(parse_err(label, 1, format!("nodes header must start with {}", NODE_PREFIX.join(","))));
    }
    let attribute_names = header[3..].to_vec();
    AttributeManifest::new(attribute_names.clone())?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(parse_err(label, line, format!("expected {} fields, got {}", header.len(), rec.len())));
        }
        let attributes = rec
            .iter()
            .skip(3)
            .map(|f| opt_f64(f).map_err(|m| parse_err(label, line, m)))
            .collect::<Result<Vec<_>>>()?;
        rows.push(NodeRow {
            domain: rec[0].to_string(),
            provider_backlink_total: opt_u64(&rec[1]).map_err(|m| parse_err(label, line, m))?,
            provider_outlink_total: opt_u64(&rec[2]).map_err(|m| parse_err(label, line, m))?,
            attributes,
        });
    }
    Ok(NodeTable { attribute_names, rows })
}

pub fn read_edges(path: impl AsRef<Path>) -> Result<Vec<EdgeRecord>> {
    let path = path.as_ref();
    read_edges_from(std::fs::File::open(path)?, &path.display().to_string())
}

pub fn read_edges_from<R: Read>(reader: R, label: &str) -> Result<Vec<EdgeRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|s| s.to_string()).collect();
    if header != EDGE_HEADER {
        return Err(parse_err(label, 1, format!("edges header must be {}", EDGE_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 5 {
            return Err(parse_err(label, line, format!("expected 5 fields, got {}", rec.len())));
        }
        let int = |s: &str| -> Result<u64> {
            s.parse::<u64>()
                .map_err(|_| parse_err(label, line, format!("not a nonnegative integer: {s:?}")))
        };
        out.push(EdgeRecord {
            source: rec[0].to_string(),
            target: rec[1].to_string(),
            kind: rec[2]
                .parse::<EdgeKind>()
                .map_err(|e| parse_err(label, line, e.to_string()))?,
            links: int(&rec[3])?,
            ref_pages: int(&rec[4])?,
        });
    }
    Ok(out)
}

pub fn write_nodes<W: Write>(
    writer: W,
    manifest: &AttributeManifest,
    nodes: &[NodeRecord],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = NODE_PREFIX.to_vec();
    header.extend(manifest.names().iter().map(String::as_str));
    w.write_record(&header)?;
    for n in nodes {
        let mut row = vec![
            n.domain.clone(),
            n.provider_backlink_total.map(|v| v.to_string()).unwrap_or_default(),
            n.provider_outlink_total.map(|v| v.to_string()).unwrap_or_default(),
        ];
        row.extend(n.attributes.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_edges<W: Write>(writer: W, edges: &[EdgeRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(EDGE_HEADER)?;
    for e in edges {
        w.write_record([
            e.source.as_str(),
            e.target.as_str(),
            e.kind.as_str(),
            &e.links.to_string(),
            &e.ref_pages.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn opt_u64(s: &str) -> std::result::Result<Option<u64>, String> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<u64>()
        .map(Some)
        .map_err(|_| format!("not a nonnegative integer: {s:?}"))
}

fn opt_f64(s: &str) -> std::result::Result<Option<f64>, String> {
    if s.is_empty() {
        return Ok(None);
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(format!("not a finite number: {s:?}")),
    }
}

pub(crate) fn parse_err(label: &str, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: label.to_string(),
        line,
        message: message.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_totals_are_unknown_not_zero() {
        let t = read_nodes_from(
            "domain,provider_backlink_total,provider_outlink_total,backlinks\na.com,,0,3.5\n".as_bytes(),
            "mem",
        )
        .unwrap();
        assert_eq!(t.rows[0].provider_backlink_total, None);
        assert_eq!(t.rows[0].provider_outlink_total, Some(0));
        assert_eq!(t.attribute_names, vec!["backlinks"]);
    }

    #[test]
    fn gaps_get_indicator_columns() {
        let t = read_nodes_from(
            "domain,provider_backlink_total,provider_outlink_total,edu,gov\na.com,1,1,,2\nb.com,1,1,4,5\n"
                .as_bytes(),
            "mem",
        )
        .unwrap();
        let (m, recs) = t.into_records().unwrap();
        assert_eq!(m.names(), ["edu", "gov", "edu_missing"]);
        assert_eq!(recs[0].attributes, vec![0.0, 2.0, 1.0]);
        assert_eq!(recs[1].attributes, vec![4.0, 5.0, 0.0]);
    }

    #[test]
    fn bad_header_rejected() {
        assert!(read_edges_from("a,b,c,d,e\n".as_bytes(), "mem").is_err());
        assert!(read_nodes_from("domain,x\n".as_bytes(), "mem").is_err());
    }

    #[test]
    fn bad_kind_reports_line() {
        let err = read_edges_from(
            "source,target,kind,links,ref_pages\na.com,b.com,sideways,1,1\n".as_bytes(),
            "edges.csv",
        )
        .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn edges_round_trip() {
        let edges = vec![EdgeRecord {
            source: "a.com".into(),
            target: "b.com".into(),
            kind: EdgeKind::Outlink,
            links: 12,
            ref_pages: 3,
        }];
        let mut buf = Vec::new();
        write_edges(&mut buf, &edges).unwrap();
        assert_eq!(read_edges_from(buf.as_slice(), "mem").unwrap(), edges);
    }
}
