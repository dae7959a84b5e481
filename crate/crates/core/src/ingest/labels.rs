use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::webgraph::io::parse_err;
use crate::webgraph::normalize_domain;

/// Reliability grade as published by a source, after mapping blocklist
/// colors onto the MBFC scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReliabilityGrade {
    VeryLow,
    Low,
    Mixed,
    High,
    VeryHigh,
    Questionable,
    None,
}

impl ReliabilityGrade {
    pub const ALL: [ReliabilityGrade; 7] = [
        ReliabilityGrade::VeryLow,
        ReliabilityGrade::Low,
        ReliabilityGrade::Mixed,
        ReliabilityGrade::High,
        ReliabilityGrade::VeryHigh,
        ReliabilityGrade::Questionable,
        ReliabilityGrade::None,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReliabilityGrade::VeryLow => "very_low",
            ReliabilityGrade::Low => "low",
            ReliabilityGrade::Mixed => "mixed",
            ReliabilityGrade::High => "high",
            ReliabilityGrade::VeryHigh => "very_high",
            ReliabilityGrade::Questionable => "questionable",
            ReliabilityGrade::None => "none",
        }
    }

    /// Parses MBFC grade names and blocklist colors.
    pub fn parse(s: &str) -> Option<Self> {
        let k = s.trim().to_ascii_lowercase().replace([' ', '-'], "_");
        Some(match k.as_str() {
            "very_low" | "black" => ReliabilityGrade::VeryLow,
            "low" | "red" => ReliabilityGrade::Low,
            "mixed" | "orange" | "yellow" => ReliabilityGrade::Mixed,
            "high" => ReliabilityGrade::High,
            "very_high" => ReliabilityGrade::VeryHigh,
            "questionable" => ReliabilityGrade::Questionable,
            "none" | "" => ReliabilityGrade::None,
            _ => return None,
        })
    }

    pub fn reliability(self) -> Reliability {
        match self {
            ReliabilityGrade::VeryLow
            | ReliabilityGrade::Low
            | ReliabilityGrade::Mixed
            | ReliabilityGrade::Questionable => Reliability::Unreliable,
            ReliabilityGrade::High | ReliabilityGrade::VeryHigh => Reliability::Reliable,
            ReliabilityGrade::None => Reliability::Unknown,
        }
    }
}

impl fmt::Display for ReliabilityGrade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a label came from. Declaration order is the tie-break priority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    Mbfc,
    MbfcQ,
    Snopes,
    Blocklist,
    Politico,
    Buzzfeed,
    Other,
}

impl LabelSource {
    pub const ALL: [LabelSource; 7] = [
        LabelSource::Mbfc,
        LabelSource::MbfcQ,
        LabelSource::Snopes,
        LabelSource::Blocklist,
        LabelSource::Politico,
        LabelSource::Buzzfeed,
        LabelSource::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LabelSource::Mbfc => "mbfc",
            LabelSource::MbfcQ => "mbfc_q",
            LabelSource::Snopes => "snopes",
            LabelSource::Blocklist => "blocklist",
            LabelSource::Politico => "politico",
            LabelSource::Buzzfeed => "buzzfeed",
            LabelSource::Other => "other",
        }
    }

    /// Row label used in survival tables.
    pub fn display_name(self) -> &'static str {
        match self {
            LabelSource::Mbfc => "MBFC",
            LabelSource::MbfcQ => "MBFC-Q",
            LabelSource::Snopes => "Snopes",
            LabelSource::Blocklist => "Blocklist",
            LabelSource::Politico => "Politico",
            LabelSource::Buzzfeed => "Buzzfeed",
            LabelSource::Other => "Other",
        }
    }
}

impl FromStr for LabelSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let k = s.trim().to_ascii_lowercase().replace('-', "_");
        LabelSource::ALL
            .into_iter()
            .find(|src| src.as_str() == k)
            .ok_or_else(|| Error::invalid(format!("unknown label source {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub domain: String,
    pub reliability_grade: ReliabilityGrade,
    /// -2 (extreme left) to +2 (extreme right).
    pub bias_score: Option<i8>,
    pub source: LabelSource,
    pub label_date: NaiveDate,
}

impl LabelRecord {
    /// Builds a record from raw strings, mapping the grade text.
    pub fn parse(
        domain: &str,
        grade: &str,
        bias: Option<i8>,
        source: LabelSource,
        label_date: NaiveDate,
    ) -> Result<Self> {
        let domain = normalize_domain(domain)?;
        let reliability_grade = ReliabilityGrade::parse(grade).ok_or_else(|| Error::InvalidGrade {
            domain: domain.clone(),
            grade: grade.to_string(),
        })?;
        if let Some(b) = bias {
            if !(-2..=2).contains(&b) {
                return Err(Error::invalid(format!("{domain}: bias score {b} outside [-2, 2]")));
            }
        }
        Ok(Self {
            domain,
            reliability_grade,
            bias_score: bias,
            source,
            label_date,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reliability {
    Reliable,
    Unreliable,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelativeBias {
    Left,
    Right,
    Dropped,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbsoluteBias {
    Center,
    Extreme,
    Unknown,
}

impl Reliability {
    pub fn as_str(self) -> &'static str {
        match self {
            Reliability::Reliable => "reliable",
            Reliability::Unreliable => "unreliable",
            Reliability::Unknown => "unknown",
        }
    }
}

impl RelativeBias {
    pub fn as_str(self) -> &'static str {
        match self {
            RelativeBias::Left => "left",
            RelativeBias::Right => "right",
            RelativeBias::Dropped => "dropped",
            RelativeBias::Unknown => "unknown",
        }
    }
}

impl AbsoluteBias {
    pub fn as_str(self) -> &'static str {
        match self {
            AbsoluteBias::Center => "center",
            AbsoluteBias::Extreme => "extreme",
            AbsoluteBias::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryLabels {
    pub reliability: Reliability,
    pub relative_bias: RelativeBias,
    pub absolute_bias: AbsoluteBias,
}

impl BinaryLabels {
    pub fn from_parts(grade: ReliabilityGrade, bias: Option<i8>) -> Self {
        let (relative_bias, absolute_bias) = match bias {
            None => (RelativeBias::Unknown, AbsoluteBias::Unknown),
            Some(b) => (
                match b.cmp(&0) {
                    std::cmp::Ordering::Less => RelativeBias::Left,
                    std::cmp::Ordering::Equal => RelativeBias::Dropped,
                    std::cmp::Ordering::Greater => RelativeBias::Right,
                },
                if (-1..=1).contains(&b) {
                    AbsoluteBias::Center
                } else {
                    AbsoluteBias::Extreme
                },
            ),
        };
        Self {
            reliability: grade.reliability(),
            relative_bias,
            absolute_bias,
        }
    }

    pub fn unknown() -> Self {
        Self {
            reliability: Reliability::Unknown,
            relative_bias: RelativeBias::Unknown,
            absolute_bias: AbsoluteBias::Unknown,
        }
    }
}

/// Binary classification targets derived from labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Reliability,
    AbsBias,
    RelBias,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::Reliability, Task::AbsBias, Task::RelBias];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Reliability => "reliability",
            Task::AbsBias => "abs_bias",
            Task::RelBias => "rel_bias",
        }
    }

    /// `Some(true)` for the positive class (unreliable, extreme, right),
    /// `None` when the domain has no usable label for this task.
    pub fn target(self, labels: &BinaryLabels) -> Option<bool> {
        match self {
            Task::Reliability => match labels.reliability {
                Reliability::Unreliable => Some(true),
                Reliability::Reliable => Some(false),
                Reliability::Unknown => None,
            },
            Task::AbsBias => match labels.absolute_bias {
                AbsoluteBias::Extreme => Some(true),
                AbsoluteBias::Center => Some(false),
                AbsoluteBias::Unknown => None,
            },
            Task::RelBias => match labels.relative_bias {
                RelativeBias::Right => Some(true),
                RelativeBias::Left => Some(false),
                RelativeBias::Dropped | RelativeBias::Unknown => None,
            },
        }
    }

    pub fn positive_name(self) -> &'static str {
        match self {
            Task::Reliability => "unreliable",
            Task::AbsBias => "extreme",
            Task::RelBias => "right",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "reliability" => Ok(Task::Reliability),
            "abs_bias" | "absolute_bias" => Ok(Task::AbsBias),
            "rel_bias" | "relative_bias" => Ok(Task::RelBias),
            other => Err(Error::invalid(format!("unknown task {other:?}"))),
        }
    }
}

fn newer(a: &LabelRecord, b: &LabelRecord) -> bool {
    // later date wins, then higher-priority source
    (a.label_date, std::cmp::Reverse(a.source)) > (b.label_date, std::cmp::Reverse(b.source))
}

/// Resolves overlapping labels to one binary label set per domain.
///
/// Reliability comes from the most recent record (ties broken by source
/// priority). Bias comes from the most recent record that carries a bias
/// score, since several sources publish reliability only.
pub fn merge_and_binarize(records: &[LabelRecord]) -> Result<BTreeMap<String, BinaryLabels>> {
    let mut seen = HashSet::new();
    let mut latest: BTreeMap<&str, &LabelRecord> = BTreeMap::new();
    let mut latest_bias: BTreeMap<&str, &LabelRecord> = BTreeMap::new();
    for r in records {
        if !seen.insert((r.domain.as_str(), r.source)) {
            return Err(Error::invalid(format!(
                "more than one {} record for {}",
                r.source.as_str(),
                r.domain
            )));
        }
        let slot = latest.entry(&r.domain).or_insert(r);
        if newer(r, slot) {
            *slot = r;
        }
        if r.bias_score.is_some() {
            let slot = latest_bias.entry(&r.domain).or_insert(r);
            if newer(r, slot) {
                *slot = r;
            }
        }
    }
    Ok(latest
        .into_iter()
        .map(|(domain, rec)| {
            let bias = latest_bias.get(domain).and_then(|b| b.bias_score);
            (domain.to_string(), BinaryLabels::from_parts(rec.reliability_grade, bias))
        })
        .collect())
}

const LABEL_HEADER: [&str; 5] = ["domain", "reliability_grade", "bias_score", "source", "label_date"];

pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<LabelRecord>> {
    let path = path.as_ref();
    read_labels_from(std::fs::File::open(path)?, &path.display().to_string())
}

pub fn read_labels_from<R: Read>(reader: R, label: &str) -> Result<Vec<LabelRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|s| s.to_string()).collect();
    if header != LABEL_HEADER {
        return Err(parse_err(label, 1, format!("labels header must be {}", LABEL_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 5 {
            return Err(parse_err(label, line, format!("expected 5 fields, got {}", rec.len())));
        }
        let bias = if rec[2].is_empty() {
            None
        } else {
            Some(
                rec[2]
                    .parse::<i8>()
                    .map_err(|_| parse_err(label, line, format!("bad bias score {:?}", &rec[2])))?,
            )
        };
        let source = rec[3]
            .parse::<LabelSource>()
            .map_err(|e| parse_err(label, line, e.to_string()))?;
        let date = NaiveDate::parse_from_str(&rec[4], "%Y-%m-%d")
            .map_err(|_| parse_err(label, line, format!("bad ISO-8601 date {:?}", &rec[4])))?;
        out.push(LabelRecord::parse(&rec[0], &rec[1], bias, source, date)?);
    }
    Ok(out)
}

const BINARY_HEADER: [&str; 4] = ["domain", "reliability", "relative_bias", "absolute_bias"];

/// Reads either a raw label file (merged and binarized) or the output of
/// [`write_binary_labels`], told apart by the header.
pub fn read_label_file(path: impl AsRef<Path>) -> Result<BTreeMap<String, BinaryLabels>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let first = text.lines().next().unwrap_or("");
    let header: Vec<&str> = first.split(',').map(str::trim).collect();
    if header == BINARY_HEADER {
        read_binary_labels(text.as_bytes())
    } else {
        merge_and_binarize(&read_labels_from(text.as_bytes(), &path.display().to_string())?)
    }
}

/// Writes merged labels as `domain,reliability,relative_bias,absolute_bias`.
pub fn write_binary_labels<W: std::io::Write>(
    writer: W,
    labels: &BTreeMap<String, BinaryLabels>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(BINARY_HEADER)?;
    for (d, l) in labels {
        w.write_record([
            d.as_str(),
            l.reliability.as_str(),
            l.relative_bias.as_str(),
            l.absolute_bias.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the output of [`write_binary_labels`].
pub fn read_binary_labels<R: Read>(reader: R) -> Result<BTreeMap<String, BinaryLabels>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != 4 {
            return Err(Error::invalid(format!("binary label row has {} fields", rec.len())));
        }
        let find = |names: &[&'static str], s: &str| {
            names
                .iter()
                .position(|n| *n == s)
                .ok_or_else(|| Error::invalid(format!("unknown label value {s:?}")))
        };
        let reliability = [Reliability::Reliable, Reliability::Unreliable, Reliability::Unknown]
            [find(&["reliable", "unreliable", "unknown"], &rec[1])?];
        let relative_bias = [
            RelativeBias::Left,
            RelativeBias::Right,
            RelativeBias::Dropped,
            RelativeBias::Unknown,
        ][find(&["left", "right", "dropped", "unknown"], &rec[2])?];
        let absolute_bias = [AbsoluteBias::Center, AbsoluteBias::Extreme, AbsoluteBias::Unknown]
            [find(&["center", "extreme", "unknown"], &rec[3])?];
        out.insert(
            normalize_domain(&rec[0])?,
            BinaryLabels {
                reliability,
                relative_bias,
                absolute_bias,
            },
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn date(y: i32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, 1, 1).unwrap()
    }

    fn rec(domain: &str, grade: &str, bias: Option<i8>, source: LabelSource, y: i32) -> LabelRecord {
        LabelRecord::parse(domain, grade, bias, source, date(y)).unwrap()
    }

    #[test]
    fn mixed_is_unreliable() {
        let m = merge_and_binarize(&[rec("a.com", "mixed", None, LabelSource::Mbfc, 2023)]).unwrap();
        assert_eq!(m["a.com"].reliability, Reliability::Unreliable);
    }

    #[test]
    fn centrist_dropped_for_relative_bias() {
        let l = BinaryLabels::from_parts(ReliabilityGrade::High, Some(0));
        assert_eq!(l.relative_bias, RelativeBias::Dropped);
        assert_eq!(l.absolute_bias, AbsoluteBias::Center);
    }

    #[test]
    fn latest_label_wins() {
        let m = merge_and_binarize(&[
            rec("a.com", "red", None, LabelSource::Blocklist, 2017),
            rec("a.com", "high", Some(1), LabelSource::Mbfc, 2023),
        ])
        .unwrap();
        assert_eq!(m["a.com"].reliability, Reliability::Reliable);
        assert_eq!(m["a.com"].relative_bias, RelativeBias::Right);
    }

    #[test]
    fn same_day_goes_to_higher_priority_source() {
        let m = merge_and_binarize(&[
            rec("a.com", "black", None, LabelSource::Buzzfeed, 2020),
            rec("a.com", "very high", None, LabelSource::Snopes, 2020),
        ])
        .unwrap();
        assert_eq!(m["a.com"].reliability, Reliability::Reliable);
    }

    #[test]
    fn bias_survives_a_newer_reliability_only_record() {
        let m = merge_and_binarize(&[
            rec("a.com", "high", Some(-2), LabelSource::Mbfc, 2015),
            rec("a.com", "red", None, LabelSource::Blocklist, 2017),
        ])
        .unwrap();
        assert_eq!(m["a.com"].reliability, Reliability::Unreliable);
        assert_eq!(m["a.com"].absolute_bias, AbsoluteBias::Extreme);
    }

    #[test]
    fn unmappable_grade_names_the_domain() {
        let err = LabelRecord::parse("x.org", "purple", None, LabelSource::Other, date(2020)).unwrap_err();
        match err {
            Error::InvalidGrade { domain, grade } => {
                assert_eq!(domain, "x.org");
                assert_eq!(grade, "purple");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_source_record_rejected() {
        assert!(merge_and_binarize(&[
            rec("a.com", "high", None, LabelSource::Mbfc, 2020),
            rec("a.com", "low", None, LabelSource::Mbfc, 2021),
        ])
        .is_err());
    }

    #[test]
    fn reads_labels_file() {
        let text = "domain,reliability_grade,bias_score,source,label_date\n\
                    www.A.com,questionable,2,mbfc_q,2022-05-01\n\
                    b.com,orange,,blocklist,2017-03-09\n";
        let recs = read_labels_from(text.as_bytes(), "mem").unwrap();
        assert_eq!(recs[0].domain, "a.com");
        assert_eq!(recs[0].reliability_grade, ReliabilityGrade::Questionable);
        assert_eq!(recs[1].reliability_grade, ReliabilityGrade::Mixed);
        assert_eq!(recs[1].bias_score, None);
    }

    #[test]
    fn binary_labels_file_round_trip() {
        let m = merge_and_binarize(&[
            rec("a.com", "low", Some(2), LabelSource::Mbfc, 2020),
            rec("b.com", "none", None, LabelSource::Other, 2020),
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_binary_labels(&mut buf, &m).unwrap();
        assert_eq!(read_binary_labels(buf.as_slice()).unwrap(), m);
    }
}
