use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use linkscope_core::baselines::CvReport;
use linkscope_core::discovery::{OracleLabel, PartialF1};
use linkscope_core::error::{Error, Result};
use linkscope_core::eval::{Alpha, MetricsReport};
use linkscope_core::webgraph::{normalize_domain, AttributedWebgraph, GraphSummary};

pub fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const METRICS_COLUMNS: [&str; 13] = [
    "task",
    "model",
    "seed",
    "samples",
    "accuracy",
    "precision",
    "recall",
    "binary_f1",
    "true_positives",
    "false_positives",
    "false_negatives",
    "true_negatives",
    "f1_undefined",
];

fn metrics_row(m: &MetricsReport) -> Vec<String> {
    vec![
        m.task.clone().unwrap_or_default(),
        m.model.clone().unwrap_or_default(),
        opt(m.seed),
        m.samples.to_string(),
        m.accuracy.to_string(),
        m.precision.to_string(),
        m.recall.to_string(),
        m.binary_f1.to_string(),
        m.true_positives.to_string(),
        m.false_positives.to_string(),
        m.false_negatives.to_string(),
        m.true_negatives.to_string(),
        m.f1_undefined.to_string(),
    ]
}

pub fn write_metrics<W: Write>(reports: &[MetricsReport], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(METRICS_COLUMNS)?;
    for m in reports {
        w.write_record(metrics_row(m))?;
    }
    w.flush()?;
    Ok(())
}

/// One row per fold, then `mean` and `std` rows for accuracy and F1.
pub fn write_cv<W: Write>(report: &CvReport, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["fold", "accuracy", "binary_f1", "precision", "recall"])?;
    for (i, f) in report.folds.iter().enumerate() {
        w.write_record([
            i.to_string(),
            f.accuracy.to_string(),
            f.binary_f1.to_string(),
            f.precision.to_string(),
            f.recall.to_string(),
        ])?;
    }
    w.write_record([
        "mean".to_string(),
        report.mean_accuracy.to_string(),
        report.mean_f1.to_string(),
        String::new(),
        String::new(),
    ])?;
    w.write_record([
        "std".to_string(),
        report.std_accuracy.to_string(),
        report.std_f1.to_string(),
        String::new(),
        String::new(),
    ])?;
    w.flush()?;
    Ok(())
}

pub fn write_graph_summary<W: Write>(s: &GraphSummary, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["metric", "value"])?;
    let rows = [
        ("nodes", s.nodes.to_string()),
        ("edges", s.edges.to_string()),
        ("average_degree", s.average_degree.to_string()),
        ("clustering_coefficient", s.clustering_coefficient.to_string()),
        ("characteristic_path_length", s.characteristic_path_length.to_string()),
        ("density", s.density.to_string()),
        ("degree_assortativity", opt(s.degree_assortativity)),
    ];
    for (k, v) in rows {
        w.write_record([k, v.as_str()])?;
    }
    w.flush()?;
    Ok(())
}

/// Edge table of a built graph; `weights` defaults every edge to 1.
pub fn write_graph_edges<W: Write>(graph: &AttributedWebgraph, weights: Option<&[f64]>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["source", "target", "backlink", "outlink", "links", "ref_pages", "weight"])?;
    for (i, e) in graph.edges().iter().enumerate() {
        let weight = weights.map_or(1.0, |ws| ws[i]);
        w.write_record([
            graph.domain(e.source).to_string(),
            graph.domain(e.target).to_string(),
            e.kinds.backlink.to_string(),
            e.kinds.outlink.to_string(),
            e.links.to_string(),
            e.ref_pages.to_string(),
            weight.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_partial_f1<W: Write>(p: &PartialF1, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "precision",
        "recall",
        "partial_f1",
        "true_positives",
        "false_positives",
        "excluded",
        "oracle_unreliable",
        "undefined",
    ])?;
    w.write_record([
        p.precision.to_string(),
        p.recall.to_string(),
        p.partial_f1.to_string(),
        p.true_positives.to_string(),
        p.false_positives.to_string(),
        p.excluded.to_string(),
        p.oracle_unreliable.to_string(),
        p.undefined.to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

pub fn write_alpha<W: Write>(a: &Alpha, items: usize, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["alpha", "undefined", "items", "pairable"])?;
    w.write_record([
        opt(a.alpha),
        a.alpha.is_none().to_string(),
        items.to_string(),
        a.pairable.to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

pub fn write_oracle<W: Write>(oracle: &BTreeMap<String, OracleLabel>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["domain", "label"])?;
    for (d, l) in oracle {
        let label = match l {
            OracleLabel::Unreliable => "unreliable",
            OracleLabel::Reliable => "reliable",
            OracleLabel::Unknown => "unknown",
        };
        w.write_record([d.as_str(), label])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_domains<W: Write>(domains: &[String], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["domain"])?;
    for d in domains {
        w.write_record([d])?;
    }
    w.flush()?;
    Ok(())
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(File::open(path)?))
}

fn parse_err(path: &Path, line: u64, message: String) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message,
    }
}

/// Normalized domains from the first column of a headed table.
pub fn read_domains(path: &Path) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for rec in reader(path)?.records() {
        let rec = rec?;
        let cell = rec.get(0).unwrap_or("");
        out.push(normalize_domain(cell)?);
    }
    Ok(out)
}

pub fn read_oracle(path: &Path) -> Result<BTreeMap<String, OracleLabel>> {
    let mut rdr = reader(path)?;
    if rdr.headers()?.iter().collect::<Vec<_>>() != ["domain", "label"] {
        return Err(parse_err(path, 1, "oracle header must be domain,label".into()));
    }
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let label = match &rec[1] {
            "unreliable" => OracleLabel::Unreliable,
            "reliable" => OracleLabel::Reliable,
            "unknown" => OracleLabel::Unknown,
            other => return Err(parse_err(path, line, format!("unknown oracle label {other:?}"))),
        };
        out.insert(normalize_domain(&rec[0])?, label);
    }
    Ok(out)
}

/// `predicted,actual` columns as strings.
pub fn read_predictions(path: &Path) -> Result<(Vec<String>, Vec<String>)> {
    let mut rdr = reader(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(path, 1, format!("missing column {name:?}")))
    };
    let (p, a) = (col("predicted")?, col("actual")?);
    let (mut predicted, mut actual) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec?;
        predicted.push(rec[p].to_string());
        actual.push(rec[a].to_string());
    }
    Ok((predicted, actual))
}

/// Items by annotators; the first column names the item and empty cells
/// are missing values.
pub fn read_annotations(path: &Path) -> Result<Vec<Vec<Option<String>>>> {
    let mut out = Vec::new();
    for rec in reader(path)?.records() {
        let rec = rec?;
        out.push(
            rec.iter()
                .skip(1)
                .map(|c| (!c.is_empty()).then(|| c.to_string()))
                .collect(),
        );
    }
    Ok(out)
}
