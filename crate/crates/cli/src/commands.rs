use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use linkscope_core::baselines::{
    fit_flat_model, kfold_cv, labeled_features, predict_flat, FeatureMatrix, FlatModelSpec,
};
use linkscope_core::discovery::{
    generate_planted_ecosystem, partial_f1, run_discovery, train_news_classifier, Classifiers, DiscoverySummary,
    FeatureSource, FixtureLinkClient, TableFeatureSource,
};
use linkscope_core::error::{Error, Result};
use linkscope_core::eval::{classification_metrics, krippendorff_alpha, AnnotationSet};
use linkscope_core::experiment::{discovery_sweep, run_experiment, write_discovery_sweep, DataSource, ExperimentConfig};
use linkscope_core::ingest::survival::{attach_sources, read_probes};
use linkscope_core::ingest::{
    generate_synthetic_webgraph, merge_and_binarize, read_label_file, read_labels, survival_report,
    write_binary_labels, BinaryLabels, Task,
};
use linkscope_core::nn::{make_split, train_gcn, GcnCheckpoint};
use linkscope_core::webgraph::io::{read_edges, read_nodes, write_edges, write_nodes};
use linkscope_core::webgraph::{
    build_graph, graph_summary, truncate_topn, weight_edges, AttributedWebgraph, EdgeKind,
    Network, WeightScheme,
};

use crate::tables::{self, create};
use crate::{AuditArgs, Cli, Command, CvArgs, DataArgs, DiscoverArgs, GraphArgs, IngestCommand, MetricsCommand, TrainCommand};

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let out = cli.out_dir.as_path();
    match &cli.command {
        Command::Ingest(cmd) => ingest(cmd, &cfg, out),
        Command::Audit(args) => audit(args, out),
        Command::Graph(args) => graph(args, &cfg, out),
        Command::Train(cmd) => train(cmd, &cfg, out),
        Command::Cv(args) => cv(args, &cfg, out),
        Command::Sweep => {
            let output = run_experiment(&cfg)?;
            output.write_dir(out)?;
            if !output.failures.is_empty() {
                eprintln!("linkscope: {} grid cells failed, see failures.csv", output.failures.len());
            }
            Ok(())
        }
        Command::Discover(args) => discover(args, &cfg, out),
        Command::Metrics(cmd) => metrics(cmd, out),
    }
}

/// The config file or defaults; `--seed` replaces every seed in it.
fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        cfg.train.seed = seed;
        cfg.flat.seed = seed;
        cfg.synthetic.seed = seed;
        cfg.planted.seed = seed;
    }
    Ok(cfg)
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T> {
    s.parse()
}

fn build_from_files(nodes: &Path, edges: Option<&Path>) -> Result<AttributedWebgraph> {
    let (manifest, nodes) = read_nodes(nodes)?.into_records()?;
    let edges = match edges {
        Some(p) => read_edges(p)?,
        None => Vec::new(),
    };
    build_graph(nodes, edges, manifest)
}

/// Graph and labels from explicit files, else from the `[data]` section.
fn load_data(args: &DataArgs, cfg: &ExperimentConfig) -> Result<(AttributedWebgraph, BTreeMap<String, BinaryLabels>)> {
    let labels = |p: Option<&Path>| p.map_or_else(|| Ok(BTreeMap::new()), read_label_file);
    if let Some(nodes) = &args.nodes {
        let graph = build_from_files(nodes, args.edges.as_deref())?;
        return Ok((graph, labels(args.labels.as_deref())?));
    }
    match cfg.data.source {
        DataSource::Synthetic => {
            let s = generate_synthetic_webgraph(&cfg.synthetic)?;
            let labels = match &args.labels {
                Some(p) => read_label_file(p)?,
                None => s.labels,
            };
            Ok((s.graph, labels))
        }
        DataSource::Files => {
            let nodes = cfg.data.nodes.as_deref().ok_or_else(|| Error::Config("missing data.nodes".into()))?;
            let graph = build_from_files(nodes, cfg.data.edges.as_deref())?;
            let path = args.labels.as_deref().or(cfg.data.labels.as_deref());
            Ok((graph, labels(path)?))
        }
    }
}

fn ingest(cmd: &IngestCommand, cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    match cmd {
        IngestCommand::Labels { files } => {
            let mut records = Vec::new();
            for f in files {
                records.extend(read_labels(f)?);
            }
            write_binary_labels(create(out, "labels.csv")?, &merge_and_binarize(&records)?)
        }
        IngestCommand::Check { nodes, edges } => {
            let graph = build_from_files(nodes, Some(edges))?;
            tables::write_graph_summary(&graph_summary(&graph), create(out, "graph_summary.csv")?)
        }
        IngestCommand::Synthetic => {
            let s = generate_synthetic_webgraph(&cfg.synthetic)?;
            write_nodes(create(out, "nodes.csv")?, s.graph.manifest(), &s.node_records)?;
            write_edges(create(out, "edges.csv")?, &s.edge_records)?;
            write_binary_labels(create(out, "labels.csv")?, &s.labels)
        }
        IngestCommand::Planted => {
            let eco = generate_planted_ecosystem(&cfg.planted)?;
            write_nodes(create(out, "nodes.csv")?, &eco.manifest, &eco.nodes)?;
            write_edges(create(out, "edges.csv")?, &eco.edges)?;
            write_binary_labels(create(out, "seeds.csv")?, &eco.seeds)?;
            tables::write_oracle(&eco.oracle, create(out, "oracle.csv")?)?;
            tables::write_domains(&eco.random_domains, create(out, "random.csv")?)
        }
    }
}

fn audit(args: &AuditArgs, out: &Path) -> Result<()> {
    let mut sources: BTreeMap<String, Vec<_>> = BTreeMap::new();
    for f in &args.labels {
        for r in read_labels(f)? {
            let listed = sources.entry(r.domain).or_default();
            if !listed.contains(&r.source) {
                listed.push(r.source);
            }
        }
    }
    let probes = attach_sources(&read_probes(&args.probes)?, &sources);
    survival_report(&probes).write_csv(create(out, "survival.csv")?)
}

fn derive_graph(graph: &AttributedWebgraph, network: &str, top_n: Option<usize>, kind: EdgeKind) -> Result<AttributedWebgraph> {
    let g = graph.network(parse::<Network>(network)?)?;
    match top_n {
        Some(n) => truncate_topn(&g, n, kind),
        None => Ok(g),
    }
}

fn graph(args: &GraphArgs, cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let (base, _) = load_data(&args.data, cfg)?;
    let g = derive_graph(&base, &args.network, args.top_n, parse(&args.top_n_kind)?)?;
    let weights = match &args.scheme {
        Some(s) => Some(weight_edges(&g, parse::<WeightScheme>(s)?)?),
        None => None,
    };
    tables::write_graph_summary(&graph_summary(&g), create(out, "graph_summary.csv")?)?;
    tables::write_graph_edges(&g, weights.as_ref().map(|w| w.as_slice()), create(out, "graph_edges.csv")?)
}

fn flat_spec(cfg: &ExperimentConfig, family: Option<&str>) -> Result<FlatModelSpec> {
    let mut spec = cfg.flat.clone();
    if let Some(f) = family {
        spec.family = parse(f)?;
    }
    Ok(spec)
}

fn train(cmd: &TrainCommand, cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    match cmd {
        TrainCommand::Gcn {
            data,
            task,
            scheme,
            network,
        } => {
            let (base, labels) = load_data(data, cfg)?;
            let g = derive_graph(&base, network, None, EdgeKind::Backlink)?;
            let task: Task = parse(task)?;
            let scheme = scheme.as_deref().map(parse::<WeightScheme>).transpose()?;
            let run = train_gcn(&g, &labels, task, scheme, &cfg.train)?;
            let metrics = run.test.clone().with_context(task.as_str(), "gcn", cfg.train.seed);
            tables::write_metrics(&[metrics], create(out, "metrics.csv")?)?;
            write_scores(&g, &run.scores, &run.split, create(out, "predictions.csv")?)?;
            write_history(&run.outcome.history, create(out, "history.csv")?)?;
            let ckpt = GcnCheckpoint::new(
                task,
                scheme,
                g.manifest().names().to_vec(),
                cfg.train.clone(),
                run.scaler,
                run.outcome.model,
            );
            ckpt.save(out.join("gcn_checkpoint.json"))
        }
        TrainCommand::Flat { data, task, family } => {
            let (g, labels) = load_data(data, cfg)?;
            let task: Task = parse(task)?;
            let spec = flat_spec(cfg, family.as_deref())?;
            let (fm, y, ids) = labeled_features(&g, &labels, task)?;
            let split = make_split(&ids, g.node_count(), spec.seed)?;
            let pos: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(row, &id)| (id, row)).collect();
            let rows = |nodes: &[usize]| -> Vec<usize> { nodes.iter().map(|id| pos[id]).collect() };
            let mut train_rows = rows(&split.train);
            train_rows.extend(rows(&split.val));
            let test_rows = rows(&split.test);
            let train_y: Vec<bool> = train_rows.iter().map(|&r| y[r]).collect();
            let model = fit_flat_model(&spec, &fm.select(&train_rows), &train_y)?.with_positive_class(task.positive_name());
            let pred = predict_flat(&model, &fm.select(&test_rows))?;
            let actual: Vec<bool> = test_rows.iter().map(|&r| y[r]).collect();
            let metrics = classification_metrics(&pred.labels, &actual, &true)?.with_context(
                task.as_str(),
                spec.family.as_str(),
                spec.seed,
            );
            tables::write_metrics(&[metrics], create(out, "metrics.csv")?)?;
            model.save(out.join("model.json"))
        }
        TrainCommand::News {
            nodes,
            positives,
            negatives,
            ratio,
        } => {
            let features = TableFeatureSource::from_table(read_nodes(nodes)?)?;
            let matrix = |path: &Path| -> Result<FeatureMatrix> {
                let (fm, _, missing) = features.matrix(&tables::read_domains(path)?)?;
                if !missing.is_empty() {
                    return Err(Error::InvalidInput(format!(
                        "{} domains of {} have no features",
                        missing.len(),
                        path.display()
                    )));
                }
                Ok(fm)
            };
            let c = train_news_classifier(&matrix(positives)?, &matrix(negatives)?, *ratio, cfg.seed)?;
            tables::write_metrics(&[c.holdout.clone()], create(out, "metrics.csv")?)?;
            std::fs::create_dir_all(out)?;
            c.model.save(out.join("news_model.json"))
        }
    }
}

fn write_scores<W: std::io::Write>(
    g: &AttributedWebgraph,
    scores: &[f64],
    split: &linkscope_core::nn::SplitMasks,
    writer: W,
) -> Result<()> {
    let mut part = vec!["unlabeled"; g.node_count()];
    for (name, ids) in [("train", &split.train), ("val", &split.val), ("test", &split.test)] {
        for &i in ids {
            part[i] = name;
        }
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["domain", "split", "score"])?;
    for node in g.nodes() {
        let i = node.id.index();
        w.write_record([node.domain.as_str(), part[i], &scores[i].to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn write_history<W: std::io::Write>(history: &[linkscope_core::nn::train::EpochRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["epoch", "train_loss", "val_loss"])?;
    for h in history {
        w.write_record([h.epoch.to_string(), h.train_loss.to_string(), h.val_loss.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn cv(args: &CvArgs, cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let (g, labels) = load_data(&args.data, cfg)?;
    let task: Task = parse(&args.task)?;
    let spec = flat_spec(cfg, args.family.as_deref())?;
    let (fm, y, _) = labeled_features(&g, &labels, task)?;
    let report = kfold_cv(&spec, &fm, &y, args.folds, args.test_fraction, spec.seed)?;
    tables::write_cv(&report, create(out, "cv.csv")?)
}

fn discover(args: &DiscoverArgs, cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let mut pipeline = cfg.discovery.clone();
    for (flag, slot) in [
        (&args.news_model, &mut pipeline.news_model),
        (&args.abs_bias_model, &mut pipeline.abs_bias_model),
        (&args.reliability_model, &mut pipeline.reliability_model),
    ] {
        if flag.is_some() {
            slot.clone_from(flag);
        }
    }
    pipeline.validate()?;
    let classifiers = Classifiers::load(&pipeline)?;
    let seeds = read_label_file(&args.seeds)?;
    let client = FixtureLinkClient::from_file(&args.links)?;
    let features = TableFeatureSource::from_table(read_nodes(&args.features)?)?;
    let sweeping = !(args.sweep_alpha.is_empty() && args.sweep_beta.is_empty() && args.sweep_outlinks.is_empty());
    let oracle = args.oracle.as_deref().map(tables::read_oracle).transpose()?;
    if sweeping && oracle.is_none() {
        return Err(Error::InvalidInput("discovery sweeps need --oracle".into()));
    }

    let run = run_discovery(&seeds, &client, &features, &classifiers, &pipeline)?;
    run.candidates.write_csv(create(out, "candidates.csv")?)?;
    run.report.write_csv(create(out, "stages.csv")?)?;
    DiscoverySummary::write_csv(std::slice::from_ref(&run.summary), create(out, "summary.csv")?)?;
    let discovered: BTreeSet<String> = run.candidates.discovered();
    let domains: Vec<String> = discovered.into_iter().collect();
    tables::write_domains(&domains, create(out, "discovered.csv")?)?;

    if let Some(oracle) = &oracle {
        let pf = partial_f1(&run.candidates.discovered(), oracle)?;
        tables::write_partial_f1(&pf, create(out, "evaluation.csv")?)?;
        if sweeping {
            let or_base = |v: &[u64], d: u64| if v.is_empty() { vec![d] } else { v.to_vec() };
            let alphas = or_base(&args.sweep_alpha, pipeline.criteria.alpha_min);
            let betas = or_base(&args.sweep_beta, pipeline.criteria.beta_min);
            let outlinks = if args.sweep_outlinks.is_empty() {
                vec![pipeline.outlinks_per_scheme]
            } else {
                args.sweep_outlinks.clone()
            };
            let points = discovery_sweep(
                &seeds,
                &client,
                &features,
                &classifiers,
                &pipeline,
                oracle,
                &alphas,
                &betas,
                &outlinks,
            )?;
            write_discovery_sweep(&points, create(out, "discovery_sweep.csv")?)?;
        }
    }
    Ok(())
}

fn metrics(cmd: &MetricsCommand, out: &Path) -> Result<()> {
    match cmd {
        MetricsCommand::Classification { input, positive } => {
            let (predicted, actual) = tables::read_predictions(input)?;
            let m = classification_metrics(&predicted, &actual, positive)?;
            tables::write_metrics(&[m], create(out, "metrics.csv")?)
        }
        MetricsCommand::Agreement { input } => {
            let items = tables::read_annotations(input)?;
            let n = items.len();
            let set = AnnotationSet::new(items)?;
            tables::write_alpha(&krippendorff_alpha(&set), n, create(out, "agreement.csv")?)
        }
    }
}
