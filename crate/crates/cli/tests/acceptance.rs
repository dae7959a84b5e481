//! End-to-end acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so the pass/fail lines are always shown.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use linkscope_core::baselines::{fit_flat_model, predict_flat, FeatureMatrix, FlatModelSpec, ModelFamily};
use linkscope_core::discovery::{
    generate_planted_ecosystem, misinfo_rate, partial_f1, run_discovery, train_news_classifier, Classifiers,
    FeatureSource, FixtureLinkClient, LinkSchemeCriteria, OracleLabel, PipelineConfig, PlantedConfig,
    PlantedEcosystem, SchemeMode,
};
use linkscope_core::discovery::identify_link_schemes;
use linkscope_core::eval::{classification_metrics, krippendorff_alpha, AnnotationSet};
use linkscope_core::experiment::discovery_sweep;
use linkscope_core::ingest::{
    generate_synthetic_webgraph, merge_and_binarize, AbsoluteBias, BinaryLabels, LabelRecord, LabelSource,
    Reliability, ReliabilityGrade, RelativeBias, SyntheticConfig, Task,
};
use linkscope_core::nn::gcn::eval_loss;
use linkscope_core::nn::train::task_targets;
use linkscope_core::nn::{loss_and_grad, normalize_adjacency, train_gcn, DenseMatrix, GcnModel, GraphInput, TrainConfig};
use linkscope_core::webgraph::{
    build_graph, truncate_topn, weight_edges, AttributeManifest, AttributedWebgraph, EdgeKind, EdgeRecord, Network,
    NodeRecord, WeightScheme,
};

type Outcome = Result<String, String>;

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 gradient correctness", gradient_correctness),
        ("2 weighting oracle", weighting_oracle),
        ("3 link-scheme oracle", link_scheme_oracle),
        ("4 learning sanity", learning_sanity),
        ("5 top-N trend", top_n_trend),
        ("6 discovery recall", discovery_recall),
        ("7 misinfo-rate ordering", misinfo_ordering),
        ("8 metric oracles", metric_oracles),
        ("9 determinism", determinism),
        ("10 data-pipeline conformance", pipeline_conformance),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail} ({secs:.1}s)");
            }
        }
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn domain(i: usize) -> String {
    format!("n{i:03}.test")
}

struct RawEdge {
    s: usize,
    t: usize,
    links: u64,
    pages: u64,
    kind: EdgeKind,
}

fn random_edges(rng: &mut ChaCha8Rng, n: usize, m: usize, max_links: u64) -> Vec<RawEdge> {
    (0..m)
        .map(|_| {
            let links = rng.random_range(1..=max_links);
            RawEdge {
                s: rng.random_range(0..n),
                t: rng.random_range(0..n),
                links,
                pages: rng.random_range(1..=links),
                kind: if rng.random::<bool>() { EdgeKind::Backlink } else { EdgeKind::Outlink },
            }
        })
        .collect()
}

fn graph_of(
    n: usize,
    edges: &[RawEdge],
    totals: &[(Option<u64>, Option<u64>)],
    attrs: &[Vec<f64>],
) -> AttributedWebgraph {
    let width = attrs.first().map_or(0, Vec::len);
    let manifest = AttributeManifest::new((0..width).map(|j| format!("a{j}"))).unwrap();
    let nodes = (0..n)
        .map(|i| NodeRecord {
            domain: domain(i),
            provider_backlink_total: totals[i].0,
            provider_outlink_total: totals[i].1,
            attributes: attrs.get(i).cloned().unwrap_or_default(),
        })
        .collect();
    let records = edges
        .iter()
        .map(|e| EdgeRecord {
            source: domain(e.s),
            target: domain(e.t),
            kind: e.kind,
            links: e.links,
            ref_pages: e.pages,
        })
        .collect();
    build_graph(nodes, records, manifest).unwrap()
}

// ---------------------------------------------------------------- 1

fn gradient_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let instances = 24;
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for inst in 0..instances {
        let n = rng.random_range(4..=30);
        let d = rng.random_range(1..=5);
        let h = rng.random_range(2..=6);
        let classes = rng.random_range(2..=3);
        let m = rng.random_range(0..=3 * n);
        let edges = random_edges(&mut rng, n, m, 50);
        let totals = vec![(Some(100_000), Some(100_000)); n];
        let attrs: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let g = graph_of(n, &edges, &totals, &attrs);
        let scheme = if inst % 8 == 0 {
            None
        } else {
            Some(WeightScheme::ALL[inst % 7])
        };
        let s = normalize_adjacency(&g, scheme).map_err(|e| e.to_string())?;
        let x = DenseMatrix::from_rows(&attrs).unwrap();
        let input = GraphInput::new(&s, &x).unwrap();
        let mut model = GcnModel::init(d, h, classes, 0.0, &mut rng);
        for p in model.params_mut() {
            for v in p.iter_mut() {
                *v += rng.random_range(-0.3..0.3);
            }
        }
        let mut rows: Vec<usize> = (0..n).collect();
        rows.shuffle(&mut rng);
        rows.truncate(rng.random_range(1..=n));
        let targets: Vec<usize> = rows.iter().map(|_| rng.random_range(0..classes)).collect();

        let (_, grads) = loss_and_grad::<ChaCha8Rng>(&model, &input, &rows, &targets, None).map_err(|e| e.to_string())?;
        let analytic: Vec<Vec<f64>> = grads.slices().iter().map(|s| s.to_vec()).collect();
        let step = 1e-5;
        for (k, block) in analytic.iter().enumerate() {
            for (i, &a) in block.iter().enumerate() {
                let mut plus = model.clone();
                plus.params_mut()[k][i] += step;
                let mut minus = model.clone();
                minus.params_mut()[k][i] -= step;
                let lp = eval_loss(&plus, &input, &rows, &targets).unwrap();
                let lm = eval_loss(&minus, &input, &rows, &targets).unwrap();
                let numeric = (lp - lm) / (2.0 * step);
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
                worst = worst.max(rel);
                checked += 1;
                ensure(rel <= 1e-4, || {
                    format!("instance {inst} block {k} entry {i}: analytic {a} numeric {numeric} rel {rel:e}")
                })?;
            }
        }
    }
    Ok(format!("{instances} instances, {checked} parameters, worst relative error {worst:.2e}"))
}

// ---------------------------------------------------------------- 2

fn weighting_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut compared = 0usize;
    let mut rejected = 0usize;
    for gi in 0..100 {
        let n = rng.random_range(1..=20);
        let m = rng.random_range(0..=4 * n);
        let edges = random_edges(&mut rng, n, m, 200);
        let mut links = vec![vec![0u64; n]; n];
        let mut pages = vec![vec![0u64; n]; n];
        for e in &edges {
            links[e.s][e.t] += e.links;
            pages[e.s][e.t] += e.pages;
        }
        let col = |mat: &Vec<Vec<u64>>, t: usize| (0..n).map(|i| mat[i][t]).sum::<u64>();
        let row = |mat: &Vec<Vec<u64>>, s: usize| mat[s].iter().sum::<u64>();
        let totals: Vec<(Option<u64>, Option<u64>)> = (0..n)
            .map(|i| {
                let gap = gi % 5 == 4 && rng.random::<f64>() < 0.2;
                let back = (!gap).then(|| col(&links, i) + rng.random_range(0..1000));
                let out = (!gap).then(|| row(&links, i) + rng.random_range(0..1000));
                (back, out)
            })
            .collect();
        let g = graph_of(n, &edges, &totals, &[]);

        for scheme in WeightScheme::ALL {
            let got = weight_edges(&g, scheme);
            let needs = |which: usize| {
                (0..n).any(|s| {
                    (0..n).any(|t| {
                        links[s][t] > 0
                            && match which {
                                0 => totals[t].0.is_none(),
                                _ => totals[s].1.is_none(),
                            }
                    })
                })
            };
            let missing = match scheme {
                WeightScheme::Backlink => needs(0),
                WeightScheme::Outlink => needs(1),
                _ => false,
            };
            if missing {
                ensure(got.is_err(), || format!("graph {gi} {scheme}: missing totals accepted"))?;
                rejected += 1;
                continue;
            }
            let got = got.map_err(|e| format!("graph {gi} {scheme}: {e}"))?;
            for (k, e) in g.edges().iter().enumerate() {
                let (s, t) = (e.source.index(), e.target.index());
                let l = links[s][t] as f64;
                let want = match scheme {
                    WeightScheme::Links => l,
                    WeightScheme::LogLinks => l.ln(),
                    WeightScheme::Backlink => l / totals[t].0.unwrap() as f64,
                    WeightScheme::Outlink => l / totals[s].1.unwrap() as f64,
                    WeightScheme::GraphBacklink => l / col(&links, t) as f64,
                    WeightScheme::GraphOutlink => l / row(&links, s) as f64,
                    WeightScheme::Page => pages[s][t] as f64 / col(&pages, t) as f64,
                };
                let diff = (got.get(k) - want).abs();
                ensure(diff <= 1e-12, || format!("graph {gi} {scheme} edge {s}->{t}: {} vs {want}", got.get(k)))?;
                compared += 1;
            }

            // dense D^-1/2 (sym(W) + I) D^-1/2
            let mut a = vec![vec![0.0f64; n]; n];
            for (k, e) in g.edges().iter().enumerate() {
                let (s, t) = (e.source.index(), e.target.index());
                a[s][t] += 0.5 * got.get(k);
                a[t][s] += 0.5 * got.get(k);
            }
            for (i, r) in a.iter_mut().enumerate() {
                r[i] += 1.0;
            }
            let deg: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
            let op = normalize_adjacency(&g, Some(scheme)).map_err(|e| e.to_string())?;
            for i in 0..n {
                for j in 0..n {
                    let want = a[i][j] / (deg[i] * deg[j]).sqrt();
                    let diff = (op.get(i, j) - want).abs();
                    ensure(diff <= 1e-12, || format!("graph {gi} {scheme} operator ({i},{j}) off by {diff:e}"))?;
                }
            }
        }
    }
    Ok(format!("100 graphs, {compared} edge weights and operators match, {rejected} missing-total rejections"))
}

// ---------------------------------------------------------------- 3

fn link_scheme_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut flagged = 0usize;
    for gi in 0..200 {
        let n = rng.random_range(2..=200);
        let m = rng.random_range(0..=5 * n);
        let edges = random_edges(&mut rng, n, m, 3000);
        let g = graph_of(n, &edges, &vec![(None, None); n], &[]);
        let mut labels = BTreeMap::new();
        let mut unreliable = vec![false; n];
        for (i, flag) in unreliable.iter_mut().enumerate() {
            let grade = match rng.random_range(0..4) {
                0 => ReliabilityGrade::Low,
                1 => ReliabilityGrade::High,
                2 => ReliabilityGrade::None,
                _ => continue,
            };
            *flag = grade == ReliabilityGrade::Low;
            labels.insert(domain(i), BinaryLabels::from_parts(grade, None));
        }
        let criteria = LinkSchemeCriteria {
            alpha_min: rng.random_range(0..6000),
            beta_min: rng.random_range(0..5),
        };
        let mode = if gi % 2 == 0 {
            SchemeMode::UnreliableTargets
        } else {
            SchemeMode::AllSuccessors
        };

        let mut a = vec![vec![0u64; n]; n];
        for e in &edges {
            a[e.s][e.t] += e.links;
        }
        let mut want = Vec::new();
        for s in 0..n {
            if !(0..n).any(|t| a[s][t] > 0 && unreliable[t]) {
                continue;
            }
            let counted: Vec<usize> = (0..n)
                .filter(|&t| a[s][t] > 0 && (mode == SchemeMode::AllSuccessors || unreliable[t]))
                .collect();
            let beta = counted.len() as u64;
            let alpha: u64 = counted.iter().map(|&t| a[s][t]).sum();
            if beta >= criteria.beta_min && alpha >= criteria.alpha_min {
                want.push((std::cmp::Reverse(beta), std::cmp::Reverse(alpha), domain(s)));
            }
        }
        want.sort();
        let got: Vec<_> = identify_link_schemes(&g, &labels, criteria, mode)
            .into_iter()
            .map(|s| (std::cmp::Reverse(s.beta), std::cmp::Reverse(s.alpha), s.domain))
            .collect();
        ensure(got == want, || format!("graph {gi} ({n} nodes, {criteria:?}, {mode:?}) differs"))?;
        flagged += got.len();
    }
    Ok(format!("200 graphs match exhaustive enumeration exactly, {flagged} schemes flagged"))
}

// ---------------------------------------------------------------- 4

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn learning_sanity() -> Outcome {
    let (mut gcn, mut gbdt, mut majority) = (Vec::new(), Vec::new(), Vec::new());
    for seed in 0..10 {
        let syn = generate_synthetic_webgraph(&SyntheticConfig {
            node_count: 2000,
            homophily: 0.9,
            attribute_signal: 1.0,
            seed,
            ..SyntheticConfig::default()
        })
        .map_err(|e| e.to_string())?;
        let cfg = TrainConfig {
            seed,
            ..TrainConfig::default()
        };
        let run = train_gcn(&syn.graph, &syn.labels, Task::Reliability, None, &cfg).map_err(|e| e.to_string())?;
        gcn.push(run.test.binary_f1);

        let targets = task_targets(&syn.graph, &syn.labels, Task::Reliability);
        let fm = FeatureMatrix::from_graph(&syn.graph).unwrap();
        let train: Vec<usize> = run.split.train.iter().chain(&run.split.val).copied().collect();
        let y: Vec<bool> = train.iter().map(|&i| targets[i] == Some(1)).collect();
        let actual: Vec<bool> = run.split.test.iter().map(|&i| targets[i] == Some(1)).collect();
        let spec = FlatModelSpec::new(ModelFamily::Gbdt).with_seed(seed);
        let model = fit_flat_model(&spec, &fm.select(&train), &y).map_err(|e| e.to_string())?;
        let pred = predict_flat(&model, &fm.select(&run.split.test)).unwrap();
        gbdt.push(classification_metrics(&pred.labels, &actual, &true).unwrap().binary_f1);

        let positive_majority = 2 * y.iter().filter(|&&v| v).count() >= y.len();
        let constant = vec![positive_majority; actual.len()];
        majority.push(classification_metrics(&constant, &actual, &true).unwrap().binary_f1);
    }
    let (g, b, m) = (mean(&gcn), mean(&gbdt), mean(&majority));
    let detail = format!("mean F1 gcn {g:.3}, gbdt {b:.3}, majority {m:.3}");
    ensure(g > b && b > m && g > m && g >= 0.85, || detail.clone())?;
    Ok(detail)
}

// ---------------------------------------------------------------- 5

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let (mx, my) = (mean(&rx), mean(&ry));
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn top_n_trend() -> Outcome {
    let graphs: Vec<_> = (0..10)
        .map(|seed| {
            let syn = generate_synthetic_webgraph(&SyntheticConfig {
                node_count: 500,
                homophily: 0.75,
                attribute_signal: 0.5,
                mean_degree: 30.0,
                outlink_fraction: 0.0,
                seed,
                ..SyntheticConfig::default()
            })
            .unwrap();
            let backlinks = syn.graph.network(Network::Backlink).unwrap();
            (seed, backlinks, syn.labels)
        })
        .collect();
    let mut means = Vec::new();
    for n in 1..=10 {
        let mut f1 = Vec::new();
        for (seed, g, labels) in &graphs {
            let g = truncate_topn(g, n, EdgeKind::Backlink).map_err(|e| e.to_string())?;
            let cfg = TrainConfig {
                seed: *seed,
                ..TrainConfig::default()
            };
            f1.push(
                train_gcn(&g, labels, Task::Reliability, None, &cfg)
                    .map_err(|e| e.to_string())?
                    .test
                    .binary_f1,
            );
        }
        means.push(mean(&f1));
    }
    let ns: Vec<f64> = (1..=10).map(f64::from).collect();
    let rho = spearman(&ns, &means);
    let curve: Vec<String> = means.iter().map(|v| format!("{v:.3}")).collect();
    let detail = format!("Spearman {rho:.3} over N=1..10, mean F1 [{}]", curve.join(" "));
    ensure(rho > 0.7, || detail.clone())?;
    Ok(detail)
}

// ---------------------------------------------------------------- 6, 7

fn planted() -> (PlantedEcosystem, FixtureLinkClient, Classifiers) {
    let eco = generate_planted_ecosystem(&PlantedConfig::default()).unwrap();
    let client = FixtureLinkClient::new(eco.edges.clone()).unwrap();
    let features = eco.features();
    let seeds: Vec<String> = eco.seeds.keys().cloned().collect();
    let (fm, found, _) = features.matrix(&seeds).unwrap();
    let fit = |task: Task| {
        let y: Vec<bool> = found.iter().map(|d| task.target(&eco.seeds[d]).unwrap()).collect();
        fit_flat_model(&FlatModelSpec::new(ModelFamily::RandomForest), &fm, &y).unwrap()
    };
    let (negatives, _, _) = features.matrix(&eco.random_domains).unwrap();
    let news = train_news_classifier(&fm, &negatives, 1.0, 0).unwrap().model;
    let classifiers = Classifiers {
        news,
        abs_bias: fit(Task::AbsBias),
        reliability: fit(Task::Reliability),
    };
    (eco, client, classifiers)
}

fn pipeline() -> PipelineConfig {
    PipelineConfig {
        criteria: LinkSchemeCriteria {
            alpha_min: 1000,
            beta_min: 2,
        },
        ..PipelineConfig::default()
    }
}

fn discovery_recall() -> Outcome {
    let (eco, client, cls) = planted();
    let features = eco.features();
    let ks = [1, 2, 5, 10, 15, 20, 30, 50, 100];
    let points = discovery_sweep(&eco.seeds, &client, &features, &cls, &pipeline(), &eco.oracle, &[1000], &[2], &ks)
        .map_err(|e| e.to_string())?;
    let f1: Vec<f64> = points.iter().map(|p| p.partial_f1).collect();
    let curve: Vec<String> = f1.iter().map(|v| format!("{v:.3}")).collect();
    ensure(f1.windows(2).all(|w| w[1] >= w[0]), || format!("partial F1 not monotone: [{}]", curve.join(" ")))?;
    ensure(f1.last().copied().unwrap_or(0.0) > 0.0, || "partial F1 never rises".into())?;

    let run = run_discovery(&eco.seeds, &client, &features, &cls, &pipeline().accept_all()).map_err(|e| e.to_string())?;
    let found = run.candidates.discovered();
    let hit = eco.hidden.iter().filter(|h| found.contains(*h)).count();
    let recall = hit as f64 / eco.hidden.len() as f64;
    ensure(recall >= 0.8, || format!("hidden recall {recall:.3} at vacuous thresholds"))?;
    Ok(format!("partial F1 over outlinks {ks:?}: [{}], hidden recall {recall:.3}", curve.join(" ")))
}

fn misinfo_ordering() -> Outcome {
    let (eco, client, cls) = planted();
    let features = eco.features();
    let run = run_discovery(&eco.seeds, &client, &features, &cls, &pipeline()).map_err(|e| e.to_string())?;
    let rate = |d: Vec<String>| -> Result<f64, String> {
        misinfo_rate(&d, &features, &cls.reliability, 0.5)
            .map_err(|e| e.to_string())?
            .rate
            .ok_or_else(|| "no classifiable domains".to_string())
    };
    let schemes = rate(run.candidates.domains().into_iter().collect())?;
    let neighbourhood = rate(eco.seed_neighbourhood().into_iter().collect())?;
    let random = rate(eco.random_domains.clone())?;
    let detail = format!("scheme outlinks {schemes:.3} > seed neighbourhood {neighbourhood:.3} > random {random:.3}");
    ensure(schemes - neighbourhood > 0.05 && neighbourhood - random > 0.05, || detail.clone())?;
    Ok(detail)
}

// ---------------------------------------------------------------- 8

fn naive_metrics(pred: &[u8], actual: &[u8], positive: u8) -> (usize, usize, usize, f64, f64, f64, f64) {
    let mut tp = 0;
    let mut fp = 0;
    let mut fn_ = 0;
    let mut correct = 0;
    for i in 0..pred.len() {
        if pred[i] == actual[i] {
            correct += 1;
        }
        if pred[i] == positive && actual[i] == positive {
            tp += 1;
        } else if pred[i] == positive {
            fp += 1;
        } else if actual[i] == positive {
            fn_ += 1;
        }
    }
    let precision = if tp + fp > 0 { tp as f64 / (tp + fp) as f64 } else { 0.0 };
    let recall = if tp + fn_ > 0 { tp as f64 / (tp + fn_) as f64 } else { 0.0 };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    (tp, fp, fn_, correct as f64 / pred.len() as f64, precision, recall, f1)
}

/// Pairwise form: mean within-unit disagreement over the disagreement
/// expected from the pooled label frequencies.
fn pairwise_alpha(items: &[Vec<Option<u8>>]) -> Option<f64> {
    let mut freq: BTreeMap<u8, f64> = BTreeMap::new();
    let mut n = 0.0;
    let mut observed = 0.0;
    for item in items {
        let vals: Vec<u8> = item.iter().flatten().copied().collect();
        let m = vals.len();
        if m < 2 {
            continue;
        }
        n += m as f64;
        for v in &vals {
            *freq.entry(*v).or_default() += 1.0;
        }
        let mut dis = 0.0;
        for i in 0..m {
            for j in 0..m {
                if i != j && vals[i] != vals[j] {
                    dis += 1.0;
                }
            }
        }
        observed += dis / (m as f64 - 1.0);
    }
    if n == 0.0 {
        return None;
    }
    let mut expected = 0.0;
    for (a, na) in &freq {
        for (b, nb) in &freq {
            if a != b {
                expected += na * nb;
            }
        }
    }
    if expected == 0.0 {
        return None;
    }
    Some(1.0 - (n - 1.0) * observed / expected)
}

fn metric_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    for case in 0..1000 {
        let len = rng.random_range(1..=60);
        let k = rng.random_range(2..=4);
        let pred: Vec<u8> = (0..len).map(|_| rng.random_range(0..k)).collect();
        let actual: Vec<u8> = (0..len).map(|_| rng.random_range(0..k)).collect();
        let r = classification_metrics(&pred, &actual, &0).map_err(|e| e.to_string())?;
        let (tp, fp, fn_, acc, p, rc, f1) = naive_metrics(&pred, &actual, 0);
        ensure(
            (r.true_positives, r.false_positives, r.false_negatives) == (tp, fp, fn_)
                && r.true_positives + r.false_positives + r.false_negatives + r.true_negatives == len
                && (r.accuracy - acc).abs() <= 1e-9
                && (r.precision - p).abs() <= 1e-9
                && (r.recall - rc).abs() <= 1e-9
                && (r.binary_f1 - f1).abs() <= 1e-9
                && r.f1_undefined == (tp + fp + fn_ == 0),
            || format!("classification case {case} differs"),
        )?;
    }
    let mut defined = 0;
    for case in 0..1000 {
        let items = rng.random_range(1..=15);
        let raters = rng.random_range(2..=5);
        let k = rng.random_range(1..=4);
        let data: Vec<Vec<Option<u8>>> = (0..items)
            .map(|_| {
                (0..raters)
                    .map(|_| (rng.random::<f64>() >= 0.3).then(|| rng.random_range(0..k)))
                    .collect()
            })
            .collect();
        let got = krippendorff_alpha(&AnnotationSet::new(data.clone()).unwrap()).alpha;
        let want = pairwise_alpha(&data);
        match (got, want) {
            (Some(a), Some(b)) => {
                ensure((a - b).abs() <= 1e-9, || format!("alpha case {case}: {a} vs {b}"))?;
                defined += 1;
            }
            (None, None) => {}
            _ => return Err(format!("alpha case {case}: definedness differs ({got:?} vs {want:?})")),
        }
    }

    let oracle: BTreeMap<String, OracleLabel> = [
        ("u1.test", OracleLabel::Unreliable),
        ("u2.test", OracleLabel::Unreliable),
        ("u3.test", OracleLabel::Unreliable),
        ("u4.test", OracleLabel::Unreliable),
        ("r1.test", OracleLabel::Reliable),
        ("r2.test", OracleLabel::Reliable),
        ("x1.test", OracleLabel::Unknown),
    ]
    .into_iter()
    .map(|(d, l)| (d.to_string(), l))
    .collect();
    let set = |v: &[&str]| -> BTreeSet<String> { v.iter().map(|s| s.to_string()).collect() };
    // TP 2 (u1 u2), FP 1 (r1), excluded 2 (x1, unlisted): P 2/3, R 2/4, F1 4/7
    let a = partial_f1(&set(&["u1.test", "u2.test", "r1.test", "x1.test", "new.test"]), &oracle).unwrap();
    ensure(
        (a.true_positives, a.false_positives, a.excluded) == (2, 1, 2)
            && a.precision == 2.0 / 3.0
            && a.recall == 0.5
            && a.partial_f1 == 2.0 * (2.0 / 3.0) * 0.5 / (2.0 / 3.0 + 0.5)
            && !a.undefined,
        || format!("hand example A: {a:?}"),
    )?;
    // all four unreliable, no reliable: P 1, R 1
    let b = partial_f1(&set(&["u1.test", "u2.test", "u3.test", "u4.test"]), &oracle).unwrap();
    ensure(b.precision == 1.0 && b.recall == 1.0 && b.partial_f1 == 1.0, || format!("hand example B: {b:?}"))?;
    // only reliable: P 0, R 0, F1 undefined
    let c = partial_f1(&set(&["r1.test", "r2.test"]), &oracle).unwrap();
    ensure(c.partial_f1 == 0.0 && c.undefined && c.false_positives == 2, || format!("hand example C: {c:?}"))?;
    Ok(format!("1000 classification and 1000 alpha cases ({defined} defined) match to 1e-9, 3 partial F1 examples exact"))
}

// ---------------------------------------------------------------- 9

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_linkscope")
}

fn linkscope(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("`linkscope {}` failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr))
    })
}

fn tree_files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_path_buf();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

const REPLAY_CONFIG: &str = r#"
name = "replay"
seed = 7
replicates = 2

[synthetic]
node_count = 300

[train]
max_epochs = 60

[flat]
family = "random_forest"

[sweep]
networks = ["combined", "backlink"]
schemes = ["unweighted", "log_links"]
top_n = [2, 5]
models = ["gcn", "gbdt"]

[discovery]
news_model = "models/news/news_model.json"
abs_bias_model = "models/bias/model.json"
reliability_model = "models/reliability/model.json"

[discovery.criteria]
alpha_min = 1000
beta_min = 2
"#;

fn replay(dir: &Path) -> Result<(), String> {
    std::fs::write(dir.join("config.toml"), REPLAY_CONFIG).map_err(|e| e.to_string())?;
    let steps: [&[&str]; 9] = [
        &["--config", "config.toml", "ingest", "planted", "--out-dir", "eco"],
        &["--config", "config.toml", "ingest", "synthetic", "--out-dir", "syn"],
        &[
            "--config", "config.toml", "train", "news", "--nodes", "eco/nodes.csv", "--positives", "eco/seeds.csv",
            "--negatives", "eco/random.csv", "--out-dir", "models/news",
        ],
        &[
            "--config", "config.toml", "train", "flat", "--nodes", "eco/nodes.csv", "--labels", "eco/seeds.csv",
            "--task", "abs_bias", "--out-dir", "models/bias",
        ],
        &[
            "--config", "config.toml", "train", "flat", "--nodes", "eco/nodes.csv", "--labels", "eco/seeds.csv",
            "--task", "reliability", "--out-dir", "models/reliability",
        ],
        &[
            "--config", "config.toml", "train", "gcn", "--nodes", "syn/nodes.csv", "--edges", "syn/edges.csv",
            "--labels", "syn/labels.csv", "--scheme", "graph_backlink", "--out-dir", "gcn",
        ],
        &["--config", "config.toml", "cv", "--family", "gbdt", "--folds", "5", "--out-dir", "cv"],
        &["--config", "config.toml", "sweep", "--out-dir", "sweep"],
        &[
            "--config", "config.toml", "discover", "--seeds", "eco/seeds.csv", "--links", "eco/edges.csv",
            "--features", "eco/nodes.csv", "--oracle", "eco/oracle.csv", "--sweep-outlinks", "5,20,100",
            "--sweep-alpha", "500,1000", "--out-dir", "discover",
        ],
    ];
    for args in steps {
        linkscope(dir, args)?;
    }
    Ok(())
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    replay(a.path())?;
    replay(b.path())?;
    let (fa, fb) = (tree_files(a.path()), tree_files(b.path()));
    ensure(fa.keys().eq(fb.keys()), || "replays wrote different file sets".into())?;
    let tables = fa.keys().filter(|p| p.extension().is_some_and(|e| e == "csv")).count();
    for (path, bytes) in &fa {
        ensure(&fb[path] == bytes, || format!("{} differs between replays", path.display()))?;
    }
    for required in ["sweep/results.csv", "discover/candidates.csv", "discover/discovery_sweep.csv", "gcn/metrics.csv"] {
        ensure(fa.contains_key(Path::new(required)), || format!("{required} missing"))?;
    }
    Ok(format!("{} files ({tables} tables) byte-identical across two replays of train, cv, sweep, discover", fa.len()))
}

// ---------------------------------------------------------------- 10

fn expected_binarization(grade: ReliabilityGrade, bias: Option<i8>) -> BinaryLabels {
    let reliability = match grade {
        ReliabilityGrade::VeryLow | ReliabilityGrade::Low | ReliabilityGrade::Mixed | ReliabilityGrade::Questionable => {
            Reliability::Unreliable
        }
        ReliabilityGrade::High | ReliabilityGrade::VeryHigh => Reliability::Reliable,
        ReliabilityGrade::None => Reliability::Unknown,
    };
    let relative_bias = match bias {
        None => RelativeBias::Unknown,
        Some(0) => RelativeBias::Dropped,
        Some(b) if b < 0 => RelativeBias::Left,
        Some(_) => RelativeBias::Right,
    };
    let absolute_bias = match bias {
        None => AbsoluteBias::Unknown,
        Some(b) if b.abs() == 2 => AbsoluteBias::Extreme,
        Some(_) => AbsoluteBias::Center,
    };
    BinaryLabels {
        reliability,
        relative_bias,
        absolute_bias,
    }
}

fn pipeline_conformance() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let write = |name: &str, text: &str| std::fs::write(d.join(name), text).map_err(|e| e.to_string());
    write(
        "mbfc.csv",
        "domain,reliability_grade,bias_score,source,label_date\n\
         a.test,low,2,mbfc,2023-01-01\n\
         b.test,mixed,-1,mbfc,2023-01-01\n\
         c.test,high,0,mbfc,2023-01-01\n\
         d.test,very_low,-2,mbfc,2023-01-01\n",
    )?;
    write(
        "blocklist.csv",
        "domain,reliability_grade,bias_score,source,label_date\n\
         a.test,red,,blocklist,2022-06-01\n\
         e.test,black,,blocklist,2022-06-01\n",
    )?;
    write(
        "probes.csv",
        "domain,http_status,parked,provider_backlink_total\n\
         a.test,200,0,25000\n\
         b.test,404,0,500\n\
         c.test,,,\n\
         d.test,200,1,10000\n\
         e.test,301,0,9999\n",
    )?;
    linkscope(d, &["audit", "--labels", "mbfc.csv", "blocklist.csv", "--probes", "probes.csv", "--out-dir", "audit"])?;
    let survival = std::fs::read_to_string(d.join("audit/survival.csv")).map_err(|e| e.to_string())?;
    // MBFC: a ok/ok/25k, b 404, c unknown, d parked/10k. Blocklist: a, e ok/ok/under.
    let want = "Source,URLs,!404,!Parked,Both,>10k\n\
                MBFC,4,50,50,25,50\n\
                Blocklist,2,100,100,100,50\n\
                Total,6,4,4,3,3\n";
    ensure(survival == want, || format!("survival table:\n{survival}"))?;

    let mut checked = 0;
    let date = chrono::NaiveDate::from_ymd_opt(2024, 1, 1).unwrap();
    for grade in ReliabilityGrade::ALL {
        for bias in [None, Some(-2), Some(-1), Some(0), Some(1), Some(2)] {
            let rec = LabelRecord::parse("x.test", grade.as_str(), bias, LabelSource::Mbfc, date)
                .map_err(|e| e.to_string())?;
            let got = merge_and_binarize(&[rec]).map_err(|e| e.to_string())?["x.test"];
            let want = expected_binarization(grade, bias);
            ensure(got == want, || format!("{grade} / {bias:?}: {got:?} vs {want:?}"))?;
            ensure(BinaryLabels::from_parts(grade, bias) == want, || format!("{grade} / {bias:?} from_parts"))?;
            checked += 1;
        }
    }

    let (eco, client, cls) = planted();
    let run = run_discovery(&eco.seeds, &client, &eco.features(), &cls, &pipeline()).map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    linkscope_core::discovery::DiscoverySummary::write_csv(std::slice::from_ref(&run.summary), &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let header = text.lines().next().unwrap_or("");
    ensure(
        header == "Seed,Backlinks,alpha_min,beta_min,L,Outlinks,MC,& News,& Misinfo,& Biased",
        || format!("discovery summary header {header:?}"),
    )?;
    let s = &run.summary;
    ensure(
        s.candidates >= s.news && s.news >= s.news_misinfo && s.news_misinfo >= s.news_misinfo_biased,
        || format!("discovery summary counts not nested: {s:?}"),
    )?;
    Ok(format!(
        "survival and discovery summary tables have the published columns, {checked} grade/score combinations binarize correctly"
    ))
}
