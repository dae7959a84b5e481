//! `linkscope` batch command line.
//!
//! Every subcommand writes comma-delimited UTF-8 tables with a header row
//! into `--out-dir`. Exit status is 0 on success, 2 when the input or config
//! is rejected and 1 when a run fails for any other reason.

mod commands;
mod tables;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "linkscope", version, about = "Detect and discover unreliable news domains in attributed webgraphs")]
pub struct Cli {
    /// Overrides the seed of the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// TOML experiment config; every section is optional.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate and merge data files, or write generated datasets.
    #[command(subcommand)]
    Ingest(IngestCommand),
    /// Survival table of listed domains from liveness probes.
    Audit(AuditArgs),
    /// Build a graph, summarize it and weight its edges.
    Graph(GraphArgs),
    /// Train a model and report its held-out metrics.
    #[command(subcommand)]
    Train(TrainCommand),
    /// Repeated random-split cross-validation of a flat model.
    Cv(CvArgs),
    /// Run the configured top-N / scheme / network grid.
    Sweep,
    /// Run the discovery pipeline.
    Discover(DiscoverArgs),
    /// Classification metrics or annotator agreement from a table.
    #[command(subcommand)]
    Metrics(MetricsCommand),
}

#[derive(Debug, Subcommand)]
pub enum IngestCommand {
    /// Merge raw label files into one binary label table.
    Labels {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Check that a nodes and edges file build a graph.
    Check {
        #[arg(long)]
        nodes: PathBuf,
        #[arg(long)]
        edges: PathBuf,
    },
    /// Write the synthetic graph of the `[synthetic]` section.
    Synthetic,
    /// Write the planted discovery ecosystem of the `[planted]` section.
    Planted,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Raw label files that list the probed domains.
    #[arg(long, required = true, num_args = 1..)]
    pub labels: Vec<PathBuf>,
    #[arg(long)]
    pub probes: PathBuf,
}

#[derive(Debug, Args, Clone, Default)]
pub struct DataArgs {
    /// Nodes file; without it the `[data]` section is used.
    #[arg(long)]
    pub nodes: Option<PathBuf>,
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Raw or binary label file.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "combined")]
    pub network: String,
    #[arg(long)]
    pub top_n: Option<usize>,
    #[arg(long, default_value = "backlink")]
    pub top_n_kind: String,
    /// Weight scheme for the edge table; omitted means unweighted.
    #[arg(long)]
    pub scheme: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum TrainCommand {
    /// Two-layer GCN on the graph.
    Gcn {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "reliability")]
        task: String,
        #[arg(long)]
        scheme: Option<String>,
        #[arg(long, default_value = "combined")]
        network: String,
    },
    /// Flat model on node attributes.
    Flat {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "reliability")]
        task: String,
        /// Overrides `[flat] family`.
        #[arg(long)]
        family: Option<String>,
    },
    /// News-versus-other classifier for the discovery pipeline.
    News {
        /// Nodes file holding the features of every listed domain.
        #[arg(long)]
        nodes: PathBuf,
        /// Table whose first column lists news domains.
        #[arg(long)]
        positives: PathBuf,
        /// Table whose first column lists the negative pool.
        #[arg(long)]
        negatives: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        ratio: f64,
    },
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "reliability")]
    pub task: String,
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
}

#[derive(Debug, Args)]
pub struct DiscoverArgs {
    /// Raw or binary label file of the seed list.
    #[arg(long)]
    pub seeds: PathBuf,
    /// Edges file replayed as the link-data provider.
    #[arg(long)]
    pub links: PathBuf,
    /// Nodes file with the features of candidate domains.
    #[arg(long)]
    pub features: PathBuf,
    /// `domain,label` table with unreliable / reliable / unknown labels.
    #[arg(long)]
    pub oracle: Option<PathBuf>,
    #[arg(long)]
    pub news_model: Option<PathBuf>,
    #[arg(long)]
    pub abs_bias_model: Option<PathBuf>,
    #[arg(long)]
    pub reliability_model: Option<PathBuf>,
    /// Sweep values of alpha_min; needs --oracle.
    #[arg(long, value_delimiter = ',')]
    pub sweep_alpha: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    pub sweep_beta: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    pub sweep_outlinks: Vec<usize>,
}

#[derive(Debug, Subcommand)]
pub enum MetricsCommand {
    /// Accuracy and binary F1 from a `predicted,actual` table.
    Classification {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "unreliable")]
        positive: String,
    },
    /// Nominal Krippendorff's alpha from an item-by-annotator table.
    Agreement {
        #[arg(long)]
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("linkscope: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
