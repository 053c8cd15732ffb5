use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "aagcn",
    version,
    about = "Train and evaluate asymmetric attributed graph convolutional embeddings",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train once, then write a checkpoint and the embedding export.
    Train(TrainArgs),
    /// Rank all ordered pairs and score them against the training graph.
    Reconstruct(ReconstructArgs),
    /// Hold out edges, train on the rest and rank the held-out edges.
    Linkpred(LinkpredArgs),
    /// Embed, then fit logistic regression on a labeled split.
    Classify(ClassifyArgs),
    /// Repeat one evaluation task across several depths.
    DepthSweep(SweepArgs),
    /// Compare analytic gradients with finite differences.
    Gradcheck(GradcheckArgs),
    /// Recompute embeddings from a saved checkpoint.
    ExportEmbeddings(ExportArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Read flag defaults from a `key = value` file; explicit flags win.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Dataset manifest.
    #[arg(long, value_name = "PATH", conflicts_with = "synthetic")]
    pub manifest: Option<PathBuf>,

    /// Synthetic block-model graph, optionally with overrides such as
    /// `nodes=500,signal=1.5`. Keys: nodes, communities, intra, inter,
    /// features, signal, one_way, seed.
    #[arg(long, value_name = "SPEC", num_args = 0..=1, default_missing_value = "")]
    pub synthetic: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    Mean,
    Sum,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Number of convolutional layers per branch [default depends on the command].
    #[arg(long)]
    pub layers: Option<usize>,

    /// Width of every hidden layer [default: 100].
    #[arg(long)]
    pub dim: Option<usize>,

    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,

    #[arg(long, default_value_t = 200)]
    pub epochs: usize,

    /// Row-normalize each branch's propagation matrix.
    #[arg(long)]
    pub normalize_adj: bool,

    #[arg(long, value_enum, default_value_t = LossArg::Mean)]
    pub loss: LossArg,

    /// Supervise the branches with this fraction of the labeled nodes
    /// instead of all of them.
    #[arg(long, value_name = "FRAC")]
    pub supervision_frac: Option<f64>,

    /// Model seed; with `--runs`, run `i` uses `seed + i`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Number of independent runs [default: 10].
    #[arg(long)]
    pub runs: Option<usize>,

    /// Explicit per-run seeds; overrides `--seed`.
    #[arg(long, action = clap::ArgAction::Set, value_delimiter = ',', value_name = "LIST")]
    pub seeds: Vec<u64>,

    /// Write per-run records here as CSV.
    #[arg(long, value_name = "PATH")]
    pub out_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifierArgs {
    /// Fraction of labeled nodes used to fit the classifier.
    #[arg(long, default_value_t = 0.8)]
    pub train_frac: f64,

    #[arg(long, default_value_t = 500)]
    pub logreg_epochs: usize,

    #[arg(long, default_value_t = 0.1)]
    pub logreg_lr: f64,

    #[arg(long, default_value_t = 1e-4)]
    pub logreg_l2: f64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,

    #[arg(long, value_name = "PATH", default_value = "aagcn.ckpt")]
    pub out_checkpoint: PathBuf,

    #[arg(long, value_name = "PATH", default_value = "embeddings.txt")]
    pub out_embeddings: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub runs: RunArgs,

    /// Cut-offs for precision@k.
    #[arg(long, action = clap::ArgAction::Set, value_delimiter = ',', default_value = "100,200,500,1000")]
    pub k: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct LinkpredArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub runs: RunArgs,

    #[arg(long, action = clap::ArgAction::Set, value_delimiter = ',', default_value = "100,200,500,1000")]
    pub k: Vec<usize>,

    /// Fraction of edges held out for testing.
    #[arg(long, default_value_t = 0.3)]
    pub ratio: f64,

    /// Rank the test edges against this many sampled non-edges instead of
    /// every candidate pair.
    #[arg(long)]
    pub negatives: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub runs: RunArgs,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepTaskArg {
    Classify,
    Reconstruct,
    Linkpred,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub runs: RunArgs,
    #[command(flatten)]
    pub classifier: ClassifierArgs,

    #[arg(long, value_enum, default_value_t = SweepTaskArg::Classify)]
    pub task: SweepTaskArg,

    /// Depths as a list and/or inclusive ranges, e.g. `1-4,6,8`.
    #[arg(long, default_value = "1-10", value_parser = parse_depths)]
    pub depths: Depths,

    #[arg(long, action = clap::ArgAction::Set, value_delimiter = ',', default_value = "200")]
    pub k: Vec<usize>,

    #[arg(long, default_value_t = 0.3)]
    pub ratio: f64,

    #[arg(long)]
    pub negatives: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,

    /// Largest accepted relative error.
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Checkpoint written by `train`.
    #[arg(long, value_name = "PATH")]
    pub checkpoint: PathBuf,

    #[arg(long, value_name = "PATH", default_value = "embeddings.txt")]
    pub out_embeddings: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Depths(pub Vec<usize>);

pub fn parse_depths(s: &str) -> Result<Depths, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let number = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a depth"));
        match part.split_once('-') {
            Some((lo, hi)) => {
                let (lo, hi) = (number(lo)?, number(hi)?);
                if lo > hi {
                    return Err(format!("empty depth range `{part}`"));
                }
                out.extend(lo..=hi);
            }
            None => out.push(number(part)?),
        }
    }
    if out.is_empty() {
        return Err("no depths given".into());
    }
    if out.contains(&0) {
        return Err("depths start at 1".into());
    }
    Ok(Depths(out))
}
