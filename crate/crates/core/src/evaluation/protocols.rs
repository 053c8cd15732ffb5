//! The three downstream experiments and the depth sweep. Runs are
//! independent and execute in parallel; results are gathered in seed order
//! so reports are identical across re-runs.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::classifier::{predict_logreg, train_logreg, LogRegConfig};
use crate::embedding::{all_ordered_pairs, extract_embeddings, rank_pairs, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::graph::DirectedAttributedGraph;
use crate::linalg::DenseMatrix;
use crate::model::{train, ModelConfig, TrainMask};

use super::metrics::{accuracy, macro_f1, micro_f1, precision_at_k};
use super::report::EvalReport;
use super::split::split_edges;

const MASK_STREAM: u64 = 1;
const CLASSIFY_STREAM: u64 = 2;
const NEGATIVE_STREAM: u64 = 3;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Which labeled nodes feed the two branch losses.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Supervision {
    #[default]
    AllLabeled,
    /// A per-run random subset of the labeled nodes.
    LabeledFraction(f64),
    Fixed(TrainMask),
}

impl Supervision {
    pub fn mask(&self, g: &DirectedAttributedGraph, seed: u64) -> Result<TrainMask> {
        match self {
            Supervision::AllLabeled => Ok(TrainMask::all_labeled(g)),
            Supervision::LabeledFraction(frac) => {
                if !(*frac > 0.0 && *frac <= 1.0) {
                    return Err(Error::InvalidConfig(format!("supervision fraction must be in (0, 1], got {frac}")));
                }
                let mut labeled: Vec<usize> = (0..g.num_nodes()).filter(|&i| g.labels()[i].is_some()).collect();
                labeled.shuffle(&mut stream_rng(seed, MASK_STREAM));
                let take = ((frac * labeled.len() as f64).round() as usize).max(1).min(labeled.len());
                Ok(TrainMask::from_indices(g.num_nodes(), &labeled[..take]))
            }
            Supervision::Fixed(mask) => {
                if mask.len() != g.num_nodes() {
                    return Err(Error::dims("supervision mask length", g.num_nodes(), mask.len()));
                }
                Ok(mask.clone())
            }
        }
    }

    fn describe(&self) -> String {
        match self {
            Supervision::AllLabeled => "all_labeled".into(),
            Supervision::LabeledFraction(f) => format!("labeled_fraction:{f}"),
            Supervision::Fixed(m) => format!("fixed:{}", m.count()),
        }
    }
}

/// Candidate universe for link prediction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum CandidateMode {
    /// Every ordered non-self pair that is not a training edge.
    #[default]
    Full,
    /// All held-out edges plus this many random non-edges. An approximation
    /// of the full ranking for graphs where `n²` pairs are too many.
    Sampled { negatives: usize },
}

fn snapshot(report: EvalReport, cfg: &ModelConfig, supervision: &Supervision) -> EvalReport {
    report
        .with_config("layers", cfg.num_layers)
        .with_config("dim", cfg.hidden_dim)
        .with_config("lr", cfg.learning_rate)
        .with_config("epochs", cfg.epochs)
        .with_config("normalize_adj", cfg.normalize_adjacency)
        .with_config("loss", format!("{:?}", cfg.loss_reduction).to_lowercase())
        .with_config("supervision", supervision.describe())
}

fn check_seeds(seeds: &[u64]) -> Result<()> {
    if seeds.is_empty() {
        return Err(Error::InvalidConfig("at least one run is required".into()));
    }
    Ok(())
}

fn check_ks(ks: &[usize]) -> Result<usize> {
    match ks.iter().copied().max() {
        Some(0) | None => Err(Error::InvalidConfig("k values must be non-empty and positive".into())),
        Some(_) if ks.contains(&0) => Err(Error::InvalidConfig("k values must be positive".into())),
        Some(max) => Ok(max),
    }
}

type RunRows = Vec<(&'static str, Option<usize>, f64)>;

fn collect(mut report: EvalReport, runs: Vec<RunRows>) -> EvalReport {
    for (run, rows) in runs.into_iter().enumerate() {
        for (metric, k, value) in rows {
            report.push(metric, k, None, run, value);
        }
    }
    report
}

/// Trains one model with `seed` and returns its embeddings.
pub fn train_and_embed(
    g: &DirectedAttributedGraph,
    cfg: &ModelConfig,
    supervision: &Supervision,
    seed: u64,
) -> Result<(EmbeddingMatrix, TrainMask)> {
    let cfg = ModelConfig { seed, ..*cfg };
    let mask = supervision.mask(g, seed)?;
    let outcome = train(g, &cfg, &mask)?;
    Ok((extract_embeddings(&outcome.params, g, &cfg)?, mask))
}

/// Trains on the full graph, ranks every ordered non-self pair by the
/// asymmetric similarity and reports precision at each `k` against `E`.
pub fn run_reconstruction(
    g: &DirectedAttributedGraph,
    cfg: &ModelConfig,
    ks: &[usize],
    seeds: &[u64],
    supervision: &Supervision,
) -> Result<EvalReport> {
    check_seeds(seeds)?;
    let max_k = check_ks(ks)?;
    let n = g.num_nodes();
    let universe = n * n.saturating_sub(1);
    if max_k > universe {
        return Err(Error::KTooLarge { k: max_k, len: universe });
    }
    let baseline = g.edges().filter(|(i, j)| i != j).count() as f64 / universe as f64;
    let runs = seeds
        .par_iter()
        .map(|&seed| -> Result<RunRows> {
            let (z, _) = train_and_embed(g, cfg, supervision, seed)?;
            let ranked = rank_pairs(&z, all_ordered_pairs(n), max_k)?;
            let mut rows = RunRows::new();
            for &k in ks {
                rows.push(("precision", Some(k), precision_at_k(&ranked, g, k)?));
            }
            rows.push(("random_baseline", None, baseline));
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    let report = snapshot(EvalReport::new("reconstruction", seeds), cfg, supervision);
    Ok(collect(report, runs))
}

/// Per run: hold out `ratio` of the edges, train on the rest, rank the
/// candidate pairs and score precision at each `k` against the held-out
/// edges. The random-ranking baseline `|test| / |candidates|` is recorded.
pub fn run_link_prediction(
    g: &DirectedAttributedGraph,
    cfg: &ModelConfig,
    ratio: f64,
    ks: &[usize],
    seeds: &[u64],
    supervision: &Supervision,
    candidates: CandidateMode,
) -> Result<EvalReport> {
    check_seeds(seeds)?;
    let max_k = check_ks(ks)?;
    let n = g.num_nodes();
    let runs = seeds
        .par_iter()
        .map(|&seed| -> Result<RunRows> {
            let split = split_edges(g, ratio, seed)?;
            let train_g = split.train_graph(g)?;
            let (z, _) = train_and_embed(&train_g, cfg, supervision, seed)?;
            let test: HashSet<(usize, usize)> = split.test_edges.iter().copied().collect();
            let (ranked, num_candidates) = match candidates {
                CandidateMode::Full => {
                    let train_non_self = split.train_edges.iter().filter(|(i, j)| i != j).count();
                    let count = n * n.saturating_sub(1) - train_non_self;
                    let pairs = all_ordered_pairs(n).filter(|&(i, j)| !train_g.has_edge(i, j));
                    (rank_pairs(&z, pairs, max_k)?, count)
                }
                CandidateMode::Sampled { negatives } => {
                    let pairs = sampled_candidates(g, &split.test_edges, negatives, seed)?;
                    let count = pairs.len();
                    (rank_pairs(&z, pairs, max_k)?, count)
                }
            };
            let mut rows = RunRows::new();
            for &k in ks {
                rows.push(("precision", Some(k), precision_at_k(&ranked, &test, k)?));
            }
            let relevant = split.test_edges.iter().filter(|(i, j)| i != j).count();
            rows.push(("random_baseline", None, relevant as f64 / num_candidates as f64));
            rows.push(("test_edges", None, split.test_edges.len() as f64));
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    let mode = match candidates {
        CandidateMode::Full => "full".to_string(),
        CandidateMode::Sampled { negatives } => format!("sampled:{negatives}"),
    };
    let report = snapshot(EvalReport::new("link_prediction", seeds), cfg, supervision)
        .with_config("ratio", ratio)
        .with_config("candidates", mode);
    Ok(collect(report, runs))
}

/// Held-out non-self edges plus `negatives` distinct random non-edges of
/// the full graph.
fn sampled_candidates(
    g: &DirectedAttributedGraph,
    test_edges: &[(usize, usize)],
    negatives: usize,
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    let n = g.num_nodes();
    let available = n * n.saturating_sub(1) - g.edges().filter(|(i, j)| i != j).count();
    if negatives > available {
        return Err(Error::InvalidConfig(format!(
            "asked for {negatives} negative pairs but only {available} non-edges exist"
        )));
    }
    let mut out: Vec<(usize, usize)> = test_edges.iter().copied().filter(|(i, j)| i != j).collect();
    let mut chosen = HashSet::with_capacity(negatives);
    let mut rng = stream_rng(seed, NEGATIVE_STREAM);
    while chosen.len() < negatives {
        let pair = (rng.random_range(0..n), rng.random_range(0..n));
        if pair.0 != pair.1 && !g.has_edge(pair.0, pair.1) && chosen.insert(pair) {
            out.push(pair);
        }
    }
    Ok(out)
}

/// Scores of one downstream classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassificationScores {
    pub accuracy: f64,
    pub micro_f1: f64,
    pub macro_f1: f64,
}

/// Fits logistic regression on the `train` rows of `features` and scores
/// it on the `test` rows.
pub fn classify_embeddings(
    features: &DenseMatrix,
    labels: &[usize],
    num_classes: usize,
    train_rows: &[usize],
    test_rows: &[usize],
    logreg: &LogRegConfig,
) -> Result<ClassificationScores> {
    if labels.len() != features.rows() {
        return Err(Error::LengthMismatch {
            left: features.rows(),
            right: labels.len(),
        });
    }
    if test_rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    let pick = |rows: &[usize]| rows.iter().map(|&i| labels[i]).collect::<Vec<_>>();
    let model = train_logreg(&features.select_rows(train_rows), &pick(train_rows), num_classes, logreg)?;
    let predicted = predict_logreg(&model, &features.select_rows(test_rows))?;
    let truth = pick(test_rows);
    Ok(ClassificationScores {
        accuracy: accuracy(&truth, &predicted)?,
        micro_f1: micro_f1(&truth, &predicted, num_classes)?,
        macro_f1: macro_f1(&truth, &predicted, num_classes)?,
    })
}

/// Random split of the labeled nodes into downstream train and test rows.
pub fn classification_split(g: &DirectedAttributedGraph, train_frac: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::InvalidConfig(format!("train fraction must be in (0, 1), got {train_frac}")));
    }
    let mut labeled: Vec<usize> = (0..g.num_nodes()).filter(|&i| g.labels()[i].is_some()).collect();
    if labeled.len() < 2 {
        return Err(Error::InvalidConfig("classification needs at least two labeled nodes".into()));
    }
    labeled.shuffle(&mut stream_rng(seed, CLASSIFY_STREAM));
    let take = ((train_frac * labeled.len() as f64).round() as usize).clamp(1, labeled.len() - 1);
    let test = labeled.split_off(take);
    Ok((labeled, test))
}

/// Per run: train the model, take its embeddings, fit logistic regression
/// on `train_frac` of the labeled nodes and score the rest. The fraction of
/// test nodes that were also in the supervision mask is recorded as
/// `supervision_overlap`.
pub fn run_classification(
    g: &DirectedAttributedGraph,
    cfg: &ModelConfig,
    train_frac: f64,
    seeds: &[u64],
    supervision: &Supervision,
    logreg: &LogRegConfig,
) -> Result<EvalReport> {
    check_seeds(seeds)?;
    let runs = seeds
        .par_iter()
        .map(|&seed| -> Result<RunRows> {
            let (train_rows, test_rows) = classification_split(g, train_frac, seed)?;
            let (z, mask) = train_and_embed(g, cfg, supervision, seed)?;
            let labels: Vec<usize> = g.labels().iter().map(|l| l.unwrap_or(0)).collect();
            let scores = classify_embeddings(
                z.as_matrix(),
                &labels,
                g.num_classes().max(cfg.num_classes),
                &train_rows,
                &test_rows,
                &LogRegConfig { seed, ..*logreg },
            )?;
            let overlap = test_rows.iter().filter(|&&i| mask.contains(i)).count() as f64 / test_rows.len() as f64;
            Ok(vec![
                ("accuracy", None, scores.accuracy),
                ("micro_f1", None, scores.micro_f1),
                ("macro_f1", None, scores.macro_f1),
                ("supervision_overlap", None, overlap),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let report = snapshot(EvalReport::new("classification", seeds), cfg, supervision).with_config("train_frac", train_frac);
    Ok(collect(report, runs))
}

/// The task repeated at each depth of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepTask {
    Classification { train_frac: f64, logreg: LogRegConfig },
    Reconstruction { ks: Vec<usize> },
    LinkPrediction { ratio: f64, ks: Vec<usize>, candidates: CandidateMode },
}

impl SweepTask {
    fn name(&self) -> &'static str {
        match self {
            SweepTask::Classification { .. } => "classification",
            SweepTask::Reconstruction { .. } => "reconstruction",
            SweepTask::LinkPrediction { .. } => "link_prediction",
        }
    }
}

pub fn run_task(
    g: &DirectedAttributedGraph,
    cfg: &ModelConfig,
    task: &SweepTask,
    seeds: &[u64],
    supervision: &Supervision,
) -> Result<EvalReport> {
    match task {
        SweepTask::Classification { train_frac, logreg } => run_classification(g, cfg, *train_frac, seeds, supervision, logreg),
        SweepTask::Reconstruction { ks } => run_reconstruction(g, cfg, ks, seeds, supervision),
        SweepTask::LinkPrediction { ratio, ks, candidates } => {
            run_link_prediction(g, cfg, *ratio, ks, seeds, supervision, *candidates)
        }
    }
}

/// Repeats `task` with `num_layers` set to each depth in turn.
pub fn depth_sweep(
    g: &DirectedAttributedGraph,
    base_cfg: &ModelConfig,
    depths: &[usize],
    task: &SweepTask,
    seeds: &[u64],
    supervision: &Supervision,
) -> Result<EvalReport> {
    if depths.is_empty() {
        return Err(Error::InvalidConfig("depth list is empty".into()));
    }
    let mut report = EvalReport::new(format!("depth_sweep_{}", task.name()), seeds);
    for &depth in depths {
        let cfg = ModelConfig {
            num_layers: depth,
            ..*base_cfg
        };
        let part = run_task(g, &cfg, task, seeds, supervision)?;
        if report.config.is_empty() {
            report.config = part.config.into_iter().filter(|(k, _)| k != "layers").collect();
            let list: Vec<String> = depths.iter().map(usize::to_string).collect();
            report.config.push(("depths".into(), list.join(";")));
        }
        report.absorb(
            EvalReport {
                config: Vec::new(),
                ..part
            },
            Some(depth),
        );
    }
    Ok(report)
}
