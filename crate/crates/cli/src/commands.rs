use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use aagcn::classifier::LogRegConfig;
use aagcn::data_io::{generate_synthetic, load_dataset, save_embeddings, DatasetManifest, SyntheticSpec};
use aagcn::embedding::extract_embeddings;
use aagcn::evaluation::{
    depth_sweep, run_classification, run_link_prediction, run_reconstruction, CandidateMode, EvalReport, Supervision,
    SweepTask,
};
use aagcn::graph::DirectedAttributedGraph;
use aagcn::model::{
    check_gradients, forward_branch, load_checkpoint, masked_cross_entropy_with, save_checkpoint, train, Branch,
    LossReduction, ModelConfig, Propagation,
};

use crate::args::*;
use crate::config::parse_synthetic;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config values or input paths; exit code 2.
    Config(String),
    /// Failure while loading, training or evaluating; exit code 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<aagcn::Error> for CliError {
    fn from(e: aagcn::Error) -> Self {
        match e {
            aagcn::Error::InvalidConfig(m) => CliError::Config(m),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

const DEFAULT_DIM: usize = 100;
const DEFAULT_RUNS: usize = 10;

/// The 12-node, three-class graph `gradcheck` uses when no input is given.
pub const GRADCHECK_FIXTURE: SyntheticSpec = SyntheticSpec {
    num_nodes: 12,
    num_communities: 3,
    intra_prob: 0.4,
    inter_prob: 0.1,
    num_features: 6,
    signal: 3.0,
    one_way_inter: false,
    seed: 7,
};

struct Input {
    graph: DirectedAttributedGraph,
    ids: Option<Vec<String>>,
}

fn load_input(input: &InputArgs, fallback: Option<SyntheticSpec>) -> CliResult<Input> {
    if let Some(path) = &input.manifest {
        if !path.is_file() {
            return Err(CliError::Config(format!("--manifest: {} does not exist", path.display())));
        }
        let manifest = DatasetManifest::from_file(path).map_err(|e| CliError::Config(format!("--manifest: {e}")))?;
        let data = load_dataset(&manifest)?;
        let g = &data.graph;
        log::info!(
            "{}: {} nodes, {} edges, {} features, {} classes",
            manifest.name,
            g.num_nodes(),
            g.num_edges(),
            g.num_features(),
            g.num_classes()
        );
        return Ok(Input {
            ids: Some(data.ids.ids().to_vec()),
            graph: data.graph,
        });
    }
    let spec = match (&input.synthetic, fallback) {
        (Some(text), fallback) => parse_synthetic(text, fallback.unwrap_or_default()).map_err(CliError::Config)?,
        (None, Some(spec)) => spec,
        (None, None) => return Err(CliError::Config("one of --manifest or --synthetic is required".into())),
    };
    let graph = generate_synthetic(&spec)?;
    log::info!(
        "synthetic graph: {} nodes, {} edges, {} features, {} classes",
        graph.num_nodes(),
        graph.num_edges(),
        graph.num_features(),
        graph.num_classes()
    );
    Ok(Input { graph, ids: None })
}

fn model_config(g: &DirectedAttributedGraph, m: &ModelArgs, layers: usize, dim: usize) -> CliResult<ModelConfig> {
    let cfg = ModelConfig {
        num_layers: m.layers.unwrap_or(layers),
        hidden_dim: m.dim.unwrap_or(dim),
        learning_rate: m.lr,
        epochs: m.epochs,
        seed: m.seed,
        normalize_adjacency: m.normalize_adj,
        loss_reduction: match m.loss {
            LossArg::Mean => LossReduction::Mean,
            LossArg::Sum => LossReduction::Sum,
        },
        ..ModelConfig::for_graph(g)
    };
    cfg.validate()?;
    if cfg.num_classes < 2 {
        return Err(CliError::Config(format!(
            "the graph has {} class(es); training needs at least two",
            cfg.num_classes
        )));
    }
    Ok(cfg)
}

fn supervision(m: &ModelArgs) -> Supervision {
    m.supervision_frac.map_or(Supervision::AllLabeled, Supervision::LabeledFraction)
}

/// Explicit `--seeds`, or `seed, seed + 1, …` for `--runs` runs.
pub fn resolve_seeds(seed: u64, r: &RunArgs) -> CliResult<Vec<u64>> {
    if !r.seeds.is_empty() {
        if let Some(runs) = r.runs.filter(|&n| n != r.seeds.len()) {
            return Err(CliError::Config(format!(
                "--runs {runs} disagrees with the {} values given to --seeds",
                r.seeds.len()
            )));
        }
        return Ok(r.seeds.clone());
    }
    let runs = r.runs.unwrap_or(DEFAULT_RUNS);
    if runs == 0 {
        return Err(CliError::Config("--runs must be at least 1".into()));
    }
    Ok((0..runs as u64).map(|i| seed.wrapping_add(i)).collect())
}

fn logreg_config(c: &ClassifierArgs) -> LogRegConfig {
    LogRegConfig {
        learning_rate: c.logreg_lr,
        epochs: c.logreg_epochs,
        l2: c.logreg_l2,
        ..LogRegConfig::default()
    }
}

fn candidates(negatives: Option<usize>) -> CandidateMode {
    negatives.map_or(CandidateMode::Full, |negatives| CandidateMode::Sampled { negatives })
}

fn emit(report: &EvalReport, out_csv: Option<&Path>) -> CliResult {
    print!("{report}");
    if let Some(path) = out_csv {
        let file = File::create(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        report.write_csv(BufWriter::new(file))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub fn run(command: Command) -> CliResult {
    match command {
        Command::Train(a) => cmd_train(a),
        Command::Reconstruct(a) => cmd_reconstruct(a),
        Command::Linkpred(a) => cmd_linkpred(a),
        Command::Classify(a) => cmd_classify(a),
        Command::DepthSweep(a) => cmd_depth_sweep(a),
        Command::Gradcheck(a) => cmd_gradcheck(a),
        Command::ExportEmbeddings(a) => cmd_export(a),
    }
}

fn cmd_train(a: TrainArgs) -> CliResult {
    let input = load_input(&a.input, None)?;
    let g = &input.graph;
    let cfg = model_config(g, &a.model, 1, DEFAULT_DIM)?;
    let mask = supervision(&a.model).mask(g, cfg.seed)?;
    let outcome = train(g, &cfg, &mask)?;

    let prop = Propagation::new(g, cfg.normalize_adjacency);
    let final_loss = |branch| -> CliResult<f64> {
        let acts = forward_branch(&prop.branch(branch).forward, g.attributes(), outcome.params.weights(branch))?;
        Ok(masked_cross_entropy_with(&acts.probs, g.labels(), &mask, cfg.loss_reduction)?)
    };
    let (loss_s, loss_t) = (final_loss(Branch::Source)?, final_loss(Branch::Target)?);

    save_checkpoint(&a.out_checkpoint, &cfg, &outcome.params)?;
    let z = extract_embeddings(&outcome.params, g, &cfg)?;
    save_embeddings(&z, &a.out_embeddings, input.ids.as_deref())?;

    println!(
        "trained layers={} dim={} lr={} epochs={} seed={} on {} supervised nodes",
        cfg.num_layers,
        cfg.hidden_dim,
        cfg.learning_rate,
        cfg.epochs,
        cfg.seed,
        mask.count()
    );
    println!("final L_S = {loss_s:.6}  L_T = {loss_t:.6}");
    println!("checkpoint: {}", a.out_checkpoint.display());
    println!(
        "embeddings: {} ({} × {})",
        a.out_embeddings.display(),
        z.num_nodes(),
        2 * z.half_dim()
    );
    Ok(())
}

fn cmd_reconstruct(a: ReconstructArgs) -> CliResult {
    let input = load_input(&a.input, None)?;
    let cfg = model_config(&input.graph, &a.model, 2, DEFAULT_DIM)?;
    let seeds = resolve_seeds(a.model.seed, &a.runs)?;
    let report = run_reconstruction(&input.graph, &cfg, &a.k, &seeds, &supervision(&a.model))?;
    emit(&report, a.runs.out_csv.as_deref())
}

fn cmd_linkpred(a: LinkpredArgs) -> CliResult {
    let input = load_input(&a.input, None)?;
    let cfg = model_config(&input.graph, &a.model, 2, DEFAULT_DIM)?;
    let seeds = resolve_seeds(a.model.seed, &a.runs)?;
    let report = run_link_prediction(
        &input.graph,
        &cfg,
        a.ratio,
        &a.k,
        &seeds,
        &supervision(&a.model),
        candidates(a.negatives),
    )?;
    emit(&report, a.runs.out_csv.as_deref())
}

fn cmd_classify(a: ClassifyArgs) -> CliResult {
    let input = load_input(&a.input, None)?;
    let cfg = model_config(&input.graph, &a.model, 1, DEFAULT_DIM)?;
    let seeds = resolve_seeds(a.model.seed, &a.runs)?;
    let report = run_classification(
        &input.graph,
        &cfg,
        a.classifier.train_frac,
        &seeds,
        &supervision(&a.model),
        &logreg_config(&a.classifier),
    )?;
    emit(&report, a.runs.out_csv.as_deref())
}

fn cmd_depth_sweep(a: SweepArgs) -> CliResult {
    let input = load_input(&a.input, None)?;
    if a.model.layers.is_some() {
        log::warn!("--layers is ignored by depth-sweep; use --depths");
    }
    let cfg = model_config(&input.graph, &a.model, 1, DEFAULT_DIM)?;
    let seeds = resolve_seeds(a.model.seed, &a.runs)?;
    let task = match a.task {
        SweepTaskArg::Classify => SweepTask::Classification {
            train_frac: a.classifier.train_frac,
            logreg: logreg_config(&a.classifier),
        },
        SweepTaskArg::Reconstruct => SweepTask::Reconstruction { ks: a.k.clone() },
        SweepTaskArg::Linkpred => SweepTask::LinkPrediction {
            ratio: a.ratio,
            ks: a.k.clone(),
            candidates: candidates(a.negatives),
        },
    };
    let report = depth_sweep(&input.graph, &cfg, &a.depths.0, &task, &seeds, &supervision(&a.model))?;
    emit(&report, a.runs.out_csv.as_deref())
}

fn cmd_gradcheck(a: GradcheckArgs) -> CliResult {
    if !(a.tolerance >= 0.0) {
        return Err(CliError::Config(format!("--tolerance must be non-negative, got {}", a.tolerance)));
    }
    let input = load_input(&a.input, Some(GRADCHECK_FIXTURE))?;
    let cfg = model_config(&input.graph, &a.model, 1, 5)?;
    let report = check_gradients(&input.graph, &cfg, a.tolerance)?;
    for e in &report.entries {
        println!(
            "{:?} layer {} ({}×{}): max relative error {:.3e}",
            e.branch, e.layer, e.shape.0, e.shape.1, e.max_rel_error
        );
    }
    let verdict = if report.passed() { "PASS" } else { "FAIL" };
    println!(
        "{verdict}: max relative error {:.3e} (tolerance {:e}, layers={} dim={} seed={})",
        report.max_rel_error(),
        a.tolerance,
        cfg.num_layers,
        cfg.hidden_dim,
        cfg.seed
    );
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Runtime("gradient check failed".into()))
    }
}

fn cmd_export(a: ExportArgs) -> CliResult {
    if !a.checkpoint.is_file() {
        return Err(CliError::Config(format!("--checkpoint: {} does not exist", a.checkpoint.display())));
    }
    let input = load_input(&a.input, None)?;
    let (cfg, params) = load_checkpoint(&a.checkpoint)?;
    let z = extract_embeddings(&params, &input.graph, &cfg)?;
    save_embeddings(&z, &a.out_embeddings, input.ids.as_deref())?;
    println!(
        "embeddings: {} ({} × {}, seed={})",
        a.out_embeddings.display(),
        z.num_nodes(),
        2 * z.half_dim(),
        cfg.seed
    );
    Ok(())
}
