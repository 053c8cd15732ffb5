//! Ranking and classification metrics, edge holdout, run reports and the
//! experiment protocols built on them.

mod metrics;
mod protocols;
mod report;
mod split;

pub use metrics::{accuracy, macro_f1, micro_f1, precision_at_k, silhouette, EdgeSet};
pub use protocols::{
    classification_split, classify_embeddings, depth_sweep, run_classification, run_link_prediction,
    run_reconstruction, run_task, train_and_embed, CandidateMode, ClassificationScores, Supervision, SweepTask,
};
pub use report::{mean_and_sd, EvalReport, RunRecord, SummaryRow};
pub use split::{split_edges, EdgeSplit};
