//! Cross-entropy training with Adam, evaluation metrics and trace/report output.

mod adam;
mod loss;
mod metrics;
mod model;
mod trainer;

pub use adam::{adam_step, AdamState};
pub use loss::{argmax, logits_from_outcomes, softmax_cross_entropy};
pub use metrics::{ClassMetrics, Metrics};
pub use model::{init_qcnn_params, Classifier, CnnClassifier, QcnnClassifier};
pub use trainer::{
    evaluate, read_trace, trace_from_csv, trace_to_csv, train, write_trace, EpochRecord, Example, TrainConfig,
    TrainOutcome, DEFAULT_BATCH_SIZE, DEFAULT_EPOCHS, TRACE_HEADER,
};

/// RNG stream ids derived from the single run seed.
pub const SUBSET_STREAM: u64 = 0;
pub const SHUFFLE_STREAM: u64 = 1;
pub const INIT_STREAM: u64 = 2;
