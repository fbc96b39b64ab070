use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::encoding::Encoding;
use crate::error::{Error, Result};
use crate::training::AdamState;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const PREPROCESS_MANIFEST_FILE: &str = "preprocess.json";
pub const PARAMS_FILE: &str = "params.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const METRICS_FILE: &str = "metrics.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Qcnn,
    Cnn,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Qcnn => "qcnn",
            ModelKind::Cnn => "cnn",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataPaths {
    pub train_images: Option<PathBuf>,
    pub train_labels: Option<PathBuf>,
    pub test_images: Option<PathBuf>,
    pub test_labels: Option<PathBuf>,
}

/// Fixed choices the code makes where the experiment protocol is silent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignChoices {
    pub image_normalization: String,
    pub pca_components: Option<usize>,
    pub angle_feature_range: Option<String>,
    pub logits: String,
    pub initialization: String,
    pub subsampling: String,
    pub shuffle: String,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
}

impl DesignChoices {
    pub fn for_run(model: ModelKind, encoding: Option<Encoding>) -> Self {
        let adam = AdamState::new(0);
        let (image_normalization, logits, initialization) = match model {
            ModelKind::Qcnn => (
                "pixels/255, unit L2 norm, PCA; amplitude features renormalized",
                "first C measured-outcome probabilities, not renormalized",
                "uniform [0, 2π) per slot",
            ),
            ModelKind::Cnn => (
                "pixels/255, no PCA",
                "fully connected head outputs",
                "uniform ±1/sqrt(fan_in) per layer",
            ),
        };
        Self {
            image_normalization: image_normalization.into(),
            pca_components: encoding.filter(|_| model == ModelKind::Qcnn).map(Encoding::pca_k),
            angle_feature_range: (model == ModelKind::Qcnn && encoding == Some(Encoding::Angle))
                .then(|| "train min-max to [0, π/2], clamped".into()),
            logits: logits.into(),
            initialization: initialization.into(),
            subsampling: "seeded uniform without replacement per class".into(),
            shuffle: "seeded reshuffle every epoch".into(),
            adam_beta1: adam.beta1,
            adam_beta2: adam.beta2,
            adam_eps: adam.eps,
        }
    }
}

/// Everything needed to rerun a training command and reproduce its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub model: ModelKind,
    pub num_classes: usize,
    pub encoding: Option<Encoding>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub samples_per_class: Option<usize>,
    pub threads: usize,
    pub data: DataPaths,
    pub preprocess_dir: Option<PathBuf>,
    pub parameter_count: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub initial_loss: f64,
    pub artifacts: Vec<PathBuf>,
    pub design: DesignChoices,
}

/// What `preprocess` fitted, and on which data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessManifest {
    pub encoding: Encoding,
    pub num_classes: usize,
    pub samples_per_class: Option<usize>,
    pub seed: u64,
    pub pca_k: usize,
    pub fit_samples: usize,
    pub data: DataPaths,
    pub artifacts: Vec<PathBuf>,
}

/// Trained parameters tagged with the architecture they belong to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub model: ModelKind,
    pub num_classes: usize,
    pub encoding: Option<Encoding>,
    pub params: Vec<f64>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path.display().to_string(), e.to_string()))
}
