//! `qcnn` command-line interface.

mod manifest;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use manifest::{
    read_json, write_json, DataPaths, DesignChoices, ModelKind, ParamsFile, PreprocessManifest, RunManifest,
    MANIFEST_FILE, METRICS_FILE, PARAMS_FILE, PREPROCESS_MANIFEST_FILE, TRACE_FILE,
};

use crate::cnn::Cnn;
use crate::data::{read_idx, select_subset, IdxDataset};
use crate::encoding::{Encoding, Preprocessor};
use crate::error::{Error, Result};
use crate::pipeline::{class_labels, cnn_examples, qcnn_examples, run_cnn, run_qcnn, split, RunResult};
use crate::training::{
    evaluate, read_trace, write_trace, Classifier, CnnClassifier, Metrics, QcnnClassifier, TrainConfig,
    DEFAULT_BATCH_SIZE, DEFAULT_EPOCHS,
};

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA_FORMAT: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

const TRAIN_IMAGES: &str = "train-images-idx3-ubyte";
const TRAIN_LABELS: &str = "train-labels-idx1-ubyte";
const TEST_IMAGES: &str = "t10k-images-idx3-ubyte";
const TEST_LABELS: &str = "t10k-labels-idx1-ubyte";

#[derive(Debug, Parser)]
#[command(name = "qcnn", version, about = "QCNN and CNN MNIST classifier workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit PCA (and the angle-feature scaler) on the training subset.
    Preprocess(PreprocessArgs),
    /// Train a model and write parameters, per-epoch trace and manifest.
    Train(TrainArgs),
    /// Score saved parameters on the test set.
    Eval(EvalArgs),
    /// Merge trace files into one CSV of test accuracy per epoch.
    Curves(CurvesArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Directory holding the four standard MNIST IDX files.
    #[arg(long, default_value = "data/mnist")]
    pub data_dir: PathBuf,
    #[arg(long)]
    pub train_images: Option<PathBuf>,
    #[arg(long)]
    pub train_labels: Option<PathBuf>,
    #[arg(long)]
    pub test_images: Option<PathBuf>,
    #[arg(long)]
    pub test_labels: Option<PathBuf>,
}

impl DataArgs {
    fn resolve(&self, explicit: &Option<PathBuf>, name: &str) -> PathBuf {
        explicit.clone().unwrap_or_else(|| self.data_dir.join(name))
    }

    pub fn train_paths(&self) -> (PathBuf, PathBuf) {
        (
            self.resolve(&self.train_images, TRAIN_IMAGES),
            self.resolve(&self.train_labels, TRAIN_LABELS),
        )
    }

    pub fn test_paths(&self) -> (PathBuf, PathBuf) {
        (
            self.resolve(&self.test_images, TEST_IMAGES),
            self.resolve(&self.test_labels, TEST_LABELS),
        )
    }

    fn load_train(&self) -> Result<IdxDataset> {
        let (i, l) = self.train_paths();
        read_idx(i, l)
    }

    fn load_test(&self) -> Result<IdxDataset> {
        let (i, l) = self.test_paths();
        read_idx(i, l)
    }

    fn recorded(&self, train: bool, test: bool) -> DataPaths {
        let (tri, trl) = self.train_paths();
        let (tei, tel) = self.test_paths();
        DataPaths {
            train_images: train.then_some(tri),
            train_labels: train.then_some(trl),
            test_images: test.then_some(tei),
            test_labels: test.then_some(tel),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PreprocessArgs {
    #[arg(long, value_enum)]
    pub encoding: Encoding,
    #[arg(long, default_value_t = 10)]
    pub classes: usize,
    #[arg(long)]
    pub samples_per_class: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    #[arg(long)]
    pub classes: usize,
    /// Required for the QCNN; ignored by the CNN.
    #[arg(long, value_enum)]
    pub encoding: Option<Encoding>,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = DEFAULT_EPOCHS)]
    pub epochs: usize,
    #[arg(long, default_value_t = DEFAULT_BATCH_SIZE)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub samples_per_class: Option<usize>,
    #[command(flatten)]
    pub data: DataArgs,
    /// Where `preprocess` wrote its artifacts; defaults to `--out`.
    #[arg(long)]
    pub preprocess_dir: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    #[arg(long)]
    pub classes: usize,
    #[arg(long, value_enum)]
    pub encoding: Option<Encoding>,
    /// Parameter file from `train`; defaults to `<out>/params.json`.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub preprocess_dir: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct CurvesArgs {
    /// `label=path/to/trace.csv`, repeatable.
    #[arg(long = "trace", required = true, value_parser = parse_labelled)]
    pub traces: Vec<(String, PathBuf)>,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_labelled(s: &str) -> std::result::Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((label, path)) if !label.is_empty() && !path.is_empty() && !label.contains(',') => {
            Ok((label.to_string(), PathBuf::from(path)))
        }
        _ => Err(format!("expected label=path without commas in the label, got {s:?}")),
    }
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) | Error::Shape(_) | Error::MissingArtifact { .. } => EXIT_USAGE,
        Error::Format { .. } | Error::DegenerateInput(_) | Error::Json(_) => EXIT_DATA_FORMAT,
        Error::Numerical(_) => EXIT_NUMERICAL,
        Error::Io { .. } => EXIT_OTHER,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preprocess(a) => with_threads(a.threads, || cmd_preprocess(&a)),
        Command::Train(a) => with_threads(a.threads, || cmd_train(&a).map(|_| ())),
        Command::Eval(a) => with_threads(a.threads, || cmd_eval(&a).map(|_| ())),
        Command::Curves(a) => {
            let csv = cmd_curves(&a.traces)?;
            match &a.out {
                Some(p) => fs::write(p, csv).map_err(|e| Error::io(p, e)),
                None => {
                    print!("{csv}");
                    Ok(())
                }
            }
        }
    }
}

/// Worker count actually used for `--threads`.
pub fn resolve_threads(threads: Option<usize>) -> Result<usize> {
    match threads {
        Some(0) => Err(Error::invalid("--threads must be at least 1")),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let n = resolve_threads(threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start {n} worker threads: {e}")))?;
    pool.install(f)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn cmd_preprocess(args: &PreprocessArgs) -> Result<()> {
    let config = TrainConfig {
        samples_per_class: args.samples_per_class,
        seed: args.seed,
        ..TrainConfig::new(args.classes, args.encoding, 0.0)
    };
    config.validate()?;
    let train = select_subset(
        &args.data.load_train()?,
        &class_labels(args.classes),
        args.samples_per_class,
        args.seed,
    )?;
    let pre = Preprocessor::fit(args.encoding, &train.images)?;
    create_dir(&args.out)?;
    pre.save(&args.out)?;
    let mut artifacts = vec![Preprocessor::pca_path(&args.out)];
    if pre.scaler.is_some() {
        artifacts.push(Preprocessor::scaler_path(&args.out));
    }
    let manifest = PreprocessManifest {
        encoding: args.encoding,
        num_classes: args.classes,
        samples_per_class: args.samples_per_class,
        seed: args.seed,
        pca_k: pre.pca.k(),
        fit_samples: train.len(),
        data: args.data.recorded(true, false),
        artifacts,
    };
    write_json(&args.out.join(PREPROCESS_MANIFEST_FILE), &manifest)?;
    eprintln!(
        "fitted {}-component PCA on {} images -> {}",
        pre.pca.k(),
        train.len(),
        args.out.display()
    );
    Ok(())
}

fn require_encoding(model: ModelKind, encoding: Option<Encoding>) -> Result<Option<Encoding>> {
    match (model, encoding) {
        (ModelKind::Qcnn, None) => Err(Error::invalid("--encoding is required for --model qcnn")),
        (ModelKind::Qcnn, e) => Ok(e),
        (ModelKind::Cnn, _) => Ok(None),
    }
}

/// Loads the preprocessor and checks it was fitted for the same class set.
fn load_preprocessor(dir: &Path, encoding: Encoding, classes: usize) -> Result<Preprocessor> {
    let pre = Preprocessor::load(encoding, dir)?;
    let manifest_path = dir.join(PREPROCESS_MANIFEST_FILE);
    if manifest_path.exists() {
        let m: PreprocessManifest = read_json(&manifest_path)?;
        if m.num_classes != classes || m.encoding != encoding {
            return Err(Error::Shape(format!(
                "{} was fitted for {} classes with {} encoding, run asks for {classes} with {}",
                dir.display(),
                m.num_classes,
                m.encoding.name(),
                encoding.name()
            )));
        }
    }
    Ok(pre)
}

pub fn cmd_train(args: &TrainArgs) -> Result<RunManifest> {
    let encoding = require_encoding(args.model, args.encoding)?;
    let config = TrainConfig {
        epochs: args.epochs,
        batch_size: args.batch_size,
        seed: args.seed,
        samples_per_class: args.samples_per_class,
        ..TrainConfig::new(args.classes, encoding.unwrap_or(Encoding::Amplitude), args.lr)
    };
    config.validate()?;
    let preprocess_dir = args.preprocess_dir.clone().unwrap_or_else(|| args.out.clone());
    // fail on missing artifacts before touching the dataset
    let pre = match encoding {
        Some(e) => Some(load_preprocessor(&preprocess_dir, e, args.classes)?),
        None => None,
    };
    let (train, test) = split(&args.data.load_train()?, &args.data.load_test()?, &config)?;
    let result: RunResult = match &pre {
        Some(p) => run_qcnn(p, &train, &test, &config)?,
        None => run_cnn(&train, &test, &config)?,
    };

    create_dir(&args.out)?;
    let params_path = args.out.join(PARAMS_FILE);
    let trace_path = args.out.join(TRACE_FILE);
    write_json(
        &params_path,
        &ParamsFile {
            model: args.model,
            num_classes: args.classes,
            encoding,
            params: result.outcome.params.clone(),
        },
    )?;
    write_trace(&trace_path, &result.outcome.trace)?;
    let mut artifacts = vec![params_path, trace_path];
    if let Some(p) = &pre {
        artifacts.push(Preprocessor::pca_path(&preprocess_dir));
        if p.scaler.is_some() {
            artifacts.push(Preprocessor::scaler_path(&preprocess_dir));
        }
    }
    let manifest = RunManifest {
        model: args.model,
        num_classes: args.classes,
        encoding,
        learning_rate: args.lr,
        epochs: args.epochs,
        batch_size: args.batch_size,
        seed: args.seed,
        samples_per_class: args.samples_per_class,
        threads: resolve_threads(args.threads)?,
        data: args.data.recorded(true, true),
        preprocess_dir: pre.as_ref().map(|_| preprocess_dir.clone()),
        parameter_count: result.parameter_count,
        train_size: result.train_size,
        test_size: result.test_size,
        initial_loss: result.outcome.initial_loss,
        artifacts,
        design: DesignChoices::for_run(args.model, encoding),
    };
    write_json(&args.out.join(MANIFEST_FILE), &manifest)?;
    if let Some(last) = result.outcome.trace.last() {
        eprintln!(
            "{} {}-class: {} epochs, final train loss {:.4}, test accuracy {:.4}",
            args.model.name(),
            args.classes,
            last.epoch,
            last.train_loss,
            last.test_accuracy
        );
    }
    Ok(manifest)
}

pub fn cmd_eval(args: &EvalArgs) -> Result<Metrics> {
    let encoding = require_encoding(args.model, args.encoding)?;
    let params_path = args.params.clone().unwrap_or_else(|| args.out.join(PARAMS_FILE));
    if !params_path.exists() {
        return Err(Error::MissingArtifact {
            path: params_path,
            hint: "run `qcnn train` first or pass --params".into(),
        });
    }
    let saved: ParamsFile = read_json(&params_path)?;
    if saved.model != args.model || saved.num_classes != args.classes || saved.encoding != encoding {
        return Err(Error::Shape(format!(
            "{} holds a {}-class {} model, asked to evaluate a {}-class {}",
            params_path.display(),
            saved.num_classes,
            saved.model.name(),
            args.classes,
            args.model.name()
        )));
    }
    let test = select_subset(&args.data.load_test()?, &class_labels(args.classes), None, 0)?;
    let metrics = match encoding {
        Some(e) => {
            let dir = args.preprocess_dir.clone().unwrap_or_else(|| args.out.clone());
            let pre = load_preprocessor(&dir, e, args.classes)?;
            let model = QcnnClassifier::new(args.classes)?;
            check_param_count(&model, &saved.params)?;
            evaluate(&model, &saved.params, &qcnn_examples(&pre, &test)?)?
        }
        None => {
            let model = CnnClassifier {
                cnn: Cnn::new(args.classes)?,
            };
            check_param_count(&model, &saved.params)?;
            evaluate(&model, &saved.params, &cnn_examples(&test))?
        }
    };
    create_dir(&args.out)?;
    write_json(&args.out.join(METRICS_FILE), &metrics)?;
    eprintln!("accuracy {:.4} on {} test images", metrics.accuracy, metrics.samples);
    Ok(metrics)
}

fn check_param_count<M: Classifier>(model: &M, params: &[f64]) -> Result<()> {
    if params.len() != model.num_params() {
        return Err(Error::Shape(format!(
            "{} parameters saved, architecture has {}",
            params.len(),
            model.num_params()
        )));
    }
    Ok(())
}

/// `epoch,<label>...` with each run's test accuracy per epoch.
pub fn cmd_curves(traces: &[(String, PathBuf)]) -> Result<String> {
    if traces.is_empty() {
        return Err(Error::invalid("at least one trace is required"));
    }
    let loaded = traces
        .iter()
        .map(|(label, path)| Ok((label.as_str(), read_trace(path)?)))
        .collect::<Result<Vec<_>>>()?;
    let grid: Vec<usize> = loaded[0].1.iter().map(|r| r.epoch).collect();
    let offending: Vec<&str> = loaded
        .iter()
        .filter(|(_, t)| !t.iter().map(|r| r.epoch).eq(grid.iter().copied()))
        .map(|(l, _)| *l)
        .collect();
    if !offending.is_empty() {
        return Err(Error::invalid(format!(
            "epoch grid differs from {:?}: {}",
            loaded[0].0,
            offending.join(", ")
        )));
    }
    let mut out = String::from("epoch");
    for (label, _) in &loaded {
        out.push(',');
        out.push_str(label);
    }
    out.push('\n');
    for (row, epoch) in grid.iter().enumerate() {
        out.push_str(&epoch.to_string());
        for (_, t) in &loaded {
            out.push(',');
            out.push_str(&t[row].test_accuracy.to_string());
        }
        out.push('\n');
    }
    Ok(out)
}
