//! End-to-end runs: subset the data, encode it, train, and score.

use rayon::prelude::*;

use crate::cnn::build_cnn;
use crate::data::{select_subset, IdxDataset};
use crate::encoding::{pixel_intensities, Preprocessor};
use crate::error::{Error, Result};
use crate::sim::StateVector;
use crate::training::{
    evaluate, init_qcnn_params, train, CnnClassifier, Example, Metrics, QcnnClassifier, TrainConfig, TrainOutcome,
};

/// Digit labels `0..num_classes`.
pub fn class_labels(num_classes: usize) -> Vec<u8> {
    (0..num_classes as u8).collect()
}

/// Training subset (capped per class when configured) and full test subset
/// restricted to the configured classes.
pub fn split(train: &IdxDataset, test: &IdxDataset, config: &TrainConfig) -> Result<(IdxDataset, IdxDataset)> {
    config.validate()?;
    let classes = class_labels(config.num_classes);
    let train = select_subset(train, &classes, config.samples_per_class, config.seed)?;
    let test = select_subset(test, &classes, None, config.seed)?;
    if train.is_empty() || test.is_empty() {
        return Err(Error::invalid(format!(
            "no samples of classes 0..{} ({} train, {} test)",
            config.num_classes,
            train.len(),
            test.len()
        )));
    }
    Ok((train, test))
}

pub fn qcnn_examples(pre: &Preprocessor, data: &IdxDataset) -> Result<Vec<Example<StateVector>>> {
    data.images
        .par_iter()
        .zip(data.labels.par_iter())
        .map(|(im, &l)| {
            Ok(Example {
                input: pre.encode(im)?,
                label: usize::from(l),
            })
        })
        .collect()
}

pub fn cnn_examples(data: &IdxDataset) -> Vec<Example<Vec<f64>>> {
    data.images
        .iter()
        .zip(&data.labels)
        .map(|(im, &l)| Example {
            input: pixel_intensities(im),
            label: usize::from(l),
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub outcome: TrainOutcome,
    pub metrics: Metrics,
    pub parameter_count: usize,
    pub train_size: usize,
    pub test_size: usize,
}

/// Trains the QCNN on already-subset data with a fitted preprocessor.
pub fn run_qcnn(pre: &Preprocessor, train_set: &IdxDataset, test_set: &IdxDataset, config: &TrainConfig) -> Result<RunResult> {
    if pre.encoding != config.encoding {
        return Err(Error::Shape(format!(
            "preprocessor is for {} encoding, run asks for {}",
            pre.encoding.name(),
            config.encoding.name()
        )));
    }
    let model = QcnnClassifier::new(config.num_classes)?;
    let train_ex = qcnn_examples(pre, train_set)?;
    let test_ex = qcnn_examples(pre, test_set)?;
    let init = init_qcnn_params(model.template.slot_count(), config.seed);
    let outcome = train(&model, init, &train_ex, &test_ex, config)?;
    let metrics = evaluate(&model, &outcome.params, &test_ex)?;
    Ok(RunResult {
        parameter_count: outcome.params.len(),
        outcome,
        metrics,
        train_size: train_ex.len(),
        test_size: test_ex.len(),
    })
}

/// Trains the classical baseline on already-subset data.
pub fn run_cnn(train_set: &IdxDataset, test_set: &IdxDataset, config: &TrainConfig) -> Result<RunResult> {
    let (cnn, init) = build_cnn(config.num_classes, config.seed)?;
    let model = CnnClassifier { cnn };
    let train_ex = cnn_examples(train_set);
    let test_ex = cnn_examples(test_set);
    let outcome = train(&model, init, &train_ex, &test_ex, config)?;
    let metrics = evaluate(&model, &outcome.params, &test_ex)?;
    Ok(RunResult {
        parameter_count: outcome.params.len(),
        outcome,
        metrics,
        train_size: train_ex.len(),
        test_size: test_ex.len(),
    })
}
