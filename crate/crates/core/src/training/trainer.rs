use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamState};
use super::metrics::Metrics;
use super::model::Classifier;
use super::SHUFFLE_STREAM;
use crate::ansatz::SUPPORTED_CLASSES;
use crate::encoding::Encoding;
use crate::error::{Error, Result};

pub const DEFAULT_BATCH_SIZE: usize = 32;
pub const DEFAULT_EPOCHS: usize = 10;
pub const TRACE_HEADER: &str = "epoch,train_loss,test_accuracy";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub num_classes: usize,
    pub encoding: Encoding,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub samples_per_class: Option<usize>,
}

impl TrainConfig {
    pub fn new(num_classes: usize, encoding: Encoding, learning_rate: f64) -> Self {
        Self {
            num_classes,
            encoding,
            learning_rate,
            epochs: DEFAULT_EPOCHS,
            batch_size: DEFAULT_BATCH_SIZE,
            seed: 0,
            samples_per_class: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !SUPPORTED_CLASSES.contains(&self.num_classes) {
            return Err(Error::invalid(format!("unsupported class count {}", self.num_classes)));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::invalid(format!("learning rate {}", self.learning_rate)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Example<I> {
    pub input: I,
    pub label: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean per-sample loss over the epoch, each taken before its batch's update.
    pub train_loss: f64,
    pub test_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: Vec<f64>,
    /// Mean training loss at the initial parameters.
    pub initial_loss: f64,
    pub trace: Vec<EpochRecord>,
}

fn mean_loss<M: Classifier>(model: &M, params: &[f64], data: &[Example<M::Input>]) -> Result<f64> {
    let losses = data
        .par_iter()
        .map(|ex| model.loss(params, &ex.input, ex.label))
        .collect::<Result<Vec<_>>>()?;
    Ok(losses.iter().sum::<f64>() / data.len() as f64)
}

/// Minibatch Adam on mean cross-entropy, shuffling each epoch with the
/// seeded generator and scoring the test set after every epoch.
///
/// Per-sample work runs on the current rayon pool; gradients are summed in
/// sample order so results do not depend on the thread count.
pub fn train<M: Classifier>(
    model: &M,
    init_params: Vec<f64>,
    train_set: &[Example<M::Input>],
    test_set: &[Example<M::Input>],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    if test_set.is_empty() {
        return Err(Error::invalid("test set is empty"));
    }
    if init_params.len() != model.num_params() {
        return Err(Error::Shape(format!(
            "{} initial parameters for a model with {}",
            init_params.len(),
            model.num_params()
        )));
    }

    let mut params = init_params;
    let initial_loss = mean_loss(model, &params, train_set)?;
    let mut adam = AdamState::new(params.len());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(SHUFFLE_STREAM);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut trace = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let results = batch
                .par_iter()
                .map(|&i| model.loss_and_gradient(&params, &train_set[i].input, train_set[i].label))
                .collect::<Result<Vec<_>>>()?;
            let mut grad = vec![0.0; params.len()];
            for (loss, g) in &results {
                loss_sum += loss;
                for (acc, x) in grad.iter_mut().zip(g) {
                    *acc += x;
                }
            }
            let scale = 1.0 / batch.len() as f64;
            grad.iter_mut().for_each(|g| *g *= scale);
            adam_step(&mut params, &grad, &mut adam, config.learning_rate)?;
        }
        let train_loss = loss_sum / train_set.len() as f64;
        if !train_loss.is_finite() || params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Numerical(format!("non-finite loss or parameters in epoch {epoch}")));
        }
        let test_accuracy = evaluate(model, &params, test_set)?.accuracy;
        trace.push(EpochRecord {
            epoch,
            train_loss,
            test_accuracy,
        });
    }
    Ok(TrainOutcome {
        params,
        initial_loss,
        trace,
    })
}

/// Argmax predictions over `test_set` gathered into a confusion matrix.
pub fn evaluate<M: Classifier>(model: &M, params: &[f64], test_set: &[Example<M::Input>]) -> Result<Metrics> {
    if test_set.is_empty() {
        return Err(Error::invalid("evaluation set is empty"));
    }
    let preds = test_set
        .par_iter()
        .map(|ex| model.predict(params, &ex.input))
        .collect::<Result<Vec<_>>>()?;
    Metrics::from_pairs(model.num_classes(), test_set.iter().map(|ex| ex.label).zip(preds))
}

pub fn trace_to_csv(trace: &[EpochRecord]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in trace {
        let _ = writeln!(out, "{},{},{}", r.epoch, r.train_loss, r.test_accuracy);
    }
    out
}

pub fn trace_from_csv(text: &str) -> Result<Vec<EpochRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == TRACE_HEADER => {}
        other => {
            return Err(Error::format(
                "trace header",
                format!("expected {TRACE_HEADER:?}, found {other:?}"),
            ))
        }
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::format(format!("trace row {}", i + 1), format!("cannot parse {line:?}"));
            if fields.len() != 3 {
                return Err(bad());
            }
            Ok(EpochRecord {
                epoch: fields[0].parse().map_err(|_| bad())?,
                train_loss: fields[1].parse().map_err(|_| bad())?,
                test_accuracy: fields[2].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

pub fn write_trace(path: &Path, trace: &[EpochRecord]) -> Result<()> {
    fs::write(path, trace_to_csv(trace)).map_err(|e| Error::io(path, e))
}

pub fn read_trace(path: &Path) -> Result<Vec<EpochRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    trace_from_csv(&text)
}
