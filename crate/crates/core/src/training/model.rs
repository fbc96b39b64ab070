use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::loss::{argmax, logits_from_outcomes, softmax_cross_entropy};
use super::INIT_STREAM;
use crate::ansatz::build_qcnn;
use crate::cnn::Cnn;
use crate::error::Result;
use crate::sim::{loss_and_gradient, CircuitTemplate, StateVector};

/// A trainable model: maps parameters and an input to class logits, and
/// produces the cross-entropy gradient for one labelled example.
pub trait Classifier: Sync {
    type Input: Sync;

    fn num_classes(&self) -> usize;

    fn num_params(&self) -> usize;

    fn logits(&self, params: &[f64], input: &Self::Input) -> Result<Vec<f64>>;

    fn loss_and_gradient(&self, params: &[f64], input: &Self::Input, target: usize) -> Result<(f64, Vec<f64>)>;

    fn loss(&self, params: &[f64], input: &Self::Input, target: usize) -> Result<f64> {
        Ok(softmax_cross_entropy(&self.logits(params, input)?, target)?.0)
    }

    fn predict(&self, params: &[f64], input: &Self::Input) -> Result<usize> {
        Ok(argmax(&self.logits(params, input)?))
    }
}

/// QCNN whose logits are the first `num_classes` measured-outcome probabilities.
#[derive(Debug, Clone)]
pub struct QcnnClassifier {
    pub template: CircuitTemplate,
    num_classes: usize,
}

impl QcnnClassifier {
    pub fn new(num_classes: usize) -> Result<Self> {
        let (_, template) = build_qcnn(num_classes)?;
        Ok(Self { template, num_classes })
    }

    pub fn from_template(template: CircuitTemplate, num_classes: usize) -> Self {
        Self { template, num_classes }
    }
}

/// Uniform draws from `[0, 2π)`.
pub fn init_qcnn_params(slot_count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(INIT_STREAM);
    (0..slot_count).map(|_| rng.random_range(0.0..TAU)).collect()
}

impl Classifier for QcnnClassifier {
    type Input = StateVector;

    fn num_classes(&self) -> usize {
        self.num_classes
    }

    fn num_params(&self) -> usize {
        self.template.slot_count()
    }

    fn logits(&self, params: &[f64], input: &StateVector) -> Result<Vec<f64>> {
        logits_from_outcomes(&self.template.forward(params, input)?, self.num_classes)
    }

    fn loss_and_gradient(&self, params: &[f64], input: &StateVector, target: usize) -> Result<(f64, Vec<f64>)> {
        let c = self.num_classes;
        loss_and_gradient(&self.template, params, input, |probs| {
            let (loss, dlogits) = softmax_cross_entropy(&logits_from_outcomes(probs, c)?, target)?;
            let mut downstream = vec![0.0; probs.len()];
            downstream[..c].copy_from_slice(&dlogits);
            Ok((loss, downstream))
        })
    }
}

/// Classical baseline on 784 pixel intensities in `[0, 1]`.
#[derive(Debug, Clone, Copy)]
pub struct CnnClassifier {
    pub cnn: Cnn,
}

impl Classifier for CnnClassifier {
    type Input = Vec<f64>;

    fn num_classes(&self) -> usize {
        self.cnn.num_classes()
    }

    fn num_params(&self) -> usize {
        self.cnn.num_params()
    }

    fn logits(&self, params: &[f64], input: &Vec<f64>) -> Result<Vec<f64>> {
        self.cnn.forward(params, input)
    }

    fn loss_and_gradient(&self, params: &[f64], input: &Vec<f64>, target: usize) -> Result<(f64, Vec<f64>)> {
        let trace = self.cnn.forward_trace(params, input)?;
        let (loss, dlogits) = softmax_cross_entropy(&trace.logits, target)?;
        Ok((loss, self.cnn.backward(params, &trace, &dlogits)?))
    }
}
