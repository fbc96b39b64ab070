use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Confusion matrix (rows = true class, columns = predicted) and the rates
/// derived from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub num_classes: usize,
    pub samples: usize,
    pub accuracy: f64,
    pub confusion: Vec<Vec<usize>>,
    pub per_class: Vec<ClassMetrics>,
}

impl Metrics {
    /// Builds metrics from `(true, predicted)` pairs.
    pub fn from_pairs(num_classes: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut confusion = vec![vec![0usize; num_classes]; num_classes];
        let mut samples = 0;
        for (truth, pred) in pairs {
            if truth >= num_classes || pred >= num_classes {
                return Err(Error::invalid(format!(
                    "pair ({truth}, {pred}) outside {num_classes} classes"
                )));
            }
            confusion[truth][pred] += 1;
            samples += 1;
        }
        if samples == 0 {
            return Err(Error::invalid("no samples to evaluate"));
        }
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let per_class = (0..num_classes)
            .map(|c| {
                let tp = confusion[c][c];
                let support: usize = confusion[c].iter().sum();
                let predicted: usize = confusion.iter().map(|row| row[c]).sum();
                let precision = ratio(tp, predicted);
                let recall = ratio(tp, support);
                let f1 = if precision + recall == 0.0 {
                    0.0
                } else {
                    2.0 * precision * recall / (precision + recall)
                };
                ClassMetrics {
                    class: c,
                    precision,
                    recall,
                    f1,
                    support,
                }
            })
            .collect();
        let correct: usize = (0..num_classes).map(|c| confusion[c][c]).sum();
        Ok(Self {
            num_classes,
            samples,
            accuracy: ratio(correct, samples),
            confusion,
            per_class,
        })
    }
}
