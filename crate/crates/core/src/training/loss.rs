use crate::error::{Error, Result};

/// `−log softmax(logits)[target]` and its gradient `softmax(logits) − onehot(target)`.
pub fn softmax_cross_entropy(logits: &[f64], target: usize) -> Result<(f64, Vec<f64>)> {
    if target >= logits.len() {
        return Err(Error::invalid(format!(
            "target class {target} with {} logits",
            logits.len()
        )));
    }
    if let Some(x) = logits.iter().find(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("non-finite logit {x}")));
    }
    let top = argmax(logits);
    let max = logits[top];
    let exps: Vec<f64> = logits.iter().map(|x| (x - max).exp()).collect();
    // the max term is exactly 1; summing the rest separately keeps ln_1p precise
    let rest: f64 = exps.iter().enumerate().filter(|&(i, _)| i != top).map(|(_, e)| e).sum();
    let sum = 1.0 + rest;
    let loss = rest.ln_1p() - (logits[target] - max);
    let mut grad: Vec<f64> = exps.iter().map(|e| e / sum).collect();
    grad[target] -= 1.0;
    Ok((loss, grad))
}

/// The first `num_classes` outcome probabilities, unrenormalized; the rest
/// are discarded.
pub fn logits_from_outcomes(outcome_probs: &[f64], num_classes: usize) -> Result<Vec<f64>> {
    if num_classes > outcome_probs.len() {
        return Err(Error::invalid(format!(
            "{num_classes} classes from {} outcomes",
            outcome_probs.len()
        )));
    }
    Ok(outcome_probs[..num_classes].to_vec())
}

/// Index of the largest value; the first one wins ties.
pub fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
        .0
}
