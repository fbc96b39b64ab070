//! Parameter gradients of losses defined on measured-outcome probabilities.
//!
//! The production path is a reverse sweep: run the circuit forward once, seed
//! an adjoint state with `G|ψ⟩` (G diagonal, holding the downstream gradient of
//! each basis state's outcome), then walk the gates backwards un-applying each
//! one to both the state and the adjoint while accumulating
//! `2 Re⟨λ| ∂U/∂θ |φ⟩` into the gate's slots.

use num_complex::Complex64;

use super::circuit::CircuitTemplate;
use super::gate::{dagger, Mat2};
use super::state::{OutcomeIndex, StateVector};
use crate::error::{Error, Result};

/// dLoss/dθ for every slot, given dLoss/dp for each measured outcome `p`.
pub fn loss_gradient(
    template: &CircuitTemplate,
    params: &[f64],
    input: &StateVector,
    downstream_gradient: &[f64],
) -> Result<Vec<f64>> {
    if downstream_gradient.len() != template.outcome_count() {
        return Err(Error::invalid(format!(
            "downstream gradient has {} entries, template measures {} outcomes",
            downstream_gradient.len(),
            template.outcome_count()
        )));
    }
    let (_, grad) = loss_and_gradient(template, params, input, |_| {
        Ok((0.0, downstream_gradient.to_vec()))
    })?;
    Ok(grad)
}

/// Runs the circuit once, hands the outcome probabilities to `head` (which
/// returns the loss and its gradient over outcomes), then back-propagates.
pub fn loss_and_gradient<F>(
    template: &CircuitTemplate,
    params: &[f64],
    input: &StateVector,
    head: F,
) -> Result<(f64, Vec<f64>)>
where
    F: FnOnce(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let mut phi = template.run(params, input)?;
    let measured = template.measured_wires();
    let probs = phi.marginal_probabilities(measured)?;
    let (loss, dprobs) = head(&probs)?;
    if dprobs.len() != probs.len() {
        return Err(Error::invalid(format!(
            "loss head returned {} outcome gradients, expected {}",
            dprobs.len(),
            probs.len()
        )));
    }

    let mut grad = vec![0.0; template.slot_count()];
    if dprobs.iter().all(|&g| g == 0.0) {
        return Ok((loss, grad));
    }

    let index = OutcomeIndex::new(phi.n_qubits(), measured);
    let mut lambda = phi.clone();
    for (i, a) in lambda.amplitudes_mut().iter_mut().enumerate() {
        *a *= dprobs[index.outcome(i)];
    }

    for g in template.gates().iter().rev() {
        let angles = g.resolve_angles(params);
        let inverse = dagger(&g.kind.matrix(&angles));
        let (target, control) = (g.target(), g.control());
        phi.apply_block(&inverse, target, control);
        if !g.slots().is_empty() {
            let overlap = pair_overlaps(&lambda, &phi, target, control);
            for (k, &slot) in g.slots().iter().enumerate() {
                let d = g.kind.matrix_derivative(&angles, k);
                let mut acc = Complex64::new(0.0, 0.0);
                for a in 0..2 {
                    for b in 0..2 {
                        acc += d[a][b] * overlap[a][b];
                    }
                }
                grad[slot] += 2.0 * acc.re;
            }
        }
        lambda.apply_block(&inverse, target, control);
    }
    Ok((loss, grad))
}

/// `M[a][b] = Σ conj(λ[i_a]) φ[i_b]` over target-wire pairs `(i_0, i_1)` in the
/// controlled subspace, so that `⟨λ| D_target |φ⟩ = Σ_ab D[a][b] M[a][b]`.
fn pair_overlaps(
    lambda: &StateVector,
    phi: &StateVector,
    target: usize,
    control: Option<(usize, bool)>,
) -> Mat2 {
    let t = phi.bit(target);
    let (cmask, cwant) = match control {
        Some((c, v)) => (phi.bit(c), if v { phi.bit(c) } else { 0 }),
        None => (0, 0),
    };
    let (l, p) = (lambda.amplitudes(), phi.amplitudes());
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    let mut base = 0;
    while base < p.len() {
        for i in base..base + t {
            if i & cmask != cwant {
                continue;
            }
            let (l0, l1) = (l[i].conj(), l[i + t].conj());
            let (p0, p1) = (p[i], p[i + t]);
            m[0][0] += l0 * p0;
            m[0][1] += l0 * p1;
            m[1][0] += l1 * p0;
            m[1][1] += l1 * p1;
        }
        base += 2 * t;
    }
    m
}

/// Central differences `(L(θ+h·e_i) − L(θ−h·e_i)) / 2h` with
/// `L = loss_head(forward(θ))`.
pub fn finite_difference_gradient<F>(
    template: &CircuitTemplate,
    params: &[f64],
    input: &StateVector,
    loss_head: F,
    h: f64,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    if !(h > 0.0) {
        return Err(Error::invalid(format!("step {h} must be positive")));
    }
    template.check_inputs(params, input)?;
    let mut shifted = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        shifted[i] = params[i] + h;
        let plus = loss_head(&template.forward(&shifted, input)?);
        shifted[i] = params[i] - h;
        let minus = loss_head(&template.forward(&shifted, input)?);
        shifted[i] = params[i];
        grad.push((plus - minus) / (2.0 * h));
    }
    Ok(grad)
}
