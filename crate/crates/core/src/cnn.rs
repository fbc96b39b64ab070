//! Parameter-matched classical baseline.
//!
//! Three single-kernel valid convolutions (8×8, 5×5, 3×3), each followed by
//! tanh, with 2×2 stride-2 average pooling after the first two, then a fully
//! connected head from the single remaining activation to the class logits:
//!
//! ```text
//! 28×28 → conv8 → 21×21 → pool → 10×10 → conv5 → 6×6 → pool → 3×3 → conv3 → 1×1 → FC → C
//! ```
//!
//! Parameters live in one flat vector: `k1 (64), b1, k2 (25), b2, k3 (9), b3,
//! fc weights (C), fc biases (C)`, i.e. `101 + 2C` values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ansatz::SUPPORTED_CLASSES;
use crate::data::IMAGE_SIDE;
use crate::error::{Error, Result};

const K1: usize = 8;
const K2: usize = 5;
const K3: usize = 3;

const K1_OFF: usize = 0;
const B1_OFF: usize = K1_OFF + K1 * K1;
const K2_OFF: usize = B1_OFF + 1;
const B2_OFF: usize = K2_OFF + K2 * K2;
const K3_OFF: usize = B2_OFF + 1;
const B3_OFF: usize = K3_OFF + K3 * K3;
const FC_OFF: usize = B3_OFF + 1;

/// Convolutional trunk size: 65 + 26 + 10.
pub const TRUNK_PARAMS: usize = FC_OFF;

const S1: usize = IMAGE_SIDE - K1 + 1; // 21
const P1: usize = S1 / 2; // 10
const S2: usize = P1 - K2 + 1; // 6
const P2: usize = S2 / 2; // 3
const S3: usize = P2 - K3 + 1; // 1

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cnn {
    num_classes: usize,
}

/// Activations kept from the forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct CnnTrace {
    input: Vec<f64>,
    a1: Vec<f64>,
    p1: Vec<f64>,
    a2: Vec<f64>,
    p2: Vec<f64>,
    a3: f64,
    pub logits: Vec<f64>,
}

/// Architecture plus seeded initial parameters, uniform in `±1/√fan_in` per layer.
pub fn build_cnn(num_classes: usize, seed: u64) -> Result<(Cnn, Vec<f64>)> {
    let cnn = Cnn::new(num_classes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(crate::training::INIT_STREAM);
    let mut params = vec![0.0; cnn.num_params()];
    let layers = [
        (K1_OFF..K2_OFF, K1 * K1),
        (K2_OFF..K3_OFF, K2 * K2),
        (K3_OFF..FC_OFF, K3 * K3),
        (FC_OFF..params.len(), 1),
    ];
    for (range, fan_in) in layers {
        let bound = 1.0 / (fan_in as f64).sqrt();
        for p in &mut params[range] {
            *p = rng.random_range(-bound..bound);
        }
    }
    Ok((cnn, params))
}

fn conv_valid(input: &[f64], side: usize, kernel: &[f64], k: usize, bias: f64) -> Vec<f64> {
    let out_side = side - k + 1;
    let mut out = vec![bias; out_side * out_side];
    for r in 0..out_side {
        for c in 0..out_side {
            let mut acc = 0.0;
            for u in 0..k {
                let row = &input[(r + u) * side + c..(r + u) * side + c + k];
                let krow = &kernel[u * k..(u + 1) * k];
                acc += row.iter().zip(krow).map(|(x, w)| x * w).sum::<f64>();
            }
            out[r * out_side + c] += acc;
        }
    }
    out
}

/// 2×2 stride-2 average pooling; an odd trailing row/column is dropped.
fn avg_pool2(input: &[f64], side: usize) -> Vec<f64> {
    let out_side = side / 2;
    let mut out = vec![0.0; out_side * out_side];
    for r in 0..out_side {
        for c in 0..out_side {
            let (i, j) = (2 * r, 2 * c);
            out[r * out_side + c] = 0.25
                * (input[i * side + j] + input[i * side + j + 1] + input[(i + 1) * side + j] + input[(i + 1) * side + j + 1]);
        }
    }
    out
}

fn avg_pool2_backward(grad_out: &[f64], side: usize) -> Vec<f64> {
    let out_side = side / 2;
    let mut grad = vec![0.0; side * side];
    for r in 0..out_side {
        for c in 0..out_side {
            let g = 0.25 * grad_out[r * out_side + c];
            for (dr, dc) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                grad[(2 * r + dr) * side + 2 * c + dc] = g;
            }
        }
    }
    grad
}

/// Accumulates kernel/bias gradients and optionally the input gradient of a
/// valid convolution given `dz` on its output.
fn conv_backward(
    input: &[f64],
    side: usize,
    kernel: &[f64],
    k: usize,
    dz: &[f64],
    dkernel: &mut [f64],
    dbias: &mut f64,
    dinput: Option<&mut [f64]>,
) {
    let out_side = side - k + 1;
    *dbias += dz.iter().sum::<f64>();
    for u in 0..k {
        for v in 0..k {
            let mut acc = 0.0;
            for r in 0..out_side {
                for c in 0..out_side {
                    acc += dz[r * out_side + c] * input[(r + u) * side + c + v];
                }
            }
            dkernel[u * k + v] += acc;
        }
    }
    if let Some(dinput) = dinput {
        for r in 0..out_side {
            for c in 0..out_side {
                let g = dz[r * out_side + c];
                for u in 0..k {
                    for v in 0..k {
                        dinput[(r + u) * side + c + v] += g * kernel[u * k + v];
                    }
                }
            }
        }
    }
}

impl Cnn {
    pub fn new(num_classes: usize) -> Result<Self> {
        if !SUPPORTED_CLASSES.contains(&num_classes) {
            return Err(Error::invalid(format!(
                "unsupported class count {num_classes}; expected one of {SUPPORTED_CLASSES:?}"
            )));
        }
        Ok(Self { num_classes })
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn num_params(&self) -> usize {
        TRUNK_PARAMS + 2 * self.num_classes
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(Error::Shape(format!(
                "{} parameters for a {}-class CNN with {}",
                params.len(),
                self.num_classes,
                self.num_params()
            )));
        }
        Ok(())
    }

    /// Forward pass on a 28×28 image with intensities in `[0, 1]`.
    pub fn forward_trace(&self, params: &[f64], image: &[f64]) -> Result<CnnTrace> {
        self.check_params(params)?;
        if image.len() != IMAGE_SIDE * IMAGE_SIDE {
            return Err(Error::invalid(format!(
                "CNN input has {} values, expected {}",
                image.len(),
                IMAGE_SIDE * IMAGE_SIDE
            )));
        }
        let tanh = |v: Vec<f64>| v.into_iter().map(f64::tanh).collect::<Vec<_>>();
        let a1 = tanh(conv_valid(image, IMAGE_SIDE, &params[K1_OFF..B1_OFF], K1, params[B1_OFF]));
        let p1 = avg_pool2(&a1, S1);
        let a2 = tanh(conv_valid(&p1, P1, &params[K2_OFF..B2_OFF], K2, params[B2_OFF]));
        let p2 = avg_pool2(&a2, S2);
        let z3 = conv_valid(&p2, P2, &params[K3_OFF..B3_OFF], K3, params[B3_OFF]);
        debug_assert_eq!(z3.len(), S3 * S3);
        let a3 = z3[0].tanh();
        let c = self.num_classes;
        let logits = (0..c)
            .map(|i| params[FC_OFF + i] * a3 + params[FC_OFF + c + i])
            .collect();
        Ok(CnnTrace {
            input: image.to_vec(),
            a1,
            p1,
            a2,
            p2,
            a3,
            logits,
        })
    }

    pub fn forward(&self, params: &[f64], image: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_trace(params, image)?.logits)
    }

    /// Exact parameter gradient given dLoss/dlogits.
    pub fn backward(&self, params: &[f64], trace: &CnnTrace, loss_grad_on_logits: &[f64]) -> Result<Vec<f64>> {
        self.check_params(params)?;
        let c = self.num_classes;
        if loss_grad_on_logits.len() != c {
            return Err(Error::Shape(format!(
                "{} logit gradients for {c} classes",
                loss_grad_on_logits.len()
            )));
        }
        let mut grad = vec![0.0; params.len()];

        let mut da3 = 0.0;
        for (i, &g) in loss_grad_on_logits.iter().enumerate() {
            grad[FC_OFF + i] = g * trace.a3;
            grad[FC_OFF + c + i] = g;
            da3 += g * params[FC_OFF + i];
        }
        let dz3 = [da3 * (1.0 - trace.a3 * trace.a3)];

        let mut dp2 = vec![0.0; P2 * P2];
        let (head, tail) = grad.split_at_mut(B3_OFF);
        conv_backward(&trace.p2, P2, &params[K3_OFF..B3_OFF], K3, &dz3, &mut head[K3_OFF..], &mut tail[0], Some(&mut dp2));

        let da2 = avg_pool2_backward(&dp2, S2);
        let dz2: Vec<f64> = da2.iter().zip(&trace.a2).map(|(g, a)| g * (1.0 - a * a)).collect();
        let mut dp1 = vec![0.0; P1 * P1];
        let (head, tail) = grad.split_at_mut(B2_OFF);
        conv_backward(&trace.p1, P1, &params[K2_OFF..B2_OFF], K2, &dz2, &mut head[K2_OFF..], &mut tail[0], Some(&mut dp1));

        let da1 = avg_pool2_backward(&dp1, S1);
        let dz1: Vec<f64> = da1.iter().zip(&trace.a1).map(|(g, a)| g * (1.0 - a * a)).collect();
        let (head, tail) = grad.split_at_mut(B1_OFF);
        conv_backward(&trace.input, IMAGE_SIDE, &params[K1_OFF..B1_OFF], K1, &dz1, &mut head[K1_OFF..], &mut tail[0], None);

        Ok(grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_counts() {
        assert_eq!(TRUNK_PARAMS, 65 + 26 + 10);
        for (c, n) in [(4, 109), (6, 113), (8, 117), (10, 121)] {
            let (cnn, params) = build_cnn(c, 0).unwrap();
            assert_eq!(cnn.num_params(), n);
            assert_eq!(params.len(), n);
        }
        assert!(build_cnn(5, 0).is_err());
    }

    #[test]
    fn shape_chain() {
        assert_eq!((S1, P1, S2, P2, S3), (21, 10, 6, 3, 1));
    }

    #[test]
    fn zero_weights_give_zero_logits() {
        let cnn = Cnn::new(6).unwrap();
        let logits = cnn.forward(&vec![0.0; cnn.num_params()], &vec![0.7; 784]).unwrap();
        assert_eq!(logits, vec![0.0; 6]);
    }

    #[test]
    fn single_pixel_hand_trace() {
        let cnn = Cnn::new(4).unwrap();
        let mut p = vec![0.0; cnn.num_params()];
        p[K1_OFF] = 1.0;
        p[K2_OFF] = 1.0;
        p[K3_OFF] = 1.0;
        p[FC_OFF] = 1.0; // weight of class 0
        p[FC_OFF + 4 + 1] = 0.5; // bias of class 1
        let mut image = vec![0.0; 784];
        image[0] = 1.0;
        let a1 = 1.0f64.tanh();
        let a2 = (a1 / 4.0).tanh();
        let a3 = (a2 / 4.0).tanh();
        let logits = cnn.forward(&p, &image).unwrap();
        assert!((logits[0] - a3).abs() < 1e-15);
        assert_eq!(logits[1], 0.5);
        assert_eq!(logits[2], 0.0);
    }

    #[test]
    fn wrong_shape() {
        let cnn = Cnn::new(4).unwrap();
        assert!(matches!(cnn.forward(&vec![0.0; 109], &[0.0; 100]), Err(Error::InvalidArgument(_))));
        assert!(matches!(cnn.forward(&vec![0.0; 108], &[0.0; 784]), Err(Error::Shape(_))));
    }

    #[test]
    fn fc_bias_gradient_is_logit_gradient() {
        let (cnn, p) = build_cnn(4, 3).unwrap();
        let image: Vec<f64> = (0..784).map(|i| (i % 17) as f64 / 17.0).collect();
        let t = cnn.forward_trace(&p, &image).unwrap();
        let g = [0.1, -0.4, 0.25, 0.05];
        let grad = cnn.backward(&p, &t, &g).unwrap();
        assert_eq!(&grad[FC_OFF + 4..], &g);
        let zero = cnn.backward(&p, &t, &[0.0; 4]).unwrap();
        assert!(zero.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn average_pool_preserves_window_mean() {
        let input: Vec<f64> = (0..25).map(|i| i as f64).collect();
        let out = avg_pool2(&input, 5);
        assert_eq!(out.len(), 4);
        assert_eq!(out[0], (0.0 + 1.0 + 5.0 + 6.0) / 4.0);
        assert_eq!(out[3], (12.0 + 13.0 + 17.0 + 18.0) / 4.0);
    }
}
