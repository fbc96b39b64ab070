use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qcnn::ansatz::build_qcnn;
use qcnn::cnn::build_cnn;
use qcnn::encoding::amplitude_encode;
use qcnn::sim::{finite_difference_gradient, loss_gradient, CircuitTemplate, GateInstruction, GateKind, StateVector};
use qcnn::training::{softmax_cross_entropy, Classifier, CnnClassifier, QcnnClassifier};

const H: f64 = 1e-4;

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn random_params(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect()
}

fn random_amplitude_input(rng: &mut ChaCha8Rng) -> StateVector {
    let x: Vec<f64> = (0..256).map(|_| rng.random_range(-1.0..1.0)).collect();
    amplitude_encode(&x).unwrap()
}

#[test]
fn qcnn_adjoint_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for classes in [10, 4, 6, 8] {
        let model = QcnnClassifier::new(classes).unwrap();
        let t = &model.template;
        let draws = if classes == 10 { 20 } else { 3 };
        for _ in 0..draws {
            let params = random_params(&mut rng, t.slot_count());
            let input = random_amplitude_input(&mut rng);
            let target = rng.random_range(0..classes);
            let (_, analytic) = model.loss_and_gradient(&params, &input, target).unwrap();
            let fd = finite_difference_gradient(
                t,
                &params,
                &input,
                |p| softmax_cross_entropy(&p[..classes], target).unwrap().0,
                H,
            )
            .unwrap();
            let err = max_abs_diff(&analytic, &fd);
            assert!(err < 1e-6, "{classes}-class: max error {err:e}");
        }
    }
}

#[test]
fn qcnn_adjoint_with_linear_head() {
    let (_, t) = build_qcnn(10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let params = random_params(&mut rng, t.slot_count());
        let input = random_amplitude_input(&mut rng);
        let w: Vec<f64> = (0..t.outcome_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let analytic = loss_gradient(&t, &params, &input, &w).unwrap();
        let head = |p: &[f64]| p.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        let fd = finite_difference_gradient(&t, &params, &input, head, H).unwrap();
        assert!(max_abs_diff(&analytic, &fd) < 1e-6);
    }
}

#[test]
fn cnn_backprop_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for classes in [10, 4] {
        let (cnn, _) = build_cnn(classes, 0).unwrap();
        let model = CnnClassifier { cnn };
        let draws = if classes == 10 { 20 } else { 3 };
        for _ in 0..draws {
            let params: Vec<f64> = (0..model.num_params()).map(|_| rng.random_range(-0.5..0.5)).collect();
            let image: Vec<f64> = (0..784).map(|_| rng.random_range(0.0..1.0)).collect();
            let target = rng.random_range(0..classes);
            let (_, analytic) = model.loss_and_gradient(&params, &image, target).unwrap();
            let mut shifted = params.clone();
            let fd: Vec<f64> = (0..params.len())
                .map(|i| {
                    shifted[i] = params[i] + H;
                    let plus = model.loss(&shifted, &image, target).unwrap();
                    shifted[i] = params[i] - H;
                    let minus = model.loss(&shifted, &image, target).unwrap();
                    shifted[i] = params[i];
                    (plus - minus) / (2.0 * H)
                })
                .collect();
            let err = max_abs_diff(&analytic, &fd);
            assert!(err < 1e-6, "{classes}-class CNN: max error {err:e}");
        }
    }
}

fn ry_probe() -> CircuitTemplate {
    let mut gates = Vec::new();
    let mut slot = 0;
    for layer in 0..3 {
        for w in 0..3 {
            gates.push(GateInstruction::slotted(GateKind::Ry, &[w], &[slot]).unwrap());
            slot += 1;
        }
        if layer < 2 {
            gates.push(GateInstruction::fixed(GateKind::Cnot, &[0, 1], &[]).unwrap());
            gates.push(GateInstruction::fixed(GateKind::Cnot, &[1, 2], &[]).unwrap());
        }
    }
    CircuitTemplate::new(3, gates, slot, vec![0, 2], vec![]).unwrap()
}

#[test]
fn parameter_shift_on_ry_circuit() {
    let t = ry_probe();
    let input = StateVector::zero_state(3).unwrap();
    let w = [0.3, -1.2, 0.8, 2.0];
    let loss = |params: &[f64]| {
        let p = t.forward(params, &input).unwrap();
        p.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let params = random_params(&mut rng, t.slot_count());
        let analytic = loss_gradient(&t, &params, &input, &w).unwrap();
        for i in 0..params.len() {
            let mut plus = params.clone();
            plus[i] += FRAC_PI_2;
            let mut minus = params.clone();
            minus[i] -= FRAC_PI_2;
            let shift = (loss(&plus) - loss(&minus)) / 2.0;
            assert!((shift - analytic[i]).abs() < 1e-10, "slot {i}: {shift} vs {}", analytic[i]);
        }
    }
}

#[test]
fn shared_slot_gradient_is_sum_of_split_copies() {
    let kinds = [
        (GateKind::Ry, vec![0]),
        (GateKind::Crx, vec![0, 1]),
        (GateKind::Rx, vec![2]),
        (GateKind::Crz, vec![2, 1]),
        (GateKind::Crx0, vec![1, 0]),
    ];
    let shared: Vec<_> = kinds
        .iter()
        .map(|(k, w)| GateInstruction::slotted(*k, w, &[0]).unwrap())
        .collect();
    let split: Vec<_> = kinds
        .iter()
        .enumerate()
        .map(|(i, (k, w))| GateInstruction::slotted(*k, w, &[i]).unwrap())
        .collect();
    let ts = CircuitTemplate::new(3, shared, 1, vec![0, 1], vec![]).unwrap();
    let tp = CircuitTemplate::new(3, split, kinds.len(), vec![0, 1], vec![]).unwrap();
    let amps: Vec<Complex64> = (0..8).map(|i| Complex64::new(1.0 + i as f64, 0.5 - i as f64)).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let input = StateVector::from_amplitudes(3, amps.iter().map(|a| a / norm).collect()).unwrap();
    let w = [1.0, -0.4, 0.25, 2.0];
    for theta in [0.3, 1.7, -2.2] {
        let gs = loss_gradient(&ts, &[theta], &input, &w).unwrap();
        let gp = loss_gradient(&tp, &vec![theta; kinds.len()], &input, &w).unwrap();
        let sum: f64 = gp.iter().sum();
        assert!((gs[0] - sum).abs() < 1e-12, "{} vs {sum}", gs[0]);
    }
}

#[test]
fn retired_wires_do_not_change_gradients() {
    // a retired wire is still in the state, so marginalizing over it must
    // agree with finite differences through the same readout
    let (_, t) = build_qcnn(4).unwrap();
    assert!(!t.retirements().is_empty());
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let params = random_params(&mut rng, t.slot_count());
    let input = random_amplitude_input(&mut rng);
    let w = [0.5, -1.0, 0.25, 1.5];
    let analytic = loss_gradient(&t, &params, &input, &w).unwrap();
    let head = |p: &[f64]| p.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
    let fd = finite_difference_gradient(&t, &params, &input, head, H).unwrap();
    assert!(max_abs_diff(&analytic, &fd) < 1e-6);
}
