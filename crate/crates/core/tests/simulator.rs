use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qcnn::sim::{CircuitTemplate, GateInstruction, GateKind, StateVector};

type CMat = DMatrix<Complex64>;

const KINDS: [GateKind; 8] = [
    GateKind::Rx,
    GateKind::Ry,
    GateKind::Rz,
    GateKind::U3,
    GateKind::Cnot,
    GateKind::Crz,
    GateKind::Crx,
    GateKind::Crx0,
];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

/// exp(-iθP/2) = cos(θ/2) I - i sin(θ/2) P
fn rotation(p: CMat, theta: f64) -> CMat {
    CMat::identity(2, 2) * c((theta / 2.0).cos(), 0.0) + p * c(0.0, -(theta / 2.0).sin())
}

fn single_qubit(kind: GateKind, a: &[f64]) -> CMat {
    use std::f64::consts::FRAC_PI_2;
    match kind {
        GateKind::Rx | GateKind::Crx | GateKind::Crx0 => rotation(pauli_x(), a[0]),
        GateKind::Ry => rotation(pauli_y(), a[0]),
        GateKind::Rz | GateKind::Crz => rotation(pauli_z(), a[0]),
        GateKind::U3 => {
            rotation(pauli_z(), a[1])
                * rotation(pauli_x(), -FRAC_PI_2)
                * rotation(pauli_z(), a[0])
                * rotation(pauli_x(), FRAC_PI_2)
                * rotation(pauli_z(), a[2])
        }
        GateKind::Cnot => pauli_x(),
    }
}

fn kron_all(factors: &[CMat]) -> CMat {
    factors.iter().skip(1).fold(factors[0].clone(), |acc, f| acc.kronecker(f))
}

/// Full 2^n operator; wire 0 is the leftmost tensor factor.
fn full_operator(n: usize, kind: GateKind, wires: &[usize], angles: &[f64]) -> CMat {
    let block = single_qubit(kind, angles);
    let id = CMat::identity(2, 2);
    if wires.len() == 1 {
        let f: Vec<CMat> = (0..n).map(|w| if w == wires[0] { block.clone() } else { id.clone() }).collect();
        return kron_all(&f);
    }
    let (ctrl, tgt) = (wires[0], wires[1]);
    let active = match kind {
        GateKind::Crx0 => 0,
        _ => 1,
    };
    let mut proj = CMat::zeros(2, 2);
    proj[(active, active)] = c(1.0, 0.0);
    let mut proj_off = CMat::zeros(2, 2);
    proj_off[(1 - active, 1 - active)] = c(1.0, 0.0);
    let on: Vec<CMat> = (0..n)
        .map(|w| match w {
            _ if w == ctrl => proj.clone(),
            _ if w == tgt => block.clone(),
            _ => id.clone(),
        })
        .collect();
    let off: Vec<CMat> = (0..n).map(|w| if w == ctrl { proj_off.clone() } else { id.clone() }).collect();
    kron_all(&on) + kron_all(&off)
}

/// Reduced density matrix over `kept` (in listed order) by explicit partial trace.
fn partial_trace_diagonal(rho: &CMat, n: usize, kept: &[usize]) -> Vec<f64> {
    let m = kept.len();
    let mut diag = vec![0.0; 1 << m];
    let bit = |idx: usize, w: usize| (idx >> (n - 1 - w)) & 1;
    for i in 0..rho.nrows() {
        for j in 0..rho.ncols() {
            let traced_equal = (0..n).filter(|w| !kept.contains(w)).all(|w| bit(i, w) == bit(j, w));
            let ki: usize = kept.iter().fold(0, |acc, &w| (acc << 1) | bit(i, w));
            let kj: usize = kept.iter().fold(0, |acc, &w| (acc << 1) | bit(j, w));
            if traced_equal && ki == kj {
                diag[ki] += rho[(i, j)].re;
            }
        }
    }
    diag
}

struct RandomCircuit {
    n: usize,
    gates: Vec<GateInstruction>,
    params: Vec<f64>,
    input: Vec<Complex64>,
    kept: Vec<usize>,
}

fn random_circuit(rng: &mut ChaCha8Rng, max_qubits: usize, max_gates: usize) -> RandomCircuit {
    let n = rng.random_range(1..=max_qubits);
    let n_gates = rng.random_range(1..=max_gates);
    let mut gates = Vec::new();
    let mut slots = 0;
    for _ in 0..n_gates {
        let kind = loop {
            let k = KINDS[rng.random_range(0..KINDS.len())];
            if k.wire_count() <= n {
                break k;
            }
        };
        let a = rng.random_range(0..n);
        let wires = if kind.wire_count() == 2 {
            let b = (a + rng.random_range(1..n)) % n;
            vec![a, b]
        } else {
            vec![a]
        };
        let s: Vec<usize> = (slots..slots + kind.angle_count()).collect();
        slots += kind.angle_count();
        gates.push(GateInstruction::slotted(kind, &wires, &s).unwrap());
    }
    let params = (0..slots).map(|_| rng.random_range(-4.0..4.0)).collect();
    let raw: Vec<Complex64> = (0..1 << n)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let input = raw.iter().map(|z| z / norm).collect();
    let mut kept: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        kept.swap(i, rng.random_range(0..=i));
    }
    kept.truncate(rng.random_range(1..=n));
    RandomCircuit {
        n,
        gates,
        params,
        input,
        kept,
    }
}

#[test]
fn marginals_match_density_matrix_partial_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let rc = random_circuit(&mut rng, 4, 12);
        let slots = rc.params.len();
        let template = CircuitTemplate::new(rc.n, rc.gates.clone(), slots, rc.kept.clone(), vec![]).unwrap();
        let input = StateVector::from_amplitudes(rc.n, rc.input.clone()).unwrap();
        let probs = template.forward(&rc.params, &input).unwrap();

        let psi = DMatrix::from_column_slice(1 << rc.n, 1, &rc.input);
        let mut rho = &psi * psi.adjoint();
        for g in &rc.gates {
            let angles: Vec<f64> = g.slots().iter().map(|&s| rc.params[s]).collect();
            let u = full_operator(rc.n, g.kind, &g.wires, &angles);
            rho = &u * rho * u.adjoint();
        }
        let oracle = partial_trace_diagonal(&rho, rc.n, &rc.kept);
        for (p, o) in probs.iter().zip(&oracle) {
            worst = worst.max((p - o).abs());
        }
    }
    assert!(worst < 1e-10, "max deviation {worst:e}");
}

#[test]
fn u3_matches_its_rotation_decomposition() {
    let angles = [0.7, -1.3, 2.1];
    let ours = GateKind::U3.matrix(&angles);
    let oracle = single_qubit(GateKind::U3, &angles);
    for r in 0..2 {
        for col in 0..2 {
            assert!((ours[r][col] - oracle[(r, col)]).norm() < 1e-14);
        }
    }
}

#[test]
fn marginal_over_all_wires_is_full_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let rc = random_circuit(&mut rng, 5, 10);
        let all: Vec<usize> = (0..rc.n).collect();
        let slots = rc.params.len();
        let t = CircuitTemplate::new(rc.n, rc.gates, slots, all.clone(), vec![]).unwrap();
        let input = StateVector::from_amplitudes(rc.n, rc.input).unwrap();
        let state = t.run(&rc.params, &input).unwrap();
        assert_eq!(state.marginal_probabilities(&all).unwrap(), state.probabilities());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_preserved(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rc = random_circuit(&mut rng, 10, 40);
        let mut state = StateVector::from_amplitudes(rc.n, rc.input).unwrap();
        for g in &rc.gates {
            let angles: Vec<f64> = g.slots().iter().map(|&s| rc.params[s]).collect();
            state.apply_gate(g, &angles).unwrap();
            prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn marginals_sum_to_one(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rc = random_circuit(&mut rng, 8, 20);
        let slots = rc.params.len();
        let t = CircuitTemplate::new(rc.n, rc.gates, slots, rc.kept.clone(), vec![]).unwrap();
        let input = StateVector::from_amplitudes(rc.n, rc.input).unwrap();
        let probs = t.forward(&rc.params, &input).unwrap();
        prop_assert_eq!(probs.len(), 1 << rc.kept.len());
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(probs.iter().all(|&p| p >= 0.0));
    }
}
