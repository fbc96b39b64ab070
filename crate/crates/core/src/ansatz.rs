//! QCNN circuit construction.
//!
//! Three blocks act on a shrinking set of live wires (8, 6, then 4). Each block
//! applies the preconvolutional filter F1 to every live wire, the shared
//! 15-angle SU(4) filter F2 to adjacent pairs (even pairs, then the odd pairs
//! closing the ring), and a pooling stage of controlled rotations whose
//! controls are retired afterwards. The third block's pooling keeps its
//! controls. Class counts below 10 append one more pooling stage before
//! measurement.
//!
//! Slot layout per block is `[F1: 3n][F2: 15][pool: 2]`, giving 105 slots for
//! ten classes and 107 otherwise.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::sim::{CircuitTemplate, GateInstruction, GateKind, Retirement, StateVector};

pub const QCNN_QUBITS: usize = 8;
pub const F2_SLOTS: usize = 15;
pub const POOL_SLOTS: usize = 2;
pub const SUPPORTED_CLASSES: [usize; 4] = [4, 6, 8, 10];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolingPlan {
    pub slots: Range<usize>,
    /// `(control, target)` wire pairs.
    pub pairs: Vec<(usize, usize)>,
    pub retire: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPlan {
    pub live_wires: Vec<usize>,
    pub f1_slots: Range<usize>,
    pub f2_slots: Range<usize>,
    pub f2_pairs: Vec<(usize, usize)>,
    pub pooling: PoolingPlan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QcnnPlan {
    pub num_classes: usize,
    pub blocks: Vec<BlockPlan>,
    pub extra_stage: Option<PoolingPlan>,
    pub measured_wires: Vec<usize>,
}

impl QcnnPlan {
    pub fn slot_count(&self) -> usize {
        self.extra_stage
            .as_ref()
            .map_or(self.blocks.last().map_or(0, |b| b.pooling.slots.end), |e| {
                e.slots.end
            })
    }
}

/// RX on every live wire, RZ on every live wire, then a ring of CRX gates
/// `live[i] → live[i+1 mod n]`. Consumes `3n` unshared slots.
pub fn f1_layer(live_wires: &[usize], slot_base: usize) -> Result<Vec<GateInstruction>> {
    let n = live_wires.len();
    if n < 2 {
        return Err(Error::invalid(format!("F1 needs at least 2 wires, got {n}")));
    }
    let mut gates = Vec::with_capacity(3 * n);
    for (i, &w) in live_wires.iter().enumerate() {
        gates.push(GateInstruction::slotted(GateKind::Rx, &[w], &[slot_base + i])?);
    }
    for (i, &w) in live_wires.iter().enumerate() {
        gates.push(GateInstruction::slotted(GateKind::Rz, &[w], &[slot_base + n + i])?);
    }
    for i in 0..n {
        let (c, t) = (live_wires[i], live_wires[(i + 1) % n]);
        gates.push(GateInstruction::slotted(
            GateKind::Crx,
            &[c, t],
            &[slot_base + 2 * n + i],
        )?);
    }
    Ok(gates)
}

/// Three-CNOT SU(4) decomposition on `(a, b)` using slots
/// `slot_base..slot_base + 15`. Every application within a block reuses the
/// same slots.
pub fn f2_filter(pair: (usize, usize), slot_base: usize) -> Result<Vec<GateInstruction>> {
    let (a, b) = pair;
    if a == b {
        return Err(Error::invalid(format!("F2 pair repeats wire {a}")));
    }
    let s = |k: usize| slot_base + k;
    let u3 = |w: usize, k: usize| GateInstruction::slotted(GateKind::U3, &[w], &[s(k), s(k + 1), s(k + 2)]);
    let cnot = |c: usize, t: usize| GateInstruction::fixed(GateKind::Cnot, &[c, t], &[]);
    Ok(vec![
        u3(a, 0)?,
        u3(b, 3)?,
        cnot(b, a)?,
        GateInstruction::slotted(GateKind::Rz, &[a], &[s(6)])?,
        GateInstruction::slotted(GateKind::Ry, &[b], &[s(7)])?,
        cnot(a, b)?,
        GateInstruction::slotted(GateKind::Ry, &[b], &[s(8)])?,
        cnot(b, a)?,
        u3(a, 9)?,
        u3(b, 12)?,
    ])
}

/// CRZ (control on 1) then CRX0 (control on 0) for each `(control, target)`
/// pair, all sharing slots `slot_base` and `slot_base + 1`.
pub fn pooling_stage(pairs: &[(usize, usize)], slot_base: usize) -> Result<Vec<GateInstruction>> {
    let mut seen = Vec::with_capacity(2 * pairs.len());
    for &(c, t) in pairs {
        for w in [c, t] {
            if seen.contains(&w) {
                return Err(Error::invalid(format!("pooling pairs overlap on wire {w}")));
            }
            seen.push(w);
        }
    }
    let mut gates = Vec::with_capacity(2 * pairs.len());
    for &(c, t) in pairs {
        gates.push(GateInstruction::slotted(GateKind::Crz, &[c, t], &[slot_base])?);
        gates.push(GateInstruction::slotted(GateKind::Crx0, &[c, t], &[slot_base + 1])?);
    }
    Ok(gates)
}

#[derive(Default)]
struct Builder {
    gates: Vec<GateInstruction>,
    retirements: Vec<Retirement>,
    next_slot: usize,
}

impl Builder {
    fn take_slots(&mut self, n: usize) -> Range<usize> {
        let r = self.next_slot..self.next_slot + n;
        self.next_slot += n;
        r
    }

    fn pool(&mut self, pairs: Vec<(usize, usize)>, retire: bool) -> Result<PoolingPlan> {
        let slots = self.take_slots(POOL_SLOTS);
        self.gates.extend(pooling_stage(&pairs, slots.start)?);
        if retire {
            for &(c, _) in &pairs {
                self.retirements.push(Retirement {
                    after_gate: self.gates.len(),
                    wire: c,
                });
            }
        }
        Ok(PoolingPlan {
            slots,
            pairs,
            retire,
        })
    }

    fn block(&mut self, live: &[usize], pool_positions: &[usize], retire: bool) -> Result<BlockPlan> {
        let n = live.len();
        let f1_slots = self.take_slots(3 * n);
        self.gates.extend(f1_layer(live, f1_slots.start)?);

        let f2_slots = self.take_slots(F2_SLOTS);
        let even = (0..n).step_by(2).map(|i| (live[i], live[i + 1]));
        let odd = (1..n).step_by(2).map(|i| (live[i], live[(i + 1) % n]));
        let f2_pairs: Vec<_> = even.chain(odd).collect();
        for &pair in &f2_pairs {
            self.gates.extend(f2_filter(pair, f2_slots.start)?);
        }

        let pairs = pool_positions.iter().map(|&p| (live[p], live[p + 1])).collect();
        let pooling = self.pool(pairs, retire)?;
        Ok(BlockPlan {
            live_wires: live.to_vec(),
            f1_slots,
            f2_slots,
            f2_pairs,
            pooling,
        })
    }
}

fn without(live: &[usize], pooling: &PoolingPlan) -> Vec<usize> {
    live.iter()
        .copied()
        .filter(|w| !pooling.pairs.iter().any(|&(c, _)| c == *w))
        .collect()
}

pub fn build_qcnn(num_classes: usize) -> Result<(QcnnPlan, CircuitTemplate)> {
    if !SUPPORTED_CLASSES.contains(&num_classes) {
        return Err(Error::invalid(format!(
            "unsupported class count {num_classes}; expected one of {SUPPORTED_CLASSES:?}"
        )));
    }
    let mut b = Builder::default();
    let live1: Vec<usize> = (0..QCNN_QUBITS).collect();
    let block1 = b.block(&live1, &[0, 4], true)?;
    let live2 = without(&live1, &block1.pooling);
    let block2 = b.block(&live2, &[0, 3], true)?;
    let live3 = without(&live2, &block2.pooling);
    let block3 = b.block(&live3, &[0, 2], false)?;

    let (extra_stage, measured_wires) = match num_classes {
        10 => (None, live3.clone()),
        4 => {
            let stage = b.pool(vec![(live3[0], live3[1]), (live3[2], live3[3])], true)?;
            let measured = without(&live3, &stage);
            (Some(stage), measured)
        }
        _ => {
            let stage = b.pool(vec![(live3[0], live3[1])], true)?;
            let measured = without(&live3, &stage);
            (Some(stage), measured)
        }
    };

    let plan = QcnnPlan {
        num_classes,
        blocks: vec![block1, block2, block3],
        extra_stage,
        measured_wires: measured_wires.clone(),
    };
    let template = CircuitTemplate::new(QCNN_QUBITS, b.gates, b.next_slot, measured_wires, b.retirements)?;
    Ok((plan, template))
}

/// Outcome probabilities of the template on an encoded input.
pub fn forward(template: &CircuitTemplate, params: &[f64], encoded_input: &StateVector) -> Result<Vec<f64>> {
    template.forward(params, encoded_input)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{matmul, Mat2};
    use num_complex::Complex64;

    #[test]
    fn slot_counts() {
        for c in SUPPORTED_CLASSES {
            let (plan, t) = build_qcnn(c).unwrap();
            let formula = (8 + 6 + 4) * 3 + 3 * F2_SLOTS + 3 * POOL_SLOTS + if c == 10 { 0 } else { 2 };
            assert_eq!(t.slot_count(), formula);
            assert_eq!(plan.slot_count(), t.slot_count());
            assert_eq!(t.slot_count(), if c == 10 { 105 } else { 107 });
        }
    }

    #[test]
    fn measured_wires_per_class_count() {
        let expect = [(10, vec![2, 3, 6, 7]), (8, vec![3, 6, 7]), (6, vec![3, 6, 7]), (4, vec![3, 7])];
        for (c, wires) in expect {
            let (plan, t) = build_qcnn(c).unwrap();
            assert_eq!(t.measured_wires(), wires.as_slice());
            assert_eq!(plan.measured_wires, wires);
            assert!(1 << wires.len() >= c);
        }
    }

    #[test]
    fn block_schedule() {
        let (plan, _) = build_qcnn(10).unwrap();
        let live: Vec<_> = plan.blocks.iter().map(|b| b.live_wires.clone()).collect();
        assert_eq!(live, vec![(0..8).collect::<Vec<_>>(), vec![1, 2, 3, 5, 6, 7], vec![2, 3, 6, 7]]);
        assert_eq!(
            plan.blocks[0].f2_pairs,
            vec![(0, 1), (2, 3), (4, 5), (6, 7), (1, 2), (3, 4), (5, 6), (7, 0)]
        );
        assert_eq!(plan.blocks[1].f2_pairs, vec![(1, 2), (3, 5), (6, 7), (2, 3), (5, 6), (7, 1)]);
        assert_eq!(plan.blocks[2].f2_pairs, vec![(2, 3), (6, 7), (3, 6), (7, 2)]);
        assert_eq!(plan.blocks[0].pooling.pairs, vec![(0, 1), (4, 5)]);
        assert_eq!(plan.blocks[1].pooling.pairs, vec![(1, 2), (5, 6)]);
        assert_eq!(plan.blocks[2].pooling.pairs, vec![(2, 3), (6, 7)]);
        assert!(!plan.blocks[2].pooling.retire);
        assert!(plan.extra_stage.is_none());
        assert_eq!(plan.blocks[0].f1_slots, 0..24);
        assert_eq!(plan.blocks[0].f2_slots, 24..39);
        assert_eq!(plan.blocks[2].pooling.slots, 103..105);

        let (plan, _) = build_qcnn(4).unwrap();
        let extra = plan.extra_stage.unwrap();
        assert_eq!(extra.pairs, vec![(2, 3), (6, 7)]);
        assert_eq!(extra.slots, 105..107);
        let (plan, _) = build_qcnn(6).unwrap();
        assert_eq!(plan.extra_stage.unwrap().pairs, vec![(2, 3)]);
    }

    #[test]
    fn unsupported_class_count() {
        for c in [0, 2, 5, 12] {
            assert!(matches!(build_qcnn(c), Err(Error::InvalidArgument(_))));
        }
    }

    #[test]
    fn f1_structure() {
        let g = f1_layer(&[0, 1, 2, 3], 10).unwrap();
        assert_eq!(g.len(), 12);
        let kinds: Vec<_> = g.iter().map(|g| g.kind).collect();
        assert_eq!(&kinds[..4], &[GateKind::Rx; 4]);
        assert_eq!(&kinds[4..8], &[GateKind::Rz; 4]);
        assert_eq!(&kinds[8..], &[GateKind::Crx; 4]);
        let ring: Vec<_> = g[8..].iter().map(|g| (g.wires[0], g.wires[1])).collect();
        assert_eq!(ring, vec![(0, 1), (1, 2), (2, 3), (3, 0)]);
        let slots: Vec<_> = g.iter().flat_map(|g| g.slots().to_vec()).collect();
        assert_eq!(slots, (10..22).collect::<Vec<_>>());
        assert_eq!(f1_layer(&(0..8).collect::<Vec<_>>(), 0).unwrap().len(), 24);
        assert!(f1_layer(&[0], 0).is_err());
    }

    fn cnot4(control_is_a: bool) -> [[f64; 4]; 4] {
        // basis |ab⟩ with a the high bit
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            let (a, b) = (i >> 1, i & 1);
            let j = if control_is_a { (a << 1) | (b ^ a) } else { ((a ^ b) << 1) | b };
            m[j][i] = 1.0;
        }
        m
    }

    fn mul4(x: &[[f64; 4]; 4], y: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = (0..4).map(|k| x[i][k] * y[k][j]).sum();
            }
        }
        m
    }

    #[test]
    fn three_cnots_compose_to_swap() {
        let (ba, ab) = (cnot4(false), cnot4(true));
        let product = mul4(&ba, &mul4(&ab, &ba));
        let mut swap = [[0.0; 4]; 4];
        for i in 0..4 {
            swap[((i & 1) << 1) | (i >> 1)][i] = 1.0;
        }
        assert_eq!(product, swap);
    }

    fn column_matrix(template: &CircuitTemplate, params: &[f64]) -> Vec<Vec<Complex64>> {
        let dim = 1 << template.n_qubits();
        (0..dim)
            .map(|col| {
                let mut amps = vec![Complex64::new(0.0, 0.0); dim];
                amps[col] = Complex64::new(1.0, 0.0);
                let s = StateVector::from_amplitudes(template.n_qubits(), amps).unwrap();
                template.run(params, &s).unwrap().amplitudes().to_vec()
            })
            .collect()
    }

    fn f2_template() -> CircuitTemplate {
        CircuitTemplate::new(2, f2_filter((0, 1), 0).unwrap(), 15, vec![0, 1], vec![]).unwrap()
    }

    #[test]
    fn f2_zero_angles_is_swap() {
        let cols = column_matrix(&f2_template(), &[0.0; 15]);
        for (i, col) in cols.iter().enumerate() {
            let swapped = ((i & 1) << 1) | (i >> 1);
            for (j, a) in col.iter().enumerate() {
                let want = if j == swapped { 1.0 } else { 0.0 };
                assert!((a - Complex64::new(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn f2_random_angles_unitary() {
        let params: Vec<f64> = (0..15).map(|k| 0.37 * k as f64 - 1.9).collect();
        let cols = column_matrix(&f2_template(), &params);
        for i in 0..4 {
            for j in 0..4 {
                let dot: Complex64 = (0..4).map(|k| cols[i][k].conj() * cols[j][k]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - Complex64::new(want, 0.0)).norm() < 1e-12);
            }
        }
        // identity mat2 helper sanity
        let m: Mat2 = matmul(&crate::sim::identity(), &crate::sim::identity());
        assert_eq!(m, crate::sim::identity());
    }

    #[test]
    fn pooling_actions() {
        let t = |pairs: &[(usize, usize)]| {
            CircuitTemplate::new(2, pooling_stage(pairs, 0).unwrap(), 2, vec![0, 1], vec![]).unwrap()
        };
        let tmpl = t(&[(0, 1)]);
        let zero = StateVector::zero_state(2).unwrap();
        assert_eq!(tmpl.forward(&[0.0, 0.0], &zero).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);

        // control |1⟩, θ1 = π: RZ is diagonal, probabilities unchanged
        let mut one = StateVector::zero_state(2).unwrap();
        one.apply_gate(
            &GateInstruction::fixed(GateKind::Rx, &[0], &[std::f64::consts::PI]).unwrap(),
            &[std::f64::consts::PI],
        )
        .unwrap();
        let p = tmpl.forward(&[std::f64::consts::PI, 0.0], &one).unwrap();
        assert!((p[0b10] - 1.0).abs() < 1e-14);

        // control |0⟩, θ2 = π: target flipped
        let p = tmpl.forward(&[0.0, std::f64::consts::PI], &zero).unwrap();
        assert!((p[0b01] - 1.0).abs() < 1e-14);

        assert!(pooling_stage(&[(0, 1), (1, 2)], 0).is_err());
        assert_eq!(pooling_stage(&[(0, 1), (2, 3)], 5).unwrap().iter().flat_map(|g| g.slots().to_vec()).collect::<Vec<_>>(), vec![5, 6, 5, 6]);
    }

    #[test]
    fn zero_parameters_concentrate_on_outcome_zero() {
        for c in SUPPORTED_CLASSES {
            let (_, t) = build_qcnn(c).unwrap();
            let p = forward(&t, &vec![0.0; t.slot_count()], &StateVector::zero_state(8).unwrap()).unwrap();
            assert_eq!(p.len(), t.outcome_count());
            assert!((p[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn no_gate_after_retirement() {
        for c in SUPPORTED_CLASSES {
            let (_, t) = build_qcnn(c).unwrap();
            t.check_retirement().unwrap();
        }
    }
}
