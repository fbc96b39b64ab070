use num_complex::Complex64;

use super::gate::{GateInstruction, Mat2};
use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 10;

/// Dense pure state over `n_qubits` wires.
///
/// Basis index bit `n_qubits - 1 - w` holds wire `w`, so wire 0 is the most
/// significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

fn check_qubits(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::invalid(format!(
            "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

impl StateVector {
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Takes amplitudes verbatim. They must already have unit norm.
    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_qubits(n_qubits)?;
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::invalid(format!(
                "{} amplitudes for {n_qubits} qubits",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "amplitudes have squared norm {norm}, expected 1"
            )));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub(crate) fn bit(&self, wire: usize) -> usize {
        1 << (self.n_qubits - 1 - wire)
    }

    fn check_wires(&self, gate: &GateInstruction) -> Result<()> {
        for &w in &gate.wires {
            if w >= self.n_qubits {
                return Err(Error::invalid(format!(
                    "{} touches wire {w} on a {}-qubit state",
                    gate.kind, self.n_qubits
                )));
            }
        }
        Ok(())
    }

    /// Applies `gate` with already-resolved angles.
    pub fn apply_gate(&mut self, gate: &GateInstruction, angles: &[f64]) -> Result<()> {
        self.check_wires(gate)?;
        if angles.len() < gate.kind.angle_count() {
            return Err(Error::invalid(format!(
                "{} needs {} angle(s), got {}",
                gate.kind,
                gate.kind.angle_count(),
                angles.len()
            )));
        }
        let m = gate.kind.matrix(angles);
        self.apply_block(&m, gate.target(), gate.control());
        Ok(())
    }

    /// Applies a 2×2 block on `target`, restricted to the subspace where the
    /// control wire (if any) holds the given value. Wires are assumed valid.
    pub(crate) fn apply_block(&mut self, m: &Mat2, target: usize, control: Option<(usize, bool)>) {
        let t = self.bit(target);
        let (cmask, cwant) = match control {
            Some((c, v)) => (self.bit(c), if v { self.bit(c) } else { 0 }),
            None => (0, 0),
        };
        let dim = self.amplitudes.len();
        let amps = &mut self.amplitudes;
        let mut base = 0;
        while base < dim {
            for i in base..base + t {
                if i & cmask != cwant {
                    continue;
                }
                let a0 = amps[i];
                let a1 = amps[i + t];
                amps[i] = m[0][0] * a0 + m[0][1] * a1;
                amps[i + t] = m[1][0] * a0 + m[1][1] * a1;
            }
            base += 2 * t;
        }
    }

    /// Outcome distribution over `kept_wires`; the first listed wire is the
    /// most significant bit of the outcome index.
    pub fn marginal_probabilities(&self, kept_wires: &[usize]) -> Result<Vec<f64>> {
        for (i, &w) in kept_wires.iter().enumerate() {
            if w >= self.n_qubits {
                return Err(Error::invalid(format!(
                    "kept wire {w} on a {}-qubit state",
                    self.n_qubits
                )));
            }
            if kept_wires[..i].contains(&w) {
                return Err(Error::invalid(format!("kept wire {w} listed twice")));
            }
        }
        let index = OutcomeIndex::new(self.n_qubits, kept_wires);
        let mut out = vec![0.0; 1 << kept_wires.len()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            out[index.outcome(i)] += a.norm_sqr();
        }
        Ok(out)
    }
}

/// Maps a basis index to its outcome index over a set of kept wires.
#[derive(Debug, Clone)]
pub(crate) struct OutcomeIndex {
    masks: Vec<usize>,
}

impl OutcomeIndex {
    pub(crate) fn new(n_qubits: usize, kept_wires: &[usize]) -> Self {
        Self {
            masks: kept_wires.iter().map(|&w| 1 << (n_qubits - 1 - w)).collect(),
        }
    }

    #[inline]
    pub(crate) fn outcome(&self, basis: usize) -> usize {
        self.masks
            .iter()
            .fold(0, |k, &m| (k << 1) | usize::from(basis & m != 0))
    }
}
