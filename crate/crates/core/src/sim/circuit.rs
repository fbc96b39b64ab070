use std::fmt::Write as _;

use super::gate::{Binding, GateInstruction};
use super::state::StateVector;
use crate::error::{Error, Result};

/// A wire leaves the live set once `after_gate` gates have been emitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Retirement {
    pub after_gate: usize,
    pub wire: usize,
}

/// Ordered gate sequence with parameter-slot bindings, retirement schedule and
/// measured wires. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitTemplate {
    n_qubits: usize,
    gates: Vec<GateInstruction>,
    slot_count: usize,
    measured_wires: Vec<usize>,
    retirements: Vec<Retirement>,
}

impl CircuitTemplate {
    pub fn new(
        n_qubits: usize,
        gates: Vec<GateInstruction>,
        slot_count: usize,
        measured_wires: Vec<usize>,
        retirements: Vec<Retirement>,
    ) -> Result<Self> {
        let template = Self {
            n_qubits,
            gates,
            slot_count,
            measured_wires,
            retirements,
        };
        template.validate()?;
        Ok(template)
    }

    fn validate(&self) -> Result<()> {
        for (i, g) in self.gates.iter().enumerate() {
            if let Some(&w) = g.wires.iter().find(|&&w| w >= self.n_qubits) {
                return Err(Error::invalid(format!(
                    "gate {i} ({}) touches wire {w} of {}",
                    g.kind, self.n_qubits
                )));
            }
            if let Some(&s) = g.slots().iter().find(|&&s| s >= self.slot_count) {
                return Err(Error::invalid(format!(
                    "gate {i} ({}) binds slot {s} of {}",
                    g.kind, self.slot_count
                )));
            }
        }
        for (i, &w) in self.measured_wires.iter().enumerate() {
            if w >= self.n_qubits || self.measured_wires[..i].contains(&w) {
                return Err(Error::invalid(format!("bad measured wire {w}")));
            }
            if self.retirements.iter().any(|r| r.wire == w) {
                return Err(Error::invalid(format!("measured wire {w} is retired")));
            }
        }
        self.check_retirement()
    }

    /// Fails if any gate touches a wire after that wire was retired.
    pub fn check_retirement(&self) -> Result<()> {
        for r in &self.retirements {
            if let Some((i, g)) = self
                .gates
                .iter()
                .enumerate()
                .skip(r.after_gate)
                .find(|(_, g)| g.wires.contains(&r.wire))
            {
                return Err(Error::invalid(format!(
                    "gate {i} ({}) touches wire {} retired after gate {}",
                    g.kind, r.wire, r.after_gate
                )));
            }
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[GateInstruction] {
        &self.gates
    }

    pub fn slot_count(&self) -> usize {
        self.slot_count
    }

    pub fn measured_wires(&self) -> &[usize] {
        &self.measured_wires
    }

    pub fn retirements(&self) -> &[Retirement] {
        &self.retirements
    }

    pub fn outcome_count(&self) -> usize {
        1 << self.measured_wires.len()
    }

    pub(crate) fn check_inputs(&self, params: &[f64], input: &StateVector) -> Result<()> {
        if params.len() != self.slot_count {
            return Err(Error::Shape(format!(
                "{} parameters for a template with {} slots",
                params.len(),
                self.slot_count
            )));
        }
        if input.n_qubits() != self.n_qubits {
            return Err(Error::Shape(format!(
                "{}-qubit input for a {}-qubit template",
                input.n_qubits(),
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// Final state after applying every gate to `input`.
    pub fn run(&self, params: &[f64], input: &StateVector) -> Result<StateVector> {
        self.check_inputs(params, input)?;
        let mut state = input.clone();
        for g in &self.gates {
            let angles = g.resolve_angles(params);
            state.apply_block(&g.kind.matrix(&angles), g.target(), g.control());
        }
        Ok(state)
    }

    /// Outcome probabilities over the measured wires.
    pub fn forward(&self, params: &[f64], input: &StateVector) -> Result<Vec<f64>> {
        self.run(params, input)?
            .marginal_probabilities(&self.measured_wires)
    }

    /// One gate per line: kind, wires, then bound slots or fixed angles.
    pub fn to_listing(&self) -> String {
        let mut out = String::new();
        let mut retire = self.retirements.iter().peekable();
        for (i, g) in self.gates.iter().enumerate() {
            while let Some(r) = retire.next_if(|r| r.after_gate == i) {
                let _ = writeln!(out, "RETIRE {}", r.wire);
            }
            let wires = join(g.wires.iter());
            let binding = match &g.binding {
                _ if g.kind.angle_count() == 0 => String::new(),
                Binding::Slots(s) => format!(" slots={}", join(s.iter())),
                Binding::Fixed(a) => format!(" angles={}", join(a.iter())),
            };
            let _ = writeln!(out, "{} {}{}", g.kind, wires, binding);
        }
        for r in retire {
            let _ = writeln!(out, "RETIRE {}", r.wire);
        }
        let _ = writeln!(out, "MEASURE {}", join(self.measured_wires.iter()));
        out
    }
}

fn join<T: ToString>(items: impl Iterator<Item = T>) -> String {
    items.map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}
