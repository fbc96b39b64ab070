//! Gate alphabet and the 2×2 blocks each gate applies to its target wire.
//!
//! Every gate in the alphabet acts as a single 2×2 matrix on one target wire,
//! optionally conditioned on a control wire being `|1⟩` or `|0⟩`. That keeps the
//! simulator kernel and its reverse pass down to one routine.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    /// `Rz(φ) Rx(−π/2) Rz(θ) Rx(π/2) Rz(λ)` with angles ordered `(θ, φ, λ)`.
    U3,
    Cnot,
    /// Rz on the target when the control is `|1⟩`.
    Crz,
    /// Rx on the target when the control is `|1⟩`.
    Crx,
    /// Rx on the target when the control is `|0⟩`.
    Crx0,
}

impl GateKind {
    pub fn angle_count(self) -> usize {
        match self {
            GateKind::Cnot => 0,
            GateKind::U3 => 3,
            _ => 1,
        }
    }

    pub fn wire_count(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::U3 => 1,
            _ => 2,
        }
    }

    /// Control value the gate conditions on, for two-wire kinds.
    pub fn control_value(self) -> Option<bool> {
        match self {
            GateKind::Cnot | GateKind::Crz | GateKind::Crx => Some(true),
            GateKind::Crx0 => Some(false),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::U3 => "U3",
            GateKind::Cnot => "CNOT",
            GateKind::Crz => "CRZ",
            GateKind::Crx => "CRX",
            GateKind::Crx0 => "CRX0",
        }
    }

    /// The 2×2 block acting on the target wire.
    pub fn matrix(self, angles: &[f64]) -> Mat2 {
        match self {
            GateKind::Rx | GateKind::Crx | GateKind::Crx0 => rx(angles[0]),
            GateKind::Ry => ry(angles[0]),
            GateKind::Rz | GateKind::Crz => rz(angles[0]),
            GateKind::U3 => u3(angles[0], angles[1], angles[2]),
            GateKind::Cnot => [[ZERO, ONE], [ONE, ZERO]],
        }
    }

    /// Derivative of the target block with respect to angle `which`.
    pub fn matrix_derivative(self, angles: &[f64], which: usize) -> Mat2 {
        match self {
            GateKind::Rx | GateKind::Crx | GateKind::Crx0 => drx(angles[0]),
            GateKind::Ry => dry(angles[0]),
            GateKind::Rz | GateKind::Crz => drz(angles[0]),
            GateKind::U3 => du3(angles[0], angles[1], angles[2], which),
            GateKind::Cnot => [[ZERO; 2]; 2],
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a gate's angles come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Binding {
    Fixed(Vec<f64>),
    Slots(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateInstruction {
    pub kind: GateKind,
    /// `[target]` for single-wire kinds, `[control, target]` otherwise.
    pub wires: Vec<usize>,
    pub binding: Binding,
}

impl GateInstruction {
    pub fn new(kind: GateKind, wires: Vec<usize>, binding: Binding) -> Result<Self> {
        if wires.len() != kind.wire_count() {
            return Err(Error::invalid(format!(
                "{kind} takes {} wire(s), got {}",
                kind.wire_count(),
                wires.len()
            )));
        }
        if wires.len() == 2 && wires[0] == wires[1] {
            return Err(Error::invalid(format!(
                "{kind} control and target are both wire {}",
                wires[0]
            )));
        }
        let bound = match &binding {
            Binding::Fixed(a) => a.len(),
            Binding::Slots(s) => s.len(),
        };
        if bound != kind.angle_count() {
            return Err(Error::invalid(format!(
                "{kind} takes {} angle(s), got {bound}",
                kind.angle_count()
            )));
        }
        Ok(Self {
            kind,
            wires,
            binding,
        })
    }

    /// Gate with angles bound to parameter slots.
    pub fn slotted(kind: GateKind, wires: &[usize], slots: &[usize]) -> Result<Self> {
        Self::new(kind, wires.to_vec(), Binding::Slots(slots.to_vec()))
    }

    /// Gate with literal angles.
    pub fn fixed(kind: GateKind, wires: &[usize], angles: &[f64]) -> Result<Self> {
        Self::new(kind, wires.to_vec(), Binding::Fixed(angles.to_vec()))
    }

    pub fn target(&self) -> usize {
        *self.wires.last().expect("gate has at least one wire")
    }

    pub fn control(&self) -> Option<(usize, bool)> {
        self.kind.control_value().map(|v| (self.wires[0], v))
    }

    pub fn slots(&self) -> &[usize] {
        match &self.binding {
            Binding::Slots(s) => s,
            Binding::Fixed(_) => &[],
        }
    }

    /// Resolves the gate's angles against a parameter vector.
    pub fn resolve_angles(&self, params: &[f64]) -> [f64; 3] {
        let mut out = [0.0; 3];
        match &self.binding {
            Binding::Fixed(a) => out[..a.len()].copy_from_slice(a),
            Binding::Slots(s) => {
                for (o, &slot) in out.iter_mut().zip(s) {
                    *o = params[slot];
                }
            }
        }
        out
    }
}

pub fn rx(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    let mis = Complex64::new(0.0, -s);
    [[c.into(), mis], [mis, c.into()]]
}

pub fn ry(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [[c.into(), (-s).into()], [s.into(), c.into()]]
}

pub fn rz(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [[Complex64::new(c, -s), ZERO], [ZERO, Complex64::new(c, s)]]
}

fn drx(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    let a = Complex64::new(-s / 2.0, 0.0);
    let b = Complex64::new(0.0, -c / 2.0);
    [[a, b], [b, a]]
}

fn dry(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [(-s / 2.0).into(), (-c / 2.0).into()],
        [(c / 2.0).into(), (-s / 2.0).into()],
    ]
}

fn drz(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    // d/dθ e^{∓iθ/2} = ∓(i/2) e^{∓iθ/2}
    [
        [Complex64::new(-s / 2.0, -c / 2.0), ZERO],
        [ZERO, Complex64::new(-s / 2.0, c / 2.0)],
    ]
}

fn u3_factors(theta: f64, phi: f64, lambda: f64) -> [Mat2; 5] {
    [
        rz(phi),
        rx(-FRAC_PI_2),
        rz(theta),
        rx(FRAC_PI_2),
        rz(lambda),
    ]
}

pub fn u3(theta: f64, phi: f64, lambda: f64) -> Mat2 {
    u3_factors(theta, phi, lambda)
        .iter()
        .fold(identity(), |acc, m| matmul(&acc, m))
}

fn du3(theta: f64, phi: f64, lambda: f64, which: usize) -> Mat2 {
    let mut f = u3_factors(theta, phi, lambda);
    match which {
        0 => f[2] = drz(theta),
        1 => f[0] = drz(phi),
        2 => f[4] = drz(lambda),
        _ => panic!("U3 has three angles, asked for derivative {which}"),
    }
    f.iter().fold(identity(), |acc, m| matmul(&acc, m))
}

pub fn identity() -> Mat2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

pub fn matmul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn dagger(m: &Mat2) -> Mat2 {
    [
        [m[0][0].conj(), m[1][0].conj()],
        [m[0][1].conj(), m[1][1].conj()],
    ]
}
