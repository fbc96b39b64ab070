//! Dense statevector simulation with analytic and finite-difference gradients.

mod circuit;
mod gate;
mod gradient;
mod state;

pub use circuit::{CircuitTemplate, Retirement};
pub use gate::{dagger, identity, matmul, rx, ry, rz, u3, Binding, GateInstruction, GateKind, Mat2};
pub use gradient::{finite_difference_gradient, loss_and_gradient, loss_gradient};
pub use state::{StateVector, MAX_QUBITS};
