//! Simulations of quantum measurement: von Neumann premeasurement and collapse,
//! delayed-choice quantum-eraser detection statistics, a photon → observer → box →
//! photon measurement chain, and branch decoherence by a bath of qubits.
//!
//! ```
//! use collapse_lab::prelude::*;
//!
//! let s = std::f64::consts::FRAC_1_SQRT_2;
//! let psi = Ket::new(vec![2], vec![c(s, 0.0), c(s, 0.0)]).unwrap();
//! let plus = Projector::basis(&[2], &[0]).unwrap();
//! let probs = born_probabilities(&psi, &[plus.clone(), plus.complement()]).unwrap();
//! assert!((probs[0] - 0.5).abs() < 1e-12);
//! ```

pub mod acceptance;
pub mod chain;
pub mod decoherence;
pub mod eraser;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod measure;
pub mod metrics;
pub mod operator;
pub mod quad;
pub mod random;
pub mod state;
pub mod stats;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::fock::{coherent_state, expectation, number_operator};
    pub use crate::linalg::{c, CMatrix, CVector, C64, TOL};
    pub use crate::measure::{born_probabilities, collapse, evolve, measure, QuantumState};
    pub use crate::metrics::{purity, trace_distance};
    pub use crate::operator::{
        observable_from_projector, unitary_from_hamiltonian, Observable, Projector, UnitaryOp,
    };
    pub use crate::state::{partial_trace, tensor, DensityMatrix, Ket, Tensor};
}
