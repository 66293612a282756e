//! Classical simulator for resource-efficient fast-forwarding (REFF).
//!
//! A Trotterized short-time evolution `U(dt)` is compiled into a diagonalizing
//! ansatz `V(t) = W D(t) W^dag` trained on product-state data, so that long-time
//! evolution only rescales the angles of `D`.

pub mod ansatz;
pub mod bounds;
pub mod cost;
pub mod data;
pub mod error;
pub mod eval;
pub mod hamiltonian;
pub mod qsim;
pub mod train;
pub mod verify;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use ansatz::{CircuitStats, GateKind, GateSpec, ParamCircuit, VffAnsatz};
pub use bounds::{BoundKind, BoundReport, Threshold};
pub use cost::{CostKind, CostValue};
pub use data::{Dataset, InputSource, TrainingPair};
pub use error::{ReffError, Result};
pub use eval::{FastForwardPlan, PauliWeights, Reference, SeriesPoint};
pub use hamiltonian::{PauliSumHamiltonian, TrotterConfig};
pub use qsim::{DenseOperator, Pauli, PauliString, RngSeed, StateVector, C64};
pub use train::{OptimizerKind, TrainConfig, TrainOutcome, TrainTrace};
