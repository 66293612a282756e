//! Dense and statevector primitives shared by every other module.
//!
//! Basis ordering is big-endian: qubit 0 is the most significant bit of a
//! basis index, so `|q0 q1 ... q_{n-1}>` has index `sum_q b_q 2^(n-1-q)`.

pub(crate) mod gate;
mod haar;
mod operator;
pub(crate) mod pauli;
mod rng;
mod state;
pub mod stats;

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{ReffError, Result};

pub use gate::{apply_gate, apply_gate_dense, GateMatrix};
pub use haar::{haar_random_state, haar_random_unitary, haar_single_qubit, random_hermitian};
pub use operator::{hermitian_exp, partial_trace, schatten_norm, DenseOperator, HermitianEigen, SchattenP};
pub use pauli::{Pauli, PauliString};
pub use rng::{RngSeed, SimRng};
pub use state::{state_fidelity, StateVector};

pub use num_complex::Complex64 as C64;

pub const DEFAULT_DENSE_CAP: usize = 10;
pub const STATE_CAP: usize = 14;

pub const UNITARY_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-12;

static DENSE_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_DENSE_CAP);

/// Largest qubit count for which dense `2^n x 2^n` operators are built.
pub fn dense_cap() -> usize {
    DENSE_CAP.load(Ordering::Relaxed)
}

pub fn set_dense_cap(n: usize) {
    DENSE_CAP.store(n, Ordering::Relaxed);
}

pub fn check_dense(n: usize, what: &'static str) -> Result<()> {
    let cap = dense_cap();
    if n > cap {
        return Err(ReffError::CapExceeded { what, n, cap });
    }
    Ok(())
}

pub fn check_state(n: usize, what: &'static str) -> Result<()> {
    if n > STATE_CAP {
        return Err(ReffError::CapExceeded { what, n, cap: STATE_CAP });
    }
    Ok(())
}

/// Bit mask of qubit `q` in an `n`-qubit basis index.
#[inline]
pub fn qubit_mask(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

pub(crate) fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(ReffError::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}
