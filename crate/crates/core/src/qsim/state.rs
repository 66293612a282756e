use serde::{Deserialize, Serialize};

use super::{check_state, qubit_mask, qubits_for_dim, C64, NORM_TOL};
use crate::error::{ReffError, Result};

/// Pure state on `n` qubits, stored as `2^n` amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// Checked constructor: length must be `2^n` and the norm within `NORM_TOL` of 1.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let n = qubits_for_dim(amps.len())?;
        check_state(n, "state vector")?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(ReffError::NotNormalized(norm));
        }
        Ok(Self { n, amps })
    }

    pub(crate) fn from_raw(n: usize, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n);
        Self { n, amps }
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_state(n, "state vector")?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(ReffError::DimensionMismatch { expected: dim, found: index });
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Tensor product of single-qubit states, factor 0 on qubit 0.
    pub fn product(factors: &[[C64; 2]]) -> Result<Self> {
        let n = factors.len();
        if n == 0 {
            return Err(crate::error::invalid("product state needs at least one factor"));
        }
        check_state(n, "state vector")?;
        let mut amps = vec![C64::new(1.0, 0.0)];
        for f in factors {
            let norm = (f[0].norm_sqr() + f[1].norm_sqr()).sqrt();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(ReffError::NotNormalized(norm));
            }
            let mut next = Vec::with_capacity(amps.len() * 2);
            for a in &amps {
                next.push(a * f[0]);
                next.push(a * f[1]);
            }
            amps = next;
        }
        Ok(Self { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `1 - |<target|self>|^2` computed as the squared norm of the component
    /// orthogonal to `target`, which keeps full relative precision near zero.
    pub fn infidelity_with(&self, target: &StateVector) -> f64 {
        let ov = target.inner(self);
        let rest: f64 = self.amps.iter().zip(&target.amps).map(|(a, t)| (a - ov * t).norm_sqr()).sum();
        let scale = self.norm_sqr_or_one();
        rest / scale
    }

    fn norm_sqr_or_one(&self) -> f64 {
        let s: f64 = self.amps.iter().map(|a| a.norm_sqr()).sum();
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    /// `<self| (|v><v| on qubit q, identity elsewhere) |self>`.
    pub fn qubit_projection(&self, q: usize, v: [C64; 2]) -> f64 {
        let m = qubit_mask(self.n, q);
        let (v0, v1) = (v[0].conj(), v[1].conj());
        let mut acc = 0.0;
        for i in 0..self.amps.len() {
            if i & m != 0 {
                continue;
            }
            let a = v0 * self.amps[i] + v1 * self.amps[i | m];
            acc += a.norm_sqr();
        }
        acc
    }

    /// Reduced density matrix of qubit `q`, as `[[r00, r01], [r10, r11]]`.
    pub fn reduced_qubit(&self, q: usize) -> [[C64; 2]; 2] {
        let m = qubit_mask(self.n, q);
        let mut r = [[C64::new(0.0, 0.0); 2]; 2];
        for i in 0..self.amps.len() {
            if i & m != 0 {
                continue;
            }
            let a0 = self.amps[i];
            let a1 = self.amps[i | m];
            r[0][0] += a0 * a0.conj();
            r[0][1] += a0 * a1.conj();
            r[1][0] += a1 * a0.conj();
            r[1][1] += a1 * a1.conj();
        }
        r
    }
}

/// `|<a|b>|^2`.
pub fn state_fidelity(a: &StateVector, b: &StateVector) -> f64 {
    a.inner(b).norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rejects_unnormalized_and_bad_length() {
        assert!(matches!(StateVector::new(vec![c(1.0, 0.0), c(1.0, 0.0)]), Err(ReffError::NotNormalized(_))));
        assert!(matches!(StateVector::new(vec![c(1.0, 0.0); 3]), Err(ReffError::NotPowerOfTwo(3))));
    }

    #[test]
    fn product_is_big_endian() {
        let zero = [c(1.0, 0.0), c(0.0, 0.0)];
        let one = [c(0.0, 0.0), c(1.0, 0.0)];
        let s = StateVector::product(&[one, zero, zero]).unwrap();
        assert_eq!(s.amps()[4], c(1.0, 0.0));
    }

    #[test]
    fn orthogonal_infidelity_matches_naive() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = StateVector::new(vec![c(h, 0.0), c(0.0, h)]).unwrap();
        let b = StateVector::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((a.infidelity_with(&b) - (1.0 - state_fidelity(&a, &b))).abs() < 1e-15);
    }

    #[test]
    fn qubit_projection_on_bell_state() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::new(vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]).unwrap();
        let p = bell.qubit_projection(1, [c(1.0, 0.0), c(0.0, 0.0)]);
        assert!((p - 0.5).abs() < 1e-15);
        let r = bell.reduced_qubit(0);
        assert!((r[0][0].re - 0.5).abs() < 1e-15 && r[0][1].norm() < 1e-15);
    }
}
