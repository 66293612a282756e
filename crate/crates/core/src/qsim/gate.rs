use super::{qubit_mask, DenseOperator, StateVector, C64};
use crate::error::{ReffError, Result};

/// Matrix of a `k`-qubit gate in the big-endian local basis of its targets.
#[derive(Debug, Clone, PartialEq)]
pub enum GateMatrix {
    Diagonal(Vec<C64>),
    /// Row-major `2^k x 2^k`.
    Dense(Vec<C64>),
}

impl GateMatrix {
    pub fn dim(&self) -> usize {
        match self {
            GateMatrix::Diagonal(d) => d.len(),
            GateMatrix::Dense(m) => (m.len() as f64).sqrt().round() as usize,
        }
    }

    pub fn adjoint(&self) -> GateMatrix {
        match self {
            GateMatrix::Diagonal(d) => GateMatrix::Diagonal(d.iter().map(|z| z.conj()).collect()),
            GateMatrix::Dense(m) => {
                let k = self.dim();
                let mut out = vec![C64::new(0.0, 0.0); k * k];
                for r in 0..k {
                    for c in 0..k {
                        out[c * k + r] = m[r * k + c].conj();
                    }
                }
                GateMatrix::Dense(out)
            }
        }
    }

    pub fn to_dense(&self) -> Vec<C64> {
        match self {
            GateMatrix::Dense(m) => m.clone(),
            GateMatrix::Diagonal(d) => {
                let k = d.len();
                let mut out = vec![C64::new(0.0, 0.0); k * k];
                for (i, z) in d.iter().enumerate() {
                    out[i * k + i] = *z;
                }
                out
            }
        }
    }
}

/// Applies `gate` to `targets` of `state`; `targets[0]` is the most
/// significant bit of the gate's local index.
pub fn apply_gate(state: &mut StateVector, gate: &GateMatrix, targets: &[usize]) -> Result<()> {
    let n = state.n();
    check_targets(n, targets)?;
    let expected = 1usize << targets.len();
    if gate.dim() != expected || matches!(gate, GateMatrix::Dense(m) if m.len() != expected * expected) {
        return Err(ReffError::DimensionMismatch { expected, found: gate.dim() });
    }
    apply_raw(state.amps_mut(), n, gate, targets);
    Ok(())
}

pub fn apply_gate_dense(state: &mut StateVector, gate: &DenseOperator, targets: &[usize]) -> Result<()> {
    let g = GateMatrix::Dense(gate.to_row_major());
    apply_gate(state, &g, targets)
}

pub(crate) fn check_targets(n: usize, targets: &[usize]) -> Result<()> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= n {
            return Err(ReffError::QubitOutOfRange { index: t, n });
        }
        if targets[..i].contains(&t) {
            return Err(ReffError::DuplicateTarget(t));
        }
    }
    Ok(())
}

pub(crate) fn apply_raw(amps: &mut [C64], n: usize, gate: &GateMatrix, targets: &[usize]) {
    match (gate, targets.len()) {
        (GateMatrix::Diagonal(d), _) => apply_diagonal(amps, n, d, targets),
        (GateMatrix::Dense(m), 1) => apply_1q(amps, qubit_mask(n, targets[0]), m),
        (GateMatrix::Dense(m), 2) => apply_2q(amps, qubit_mask(n, targets[0]), qubit_mask(n, targets[1]), m),
        (GateMatrix::Dense(m), _) => apply_general(amps, n, m, targets),
    }
}

fn apply_diagonal(amps: &mut [C64], n: usize, d: &[C64], targets: &[usize]) {
    let masks: Vec<usize> = targets.iter().map(|&t| qubit_mask(n, t)).collect();
    for (i, a) in amps.iter_mut().enumerate() {
        let mut l = 0;
        for m in &masks {
            l = (l << 1) | usize::from(i & m != 0);
        }
        *a *= d[l];
    }
}

fn apply_1q(amps: &mut [C64], m: usize, g: &[C64]) {
    for i in 0..amps.len() {
        if i & m != 0 {
            continue;
        }
        let a0 = amps[i];
        let a1 = amps[i | m];
        amps[i] = g[0] * a0 + g[1] * a1;
        amps[i | m] = g[2] * a0 + g[3] * a1;
    }
}

fn apply_2q(amps: &mut [C64], m0: usize, m1: usize, g: &[C64]) {
    let both = m0 | m1;
    for i in 0..amps.len() {
        if i & both != 0 {
            continue;
        }
        let idx = [i, i | m1, i | m0, i | both];
        let a = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
        for r in 0..4 {
            let row = &g[r * 4..r * 4 + 4];
            amps[idx[r]] = row[0] * a[0] + row[1] * a[1] + row[2] * a[2] + row[3] * a[3];
        }
    }
}

fn apply_general(amps: &mut [C64], n: usize, g: &[C64], targets: &[usize]) {
    let k = targets.len();
    let dim = 1usize << k;
    let masks: Vec<usize> = targets.iter().map(|&t| qubit_mask(n, t)).collect();
    let all: usize = masks.iter().sum();
    let offsets: Vec<usize> = (0..dim).map(|l| (0..k).filter(|j| (l >> (k - 1 - j)) & 1 == 1).map(|j| masks[j]).sum()).collect();
    let mut buf = vec![C64::new(0.0, 0.0); dim];
    for i in 0..amps.len() {
        if i & all != 0 {
            continue;
        }
        for (l, off) in offsets.iter().enumerate() {
            buf[l] = amps[i + off];
        }
        for (r, off) in offsets.iter().enumerate() {
            let row = &g[r * dim..(r + 1) * dim];
            amps[i + off] = row.iter().zip(&buf).map(|(x, y)| x * y).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn cnot() -> GateMatrix {
        let (o, l) = (c(0.0), c(1.0));
        GateMatrix::Dense(vec![l, o, o, o, o, l, o, o, o, o, o, l, o, o, l, o])
    }

    #[test]
    fn cnot_control_is_first_target() {
        // |10> -> |11> with control on qubit 0.
        let mut s = StateVector::basis(2, 2).unwrap();
        apply_gate(&mut s, &cnot(), &[0, 1]).unwrap();
        assert_eq!(s.amps()[3], c(1.0));
        // Reversed targets make qubit 1 the control: |01> -> |11>.
        let mut s = StateVector::basis(2, 1).unwrap();
        apply_gate(&mut s, &cnot(), &[1, 0]).unwrap();
        assert_eq!(s.amps()[3], c(1.0));
    }

    #[test]
    fn general_path_agrees_with_two_qubit_path() {
        let mut a = StateVector::basis(3, 5).unwrap();
        let mut b = a.clone();
        let g = cnot();
        apply_gate(&mut a, &g, &[2, 0]).unwrap();
        let GateMatrix::Dense(m) = &g else { unreachable!() };
        apply_general(b.amps_mut(), 3, m, &[2, 0]);
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_targets() {
        let mut s = StateVector::basis(2, 0).unwrap();
        assert!(matches!(apply_gate(&mut s, &cnot(), &[0, 0]), Err(ReffError::DuplicateTarget(0))));
        assert!(matches!(apply_gate(&mut s, &cnot(), &[0, 2]), Err(ReffError::QubitOutOfRange { index: 2, n: 2 })));
    }
}
