use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{check_dense, qubit_mask, DenseOperator, StateVector, C64};
use crate::error::{invalid, ReffError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_index(k: usize) -> Pauli {
        Self::ALL[k & 3]
    }

    pub fn symbol(self) -> char {
        ['I', 'X', 'Y', 'Z'][self as usize]
    }
}

/// Tensor product of single-qubit Paulis; letter `q` acts on qubit `q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters }
    }

    pub fn identity(n: usize) -> Self {
        Self { letters: vec![Pauli::I; n] }
    }

    /// `P` on the listed qubits, identity elsewhere.
    pub fn on(n: usize, ops: &[(usize, Pauli)]) -> Result<Self> {
        let mut letters = vec![Pauli::I; n];
        for &(q, p) in ops {
            if q >= n {
                return Err(ReffError::QubitOutOfRange { index: q, n });
            }
            if letters[q] != Pauli::I {
                return Err(ReffError::DuplicateTarget(q));
            }
            letters[q] = p;
        }
        Ok(Self { letters })
    }

    /// String number `k` in base-4 lexicographic order, qubit 0 most significant.
    pub fn from_lex_index(n: usize, k: usize) -> Self {
        let letters = (0..n).map(|q| Pauli::from_index(k >> (2 * (n - 1 - q)))).collect();
        Self { letters }
    }

    pub fn n(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|p| **p != Pauli::I).count()
    }

    fn masks(&self) -> (usize, usize, u32) {
        let n = self.n();
        let (mut flip, mut sign, mut ny) = (0, 0, 0);
        for (q, p) in self.letters.iter().enumerate() {
            let m = qubit_mask(n, q);
            match p {
                Pauli::I => {}
                Pauli::X => flip |= m,
                Pauli::Y => {
                    flip |= m;
                    sign |= m;
                    ny += 1;
                }
                Pauli::Z => sign |= m,
            }
        }
        (flip, sign, ny)
    }

    /// `P|i> = phase |j>`; returns `(j, phase)`.
    pub fn act_on_basis(&self, i: usize) -> (usize, C64) {
        let (flip, sign, ny) = self.masks();
        (i ^ flip, phase_of(i, sign, ny))
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        self.check_width(state.n())?;
        let (flip, sign, ny) = self.masks();
        let amps = state.amps_mut();
        let src = amps.to_vec();
        for (i, a) in src.iter().enumerate() {
            amps[i ^ flip] = phase_of(i, sign, ny) * a;
        }
        Ok(())
    }

    /// `state <- exp(-i theta P) state = cos(theta) state - i sin(theta) P state`.
    pub fn apply_rotation(&self, state: &mut StateVector, theta: f64) -> Result<()> {
        self.check_width(state.n())?;
        apply_rotation_raw(self, state.amps_mut(), theta);
        Ok(())
    }

    pub fn to_dense(&self) -> Result<DenseOperator> {
        let n = self.n();
        check_dense(n, "Pauli string")?;
        let d = 1usize << n;
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            let (j, ph) = self.act_on_basis(i);
            data[j * d + i] = ph;
        }
        DenseOperator::from_row_major(n, &data)
    }

    fn check_width(&self, n: usize) -> Result<()> {
        if n != self.n() {
            return Err(ReffError::DimensionMismatch { expected: self.n(), found: n });
        }
        Ok(())
    }
}

fn phase_of(i: usize, sign: usize, ny: u32) -> C64 {
    let neg = (i & sign).count_ones() % 2 == 1;
    let base = match ny % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    };
    if neg {
        -base
    } else {
        base
    }
}

pub(crate) fn apply_rotation_raw(p: &PauliString, amps: &mut [C64], theta: f64) {
    let (flip, sign, ny) = p.masks();
    let (c, s) = (theta.cos(), theta.sin());
    let mis = C64::new(0.0, -s);
    if flip == 0 {
        for (i, a) in amps.iter_mut().enumerate() {
            *a *= c + mis * phase_of(i, sign, ny);
        }
        return;
    }
    for i in 0..amps.len() {
        let j = i ^ flip;
        if j < i {
            continue;
        }
        // (P psi)[j] = phase(i) psi[i], (P psi)[i] = phase(j) psi[j]
        let (ai, aj) = (amps[i], amps[j]);
        amps[i] = c * ai + mis * phase_of(j, sign, ny) * aj;
        amps[j] = c * aj + mis * phase_of(i, sign, ny) * ai;
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = ReffError;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|ch| match ch {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(invalid(format!("bad Pauli letter {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(invalid("empty Pauli string"));
        }
        Ok(Self { letters })
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn single_qubit_matrices() {
        let y = PauliString::from_str("Y").unwrap().to_dense().unwrap();
        assert_eq!(y.get(0, 1), c(0.0, -1.0));
        assert_eq!(y.get(1, 0), c(0.0, 1.0));
        let z = PauliString::from_str("Z").unwrap().to_dense().unwrap();
        assert_eq!(z.get(1, 1), c(-1.0, 0.0));
    }

    #[test]
    fn xy_product_is_kron() {
        let x = PauliString::from_str("X").unwrap().to_dense().unwrap();
        let y = PauliString::from_str("Y").unwrap().to_dense().unwrap();
        let xy = PauliString::from_str("XY").unwrap().to_dense().unwrap();
        assert_eq!(xy, x.kron(&y).unwrap());
    }

    #[test]
    fn lex_index_order() {
        assert_eq!(PauliString::from_lex_index(2, 0).to_string(), "II");
        assert_eq!(PauliString::from_lex_index(2, 1).to_string(), "IX");
        assert_eq!(PauliString::from_lex_index(2, 4).to_string(), "XI");
        assert_eq!(PauliString::from_lex_index(2, 15).to_string(), "ZZ");
    }

    #[test]
    fn rotation_matches_dense_exponential() {
        let p = PauliString::from_str("XYZ").unwrap();
        let theta = 0.731;
        let u = crate::qsim::hermitian_exp(&p.to_dense().unwrap(), theta).unwrap();
        for i in 0..8 {
            let mut s = StateVector::basis(3, i).unwrap();
            p.apply_rotation(&mut s, theta).unwrap();
            let expect = u.apply(&StateVector::basis(3, i).unwrap()).unwrap();
            for (a, b) in s.amps().iter().zip(expect.amps()) {
                assert!((a - b).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn serde_round_trip() {
        let p = PauliString::from_str("IXYZ").unwrap();
        let j = serde_json::to_string(&p).unwrap();
        assert_eq!(j, "\"IXYZ\"");
        assert_eq!(serde_json::from_str::<PauliString>(&j).unwrap(), p);
        assert!(PauliString::from_str("XQ").is_err());
    }
}
