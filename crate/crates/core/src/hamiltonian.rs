//! Pauli-sum Hamiltonians, spin-chain builders and product-formula evolution.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, ReffError, Result};
use crate::qsim::{self, DenseOperator, Pauli, PauliString, StateVector, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coeff: f64,
    pub pauli: PauliString,
}

/// `H = sum_k c_k P_k` with real coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawHamiltonian")]
pub struct PauliSumHamiltonian {
    n: usize,
    terms: Vec<PauliTerm>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHamiltonian {
    n: usize,
    terms: Vec<PauliTerm>,
}

impl TryFrom<RawHamiltonian> for PauliSumHamiltonian {
    type Error = ReffError;

    fn try_from(raw: RawHamiltonian) -> Result<Self> {
        PauliSumHamiltonian::new(raw.n, raw.terms)
    }
}

impl PauliSumHamiltonian {
    /// Zero-coefficient terms are dropped; order is otherwise kept.
    pub fn new(n: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("Hamiltonian needs at least one qubit"));
        }
        let mut kept = Vec::with_capacity(terms.len());
        for t in terms {
            if t.pauli.n() != n {
                return Err(ReffError::DimensionMismatch { expected: n, found: t.pauli.n() });
            }
            if !t.coeff.is_finite() {
                return Err(ReffError::NonFinite("Hamiltonian coefficient"));
            }
            if t.coeff != 0.0 {
                kept.push(t);
            }
        }
        Ok(Self { n, terms: kept })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn to_dense(&self) -> Result<DenseOperator> {
        qsim::check_dense(self.n, "Hamiltonian")?;
        let d = 1usize << self.n;
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for t in &self.terms {
            for i in 0..d {
                let (j, ph) = t.pauli.act_on_basis(i);
                data[j * d + i] += ph * t.coeff;
            }
        }
        DenseOperator::from_row_major(self.n, &data)
    }
}

fn bonds(n: usize, periodic: bool) -> Result<Vec<(usize, usize)>> {
    if n < 2 {
        return Err(invalid("spin chains need n >= 2"));
    }
    let mut b: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    if periodic {
        b.push((n - 1, 0));
    }
    Ok(b)
}

fn chain(n: usize, periodic: bool, coeff: f64, letters: &[Pauli]) -> Result<PauliSumHamiltonian> {
    let mut terms = Vec::new();
    for (i, j) in bonds(n, periodic)? {
        for &p in letters {
            terms.push(PauliTerm { coeff, pauli: PauliString::on(n, &[(i, p), (j, p)])? });
        }
    }
    PauliSumHamiltonian::new(n, terms)
}

/// `sum_i X_i X_{i+1} + Y_i Y_{i+1}`. With `periodic` the wrap bond `(n-1, 0)`
/// is added last, so `n = 2` periodic repeats the single bond.
pub fn build_xy_chain(n: usize, periodic: bool) -> Result<PauliSumHamiltonian> {
    chain(n, periodic, 1.0, &[Pauli::X, Pauli::Y])
}

/// `(1/4) sum_i X_i X_{i+1} + Y_i Y_{i+1} + Z_i Z_{i+1}`.
pub fn build_heisenberg_chain(n: usize, periodic: bool) -> Result<PauliSumHamiltonian> {
    chain(n, periodic, 0.25, &[Pauli::X, Pauli::Y, Pauli::Z])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrotterConfig {
    pub dt: f64,
    #[serde(default = "default_order")]
    pub order: u8,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

fn default_order() -> u8 {
    2
}

fn default_steps() -> usize {
    1
}

impl TrotterConfig {
    pub fn new(dt: f64, order: u8, steps: usize) -> Self {
        Self { dt, order, steps }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !matches!(self.order, 1 | 2) {
            return Err(invalid(format!("Trotter order must be 1 or 2, got {}", self.order)));
        }
        if self.steps == 0 {
            return Err(invalid("Trotter steps must be at least 1"));
        }
        Ok(())
    }

    /// Same order and step count at a different step size.
    pub fn with_dt(&self, dt: f64) -> Self {
        Self { dt, ..*self }
    }
}

/// Rotations `(term index, angle)` in application order; each is
/// `exp(-i angle P_k)`.
pub fn trotter_sequence(h: &PauliSumHamiltonian, cfg: &TrotterConfig) -> Result<Vec<(usize, f64)>> {
    cfg.validate()?;
    let tau = cfg.dt / cfg.steps as f64;
    let m = h.terms.len();
    let mut seq = Vec::with_capacity(cfg.steps * m * cfg.order as usize);
    for _ in 0..cfg.steps {
        if cfg.order == 1 {
            seq.extend(h.terms.iter().enumerate().map(|(k, t)| (k, t.coeff * tau)));
        } else {
            seq.extend(h.terms.iter().enumerate().map(|(k, t)| (k, t.coeff * tau / 2.0)));
            seq.extend(h.terms.iter().enumerate().rev().map(|(k, t)| (k, t.coeff * tau / 2.0)));
        }
    }
    Ok(seq)
}

/// Applies the Trotter circuit to `state` in place.
pub fn apply_trotter(h: &PauliSumHamiltonian, cfg: &TrotterConfig, state: &mut StateVector) -> Result<()> {
    if state.n() != h.n {
        return Err(ReffError::DimensionMismatch { expected: h.n, found: state.n() });
    }
    for (k, angle) in trotter_sequence(h, cfg)? {
        qsim::pauli::apply_rotation_raw(&h.terms[k].pauli, state.amps_mut(), angle);
    }
    Ok(())
}

pub fn trotter_unitary(h: &PauliSumHamiltonian, cfg: &TrotterConfig) -> Result<DenseOperator> {
    let seq = trotter_sequence(h, cfg)?;
    DenseOperator::from_columns(h.n, |j| {
        let mut s = StateVector::basis(h.n, j)?;
        for &(k, angle) in &seq {
            qsim::pauli::apply_rotation_raw(&h.terms[k].pauli, s.amps_mut(), angle);
        }
        Ok(s)
    })
}

/// `|| U_trot(dt) - exp(-i H dt) ||_2` (Frobenius).
pub fn trotter_error(h: &PauliSumHamiltonian, cfg: &TrotterConfig) -> Result<f64> {
    let u = trotter_unitary(h, cfg)?;
    let exact = qsim::hermitian_exp(&h.to_dense()?, cfg.dt)?;
    Ok(u.sub(&exact)?.frobenius_norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_counts_and_order() {
        for n in 2..=6 {
            assert_eq!(build_xy_chain(n, false).unwrap().terms().len(), 2 * (n - 1));
            assert_eq!(build_xy_chain(n, true).unwrap().terms().len(), 2 * n);
            assert_eq!(build_heisenberg_chain(n, false).unwrap().terms().len(), 3 * (n - 1));
        }
        let h = build_heisenberg_chain(3, true).unwrap();
        let names: Vec<String> = h.terms().iter().map(|t| t.pauli.to_string()).collect();
        assert_eq!(names, ["XXI", "YYI", "ZZI", "IXX", "IYY", "IZZ", "XIX", "YIY", "ZIZ"]);
        assert!(h.terms().iter().all(|t| t.coeff == 0.25));
    }

    #[test]
    fn single_term_trotter_is_exact() {
        let h = PauliSumHamiltonian::new(2, vec![PauliTerm { coeff: 0.7, pauli: "XZ".parse().unwrap() }]).unwrap();
        for order in [1, 2] {
            assert!(trotter_error(&h, &TrotterConfig::new(0.3, order, 1)).unwrap() < 1e-13);
        }
    }

    #[test]
    fn trotter_unitary_is_unitary() {
        let h = build_heisenberg_chain(4, true).unwrap();
        let u = trotter_unitary(&h, &TrotterConfig::new(0.1, 2, 3)).unwrap();
        assert!(u.unitarity_error() < 1e-12);
    }

    // XX and YY on one bond commute, so the two-qubit XY chain has no Trotter error.
    #[test]
    fn two_qubit_xy_is_commuting() {
        let h = build_xy_chain(2, false).unwrap();
        assert!(trotter_error(&h, &TrotterConfig::new(0.1, 2, 10)).unwrap() < 1e-13);
        assert!(trotter_error(&h, &TrotterConfig::new(0.5, 1, 1)).unwrap() < 1e-13);
    }

    #[test]
    fn second_order_error_scales_cubically() {
        for n in [3, 4] {
            let h = build_xy_chain(n, false).unwrap();
            let e1 = trotter_error(&h, &TrotterConfig::new(0.1, 2, 1)).unwrap();
            let e2 = trotter_error(&h, &TrotterConfig::new(0.05, 2, 1)).unwrap();
            let ratio = e1 / e2;
            assert!((6.0..=10.0).contains(&ratio), "n={n} ratio {ratio}");
        }
    }

    #[test]
    fn first_order_error_scales_quadratically() {
        let h = build_heisenberg_chain(3, false).unwrap();
        let e1 = trotter_error(&h, &TrotterConfig::new(0.1, 1, 1)).unwrap();
        let e2 = trotter_error(&h, &TrotterConfig::new(0.05, 1, 1)).unwrap();
        assert!((3.0..=5.0).contains(&(e1 / e2)));
    }

    #[test]
    fn serde_round_trip_rejects_unknown_keys() {
        let h = build_xy_chain(3, true).unwrap();
        let s = serde_json::to_string(&h).unwrap();
        assert_eq!(serde_json::from_str::<PauliSumHamiltonian>(&s).unwrap(), h);
        let bad = r#"{"n":1,"terms":[],"extra":1}"#;
        assert!(serde_json::from_str::<PauliSumHamiltonian>(bad).is_err());
        let bad_width = r#"{"n":2,"terms":[{"coeff":1.0,"pauli":"X"}]}"#;
        assert!(serde_json::from_str::<PauliSumHamiltonian>(bad_width).is_err());
    }

    #[test]
    fn invalid_trotter_config() {
        assert!(TrotterConfig::new(0.0, 2, 1).validate().is_err());
        assert!(TrotterConfig::new(0.1, 3, 1).validate().is_err());
        assert!(TrotterConfig::new(0.1, 1, 0).validate().is_err());
    }
}
