//! Empirical training costs and closed-form expected costs.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{run, Compiled, VffAnsatz};
use crate::data::Dataset;
use crate::error::{ReffError, Result};
use crate::qsim::stats::{mean_stderr, pairwise_sum};
use crate::qsim::{haar_single_qubit, partial_trace, DenseOperator, StateVector, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CostKind {
    Global,
    Local,
}

/// Tolerance beyond which an out-of-range raw cost is flagged.
pub const RANGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostValue {
    pub kind: String,
    /// Clamped to `[0, 1]`.
    pub value: f64,
    pub raw: f64,
    pub stderr: Option<f64>,
    /// Set when `raw` left `[0, 1]` by more than `RANGE_TOL`.
    pub anomaly: bool,
}

impl CostValue {
    pub fn new(kind: impl Into<String>, raw: f64, stderr: Option<f64>) -> Self {
        Self {
            kind: kind.into(),
            value: raw.clamp(0.0, 1.0),
            raw,
            stderr,
            anomaly: !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(&raw),
        }
    }
}

fn orth(v: [C64; 2]) -> [C64; 2] {
    [-v[1].conj(), v[0].conj()]
}

/// Cost of `V = fwd` (with `adj = V^dag`) on the dataset.
pub(crate) fn compiled_cost(kind: CostKind, fwd: &[Compiled], adj: &[Compiled], data: &Dataset) -> Result<f64> {
    let per: Vec<f64> = match kind {
        CostKind::Global => data
            .pairs
            .iter()
            .map(|p| {
                let mut s = p.input.clone();
                run(fwd, &mut s);
                s.infidelity_with(&p.output)
            })
            .collect(),
        CostKind::Local => {
            let n = data.n as f64;
            data.pairs
                .iter()
                .map(|p| {
                    let f = p.factors.as_ref().ok_or(ReffError::MissingFactors)?;
                    let mut chi = p.output.clone();
                    run(adj, &mut chi);
                    let miss: f64 = f.iter().enumerate().map(|(q, v)| chi.qubit_projection(q, orth(*v))).sum();
                    Ok(miss / n)
                })
                .collect::<Result<_>>()?
        }
    };
    if data.pairs.is_empty() {
        return Err(crate::error::invalid("empty dataset"));
    }
    Ok(pairwise_sum(&per) / per.len() as f64)
}

/// Cost of `W(theta_l) D(t) W(theta_r)^dag`.
pub fn split_cost(
    kind: CostKind,
    a: &VffAnsatz,
    theta_l: &[f64],
    gamma: &[f64],
    theta_r: &[f64],
    t: f64,
    data: &Dataset,
) -> Result<f64> {
    check_data(a, data)?;
    let fwd = if kind == CostKind::Global { a.compile_split(theta_l, gamma, theta_r, t)? } else { Vec::new() };
    let adj = if kind == CostKind::Local { a.compile_split_adjoint(theta_l, gamma, theta_r, t)? } else { Vec::new() };
    compiled_cost(kind, &fwd, &adj, data)
}

fn check_data(a: &VffAnsatz, data: &Dataset) -> Result<()> {
    if a.n() != data.n {
        return Err(ReffError::DimensionMismatch { expected: a.n(), found: data.n });
    }
    Ok(())
}

/// `(1/N) sum_j (1 - |<Phi_j| V |Psi_j>|^2)`.
pub fn cost_global_empirical(a: &VffAnsatz, theta: &[f64], gamma: &[f64], t: f64, data: &Dataset) -> Result<f64> {
    split_cost(CostKind::Global, a, theta, gamma, theta, t, data)
}

/// `1 - (1/(nN)) sum_j sum_i <chi_j| (|psi_ij><psi_ij| (x) 1) |chi_j>` with `chi_j = V^dag |Phi_j>`.
pub fn cost_local_empirical(a: &VffAnsatz, theta: &[f64], gamma: &[f64], t: f64, data: &Dataset) -> Result<f64> {
    split_cost(CostKind::Local, a, theta, gamma, theta, t, data)
}

pub fn empirical_cost(kind: CostKind, a: &VffAnsatz, theta: &[f64], gamma: &[f64], t: f64, data: &Dataset) -> Result<f64> {
    split_cost(kind, a, theta, gamma, theta, t, data)
}

fn check_pair(u: &DenseOperator, v: &DenseOperator) -> Result<()> {
    if u.dim() != v.dim() {
        return Err(ReffError::DimensionMismatch { expected: u.dim(), found: v.dim() });
    }
    Ok(())
}

/// `Tr(u^dag v)`.
pub fn hs_inner(u: &DenseOperator, v: &DenseOperator) -> C64 {
    u.matrix().iter().zip(v.matrix().iter()).map(|(a, b)| a.conj() * b).sum()
}

/// `1 - |Tr(u^dag v)|^2 / d^2`.
pub fn cost_hst(u: &DenseOperator, v: &DenseOperator) -> Result<f64> {
    check_pair(u, v)?;
    let d = u.dim() as f64;
    Ok(1.0 - hs_inner(u, v).norm_sqr() / (d * d))
}

/// Haar average over all input states of the global cost: `d/(d+1) C_HST`.
pub fn expected_entangled_global(u: &DenseOperator, v: &DenseOperator) -> Result<f64> {
    let d = u.dim() as f64;
    Ok(d / (d + 1.0) * cost_hst(u, v)?)
}

/// Average gate fidelity `1 - d/(d+1) C_HST`.
pub fn average_fidelity(u: &DenseOperator, v: &DenseOperator) -> Result<f64> {
    Ok(1.0 - expected_entangled_global(u, v)?)
}

/// Average over Haar product inputs of the global cost,
/// `1 - 6^-n sum_A Tr[Tr_{A^c}(W) Tr_{A^c}(W^dag)]` with `W = u^dag v`.
/// Subsets are visited in Gray-code order, each partial trace recomputed.
pub fn expected_product_global(u: &DenseOperator, v: &DenseOperator) -> Result<f64> {
    check_pair(u, v)?;
    let n = u.n();
    let w = u.adjoint().mul(v)?;
    let mut terms = Vec::with_capacity(1 << n);
    for k in 0u64..(1 << n) {
        let gray = k ^ (k >> 1);
        let keep: Vec<usize> = (0..n).filter(|q| (gray >> q) & 1 == 1).collect();
        let r = partial_trace(&w, &keep)?;
        terms.push(r.frobenius_norm().powi(2));
    }
    Ok(1.0 - pairwise_sum(&terms) / 6f64.powi(n as i32))
}

/// Monte-Carlo estimate of the local cost averaged over Haar product inputs.
pub fn expected_product_local_mc(u: &DenseOperator, v: &DenseOperator, samples: usize, rng: &mut impl Rng) -> Result<CostValue> {
    check_pair(u, v)?;
    let n = u.n();
    let vd = v.adjoint();
    let mut vals = Vec::with_capacity(samples);
    for _ in 0..samples {
        let f: Vec<[C64; 2]> = (0..n).map(|_| haar_single_qubit(rng)).collect();
        let psi = StateVector::product(&f)?;
        let chi = vd.apply(&u.apply(&psi)?)?;
        let miss: f64 = f.iter().enumerate().map(|(q, v)| chi.qubit_projection(q, orth(*v))).sum();
        vals.push(miss / n as f64);
    }
    let (m, se) = mean_stderr(&vals);
    Ok(CostValue::new("PRODUCT_LOCAL_MC", m, Some(se)))
}

/// Product-input global cost of `u^(x)n` vs `v^(x)n` from their HST cost `c`:
/// `1 - 6^-n (2 + 4 (1 - c)^(1/n))^n`.
pub fn tensor_power_cost_relation(c: f64, n: usize) -> f64 {
    let nf = n as f64;
    1.0 - (2.0 + 4.0 * (1.0 - c).max(0.0).powf(1.0 / nf)).powf(nf) / 6f64.powf(nf)
}

/// Parallel map over many `(u, v)` pairs, kept in input order.
pub fn batch<T: Send>(
    pairs: &[(DenseOperator, DenseOperator)],
    f: impl Fn(&DenseOperator, &DenseOperator) -> T + Sync,
) -> Vec<T> {
    pairs.par_iter().map(|(u, v)| f(u, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{haar_random_unitary, RngSeed};

    fn pauli(s: &str) -> DenseOperator {
        s.parse::<crate::PauliString>().unwrap().to_dense().unwrap()
    }

    #[test]
    fn worked_values() {
        let id1 = DenseOperator::identity(1).unwrap();
        let x = pauli("X");
        assert!((expected_entangled_global(&id1, &x).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((average_fidelity(&id1, &x).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let id2 = DenseOperator::identity(2).unwrap();
        assert!((expected_product_global(&id2, &pauli("XX")).unwrap() - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn identical_operators_have_zero_cost() {
        let mut rng = RngSeed(10).rng();
        let u = haar_random_unitary(3, &mut rng).unwrap();
        assert!(cost_hst(&u, &u).unwrap().abs() < 1e-14);
        assert!(expected_product_global(&u, &u).unwrap().abs() < 1e-14);
        // global phase is invisible
        let v = u.scale(C64::from_polar(1.0, 0.7));
        assert!(cost_hst(&u, &v).unwrap().abs() < 1e-14);
    }

    #[test]
    fn single_qubit_product_cost_is_two_thirds_hst() {
        let mut rng = RngSeed(11).rng();
        for _ in 0..50 {
            let u = haar_random_unitary(1, &mut rng).unwrap();
            let v = haar_random_unitary(1, &mut rng).unwrap();
            let c = cost_hst(&u, &v).unwrap();
            assert!((expected_product_global(&u, &v).unwrap() - 2.0 * c / 3.0).abs() < 1e-12);
            assert!((tensor_power_cost_relation(c, 1) - 2.0 * c / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cost_value_clamps_and_flags() {
        let c = CostValue::new("X", -1e-12, None);
        assert_eq!(c.value, 0.0);
        assert!(!c.anomaly);
        let c = CostValue::new("X", 1.1, None);
        assert_eq!(c.value, 1.0);
        assert!(c.anomaly);
    }
}
