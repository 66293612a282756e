//! Lower bounds on the long-time average fidelity `F(U^M, V^M)`.
//!
//! Every bound is reported clamped to `[0, 1]` with the raw value kept. The
//! generalization term carries an unknown constant `c`; reports include the
//! `c = 0` value as well.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoundKind {
    ProductGlobal,
    ProductLocal,
    EntangledGlobal,
    NestedExact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub n: usize,
    pub m: u64,
    pub trotter_error: f64,
    pub cost: f64,
    pub k: Option<f64>,
    pub n_pairs: Option<usize>,
    pub delta: Option<f64>,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    /// Clamped to `[0, 1]`.
    pub lower_bound: f64,
    pub raw: f64,
    /// Value with the generalization constant set to zero, clamped.
    pub lower_bound_c0: f64,
    pub trotter_term: f64,
    pub cost_term: f64,
    pub generalization_term: f64,
    pub inputs: BoundInputs,
}

fn check_common(n: usize, eps: f64, cost: f64) -> Result<()> {
    if n == 0 || n > 60 {
        return Err(invalid(format!("qubit count {n} out of range")));
    }
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(invalid("trotter error must be non-negative"));
    }
    if !(cost.is_finite() && cost >= 0.0) {
        return Err(invalid("cost must be non-negative"));
    }
    Ok(())
}

fn dim(n: usize) -> f64 {
    2f64.powi(n as i32)
}

/// `c (sqrt(K ln K / N) + sqrt(ln(1/delta) / N))`, with `K ln K := 1` at `K = 1`.
pub fn generalization_term(k: f64, n_pairs: usize, delta: f64, c: f64) -> Result<f64> {
    if !(k >= 1.0 && k.is_finite()) {
        return Err(invalid("K must be at least 1"));
    }
    if n_pairs == 0 {
        return Err(invalid("N must be positive"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta must lie in (0, 1)"));
    }
    let n = n_pairs as f64;
    Ok(c * ((k_ln_k(k) / n).sqrt() + ((1.0 / delta).ln() / n).sqrt()))
}

fn k_ln_k(k: f64) -> f64 {
    if k == 1.0 {
        1.0
    } else {
        k * k.ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generalization {
    pub k: f64,
    pub n_pairs: usize,
    pub delta: f64,
    pub c: f64,
}

impl Generalization {
    pub fn term(&self) -> Result<f64> {
        generalization_term(self.k, self.n_pairs, self.delta, self.c)
    }
}

#[allow(clippy::too_many_arguments)]
fn quadratic(
    kind: BoundKind,
    n: usize,
    m: u64,
    eps: f64,
    cost: f64,
    cost_weight: f64,
    gen_weight: f64,
    g: Option<Generalization>,
) -> Result<BoundReport> {
    check_common(n, eps, cost)?;
    let m2 = (m as f64).powi(2);
    let trotter_term = 2.0 * m2 * eps * eps / (dim(n) + 1.0);
    let cost_term = 2.0 * m2 * cost_weight * cost;
    let gen = match g {
        Some(g) => gen_weight * m2 * g.term()?,
        None => 0.0,
    };
    let raw = 1.0 - trotter_term - cost_term - gen;
    let raw_c0 = 1.0 - trotter_term - cost_term;
    Ok(BoundReport {
        kind,
        lower_bound: raw.clamp(0.0, 1.0),
        raw,
        lower_bound_c0: raw_c0.clamp(0.0, 1.0),
        trotter_term,
        cost_term,
        generalization_term: gen,
        inputs: BoundInputs {
            n,
            m,
            trotter_error: eps,
            cost,
            k: g.map(|g| g.k),
            n_pairs: g.map(|g| g.n_pairs),
            delta: g.map(|g| g.delta),
            c: g.map_or(0.0, |g| g.c),
        },
    })
}

/// `1 - 2 M^2 [eps^2/(d+1) + 4 C] - M^2 gen` from the product-input global training cost.
pub fn bound_product_global(n: usize, m: u64, eps: f64, cost: f64, g: Option<Generalization>) -> Result<BoundReport> {
    quadratic(BoundKind::ProductGlobal, n, m, eps, cost, 4.0, 1.0, g)
}

/// `1 - 2 M^2 [eps^2/(d+1) + 4 n C_L] - n M^2 gen` from the local training cost.
pub fn bound_product_local(n: usize, m: u64, eps: f64, cost: f64, g: Option<Generalization>) -> Result<BoundReport> {
    quadratic(BoundKind::ProductLocal, n, m, eps, cost, 4.0 * n as f64, n as f64, g)
}

/// `1 - 2 M^2 [eps^2/(d+1) + 2 C_E] - M^2 gen` from Haar-random inputs.
pub fn bound_entangled_global(n: usize, m: u64, eps: f64, cost: f64, g: Option<Generalization>) -> Result<BoundReport> {
    quadratic(BoundKind::EntangledGlobal, n, m, eps, cost, 2.0, 1.0, g)
}

/// Tighter bound from the exact HST cost: with
/// `X = eps/sqrt(2d) + sqrt(1 - sqrt(1 - C_HST))`, the fidelity is at least
/// `1 - d/(d+1) M^2 X^2 (2 - M^2 X^2)` while `M X <= 1`, else 0.
pub fn bound_nested_exact(n: usize, m: u64, eps: f64, c_hst: f64) -> Result<BoundReport> {
    check_common(n, eps, c_hst)?;
    let d = dim(n);
    let x = eps / (2.0 * d).sqrt() + (1.0 - (1.0 - c_hst.min(1.0)).sqrt()).sqrt();
    let mx2 = (m as f64 * x).powi(2);
    let raw = if mx2 <= 1.0 { 1.0 - d / (d + 1.0) * mx2 * (2.0 - mx2) } else { 0.0 };
    Ok(BoundReport {
        kind: BoundKind::NestedExact,
        lower_bound: raw.clamp(0.0, 1.0),
        raw,
        lower_bound_c0: raw.clamp(0.0, 1.0),
        trotter_term: eps / (2.0 * d).sqrt(),
        cost_term: (1.0 - (1.0 - c_hst.min(1.0)).sqrt()).sqrt(),
        generalization_term: 0.0,
        inputs: BoundInputs { n, m, trotter_error: eps, cost: c_hst, k: None, n_pairs: None, delta: None, c: 0.0 },
    })
}

/// `ceil(M0^4 K ln K / (eps/2)^2)`.
pub fn required_dataset_size(m0: f64, k: f64, eps: f64) -> Result<u64> {
    if !(eps > 0.0 && m0 > 0.0 && k >= 1.0) {
        return Err(invalid("need eps > 0, M0 > 0, K >= 1"));
    }
    Ok((m0.powi(4) * k_ln_k(k) / (eps / 2.0).powi(2)).ceil() as u64)
}

/// A cost threshold; `certifiable` is false when the Trotter term alone
/// already exceeds the budget and `value` is negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub value: f64,
    pub certifiable: bool,
}

impl Threshold {
    fn new(value: f64) -> Self {
        Self { value, certifiable: value > 0.0 }
    }
}

/// Cost level that guarantees infidelity `eps` at `M0` steps:
/// `eps/(8 M0^2) - eps_trot^2 / (2 (d+1))`.
pub fn remark_threshold(eps: f64, m0: f64, eps_trot: f64, n: usize) -> Threshold {
    Threshold::new(eps / (8.0 * m0 * m0) - eps_trot * eps_trot / (2.0 * (dim(n) + 1.0)))
}

/// Stopping threshold used by the training loop, a factor two below
/// `remark_threshold`: `eps/(16 M0^2) - eps_trot^2 / (4 (2^n + 1))`.
pub fn termination_threshold(eps: f64, m0: f64, eps_trot: f64, n: usize) -> Threshold {
    Threshold::new(eps / (16.0 * m0 * m0) - eps_trot * eps_trot / (4.0 * (dim(n) + 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generalization_worked_value() {
        let g = generalization_term(10.0, 1000, 0.01, 1.0).unwrap();
        let oracle = (10f64 * 10f64.ln() / 1000.0).sqrt() + (100f64.ln() / 1000.0).sqrt();
        assert!((g - oracle).abs() < 1e-15);
        assert!((g - 0.219605).abs() < 1e-6);
    }

    #[test]
    fn product_global_worked_value() {
        let r = bound_product_global(2, 5, 0.01, 1e-4, None).unwrap();
        assert!((r.lower_bound - 0.979).abs() < 1e-12);
    }

    #[test]
    fn thresholds_worked_values() {
        assert!((termination_threshold(0.01, 10.0, 0.0, 3).value - 6.25e-6).abs() < 1e-18);
        assert!((remark_threshold(0.01, 10.0, 0.0, 3).value - 1.25e-5).abs() < 1e-18);
        assert_eq!(remark_threshold(1.0, 1.0, 0.0, 2).value, 0.125);
        let t = termination_threshold(0.01, 10.0, 0.5, 2);
        assert!(t.value < 0.0 && !t.certifiable);
    }

    #[test]
    fn dataset_size_worked_values() {
        assert_eq!(required_dataset_size(1.0, std::f64::consts::E, 2.0).unwrap(), 3);
        assert_eq!(required_dataset_size(1.0, 1.0, 2.0).unwrap(), 1);
    }

    #[test]
    fn perfect_compilation_gives_unit_fidelity() {
        for kind in [bound_product_global, bound_product_local, bound_entangled_global] {
            assert_eq!(kind(3, 100, 0.0, 0.0, None).unwrap().lower_bound, 1.0);
        }
        assert_eq!(bound_nested_exact(3, 100, 0.0, 0.0).unwrap().lower_bound, 1.0);
    }

    #[test]
    fn clamping_and_raw() {
        let r = bound_product_global(2, 1000, 0.1, 0.1, None).unwrap();
        assert_eq!(r.lower_bound, 0.0);
        assert!(r.raw < 0.0);
        assert_eq!(bound_nested_exact(2, 1000, 0.1, 0.1).unwrap().raw, 0.0);
    }

    #[test]
    fn c0_value_drops_generalization() {
        let g = Generalization { k: 18.0, n_pairs: 100, delta: 0.05, c: 1.0 };
        let r = bound_product_local(4, 3, 1e-3, 1e-6, Some(g)).unwrap();
        assert!(r.lower_bound_c0 > r.lower_bound);
        assert!((r.raw + r.generalization_term - (1.0 - r.trotter_term - r.cost_term)).abs() < 1e-15);
        assert!(generalization_term(0.5, 10, 0.1, 1.0).is_err());
        assert!(generalization_term(2.0, 10, 1.5, 1.0).is_err());
    }
}
