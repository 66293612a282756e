//! Monte-Carlo and brute-force oracles for the analytic identities used by
//! the cost and bound modules.
//!
//! Oracles sample states and unitaries and evaluate fidelities with plain
//! index arithmetic; they never call the closed form they are checking.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{Model, VffAnsatz};
use crate::bounds::bound_nested_exact;
use crate::cost::{cost_hst, expected_entangled_global, expected_product_global, tensor_power_cost_relation, CostKind};
use crate::data::{generate_dataset, InputSource};
use crate::error::Result;
use crate::hamiltonian::{build_heisenberg_chain, build_xy_chain, trotter_unitary, TrotterConfig};
use crate::qsim::stats::mean_stderr;
use crate::qsim::{
    haar_random_state, haar_random_unitary, haar_single_qubit, hermitian_exp, random_hermitian, DenseOperator, RngSeed, SimRng,
    C64,
};
use crate::train::{finite_difference_gradient, full_gradient};

/// Floating-point floor added to the `3 sigma` acceptance band.
pub const FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub name: String,
    pub analytic: Vec<f64>,
    pub estimate: Vec<f64>,
    /// Zero for deterministic checks.
    pub stderr: Vec<f64>,
    pub samples: usize,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl OracleReport {
    fn compare(name: &str, analytic: Vec<f64>, estimate: Vec<f64>, stderr: Vec<f64>, samples: usize, tolerance: f64) -> Self {
        let passed = analytic.iter().zip(&estimate).zip(&stderr).all(|((a, e), s)| (a - e).abs() <= 3.0 * s + tolerance);
        let worst = analytic.iter().zip(&estimate).map(|(a, e)| (a - e).abs()).fold(0.0, f64::max);
        OracleReport {
            name: name.into(),
            analytic,
            estimate,
            stderr,
            samples,
            tolerance,
            passed,
            detail: format!("max |analytic - estimate| = {worst:.3e}"),
        }
    }

    /// Inequality check: passes when the smallest slack is at least `-tolerance`.
    fn slack(name: &str, slacks: &[f64], samples: usize, tolerance: f64) -> Self {
        let worst = slacks.iter().cloned().fold(f64::INFINITY, f64::min);
        OracleReport {
            name: name.into(),
            analytic: vec![0.0],
            estimate: vec![worst],
            stderr: vec![0.0],
            samples,
            tolerance,
            passed: worst >= -tolerance,
            detail: format!("worst slack {worst:.3e} over {} comparisons", slacks.len()),
        }
    }

    /// Largest deviation in units of the MC band.
    fn z_max(&self) -> f64 {
        self.analytic
            .iter()
            .zip(&self.estimate)
            .zip(&self.stderr)
            .map(|((a, e), s)| (a - e).abs() / (s + self.tolerance))
            .fold(0.0, f64::max)
    }
}

/// Runs `f` at `samples`; a failure within 5 sigma is retried once at 4x samples.
fn with_retry(samples: usize, seed: RngSeed, f: impl Fn(usize, &mut SimRng) -> Result<OracleReport>) -> Result<OracleReport> {
    let first = f(samples, &mut seed.stream(0))?;
    if first.passed || first.z_max() > 5.0 {
        return Ok(first);
    }
    let mut second = f(4 * samples, &mut seed.stream(1))?;
    second.detail = format!("{} (rerun at 4x samples)", second.detail);
    Ok(second)
}

fn split_complex(zs: &[Vec<C64>]) -> (Vec<f64>, Vec<f64>) {
    let mut est = Vec::new();
    let mut se = Vec::new();
    for col in zs {
        let re: Vec<f64> = col.iter().map(|z| z.re).collect();
        let im: Vec<f64> = col.iter().map(|z| z.im).collect();
        let (m, s) = mean_stderr(&re);
        est.push(m);
        se.push(s);
        let (m, s) = mean_stderr(&im);
        est.push(m);
        se.push(s);
    }
    (est, se)
}

fn transpose<T: Clone>(rows: Vec<Vec<T>>) -> Vec<Vec<T>> {
    let k = rows.first().map_or(0, |r| r.len());
    (0..k).map(|j| rows.iter().map(|r| r[j].clone()).collect()).collect()
}

/// `E |psi><psi|^(x)2 = (I (x) I + SWAP) / 6` over Haar single-qubit states, entrywise.
pub fn check_single_qubit_twirl(samples: usize, seed: RngSeed) -> Result<OracleReport> {
    with_retry(samples, seed, |samples, rng| {
        let rows: Vec<Vec<C64>> = (0..samples)
            .map(|_| {
                let p = haar_single_qubit(rng);
                let mut e = Vec::with_capacity(16);
                for r in 0..4 {
                    for c in 0..4 {
                        let (a, b, cc, d) = (r >> 1, r & 1, c >> 1, c & 1);
                        e.push(p[a] * p[b] * (p[cc] * p[d]).conj());
                    }
                }
                e
            })
            .collect();
        let (est, se) = split_complex(&transpose(rows));
        let mut analytic = Vec::with_capacity(32);
        for r in 0..4 {
            for c in 0..4 {
                let (a, b, cc, d) = (r >> 1, r & 1, c >> 1, c & 1);
                let v = (f64::from(u8::from(a == cc && b == d)) + f64::from(u8::from(a == d && b == cc))) / 6.0;
                analytic.extend([v, 0.0]);
            }
        }
        Ok(OracleReport::compare("single_qubit_twirl", analytic, est, se, samples, FLOOR))
    })
}

/// `E[v_ij conj(v_pq)] = delta_ip delta_jq / d` for Haar `v` at `d = 4`.
pub fn check_entry_moment(samples: usize, seed: RngSeed) -> Result<OracleReport> {
    let idx = [((0, 0), (0, 0)), ((1, 3), (1, 3)), ((0, 1), (1, 0)), ((2, 2), (3, 3)), ((3, 0), (3, 1))];
    with_retry(samples, seed, |samples, rng| {
        let rows: Vec<Vec<C64>> = (0..samples)
            .map(|_| {
                let u = haar_random_unitary(2, rng).expect("n=2 is within the dense cap");
                idx.iter().map(|((i, j), (p, q))| u.get(*i, *j) * u.get(*p, *q).conj()).collect()
            })
            .collect();
        let (est, se) = split_complex(&transpose(rows));
        let analytic = idx.iter().flat_map(|((i, j), (p, q))| [if i == p && j == q { 0.25 } else { 0.0 }, 0.0]).collect();
        Ok(OracleReport::compare("haar_entry_moment", analytic, est, se, samples, FLOOR))
    })
}

fn ginibre(d: usize, rng: &mut impl Rng) -> DMatrix<C64> {
    use rand_distr::StandardNormal;
    DMatrix::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// Closed forms for the first and second Haar moments of
/// `Tr[W A W^dag B]`, `Tr[W A W^dag B W C W^dag D]` and
/// `Tr[W A W^dag B] Tr[W C W^dag D]` at `d = 4`.
pub fn moment_closed_forms(a: &DMatrix<C64>, b: &DMatrix<C64>, c: &DMatrix<C64>, dm: &DMatrix<C64>) -> [C64; 3] {
    let d = a.nrows() as f64;
    let (ta, tb, tc, td) = (a.trace(), b.trace(), c.trace(), dm.trace());
    let tac = (a * c).trace();
    let tbd = (b * dm).trace();
    let k1 = 1.0 / (d * d - 1.0);
    let k2 = 1.0 / (d * (d * d - 1.0));
    let i1 = ta * tb / d;
    let i2 = (ta * tc * tbd + tac * tb * td) * k1 - (tac * tbd + ta * tb * tc * td) * k2;
    let i3 = (ta * tb * tc * td + tac * tbd) * k1 - (tac * tb * td + ta * tc * tbd) * k2;
    [i1, i2, i3]
}

pub fn check_moment_identities(samples: usize, seed: RngSeed) -> Result<OracleReport> {
    let mut frng = seed.stream(99);
    let mats: Vec<DMatrix<C64>> = (0..4).map(|_| ginibre(4, &mut frng)).collect();
    let (a, b, c, dm) = (&mats[0], &mats[1], &mats[2], &mats[3]);
    let closed = moment_closed_forms(a, b, c, dm);
    with_retry(samples, seed, |samples, rng| {
        let rows: Vec<Vec<C64>> = (0..samples)
            .map(|_| {
                let w = haar_random_unitary(2, rng).expect("n=2 is within the dense cap").into_matrix();
                let wd = w.adjoint();
                let x = &w * a * &wd * b;
                let y = &w * c * &wd * dm;
                vec![x.trace(), (&x * &y).trace(), x.trace() * y.trace()]
            })
            .collect();
        let (est, se) = split_complex(&transpose(rows));
        let analytic = closed.iter().flat_map(|z| [z.re, z.im]).collect();
        Ok(OracleReport::compare("haar_moment_identities", analytic, est, se, samples, FLOOR))
    })
}

fn matvec(m: &DMatrix<C64>, v: &[C64]) -> Vec<C64> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)] * v[c]).sum()).collect()
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn kron_vec(factors: &[[C64; 2]]) -> Vec<C64> {
    let mut v = vec![C64::new(1.0, 0.0)];
    for f in factors {
        v = v.iter().flat_map(|a| [a * f[0], a * f[1]]).collect();
    }
    v
}

/// Product-Haar average of `|<Psi| W |Psi>|^2` against the subset sum, one random `W` per trial.
pub fn check_subset_formula(n: usize, trials: usize, samples: usize, seed: RngSeed) -> Result<OracleReport> {
    with_retry(samples, seed, |samples, rng| {
        let mut analytic = Vec::new();
        let mut est = Vec::new();
        let mut se = Vec::new();
        for _ in 0..trials {
            let w = haar_random_unitary(n, rng)?;
            analytic.push(1.0 - expected_product_global(&DenseOperator::identity(n)?, &w)?);
            let wm = w.matrix();
            let vals: Vec<f64> = (0..samples)
                .map(|_| {
                    let f: Vec<[C64; 2]> = (0..n).map(|_| haar_single_qubit(rng)).collect();
                    let psi = kron_vec(&f);
                    inner(&psi, &matvec(wm, &psi)).norm_sqr()
                })
                .collect();
            let (m, s) = mean_stderr(&vals);
            est.push(m);
            se.push(s);
        }
        Ok(OracleReport::compare(&format!("subset_formula_n{n}"), analytic, est, se, samples, FLOOR))
    })
}

/// Haar-state average of the global cost against `d/(d+1) C_HST`.
pub fn check_entangled_relation(n: usize, trials: usize, samples: usize, seed: RngSeed) -> Result<OracleReport> {
    with_retry(samples, seed, |samples, rng| {
        let mut analytic = Vec::new();
        let mut est = Vec::new();
        let mut se = Vec::new();
        for _ in 0..trials {
            let u = haar_random_unitary(n, rng)?;
            let v = perturb(&u, 0.5, rng)?;
            analytic.push(expected_entangled_global(&u, &v)?);
            let (um, vm) = (u.matrix(), v.matrix());
            let vals: Vec<f64> = (0..samples)
                .map(|_| {
                    let psi = haar_random_state(n, rng).expect("small n");
                    1.0 - inner(&matvec(um, psi.amps()), &matvec(vm, psi.amps())).norm_sqr()
                })
                .collect();
            let (m, s) = mean_stderr(&vals);
            est.push(m);
            se.push(s);
        }
        Ok(OracleReport::compare(&format!("entangled_cost_relation_n{n}"), analytic, est, se, samples, FLOOR))
    })
}

/// `v = u exp(-i eps H)` for a random unit-norm Hermitian `H` and `eps` uniform in `[0, max_eps]`.
fn perturb(u: &DenseOperator, max_eps: f64, rng: &mut impl Rng) -> Result<DenseOperator> {
    let h = random_hermitian(u.n(), rng)?;
    let h = h.scale(C64::new(1.0 / h.frobenius_norm(), 0.0));
    let eps = rng.random_range(0.0..=max_eps);
    u.mul(&hermitian_exp(&h, eps)?)
}

/// Single-qubit product cost equals `2/3 C_HST`, and the tensor-power closed
/// form matches the subset sum at `n = 3`.
pub fn check_tensor_relations(trials: usize, seed: RngSeed) -> Result<Vec<OracleReport>> {
    let mut rng = seed.stream(0);
    let (mut a1, mut e1, mut a3, mut e3) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for _ in 0..trials {
        let u = haar_random_unitary(1, &mut rng)?;
        let v = perturb(&u, 2.0, &mut rng)?;
        let c = cost_hst(&u, &v)?;
        a1.push(2.0 * c / 3.0);
        e1.push(expected_product_global(&u, &v)?);
        let u3 = u.kron(&u)?.kron(&u)?;
        let v3 = v.kron(&v)?.kron(&v)?;
        a3.push(tensor_power_cost_relation(cost_hst(&u3, &v3)?, 3));
        e3.push(expected_product_global(&u3, &v3)?);
    }
    let z = vec![0.0; trials];
    Ok(vec![
        OracleReport::compare("single_qubit_product_cost", a1, e1, z.clone(), trials, 1e-12),
        OracleReport::compare("tensor_power_relation_n3", a3, e3, z, trials, 1e-10),
    ])
}

/// Per-pair slacks: product/entangled, HST, per-sample chain, local MC band.
type Slacks = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>);

/// Product vs entangled sandwich, HST sandwich, and the per-sample
/// local/global chain, on random pairs at `n` (mixing Haar pairs and close pairs).
pub fn check_cost_sandwiches(n: usize, trials: usize, samples: usize, seed: RngSeed) -> Result<Vec<OracleReport>> {
    let d = f64::from(1u32 << n);
    let per: Vec<Slacks> = (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = seed.stream(k);
            let u = haar_random_unitary(n, &mut rng)?;
            let v = if k % 2 == 0 { haar_random_unitary(n, &mut rng)? } else { perturb(&u, 0.3, &mut rng)? };
            let cp = expected_product_global(&u, &v)?;
            let ce = expected_entangled_global(&u, &v)?;
            let ch = cost_hst(&u, &v)?;
            let b2 = vec![(d + 1.0) / d * ce - cp, 2.0 * cp - (d + 1.0) / d * ce];
            let hst = vec![ch - cp, cp + 2.0 / d + 2.0 * (2.0 / d).sqrt() - ch];
            // per-sample chain local <= global <= n local
            let (um, vd) = (u.matrix(), v.matrix().adjoint());
            let mut chain = Vec::with_capacity(2 * samples);
            let mut locals = Vec::with_capacity(samples);
            for _ in 0..samples {
                let f: Vec<[C64; 2]> = (0..n).map(|_| haar_single_qubit(&mut rng)).collect();
                let psi = kron_vec(&f);
                let chi = matvec(&vd, &matvec(um, &psi));
                let global = 1.0 - inner(&psi, &chi).norm_sqr();
                let local = (0..n).map(|q| qubit_miss(&chi, n, q, f[q])).sum::<f64>() / n as f64;
                chain.push(global - local);
                chain.push(n as f64 * local - global);
                locals.push(local);
            }
            let (ml, sl) = mean_stderr(&locals);
            let band = vec![cp + 3.0 * sl + FLOOR - ml, ml - (cp / n as f64 - 3.0 * sl - FLOOR)];
            Ok((b2, hst, chain, band))
        })
        .collect::<Result<_>>()?;
    let flat = |sel: fn(&Slacks) -> &Vec<f64>| -> Vec<f64> { per.iter().flat_map(|p| sel(p).iter().cloned()).collect() };
    Ok(vec![
        OracleReport::slack(&format!("product_vs_entangled_n{n}"), &flat(|p| &p.0), trials, 1e-10),
        OracleReport::slack(&format!("hst_sandwich_n{n}"), &flat(|p| &p.1), trials, 1e-10),
        OracleReport::slack(&format!("local_global_per_sample_n{n}"), &flat(|p| &p.2), trials * samples, 1e-10),
        OracleReport::slack(&format!("local_mc_vs_product_global_n{n}"), &flat(|p| &p.3), trials * samples, 0.0),
    ])
}

/// `<chi| (|v_perp><v_perp| on q) |chi>` by direct index arithmetic.
fn qubit_miss(chi: &[C64], n: usize, q: usize, v: [C64; 2]) -> f64 {
    let perp = [-v[1].conj(), v[0].conj()];
    let m = 1usize << (n - 1 - q);
    (0..chi.len()).filter(|i| i & m == 0).map(|i| (perp[0].conj() * chi[i] + perp[1].conj() * chi[i | m]).norm_sqr()).sum()
}

/// Fits `|C_P(I, W) - C_HST(I, W)|` for `W = exp(-i eps H)` as `a eps + b eps^2`.
pub fn check_perturbative(n: usize, eps_list: &[f64], seed: RngSeed) -> Result<OracleReport> {
    let mut rng = seed.stream(0);
    let h = random_hermitian(n, &mut rng)?;
    let h = h.scale(C64::new(1.0 / h.frobenius_norm(), 0.0));
    let id = DenseOperator::identity(n)?;
    let mut rows = Vec::new();
    for &eps in eps_list {
        let w = hermitian_exp(&h, eps)?;
        rows.push((eps, (expected_product_global(&id, &w)? - cost_hst(&id, &w)?).abs()));
    }
    // least squares on [eps, eps^2]
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (e, y) in &rows {
        s11 += e * e;
        s12 += e * e * e;
        s22 += e * e * e * e;
        r1 += e * y;
        r2 += e * e * y;
    }
    let det = s11 * s22 - s12 * s12;
    let a = (r1 * s22 - r2 * s12) / det;
    let b = (s11 * r2 - s12 * r1) / det;
    let limit = 1.1 / f64::from(1u32 << (n - 1));
    let passed = a.abs() <= 1e-3 * b.abs().max(f64::MIN_POSITIVE) && b <= limit;
    Ok(OracleReport {
        name: format!("perturbative_n{n}"),
        analytic: vec![0.0, limit],
        estimate: vec![a, b],
        stderr: vec![0.0, 0.0],
        samples: eps_list.len(),
        tolerance: 0.0,
        passed,
        detail: format!("linear coefficient {a:.3e}, quadratic {b:.4e} (limit {limit:.4e})"),
    })
}

/// `1 - sqrt(1 - C(U^M, V^M)) <= M^2 (1 - sqrt(1 - C(U, V)))`.
pub fn check_power_bound(n: usize, trials: usize, m_max: u64, seed: RngSeed) -> Result<OracleReport> {
    let slacks: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = seed.stream(k);
            let u = haar_random_unitary(n, &mut rng)?;
            let v = perturb(&u, if k % 4 == 0 { 2.0 } else { 0.2 }, &mut rng)?;
            let r1 = 1.0 - (1.0 - hst_direct(&u, &v)).max(0.0).sqrt();
            let (mut um, mut vm) = (u.clone(), v.clone());
            let mut out = Vec::new();
            for m in 1..=m_max {
                if m > 1 {
                    um = um.mul(&u)?;
                    vm = vm.mul(&v)?;
                }
                let rm = 1.0 - (1.0 - hst_direct(&um, &vm)).max(0.0).sqrt();
                out.push((m * m) as f64 * r1 - rm);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let flat: Vec<f64> = slacks.into_iter().flatten().collect();
    Ok(OracleReport::slack(&format!("power_bound_n{n}"), &flat, trials, 1e-10))
}

fn hst_direct(u: &DenseOperator, v: &DenseOperator) -> f64 {
    let d = u.dim();
    let mut tr = C64::new(0.0, 0.0);
    for r in 0..d {
        for c in 0..d {
            tr += u.get(r, c).conj() * v.get(r, c);
        }
    }
    1.0 - tr.norm_sqr() / (d * d) as f64
}

/// Average fidelity `F(U^M, V^M)` against the nested bound with `eps = 0`, for close pairs.
pub fn check_nested_bound(n: usize, trials: usize, m_max: u64, seed: RngSeed) -> Result<OracleReport> {
    let d = f64::from(1u32 << n);
    let slacks: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = seed.stream(k);
            let u = haar_random_unitary(n, &mut rng)?;
            let v = perturb(&u, 0.05, &mut rng)?;
            nested_slacks(&u, &v, d, m_max)
        })
        .collect::<Result<_>>()?;
    let flat: Vec<f64> = slacks.into_iter().flatten().collect();
    Ok(OracleReport::slack(&format!("nested_bound_n{n}"), &flat, trials, 1e-10))
}

/// `F(U^M, V^M) - bound_nested_exact(M, 0, C_HST(U, V))` for `M = 1..=m_max`.
pub fn nested_slacks(u: &DenseOperator, v: &DenseOperator, d: f64, m_max: u64) -> Result<Vec<f64>> {
    let c = cost_hst(u, v)?.max(0.0);
    let (mut um, mut vm) = (u.clone(), v.clone());
    let mut out = Vec::new();
    for m in 1..=m_max {
        if m > 1 {
            um = um.mul(u)?;
            vm = vm.mul(v)?;
        }
        let fid = 1.0 - d / (d + 1.0) * hst_direct(&um, &vm);
        out.push(fid - bound_nested_exact(u.n(), m, 0.0, c)?.raw);
    }
    Ok(out)
}

/// Gate kinds probed by the gradient check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    Rz,
    Rzz,
    Givens,
    Sym(usize),
}

/// Parameter shift against central differences (`h = 1e-5`) on `instances`
/// random problems per slot kind. Returns the worst deviation per kind.
pub fn check_gradients(instances: usize, seed: RngSeed) -> Result<Vec<OracleReport>> {
    let kinds =
        [SlotKind::Rz, SlotKind::Rzz, SlotKind::Givens, SlotKind::Sym(0), SlotKind::Sym(1), SlotKind::Sym(2), SlotKind::Sym(3)];
    kinds
        .iter()
        .enumerate()
        .map(|(ki, &kind)| {
            let devs: Vec<f64> = (0..instances as u64)
                .into_par_iter()
                .map(|i| gradient_deviation(kind, seed.derive(ki as u64).stream(i)))
                .collect::<Result<_>>()?;
            let worst = devs.iter().cloned().fold(0.0, f64::max);
            Ok(OracleReport {
                name: format!("param_shift_{kind:?}").to_lowercase().replace(['(', ')'], ""),
                analytic: vec![0.0],
                estimate: vec![worst],
                stderr: vec![0.0],
                samples: instances,
                tolerance: 1e-5,
                passed: worst <= 1e-5,
                detail: format!("max |shift - fd| = {worst:.3e}"),
            })
        })
        .collect()
}

fn gradient_deviation(kind: SlotKind, mut rng: SimRng) -> Result<f64> {
    let n = 3;
    let model = match kind {
        SlotKind::Rz | SlotKind::Givens => Model::Xy,
        _ => Model::Heisenberg,
    };
    let h = match model {
        Model::Xy => build_xy_chain(n, false)?,
        Model::Heisenberg => build_heisenberg_chain(n, true)?,
    };
    let a = VffAnsatz::build(n, model, 0.1, Some(2))?;
    let cost = if rng.random_bool(0.5) { CostKind::Global } else { CostKind::Local };
    let data = generate_dataset(&h, &TrotterConfig::new(0.1, 2, 1), 2, InputSource::HaarProduct, RngSeed(rng.random()))?;
    let theta: Vec<f64> = (0..a.n_theta()).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
    let gamma: Vec<f64> = (0..a.n_gamma()).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
    let t = if rng.random_bool(0.5) { 0.1 } else { rng.random_range(0.05..0.5) };
    let (gt, gg) = full_gradient(cost, &a, &theta, &gamma, t, &data)?;
    let fd = finite_difference_gradient(cost, &a, &theta, &gamma, t, &data, 1e-5)?;
    let nt = a.n_theta();
    let slots: Vec<usize> = match kind {
        SlotKind::Givens => (0..nt).collect(),
        SlotKind::Sym(s) => (0..nt).filter(|l| l % 4 == s).collect(),
        SlotKind::Rz => (nt..nt + n).collect(),
        SlotKind::Rzz => (nt + n..nt + a.n_gamma()).collect(),
    };
    let all: Vec<f64> = gt.into_iter().chain(gg).collect();
    Ok(slots.iter().map(|&k| (all[k] - fd[k]).abs()).fold(0.0, f64::max))
}

/// `|| V(dt)^M - V(M dt) ||_2` for random parameters.
pub fn fast_forward_deviation(n: usize, m: u64, seed: RngSeed) -> Result<f64> {
    let mut rng = seed.stream(0);
    let a = VffAnsatz::build(n, Model::Heisenberg, 0.1, None)?;
    let theta: Vec<f64> = (0..a.n_theta()).map(|_| rng.random_range(-3.0..3.0)).collect();
    let gamma: Vec<f64> = (0..a.n_gamma()).map(|_| rng.random_range(-3.0..3.0)).collect();
    let step = a.unitary(&theta, &gamma, 0.1)?;
    let long = a.unitary(&theta, &gamma, 0.1 * m as f64)?;
    Ok(step.pow(m).sub(&long)?.frobenius_norm())
}

pub fn check_fast_forward(n: usize, m: u64, seed: RngSeed) -> Result<OracleReport> {
    let dev = fast_forward_deviation(n, m, seed)?;
    Ok(OracleReport {
        name: format!("fast_forward_n{n}_m{m}"),
        analytic: vec![0.0],
        estimate: vec![dev],
        stderr: vec![0.0],
        samples: 1,
        tolerance: 1e-10,
        passed: dev <= 1e-10,
        detail: format!("||V^M - V_(M dt)||_2 = {dev:.3e}"),
    })
}

/// Trotter unitary of the open XY chain at `dt = 0.1`, used as a realistic target.
pub fn xy_target(n: usize) -> Result<DenseOperator> {
    trotter_unitary(&build_xy_chain(n, false)?, &TrotterConfig::new(0.1, 2, 1))
}

/// Sample sizes for [`verify_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteScale {
    pub mc_samples: usize,
    pub pair_trials: usize,
    pub gradient_instances: usize,
}

impl Default for SuiteScale {
    fn default() -> Self {
        Self { mc_samples: 100_000, pair_trials: 100, gradient_instances: 20 }
    }
}

/// Every oracle at `scale`, seeds derived from `seed`.
pub fn verify_suite(seed: RngSeed, scale: SuiteScale) -> Result<Vec<OracleReport>> {
    let s = scale.mc_samples;
    let mut out = vec![
        check_single_qubit_twirl(s, seed.derive(1))?,
        check_entry_moment(s, seed.derive(2))?,
        check_moment_identities(s, seed.derive(3))?,
    ];
    for n in 1..=3 {
        out.push(check_subset_formula(n, 2, s, seed.derive(10 + n as u64))?);
    }
    out.push(check_entangled_relation(2, 2, s, seed.derive(20))?);
    out.extend(check_tensor_relations(scale.pair_trials, seed.derive(21))?);
    for n in [2, 3] {
        out.extend(check_cost_sandwiches(n, scale.pair_trials, 200, seed.derive(30 + n as u64))?);
        out.push(check_power_bound(n, scale.pair_trials, 8, seed.derive(40 + n as u64))?);
        out.push(check_perturbative(n, &[1e-3, 3e-3, 1e-2, 3e-2], seed.derive(50 + n as u64))?);
    }
    for n in [2, 4] {
        out.push(check_nested_bound(n, 20, 50, seed.derive(60 + n as u64))?);
    }
    out.extend(check_gradients(scale.gradient_instances, seed.derive(70))?);
    out.push(check_fast_forward(4, 10_000, seed.derive(80))?);
    Ok(out)
}
