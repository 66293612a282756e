//! Fast-forwarding experiments and Pauli-basis state decomposition.
//!
//! A trained `V(dt)` is evaluated at `t = M dt` (and optionally at fractional
//! times between steps) against the Trotterized evolution and the exact
//! evolution `exp(-iHt)`.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{run, VffAnsatz};
use crate::cost::average_fidelity;
use crate::error::{invalid, ReffError, Result};
use crate::hamiltonian::{apply_trotter, trotter_unitary, PauliSumHamiltonian, TrotterConfig};
use crate::qsim::stats::mean_stderr;
use crate::qsim::{
    check_dense, dense_cap, haar_random_state, DenseOperator, HermitianEigen, PauliString, RngSeed, StateVector, C64,
};

/// Largest register accepted by [`pauli_decompose`].
pub const PAULI_CAP: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Reference {
    Trotter,
    Exact,
    Both,
}

impl Reference {
    fn trotter(self) -> bool {
        matches!(self, Reference::Trotter | Reference::Both)
    }

    fn exact(self) -> bool {
        matches!(self, Reference::Exact | Reference::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FastForwardPlan {
    pub m_max: u64,
    /// Points per step; 1 evaluates integer `M` only.
    #[serde(default = "one")]
    pub resolution: u32,
    /// Evaluate every `stride`-th step.
    #[serde(default = "one_u64")]
    pub stride: u64,
    pub reference: Reference,
    /// Haar states per point on registers above the dense cap.
    #[serde(default = "default_samples")]
    pub mc_samples: usize,
    #[serde(default)]
    pub seed: RngSeed,
}

fn one() -> u32 {
    1
}

fn one_u64() -> u64 {
    1
}

fn default_samples() -> usize {
    256
}

impl FastForwardPlan {
    pub fn new(m_max: u64, reference: Reference) -> Self {
        Self { m_max, resolution: 1, stride: 1, reference, mc_samples: default_samples(), seed: RngSeed::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_max == 0 {
            return Err(invalid("m_max must be at least 1"));
        }
        if self.resolution == 0 || self.stride == 0 {
            return Err(invalid("resolution and stride must be at least 1"));
        }
        if self.mc_samples < 2 {
            return Err(invalid("mc_samples must be at least 2"));
        }
        Ok(())
    }

    /// `(M, sub)` pairs with `t = (M + sub/resolution) dt`, starting at `t = 0`.
    fn grid(&self) -> Vec<(u64, u32)> {
        let mut g = Vec::new();
        let mut m = 0;
        while m <= self.m_max {
            g.push((m, 0));
            if m < self.m_max {
                g.extend((1..self.resolution).map(|s| (m, s)));
            }
            m += self.stride;
        }
        if g.last().map(|p| p.0) != Some(self.m_max) {
            g.push((self.m_max, 0));
        }
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub t: f64,
    #[serde(rename = "M")]
    pub m: u64,
    pub fid_vs_trotter: Option<f64>,
    pub fid_vs_exact: Option<f64>,
    /// Standard error of sampled fidelities; absent for exact evaluation.
    pub stderr: Option<f64>,
}

/// `U(dt)^M U(c)` with `U(c)` the Trotter step rebuilt at step size `c`.
pub fn fractional_trotter(h: &PauliSumHamiltonian, cfg: &TrotterConfig, m: u64, c: f64) -> Result<DenseOperator> {
    let step = trotter_unitary(h, cfg)?.pow(m);
    if c == 0.0 {
        return Ok(step);
    }
    step.mul(&trotter_unitary(h, &cfg.with_dt(c))?)
}

/// Average fidelity of `V(t)` against the chosen references on the plan's
/// grid. Registers above the dense cap are sampled with Haar-random states
/// and support only the Trotter reference.
pub fn fidelity_series(
    a: &VffAnsatz,
    theta: &[f64],
    gamma: &[f64],
    h: &PauliSumHamiltonian,
    cfg: &TrotterConfig,
    plan: &FastForwardPlan,
) -> Result<Vec<SeriesPoint>> {
    plan.validate()?;
    cfg.validate()?;
    if a.n() != h.n() {
        return Err(ReffError::DimensionMismatch { expected: a.n(), found: h.n() });
    }
    if a.n() > dense_cap() {
        if plan.reference.exact() {
            check_dense(a.n(), "exact reference")?;
        }
        return sampled_series(a, theta, gamma, h, cfg, plan);
    }
    let dt = cfg.dt;
    let res = plan.resolution as f64;
    let u = trotter_unitary(h, cfg)?;
    let partial: Vec<DenseOperator> =
        (1..plan.resolution).map(|s| trotter_unitary(h, &cfg.with_dt(dt * s as f64 / res))).collect::<Result<_>>()?;
    let eig = if plan.reference.exact() { Some(HermitianEigen::new(&h.to_dense()?)?) } else { None };
    plan.grid()
        .into_par_iter()
        .map(|(m, s)| {
            let t = dt * (m as f64 + s as f64 / res);
            let v = a.unitary(theta, gamma, t)?;
            let fid_vs_trotter = if plan.reference.trotter() {
                let um = u.pow(m);
                let r = if s == 0 { um } else { um.mul(&partial[s as usize - 1])? };
                Some(average_fidelity(&r, &v)?)
            } else {
                None
            };
            let fid_vs_exact = match &eig {
                Some(e) => Some(average_fidelity(&e.exp(t), &v)?),
                None => None,
            };
            Ok(SeriesPoint { t, m, fid_vs_trotter, fid_vs_exact, stderr: None })
        })
        .collect()
}

fn sampled_series(
    a: &VffAnsatz,
    theta: &[f64],
    gamma: &[f64],
    h: &PauliSumHamiltonian,
    cfg: &TrotterConfig,
    plan: &FastForwardPlan,
) -> Result<Vec<SeriesPoint>> {
    let n = a.n();
    let dt = cfg.dt;
    let res = plan.resolution as f64;
    let grid = plan.grid();
    let v_at: Vec<_> = grid
        .iter()
        .map(|&(m, s)| a.compile_split(theta, gamma, theta, dt * (m as f64 + s as f64 / res)))
        .collect::<Result<_>>()?;
    // fids[sample][point]
    let fids: Vec<Vec<f64>> = (0..plan.mc_samples)
        .into_par_iter()
        .map(|j| {
            let mut rng = plan.seed.stream(j as u64);
            let psi = haar_random_state(n, &mut rng)?;
            let mut out = vec![0.0; grid.len()];
            for sub in 0..plan.resolution {
                let mut r = psi.clone();
                if sub > 0 {
                    apply_trotter(h, &cfg.with_dt(dt * sub as f64 / res), &mut r)?;
                }
                let mut m_done = 0;
                for (k, &(m, s)) in grid.iter().enumerate() {
                    if s != sub {
                        continue;
                    }
                    while m_done < m {
                        apply_trotter(h, cfg, &mut r)?;
                        m_done += 1;
                    }
                    let mut w = psi.clone();
                    run(&v_at[k], &mut w);
                    out[k] = 1.0 - w.infidelity_with(&r);
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(grid
        .iter()
        .enumerate()
        .map(|(k, &(m, s))| {
            let col: Vec<f64> = fids.iter().map(|f| f[k]).collect();
            let (mean, se) = mean_stderr(&col);
            SeriesPoint {
                t: dt * (m as f64 + s as f64 / res),
                m,
                fid_vs_trotter: Some(mean),
                fid_vs_exact: None,
                stderr: Some(se),
            }
        })
        .collect())
}

/// Writes the series as CSV with columns `t, M, fid_vs_trotter, fid_vs_exact, stderr`.
pub fn write_series_csv(series: &[SeriesPoint], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in series {
        w.serialize(p).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> ReffError {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => ReffError::Io(e),
        other => invalid(format!("csv: {other:?}")),
    }
}

/// Coefficients `eta_k = Tr(sigma_k rho) / 2^n` in base-4 lexicographic
/// order (`I, X, Y, Z`, qubit 0 most significant).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliWeights {
    pub n: usize,
    pub eta: Vec<f64>,
}

fn check_pauli_cap(n: usize) -> Result<()> {
    if n > PAULI_CAP {
        return Err(ReffError::CapExceeded { what: "Pauli decomposition", n, cap: PAULI_CAP });
    }
    Ok(())
}

pub fn pauli_decompose(rho: &DenseOperator) -> Result<PauliWeights> {
    let n = rho.n();
    check_pauli_cap(n)?;
    let herr = rho.hermiticity_error();
    if herr > 1e-10 || !herr.is_finite() {
        return Err(ReffError::NotHermitian(herr));
    }
    let d = rho.dim();
    let eta = (0..d * d)
        .into_par_iter()
        .map(|k| {
            let p = PauliString::from_lex_index(n, k);
            // Tr(P rho) = sum_l <l|P rho|l>, with P|j> = ph |l>.
            let tr: C64 = (0..d)
                .map(|j| {
                    let (l, ph) = p.act_on_basis(j);
                    ph * rho.get(j, l)
                })
                .sum();
            tr.re / d as f64
        })
        .collect();
    Ok(PauliWeights { n, eta })
}

pub fn pauli_reconstruct(w: &PauliWeights) -> Result<DenseOperator> {
    check_pauli_cap(w.n)?;
    let d = 1usize << w.n;
    if w.eta.len() != d * d {
        return Err(ReffError::DimensionMismatch { expected: d * d, found: w.eta.len() });
    }
    let mut data = vec![C64::new(0.0, 0.0); d * d];
    for (k, &e) in w.eta.iter().enumerate() {
        if e == 0.0 {
            continue;
        }
        let p = PauliString::from_lex_index(w.n, k);
        for j in 0..d {
            let (l, ph) = p.act_on_basis(j);
            data[l * d + j] += ph * e;
        }
    }
    DenseOperator::from_row_major(w.n, &data)
}

/// `<psi| rho(w) |psi>` without forming `rho`.
pub fn fidelity_from_weights(w: &PauliWeights, psi: &StateVector) -> Result<f64> {
    if psi.n() != w.n {
        return Err(ReffError::DimensionMismatch { expected: w.n, found: psi.n() });
    }
    let d = psi.dim();
    if w.eta.len() != d * d {
        return Err(ReffError::DimensionMismatch { expected: d * d, found: w.eta.len() });
    }
    let amps = psi.amps();
    let total: f64 = w
        .eta
        .par_iter()
        .enumerate()
        .map(|(k, &e)| {
            if e == 0.0 {
                return 0.0;
            }
            let p = PauliString::from_lex_index(w.n, k);
            let ev: C64 = (0..d)
                .map(|j| {
                    let (l, ph) = p.act_on_basis(j);
                    amps[l].conj() * ph * amps[j]
                })
                .sum();
            e * ev.re
        })
        .sum();
    Ok(total)
}

/// Haar-random mixed state of rank `rank` with random weights.
pub fn random_density(n: usize, rank: usize, rng: &mut impl Rng) -> Result<DenseOperator> {
    check_dense(n, "density matrix")?;
    let d = 1usize << n;
    let mut weights: Vec<f64> = (0..rank.max(1)).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let mut data = vec![C64::new(0.0, 0.0); d * d];
    for w in weights {
        let s = haar_random_state(n, rng)?;
        let a = s.amps();
        for r in 0..d {
            for c in 0..d {
                data[r * d + c] += a[r] * a[c].conj() * w;
            }
        }
    }
    DenseOperator::from_row_major(n, &data)
}
