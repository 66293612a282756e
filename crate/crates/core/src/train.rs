//! Parameter-shift gradients, optimizers and the training loop.

use std::collections::VecDeque;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{GateKind, VffAnsatz};
use crate::cost::{split_cost, CostKind};
use crate::data::{generate_pairs, Dataset, InputSource};
use crate::error::{invalid, ReffError, Result};
use crate::hamiltonian::{PauliSumHamiltonian, TrotterConfig};
use crate::qsim::{DenseOperator, RngSeed};

pub use crate::bounds::termination_threshold;

/// Shift rule used for one parameter slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ShiftRule {
    /// `(f(x + pi/2) - f(x - pi/2)) / 2`; exact when the generator has two eigenvalues.
    TwoTerm,
    /// Adds a `pi/4` pair; exact for generator spectrum `{-1, 0, 1}`.
    FourTerm,
}

/// Rule for `theta_l`, from the generator spectrum of the slot it feeds.
pub fn shift_rule(a: &VffAnsatz, l: usize) -> ShiftRule {
    for g in a.w.gates() {
        if let Some(pos) = g.params.iter().position(|&p| p == l) {
            return match (&g.kind, pos) {
                (GateKind::Givens, _) | (GateKind::Sym, 1) => ShiftRule::FourTerm,
                _ => ShiftRule::TwoTerm,
            };
        }
    }
    ShiftRule::TwoTerm
}

fn shifted(v: &[f64], l: usize, s: f64) -> Vec<f64> {
    let mut out = v.to_vec();
    out[l] += s;
    out
}

/// `D(s) = (f(x+s) - f(x-s)) / 2` combined per `rule`.
fn combine(rule: ShiftRule, mut diff: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    match rule {
        ShiftRule::TwoTerm => diff(FRAC_PI_2),
        ShiftRule::FourTerm => Ok(2.0 * diff(FRAC_PI_4)? - (SQRT_2 - 1.0) * diff(FRAC_PI_2)?),
    }
}

/// `d C / d theta_l`, shifting `theta_l` in `W` and in `W^dag` separately.
#[allow(clippy::too_many_arguments)]
pub fn gradient_theta_with(
    kind: CostKind,
    rule: ShiftRule,
    a: &VffAnsatz,
    theta: &[f64],
    gamma: &[f64],
    t: f64,
    data: &Dataset,
    l: usize,
) -> Result<f64> {
    if l >= theta.len() {
        return Err(invalid(format!("theta index {l} out of range")));
    }
    let left = combine(rule, |s| {
        let p = split_cost(kind, a, &shifted(theta, l, s), gamma, theta, t, data)?;
        let m = split_cost(kind, a, &shifted(theta, l, -s), gamma, theta, t, data)?;
        Ok((p - m) / 2.0)
    })?;
    let right = combine(rule, |s| {
        let p = split_cost(kind, a, theta, gamma, &shifted(theta, l, s), t, data)?;
        let m = split_cost(kind, a, theta, gamma, &shifted(theta, l, -s), t, data)?;
        Ok((p - m) / 2.0)
    })?;
    Ok(left + right)
}

pub fn gradient_theta(
    kind: CostKind,
    a: &VffAnsatz,
    theta: &[f64],
    gamma: &[f64],
    t: f64,
    data: &Dataset,
    l: usize,
) -> Result<f64> {
    gradient_theta_with(kind, shift_rule(a, l), a, theta, gamma, t, data, l)
}

/// `d C / d gamma_l`. `D` runs at angles `(t / dt_ref) gamma`, so the shift is
/// applied to that effective angle and the result rescaled.
pub fn gradient_gamma(
    kind: CostKind,
    a: &VffAnsatz,
    theta: &[f64],
    gamma: &[f64],
    t: f64,
    data: &Dataset,
    l: usize,
) -> Result<f64> {
    if l >= gamma.len() {
        return Err(invalid(format!("gamma index {l} out of range")));
    }
    let s = t / a.dt_ref;
    if s == 0.0 {
        return Ok(0.0);
    }
    let h = FRAC_PI_2 / s;
    let p = split_cost(kind, a, theta, &shifted(gamma, l, h), theta, t, data)?;
    let m = split_cost(kind, a, theta, &shifted(gamma, l, -h), theta, t, data)?;
    Ok(s * (p - m) / 2.0)
}

/// Full gradient `(d/d theta, d/d gamma)`, slots evaluated in parallel.
pub fn full_gradient(
    kind: CostKind,
    a: &VffAnsatz,
    theta: &[f64],
    gamma: &[f64],
    t: f64,
    data: &Dataset,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let nt = theta.len();
    let all: Vec<f64> = (0..nt + gamma.len())
        .into_par_iter()
        .map(|k| {
            if k < nt {
                gradient_theta(kind, a, theta, gamma, t, data, k)
            } else {
                gradient_gamma(kind, a, theta, gamma, t, data, k - nt)
            }
        })
        .collect::<Result<_>>()?;
    let (g_t, g_g) = all.split_at(nt);
    Ok((g_t.to_vec(), g_g.to_vec()))
}

/// Central finite differences with step `h`, over `[theta, gamma]`.
pub fn finite_difference_gradient(
    kind: CostKind,
    a: &VffAnsatz,
    theta: &[f64],
    gamma: &[f64],
    t: f64,
    data: &Dataset,
    h: f64,
) -> Result<Vec<f64>> {
    let nt = theta.len();
    (0..nt + gamma.len())
        .into_par_iter()
        .map(|k| {
            let eval = |d: f64| {
                if k < nt {
                    let th = shifted(theta, k, d);
                    split_cost(kind, a, &th, gamma, &th, t, data)
                } else {
                    split_cost(kind, a, theta, &shifted(gamma, k - nt, d), theta, t, data)
                }
            };
            Ok((eval(h)? - eval(-h)?) / (2.0 * h))
        })
        .collect()
}

/// Factor applied to the step size on each plateau cut.
pub const LR_CUT: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OptimizerKind {
    Gd,
    Adam,
    /// Limited-memory BFGS with backtracking line search.
    Lbfgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub cost: CostKind,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub lbfgs_memory: usize,
    pub max_iters: usize,
    pub target_cost: f64,
    /// Initial parameters are uniform in `[-init_scale, init_scale]`.
    pub init_scale: f64,
    /// Fresh random starts allowed after a plateau or a stalled line search.
    pub restarts: usize,
    /// A start that fails to improve its best cost tenfold within this many
    /// iterations counts as plateaued.
    pub plateau_window: usize,
    /// Step-size cuts by [`LR_CUT`] tried on a plateau before a fresh start.
    /// Ignored by L-BFGS.
    pub lr_decays: usize,
    pub seed: RngSeed,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            cost: CostKind::Global,
            optimizer: OptimizerKind::Adam,
            learning_rate: 0.05,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            lbfgs_memory: 20,
            max_iters: 1000,
            target_cost: 1e-8,
            init_scale: 0.1,
            restarts: 0,
            plateau_window: 500,
            lr_decays: 0,
            seed: RngSeed(0),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(invalid("learning_rate must be positive"));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(invalid("Adam betas must lie in [0, 1)"));
        }
        if !(self.target_cost.is_finite() && self.target_cost >= 0.0) {
            return Err(invalid("target_cost must be non-negative"));
        }
        if self.lbfgs_memory == 0 {
            return Err(invalid("lbfgs_memory must be at least 1"));
        }
        if (self.restarts > 0 || self.lr_decays > 0) && self.plateau_window == 0 {
            return Err(invalid("plateau_window must be positive when restarts or lr_decays are enabled"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub cost: f64,
    pub grad_norm: f64,
    pub validation_cost: Option<f64>,
    pub infidelity: Option<f64>,
    /// Index of the random start this row belongs to.
    pub attempt: usize,
    pub wall_ms: f64,
}

pub type TrainTrace = Vec<TraceRow>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TrainStatus {
    Converged,
    MaxIters,
    /// The line search could make no further progress.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    pub theta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub best_cost: f64,
    pub iterations: usize,
    /// Random starts used, including the first.
    pub attempts: usize,
    pub status: TrainStatus,
    pub trace: TrainTrace,
}

impl TrainOutcome {
    pub fn converged(&self) -> bool {
        self.status == TrainStatus::Converged
    }
}

/// Optional per-iteration diagnostics.
#[derive(Default)]
pub struct Monitor<'a> {
    pub validation: Option<&'a Dataset>,
    /// Target for `1 - F_avg(target, V(dt))`.
    pub target: Option<&'a DenseOperator>,
    /// Diagnostics are computed every `every` iterations (1 when zero).
    pub every: usize,
}

struct Stepper {
    kind: OptimizerKind,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    memory: usize,
    t: i32,
    m: Vec<f64>,
    v: Vec<f64>,
    hist: VecDeque<(Vec<f64>, Vec<f64>, f64)>,
    prev: Option<(Vec<f64>, Vec<f64>)>,
}

enum Step {
    Moved,
    Stalled,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Stepper {
    fn new(cfg: &TrainConfig, dim: usize) -> Self {
        Self {
            kind: cfg.optimizer,
            lr: cfg.learning_rate,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            eps: cfg.adam_eps,
            memory: cfg.lbfgs_memory,
            t: 0,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            hist: VecDeque::new(),
            prev: None,
        }
    }

    fn step(&mut self, x: &mut [f64], f: f64, g: &[f64], cost: &(dyn Fn(&[f64]) -> Result<f64> + Sync)) -> Result<Step> {
        match self.kind {
            OptimizerKind::Gd => {
                x.iter_mut().zip(g).for_each(|(xi, gi)| *xi -= self.lr * gi);
                Ok(Step::Moved)
            }
            OptimizerKind::Adam => {
                self.t += 1;
                let (b1, b2) = (self.beta1, self.beta2);
                let c1 = 1.0 - b1.powi(self.t);
                let c2 = 1.0 - b2.powi(self.t);
                for i in 0..x.len() {
                    self.m[i] = b1 * self.m[i] + (1.0 - b1) * g[i];
                    self.v[i] = b2 * self.v[i] + (1.0 - b2) * g[i] * g[i];
                    x[i] -= self.lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + self.eps);
                }
                Ok(Step::Moved)
            }
            OptimizerKind::Lbfgs => self.lbfgs(x, f, g, cost),
        }
    }

    fn lbfgs(&mut self, x: &mut [f64], f: f64, g: &[f64], cost: &(dyn Fn(&[f64]) -> Result<f64> + Sync)) -> Result<Step> {
        if let Some((xp, gp)) = self.prev.take() {
            let s: Vec<f64> = x.iter().zip(&xp).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = g.iter().zip(&gp).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > 1e-300 && sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
                if self.hist.len() == self.memory {
                    self.hist.pop_front();
                }
                self.hist.push_back((s, y, 1.0 / sy));
            }
        }
        // two-loop recursion
        let mut q = g.to_vec();
        let mut alphas = Vec::with_capacity(self.hist.len());
        for (s, y, rho) in self.hist.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        let scale = match self.hist.back() {
            Some((s, y, _)) => dot(s, y) / dot(y, y),
            None => self.lr / dot(g, g).sqrt().max(1e-300),
        };
        q.iter_mut().for_each(|qi| *qi *= scale);
        for ((s, y, rho), a) in self.hist.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(g, &dir);
        if slope.is_nan() || slope >= 0.0 {
            self.hist.clear();
            let s = self.lr / dot(g, g).sqrt().max(1e-300);
            dir = g.iter().map(|v| -s * v).collect();
            slope = dot(g, &dir);
        }
        let mut step = 1.0;
        for _ in 0..50 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + step * d).collect();
            let ft = cost(&trial)?;
            if ft.is_finite() && ft <= f + 1e-4 * step * slope {
                self.prev = Some((x.to_vec(), g.to_vec()));
                x.copy_from_slice(&trial);
                return Ok(Step::Moved);
            }
            step *= 0.5;
        }
        self.hist.clear();
        Ok(Step::Stalled)
    }
}

fn init_params(n: usize, cfg: &TrainConfig, attempt: usize) -> Vec<f64> {
    let mut rng = cfg.seed.stream(attempt as u64);
    let s = cfg.init_scale;
    (0..n).map(|_| if s > 0.0 { rng.random_range(-s..=s) } else { 0.0 }).collect()
}

fn check_finite(v: f64, what: &'static str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ReffError::NonFinite(what))
    }
}

/// Trains `(theta, gamma)` at `t = data.trotter.dt` until the cost reaches
/// `cfg.target_cost` or `cfg.max_iters` steps. Returns the best parameters seen.
pub fn reff_train(a: &VffAnsatz, data: &Dataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    reff_train_from(a, data, cfg, None, &Monitor::default())
}

pub fn reff_train_from(
    a: &VffAnsatz,
    data: &Dataset,
    cfg: &TrainConfig,
    init: Option<(&[f64], &[f64])>,
    monitor: &Monitor,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(invalid("empty dataset"));
    }
    if a.n() != data.n {
        return Err(ReffError::DimensionMismatch { expected: a.n(), found: data.n });
    }
    if cfg.cost == CostKind::Local && data.pairs.iter().any(|p| p.factors.is_none()) {
        return Err(ReffError::MissingFactors);
    }
    let nt = a.n_theta();
    let mut x = match init {
        Some((th, ga)) => {
            if th.len() != nt || ga.len() != a.n_gamma() {
                return Err(ReffError::ParamLength { expected: nt + a.n_gamma(), found: th.len() + ga.len() });
            }
            [th, ga].concat()
        }
        None => init_params(nt + a.n_gamma(), cfg, 0),
    };
    let t = data.trotter.dt;
    let kind = cfg.cost;
    let cost = |p: &[f64]| split_cost(kind, a, &p[..nt], &p[nt..], &p[..nt], t, data);
    let grad = |p: &[f64]| -> Result<Vec<f64>> {
        let (gt, gg) = full_gradient(kind, a, &p[..nt], &p[nt..], t, data)?;
        Ok([gt, gg].concat())
    };
    let every = monitor.every.max(1);
    let diagnostics = |p: &[f64], iter: usize| -> Result<(Option<f64>, Option<f64>)> {
        if !iter.is_multiple_of(every) {
            return Ok((None, None));
        }
        let val = match monitor.validation {
            Some(v) => Some(split_cost(kind, a, &p[..nt], &p[nt..], &p[..nt], t, v)?),
            None => None,
        };
        let inf = match monitor.target {
            Some(u) => Some(1.0 - crate::cost::average_fidelity(u, &a.unitary(&p[..nt], &p[nt..], t)?)?),
            None => None,
        };
        Ok((val, inf))
    };

    let start = Instant::now();
    let mut stepper = Stepper::new(cfg, x.len());
    let mut trace = Vec::new();
    let mut f = check_finite(cost(&x)?, "cost")?;
    let (mut best_f, mut best_x) = (f, x.clone());
    let mut status = TrainStatus::MaxIters;
    let mut iter = 0;
    let mut attempt = 0;
    let mut cuts = 0;
    // Best cost of the current start and the iteration it last improved tenfold.
    let (mut mark_f, mut mark_iter) = (f, 0);
    loop {
        if f <= cfg.target_cost {
            status = TrainStatus::Converged;
        }
        let g = if status == TrainStatus::Converged || iter == cfg.max_iters { None } else { Some(grad(&x)?) };
        let gnorm = g.as_ref().map_or(f64::NAN, |g| dot(g, g).sqrt());
        if g.is_some() {
            check_finite(gnorm, "gradient")?;
        }
        let (val, inf) = diagnostics(&x, iter)?;
        trace.push(TraceRow {
            iter,
            cost: f,
            grad_norm: gnorm,
            validation_cost: val,
            infidelity: inf,
            attempt,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        let Some(g) = g else { break };
        let stalled = matches!(stepper.step(&mut x, f, &g, &cost)?, Step::Stalled);
        let plateaued = (cfg.restarts > 0 || cfg.lr_decays > 0) && iter - mark_iter >= cfg.plateau_window;
        if plateaued && !stalled && cuts < cfg.lr_decays && stepper.kind != OptimizerKind::Lbfgs {
            // an oscillating optimizer looks like a plateau; try a smaller step first
            stepper.lr *= LR_CUT;
            cuts += 1;
            mark_iter = iter + 1;
        } else if (stalled || plateaued) && attempt < cfg.restarts {
            attempt += 1;
            cuts = 0;
            x = init_params(x.len(), cfg, attempt);
            stepper = Stepper::new(cfg, x.len());
            mark_f = f64::INFINITY;
            mark_iter = iter + 1;
        } else if stalled {
            status = TrainStatus::Stalled;
            break;
        }
        iter += 1;
        f = check_finite(cost(&x)?, "cost")?;
        if f < best_f {
            best_f = f;
            best_x.copy_from_slice(&x);
        }
        if f <= mark_f / 10.0 || mark_f.is_infinite() {
            mark_f = f;
            mark_iter = iter;
        }
    }
    if best_f <= cfg.target_cost {
        status = TrainStatus::Converged;
    }
    Ok(TrainOutcome {
        theta: best_x[..nt].to_vec(),
        gamma: best_x[nt..].to_vec(),
        best_cost: best_f,
        iterations: iter,
        attempts: attempt + 1,
        status,
        trace,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GrowthConfig {
    pub initial_n: usize,
    pub step: usize,
    pub max_n: usize,
    pub validation_n: usize,
    /// Generalization is declared once the validation cost drops to this value.
    pub validation_target: f64,
    /// Iterations per training round before the validation cost is checked.
    pub round_iters: usize,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        Self { initial_n: 1, step: 1, max_n: 16, validation_n: 20, validation_target: 1e-6, round_iters: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRecord {
    pub n_pairs: usize,
    pub train_cost: f64,
    pub validation_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrownOutcome {
    pub outcome: TrainOutcome,
    /// Training-set size at which the validation target was met.
    pub generalized_at: Option<usize>,
    pub history: Vec<GrowthRecord>,
}

/// Trains in rounds, adding `step` pairs whenever a round ends with the
/// training cost converged or stalled but the validation cost above target.
pub fn reff_train_grown(
    a: &VffAnsatz,
    h: &PauliSumHamiltonian,
    trotter: &TrotterConfig,
    source: InputSource,
    growth: &GrowthConfig,
    cfg: &TrainConfig,
) -> Result<GrownOutcome> {
    if growth.initial_n == 0 || growth.step == 0 || growth.validation_n == 0 {
        return Err(invalid("growth sizes must be positive"));
    }
    let seed = cfg.seed;
    let validation = crate::data::generate_dataset(h, trotter, growth.validation_n, source, seed.derive(1))?;
    let mut data = crate::data::generate_dataset(h, trotter, growth.initial_n, source, seed)?;
    let mut history = Vec::new();
    let mut params: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut spent = 0;
    let round = TrainConfig { max_iters: growth.round_iters, restarts: 0, ..cfg.clone() };
    loop {
        let init = params.as_ref().map(|(t, g)| (t.as_slice(), g.as_slice()));
        let out = reff_train_from(a, &data, &round, init, &Monitor::default())?;
        spent += out.iterations;
        let val = split_cost(cfg.cost, a, &out.theta, &out.gamma, &out.theta, trotter.dt, &validation)?;
        history.push(GrowthRecord { n_pairs: data.len(), train_cost: out.best_cost, validation_cost: val });
        let generalized = val <= growth.validation_target;
        let exhausted = spent >= cfg.max_iters;
        let plateaued = out.status != TrainStatus::MaxIters;
        if generalized || exhausted || (plateaued && data.len() + growth.step > growth.max_n) {
            return Ok(GrownOutcome { generalized_at: generalized.then_some(data.len()), outcome: out, history });
        }
        if plateaued {
            let more = generate_pairs(h, trotter, growth.step, source, seed, data.len() as u64)?;
            data.pairs.extend(more);
        }
        params = Some((out.theta, out.gamma));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::Model;
    use crate::data::generate_dataset;
    use crate::hamiltonian::build_xy_chain;

    fn setup(model: Model, n: usize, count: usize) -> (VffAnsatz, Dataset, Vec<f64>, Vec<f64>) {
        let h = match model {
            Model::Xy => build_xy_chain(n, false).unwrap(),
            Model::Heisenberg => crate::hamiltonian::build_heisenberg_chain(n, true).unwrap(),
        };
        let tc = TrotterConfig::new(0.1, 2, 1);
        let a = VffAnsatz::build(n, model, 0.1, Some(2)).unwrap();
        let d = generate_dataset(&h, &tc, count, InputSource::HaarProduct, RngSeed(21)).unwrap();
        let mut rng = RngSeed(22).rng();
        let th = (0..a.n_theta()).map(|_| rng.random_range(-3.0..3.0)).collect();
        let ga = (0..a.n_gamma()).map(|_| rng.random_range(-3.0..3.0)).collect();
        (a, d, th, ga)
    }

    #[test]
    fn shift_rules_match_finite_differences() {
        for model in [Model::Xy, Model::Heisenberg] {
            let (a, d, th, ga) = setup(model, 3, 2);
            for kind in [CostKind::Global, CostKind::Local] {
                for t in [0.1, 0.37] {
                    let (gt, gg) = full_gradient(kind, &a, &th, &ga, t, &d).unwrap();
                    let fd = finite_difference_gradient(kind, &a, &th, &ga, t, &d, 1e-5).unwrap();
                    for (k, (x, y)) in gt.iter().chain(&gg).zip(&fd).enumerate() {
                        assert!((x - y).abs() < 1e-7, "{model:?} {kind:?} t={t} slot {k}: {x} vs {y}");
                    }
                }
            }
        }
    }

    // The plain pi/2 rule misses the second harmonic of a Givens angle.
    #[test]
    fn two_term_rule_is_inexact_for_givens() {
        let (a, d, th, ga) = setup(Model::Xy, 3, 2);
        let fd = finite_difference_gradient(CostKind::Global, &a, &th, &ga, 0.1, &d, 1e-5).unwrap();
        let worst = (0..a.n_theta())
            .map(|l| {
                let g = gradient_theta_with(CostKind::Global, ShiftRule::TwoTerm, &a, &th, &ga, 0.1, &d, l).unwrap();
                (g - fd[l]).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst > 1e-3, "{worst}");
    }

    #[test]
    fn training_at_a_realizable_target_stops_immediately() {
        let (a, _, th, ga) = setup(Model::Xy, 3, 1);
        // data generated by the ansatz itself
        let mut d = setup(Model::Xy, 3, 3).1;
        for p in d.pairs.iter_mut() {
            let mut s = p.input.clone();
            a.apply(&th, &ga, 0.1, &mut s).unwrap();
            p.output = s;
        }
        let cfg = TrainConfig { target_cost: 1e-12, ..TrainConfig::default() };
        let out = reff_train_from(&a, &d, &cfg, Some((&th, &ga)), &Monitor::default()).unwrap();
        assert_eq!(out.iterations, 0);
        assert!(out.converged());
    }

    #[test]
    fn adam_and_lbfgs_reduce_cost_monotone_best() {
        let (a, d, _, _) = setup(Model::Xy, 3, 1);
        for opt in [OptimizerKind::Adam, OptimizerKind::Lbfgs, OptimizerKind::Gd] {
            let cfg = TrainConfig { optimizer: opt, max_iters: 30, cost: CostKind::Local, ..TrainConfig::default() };
            let out = reff_train(&a, &d, &cfg).unwrap();
            assert!(out.best_cost < out.trace[0].cost, "{opt:?}");
            let min = out.trace.iter().map(|r| r.cost).fold(f64::INFINITY, f64::min);
            assert_eq!(min, out.best_cost);
        }
    }

    #[test]
    fn local_cost_needs_factors() {
        let h = build_xy_chain(2, false).unwrap();
        let d = generate_dataset(&h, &TrotterConfig::new(0.1, 2, 1), 2, InputSource::HaarN, RngSeed(1)).unwrap();
        let a = VffAnsatz::build(2, Model::Xy, 0.1, None).unwrap();
        let cfg = TrainConfig { cost: CostKind::Local, ..TrainConfig::default() };
        assert!(matches!(reff_train(&a, &d, &cfg), Err(ReffError::MissingFactors)));
    }

    #[test]
    fn plateau_triggers_fresh_starts() {
        let (a, d, _, _) = setup(Model::Xy, 3, 1);
        let cfg = TrainConfig { max_iters: 12, plateau_window: 1, restarts: 2, target_cost: 0.0, ..TrainConfig::default() };
        let out = reff_train(&a, &d, &cfg).unwrap();
        assert_eq!(out.attempts, 3);
        assert_eq!(out.iterations, 12);
        let starts: Vec<usize> = out.trace.windows(2).filter(|w| w[0].attempt != w[1].attempt).map(|w| w[1].iter).collect();
        assert_eq!(starts.len(), 2);
        // each fresh start draws from its own stream
        assert_ne!(init_params(4, &cfg, 1), init_params(4, &cfg, 2));
        let bad = TrainConfig { restarts: 1, plateau_window: 0, ..TrainConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn plateau_cuts_step_before_restarting() {
        let (a, d, _, _) = setup(Model::Xy, 3, 1);
        let cfg = TrainConfig {
            max_iters: 12,
            plateau_window: 1,
            restarts: 1,
            lr_decays: 2,
            target_cost: 0.0,
            ..TrainConfig::default()
        };
        let out = reff_train(&a, &d, &cfg).unwrap();
        // two cuts take two windows each, then the single restart
        assert_eq!(out.attempts, 2);
        let first_restart = out.trace.iter().find(|r| r.attempt == 1).unwrap().iter;
        assert_eq!(first_restart, 6);
    }
}
