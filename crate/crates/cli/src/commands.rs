use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use reff_core::bounds::{
    bound_entangled_global, bound_nested_exact, bound_product_global, bound_product_local, remark_threshold,
    required_dataset_size, termination_threshold, Generalization, Threshold,
};
use reff_core::cost::{cost_hst, empirical_cost};
use reff_core::data::generate_dataset;
use reff_core::eval::{fidelity_series, write_series_csv, SeriesPoint};
use reff_core::hamiltonian::{trotter_error, trotter_unitary};
use reff_core::qsim::dense_cap;
use reff_core::train::{reff_train_from, reff_train_grown, GrowthRecord, Monitor, TrainStatus};
use reff_core::verify::{verify_suite, OracleReport};
use reff_core::{BoundReport, CostKind, Dataset, RngSeed, TrainOutcome, VffAnsatz};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Run;

pub const PARAMS_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub format_version: u32,
    pub ansatz: VffAnsatz,
    pub theta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub training: TrainingSummary,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSummary {
    pub cost_kind: CostKind,
    pub status: TrainStatus,
    pub best_cost: f64,
    pub iterations: usize,
    pub attempts: usize,
    pub n_pairs: usize,
    /// `1 - F_avg` against the Trotter step, when the register fits the dense cap.
    pub infidelity: Option<f64>,
    pub seconds: f64,
    pub generalized_at: Option<usize>,
    pub growth: Vec<GrowthRecord>,
}

/// Parameterized gates in `V`, counting the shared `W` once.
pub fn gate_count(a: &VffAnsatz) -> usize {
    a.w.gates().len() + a.d.gates().len()
}

fn load_dataset(run: &mut Run, path: &Path, cfg: &RunConfig) -> Result<Dataset, CliError> {
    let bytes = run.input(path)?;
    let text = String::from_utf8(bytes).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    let d = Dataset::from_json(&text)?;
    if d.n != cfg.n || d.trotter != cfg.trotter_config() || d.hamiltonian != cfg.hamiltonian()? {
        return Err(CliError::Config(format!("dataset {} does not match the config's model and Trotter step", path.display())));
    }
    Ok(d)
}

fn dataset_from_config(cfg: &RunConfig) -> Result<Dataset, CliError> {
    Ok(generate_dataset(&cfg.hamiltonian()?, &cfg.trotter_config(), cfg.data.n_pairs, cfg.data.source, RngSeed(cfg.data.seed))?)
}

pub fn gen_data(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let mut run = Run::start(out, "gen-data", Some(cfg))?;
    let d = dataset_from_config(cfg)?;
    run.write("dataset.json", d.to_json()?.as_bytes())?;
    println!("wrote {} pairs for n = {} to {}", d.len(), d.n, run.dir().join("dataset.json").display());
    run.finish()
}

pub fn train(cfg: &RunConfig, data: Option<&Path>, out: &Path) -> Result<ParamsFile, CliError> {
    let mut run = Run::start(out, "train", Some(cfg))?;
    let params = train_in(&mut run, cfg, data)?;
    run.finish()?;
    Ok(params)
}

fn train_in(run: &mut Run, cfg: &RunConfig, data: Option<&Path>) -> Result<ParamsFile, CliError> {
    let a = cfg.ansatz()?;
    let h = cfg.hamiltonian()?;
    let tc = cfg.trotter_config();
    let tcfg = cfg.train_config();
    let target = if cfg.n <= dense_cap() { Some(trotter_unitary(&h, &tc)?) } else { None };
    let start = Instant::now();
    let (outcome, n_pairs, generalized_at, growth): (TrainOutcome, usize, Option<usize>, Vec<GrowthRecord>) =
        match &cfg.train.growth {
            Some(g) => {
                let grown = reff_train_grown(&a, &h, &tc, cfg.data.source, g, &tcfg)?;
                let n_pairs = grown.history.last().map_or(g.initial_n, |r| r.n_pairs);
                (grown.outcome, n_pairs, grown.generalized_at, grown.history)
            }
            None => {
                let d = match data {
                    Some(p) => load_dataset(run, p, cfg)?,
                    None => {
                        let d = dataset_from_config(cfg)?;
                        run.write("dataset.json", d.to_json()?.as_bytes())?;
                        d
                    }
                };
                let monitor = Monitor { validation: None, target: target.as_ref(), every: 10 };
                (reff_train_from(&a, &d, &tcfg, None, &monitor)?, d.len(), None, Vec::new())
            }
        };
    let seconds = start.elapsed().as_secs_f64();
    let infidelity = match &target {
        Some(u) => Some(1.0 - reff_core::cost::average_fidelity(u, &a.unitary(&outcome.theta, &outcome.gamma, tc.dt)?)?),
        None => None,
    };
    run.write_csv("trace.csv", &outcome.trace)?;
    let params = ParamsFile {
        format_version: PARAMS_VERSION,
        ansatz: a,
        theta: outcome.theta,
        gamma: outcome.gamma,
        training: TrainingSummary {
            cost_kind: tcfg.cost,
            status: outcome.status,
            best_cost: outcome.best_cost,
            iterations: outcome.iterations,
            attempts: outcome.attempts,
            n_pairs,
            infidelity,
            seconds,
            generalized_at,
            growth,
        },
    };
    run.write_json("params.json", &params)?;
    let t = &params.training;
    println!(
        "train: {:?} after {} iterations ({} starts), cost {:.3e}, 1-F {} in {:.1}s",
        t.status,
        t.iterations,
        t.attempts,
        t.best_cost,
        t.infidelity.map_or("n/a".into(), |v| format!("{v:.3e}")),
        t.seconds
    );
    Ok(params)
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub training_cost: f64,
    pub cost_kind: CostKind,
    pub c_hst: Option<f64>,
    pub trotter_error: Option<f64>,
    pub gate_count: usize,
    pub n_pairs: usize,
    pub bounds: Vec<BoundReport>,
}

pub fn evaluate(
    cfg: &RunConfig,
    params_path: &Path,
    data: Option<&Path>,
    out: &Path,
) -> Result<(Vec<SeriesPoint>, EvalReport), CliError> {
    let mut run = Run::start(out, "evaluate", Some(cfg))?;
    let bytes = run.input(params_path)?;
    let params: ParamsFile = serde_json::from_slice(&bytes)?;
    if params.format_version != PARAMS_VERSION {
        return Err(reff_core::ReffError::FormatVersion(params.format_version).into());
    }
    let d = match data {
        Some(p) => load_dataset(&mut run, p, cfg)?,
        None => dataset_from_config(cfg)?,
    };
    let r = evaluate_in(&mut run, cfg, &params, &d)?;
    run.finish()?;
    Ok(r)
}

fn evaluate_in(
    run: &mut Run,
    cfg: &RunConfig,
    params: &ParamsFile,
    d: &Dataset,
) -> Result<(Vec<SeriesPoint>, EvalReport), CliError> {
    let a = &params.ansatz;
    if a.n() != cfg.n {
        return Err(CliError::Config(format!("parameters are for n = {}, config has n = {}", a.n(), cfg.n)));
    }
    let h = cfg.hamiltonian()?;
    let tc = cfg.trotter_config();
    let plan = cfg.plan();
    let series = fidelity_series(a, &params.theta, &params.gamma, &h, &tc, &plan)?;
    let mut csv = Vec::new();
    write_series_csv(&series, &mut csv)?;
    run.write("series.csv", &csv)?;

    let kind = cfg.train.cost_kind;
    let training_cost = empirical_cost(kind, a, &params.theta, &params.gamma, tc.dt, d)?;
    let k = gate_count(a);
    let g = Generalization { k: k as f64, n_pairs: d.len(), delta: cfg.bounds.delta, c: cfg.bounds.gen_constant };
    let m = plan.m_max;
    let dense = cfg.n <= dense_cap();
    let eps = if dense { Some(trotter_error(&h, &tc)?) } else { None };
    let mut bounds = vec![match kind {
        CostKind::Global => bound_product_global(cfg.n, m, eps.unwrap_or(0.0), training_cost.max(0.0), Some(g))?,
        CostKind::Local => bound_product_local(cfg.n, m, eps.unwrap_or(0.0), training_cost.max(0.0), Some(g))?,
    }];
    let c_hst = if dense {
        let c = cost_hst(&trotter_unitary(&h, &tc)?, &a.unitary(&params.theta, &params.gamma, tc.dt)?)?.max(0.0);
        bounds.push(bound_nested_exact(cfg.n, m, 0.0, c)?);
        bounds.push(bound_nested_exact(cfg.n, m, eps.unwrap_or(0.0), c)?);
        Some(c)
    } else {
        None
    };
    let report =
        EvalReport { training_cost, cost_kind: kind, c_hst, trotter_error: eps, gate_count: k, n_pairs: d.len(), bounds };
    run.write_json("bounds.json", &report)?;
    if let Some(last) = series.last() {
        println!(
            "evaluate: M = {}: 1-F vs Trotter {}, vs exact {}",
            last.m,
            last.fid_vs_trotter.map_or("n/a".into(), |f| format!("{:.3e}", 1.0 - f)),
            last.fid_vs_exact.map_or("n/a".into(), |f| format!("{:.3e}", 1.0 - f)),
        );
    }
    Ok((series, report))
}

/// Generates data, trains and evaluates in one directory.
pub fn pipeline(cfg: &RunConfig, out: &Path) -> Result<(ParamsFile, Vec<SeriesPoint>, EvalReport), CliError> {
    let mut run = Run::start(out, "pipeline", Some(cfg))?;
    let params = train_in(&mut run, cfg, None)?;
    let d = dataset_from_config(cfg)?;
    let (series, report) = evaluate_in(&mut run, cfg, &params, &d)?;
    run.finish()?;
    Ok((params, series, report))
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsOutput {
    pub trotter_error: f64,
    pub gate_count: usize,
    pub termination_threshold: Threshold,
    pub remark_threshold: Threshold,
    pub required_dataset_size: u64,
    pub cost: f64,
    pub reports: Vec<BoundReport>,
}

pub fn bounds(cfg: &RunConfig, out: &Path) -> Result<BoundsOutput, CliError> {
    let h = cfg.hamiltonian()?;
    let eps = trotter_error(&h, &cfg.trotter_config())?;
    let a = cfg.ansatz()?;
    let b = &cfg.bounds;
    let k = gate_count(&a);
    let m0 = b.m0 as f64;
    let term = termination_threshold(b.eps_target, m0, eps, cfg.n);
    let cost = b.cost.unwrap_or(term.value.max(0.0));
    let g = Generalization { k: k as f64, n_pairs: cfg.data.n_pairs, delta: b.delta, c: b.gen_constant };
    let reports = vec![
        bound_product_global(cfg.n, b.m0, eps, cost, Some(g))?,
        bound_product_local(cfg.n, b.m0, eps, cost, Some(g))?,
        bound_entangled_global(cfg.n, b.m0, eps, cost, Some(g))?,
    ];
    let o = BoundsOutput {
        trotter_error: eps,
        gate_count: k,
        termination_threshold: term,
        remark_threshold: remark_threshold(b.eps_target, m0, eps, cfg.n),
        required_dataset_size: required_dataset_size(m0, k as f64, b.eps_target)?,
        cost,
        reports,
    };
    let mut run = Run::start(out, "bounds", Some(cfg))?;
    run.write_json("bounds.json", &o)?;
    run.finish()?;
    if !term.certifiable {
        println!("bounds: termination threshold {:.3e} is negative; Trotter error alone exceeds the budget", term.value);
    }
    for r in &o.reports {
        println!("bounds: {:?} at M = {}: {:.6} (c = 0: {:.6})", r.kind, r.inputs.m, r.lower_bound, r.lower_bound_c0);
    }
    Ok(o)
}

pub fn verify(cfg: Option<&RunConfig>, out: &Path) -> Result<Vec<OracleReport>, CliError> {
    let v = cfg.map(|c| c.verify.clone()).unwrap_or_default();
    let mut run = Run::start(out, "verify", cfg)?;
    let start = Instant::now();
    let reports = verify_suite(RngSeed(v.seed), v.scale())?;
    run.write_json("oracles.json", &reports)?;
    run.finish()?;
    for r in &reports {
        println!("{} {:<32} {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    println!("verify: {} of {} passed in {:.1}s", reports.len() - failed.len(), reports.len(), start.elapsed().as_secs_f64());
    if !failed.is_empty() {
        return Err(CliError::Oracle(failed.join(", ")));
    }
    Ok(reports)
}
