//! Run configuration, one TOML file per run.

use serde::{Deserialize, Serialize};

use reff_core::ansatz::{build_brickwork, build_diagonal, default_layers, DiagonalModel, Entangler, Model};
use reff_core::eval::{FastForwardPlan, Reference};
use reff_core::hamiltonian::{build_heisenberg_chain, build_xy_chain};
use reff_core::qsim::{check_state, STATE_CAP};
use reff_core::train::GrowthConfig;
use reff_core::verify::SuiteScale;
use reff_core::{CostKind, InputSource, OptimizerKind, PauliSumHamiltonian, RngSeed, TrainConfig, TrotterConfig, VffAnsatz};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Model,
    pub n: usize,
    #[serde(default)]
    pub periodic: bool,
    /// Worker threads; hardware parallelism when absent.
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub trotter: TrotterSection,
    #[serde(default)]
    pub ansatz: AnsatzSection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub eval: EvalSection,
    #[serde(default)]
    pub bounds: BoundsSection,
    #[serde(default)]
    pub verify: VerifySection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrotterSection {
    pub order: u8,
    pub r: usize,
    pub dt: f64,
}

impl Default for TrotterSection {
    fn default() -> Self {
        Self { order: 2, r: 1, dt: 0.1 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnsatzSection {
    /// Entangler for `W`; Givens for XY and SYM for Heisenberg when absent.
    pub kind: Option<Entangler>,
    pub layers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    pub source: InputSource,
    #[serde(rename = "N")]
    pub n_pairs: usize,
    pub seed: u64,
}

impl Default for DataSection {
    fn default() -> Self {
        Self { source: InputSource::HaarProduct, n_pairs: 1, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub optimizer: OptimizerKind,
    pub rate: f64,
    pub target_cost: f64,
    pub cost_kind: CostKind,
    pub max_iters: usize,
    pub seed: u64,
    pub init_scale: f64,
    /// Fresh random starts allowed after a plateau.
    pub restarts: usize,
    pub plateau_window: usize,
    /// Step-size cuts tried on a plateau before a fresh start.
    pub lr_decays: usize,
    pub growth: Option<GrowthConfig>,
}

impl Default for TrainSection {
    fn default() -> Self {
        let d = TrainConfig::default();
        Self {
            optimizer: d.optimizer,
            rate: d.learning_rate,
            target_cost: d.target_cost,
            cost_kind: d.cost,
            max_iters: d.max_iters,
            seed: d.seed.0,
            init_scale: d.init_scale,
            restarts: d.restarts,
            plateau_window: d.plateau_window,
            lr_decays: d.lr_decays,
            growth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    #[serde(rename = "M_max")]
    pub m_max: u64,
    pub reference: Reference,
    pub resolution: u32,
    pub stride: u64,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for EvalSection {
    fn default() -> Self {
        let p = FastForwardPlan::new(100, Reference::Both);
        Self { m_max: p.m_max, reference: p.reference, resolution: 1, stride: 1, mc_samples: p.mc_samples, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsSection {
    pub delta: f64,
    pub gen_constant: f64,
    #[serde(rename = "M0")]
    pub m0: u64,
    pub eps_target: f64,
    /// Training cost to certify; the termination threshold when absent.
    pub cost: Option<f64>,
}

impl Default for BoundsSection {
    fn default() -> Self {
        Self { delta: 0.01, gen_constant: 1.0, m0: 10, eps_target: 0.01, cost: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub seed: u64,
    pub mc_samples: usize,
    pub pair_trials: usize,
    pub gradient_instances: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        let s = SuiteScale::default();
        Self { seed: 2024, mc_samples: s.mc_samples, pair_trials: s.pair_trials, gradient_instances: s.gradient_instances }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every section without doing any simulation work.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.n < 2 {
            return Err(CliError::Config(format!("n must be at least 2, got {}", self.n)));
        }
        if self.n > STATE_CAP {
            check_state(self.n, "run")?;
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be positive".into()));
        }
        self.trotter_config().validate().map_err(config_err)?;
        self.train_config().validate().map_err(config_err)?;
        self.plan().validate().map_err(config_err)?;
        if self.data.n_pairs == 0 {
            return Err(CliError::Config("data.N must be at least 1".into()));
        }
        if self.train.cost_kind == CostKind::Local && self.data.source == InputSource::HaarN {
            return Err(CliError::Config("local cost needs product inputs".into()));
        }
        if self.ansatz.layers == Some(0) {
            return Err(CliError::Config("ansatz.layers must be positive".into()));
        }
        let b = &self.bounds;
        if !(b.delta > 0.0 && b.delta < 1.0) || b.gen_constant < 0.0 || b.m0 == 0 || b.eps_target <= 0.0 {
            return Err(CliError::Config("bounds need 0 < delta < 1, gen_constant >= 0, M0 >= 1, eps_target > 0".into()));
        }
        if b.cost.is_some_and(|c| !(0.0..=1.0).contains(&c)) {
            return Err(CliError::Config("bounds.cost must lie in [0, 1]".into()));
        }
        if let Some(g) = &self.train.growth {
            if g.initial_n == 0 || g.step == 0 || g.validation_n == 0 || g.round_iters == 0 {
                return Err(CliError::Config("growth sizes must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn hamiltonian(&self) -> Result<PauliSumHamiltonian, CliError> {
        Ok(match self.model {
            Model::Xy => build_xy_chain(self.n, self.periodic)?,
            Model::Heisenberg => build_heisenberg_chain(self.n, self.periodic)?,
        })
    }

    pub fn trotter_config(&self) -> TrotterConfig {
        TrotterConfig::new(self.trotter.dt, self.trotter.order, self.trotter.r)
    }

    pub fn ansatz(&self) -> Result<VffAnsatz, CliError> {
        let (ent, diag) = match self.model {
            Model::Xy => (Entangler::Givens, DiagonalModel::Xy),
            Model::Heisenberg => (Entangler::Sym, DiagonalModel::Heisenberg),
        };
        let layers = self.ansatz.layers.unwrap_or_else(|| default_layers(self.n));
        let w = build_brickwork(self.n, layers, self.ansatz.kind.unwrap_or(ent))?;
        Ok(VffAnsatz::new(w, build_diagonal(self.n, diag)?, self.trotter.dt)?)
    }

    pub fn train_config(&self) -> TrainConfig {
        let t = &self.train;
        TrainConfig {
            cost: t.cost_kind,
            optimizer: t.optimizer,
            learning_rate: t.rate,
            max_iters: t.max_iters,
            target_cost: t.target_cost,
            init_scale: t.init_scale,
            restarts: t.restarts,
            plateau_window: t.plateau_window,
            lr_decays: t.lr_decays,
            seed: RngSeed(t.seed),
            ..TrainConfig::default()
        }
    }

    pub fn plan(&self) -> FastForwardPlan {
        let e = &self.eval;
        FastForwardPlan {
            m_max: e.m_max,
            resolution: e.resolution,
            stride: e.stride,
            reference: e.reference,
            mc_samples: e.mc_samples,
            seed: RngSeed(e.seed),
        }
    }
}

impl VerifySection {
    pub fn scale(&self) -> SuiteScale {
        SuiteScale { mc_samples: self.mc_samples, pair_trials: self.pair_trials, gradient_instances: self.gradient_instances }
    }
}

fn config_err(e: reff_core::ReffError) -> CliError {
    CliError::Config(e.to_string())
}
