//! Parameterized circuits and the diagonalizing ansatz `V(t) = W D(t) W^dag`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, ReffError, Result};
use crate::qsim::gate::{apply_raw, check_targets};
use crate::qsim::{check_state, DenseOperator, GateMatrix, StateVector, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GateKind {
    /// `exp(-i theta Z / 2)`.
    Rz,
    /// `exp(-i theta Z Z / 2)`.
    Rzz,
    /// Identity on `|00>, |11>`; `[[cos, -sin], [sin, cos]]` on `|01>, |10>`.
    Givens,
    /// Number-conserving gate with four angles.
    Sym,
    /// Parameter-free gate, row-major `(re, im)` entries.
    Fixed { matrix: Vec<[f64; 2]> },
}

impl GateKind {
    pub fn arity(&self) -> Option<usize> {
        match self {
            GateKind::Rz => Some(1),
            GateKind::Rzz | GateKind::Givens | GateKind::Sym => Some(2),
            GateKind::Fixed { .. } => None,
        }
    }

    pub fn n_params(&self) -> usize {
        match self {
            GateKind::Rz | GateKind::Rzz | GateKind::Givens => 1,
            GateKind::Sym => 4,
            GateKind::Fixed { .. } => 0,
        }
    }

    /// Whether the gate acts diagonally in the computational basis.
    pub fn is_diagonal(&self) -> bool {
        matches!(self, GateKind::Rz | GateKind::Rzz)
    }

    pub fn matrix(&self, angles: &[f64]) -> GateMatrix {
        match self {
            GateKind::Rz => rz(angles[0]),
            GateKind::Rzz => rzz(angles[0]),
            GateKind::Givens => givens(angles[0]),
            GateKind::Sym => sym(angles[0], angles[1], angles[2], angles[3]),
            GateKind::Fixed { matrix } => GateMatrix::Dense(matrix.iter().map(|z| C64::new(z[0], z[1])).collect()),
        }
    }
}

pub fn rz(theta: f64) -> GateMatrix {
    let a = C64::from_polar(1.0, -theta / 2.0);
    GateMatrix::Diagonal(vec![a, a.conj()])
}

pub fn rzz(theta: f64) -> GateMatrix {
    let a = C64::from_polar(1.0, -theta / 2.0);
    GateMatrix::Diagonal(vec![a, a.conj(), a.conj(), a])
}

pub fn givens(theta: f64) -> GateMatrix {
    let (s, c) = theta.sin_cos();
    let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    let (c, s) = (C64::new(c, 0.0), C64::new(s, 0.0));
    GateMatrix::Dense(vec![l, o, o, o, o, c, -s, o, o, s, c, o, o, o, o, l])
}

pub fn sym(t1: f64, t2: f64, t3: f64, t4: f64) -> GateMatrix {
    let (s, c) = t2.sin_cos();
    let o = C64::new(0.0, 0.0);
    let e = |phi: f64| C64::from_polar(1.0, phi);
    GateMatrix::Dense(vec![
        e(t1),
        o,
        o,
        o,
        o,
        C64::new(c, 0.0),
        -e(t3) * s,
        o,
        o,
        e(t4) * s,
        e(t3 + t4) * c,
        o,
        o,
        o,
        o,
        C64::new(1.0, 0.0),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSpec {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    /// Indices into the circuit's flat parameter vector.
    pub params: Vec<usize>,
}

/// Ordered gate list; gate 0 is applied first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCircuit")]
pub struct ParamCircuit {
    n: usize,
    n_params: usize,
    gates: Vec<GateSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCircuit {
    n: usize,
    n_params: usize,
    gates: Vec<GateSpec>,
}

impl TryFrom<RawCircuit> for ParamCircuit {
    type Error = ReffError;

    fn try_from(raw: RawCircuit) -> Result<Self> {
        ParamCircuit::new(raw.n, raw.n_params, raw.gates)
    }
}

/// A compiled gate: matrix plus targets.
pub type Compiled = (GateMatrix, Vec<usize>);

impl ParamCircuit {
    pub fn new(n: usize, n_params: usize, gates: Vec<GateSpec>) -> Result<Self> {
        check_state(n, "circuit")?;
        for g in &gates {
            check_targets(n, &g.targets)?;
            let k = g.targets.len();
            match (&g.kind, g.kind.arity()) {
                (_, Some(a)) if a != k => {
                    return Err(invalid(format!("{:?} gate needs {a} targets, got {k}", g.kind)));
                }
                (GateKind::Fixed { matrix }, None) if matrix.len() != 1 << (2 * k) => {
                    return Err(ReffError::DimensionMismatch { expected: 1 << (2 * k), found: matrix.len() });
                }
                _ => {}
            }
            if g.params.len() != g.kind.n_params() {
                return Err(ReffError::ParamLength { expected: g.kind.n_params(), found: g.params.len() });
            }
            if let Some(&p) = g.params.iter().find(|&&p| p >= n_params) {
                return Err(invalid(format!("parameter slot {p} out of range ({n_params} parameters)")));
            }
        }
        Ok(Self { n, n_params, gates })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn gates(&self) -> &[GateSpec] {
        &self.gates
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params {
            return Err(ReffError::ParamLength { expected: self.n_params, found: params.len() });
        }
        Ok(())
    }

    /// Gate matrices with every angle multiplied by `scale`.
    pub fn compile(&self, params: &[f64], scale: f64) -> Result<Vec<Compiled>> {
        self.check_params(params)?;
        Ok(self
            .gates
            .iter()
            .map(|g| {
                let angles: Vec<f64> = g.params.iter().map(|&p| params[p] * scale).collect();
                (g.kind.matrix(&angles), g.targets.clone())
            })
            .collect())
    }

    /// The inverse circuit, compiled.
    pub fn compile_adjoint(&self, params: &[f64], scale: f64) -> Result<Vec<Compiled>> {
        let mut c = self.compile(params, scale)?;
        c.reverse();
        for (m, _) in c.iter_mut() {
            *m = m.adjoint();
        }
        Ok(c)
    }

    pub fn apply(&self, params: &[f64], state: &mut StateVector) -> Result<()> {
        self.check_width(state)?;
        run(&self.compile(params, 1.0)?, state);
        Ok(())
    }

    pub fn unitary(&self, params: &[f64]) -> Result<DenseOperator> {
        let c = self.compile(params, 1.0)?;
        DenseOperator::from_columns(self.n, |j| {
            let mut s = StateVector::basis(self.n, j)?;
            run(&c, &mut s);
            Ok(s)
        })
    }

    fn check_width(&self, state: &StateVector) -> Result<()> {
        if state.n() != self.n {
            return Err(ReffError::DimensionMismatch { expected: self.n, found: state.n() });
        }
        Ok(())
    }

    pub fn stats(&self) -> CircuitStats {
        let mut busy = vec![0usize; self.n];
        let mut depth = 0;
        for g in &self.gates {
            let t = g.targets.iter().map(|&q| busy[q]).max().unwrap_or(0) + 1;
            for &q in &g.targets {
                busy[q] = t;
            }
            depth = depth.max(t);
        }
        CircuitStats {
            gate_count: self.gates.len(),
            two_qubit_gate_count: self.gates.iter().filter(|g| g.targets.len() == 2).count(),
            depth,
            n_params: self.n_params,
        }
    }
}

pub(crate) fn run(compiled: &[Compiled], state: &mut StateVector) {
    let n = state.n();
    for (m, t) in compiled {
        apply_raw(state.amps_mut(), n, m, t);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitStats {
    pub gate_count: usize,
    pub two_qubit_gate_count: usize,
    /// ASAP-scheduled layer count.
    pub depth: usize,
    pub n_params: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Entangler {
    Givens,
    Sym,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DiagonalModel {
    /// One `RZ` per qubit.
    Xy,
    /// One `RZ` per qubit and `RZZ` on every pair.
    Heisenberg,
}

pub fn default_layers(n: usize) -> usize {
    (3 * n).div_ceil(2)
}

/// Brickwork of two-qubit gates. Each layer holds the pairs `(0,1), (2,3), ...`
/// followed by `(1,2), (3,4), ...`, so `n - 1` gates per layer.
pub fn build_brickwork(n: usize, layers: usize, kind: Entangler) -> Result<ParamCircuit> {
    if n < 2 {
        return Err(invalid("brickwork needs n >= 2"));
    }
    let gk = match kind {
        Entangler::Givens => GateKind::Givens,
        Entangler::Sym => GateKind::Sym,
    };
    let per = gk.n_params();
    let mut gates = Vec::new();
    let mut next = 0;
    for _ in 0..layers {
        for start in [0, 1] {
            for i in (start..n - 1).step_by(2) {
                gates.push(GateSpec { kind: gk.clone(), targets: vec![i, i + 1], params: (next..next + per).collect() });
                next += per;
            }
        }
    }
    ParamCircuit::new(n, next, gates)
}

pub fn build_diagonal(n: usize, model: DiagonalModel) -> Result<ParamCircuit> {
    let mut gates: Vec<GateSpec> = (0..n).map(|q| GateSpec { kind: GateKind::Rz, targets: vec![q], params: vec![q] }).collect();
    if model == DiagonalModel::Heisenberg {
        for i in 0..n {
            for j in i + 1..n {
                let p = gates.len();
                gates.push(GateSpec { kind: GateKind::Rzz, targets: vec![i, j], params: vec![p] });
            }
        }
    }
    let np = gates.len();
    ParamCircuit::new(n, np, gates)
}

/// `V(t) = W(theta) D(t gamma / dt_ref) W(theta)^dag`. The diagonal angles
/// `gamma` are those of one reference step `dt_ref`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VffAnsatz {
    pub w: ParamCircuit,
    pub d: ParamCircuit,
    pub dt_ref: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Model {
    Xy,
    Heisenberg,
}

impl VffAnsatz {
    pub fn new(w: ParamCircuit, d: ParamCircuit, dt_ref: f64) -> Result<Self> {
        if w.n() != d.n() {
            return Err(ReffError::DimensionMismatch { expected: w.n(), found: d.n() });
        }
        if !(dt_ref.is_finite() && dt_ref > 0.0) {
            return Err(invalid("dt_ref must be positive"));
        }
        if d.gates().iter().any(|g| !g.kind.is_diagonal()) {
            return Err(invalid("D circuit must contain only diagonal gates"));
        }
        Ok(Self { w, d, dt_ref })
    }

    /// XY uses Givens entanglers and an `RZ` layer; Heisenberg uses SYM
    /// entanglers and `RZ` plus all-pairs `RZZ`.
    pub fn build(n: usize, model: Model, dt_ref: f64, layers: Option<usize>) -> Result<Self> {
        let layers = layers.unwrap_or_else(|| default_layers(n));
        let (ent, diag) = match model {
            Model::Xy => (Entangler::Givens, DiagonalModel::Xy),
            Model::Heisenberg => (Entangler::Sym, DiagonalModel::Heisenberg),
        };
        Self::new(build_brickwork(n, layers, ent)?, build_diagonal(n, diag)?, dt_ref)
    }

    pub fn n(&self) -> usize {
        self.w.n()
    }

    pub fn n_theta(&self) -> usize {
        self.w.n_params()
    }

    pub fn n_gamma(&self) -> usize {
        self.d.n_params()
    }

    pub fn stats(&self) -> CircuitStats {
        self.w.stats()
    }

    /// Compiled `W(theta_l) D(t) W(theta_r)^dag` in application order.
    pub fn compile_split(&self, theta_l: &[f64], gamma: &[f64], theta_r: &[f64], t: f64) -> Result<Vec<Compiled>> {
        let mut c = self.w.compile_adjoint(theta_r, 1.0)?;
        c.extend(self.d.compile(gamma, t / self.dt_ref)?);
        c.extend(self.w.compile(theta_l, 1.0)?);
        Ok(c)
    }

    /// Compiled `(W(theta_l) D(t) W(theta_r)^dag)^dag`.
    pub fn compile_split_adjoint(&self, theta_l: &[f64], gamma: &[f64], theta_r: &[f64], t: f64) -> Result<Vec<Compiled>> {
        let mut c = self.w.compile_adjoint(theta_l, 1.0)?;
        c.extend(self.d.compile_adjoint(gamma, t / self.dt_ref)?);
        c.extend(self.w.compile(theta_r, 1.0)?);
        Ok(c)
    }

    pub fn apply(&self, theta: &[f64], gamma: &[f64], t: f64, state: &mut StateVector) -> Result<()> {
        self.w.check_width(state)?;
        run(&self.compile_split(theta, gamma, theta, t)?, state);
        Ok(())
    }

    pub fn unitary(&self, theta: &[f64], gamma: &[f64], t: f64) -> Result<DenseOperator> {
        let c = self.compile_split(theta, gamma, theta, t)?;
        let n = self.n();
        DenseOperator::from_columns(n, |j| {
            let mut s = StateVector::basis(n, j)?;
            run(&c, &mut s);
            Ok(s)
        })
    }
}

pub fn vff_unitary(a: &VffAnsatz, theta: &[f64], gamma: &[f64], t: f64) -> Result<DenseOperator> {
    a.unitary(theta, gamma, t)
}

pub fn apply_vff(a: &VffAnsatz, theta: &[f64], gamma: &[f64], t: f64, state: &mut StateVector) -> Result<()> {
    a.apply(theta, gamma, t, state)
}

pub fn circuit_stats(c: &ParamCircuit) -> CircuitStats {
    c.stats()
}
