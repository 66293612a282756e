//! Training data: product (or Haar) inputs evolved by the Trotter circuit.

use std::fs;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, ReffError, Result};
use crate::hamiltonian::{apply_trotter, PauliSumHamiltonian, TrotterConfig};
use crate::qsim::{haar_random_state, haar_single_qubit, RngSeed, StateVector, C64};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InputSource {
    /// Haar-random single-qubit factors.
    HaarProduct,
    /// Factors drawn uniformly from the six single-qubit stabilizer states.
    StabilizerProduct,
    /// Haar-random `n`-qubit states (no factors, global cost only).
    HaarN,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPair {
    pub input: StateVector,
    /// Single-qubit factors of `input`, when it is a product state.
    pub factors: Option<Vec<[C64; 2]>>,
    pub output: StateVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub n: usize,
    pub source: InputSource,
    pub hamiltonian: PauliSumHamiltonian,
    pub trotter: TrotterConfig,
    pub seed: RngSeed,
    pub pairs: Vec<TrainingPair>,
}

/// First column of a Haar-random `2 x 2` unitary.
pub fn sample_haar_single_qubit(rng: &mut impl Rng) -> [C64; 2] {
    haar_single_qubit(rng)
}

/// One of `|0>, |1>, |+>, |->, |+i>, |-i>` with equal probability.
pub fn sample_stabilizer_single_qubit(rng: &mut impl Rng) -> [C64; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    match rng.random_range(0..6) {
        0 => [l, o],
        1 => [o, l],
        2 => [C64::new(h, 0.0), C64::new(h, 0.0)],
        3 => [C64::new(h, 0.0), C64::new(-h, 0.0)],
        4 => [C64::new(h, 0.0), C64::new(0.0, h)],
        _ => [C64::new(h, 0.0), C64::new(0.0, -h)],
    }
}

fn sample_pair(
    h: &PauliSumHamiltonian,
    trotter: &TrotterConfig,
    source: InputSource,
    rng: &mut impl Rng,
) -> Result<TrainingPair> {
    let n = h.n();
    let (input, factors) = match source {
        InputSource::HaarN => (haar_random_state(n, rng)?, None),
        InputSource::HaarProduct | InputSource::StabilizerProduct => {
            let f: Vec<[C64; 2]> = (0..n)
                .map(|_| match source {
                    InputSource::HaarProduct => sample_haar_single_qubit(rng),
                    _ => sample_stabilizer_single_qubit(rng),
                })
                .collect();
            (StateVector::product(&f)?, Some(f))
        }
    };
    let mut output = input.clone();
    apply_trotter(h, trotter, &mut output)?;
    Ok(TrainingPair { input, factors, output })
}

/// `count` pairs; pair `j` draws from stream `(seed, first + j)` so datasets
/// can be extended without changing earlier pairs.
pub fn generate_pairs(
    h: &PauliSumHamiltonian,
    trotter: &TrotterConfig,
    count: usize,
    source: InputSource,
    seed: RngSeed,
    first: u64,
) -> Result<Vec<TrainingPair>> {
    trotter.validate()?;
    crate::qsim::check_state(h.n(), "dataset")?;
    (0..count as u64).into_par_iter().map(|j| sample_pair(h, trotter, source, &mut seed.stream(first + j))).collect()
}

pub fn generate_dataset(
    h: &PauliSumHamiltonian,
    trotter: &TrotterConfig,
    count: usize,
    source: InputSource,
    seed: RngSeed,
) -> Result<Dataset> {
    if count == 0 {
        return Err(invalid("dataset size must be at least 1"));
    }
    Ok(Dataset {
        n: h.n(),
        source,
        hamiltonian: h.clone(),
        trotter: *trotter,
        seed,
        pairs: generate_pairs(h, trotter, count, source, seed, 0)?,
    })
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The first `k` pairs.
    pub fn truncated(&self, k: usize) -> Dataset {
        Dataset { pairs: self.pairs[..k.min(self.pairs.len())].to_vec(), ..self.clone() }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&DatasetFile::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Dataset> {
        let f: DatasetFile = serde_json::from_str(s)?;
        f.try_into()
    }
}

pub fn save_dataset(d: &Dataset, path: &Path) -> Result<()> {
    fs::write(path, d.to_json()?)?;
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    Dataset::from_json(&fs::read_to_string(path)?)
}

type Amp = [f64; 2];

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetHeader {
    format_version: u32,
    n: usize,
    #[serde(rename = "N")]
    count: usize,
    source: InputSource,
    hamiltonian: PauliSumHamiltonian,
    trotter: TrotterConfig,
    seed: RngSeed,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    factors: Option<Vec<[Amp; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input: Option<Vec<Amp>>,
    output: Vec<Amp>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile {
    header: DatasetHeader,
    pairs: Vec<PairRecord>,
}

fn amp(z: &C64) -> Amp {
    [z.re, z.im]
}

fn cplx(a: &Amp) -> C64 {
    C64::new(a[0], a[1])
}

impl From<&Dataset> for DatasetFile {
    fn from(d: &Dataset) -> Self {
        DatasetFile {
            header: DatasetHeader {
                format_version: FORMAT_VERSION,
                n: d.n,
                count: d.pairs.len(),
                source: d.source,
                hamiltonian: d.hamiltonian.clone(),
                trotter: d.trotter,
                seed: d.seed,
            },
            pairs: d
                .pairs
                .iter()
                .map(|p| PairRecord {
                    factors: p.factors.as_ref().map(|f| f.iter().map(|v| [amp(&v[0]), amp(&v[1])]).collect()),
                    input: if p.factors.is_none() { Some(p.input.amps().iter().map(amp).collect()) } else { None },
                    output: p.output.amps().iter().map(amp).collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<DatasetFile> for Dataset {
    type Error = ReffError;

    fn try_from(f: DatasetFile) -> Result<Self> {
        let h = f.header;
        if h.format_version != FORMAT_VERSION {
            return Err(ReffError::FormatVersion(h.format_version));
        }
        if h.count != f.pairs.len() {
            return Err(invalid(format!("header says {} pairs, found {}", h.count, f.pairs.len())));
        }
        if h.hamiltonian.n() != h.n {
            return Err(ReffError::DimensionMismatch { expected: h.n, found: h.hamiltonian.n() });
        }
        h.trotter.validate()?;
        let pairs = f
            .pairs
            .into_iter()
            .map(|r| {
                let (input, factors) = match (r.factors, r.input) {
                    (Some(fs), _) => {
                        if fs.len() != h.n {
                            return Err(ReffError::DimensionMismatch { expected: h.n, found: fs.len() });
                        }
                        let fs: Vec<[C64; 2]> = fs.iter().map(|v| [cplx(&v[0]), cplx(&v[1])]).collect();
                        (StateVector::product(&fs)?, Some(fs))
                    }
                    (None, Some(amps)) => (StateVector::new(amps.iter().map(cplx).collect())?, None),
                    (None, None) => return Err(invalid("pair record has neither factors nor input")),
                };
                let output = StateVector::new(r.output.iter().map(cplx).collect())?;
                if output.n() != h.n || input.n() != h.n {
                    return Err(ReffError::DimensionMismatch { expected: h.n, found: output.n() });
                }
                Ok(TrainingPair { input, factors, output })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset { n: h.n, source: h.source, hamiltonian: h.hamiltonian, trotter: h.trotter, seed: h.seed, pairs })
    }
}
