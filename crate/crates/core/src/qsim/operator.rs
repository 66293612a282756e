use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{check_dense, qubits_for_dim, StateVector, C64, UNITARY_TOL};
use crate::error::{invalid, ReffError, Result};

/// Dense operator on `n` qubits, `2^n x 2^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    n: usize,
    mat: DMatrix<C64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchattenP {
    One,
    Two,
    Inf,
}

impl DenseOperator {
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(ReffError::DimensionMismatch { expected: mat.nrows(), found: mat.ncols() });
        }
        let n = qubits_for_dim(mat.nrows())?;
        check_dense(n, "dense operator")?;
        Ok(Self { n, mat })
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_dense(n, "dense operator")?;
        let d = 1usize << n;
        Ok(Self { n, mat: DMatrix::identity(d, d) })
    }

    pub fn from_row_major(n: usize, data: &[C64]) -> Result<Self> {
        check_dense(n, "dense operator")?;
        let d = 1usize << n;
        if data.len() != d * d {
            return Err(ReffError::DimensionMismatch { expected: d * d, found: data.len() });
        }
        Ok(Self { n, mat: DMatrix::from_row_slice(d, d, data) })
    }

    /// Builds the operator column by column from its action on basis states.
    pub fn from_columns(n: usize, mut column: impl FnMut(usize) -> Result<StateVector>) -> Result<Self> {
        check_dense(n, "dense operator")?;
        let d = 1usize << n;
        let mut mat = DMatrix::zeros(d, d);
        for j in 0..d {
            let col = column(j)?;
            if col.dim() != d {
                return Err(ReffError::DimensionMismatch { expected: d, found: col.dim() });
            }
            mat.column_mut(j).copy_from_slice(col.amps());
        }
        Ok(Self { n, mat })
    }

    pub(crate) fn from_parts(n: usize, mat: DMatrix<C64>) -> Self {
        Self { n, mat }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.mat[(r, c)]
    }

    pub fn to_row_major(&self) -> Vec<C64> {
        self.mat.transpose().as_slice().to_vec()
    }

    pub fn adjoint(&self) -> Self {
        Self { n: self.n, mat: self.mat.adjoint() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self { n: self.n, mat: &self.mat * &other.mat })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self { n: self.n, mat: &self.mat + &other.mat })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self { n: self.n, mat: &self.mat - &other.mat })
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { n: self.n, mat: &self.mat * z }
    }

    pub fn kron(&self, other: &Self) -> Result<Self> {
        check_dense(self.n + other.n, "dense operator")?;
        Ok(Self { n: self.n + other.n, mat: self.mat.kronecker(&other.mat) })
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max-entry deviation of `U^dag U` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let p = self.mat.adjoint() * &self.mat;
        let mut worst: f64 = 0.0;
        for r in 0..p.nrows() {
            for c in 0..p.ncols() {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((p[(r, c)] - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_error() <= UNITARY_TOL
    }

    pub fn check_unitary(&self) -> Result<()> {
        let e = self.unitarity_error();
        if e > UNITARY_TOL || !e.is_finite() {
            return Err(ReffError::NotUnitary(e));
        }
        Ok(())
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.mat - self.mat.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.dim() != self.dim() {
            return Err(ReffError::DimensionMismatch { expected: self.dim(), found: state.dim() });
        }
        let d = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); d];
        for (c, a) in state.amps().iter().enumerate() {
            if *a == C64::new(0.0, 0.0) {
                continue;
            }
            for (r, o) in out.iter_mut().enumerate() {
                *o += self.mat[(r, c)] * a;
            }
        }
        Ok(StateVector::from_raw(self.n, out))
    }

    /// `self^m` by repeated squaring.
    pub fn pow(&self, mut m: u64) -> Self {
        let d = self.dim();
        let mut acc = DMatrix::<C64>::identity(d, d);
        let mut base = self.mat.clone();
        while m > 0 {
            if m & 1 == 1 {
                acc = &acc * &base;
            }
            m >>= 1;
            if m > 0 {
                base = &base * &base;
            }
        }
        Self { n: self.n, mat: acc }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(ReffError::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

/// Traces out every qubit not in `keep`. The result acts on the kept qubits
/// in ascending order.
pub fn partial_trace(op: &DenseOperator, keep: &[usize]) -> Result<DenseOperator> {
    let n = op.n();
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&q) = keep.iter().find(|&&q| q >= n) {
        return Err(ReffError::QubitOutOfRange { index: q, n });
    }
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let expand = |kept_bits: usize, traced_bits: usize| -> usize {
        let mut idx = 0;
        for (j, &q) in keep.iter().enumerate() {
            if (kept_bits >> (keep.len() - 1 - j)) & 1 == 1 {
                idx |= 1 << (n - 1 - q);
            }
        }
        for (j, &q) in traced.iter().enumerate() {
            if (traced_bits >> (traced.len() - 1 - j)) & 1 == 1 {
                idx |= 1 << (n - 1 - q);
            }
        }
        idx
    };
    let dk = 1usize << keep.len();
    let dt = 1usize << traced.len();
    let mut out = DMatrix::<C64>::zeros(dk, dk);
    for r in 0..dk {
        for c in 0..dk {
            let mut s = C64::new(0.0, 0.0);
            for t in 0..dt {
                s += op.matrix()[(expand(r, t), expand(c, t))];
            }
            out[(r, c)] = s;
        }
    }
    Ok(DenseOperator::from_parts(keep.len(), out))
}

pub fn schatten_norm(op: &DenseOperator, p: SchattenP) -> f64 {
    if p == SchattenP::Two {
        return op.frobenius_norm();
    }
    let sv = op.matrix().clone().svd(false, false).singular_values;
    match p {
        SchattenP::One => sv.iter().sum(),
        _ => sv.iter().cloned().fold(0.0, f64::max),
    }
}

/// Eigendecomposition of a Hermitian operator, reusable for `exp(-itH)` at many `t`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    n: usize,
    values: Vec<f64>,
    vectors: DMatrix<C64>,
}

impl HermitianEigen {
    pub fn new(h: &DenseOperator) -> Result<Self> {
        let herr = h.hermiticity_error();
        if herr > UNITARY_TOL || !herr.is_finite() {
            return Err(ReffError::NotHermitian(herr));
        }
        let eig = h.matrix().clone().symmetric_eigen();
        Ok(Self { n: h.n(), values: eig.eigenvalues.iter().cloned().collect(), vectors: eig.eigenvectors })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// `exp(-i t H)`.
    pub fn exp(&self, t: f64) -> DenseOperator {
        let mut scaled = self.vectors.clone();
        for (j, lam) in self.values.iter().enumerate() {
            let ph = C64::from_polar(1.0, -t * lam);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= ph);
        }
        DenseOperator::from_parts(self.n, scaled * self.vectors.adjoint())
    }
}

/// `exp(-i t H)` for Hermitian `H`.
pub fn hermitian_exp(h: &DenseOperator, t: f64) -> Result<DenseOperator> {
    if !t.is_finite() {
        return Err(invalid("evolution time must be finite"));
    }
    Ok(HermitianEigen::new(h)?.exp(t))
}
