use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{check_dense, check_state, DenseOperator, StateVector, C64};
use crate::error::Result;

fn gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn haar_matrix(d: usize, rng: &mut impl Rng) -> DMatrix<C64> {
    let g = DMatrix::from_fn(d, d, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let rjj = r[(j, j)];
        let ph = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        q.column_mut(j).iter_mut().for_each(|z| *z *= ph);
    }
    q
}

/// Haar-distributed unitary on `n` qubits (Ginibre matrix, QR, phase fix from `diag(R)`).
pub fn haar_random_unitary(n: usize, rng: &mut impl Rng) -> Result<DenseOperator> {
    check_dense(n, "Haar unitary")?;
    Ok(DenseOperator::from_parts(n, haar_matrix(1 << n, rng)))
}

/// First column of a Haar-random `2 x 2` unitary.
pub fn haar_single_qubit(rng: &mut impl Rng) -> [C64; 2] {
    let q = haar_matrix(2, rng);
    [q[(0, 0)], q[(1, 0)]]
}

/// Haar-random pure state on `n` qubits, as a normalized complex Gaussian vector.
pub fn haar_random_state(n: usize, rng: &mut impl Rng) -> Result<StateVector> {
    check_state(n, "Haar state")?;
    let mut v: Vec<C64> = (0..1usize << n).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    Ok(StateVector::from_raw(n, v))
}

/// `(G + G^dag) / 2` for a Ginibre matrix `G`.
pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> Result<DenseOperator> {
    check_dense(n, "random Hermitian")?;
    let d = 1usize << n;
    let g = DMatrix::from_fn(d, d, |_, _| gaussian(rng));
    let h = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    Ok(DenseOperator::from_parts(n, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::RngSeed;

    #[test]
    fn haar_unitaries_are_unitary() {
        let mut rng = RngSeed(1).rng();
        for n in 1..=4 {
            assert!(haar_random_unitary(n, &mut rng).unwrap().unitarity_error() < 1e-12);
        }
    }

    #[test]
    fn haar_single_qubit_is_normalized() {
        let mut rng = RngSeed(2).rng();
        for _ in 0..100 {
            let v = haar_single_qubit(&mut rng);
            assert!((v[0].norm_sqr() + v[1].norm_sqr() - 1.0).abs() < 1e-14);
        }
    }

    // Entry second moment E[v_ij conj(v_pq)] = delta_ip delta_jq / d, checked at 3 sigma.
    #[test]
    fn entry_second_moment() {
        let mut rng = RngSeed(3).rng();
        let samples = 20_000;
        let d = 4;
        let pairs = [((0, 0), (0, 0)), ((1, 2), (1, 2)), ((0, 1), (1, 0)), ((2, 3), (2, 2))];
        let mut acc = vec![Vec::with_capacity(samples); pairs.len() * 2];
        for _ in 0..samples {
            let u = haar_matrix(d, &mut rng);
            for (k, ((i, j), (p, q))) in pairs.iter().enumerate() {
                let z = u[(*i, *j)] * u[(*p, *q)].conj();
                acc[2 * k].push(z.re);
                acc[2 * k + 1].push(z.im);
            }
        }
        for (k, ((i, j), (p, q))) in pairs.iter().enumerate() {
            let expect = if i == p && j == q { 1.0 / d as f64 } else { 0.0 };
            let (re, se) = crate::qsim::stats::mean_stderr(&acc[2 * k]);
            let (im, si) = crate::qsim::stats::mean_stderr(&acc[2 * k + 1]);
            assert!((re - expect).abs() <= 3.0 * se + 1e-12, "pair {k}: {re} vs {expect}");
            assert!(im.abs() <= 3.0 * si + 1e-12, "pair {k}: imag {im}");
        }
    }
}
