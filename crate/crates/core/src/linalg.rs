//! Small dense complex helpers shared by the estimators.

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Seedable generator used for every random draw in the crate.
pub type SimRng = ChaCha12Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// SplitMix64 finalizer; used to derive independent stream seeds from a base seed.
pub fn mix_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws CN(0, variance): real and imaginary parts are independent N(0, variance/2).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(s * re, s * im)
}

/// Matrix of i.i.d. CN(0, variance) entries, filled column by column.
pub fn gaussian_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    variance: f64,
) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            m[(r, c)] = complex_gaussian(rng, variance);
        }
    }
    m
}

pub fn frobenius_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Largest entrywise modulus of `a - b`. Shapes must agree.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff: shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest deviation of `m` from `scale * I`.
pub fn max_abs_from_scaled_identity(m: &CMatrix, scale: f64) -> f64 {
    let mut worst = 0.0f64;
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let target = if r == c { scale } else { 0.0 };
            worst = worst.max((m[(r, c)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Largest |m_ij - conj(m_ji)|.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Ratio of smallest to largest singular value; 0 for an all-zero matrix.
pub fn reciprocal_condition(m: &CMatrix) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0.0;
    }
    sv.min() / max
}

pub fn real_diag(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(
        values.len(),
        values.iter().map(|&v| C64::new(v, 0.0)),
    ))
}

pub fn from_real(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| C64::new(v, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mix_seed_separates_streams() {
        let a = mix_seed(7, 0);
        let b = mix_seed(7, 1);
        let c = mix_seed(8, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, mix_seed(7, 0));
    }

    #[test]
    fn complex_gaussian_has_requested_variance() {
        let mut rng = rng_from_seed(11);
        let n = 200_000;
        let var = 2.5;
        let mut acc = 0.0;
        for _ in 0..n {
            acc += complex_gaussian(&mut rng, var).norm_sqr();
        }
        let mean = acc / n as f64;
        // |z|^2 ~ var * Exp(1): standard error var / sqrt(n)
        assert!((mean - var).abs() < 5.0 * var / (n as f64).sqrt());
    }

    #[test]
    fn rcond_of_identity_is_one() {
        let i = CMatrix::identity(5, 5);
        assert!((reciprocal_condition(&i) - 1.0).abs() < 1e-14);
        assert_eq!(reciprocal_condition(&CMatrix::zeros(3, 3)), 0.0);
    }
}
