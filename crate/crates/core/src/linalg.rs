//! Small dense complex linear-algebra helpers shared across the crate.
//!
//! Matrices are nalgebra `DMatrix<Complex64>`; all inner products follow the
//! convention `<X, Y> = trace(X^H Y)`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cis(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// `X X^H`.
pub fn gram(x: &CMat) -> CMat {
    x * x.adjoint()
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// `<A, B> = trace(A^H B)`.
pub fn inner(a: &CMat, b: &CMat) -> Complex64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Squared Frobenius norm.
pub fn norm_sq(m: &CMat) -> f64 {
    m.iter().map(|x| x.norm_sqr()).sum()
}

pub fn vec_norm_sq(v: &CVec) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

/// Cholesky of the Hermitian part; `None` unless every pivot is real and
/// positive (the complex factorization happily takes roots of negatives).
fn cholesky(m: &CMat) -> Option<Cholesky<Complex64, Dyn>> {
    let ch = Cholesky::new(hermitian_part(m))?;
    let ok = ch
        .l_dirty()
        .diagonal()
        .iter()
        .all(|d| d.re > 0.0 && d.re.is_finite() && d.im.abs() <= 1e-12 * d.re);
    ok.then_some(ch)
}

/// True when the Hermitian part admits a Cholesky factorization.
pub fn is_hpd(m: &CMat) -> bool {
    cholesky(m).is_some()
}

/// Natural log-determinant of a Hermitian positive definite matrix.
///
/// Cholesky on the symmetrized matrix; falls back to the eigenvalues when the
/// factorization breaks down from roundoff.
pub fn logdet_hpd(m: &CMat) -> Result<f64> {
    if let Some(ch) = cholesky(m) {
        return Ok(ch.l_dirty().diagonal().iter().map(|d| 2.0 * d.re.ln()).sum());
    }
    let ev = hermitian_eigenvalues(m);
    match ev.first() {
        Some(&lo) if lo > 0.0 => Ok(ev.iter().map(|l| l.ln()).sum()),
        None => Ok(0.0),
        Some(&lo) => Err(Error::Numerical(format!(
            "matrix is not positive definite (min eigenvalue {lo:e})"
        ))),
    }
}

/// Inverse of a Hermitian positive definite matrix, returned Hermitian.
pub fn inv_hpd(m: &CMat) -> Result<CMat> {
    let inv = match cholesky(m) {
        Some(ch) => ch.inverse(),
        None => m
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("singular matrix".into()))?,
    };
    Ok(hermitian_part(&inv))
}

/// Solves `M X = B` for Hermitian positive definite `M`.
pub fn solve_hpd(m: &CMat, b: &CMat) -> Result<CMat> {
    match cholesky(m) {
        Some(ch) => Ok(ch.solve(b)),
        None => m
            .clone()
            .lu()
            .solve(b)
            .ok_or_else(|| Error::Numerical("singular matrix".into())),
    }
}

pub fn solve_hpd_vec(m: &CMat, b: &CVec) -> Result<CVec> {
    match cholesky(m) {
        Some(ch) => Ok(ch.solve(b)),
        None => m
            .clone()
            .lu()
            .solve(b)
            .ok_or_else(|| Error::Numerical("singular matrix".into())),
    }
}

/// `L^{-1} X` where `Y = L L^H`.
pub fn whiten(y: &CMat, x: &CMat) -> Result<CMat> {
    let ch = cholesky(y).ok_or_else(|| Error::Numerical("whitening matrix not PD".into()))?;
    ch.l_dirty()
        .solve_lower_triangular(x)
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))
}

/// `ln|I + W W^H|`, accurate when the Gram term is small.
pub fn logdet_identity_plus_gram(w: &CMat, scale: f64) -> Result<f64> {
    let n = w.nrows();
    let m = identity(n) + gram(w).scale(scale);
    logdet_hpd(&m)
}

/// Eigenvalues of the Hermitian part, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(hermitian_part(m))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Principal square root of a PSD matrix; negative eigenvalues from roundoff
/// are clipped to zero.
pub fn psd_sqrt(m: &CMat) -> CMat {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let u = &eig.eigenvectors;
    let d = CMat::from_diagonal(&DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| c(l.max(0.0).sqrt(), 0.0)),
    ));
    hermitian_part(&(u * d * u.adjoint()))
}

/// Largest absolute deviation from Hermitian symmetry.
pub fn hermitian_defect(m: &CMat) -> f64 {
    (m - m.adjoint()).iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Returns `m + eps * I` with `eps = rel * trace(m) / dim`.
pub fn regularize(m: &CMat, rel: f64) -> CMat {
    let n = m.nrows();
    if n == 0 {
        return m.clone();
    }
    let eps = rel * trace(m).re.max(0.0) / n as f64;
    let mut out = m.clone();
    for i in 0..n {
        out[(i, i)] += eps;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CMat {
        let a = CMat::from_row_slice(
            3,
            3,
            &[
                c(1.0, 0.5),
                c(0.2, -0.1),
                c(0.0, 0.3),
                c(-0.4, 0.0),
                c(1.5, 0.2),
                c(0.1, 0.1),
                c(0.3, -0.2),
                c(0.0, 0.0),
                c(0.9, -0.7),
            ],
        );
        gram(&a) + identity(3).scale(0.1)
    }

    #[test]
    fn logdet_matches_lu() {
        let m = sample();
        let lu = m.clone().lu().determinant().re.ln();
        assert!((logdet_hpd(&m).unwrap() - lu).abs() < 1e-12);
    }

    #[test]
    fn inverse_roundtrip() {
        let m = sample();
        let inv = inv_hpd(&m).unwrap();
        assert!(norm_sq(&(&m * inv - identity(3))) < 1e-24);
    }

    #[test]
    fn sqrt_squares_back() {
        let m = sample();
        let s = psd_sqrt(&m);
        assert!(norm_sq(&(&s * &s - &m)) < 1e-22);
        assert!(hermitian_defect(&s) < 1e-14);
    }

    #[test]
    fn sqrt_clips_negative_roundoff() {
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = c(4.0, 0.0);
        m[(1, 1)] = c(-1e-17, 0.0);
        let s = psd_sqrt(&m);
        assert!((s[(0, 0)].re - 2.0).abs() < 1e-14);
        assert_eq!(s[(1, 1)].re, 0.0);
    }

    #[test]
    fn not_pd_is_an_error() {
        let m = CMat::from_diagonal_element(2, 2, c(-1.0, 0.0));
        assert!(logdet_hpd(&m).is_err());
    }
}
