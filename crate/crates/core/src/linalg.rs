//! Small dense complex matrix helpers shared by the propagator and the
//! benchmarking simulator.

use nalgebra::SMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix<const N: usize> = SMatrix<C64, N, N>;

/// `exp(-i * tau * h)` for a Hermitian `h`, by scaling and squaring of a
/// truncated Taylor series. Accurate to machine precision for the matrix
/// sizes used here.
pub fn exp_neg_i<const N: usize>(h: &CMatrix<N>, tau: f64) -> CMatrix<N> {
    let a = h * C64::new(0.0, -tau);
    let norm = (0..N)
        .map(|r| (0..N).map(|c| a[(r, c)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    if norm > 0.25 {
        squarings = (norm / 0.25).log2().ceil() as u32;
    }
    let scaled = a / C64::from(2f64.powi(squarings as i32));

    let mut result = CMatrix::<N>::identity();
    let mut term = CMatrix::<N>::identity();
    for k in 1..=14 {
        term = term * scaled / C64::from(k as f64);
        result += term;
    }
    for _ in 0..squarings {
        result = result * result;
    }
    result
}

pub fn max_abs_diff<const N: usize>(a: &CMatrix<N>, b: &CMatrix<N>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest entry of `|U†U - 1|`.
pub fn unitarity_defect<const N: usize>(u: &CMatrix<N>) -> f64 {
    max_abs_diff(&(u.adjoint() * u), &CMatrix::<N>::identity())
}

pub fn hermiticity_defect<const N: usize>(h: &CMatrix<N>) -> f64 {
    max_abs_diff(h, &h.adjoint())
}
