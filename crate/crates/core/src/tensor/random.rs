//! Random tensors and matrices for tests, benches and property checks.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{Grade, MixedTensor};
use crate::matrix::Matrix;
use crate::scalar::{GaussianRational, Rational};

/// Random sparse float tensor: each coordinate is nonzero with probability `density`,
/// with standard complex Gaussian values.
pub fn float_tensor<R: Rng + ?Sized>(rng: &mut R, n: usize, grade: Grade, density: f64) -> MixedTensor<Complex64> {
    let count = grade.coordinate_count(n).expect("small grade");
    let mut entries = Vec::new();
    for i in 0..count {
        if rng.gen_bool(density) {
            entries.push((i, complex_gaussian(rng)));
        }
    }
    MixedTensor::from_flat(n, grade, entries).expect("valid flat indices")
}

/// Random sparse exact tensor with small Gaussian-rational coefficients.
pub fn exact_tensor<R: Rng + ?Sized>(rng: &mut R, n: usize, grade: Grade, density: f64) -> MixedTensor<GaussianRational> {
    let count = grade.coordinate_count(n).expect("small grade");
    let mut entries = Vec::new();
    for i in 0..count {
        if rng.gen_bool(density) {
            let re = Rational::new(rng.gen_range(-5..=5), rng.gen_range(1..=3)).unwrap();
            let im = Rational::integer(rng.gen_range(-2..=2));
            entries.push((i, GaussianRational::new(re, im)));
        }
    }
    MixedTensor::from_flat(n, grade, entries).expect("valid flat indices")
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Matrix with i.i.d. standard complex Gaussian entries (almost surely invertible).
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Matrix<Complex64> {
    Matrix::from_rows((0..n).map(|_| (0..n).map(|_| complex_gaussian(rng)).collect()).collect())
        .expect("square")
}
