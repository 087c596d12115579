use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::GroupKind;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::subspace::{FloatSpan, SubspaceBasis};
use crate::tensor::Grade;

/// Eigenvalues of the averaged representation above `1 - MC_EIGEN_TOL` count as
/// invariant directions.
pub const MC_EIGEN_TOL: f64 = 1e-6;

/// Compact groups with a Haar sampler.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompactForm {
    Unitary,
    SpecialUnitary,
    /// Real orthogonal matrices `O(n, R)`.
    RealOrthogonal,
}

impl CompactForm {
    /// The compact form `G ∩ U(n)` paired with a catalogue group.
    pub fn of(kind: GroupKind) -> Result<Self> {
        match kind {
            GroupKind::GeneralLinear | GroupKind::Unitary => Ok(CompactForm::Unitary),
            GroupKind::SpecialLinear => Ok(CompactForm::SpecialUnitary),
            GroupKind::Orthogonal => Ok(CompactForm::RealOrthogonal),
            other => Err(Error::NotCompact(other.to_string())),
        }
    }
}

fn to_dmatrix(m: &Matrix<Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |r, c| *m.get(r, c))
}

fn from_dmatrix(m: &DMatrix<Complex64>) -> Matrix<Complex64> {
    Matrix::from_rows((0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect())
        .expect("rectangular")
}

/// Q factor of a QR decomposition with the phases of `diag(R)` moved into `Q`, which
/// makes the result Haar distributed when the input is a Gaussian matrix.
fn phase_corrected_q(z: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for c in 0..q.ncols() {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for row in 0..q.nrows() {
            q[(row, c)] *= phase;
        }
    }
    q
}

/// One Haar-distributed element of the compact group.
pub fn haar_sample<R: Rng + ?Sized>(form: CompactForm, n: usize, rng: &mut R) -> Matrix<Complex64> {
    let q = match form {
        CompactForm::Unitary | CompactForm::SpecialUnitary => {
            let z = DMatrix::from_fn(n, n, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let u = phase_corrected_q(z);
            if form == CompactForm::SpecialUnitary {
                let root = u.determinant().powf(1.0 / n as f64);
                u / root
            } else {
                u
            }
        }
        CompactForm::RealOrthogonal => {
            let z = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.sample(StandardNormal), 0.0));
            let q = phase_corrected_q(z);
            q.map(|c| Complex64::new(c.re, 0.0))
        }
    };
    from_dmatrix(&q)
}

/// `ρ(U) = U^{⊗k} ⊗ conj(U)^{⊗l}` in flat coordinates, valid for unitary `U`.
fn representation(u: &DMatrix<Complex64>, grade: Grade) -> DMatrix<Complex64> {
    let ubar = u.map(|c| c.conj());
    let mut rho = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for s in 0..grade.degree() {
        rho = rho.kronecker(if s < grade.k { u } else { &ubar });
    }
    rho
}

/// Orthonormal basis of the eigenspace of the averaged representation with eigenvalues
/// above `1 - MC_EIGEN_TOL`.
fn batch_invariants<R: Rng>(
    form: CompactForm,
    n: usize,
    grade: Grade,
    samples: usize,
    rng: &mut R,
) -> Vec<Vec<Complex64>> {
    let size = grade.coordinate_count(n).expect("checked by caller") as usize;
    let mut avg = DMatrix::<Complex64>::zeros(size, size);
    for _ in 0..samples {
        let u = to_dmatrix(&haar_sample(form, n, rng));
        avg += representation(&u, grade);
    }
    avg /= Complex64::new(samples as f64, 0.0);
    let herm = (&avg + avg.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    eig.eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 1.0 - MC_EIGEN_TOL)
        .map(|(i, _)| eig.eigenvectors.column(i).iter().copied().collect())
        .collect()
}

/// Invariant subspace estimated from two independent batches of `samples` Haar draws.
/// Fails when the batches disagree on the dimension.
pub fn monte_carlo_invariant_space(
    form: CompactForm,
    n: usize,
    grade: Grade,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<SubspaceBasis<Complex64>> {
    if samples == 0 {
        return Err(Error::InvalidParameter("monte carlo needs at least one sample".into()));
    }
    let size = grade.coordinate_count(n)? as usize;
    let mut first_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut second_rng = ChaCha8Rng::seed_from_u64(seed);
    second_rng.set_stream(1);
    let first = batch_invariants(form, n, grade, samples, &mut first_rng);
    let second = batch_invariants(form, n, grade, samples, &mut second_rng);
    if first.len() != second.len() {
        return Err(Error::InsufficientSamples { first: first.len(), second: second.len() });
    }
    let span = FloatSpan::from_orthonormal_rows(size, tol, first);
    SubspaceBasis::from_span(n, grade, span)
}
