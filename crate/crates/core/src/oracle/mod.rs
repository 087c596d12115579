//! Invariant spaces `(V^{⊗k} ⊗ V*^{⊗l})^G` computed independently of any spanning set.
//!
//! A group is described by a [`GroupPresentation`]: finitely many matrices that must fix
//! an invariant, plus a Lie algebra basis whose elements must annihilate it. The
//! invariant space is the kernel of the stacked linear system. Finite groups can also be
//! enumerated outright and averaged, and compact real forms can be sampled.

mod group;
mod haar;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{Field, GaussianRational};
use crate::subspace::{kernel, SparseVec, SubspaceBasis};
use crate::tensor::{Grade, GroupElement, MixedTensor, Permutation};

pub use group::{GroupKind, GroupSpec};
pub use haar::{haar_sample, monte_carlo_invariant_space, CompactForm, MC_EIGEN_TOL};

/// Finite description of a group for invariance testing.
#[derive(Clone, Debug)]
pub struct GroupPresentation<F: Field> {
    /// Generators of the discrete part.
    pub generators: Vec<Matrix<F>>,
    /// Basis of the Lie algebra of the identity component, acting by derivations.
    pub lie_basis: Vec<Matrix<F>>,
    /// Representatives of non-identity components.
    pub components: Vec<Matrix<F>>,
}

fn perm_matrix<F: Field>(images: Vec<usize>) -> Matrix<F> {
    Matrix::permutation(&images)
}

/// Transposition `(1 2)` and the cycle `(1 2 … n)` as 0-based image lists.
fn symmetric_generators(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if n >= 2 {
        out.push(Permutation::transposition(n, 0, 1).images().to_vec());
    }
    if n >= 3 {
        out.push(Permutation::cycle(n).images().to_vec());
    }
    out
}

/// Diagonal matrix with `-1` in the listed positions.
fn sign_matrix<F: Field>(n: usize, negated: &[usize]) -> Matrix<F> {
    let diag: Vec<F> = (0..n)
        .map(|i| if negated.contains(&i) { F::from_i64(-1) } else { F::one() })
        .collect();
    Matrix::diagonal(&diag)
}

fn gl_basis<F: Field>(n: usize) -> Vec<Matrix<F>> {
    (0..n)
        .flat_map(|a| (0..n).map(move |b| Matrix::elementary(n, a, b)))
        .collect()
}

fn sl_basis<F: Field>(n: usize) -> Vec<Matrix<F>> {
    let mut out: Vec<Matrix<F>> = (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| Matrix::elementary(n, a, b)))
        .collect();
    for a in 0..n.saturating_sub(1) {
        out.push(Matrix::elementary(n, a, a).sub(&Matrix::elementary(n, a + 1, a + 1)));
    }
    out
}

fn so_basis<F: Field>(n: usize) -> Vec<Matrix<F>> {
    (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| Matrix::elementary(n, a, b).sub(&Matrix::elementary(n, b, a))))
        .collect()
}

/// `{X : XS + SX^T = 0}` for `S = [[0, I_m], [-I_m, 0]]`: blocks `[[A, B], [C, -A^T]]`
/// with `B`, `C` symmetric.
fn sp_basis<F: Field>(n: usize) -> Vec<Matrix<F>> {
    let m = n / 2;
    let e = |a, b| Matrix::<F>::elementary(n, a, b);
    let mut out = Vec::new();
    for a in 0..m {
        for b in 0..m {
            out.push(e(a, b).sub(&e(m + b, m + a)));
        }
    }
    for a in 0..m {
        for b in a..m {
            let sym = |r0: usize, c0: usize| {
                if a == b {
                    e(r0 + a, c0 + a)
                } else {
                    e(r0 + a, c0 + b).add(&e(r0 + b, c0 + a))
                }
            };
            out.push(sym(0, m));
            out.push(sym(m, 0));
        }
    }
    out
}

/// The symplectic form `S = [[0, I_m], [-I_m, 0]]`.
pub fn symplectic_form<F: Field>(n: usize) -> Result<Matrix<F>> {
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("symplectic form needs even n, got {n}")));
    }
    let m = n / 2;
    let mut s = Matrix::zeros(n, n);
    for i in 0..m {
        s.set(i, m + i, F::one());
        s.set(m + i, i, F::one().neg());
    }
    Ok(s)
}

/// Standard presentation of a catalogue group.
pub fn group_presentation<F: Field>(spec: GroupSpec) -> Result<GroupPresentation<F>> {
    use GroupKind::*;
    let n = spec.n;
    let mut p = GroupPresentation {
        generators: Vec::new(),
        lie_basis: Vec::new(),
        components: Vec::new(),
    };
    let perms = || symmetric_generators(n).into_iter().map(perm_matrix::<F>);
    match spec.kind {
        GeneralLinear | Unitary => p.lie_basis = gl_basis(n),
        SpecialLinear => p.lie_basis = sl_basis(n),
        SpecialLinearK(k) => {
            p.lie_basis = sl_basis(n);
            for j in 1..k {
                let zeta = F::root_of_unity(k, j)
                    .ok_or_else(|| Error::UnsupportedMode(format!("SL_{k} root of unity"), F::MODE))?;
                let mut diag = vec![F::one(); n];
                diag[0] = zeta;
                p.components.push(Matrix::diagonal(&diag));
            }
        }
        Monomial => {
            p.generators = perms().collect();
            p.lie_basis = (0..n).map(|a| Matrix::elementary(n, a, a)).collect();
        }
        Orthogonal => {
            p.lie_basis = so_basis(n);
            p.components.push(sign_matrix(n, &[0]));
        }
        SpecialOrthogonal => p.lie_basis = so_basis(n),
        Symmetric => p.generators = perms().collect(),
        SignedSymmetric => {
            p.generators = perms().collect();
            p.generators.push(sign_matrix(n, &[0]));
        }
        Alternating => {
            p.generators = (2..n)
                .map(|i| perm_matrix(three_cycle(n, i)))
                .collect();
        }
        SignedAlternating => {
            // Lifts of the S_n generators corrected to determinant 1, plus a pair of sign
            // changes; together they generate every signed permutation of determinant 1.
            if n >= 2 {
                let t = Permutation::transposition(n, 0, 1);
                p.generators.push(perm_matrix::<F>(t.images().to_vec()).mul(&sign_matrix(n, &[0])));
                p.generators.push(sign_matrix(n, &[0, 1]));
            }
            if n >= 3 {
                let c = Permutation::cycle(n);
                let fix: &[usize] = if c.sign() < 0 { &[0] } else { &[] };
                p.generators.push(perm_matrix::<F>(c.images().to_vec()).mul(&sign_matrix(n, fix)));
            }
        }
        Symplectic => {
            if !n.is_multiple_of(2) {
                return Err(Error::InvalidParameter("sp needs even n".into()));
            }
            p.lie_basis = sp_basis(n);
        }
    }
    Ok(p)
}

/// The 3-cycle `0 -> 1 -> i -> 0`.
fn three_cycle(n: usize, i: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p[0] = 1;
    p[1] = i;
    p[i] = 0;
    p
}

/// Rows of the matrix whose column `J` is the coordinate vector of `map(e_J)`.
fn operator_rows<F: Field>(
    n: usize,
    grade: Grade,
    map: impl Fn(&MixedTensor<F>) -> Result<MixedTensor<F>>,
) -> Result<Vec<SparseVec<F>>> {
    let count = grade.coordinate_count(n)? as usize;
    let mut rows: Vec<SparseVec<F>> = vec![Vec::new(); count];
    for j in 0..count {
        let e = MixedTensor::from_flat(n, grade, [(j as u64, F::one())])?;
        for (i, v) in map(&e)?.flat_entries() {
            rows[i as usize].push((j, v.clone()));
        }
    }
    rows.retain(|r| !r.is_empty());
    Ok(rows)
}

/// Kernel of the stacked system `(ρ(U) − id) z = 0` over generators and component
/// representatives, and `D_X z = 0` over the Lie algebra basis.
pub fn invariant_space<F: Field>(spec: GroupSpec, grade: Grade, tol: f64) -> Result<SubspaceBasis<F>> {
    let p = group_presentation::<F>(spec)?;
    let n = spec.n;
    let mut equations = Vec::new();
    for u in p.generators.iter().chain(&p.components) {
        let g = GroupElement::new(u.clone())?;
        equations.extend(operator_rows(n, grade, |e| e.apply(&g)?.sub(e))?);
    }
    for x in &p.lie_basis {
        equations.extend(operator_rows(n, grade, |e| e.derivation(x))?);
    }
    kernel(n, grade, &equations, tol)
}

/// Image of the averaging projector `(1/|G|) Σ ρ(U)` over an explicit element list.
pub fn reynolds_average<F: Field>(elements: &[Matrix<F>], n: usize, grade: Grade, tol: f64) -> Result<SubspaceBasis<F>> {
    if elements.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let group = elements
        .iter()
        .map(|u| GroupElement::new(u.clone()))
        .collect::<Result<Vec<_>>>()?;
    let weight = F::from_i64(elements.len() as i64).inv().expect("nonzero order");
    let count = grade.coordinate_count(n)?;
    let mut image = Vec::new();
    for j in 0..count {
        let e = MixedTensor::from_flat(n, grade, [(j, F::one())])?;
        let mut acc = MixedTensor::zero(n, grade)?;
        for g in &group {
            acc = acc.add(&e.apply(g)?)?;
        }
        image.push(acc.scale(&weight));
    }
    crate::subspace::span_basis(n, grade, &image, tol)
}

/// Every element of a finite catalogue group, by filtering all signed permutation
/// matrices. Independent of [`group_presentation`].
pub fn finite_elements(spec: GroupSpec) -> Result<Vec<Matrix<GaussianRational>>> {
    use GroupKind::*;
    let n = spec.n;
    let (signed, even_det) = match spec.kind {
        Symmetric => (false, false),
        Alternating => (false, true),
        SignedSymmetric => (true, false),
        SignedAlternating => (true, true),
        other => return Err(Error::InvalidParameter(format!("{other} is not a finite group"))),
    };
    let mut out = Vec::new();
    for p in Permutation::all(n) {
        let sign_patterns: Vec<u32> = if signed { (0..1u32 << n).collect() } else { vec![0] };
        for mask in sign_patterns {
            let negated: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let det = p.sign() * if negated.len().is_multiple_of(2) { 1 } else { -1 };
            if even_det && det != 1 {
                continue;
            }
            let m = Matrix::permutation(p.images()).mul(&sign_matrix(n, &negated));
            out.push(m);
        }
    }
    Ok(out)
}
