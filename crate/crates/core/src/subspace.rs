//! Spans, ranks, membership and equality of subspaces of one grade's coordinate space.
//!
//! Two backends implement [`SpanEngine`]: [`ExactSpan`] keeps a sparse fully reduced
//! row-echelon form over Gaussian rationals, [`FloatSpan`] keeps an orthonormal basis.
//! [`SubspaceBasis`] wraps either one with the `(n, grade)` it lives in.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Field, GaussianRational, Mode, Rational};
use crate::tensor::{Grade, MixedTensor};

/// Default relative singular-value cutoff for float rank decisions.
pub const DEFAULT_TOL: f64 = 1e-8;

/// A sparse coordinate vector, sorted by coordinate with no zero entries.
pub type SparseVec<F> = Vec<(usize, F)>;

/// Incremental span of vectors in a fixed ambient coordinate space.
pub trait SpanEngine<F: Field>: Clone + fmt::Debug + Send + Sync + Sized {
    fn empty(ambient: usize, tol: f64) -> Self;

    fn ambient(&self) -> usize;
    fn tol(&self) -> f64;
    fn rank(&self) -> usize;

    /// Adds `v` to the span; returns whether the rank grew.
    fn insert(&mut self, v: &[(usize, F)]) -> bool;

    /// Norm of the component of `v` outside the span, relative to `|v|` in float mode.
    fn residual(&self, v: &[(usize, F)]) -> f64;

    fn contains(&self, v: &[(usize, F)]) -> bool;

    /// Basis rows: echelon order (exact) or orthonormal (float).
    fn rows(&self) -> Vec<SparseVec<F>>;

    /// Span of a batch of vectors.
    fn from_vectors(ambient: usize, tol: f64, vectors: &[SparseVec<F>]) -> Self {
        let mut span = Self::empty(ambient, tol);
        for v in vectors {
            if span.rank() == ambient {
                break;
            }
            span.insert(v);
        }
        span
    }

    /// Null space `{z : row·z = 0 for every row}` of a linear system.
    fn kernel(ambient: usize, tol: f64, equations: &[SparseVec<F>]) -> Self;
}

/// Fully reduced sparse row-echelon form over the Gaussian rationals.
///
/// Every row has its pivot entry equal to 1 and no row has a nonzero entry in another
/// row's pivot column, so reducing a vector takes one pass over its support.
#[derive(Clone, Debug, Default)]
pub struct ExactSpan {
    ambient: usize,
    rows: Vec<SparseVec<GaussianRational>>,
    pivot_row: HashMap<usize, usize>,
}

type Q = GaussianRational;

/// `a - c·b` on sorted sparse vectors.
fn axpy_sorted(a: &[(usize, Q)], c: &Q, b: &[(usize, Q)]) -> SparseVec<Q> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i == a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i].clone());
            i += 1;
        } else if take_b {
            out.push((b[j].0, c.mul(&b[j].1).neg()));
            j += 1;
        } else {
            let mut v = a[i].1.clone();
            v.sub_mul_assign(c, &b[j].1);
            if !v.is_negligible() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

impl ExactSpan {
    /// The component of `v` outside the span: `v - Σ v[c]·row(c)` over pivot columns `c`.
    fn reduce(&self, v: &[(usize, Q)]) -> SparseVec<Q> {
        let hits: Vec<(usize, &Q)> = v
            .iter()
            .filter(|(c, x)| !x.is_negligible() && self.pivot_row.contains_key(c))
            .map(|(c, x)| (self.pivot_row[c], x))
            .collect();
        if hits.is_empty() {
            return v.iter().filter(|(_, x)| !x.is_negligible()).cloned().collect();
        }
        if hits.len() == 1 {
            return axpy_sorted(v, hits[0].1, &self.rows[hits[0].0]);
        }
        // Dense accumulator over the ambient space; only touched columns are read back.
        let mut acc: Vec<Q> = vec![Q::zero(); self.ambient];
        let mut touched: Vec<usize> = Vec::with_capacity(v.len());
        for (c, x) in v {
            if !x.is_negligible() {
                acc[*c] = x.clone();
                touched.push(*c);
            }
        }
        for (r, coef) in hits {
            for (c, x) in &self.rows[r] {
                if acc[*c].is_negligible() {
                    touched.push(*c);
                }
                acc[*c].sub_mul_assign(coef, x);
            }
        }
        touched.sort_unstable();
        touched.dedup();
        touched
            .into_iter()
            .filter_map(|c| {
                let x = std::mem::replace(&mut acc[c], Q::zero());
                (!x.is_negligible()).then_some((c, x))
            })
            .collect()
    }

    /// Pivot columns in increasing order.
    pub fn pivots(&self) -> Vec<usize> {
        let mut p: Vec<usize> = self.pivot_row.keys().copied().collect();
        p.sort_unstable();
        p
    }
}

impl SpanEngine<Q> for ExactSpan {
    fn empty(ambient: usize, _tol: f64) -> Self {
        Self {
            ambient,
            ..Self::default()
        }
    }

    fn ambient(&self) -> usize {
        self.ambient
    }

    fn tol(&self) -> f64 {
        0.0
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn insert(&mut self, v: &[(usize, Q)]) -> bool {
        let r = self.reduce(v);
        let Some((pivot, lead)) = r.first().cloned() else {
            return false;
        };
        let inv = lead.inv().expect("nonzero leading entry");
        let r: SparseVec<Q> = r.into_iter().map(|(c, x)| (c, x.mul(&inv))).collect();
        for row in &mut self.rows {
            if let Ok(pos) = row.binary_search_by_key(&pivot, |e| e.0) {
                let coef = row[pos].1.clone();
                *row = axpy_sorted(row, &coef, &r);
            }
        }
        self.pivot_row.insert(pivot, self.rows.len());
        self.rows.push(r);
        true
    }

    fn residual(&self, v: &[(usize, Q)]) -> f64 {
        self.reduce(v).iter().map(|(_, x)| x.abs().powi(2)).sum::<f64>().sqrt()
    }

    fn contains(&self, v: &[(usize, Q)]) -> bool {
        self.reduce(v).is_empty()
    }

    fn rows(&self) -> Vec<SparseVec<Q>> {
        self.pivots()
            .into_iter()
            .map(|p| self.rows[self.pivot_row[&p]].clone())
            .collect()
    }

    fn kernel(ambient: usize, _tol: f64, equations: &[SparseVec<Q>]) -> Self {
        let system = Self::from_vectors(ambient, 0.0, equations);
        // One null vector per free column f: z_f = 1, z_p = -row_p[f] for each pivot p.
        let mut null: BTreeMap<usize, SparseVec<Q>> = (0..ambient)
            .filter(|c| !system.pivot_row.contains_key(c))
            .map(|c| (c, vec![(c, Q::one())]))
            .collect();
        for row in &system.rows {
            let pivot = row[0].0;
            for (c, x) in &row[1..] {
                null.get_mut(c).expect("free column").push((pivot, x.neg()));
            }
        }
        let mut out = Self::empty(ambient, 0.0);
        for mut v in null.into_values() {
            v.sort_unstable_by_key(|e| e.0);
            out.insert(&v);
        }
        out
    }
}

/// Orthonormal basis built by twice-iterated classical Gram-Schmidt.
#[derive(Clone, Debug)]
pub struct FloatSpan {
    ambient: usize,
    tol: f64,
    rows: Vec<Vec<Complex64>>,
}

type C = Complex64;

fn dense(ambient: usize, v: &[(usize, C)]) -> Vec<C> {
    let mut x = vec![C::new(0.0, 0.0); ambient];
    for (i, c) in v {
        x[*i] += c;
    }
    x
}

fn norm(x: &[C]) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn sparse_of(x: &[C]) -> SparseVec<C> {
    x.iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(i, c)| (i, *c))
        .collect()
}

impl FloatSpan {
    /// Removes the span component from `x` in place.
    fn project_out(&self, x: &mut [C]) {
        for _ in 0..2 {
            for q in &self.rows {
                let c: C = q.iter().zip(x.iter()).map(|(a, b)| a.conj() * b).sum();
                if c.norm() == 0.0 {
                    continue;
                }
                for (xi, qi) in x.iter_mut().zip(q) {
                    *xi -= c * qi;
                }
            }
        }
    }

    /// Relative residual of `v` and its orthogonal remainder.
    fn remainder(&self, v: &[(usize, C)]) -> (f64, Vec<C>) {
        let mut x = dense(self.ambient, v);
        let n0 = norm(&x);
        if n0 == 0.0 {
            return (0.0, x);
        }
        self.project_out(&mut x);
        (norm(&x) / n0, x)
    }

    /// Wraps rows that are already orthonormal (not checked).
    pub fn from_orthonormal_rows(ambient: usize, tol: f64, rows: Vec<Vec<C>>) -> Self {
        Self { ambient, tol, rows }
    }
}

/// Rows of `V^H` (conjugated into columns of `V`) from an SVD, split by the cutoff
/// `tol·σ_max`: returns (row space, null space) of `a`.
fn svd_split(a: DMatrix<C>, tol: f64) -> (Vec<Vec<C>>, Vec<Vec<C>>) {
    let cols = a.ncols();
    // Tall systems are first compressed to their R factor, which has the same
    // singular values and null space.
    let a = if a.nrows() > cols { a.qr().r() } else { a };
    // Pad so that V is square and the null space is fully represented.
    let a = if a.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (a.nrows(), cols)).copy_from(&a);
        p
    } else {
        a
    };
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut range = Vec::new();
    let mut null = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        let v: Vec<C> = v_t.row(i).iter().map(|c| c.conj()).collect();
        if smax > 0.0 && *s > tol * smax {
            range.push(v);
        } else {
            null.push(v);
        }
    }
    (range, null)
}

impl SpanEngine<C> for FloatSpan {
    fn empty(ambient: usize, tol: f64) -> Self {
        Self::from_orthonormal_rows(ambient, tol, Vec::new())
    }

    fn ambient(&self) -> usize {
        self.ambient
    }

    fn tol(&self) -> f64 {
        self.tol
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn insert(&mut self, v: &[(usize, C)]) -> bool {
        if self.rows.len() == self.ambient {
            return false;
        }
        let (rel, mut x) = self.remainder(v);
        if rel <= self.tol {
            return false;
        }
        let nx = norm(&x);
        x.iter_mut().for_each(|c| *c /= nx);
        self.rows.push(x);
        true
    }

    fn residual(&self, v: &[(usize, C)]) -> f64 {
        self.remainder(v).0
    }

    fn contains(&self, v: &[(usize, C)]) -> bool {
        self.residual(v) <= self.tol
    }

    fn rows(&self) -> Vec<SparseVec<C>> {
        self.rows.iter().map(|r| sparse_of(r)).collect()
    }

    /// Gram-Schmidt preselects candidates at a looser threshold, then the rank is
    /// decided by singular values of the candidate matrix at `tol·σ_max`.
    fn from_vectors(ambient: usize, tol: f64, vectors: &[SparseVec<C>]) -> Self {
        let mut pre = Self::empty(ambient, tol * 1e-3);
        let mut picked = Vec::new();
        for v in vectors {
            if pre.rank() == ambient {
                break;
            }
            if pre.insert(v) {
                picked.push(v);
            }
        }
        if picked.is_empty() {
            return Self::empty(ambient, tol);
        }
        let mut a = DMatrix::zeros(picked.len(), ambient);
        for (r, v) in picked.iter().enumerate() {
            for (c, x) in v.iter() {
                a[(r, *c)] += x;
            }
        }
        let (range, _) = svd_split(a, tol);
        Self::from_orthonormal_rows(ambient, tol, range)
    }

    fn kernel(ambient: usize, tol: f64, equations: &[SparseVec<C>]) -> Self {
        let eqs: Vec<&SparseVec<C>> = equations.iter().filter(|e| !e.is_empty()).collect();
        if eqs.is_empty() {
            let rows = (0..ambient)
                .map(|i| {
                    let mut e = vec![C::new(0.0, 0.0); ambient];
                    e[i] = C::new(1.0, 0.0);
                    e
                })
                .collect();
            return Self::from_orthonormal_rows(ambient, tol, rows);
        }
        let mut a = DMatrix::zeros(eqs.len(), ambient);
        for (r, v) in eqs.iter().enumerate() {
            for (c, x) in v.iter() {
                a[(r, *c)] += x;
            }
        }
        let (_, null) = svd_split(a, tol);
        Self::from_orthonormal_rows(ambient, tol, null)
    }
}

/// A subspace of the coordinate space of grade `(k,l)` over `C^n`.
#[derive(Clone, Debug)]
pub struct SubspaceBasis<F: Field> {
    n: usize,
    grade: Grade,
    span: F::Span,
}

impl<F: Field> SubspaceBasis<F> {
    pub fn empty(n: usize, grade: Grade, tol: f64) -> Result<Self> {
        let ambient = grade.coordinate_count(n)?;
        let ambient = usize::try_from(ambient).map_err(|_| Error::GradeTooLarge { n, grade })?;
        Ok(Self {
            n,
            grade,
            span: F::Span::empty(ambient, tol),
        })
    }

    pub fn from_span(n: usize, grade: Grade, span: F::Span) -> Result<Self> {
        let ambient = grade.coordinate_count(n)? as usize;
        if span.ambient() != ambient {
            return Err(Error::InvalidParameter(format!(
                "span ambient {} does not match n^(k+l) = {ambient}",
                span.ambient()
            )));
        }
        Ok(Self { n, grade, span })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grade(&self) -> Grade {
        self.grade
    }

    pub fn mode(&self) -> Mode {
        F::MODE
    }

    pub fn tol(&self) -> f64 {
        self.span.tol()
    }

    pub fn dim(&self) -> usize {
        self.span.rank()
    }

    pub fn ambient(&self) -> usize {
        self.span.ambient()
    }

    pub fn span(&self) -> &F::Span {
        &self.span
    }

    fn check(&self, x: &MixedTensor<F>) -> Result<()> {
        if x.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: x.n() });
        }
        if x.grade() != self.grade {
            return Err(Error::GradeMismatch { expected: self.grade, found: x.grade() });
        }
        Ok(())
    }

    /// Adds `x` to the span; returns whether the dimension grew.
    pub fn insert(&mut self, x: &MixedTensor<F>) -> Result<bool> {
        self.check(x)?;
        Ok(self.span.insert(&x.to_sparse()))
    }

    pub fn contains(&self, x: &MixedTensor<F>) -> Result<bool> {
        self.check(x)?;
        Ok(self.span.contains(&x.to_sparse()))
    }

    /// Residual of `x` after projection (relative in float mode).
    pub fn residual(&self, x: &MixedTensor<F>) -> Result<f64> {
        self.check(x)?;
        Ok(self.span.residual(&x.to_sparse()))
    }

    /// Basis vectors as tensors.
    pub fn basis(&self) -> Vec<MixedTensor<F>> {
        self.span
            .rows()
            .iter()
            .map(|r| MixedTensor::from_sparse(self.n, self.grade, r).expect("row fits grade"))
            .collect()
    }

    /// Whether every basis vector of `self` lies in `other`, and the largest residual.
    pub fn contained_in(&self, other: &Self) -> Result<(bool, f64)> {
        if self.n != other.n || self.grade != other.grade {
            return Err(Error::GradeMismatch { expected: other.grade, found: self.grade });
        }
        let mut ok = true;
        let mut worst = 0.0f64;
        for row in self.span.rows() {
            let r = other.span.residual(&row);
            worst = worst.max(r);
            ok &= other.span.contains(&row);
        }
        Ok((ok, worst))
    }

    /// Mutual containment.
    pub fn equal_spaces(&self, other: &Self) -> Result<bool> {
        if self.dim() != other.dim() {
            self.contained_in(other)?;
            return Ok(false);
        }
        Ok(self.contained_in(other)?.0 && other.contained_in(self)?.0)
    }

    pub fn to_json(&self) -> BasisJson {
        let ambient = self.ambient();
        let rows = self
            .span
            .rows()
            .iter()
            .map(|r| {
                let mut dense = vec![F::zero(); ambient];
                for (i, x) in r {
                    dense[*i] = x.clone();
                }
                dense.iter().map(|x| scalar_pair(&x.to_scalar())).collect()
            })
            .collect();
        BasisJson {
            mode: F::MODE,
            n: self.n,
            k: self.grade.k,
            l: self.grade.l,
            tol: self.tol(),
            dim: self.dim(),
            rows,
        }
    }

    pub fn from_json(json: &BasisJson) -> Result<Self> {
        if json.mode != F::MODE {
            return Err(Error::ModeMismatch { left: F::MODE, right: json.mode });
        }
        let grade = Grade::new(json.k, json.l);
        let mut out = Self::empty(json.n, grade, json.tol)?;
        for row in &json.rows {
            if row.len() != out.ambient() {
                return Err(Error::Parse(format!(
                    "basis row of length {} in ambient {}",
                    row.len(),
                    out.ambient()
                )));
            }
            let mut v = Vec::new();
            for (i, pair) in row.iter().enumerate() {
                let x = F::from_scalar(&parse_pair(json.mode, pair)?)?;
                if !x.is_negligible() {
                    v.push((i, x));
                }
            }
            out.span.insert(&v);
        }
        Ok(out)
    }
}

/// Serialized subspace: dense rows of `[re, im]` pairs, rationals as strings in exact mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisJson {
    pub mode: Mode,
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub tol: f64,
    pub dim: usize,
    pub rows: Vec<Vec<[serde_json::Value; 2]>>,
}

pub(crate) fn scalar_pair(s: &crate::scalar::Scalar) -> [serde_json::Value; 2] {
    use crate::scalar::Scalar;
    match s {
        Scalar::Exact(q) => [q.re.to_string().into(), q.im.to_string().into()],
        Scalar::Float(c) => [c.re.into(), c.im.into()],
    }
}

pub(crate) fn parse_part(mode: Mode, v: &serde_json::Value) -> Result<crate::scalar::ScalarPart> {
    use crate::scalar::ScalarPart;
    match (mode, v) {
        (Mode::Exact, serde_json::Value::String(s)) => Ok(ScalarPart::Exact(s.parse::<Rational>()?)),
        (Mode::Exact, serde_json::Value::Number(n)) if n.is_i64() => {
            Ok(ScalarPart::Exact(Rational::integer(n.as_i64().unwrap())))
        }
        (Mode::Float, serde_json::Value::Number(n)) => Ok(ScalarPart::Float(n.as_f64().unwrap_or(f64::NAN))),
        (Mode::Float, serde_json::Value::String(s)) => s
            .trim()
            .parse::<f64>()
            .map(ScalarPart::Float)
            .map_err(|_| Error::Parse(format!("bad float {s:?}"))),
        _ => Err(Error::Parse(format!("bad {mode} scalar component {v}"))),
    }
}

pub(crate) fn parse_pair(mode: Mode, pair: &[serde_json::Value; 2]) -> Result<crate::scalar::Scalar> {
    crate::scalar::Scalar::from_parts(parse_part(mode, &pair[0])?, parse_part(mode, &pair[1])?)
}

/// Basis of the span of `vectors`, all of which must share `n` and `grade`.
pub fn span_basis<F: Field>(
    n: usize,
    grade: Grade,
    vectors: &[MixedTensor<F>],
    tol: f64,
) -> Result<SubspaceBasis<F>> {
    let ambient = SubspaceBasis::<F>::empty(n, grade, tol)?.ambient();
    for v in vectors {
        if v.n() != n {
            return Err(Error::DimensionMismatch { expected: n, found: v.n() });
        }
        if v.grade() != grade {
            return Err(Error::GradeMismatch { expected: grade, found: v.grade() });
        }
    }
    let sparse: Vec<_> = vectors.iter().map(MixedTensor::to_sparse).collect();
    SubspaceBasis::from_span(n, grade, F::Span::from_vectors(ambient, tol, &sparse))
}

/// Null space of the linear system whose rows are `equations` (coordinate vectors of
/// grade `grade`).
pub fn kernel<F: Field>(
    n: usize,
    grade: Grade,
    equations: &[SparseVec<F>],
    tol: f64,
) -> Result<SubspaceBasis<F>> {
    let ambient = SubspaceBasis::<F>::empty(n, grade, tol)?.ambient();
    SubspaceBasis::from_span(n, grade, F::Span::kernel(ambient, tol, equations))
}
