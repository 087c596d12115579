//! Sparse mixed tensors in `V^{⊗k} ⊗ V*^{⊗l}` over `V = C^n`, and their operator calculus.
//!
//! Entries are keyed by a flat coordinate: the multi-index `(i_1..i_k; j_1..j_l)` read as
//! base-`n` digits, contravariant indices most significant. The same order is used for
//! the dense coordinate vectors handed to the subspace kernel.

mod action;
mod io;
mod perm;
pub mod random;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Field, Mode};

pub use action::GroupElement;
pub use io::{AnyTensor, TensorJson};
pub use perm::Permutation;

/// Numbers of contravariant and covariant factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Grade {
    pub k: usize,
    pub l: usize,
}

impl Grade {
    pub const fn new(k: usize, l: usize) -> Self {
        Self { k, l }
    }

    pub fn degree(self) -> usize {
        self.k + self.l
    }

    pub fn dual(self) -> Self {
        Self::new(self.l, self.k)
    }

    pub fn fits_within(self, bound: Grade) -> bool {
        self.k <= bound.k && self.l <= bound.l
    }

    /// `"k,l"`, the key format used by serialized tables.
    pub fn key(self) -> String {
        format!("{},{}", self.k, self.l)
    }

    /// Size `n^(k+l)` of the coordinate space, if it fits in a `u64`.
    pub fn coordinate_count(self, n: usize) -> Result<u64> {
        (n as u64)
            .checked_pow(self.degree() as u32)
            .filter(|&c| c < (1 << 62))
            .ok_or(Error::GradeTooLarge { n, grade: self })
    }
}

impl std::ops::Add for Grade {
    type Output = Grade;

    fn add(self, rhs: Grade) -> Grade {
        Grade::new(self.k + rhs.k, self.l + rhs.l)
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.k, self.l)
    }
}

/// Parses `"k,l"`, optionally wrapped in parentheses.
impl std::str::FromStr for Grade {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("grade must look like k,l: {s:?}"));
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (k, l) = inner.split_once(',').ok_or_else(bad)?;
        Ok(Grade::new(k.trim().parse().map_err(|_| bad())?, l.trim().parse().map_err(|_| bad())?))
    }
}

/// Index of a basis tensor `e_{i_1}⊗…⊗e_{i_k}⊗e*_{j_1}⊗…⊗e*_{j_l}`; entries are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex {
    pub up: Vec<usize>,
    pub down: Vec<usize>,
}

impl MultiIndex {
    pub fn new(up: Vec<usize>, down: Vec<usize>) -> Self {
        Self { up, down }
    }

    pub fn grade(&self) -> Grade {
        Grade::new(self.up.len(), self.down.len())
    }
}

/// Flat-coordinate codec for one `(n, grade)`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Layout {
    n: u64,
    slots: usize,
}

impl Layout {
    pub(crate) fn new(n: usize, grade: Grade) -> Self {
        Self {
            n: n as u64,
            slots: grade.degree(),
        }
    }

    /// Writes the base-`n` digits of `idx` (0-based index values) into `out`.
    #[inline]
    pub(crate) fn decode(&self, mut idx: u64, out: &mut [u32]) {
        for d in out[..self.slots].iter_mut().rev() {
            *d = (idx % self.n) as u32;
            idx /= self.n;
        }
    }

    #[inline]
    pub(crate) fn encode(&self, digits: &[u32]) -> u64 {
        digits.iter().fold(0u64, |acc, &d| acc * self.n + d as u64)
    }
}

/// A homogeneous element of the mixed tensor algebra.
#[derive(Clone, PartialEq)]
pub struct MixedTensor<F> {
    n: usize,
    grade: Grade,
    entries: BTreeMap<u64, F>,
}

impl<F: Field> MixedTensor<F> {
    pub fn zero(n: usize, grade: Grade) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("dimension n must be at least 1".into()));
        }
        grade.coordinate_count(n)?;
        Ok(Self {
            n,
            grade,
            entries: BTreeMap::new(),
        })
    }

    /// The scalar `value` as a grade-(0,0) tensor.
    pub fn scalar(n: usize, value: F) -> Result<Self> {
        let mut t = Self::zero(n, Grade::new(0, 0))?;
        t.insert_flat(0, value);
        Ok(t)
    }

    /// Basis tensor `e_up ⊗ e*_down` with coefficient 1.
    pub fn basis(n: usize, up: &[usize], down: &[usize]) -> Result<Self> {
        let idx = MultiIndex::new(up.to_vec(), down.to_vec());
        let mut t = Self::zero(n, idx.grade())?;
        let flat = t.flat_index(&idx)?;
        t.insert_flat(flat, F::one());
        Ok(t)
    }

    pub fn from_entries(
        n: usize,
        grade: Grade,
        entries: impl IntoIterator<Item = (MultiIndex, F)>,
    ) -> Result<Self> {
        let mut t = Self::zero(n, grade)?;
        for (idx, v) in entries {
            if idx.grade() != grade {
                return Err(Error::GradeMismatch {
                    expected: grade,
                    found: idx.grade(),
                });
            }
            let flat = t.flat_index(&idx)?;
            t.accumulate(flat, &v);
        }
        Ok(t)
    }

    /// Builds a tensor from `(flat coordinate, value)` pairs, summing repeats.
    pub fn from_flat(n: usize, grade: Grade, entries: impl IntoIterator<Item = (u64, F)>) -> Result<Self> {
        let mut t = Self::zero(n, grade)?;
        let count = grade.coordinate_count(n)?;
        for (idx, v) in entries {
            if idx >= count {
                return Err(Error::InvalidParameter(format!("flat index {idx} >= {count}")));
            }
            t.accumulate(idx, &v);
        }
        Ok(t)
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

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Dimension `n^(k+l)` of this tensor's grade.
    pub fn coordinate_count(&self) -> u64 {
        self.grade.coordinate_count(self.n).expect("checked at construction")
    }

    pub(crate) fn layout(&self) -> Layout {
        Layout::new(self.n, self.grade)
    }

    pub fn flat_entries(&self) -> impl Iterator<Item = (u64, &F)> {
        self.entries.iter().map(|(&i, v)| (i, v))
    }

    pub fn entries(&self) -> impl Iterator<Item = (MultiIndex, &F)> + '_ {
        let layout = self.layout();
        let k = self.grade.k;
        let mut digits = vec![0u32; self.grade.degree()];
        self.entries.iter().map(move |(&i, v)| {
            layout.decode(i, &mut digits);
            let up = digits[..k].iter().map(|&d| d as usize + 1).collect();
            let down = digits[k..].iter().map(|&d| d as usize + 1).collect();
            (MultiIndex::new(up, down), v)
        })
    }

    pub fn get(&self, idx: &MultiIndex) -> Result<F> {
        let flat = self.flat_index(idx)?;
        Ok(self.entries.get(&flat).cloned().unwrap_or_else(F::zero))
    }

    pub fn flat_index(&self, idx: &MultiIndex) -> Result<u64> {
        if idx.grade() != self.grade {
            return Err(Error::GradeMismatch {
                expected: self.grade,
                found: idx.grade(),
            });
        }
        let mut digits = Vec::with_capacity(self.grade.degree());
        for &i in idx.up.iter().chain(&idx.down) {
            if i == 0 || i > self.n {
                return Err(Error::IndexOutOfRange { index: i, n: self.n });
            }
            digits.push((i - 1) as u32);
        }
        Ok(self.layout().encode(&digits))
    }

    fn insert_flat(&mut self, idx: u64, v: F) {
        if !v.is_negligible() {
            self.entries.insert(idx, v);
        }
    }

    fn accumulate(&mut self, idx: u64, v: &F) {
        use std::collections::btree_map::Entry;
        match self.entries.entry(idx) {
            Entry::Vacant(e) => {
                if !v.is_negligible() {
                    e.insert(v.clone());
                }
            }
            Entry::Occupied(mut e) => {
                let s = e.get().add(v);
                if s.is_negligible() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        if self.grade != other.grade {
            return Err(Error::GradeMismatch {
                expected: self.grade,
                found: other.grade,
            });
        }
        Ok(())
    }

    pub fn scale(&self, s: &F) -> Self {
        let mut out = Self {
            n: self.n,
            grade: self.grade,
            entries: BTreeMap::new(),
        };
        for (&i, v) in &self.entries {
            out.insert_flat(i, v.mul(s));
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (&i, v) in &other.entries {
            out.accumulate(i, v);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&F::one().neg()))
    }

    /// `Σ c_i x_i`. All terms must share `n` and grade; an empty list is an error.
    pub fn linear_combine(terms: &[(F, &Self)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty linear combination".into()))?;
        let mut out = Self::zero(first.n, first.grade)?;
        for (c, x) in terms {
            out.check_compatible(x)?;
            for (&i, v) in &x.entries {
                out.accumulate(i, &c.mul(v));
            }
        }
        Ok(out)
    }

    /// `x ⊗ y`: contravariant factors of `x` precede those of `y`, likewise covariant.
    pub fn tensor_product(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let grade = self.grade + other.grade;
        grade.coordinate_count(self.n)?;
        let n = self.n as u64;
        let pow = |e: usize| n.pow(e as u32);
        let (ky, lx, ly) = (other.grade.k, self.grade.l, other.grade.l);
        let (mod_x, mod_y) = (pow(lx), pow(ly));
        let mut out = Self::zero(self.n, grade)?;
        for (&ix, vx) in &self.entries {
            let (ux, dx) = (ix / mod_x, ix % mod_x);
            for (&iy, vy) in &other.entries {
                let (uy, dy) = (iy / mod_y, iy % mod_y);
                let idx = (((ux * pow(ky) + uy) * mod_x) + dx) * mod_y + dy;
                out.insert_flat(idx, vx.mul(vy));
            }
        }
        Ok(out)
    }

    /// The conjugate-linear involution: reverses factor order, swaps `e_i ↔ e*_i`
    /// and conjugates coefficients.
    pub fn star(&self) -> Self {
        let (k, l) = (self.grade.k, self.grade.l);
        let src = self.layout();
        let dst = Layout::new(self.n, self.grade.dual());
        let mut digits = vec![0u32; k + l];
        let mut out = Self {
            n: self.n,
            grade: self.grade.dual(),
            entries: BTreeMap::new(),
        };
        for (&i, v) in &self.entries {
            src.decode(i, &mut digits);
            // up = [i_1..i_k], down = [j_1..j_l] becomes up = [j_l..j_1], down = [i_k..i_1]
            digits.reverse();
            out.insert_flat(dst.encode(&digits), v.conj());
        }
        out
    }

    /// Contracts contravariant slot `p` against covariant slot `q` (both 1-based).
    pub fn contract(&self, p: usize, q: usize) -> Result<Self> {
        let (k, l) = (self.grade.k, self.grade.l);
        if p == 0 || p > k {
            return Err(Error::SlotOutOfRange { slot: p, size: k, kind: "contravariant" });
        }
        if q == 0 || q > l {
            return Err(Error::SlotOutOfRange { slot: q, size: l, kind: "covariant" });
        }
        let (pu, qd) = (p - 1, k + q - 1);
        let grade = Grade::new(k - 1, l - 1);
        let src = self.layout();
        let dst = Layout::new(self.n, grade);
        let mut digits = vec![0u32; k + l];
        let mut kept = Vec::with_capacity(k + l);
        let mut out = Self::zero(self.n, grade)?;
        for (&i, v) in &self.entries {
            src.decode(i, &mut digits);
            if digits[pu] != digits[qd] {
                continue;
            }
            kept.clear();
            kept.extend(
                digits
                    .iter()
                    .enumerate()
                    .filter(|&(s, _)| s != pu && s != qd)
                    .map(|(_, &d)| d),
            );
            out.accumulate(dst.encode(&kept), v);
        }
        Ok(out)
    }

    /// Permutes contravariant factors by `sigma` and covariant factors by `tau`: the
    /// factor in position `s` moves to position `sigma(s)`.
    pub fn mutate(&self, sigma: &Permutation, tau: &Permutation) -> Result<Self> {
        let (k, l) = (self.grade.k, self.grade.l);
        if sigma.len() != k {
            return Err(Error::PermutationSize { expected: k, found: sigma.len() });
        }
        if tau.len() != l {
            return Err(Error::PermutationSize { expected: l, found: tau.len() });
        }
        let layout = self.layout();
        let mut digits = vec![0u32; k + l];
        let mut moved = vec![0u32; k + l];
        let mut out = Self {
            n: self.n,
            grade: self.grade,
            entries: BTreeMap::new(),
        };
        for (&i, v) in &self.entries {
            layout.decode(i, &mut digits);
            for s in 0..k {
                moved[sigma.apply(s)] = digits[s];
            }
            for s in 0..l {
                moved[k + tau.apply(s)] = digits[k + s];
            }
            out.insert_flat(layout.encode(&moved), v.clone());
        }
        Ok(out)
    }

    /// Converts the contravariant slots in `lower` to covariant ones and the covariant
    /// slots in `raise` to contravariant ones (1-based slot numbers), keeping index
    /// values. Surviving factors keep their order and come first on each side,
    /// followed by the flipped factors in their original order.
    pub fn flip(&self, lower: &[usize], raise: &[usize]) -> Result<Self> {
        let (k, l) = (self.grade.k, self.grade.l);
        let lowered = slot_mask(lower, k, "contravariant")?;
        let raised = slot_mask(raise, l, "covariant")?;
        let mut up_order = Vec::with_capacity(k + l);
        let mut down_order = Vec::with_capacity(k + l);
        up_order.extend((0..k).filter(|&s| !lowered[s]));
        up_order.extend((0..l).filter(|&s| raised[s]).map(|s| k + s));
        down_order.extend((0..l).filter(|&s| !raised[s]).map(|s| k + s));
        down_order.extend((0..k).filter(|&s| lowered[s]));
        let grade = Grade::new(up_order.len(), down_order.len());
        let order: Vec<usize> = up_order.into_iter().chain(down_order).collect();
        let src = self.layout();
        let dst = Layout::new(self.n, grade);
        let mut digits = vec![0u32; k + l];
        let mut moved = vec![0u32; k + l];
        let mut out = Self::zero(self.n, grade)?;
        for (&i, v) in &self.entries {
            src.decode(i, &mut digits);
            for (t, &s) in order.iter().enumerate() {
                moved[t] = digits[s];
            }
            out.insert_flat(dst.encode(&moved), v.clone());
        }
        Ok(out)
    }

    /// Matrix product under `V ⊗ V* ≅ End(V)`; equal to `contract(y ⊗ z, 2, 1)`.
    pub fn mat_mul(&self, other: &Self) -> Result<Self> {
        let g11 = Grade::new(1, 1);
        for t in [self, other] {
            if t.grade != g11 {
                return Err(Error::GradeMismatch { expected: g11, found: t.grade });
            }
        }
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        let n = self.n as u64;
        let mut out = Self::zero(self.n, g11)?;
        for (&a, va) in &self.entries {
            let (i, j) = (a / n, a % n);
            for (&b, vb) in other.entries.range(j * n..(j + 1) * n) {
                out.accumulate(i * n + b % n, &va.mul(vb));
            }
        }
        Ok(out)
    }

    /// Hermitian inner product `Σ conj(x_I)·y_I`; zero across different grades.
    pub fn inner_product(&self, other: &Self) -> Result<F> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        if self.grade != other.grade {
            return Ok(F::zero());
        }
        let mut acc = F::zero();
        for (i, v) in &self.entries {
            if let Some(w) = other.entries.get(i) {
                acc.add_mul_assign(&v.conj(), w);
            }
        }
        Ok(acc)
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.entries.values().map(|v| v.abs().powi(2)).sum::<f64>().sqrt()
    }

    /// Largest coefficient distance to `other` (same n and grade required).
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.entries.values().map(F::abs).fold(0.0, f64::max))
    }

    /// Sparse coordinate vector, sorted by flat index.
    pub fn to_sparse(&self) -> Vec<(usize, F)> {
        self.entries.iter().map(|(&i, v)| (i as usize, v.clone())).collect()
    }

    pub fn from_sparse(n: usize, grade: Grade, v: &[(usize, F)]) -> Result<Self> {
        Self::from_flat(n, grade, v.iter().map(|(i, x)| (*i as u64, x.clone())))
    }

    /// Coefficient-wise conversion to another field.
    pub fn map_field<G: Field>(&self, f: impl Fn(&F) -> G) -> MixedTensor<G> {
        let mut out = MixedTensor {
            n: self.n,
            grade: self.grade,
            entries: BTreeMap::new(),
        };
        for (&i, v) in &self.entries {
            let w = f(v);
            if !w.is_negligible() {
                out.entries.insert(i, w);
            }
        }
        out
    }
}

fn slot_mask(slots: &[usize], size: usize, kind: &'static str) -> Result<Vec<bool>> {
    let mut mask = vec![false; size];
    for &s in slots {
        if s == 0 || s > size || mask[s - 1] {
            return Err(Error::SlotOutOfRange { slot: s, size, kind });
        }
        mask[s - 1] = true;
    }
    Ok(mask)
}

impl<F: Field> fmt::Debug for MixedTensor<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MixedTensor(n={}, grade={}, mode={}) {{", self.n, self.grade, F::MODE)?;
        for (i, (idx, v)) in self.entries().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, " {:?}|{:?}: {:?}", idx.up, idx.down, v)?;
        }
        write!(f, " }}")
    }
}
