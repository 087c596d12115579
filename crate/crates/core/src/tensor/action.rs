use std::collections::BTreeMap;

use super::{Layout, MixedTensor};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Field;

/// An invertible `n×n` matrix together with its inverse transpose, which is what
/// acts on covariant factors.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement<F: Field> {
    matrix: Matrix<F>,
    inv_transpose: Matrix<F>,
}

impl<F: Field> GroupElement<F> {
    pub fn new(matrix: Matrix<F>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidParameter("group element must be square".into()));
        }
        let inv_transpose = matrix.inverse()?.transpose();
        Ok(Self { matrix, inv_transpose })
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix<F> {
        &self.matrix
    }

    /// `(U^T)^{-1}`
    pub fn inverse_transpose(&self) -> &Matrix<F> {
        &self.inv_transpose
    }
}

impl<F: Field> MixedTensor<F> {
    /// Applies `m` to the single factor in position `slot` (0-based over all `k+l` slots).
    pub fn apply_at_slot(&self, slot: usize, m: &Matrix<F>) -> Result<Self> {
        if m.rows() != self.n || m.cols() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: m.rows() });
        }
        let degree = self.grade.degree();
        if slot >= degree {
            return Err(Error::SlotOutOfRange { slot: slot + 1, size: degree, kind: "tensor" });
        }
        let layout: Layout = self.layout();
        let stride = (self.n as u64).pow((degree - 1 - slot) as u32);
        let mut digits = vec![0u32; degree];
        let mut acc: BTreeMap<u64, F> = BTreeMap::new();
        for (&i, v) in &self.entries {
            layout.decode(i, &mut digits);
            let d = digits[slot] as usize;
            let base = i - digits[slot] as u64 * stride;
            for r in 0..self.n {
                let coef = m.get(r, d);
                if coef.is_negligible() {
                    continue;
                }
                acc.entry(base + r as u64 * stride)
                    .or_insert_with(F::zero)
                    .add_mul_assign(coef, v);
            }
        }
        acc.retain(|_, v| !v.is_negligible());
        Ok(Self {
            n: self.n,
            grade: self.grade,
            entries: acc,
        })
    }

    /// Applies `up` to every contravariant factor and `down` to every covariant factor.
    pub fn apply_slotwise(&self, up: &Matrix<F>, down: &Matrix<F>) -> Result<Self> {
        let mut out = self.clone();
        for s in 0..self.grade.k {
            out = out.apply_at_slot(s, up)?;
        }
        for s in 0..self.grade.l {
            out = out.apply_at_slot(self.grade.k + s, down)?;
        }
        Ok(out)
    }

    /// The action `x ↦ Ux` on `V`, `y ↦ (U^T)^{-1}y` on `V*`, extended to all factors.
    pub fn apply(&self, u: &GroupElement<F>) -> Result<Self> {
        if u.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: u.n() });
        }
        self.apply_slotwise(&u.matrix, &u.inv_transpose)
    }

    /// Infinitesimal action of a Lie algebra element `X`: the sum over contravariant
    /// slots of `X` acting there, minus the sum over covariant slots of `X^T`.
    pub fn derivation(&self, x: &Matrix<F>) -> Result<Self> {
        let mut out = Self::zero(self.n, self.grade)?;
        let xt = x.transpose().scale(&F::one().neg());
        for s in 0..self.grade.degree() {
            let m = if s < self.grade.k { x } else { &xt };
            out = out.add(&self.apply_at_slot(s, m)?)?;
        }
        Ok(out)
    }
}
