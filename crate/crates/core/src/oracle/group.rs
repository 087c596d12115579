use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The subgroups of `GL(n, C)` covered by the catalogue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupKind {
    GeneralLinear,
    Unitary,
    SpecialLinear,
    /// `{U : det(U)^k = 1}`
    SpecialLinearK(u32),
    /// Matrices with exactly one nonzero per row.
    Monomial,
    Orthogonal,
    SpecialOrthogonal,
    /// Permutation matrices.
    Symmetric,
    /// Signed permutation matrices.
    SignedSymmetric,
    /// Even permutation matrices.
    Alternating,
    /// Signed permutation matrices of determinant 1.
    SignedAlternating,
    Symplectic,
}

impl GroupKind {
    /// Every catalogue entry, with `SL_k` at `k = 2` and `k = 4`.
    pub fn all() -> Vec<GroupKind> {
        use GroupKind::*;
        vec![
            GeneralLinear,
            Unitary,
            SpecialLinear,
            SpecialLinearK(2),
            SpecialLinearK(4),
            Monomial,
            Orthogonal,
            SpecialOrthogonal,
            Symmetric,
            SignedSymmetric,
            Alternating,
            SignedAlternating,
            Symplectic,
        ]
    }

    /// Groups whose presentation uses only matrices over `{0, ±1}` and diagonal Lie
    /// elements, so their invariants are cheap to compute exactly.
    pub fn is_permutation_family(self) -> bool {
        use GroupKind::*;
        matches!(self, Monomial | Symmetric | SignedSymmetric | Alternating | SignedAlternating)
    }

    pub fn requires_even_n(self) -> bool {
        self == GroupKind::Symplectic
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use GroupKind::*;
        match self {
            GeneralLinear => f.write_str("gl"),
            Unitary => f.write_str("u"),
            SpecialLinear => f.write_str("sl"),
            SpecialLinearK(k) => write!(f, "slk:{k}"),
            Monomial => f.write_str("monomial"),
            Orthogonal => f.write_str("o"),
            SpecialOrthogonal => f.write_str("so"),
            Symmetric => f.write_str("sym"),
            SignedSymmetric => f.write_str("signed"),
            Alternating => f.write_str("alt"),
            SignedAlternating => f.write_str("signed-alt"),
            Symplectic => f.write_str("sp"),
        }
    }
}

impl FromStr for GroupKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use GroupKind::*;
        let s = s.trim().to_ascii_lowercase();
        Ok(match s.as_str() {
            "gl" => GeneralLinear,
            "u" => Unitary,
            "sl" => SpecialLinear,
            "monomial" => Monomial,
            "o" => Orthogonal,
            "so" => SpecialOrthogonal,
            "sym" => Symmetric,
            "signed" => SignedSymmetric,
            "alt" => Alternating,
            "signed-alt" => SignedAlternating,
            "sp" => Symplectic,
            other => match other.strip_prefix("slk:") {
                Some(k) => {
                    let k: u32 = k.parse().map_err(|_| Error::Parse(format!("bad SL_k order in {other:?}")))?;
                    if k == 0 {
                        return Err(Error::Parse("SL_k order must be positive".into()));
                    }
                    SpecialLinearK(k)
                }
                None => return Err(Error::Parse(format!("unknown group {other:?}"))),
            },
        })
    }
}

impl Serialize for GroupKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GroupKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A catalogue group at a fixed dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupSpec {
    pub kind: GroupKind,
    pub n: usize,
}

impl GroupSpec {
    pub fn new(kind: GroupKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("group dimension must be at least 1".into()));
        }
        if kind.requires_even_n() && !n.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("{kind} requires even n, got {n}")));
        }
        Ok(Self { kind, n })
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(n={})", self.kind, self.n)
    }
}
