use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Grade, MixedTensor, MultiIndex};
use crate::error::{Error, Result};
use crate::scalar::{Field, GaussianRational, Mode, Scalar};
use crate::subspace::{parse_pair, scalar_pair};

/// One nonzero entry in the interchange format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryJson {
    pub up: Vec<usize>,
    pub down: Vec<usize>,
    pub re: serde_json::Value,
    pub im: serde_json::Value,
}

/// Tensor interchange format. Exact components are rational strings such as `"-3/2"`,
/// float components are numbers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorJson {
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub mode: Mode,
    pub entries: Vec<EntryJson>,
}

impl<F: Field> MixedTensor<F> {
    pub fn to_json(&self) -> TensorJson {
        let entries = self
            .entries()
            .map(|(idx, v)| {
                let [re, im] = scalar_pair(&v.to_scalar());
                EntryJson { up: idx.up, down: idx.down, re, im }
            })
            .collect();
        TensorJson {
            n: self.n,
            k: self.grade.k,
            l: self.grade.l,
            mode: F::MODE,
            entries,
        }
    }

    pub fn from_json(json: &TensorJson) -> Result<Self> {
        if json.mode != F::MODE {
            return Err(Error::ModeMismatch { left: F::MODE, right: json.mode });
        }
        let entries = json
            .entries
            .iter()
            .map(|e| {
                let s = parse_pair(json.mode, &[e.re.clone(), e.im.clone()])?;
                Ok((MultiIndex::new(e.up.clone(), e.down.clone()), F::from_scalar(&s)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_entries(json.n, Grade::new(json.k, json.l), entries)
    }
}

/// A tensor whose scalar mode is known only at run time.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyTensor {
    Exact(MixedTensor<GaussianRational>),
    Float(MixedTensor<Complex64>),
}

impl AnyTensor {
    pub fn mode(&self) -> Mode {
        match self {
            AnyTensor::Exact(_) => Mode::Exact,
            AnyTensor::Float(_) => Mode::Float,
        }
    }

    pub fn grade(&self) -> Grade {
        match self {
            AnyTensor::Exact(t) => t.grade(),
            AnyTensor::Float(t) => t.grade(),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            AnyTensor::Exact(t) => t.n(),
            AnyTensor::Float(t) => t.n(),
        }
    }

    pub fn from_json(json: &TensorJson) -> Result<Self> {
        Ok(match json.mode {
            Mode::Exact => AnyTensor::Exact(MixedTensor::from_json(json)?),
            Mode::Float => AnyTensor::Float(MixedTensor::from_json(json)?),
        })
    }

    pub fn to_json(&self) -> TensorJson {
        match self {
            AnyTensor::Exact(t) => t.to_json(),
            AnyTensor::Float(t) => t.to_json(),
        }
    }

    /// Parses one JSON tensor.
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(text)?)
    }

    /// Coefficient of a basis tensor.
    pub fn get(&self, idx: &MultiIndex) -> Result<Scalar> {
        Ok(match self {
            AnyTensor::Exact(t) => t.get(idx)?.to_scalar(),
            AnyTensor::Float(t) => t.get(idx)?.to_scalar(),
        })
    }

    /// Float copy of the tensor; exact coefficients are rounded.
    pub fn to_float(&self) -> MixedTensor<Complex64> {
        match self {
            AnyTensor::Exact(t) => t.map_field(Field::to_complex),
            AnyTensor::Float(t) => t.clone(),
        }
    }
}

impl From<MixedTensor<GaussianRational>> for AnyTensor {
    fn from(t: MixedTensor<GaussianRational>) -> Self {
        AnyTensor::Exact(t)
    }
}

impl From<MixedTensor<Complex64>> for AnyTensor {
    fn from(t: MixedTensor<Complex64>) -> Self {
        AnyTensor::Float(t)
    }
}
