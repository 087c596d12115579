//! Scalars: exact Gaussian rationals and double-precision complex numbers.
//!
//! Generic code works against [`Field`]. The runtime-tagged [`Scalar`] is used at
//! the interchange boundary, where the mode is only known after parsing.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subspace::{ExactSpan, FloatSpan, SpanEngine};

/// Entries of float tensors below this magnitude are dropped after arithmetic.
pub const FLOAT_DROP_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

/// Rational number with an allocation-free fast path.
///
/// `Small(num, den)` is always normalized (`den > 0`, coprime). `Big` is used only
/// when the normalized value does not fit in `i64`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Rational {
    Small(i64, i64),
    Big(Box<BigRational>),
}

impl Rational {
    pub const ZERO: Rational = Rational::Small(0, 1);
    pub const ONE: Rational = Rational::Small(1, 1);

    pub fn integer(v: i64) -> Self {
        Rational::Small(v, 1)
    }

    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(Self::from_i128(num as i128, den as i128))
    }

    fn from_i128(mut num: i128, mut den: i128) -> Self {
        debug_assert!(den != 0);
        if let (Ok(n), Ok(d)) = (i64::try_from(num), i64::try_from(den)) {
            if d > 0 && n != i64::MIN {
                return Self::from_i64_pair(n, d);
            }
        }
        if den < 0 {
            num = -num;
            den = -den;
        }
        let g = num.gcd(&den);
        if g > 1 {
            num /= g;
            den /= g;
        }
        match (i64::try_from(num), i64::try_from(den)) {
            (Ok(n), Ok(d)) => Rational::Small(n, d),
            _ => Rational::Big(Box::new(BigRational::new(BigInt::from(num), BigInt::from(den)))),
        }
    }

    /// Normalizes `n/d` for `d > 0`.
    fn from_i64_pair(n: i64, d: i64) -> Self {
        if d == 1 || n == 0 {
            return Rational::Small(n, if n == 0 { 1 } else { d });
        }
        let g = binary_gcd(n.unsigned_abs(), d as u64) as i64;
        Rational::Small(n / g, d / g)
    }

    fn from_big(r: BigRational) -> Self {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) => Rational::Small(n, d),
            _ => Rational::Big(Box::new(r)),
        }
    }

    fn to_big(&self) -> BigRational {
        match self {
            Rational::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Rational::Big(b) => (**b).clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Rational::Small(0, _))
    }

    pub fn add(&self, rhs: &Self) -> Self {
        match (self, rhs) {
            (Rational::Small(a, 1), Rational::Small(c, 1)) => match a.checked_add(*c) {
                Some(s) => Rational::Small(s, 1),
                None => Self::from_i128(*a as i128 + *c as i128, 1),
            },
            (Rational::Small(a, b), Rational::Small(c, d)) => {
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                match (a * d).checked_add(c * b) {
                    Some(num) => Self::from_i128(num, b * d),
                    None => Self::from_big(self.to_big() + rhs.to_big()),
                }
            }
            _ => Self::from_big(self.to_big() + rhs.to_big()),
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            Rational::Small(n, d) => match n.checked_neg() {
                Some(m) => Rational::Small(m, *d),
                None => Self::from_i128(-(*n as i128), *d as i128),
            },
            Rational::Big(b) => Self::from_big(-(**b).clone()),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        match (self, rhs) {
            (Rational::Small(0, _), _) | (_, Rational::Small(0, _)) => Rational::ZERO,
            (Rational::Small(a, 1), Rational::Small(c, 1)) => match a.checked_mul(*c) {
                Some(p) => Rational::Small(p, 1),
                None => Self::from_i128(*a as i128 * *c as i128, 1),
            },
            (Rational::Small(a, b), Rational::Small(c, d)) => {
                Self::from_i128(*a as i128 * *c as i128, *b as i128 * *d as i128)
            }
            _ => Self::from_big(self.to_big() * rhs.to_big()),
        }
    }

    pub fn recip(&self) -> Option<Self> {
        match self {
            Rational::Small(0, _) => None,
            Rational::Small(n, d) => Some(Self::from_i128(*d as i128, *n as i128)),
            Rational::Big(b) => Some(Self::from_big(b.recip())),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Rational::Small(n, d) => *n as f64 / *d as f64,
            Rational::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn signum(&self) -> i32 {
        match self {
            Rational::Small(n, _) => n.signum() as i32,
            Rational::Big(b) => {
                if b.is_positive() {
                    1
                } else if b.is_negative() {
                    -1
                } else {
                    0
                }
            }
        }
    }
}

fn binary_gcd(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Rational::Small(a, b), Rational::Small(c, d)) => {
                (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128))
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rational::Small(n, 1) => write!(f, "{n}"),
            Rational::Small(n, d) => write!(f, "{n}/{d}"),
            Rational::Big(b) if b.denom().is_one() => write!(f, "{}", b.numer()),
            Rational::Big(b) => write!(f, "{}/{}", b.numer(), b.denom()),
        }
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let num: BigInt = num
            .parse()
            .map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
        let den: BigInt = den
            .parse()
            .map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        Ok(Self::from_big(BigRational::new(num, den)))
    }
}

/// `re + im·i` with rational parts. The order is lexicographic on `(re, im)` and only
/// serves canonical sorting.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussianRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussianRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn integer(re: i64, im: i64) -> Self {
        Self::new(Rational::integer(re), Rational::integer(im))
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn norm_sqr(&self) -> Rational {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.signum() < 0 {
            write!(f, "{}-{}i", self.re, self.im.neg())
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

/// Scalar field of a tensor computation.
///
/// Arithmetic goes through named by-reference methods so hot loops avoid clones of
/// big rationals.
pub trait Field: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    const MODE: Mode;

    /// Linear-algebra backend for spans of vectors over this field.
    type Span: SpanEngine<Self>;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_exact(v: &GaussianRational) -> Self;

    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn conj(&self) -> Self;
    fn inv(&self) -> Option<Self>;

    /// Exactly zero (exact mode) or below [`FLOAT_DROP_THRESHOLD`] (float mode).
    fn is_negligible(&self) -> bool;
    fn abs(&self) -> f64;
    fn to_complex(&self) -> Complex64;

    /// `exp(2πi·power/order)` when representable in this field.
    fn root_of_unity(order: u32, power: u32) -> Option<Self>;

    fn to_scalar(&self) -> Scalar;
    fn from_scalar(s: &Scalar) -> Result<Self>;

    fn div(&self, rhs: &Self) -> Option<Self> {
        rhs.inv().map(|r| self.mul(&r))
    }

    /// `self -= a * b`
    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        *self = self.sub(&a.mul(b));
    }

    /// `self += a * b`
    fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        *self = self.add(&a.mul(b));
    }
}

impl Field for GaussianRational {
    const MODE: Mode = Mode::Exact;
    type Span = ExactSpan;

    fn zero() -> Self {
        Self::integer(0, 0)
    }

    fn one() -> Self {
        Self::integer(1, 0)
    }

    fn from_i64(v: i64) -> Self {
        Self::integer(v, 0)
    }

    fn from_exact(v: &GaussianRational) -> Self {
        v.clone()
    }

    fn add(&self, rhs: &Self) -> Self {
        if self.im.is_zero() && rhs.im.is_zero() {
            return Self::new(self.re.add(&rhs.re), Rational::ZERO);
        }
        Self::new(self.re.add(&rhs.re), self.im.add(&rhs.im))
    }

    fn sub(&self, rhs: &Self) -> Self {
        if self.im.is_zero() && rhs.im.is_zero() {
            return Self::new(self.re.sub(&rhs.re), Rational::ZERO);
        }
        Self::new(self.re.sub(&rhs.re), self.im.sub(&rhs.im))
    }

    fn mul(&self, rhs: &Self) -> Self {
        if self.im.is_zero() && rhs.im.is_zero() {
            return Self::new(self.re.mul(&rhs.re), Rational::ZERO);
        }
        let re = self.re.mul(&rhs.re).sub(&self.im.mul(&rhs.im));
        let im = self.re.mul(&rhs.im).add(&self.im.mul(&rhs.re));
        Self::new(re, im)
    }

    fn neg(&self) -> Self {
        Self::new(self.re.neg(), self.im.neg())
    }

    fn conj(&self) -> Self {
        Self::new(self.re.clone(), self.im.neg())
    }

    fn inv(&self) -> Option<Self> {
        if self.im.is_zero() {
            return self.re.recip().map(|r| Self::new(r, Rational::ZERO));
        }
        let d = self.norm_sqr().recip()?;
        Some(Self::new(self.re.mul(&d), self.im.neg().mul(&d)))
    }

    fn is_negligible(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn abs(&self) -> f64 {
        self.to_complex().norm()
    }

    fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    fn root_of_unity(order: u32, power: u32) -> Option<Self> {
        if order == 0 {
            return None;
        }
        // Only the fourth roots of unity are Gaussian rationals.
        let quarter = 4 * power as u64;
        if !quarter.is_multiple_of(order as u64) {
            return None;
        }
        let q = quarter / order as u64;
        Some(match q % 4 {
            0 => Self::integer(1, 0),
            1 => Self::integer(0, 1),
            2 => Self::integer(-1, 0),
            _ => Self::integer(0, -1),
        })
    }

    fn to_scalar(&self) -> Scalar {
        Scalar::Exact(self.clone())
    }

    fn from_scalar(s: &Scalar) -> Result<Self> {
        match s {
            Scalar::Exact(v) => Ok(v.clone()),
            Scalar::Float(_) => Err(Error::ModeMismatch {
                left: Mode::Exact,
                right: Mode::Float,
            }),
        }
    }

    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        if self.im.is_zero() && a.im.is_zero() && b.im.is_zero() {
            self.re = self.re.sub(&a.re.mul(&b.re));
        } else {
            *self = Field::sub(self, &Field::mul(a, b));
        }
    }
}

impl Field for Complex64 {
    const MODE: Mode = Mode::Float;
    type Span = FloatSpan;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }

    fn from_exact(v: &GaussianRational) -> Self {
        v.to_complex()
    }

    fn add(&self, rhs: &Self) -> Self {
        *self + *rhs
    }

    fn sub(&self, rhs: &Self) -> Self {
        *self - *rhs
    }

    fn mul(&self, rhs: &Self) -> Self {
        *self * *rhs
    }

    fn neg(&self) -> Self {
        -*self
    }

    fn conj(&self) -> Self {
        Complex64::conj(self)
    }

    fn inv(&self) -> Option<Self> {
        if self.norm() == 0.0 {
            None
        } else {
            Some(Complex64::inv(self))
        }
    }

    fn is_negligible(&self) -> bool {
        self.norm() < FLOAT_DROP_THRESHOLD
    }

    fn abs(&self) -> f64 {
        self.norm()
    }

    fn to_complex(&self) -> Complex64 {
        *self
    }

    fn root_of_unity(order: u32, power: u32) -> Option<Self> {
        if order == 0 {
            return None;
        }
        let theta = 2.0 * std::f64::consts::PI * (power % order) as f64 / order as f64;
        Some(Complex64::from_polar(1.0, theta))
    }

    fn to_scalar(&self) -> Scalar {
        Scalar::Float(*self)
    }

    fn from_scalar(s: &Scalar) -> Result<Self> {
        match s {
            Scalar::Float(v) => Ok(*v),
            Scalar::Exact(_) => Err(Error::ModeMismatch {
                left: Mode::Float,
                right: Mode::Exact,
            }),
        }
    }

    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
    }

    fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
}

/// A complex scalar tagged with its mode. Mixed-mode arithmetic is an error.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(GaussianRational),
    Float(Complex64),
}

impl Scalar {
    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Float(_) => Mode::Float,
        }
    }

    fn binary(
        &self,
        rhs: &Self,
        exact: impl Fn(&GaussianRational, &GaussianRational) -> GaussianRational,
        float: impl Fn(&Complex64, &Complex64) -> Complex64,
    ) -> Result<Self> {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(exact(a, b))),
            (Scalar::Float(a), Scalar::Float(b)) => Ok(Scalar::Float(float(a, b))),
            _ => Err(Error::ModeMismatch {
                left: self.mode(),
                right: rhs.mode(),
            }),
        }
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        self.binary(rhs, Field::add, Field::add)
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self> {
        self.binary(rhs, Field::sub, Field::sub)
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        self.binary(rhs, Field::mul, Field::mul)
    }

    pub fn conj(&self) -> Self {
        match self {
            Scalar::Exact(v) => Scalar::Exact(Field::conj(v)),
            Scalar::Float(v) => Scalar::Float(Field::conj(v)),
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Scalar::Exact(v) => v.to_complex(),
            Scalar::Float(v) => *v,
        }
    }
}

/// One real component of a parsed scalar.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarPart {
    Exact(Rational),
    Float(f64),
}

impl Scalar {
    /// Assembles `re + im·i`; both parts must share a mode.
    pub fn from_parts(re: ScalarPart, im: ScalarPart) -> Result<Self> {
        match (re, im) {
            (ScalarPart::Exact(a), ScalarPart::Exact(b)) => Ok(Scalar::Exact(GaussianRational::new(a, b))),
            (ScalarPart::Float(a), ScalarPart::Float(b)) => Ok(Scalar::Float(Complex64::new(a, b))),
            _ => Err(Error::ModeMismatch {
                left: Mode::Exact,
                right: Mode::Float,
            }),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(v) => write!(f, "{v}"),
            Scalar::Float(v) => write!(f, "{v}"),
        }
    }
}
