//! Rank decisions modulo a prime, used to steer exact closure computations.
//!
//! The Gaussian integers map onto `F_p` for a prime `p ≡ 1 (mod 4)` by sending `i` to a
//! square root of `-1`. Independence modulo `p` implies independence over the Gaussian
//! rationals; the converse can fail, so results obtained here are always certified
//! with exact arithmetic before they are reported.

use std::cmp::Reverse;
use std::collections::hash_map::DefaultHasher;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::scalar::{GaussianRational, Rational};

/// A prime below `2^31` congruent to 1 modulo 4.
pub(crate) const P: u64 = 2_147_483_629;
/// A square root of `-1` modulo [`P`].
const SQRT_NEG_ONE: u64 = 629_208_553;

fn mul(a: u64, b: u64) -> u64 {
    a * b % P
}

fn sub(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + P - b
    }
}

fn pow(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul(acc, base);
        }
        base = mul(base, base);
        exp >>= 1;
    }
    acc
}

fn inv(a: u64) -> u64 {
    pow(a, P - 2)
}

fn reduce_i64(v: i64) -> u64 {
    v.rem_euclid(P as i64) as u64
}

fn reduce_big(v: &BigInt) -> u64 {
    let r = v % BigInt::from(P);
    let r = r.to_i64().expect("remainder fits");
    reduce_i64(r)
}

/// Image of a rational, or `None` when `p` divides the denominator.
fn rational(r: &Rational) -> Option<u64> {
    let (num, den) = match r {
        Rational::Small(n, 1) => return Some(reduce_i64(*n)),
        Rational::Small(n, d) => (reduce_i64(*n), reduce_i64(*d)),
        Rational::Big(b) => (reduce_big(b.numer()), reduce_big(b.denom())),
    };
    (den != 0).then(|| mul(num, inv(den)))
}

/// Image of a Gaussian rational, or `None` when a denominator vanishes modulo `p`.
pub(crate) fn residue(z: &GaussianRational) -> Option<u64> {
    let re = rational(&z.re)?;
    if z.im.is_zero() {
        return Some(re);
    }
    let im = rational(&z.im)?;
    Some((re + mul(im, SQRT_NEG_ONE)) % P)
}

/// Sparse row-echelon form over `F_p` with monic leading entries.
#[derive(Clone, Debug)]
pub(crate) struct ModpSpan {
    rows: Vec<Vec<(usize, u64)>>,
    pivot_row: HashMap<usize, usize>,
    scratch: Vec<u64>,
    /// Hashes of the normalized vectors offered so far.
    seen: HashSet<u64>,
}

impl ModpSpan {
    pub(crate) fn new(ambient: usize) -> Self {
        Self {
            rows: Vec::new(),
            pivot_row: HashMap::new(),
            scratch: vec![0; ambient],
            seen: HashSet::new(),
        }
    }

    #[cfg(test)]
    pub(crate) fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds a sorted sparse vector; returns whether the rank grew.
    pub(crate) fn insert(&mut self, v: &[(usize, u64)]) -> bool {
        let Some(&(_, lead)) = v.iter().find(|e| e.1 != 0) else {
            return false;
        };
        if self.rows.len() == self.scratch.len() || !self.seen.insert(fingerprint(v, inv(lead))) {
            return false;
        }
        let mut touched = Vec::with_capacity(v.len());
        let mut heap = BinaryHeap::with_capacity(v.len());
        for &(c, x) in v {
            if x != 0 {
                self.scratch[c] = x;
                touched.push(c);
                heap.push(Reverse(c));
            }
        }
        let mut pivot = None;
        while let Some(Reverse(c)) = heap.pop() {
            let x = self.scratch[c];
            if x == 0 {
                continue;
            }
            let Some(&r) = self.pivot_row.get(&c) else {
                pivot = Some(c);
                break;
            };
            for &(cc, y) in &self.rows[r] {
                if self.scratch[cc] == 0 {
                    touched.push(cc);
                    heap.push(Reverse(cc));
                }
                self.scratch[cc] = sub(self.scratch[cc], mul(x, y));
            }
        }
        let row = pivot.map(|p| {
            let scale = inv(self.scratch[p]);
            let mut row: Vec<(usize, u64)> = touched
                .iter()
                .filter(|&&c| c >= p && self.scratch[c] != 0)
                .map(|&c| (c, mul(self.scratch[c], scale)))
                .collect();
            row.sort_unstable_by_key(|e| e.0);
            row.dedup_by_key(|e| e.0);
            row
        });
        for c in touched {
            self.scratch[c] = 0;
        }
        let Some(row) = row else {
            return false;
        };
        self.pivot_row.insert(row[0].0, self.rows.len());
        self.rows.push(row);
        true
    }
}

fn fingerprint(v: &[(usize, u64)], scale: u64) -> u64 {
    let mut h = DefaultHasher::new();
    for &(c, x) in v {
        if x != 0 {
            (c, mul(x, scale)).hash(&mut h);
        }
    }
    h.finish()
}
