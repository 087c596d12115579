//! Named invariant tensors and the spanning sets built from them.
//!
//! Every constructor produces integer (or zero) coefficients, so generators are always
//! built exactly and converted when a float computation needs them.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::oracle::{GroupKind, GroupSpec};
use crate::scalar::{Field, GaussianRational};
use crate::subspace::SubspaceBasis;
use crate::tensor::{Grade, MixedTensor, MultiIndex, Permutation};

type Q = GaussianRational;

/// `I = Σ e_i ⊗ e_i*`
pub fn identity<F: Field>(n: usize) -> Result<MixedTensor<F>> {
    j(n, 1)
}

/// `det = Σ_π sgn(π) e*_{π(1)} ⊗ … ⊗ e*_{π(n)}`, grade `(0, n)`.
pub fn det<F: Field>(n: usize) -> Result<MixedTensor<F>> {
    let entries = Permutation::all(n).into_iter().map(|p| {
        let down = p.images().iter().map(|&i| i + 1).collect();
        (MultiIndex::new(vec![], down), F::from_i64(p.sign()))
    });
    MixedTensor::from_entries(n, Grade::new(0, n), entries)
}

/// `det^{⊗k}`; the scalar 1 when `k = 0`.
pub fn det_power<F: Field>(n: usize, k: usize) -> Result<MixedTensor<F>> {
    let d = det::<F>(n)?;
    let mut out = MixedTensor::scalar(n, F::one())?;
    for _ in 0..k {
        out = out.tensor_product(&d)?;
    }
    Ok(out)
}

/// `j_k = Σ_i (e_i ⊗ e_i*)^{⊗k}`, stored as `up = [i; k]`, `down = [i; k]`.
pub fn j<F: Field>(n: usize, k: usize) -> Result<MixedTensor<F>> {
    if k == 0 {
        return Err(Error::InvalidParameter("j_k needs k >= 1".into()));
    }
    let entries = (1..=n).map(|i| (MultiIndex::new(vec![i; k], vec![i; k]), F::one()));
    MixedTensor::from_entries(n, Grade::new(k, k), entries)
}

/// `f = Σ e_i ⊗ e_i`
pub fn f<F: Field>(n: usize) -> Result<MixedTensor<F>> {
    h(n, 2)
}

/// `h_k = Σ e_i^{⊗k}`
pub fn h<F: Field>(n: usize, k: usize) -> Result<MixedTensor<F>> {
    if k == 0 {
        return Err(Error::InvalidParameter("h_k needs k >= 1".into()));
    }
    let entries = (1..=n).map(|i| (MultiIndex::new(vec![i; k], vec![]), F::one()));
    MixedTensor::from_entries(n, Grade::new(k, 0), entries)
}

/// All sequences of `k` distinct values in `1..=n`.
fn distinct_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in 1..=n {
            if !cur.contains(&i) {
                cur.push(i);
                rec(n, k, cur, out);
                cur.pop();
            }
        }
    }
    rec(n, k, &mut cur, &mut out);
    out
}

/// `g_k = Σ e_{i_1} ⊗ … ⊗ e_{i_k}` over distinct indices; zero when `k > n`.
pub fn g<F: Field>(n: usize, k: usize) -> Result<MixedTensor<F>> {
    let entries = distinct_tuples(n, k)
        .into_iter()
        .map(|t| (MultiIndex::new(t, vec![]), F::one()));
    MixedTensor::from_entries(n, Grade::new(k, 0), entries)
}

/// `s = Σ_{i ≤ m} (e_i ⊗ e_{m+i} − e_{m+i} ⊗ e_i)` with `m = n/2`.
pub fn s<F: Field>(n: usize) -> Result<MixedTensor<F>> {
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("s needs even n, got {n}")));
    }
    let m = n / 2;
    let entries = (1..=m).flat_map(|i| {
        [
            (MultiIndex::new(vec![i, m + i], vec![]), F::one()),
            (MultiIndex::new(vec![m + i, i], vec![]), F::one().neg()),
        ]
    });
    MixedTensor::from_entries(n, Grade::new(2, 0), entries)
}

/// `Σ_π sgn(π) e_{π(1)}^{⊗k_1} ⊗ … ⊗ e_{π(n)}^{⊗k_n}`, one exponent per coordinate.
pub fn alt<F: Field>(n: usize, ks: &[usize]) -> Result<MixedTensor<F>> {
    if ks.len() != n {
        return Err(Error::InvalidParameter(format!(
            "alt needs {n} exponents, got {}",
            ks.len()
        )));
    }
    let total = ks.iter().sum();
    let entries = Permutation::all(n).into_iter().map(|p| {
        let up = (0..n)
            .flat_map(|i| std::iter::repeat_n(p.apply(i) + 1, ks[i]))
            .collect();
        (MultiIndex::new(up, vec![]), F::from_i64(p.sign()))
    });
    MixedTensor::from_entries(n, Grade::new(total, 0), entries)
}

/// `Σ e_{i_1}^{⊗2} ⊗ … ⊗ e_{i_k}^{⊗2}` over distinct indices.
pub fn paired_squares<F: Field>(n: usize, k: usize) -> Result<MixedTensor<F>> {
    let entries = distinct_tuples(n, k).into_iter().map(|t| {
        let up = t.iter().flat_map(|&i| [i, i]).collect();
        (MultiIndex::new(up, vec![]), F::one())
    });
    MixedTensor::from_entries(n, Grade::new(2 * k, 0), entries)
}

/// A named generator. Text forms: `identity`, `det`, `det*`, `detpow:k`, `j:k`, `f`,
/// `f*`, `h:k`, `g:k`, `s`, `s*`, `alt:k1,..,kn`, `sq:k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeneratorId {
    Identity,
    Det,
    DetStar,
    DetPower(usize),
    DetStarPower(usize),
    J(usize),
    F,
    FStar,
    H(usize),
    G(usize),
    S,
    SStar,
    Alt(Vec<usize>),
    Squares(usize),
}

impl GeneratorId {
    pub fn build<T: Field>(&self, n: usize) -> Result<MixedTensor<T>> {
        use GeneratorId::*;
        match self {
            Identity => identity(n),
            Det => det(n),
            DetStar => Ok(det::<T>(n)?.star()),
            DetPower(k) => det_power(n, *k),
            DetStarPower(k) => Ok(det_power::<T>(n, *k)?.star()),
            J(k) => j(n, *k),
            F => f(n),
            FStar => Ok(f::<T>(n)?.star()),
            H(k) => h(n, *k),
            G(k) => g(n, *k),
            S => s(n),
            SStar => Ok(s::<T>(n)?.star()),
            Alt(ks) => alt(n, ks),
            Squares(k) => paired_squares(n, *k),
        }
    }

    /// Total degree `k + l` of the generator at dimension `n`.
    pub fn degree(&self, n: usize) -> usize {
        use GeneratorId::*;
        match self {
            Identity | F | FStar | S | SStar => 2,
            Det | DetStar => n,
            DetPower(k) | DetStarPower(k) => n * k,
            J(k) => 2 * k,
            H(k) | G(k) => *k,
            Alt(ks) => ks.iter().sum(),
            Squares(k) => 2 * k,
        }
    }
}

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use GeneratorId::*;
        match self {
            Identity => f.write_str("identity"),
            Det => f.write_str("det"),
            DetStar => f.write_str("det*"),
            DetPower(k) => write!(f, "detpow:{k}"),
            DetStarPower(k) => write!(f, "detpow*:{k}"),
            J(k) => write!(f, "j:{k}"),
            F => f.write_str("f"),
            FStar => f.write_str("f*"),
            H(k) => write!(f, "h:{k}"),
            G(k) => write!(f, "g:{k}"),
            S => f.write_str("s"),
            SStar => f.write_str("s*"),
            Alt(ks) => {
                let parts: Vec<String> = ks.iter().map(ToString::to_string).collect();
                write!(f, "alt:{}", parts.join(","))
            }
            Squares(k) => write!(f, "sq:{k}"),
        }
    }
}

impl FromStr for GeneratorId {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        use GeneratorId::*;
        let text = text.trim();
        let num = |v: &str| -> Result<usize> {
            v.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad parameter in generator {text:?}")))
        };
        let (name, arg) = match text.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (text, None),
        };
        Ok(match (name, arg) {
            ("identity" | "I", None) => Identity,
            ("det", None) => Det,
            ("det*", None) => DetStar,
            ("f", None) => F,
            ("f*", None) => FStar,
            ("s", None) => S,
            ("s*", None) => SStar,
            ("detpow", Some(k)) => DetPower(num(k)?),
            ("detpow*", Some(k)) => DetStarPower(num(k)?),
            ("j", Some(k)) => J(num(k)?),
            ("h", Some(k)) => H(num(k)?),
            ("g", Some(k)) => G(num(k)?),
            ("sq", Some(k)) => Squares(num(k)?),
            ("alt", Some(ks)) => Alt(ks.split(',').map(num).collect::<Result<_>>()?),
            _ => return Err(Error::Parse(format!("unknown generator {text:?}"))),
        })
    }
}

/// One spanning-set statement: the invariants of `group` are spanned by (mutations
/// of) tensor products of (flips of) `generators`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FftCatalogEntry {
    pub group: GroupKind,
    /// `"main"` for the primary statement; alternative spanning sets are named.
    pub variant: &'static str,
    pub generators: Vec<GeneratorId>,
    pub flips: bool,
    pub mutations: bool,
}

/// Exponent tuples of length `n` with sum in `1..=max_sum`, optionally all odd.
fn exponent_tuples(n: usize, max_sum: usize, odd_only: bool) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn rec(n: usize, left: usize, odd: bool, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            if cur.iter().sum::<usize>() > 0 {
                out.push(cur.clone());
            }
            return;
        }
        for k in 0..=left {
            if odd && k % 2 == 0 {
                continue;
            }
            cur.push(k);
            rec(n, left - k, odd, cur, out);
            cur.pop();
        }
    }
    rec(n, max_sum, odd_only, &mut cur, &mut out);
    out
}

/// The spanning-set statements for `group`, with infinite generator families cut off
/// at total degree `degree`. The first entry is the primary statement.
pub fn fft_catalogue(group: GroupSpec, degree: usize) -> Vec<FftCatalogEntry> {
    use GeneratorId as G;
    use GroupKind::*;
    let n = group.n;
    let entry = |variant, generators: Vec<G>, flips, mutations| FftCatalogEntry {
        group: group.kind,
        variant,
        generators: generators.into_iter().filter(|g| g.degree(n) <= degree).collect(),
        flips,
        mutations,
    };
    let hs = |step: usize| (1..=degree).filter(|k| k % step == 0).map(G::H).collect::<Vec<_>>();
    match group.kind {
        GeneralLinear | Unitary => vec![entry("main", vec![G::Identity], false, true)],
        SpecialLinear => vec![entry("main", vec![G::Identity, G::Det, G::DetStar], false, true)],
        SpecialLinearK(k) => vec![entry(
            "main",
            vec![G::Identity, G::DetPower(k as usize), G::DetStarPower(k as usize)],
            false,
            true,
        )],
        Monomial => vec![entry("main", (1..=degree / 2).map(G::J).collect(), false, true)],
        Orthogonal => vec![
            entry("main", vec![G::Identity, G::F, G::FStar], false, true),
            entry("flips-of-identity", vec![G::Identity], true, true),
        ],
        SpecialOrthogonal => vec![entry("main", vec![G::Det, G::Identity], true, true)],
        Symmetric => vec![
            entry("main", hs(1), true, true),
            entry("g", (1..=n.min(degree)).map(G::G).collect(), true, true),
        ],
        SignedSymmetric => vec![
            entry("main", hs(2), true, true),
            entry("squares", (1..=n.min(degree / 2)).map(G::Squares).collect(), true, true),
        ],
        Alternating | SignedAlternating => {
            let odd = group.kind == SignedAlternating;
            let mut gens = hs(if odd { 2 } else { 1 });
            gens.extend(exponent_tuples(n, degree, odd).into_iter().map(G::Alt));
            vec![entry("main", gens, true, true)]
        }
        Symplectic => vec![
            entry("main", vec![G::Identity, G::S, G::SStar], false, true),
            entry("literal", vec![G::Identity, G::S, G::SStar], false, false),
        ],
    }
}

/// Seeds whose contraction closure should equal the invariant algebra of `group`,
/// limited to total degree `degree`. `I` is always added by the closure itself.
pub fn closure_seeds(group: GroupSpec, degree: usize) -> Result<Vec<MixedTensor<Q>>> {
    use GeneratorId as G;
    use GroupKind::*;
    let n = group.n;
    let hs = |step: usize| (1..=degree).filter(|k| k % step == 0).map(G::H).collect::<Vec<_>>();
    let ids: Vec<G> = match group.kind {
        GeneralLinear | Unitary => vec![],
        SpecialLinear => vec![G::Det, G::DetStar],
        SpecialLinearK(k) => vec![G::DetPower(k as usize), G::DetStarPower(k as usize)],
        Monomial => vec![G::J(2)],
        Orthogonal => vec![G::F, G::FStar],
        SpecialOrthogonal => vec![G::F, G::FStar, G::Det, G::DetStar],
        Symmetric => hs(1),
        SignedSymmetric => hs(2),
        Alternating | SignedAlternating => {
            let odd = group.kind == SignedAlternating;
            let mut gens = hs(if odd { 2 } else { 1 });
            gens.extend(exponent_tuples(n, degree, odd).into_iter().map(G::Alt));
            gens
        }
        Symplectic => vec![G::S, G::SStar],
    };
    ids.iter()
        .filter(|g| g.degree(n) <= degree)
        .map(|g| g.build(n))
        .collect()
}

/// Every flip of `x`: each subset of contravariant slots lowered and each subset of
/// covariant slots raised.
pub fn all_flips<F: Field>(x: &MixedTensor<F>) -> Vec<MixedTensor<F>> {
    let (k, l) = (x.grade().k, x.grade().l);
    let subsets = |m: usize| -> Vec<Vec<usize>> {
        (0u32..1 << m)
            .map(|mask| (0..m).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).collect())
            .collect()
    };
    let mut out = Vec::new();
    for lower in subsets(k) {
        for raise in subsets(l) {
            out.push(x.flip(&lower, &raise).expect("valid slot subsets"));
        }
    }
    out
}

/// All `(σ, τ)` pairs for a grade.
fn all_mutations(grade: Grade) -> Vec<(Permutation, Permutation)> {
    let ups = Permutation::all(grade.k);
    let downs = Permutation::all(grade.l);
    ups.iter()
        .flat_map(|s| downs.iter().map(move |t| (s.clone(), t.clone())))
        .collect()
}

/// Entry list scaled so the first entry (in flat order) is 1.
fn normalized_key(x: &MixedTensor<Q>) -> Vec<(u64, Q)> {
    let mut it = x.flat_entries();
    let Some((_, first)) = it.next() else {
        return Vec::new();
    };
    let inv = first.inv().expect("stored entries are nonzero");
    x.flat_entries().map(|(i, v)| (i, v.mul(&inv))).collect()
}

/// Key identifying `x` up to nonzero scalars and, if `up_to_mutation`, up to mutation.
/// Falls back to the scalar-only key when there are too many mutations to scan.
fn canonical_key(x: &MixedTensor<Q>, up_to_mutation: bool) -> (Grade, Vec<(u64, Q)>) {
    let grade = x.grade();
    let count: usize = (1..=grade.k).product::<usize>() * (1..=grade.l).product::<usize>();
    if !up_to_mutation || count > 5040 {
        return (grade, normalized_key(x));
    }
    let key = all_mutations(grade)
        .iter()
        .map(|(s, t)| normalized_key(&x.mutate(s, t).expect("sizes match")))
        .min()
        .unwrap_or_default();
    (grade, key)
}

/// The building blocks of an entry's products at target grade `grade`: generators (or
/// all their flips) that fit, with zero tensors and duplicates removed.
fn atoms(entry: &FftCatalogEntry, n: usize, grade: Grade) -> Result<Vec<MixedTensor<Q>>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for id in &entry.generators {
        if id.degree(n) > grade.degree() || id.degree(n) == 0 {
            continue;
        }
        let base = id.build::<Q>(n)?;
        let candidates = if entry.flips { all_flips(&base) } else { vec![base] };
        for c in candidates {
            if c.is_zero() || !c.grade().fits_within(grade) {
                continue;
            }
            if seen.insert(canonical_key(&c, entry.mutations)) {
                out.push(c);
            }
        }
    }
    Ok(out)
}

/// Tensor products of atoms whose grades add up to `grade`. Multisets when `ordered`
/// is false (order is then irrelevant up to mutation), sequences otherwise.
fn products(
    n: usize,
    atoms: &[MixedTensor<Q>],
    grade: Grade,
    ordered: bool,
    mut visit: impl FnMut(MixedTensor<Q>) -> Result<()>,
) -> Result<()> {
    fn rec(
        atoms: &[MixedTensor<Q>],
        start: usize,
        acc: &MixedTensor<Q>,
        target: Grade,
        ordered: bool,
        visit: &mut dyn FnMut(MixedTensor<Q>) -> Result<()>,
    ) -> Result<()> {
        if acc.grade() == target {
            return visit(acc.clone());
        }
        let from = if ordered { 0 } else { start };
        for (i, a) in atoms.iter().enumerate().skip(from) {
            let g = acc.grade() + a.grade();
            if g.fits_within(target) {
                rec(atoms, i, &acc.tensor_product(a)?, target, ordered, visit)?;
            }
        }
        Ok(())
    }
    let one = MixedTensor::scalar(n, Q::one())?;
    rec(atoms, 0, &one, grade, ordered, &mut visit)
}

/// Limits on full spanning-set enumeration.
#[derive(Clone, Copy, Debug)]
pub struct SpanningCaps {
    /// Largest number of tensors returned before giving up.
    pub max_tensors: usize,
}

impl Default for SpanningCaps {
    fn default() -> Self {
        Self { max_tensors: 200_000 }
    }
}

/// Explicit spanning set of an entry at `grade`: every admissible product and, when the
/// entry allows it, every mutation of each product. Exact duplicates are removed.
pub fn fft_spanning_set(
    entry: &FftCatalogEntry,
    n: usize,
    grade: Grade,
    caps: SpanningCaps,
) -> Result<Vec<MixedTensor<Q>>> {
    let atoms = atoms(entry, n, grade)?;
    let mutations = if entry.mutations {
        all_mutations(grade)
    } else {
        vec![(Permutation::identity(grade.k), Permutation::identity(grade.l))]
    };
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    products(n, &atoms, grade, !entry.mutations, |p| {
        for (s, t) in &mutations {
            let m = p.mutate(s, t)?;
            if seen.insert(m.to_sparse()) {
                if out.len() == caps.max_tensors {
                    return Err(Error::InvalidParameter(format!(
                        "spanning set for {} at {grade} exceeds {} tensors",
                        entry.group, caps.max_tensors
                    )));
                }
                out.push(m);
            }
        }
        Ok(())
    })?;
    Ok(out)
}

/// Generators of the mutation group at `grade`: a transposition and a full cycle on
/// each side.
pub(crate) fn mutation_generators(grade: Grade) -> Vec<(Permutation, Permutation)> {
    let mut out = Vec::new();
    let (idk, idl) = (Permutation::identity(grade.k), Permutation::identity(grade.l));
    if grade.k >= 2 {
        out.push((Permutation::transposition(grade.k, 0, 1), idl.clone()));
        if grade.k > 2 {
            out.push((Permutation::cycle(grade.k), idl.clone()));
        }
    }
    if grade.l >= 2 {
        out.push((idk.clone(), Permutation::transposition(grade.l, 0, 1)));
        if grade.l > 2 {
            out.push((idk, Permutation::cycle(grade.l)));
        }
    }
    out
}

/// Span of [`fft_spanning_set`] computed without listing every mutation: products are
/// inserted, then the span is closed under the generators of the mutation group.
pub fn fft_span<F: Field>(entry: &FftCatalogEntry, n: usize, grade: Grade, tol: f64) -> Result<SubspaceBasis<F>> {
    let atoms = atoms(entry, n, grade)?;
    let mut basis = SubspaceBasis::<F>::empty(n, grade, tol)?;
    let mut accepted = Vec::new();
    products(n, &atoms, grade, !entry.mutations, |p| {
        let p = p.map_field(F::from_exact);
        if basis.insert(&p)? {
            accepted.push(p);
        }
        Ok(())
    })?;
    if entry.mutations {
        let gens = mutation_generators(grade);
        while let Some(x) = accepted.pop() {
            for (s, t) in &gens {
                let y = x.mutate(s, t)?;
                if basis.insert(&y)? {
                    accepted.push(y);
                }
            }
        }
    }
    Ok(basis)
}

#[cfg(test)]
mod tests;
