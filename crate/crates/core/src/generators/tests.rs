use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::matrix::Matrix;
use crate::oracle::{GroupKind, GroupSpec};
use crate::subspace::{span_basis, DEFAULT_TOL};
use crate::tensor::{random, GroupElement, MultiIndex};

fn q(v: i64) -> Q {
    Q::from_i64(v)
}

fn e(n: usize, up: &[usize], down: &[usize]) -> MixedTensor<Q> {
    MixedTensor::basis(n, up, down).unwrap()
}

fn sum(terms: &[(i64, MixedTensor<Q>)]) -> MixedTensor<Q> {
    let refs: Vec<(Q, &MixedTensor<Q>)> = terms.iter().map(|(c, t)| (q(*c), t)).collect();
    MixedTensor::linear_combine(&refs).unwrap()
}

fn tensor_power(x: &MixedTensor<Q>, k: usize) -> MixedTensor<Q> {
    let mut out = MixedTensor::scalar(x.n(), Q::one()).unwrap();
    for _ in 0..k {
        out = out.tensor_product(x).unwrap();
    }
    out
}

/// Determinant by cofactor expansion along the first row.
fn cofactor_det(m: &[Vec<Q>]) -> Q {
    if m.len() == 1 {
        return m[0][0].clone();
    }
    let mut acc = Q::zero();
    for c in 0..m.len() {
        let minor: Vec<Vec<Q>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, v)| v.clone()).collect())
            .collect();
        let term = m[0][c].mul(&cofactor_det(&minor));
        acc = if c % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

fn span_of(n: usize, grade: Grade, xs: &[MixedTensor<Q>]) -> SubspaceBasis<Q> {
    span_basis(n, grade, xs, DEFAULT_TOL).unwrap()
}

fn all_mutations_of(x: &MixedTensor<Q>) -> Vec<MixedTensor<Q>> {
    let g = x.grade();
    let mut out = Vec::new();
    for s in Permutation::all(g.k) {
        for t in Permutation::all(g.l) {
            out.push(x.mutate(&s, &t).unwrap());
        }
    }
    out
}

#[test]
fn identity_and_j() {
    assert_eq!(identity::<Q>(1).unwrap(), e(1, &[1], &[1]));
    let i3 = identity::<Q>(3).unwrap();
    assert_eq!(i3.nnz(), 3);
    assert_eq!(i3.contract(1, 1).unwrap(), MixedTensor::scalar(3, q(3)).unwrap());
    assert_eq!(j::<Q>(3, 1).unwrap(), i3);
    let j2 = j::<Q>(2, 2).unwrap();
    assert_eq!(j2, sum(&[(1, e(2, &[1, 1], &[1, 1])), (1, e(2, &[2, 2], &[2, 2]))]));
}

#[test]
fn det_examples() {
    assert_eq!(det::<Q>(1).unwrap(), e(1, &[], &[1]));
    assert_eq!(det::<Q>(2).unwrap(), sum(&[(1, e(2, &[], &[1, 2])), (-1, e(2, &[], &[2, 1]))]));
    let d3 = det::<Q>(3).unwrap();
    assert_eq!(d3.nnz(), 6);
    assert_eq!(det_power::<Q>(2, 0).unwrap(), MixedTensor::scalar(2, Q::one()).unwrap());
    assert_eq!(det_power::<Q>(2, 2).unwrap(), tensor_power(&det(2).unwrap(), 2));
}

#[test]
fn det_evaluates_to_the_matrix_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let d3 = det::<Q>(3).unwrap();
    for _ in 0..20 {
        let cols: Vec<Vec<Q>> = (0..3)
            .map(|_| (0..3).map(|_| Q::integer(rng.gen_range(-4..=4), rng.gen_range(-2..=2))).collect())
            .collect();
        // ⟨det, x₁⊗x₂⊗x₃⟩ with the bilinear pairing e_i* (e_j) = δ_ij
        let mut x = MixedTensor::scalar(3, Q::one()).unwrap();
        for c in &cols {
            let v = MixedTensor::from_flat(3, Grade::new(1, 0), c.iter().cloned().enumerate().map(|(i, v)| (i as u64, v))).unwrap();
            x = x.tensor_product(&v).unwrap();
        }
        let mut paired = Q::zero();
        for (idx, v) in d3.flat_entries() {
            paired = paired.add(&v.mul(&x.flat_entries().find(|(j, _)| *j == idx).map(|(_, w)| w.clone()).unwrap_or_else(Q::zero)));
        }
        let rows: Vec<Vec<Q>> = (0..3).map(|r| (0..3).map(|c| cols[c][r].clone()).collect()).collect();
        assert_eq!(paired, cofactor_det(&rows));
    }
}

#[test]
fn f_h_g_examples() {
    assert_eq!(f::<Q>(1).unwrap(), e(1, &[1, 1], &[]));
    let fs = f::<Q>(3).unwrap().star();
    assert_eq!(fs.grade(), Grade::new(0, 2));
    assert!(fs.flat_entries().all(|(_, v)| *v == Q::one()));
    assert_eq!(identity::<Q>(3).unwrap().flip(&[], &[1]).unwrap(), f(3).unwrap());
    assert_eq!(h::<Q>(2, 1).unwrap(), sum(&[(1, e(2, &[1], &[])), (1, e(2, &[2], &[]))]));
    assert_eq!(h::<Q>(3, 2).unwrap(), f(3).unwrap());
    assert!(g::<Q>(2, 3).unwrap().is_zero());
    assert_eq!(g::<Q>(2, 3).unwrap().grade(), Grade::new(3, 0));
    assert_eq!(g::<Q>(2, 2).unwrap(), sum(&[(1, e(2, &[1, 2], &[])), (1, e(2, &[2, 1], &[]))]));
    assert_eq!(g::<Q>(3, 0).unwrap(), MixedTensor::scalar(3, Q::one()).unwrap());
}

#[test]
fn h_is_permutation_invariant() {
    let h3 = h::<Q>(3, 3).unwrap();
    for p in Permutation::all(3) {
        let u = GroupElement::new(Matrix::permutation(p.images())).unwrap();
        assert_eq!(h3.apply(&u).unwrap(), h3);
    }
}

#[test]
fn g2_from_h() {
    for n in 1..=4 {
        let h1 = h::<Q>(n, 1).unwrap();
        let expected = h1.tensor_product(&h1).unwrap().sub(&h::<Q>(n, 2).unwrap()).unwrap();
        assert_eq!(g::<Q>(n, 2).unwrap(), expected, "n = {n}");
    }
}

/// `Σ_π sgn(π) Σ_{f∘π = f} e_f` over maps constant on the cycles of π; each inner sum
/// is a mutation of the product of `h` over the cycle lengths.
#[test]
fn g_is_a_signed_sum_of_h_mutations() {
    for n in 1..=4 {
        for k in 1..=4 {
            let mut total = MixedTensor::<Q>::zero(n, Grade::new(k, 0)).unwrap();
            for pi in Permutation::all(k) {
                let cycles = pi.cycles();
                let mut inner = MixedTensor::<Q>::zero(n, Grade::new(k, 0)).unwrap();
                let mut labels = vec![0usize; cycles.len()];
                loop {
                    let mut idx = vec![0usize; k];
                    for (c, cycle) in cycles.iter().enumerate() {
                        for &slot in cycle {
                            idx[slot] = labels[c] + 1;
                        }
                    }
                    inner = inner.add(&e(n, &idx, &[])).unwrap();
                    let mut pos = 0;
                    while pos < labels.len() && labels[pos] + 1 == n {
                        labels[pos] = 0;
                        pos += 1;
                    }
                    if pos == labels.len() {
                        break;
                    }
                    labels[pos] += 1;
                }
                let mut product = MixedTensor::scalar(n, Q::one()).unwrap();
                for c in &cycles {
                    product = product.tensor_product(&h::<Q>(n, c.len()).unwrap()).unwrap();
                }
                assert!(all_mutations_of(&product).contains(&inner), "n={n} k={k} π={pi:?}");
                total = total.add(&inner.scale(&q(pi.sign()))).unwrap();
            }
            assert_eq!(total, g::<Q>(n, k).unwrap(), "n={n} k={k}");
        }
    }
}

#[test]
fn h_from_g_products() {
    for n in 1..=4 {
        for k in 1..=4 {
            let entry = FftCatalogEntry {
                group: GroupKind::Symmetric,
                variant: "g",
                generators: (0..=k).map(GeneratorId::G).collect(),
                flips: false,
                mutations: true,
            };
            let grade = Grade::new(k, 0);
            let span = fft_span::<Q>(&entry, n, grade, DEFAULT_TOL).unwrap();
            assert!(span.contains(&h(n, k).unwrap()).unwrap(), "n={n} k={k}");
        }
    }
}

#[test]
fn s_examples() {
    assert_eq!(s::<Q>(2).unwrap(), sum(&[(1, e(2, &[1, 2], &[])), (-1, e(2, &[2, 1], &[]))]));
    assert!(s::<Q>(3).is_err());
    let s4 = s::<Q>(4).unwrap();
    assert_eq!(s4.nnz(), 4);
    for (idx, v) in s4.star().entries() {
        // star(s) at (a,b) is s at (b,a), which is the negated entry at (a,b)
        let reversed = s4.get(&MultiIndex::new(vec![idx.down[1], idx.down[0]], vec![])).unwrap();
        assert_eq!(*v, reversed);
        assert_eq!(s4.get(&MultiIndex::new(idx.down.clone(), vec![])).unwrap(), v.neg());
    }
}

#[test]
fn s_is_invariant_under_det_one_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let s2 = s::<Complex64>(2).unwrap();
    for _ in 0..10 {
        let m = random::gaussian_matrix(&mut rng, 2);
        let d = m.determinant();
        let r = d.sqrt();
        let u = m.map(|z| z / r);
        let g = GroupElement::new(u).unwrap();
        assert!(s2.apply(&g).unwrap().max_abs_diff(&s2).unwrap() < 1e-10);
    }
}

#[test]
fn alt_examples() {
    assert_eq!(alt::<Q>(2, &[1, 1]).unwrap(), s(2).unwrap());
    assert_eq!(alt::<Q>(2, &[1, 1]).unwrap(), det::<Q>(2).unwrap().flip(&[], &[1, 2]).unwrap());
    assert_eq!(alt::<Q>(2, &[1, 0]).unwrap(), sum(&[(1, e(2, &[1], &[])), (-1, e(2, &[2], &[]))]));
    assert_eq!(
        alt::<Q>(2, &[2, 1]).unwrap(),
        sum(&[(1, e(2, &[1, 1, 2], &[])), (-1, e(2, &[2, 2, 1], &[]))])
    );
    assert!(alt::<Q>(2, &[1]).is_err());
}

#[test]
fn generator_names_round_trip() {
    for text in ["identity", "det", "det*", "detpow:2", "detpow*:4", "j:2", "f", "f*", "h:3", "g:0", "s", "s*", "alt:2,1,0", "sq:2"] {
        let id: GeneratorId = text.parse().unwrap();
        assert_eq!(id.to_string(), text);
    }
    assert_eq!("I".parse::<GeneratorId>().unwrap(), GeneratorId::Identity);
    assert!("h".parse::<GeneratorId>().is_err());
    assert!("bogus:1".parse::<GeneratorId>().is_err());
}

#[test]
fn generators_are_invariant_under_their_groups() {
    let cases: Vec<(GroupKind, usize, GeneratorId)> = vec![
        (GroupKind::SpecialLinear, 3, GeneratorId::Det),
        (GroupKind::SpecialLinear, 2, GeneratorId::DetStar),
        (GroupKind::Symmetric, 3, GeneratorId::H(3)),
        (GroupKind::Monomial, 3, GeneratorId::J(2)),
        (GroupKind::Orthogonal, 3, GeneratorId::F),
        (GroupKind::Orthogonal, 2, GeneratorId::FStar),
        (GroupKind::Symplectic, 4, GeneratorId::S),
        (GroupKind::Symplectic, 4, GeneratorId::SStar),
        (GroupKind::SignedSymmetric, 3, GeneratorId::Squares(2)),
        (GroupKind::Alternating, 3, GeneratorId::Alt(vec![1, 2, 0])),
        (GroupKind::SignedAlternating, 3, GeneratorId::Alt(vec![1, 3, 1])),
    ];
    for (kind, n, id) in cases {
        let x = id.build::<Q>(n).unwrap();
        let inv = crate::oracle::invariant_space::<Q>(GroupSpec::new(kind, n).unwrap(), x.grade(), DEFAULT_TOL).unwrap();
        assert!(inv.contains(&x).unwrap(), "{id} for {kind} at n={n}");
    }
}

#[test]
fn det_times_det_star_is_a_mutation_combination() {
    for n in 2..=3 {
        let d = det::<Q>(n).unwrap();
        let dd = d.tensor_product(&d.star()).unwrap();
        let grade = Grade::new(n, n);
        let span = span_of(n, grade, &all_mutations_of(&tensor_power(&identity(n).unwrap(), n)));
        assert!(span.contains(&dd).unwrap(), "n = {n}");
    }
}

#[test]
fn spanning_set_examples() {
    let gl = &fft_catalogue(GroupSpec::new(GroupKind::GeneralLinear, 3).unwrap(), 2)[0];
    assert_eq!(fft_spanning_set(gl, 3, Grade::new(1, 1), SpanningCaps::default()).unwrap(), vec![identity(3).unwrap()]);
    assert!(fft_spanning_set(gl, 3, Grade::new(1, 0), SpanningCaps::default()).unwrap().is_empty());

    let o = &fft_catalogue(GroupSpec::new(GroupKind::Orthogonal, 3).unwrap(), 2)[0];
    assert!(fft_spanning_set(o, 3, Grade::new(2, 0), SpanningCaps::default()).unwrap().contains(&f(3).unwrap()));
    let o_flips = &fft_catalogue(GroupSpec::new(GroupKind::Orthogonal, 3).unwrap(), 2)[1];
    assert!(fft_spanning_set(o_flips, 3, Grade::new(2, 0), SpanningCaps::default()).unwrap().contains(&f(3).unwrap()));

    let sl = &fft_catalogue(GroupSpec::new(GroupKind::SpecialLinear, 2).unwrap(), 2)[0];
    assert!(fft_spanning_set(sl, 2, Grade::new(0, 2), SpanningCaps::default()).unwrap().contains(&det(2).unwrap()));

    let tight = SpanningCaps { max_tensors: 3 };
    let sym = &fft_catalogue(GroupSpec::new(GroupKind::Symmetric, 3).unwrap(), 4)[0];
    assert!(fft_spanning_set(sym, 3, Grade::new(4, 0), tight).is_err());
}

#[test]
fn fft_span_matches_explicit_enumeration() {
    for (kind, n, degree) in [
        (GroupKind::Symmetric, 2, 4),
        (GroupKind::SignedSymmetric, 2, 4),
        (GroupKind::Orthogonal, 2, 4),
        (GroupKind::SpecialLinear, 2, 4),
        (GroupKind::Monomial, 2, 4),
        (GroupKind::Alternating, 3, 3),
        (GroupKind::Symplectic, 2, 4),
    ] {
        let spec = GroupSpec::new(kind, n).unwrap();
        for entry in fft_catalogue(spec, degree) {
            for k in 0..=degree {
                let grade = Grade::new(k, degree - k);
                let list = fft_spanning_set(&entry, n, grade, SpanningCaps::default()).unwrap();
                let explicit = span_of(n, grade, &list);
                let fast = fft_span::<Q>(&entry, n, grade, DEFAULT_TOL).unwrap();
                assert!(explicit.equal_spaces(&fast).unwrap(), "{kind} {} at {grade}", entry.variant);
            }
        }
    }
}

#[test]
fn signed_symmetric_spanning_sets_agree() {
    for n in 1..=3 {
        let spec = GroupSpec::new(GroupKind::SignedSymmetric, n).unwrap();
        let cat = fft_catalogue(spec, 4);
        for k in 0..=4 {
            let grade = Grade::new(k, 4 - k);
            let a = fft_span::<Q>(&cat[0], n, grade, DEFAULT_TOL).unwrap();
            let b = fft_span::<Q>(&cat[1], n, grade, DEFAULT_TOL).unwrap();
            assert!(a.equal_spaces(&b).unwrap(), "n={n} grade {grade}");
        }
    }
}

#[test]
fn closure_seeds_respect_degree() {
    let spec = GroupSpec::new(GroupKind::Symmetric, 3).unwrap();
    assert_eq!(closure_seeds(spec, 2).unwrap().len(), 2);
    let sl3 = GroupSpec::new(GroupKind::SpecialLinear, 3).unwrap();
    assert!(closure_seeds(sl3, 2).unwrap().is_empty());
    assert_eq!(closure_seeds(sl3, 3).unwrap().len(), 2);
}

#[test]
fn all_flips_of_identity() {
    let flips = all_flips(&identity::<Q>(2).unwrap());
    assert_eq!(flips.len(), 4);
    assert!(flips.contains(&f(2).unwrap()));
    assert!(flips.contains(&f::<Q>(2).unwrap().star()));
}
