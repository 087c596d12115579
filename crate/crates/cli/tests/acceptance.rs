//! Acceptance suite: one check per criterion, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines show up in `cargo test` output.
//! The process exits nonzero when any criterion fails.

use std::collections::{BTreeSet, HashMap};
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mixtens_core::closure::headroom_stability;
use mixtens_core::generators::{self, fft_span, FftCatalogEntry, GeneratorId};
use mixtens_core::oracle::{finite_elements, haar_sample, invariant_space, reynolds_average, CompactForm};
use mixtens_core::tensor::random;
use mixtens_core::verify::{Check, Status};
use mixtens_core::{
    closure, span_basis, CampaignConfig, ClosureConfig, Field, GaussianRational as Q, Grade, GroupElement,
    GroupKind, GroupSpec, Matrix, MixedTensor, MultiIndex, Permutation, Report, SubspaceBasis, DEFAULT_TOL,
};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

const CAMPAIGN_BUDGET: Duration = Duration::from_secs(300);
const RESIDUAL_BOUND: f64 = 1e-9;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn spec(kind: GroupKind, n: usize) -> GroupSpec {
    GroupSpec::new(kind, n).expect("catalogue group")
}

fn grades_up_to(degree: usize) -> Vec<Grade> {
    (0..=degree).flat_map(|d| (0..=d).map(move |k| Grade::new(k, d - k))).collect()
}

fn exact_span(n: usize, grade: Grade, xs: &[MixedTensor<Q>]) -> Result<SubspaceBasis<Q>, String> {
    span_basis(n, grade, xs, DEFAULT_TOL).map_err(err)
}

fn fft_criterion(report: &Report, elapsed: Duration) -> Outcome {
    let config = &report.config;
    let mut expected = 0;
    for kind in &config.groups {
        for n in config.ns_for(*kind) {
            for g in grades_up_to(config.degree_for(*kind)) {
                expected += 1;
                let rec = report
                    .records
                    .iter()
                    .find(|r| r.check == Check::Fft && r.group == *kind && r.n == n && r.k == g.k && r.l == g.l)
                    .ok_or_else(|| format!("no record for {kind} n={n} {g}"))?;
                ensure(
                    rec.status == Status::Pass && rec.fft_equal == Some(true) && rec.closure_equal == Some(true),
                    || {
                        format!(
                            "{kind} n={n} {g}: oracle {:?} fft {:?} closure {:?} {}",
                            rec.dim_oracle,
                            rec.dim_fft,
                            rec.dim_closure,
                            rec.note.as_deref().unwrap_or("")
                        )
                    },
                )?;
            }
        }
    }
    ensure(elapsed < CAMPAIGN_BUDGET, || format!("campaign took {:.1} s", elapsed.as_secs_f64()))?;
    Ok(format!("{expected} records equal, campaign {:.1} s", elapsed.as_secs_f64()))
}

/// Largest coordinate difference relative to the size of `b`, computed from the raw
/// entries so rounding noise is not pruned away first.
fn residual(a: &MixedTensor<Complex64>, b: &MixedTensor<Complex64>) -> f64 {
    let mut diff: HashMap<u64, Complex64> = a.flat_entries().map(|(i, v)| (i, *v)).collect();
    for (i, v) in b.flat_entries() {
        *diff.entry(i).or_default() -= v;
    }
    diff.values().map(|v| v.norm()).fold(0.0, f64::max) / b.norm().max(1.0)
}

fn random_grade(rng: &mut ChaCha8Rng, min_k: usize, min_l: usize) -> Grade {
    loop {
        let (k, l) = (rng.gen_range(min_k..=4), rng.gen_range(min_l..=4));
        if k + l <= 4 {
            return Grade::new(k, l);
        }
    }
}

fn random_float(rng: &mut ChaCha8Rng, n: usize, min_k: usize, min_l: usize) -> MixedTensor<Complex64> {
    let grade = random_grade(rng, min_k, min_l);
    random::float_tensor(rng, n, grade, 0.7)
}

fn random_perm(rng: &mut ChaCha8Rng, len: usize) -> Permutation {
    let all = Permutation::all(len);
    all[rng.gen_range(0..all.len())].clone()
}

fn operator_criterion() -> Outcome {
    const TRIALS: usize = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = [0.0f64; 4];
    for _ in 0..TRIALS {
        let n = rng.gen_range(1..=3);

        let x = random_float(&mut rng, n, 0, 0);
        worst[0] = worst[0].max(residual(&x.star().star(), &x));

        let x = random_float(&mut rng, n, 0, 0);
        let u = GroupElement::new(haar_sample(CompactForm::Unitary, n, &mut rng)).map_err(err)?;
        let lhs = x.star().apply(&u).map_err(err)?;
        let rhs = x.apply(&u).map_err(err)?.star();
        worst[1] = worst[1].max(residual(&lhs, &rhs));

        let x = random_float(&mut rng, n, 1, 1);
        let g = GroupElement::new(random::gaussian_matrix(&mut rng, n)).map_err(err)?;
        let (p, q) = (rng.gen_range(1..=x.grade().k), rng.gen_range(1..=x.grade().l));
        let lhs = x.apply(&g).map_err(err)?.contract(p, q).map_err(err)?;
        let rhs = x.contract(p, q).map_err(err)?.apply(&g).map_err(err)?;
        worst[2] = worst[2].max(residual(&lhs, &rhs));

        let x = random_float(&mut rng, n, 0, 0);
        let g = GroupElement::new(random::gaussian_matrix(&mut rng, n)).map_err(err)?;
        let (s, t) = (random_perm(&mut rng, x.grade().k), random_perm(&mut rng, x.grade().l));
        let lhs = x.apply(&g).map_err(err)?.mutate(&s, &t).map_err(err)?;
        let rhs = x.mutate(&s, &t).map_err(err)?.apply(&g).map_err(err)?;
        worst[3] = worst[3].max(residual(&lhs, &rhs));
    }
    let names = ["star involution", "unitary-star", "contraction", "mutation"];
    for (name, w) in names.iter().zip(worst) {
        ensure(w < RESIDUAL_BOUND, || format!("{name} residual {w:e}"))?;
    }
    Ok(format!("{TRIALS} trials each, worst residual {:.1e}", worst.iter().cloned().fold(0.0, f64::max)))
}

fn small_gaussian_integer(rng: &mut ChaCha8Rng) -> Q {
    Q::integer(rng.gen_range(-3..=3), rng.gen_range(-3..=3))
}

fn random_exact_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix<Q> {
    Matrix::from_rows((0..rows).map(|_| (0..cols).map(|_| small_gaussian_integer(rng)).collect()).collect())
        .expect("rectangular")
}

/// Random `n × n` matrix of rank at most `r`, with `r` drawn from `1..=max_rank`.
fn low_rank(rng: &mut ChaCha8Rng, n: usize, max_rank: usize) -> Matrix<Q> {
    let r = rng.gen_range(1..=max_rank);
    random_exact_matrix(rng, n, r).mul(&random_exact_matrix(rng, r, n))
}

fn columns(m: &Matrix<Q>) -> Vec<MixedTensor<Q>> {
    (0..m.cols())
        .map(|c| {
            let entries = (0..m.rows()).map(|r| (MultiIndex::new(vec![r + 1], vec![]), m.get(r, c).clone()));
            MixedTensor::from_entries(m.rows(), Grade::new(1, 0), entries).expect("valid indices")
        })
        .collect()
}

fn as_tensor(m: &Matrix<Q>) -> MixedTensor<Q> {
    let n = m.rows();
    let entries =
        (0..n).flat_map(|r| (0..n).map(move |c| (MultiIndex::new(vec![r + 1], vec![c + 1]), m.get(r, c).clone())));
    MixedTensor::from_entries(n, Grade::new(1, 1), entries).expect("valid indices")
}

fn matrix_criterion() -> Outcome {
    const TRIALS: usize = 50;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let vectors = Grade::new(1, 0);
    for n in 2..=4 {
        for trial in 0..TRIALS {
            let y = low_rank(&mut rng, n, n);
            let yy = y.mul(&y.conj_transpose());
            let yt = as_tensor(&y);
            ensure(yt.mat_mul(&yt.star()).map_err(err)? == as_tensor(&yy), || {
                format!("n={n} trial {trial}: mat_mul(y, y*) disagrees with the matrix product")
            })?;
            let cy = exact_span(n, vectors, &columns(&y))?;
            let cyy = exact_span(n, vectors, &columns(&yy))?;
            ensure(cy.dim() == cyy.dim() && cy.equal_spaces(&cyy).map_err(err)?, || {
                format!("n={n} trial {trial}: rank(y) = {} but rank(yy*) = {}", cy.dim(), cyy.dim())
            })?;

            let ys: Vec<Matrix<Q>> =
                (0..rng.gen_range(2..=3)).map(|_| low_rank(&mut rng, n, n - 1)).collect();
            let all_columns: Vec<MixedTensor<Q>> = ys.iter().flat_map(columns).collect();
            let sum = ys
                .iter()
                .fold(Matrix::zeros(n, n), |acc, y| acc.add(&y.mul(&y.conj_transpose())));
            let joint = exact_span(n, vectors, &all_columns)?;
            let of_sum = exact_span(n, vectors, &columns(&sum))?;
            ensure(joint.equal_spaces(&of_sum).map_err(err)?, || {
                format!("n={n} trial {trial}: sum of column spaces {} vs {}", joint.dim(), of_sum.dim())
            })?;

            let z = loop {
                let z = random_exact_matrix(&mut rng, n, n);
                if z.determinant() != Q::zero() {
                    break z;
                }
            };
            let zz = z.mul(&z.conj_transpose());
            let mut powers = vec![zz.clone()];
            while powers.len() < n {
                powers.push(powers.last().expect("nonempty").mul(&zz));
            }
            let span = exact_span(n, Grade::new(1, 1), &powers.iter().map(as_tensor).collect::<Vec<_>>())?;
            ensure(span.contains(&as_tensor(&Matrix::identity(n))).map_err(err)?, || {
                format!("n={n} trial {trial}: I is not a combination of powers of zz*")
            })?;
        }
    }
    Ok(format!("{TRIALS} trials at each n in 2..=4"))
}

fn single_contractions(x: &MixedTensor<Q>) -> Result<Vec<MixedTensor<Q>>, String> {
    let g = x.grade();
    let mut out = Vec::new();
    for p in 1..=g.k {
        for q in 1..=g.l {
            out.push(x.contract(p, q).map_err(err)?);
        }
    }
    Ok(out)
}

fn all_mutations(x: &MixedTensor<Q>) -> Result<Vec<MixedTensor<Q>>, String> {
    let g = x.grade();
    let mut out = Vec::new();
    for s in Permutation::all(g.k) {
        for t in Permutation::all(g.l) {
            out.push(x.mutate(&s, &t).map_err(err)?);
        }
    }
    Ok(out)
}

fn power(x: &MixedTensor<Q>, k: usize) -> Result<MixedTensor<Q>, String> {
    let mut out = MixedTensor::scalar(x.n(), Q::one()).map_err(err)?;
    for _ in 0..k {
        out = out.tensor_product(x).map_err(err)?;
    }
    Ok(out)
}

/// Sum over index maps constant on the cycles of `pi`.
fn cycle_constant_sum(n: usize, pi: &Permutation) -> Result<MixedTensor<Q>, String> {
    let k = pi.len();
    let cycles = pi.cycles();
    let mut out = MixedTensor::<Q>::zero(n, Grade::new(k, 0)).map_err(err)?;
    let mut labels = vec![0usize; cycles.len()];
    loop {
        let mut idx = vec![0usize; k];
        for (c, cycle) in cycles.iter().enumerate() {
            for &slot in cycle {
                idx[slot] = labels[c] + 1;
            }
        }
        out = out.add(&MixedTensor::basis(n, &idx, &[]).map_err(err)?).map_err(err)?;
        let mut pos = 0;
        while pos < labels.len() && labels[pos] + 1 == n {
            labels[pos] = 0;
            pos += 1;
        }
        if pos == labels.len() {
            return Ok(out);
        }
        labels[pos] += 1;
    }
}

fn identities_criterion() -> Outcome {
    for n in 1..=4 {
        let f = generators::f::<Q>(n).map_err(err)?;
        let id = generators::identity::<Q>(n).map_err(err)?;
        for c in single_contractions(&f.tensor_product(&f.star()).map_err(err)?)? {
            ensure(c == id, || format!("contraction of f⊗f* at n={n} is not I"))?;
        }
    }
    for n in [2, 4] {
        let s = generators::s::<Q>(n).map_err(err)?;
        let id = generators::identity::<Q>(n).map_err(err)?;
        for c in single_contractions(&s.tensor_product(&s.star()).map_err(err)?)? {
            ensure(c == id || c == id.scale(&Q::from_i64(-1)), || format!("contraction of s⊗s* at n={n} is not ±I"))?;
        }
    }
    for n in [2, 3] {
        let d = generators::det::<Q>(n).map_err(err)?;
        let dd = d.tensor_product(&d.star()).map_err(err)?;
        let identity_power = power(&generators::identity::<Q>(n).map_err(err)?, n)?;
        let span = exact_span(n, Grade::new(n, n), &all_mutations(&identity_power)?)?;
        ensure(span.contains(&dd).map_err(err)?, || format!("det⊗det* at n={n} outside the mutations of I^⊗n"))?;
    }
    for n in 1..=4 {
        for k in 1..=4 {
            let mut total = MixedTensor::<Q>::zero(n, Grade::new(k, 0)).map_err(err)?;
            for pi in Permutation::all(k) {
                let inner = cycle_constant_sum(n, &pi)?;
                let mut product = MixedTensor::scalar(n, Q::one()).map_err(err)?;
                for c in pi.cycles() {
                    product = product.tensor_product(&generators::h::<Q>(n, c.len()).map_err(err)?).map_err(err)?;
                }
                ensure(all_mutations(&product)?.contains(&inner), || {
                    format!("n={n} k={k}: cycle sum of {pi:?} is not a mutation of an h product")
                })?;
                total = total.add(&inner.scale(&Q::from_i64(pi.sign()))).map_err(err)?;
            }
            ensure(total == generators::g::<Q>(n, k).map_err(err)?, || format!("g_{k} expansion fails at n={n}"))?;

            let entry = FftCatalogEntry {
                group: GroupKind::Symmetric,
                variant: "g",
                generators: (0..=k).map(GeneratorId::G).collect(),
                flips: false,
                mutations: true,
            };
            let span = fft_span::<Q>(&entry, n, Grade::new(k, 0), DEFAULT_TOL).map_err(err)?;
            ensure(span.contains(&generators::h::<Q>(n, k).map_err(err)?).map_err(err)?, || {
                format!("h_{k} outside the g products at n={n}")
            })?;
        }
    }
    Ok("f, s, det and g/h identities hold exactly".into())
}

/// Every tensor reachable from `x` by `steps` successive single contractions.
fn contractions_down(x: &MixedTensor<Q>, steps: usize) -> Result<Vec<MixedTensor<Q>>, String> {
    let mut level = vec![x.clone()];
    for _ in 0..steps {
        let mut next = Vec::new();
        for t in &level {
            next.extend(single_contractions(t)?);
        }
        level = next;
    }
    Ok(level)
}

fn mutation_criterion() -> Outcome {
    const TRIALS: usize = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (n, grade) = (2, Grade::new(2, 1));
    let id = generators::identity::<Q>(n).map_err(err)?;
    for trial in 0..TRIALS {
        let x = random::exact_tensor(&mut rng, n, grade, 0.8);
        let mut reachable = Vec::new();
        for k in 0..=2 {
            let padded = x.tensor_product(&power(&id, k)?).map_err(err)?;
            reachable.extend(contractions_down(&padded, k)?);
        }
        for m in all_mutations(&x)? {
            ensure(reachable.contains(&m), || format!("trial {trial}: a mutation is not a contraction of x⊗I^⊗k"))?;
        }
    }
    Ok(format!("{TRIALS} random tensors, every mutation reproduced"))
}

fn closure_criterion() -> Outcome {
    let n = 2;
    let config = ClosureConfig::new(Grade::new(2, 2), 2, DEFAULT_TOL);
    let j2 = generators::j::<Q>(n, 2).map_err(err)?;
    let f = generators::f::<Q>(n).map_err(err)?;
    let det = generators::det::<Q>(n).map_err(err)?;
    let cases = [
        ("j2", GroupKind::Monomial, vec![j2]),
        ("f, f*", GroupKind::Orthogonal, vec![f.clone(), f.star()]),
        ("det, det*", GroupKind::SpecialLinear, vec![det.clone(), det.star()]),
    ];
    for (name, kind, seeds) in cases {
        let table = closure::<Q>(n, &seeds, &config).map_err(err)?;
        ensure(table.converged(), || format!("closure of {name} did not converge"))?;
        let mut checked = BTreeSet::new();
        for (g, basis) in table.reported() {
            let oracle = invariant_space::<Q>(spec(kind, n), g, DEFAULT_TOL).map_err(err)?;
            ensure(basis.equal_spaces(&oracle).map_err(err)?, || {
                format!("closure of {name} at {g}: {} vs {kind} oracle {}", basis.dim(), oracle.dim())
            })?;
            checked.insert(g);
        }
        ensure(checked.len() == 9, || format!("closure of {name} reported {} grades", checked.len()))?;
        ensure(headroom_stability::<Q>(n, &seeds, &config).map_err(err)?, || {
            format!("closure of {name} is not stable at headroom 2")
        })?;
    }
    Ok("monomial, orthogonal and special linear closures match at every grade up to (2,2)".into())
}

fn galois_records(report: &Report, kind: GroupKind, ns: &[usize]) -> Result<usize, String> {
    let mut count = 0;
    for &n in ns {
        for g in grades_up_to(4) {
            let rec = report
                .records
                .iter()
                .find(|r| r.check == Check::Galois && r.group == kind && r.n == n && r.k == g.k && r.l == g.l)
                .ok_or_else(|| format!("no Monte Carlo record for {kind} n={n} {g}"))?;
            ensure(rec.status == Status::Pass && rec.dim_monte_carlo.is_some() && rec.dim_monte_carlo == rec.dim_oracle, || {
                format!(
                    "{kind} n={n} {g}: oracle {:?} monte carlo {:?} {}",
                    rec.dim_oracle,
                    rec.dim_monte_carlo,
                    rec.note.as_deref().unwrap_or("")
                )
            })?;
            count += 1;
        }
    }
    Ok(count)
}

fn galois_criterion(report: &Report) -> Outcome {
    ensure(report.config.samples >= 2000, || format!("only {} samples", report.config.samples))?;
    let count = galois_records(report, GroupKind::Orthogonal, &[2, 3])?
        + galois_records(report, GroupKind::SpecialLinear, &[2, 3])?;
    Ok(format!("{count} records, {} samples per batch", report.config.samples))
}

fn cross_validation_criterion(report: &Report) -> Outcome {
    let groups = [
        (GroupKind::Symmetric, 2),
        (GroupKind::Symmetric, 3),
        (GroupKind::Alternating, 3),
        (GroupKind::SignedSymmetric, 2),
    ];
    let mut grades = 0;
    for (kind, n) in groups {
        let s = spec(kind, n);
        let elements = finite_elements(s).map_err(err)?;
        for g in grades_up_to(4) {
            let averaged = reynolds_average::<Q>(&elements, n, g, DEFAULT_TOL).map_err(err)?;
            let kernel = invariant_space::<Q>(s, g, DEFAULT_TOL).map_err(err)?;
            ensure(averaged.equal_spaces(&kernel).map_err(err)?, || {
                format!("{kind} n={n} {g}: Reynolds {} vs kernel {}", averaged.dim(), kernel.dim())
            })?;
            grades += 1;
        }
    }
    let unitary = galois_records(report, GroupKind::Unitary, &[1, 2, 3])?;
    Ok(format!("{grades} Reynolds comparisons, {unitary} unitary Monte Carlo comparisons"))
}

fn mixtens(args: &[&str]) -> Result<std::process::Output, String> {
    Command::new(env!("CARGO_BIN_EXE_mixtens")).args(args).output().map_err(err)
}

fn reproducibility_criterion() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    let mut reports = Vec::new();
    for run in 0..2 {
        let json = dir.path().join(format!("run{run}.json"));
        let csv = dir.path().join(format!("run{run}.csv"));
        let out = mixtens(&[
            "campaign",
            "--group",
            "o,sym,signed-alt",
            "--n",
            "2,3",
            "--max-degree",
            "3",
            "--samples",
            "200",
            "--seed",
            "17",
            "--out",
            json.to_str().expect("utf-8 path"),
            "--csv",
            csv.to_str().expect("utf-8 path"),
        ])?;
        ensure(out.status.code() == Some(0), || format!("passing campaign exited with {:?}", out.status))?;
        reports.push((std::fs::read(&json).map_err(err)?, std::fs::read(&csv).map_err(err)?));
    }
    ensure(reports[0] == reports[1], || "reports differ between identical runs".into())?;

    let failing = mixtens(&[
        "campaign",
        "--group",
        "signed",
        "--n",
        "2",
        "--max-degree",
        "4",
        "--headroom",
        "0",
        "--stability-budget",
        "0",
        "--samples",
        "0",
    ])?;
    ensure(failing.status.code() == Some(1), || format!("failing campaign exited with {:?}", failing.status))?;
    let invalid = mixtens(&["campaign", "--samples", "10"])?;
    ensure(invalid.status.code() == Some(2), || format!("invalid campaign exited with {:?}", invalid.status))?;
    Ok("byte-identical JSON and CSV, exit codes 0/1/2".into())
}

fn main() {
    let started = Instant::now();
    let report = mixtens_core::run_campaign(&CampaignConfig::default());
    let elapsed = started.elapsed();
    let campaign = |f: &dyn Fn(&Report) -> Outcome| match &report {
        Ok(r) => f(r),
        Err(e) => Err(format!("campaign failed: {e}")),
    };

    let criteria: Vec<Criterion> = vec![
        ("FFT span equalities", Box::new(|| campaign(&|r| fft_criterion(r, elapsed)))),
        ("operator calculus invariants", Box::new(operator_criterion)),
        ("matrix facts", Box::new(matrix_criterion)),
        ("generator identities", Box::new(identities_criterion)),
        ("mutation via contraction", Box::new(mutation_criterion)),
        ("closure completeness", Box::new(closure_criterion)),
        ("Monte Carlo for compact forms", Box::new(|| campaign(&galois_criterion))),
        ("oracle cross-validation", Box::new(|| campaign(&cross_validation_criterion))),
        ("reproducibility and exit status", Box::new(reproducibility_criterion)),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail})", i + 1),
            Err(reason) => {
                failures += 1;
                println!("FAIL criterion {}: {name} ({reason})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
