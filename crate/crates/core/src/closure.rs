//! Smallest contraction-closed graded *-subalgebra containing a seed set and `I`,
//! truncated to a box of grades.
//!
//! The closure is computed as a fixed point over the box `(K+h, L+h)`: each round takes
//! the vectors added in the previous round and feeds their star images, contractions,
//! mutations and tensor products with all known vectors back into the per-grade spans.
//! Only grades within the caps `(K, L)` are reported; the headroom `h` leaves room for
//! invariants that are reachable only by climbing above the caps and contracting down.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{identity, mutation_generators};
use crate::modp::{self, ModpSpan};
use crate::scalar::{Field, Mode, Scalar};
use crate::subspace::{BasisJson, SubspaceBasis};
use crate::tensor::{Grade, MixedTensor};

/// Parameters of a closure run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosureConfig {
    /// Largest reported grade `(K, L)`.
    pub caps: Grade,
    /// Extra grade allowance on each side during iteration.
    pub headroom: usize,
    /// Relative rank tolerance (float mode only).
    pub tol: f64,
    /// Safety limit on fixed-point rounds.
    pub max_rounds: usize,
}

impl ClosureConfig {
    pub fn new(caps: Grade, headroom: usize, tol: f64) -> Self {
        Self { caps, headroom, tol, max_rounds: 10_000 }
    }

    /// The iteration box `(K+h, L+h)`.
    pub fn bound(&self) -> Grade {
        Grade::new(self.caps.k + self.headroom, self.caps.l + self.headroom)
    }
}

/// Per-grade subspaces produced by a closure run.
#[derive(Clone, Debug)]
pub struct GradedBasisTable<F: Field> {
    n: usize,
    config: ClosureConfig,
    grades: BTreeMap<Grade, SubspaceBasis<F>>,
    converged: bool,
    iterations: usize,
}

impl<F: Field> GradedBasisTable<F> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn caps(&self) -> Grade {
        self.config.caps
    }

    pub fn headroom(&self) -> usize {
        self.config.headroom
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Subspace at a reported grade (within the caps).
    pub fn get(&self, grade: Grade) -> Option<&SubspaceBasis<F>> {
        if grade.fits_within(self.config.caps) {
            self.grades.get(&grade)
        } else {
            None
        }
    }

    /// Subspace at any stored grade. Headroom grades are stored in float mode only.
    pub fn get_unreported(&self, grade: Grade) -> Option<&SubspaceBasis<F>> {
        self.grades.get(&grade)
    }

    /// Reported grades and their subspaces, in grade order.
    pub fn reported(&self) -> impl Iterator<Item = (Grade, &SubspaceBasis<F>)> {
        let caps = self.config.caps;
        self.grades
            .iter()
            .filter(move |(g, _)| g.fits_within(caps))
            .map(|(g, b)| (*g, b))
    }

    pub fn dims(&self) -> BTreeMap<Grade, usize> {
        self.reported().map(|(g, b)| (g, b.dim())).collect()
    }

    /// Dimension of `W = Σ_y colspace(y)` over the grade-(1,1) part; `n` exactly when
    /// the grade-(1,1) part does not live inside `End(W)` for a proper subspace `W`.
    pub fn column_space_dim(&self) -> Result<usize> {
        let Some(b) = self.grades.get(&Grade::new(1, 1)) else {
            return Ok(0);
        };
        let n = self.n;
        let mut w = SubspaceBasis::<F>::empty(n, Grade::new(1, 0), self.config.tol)?;
        for y in b.basis() {
            let mut columns: Vec<Vec<(u64, F)>> = vec![Vec::new(); n];
            for (idx, v) in y.flat_entries() {
                let (i, j) = (idx / n as u64, (idx % n as u64) as usize);
                columns[j].push((i, v.clone()));
            }
            for col in columns {
                w.insert(&MixedTensor::from_flat(n, Grade::new(1, 0), col)?)?;
            }
        }
        Ok(w.dim())
    }

    /// Whether the star image of every stored basis vector lies in the stored subspace
    /// of the dual grade (for grades whose dual is also stored).
    pub fn is_star_stable(&self) -> Result<bool> {
        for (g, b) in &self.grades {
            let Some(dual) = self.grades.get(&g.dual()) else { continue };
            for x in b.basis() {
                if !dual.contains(&x.star())? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Whether every stored subspace is closed under permuting factors.
    pub fn is_mutation_stable(&self) -> Result<bool> {
        for (g, b) in &self.grades {
            let gens = mutation_generators(*g);
            for x in b.basis() {
                for (s, t) in &gens {
                    if !b.contains(&x.mutate(s, t)?)? {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Reported grades keyed by `"k,l"`.
    pub fn to_json(&self) -> BTreeMap<String, BasisJson> {
        self.reported().map(|(g, b)| (g.key(), b.to_json())).collect()
    }
}

/// A vector that grew its grade's span.
struct Accepted<F: Field> {
    id: usize,
    x: MixedTensor<F>,
    /// Produced by permuting the factors of another accepted vector.
    from_mutation: bool,
}

struct Engine<F: Field> {
    caps: Grade,
    bound: Grade,
    /// The top grade of the box when it lies outside the caps. Nothing there can be
    /// multiplied further, so products landing there are replaced by their contractions
    /// and the grade is never stored.
    corner: Option<Grade>,
    /// Every box grade in float mode; only the reported grades in exact mode.
    spans: BTreeMap<Grade, SubspaceBasis<F>>,
    /// Exact mode decides novelty modulo a prime and fills `spans` afterwards.
    shadow: Option<BTreeMap<Grade, ModpSpan>>,
    accepted: Vec<Accepted<F>>,
    /// How many accepted vectors have been inserted into `spans`.
    synced: usize,
    /// Indices of accepted vectors not obtained by mutation, by grade.
    factors: BTreeMap<Grade, Vec<usize>>,
}

fn residues<F: Field>(x: &MixedTensor<F>) -> Option<Vec<(usize, u64)>> {
    x.flat_entries()
        .map(|(i, v)| match v.to_scalar() {
            Scalar::Exact(q) => modp::residue(&q).map(|r| (i as usize, r)),
            Scalar::Float(_) => None,
        })
        .collect()
}

impl<F: Field> Engine<F> {
    fn in_box(&self, x: &MixedTensor<F>) -> bool {
        !x.is_zero() && x.grade().fits_within(self.bound) && Some(x.grade()) != self.corner
    }

    /// `x` itself, or every single contraction of `x` if it sits at the corner.
    fn expand(&self, x: MixedTensor<F>, from_mutation: bool) -> Result<Vec<(MixedTensor<F>, bool)>> {
        let g = x.grade();
        if Some(g) != self.corner {
            return Ok(vec![(x, from_mutation)]);
        }
        let mut out = Vec::with_capacity(g.k * g.l);
        for p in 1..=g.k {
            for q in 1..=g.l {
                out.push((x.contract(p, q)?, false));
            }
        }
        Ok(out)
    }

    /// Records `x` if it grows its grade's span; returns its index in `accepted`.
    fn offer(&mut self, x: MixedTensor<F>, from_mutation: bool) -> Result<Option<usize>> {
        if !self.in_box(&x) {
            return Ok(None);
        }
        let g = x.grade();
        let grew = match &mut self.shadow {
            None => self.spans.get_mut(&g).expect("box grade").insert(&x)?,
            // A vanishing denominator leaves the decision to the exact certification.
            Some(shadow) => match residues(&x) {
                Some(v) => shadow.get_mut(&g).expect("box grade").insert(&v),
                None => true,
            },
        };
        Ok(grew.then(|| self.record(x, from_mutation)))
    }

    fn record(&mut self, x: MixedTensor<F>, from_mutation: bool) -> usize {
        let idx = self.accepted.len();
        if !from_mutation {
            self.factors.entry(x.grade()).or_default().push(idx);
        }
        if self.shadow.is_none() {
            self.synced = idx + 1;
        }
        self.accepted.push(Accepted { id: idx, x, from_mutation });
        idx
    }

    /// Everything derived from one accepted vector in a round: its contraction, its
    /// mutations and, unless it is itself a mutation, its star and its products with
    /// earlier factors.
    /// Only candidates whose grade fits within `limit` are built.
    fn candidates(&self, idx: usize, limit: Grade) -> Result<Vec<(MixedTensor<F>, bool)>> {
        let Accepted { id, x, from_mutation } = &self.accepted[idx];
        let g = x.grade();
        let mut out = Vec::new();
        if g.k >= 1 && g.l >= 1 && Grade::new(g.k - 1, g.l - 1).fits_within(limit) {
            out.push((x.contract(1, 1)?, false));
        }
        if g.fits_within(limit) {
            for (s, t) in mutation_generators(g) {
                out.push((x.mutate(&s, &t)?, true));
            }
        }
        // Stars and products of a mutated vector are mutations of the star and
        // products of its source, which the span already covers.
        if *from_mutation {
            return Ok(out);
        }
        if g.dual().fits_within(limit) {
            out.push((x.star(), false));
        }
        let scalar = Grade::new(0, 0);
        if g == scalar {
            return Ok(out);
        }
        // One order only: the reversed product is a mutation of this one.
        for (h, ys) in &self.factors {
            let target = g + *h;
            let lands = if Some(target) == self.corner {
                Grade::new(target.k - 1, target.l - 1)
            } else {
                target
            };
            if *h == scalar || !lands.fits_within(limit) {
                continue;
            }
            for &j in ys.iter().take_while(|&&j| self.accepted[j].id <= *id) {
                out.extend(self.expand(x.tensor_product(&self.accepted[j].x)?, false)?);
            }
        }
        Ok(out)
    }

    /// Inserts accepted vectors at reported grades into the exact spans, sparsest first.
    fn sync_spans(&mut self) -> Result<()> {
        let caps = self.caps;
        let mut pending: Vec<usize> = (self.synced..self.accepted.len())
            .filter(|&i| self.accepted[i].x.grade().fits_within(caps))
            .collect();
        pending.sort_by_key(|&i| self.accepted[i].x.nnz());
        for i in pending {
            let x = &self.accepted[i].x;
            self.spans.get_mut(&x.grade()).expect("box grade").insert(x)?;
        }
        self.synced = self.accepted.len();
        Ok(())
    }

    /// Candidates at reported grades that fall outside the exact spans.
    fn certify(&self, initial: &[MixedTensor<F>]) -> Result<Vec<(MixedTensor<F>, bool)>> {
        let mut failures = Vec::new();
        let mut check = |x: MixedTensor<F>, m: bool| -> Result<()> {
            if !x.is_zero() && x.grade().fits_within(self.caps) && !self.spans[&x.grade()].contains(&x)? {
                failures.push((x, m));
            }
            Ok(())
        };
        for x in initial {
            for (y, m) in self.expand(x.clone(), false)? {
                check(y, m)?;
            }
        }
        for idx in 0..self.accepted.len() {
            for (x, m) in self.candidates(idx, self.caps)? {
                check(x, m)?;
            }
        }
        Ok(failures)
    }
}

/// Box-truncated closure of `seeds ∪ seeds* ∪ {I}` under linear combination, tensor
/// product and contraction. Seeds (or seed stars) whose grade exceeds the box are ignored.
///
/// In exact mode the fixed point is searched with rank decisions modulo a prime. The
/// reported grades are then rebuilt exactly from the accepted vectors and every step
/// landing in them is replayed against the exact spans; anything the replay finds
/// missing is fed back into the iteration. Headroom grades are not stored in exact
/// mode. Each reported vector is an exact element of the closure, so a rank
/// decision that goes wrong modulo the prime can only lower a reported dimension.
pub fn closure<F: Field>(n: usize, seeds: &[MixedTensor<F>], config: &ClosureConfig) -> Result<GradedBasisTable<F>> {
    if let Some(bad) = seeds.iter().find(|s| s.n() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: bad.n() });
    }
    let bound = config.bound();
    let exact = F::MODE == Mode::Exact;
    let mut engine = Engine {
        caps: config.caps,
        bound,
        corner: (bound != config.caps).then_some(bound),
        spans: BTreeMap::new(),
        shadow: exact.then(BTreeMap::new),
        accepted: Vec::new(),
        synced: 0,
        factors: BTreeMap::new(),
    };
    for k in 0..=bound.k {
        for l in 0..=bound.l {
            let g = Grade::new(k, l);
            if Some(g) == engine.corner {
                continue;
            }
            let span = SubspaceBasis::empty(n, g, config.tol)?;
            if let Some(shadow) = &mut engine.shadow {
                shadow.insert(g, ModpSpan::new(span.ambient()));
            }
            if !exact || g.fits_within(config.caps) {
                engine.spans.insert(g, span);
            }
        }
    }
    // Stars are offered up front so a seed outside the box still contributes its star.
    let mut initial = vec![identity::<F>(n)?];
    for s in seeds {
        initial.push(s.clone());
        initial.push(s.star());
    }
    let mut frontier = Vec::new();
    for x in &initial {
        for (y, m) in engine.expand(x.clone(), false)? {
            frontier.extend(engine.offer(y, m)?);
        }
    }
    let mut iterations = 0;
    let converged = loop {
        while !frontier.is_empty() && iterations < config.max_rounds {
            iterations += 1;
            let mut fresh = Vec::new();
            for idx in frontier {
                for (x, m) in engine.candidates(idx, bound)? {
                    fresh.extend(engine.offer(x, m)?);
                }
            }
            frontier = fresh;
        }
        if !frontier.is_empty() {
            break false;
        }
        if engine.shadow.is_none() {
            break true;
        }
        engine.sync_spans()?;
        let failures = engine.certify(&initial)?;
        if failures.is_empty() {
            break true;
        }
        for (x, m) in failures {
            if engine.spans.get_mut(&x.grade()).expect("reported grade").insert(&x)? {
                if let (Some(shadow), Some(v)) = (&mut engine.shadow, residues(&x)) {
                    shadow.get_mut(&x.grade()).expect("box grade").insert(&v);
                }
                frontier.push(engine.record(x, m));
            }
        }
        engine.synced = engine.accepted.len();
    };
    Ok(GradedBasisTable {
        n,
        config: *config,
        grades: engine.spans,
        converged,
        iterations,
    })
}

/// Whether closures with headroom `h` and `h + 1` agree on every reported grade.
pub fn headroom_stability<F: Field>(n: usize, seeds: &[MixedTensor<F>], config: &ClosureConfig) -> Result<bool> {
    let a = closure(n, seeds, config)?;
    let b = closure(n, seeds, &ClosureConfig { headroom: config.headroom + 1, ..*config })?;
    tables_agree(&a, &b)
}

/// Whether two tables agree on every grade reported by both.
pub fn tables_agree<F: Field>(a: &GradedBasisTable<F>, b: &GradedBasisTable<F>) -> Result<bool> {
    if !(a.converged && b.converged) {
        return Ok(false);
    }
    for (g, x) in a.reported() {
        if let Some(y) = b.get(g) {
            if !x.equal_spaces(y)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
