//! Verification campaigns: for every catalogue group, dimension and grade, compare the
//! invariant-space oracle against the explicit spanning sets and the contraction
//! closure, and compare algebraic oracles against Monte Carlo estimates on compact forms.
//!
//! A campaign is a pure function of its [`CampaignConfig`]; records are computed in
//! parallel and reassembled in a fixed order, so reports are byte-identical across runs
//! unless wall-clock timings are requested.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closure::{closure, tables_agree, ClosureConfig};
use crate::error::{Error, Result};
use crate::generators::{closure_seeds, fft_catalogue, fft_span};
use crate::oracle::{invariant_space, monte_carlo_invariant_space, CompactForm, GroupKind, GroupSpec};
use crate::scalar::{Field, GaussianRational, Mode};
use crate::subspace::{SubspaceBasis, DEFAULT_TOL};
use crate::tensor::Grade;

/// Fewest Haar samples per batch accepted when Monte Carlo checks are enabled.
pub const MIN_SAMPLES: usize = 100;

/// Monte Carlo checks stop at this total degree regardless of the campaign degree.
pub const GALOIS_MAX_DEGREE: usize = 4;

/// Arithmetic used for a campaign.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeChoice {
    /// Exact for permutation-family groups, floating point for the rest.
    #[default]
    Auto,
    Exact,
    Float,
}

impl ModeChoice {
    pub fn resolve(self, kind: GroupKind) -> Mode {
        match self {
            ModeChoice::Auto if kind.is_permutation_family() => Mode::Exact,
            ModeChoice::Auto | ModeChoice::Float => Mode::Float,
            ModeChoice::Exact => Mode::Exact,
        }
    }
}

impl std::str::FromStr for ModeChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(ModeChoice::Auto),
            "exact" => Ok(ModeChoice::Exact),
            "float" => Ok(ModeChoice::Float),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub groups: Vec<GroupKind>,
    /// Dimensions to test; `None` means `{1, 2, 3}`, and `{2, 4}` for `sp`.
    pub ns: Option<Vec<usize>>,
    /// Largest total degree `k + l`; `None` means 6 for permutation-family groups in
    /// exact mode and 4 otherwise.
    pub max_degree: Option<usize>,
    /// Starting closure headroom.
    pub headroom: usize,
    pub mode: ModeChoice,
    pub tol: f64,
    /// Haar samples per Monte Carlo batch; 0 skips the Monte Carlo records.
    pub samples: usize,
    pub seed: u64,
    /// Record wall-clock milliseconds per record (makes reports non-reproducible).
    pub timings: bool,
    /// A closure at headroom `h` is rerun at `h + 1` when the rerun's largest stored
    /// grade has at most this many coordinates; if the two disagree the headroom is
    /// raised and the check repeated.
    pub stability_budget: u64,
    /// Directory receiving the bases of failing records.
    pub dump_on_fail: Option<PathBuf>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            groups: GroupKind::all(),
            ns: None,
            max_degree: None,
            headroom: 1,
            mode: ModeChoice::Auto,
            tol: DEFAULT_TOL,
            samples: 2000,
            seed: 0,
            timings: false,
            stability_budget: 2187,
            dump_on_fail: None,
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.groups.is_empty() {
            return bad("no groups selected".into());
        }
        if self.max_degree == Some(0) {
            return bad("max degree must be at least 1".into());
        }
        if self.samples != 0 && self.samples < MIN_SAMPLES {
            return bad(format!(
                "monte carlo needs at least {MIN_SAMPLES} samples (or 0 to skip), got {}",
                self.samples
            ));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return bad(format!("tolerance must be positive, got {}", self.tol));
        }
        if let Some(ns) = &self.ns {
            if ns.is_empty() || ns.contains(&0) {
                return bad("dimensions must be a nonempty list of positive integers".into());
            }
        }
        for &kind in &self.groups {
            if let GroupKind::SpecialLinearK(k) = kind {
                if self.mode.resolve(kind) == Mode::Exact && ![1, 2, 4].contains(&k) {
                    return Err(Error::UnsupportedMode(format!("SL_{k} root of unity"), Mode::Exact));
                }
            }
        }
        Ok(())
    }

    /// Dimensions tested for `kind`.
    pub fn ns_for(&self, kind: GroupKind) -> Vec<usize> {
        let mut ns = match &self.ns {
            Some(ns) => ns.clone(),
            None if kind.requires_even_n() => vec![2, 4],
            None => vec![1, 2, 3],
        };
        if kind.requires_even_n() {
            ns.retain(|n| n % 2 == 0);
        }
        ns.sort_unstable();
        ns.dedup();
        ns
    }

    pub fn degree_for(&self, kind: GroupKind) -> usize {
        self.max_degree.unwrap_or(match self.mode.resolve(kind) {
            Mode::Exact if kind.is_permutation_family() => 6,
            _ => 4,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    /// Oracle against spanning sets and closure.
    Fft,
    /// Algebraic oracle against Monte Carlo on the compact form `G ∩ U(n)`.
    Galois,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    Error,
}

/// An alternative spanning set of the same group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alternative {
    pub variant: String,
    pub dim: usize,
    pub equal: bool,
    /// Whether a mismatch fails the record; informational variants only report.
    pub counted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub check: Check,
    pub group: GroupKind,
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub mode: Mode,
    pub dim_oracle: Option<usize>,
    pub dim_fft: Option<usize>,
    pub dim_closure: Option<usize>,
    pub dim_monte_carlo: Option<usize>,
    pub fft_equal: Option<bool>,
    pub closure_equal: Option<bool>,
    pub monte_carlo_equal: Option<bool>,
    pub alternatives: Vec<Alternative>,
    /// Largest containment residual seen (float mode only).
    pub residual: Option<f64>,
    /// Headroom of the reported closure.
    pub headroom: usize,
    /// Whether a rerun at `headroom + 1` agreed; `None` when it was over budget.
    pub headroom_stable: Option<bool>,
    pub status: Status,
    pub note: Option<String>,
    pub elapsed_ms: Option<u64>,
}

impl VerificationRecord {
    fn new(check: Check, spec: GroupSpec, grade: Grade, mode: Mode) -> Self {
        Self {
            check,
            group: spec.kind,
            n: spec.n,
            k: grade.k,
            l: grade.l,
            mode,
            dim_oracle: None,
            dim_fft: None,
            dim_closure: None,
            dim_monte_carlo: None,
            fft_equal: None,
            closure_equal: None,
            monte_carlo_equal: None,
            alternatives: Vec::new(),
            residual: None,
            headroom: 0,
            headroom_stable: None,
            status: Status::Error,
            note: None,
            elapsed_ms: None,
        }
    }

    pub fn grade(&self) -> Grade {
        Grade::new(self.k, self.l)
    }

    pub fn passed(&self) -> bool {
        matches!(self.status, Status::Pass | Status::Skipped)
    }

    fn finish(&mut self) {
        let ok = match self.check {
            Check::Fft => {
                self.fft_equal == Some(true)
                    && self.closure_equal == Some(true)
                    && self.alternatives.iter().all(|a| a.equal || !a.counted)
                    && self.headroom_stable != Some(false)
            }
            Check::Galois => self.monte_carlo_equal == Some(true),
        };
        self.status = if ok { Status::Pass } else { Status::Fail };
    }
}

fn worst(a: Option<f64>, b: f64) -> Option<f64> {
    Some(a.map_or(b, |a| a.max(b)))
}

/// Dimensions match and each space contains the other; returns the worst residual.
fn compare<F: Field>(a: &SubspaceBasis<F>, b: &SubspaceBasis<F>) -> Result<(bool, f64)> {
    let (ab, r1) = a.contained_in(b)?;
    let (ba, r2) = b.contained_in(a)?;
    Ok((a.dim() == b.dim() && ab && ba, r1.max(r2)))
}

fn dump<F: Field>(dir: &Path, rec: &VerificationRecord, name: &str, basis: &SubspaceBasis<F>) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let group = rec.group.to_string().replace(':', "-");
    let file = dir.join(format!(
        "{:?}-{group}-n{}-{}-{}-{name}.json",
        rec.check, rec.n, rec.k, rec.l
    ).to_ascii_lowercase());
    std::fs::write(file, serde_json::to_string_pretty(&basis.to_json())?)?;
    Ok(())
}

/// Coordinates of the largest grade stored by a closure with caps `grade` and headroom
/// `h`; the top corner of the box is never stored.
fn closure_footprint(n: usize, grade: Grade, h: usize) -> u64 {
    let top = grade.degree() + 2 * h;
    let largest = if h == 0 { top } else { top - 1 };
    (n as u64).saturating_pow(largest as u32)
}

fn verify_fft_in<F: Field>(spec: GroupSpec, grade: Grade, config: &CampaignConfig) -> Result<VerificationRecord> {
    let n = spec.n;
    let tol = config.tol;
    let mut rec = VerificationRecord::new(Check::Fft, spec, grade, F::MODE);
    let float = F::MODE == Mode::Float;

    let oracle = invariant_space::<F>(spec, grade, tol)?;
    rec.dim_oracle = Some(oracle.dim());

    let entries = fft_catalogue(spec, grade.degree());
    let main = fft_span::<F>(&entries[0], n, grade, tol)?;
    let (fft_equal, r) = compare(&main, &oracle)?;
    rec.dim_fft = Some(main.dim());
    rec.fft_equal = Some(fft_equal);
    if float {
        rec.residual = worst(rec.residual, r);
    }
    for entry in &entries[1..] {
        let span = fft_span::<F>(entry, n, grade, tol)?;
        let (equal, r) = compare(&span, &oracle)?;
        if float {
            rec.residual = worst(rec.residual, r);
        }
        rec.alternatives.push(Alternative {
            variant: entry.variant.to_string(),
            dim: span.dim(),
            equal,
            // The unmutated reading of the symplectic statement is known to fall short.
            counted: entry.variant != "literal",
        });
    }

    let run = |h: usize| {
        let seeds: Vec<_> = closure_seeds(spec, grade.degree() + 2 * h)?
            .iter()
            .map(|s| s.map_field(F::from_exact))
            .collect();
        closure::<F>(n, &seeds, &ClosureConfig::new(grade, h, tol))
    };
    // Raise the headroom while a rerun one step higher disagrees and fits the budget.
    let mut h = config.headroom;
    let mut table = run(h)?;
    while closure_footprint(n, grade, h + 1) <= config.stability_budget {
        let wider = run(h + 1)?;
        if tables_agree(&table, &wider)? {
            rec.headroom_stable = Some(true);
            break;
        }
        table = wider;
        h += 1;
    }
    rec.headroom = h;
    if h > config.headroom && rec.headroom_stable.is_none() {
        rec.note = Some(format!("headroom raised to {h}; stability at {h} not checked"));
    }
    let got = table.get(grade).expect("caps grade is reported");
    let (closure_equal, r) = compare(got, &oracle)?;
    rec.dim_closure = Some(got.dim());
    rec.closure_equal = Some(closure_equal && table.converged());
    if !table.converged() {
        rec.note = Some("closure did not converge".into());
    }
    if float {
        rec.residual = worst(rec.residual, r);
    }

    rec.finish();
    if rec.status == Status::Fail {
        if let Some(dir) = &config.dump_on_fail {
            dump(dir, &rec, "oracle", &oracle)?;
            dump(dir, &rec, "fft", &main)?;
            dump(dir, &rec, "closure", got)?;
        }
    }
    Ok(rec)
}

/// Oracle, primary spanning set and closure at one grade, in the mode the campaign
/// assigns to the group.
pub fn verify_fft(spec: GroupSpec, grade: Grade, config: &CampaignConfig) -> Result<VerificationRecord> {
    let start = Instant::now();
    let mut rec = match config.mode.resolve(spec.kind) {
        Mode::Exact => verify_fft_in::<GaussianRational>(spec, grade, config)?,
        Mode::Float => verify_fft_in::<Complex64>(spec, grade, config)?,
    };
    if config.timings {
        rec.elapsed_ms = Some(start.elapsed().as_millis() as u64);
    }
    Ok(rec)
}

/// Per-record Monte Carlo seed, independent of which other records a campaign holds.
fn record_seed(seed: u64, spec: GroupSpec, grade: Grade) -> u64 {
    let kind = GroupKind::all().iter().position(|&g| g == spec.kind).unwrap_or(usize::MAX) as u64;
    let key = (kind << 48) ^ ((spec.n as u64) << 32) ^ ((grade.k as u64) << 16) ^ grade.l as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(key);
    rng.next_u64()
}

/// Float oracle of `G` against a Monte Carlo estimate over `G ∩ U(n)`.
pub fn verify_galois_consequence(spec: GroupSpec, grade: Grade, config: &CampaignConfig) -> Result<VerificationRecord> {
    let start = Instant::now();
    let form = CompactForm::of(spec.kind)?;
    let mut rec = VerificationRecord::new(Check::Galois, spec, grade, Mode::Float);
    if config.samples == 0 {
        rec.status = Status::Skipped;
        rec.note = Some("monte carlo disabled".into());
        return Ok(rec);
    }
    let oracle = invariant_space::<Complex64>(spec, grade, config.tol)?;
    rec.dim_oracle = Some(oracle.dim());
    let seed = record_seed(config.seed, spec, grade);
    match monte_carlo_invariant_space(form, spec.n, grade, config.samples, config.tol, seed) {
        Ok(mc) => {
            rec.dim_monte_carlo = Some(mc.dim());
            rec.monte_carlo_equal = Some(mc.dim() == oracle.dim());
            // Sampled directions are only approximately invariant; the residual is
            // reported, the comparison is by dimension.
            let (_, r) = mc.contained_in(&oracle)?;
            rec.residual = Some(r);
            rec.finish();
            if rec.status == Status::Fail {
                if let Some(dir) = &config.dump_on_fail {
                    dump(dir, &rec, "oracle", &oracle)?;
                    dump(dir, &rec, "monte-carlo", &mc)?;
                }
            }
        }
        Err(e @ Error::InsufficientSamples { .. }) => {
            rec.monte_carlo_equal = Some(false);
            rec.status = Status::Fail;
            rec.note = Some(e.to_string());
        }
        Err(e) => return Err(e),
    }
    if config.timings {
        rec.elapsed_ms = Some(start.elapsed().as_millis() as u64);
    }
    Ok(rec)
}

#[derive(Clone, Copy, Debug)]
struct Task {
    check: Check,
    spec: GroupSpec,
    grade: Grade,
}

fn tasks(config: &CampaignConfig) -> Result<Vec<Task>> {
    let mut out = Vec::new();
    for &kind in &config.groups {
        for n in config.ns_for(kind) {
            let spec = GroupSpec::new(kind, n)?;
            let max = config.degree_for(kind);
            for d in 0..=max {
                for k in 0..=d {
                    out.push(Task { check: Check::Fft, spec, grade: Grade::new(k, d - k) });
                }
            }
            if CompactForm::of(kind).is_ok() {
                for d in 0..=max.min(GALOIS_MAX_DEGREE) {
                    for k in 0..=d {
                        out.push(Task { check: Check::Galois, spec, grade: Grade::new(k, d - k) });
                    }
                }
            }
        }
    }
    Ok(out)
}

fn run_task(task: Task, config: &CampaignConfig) -> VerificationRecord {
    let result = match task.check {
        Check::Fft => verify_fft(task.spec, task.grade, config),
        Check::Galois => verify_galois_consequence(task.spec, task.grade, config),
    };
    result.unwrap_or_else(|e| {
        let mode = match task.check {
            Check::Fft => config.mode.resolve(task.spec.kind),
            Check::Galois => Mode::Float,
        };
        let mut rec = VerificationRecord::new(task.check, task.spec, task.grade, mode);
        rec.note = Some(e.to_string());
        rec
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub errors: usize,
    /// Records whose headroom rerun disagreed.
    pub unstable: usize,
    /// Records for which the headroom rerun was skipped.
    pub stability_unchecked: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: CampaignConfig,
    pub records: Vec<VerificationRecord>,
    pub summary: Summary,
}

impl Report {
    /// True when every record passed or was skipped.
    pub fn success(&self) -> bool {
        self.summary.failed == 0 && self.summary.errors == 0
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Flat table with columns `group,n,k,l,dim_oracle,dim_fft,dim_closure,pass`.
    /// Monte Carlo records appear as group `galois-<group>` with the sampled dimension
    /// in the `dim_fft` column.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<usize>| v.map(|d| d.to_string()).unwrap_or_default();
        let mut out = String::from("group,n,k,l,dim_oracle,dim_fft,dim_closure,pass\n");
        for r in &self.records {
            let (group, fft) = match r.check {
                Check::Fft => (r.group.to_string(), r.dim_fft),
                Check::Galois => (format!("galois-{}", r.group), r.dim_monte_carlo),
            };
            let _ = writeln!(
                out,
                "{group},{},{},{},{},{},{},{}",
                r.n,
                r.k,
                r.l,
                opt(r.dim_oracle),
                opt(fft),
                opt(r.dim_closure),
                r.passed()
            );
        }
        out
    }
}

/// Runs every record of the campaign. Per-record failures are reported in the records;
/// only an invalid configuration is an error.
pub fn run_campaign(config: &CampaignConfig) -> Result<Report> {
    config.validate()?;
    let tasks = tasks(config)?;
    let records: Vec<VerificationRecord> = tasks.par_iter().map(|&t| run_task(t, config)).collect();
    let mut summary = Summary { total: records.len(), ..Summary::default() };
    for r in &records {
        match r.status {
            Status::Pass => summary.passed += 1,
            Status::Fail => summary.failed += 1,
            Status::Skipped => summary.skipped += 1,
            Status::Error => summary.errors += 1,
        }
        if r.check == Check::Fft {
            match r.headroom_stable {
                Some(false) => summary.unstable += 1,
                None if r.status != Status::Error => summary.stability_unchecked += 1,
                _ => {}
            }
        }
    }
    Ok(Report { config: config.clone(), records, summary })
}
