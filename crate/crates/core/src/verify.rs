//! Property suites: set laws, threshold exactness, oracle equivalence and the
//! kernel experiments. Each suite returns a [`SuiteReport`] with a pass flag,
//! a count of checks and the counterexamples found.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::exact::{format_rational, Exponent, PositiveReal};
use crate::geometry::{CompactSet, DomainSpec, GeometryError};
use crate::indexsets::{
    conditions_for, density_probe, enumerate_sp, intersection_excess, is_witness, threshold_scan,
    thresholds, witness_radius, IndexBox, IndexError, MultiIndex, ThresholdSet,
};
use crate::kernel::{
    continuity_experiment, domination_check, evaluate_kernel_batch, ramadanov_experiment,
    KernelError, PointPair,
};
use crate::norms::{closed_form_norm_p, quadrature_norm_p, singular_axis, NormError, NormValue};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("unknown suite '{0}'")]
    UnknownSuite(String),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl From<crate::exact::ExactError> for VerifyError {
    fn from(e: crate::exact::ExactError) -> Self {
        VerifyError::Geometry(e.into())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: usize,
    pub failures: Vec<String>,
    pub details: Value,
}

impl SuiteReport {
    fn new(suite: &str, checks: usize, failures: Vec<String>, details: Value) -> Self {
        Self {
            suite: suite.to_string(),
            passed: failures.is_empty(),
            checks,
            failures,
            details,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite,
            "passed": self.passed,
            "checks": self.checks,
            "failures": self.failures,
            "details": self.details,
        })
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "{verdict} {} ({} checks, {} failures)",
            self.suite,
            self.checks,
            self.failures.len()
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    UnionLaw,
    ProductLaw,
    MonotoneChain,
    Thresholds,
    IntersectionExample,
    OracleEquivalence,
    Continuity,
    Ramadanov,
    Domination,
    Density,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::UnionLaw,
        Suite::ProductLaw,
        Suite::MonotoneChain,
        Suite::Thresholds,
        Suite::IntersectionExample,
        Suite::OracleEquivalence,
        Suite::Continuity,
        Suite::Ramadanov,
        Suite::Domination,
        Suite::Density,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::UnionLaw => "union-law",
            Suite::ProductLaw => "product-law",
            Suite::MonotoneChain => "monotone-chain",
            Suite::Thresholds => "thresholds",
            Suite::IntersectionExample => "intersection-example",
            Suite::OracleEquivalence => "oracle-equivalence",
            Suite::Continuity => "continuity",
            Suite::Ramadanov => "ramadanov",
            Suite::Domination => "domination",
            Suite::Density => "density",
        }
    }
}

impl FromStr for Suite {
    type Err = VerifyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| VerifyError::UnknownSuite(s.to_string()))
    }
}

/// Run a suite at its default size.
pub fn run_suite(suite: Suite, seed: u64) -> Result<SuiteReport, VerifyError> {
    match suite {
        Suite::UnionLaw => union_law(20, seed),
        Suite::ProductLaw => product_law(20, seed),
        Suite::MonotoneChain => monotone_chain(50, seed),
        Suite::Thresholds => threshold_exactness_default(200, seed),
        Suite::IntersectionExample => intersection_example(),
        Suite::OracleEquivalence => {
            oracle_equivalence(&oracle_instances_small()?, 2, &standard_exponents()?)
        }
        Suite::Continuity => {
            continuity_check(&DomainSpec::hartogs(PositiveReal::rational(1, 1)?)?, seed)
        }
        Suite::Ramadanov => ramadanov_check(&[Exponent::integer(2)?, Exponent::integer(3)?], 12),
        Suite::Domination => domination_suite(seed),
        Suite::Density => density_check(10, seed),
    }
}

// ---- random instances ---------------------------------------------------------------

/// A random two-dimensional leaf with small integer data.
pub fn random_leaf(rng: &mut ChaCha8Rng) -> DomainSpec {
    loop {
        let candidate = match rng.random_range(0..4) {
            0 => DomainSpec::omega_a(
                rng.random_range(1..5),
                rng.random_range(1..5),
                rng.random_range(1..5),
                rng.random_range(1..5),
            ),
            1 => DomainSpec::type1(vec![rng.random_range(1..4), rng.random_range(1..4)]),
            2 => DomainSpec::type2(vec![rng.random_range(1..4), rng.random_range(1..4)]),
            _ => {
                let den = rng.random_range(1..4u64);
                let num = den + rng.random_range(0..6u64);
                let (inverted, swapped) = (rng.random_bool(0.3), rng.random_bool(0.3));
                PositiveReal::rational(num, den)
                    .map_err(GeometryError::from)
                    .and_then(|g| DomainSpec::hartogs_oriented(g, inverted, swapped))
            }
        };
        if let Ok(d) = candidate {
            return d;
        }
    }
}

/// A random rational exponent `num/den` in `[1, max]` with `den <= 12`.
pub fn random_exponent(rng: &mut ChaCha8Rng, max: i64) -> Exponent {
    let den = rng.random_range(1..=12i64);
    let num = rng.random_range(den..=max * den);
    Exponent::from_ratio(num, den).expect("num >= den > 0")
}

fn random_box(rng: &mut ChaCha8Rng, n: usize, radius: i64) -> IndexBox {
    IndexBox::new(
        (0..n)
            .map(|_| {
                let lo = rng.random_range(-radius..=0);
                let hi = rng.random_range(0..=radius);
                (lo, hi)
            })
            .collect(),
    )
}

fn set(v: Vec<MultiIndex>) -> BTreeSet<MultiIndex> {
    v.into_iter().collect()
}

// ---- set laws -------------------------------------------------------------------------

/// `S_p(D1 u D2) = S_p(D1) n S_p(D2)` on random overlapping leaf pairs.
pub fn union_law(pairs: usize, seed: u64) -> Result<SuiteReport, VerifyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut done = 0;
    while done < pairs {
        let (left, right) = (random_leaf(&mut rng), random_leaf(&mut rng));
        let union = match DomainSpec::union(left.clone(), right.clone()) {
            Ok(u) => u,
            Err(GeometryError::DisconnectedUnion { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        let p = random_exponent(&mut rng, 6);
        let index_box = random_box(&mut rng, 2, 5);
        let lhs = set(enumerate_sp(&union, &p, &index_box)?);
        let l = set(enumerate_sp(&left, &p, &index_box)?);
        let r = set(enumerate_sp(&right, &p, &index_box)?);
        let rhs: BTreeSet<_> = l.intersection(&r).cloned().collect();
        if lhs != rhs {
            failures.push(format!("{union} at p={p}"));
        }
        done += 1;
    }
    Ok(SuiteReport::new(
        "union-law",
        pairs,
        failures,
        json!({ "seed": seed }),
    ))
}

/// `S_p(D1 x D2) = S_p(D1) x S_p(D2)` on random leaf pairs.
pub fn product_law(pairs: usize, seed: u64) -> Result<SuiteReport, VerifyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for _ in 0..pairs {
        let left = if rng.random_bool(0.25) {
            DomainSpec::disc()
        } else {
            random_leaf(&mut rng)
        };
        let right = random_leaf(&mut rng);
        let product = DomainSpec::product(left.clone(), right.clone());
        let p = random_exponent(&mut rng, 6);
        let (lb, rb) = (
            random_box(&mut rng, left.dim(), 3),
            random_box(&mut rng, right.dim(), 3),
        );
        let lhs = set(enumerate_sp(&product, &p, &lb.product(&rb))?);
        let l = enumerate_sp(&left, &p, &lb)?;
        let r = enumerate_sp(&right, &p, &rb)?;
        let rhs: BTreeSet<_> = l
            .iter()
            .flat_map(|a| r.iter().map(move |b| a.concat(b)))
            .collect();
        if lhs != rhs {
            failures.push(format!("{product} at p={p}"));
        }
    }
    Ok(SuiteReport::new(
        "product-law",
        pairs,
        failures,
        json!({ "seed": seed }),
    ))
}

/// `S_{p2}` contains `S_{p1} n S_{p3}` whenever `p1 <= p2 <= p3`.
pub fn monotone_chain(triples: usize, seed: u64) -> Result<SuiteReport, VerifyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for _ in 0..triples {
        let d = random_leaf(&mut rng);
        let mut ps = [
            random_exponent(&mut rng, 6),
            random_exponent(&mut rng, 6),
            random_exponent(&mut rng, 6),
        ];
        ps.sort_by(|a, b| a.value().cmp(b.value()));
        let index_box = random_box(&mut rng, 2, 6);
        let s1 = set(enumerate_sp(&d, &ps[0], &index_box)?);
        let s2 = set(enumerate_sp(&d, &ps[1], &index_box)?);
        let s3 = set(enumerate_sp(&d, &ps[2], &index_box)?);
        for alpha in s1.intersection(&s3) {
            if !s2.contains(alpha) {
                failures.push(format!(
                    "{d}: {alpha} at p=({}, {}, {})",
                    ps[0], ps[1], ps[2]
                ));
            }
        }
    }
    Ok(SuiteReport::new(
        "monotone-chain",
        triples,
        failures,
        json!({ "seed": seed }),
    ))
}

// ---- thresholds -------------------------------------------------------------------------

/// Compare the threshold set with `expected`, confirm every value by a scan
/// witness, and check that no index of the witness box changes membership at
/// `random_ps` random rational exponents off the set.
pub fn threshold_exactness(
    d: &DomainSpec,
    expected: &[BigRational],
    random_ps: usize,
    seed: u64,
) -> Result<SuiteReport, VerifyError> {
    let mut failures = Vec::new();
    let ThresholdSet::Finite(found) = thresholds(d)? else {
        return Ok(SuiteReport::new(
            "thresholds",
            1,
            vec![format!("{d}: dense")],
            Value::Null,
        ));
    };
    let expected: BTreeSet<BigRational> = expected.iter().cloned().collect();
    if found != expected {
        failures.push(format!(
            "{d}: got {:?}, expected {:?}",
            found.iter().map(format_rational).collect::<Vec<_>>(),
            expected.iter().map(format_rational).collect::<Vec<_>>()
        ));
    }
    let radius = witness_radius(d);
    let witness_box = IndexBox::cube(d.dim(), radius);
    let candidates: Vec<BigRational> = found.iter().cloned().collect();
    let scans = threshold_scan(d, &candidates, &witness_box)?;
    let mut witnesses = Vec::new();
    for s in &scans {
        if !s.confirmed() {
            failures.push(format!("{d}: no witness for p={}", format_rational(&s.p)));
        }
        witnesses.push(s.to_json());
    }
    let conds = conditions_for(d);
    let points = witness_box.points();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probed = 0;
    while probed < random_ps {
        let p = random_exponent(&mut rng, 8);
        if found.contains(p.value()) || p.is_one() {
            continue;
        }
        probed += 1;
        if let Some(alpha) = points.iter().find(|a| is_witness(&conds, a, &p)) {
            failures.push(format!(
                "{d}: {alpha} changes membership at non-threshold p={p}"
            ));
        }
    }
    let checks = 1 + scans.len() + random_ps;
    Ok(SuiteReport::new(
        "thresholds",
        checks,
        failures,
        json!({ "domain": d.to_string(), "witness_radius": radius, "scans": witnesses }),
    ))
}

fn ratios(values: &[(i64, i64)]) -> Vec<BigRational> {
    values
        .iter()
        .map(|&(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
        .collect()
}

fn threshold_exactness_default(random_ps: usize, seed: u64) -> Result<SuiteReport, VerifyError> {
    let a = threshold_exactness(
        &DomainSpec::omega_a(1, 1, 1, 2)?,
        &ratios(&[(6, 1), (4, 1), (3, 1), (2, 1), (3, 2), (4, 3), (6, 5)]),
        random_ps,
        seed,
    )?;
    let b = threshold_exactness(
        &DomainSpec::type1(vec![1, 1])?,
        &ratios(&[(4, 1), (2, 1), (4, 3)]),
        random_ps,
        seed,
    )?;
    Ok(merge("thresholds", vec![a, b]))
}

fn merge(name: &str, parts: Vec<SuiteReport>) -> SuiteReport {
    let checks = parts.iter().map(|r| r.checks).sum();
    let failures = parts.iter().flat_map(|r| r.failures.clone()).collect();
    let details = Value::Array(parts.iter().map(|r| r.details.clone()).collect());
    SuiteReport::new(name, checks, failures, details)
}

/// Intersection excess of two opposite Hartogs-type domains with `gamma = 2`
/// against the explicit case list.
pub fn intersection_example() -> Result<SuiteReport, VerifyError> {
    let gamma = PositiveReal::rational(2, 1)?;
    // {|z1|^2 < |z2| < 1} and {|z2|^2 < |z1| < 1}
    let left = DomainSpec::hartogs_oriented(gamma.clone(), true, false)?;
    let right = DomainSpec::hartogs_oriented(gamma, true, true)?;
    let index_box = IndexBox::cube(2, 4);
    let cases: [((i64, i64), Vec<Vec<i64>>); 4] = [
        ((2, 1), vec![]),
        ((3, 1), vec![]),
        ((3, 2), vec![vec![-1, -1]]),
        ((11, 10), vec![vec![-2, -1], vec![-1, -2], vec![-1, -1]]),
    ];
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for ((num, den), expected) in &cases {
        let p = Exponent::from_ratio(*num, *den)?;
        let excess = set(intersection_excess(&left, &right, &p, &index_box)?);
        let want: BTreeSet<MultiIndex> = expected
            .iter()
            .map(|v| MultiIndex::new(v.clone()))
            .collect();
        if excess != want {
            failures.push(format!("p={p}: got {excess:?}"));
        }
        rows.push(json!({ "p": p.to_string(), "excess": excess.iter().map(|a| a.to_string()).collect::<Vec<_>>() }));
    }
    Ok(SuiteReport::new(
        "intersection-example",
        cases.len(),
        failures,
        Value::Array(rows),
    ))
}

// ---- oracle equivalence -------------------------------------------------------------

/// Three instances each of the four leaf families, used by the full check.
pub fn oracle_instances() -> Result<Vec<DomainSpec>, VerifyError> {
    let mut out = Vec::new();
    for (a, b, c, d) in [(1, 1, 1, 2), (1, 1, 1, 3), (2, 1, 1, 2)] {
        out.push(DomainSpec::omega_a(a, b, c, d)?);
    }
    for k in [[1, 1], [1, 2], [2, 1]] {
        out.push(DomainSpec::type1(k.to_vec())?);
    }
    for k in [[1, 1], [1, 2], [2, 3]] {
        out.push(DomainSpec::type2(k.to_vec())?);
    }
    for (num, den) in [(1, 1), (3, 2), (2, 1)] {
        out.push(DomainSpec::hartogs(PositiveReal::rational(num, den)?)?);
    }
    Ok(out)
}

fn oracle_instances_small() -> Result<Vec<DomainSpec>, VerifyError> {
    Ok(vec![
        DomainSpec::omega_a(1, 1, 1, 2)?,
        DomainSpec::type1(vec![1, 1])?,
        DomainSpec::type2(vec![1, 2])?,
        DomainSpec::hartogs(PositiveReal::rational(1, 1)?)?,
    ])
}

pub fn standard_exponents() -> Result<Vec<Exponent>, VerifyError> {
    Ok(vec![
        Exponent::integer(1)?,
        Exponent::from_ratio(3, 2)?,
        Exponent::integer(2)?,
        Exponent::integer(3)?,
        Exponent::integer(4)?,
    ])
}

/// Relative agreement required between closed form and quadrature.
pub const ORACLE_REL_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
struct OracleCase {
    domain: String,
    alpha: MultiIndex,
    p: String,
    closed: Option<f64>,
    oracle: Result<Option<f64>, String>,
}

fn oracle_case(
    d: &DomainSpec,
    alpha: &MultiIndex,
    p: &Exponent,
) -> Result<OracleCase, VerifyError> {
    let closed = match closed_form_norm_p(d, alpha, p)? {
        NormValue::Finite { value, .. } => Some(value),
        NormValue::Infinite => None,
    };
    let oracle = if singular_axis(d, alpha)?.is_some() {
        Ok(None)
    } else {
        match quadrature_norm_p(d, alpha, p.to_f64(), 1e-9) {
            Ok(r) if r.diverged => Ok(None),
            Ok(r) => Ok(Some(r.estimate)),
            Err(NormError::ToleranceNotReached { achieved, target }) => {
                Err(format!("tolerance not reached ({achieved:e} > {target:e})"))
            }
            Err(e) => return Err(e.into()),
        }
    };
    Ok(OracleCase {
        domain: d.to_string(),
        alpha: alpha.clone(),
        p: p.to_string(),
        closed,
        oracle,
    })
}

/// Closed-form finiteness against quadrature divergence over the cube
/// `[-radius, radius]^n`, and relative agreement of finite values.
pub fn oracle_equivalence(
    instances: &[DomainSpec],
    radius: i64,
    exponents: &[Exponent],
) -> Result<SuiteReport, VerifyError> {
    let jobs: Vec<(&DomainSpec, MultiIndex, &Exponent)> = instances
        .iter()
        .flat_map(|d| {
            IndexBox::cube(d.dim(), radius)
                .points()
                .into_iter()
                .flat_map(move |a| exponents.iter().map(move |p| (d, a.clone(), p)))
        })
        .collect();
    let cases: Vec<OracleCase> = jobs
        .par_iter()
        .map(|(d, a, p)| oracle_case(d, a, p))
        .collect::<Result<_, VerifyError>>()?;
    let mut failures = Vec::new();
    let mut max_gap: f64 = 0.0;
    let mut finite = 0;
    for c in &cases {
        let label = format!("{} alpha={} p={}", c.domain, c.alpha, c.p);
        match (&c.closed, &c.oracle) {
            (_, Err(msg)) => failures.push(format!("{label}: {msg}")),
            (Some(x), Ok(Some(y))) => {
                finite += 1;
                let gap = (x - y).abs() / x.abs();
                max_gap = max_gap.max(gap);
                if !(gap <= ORACLE_REL_TOL) {
                    failures.push(format!("{label}: closed {x:e} vs oracle {y:e}"));
                }
            }
            (None, Ok(None)) => {}
            (Some(x), Ok(None)) => {
                failures.push(format!("{label}: closed {x:e} but oracle diverges"))
            }
            (None, Ok(Some(y))) => {
                failures.push(format!("{label}: closed infinite but oracle {y:e}"))
            }
        }
    }
    Ok(SuiteReport::new(
        "oracle-equivalence",
        cases.len(),
        failures,
        json!({ "cases": cases.len(), "finite": finite, "max_relative_gap": max_gap }),
    ))
}

// ---- kernel experiments ---------------------------------------------------------------

/// Radius floor for compact grids of domains whose shadow is unbounded below.
pub const GRID_FLOOR: f64 = 0.05;
pub const GRID_POINTS: usize = 9;
const KERNEL_TRUNCATION: u32 = 400;
const KERNEL_REL_TOL: f64 = 1e-12;

/// Seeded points of the margin-`delta` compact set with fixed phases, paired
/// cyclically as `(z_k, z_{k+1})`.
pub fn kernel_grid(
    d: &DomainSpec,
    delta: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<PointPair>, VerifyError> {
    let compact = CompactSet::with_margin(d, delta, GRID_FLOOR)?;
    let radial = compact.sample(count, seed);
    if radial.is_empty() {
        return Err(KernelError::EmptyCompactSet.into());
    }
    let points: Vec<Vec<Complex64>> = radial
        .iter()
        .enumerate()
        .map(|(k, r)| {
            r.iter()
                .enumerate()
                .map(|(i, &ri)| Complex64::from_polar(ri, 0.7 * (k + 2 * i) as f64))
                .collect()
        })
        .collect();
    Ok((0..points.len())
        .map(|k| (points[k].clone(), points[(k + 1) % points.len()].clone()))
        .collect())
}

/// Allowance for the sup column of a decreasing sequence.
pub const MONOTONE_NOISE: f64 = 0.05;
pub const SUP_TARGET: f64 = 1e-3;

fn decreasing_with_noise(values: &[f64]) -> bool {
    values
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + MONOTONE_NOISE))
}

/// `sup |K_q - K_2|` over a margin-0.3 grid for `q_k = 2 + 2^-k`.
pub fn continuity_check(d: &DomainSpec, seed: u64) -> Result<SuiteReport, VerifyError> {
    let grid = kernel_grid(d, 0.3, GRID_POINTS, seed)?;
    let p = Exponent::integer(2)?;
    let qs: Vec<f64> = (1..=8).map(|k| 2.0 + 0.5f64.powi(k)).collect();
    let rows = continuity_experiment(d, &p, &grid, &qs, KERNEL_TRUNCATION, KERNEL_REL_TOL)?;
    let sups: Vec<f64> = rows.iter().map(|r| r.sup_diff).collect();
    let mut failures = Vec::new();
    if !decreasing_with_noise(&sups) {
        failures.push(format!("sup column not decreasing: {sups:?}"));
    }
    let last = *sups.last().unwrap_or(&f64::INFINITY);
    if !(last < SUP_TARGET) {
        failures.push(format!("final sup difference {last:e} >= {SUP_TARGET:e}"));
    }
    // Halving q - p should roughly halve the difference.
    let step_ratios: Vec<f64> = sups.windows(2).map(|w| w[1] / w[0]).collect();
    let tail_ratio = step_ratios.last().copied().unwrap_or(f64::NAN);
    if !(tail_ratio > 0.4 && tail_ratio < 0.6) {
        failures.push(format!(
            "difference not first order in q - p: ratio {tail_ratio}"
        ));
    }
    let table: Vec<Value> = rows
        .iter()
        .map(|r| json!({ "q": r.q, "sup_diff": r.sup_diff }))
        .collect();
    Ok(SuiteReport::new(
        "continuity",
        3,
        failures,
        json!({ "domain": d.to_string(), "rows": table, "step_ratios": step_ratios }),
    ))
}

/// Dilated discs `r_j = 1 - 1/(j+1)` exhausting the unit disc.
pub fn ramadanov_check(exponents: &[Exponent], count: usize) -> Result<SuiteReport, VerifyError> {
    let disc = DomainSpec::disc();
    let sequence: Vec<DomainSpec> = (1..=count)
        .map(|j| DomainSpec::dilated(DomainSpec::disc(), 1.0 - 1.0 / (j as f64 + 1.0)))
        .collect::<Result<_, _>>()?;
    // The grid has to sit inside the first domain of the sequence.
    let grid = kernel_grid(&sequence[0], 0.3, GRID_POINTS, 0)?;
    let tracked: Vec<MultiIndex> = (0..4).map(|k| MultiIndex::new(vec![k])).collect();
    let mut failures = Vec::new();
    let mut details = Vec::new();
    for p in exponents {
        let report = ramadanov_experiment(
            &sequence,
            &disc,
            p,
            &grid,
            &tracked,
            KERNEL_TRUNCATION,
            KERNEL_REL_TOL,
        )?;
        let sups: Vec<f64> = report.rows.iter().map(|r| r.sup_diff).collect();
        if !decreasing_with_noise(&sups) {
            failures.push(format!("p={p}: sup column not decreasing"));
        }
        let last = *sups.last().unwrap_or(&f64::INFINITY);
        if !(last < SUP_TARGET) {
            failures.push(format!(
                "p={p}: final sup difference {last:e} >= {SUP_TARGET:e}"
            ));
        }
        if report.norm_violations > 0 {
            failures.push(format!(
                "p={p}: {} norm monotonicity violations",
                report.norm_violations
            ));
        }
        details.push(json!({
            "p": p.to_string(),
            "sup_diff": sups,
            "norm_violations": report.norm_violations,
        }));
    }
    Ok(SuiteReport::new(
        "ramadanov",
        3 * exponents.len(),
        failures,
        Value::Array(details),
    ))
}

/// Envelope fits on the disc and `H_1` at margin 0.5, shells up to 40.
pub fn domination_suite(seed: u64) -> Result<SuiteReport, VerifyError> {
    let domains = [
        DomainSpec::disc(),
        DomainSpec::hartogs(PositiveReal::rational(1, 1)?)?,
    ];
    let mut failures = Vec::new();
    let mut details = Vec::new();
    for d in &domains {
        let compact = CompactSet::with_margin(d, 0.5, GRID_FLOOR)?;
        match domination_check(d, (2.0, 2.5), &compact, 40, seed) {
            Ok(r) => {
                if !(r.theta < 1.0) {
                    failures.push(format!("{d}: theta {} >= 1", r.theta));
                }
                details.push(json!({
                    "domain": d.to_string(),
                    "theta": r.theta,
                    "constant": r.constant,
                    "max_violation_ratio": r.max_violation_ratio,
                }));
            }
            Err(KernelError::EnvelopeViolated { ratio }) => {
                failures.push(format!("{d}: violation ratio {ratio}"))
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(SuiteReport::new(
        "domination",
        domains.len(),
        failures,
        Value::Array(details),
    ))
}

/// Flips near `p` come from `alpha_1 + gamma alpha_2` close to `-2(1 + gamma)/p`;
/// for `p` up to 6 a window of 0.05 needs indices of size about 150.
pub const DENSITY_BOX_RADIUS: i64 = 160;

/// For `H_sqrt2`, the threshold set is dense and near each of `count` random
/// exponents some index flips membership within 0.05.
pub fn density_check(count: usize, seed: u64) -> Result<SuiteReport, VerifyError> {
    let d = DomainSpec::hartogs(PositiveReal::sqrt_of(2)?)?;
    let mut failures = Vec::new();
    if thresholds(&d)? != ThresholdSet::Dense {
        failures.push("threshold set is not marked dense".to_string());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let index_box = IndexBox::cube(2, DENSITY_BOX_RADIUS);
    let mut rows = Vec::new();
    for _ in 0..count {
        let p = 1.1 + 4.9 * rng.random::<f64>();
        match density_probe(&d, p, 0.05, &index_box)? {
            Some((alpha, root)) => {
                rows.push(json!({ "p": p, "alpha": alpha.to_string(), "flip_at": root }))
            }
            None => failures.push(format!("no flip within 0.05 of p={p}")),
        }
    }
    Ok(SuiteReport::new(
        "density",
        count + 1,
        failures,
        Value::Array(rows),
    ))
}

/// Kernel values at one exponent on a grid, as a reusable helper.
pub fn kernel_on_grid(
    d: &DomainSpec,
    p: &Exponent,
    grid: &[PointPair],
) -> Result<Vec<Complex64>, VerifyError> {
    Ok(
        evaluate_kernel_batch(d, p, grid, KERNEL_TRUNCATION, KERNEL_REL_TOL)?
            .into_iter()
            .map(|v| v.value)
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn set_laws_small() {
        assert!(union_law(4, 3).unwrap().passed);
        assert!(product_law(4, 3).unwrap().passed);
        assert!(monotone_chain(6, 3).unwrap().passed);
    }

    #[test]
    fn worked_intersection_example() {
        let r = intersection_example().unwrap();
        assert!(r.passed, "{:?}", r.failures);
    }
}
