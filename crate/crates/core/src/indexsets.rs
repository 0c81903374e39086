//! p-allowable index sets: affine-in-p conditions, exact membership,
//! box enumeration, threshold exponents and witness scans.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::exact::{extended_gcd, format_rational, gcd_i64, Exponent, PositiveReal};
use crate::geometry::{DomainKind, DomainSpec, GeometryError, HartogsExponents};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IndexError {
    #[error("membership of {alphas:?} at p = {p} is within the representation error of gamma")]
    BoundaryUndecidable { alphas: Vec<MultiIndex>, p: String },
    #[error("operation is only defined for leaf families, not algebra nodes")]
    AlgebraNodeNotSupported,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("oracle could not decide membership: {0}")]
    OracleInconclusive(String),
    #[error("invalid index box: {0}")]
    InvalidBox(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Integer exponent vector of a Laurent monomial.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<i64>);

impl MultiIndex {
    pub fn new(alpha: Vec<i64>) -> Self {
        Self(alpha)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn l1_norm(&self) -> u64 {
        self.0.iter().map(|a| a.unsigned_abs()).sum()
    }

    pub fn dot(&self, v: &[i64]) -> i64 {
        self.0.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    pub fn concat(&self, other: &MultiIndex) -> MultiIndex {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        MultiIndex(v)
    }
}

impl From<Vec<i64>> for MultiIndex {
    fn from(v: Vec<i64>) -> Self {
        Self(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConditionKind {
    /// `(v . alpha) p + c > 0`.
    StrictInP,
    /// `alpha_j >= 0`.
    SignOnly { coordinate: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AffineCondition {
    pub v: Vec<i64>,
    pub c: i64,
    pub kind: ConditionKind,
}

impl AffineCondition {
    pub fn strict(v: Vec<i64>, c: i64) -> Self {
        Self {
            v,
            c,
            kind: ConditionKind::StrictInP,
        }
    }

    pub fn sign(n: usize, coordinate: usize) -> Self {
        let mut v = vec![0; n];
        v[coordinate] = 1;
        Self {
            v,
            c: 0,
            kind: ConditionKind::SignOnly { coordinate },
        }
    }

    /// Sign of `(v . alpha) p + c`, or of `alpha_j` for sign conditions.
    pub fn sign_at(&self, alpha: &MultiIndex, p: &Exponent) -> Ordering {
        match self.kind {
            ConditionKind::StrictInP => p.sign_affine(alpha.dot(&self.v), self.c),
            ConditionKind::SignOnly { coordinate } => alpha.as_slice()[coordinate].cmp(&0),
        }
    }

    pub fn holds(&self, alpha: &MultiIndex, p: &Exponent) -> bool {
        match self.kind {
            ConditionKind::StrictInP => self.sign_at(alpha, p) == Ordering::Greater,
            ConditionKind::SignOnly { .. } => self.sign_at(alpha, p) != Ordering::Less,
        }
    }

    fn shifted(&self, offset: usize, n: usize) -> Self {
        let mut v = vec![0; n];
        v[offset..offset + self.v.len()].copy_from_slice(&self.v);
        let kind = match self.kind {
            ConditionKind::StrictInP => ConditionKind::StrictInP,
            ConditionKind::SignOnly { coordinate } => ConditionKind::SignOnly {
                coordinate: coordinate + offset,
            },
        };
        Self { v, c: self.c, kind }
    }
}

impl fmt::Display for AffineCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ConditionKind::SignOnly { coordinate } => write!(f, "a{} >= 0", coordinate + 1),
            ConditionKind::StrictInP => {
                let mut terms = Vec::new();
                for (j, &vj) in self.v.iter().enumerate() {
                    match vj {
                        0 => {}
                        1 => terms.push(format!("a{}", j + 1)),
                        -1 => terms.push(format!("-a{}", j + 1)),
                        _ => terms.push(format!("{vj}*a{}", j + 1)),
                    }
                }
                let lin = if terms.is_empty() {
                    "0".to_string()
                } else {
                    terms.join(" + ").replace("+ -", "- ")
                };
                write!(f, "({lin})*p + {} > 0", self.c)
            }
        }
    }
}

/// The non-integer Hartogs condition for irrational gamma:
/// `gamma (alpha_s p + 2) + alpha_t p + 2 > 0`, or with `s` and `t`
/// exchanged inside the bracket when `gamma_on_small` is set.
#[derive(Clone, Debug, PartialEq)]
pub struct IrrationalCondition {
    pub s: usize,
    pub t: usize,
    pub gamma: PositiveReal,
    pub gamma_on_small: bool,
}

impl IrrationalCondition {
    fn offset(&self, by: usize) -> Self {
        Self {
            s: self.s + by,
            t: self.t + by,
            ..self.clone()
        }
    }

    /// `Some(sign)` when decidable, `None` when within 10x representation error.
    pub fn sign_at(&self, alpha: &MultiIndex, p: &BigRational) -> Option<Ordering> {
        let a = alpha.as_slice();
        let two = BigRational::from_integer(BigInt::from(2));
        let lin = |k: i64| BigRational::from_integer(BigInt::from(k)) * p + &two;
        let (scaled, plain) = if self.gamma_on_small {
            (lin(a[self.t]), lin(a[self.s]))
        } else {
            (lin(a[self.s]), lin(a[self.t]))
        };
        let value = self.gamma.approx() * &scaled + plain;
        let bound =
            self.gamma.error_bound() * scaled.abs() * BigRational::from_integer(BigInt::from(10));
        if bound.is_zero() || value.abs() > bound {
            Some(value.cmp(&BigRational::zero()))
        } else {
            None
        }
    }

    /// Value of `p` at which the condition vanishes for `alpha`, as f64.
    pub fn root(&self, alpha: &MultiIndex) -> Option<f64> {
        let a = alpha.as_slice();
        let g = self.gamma.to_f64();
        let (scaled, plain) = if self.gamma_on_small {
            (a[self.t], a[self.s])
        } else {
            (a[self.s], a[self.t])
        };
        let slope = g * scaled as f64 + plain as f64;
        if slope >= 0.0 {
            return None;
        }
        Some(-2.0 * (g + 1.0) / slope)
    }
}

impl fmt::Display for IrrationalCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (scaled, plain) = if self.gamma_on_small {
            (self.t, self.s)
        } else {
            (self.s, self.t)
        };
        write!(
            f,
            "{} * (a{}*p + 2) + a{}*p + 2 > 0",
            self.gamma.to_decimal_string(20),
            scaled + 1,
            plain + 1
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AllowabilityConditions {
    Exact {
        conditions: Vec<AffineCondition>,
        special: Vec<IrrationalCondition>,
    },
    /// No exact description is claimed; membership needs the integrability oracle.
    SamplingOnly,
}

impl AllowabilityConditions {
    pub fn exact(conditions: Vec<AffineCondition>) -> Self {
        Self::Exact {
            conditions,
            special: Vec::new(),
        }
    }

    pub fn conditions(&self) -> &[AffineCondition] {
        match self {
            Self::Exact { conditions, .. } => conditions,
            Self::SamplingOnly => &[],
        }
    }

    pub fn strict_conditions(&self) -> impl Iterator<Item = &AffineCondition> {
        self.conditions()
            .iter()
            .filter(|c| c.kind == ConditionKind::StrictInP)
    }

    pub fn to_json(&self) -> Value {
        match self {
            Self::Exact {
                conditions,
                special,
            } => {
                let mut all: Vec<String> = conditions.iter().map(|c| c.to_string()).collect();
                all.extend(special.iter().map(|c| c.to_string()));
                json!({"kind": "exact", "conditions": all})
            }
            Self::SamplingOnly => json!({"kind": "sampling_only"}),
        }
    }

    /// Exact or high-precision decision; `None` when an irrational condition
    /// sits within its representation error.
    pub fn decide(&self, alpha: &MultiIndex, p: &Exponent) -> Option<bool> {
        let Self::Exact {
            conditions,
            special,
        } = self
        else {
            return Some(false);
        };
        if !conditions.iter().all(|c| c.holds(alpha, p)) {
            return Some(false);
        }
        let mut undecided = false;
        for cond in special {
            match cond.sign_at(alpha, p.value()) {
                Some(Ordering::Greater) => {}
                Some(_) => return Some(false),
                None => undecided = true,
            }
        }
        if undecided {
            None
        } else {
            Some(true)
        }
    }
}

/// Per-coordinate inclusive integer ranges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndexBox(Vec<(i64, i64)>);

impl IndexBox {
    pub fn new(ranges: Vec<(i64, i64)>) -> Self {
        Self(ranges)
    }

    pub fn cube(n: usize, radius: i64) -> Self {
        Self(vec![(-radius, radius); n])
    }

    /// Parse `lo:hi,lo:hi,...`.
    pub fn parse(s: &str) -> Result<Self, IndexError> {
        s.split(',')
            .map(|part| {
                let (lo, hi) = part
                    .trim()
                    .split_once(':')
                    .ok_or_else(|| IndexError::InvalidBox(format!("`{part}` is not lo:hi")))?;
                let parse = |t: &str| {
                    t.trim()
                        .parse::<i64>()
                        .map_err(|_| IndexError::InvalidBox(format!("bad bound `{t}`")))
                };
                Ok((parse(lo)?, parse(hi)?))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }

    pub fn ranges(&self) -> &[(i64, i64)] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().any(|(lo, hi)| lo > hi)
    }

    pub fn len(&self) -> usize {
        if self.is_empty() {
            return 0;
        }
        self.0
            .iter()
            .map(|(lo, hi)| (hi - lo + 1) as usize)
            .product()
    }

    pub fn product(&self, other: &IndexBox) -> IndexBox {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        IndexBox(v)
    }

    /// All points in lexicographic order.
    pub fn points(&self) -> Vec<MultiIndex> {
        if self.is_empty() {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(self.len());
        let mut cur: Vec<i64> = self.0.iter().map(|r| r.0).collect();
        loop {
            out.push(MultiIndex(cur.clone()));
            let mut j = self.0.len();
            loop {
                if j == 0 {
                    return out;
                }
                j -= 1;
                if cur[j] < self.0[j].1 {
                    cur[j] += 1;
                    for (k, c) in cur.iter_mut().enumerate().skip(j + 1) {
                        *c = self.0[k].0;
                    }
                    break;
                }
            }
        }
    }

    /// Points ordered by l1 norm, then lexicographically.
    pub fn points_by_shell(&self) -> Vec<MultiIndex> {
        let mut pts = self.points();
        pts.sort_by(|a, b| a.l1_norm().cmp(&b.l1_norm()).then_with(|| a.cmp(b)));
        pts
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ThresholdSet {
    Finite(BTreeSet<BigRational>),
    Dense,
}

impl ThresholdSet {
    /// Values in descending order.
    pub fn values_desc(&self) -> Vec<BigRational> {
        match self {
            Self::Finite(v) => v.iter().rev().cloned().collect(),
            Self::Dense => Vec::new(),
        }
    }

    pub fn contains(&self, p: &BigRational) -> bool {
        match self {
            Self::Finite(v) => v.contains(p),
            Self::Dense => true,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Self::Finite(_) => {
                let vals: Vec<String> = self.values_desc().iter().map(format_rational).collect();
                json!({"kind": "finite", "values": vals})
            }
            Self::Dense => json!({"kind": "dense"}),
        }
    }
}

/// Outcome of confirming one threshold candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanOutcome {
    pub p: BigRational,
    pub witness: Option<MultiIndex>,
    /// Exact points left and right of `p` where membership was compared.
    pub q_left: Option<BigRational>,
    pub q_right: Option<BigRational>,
}

impl ScanOutcome {
    pub fn confirmed(&self) -> bool {
        self.witness.is_some()
    }

    pub fn to_json(&self) -> Value {
        match &self.witness {
            Some(alpha) => json!({"p": format_rational(&self.p), "alpha": alpha}),
            None => {
                json!({"p": format_rational(&self.p), "alpha": null, "status": "no_witness_in_box"})
            }
        }
    }
}

// ---- conditions --------------------------------------------------------------

pub fn conditions_for(d: &DomainSpec) -> AllowabilityConditions {
    let n = d.dim();
    match d.kind() {
        DomainKind::OmegaA { a, b, c, d: dd } => {
            let (a, b, c, dd) = (*a as i64, *b as i64, *c as i64, *dd as i64);
            AllowabilityConditions::exact(vec![
                AffineCondition::strict(vec![b, a], 2 * (a + b)),
                AffineCondition::strict(vec![dd, c], 2 * (c + dd)),
            ])
        }
        DomainKind::Type1 { k } => {
            let k: Vec<i64> = k.iter().map(|&v| v as i64).collect();
            let mut conds = vec![
                AffineCondition::sign(n, 0),
                AffineCondition::strict(unit(n, 0), 2),
            ];
            for j in 1..n {
                let mut v = vec![0; n];
                v[0] = k[j];
                v[j] = k[0];
                conds.push(AffineCondition::strict(v, 2 * (k[0] + k[j])));
            }
            AllowabilityConditions::exact(conds)
        }
        DomainKind::Type2 { k } => {
            let k: Vec<i64> = k.iter().map(|&v| v as i64).collect();
            let mut conds = vec![AffineCondition::sign(n, 0)];
            for i in 0..n {
                let weights = type2_weights(&k, i);
                let mut v = vec![0; n];
                v[..=i].copy_from_slice(&weights);
                conds.push(AffineCondition::strict(v, 2 * weights.iter().sum::<i64>()));
            }
            AllowabilityConditions::exact(conds)
        }
        DomainKind::Hartogs { .. } => {
            let shape = d.hartogs_exponents().expect("hartogs leaf");
            let sign = AffineCondition::sign(2, shape.s);
            match shape.exponents {
                HartogsExponents::Rational { u, v } => {
                    let (u, v) = (u as i64, v as i64);
                    let mut coeffs = vec![0; 2];
                    coeffs[shape.s] = v;
                    coeffs[shape.t] = u;
                    AllowabilityConditions::exact(vec![
                        sign,
                        AffineCondition::strict(coeffs, 2 * (u + v)),
                    ])
                }
                HartogsExponents::Irrational {
                    gamma,
                    gamma_on_small,
                } => AllowabilityConditions::Exact {
                    conditions: vec![sign],
                    special: vec![IrrationalCondition {
                        s: shape.s,
                        t: shape.t,
                        gamma,
                        gamma_on_small,
                    }],
                },
            }
        }
        DomainKind::Dilated { inner, .. } => conditions_for(inner),
        DomainKind::Product(l, r) => match (conditions_for(l), conditions_for(r)) {
            (
                AllowabilityConditions::Exact {
                    conditions: lc,
                    special: ls,
                },
                AllowabilityConditions::Exact {
                    conditions: rc,
                    special: rs,
                },
            ) => {
                let mut conditions: Vec<_> = lc.iter().map(|c| c.shifted(0, n)).collect();
                conditions.extend(rc.iter().map(|c| c.shifted(l.dim(), n)));
                let mut special = ls;
                special.extend(rs.iter().map(|c| c.offset(l.dim())));
                AllowabilityConditions::Exact {
                    conditions,
                    special,
                }
            }
            _ => AllowabilityConditions::SamplingOnly,
        },
        DomainKind::Union(l, r) => match (conditions_for(l), conditions_for(r)) {
            (
                AllowabilityConditions::Exact {
                    conditions: mut lc,
                    special: mut ls,
                },
                AllowabilityConditions::Exact {
                    conditions: rc,
                    special: rs,
                },
            ) => {
                for c in rc {
                    if !lc.contains(&c) {
                        lc.push(c);
                    }
                }
                for c in rs {
                    if !ls.contains(&c) {
                        ls.push(c);
                    }
                }
                AllowabilityConditions::Exact {
                    conditions: lc,
                    special: ls,
                }
            }
            _ => AllowabilityConditions::SamplingOnly,
        },
        DomainKind::Intersection(..) | DomainKind::BoxComplement { .. } => {
            AllowabilityConditions::SamplingOnly
        }
    }
}

/// `K_{j,i} = k_1...k_i / k_j` for `j <= i` (0-based `i`).
fn type2_weights(k: &[i64], i: usize) -> Vec<i64> {
    let prod: i64 = k[..=i].iter().product();
    k[..=i].iter().map(|kj| prod / kj).collect()
}

fn unit(n: usize, j: usize) -> Vec<i64> {
    let mut v = vec![0; n];
    v[j] = 1;
    v
}

/// Conditions used for exact decisions: an intersection that reduces to a
/// leaf uses the leaf's list.
pub fn effective_conditions(d: &DomainSpec) -> AllowabilityConditions {
    match d.reduce_intersection() {
        Some(leaf) => conditions_for(&leaf),
        None => conditions_for(d),
    }
}

// ---- membership and enumeration ---------------------------------------------------

fn check_dim(d: &DomainSpec, alpha: &MultiIndex) -> Result<(), IndexError> {
    if alpha.dim() != d.dim() {
        return Err(IndexError::DimensionMismatch {
            expected: d.dim(),
            got: alpha.dim(),
        });
    }
    Ok(())
}

/// Whether `e_alpha` lies in the p-Bergman space of `d`. Exact for rational
/// data; domains without an exact description fall back to the
/// integrability oracle.
pub fn is_allowable(d: &DomainSpec, alpha: &MultiIndex, p: &Exponent) -> Result<bool, IndexError> {
    check_dim(d, alpha)?;
    match effective_conditions(d) {
        AllowabilityConditions::SamplingOnly => {
            crate::norms::oracle_allowable(d, alpha, p.to_f64())
                .map_err(|e| IndexError::OracleInconclusive(e.to_string()))
        }
        conds => conds
            .decide(alpha, p)
            .ok_or_else(|| IndexError::BoundaryUndecidable {
                alphas: vec![alpha.clone()],
                p: p.to_string(),
            }),
    }
}

/// Elements of the box that are p-allowable, in lexicographic order.
pub fn enumerate_sp(
    d: &DomainSpec,
    p: &Exponent,
    index_box: &IndexBox,
) -> Result<Vec<MultiIndex>, IndexError> {
    if index_box.is_empty() {
        return Ok(Vec::new());
    }
    if index_box.dim() != d.dim() {
        return Err(IndexError::DimensionMismatch {
            expected: d.dim(),
            got: index_box.dim(),
        });
    }
    let conds = effective_conditions(d);
    let mut out = Vec::new();
    let mut undecided = Vec::new();
    for alpha in index_box.points() {
        let verdict = match &conds {
            AllowabilityConditions::SamplingOnly => Some(is_allowable(d, &alpha, p)?),
            exact => exact.decide(&alpha, p),
        };
        match verdict {
            Some(true) => out.push(alpha),
            Some(false) => {}
            None => undecided.push(alpha),
        }
    }
    if !undecided.is_empty() {
        return Err(IndexError::BoundaryUndecidable {
            alphas: undecided,
            p: p.to_string(),
        });
    }
    Ok(out)
}

// ---- thresholds -----------------------------------------------------------------

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Threshold exponents from the closed-form descriptions of each family.
pub fn thresholds(d: &DomainSpec) -> Result<ThresholdSet, IndexError> {
    let mut set = BTreeSet::new();
    let mut add_family = |numerator: i64| {
        for l in 1..numerator {
            set.insert(ratio(numerator, l));
        }
    };
    match d.kind() {
        DomainKind::OmegaA { a, b, c, d: dd } => {
            add_family(2 * (*a + *b) as i64);
            add_family(2 * (*c + *dd) as i64);
        }
        DomainKind::Type1 { k } => {
            let k0 = k[0] as i64;
            for &kj in &k[1..] {
                let kj = kj as i64;
                add_family(2 * (k0 + kj) / gcd_i64(&[k0, kj]));
            }
        }
        DomainKind::Type2 { k } => {
            let k: Vec<i64> = k.iter().map(|&v| v as i64).collect();
            for i in 1..k.len() {
                let w = type2_weights(&k, i);
                add_family(2 * w.iter().sum::<i64>() / gcd_i64(&w));
            }
        }
        DomainKind::Hartogs { .. } => {
            let shape = d.hartogs_exponents().expect("hartogs leaf");
            let HartogsExponents::Rational { u, v } = shape.exponents else {
                return Ok(ThresholdSet::Dense);
            };
            let (u, v) = (u as i64, v as i64);
            let c = 2 * (u + v);
            for t in 1..c {
                if hartogs_witness(u, v, t).is_some() {
                    set.insert(ratio(c, t));
                }
            }
        }
        DomainKind::Dilated { inner, .. } => return thresholds(inner),
        _ => return Err(IndexError::AlgebraNodeNotSupported),
    }
    Ok(ThresholdSet::Finite(set))
}

/// Solve `v alpha_s + u alpha_t = -t` with `alpha_s >= 0` (smallest such).
pub fn hartogs_witness(u: i64, v: i64, t: i64) -> Option<(i64, i64)> {
    let (g, x, y) = extended_gcd(v, u);
    if t % g != 0 {
        return None;
    }
    let scale = -t / g;
    let (mut s, mut r) = (x * scale, y * scale);
    // General solution: s + k u/g, r - k v/g; pick the smallest s >= 0.
    let (du, dv) = (u / g, v / g);
    let k = (-s).div_euclid(du) + if (-s).rem_euclid(du) == 0 { 0 } else { 1 };
    s += k * du;
    r -= k * dv;
    debug_assert_eq!(v * s + u * r, -t);
    Some((s, r))
}

/// Witness radius `2 * sum(|v| + |c|)` over the strict conditions.
pub fn witness_radius(d: &DomainSpec) -> i64 {
    let conds = conditions_for(d);
    2 * conds
        .strict_conditions()
        .map(|c| c.v.iter().map(|x| x.abs()).sum::<i64>() + c.c.abs())
        .sum::<i64>()
}

/// `alpha` changes membership exactly at `p`: it satisfies every sign
/// condition, every strict condition is non-negative at `p`, at least one
/// vanishes, and all vanishing ones decrease in `p`.
pub fn is_witness(conds: &AllowabilityConditions, alpha: &MultiIndex, p: &Exponent) -> bool {
    let mut vanishing = 0;
    for c in conds.conditions() {
        match c.kind {
            ConditionKind::SignOnly { .. } => {
                if !c.holds(alpha, p) {
                    return false;
                }
            }
            ConditionKind::StrictInP => match c.sign_at(alpha, p) {
                Ordering::Less => return false,
                Ordering::Equal => {
                    if alpha.dot(&c.v) >= 0 {
                        return false;
                    }
                    vanishing += 1;
                }
                Ordering::Greater => {}
            },
        }
    }
    vanishing > 0
}

/// Roots `p = -c / (v . alpha)` of the strict conditions of `alpha`.
fn condition_roots(conds: &AllowabilityConditions, alpha: &MultiIndex) -> Vec<BigRational> {
    conds
        .strict_conditions()
        .filter_map(|c| {
            let m = alpha.dot(&c.v);
            (m != 0).then(|| ratio(-c.c, m))
        })
        .collect()
}

/// For each candidate, look for a witness whose membership differs on the
/// two sides of `p`. The comparison points sit at exact midpoints towards
/// the neighbouring candidates (and towards the other roots of the witness'
/// own conditions), so no other change can fall in between.
pub fn threshold_scan(
    d: &DomainSpec,
    candidates: &[BigRational],
    witness_box: &IndexBox,
) -> Result<Vec<ScanOutcome>, IndexError> {
    let conds = conditions_for(d);
    let points = witness_box.points_by_shell();
    let mut sorted: Vec<BigRational> = candidates.to_vec();
    sorted.sort();
    sorted.dedup();
    let one = BigRational::one();
    let two = BigRational::from_integer(BigInt::from(2));
    let mut out = Vec::with_capacity(candidates.len());
    for p in candidates {
        let exponent = Exponent::new(p.clone()).map_err(GeometryError::from)?;
        let mut outcome = ScanOutcome {
            p: p.clone(),
            witness: None,
            q_left: None,
            q_right: None,
        };
        if exponent.is_one() || matches!(conds, AllowabilityConditions::SamplingOnly) {
            out.push(outcome);
            continue;
        }
        let idx = sorted.binary_search(p).expect("candidate present");
        let lower = if idx > 0 {
            sorted[idx - 1].clone()
        } else {
            one.clone()
        };
        let upper = sorted.get(idx + 1).cloned().unwrap_or_else(|| p * &two);
        for alpha in &points {
            if alpha.dim() != d.dim() || !is_witness(&conds, alpha, &exponent) {
                continue;
            }
            let mut lo = lower.clone();
            let mut hi = upper.clone();
            for root in condition_roots(&conds, alpha) {
                if &root < p && root > lo {
                    lo = root;
                } else if &root > p && root < hi {
                    hi = root;
                }
            }
            let q_left = (&lo + p) / &two;
            let q_right = (&hi + p) / &two;
            let left = Exponent::new(q_left.clone()).map_err(GeometryError::from)?;
            let right = Exponent::new(q_right.clone()).map_err(GeometryError::from)?;
            let before = conds.decide(alpha, &left);
            let after = conds.decide(alpha, &right);
            if before.is_some() && after.is_some() && before != after {
                outcome.witness = Some(alpha.clone());
                outcome.q_left = Some(q_left);
                outcome.q_right = Some(q_right);
                break;
            }
        }
        out.push(outcome);
    }
    Ok(out)
}

/// Every `p > 1` at which some index of the box changes membership.
pub fn observed_thresholds(
    d: &DomainSpec,
    index_box: &IndexBox,
) -> Result<BTreeSet<BigRational>, IndexError> {
    let conds = conditions_for(d);
    if matches!(conds, AllowabilityConditions::SamplingOnly) {
        return Err(IndexError::AlgebraNodeNotSupported);
    }
    let one = BigRational::one();
    let mut out = BTreeSet::new();
    for alpha in index_box.points() {
        for root in condition_roots(&conds, &alpha) {
            if root > one && !out.contains(&root) {
                let p = Exponent::new(root.clone()).map_err(GeometryError::from)?;
                if is_witness(&conds, &alpha, &p) {
                    out.insert(root);
                }
            }
        }
    }
    Ok(out)
}

/// Indices allowable on the intersection but on neither operand.
pub fn intersection_excess(
    d1: &DomainSpec,
    d2: &DomainSpec,
    p: &Exponent,
    index_box: &IndexBox,
) -> Result<Vec<MultiIndex>, IndexError> {
    let cap = DomainSpec::intersection(d1.clone(), d2.clone())?;
    let mut out = Vec::new();
    for alpha in index_box.points() {
        if is_allowable(d1, &alpha, p)? || is_allowable(d2, &alpha, p)? {
            continue;
        }
        if is_allowable(&cap, &alpha, p)? {
            out.push(alpha);
        }
    }
    Ok(out)
}

/// Probe near `p` for an index whose membership flips within `window`
/// (irrational Hartogs leaves). Returns the smallest such index by shell and
/// the exponent where its condition vanishes.
pub fn density_probe(
    d: &DomainSpec,
    p: f64,
    window: f64,
    index_box: &IndexBox,
) -> Result<Option<(MultiIndex, f64)>, IndexError> {
    let AllowabilityConditions::Exact {
        conditions,
        special,
    } = conditions_for(d)
    else {
        return Err(IndexError::AlgebraNodeNotSupported);
    };
    let Some(cond) = special.first() else {
        return Ok(None);
    };
    let one = Exponent::integer(1).map_err(GeometryError::from)?;
    for alpha in index_box.points_by_shell() {
        if !conditions
            .iter()
            .all(|c| c.kind == ConditionKind::StrictInP || c.holds(&alpha, &one))
        {
            continue;
        }
        let Some(root) = cond.root(&alpha) else {
            continue;
        };
        if root < 1.0 || (root - p).abs() >= window {
            continue;
        }
        // Confirm the flip with exact-rational evaluation on both sides.
        let delta = (window - (root - p).abs()).min(1e-3) / 2.0;
        let left = Exponent::from_f64((root - delta).max(1.0)).map_err(GeometryError::from)?;
        let right = Exponent::from_f64(root + delta).map_err(GeometryError::from)?;
        let before = cond.sign_at(&alpha, left.value());
        let after = cond.sign_at(&alpha, right.value());
        if before == Some(Ordering::Greater) && after == Some(Ordering::Less) {
            return Ok(Some((alpha, root)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[i64]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn p(n: i64, d: i64) -> Exponent {
        Exponent::from_ratio(n, d).unwrap()
    }

    fn hartogs(num: u64, den: u64) -> DomainSpec {
        DomainSpec::hartogs(PositiveReal::rational(num, den).unwrap()).unwrap()
    }

    #[test]
    fn conditions_match_family_formulas() {
        let a = DomainSpec::omega_a(1, 1, 1, 2).unwrap();
        let strs: Vec<String> = conditions_for(&a)
            .conditions()
            .iter()
            .map(|c| c.to_string())
            .collect();
        assert_eq!(strs, vec!["(a1 + a2)*p + 4 > 0", "(2*a1 + a2)*p + 6 > 0"]);
        let t1 = DomainSpec::type1(vec![1, 1]).unwrap();
        let strs: Vec<String> = conditions_for(&t1)
            .conditions()
            .iter()
            .map(|c| c.to_string())
            .collect();
        assert_eq!(
            strs,
            vec!["a1 >= 0", "(a1)*p + 2 > 0", "(a1 + a2)*p + 4 > 0"]
        );
        let h = hartogs(1, 1);
        let strs: Vec<String> = conditions_for(&h)
            .conditions()
            .iter()
            .map(|c| c.to_string())
            .collect();
        assert_eq!(strs, vec!["a1 >= 0", "(a1 + a2)*p + 4 > 0"]);
        let t2 = DomainSpec::type2(vec![1, 2, 3]).unwrap();
        let conds = conditions_for(&t2);
        let strict: Vec<&AffineCondition> = conds.strict_conditions().collect();
        assert_eq!(strict[2].v, vec![6, 3, 2]);
        assert_eq!(strict[2].c, 22);
        assert_eq!(
            conditions_for(&DomainSpec::intersection(h.clone(), h).unwrap()),
            AllowabilityConditions::SamplingOnly
        );
    }

    #[test]
    fn hartogs_allowability_is_strict() {
        let h = hartogs(1, 1);
        assert!(is_allowable(&h, &mi(&[0, -1]), &p(2, 1)).unwrap());
        // (0,-2) sits exactly on the boundary of integrability at p = 2.
        assert!(!is_allowable(&h, &mi(&[0, -2]), &p(2, 1)).unwrap());
        assert!(!is_allowable(&h, &mi(&[0, -3]), &p(2, 1)).unwrap());
        assert!(!is_allowable(&h, &mi(&[-1, 5]), &p(2, 1)).unwrap());
        assert!(matches!(
            is_allowable(&h, &mi(&[1]), &p(2, 1)),
            Err(IndexError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn enumerate_examples() {
        let h = hartogs(1, 1);
        let got = enumerate_sp(&h, &p(2, 1), &IndexBox::new(vec![(-3, 0), (-3, 0)])).unwrap();
        assert_eq!(got, vec![mi(&[0, -1]), mi(&[0, 0])]);
        assert!(
            enumerate_sp(&h, &p(2, 1), &IndexBox::new(vec![(0, -1), (0, 0)]))
                .unwrap()
                .is_empty()
        );
        let pd = DomainSpec::product(DomainSpec::disc(), DomainSpec::disc());
        let got = enumerate_sp(&pd, &p(2, 1), &IndexBox::cube(2, 1)).unwrap();
        assert_eq!(
            got,
            vec![mi(&[0, 0]), mi(&[0, 1]), mi(&[1, 0]), mi(&[1, 1])]
        );
    }

    #[test]
    fn threshold_sets() {
        let a = DomainSpec::omega_a(1, 1, 1, 2).unwrap();
        let expected: Vec<BigRational> = [(6, 1), (4, 1), (3, 1), (2, 1), (3, 2), (4, 3), (6, 5)]
            .iter()
            .map(|&(n, d)| ratio(n, d))
            .collect();
        assert_eq!(thresholds(&a).unwrap().values_desc(), expected);
        let t1 = DomainSpec::type1(vec![1, 1]).unwrap();
        let expected: Vec<BigRational> = [(4, 1), (2, 1), (4, 3)]
            .iter()
            .map(|&(n, d)| ratio(n, d))
            .collect();
        assert_eq!(thresholds(&t1).unwrap().values_desc(), expected);
        let irr = DomainSpec::hartogs(PositiveReal::sqrt_of(2).unwrap()).unwrap();
        assert_eq!(thresholds(&irr).unwrap(), ThresholdSet::Dense);
        assert_eq!(
            thresholds(&hartogs(1, 1)).unwrap().values_desc(),
            vec![ratio(4, 1), ratio(2, 1), ratio(4, 3)]
        );
        let pd = DomainSpec::product(DomainSpec::disc(), DomainSpec::disc());
        assert_eq!(thresholds(&pd), Err(IndexError::AlgebraNodeNotSupported));
        assert_eq!(
            thresholds(&a).unwrap().to_json(),
            json!({"kind":"finite","values":["6/1","4/1","3/1","2/1","3/2","4/3","6/5"]})
        );
    }

    #[test]
    fn scan_examples() {
        let a = DomainSpec::omega_a(1, 1, 1, 2).unwrap();
        let got = threshold_scan(&a, &[ratio(2, 1)], &IndexBox::cube(2, 6)).unwrap();
        assert_eq!(got[0].witness, Some(mi(&[-1, -1])));
        let t1 = DomainSpec::type1(vec![1, 1]).unwrap();
        let got = threshold_scan(&t1, &[ratio(4, 1)], &IndexBox::cube(2, 8)).unwrap();
        assert_eq!(got[0].witness, Some(mi(&[0, -1])));
        assert!(threshold_scan(&t1, &[], &IndexBox::cube(2, 8))
            .unwrap()
            .is_empty());
        let got = threshold_scan(&t1, &[ratio(5, 2)], &IndexBox::cube(2, 8)).unwrap();
        assert!(!got[0].confirmed());
        assert_eq!(witness_radius(&t1), 18);
        assert_eq!(witness_radius(&a), 30);
    }

    #[test]
    fn hartogs_diophantine_witness() {
        for (u, v) in [(1, 1), (2, 3), (3, 2), (5, 7)] {
            for t in 1..2 * (u + v) {
                let (s, r) = hartogs_witness(u, v, t).unwrap();
                assert!(s >= 0);
                assert_eq!(v * s + u * r, -t);
            }
        }
    }

    #[test]
    fn irrational_boundary_is_undecidable_only_near_zero() {
        let irr = DomainSpec::hartogs(PositiveReal::sqrt_of(2).unwrap()).unwrap();
        assert!(is_allowable(&irr, &mi(&[0, 0]), &p(2, 1)).unwrap());
        assert!(!is_allowable(&irr, &mi(&[0, -3]), &p(2, 1)).unwrap());
        let got = density_probe(&irr, 2.5, 0.05, &IndexBox::cube(2, 40)).unwrap();
        let (_, root) = got.expect("flip near 2.5");
        assert!((root - 2.5).abs() < 0.05);
    }
}
