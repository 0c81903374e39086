//! Reinhardt domains built from monomial polyhedra, their set algebra,
//! membership, logarithmic shadows and seeded sampling.
//!
//! Every leaf family is a polyhedral cone in logarithmic coordinates
//! `x = (log r_1, ..., log r_n)`, described by strict inequalities
//! `<m, x> < b`. Algebra nodes combine leaves; membership is evaluated
//! recursively and sampling falls back to rejection against membership.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};
use thiserror::Error;

use crate::exact::{gcd_u64, parse_decimal, parse_rational, ExactError, PositiveReal};

/// Default half-width of the boundary band, in log coordinates.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

const SAMPLE_ATTEMPTS: usize = 4_000_000;
const EMPTY_PROBE_ATTEMPTS: usize = 200_000;
const OVERLAP_PROBE_POINTS: usize = 2_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("parameter `{0}` must be a positive integer")]
    NonPositiveParameter(&'static str),
    #[error("determinant ad - bc = {0} is not positive")]
    DeterminantNotPositive(i128),
    #[error("gcd of {what} is {gcd}, expected 1")]
    GcdNotOne { what: &'static str, gcd: u64 },
    #[error("Hartogs exponent gamma = {0} is below 1")]
    GammaBelowOne(String),
    #[error("family needs at least one exponent")]
    EmptyExponents,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operation is only defined for leaf families, not algebra nodes")]
    AlgebraNodeNotSupported,
    #[error("region looks empty: no sample accepted after {attempts} attempts")]
    EmptyRegionSuspected { attempts: usize },
    #[error("union operands do not overlap in {probes} probes (connectedness not certified)")]
    DisconnectedUnion { probes: usize },
    #[error("sample count must be at least 1")]
    InvalidCount,
    #[error("region is unbounded; sampling needs a bounded domain")]
    Unbounded,
    #[error("invalid dilation radius {0}")]
    InvalidRadius(f64),
    #[error("invalid box bounds: {0}")]
    InvalidBox(String),
    #[error("cannot parse domain: {0}")]
    Parse(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Tri-state membership. Callers treat `Boundary` as outside the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    Inside,
    Outside,
    Boundary,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DomainKind {
    /// `{|z1|^a < |z2|^b, |z2|^d < |z1|^c}`.
    OmegaA {
        a: u64,
        b: u64,
        c: u64,
        d: u64,
    },
    /// `{|z1|^k1 < |z2|^k2 ... |zn|^kn, |zj| < 1 (j >= 2)}`.
    Type1 {
        k: Vec<u64>,
    },
    /// `{|z1|^k1 < |z2|^k2 < ... < |zn|^kn < 1}`.
    Type2 {
        k: Vec<u64>,
    },
    /// `{|z1| < |z2|^gamma, |z2| < 1}`; `inverted` uses `|z1|^gamma < |z2|`
    /// instead, `swapped` exchanges the two coordinates.
    Hartogs {
        gamma: PositiveReal,
        inverted: bool,
        swapped: bool,
    },
    /// `radius * inner`.
    Dilated {
        inner: Box<DomainSpec>,
        radius: f64,
    },
    /// Complement of the closed radial box `lower <= |z_i| <= upper`.
    BoxComplement {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Union(Box<DomainSpec>, Box<DomainSpec>),
    Intersection(Box<DomainSpec>, Box<DomainSpec>),
    Product(Box<DomainSpec>, Box<DomainSpec>),
}

/// A validated domain description together with its dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainSpec {
    kind: DomainKind,
    dim: usize,
}

/// One strict inequality `<normal, x> < rhs` in log coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShadowRow {
    pub normal: Vec<f64>,
    pub rhs: f64,
    /// Integer normal when the row comes from rational data.
    pub integer: Option<Vec<i64>>,
}

impl ShadowRow {
    fn integer(normal: Vec<i64>) -> Self {
        Self {
            normal: normal.iter().map(|&v| v as f64).collect(),
            rhs: 0.0,
            integer: Some(normal),
        }
    }

    fn real(normal: Vec<f64>) -> Self {
        Self {
            normal,
            rhs: 0.0,
            integer: None,
        }
    }

    pub fn norm(&self) -> f64 {
        self.normal.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Signed distance to the face, positive inside; handles `x_j = -inf`.
    pub fn margin(&self, x: &[f64]) -> f64 {
        let mut finite = 0.0;
        let (mut pushes_in, mut pushes_out) = (false, false);
        for (&m, &xi) in self.normal.iter().zip(x) {
            if m == 0.0 {
                continue;
            }
            if xi == f64::NEG_INFINITY {
                if m > 0.0 {
                    pushes_in = true;
                } else {
                    pushes_out = true;
                }
            } else {
                finite += m * xi;
            }
        }
        match (pushes_in, pushes_out) {
            (true, true) => 0.0,
            (true, false) => f64::INFINITY,
            (false, true) => f64::NEG_INFINITY,
            (false, false) => (self.rhs - finite) / self.norm(),
        }
    }

    /// Uncertainty of the margin caused by a non-integer normal stored in f64.
    fn representation_slack(&self, x: &[f64]) -> f64 {
        if self.integer.is_some() {
            return 0.0;
        }
        let scale: f64 = self
            .normal
            .iter()
            .zip(x)
            .filter(|(_, xi)| xi.is_finite())
            .map(|(m, xi)| (m * xi).abs())
            .sum();
        10.0 * f64::EPSILON * (scale + self.rhs.abs()) / self.norm()
    }
}

/// The logarithmic image of a leaf's Reinhardt shadow: an open polyhedron.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogShadowPolytope {
    pub dim: usize,
    pub rows: Vec<ShadowRow>,
}

impl LogShadowPolytope {
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|r| r.margin(x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.rows.iter().all(|r| r.margin(x) > 0.0)
    }
}

/// Radial points drawn from a domain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShadowSample {
    pub points: Vec<Vec<f64>>,
    pub attempts: usize,
    pub acceptance_rate: f64,
}

impl DomainSpec {
    // ---- construction ----------------------------------------------------

    pub fn omega_a(a: u64, b: u64, c: u64, d: u64) -> Result<Self, GeometryError> {
        for (v, name) in [(a, "a"), (b, "b"), (c, "c"), (d, "d")] {
            if v == 0 {
                return Err(GeometryError::NonPositiveParameter(name));
            }
        }
        let det = a as i128 * d as i128 - b as i128 * c as i128;
        if det <= 0 {
            return Err(GeometryError::DeterminantNotPositive(det));
        }
        if gcd_u64(&[a, b]) != 1 {
            return Err(GeometryError::GcdNotOne {
                what: "(a, b)",
                gcd: gcd_u64(&[a, b]),
            });
        }
        if gcd_u64(&[c, d]) != 1 {
            return Err(GeometryError::GcdNotOne {
                what: "(c, d)",
                gcd: gcd_u64(&[c, d]),
            });
        }
        Ok(Self {
            kind: DomainKind::OmegaA { a, b, c, d },
            dim: 2,
        })
    }

    fn check_k(k: &[u64]) -> Result<(), GeometryError> {
        if k.is_empty() {
            return Err(GeometryError::EmptyExponents);
        }
        if k.contains(&0) {
            return Err(GeometryError::NonPositiveParameter("k"));
        }
        let g = gcd_u64(k);
        if g != 1 {
            return Err(GeometryError::GcdNotOne { what: "k", gcd: g });
        }
        Ok(())
    }

    pub fn type1(k: Vec<u64>) -> Result<Self, GeometryError> {
        Self::check_k(&k)?;
        let dim = k.len();
        Ok(Self {
            kind: DomainKind::Type1 { k },
            dim,
        })
    }

    pub fn type2(k: Vec<u64>) -> Result<Self, GeometryError> {
        Self::check_k(&k)?;
        let dim = k.len();
        Ok(Self {
            kind: DomainKind::Type2 { k },
            dim,
        })
    }

    /// The unit disc, as the one-dimensional type 2 polyhedron.
    pub fn disc() -> Self {
        Self {
            kind: DomainKind::Type2 { k: vec![1] },
            dim: 1,
        }
    }

    pub fn hartogs(gamma: PositiveReal) -> Result<Self, GeometryError> {
        Self::hartogs_oriented(gamma, false, false)
    }

    pub fn hartogs_oriented(
        gamma: PositiveReal,
        inverted: bool,
        swapped: bool,
    ) -> Result<Self, GeometryError> {
        if gamma.cmp_one() == std::cmp::Ordering::Less {
            return Err(GeometryError::GammaBelowOne(gamma.to_string()));
        }
        Ok(Self {
            kind: DomainKind::Hartogs {
                gamma,
                inverted,
                swapped,
            },
            dim: 2,
        })
    }

    pub fn dilated(inner: DomainSpec, radius: f64) -> Result<Self, GeometryError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(GeometryError::InvalidRadius(radius));
        }
        let dim = inner.dim;
        Ok(Self {
            kind: DomainKind::Dilated {
                inner: Box::new(inner),
                radius,
            },
            dim,
        })
    }

    pub fn box_complement(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, GeometryError> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(GeometryError::InvalidBox(
                "lower and upper need the same nonzero length".into(),
            ));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if !(l.is_finite() && u.is_finite() && *l >= 0.0 && l < u) {
                return Err(GeometryError::InvalidBox(format!(
                    "bad interval [{l}, {u}]"
                )));
            }
        }
        let dim = lower.len();
        Ok(Self {
            kind: DomainKind::BoxComplement { lower, upper },
            dim,
        })
    }

    /// Union of two overlapping domains. Overlap is certified heuristically
    /// by sampling one operand and testing membership in the other.
    pub fn union(left: DomainSpec, right: DomainSpec) -> Result<Self, GeometryError> {
        Self::same_dim(&left, &right)?;
        if !overlap_probe(&left, &right) {
            return Err(GeometryError::DisconnectedUnion {
                probes: OVERLAP_PROBE_POINTS,
            });
        }
        let dim = left.dim;
        Ok(Self {
            kind: DomainKind::Union(Box::new(left), Box::new(right)),
            dim,
        })
    }

    pub fn intersection(left: DomainSpec, right: DomainSpec) -> Result<Self, GeometryError> {
        Self::same_dim(&left, &right)?;
        let dim = left.dim;
        let node = Self {
            kind: DomainKind::Intersection(Box::new(left), Box::new(right)),
            dim,
        };
        if node.bounding_radii().is_some() {
            node.sample_shadow_with_budget(1, 0x5eed, EMPTY_PROBE_ATTEMPTS)?;
        }
        Ok(node)
    }

    pub fn product(left: DomainSpec, right: DomainSpec) -> Self {
        let dim = left.dim + right.dim;
        Self {
            kind: DomainKind::Product(Box::new(left), Box::new(right)),
            dim,
        }
    }

    fn same_dim(left: &DomainSpec, right: &DomainSpec) -> Result<(), GeometryError> {
        if left.dim != right.dim {
            return Err(GeometryError::DimensionMismatch {
                expected: left.dim,
                got: right.dim,
            });
        }
        Ok(())
    }

    // ---- accessors -------------------------------------------------------

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Leaf families are the monomial polyhedra and their dilations.
    pub fn is_leaf(&self) -> bool {
        match &self.kind {
            DomainKind::OmegaA { .. }
            | DomainKind::Type1 { .. }
            | DomainKind::Type2 { .. }
            | DomainKind::Hartogs { .. } => true,
            DomainKind::Dilated { inner, .. } => inner.is_leaf(),
            _ => false,
        }
    }

    /// Hartogs-type leaf data `(s, t, u, v)` describing
    /// `{|z_s|^u < |z_t|^v, |z_t| < 1}`; `u`, `v` are coprime integers when
    /// gamma is rational.
    pub fn hartogs_exponents(&self) -> Option<HartogsShape> {
        let DomainKind::Hartogs {
            gamma,
            inverted,
            swapped,
        } = &self.kind
        else {
            return None;
        };
        let (s, t) = if *swapped { (1, 0) } else { (0, 1) };
        let exponents = match gamma.as_fraction() {
            Some((a, b)) => {
                let (u, v) = if *inverted { (a, b) } else { (b, a) };
                HartogsExponents::Rational { u, v }
            }
            None => HartogsExponents::Irrational {
                gamma: gamma.clone(),
                gamma_on_small: *inverted,
            },
        };
        Some(HartogsShape { s, t, exponents })
    }

    // ---- shadows and membership -----------------------------------------

    /// Log-coordinate rows of a leaf family (or a dilated leaf).
    pub fn shadow_polytope(&self) -> Result<LogShadowPolytope, GeometryError> {
        let rows = match &self.kind {
            DomainKind::OmegaA { a, b, c, d } => {
                let (a, b, c, d) = (*a as i64, *b as i64, *c as i64, *d as i64);
                vec![
                    ShadowRow::integer(vec![a, -b]),
                    ShadowRow::integer(vec![-c, d]),
                ]
            }
            DomainKind::Type1 { k } => {
                let n = k.len();
                let mut first = vec![k[0] as i64];
                first.extend(k[1..].iter().map(|&v| -(v as i64)));
                let mut rows = vec![ShadowRow::integer(first)];
                for j in 1..n {
                    rows.push(ShadowRow::integer(unit(n, j)));
                }
                rows
            }
            DomainKind::Type2 { k } => {
                let n = k.len();
                let mut rows = Vec::with_capacity(n);
                for j in 0..n {
                    let mut row = vec![0i64; n];
                    row[j] = k[j] as i64;
                    if j + 1 < n {
                        row[j + 1] = -(k[j + 1] as i64);
                    }
                    rows.push(ShadowRow::integer(row));
                }
                rows
            }
            DomainKind::Hartogs { .. } => {
                let shape = self.hartogs_exponents().expect("hartogs leaf");
                let (s, t) = (shape.s, shape.t);
                let first = match &shape.exponents {
                    HartogsExponents::Rational { u, v } => {
                        let mut row = vec![0i64; 2];
                        row[s] = *u as i64;
                        row[t] = -(*v as i64);
                        ShadowRow::integer(row)
                    }
                    HartogsExponents::Irrational {
                        gamma,
                        gamma_on_small,
                    } => {
                        let g = gamma.to_f64();
                        let (u, v) = if *gamma_on_small { (g, 1.0) } else { (1.0, g) };
                        let mut row = vec![0.0; 2];
                        row[s] = u;
                        row[t] = -v;
                        ShadowRow::real(row)
                    }
                };
                vec![first, ShadowRow::integer(unit(2, t))]
            }
            DomainKind::Dilated { inner, radius } => {
                let mut poly = inner.shadow_polytope()?;
                let shift = radius.ln();
                for row in &mut poly.rows {
                    row.rhs += shift * row.normal.iter().sum::<f64>();
                }
                return Ok(poly);
            }
            _ => return Err(GeometryError::AlgebraNodeNotSupported),
        };
        Ok(LogShadowPolytope {
            dim: self.dim,
            rows,
        })
    }

    /// Convex description usable for compact-set construction: leaves,
    /// dilations, products and intersections of those.
    pub fn convex_rows(&self) -> Option<Vec<ShadowRow>> {
        match &self.kind {
            DomainKind::Product(l, r) => {
                let (lr, rr) = (l.convex_rows()?, r.convex_rows()?);
                let n = self.dim;
                let mut rows = Vec::new();
                for row in lr {
                    rows.push(pad_row(&row, 0, n));
                }
                for row in rr {
                    rows.push(pad_row(&row, l.dim, n));
                }
                Some(rows)
            }
            DomainKind::Intersection(l, r) => {
                let mut rows = l.convex_rows()?;
                rows.extend(r.convex_rows()?);
                Some(rows)
            }
            _ => self.shadow_polytope().ok().map(|p| p.rows),
        }
    }

    /// Signed log-distance to the boundary at radial point `r`
    /// (positive inside, `+inf`/`-inf` for limits at zero radii).
    pub fn log_margin(&self, r: &[f64]) -> f64 {
        let x: Vec<f64> = r.iter().map(|v| v.ln()).collect();
        self.margin_log(&x).0
    }

    /// Margin plus the representation slack that widens the boundary band.
    fn margin_log(&self, x: &[f64]) -> (f64, f64) {
        match &self.kind {
            DomainKind::Dilated { inner, radius } => {
                let shift = radius.ln();
                let y: Vec<f64> = x.iter().map(|v| v - shift).collect();
                inner.margin_log(&y)
            }
            DomainKind::BoxComplement { lower, upper } => {
                let mut best = f64::NEG_INFINITY;
                for ((&xi, &lo), &hi) in x.iter().zip(lower).zip(upper) {
                    let below = if lo > 0.0 {
                        if xi == f64::NEG_INFINITY {
                            f64::INFINITY
                        } else {
                            lo.ln() - xi
                        }
                    } else {
                        f64::NEG_INFINITY
                    };
                    let above = if xi == f64::NEG_INFINITY {
                        f64::NEG_INFINITY
                    } else {
                        xi - hi.ln()
                    };
                    best = best.max(below.max(above));
                }
                (best, 0.0)
            }
            DomainKind::Union(l, r) => {
                let (a, b) = (l.margin_log(x), r.margin_log(x));
                if a.0 >= b.0 {
                    a
                } else {
                    b
                }
            }
            DomainKind::Intersection(l, r) => {
                let (a, b) = (l.margin_log(x), r.margin_log(x));
                if a.0 <= b.0 {
                    a
                } else {
                    b
                }
            }
            DomainKind::Product(l, r) => {
                let (a, b) = (l.margin_log(&x[..l.dim]), r.margin_log(&x[l.dim..]));
                if a.0 <= b.0 {
                    a
                } else {
                    b
                }
            }
            _ => {
                let poly = self.shadow_polytope().expect("leaf family");
                let mut best = (f64::INFINITY, 0.0);
                for row in &poly.rows {
                    let m = row.margin(x);
                    if m < best.0 {
                        best = (m, row.representation_slack(x));
                    }
                }
                best
            }
        }
    }

    pub fn contains_radial_tol(&self, r: &[f64], tol: f64) -> Result<Membership, GeometryError> {
        if r.len() != self.dim {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim,
                got: r.len(),
            });
        }
        let x: Vec<f64> = r.iter().map(|v| v.abs().ln()).collect();
        let (margin, slack) = self.margin_log(&x);
        let band = tol.max(slack);
        Ok(if margin.is_nan() || margin.abs() <= band {
            Membership::Boundary
        } else if margin > 0.0 {
            Membership::Inside
        } else {
            Membership::Outside
        })
    }

    pub fn contains_radial(&self, r: &[f64]) -> Result<Membership, GeometryError> {
        self.contains_radial_tol(r, DEFAULT_TOLERANCE)
    }

    pub fn contains_point_tol(
        &self,
        z: &[Complex64],
        tol: f64,
    ) -> Result<Membership, GeometryError> {
        let r: Vec<f64> = z.iter().map(|c| c.norm()).collect();
        self.contains_radial_tol(&r, tol)
    }

    pub fn contains_point(&self, z: &[Complex64]) -> Result<Membership, GeometryError> {
        self.contains_point_tol(z, DEFAULT_TOLERANCE)
    }

    // ---- sampling ----------------------------------------------------------

    /// Per-coordinate radius of a polydisc containing the domain, if bounded.
    pub fn bounding_radii(&self) -> Option<Vec<f64>> {
        match &self.kind {
            DomainKind::OmegaA { .. } | DomainKind::Type1 { .. } | DomainKind::Type2 { .. } => {
                Some(vec![1.0; self.dim])
            }
            DomainKind::Hartogs { .. } => Some(vec![1.0; 2]),
            DomainKind::Dilated { inner, radius } => inner
                .bounding_radii()
                .map(|v| v.into_iter().map(|x| x * radius).collect()),
            DomainKind::BoxComplement { .. } => None,
            DomainKind::Union(l, r) => {
                let (a, b) = (l.bounding_radii()?, r.bounding_radii()?);
                Some(a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect())
            }
            DomainKind::Intersection(l, r) => match (l.bounding_radii(), r.bounding_radii()) {
                (Some(a), Some(b)) => Some(a.iter().zip(&b).map(|(x, y)| x.min(*y)).collect()),
                (Some(a), None) | (None, Some(a)) => Some(a),
                (None, None) => None,
            },
            DomainKind::Product(l, r) => {
                let mut a = l.bounding_radii()?;
                a.extend(r.bounding_radii()?);
                Some(a)
            }
        }
    }

    /// Draw `count` radial points uniformly (by volume) from the domain by
    /// rejection from its bounding polydisc. Deterministic per `seed`.
    pub fn sample_shadow(&self, count: usize, seed: u64) -> Result<ShadowSample, GeometryError> {
        self.sample_shadow_with_budget(count, seed, SAMPLE_ATTEMPTS)
    }

    pub fn sample_shadow_with_budget(
        &self,
        count: usize,
        seed: u64,
        budget: usize,
    ) -> Result<ShadowSample, GeometryError> {
        if count == 0 {
            return Err(GeometryError::InvalidCount);
        }
        let radii = self.bounding_radii().ok_or(GeometryError::Unbounded)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = Vec::with_capacity(count);
        let mut attempts = 0;
        let mut r = vec![0.0; self.dim];
        while points.len() < count && attempts < budget {
            attempts += 1;
            for (ri, big) in r.iter_mut().zip(&radii) {
                *ri = big * rng.random::<f64>().sqrt();
            }
            if self.contains_radial(&r)? == Membership::Inside {
                points.push(r.clone());
            }
            if attempts == EMPTY_PROBE_ATTEMPTS.min(budget) && points.is_empty() {
                return Err(GeometryError::EmptyRegionSuspected { attempts });
            }
        }
        if points.len() < count {
            return Err(GeometryError::EmptyRegionSuspected { attempts });
        }
        Ok(ShadowSample {
            acceptance_rate: points.len() as f64 / attempts as f64,
            points,
            attempts,
        })
    }

    // ---- intersections reducible to a leaf -----------------------------------

    /// Recognise an intersection of two planar leaves whose combined
    /// constraints collapse to an `Omega_A` polyhedron (as for a pair of
    /// opposite Hartogs-type domains). Returns `None` otherwise.
    pub fn reduce_intersection(&self) -> Option<DomainSpec> {
        let DomainKind::Intersection(l, r) = &self.kind else {
            return None;
        };
        if self.dim != 2 {
            return None;
        }
        let rows: Vec<Vec<i64>> = l
            .shadow_polytope()
            .ok()?
            .rows
            .into_iter()
            .chain(r.shadow_polytope().ok()?.rows)
            .map(|row| if row.rhs == 0.0 { row.integer } else { None })
            .collect::<Option<_>>()?;
        for (i, first) in rows.iter().enumerate() {
            for (j, second) in rows.iter().enumerate() {
                if i == j {
                    continue;
                }
                let (a, b, c, d) = (first[0], -first[1], -second[0], second[1]);
                if a <= 0 || b <= 0 || c <= 0 || d <= 0 || a * d - b * c <= 0 {
                    continue;
                }
                // Extreme rays of the candidate cone; every other row must be
                // non-positive on both for the pair to describe the intersection.
                let rays = [[-b, -a], [-d, -c]];
                let implied = rows.iter().all(|row| {
                    rays.iter()
                        .all(|ray| row[0] * ray[0] + row[1] * ray[1] <= 0)
                });
                if implied {
                    let g1 = gcd_u64(&[a as u64, b as u64]);
                    let g2 = gcd_u64(&[c as u64, d as u64]);
                    let (a, b, c, d) = (a as u64 / g1, b as u64 / g1, c as u64 / g2, d as u64 / g2);
                    return DomainSpec::omega_a(a, b, c, d).ok();
                }
            }
        }
        None
    }

    // ---- JSON ------------------------------------------------------------------

    pub fn to_json(&self) -> Value {
        match &self.kind {
            DomainKind::OmegaA { a, b, c, d } => {
                json!({"family": "omega_a", "a": a, "b": b, "c": c, "d": d})
            }
            DomainKind::Type1 { k } => json!({"family": "type1", "k": k}),
            DomainKind::Type2 { k } => json!({"family": "type2", "k": k}),
            DomainKind::Hartogs {
                gamma,
                inverted,
                swapped,
            } => {
                let mut v = json!({"family": "hartogs", "gamma": gamma.to_json_string()});
                if !gamma.is_rational() {
                    v["irrational"] = json!(true);
                }
                if *inverted {
                    v["inverted"] = json!(true);
                }
                if *swapped {
                    v["swapped"] = json!(true);
                }
                v
            }
            DomainKind::Dilated { inner, radius } => {
                json!({"op": "dilate", "radius": radius, "inner": inner.to_json()})
            }
            DomainKind::BoxComplement { lower, upper } => {
                json!({"family": "box_complement", "lower": lower, "upper": upper})
            }
            DomainKind::Union(l, r) => {
                json!({"op": "union", "left": l.to_json(), "right": r.to_json()})
            }
            DomainKind::Intersection(l, r) => {
                json!({"op": "intersection", "left": l.to_json(), "right": r.to_json()})
            }
            DomainKind::Product(l, r) => {
                json!({"op": "product", "left": l.to_json(), "right": r.to_json()})
            }
        }
    }

    pub fn from_json(v: &Value) -> Result<Self, GeometryError> {
        let err = |m: &str| GeometryError::Parse(m.to_string());
        if let Some(op) = v.get("op").and_then(Value::as_str) {
            let child = |key: &str| -> Result<DomainSpec, GeometryError> {
                DomainSpec::from_json(v.get(key).ok_or_else(|| err(&format!("missing `{key}`")))?)
            };
            return match op {
                "union" => DomainSpec::union(child("left")?, child("right")?),
                "intersection" => DomainSpec::intersection(child("left")?, child("right")?),
                "product" => Ok(DomainSpec::product(child("left")?, child("right")?)),
                "dilate" => {
                    let radius = v
                        .get("radius")
                        .and_then(Value::as_f64)
                        .ok_or_else(|| err("missing `radius`"))?;
                    DomainSpec::dilated(child("inner")?, radius)
                }
                other => Err(err(&format!("unknown op `{other}`"))),
            };
        }
        let family = v
            .get("family")
            .and_then(Value::as_str)
            .ok_or_else(|| err("missing `family` or `op`"))?;
        let uint = |key: &'static str| -> Result<u64, GeometryError> {
            match v.get(key) {
                Some(x) => match x.as_u64() {
                    Some(0) | None if x.as_i64().is_some_and(|i| i <= 0) => {
                        Err(GeometryError::NonPositiveParameter(key))
                    }
                    Some(u) => Ok(u),
                    None => Err(err(&format!("`{key}` must be an integer"))),
                },
                None => Err(err(&format!("missing `{key}`"))),
            }
        };
        let uvec = |key: &'static str| -> Result<Vec<u64>, GeometryError> {
            let arr = v
                .get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| err(&format!("missing `{key}`")))?;
            arr.iter()
                .map(|x| match x.as_u64() {
                    Some(u) => Ok(u),
                    None if x.as_i64().is_some() => Err(GeometryError::NonPositiveParameter("k")),
                    None => Err(err("k entries must be integers")),
                })
                .collect()
        };
        let fvec = |key: &str| -> Result<Vec<f64>, GeometryError> {
            let arr = v
                .get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| err(&format!("missing `{key}`")))?;
            arr.iter()
                .map(|x| x.as_f64().ok_or_else(|| err("expected numbers")))
                .collect()
        };
        match family {
            "omega_a" => DomainSpec::omega_a(uint("a")?, uint("b")?, uint("c")?, uint("d")?),
            "type1" => DomainSpec::type1(uvec("k")?),
            "type2" => DomainSpec::type2(uvec("k")?),
            "disc" => Ok(DomainSpec::disc()),
            "hartogs" => {
                let irrational = v
                    .get("irrational")
                    .and_then(Value::as_bool)
                    .unwrap_or(false);
                let gamma = match v.get("gamma") {
                    Some(Value::String(s)) => parse_gamma(s, irrational)?,
                    Some(Value::Number(n)) if n.as_u64().is_some() && !irrational => {
                        PositiveReal::rational(n.as_u64().unwrap(), 1)?
                    }
                    _ => return Err(err("`gamma` must be a string `num/den` or decimal")),
                };
                let flag = |key: &str| v.get(key).and_then(Value::as_bool).unwrap_or(false);
                DomainSpec::hartogs_oriented(gamma, flag("inverted"), flag("swapped"))
            }
            "box_complement" => DomainSpec::box_complement(fvec("lower")?, fvec("upper")?),
            other => Err(err(&format!("unknown family `{other}`"))),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self, GeometryError> {
        let v: Value = serde_json::from_str(s).map_err(|e| GeometryError::Parse(e.to_string()))?;
        Self::from_json(&v)
    }

    /// Parse either JSON or the inline shorthand, e.g. `omega_a:1,1,1,2`,
    /// `hartogs(3/2,inverted)`, `product(disc,disc)`, `dilate(disc,0.5)`.
    pub fn parse(s: &str) -> Result<Self, GeometryError> {
        let t = s.trim();
        if t.starts_with('{') {
            return Self::from_json_str(t);
        }
        parse_shorthand(t)
    }
}

/// Which side carries the exponent of a Hartogs-type leaf.
#[derive(Clone, Debug, PartialEq)]
pub enum HartogsExponents {
    /// `|z_s|^u < |z_t|^v` with coprime integers.
    Rational { u: u64, v: u64 },
    /// `|z_s| < |z_t|^gamma`, or `|z_s|^gamma < |z_t|` when `gamma_on_small`.
    Irrational {
        gamma: PositiveReal,
        gamma_on_small: bool,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct HartogsShape {
    /// Coordinate that may vanish inside the domain.
    pub s: usize,
    /// Coordinate bounded by one.
    pub t: usize,
    pub exponents: HartogsExponents,
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DomainKind::OmegaA { a, b, c, d } => write!(f, "omega_a({a},{b},{c},{d})"),
            DomainKind::Type1 { k } => write!(f, "type1({})", join(k)),
            DomainKind::Type2 { k } if k == &[1] => write!(f, "disc"),
            DomainKind::Type2 { k } => write!(f, "type2({})", join(k)),
            DomainKind::Hartogs {
                gamma,
                inverted,
                swapped,
            } => {
                write!(f, "hartogs({gamma}")?;
                if *inverted {
                    write!(f, ",inverted")?;
                }
                if *swapped {
                    write!(f, ",swapped")?;
                }
                write!(f, ")")
            }
            DomainKind::Dilated { inner, radius } => write!(f, "dilate({inner},{radius})"),
            DomainKind::BoxComplement { lower, upper } => {
                write!(f, "box_complement({lower:?},{upper:?})")
            }
            DomainKind::Union(l, r) => write!(f, "union({l},{r})"),
            DomainKind::Intersection(l, r) => write!(f, "intersection({l},{r})"),
            DomainKind::Product(l, r) => write!(f, "product({l},{r})"),
        }
    }
}

impl Serialize for DomainSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DomainSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(deserializer)?;
        DomainSpec::from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// Componentwise `s_i^(1/q) * t_i^((q-1)/q)`.
pub fn geometric_mean_shadow(s: &[f64], t: &[f64], q: f64) -> Vec<f64> {
    let (a, b) = (1.0 / q, (q - 1.0) / q);
    s.iter()
        .zip(t)
        .map(|(&si, &ti)| {
            if b == 0.0 {
                si
            } else {
                si.powf(a) * ti.powf(b)
            }
        })
        .collect()
}

/// A compact subset of a convex-shadow domain: points whose log-margin is at
/// least `delta` and whose radii are at least `floor`.
#[derive(Clone, Debug)]
pub struct CompactSet {
    pub dim: usize,
    /// Closed constraints `<normal, x> <= rhs` in log coordinates.
    pub rows: Vec<ShadowRow>,
    pub delta: f64,
}

impl CompactSet {
    pub fn with_margin(domain: &DomainSpec, delta: f64, floor: f64) -> Result<Self, GeometryError> {
        let base = domain
            .convex_rows()
            .ok_or(GeometryError::AlgebraNodeNotSupported)?;
        let n = domain.dim();
        let mut rows: Vec<ShadowRow> = base
            .into_iter()
            .map(|mut r| {
                r.rhs -= delta * r.norm();
                r
            })
            .collect();
        for i in 0..n {
            let mut normal = vec![0.0; n];
            normal[i] = -1.0;
            rows.push(ShadowRow {
                normal,
                rhs: -floor.ln(),
                integer: None,
            });
        }
        Ok(Self {
            dim: n,
            rows,
            delta,
        })
    }

    /// A single radial point (the set shrunk to one orbit).
    pub fn point(r: &[f64]) -> Self {
        let n = r.len();
        let mut rows = Vec::new();
        for (i, ri) in r.iter().enumerate() {
            let mut up = vec![0.0; n];
            up[i] = 1.0;
            rows.push(ShadowRow {
                normal: up.clone(),
                rhs: ri.ln(),
                integer: None,
            });
            up[i] = -1.0;
            rows.push(ShadowRow {
                normal: up,
                rhs: -ri.ln(),
                integer: None,
            });
        }
        Self {
            dim: n,
            rows,
            delta: 0.0,
        }
    }

    pub fn contains_log(&self, x: &[f64]) -> bool {
        self.rows
            .iter()
            .all(|r| r.normal.iter().zip(x).map(|(m, v)| m * v).sum::<f64>() <= r.rhs + 1e-9)
    }

    /// Vertices of the log-shadow, as radial points.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let n = self.dim;
        let mut out: Vec<Vec<f64>> = Vec::new();
        for combo in combinations(self.rows.len(), n) {
            let a: Vec<Vec<f64>> = combo.iter().map(|&i| self.rows[i].normal.clone()).collect();
            let b: Vec<f64> = combo.iter().map(|&i| self.rows[i].rhs).collect();
            if let Some(x) = solve_linear(a, b) {
                if self.contains_log(&x)
                    && !out
                        .iter()
                        .any(|y| y.iter().zip(&x).all(|(p, q)| (p - q).abs() < 1e-9))
                {
                    out.push(x);
                }
            }
        }
        out.into_iter()
            .map(|x| x.into_iter().map(f64::exp).collect())
            .collect()
    }

    /// Seeded interior points (rejection inside the vertex bounding box).
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let verts = self.vertices();
        if verts.is_empty() {
            return Vec::new();
        }
        let n = self.dim;
        let lo: Vec<f64> = (0..n)
            .map(|i| {
                verts
                    .iter()
                    .map(|v| v[i].ln())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let hi: Vec<f64> = (0..n)
            .map(|i| {
                verts
                    .iter()
                    .map(|v| v[i].ln())
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0;
        while out.len() < count && attempts < 1_000_000 {
            attempts += 1;
            let x: Vec<f64> = (0..n)
                .map(|i| lo[i] + (hi[i] - lo[i]) * rng.random::<f64>())
                .collect();
            if self.contains_log(&x) {
                out.push(x.into_iter().map(f64::exp).collect());
            }
        }
        out
    }
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, k, &mut Vec::new(), &mut out);
    out
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

fn unit(n: usize, j: usize) -> Vec<i64> {
    let mut v = vec![0i64; n];
    v[j] = 1;
    v
}

fn pad_row(row: &ShadowRow, offset: usize, n: usize) -> ShadowRow {
    let mut normal = vec![0.0; n];
    normal[offset..offset + row.normal.len()].copy_from_slice(&row.normal);
    let integer = row.integer.as_ref().map(|v| {
        let mut w = vec![0i64; n];
        w[offset..offset + v.len()].copy_from_slice(v);
        w
    });
    ShadowRow {
        normal,
        rhs: row.rhs,
        integer,
    }
}

fn join(k: &[u64]) -> String {
    k.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn overlap_probe(left: &DomainSpec, right: &DomainSpec) -> bool {
    let try_side = |a: &DomainSpec, b: &DomainSpec| -> Option<bool> {
        a.bounding_radii()?;
        let sample = a
            .sample_shadow_with_budget(OVERLAP_PROBE_POINTS, 0x0b1a, SAMPLE_ATTEMPTS)
            .ok()?;
        Some(
            sample
                .points
                .iter()
                .any(|p| b.contains_radial(p) == Ok(Membership::Inside)),
        )
    };
    match try_side(left, right) {
        Some(true) => true,
        _ => try_side(right, left).unwrap_or(false),
    }
}

fn parse_gamma(s: &str, irrational: bool) -> Result<PositiveReal, GeometryError> {
    let t = s.trim();
    if let Some(inner) = t.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
        let n: u64 = inner
            .trim()
            .parse()
            .map_err(|_| GeometryError::Parse(format!("bad sqrt argument `{inner}`")))?;
        return Ok(PositiveReal::sqrt_of(n)?);
    }
    if irrational {
        return Ok(PositiveReal::irrational_decimal(t)?);
    }
    match parse_rational(t) {
        Ok(r) => Ok(PositiveReal::from_rational(&r)?),
        Err(ExactError::DecimalNotExact(_)) => {
            let (r, _) = parse_decimal(t)?;
            Ok(PositiveReal::from_rational(&r)?)
        }
        Err(e) => Err(e.into()),
    }
}

const FAMILY_NAMES: [&str; 10] = [
    "omega_a",
    "type1",
    "type2",
    "disc",
    "hartogs",
    "box_complement",
    "union",
    "intersection",
    "product",
    "dilate",
];

fn starts_item(token: &str) -> bool {
    FAMILY_NAMES.iter().any(|name| {
        token
            .strip_prefix(name)
            .is_some_and(|rest| rest.is_empty() || rest.starts_with(':') || rest.starts_with('('))
    })
}

/// Split on depth-0 commas, gluing argument tokens back onto the item they belong to.
fn split_items(s: &str) -> Vec<String> {
    let mut raw = Vec::new();
    let (mut depth, mut cur) = (0i32, String::new());
    for ch in s.chars() {
        match ch {
            '(' | '[' => {
                depth += 1;
                cur.push(ch)
            }
            ')' | ']' => {
                depth -= 1;
                cur.push(ch)
            }
            ',' if depth == 0 => raw.push(std::mem::take(&mut cur)),
            _ => cur.push(ch),
        }
    }
    raw.push(cur);
    let mut items: Vec<String> = Vec::new();
    for tok in raw {
        let t = tok.trim().to_string();
        if items.is_empty() || starts_item(&t) {
            items.push(t);
        } else {
            let last = items.last_mut().unwrap();
            last.push(',');
            last.push_str(&t);
        }
    }
    items
}

fn parse_shorthand(s: &str) -> Result<DomainSpec, GeometryError> {
    let perr = |m: String| GeometryError::Parse(m);
    let (name, raw) = match (s.find('('), s.find(':')) {
        (Some(open), colon) if colon.is_none_or(|c| c > open) => {
            let inner = s[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| perr(format!("unbalanced `{s}`")))?;
            (s[..open].trim(), inner)
        }
        (_, Some(colon)) => (s[..colon].trim(), &s[colon + 1..]),
        _ => (s.trim(), ""),
    };
    let args: Vec<String> = if matches!(name, "union" | "intersection" | "product" | "dilate") {
        split_items(raw)
    } else {
        raw.split(',')
            .map(|x| x.trim().to_string())
            .filter(|x| !x.is_empty())
            .collect()
    };
    let ints = |args: &[String]| -> Result<Vec<u64>, GeometryError> {
        args.iter()
            .map(|a| match a.trim().parse::<i64>() {
                Ok(v) if v > 0 => Ok(v as u64),
                Ok(_) => Err(GeometryError::NonPositiveParameter("k")),
                Err(_) => Err(perr(format!("expected integer, got `{a}`"))),
            })
            .collect()
    };
    let two = |args: &[String]| -> Result<(DomainSpec, DomainSpec), GeometryError> {
        if args.len() != 2 {
            return Err(perr(format!("`{name}` takes two operands")));
        }
        Ok((parse_shorthand(&args[0])?, parse_shorthand(&args[1])?))
    };
    match name {
        "omega_a" => {
            let v = ints(&args)?;
            if v.len() != 4 {
                return Err(perr("omega_a takes a,b,c,d".into()));
            }
            DomainSpec::omega_a(v[0], v[1], v[2], v[3])
        }
        "type1" => DomainSpec::type1(ints(&args)?),
        "type2" => DomainSpec::type2(ints(&args)?),
        "disc" => Ok(DomainSpec::disc()),
        "hartogs" => {
            let first = args
                .first()
                .ok_or_else(|| perr("hartogs needs gamma".into()))?;
            let flags: Vec<&str> = args[1..].iter().map(|a| a.trim()).collect();
            let irrational = flags.contains(&"irrational");
            let gamma = parse_gamma(first, irrational)?;
            DomainSpec::hartogs_oriented(
                gamma,
                flags.contains(&"inverted"),
                flags.contains(&"swapped"),
            )
        }
        "union" => {
            let (l, r) = two(&args)?;
            DomainSpec::union(l, r)
        }
        "intersection" => {
            let (l, r) = two(&args)?;
            DomainSpec::intersection(l, r)
        }
        "product" => {
            let (l, r) = two(&args)?;
            Ok(DomainSpec::product(l, r))
        }
        "dilate" => {
            if args.len() != 2 {
                return Err(perr("dilate takes a domain and a radius".into()));
            }
            let radius: f64 = args[1]
                .trim()
                .parse()
                .map_err(|_| perr(format!("bad radius `{}`", args[1])))?;
            DomainSpec::dilated(parse_shorthand(&args[0])?, radius)
        }
        other => Err(perr(format!("unknown family `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn build_domain_validation() {
        let d = DomainSpec::omega_a(1, 1, 1, 2).unwrap();
        assert_eq!(d.dim(), 2);
        assert_eq!(
            DomainSpec::omega_a(1, 2, 2, 1),
            Err(GeometryError::DeterminantNotPositive(-3))
        );
        assert_eq!(
            DomainSpec::type1(vec![2, 4]),
            Err(GeometryError::GcdNotOne { what: "k", gcd: 2 })
        );
        assert_eq!(
            DomainSpec::omega_a(0, 1, 1, 2),
            Err(GeometryError::NonPositiveParameter("a"))
        );
        assert_eq!(
            DomainSpec::omega_a(2, 4, 1, 3),
            Err(GeometryError::GcdNotOne {
                what: "(a, b)",
                gcd: 2
            })
        );
        let half = PositiveReal::rational(1, 2).unwrap();
        assert!(matches!(
            DomainSpec::hartogs(half),
            Err(GeometryError::GammaBelowOne(_))
        ));
    }

    #[test]
    fn hartogs_membership_examples() {
        let h = DomainSpec::hartogs(PositiveReal::rational(1, 1).unwrap()).unwrap();
        assert_eq!(
            h.contains_point(&[c(0.2), c(0.5)]).unwrap(),
            Membership::Inside
        );
        assert_eq!(
            h.contains_point(&[c(0.5), c(0.5)]).unwrap(),
            Membership::Boundary
        );
        assert_eq!(
            h.contains_point(&[c(0.6), c(0.5)]).unwrap(),
            Membership::Outside
        );
        assert_eq!(
            h.contains_point(&[c(0.0), c(0.5)]).unwrap(),
            Membership::Inside
        );
        assert_eq!(
            h.contains_point(&[c(0.0), c(0.0)]).unwrap(),
            Membership::Boundary
        );
        assert!(matches!(
            h.contains_point(&[c(0.1)]),
            Err(GeometryError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn omega_a_membership_example() {
        let d = DomainSpec::omega_a(1, 1, 1, 2).unwrap();
        assert_eq!(
            d.contains_point(&[c(0.5), c(0.6)]).unwrap(),
            Membership::Inside
        );
        // Omega_A meets neither coordinate axis.
        assert_eq!(
            d.contains_point(&[c(0.0), c(0.6)]).unwrap(),
            Membership::Outside
        );
    }

    #[test]
    fn type1_contains_z1_zero_slice() {
        let d = DomainSpec::type1(vec![1, 1, 1]).unwrap();
        assert_eq!(
            d.contains_point(&[c(0.0), c(0.5), c(0.5)]).unwrap(),
            Membership::Inside
        );
        assert_eq!(
            d.contains_point(&[c(0.3), c(0.0), c(0.5)]).unwrap(),
            Membership::Outside
        );
    }

    #[test]
    fn shadow_rows_match_defining_inequalities() {
        let h = DomainSpec::hartogs(PositiveReal::rational(1, 1).unwrap()).unwrap();
        let rows: Vec<_> = h
            .shadow_polytope()
            .unwrap()
            .rows
            .into_iter()
            .map(|r| r.integer.unwrap())
            .collect();
        assert_eq!(rows, vec![vec![1, -1], vec![0, 1]]);
        let a = DomainSpec::omega_a(1, 1, 1, 2).unwrap();
        let rows: Vec<_> = a
            .shadow_polytope()
            .unwrap()
            .rows
            .into_iter()
            .map(|r| r.integer.unwrap())
            .collect();
        assert_eq!(rows, vec![vec![1, -1], vec![-1, 2]]);
        let t = DomainSpec::type2(vec![1, 1, 1]).unwrap();
        let rows: Vec<_> = t
            .shadow_polytope()
            .unwrap()
            .rows
            .into_iter()
            .map(|r| r.integer.unwrap())
            .collect();
        assert_eq!(rows, vec![vec![1, -1, 0], vec![0, 1, -1], vec![0, 0, 1]]);
        let u = DomainSpec::product(DomainSpec::disc(), DomainSpec::disc());
        assert_eq!(
            u.shadow_polytope(),
            Err(GeometryError::AlgebraNodeNotSupported)
        );
    }

    #[test]
    fn sampling_is_deterministic_and_inside() {
        let h = DomainSpec::hartogs(PositiveReal::rational(1, 1).unwrap()).unwrap();
        let a = h.sample_shadow(100, 7).unwrap();
        let b = h.sample_shadow(100, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.points.len(), 100);
        assert!(a.points.iter().all(|r| r[0] < r[1] && r[1] < 1.0));
        assert!(a.acceptance_rate > 0.0 && a.acceptance_rate <= 1.0);
        assert_eq!(h.sample_shadow(0, 7), Err(GeometryError::InvalidCount));
    }

    #[test]
    fn intersection_of_opposite_hartogs_samples_both() {
        let two = PositiveReal::rational(2, 1).unwrap();
        let o1 = DomainSpec::hartogs_oriented(two.clone(), true, false).unwrap();
        let o2 = DomainSpec::hartogs_oriented(two, true, true).unwrap();
        let cap = DomainSpec::intersection(o1.clone(), o2.clone()).unwrap();
        let s = cap.sample_shadow(50, 3).unwrap();
        for p in &s.points {
            assert_eq!(o1.contains_radial(p).unwrap(), Membership::Inside);
            assert_eq!(o2.contains_radial(p).unwrap(), Membership::Inside);
        }
        assert_eq!(
            cap.reduce_intersection(),
            Some(DomainSpec::omega_a(2, 1, 1, 2).unwrap())
        );
    }

    #[test]
    fn disjoint_union_is_rejected() {
        let small = DomainSpec::dilated(DomainSpec::disc(), 0.2).unwrap();
        let ring = DomainSpec::intersection(
            DomainSpec::dilated(DomainSpec::disc(), 0.9).unwrap(),
            DomainSpec::box_complement(vec![0.0], vec![0.5]).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            DomainSpec::union(small, ring),
            Err(GeometryError::DisconnectedUnion { .. })
        ));
    }

    #[test]
    fn geometric_mean_examples() {
        let same = geometric_mean_shadow(&[0.3, 0.4], &[0.3, 0.4], 2.5);
        assert!((same[0] - 0.3).abs() < 1e-15 && (same[1] - 0.4).abs() < 1e-15);
        assert_eq!(
            geometric_mean_shadow(&[0.3, 0.4], &[0.9, 0.1], 1.0),
            vec![0.3, 0.4]
        );
        let m = geometric_mean_shadow(&[0.25, 0.25], &[1.0, 1.0], 2.0);
        assert!((m[0] - 0.5).abs() < 1e-15 && (m[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip_and_shorthand() {
        let v = json!({"family":"omega_a","a":1,"b":1,"c":1,"d":2});
        let d = DomainSpec::from_json(&v).unwrap();
        assert_eq!(d.to_json(), v);
        let h = DomainSpec::from_json(&json!({"family":"hartogs","gamma":"3/2"})).unwrap();
        assert_eq!(h.to_json()["gamma"], "3/2");
        let irr = DomainSpec::from_json(
            &json!({"family":"hartogs","gamma":"1.4142135623730950488016887242096980785696","irrational":true}),
        )
        .unwrap();
        assert_eq!(irr.to_json()["irrational"], true);
        let p = DomainSpec::parse("product(omega_a:1,1,1,2,disc)").unwrap();
        assert_eq!(p.dim(), 3);
        let q = DomainSpec::parse("intersection(hartogs(2,inverted),hartogs(2,inverted,swapped))")
            .unwrap();
        assert_eq!(
            q.reduce_intersection(),
            Some(DomainSpec::omega_a(2, 1, 1, 2).unwrap())
        );
        assert!(DomainSpec::parse("hartogs:sqrt(2)").is_ok());
        assert_eq!(
            DomainSpec::parse("type1:2,4"),
            Err(GeometryError::GcdNotOne { what: "k", gcd: 2 })
        );
        let s = serde_json::to_string(&p).unwrap();
        let back: DomainSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn compact_set_vertices_respect_margin() {
        let h = DomainSpec::hartogs(PositiveReal::rational(1, 1).unwrap()).unwrap();
        let k = CompactSet::with_margin(&h, 0.5, 0.05).unwrap();
        let v = k.vertices();
        assert_eq!(v.len(), 3);
        for r in &v {
            assert!(h.log_margin(r) >= 0.5 - 1e-9);
        }
        let pts = k.sample(20, 1);
        assert_eq!(pts.len(), 20);
        assert!(pts.iter().all(|r| h.log_margin(r) >= 0.5 - 1e-9));
    }
}
