//! Closed-form `||e_alpha||_p^p` for each family, and an independent
//! quadrature oracle that decides integrability by an epsilon-cutoff ladder.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::exact::{format_rational, rational_to_f64, ExactError, Exponent};
use crate::geometry::{DomainKind, DomainSpec, GeometryError, HartogsExponents, Membership};
use crate::indexsets::{conditions_for, AllowabilityConditions, IndexError, MultiIndex};
use crate::quadrature::Tolerance;
use crate::region::SignedRegion;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NormError {
    #[error("closed forms exist only for leaf families and products of them")]
    AlgebraNodeNotSupported,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(
        "finiteness of the norm of {alpha} at p = {p} is within the representation error of gamma"
    )]
    BoundaryUndecidable { alpha: MultiIndex, p: String },
    #[error("quadrature budget exhausted: error {achieved:e} above target {target:e}")]
    ToleranceNotReached { achieved: f64, target: f64 },
    #[error("relative tolerance {0} outside (1e-12, 1e-2)")]
    InvalidTolerance(f64),
    #[error("p = {0} must be a finite real >= 1")]
    InvalidExponent(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// `coefficient * pi^pi_power`, with an exact rational coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactNorm {
    pub pi_power: u32,
    pub coefficient: BigRational,
}

impl ExactNorm {
    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.coefficient) * PI.powi(self.pi_power as i32)
    }

    fn times(&self, other: &ExactNorm) -> ExactNorm {
        ExactNorm {
            pi_power: self.pi_power + other.pi_power,
            coefficient: &self.coefficient * &other.coefficient,
        }
    }
}

impl fmt::Display for ExactNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = if self.coefficient.is_integer() {
            self.coefficient.numer().to_string()
        } else {
            format_rational(&self.coefficient)
        };
        match self.pi_power {
            0 => write!(f, "{c}"),
            1 => write!(f, "pi * {c}"),
            k => write!(f, "pi^{k} * {c}"),
        }
    }
}

/// `||e_alpha||_p^p`: the p-th power of the norm.
#[derive(Clone, Debug, PartialEq)]
pub enum NormValue {
    Finite {
        value: f64,
        exact: Option<ExactNorm>,
    },
    Infinite,
}

impl NormValue {
    fn from_exact(exact: ExactNorm) -> Self {
        Self::Finite {
            value: exact.to_f64(),
            exact: Some(exact),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite { .. })
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Finite { value, .. } => Some(*value),
            Self::Infinite => None,
        }
    }

    pub fn exact(&self) -> Option<&ExactNorm> {
        match self {
            Self::Finite { exact, .. } => exact.as_ref(),
            Self::Infinite => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Self::Finite {
                value,
                exact: Some(e),
            } => json!({"finite": true, "value": value, "exact": e.to_string()}),
            Self::Finite { value, exact: None } => json!({"finite": true, "value": value}),
            Self::Infinite => json!({"finite": false}),
        }
    }

    /// Product of two norms (Fubini on a product domain).
    pub fn times(&self, other: &NormValue) -> NormValue {
        match (self, other) {
            (
                Self::Finite {
                    value: a,
                    exact: ea,
                },
                Self::Finite {
                    value: b,
                    exact: eb,
                },
            ) => {
                let exact = match (ea, eb) {
                    (Some(x), Some(y)) => Some(x.times(y)),
                    _ => None,
                };
                Self::Finite {
                    value: a * b,
                    exact,
                }
            }
            _ => Self::Infinite,
        }
    }
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// `2^n * numerator / prod(factors)`, or `Infinite` when a factor is not positive.
fn reciprocal_product(n: u32, numerator: BigRational, factors: &[BigRational]) -> NormValue {
    if factors.iter().any(|f| !f.is_positive()) {
        return NormValue::Infinite;
    }
    let denominator = factors.iter().fold(BigRational::one(), |acc, f| acc * f);
    let coefficient = numerator * int(1 << n) / denominator;
    NormValue::from_exact(ExactNorm {
        pi_power: n,
        coefficient,
    })
}

/// `||e_alpha||_p^p` on a leaf family (and on products, dilations and
/// intersections that reduce to a leaf).
pub fn closed_form_norm_p(
    d: &DomainSpec,
    alpha: &MultiIndex,
    p: &Exponent,
) -> Result<NormValue, NormError> {
    if alpha.dim() != d.dim() {
        return Err(NormError::DimensionMismatch {
            expected: d.dim(),
            got: alpha.dim(),
        });
    }
    let a = alpha.as_slice();
    let n = d.dim() as u32;
    let norm = match d.kind() {
        DomainKind::OmegaA { a: ea, b, c, d: dd } => {
            let (ea, b, c, dd) = (*ea as i64, *b as i64, *c as i64, *dd as i64);
            let f1 = p.affine(b * a[0] + ea * a[1], 2 * (ea + b));
            let f2 = p.affine(dd * a[0] + c * a[1], 2 * (c + dd));
            reciprocal_product(2, int(ea * dd - b * c), &[f1, f2])
        }
        DomainKind::Type1 { k } => {
            if a[0] < 0 {
                return Ok(NormValue::Infinite);
            }
            let k: Vec<i64> = k.iter().map(|&v| v as i64).collect();
            let mut factors = vec![p.affine(a[0], 2)];
            for j in 1..k.len() {
                factors.push(p.affine(k[j] * a[0] + k[0] * a[j], 2 * (k[0] + k[j])));
            }
            reciprocal_product(n, int(k[0]).pow(n as i32 - 1), &factors)
        }
        DomainKind::Type2 { k } => {
            if a[0] < 0 {
                return Ok(NormValue::Infinite);
            }
            let factors: Vec<BigRational> = (0..k.len())
                .map(|i| {
                    (0..=i).fold(BigRational::zero(), |acc, j| {
                        acc + BigRational::new(BigInt::from(k[i]), BigInt::from(k[j]))
                            * p.affine(a[j], 2)
                    })
                })
                .collect();
            reciprocal_product(n, BigRational::one(), &factors)
        }
        DomainKind::Hartogs { .. } => {
            let shape = d.hartogs_exponents().expect("hartogs leaf");
            let (s, t) = (shape.s, shape.t);
            if a[s] < 0 {
                return Ok(NormValue::Infinite);
            }
            match shape.exponents {
                HartogsExponents::Rational { u, v } => {
                    let (u, v) = (u as i64, v as i64);
                    let inner = p.affine(a[s], 2);
                    let outer = p.affine(v * a[s] + u * a[t], 2 * (u + v));
                    reciprocal_product(2, int(u), &[inner, outer])
                }
                HartogsExponents::Irrational {
                    gamma,
                    gamma_on_small,
                } => {
                    let AllowabilityConditions::Exact { special, .. } = conditions_for(d) else {
                        unreachable!("hartogs leaves have exact conditions")
                    };
                    match special[0].sign_at(alpha, p.value()) {
                        None => {
                            return Err(NormError::BoundaryUndecidable {
                                alpha: alpha.clone(),
                                p: p.to_string(),
                            })
                        }
                        Some(Ordering::Greater) => {}
                        Some(_) => return Ok(NormValue::Infinite),
                    }
                    let (g, pf) = (gamma.to_f64(), p.to_f64());
                    let small = a[s] as f64 * pf + 2.0;
                    let big = a[t] as f64 * pf + 2.0;
                    let value = if gamma_on_small {
                        (2.0 * PI).powi(2) * g / (small * (g * big + small))
                    } else {
                        (2.0 * PI).powi(2) / (small * (g * small + big))
                    };
                    NormValue::Finite { value, exact: None }
                }
            }
        }
        DomainKind::Dilated { inner, radius } => match closed_form_norm_p(inner, alpha, p)? {
            NormValue::Finite { value, .. } => {
                let pf = p.to_f64();
                let exponent: f64 = a.iter().map(|&ai| ai as f64 * pf + 2.0).sum();
                NormValue::Finite {
                    value: value * radius.powf(exponent),
                    exact: None,
                }
            }
            NormValue::Infinite => NormValue::Infinite,
        },
        DomainKind::Product(l, r) => {
            let (al, ar) = a.split_at(l.dim());
            product_norm(
                l,
                r,
                &MultiIndex::new(al.to_vec()),
                &MultiIndex::new(ar.to_vec()),
                p,
            )?
        }
        DomainKind::Intersection(..) => match d.reduce_intersection() {
            Some(leaf) => closed_form_norm_p(&leaf, alpha, p)?,
            None => return Err(NormError::AlgebraNodeNotSupported),
        },
        DomainKind::Union(..) | DomainKind::BoxComplement { .. } => {
            return Err(NormError::AlgebraNodeNotSupported)
        }
    };
    Ok(norm)
}

/// Norm on `d1 x d2` as the product of the factor norms.
pub fn product_norm(
    d1: &DomainSpec,
    d2: &DomainSpec,
    alpha1: &MultiIndex,
    alpha2: &MultiIndex,
    p: &Exponent,
) -> Result<NormValue, NormError> {
    let left = closed_form_norm_p(d1, alpha1, p)?;
    if !left.is_finite() {
        return Ok(NormValue::Infinite);
    }
    Ok(left.times(&closed_form_norm_p(d2, alpha2, p)?))
}

// ---- quadrature oracle ---------------------------------------------------------

/// First ladder rung `eps = 2^-LADDER_START`.
pub const LADDER_START: u32 = 4;
/// Last ladder rung `eps = 2^-LADDER_END`.
pub const LADDER_END: u32 = 40;
const LADDER_TOL: Tolerance = Tolerance {
    abs: 0.0,
    rel: 1e-13,
    max_intervals: 200,
};
const SETTLED_INCREMENT: f64 = 1e-11;
const OVERFLOW: f64 = 1e280;

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureReport {
    /// Estimate of `||e_alpha||_p^p`; infinite when divergence was declared.
    pub estimate: f64,
    pub abs_error_bound: f64,
    pub nodes_used: usize,
    pub diverged: bool,
    /// Slope of `log I(eps)` against `log(1/eps)` over the last ladder rungs.
    pub divergence_exponent_fit: Option<f64>,
    /// `(m, I(2^-m))` for each computed rung, angular factor included.
    pub ladder: Vec<(u32, f64)>,
}

impl QuadratureReport {
    pub fn to_json(&self) -> Value {
        json!({
            "estimate": if self.diverged { Value::Null } else { json!(self.estimate) },
            "abs_error_bound": self.abs_error_bound,
            "nodes_used": self.nodes_used,
            "diverged": self.diverged,
            "divergence_exponent_fit": self.divergence_exponent_fit,
        })
    }
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Decide divergence from the cutoff ladder `I(2^-m)`: the last six values
/// increase, their log-log slope exceeds 0.01, and the increments do not
/// decay geometrically (fitted ratio at least 0.99).
pub fn ladder_diverges(ladder: &[(u32, f64)]) -> (bool, Option<f64>) {
    if ladder.len() < 6 {
        return (false, None);
    }
    let tail = &ladder[ladder.len() - 6..];
    let values: Vec<f64> = tail.iter().map(|r| r.1).collect();
    if values.iter().any(|v| *v <= 0.0) {
        return (false, None);
    }
    let xs: Vec<f64> = tail
        .iter()
        .map(|r| r.0 as f64 * std::f64::consts::LN_2)
        .collect();
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let slope = least_squares_slope(&xs, &logs);
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    if !increasing {
        return (false, Some(slope));
    }
    let incs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).ln()).collect();
    let ms: Vec<f64> = tail[1..].iter().map(|r| r.0 as f64).collect();
    let ratio = least_squares_slope(&ms, &incs).exp();
    (slope > 0.01 && ratio >= 0.99, Some(slope))
}

fn weights(alpha: &MultiIndex, p: f64) -> Vec<f64> {
    alpha
        .as_slice()
        .iter()
        .map(|&a| a as f64 * p + 2.0)
        .collect()
}

/// Numerical `||e_alpha||_p^p` with divergence detection.
pub fn quadrature_norm_p(
    d: &DomainSpec,
    alpha: &MultiIndex,
    p: f64,
    rel_tol: f64,
) -> Result<QuadratureReport, NormError> {
    if !(rel_tol > 1e-12 && rel_tol < 1e-2) {
        return Err(NormError::InvalidTolerance(rel_tol));
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(NormError::InvalidExponent(p));
    }
    if alpha.dim() != d.dim() {
        return Err(NormError::DimensionMismatch {
            expected: d.dim(),
            got: alpha.dim(),
        });
    }
    let region = SignedRegion::from_domain(d);
    let w = weights(alpha, p);
    let angular = (2.0 * PI).powi(d.dim() as i32);
    let mut ladder = Vec::new();
    let mut nodes = 0;
    let mut settled = false;
    let mut blown_up = false;
    for m in LADDER_START..=LADDER_END {
        let cut = m as f64 * std::f64::consts::LN_2;
        let r = region.integrate_exp(&w, Some(cut), LADDER_TOL);
        nodes += r.evaluations;
        let value = angular * r.value;
        if !value.is_finite() || value > OVERFLOW {
            blown_up = true;
            ladder.push((m, value));
            break;
        }
        ladder.push((m, value));
        if m >= LADDER_START + 5 && ladder.len() >= 4 {
            let last = &ladder[ladder.len() - 4..];
            settled = last.windows(2).all(|pair| {
                (pair[1].1 - pair[0].1).abs()
                    <= SETTLED_INCREMENT * pair[1].1.abs().max(f64::MIN_POSITIVE)
            });
            if settled {
                break;
            }
        }
    }
    let (diverged, fit) = if blown_up {
        (true, None)
    } else if settled {
        (false, ladder_diverges(&ladder).1)
    } else {
        ladder_diverges(&ladder)
    };
    if diverged {
        return Ok(QuadratureReport {
            estimate: f64::INFINITY,
            abs_error_bound: 0.0,
            nodes_used: nodes,
            diverged,
            divergence_exponent_fit: fit,
            ladder,
        });
    }
    let tol = Tolerance {
        abs: 0.0,
        rel: rel_tol * 1e-2,
        max_intervals: 2000,
    };
    let full = region.integrate_exp(&w, None, tol);
    nodes += full.evaluations;
    let estimate = angular * full.value;
    let abs_error_bound = angular * full.abs_error;
    if !estimate.is_finite() {
        return Ok(QuadratureReport {
            estimate: f64::INFINITY,
            abs_error_bound: 0.0,
            nodes_used: nodes,
            diverged: true,
            divergence_exponent_fit: fit,
            ladder,
        });
    }
    let target = rel_tol * estimate.abs();
    if abs_error_bound > target && abs_error_bound > 1e-300 {
        return Err(NormError::ToleranceNotReached {
            achieved: abs_error_bound,
            target,
        });
    }
    Ok(QuadratureReport {
        estimate,
        abs_error_bound,
        nodes_used: nodes,
        diverged: false,
        divergence_exponent_fit: fit,
        ladder,
    })
}

const AXIS_PROBES: usize = 200;

/// A coordinate `j` with `alpha_j < 0` whose hyperplane `{z_j = 0}` meets the
/// domain (so `e_alpha` has a pole inside it), found by zeroing that
/// coordinate of sampled points.
pub fn singular_axis(d: &DomainSpec, alpha: &MultiIndex) -> Result<Option<usize>, NormError> {
    let negative: Vec<usize> = alpha
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(_, a)| **a < 0)
        .map(|(j, _)| j)
        .collect();
    if negative.is_empty() || d.bounding_radii().is_none() {
        return Ok(None);
    }
    let sample = d.sample_shadow(AXIS_PROBES, 0xa715)?;
    for j in negative {
        for point in &sample.points {
            let mut r = point.clone();
            r[j] = 0.0;
            if d.contains_radial(&r)? == Membership::Inside {
                return Ok(Some(j));
            }
        }
    }
    Ok(None)
}

/// Oracle verdict: `e_alpha` is holomorphic on the domain and its p-th
/// power is integrable according to the cutoff ladder.
pub fn oracle_allowable(d: &DomainSpec, alpha: &MultiIndex, p: f64) -> Result<bool, NormError> {
    if singular_axis(d, alpha)?.is_some() {
        return Ok(false);
    }
    match quadrature_norm_p(d, alpha, p, 1e-8) {
        Ok(r) => Ok(!r.diverged),
        Err(NormError::ToleranceNotReached { .. }) => Ok(true),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
    pub acceptance_rate: f64,
}

/// Monte Carlo `||e_alpha||_p^p` by uniform sampling of the bounding polydisc.
pub fn monte_carlo_norm_p(
    d: &DomainSpec,
    alpha: &MultiIndex,
    p: f64,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate, NormError> {
    if alpha.dim() != d.dim() {
        return Err(NormError::DimensionMismatch {
            expected: d.dim(),
            got: alpha.dim(),
        });
    }
    if samples == 0 {
        return Err(GeometryError::InvalidCount.into());
    }
    let radii = d.bounding_radii().ok_or(GeometryError::Unbounded)?;
    let volume: f64 = radii.iter().map(|r| PI * r * r).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum_sq, mut accepted) = (0.0, 0.0, 0usize);
    let mut r = vec![0.0; d.dim()];
    for _ in 0..samples {
        for (ri, big) in r.iter_mut().zip(&radii) {
            *ri = big * rng.random::<f64>().sqrt();
        }
        if d.contains_radial(&r)? != Membership::Inside {
            continue;
        }
        accepted += 1;
        let f: f64 = r
            .iter()
            .zip(alpha.as_slice())
            .map(|(ri, &a)| ri.powf(a as f64 * p))
            .product();
        sum += f;
        sum_sq += f * f;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    Ok(MonteCarloEstimate {
        estimate: volume * mean,
        std_error: volume * (var / n).sqrt(),
        samples,
        acceptance_rate: accepted as f64 / n,
    })
}

impl From<IndexError> for NormError {
    fn from(e: IndexError) -> Self {
        match e {
            IndexError::Geometry(g) => NormError::Geometry(g),
            IndexError::DimensionMismatch { expected, got } => {
                NormError::DimensionMismatch { expected, got }
            }
            _ => NormError::AlgebraNodeNotSupported,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::PositiveReal;

    fn mi(v: &[i64]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn two() -> Exponent {
        Exponent::integer(2).unwrap()
    }

    #[test]
    fn omega_a_closed_form() {
        let d = DomainSpec::omega_a(1, 1, 1, 2).unwrap();
        let n = closed_form_norm_p(&d, &mi(&[0, 0]), &two()).unwrap();
        assert!((n.value().unwrap() - PI * PI / 6.0).abs() < 1e-14);
        assert_eq!(n.to_json()["exact"], "pi^2 * 1/6");
        assert_eq!(
            closed_form_norm_p(&d, &mi(&[-2, -2]), &two()).unwrap(),
            NormValue::Infinite
        );
    }

    #[test]
    fn disc_closed_form() {
        let n = closed_form_norm_p(&DomainSpec::disc(), &mi(&[0]), &two()).unwrap();
        assert!((n.value().unwrap() - PI).abs() < 1e-15);
        assert_eq!(n.exact().unwrap().to_string(), "pi * 1");
    }

    #[test]
    fn product_norm_examples() {
        let disc = DomainSpec::disc();
        let n = product_norm(&disc, &disc, &mi(&[0]), &mi(&[0]), &two()).unwrap();
        assert!((n.value().unwrap() - PI * PI).abs() < 1e-13);
        let h = DomainSpec::hartogs(PositiveReal::rational(1, 1).unwrap()).unwrap();
        let hd = DomainSpec::product(h.clone(), disc.clone());
        let whole = closed_form_norm_p(&hd, &mi(&[0, -1, 0]), &two()).unwrap();
        let part = closed_form_norm_p(&h, &mi(&[0, -1]), &two()).unwrap();
        assert!((whole.value().unwrap() - part.value().unwrap() * PI).abs() < 1e-12);
        assert_eq!(
            product_norm(&h, &disc, &mi(&[0, -3]), &mi(&[0]), &two()).unwrap(),
            NormValue::Infinite
        );
    }

    #[test]
    fn oracle_matches_omega_a() {
        let d = DomainSpec::omega_a(1, 1, 1, 2).unwrap();
        let r = quadrature_norm_p(&d, &mi(&[0, 0]), 2.0, 1e-9).unwrap();
        assert!(!r.diverged);
        assert!(
            (r.estimate - PI * PI / 6.0).abs() < 1e-8 * r.estimate,
            "{r:?}"
        );
        let r = quadrature_norm_p(&d, &mi(&[-2, -2]), 2.0, 1e-9).unwrap();
        assert!(r.diverged);
    }

    #[test]
    fn oracle_detects_log_divergence() {
        let h = DomainSpec::hartogs(PositiveReal::rational(1, 1).unwrap()).unwrap();
        let r = quadrature_norm_p(&h, &mi(&[0, -2]), 2.0, 1e-9).unwrap();
        assert!(r.diverged, "{r:?}");
        let r = quadrature_norm_p(&h, &mi(&[0, -3]), 2.0, 1e-9).unwrap();
        assert!(r.diverged);
        let r = quadrature_norm_p(&h, &mi(&[0, -1]), 2.0, 1e-9).unwrap();
        assert!(!r.diverged);
    }

    #[test]
    fn axis_probe() {
        let h = DomainSpec::hartogs(PositiveReal::rational(1, 1).unwrap()).unwrap();
        assert_eq!(singular_axis(&h, &mi(&[-1, 3])).unwrap(), Some(0));
        assert_eq!(singular_axis(&h, &mi(&[1, -3])).unwrap(), None);
        let a = DomainSpec::omega_a(1, 1, 1, 2).unwrap();
        assert_eq!(singular_axis(&a, &mi(&[-1, -1])).unwrap(), None);
    }

    #[test]
    fn monte_carlo_agrees_roughly() {
        let d = DomainSpec::omega_a(1, 1, 1, 2).unwrap();
        let mc = monte_carlo_norm_p(&d, &mi(&[0, 0]), 2.0, 200_000, 1).unwrap();
        assert!((mc.estimate - PI * PI / 6.0).abs() < 5.0 * mc.std_error);
    }
}
