//! Summands `E_{alpha,p}`, the truncated p-monomial basis kernel with shell
//! extrapolation, and the continuity, exhaustion and domination experiments.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::exact::{ExactError, Exponent};
use crate::geometry::{CompactSet, DomainSpec, GeometryError, Membership};
use crate::indexsets::{effective_conditions, AllowabilityConditions, MultiIndex};
use crate::norms::{closed_form_norm_p, NormError};

/// A `(z, w)` evaluation pair.
pub type PointPair = (Vec<Complex64>, Vec<Complex64>);

/// Shells fitted for the geometric decay rate.
const FIT_SHELLS: usize = 5;
/// Consecutive negligible shells that allow an early stop.
const QUIET_SHELLS: usize = 3;
const MIN_SHELLS_BEFORE_STOP: u32 = 5;
const VALUE_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("shell sums do not decay geometrically (fitted theta = {theta})")]
    NotConverged { theta: f64 },
    #[error("point {0} is not inside the domain")]
    PointNotInside(String),
    #[error("coordinate {coordinate} is zero but the index set reaches negative exponents there")]
    ZeroComponent { coordinate: usize },
    #[error("domain {j} of the sequence is not contained in the next one")]
    SequenceNotIncreasing { j: usize },
    #[error("envelope violated: ratio {ratio}")]
    EnvelopeViolated { ratio: f64 },
    #[error("compact set has no vertices")]
    EmptyCompactSet,
    #[error("no exact index-set description for this domain")]
    AlgebraNodeNotSupported,
    #[error("relative tolerance must be positive")]
    InvalidTolerance,
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Componentwise `zeta |zeta|^(p-2)`, with `0 -> 0`.
pub fn twist(zeta: &[Complex64], p: f64) -> Vec<Complex64> {
    zeta.iter()
        .map(|&c| {
            let r = c.norm();
            if r == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                c * r.powf(p - 2.0)
            }
        })
        .collect()
}

/// All `alpha` with `|alpha|_1 = m`, in lexicographic order.
pub fn shell_indices(n: usize, m: u32) -> Vec<MultiIndex> {
    fn rec(n: usize, rem: i64, cur: &mut Vec<i64>, out: &mut Vec<MultiIndex>) {
        if cur.len() + 1 == n {
            if rem == 0 {
                cur.push(0);
                out.push(MultiIndex::new(cur.clone()));
                cur.pop();
            } else {
                for v in [-rem, rem] {
                    cur.push(v);
                    out.push(MultiIndex::new(cur.clone()));
                    cur.pop();
                }
            }
            return;
        }
        for v in -rem..=rem {
            cur.push(v);
            rec(n, rem - v.abs(), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, m as i64, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

/// Polar data of a point: `ln|z_i|` and `arg z_i`.
#[derive(Clone, Debug)]
struct Polar {
    log_abs: Vec<f64>,
    arg: Vec<f64>,
}

impl Polar {
    fn new(z: &[Complex64]) -> Self {
        Self {
            log_abs: z.iter().map(|c| c.norm().ln()).collect(),
            arg: z.iter().map(|c| c.arg()).collect(),
        }
    }

    /// `ln|e_alpha|` and `arg e_alpha`, or `None` when `e_alpha` vanishes.
    fn monomial(&self, alpha: &MultiIndex) -> Option<(f64, f64)> {
        let (mut log, mut phase) = (0.0, 0.0);
        for ((&a, &l), &t) in alpha.as_slice().iter().zip(&self.log_abs).zip(&self.arg) {
            if a == 0 {
                continue;
            }
            if l == f64::NEG_INFINITY {
                return None;
            }
            log += a as f64 * l;
            phase += a as f64 * t;
        }
        Some((log, phase))
    }
}

fn summand_from_norm(alpha: &MultiIndex, p: f64, norm: f64, z: &Polar, w: &Polar) -> Complex64 {
    match (z.monomial(alpha), w.monomial(alpha)) {
        (Some((lz, tz)), Some((lw, tw))) => {
            Complex64::from_polar((lz + (p - 1.0) * lw - norm.ln()).exp(), tz - tw)
        }
        _ => Complex64::new(0.0, 0.0),
    }
}

fn check_point(d: &DomainSpec, z: &[Complex64]) -> Result<(), KernelError> {
    if d.contains_point(z)? != Membership::Inside {
        let coords: Vec<String> = z.iter().map(|c| c.to_string()).collect();
        return Err(KernelError::PointNotInside(format!(
            "({})",
            coords.join(", ")
        )));
    }
    Ok(())
}

/// `E_{alpha,p}(z, w)`; zero when `alpha` is not p-allowable.
pub fn summand(
    d: &DomainSpec,
    alpha: &MultiIndex,
    p: &Exponent,
    z: &[Complex64],
    w: &[Complex64],
) -> Result<Complex64, KernelError> {
    check_point(d, z)?;
    check_point(d, w)?;
    let conds = effective_conditions(d);
    if matches!(conds, AllowabilityConditions::SamplingOnly) {
        return Err(KernelError::AlgebraNodeNotSupported);
    }
    if conds.decide(alpha, p) != Some(true) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let norm = closed_form_norm_p(d, alpha, p)?
        .value()
        .expect("allowable index has finite norm");
    Ok(summand_from_norm(
        alpha,
        p.to_f64(),
        norm,
        &Polar::new(z),
        &Polar::new(w),
    ))
}

#[derive(Clone, Debug)]
pub struct KernelQuery {
    pub domain: DomainSpec,
    pub p: Exponent,
    pub z: Vec<Complex64>,
    pub w: Vec<Complex64>,
    /// Largest shell `|alpha|_1` summed.
    pub truncation: u32,
    pub rel_tol: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelValue {
    pub value: Complex64,
    /// Sum of each shell `|alpha|_1 = m`, from `m = 0`.
    pub shells: Vec<Complex64>,
    /// Geometric decay rate of the shell magnitudes, when fitted.
    pub theta: Option<f64>,
    pub tail_estimate: f64,
    pub converged: bool,
}

impl KernelValue {
    pub fn to_json(&self) -> Value {
        let shells: Vec<[f64; 2]> = self.shells.iter().map(|c| [c.re, c.im]).collect();
        json!({
            "value": [self.value.re, self.value.im],
            "shells": shells,
            "theta": self.theta,
            "tail": self.tail_estimate,
            "converged": self.converged,
        })
    }
}

/// Per-shell magnitudes `sum |E_alpha|` drive the decay fit.
fn fit_theta(magnitudes: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = magnitudes
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(m, v)| (m as f64, v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let tail = &pts[pts.len().saturating_sub(FIT_SHELLS)..];
    let n = tail.len() as f64;
    let mx = tail.iter().map(|p| p.0).sum::<f64>() / n;
    let my = tail.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = tail.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some((sxy / sxx).exp())
}

fn finish(
    shells: Vec<Complex64>,
    magnitudes: &[f64],
    rel_tol: f64,
) -> Result<KernelValue, KernelError> {
    let value: Complex64 = shells.iter().sum();
    let theta = fit_theta(magnitudes);
    let last = magnitudes
        .iter()
        .rev()
        .find(|v| **v > 0.0)
        .copied()
        .unwrap_or(0.0);
    let tail_estimate = match theta {
        Some(t) if t >= 1.0 => return Err(KernelError::NotConverged { theta: t }),
        Some(t) => last * t / (1.0 - t),
        None => 0.0,
    };
    let converged = tail_estimate <= rel_tol * value.norm() || value.norm() < VALUE_FLOOR;
    Ok(KernelValue {
        value,
        shells,
        theta,
        tail_estimate,
        converged,
    })
}

/// Evaluate the truncated kernel at several `(z, w)` pairs sharing one pass
/// over the index shells (norms are computed once per index).
pub fn evaluate_kernel_batch(
    domain: &DomainSpec,
    p: &Exponent,
    pairs: &[PointPair],
    truncation: u32,
    rel_tol: f64,
) -> Result<Vec<KernelValue>, KernelError> {
    if !(rel_tol > 0.0) {
        return Err(KernelError::InvalidTolerance);
    }
    let conds = effective_conditions(domain);
    if matches!(conds, AllowabilityConditions::SamplingOnly) {
        return Err(KernelError::AlgebraNodeNotSupported);
    }
    let mut polars = Vec::with_capacity(pairs.len());
    for (z, w) in pairs {
        check_point(domain, z)?;
        check_point(domain, w)?;
        polars.push((Polar::new(z), Polar::new(w)));
    }
    let n = domain.dim();
    let pf = p.to_f64();
    let mut shells = vec![Vec::new(); pairs.len()];
    let mut magnitudes = vec![Vec::new(); pairs.len()];
    let mut running = vec![Complex64::new(0.0, 0.0); pairs.len()];
    let mut quiet = vec![0usize; pairs.len()];
    let mut negative_reach = vec![false; n];
    for m in 0..=truncation {
        let indices: Vec<MultiIndex> = shell_indices(n, m)
            .into_iter()
            .filter(|a| conds.decide(a, p) == Some(true))
            .collect();
        for a in &indices {
            for (j, &aj) in a.as_slice().iter().enumerate() {
                negative_reach[j] |= aj < 0;
            }
        }
        let norms: Vec<f64> = indices
            .par_iter()
            .map(|a| closed_form_norm_p(domain, a, p).map(|v| v.value().unwrap_or(f64::INFINITY)))
            .collect::<Result<_, _>>()?;
        for (k, (z, w)) in polars.iter().enumerate() {
            for (j, (lz, lw)) in z.log_abs.iter().zip(&w.log_abs).enumerate() {
                if negative_reach[j] && (*lz == f64::NEG_INFINITY || *lw == f64::NEG_INFINITY) {
                    return Err(KernelError::ZeroComponent { coordinate: j });
                }
            }
            let mut shell = Complex64::new(0.0, 0.0);
            let mut magnitude = 0.0;
            for (a, &norm) in indices.iter().zip(&norms) {
                let e = summand_from_norm(a, pf, norm, z, w);
                shell += e;
                magnitude += e.norm();
            }
            running[k] += shell;
            shells[k].push(shell);
            magnitudes[k].push(magnitude);
            if magnitude < rel_tol * running[k].norm() {
                quiet[k] += 1;
            } else if magnitude > 0.0 || m == 0 {
                quiet[k] = 0;
            } else {
                quiet[k] += 1;
            }
        }
        if m >= MIN_SHELLS_BEFORE_STOP && quiet.iter().all(|q| *q >= QUIET_SHELLS) {
            break;
        }
    }
    shells
        .into_iter()
        .zip(magnitudes)
        .map(|(s, mag)| finish(s, &mag, rel_tol))
        .collect()
}

pub fn evaluate_kernel(q: &KernelQuery) -> Result<KernelValue, KernelError> {
    let pairs = [(q.z.clone(), q.w.clone())];
    let mut out = evaluate_kernel_batch(&q.domain, &q.p, &pairs, q.truncation, q.rel_tol)?;
    Ok(out.remove(0))
}

// ---- experiments -------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuityRow {
    pub q: f64,
    pub sup_diff: f64,
}

/// `sup_grid |K_q - K_p|` for each `q` of the sequence.
pub fn continuity_experiment(
    d: &DomainSpec,
    p: &Exponent,
    grid: &[PointPair],
    q_sequence: &[f64],
    truncation: u32,
    rel_tol: f64,
) -> Result<Vec<ContinuityRow>, KernelError> {
    let reference = evaluate_kernel_batch(d, p, grid, truncation, rel_tol)?;
    q_sequence
        .iter()
        .map(|&q| {
            let exponent = Exponent::from_f64(q)?;
            let values = evaluate_kernel_batch(d, &exponent, grid, truncation, rel_tol)?;
            let sup_diff = values
                .iter()
                .zip(&reference)
                .map(|(a, b)| (a.value - b.value).norm())
                .fold(0.0, f64::max);
            Ok(ContinuityRow { q, sup_diff })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RamadanovRow {
    pub j: usize,
    pub sup_diff: f64,
    /// `||e_alpha||_p^p` on the j-th domain for each tracked index.
    pub norms: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RamadanovReport {
    pub rows: Vec<RamadanovRow>,
    /// Tracked norms that decreased from one domain to the next.
    pub norm_violations: usize,
}

const INCLUSION_PROBES: usize = 500;

/// Kernels of an increasing sequence of domains against the kernel of the limit.
pub fn ramadanov_experiment(
    sequence: &[DomainSpec],
    limit: &DomainSpec,
    p: &Exponent,
    grid: &[PointPair],
    tracked: &[MultiIndex],
    truncation: u32,
    rel_tol: f64,
) -> Result<RamadanovReport, KernelError> {
    for (j, d) in sequence.iter().enumerate() {
        let next = sequence.get(j + 1).unwrap_or(limit);
        let sample = d.sample_shadow(INCLUSION_PROBES, 0x7a3d + j as u64)?;
        if sample
            .points
            .iter()
            .any(|r| next.contains_radial(r) != Ok(Membership::Inside))
        {
            return Err(KernelError::SequenceNotIncreasing { j: j + 1 });
        }
    }
    let reference = evaluate_kernel_batch(limit, p, grid, truncation, rel_tol)?;
    let mut rows = Vec::with_capacity(sequence.len());
    for (j, d) in sequence.iter().enumerate() {
        let values = evaluate_kernel_batch(d, p, grid, truncation, rel_tol)?;
        let sup_diff = values
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a.value - b.value).norm())
            .fold(0.0, f64::max);
        let norms = tracked
            .iter()
            .map(|a| {
                Ok(closed_form_norm_p(d, a, p)?
                    .value()
                    .unwrap_or(f64::INFINITY))
            })
            .collect::<Result<Vec<f64>, KernelError>>()?;
        rows.push(RamadanovRow {
            j: j + 1,
            sup_diff,
            norms,
        });
    }
    let norm_violations = rows
        .windows(2)
        .map(|w| {
            w[0].norms
                .iter()
                .zip(&w[1].norms)
                .filter(|(a, b)| b < a)
                .count()
        })
        .sum();
    Ok(RamadanovReport {
        rows,
        norm_violations,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DominationReport {
    pub theta: f64,
    pub constant: f64,
    /// Largest `|E| / (C theta^|alpha|)` over the check sample.
    pub max_violation_ratio: f64,
    /// Per-shell maxima over the fitting set.
    pub shell_maxima: Vec<f64>,
    pub points_checked: usize,
}

const DOMINATION_Q_POINTS: usize = 9;
const DOMINATION_INTERIOR: usize = 40;

fn shell_maxima(
    d: &DomainSpec,
    conds: &AllowabilityConditions,
    exps: &[Exponent],
    points: &[Vec<f64>],
    truncation: u32,
) -> Result<Vec<f64>, KernelError> {
    let polars: Vec<Polar> = points
        .iter()
        .map(|r| Polar {
            log_abs: r.iter().map(|v| v.ln()).collect(),
            arg: vec![0.0; r.len()],
        })
        .collect();
    let mut out = Vec::with_capacity(truncation as usize + 1);
    for m in 0..=truncation {
        let mut best: f64 = 0.0;
        for p in exps {
            let pf = p.to_f64();
            for a in shell_indices(d.dim(), m) {
                if conds.decide(&a, p) != Some(true) {
                    continue;
                }
                let norm = closed_form_norm_p(d, &a, p)?
                    .value()
                    .unwrap_or(f64::INFINITY);
                for z in &polars {
                    for w in &polars {
                        best = best.max(summand_from_norm(&a, pf, norm, z, w).norm());
                    }
                }
            }
        }
        out.push(best);
    }
    Ok(out)
}

/// Fit `C theta^|alpha|` over the vertices of `K` (where `|E|` is maximal,
/// being log-linear in each point) and a grid of exponents, then measure
/// violations on seeded interior points and exponents.
pub fn domination_check(
    d: &DomainSpec,
    p_interval: (f64, f64),
    compact: &CompactSet,
    truncation: u32,
    seed: u64,
) -> Result<DominationReport, KernelError> {
    let conds = effective_conditions(d);
    if matches!(conds, AllowabilityConditions::SamplingOnly) {
        return Err(KernelError::AlgebraNodeNotSupported);
    }
    let vertices = compact.vertices();
    if vertices.is_empty() {
        return Err(KernelError::EmptyCompactSet);
    }
    let (lo, hi) = p_interval;
    let grid: Vec<Exponent> = if lo == hi {
        vec![Exponent::from_f64(lo)?]
    } else {
        (0..DOMINATION_Q_POINTS)
            .map(|i| {
                Exponent::from_f64(lo + (hi - lo) * i as f64 / (DOMINATION_Q_POINTS - 1) as f64)
            })
            .collect::<Result<_, _>>()?
    };
    let maxima = shell_maxima(d, &conds, &grid, &vertices, truncation)?;
    let theta = fit_theta(&maxima)
        .map(|t| t.min(1.0 - 1e-12))
        .unwrap_or(0.0);
    let constant = maxima
        .iter()
        .enumerate()
        .map(|(m, v)| {
            if *v > 0.0 {
                v / theta.powi(m as i32)
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);

    // Check on fresh interior points and exponents.
    let interior = compact.sample(DOMINATION_INTERIOR, seed);
    let mut check_points = vertices.clone();
    check_points.extend(interior);
    let check_exps: Vec<Exponent> = if lo == hi {
        grid.clone()
    } else {
        let mut v = grid.clone();
        for i in 0..DOMINATION_Q_POINTS - 1 {
            let t = (i as f64 + 0.37) / (DOMINATION_Q_POINTS - 1) as f64;
            v.push(Exponent::from_f64(lo + (hi - lo) * t)?);
        }
        v
    };
    let check = shell_maxima(d, &conds, &check_exps, &check_points, truncation)?;
    let max_violation_ratio = check
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(m, v)| v / (constant * theta.powi(m as i32)))
        .fold(0.0, f64::max);
    let report = DominationReport {
        theta,
        constant,
        max_violation_ratio,
        shell_maxima: maxima,
        points_checked: check_points.len(),
    };
    if max_violation_ratio > 1.0 + 1e-9 {
        return Err(KernelError::EnvelopeViolated {
            ratio: max_violation_ratio,
        });
    }
    Ok(report)
}

/// The disc's classical Bergman kernel `1 / (pi (1 - z conj(w))^2)`.
pub fn disc_bergman(z: Complex64, w: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    one / (PI * (one - z * w.conj()).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::PositiveReal;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn two() -> Exponent {
        Exponent::integer(2).unwrap()
    }

    #[test]
    fn twist_examples() {
        let z = vec![Complex64::new(0.3, -0.7), Complex64::new(2.0, 1.0)];
        assert_eq!(twist(&z, 2.0), z);
        assert_eq!(twist(&[c(1.0), c(1.0)], 3.7), vec![c(1.0), c(1.0)]);
        let t = twist(&[c(2.0), c(0.0)], 3.0);
        assert_eq!(t, vec![c(4.0), c(0.0)]);
        let back = twist(&t, 1.5);
        assert!((back[0] - c(2.0)).norm() < 1e-15);
        assert_eq!(back[1], c(0.0));
    }

    #[test]
    fn shells_are_lexicographic() {
        let s: Vec<Vec<i64>> = shell_indices(2, 1)
            .into_iter()
            .map(|a| a.as_slice().to_vec())
            .collect();
        assert_eq!(s, vec![vec![-1, 0], vec![0, -1], vec![0, 1], vec![1, 0]]);
        assert_eq!(shell_indices(3, 2).len(), 18);
        assert_eq!(shell_indices(2, 0).len(), 1);
    }

    #[test]
    fn summand_examples() {
        let disc = DomainSpec::disc();
        let e = summand(
            &disc,
            &MultiIndex::new(vec![0]),
            &two(),
            &[c(0.3)],
            &[c(-0.2)],
        )
        .unwrap();
        assert!((e - c(1.0 / PI)).norm() < 1e-15);
        let e = summand(
            &disc,
            &MultiIndex::new(vec![1]),
            &two(),
            &[c(0.5)],
            &[c(0.5)],
        )
        .unwrap();
        assert!((e - c(1.0 / (2.0 * PI))).norm() < 1e-15);
        let h = DomainSpec::hartogs(PositiveReal::rational(1, 1).unwrap()).unwrap();
        let z = [c(0.2), c(0.5)];
        assert_eq!(
            summand(&h, &MultiIndex::new(vec![0, -3]), &two(), &z, &z).unwrap(),
            c(0.0)
        );
    }

    #[test]
    fn disc_kernel_matches_bergman() {
        let disc = DomainSpec::disc();
        let q = KernelQuery {
            domain: disc.clone(),
            p: two(),
            z: vec![c(0.0)],
            w: vec![c(0.0)],
            truncation: 60,
            rel_tol: 1e-8,
        };
        let v = evaluate_kernel(&q).unwrap();
        assert!((v.value - c(1.0 / PI)).norm() < 1e-15);
        assert!(v.converged);
        let q = KernelQuery {
            z: vec![c(0.5)],
            w: vec![c(0.5)],
            rel_tol: 1e-12,
            ..q
        };
        let v = evaluate_kernel(&q).unwrap();
        let exact = 16.0 / (9.0 * PI);
        assert!((v.value.re - exact).abs() < 1e-10 * exact, "{v:?}");
        assert!(v.converged);
        let theta = v.theta.unwrap();
        assert!(theta > 0.2 && theta < 0.3);
    }

    #[test]
    fn zero_component_is_rejected_when_negative_indices_exist() {
        let h = DomainSpec::hartogs(PositiveReal::rational(1, 1).unwrap()).unwrap();
        // z_1 = 0 is inside; negative alpha_1 never occurs, so this is fine.
        let q = KernelQuery {
            domain: h,
            p: two(),
            z: vec![c(0.0), c(0.5)],
            w: vec![c(0.1), c(0.5)],
            truncation: 30,
            rel_tol: 1e-8,
        };
        assert!(evaluate_kernel(&q).is_ok());
    }

    #[test]
    fn domination_disc() {
        let disc = DomainSpec::disc();
        let k = CompactSet::with_margin(&disc, 2f64.ln(), 0.05).unwrap();
        let r = domination_check(&disc, (2.0, 2.0), &k, 40, 1).unwrap();
        assert!(r.theta < 0.3 && r.theta > 0.2, "{r:?}");
        assert!(r.max_violation_ratio <= 1.0 + 1e-9);
        let trivial = domination_check(&disc, (2.0, 2.0), &k, 0, 1).unwrap();
        assert!((trivial.constant - 1.0 / PI).abs() < 1e-15);
    }
}
