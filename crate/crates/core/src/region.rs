//! Log-coordinate regions as signed sums of polyhedra, and integration of
//! exponential-linear densities over them by nested adaptive quadrature.
//!
//! A monomial density `|z^alpha|^p dV` becomes `(2 pi)^n exp(<w, x>) dx`
//! with `w_i = alpha_i p + 2` in log coordinates. Each polyhedron is put in
//! nested-bounds form by Fourier–Motzkin elimination (`x_1` innermost); the
//! innermost variable is integrated in closed form and the outer ones by
//! Gauss–Kronrod.

use crate::geometry::{DomainKind, DomainSpec};
use crate::quadrature::{integrate, Integral, Tolerance};

const EPS: f64 = 1e-12;

/// `<normal, x> <= rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub rhs: f64,
}

impl HalfSpace {
    fn normalized(mut self) -> Self {
        let scale = self.normal.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale > 0.0 {
            self.normal.iter_mut().for_each(|v| *v /= scale);
            self.rhs /= scale;
        }
        self
    }

    fn same_as(&self, other: &HalfSpace) -> bool {
        (self.rhs - other.rhs).abs() <= EPS * (1.0 + self.rhs.abs())
            && self
                .normal
                .iter()
                .zip(&other.normal)
                .all(|(a, b)| (a - b).abs() <= EPS)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    pub dim: usize,
    pub rows: Vec<HalfSpace>,
}

impl Polytope {
    pub fn whole(dim: usize) -> Self {
        Self {
            dim,
            rows: Vec::new(),
        }
    }

    fn meet(&self, other: &Polytope) -> Polytope {
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Polytope {
            dim: self.dim,
            rows,
        }
    }

    fn embed(&self, offset: usize, dim: usize) -> Polytope {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut normal = vec![0.0; dim];
                normal[offset..offset + r.normal.len()].copy_from_slice(&r.normal);
                HalfSpace { normal, rhs: r.rhs }
            })
            .collect();
        Polytope { dim, rows }
    }

    fn shift(&self, by: f64) -> Polytope {
        let rows = self
            .rows
            .iter()
            .map(|r| HalfSpace {
                normal: r.normal.clone(),
                rhs: r.rhs + by * r.normal.iter().sum::<f64>(),
            })
            .collect();
        Polytope {
            dim: self.dim,
            rows,
        }
    }

    /// Restrict every coordinate to `[-cut, cut]`.
    pub fn with_cutoff(&self, cut: f64) -> Polytope {
        let mut rows = self.rows.clone();
        for i in 0..self.dim {
            let mut normal = vec![0.0; self.dim];
            normal[i] = -1.0;
            rows.push(HalfSpace {
                normal: normal.clone(),
                rhs: cut,
            });
            normal[i] = 1.0;
            rows.push(HalfSpace { normal, rhs: cut });
        }
        Polytope {
            dim: self.dim,
            rows,
        }
    }
}

/// Signed combination of polyhedra representing an indicator function.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedRegion {
    pub dim: usize,
    pub terms: Vec<(f64, Polytope)>,
}

impl SignedRegion {
    /// Indicator algebra: intersection multiplies, union is `A + B - AB`,
    /// a box complement is `1 - box`.
    pub fn from_domain(d: &DomainSpec) -> SignedRegion {
        let dim = d.dim();
        if let Ok(poly) = d.shadow_polytope() {
            let rows = poly
                .rows
                .into_iter()
                .map(|r| HalfSpace {
                    normal: r.normal,
                    rhs: r.rhs,
                })
                .collect();
            return SignedRegion {
                dim,
                terms: vec![(1.0, Polytope { dim, rows })],
            };
        }
        match d.kind() {
            DomainKind::Dilated { inner, radius } => {
                let base = SignedRegion::from_domain(inner);
                let terms = base
                    .terms
                    .iter()
                    .map(|(s, p)| (*s, p.shift(radius.ln())))
                    .collect();
                SignedRegion { dim, terms }
            }
            DomainKind::BoxComplement { lower, upper } => {
                let mut rows = Vec::new();
                for (i, (&lo, &hi)) in lower.iter().zip(upper).enumerate() {
                    let mut normal = vec![0.0; dim];
                    normal[i] = 1.0;
                    rows.push(HalfSpace {
                        normal: normal.clone(),
                        rhs: hi.ln(),
                    });
                    if lo > 0.0 {
                        normal[i] = -1.0;
                        rows.push(HalfSpace {
                            normal,
                            rhs: -lo.ln(),
                        });
                    }
                }
                SignedRegion {
                    dim,
                    terms: vec![(1.0, Polytope::whole(dim)), (-1.0, Polytope { dim, rows })],
                }
            }
            DomainKind::Intersection(l, r) => {
                SignedRegion::from_domain(l).times(&SignedRegion::from_domain(r))
            }
            DomainKind::Union(l, r) => {
                let (a, b) = (SignedRegion::from_domain(l), SignedRegion::from_domain(r));
                let ab = a.times(&b);
                let mut terms = a.terms;
                terms.extend(b.terms);
                terms.extend(ab.terms.into_iter().map(|(s, p)| (-s, p)));
                SignedRegion { dim, terms }
            }
            DomainKind::Product(l, r) => {
                let (a, b) = (SignedRegion::from_domain(l), SignedRegion::from_domain(r));
                let mut terms = Vec::new();
                for (sa, pa) in &a.terms {
                    for (sb, pb) in &b.terms {
                        terms.push((sa * sb, pa.embed(0, dim).meet(&pb.embed(l.dim(), dim))));
                    }
                }
                SignedRegion { dim, terms }
            }
            _ => unreachable!("leaf families have shadow polytopes"),
        }
    }

    fn times(&self, other: &SignedRegion) -> SignedRegion {
        let mut terms = Vec::new();
        for (sa, pa) in &self.terms {
            for (sb, pb) in &other.terms {
                terms.push((sa * sb, pa.meet(pb)));
            }
        }
        SignedRegion {
            dim: self.dim,
            terms,
        }
    }

    /// `sum_k sign_k * integral over P_k (intersected with the cutoff box) of exp(<w, x>)`.
    pub fn integrate_exp(&self, weights: &[f64], cutoff: Option<f64>, tol: Tolerance) -> Integral {
        let mut out = Integral {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
            converged: true,
        };
        for (sign, poly) in &self.terms {
            let poly = match cutoff {
                Some(c) => poly.with_cutoff(c),
                None => poly.clone(),
            };
            let part = integrate_polytope(&poly, weights, tol);
            out.value += sign * part.value;
            out.abs_error += part.abs_error;
            out.evaluations += part.evaluations;
            out.converged &= part.converged;
        }
        out
    }
}

/// Rows per elimination level: `levels[k]` involves only `x_k..x_{n-1}`.
/// Returns `None` when elimination exposes an infeasible constant row.
fn fourier_motzkin(poly: &Polytope) -> Option<Vec<Vec<HalfSpace>>> {
    let n = poly.dim;
    let mut current: Vec<HalfSpace> = Vec::new();
    for r in poly.rows.iter().cloned().map(HalfSpace::normalized) {
        if !current.iter().any(|c| c.same_as(&r)) {
            current.push(r);
        }
    }
    let mut levels = Vec::with_capacity(n);
    for k in 0..n {
        let (mut next, mut uppers, mut lowers) = (Vec::new(), Vec::new(), Vec::new());
        for r in &current {
            if r.normal[k] > EPS {
                uppers.push(r.clone());
            } else if r.normal[k] < -EPS {
                lowers.push(r.clone());
            } else {
                let mut r = r.clone();
                r.normal[k] = 0.0;
                next.push(r);
            }
        }
        for u in &uppers {
            for l in &lowers {
                let (cu, cl) = (u.normal[k], -l.normal[k]);
                let mut normal: Vec<f64> = u
                    .normal
                    .iter()
                    .zip(&l.normal)
                    .map(|(a, b)| a / cu + b / cl)
                    .collect();
                normal[k] = 0.0;
                let row = HalfSpace {
                    normal,
                    rhs: u.rhs / cu + l.rhs / cl,
                }
                .normalized();
                if !next.iter().any(|c: &HalfSpace| c.same_as(&row)) {
                    next.push(row);
                }
            }
        }
        levels.push(current);
        current = next;
    }
    if current
        .iter()
        .any(|r| r.normal.iter().all(|v| v.abs() <= EPS) && r.rhs < -EPS)
    {
        return None;
    }
    Some(levels)
}

/// Bounds on `x_k` from `rows`, with `x_j` (`j > k`) taken from `x`.
fn bounds(rows: &[HalfSpace], k: usize, x: &[f64]) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for r in rows {
        let m = r.normal[k];
        if m.abs() <= EPS {
            continue;
        }
        let rest: f64 = r.normal[k + 1..]
            .iter()
            .zip(&x[k + 1..])
            .map(|(a, b)| a * b)
            .sum();
        let bound = (r.rhs - rest) / m;
        if m > 0.0 {
            hi = hi.min(bound);
        } else {
            lo = lo.max(bound);
        }
    }
    (lo, hi)
}

/// Values of `x_k` where the active bound of the level below switches.
fn kinks(rows: &[HalfSpace], k: usize, x: &[f64]) -> Vec<f64> {
    let below = k - 1;
    let lines: Vec<(f64, f64, bool)> = rows
        .iter()
        .filter(|r| r.normal[below].abs() > EPS)
        .map(|r| {
            let rest: f64 = r.normal[k + 1..]
                .iter()
                .zip(&x[k + 1..])
                .map(|(a, b)| a * b)
                .sum();
            let m = r.normal[below];
            ((r.rhs - rest) / m, -r.normal[k] / m, m > 0.0)
        })
        .collect();
    let mut out = Vec::new();
    for (i, a) in lines.iter().enumerate() {
        for b in &lines[i + 1..] {
            let dslope = b.1 - a.1;
            if dslope.abs() > EPS {
                out.push((a.0 - b.0) / dslope);
            }
        }
    }
    out
}

/// `integral_L^U exp(w0 t) dt * exp(shift)`, arranged to avoid `inf * 0`.
fn exp_segment(w0: f64, lo: f64, hi: f64, shift: f64) -> f64 {
    if lo >= hi {
        return 0.0;
    }
    if w0.abs() <= EPS {
        return (hi - lo) * shift.exp();
    }
    if w0 > 0.0 {
        if hi == f64::INFINITY {
            return f64::INFINITY;
        }
        (shift + w0 * hi).exp() * -(-w0 * (hi - lo)).exp_m1() / w0
    } else {
        if lo == f64::NEG_INFINITY {
            return f64::INFINITY;
        }
        (shift + w0 * lo).exp() * -(w0 * (hi - lo)).exp_m1() / -w0
    }
}

fn integrate_level(
    levels: &[Vec<HalfSpace>],
    w: &[f64],
    k: usize,
    x: &[f64],
    tol: Tolerance,
) -> Integral {
    let (lo, hi) = bounds(&levels[k], k, x);
    if k == 0 {
        let shift: f64 = w[1..].iter().zip(&x[1..]).map(|(a, b)| a * b).sum();
        let value = exp_segment(w[0], lo, hi, shift);
        return Integral {
            value,
            abs_error: 0.0,
            evaluations: 1,
            converged: true,
        };
    }
    if lo >= hi {
        return Integral {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
            converged: true,
        };
    }
    let breaks = kinks(&levels[k - 1], k, x);
    let inner_tol = Tolerance {
        abs: 0.0,
        rel: tol.rel * 0.1,
        ..tol
    };
    let mut evaluations = 0;
    let mut converged = true;
    let mut scratch = x.to_vec();
    let mut f = |t: f64| {
        scratch[k] = t;
        let r = integrate_level(levels, w, k - 1, &scratch, inner_tol);
        evaluations += r.evaluations;
        converged &= r.converged;
        r.value
    };
    let mut out = integrate(&mut f, lo, hi, &breaks, tol);
    out.evaluations = evaluations.max(out.evaluations);
    out.converged &= converged;
    out
}

/// Integral of `exp(<w, x>)` over a polyhedron.
pub fn integrate_polytope(poly: &Polytope, w: &[f64], tol: Tolerance) -> Integral {
    let zero = Integral {
        value: 0.0,
        abs_error: 0.0,
        evaluations: 0,
        converged: true,
    };
    let Some(levels) = fourier_motzkin(poly) else {
        return zero;
    };
    let n = poly.dim;
    integrate_level(&levels, w, n - 1, &vec![0.0; n], tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hs(normal: &[f64], rhs: f64) -> HalfSpace {
        HalfSpace {
            normal: normal.to_vec(),
            rhs,
        }
    }

    #[test]
    fn triangle_cone_exponential() {
        // x1 < x2 < 0 with w = (2, 4): 1/(2 * 6).
        let p = Polytope {
            dim: 2,
            rows: vec![hs(&[1.0, -1.0], 0.0), hs(&[0.0, 1.0], 0.0)],
        };
        let r = integrate_polytope(&p, &[2.0, 4.0], Tolerance::default());
        assert!((r.value - 1.0 / 12.0).abs() < 1e-13, "{r:?}");
    }

    #[test]
    fn divergent_direction_is_infinite() {
        let p = Polytope {
            dim: 2,
            rows: vec![hs(&[1.0, -1.0], 0.0), hs(&[0.0, 1.0], 0.0)],
        };
        let r = integrate_polytope(&p, &[2.0, -3.0], Tolerance::default());
        assert!(!r.value.is_finite() || r.value > 1e100, "{r:?}");
    }

    #[test]
    fn infeasible_polytope_is_zero() {
        let p = Polytope {
            dim: 1,
            rows: vec![hs(&[1.0], -1.0), hs(&[-1.0], -1.0)],
        };
        assert_eq!(
            integrate_polytope(&p, &[1.0], Tolerance::default()).value,
            0.0
        );
    }

    #[test]
    fn three_dimensional_chain() {
        // x1 < x2 < x3 < 0, w = (2, 2, 2): 1/(2 * 4 * 6).
        let p = Polytope {
            dim: 3,
            rows: vec![
                hs(&[1.0, -1.0, 0.0], 0.0),
                hs(&[0.0, 1.0, -1.0], 0.0),
                hs(&[0.0, 0.0, 1.0], 0.0),
            ],
        };
        let r = integrate_polytope(&p, &[2.0, 2.0, 2.0], Tolerance::default());
        assert!((r.value - 1.0 / 48.0).abs() < 1e-13, "{r:?}");
    }
}
