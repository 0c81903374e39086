//! Adaptive Gauss–Kronrod (7/15) integration on finite and semi-infinite
//! intervals, with caller-supplied breakpoints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    /// Whether the requested tolerance was met within the interval budget.
    pub converged: bool,
}

impl Integral {
    fn zero() -> Self {
        Self {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
            converged: true,
        }
    }

    fn add(&mut self, other: Integral) {
        self.value += other.value;
        self.abs_error += other.abs_error;
        self.evaluations += other.evaluations;
        self.converged &= other.converged;
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 0.0,
            rel: 1e-12,
            max_intervals: 400,
        }
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(&WGK).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (value, err)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive integration of `f` over the finite interval `[a, b]`.
pub fn integrate_finite<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Integral {
    if a >= b {
        return Integral::zero();
    }
    let (value, err) = gk15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, err });
    let (mut total, mut total_err) = (value, err);
    let mut evaluations = 15;
    while total.is_finite() {
        let target = tol.abs.max(tol.rel * total.abs());
        if total_err <= target {
            return Integral {
                value: total,
                abs_error: total_err,
                evaluations,
                converged: true,
            };
        }
        if heap.len() >= tol.max_intervals {
            break;
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
    }
    // Re-sum to shed accumulated cancellation in the running totals.
    let (value, abs_error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err));
    let value = if total.is_finite() { value } else { total };
    let target = tol.abs.max(tol.rel * value.abs());
    Integral {
        value,
        abs_error,
        evaluations,
        converged: abs_error <= target,
    }
}

/// Integrate over `[lo, hi]` where either end may be infinite. Infinite
/// ends are mapped to `[0, 1)` by `x = end -/+ t / (1 - t)`; breakpoints
/// strictly inside `(lo, hi)` split the range first.
pub fn integrate<F: FnMut(f64) -> f64>(
    f: &mut F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Integral {
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Integral::zero();
    }
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > lo && *x < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    if lo.is_infinite() && hi.is_infinite() && cuts.is_empty() {
        cuts.push(0.0);
    }
    let mut points = vec![lo];
    points.extend(cuts);
    points.push(hi);
    let segments = (points.len() - 1) as f64;
    let seg_tol = Tolerance {
        abs: tol.abs / segments,
        ..tol
    };
    let mut out = Integral::zero();
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let part = if a == f64::NEG_INFINITY {
            let mut g = |t: f64| {
                let s = 1.0 - t;
                let v = f(b - t / s);
                if v == 0.0 {
                    0.0
                } else {
                    v / (s * s)
                }
            };
            integrate_finite(&mut g, 0.0, 1.0, seg_tol)
        } else if b == f64::INFINITY {
            let mut g = |t: f64| {
                let s = 1.0 - t;
                let v = f(a + t / s);
                if v == 0.0 {
                    0.0
                } else {
                    v / (s * s)
                }
            };
            integrate_finite(&mut g, 0.0, 1.0, seg_tol)
        } else {
            integrate_finite(f, a, b, seg_tol)
        };
        out.add(part);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(&mut |x: f64| x * x, 0.0, 3.0, &[], Tolerance::default());
        assert!((r.value - 9.0).abs() < 1e-13);
        assert!(r.converged);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = integrate(
            &mut |x: f64| (2.0 * x).exp(),
            f64::NEG_INFINITY,
            0.0,
            &[],
            Tolerance::default(),
        );
        assert!((r.value - 0.5).abs() < 1e-12, "{r:?}");
        let r = integrate(
            &mut |x: f64| (-x * x).exp(),
            f64::NEG_INFINITY,
            f64::INFINITY,
            &[],
            Tolerance::default(),
        );
        assert!(
            (r.value - std::f64::consts::PI.sqrt()).abs() < 1e-11,
            "{r:?}"
        );
    }

    #[test]
    fn kink_with_breakpoint() {
        let f = |x: f64| (x - 0.3).abs();
        let r = integrate(&mut { f }, 0.0, 1.0, &[0.3], Tolerance::default());
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-14);
        assert_eq!(r.evaluations, 30);
    }
}
