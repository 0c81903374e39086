use std::f64::consts::PI;

use mbk_core::exact::{Exponent, PositiveReal};
use mbk_core::geometry::geometric_mean_shadow;
use mbk_core::indexsets::{enumerate_sp, thresholds, IndexBox, MultiIndex};
use mbk_core::kernel::{evaluate_kernel, twist, KernelQuery};
use mbk_core::{DomainSpec, Membership, ThresholdSet};
use num_complex::Complex64;
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = DomainSpec> {
    prop_oneof![
        (1u64..5, 1u64..5, 1u64..5, 1u64..5).prop_filter_map("invalid omega_a", |(a, b, c, d)| {
            DomainSpec::omega_a(a, b, c, d).ok()
        }),
        (1u64..4, 1u64..4).prop_filter_map("gcd", |(k1, k2)| DomainSpec::type1(vec![k1, k2]).ok()),
        (1u64..4, 1u64..4).prop_filter_map("gcd", |(k1, k2)| DomainSpec::type2(vec![k1, k2]).ok()),
        (1u64..4, 0u64..6, any::<bool>(), any::<bool>()).prop_map(
            |(den, extra, inverted, swapped)| {
                let gamma = PositiveReal::rational(den + extra, den).unwrap();
                DomainSpec::hartogs_oriented(gamma, inverted, swapped).unwrap()
            }
        ),
    ]
}

fn exponent() -> impl Strategy<Value = Exponent> {
    (1i64..=12, 0i64..60).prop_map(|(den, extra)| Exponent::from_ratio(den + extra, den).unwrap())
}

fn cube(radius: i64) -> IndexBox {
    IndexBox::cube(2, radius)
}

/// `|z1|^a < |z2|^b` and `|z2|^d < |z1|^c`, or `None` near the boundary.
fn omega_a_direct(params: [f64; 4], r: &[f64; 2]) -> Option<bool> {
    let [a, b, c, d] = params;
    let margins = [r[1].powf(b) - r[0].powf(a), r[0].powf(c) - r[1].powf(d)];
    if margins.iter().any(|m| m.abs() < 1e-9) {
        return None;
    }
    Some(margins.iter().all(|m| *m > 0.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn monotone_chain(d in leaf(), p1 in exponent(), p2 in exponent(), p3 in exponent()) {
        let mut ps = [p1, p2, p3];
        ps.sort_by(|a, b| a.value().cmp(b.value()));
        let b = cube(5);
        let s1 = enumerate_sp(&d, &ps[0], &b).unwrap();
        let s2 = enumerate_sp(&d, &ps[1], &b).unwrap();
        let s3 = enumerate_sp(&d, &ps[2], &b).unwrap();
        for alpha in s1.iter().filter(|a| s3.contains(a)) {
            prop_assert!(s2.contains(alpha), "{alpha} at {} {} {}", ps[0], ps[1], ps[2]);
        }
    }

    #[test]
    fn product_law(left in leaf(), right in leaf(), p in exponent()) {
        let product = DomainSpec::product(left.clone(), right.clone());
        let (lb, rb) = (cube(2), cube(2));
        let got = enumerate_sp(&product, &p, &lb.product(&rb)).unwrap();
        let l = enumerate_sp(&left, &p, &lb).unwrap();
        let r = enumerate_sp(&right, &p, &rb).unwrap();
        let want: Vec<MultiIndex> = l.iter().flat_map(|a| r.iter().map(move |b| a.concat(b))).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn union_law(left in leaf(), right in leaf(), p in exponent()) {
        if let Ok(union) = DomainSpec::union(left.clone(), right.clone()) {
            let b = cube(4);
            let got = enumerate_sp(&union, &p, &b).unwrap();
            let l = enumerate_sp(&left, &p, &b).unwrap();
            let r = enumerate_sp(&right, &p, &b).unwrap();
            let want: Vec<MultiIndex> = l.into_iter().filter(|a| r.contains(a)).collect();
            prop_assert_eq!(got, want);
        }
    }

    #[test]
    fn twist_with_conjugate_exponent_is_identity(
        re in -3.0f64..3.0, im in -3.0f64..3.0, p in 1.05f64..8.0
    ) {
        let q = p / (p - 1.0);
        let z = vec![Complex64::new(re, im), Complex64::new(0.0, 0.0)];
        let back = twist(&twist(&z, p), q);
        prop_assert!((back[0] - z[0]).norm() <= 1e-12 * (1.0 + z[0].norm()));
        prop_assert_eq!(back[1], z[1]);
    }

    #[test]
    fn log_convex_shadow(d in leaf(), seed in 0u64..1000, q in 1.0f64..6.0) {
        let sample = d.sample_shadow(2, seed).unwrap();
        let mean = geometric_mean_shadow(&sample.points[0], &sample.points[1], q);
        prop_assert_ne!(d.contains_radial(&mean).unwrap(), Membership::Outside);
    }

    #[test]
    fn rotation_invariance(d in leaf(), r1 in 0.0f64..1.0, r2 in 0.0f64..1.0, t1 in 0.0f64..7.0, t2 in 0.0f64..7.0) {
        let base = [Complex64::new(r1, 0.0), Complex64::new(r2, 0.0)];
        let turned = [Complex64::from_polar(r1, t1), Complex64::from_polar(r2, t2)];
        prop_assert_eq!(d.contains_point(&base).unwrap(), d.contains_point(&turned).unwrap());
    }

    #[test]
    fn constant_between_thresholds(k in 0usize..6, t in 0.05f64..0.95) {
        let d = DomainSpec::omega_a(1, 1, 1, 2).unwrap();
        let ThresholdSet::Finite(values) = thresholds(&d).unwrap() else { panic!("finite expected") };
        let mut edges: Vec<f64> = values.iter().map(mbk_core::exact::rational_to_f64).collect();
        edges.push(1.0);
        edges.push(8.0);
        edges.sort_by(f64::total_cmp);
        let (lo, hi) = (edges[k], edges[k + 1]);
        let p = Exponent::from_f64(lo + t * (hi - lo)).unwrap();
        let mid = Exponent::from_f64(0.5 * (lo + hi)).unwrap();
        let b = cube(6);
        prop_assert_eq!(enumerate_sp(&d, &p, &b).unwrap(), enumerate_sp(&d, &mid, &b).unwrap());
    }

    #[test]
    fn bergman_kernel_is_hermitian(x1 in -0.6f64..0.6, y1 in -0.6f64..0.6, x2 in -0.6f64..0.6, y2 in -0.6f64..0.6) {
        let disc = DomainSpec::disc();
        let z = vec![Complex64::new(x1, y1)];
        let w = vec![Complex64::new(x2, y2)];
        let query = |z: Vec<Complex64>, w: Vec<Complex64>| KernelQuery {
            domain: disc.clone(), p: Exponent::integer(2).unwrap(), z, w, truncation: 200, rel_tol: 1e-12,
        };
        let a = evaluate_kernel(&query(z.clone(), w.clone())).unwrap().value;
        let b = evaluate_kernel(&query(w.clone(), z.clone())).unwrap().value;
        prop_assert!((a - b.conj()).norm() < 1e-12 * a.norm().max(1.0));
        let closed = 1.0 / (PI * (Complex64::new(1.0, 0.0) - z[0] * w[0].conj()).powi(2));
        prop_assert!((a - closed).norm() < 1e-9 * closed.norm());
    }

    #[test]
    fn truncation_consistency(r in 0.05f64..0.6, t in 0.0f64..6.0, n1 in 2u32..15, extra in 1u32..15) {
        let h = DomainSpec::hartogs(PositiveReal::rational(1, 1).unwrap()).unwrap();
        let z = vec![Complex64::from_polar(0.5 * r, t), Complex64::new(r + 0.2, 0.0)];
        let query = |n: u32| KernelQuery {
            domain: h.clone(), p: Exponent::from_ratio(5, 2).unwrap(), z: z.clone(), w: z.clone(),
            truncation: n, rel_tol: 1e-300,
        };
        let short = evaluate_kernel(&query(n1));
        let long = evaluate_kernel(&query(n1 + extra));
        if let (Ok(short), Ok(long)) = (short, long) {
            prop_assert_eq!(&short.shells[..], &long.shells[..short.shells.len()]);
        }
    }
}

#[test]
fn membership_matches_direct_inequalities() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    let mut compared = 0;
    for params in [[1u64, 1, 1, 2], [2, 1, 1, 3], [3, 2, 1, 1]] {
        let d = DomainSpec::omega_a(params[0], params[1], params[2], params[3]).unwrap();
        for _ in 0..10_000 {
            let r = [rng.random::<f64>(), rng.random::<f64>()];
            let Some(expected) = omega_a_direct(params.map(|v| v as f64), &r) else {
                continue;
            };
            let got = d.contains_radial(&r).unwrap();
            assert_eq!(got == Membership::Inside, expected, "{d} at {r:?}");
            compared += 1;
        }
    }
    assert!(compared > 29_000);
}

#[test]
fn hartogs_membership_matches_direct_inequalities() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(43);
    for (num, den) in [(1u64, 1u64), (3, 2), (5, 2)] {
        let gamma = num as f64 / den as f64;
        let d = DomainSpec::hartogs(PositiveReal::rational(num, den).unwrap()).unwrap();
        for _ in 0..10_000 {
            let r = [rng.random::<f64>(), rng.random::<f64>()];
            let margin = r[1].powf(gamma) - r[0];
            if margin.abs() < 1e-9 {
                continue;
            }
            assert_eq!(
                d.contains_radial(&r).unwrap() == Membership::Inside,
                margin > 0.0,
                "{d} at {r:?}"
            );
        }
    }
}
