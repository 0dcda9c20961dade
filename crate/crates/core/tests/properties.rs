use hypercirc_core::circular::{vm_fit, vm_sample, CircularSample, VonMisesParams};
use hypercirc_core::hyperbolic::{
    distance_to_preferred, embed, hyperbolic_distance, project_to_radius, project_to_zero_radius, DiskPoint,
    PreferredDirection,
};
use hypercirc_core::rng::{substream, Purpose};
use hypercirc_core::specialfn::{a1, a1_inverse, bessel_i0, bessel_i1};
use proptest::prelude::*;
use std::f64::consts::TAU;

/// Direct power series, summed until the terms stop changing the total.
fn series_oracle(order: u32, x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = if order == 0 { 1.0 } else { x / 2.0 };
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + order as f64));
        let next = sum + term;
        if next == sum {
            return sum;
        }
        sum = next;
    }
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    while (b - a).abs() > 1e-12 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    0.5 * (a + b)
}

fn disk_point() -> impl Strategy<Value = DiskPoint> {
    (0.0..0.995f64, 0.0..TAU).prop_map(|(r, t)| DiskPoint::from_polar(r, t).unwrap())
}

#[test]
fn bessel_matches_series_oracle_on_grid() {
    for i in 0..=3000 {
        let x = i as f64 * 0.01;
        for order in [0, 1] {
            let got = if order == 0 { bessel_i0(x) } else { bessel_i1(x) }.unwrap();
            let want = series_oracle(order, x);
            let err = if want == 0.0 { got.abs() } else { ((got - want) / want).abs() };
            assert!(err <= 1e-12, "I{order}({x}): {got} vs {want}");
        }
    }
}

#[test]
fn a1_is_increasing_and_scaled_safely() {
    let mut prev = -1.0;
    for i in 0..=50_000 {
        let k = i as f64 * 0.01;
        let v = a1(k).unwrap();
        assert!(v > prev, "a1 not increasing at {k}");
        prev = v;
    }
    for i in 0..=200 {
        let v = a1(500.0 + i as f64).unwrap();
        assert!(v > 0.0 && v < 1.0);
    }
}

#[test]
fn a1_inverse_cross_checked_by_bisection() {
    let target = 0.99;
    let (mut lo, mut hi) = (0.0, 1e4);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if a1(mid).unwrap() < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let k = a1_inverse(target).unwrap();
    assert!((a1(k).unwrap() - target).abs() <= 1e-10);
    assert!((k - lo).abs() / k < 1e-9);
    assert!((a1_inverse(a1(2.0).unwrap()).unwrap() - 2.0).abs() < 1e-8);
}

#[test]
fn projection_is_optimal_on_a_grid() {
    let mut rng = substream(99, 0, Purpose::Sampling);
    let grid: Vec<f64> = (0..10_000).map(|i| i as f64 * (1.0 - 1e-9) / 9_999.0).collect();
    for _ in 0..500 {
        let r = 0.99 * hypercirc_core::rng::uniform01(&mut rng);
        let t = TAU * hypercirc_core::rng::uniform01(&mut rng);
        let xi = DiskPoint::from_polar(r, t).unwrap();
        let p = project_to_zero_radius(xi).unwrap();
        let h = |t: f64| hyperbolic_distance(xi, DiskPoint::new(t, 0.0).unwrap()).unwrap();
        for &t in &grid {
            assert!(p.distance <= h(t) + 1e-12, "xi={xi:?} t={t}");
        }
        // squared distance is convex along the radius in arclength s, t = tanh(s/2)
        let step = 1e-2;
        let sq = |s: f64| h((s / 2.0).tanh()).powi(2);
        for i in 1..600 {
            let s = i as f64 * step;
            assert!(sq(s - step) - 2.0 * sq(s) + sq(s + step) > -1e-9, "xi={xi:?} s={s}");
        }
    }
}

#[test]
fn fit_error_shrinks_with_sample_size() {
    for (j, &kappa) in [1.0, 1.5, 3.0].iter().enumerate() {
        let truth = VonMisesParams::new(0.9, kappa).unwrap();
        let median_error = |n: usize| {
            let mut mu_err = Vec::new();
            let mut kappa_err = Vec::new();
            for rep in 0..101u64 {
                let mut rng = substream(500 + j as u64, rep, Purpose::Data);
                let fit = vm_fit(&vm_sample(truth, n, &mut rng)).unwrap();
                mu_err.push(fit.params.mu.distance(truth.mu));
                kappa_err.push((fit.params.kappa - kappa).abs());
            }
            mu_err.sort_by(f64::total_cmp);
            kappa_err.sort_by(f64::total_cmp);
            (mu_err[50], kappa_err[50])
        };
        let e = [median_error(50), median_error(500), median_error(5000)];
        assert!(e[0].0 > e[1].0 && e[1].0 > e[2].0, "mu errors {e:?}");
        assert!(e[0].1 > e[1].1 && e[1].1 > e[2].1, "kappa errors {e:?}");
    }
}

proptest! {
    #[test]
    fn a1_round_trip(kappa in 0.0..500.0f64) {
        let back = a1_inverse(a1(kappa).unwrap()).unwrap();
        prop_assert!((back - kappa).abs() / kappa.max(1.0) <= 1e-7);
    }

    #[test]
    fn golden_section_matches_closed_form(xi in disk_point()) {
        let p = project_to_zero_radius(xi).unwrap();
        let oracle = golden_section(
            |t| hyperbolic_distance(xi, DiskPoint::new(t, 0.0).unwrap()).unwrap(),
            0.0,
            1.0 - 1e-9,
        );
        prop_assert!((p.t_star - oracle).abs() <= 1e-6, "{} vs {}", p.t_star, oracle);
    }

    #[test]
    fn metric_axioms(a in disk_point(), b in disk_point(), c in disk_point()) {
        let d = |x, y| hyperbolic_distance(x, y).unwrap();
        prop_assert!(d(a, b) >= 0.0);
        prop_assert_eq!(d(a, a), 0.0);
        prop_assert!((d(a, b) - d(b, a)).abs() <= 1e-12 * d(a, b).max(1.0));
        prop_assert!(d(a, c) <= d(a, b) + d(b, c) + 1e-9);
        if a != b {
            prop_assert!(d(a, b) > 0.0);
        }
    }

    #[test]
    fn rotation_is_an_isometry(a in disk_point(), b in disk_point(), phi in 0.0..TAU) {
        let d0 = hyperbolic_distance(a, b).unwrap();
        let d1 = hyperbolic_distance(a.rotate(phi), b.rotate(phi)).unwrap();
        prop_assert!((d0 - d1).abs() <= 1e-12 * d0.max(1.0) * 1e3);
    }

    #[test]
    fn general_radius_reduces_by_rotation(xi in disk_point(), mu0 in 0.0..TAU) {
        let dir = PreferredDirection::new(mu0).unwrap();
        let p = project_to_radius(xi, dir).unwrap();
        let foot = DiskPoint::from_polar(p.t_star, mu0).unwrap();
        prop_assert!((hyperbolic_distance(xi, foot).unwrap() - p.distance).abs() < 1e-9 * p.distance.max(1.0));
        let q = project_to_zero_radius(xi.rotate(-mu0)).unwrap();
        prop_assert!((p.distance - q.distance).abs() < 1e-12 * p.distance.max(1.0));
    }

    #[test]
    fn embedding_continuity(mu in 0.0..TAU, kappa in 0.0..100.0f64, h in 1e-6..1.0f64) {
        let a = embed(VonMisesParams::new(mu, kappa).unwrap()).unwrap();
        let b = embed(VonMisesParams::new(mu, kappa + h).unwrap()).unwrap();
        prop_assert!(((a.re - b.re).powi(2) + (a.im - b.im).powi(2)).sqrt() <= h + 1e-15);
    }

    #[test]
    fn embedding_is_injective(mu1 in 0.0..TAU, k1 in 1e-3..100.0f64, mu2 in 0.0..TAU, k2 in 1e-3..100.0f64) {
        let a = embed(VonMisesParams::new(mu1, k1).unwrap()).unwrap();
        let b = embed(VonMisesParams::new(mu2, k2).unwrap()).unwrap();
        if (mu1 - mu2).abs() > 1e-9 || (k1 - k2).abs() > 1e-9 {
            prop_assert!(a != b);
        }
    }

    #[test]
    fn conjugation_symmetry(mu in 0.0..TAU, kappa in 0.0..50.0f64) {
        let dir = PreferredDirection::ZERO;
        let a = distance_to_preferred(VonMisesParams::new(mu, kappa).unwrap(), dir).unwrap();
        let b = distance_to_preferred(VonMisesParams::new(TAU - mu, kappa).unwrap(), dir).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn fit_is_rotation_equivariant(seed in any::<u64>(), delta in -10.0..10.0f64) {
        let sample = vm_sample(VonMisesParams::new(1.0, 2.0).unwrap(), 30, &mut substream(seed, 0, Purpose::Data));
        let shifted = CircularSample::from_radians(&sample.radians().map(|t| t + delta).collect::<Vec<_>>()).unwrap();
        let a = vm_fit(&sample).unwrap();
        let b = vm_fit(&shifted).unwrap();
        prop_assert!(b.params.mu.distance(a.params.mu.rotate(delta)) < 1e-10);
        prop_assert!((a.params.kappa - b.params.kappa).abs() <= 1e-9 * a.params.kappa.max(1.0));
    }
}
