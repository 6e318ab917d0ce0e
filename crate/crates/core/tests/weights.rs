use klab::weights::bessel::bessel_j;
use klab::weights::{
    bessel_transform, fourier_decay_bound, make_bump, sharp_cutoff_sandwich, sqrt_bump,
    weight_fourier, SmoothWeight, CERT_ORDER,
};
use proptest::prelude::*;

fn sample_weights() -> Vec<SmoothWeight> {
    vec![
        make_bump(1.0, (0.5, 2.0)).unwrap(),
        make_bump(4.0, (0.5, 1.0)).unwrap(),
        make_bump(10.0, (1.0, 1.5)).unwrap(),
        sqrt_bump(0.01, 100.0).unwrap(),
    ]
}

#[test]
fn second_differences_converge() {
    for w in sample_weights() {
        let (lo, hi) = w.support;
        for i in 1..40 {
            let x = lo + (hi - lo) * i as f64 / 40.0;
            let exact = w.derivative(x, 2);
            let mut prev = f64::INFINITY;
            for k in [3, 4, 5] {
                let h = (hi - lo) * 10f64.powi(-k);
                let fd = (w.eval(x + h) - 2.0 * w.eval(x) + w.eval(x - h)) / (h * h);
                let err = (fd - exact).abs();
                let scale = w.sup_bound(2).max(1.0);
                assert!(
                    err <= prev.max(1e-6 * scale) + 1e-9 * scale,
                    "x={x} h={h} err={err}"
                );
                prev = err;
            }
            assert!(prev < 1e-4 * w.sup_bound(2).max(1.0), "x={x}: {prev}");
        }
    }
}

#[test]
fn derivatives_within_certificate() {
    for w in sample_weights() {
        for &(x, _) in &w.norm_grid(500) {
            let jet = w.jet(x, CERT_ORDER);
            for j in 0..=CERT_ORDER {
                assert!(
                    jet.derivative(j).abs() <= w.sup_bound(j) * (1.0 + 1e-9),
                    "j={j} x={x}"
                );
            }
        }
    }
}

#[test]
fn fourier_decay_on_log_grid() {
    for w in sample_weights() {
        let q = w.q_param;
        let l1 = w.l1_norms().to_vec();
        for i in 0..=40 {
            let t = q * 10f64.powf(4.0 * i as f64 / 40.0);
            // transforms are computed to about 1e-13 absolute
            let v = (weight_fourier(&w, t).norm() - 1e-12).max(0.0);
            assert!(
                v <= fourier_decay_bound(&w, t) * (1.0 + 1e-9),
                "t={t} q={q} v={v} b={}",
                fourier_decay_bound(&w, t)
            );
            for j in 1..=3 {
                let scaled = v * (2.0 * std::f64::consts::PI * t).powi(j);
                assert!(scaled <= l1[j as usize] * (1.0 + 1e-9), "j={j} t={t}");
            }
        }
    }
}

#[test]
fn fourier_at_zero_is_mass() {
    for w in sample_weights() {
        let grid = w.norm_grid(2000);
        let riemann: f64 = grid.iter().map(|&(x, dx)| w.eval(x) * dx).sum();
        assert!((weight_fourier(&w, 0.0).re - riemann).abs() < 1e-8 * riemann);
        assert!(
            (w.mass() - riemann).abs() < 1e-8 * riemann,
            "{} {riemann}",
            w.mass()
        );
    }
}

#[test]
fn bessel_recurrence() {
    for k in 1..30u32 {
        for i in 0..200 {
            let x = 0.1 + i as f64 * 0.5;
            let lhs = bessel_j(k - 1, x) + bessel_j(k + 1, x);
            let rhs = 2.0 * k as f64 / x * bessel_j(k, x);
            assert!((lhs - rhs).abs() < 1e-10, "k={k} x={x}");
        }
    }
}

#[test]
fn bessel_transform_small_argument() {
    // J_11(z) ~ (z/2)^11/11! near 0 and z is proportional to sqrt(y).
    let w = make_bump(1.0, (0.5, 2.0)).unwrap();
    let a = bessel_transform(&w, 12, 1e-5).unwrap();
    let b = bessel_transform(&w, 12, 2e-5).unwrap();
    assert!(a.abs() > 0.0);
    assert!((b / a / 2f64.powf(5.5) - 1.0).abs() < 1e-3, "{}", b / a);
}

proptest! {
    #[test]
    fn sandwich_encloses_indicator(delta in 0.001f64..0.499, u in 0.0f64..1.0) {
        let (outer, inner) = sharp_cutoff_sandwich(1e4, delta).unwrap();
        let x = 0.4 + 1.3 * u;
        let ind = if x > 1.0 && x <= 1.5 { 1.0 } else { 0.0 };
        prop_assert!(inner.eval(x) <= ind + 1e-12);
        prop_assert!(ind <= outer.eval(x) + 1e-12);
        prop_assert!(inner.eval(x) >= -1e-12);
        prop_assert!(outer.eval(x) <= 1.0 + 1e-12);
    }

    #[test]
    fn sandwich_plateaus(delta in 0.001f64..0.2, u in 0.0f64..1.0) {
        let (outer, inner) = sharp_cutoff_sandwich(1e4, delta).unwrap();
        let x = 1.0 + delta + (0.5 - 2.0 * delta) * u;
        prop_assert!((inner.eval(x) - 1.0).abs() < 1e-12);
        let y = 1.0 + 0.5 * u;
        prop_assert!((outer.eval(y) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bump_support_respected(q in 1.0f64..50.0, lo in 0.1f64..3.0, len in 1.0f64..4.0, u in 0.0f64..1.0) {
        let w = make_bump(q, (lo, lo + len)).unwrap();
        let below = lo * u;
        let above = lo + len + u;
        prop_assert_eq!(w.eval(below), 0.0);
        prop_assert_eq!(w.eval(above), 0.0);
        let mid = lo + 0.5 / q + (len - 1.0 / q) * u;
        prop_assert!((w.eval(mid) - 1.0).abs() < 1e-12);
    }
}
