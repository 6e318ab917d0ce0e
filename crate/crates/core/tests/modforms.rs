use klab::arith::{gcd, make_prime_context, primes_in};
use klab::modforms::*;

const TAU_SMALL: [i128; 10] = [
    1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920,
];

fn sigma11(n: u64) -> i128 {
    (1..=n)
        .filter(|d| n % d == 0)
        .map(|d| (d as i128).pow(11))
        .sum()
}

#[test]
fn tau_frozen_values() {
    let hd = delta_coefficients(100).unwrap();
    assert_eq!(&hd.tau[1..=10], &TAU_SMALL);
    assert_eq!(hd.tau[100], 37534859200);
}

#[test]
fn tau_congruence_mod_691() {
    let hd = delta_coefficients(1000).unwrap();
    for n in 1..=1000u64 {
        assert_eq!(
            (hd.tau[n as usize] - sigma11(n)).rem_euclid(691),
            0,
            "n={n}"
        );
    }
}

#[test]
fn hecke_multiplicativity_and_deligne() {
    let n_max = 10_000usize;
    let hd = delta_coefficients(n_max).unwrap();
    for m in 2..=100usize {
        for n in 2..=n_max / m {
            if gcd(m as u64, n as u64) == 1 {
                assert_eq!(hd.tau[m * n], hd.tau[m] * hd.tau[n], "m={m} n={n}");
            }
        }
    }
    for p in primes_in(2, 100) {
        let p = p as usize;
        if p * p <= n_max {
            assert_eq!(
                hd.tau[p * p],
                hd.tau[p] * hd.tau[p] - (p as i128).pow(11),
                "p={p}"
            );
        }
    }
    for p in primes_in(2, n_max as u64) {
        assert!(hd.lambda[p as usize].abs() <= 2.0, "p={p}");
    }
    for n in 1..=n_max {
        let d = (1..=n).filter(|k| n % k == 0).count() as f64;
        assert!(hd.lambda[n].abs() <= d * (1.0 + 1e-12), "n={n}");
    }
}

fn check(q: u64, a: i64, n: f64, twisted: bool) -> CuspCheck {
    let w = voronoi_test_weight();
    let ctx = make_prime_context(q).unwrap();
    let need = required_n_max(&w, q, n, DEFAULT_TOLERANCE, twisted).unwrap();
    let hd = delta_coefficients(need).unwrap();
    if twisted {
        twisted_voronoi_check(&hd, &ctx, a, &w, n, DEFAULT_TOLERANCE).unwrap()
    } else {
        cusp_voronoi_check(&hd, &ctx, a, &w, n, DEFAULT_TOLERANCE).unwrap()
    }
}

#[test]
fn cusp_voronoi_two_sided() {
    for (q, a, n) in [(13u64, 1i64, 50.0), (101, 1, 200.0), (101, 7, 200.0)] {
        let c = check(q, a, n, false);
        assert!(c.residual < 1e-6, "q={q} a={a}: {c:?}");
        assert!(c.lhs.norm() > 1e-3, "q={q}: trivial left side");
        assert!(c.tail_bound + c.quadrature_bound < 1e-6);
    }
}

#[test]
fn twisted_voronoi_two_sided() {
    for (q, a, n) in [(13u64, 1i64, 30.0), (29, 12, 100.0)] {
        let c = check(q, a, n, true);
        assert!(c.residual < 1e-6, "q={q} a={a}: {c:?}");
        assert!(c.lhs.norm() > 1e-3);
    }
}

#[test]
fn twisted_sum_conjugates_under_negation() {
    let (q, n) = (29u64, 100.0);
    for a in [1i64, 5, 12] {
        let x = check(q, a, n, true);
        let y = check(q, q as i64 - a, n, true);
        assert!((x.lhs - y.lhs.conj()).norm() < 1e-12);
        assert!((x.rhs - y.rhs.conj()).norm() < 1e-6);
    }
}

#[test]
fn non_coprime_shift_rejected() {
    let w = voronoi_test_weight();
    let ctx = make_prime_context(13).unwrap();
    let hd = delta_coefficients(2000).unwrap();
    assert!(cusp_voronoi_check(&hd, &ctx, 26, &w, 50.0, DEFAULT_TOLERANCE).is_err());
}
