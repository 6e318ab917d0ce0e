//! Normalized Fourier and Voronoi transforms of q-periodic functions, and
//! two-sided checks of the tempered Voronoi formula.

use crate::arith::fft::dft;
use crate::arith::sum::{Neumaier, NeumaierC};
use crate::arith::{kloosterman_all, PrimeContext};
use crate::error::{Error, Result};
use crate::weights::{fourier_decay_bound, fourier_tail_bound, weight_fourier, SmoothWeight};
use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicFunction {
    pub q: u64,
    pub values: Vec<Complex64>,
}

impl PeriodicFunction {
    pub fn new(q: u64, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len() as u64, q, "table length must equal the period");
        PeriodicFunction { q, values }
    }

    pub fn from_real(q: u64, values: &[f64]) -> Self {
        Self::new(q, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// n -> Kl(a n; q).
    pub fn kloosterman(ctx: &PrimeContext, a: i64) -> Self {
        let table = kloosterman_all(ctx);
        let q = ctx.q as usize;
        let a = ctx.reduce(a);
        Self::from_real(
            ctx.q,
            &(0..q).map(|n| table[(a * n) % q]).collect::<Vec<_>>(),
        )
    }

    #[inline]
    pub fn at(&self, n: i64) -> Complex64 {
        self.values[n.rem_euclid(self.q as i64) as usize]
    }
}

/// K^(h) = q^{-1/2} sum_n K(n) e_q(h n).
pub fn fourier_transform(k: &PeriodicFunction) -> PeriodicFunction {
    let s = (k.q as f64).sqrt();
    PeriodicFunction::new(k.q, dft(&k.values, 1).into_iter().map(|z| z / s).collect())
}

/// Inverse of `fourier_transform` (conjugate kernel).
pub fn inverse_fourier_transform(k: &PeriodicFunction) -> PeriodicFunction {
    let s = (k.q as f64).sqrt();
    PeriodicFunction::new(k.q, dft(&k.values, -1).into_iter().map(|z| z / s).collect())
}

/// K-check(n) = q^{-1/2} sum_{h != 0} K^(h) e_q(n / h).
pub fn voronoi_transform(ctx: &PrimeContext, k: &PeriodicFunction) -> PeriodicFunction {
    let hat = fourier_transform(k);
    voronoi_from_hat(ctx, &hat)
}

fn voronoi_from_hat(ctx: &PrimeContext, hat: &PeriodicFunction) -> PeriodicFunction {
    let q = ctx.q as usize;
    let mut f = vec![Complex64::new(0.0, 0.0); q];
    for (u, v) in f.iter_mut().enumerate().skip(1) {
        *v = hat.values[ctx.inv(u)];
    }
    let s = ctx.sqrt_q();
    PeriodicFunction::new(ctx.q, dft(&f, 1).into_iter().map(|z| z / s).collect())
}

/// Max deviation of the transforms of n -> Kl(a n) from their closed forms.
pub fn verify_kloosterman_lemma(ctx: &PrimeContext, a: i64) -> Result<f64> {
    let table = kloosterman_all(ctx);
    verify_kloosterman_lemma_with(ctx, &table, a)
}

/// As `verify_kloosterman_lemma`, reusing a precomputed Kl table.
pub fn verify_kloosterman_lemma_with(ctx: &PrimeContext, table: &[f64], a: i64) -> Result<f64> {
    let q = ctx.q as usize;
    let a = ctx.reduce(a);
    if a == 0 {
        return Err(Error::NotCoprime(0, ctx.q));
    }
    let k = PeriodicFunction::from_real(
        ctx.q,
        &(0..q).map(|n| table[(a * n) % q]).collect::<Vec<_>>(),
    );
    let hat = fourier_transform(&k);
    let check = voronoi_from_hat(ctx, &hat);
    let s = ctx.sqrt_q();
    let mut err = hat.values[0].norm();
    for h in 1..q {
        let expect = ctx.e(q - (a * ctx.inv(h)) % q);
        err = err.max((hat.values[h] - expect).norm());
    }
    for n in 0..q {
        let expect = if n == a {
            (q as f64 - 1.0) / s
        } else {
            -1.0 / s
        };
        err = err.max((check.values[n] - expect).norm());
    }
    Ok(err)
}

// ---------------------------------------------------------------------------
// tempered Voronoi formula

/// G(x, y) = W1(x / M) W2(y / N).
#[derive(Clone, Debug)]
pub struct TestFunction2D {
    pub w1: SmoothWeight,
    pub w2: SmoothWeight,
    pub m: f64,
    pub n: f64,
}

impl TestFunction2D {
    pub fn new(w1: SmoothWeight, w2: SmoothWeight, m: f64, n: f64) -> Self {
        TestFunction2D { w1, w2, m, n }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.w1.eval(x / self.m) * self.w2.eval(y / self.n)
    }

    pub fn support_box(&self) -> ((f64, f64), (f64, f64)) {
        (
            (self.w1.support.0 * self.m, self.w1.support.1 * self.m),
            (self.w2.support.0 * self.n, self.w2.support.1 * self.n),
        )
    }

    /// G^(u, v) = integral G(x, y) e(-u x - v y) dx dy.
    pub fn fourier(&self, u: f64, v: f64) -> Complex64 {
        weight_fourier(&self.w1, self.m * u)
            * weight_fourier(&self.w2, self.n * v)
            * (self.m * self.n)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TailPolicy {
    pub target: f64,
    /// Certified dual-side tail must stay below `tail_fraction * target`.
    pub tail_fraction: f64,
    /// Largest lattice radius allowed on either axis.
    pub max_radius: usize,
}

impl Default for TailPolicy {
    fn default() -> Self {
        TailPolicy {
            target: 1e-6,
            tail_fraction: 0.1,
            max_radius: 1 << 20,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VoronoiCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    pub radii: (usize, usize),
    pub tail_bound: f64,
}

fn int_range(lo: f64, hi: f64) -> std::ops::RangeInclusive<i64> {
    (lo.ceil() as i64).max(1)..=(hi.floor() as i64)
}

fn head_bound(w: &SmoothWeight, step: f64, t: usize) -> f64 {
    let mut s = fourier_decay_bound(w, 0.0);
    for m in 1..=t {
        s += 2.0 * fourier_decay_bound(w, m as f64 * step);
    }
    s
}

fn smallest_radius(w: &SmoothWeight, step: f64, eps: f64, cap: usize) -> Option<usize> {
    let mut hi = 1usize;
    while fourier_tail_bound(w, step, hi) > eps {
        hi *= 2;
        if hi > 2 * cap {
            return None;
        }
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if fourier_tail_bound(w, step, mid) > eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (hi <= cap).then_some(hi)
}

pub fn tempered_voronoi_check(
    ctx: &PrimeContext,
    k: &PeriodicFunction,
    g: &TestFunction2D,
    policy: TailPolicy,
) -> Result<VoronoiCheck> {
    let q = ctx.q as usize;
    assert_eq!(k.q, ctx.q);
    let ((x0, x1), (y0, y1)) = g.support_box();

    // left side: direct double loop
    let ms: Vec<(i64, f64)> = int_range(x0, x1)
        .map(|m| (m, g.w1.eval(m as f64 / g.m)))
        .collect();
    let ns: Vec<(i64, f64)> = int_range(y0, y1)
        .map(|n| (n, g.w2.eval(n as f64 / g.n)))
        .collect();
    let mut lhs = NeumaierC::new();
    for &(m, wm) in &ms {
        for &(n, wn) in &ns {
            lhs.add(k.values[((m * n) as usize) % q] * (wm * wn));
        }
    }
    let lhs = lhs.total();

    // right side
    let hat = fourier_transform(k);
    let check = voronoi_from_hat(ctx, &hat);
    let max_check = check.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let budget = policy.tail_fraction * policy.target;
    let (s1, s2) = (g.m / q as f64, g.n / q as f64);
    let scale = g.m * g.n / q as f64 * max_check;

    let mut eps = budget;
    let (t1, t2, bound) = loop {
        let t1 = smallest_radius(&g.w1, s1, eps, policy.max_radius);
        let t2 = smallest_radius(&g.w2, s2, eps, policy.max_radius);
        let (Some(t1), Some(t2)) = (t1, t2) else {
            return Err(Error::TruncationNotCertified(format!(
                "radius exceeds {}",
                policy.max_radius
            )));
        };
        let (tail1, tail2) = (
            fourier_tail_bound(&g.w1, s1, t1),
            fourier_tail_bound(&g.w2, s2, t2),
        );
        let (h1, h2) = (head_bound(&g.w1, s1, t1), head_bound(&g.w2, s2, t2));
        let bound = scale * (tail1 * (h2 + tail2) + h1 * tail2);
        if bound <= budget {
            break (t1, t2, bound);
        }
        eps /= 10.0;
        if eps < 1e-300 {
            return Err(Error::TruncationNotCertified(
                "tail bound does not decrease".into(),
            ));
        }
    };

    let aggregate = |w: &SmoothWeight, scale: f64, t: usize| {
        let mut acc = vec![NeumaierC::new(); q];
        for m in -(t as i64)..=(t as i64) {
            let v = weight_fourier(w, m as f64 * scale) * (scale * q as f64);
            acc[m.rem_euclid(q as i64) as usize].add(v);
        }
        acc.iter().map(|a| a.total()).collect::<Vec<_>>()
    };
    let a = aggregate(&g.w1, s1, t1);
    let b = aggregate(&g.w2, s2, t2);
    let mut dual = NeumaierC::new();
    for (r, ar) in a.iter().enumerate() {
        let mut row = NeumaierC::new();
        for (s, bs) in b.iter().enumerate() {
            row.add(check.values[(r * s) % q] * bs);
        }
        dual.add(*ar * row.total());
    }
    let mut sw1 = Neumaier::new();
    ms.iter().for_each(|&(_, w)| sw1.add(w));
    let mut sw2 = Neumaier::new();
    ns.iter().for_each(|&(_, w)| sw2.add(w));
    let zero_term = hat.values[0] / ctx.sqrt_q() * (sw1.total() * sw2.total());
    let rhs = zero_term + dual.total() / q as f64;
    Ok(VoronoiCheck {
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
        radii: (t1, t2),
        tail_bound: bound,
    })
}

pub fn tempered_voronoi_residual(
    ctx: &PrimeContext,
    k: &PeriodicFunction,
    g: &TestFunction2D,
    policy: TailPolicy,
) -> Result<f64> {
    tempered_voronoi_check(ctx, k, g, policy).map(|c| c.residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::make_prime_context;
    use crate::weights::make_bump;

    fn naive_hat(k: &PeriodicFunction) -> Vec<Complex64> {
        let q = k.q as usize;
        (0..q)
            .map(|h| {
                let s: Complex64 = (0..q)
                    .map(|n| {
                        k.values[n]
                            * Complex64::from_polar(
                                1.0,
                                std::f64::consts::TAU * ((h * n) % q) as f64 / q as f64,
                            )
                    })
                    .sum();
                s / (q as f64).sqrt()
            })
            .collect()
    }

    #[test]
    fn hat_examples() {
        let c = make_prime_context(7).unwrap();
        let mut d = vec![Complex64::new(0.0, 0.0); 7];
        d[0] = Complex64::new(1.0, 0.0);
        let hat = fourier_transform(&PeriodicFunction::new(7, d));
        for v in &hat.values {
            assert!((v - 1.0 / 7f64.sqrt()).norm() < 1e-15);
        }
        let one = PeriodicFunction::from_real(7, &[1.0; 7]);
        let hat = fourier_transform(&one);
        assert!((hat.values[0] - 7f64.sqrt()).norm() < 1e-14);
        assert!(hat.values[1..].iter().all(|v| v.norm() < 1e-14));
        let kl = PeriodicFunction::kloosterman(&c, 1);
        let hat = fourier_transform(&kl);
        assert!(hat.values[0].norm() < 1e-14);
        for h in 1..7 {
            assert!((hat.values[h] - c.e(7 - c.inv(h))).norm() < 1e-14);
        }
        assert!(naive_hat(&kl)
            .iter()
            .zip(&hat.values)
            .all(|(a, b)| (a - b).norm() < 1e-13));
    }

    #[test]
    fn check_examples() {
        let c7 = make_prime_context(7).unwrap();
        let v = voronoi_transform(&c7, &PeriodicFunction::kloosterman(&c7, 1));
        for n in 0..7 {
            let e = if n == 1 {
                6.0 / 7f64.sqrt()
            } else {
                -1.0 / 7f64.sqrt()
            };
            assert!((v.values[n] - e).norm() < 1e-14);
        }
        assert!((6.0 / 7f64.sqrt() - 2.267787).abs() < 1e-6);
        let c5 = make_prime_context(5).unwrap();
        let v = voronoi_transform(&c5, &PeriodicFunction::from_real(5, &[1.0; 5]));
        assert!(v.values.iter().all(|z| z.norm() < 1e-14));
        // direct double sum for Kl(3n; 11)
        let c11 = make_prime_context(11).unwrap();
        let k = PeriodicFunction::kloosterman(&c11, 3);
        let hat = naive_hat(&k);
        for n in 0..11usize {
            let s: Complex64 = (1..11usize)
                .map(|h| hat[h] * c11.e((c11.inv(h) * n) % 11))
                .sum::<Complex64>()
                / 11f64.sqrt();
            let e = if n == 3 {
                10.0 / 11f64.sqrt()
            } else {
                -1.0 / 11f64.sqrt()
            };
            assert!((s - e).norm() < 1e-12);
        }
    }

    #[test]
    fn lemma_examples() {
        let c7 = make_prime_context(7).unwrap();
        assert!(verify_kloosterman_lemma(&c7, 1).unwrap() < 1e-10);
        let c97 = make_prime_context(97).unwrap();
        assert!(verify_kloosterman_lemma(&c97, 13).unwrap() < 1e-10);
        assert!(matches!(
            verify_kloosterman_lemma(&c7, 0),
            Err(Error::NotCoprime(..))
        ));
    }

    #[test]
    fn constant_function_voronoi_is_trivial() {
        let c = make_prime_context(31).unwrap();
        let g = TestFunction2D::new(
            make_bump(1.0, (0.5, 2.0)).unwrap(),
            make_bump(1.0, (0.5, 2.0)).unwrap(),
            10.0,
            12.0,
        );
        let r = tempered_voronoi_residual(
            &c,
            &PeriodicFunction::from_real(31, &[1.0; 31]),
            &g,
            TailPolicy::default(),
        )
        .unwrap();
        assert!(r < 1e-8, "{r}");
    }
}
