//! Prime-field arithmetic, Kloosterman sums, Dirichlet characters and sieved
//! arithmetic functions.

pub mod fft;
pub mod sum;
mod tables;

pub use tables::{arith_tables, ArithTables};

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::TAU;
use sum::{Neumaier, NeumaierC};

// ---------------------------------------------------------------------------
// primality

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin; the first twelve primes as witnesses cover all
/// n < 3.3e24, hence all of u64.
pub fn is_prime(n: u64) -> bool {
    const W: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &W {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'outer: for &a in &W {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn primitive_root(q: u64) -> u64 {
    if q == 2 {
        return 1;
    }
    let fs = prime_factors(q - 1);
    (2..q)
        .find(|&g| fs.iter().all(|&f| pow_mod(g, (q - 1) / f, q) != 1))
        .expect("prime modulus has a primitive root")
}

pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).filter(|&n| is_prime(n)).collect()
}

// ---------------------------------------------------------------------------
// prime context

/// A prime modulus with inverse, discrete-log and root-of-unity tables.
#[derive(Clone, Debug)]
pub struct PrimeContext {
    pub q: u64,
    pub g: u64,
    /// `inv_table[x] * x = 1 mod q`; entry 0 is 0.
    pub inv_table: Vec<u32>,
    /// `dlog_table[g^k mod q] = k`; entry 0 is `u32::MAX`.
    pub dlog_table: Vec<u32>,
    /// `pow_table[k] = g^k mod q` for k in 0..q-1.
    pub pow_table: Vec<u32>,
    roots: Vec<Complex64>,
}

pub fn make_prime_context(q: u64) -> Result<PrimeContext> {
    if !is_prime(q) {
        return Err(Error::CompositeModulus(q));
    }
    if q > u32::MAX as u64 {
        return Err(Error::ParameterOutOfRange(format!(
            "q = {q} too large for tables"
        )));
    }
    let n = q as usize;
    let g = primitive_root(q);
    let mut pow_table = Vec::with_capacity(n - 1);
    let mut dlog_table = vec![u32::MAX; n];
    let mut x = 1u64;
    for k in 0..n - 1 {
        pow_table.push(x as u32);
        dlog_table[x as usize] = k as u32;
        x = x * g % q;
    }
    // x^-1 = g^(q-1-k)
    let mut inv_table = vec![0u32; n];
    for x in 1..n {
        let k = dlog_table[x] as usize;
        inv_table[x] = pow_table[(n - 1 - k) % (n - 1)];
    }
    let roots = (0..n)
        .map(|k| Complex64::from_polar(1.0, TAU * (k as f64) / (q as f64)))
        .collect();
    Ok(PrimeContext {
        q,
        g,
        inv_table,
        dlog_table,
        pow_table,
        roots,
    })
}

impl PrimeContext {
    #[inline]
    pub fn reduce(&self, m: i64) -> usize {
        m.rem_euclid(self.q as i64) as usize
    }

    #[inline]
    pub fn inv(&self, x: usize) -> usize {
        self.inv_table[x % self.q as usize] as usize
    }

    /// e_q(k) = exp(2 pi i k / q).
    #[inline]
    pub fn e(&self, k: usize) -> Complex64 {
        self.roots[k % self.q as usize]
    }

    pub fn sqrt_q(&self) -> f64 {
        (self.q as f64).sqrt()
    }
}

// ---------------------------------------------------------------------------
// Kloosterman sums

/// Kl(m;q) from the definition, as a real cosine sum.
pub fn kloosterman_direct(m: i64, ctx: &PrimeContext) -> f64 {
    let q = ctx.q as usize;
    let m = ctx.reduce(m);
    let mut acc = Neumaier::new();
    for x in 1..q {
        let k = (ctx.inv(x) + (m * x) % q) % q;
        acc.add(ctx.e(k).re);
    }
    acc.total() / ctx.sqrt_q()
}

/// Complex-arithmetic evaluation of the same sum, for realness checks.
pub fn kloosterman_direct_complex(m: i64, ctx: &PrimeContext) -> Complex64 {
    let q = ctx.q as usize;
    let m = ctx.reduce(m);
    let mut acc = NeumaierC::new();
    for x in 1..q {
        acc.add(ctx.e(ctx.inv(x)) * ctx.e((m * x) % q));
    }
    acc.total() / ctx.sqrt_q()
}

/// All Kl(m;q), m = 0..q-1, as the normalized transform of x -> e_q(1/x).
pub fn kloosterman_all(ctx: &PrimeContext) -> Vec<f64> {
    let q = ctx.q as usize;
    let mut f = vec![Complex64::new(0.0, 0.0); q];
    for (x, v) in f.iter_mut().enumerate().skip(1) {
        *v = ctx.e(ctx.inv(x));
    }
    let s = ctx.sqrt_q();
    fft::dft(&f, 1).into_iter().map(|z| z.re / s).collect()
}

// ---------------------------------------------------------------------------
// characters

#[derive(Clone, Debug)]
pub struct DirichletCharacter {
    pub q: u64,
    pub j: u64,
    pub values: Vec<Complex64>,
}

impl DirichletCharacter {
    #[inline]
    pub fn at(&self, n: i64) -> Complex64 {
        self.values[n.rem_euclid(self.q as i64) as usize]
    }

    /// 0 for even characters, 1 for odd ones.
    pub fn parity(&self) -> u32 {
        (self.j % 2) as u32
    }
}

/// chi_j(g^k) = e(jk/(q-1)).
pub fn character(ctx: &PrimeContext, j: u64) -> Result<DirichletCharacter> {
    let n1 = ctx.q - 1;
    if j >= n1.max(1) {
        return Err(Error::IndexOutOfRange {
            index: j,
            max: n1.saturating_sub(1),
        });
    }
    let mut values = vec![Complex64::new(0.0, 0.0); ctx.q as usize];
    for x in 1..ctx.q as usize {
        let k = ctx.dlog_table[x] as u64;
        let r = (j * k) % n1;
        values[x] = Complex64::from_polar(1.0, TAU * r as f64 / n1 as f64);
    }
    Ok(DirichletCharacter {
        q: ctx.q,
        j,
        values,
    })
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inv_egcd(a: i64, m: i64) -> i64 {
        let (mut r0, mut r1, mut s0, mut s1) = (a, m, 1i64, 0i64);
        while r1 != 0 {
            let t = r0 / r1;
            (r0, r1) = (r1, r0 - t * r1);
            (s0, s1) = (s1, s0 - t * s1);
        }
        s0.rem_euclid(m)
    }

    #[test]
    fn context_examples() {
        let c2 = make_prime_context(2).unwrap();
        assert_eq!(c2.inv_table[1], 1);
        let c7 = make_prime_context(7).unwrap();
        assert_eq!(c7.inv_table[3], 5);
        assert_eq!(
            make_prime_context(6).unwrap_err(),
            Error::CompositeModulus(6)
        );
        assert!(make_prime_context(1).is_err());
    }

    #[test]
    fn inverses_match_extended_gcd() {
        for q in [3u64, 5, 101, 1009] {
            let c = make_prime_context(q).unwrap();
            for x in 1..q {
                assert_eq!(c.inv_table[x as usize] as i64, inv_egcd(x as i64, q as i64));
            }
            let mut seen = vec![false; q as usize - 1];
            for x in 1..q as usize {
                seen[c.dlog_table[x] as usize] = true;
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn miller_rabin_agrees_with_trial_division() {
        for n in 0..5000u64 {
            let trial = n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
            assert_eq!(is_prime(n), trial, "n={n}");
        }
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to 2,3,5,7
        assert!(is_prime(18_446_744_073_709_551_557));
    }

    #[test]
    fn kloosterman_examples() {
        let k = |m, q| kloosterman_direct(m, &make_prime_context(q).unwrap());
        assert!((k(1, 2) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((k(1, 3) + 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let five = (2.0 + 2.0 * (0.8 * std::f64::consts::PI).cos()) / 5f64.sqrt();
        assert!((k(1, 5) - five).abs() < 1e-15);
        assert!((five - 0.170820).abs() < 1e-6);
    }

    #[test]
    fn fast_table_matches_direct() {
        for q in [2u64, 3, 5, 101] {
            let c = make_prime_context(q).unwrap();
            let t = kloosterman_all(&c);
            for m in 0..q as usize {
                assert!((t[m] - kloosterman_direct(m as i64, &c)).abs() < 1e-10);
            }
            assert!(sum::sum_f64(t.iter().copied()).abs() < 1e-10);
        }
    }

    #[test]
    fn realness_of_complex_evaluation() {
        let c = make_prime_context(97).unwrap();
        for m in 0..97 {
            assert!(kloosterman_direct_complex(m, &c).im.abs() < 1e-12);
        }
    }

    #[test]
    fn character_examples() {
        let c = make_prime_context(5).unwrap();
        assert_eq!(c.g, 2);
        let chi0 = character(&c, 0).unwrap();
        for n in 1..5 {
            assert!((chi0.at(n) - 1.0).norm() < 1e-15);
        }
        let chi2 = character(&c, 2).unwrap();
        assert!((chi2.at(2) + 1.0).norm() < 1e-15);
        assert!((chi2.at(4) - 1.0).norm() < 1e-15);
        let chi1 = character(&c, 1).unwrap();
        assert!((chi1.at(2) - Complex64::i()).norm() < 1e-15);
        assert!(matches!(
            character(&c, 4),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn quadratic_character_is_legendre() {
        let q = 103u64;
        let c = make_prime_context(q).unwrap();
        let chi = character(&c, (q - 1) / 2).unwrap();
        for n in 1..q {
            let euler = pow_mod(n, (q - 1) / 2, q);
            let leg = if euler == 1 { 1.0 } else { -1.0 };
            assert!((chi.at(n as i64) - leg).norm() < 1e-12);
        }
    }
}
