//! Fourth moment of Dirichlet L-functions at s = 1/2, shifted convolution
//! sums of the divisor function, quadrilinear Kloosterman sums and the
//! exponent bookkeeping behind the moment bound.

use crate::arith::fft::dft;
use crate::arith::sum::{Neumaier, NeumaierC};
use crate::arith::{arith_tables, character, make_prime_context, PrimeContext};
use crate::error::{Error, Result};
use crate::report::BoundReport;
use crate::weights::bump::bump_cdf;
use crate::weights::SmoothWeight;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::gamma::gamma_ur;

pub const ZETA_HALF: f64 = -1.4603545088095868;

// B_2, B_4, ..., B_26
const BERNOULLI: [f64; 13] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
];

const EM_TERMS: usize = 16;
const EM_ORDER: usize = 12;

/// Hurwitz zeta(s, a) for real s > 0, s != 1, a > 0, by Euler-Maclaurin.
/// The remainder is bounded by the first omitted correction term.
pub fn hurwitz_zeta(s: f64, a: f64) -> Result<f64> {
    if !(s > 0.0) || s == 1.0 || !(a > 0.0) {
        return Err(Error::ParameterOutOfRange(format!("s = {s}, a = {a}")));
    }
    let mut acc = Neumaier::new();
    for n in 0..EM_TERMS {
        acc.add((n as f64 + a).powf(-s));
    }
    let x = EM_TERMS as f64 + a;
    acc.add(x.powf(1.0 - s) / (s - 1.0));
    acc.add(0.5 * x.powf(-s));
    // t_k = B_2k / (2k)! * s (s+1) ... (s+2k-2) * x^(-s-2k+1)
    let mut rising = s; // s (s+1) ... (s+2k-2)
    let mut fact = 2.0; // (2k)!
    let mut xp = x.powf(-s - 1.0);
    let mut last = 0.0;
    for k in 1..=EM_ORDER + 1 {
        let t = BERNOULLI[k - 1] / fact * rising * xp;
        if k <= EM_ORDER {
            acc.add(t);
        } else {
            last = t.abs();
        }
        rising *= (s + 2.0 * k as f64 - 1.0) * (s + 2.0 * k as f64);
        fact *= (2 * k + 1) as f64 * (2 * k + 2) as f64;
        xp /= x * x;
    }
    if !(last < 1e-10) {
        return Err(Error::ConvergenceFailure(format!(
            "Euler-Maclaurin remainder {last:e} at a = {a}"
        )));
    }
    Ok(acc.total())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LMethod {
    Oracle,
    Afe,
}

#[derive(Clone, Debug)]
pub struct LValueRecord {
    pub q: u64,
    pub j: u64,
    pub value: Complex64,
    pub method: LMethod,
}

fn hurwitz_by_dlog(ctx: &PrimeContext) -> Result<Vec<f64>> {
    let q = ctx.q as f64;
    ctx.pow_table
        .iter()
        .map(|&a| hurwitz_zeta(0.5, a as f64 / q))
        .collect()
}

/// L(1/2, chi_j) = q^(-1/2) sum_a chi_j(a) zeta(1/2, a/q). For j = 0 this
/// sum equals zeta(1/2) (1 - q^(-1/2)).
pub fn l_half_oracle(ctx: &PrimeContext, j: u64) -> Result<LValueRecord> {
    let chi = character(ctx, j)?;
    let q = ctx.q as f64;
    let mut acc = NeumaierC::new();
    for a in 1..ctx.q as usize {
        acc.add(chi.values[a] * hurwitz_zeta(0.5, a as f64 / q)?);
    }
    Ok(LValueRecord {
        q: ctx.q,
        j,
        value: acc.total() / q.sqrt(),
        method: LMethod::Oracle,
    })
}

/// All L(1/2, chi_j), j = 0..q-2, from one transform over the character group.
pub fn l_half_oracle_all(ctx: &PrimeContext) -> Result<Vec<Complex64>> {
    let h: Vec<Complex64> = hurwitz_by_dlog(ctx)?
        .into_iter()
        .map(Complex64::from)
        .collect();
    let s = ctx.sqrt_q();
    Ok(dft(&h, 1).into_iter().map(|z| z / s).collect())
}

/// Gauss sums tau(chi_j) for all j.
pub fn gauss_sums(ctx: &PrimeContext) -> Vec<Complex64> {
    let h: Vec<Complex64> = ctx.pow_table.iter().map(|&a| ctx.e(a as usize)).collect();
    dft(&h, 1)
}

/// Smooth truncation: 1 up to 4 q^(1/2), 0 from 8 q^(1/2).
fn afe_cutoff(n: f64, sq: f64) -> f64 {
    1.0 - bump_cdf((n / sq - 6.0) / 2.0)
}

/// n^(-1/2) Gamma(s0, pi n^2 / q) / Gamma(s0) times the cutoff, s0 = (1/2 + a)/2.
fn afe_terms(q: u64, parity: u32) -> Vec<(usize, f64)> {
    let sq = (q as f64).sqrt();
    let s0 = (0.5 + parity as f64) / 2.0;
    let top = (8.0 * sq).ceil() as usize;
    (1..=top)
        .filter(|&n| n as u64 % q != 0)
        .map(|n| {
            let nf = n as f64;
            let x = std::f64::consts::PI * nf * nf / q as f64;
            (n, gamma_ur(s0, x) * afe_cutoff(nf, sq) / nf.sqrt())
        })
        .collect()
}

fn root_number(tau: Complex64, parity: u32, q: u64) -> Result<Complex64> {
    let ia = if parity == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(0.0, 1.0)
    };
    let eps = tau / (ia * (q as f64).sqrt());
    if (eps.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::GaussSumDegenerate(q));
    }
    Ok(eps)
}

/// L(1/2, chi_j) from the approximate functional equation
/// L = sum chi(n) n^(-1/2) V(n) + eps(chi) sum conj(chi(n)) n^(-1/2) V(n).
pub fn l_half_afe(ctx: &PrimeContext, j: u64) -> Result<LValueRecord> {
    if j == 0 {
        return Err(Error::ParameterOutOfRange(
            "AFE needs a non-principal character".into(),
        ));
    }
    let chi = character(ctx, j)?;
    let parity = chi.parity();
    let mut tau = NeumaierC::new();
    for x in 1..ctx.q as usize {
        tau.add(chi.values[x] * ctx.e(x));
    }
    let eps = root_number(tau.total(), parity, ctx.q)?;
    let mut s = NeumaierC::new();
    for (n, v) in afe_terms(ctx.q, parity) {
        s.add(chi.values[n % ctx.q as usize] * v);
    }
    let s = s.total();
    Ok(LValueRecord {
        q: ctx.q,
        j,
        value: s + eps * s.conj(),
        method: LMethod::Afe,
    })
}

/// AFE values for all j >= 1 (index 0 holds the principal oracle value).
pub fn l_half_afe_all(ctx: &PrimeContext) -> Result<Vec<Complex64>> {
    let n1 = (ctx.q - 1) as usize;
    let taus = gauss_sums(ctx);
    let mut sums = Vec::new();
    for parity in 0..2u32 {
        let mut h = vec![Complex64::new(0.0, 0.0); n1];
        for (n, v) in afe_terms(ctx.q, parity) {
            h[ctx.dlog_table[n % ctx.q as usize] as usize] += v;
        }
        sums.push(dft(&h, 1));
    }
    let mut out = vec![Complex64::new(ZETA_HALF * (1.0 - 1.0 / ctx.sqrt_q()), 0.0); n1];
    for j in 1..n1 {
        let parity = (j % 2) as u32;
        let s = sums[parity as usize][j];
        out[j] = s + root_number(taus[j], parity, ctx.q)? * s.conj();
    }
    Ok(out)
}

/// (1/(q-1)) sum over all characters mod q of |L(1/2, chi)|^4.
pub fn fourth_moment(ctx: &PrimeContext) -> Result<f64> {
    let l = l_half_oracle_all(ctx)?;
    let mut acc = Neumaier::new();
    l.iter().for_each(|z| acc.add(z.norm_sqr().powi(2)));
    Ok(acc.total() / l.len() as f64)
}

/// Same average, one character at a time.
pub fn fourth_moment_per_character(ctx: &PrimeContext) -> Result<f64> {
    let vals: Vec<f64> = (0..ctx.q - 1)
        .into_par_iter()
        .map(|j| l_half_oracle(ctx, j).map(|r| r.value.norm_sqr().powi(2)))
        .collect::<Result<_>>()?;
    let mut acc = Neumaier::new();
    vals.iter().for_each(|&v| acc.add(v));
    Ok(acc.total() / vals.len() as f64)
}

#[derive(Clone, Debug)]
pub struct MomentSeries {
    pub qs: Vec<u64>,
    pub values: Vec<f64>,
    /// Coefficients of 1, L, ..., L^4 with L = log q.
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
}

pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Vec<f64> {
    let a = DMatrix::from_fn(xs.len(), degree + 1, |i, k| xs[i].powi(k as i32));
    let b = DVector::from_column_slice(ys);
    let svd = a.svd(true, true);
    svd.solve(&b, 1e-14)
        .expect("svd with both factors")
        .iter()
        .copied()
        .collect()
}

pub fn moment_series(qs: &[u64]) -> Result<MomentSeries> {
    let values: Vec<f64> = qs
        .par_iter()
        .map(|&q| make_prime_context(q).and_then(|c| fourth_moment(&c)))
        .collect::<Result<_>>()?;
    let ls: Vec<f64> = qs.iter().map(|&q| (q as f64).ln()).collect();
    let coefficients = polyfit(&ls, &values, 4);
    let residuals = ls
        .iter()
        .zip(&values)
        .map(|(l, v)| v - coefficients.iter().rev().fold(0.0, |acc, c| acc * l + c))
        .collect();
    Ok(MomentSeries {
        qs: qs.to_vec(),
        values,
        coefficients,
        residuals,
    })
}

// ---------------------------------------------------------------------------
// shifted convolution and quadrilinear sums

fn weighted_divisors(d: &[u32], w: &SmoothWeight, scale: f64) -> Vec<(usize, f64)> {
    let lo = (w.support.0 * scale).floor().max(1.0) as usize;
    let hi = (w.support.1 * scale).ceil() as usize;
    (lo..=hi.min(d.len() - 1))
        .filter_map(|m| {
            let v = w.eval(m as f64 / scale);
            (v != 0.0).then(|| (m, d[m] as f64 * v))
        })
        .collect()
}

/// B(M, N) = (MN)^(-1/2) sum_{m = +-n mod q, m != n} d(m) d(n) W1(m/M) W2(n/N)
///           - (q (MN)^(1/2))^(-1) sum_{m, n} d(m) d(n) W1(m/M) W2(n/N).
pub fn shifted_convolution(
    ctx: &PrimeContext,
    w1: &SmoothWeight,
    w2: &SmoothWeight,
    m: f64,
    n: f64,
    sign: i32,
) -> Result<f64> {
    if !(m >= 1.0 && n >= 1.0) || (sign != 1 && sign != -1) {
        return Err(Error::ParameterOutOfRange(format!(
            "M = {m}, N = {n}, sign = {sign}"
        )));
    }
    let q = ctx.q as usize;
    let top = (w1.support.1 * m).max(w2.support.1 * n).ceil() as usize + 1;
    let t = arith_tables(top);
    let a = weighted_divisors(&t.divisor, w1, m);
    let b = weighted_divisors(&t.divisor, w2, n);
    let mut br = vec![Neumaier::new(); q];
    for &(k, v) in &b {
        br[k % q].add(v);
    }
    let br: Vec<f64> = br.iter().map(Neumaier::total).collect();
    let mut bmap = std::collections::HashMap::new();
    b.iter().for_each(|&(k, v)| {
        bmap.insert(k, v);
    });
    let (mut first, mut sa, mut sb) = (Neumaier::new(), Neumaier::new(), Neumaier::new());
    for &(k, v) in &a {
        let r = if sign == 1 { k % q } else { (q - k % q) % q };
        first.add(v * br[r]);
        // the diagonal m = n satisfies the congruence when sign = + or q | m
        if sign == 1 || k % q == 0 {
            if let Some(&u) = bmap.get(&k) {
                first.add(-v * u);
            }
        }
        sa.add(v);
    }
    b.iter().for_each(|&(_, v)| sb.add(v));
    let mn = (m * n).sqrt();
    Ok(first.total() / mn - sa.total() * sb.total() / (ctx.q as f64 * mn))
}

/// Multiplicative convolution c(l) = sum_{ab = l} W1(a/M1) W2(b/M2).
fn convolve_weights(w1: &SmoothWeight, m1: f64, w2: &SmoothWeight, m2: f64) -> Vec<f64> {
    let r = |w: &SmoothWeight, s: f64| {
        let lo = (w.support.0 * s).floor().max(1.0) as usize;
        let hi = (w.support.1 * s).ceil() as usize;
        (lo..=hi)
            .map(|k| (k, w.eval(k as f64 / s)))
            .filter(|p| p.1 != 0.0)
            .collect::<Vec<_>>()
    };
    let (a, b) = (r(w1, m1), r(w2, m2));
    let top = a.last().map_or(0, |p| p.0) * b.last().map_or(0, |p| p.0);
    let mut c = vec![0.0; top + 1];
    for &(i, u) in &a {
        for &(k, v) in &b {
            c[i * k] += u * v;
        }
    }
    c
}

/// (q M1 M2 M3 M4)^(-1/2) sum W1(m1/M1) ... W4(m4/M4) Kl(+-m1 m2 m3 m4; q).
pub fn quadrilinear_sum(
    ctx: &PrimeContext,
    kl: &[f64],
    w: [&SmoothWeight; 4],
    m: [f64; 4],
    sign: i32,
) -> Result<BoundReport> {
    if m.windows(2).any(|p| p[0] > p[1]) || m[0] < 1.0 || (sign != 1 && sign != -1) {
        return Err(Error::ParameterOutOfRange(format!(
            "M = {m:?}, sign = {sign}"
        )));
    }
    let q = ctx.q as usize;
    let fold = |c: &[f64]| {
        let mut r = vec![Neumaier::new(); q];
        for (l, &v) in c.iter().enumerate() {
            if v != 0.0 {
                r[l % q].add(v);
            }
        }
        r.iter().map(Neumaier::total).collect::<Vec<f64>>()
    };
    let a = fold(&convolve_weights(w[0], m[0], w[1], m[1]));
    let b = fold(&convolve_weights(w[2], m[2], w[3], m[3]));
    let rows: Vec<Neumaier> = (1..q)
        .into_par_iter()
        .map(|r| {
            let mut acc = Neumaier::new();
            if a[r] != 0.0 {
                for s in 1..q {
                    if b[s] != 0.0 {
                        let idx = if sign == 1 {
                            r * s % q
                        } else {
                            (q - r * s % q) % q
                        };
                        acc.add(a[r] * b[s] * kl[idx]);
                    }
                }
            }
            acc
        })
        .collect();
    // m1 m2 m3 m4 = 0 mod q contributes Kl(0) = -q^(-1/2)
    let zero = a[0] * b.iter().sum::<f64>() + b[0] * a[1..].iter().sum::<f64>();
    let mut total = Neumaier::new();
    rows.iter().for_each(|r| total.merge(r));
    total.add(zero * kl[0]);
    let qf = ctx.q as f64;
    let prod: f64 = m.iter().product();
    let value = total.total() / (qf * prod).sqrt();
    let env_a = m[0] * m[1] * (qf.sqrt() + m[2] * m[3] / qf.sqrt()) / (qf * prod).sqrt();
    let env_b = (m[0] * m[1] * m[2] / qf).sqrt() + m[3].sqrt() * qf.powf(-0.25);
    Ok(BoundReport::new("quadrilinear", value.into())
        .param("q", qf)
        .param("M1", m[0])
        .param("M2", m[1])
        .param("M3", m[2])
        .param("M4", m[3])
        .param("sign", sign as f64)
        .envelope(
            "paper",
            "min(bilinear route, type II route)",
            env_a.min(env_b),
        )
        .diag("bilinear_route", env_a)
        .diag("type_ii_route", env_b))
}

// ---------------------------------------------------------------------------
// exponent certificate

#[derive(Clone, Debug)]
pub struct MomentCertificate {
    pub eta: f64,
    pub worst_margin: f64,
    pub slack: f64,
    pub tuples: u64,
    pub worst_tuple: [f64; 4],
}

impl MomentCertificate {
    pub fn passes(&self) -> bool {
        self.worst_margin >= -self.slack
    }
}

fn moment_margin(mu: [f64; 4], eta: f64) -> f64 {
    let a = -eta - (mu[0] + mu[1] + mu[2] - 1.0) / 2.0;
    let b = -eta - (-0.25 + mu[3] / 2.0);
    a.min(b)
}

/// Minimum over sorted grid 4-tuples (mu1 <= ... <= mu4) with
/// 1 - 2 eta <= sum <= 1 + 4 eta (1 + 2 eta when tightened) and
/// 0 <= mu3 + mu4 - mu1 - mu2 <= 2 eta of the margin in both final exponents.
pub fn moment_exponent_certificate(
    eta: f64,
    grid_step: f64,
    tightened: bool,
) -> Result<MomentCertificate> {
    if !(eta > 0.0 && eta <= 0.125) {
        return Err(Error::ParameterOutOfRange(format!("eta = {eta}")));
    }
    if !(grid_step > 0.0) || grid_step > 1.0 / 40.0 + 1e-15 {
        return Err(Error::GridTooCoarse(grid_step));
    }
    let n = (1.0 / grid_step).round() as i64;
    let h = 1.0 / n as f64;
    let upper = if tightened {
        1.0 + 2.0 * eta
    } else {
        1.0 + 4.0 * eta
    };
    let (lo_i, hi_i) = (
        ((1.0 - 2.0 * eta) * n as f64 - 1e-9).ceil() as i64,
        (upper * n as f64 + 1e-9).floor() as i64,
    );
    let gap = (2.0 * eta * n as f64 + 1e-9).floor() as i64;
    let mut worst = f64::INFINITY;
    let mut worst_tuple = [0.0; 4];
    let mut count = 0u64;
    for a in 0..=hi_i / 4 {
        for b in a..=(hi_i - a) / 3 {
            for c in b..=(hi_i - a - b) / 2 {
                for d in c..=(hi_i - a - b - c) {
                    let s = a + b + c + d;
                    let g = c + d - a - b;
                    if s < lo_i || g > gap {
                        continue;
                    }
                    count += 1;
                    let mu = [a as f64 * h, b as f64 * h, c as f64 * h, d as f64 * h];
                    let m = moment_margin(mu, eta);
                    if m < worst {
                        worst = m;
                        worst_tuple = mu;
                    }
                }
            }
        }
    }
    Ok(MomentCertificate {
        eta,
        worst_margin: worst,
        slack: 0.75 * h,
        tuples: count,
        worst_tuple,
    })
}

/// Largest eta (to 1e-9) whose grid margin is nonnegative.
pub fn moment_eta_max(grid_step: f64, tightened: bool) -> Result<f64> {
    let ok = |e: f64| {
        moment_exponent_certificate(e, grid_step, tightened).map(|c| c.worst_margin >= -1e-12)
    };
    let (mut lo, mut hi) = (1e-6, 0.125);
    if !ok(lo)? {
        return Ok(0.0);
    }
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
