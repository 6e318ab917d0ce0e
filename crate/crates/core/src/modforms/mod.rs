//! Hecke eigenvalues of Delta (level 1, weight 12), checks of the Voronoi
//! formulas for cusp forms, and the cuspidal correlation-sum report.

pub mod tau;

use crate::arith::sum::{Neumaier, NeumaierC};
use crate::arith::{kloosterman_all, PrimeContext};
use crate::error::{Error, Result};
use crate::report::BoundReport;
use crate::weights::{sqrt_bump, BesselTransform, SmoothWeight};
use num_complex::Complex64;
use rayon::prelude::*;
use std::path::Path;

pub const WEIGHT: u32 = 12;
/// Highest integration-by-parts order tried for the dual tail.
const IBP_ORDER: usize = 40;

#[derive(Clone, Debug)]
pub struct HeckeData {
    pub k: u32,
    pub eps: i32,
    pub tau: Vec<i128>,
    pub lambda: Vec<f64>,
}

impl HeckeData {
    pub fn n_max(&self) -> usize {
        self.tau.len() - 1
    }

    fn from_tau(tau: Vec<i128>) -> Self {
        let e = (WEIGHT - 1) as f64 / 2.0;
        let lambda = tau
            .iter()
            .enumerate()
            .map(|(n, &t)| {
                if n == 0 {
                    0.0
                } else {
                    t as f64 / (n as f64).powf(e)
                }
            })
            .collect();
        // root number (-1)^(k/2)
        let eps = if (WEIGHT / 2) % 2 == 0 { 1 } else { -1 };
        HeckeData {
            k: WEIGHT,
            eps,
            tau,
            lambda,
        }
    }
}

pub fn delta_coefficients(n_max: usize) -> Result<HeckeData> {
    Ok(HeckeData::from_tau(tau::tau_table(n_max)?))
}

pub fn delta_coefficients_cached(n_max: usize, cache_dir: Option<&Path>) -> Result<HeckeData> {
    Ok(HeckeData::from_tau(tau::tau_table_cached(
        n_max, cache_dir,
    )?))
}

// ---------------------------------------------------------------------------
// dual-tail certification

/// sum_{n > T} d(n) n^{-s}, bounded through D(x) <= x (log x + 1), s > 1.
fn divisor_tail(s: f64, t: f64) -> f64 {
    let lt = t.ln();
    s * (t.powf(1.0 - s)) * ((lt + 1.0) / (s - 1.0) + 1.0 / ((s - 1.0) * (s - 1.0)))
}

/// sum over n > T, n = a mod q, of d(n) n^{-s}, using d(n) <= 2 sqrt(n), s > 3/2.
fn progression_tail(s: f64, t: f64, q: f64) -> f64 {
    let p = 2.0 * t.powf(0.5 - s) + 2.0 * t.powf(1.5 - s) / (q * (s - 1.5));
    p.min(divisor_tail(s, t))
}

/// Cutoff T such that the dual series beyond T contributes at most `budget`.
/// The dual terms are c1 * lambda(n) W~(n delta) over n = a mod q and
/// c2 * lambda(n) W~(n delta) over all n.
#[derive(Clone, Copy, Debug)]
pub struct DualCutoff {
    pub cutoff: usize,
    pub order: usize,
    pub bound: f64,
}

fn dual_cutoff(
    norms: &[f64],
    delta: f64,
    q: f64,
    c1: f64,
    c2: f64,
    budget: f64,
    cap: usize,
) -> Option<DualCutoff> {
    let tau = std::f64::consts::TAU;
    let mut best: Option<DualCutoff> = None;
    for (k, &nk) in norms.iter().enumerate().skip(4) {
        if !(nk > 0.0 && nk.is_finite()) {
            continue;
        }
        let s = k as f64 / 2.0;
        // |W~(n delta)| <= bk * n^{-s}
        let log_bk = tau.ln() + nk.ln() - k as f64 * tau.ln() - s * delta.ln();
        let tail = |t: f64| {
            let v = c1 * progression_tail(s, t, q) + c2 * divisor_tail(s, t);
            (log_bk + v.ln()).exp()
        };
        let mut hi = 2.0f64;
        while tail(hi) > budget {
            hi *= 2.0;
            if hi > 4.0 * cap as f64 {
                break;
            }
        }
        if tail(hi) > budget {
            continue;
        }
        let mut lo = hi / 2.0;
        while hi - lo > 1.0 {
            let mid = (0.5 * (lo + hi)).floor();
            if tail(mid) > budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = hi as usize;
        if best.map_or(true, |b| t < b.cutoff) {
            best = Some(DualCutoff {
                cutoff: t,
                order: k,
                bound: tail(hi),
            });
        }
    }
    best.filter(|b| b.cutoff <= cap)
}

#[derive(Clone, Debug)]
pub struct CuspCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    pub cutoff: usize,
    pub ibp_order: usize,
    pub tail_bound: f64,
    pub quadrature_bound: f64,
}

pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Weight used for the two-sided Voronoi checks. Its Bessel transform decays
/// fast enough that the dual side needs about as many terms as the left side.
pub fn voronoi_test_weight() -> SmoothWeight {
    sqrt_bump(0.01, 100.0).expect("valid support")
}

struct DualSetup {
    cut: DualCutoff,
    delta: f64,
}

fn setup(
    w: &SmoothWeight,
    bt: &BesselTransform,
    q: f64,
    n: f64,
    c1: f64,
    c2: f64,
    tol: f64,
    cap: usize,
) -> Result<DualSetup> {
    let delta = n / (q * q);
    let norms = bt.ibp_norms(IBP_ORDER);
    let cut =
        dual_cutoff(&norms, delta, q, c1, c2, 0.1 * tol, usize::MAX / 8).ok_or_else(|| {
            Error::TailNotCertified("no integration-by-parts order controls the dual tail".into())
        })?;
    let need = cut.cutoff.max((w.support.1 * n).floor() as usize);
    if need > cap {
        return Err(Error::TailNotCertified(format!(
            "need lambda(n) up to {need}, have {cap}"
        )));
    }
    Ok(DualSetup { cut, delta })
}

/// Number of Hecke eigenvalues needed by `cusp_voronoi_check` (`twisted` selects
/// the classical additive-twist formula).
pub fn required_n_max(w: &SmoothWeight, q: u64, n: f64, tol: f64, twisted: bool) -> Result<usize> {
    let bt = BesselTransform::new(w, WEIGHT)?;
    let qf = q as f64;
    let (c1, c2) = if twisted {
        (0.0, n / qf)
    } else {
        (n / qf.sqrt(), n / qf.powf(1.5))
    };
    let s = setup(w, &bt, qf, n, c1, c2, tol, usize::MAX)?;
    Ok(s.cut.cutoff.max((w.support.1 * n).floor() as usize))
}

fn lhs_range(w: &SmoothWeight, n: f64) -> std::ops::RangeInclusive<usize> {
    ((w.support.0 * n).ceil().max(1.0) as usize)..=((w.support.1 * n).floor() as usize)
}

fn dual_values(bt: &BesselTransform, delta: f64, t: usize) -> Result<Vec<f64>> {
    (1..=t)
        .into_par_iter()
        .map(|n| bt.eval(n as f64 * delta))
        .collect()
}

/// Two-sided check of
/// sum lambda(n) Kl(a n; q) W(n/N)
///   = eps N/sqrt(q) sum_{n = a (q)} lambda(n) W~(n N/q^2) - eps N/q^{3/2} sum_n lambda(n) W~(n N/q^2).
pub fn cusp_voronoi_check(
    hd: &HeckeData,
    ctx: &PrimeContext,
    a: i64,
    w: &SmoothWeight,
    n: f64,
    tol: f64,
) -> Result<CuspCheck> {
    let q = ctx.q as usize;
    let ar = ctx.reduce(a);
    if ar == 0 {
        return Err(Error::NotCoprime(a.unsigned_abs(), ctx.q));
    }
    let qf = ctx.q as f64;
    let bt = BesselTransform::new(w, hd.k)?;
    let (c1, c2) = (n / qf.sqrt(), n / qf.powf(1.5));
    let s = setup(w, &bt, qf, n, c1, c2, tol, hd.n_max())?;

    let kl = kloosterman_all(ctx);
    let mut lhs = Neumaier::new();
    for m in lhs_range(w, n) {
        lhs.add(hd.lambda[m] * kl[(ar * (m % q)) % q] * w.eval(m as f64 / n));
    }

    let t = s.cut.cutoff;
    let wt = dual_values(&bt, s.delta, t)?;
    let (mut r1, mut r2) = (Neumaier::new(), Neumaier::new());
    let (mut abs1, mut abs2) = (0.0, 0.0);
    for m in 1..=t {
        let v = hd.lambda[m] * wt[m - 1];
        if m % q == ar {
            r1.add(v);
            abs1 += hd.lambda[m].abs();
        }
        r2.add(v);
        abs2 += hd.lambda[m].abs();
    }
    let eps = hd.eps as f64;
    let rhs = eps * c1 * r1.total() - eps * c2 * r2.total();
    let lhs = lhs.total();
    Ok(CuspCheck {
        lhs: lhs.into(),
        rhs: rhs.into(),
        residual: (lhs - rhs).abs(),
        cutoff: t,
        ibp_order: s.cut.order,
        tail_bound: s.cut.bound,
        quadrature_bound: (c1 * abs1 + c2 * abs2) * bt.tol * std::f64::consts::TAU,
    })
}

pub fn cusp_voronoi_residual(
    hd: &HeckeData,
    ctx: &PrimeContext,
    a: i64,
    w: &SmoothWeight,
    n: f64,
) -> Result<f64> {
    cusp_voronoi_check(hd, ctx, a, w, n, DEFAULT_TOLERANCE).map(|c| c.residual)
}

/// Two-sided check of
/// sum lambda(n) W(n/N) e(-a n/q) = eps N/q sum lambda(n) e(n/(a q)) W~(N n/q^2),
/// where 1/a is the inverse of a modulo q.
pub fn twisted_voronoi_check(
    hd: &HeckeData,
    ctx: &PrimeContext,
    a: i64,
    w: &SmoothWeight,
    n: f64,
    tol: f64,
) -> Result<CuspCheck> {
    let q = ctx.q as usize;
    let ar = ctx.reduce(a);
    if ar == 0 {
        return Err(Error::NotCoprime(a.unsigned_abs(), ctx.q));
    }
    let qf = ctx.q as f64;
    let bt = BesselTransform::new(w, hd.k)?;
    let c = n / qf;
    let s = setup(w, &bt, qf, n, 0.0, c, tol, hd.n_max())?;

    let mut lhs = NeumaierC::new();
    for m in lhs_range(w, n) {
        lhs.add(ctx.e(q - (ar * (m % q)) % q) * (hd.lambda[m] * w.eval(m as f64 / n)));
    }
    let abar = ctx.inv(ar);
    let t = s.cut.cutoff;
    let wt = dual_values(&bt, s.delta, t)?;
    let mut r = NeumaierC::new();
    let mut abs = 0.0;
    for m in 1..=t {
        r.add(ctx.e((abar * (m % q)) % q) * (hd.lambda[m] * wt[m - 1]));
        abs += hd.lambda[m].abs();
    }
    let lhs = lhs.total();
    let rhs = r.total() * (hd.eps as f64 * c);
    Ok(CuspCheck {
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
        cutoff: t,
        ibp_order: s.cut.order,
        tail_bound: s.cut.bound,
        quadrature_bound: c * abs * bt.tol * std::f64::consts::TAU,
    })
}

pub fn twisted_voronoi_residual(
    hd: &HeckeData,
    ctx: &PrimeContext,
    a: i64,
    w: &SmoothWeight,
    n: f64,
) -> Result<f64> {
    twisted_voronoi_check(hd, ctx, a, w, n, DEFAULT_TOLERANCE).map(|c| c.residual)
}

// ---------------------------------------------------------------------------
// cuspidal sums

pub fn cuspidal_sum(hd: &HeckeData, kl: &[f64], a: usize, w: &SmoothWeight, n: f64) -> Result<f64> {
    let q = kl.len();
    let range = lhs_range(w, n);
    if *range.end() > hd.n_max() {
        return Err(Error::ParameterOutOfRange(format!(
            "lambda needed up to {}",
            range.end()
        )));
    }
    let mut s = Neumaier::new();
    for m in range {
        s.add(hd.lambda[m] * kl[(a * (m % q)) % q] * w.eval(m as f64 / n));
    }
    Ok(s.total())
}

pub fn cuspidal_bound_report(
    hd: &HeckeData,
    ctx: &PrimeContext,
    a: i64,
    w: &SmoothWeight,
    n: f64,
) -> Result<BoundReport> {
    let kl = kloosterman_all(ctx);
    cuspidal_bound_report_with(hd, ctx, &kl, a, w, n)
}

pub fn cuspidal_bound_report_with(
    hd: &HeckeData,
    ctx: &PrimeContext,
    kl: &[f64],
    a: i64,
    w: &SmoothWeight,
    n: f64,
) -> Result<BoundReport> {
    let ar = ctx.reduce(a);
    if ar == 0 {
        return Err(Error::NotCoprime(a.unsigned_abs(), ctx.q));
    }
    let s = cuspidal_sum(hd, kl, ar, w, n)?;
    let q = ctx.q as f64;
    Ok(BoundReport::new("cuspidal", s.into())
        .param("q", q)
        .param("a", ar as f64)
        .param("N", n)
        .param("Q", w.q_param)
        .envelope("paper", "q^(1/2) + N/q^(1/2)", q.sqrt() + n / q.sqrt())
        .envelope(
            "fkm",
            "N (1 + q/N)^(1/2) q^(-1/8)",
            n * (1.0 + q / n).sqrt() * q.powf(-0.125),
        ))
}
