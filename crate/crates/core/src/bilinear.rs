//! Sharp, smoothed and type-II bilinear sums of Kloosterman sums.

use crate::arith::sum::{merge_ordered_c, Neumaier, NeumaierC};
use crate::arith::PrimeContext;
use crate::error::{Error, Result};
use crate::weights::SmoothWeight;
use num_complex::Complex64;
use rayon::prelude::*;

pub use crate::report::{BoundReport, Envelope};

fn paper_envelope(q: f64, mn: f64) -> f64 {
    q.sqrt() + mn / q.sqrt()
}

fn fkm_envelope(q: f64, mn: f64) -> f64 {
    mn * (1.0 + q / mn).sqrt() * q.powf(-0.125)
}

/// sum over m in [m0, m1], n in [n0, n1] of Kl(m n; q), from a Kl table.
pub fn bilinear_sharp(
    ctx: &PrimeContext,
    kl: &[f64],
    m_range: (u64, u64),
    n_range: (u64, u64),
) -> Result<BoundReport> {
    let q = ctx.q;
    for &(lo, hi) in &[m_range, n_range] {
        if lo < 1 || hi > q - 1 || lo > hi {
            return Err(Error::RangeOutOfBounds(lo, hi, q - 1));
        }
    }
    let qu = q as usize;
    let rows: Vec<Neumaier> = (m_range.0..=m_range.1)
        .into_par_iter()
        .map(|m| {
            let mut acc = Neumaier::new();
            let mu = m as usize;
            let mut r = (mu * n_range.0 as usize) % qu;
            for _ in n_range.0..=n_range.1 {
                acc.add(kl[r]);
                r += mu;
                if r >= qu {
                    r -= qu;
                }
            }
            acc
        })
        .collect();
    let mut total = Neumaier::new();
    rows.iter().for_each(|r| total.merge(r));
    let mm = (m_range.1 - m_range.0 + 1) as f64;
    let nn = (n_range.1 - n_range.0 + 1) as f64;
    let qf = q as f64;
    Ok(BoundReport::new("bilinear_sharp", total.total().into())
        .param("q", qf)
        .param("M", mm)
        .param("N", nn)
        .param("m0", m_range.0 as f64)
        .param("n0", n_range.0 as f64)
        .envelope("paper", "q^(1/2) + MN/q^(1/2)", paper_envelope(qf, mm * nn))
        .envelope("trivial", "2MN", 2.0 * mm * nn))
}

fn int_span(w: &SmoothWeight, scale: f64) -> (i64, i64) {
    (
        ((w.support.0 * scale).ceil() as i64).max(1),
        (w.support.1 * scale).floor() as i64,
    )
}

/// Optional third weight W3(m n / Y).
pub struct ThirdWeight<'a> {
    pub w: &'a SmoothWeight,
    pub y: f64,
}

/// sum W1(m/M) W2(n/N) [W3(mn/Y)] Kl(a m n; q).
#[allow(clippy::too_many_arguments)]
pub fn bilinear_smooth(
    ctx: &PrimeContext,
    kl: &[f64],
    a: i64,
    w1: &SmoothWeight,
    w2: &SmoothWeight,
    m: f64,
    n: f64,
    w3: Option<ThirdWeight>,
) -> Result<BoundReport> {
    let ar = ctx.reduce(a);
    if ar == 0 {
        return Err(Error::NotCoprime(a.unsigned_abs(), ctx.q));
    }
    if let Some(t) = &w3 {
        if t.y < 1.0 {
            return Err(Error::ParameterOutOfRange(format!("Y = {}", t.y)));
        }
    }
    let q = ctx.q as usize;
    let qf = q as f64;
    let (m0, m1) = int_span(w1, m);
    let (n0, n1) = int_span(w2, n);
    let mut empty = m0 > m1 || n0 > n1;
    if let Some(t) = &w3 {
        let lo = w1.support.0 * w2.support.0 * m * n;
        let hi = w1.support.1 * w2.support.1 * m * n;
        if hi <= t.w.support.0 * t.y || lo >= t.w.support.1 * t.y {
            empty = true;
        }
    }
    let mut qmax = w1.q_param.max(w2.q_param);
    if let Some(t) = &w3 {
        qmax = qmax.max(t.w.q_param);
    }
    let value = if empty {
        0.0
    } else {
        let wn: Vec<f64> = (n0..=n1).map(|k| w2.eval(k as f64 / n)).collect();
        let rows: Vec<Neumaier> = (m0..=m1)
            .into_par_iter()
            .map(|mi| {
                let mut acc = Neumaier::new();
                let wm = w1.eval(mi as f64 / m);
                if wm == 0.0 {
                    return acc;
                }
                let step = (ar * (mi as usize % q)) % q;
                let mut r = (step * (n0 as usize % q)) % q;
                for (j, &wv) in wn.iter().enumerate() {
                    if wv != 0.0 {
                        let w3v = match &w3 {
                            Some(t) => t.w.eval((mi * (n0 + j as i64)) as f64 / t.y),
                            None => 1.0,
                        };
                        if w3v != 0.0 {
                            acc.add(wm * wv * w3v * kl[r]);
                        }
                    }
                    r += step;
                    if r >= q {
                        r -= q;
                    }
                }
                acc
            })
            .collect();
        let mut total = Neumaier::new();
        rows.iter().for_each(|r| total.merge(r));
        total.total()
    };
    let mut rep = BoundReport::new(
        if w3.is_some() {
            "bilinear_smooth3"
        } else {
            "bilinear_smooth"
        },
        value.into(),
    )
    .param("q", qf)
    .param("a", ar as f64)
    .param("M", m)
    .param("N", n)
    .param("Q", qmax);
    if let Some(t) = &w3 {
        rep = rep.param("Y", t.y);
    }
    Ok(rep
        .envelope(
            "paper",
            "Q^2 (q^(1/2) + MN/q^(1/2))",
            qmax * qmax * paper_envelope(qf, m * n),
        )
        .envelope(
            "fkm",
            "MN (1 + q/MN)^(1/2) q^(-1/8)",
            fkm_envelope(qf, m * n),
        )
        .diag("empty", empty as u8 as f64))
}

// ---------------------------------------------------------------------------
// type II sums

/// Coefficients supported on [L, 2L]; `values[i]` is the coefficient at L + i.
#[derive(Clone, Debug)]
pub struct CoefficientSeq {
    pub l: u64,
    pub values: Vec<Complex64>,
    norm: f64,
}

impl CoefficientSeq {
    pub fn new(l: u64, values: Vec<Complex64>) -> Result<Self> {
        if l == 0 || values.len() as u64 > l + 1 {
            return Err(Error::ParameterOutOfRange(format!(
                "{} values for support [{l}, {}]",
                values.len(),
                2 * l
            )));
        }
        let norm = values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        Ok(CoefficientSeq { l, values, norm })
    }

    pub fn from_fn<F: FnMut(u64) -> Complex64>(l: u64, f: F) -> Self {
        Self::new(l, (l..=2 * l).map(f).collect()).expect("length fits the support")
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn at(&self, m: u64) -> Complex64 {
        if m < self.l {
            return Complex64::new(0.0, 0.0);
        }
        self.values
            .get((m - self.l) as usize)
            .copied()
            .unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.l + i as u64, v))
    }
}

/// sum alpha_m beta_n Kl(m n; q) W(m n / Y), with W = 1 when `w` is None.
pub fn type_ii_sum(
    ctx: &PrimeContext,
    kl: &[f64],
    alpha: &CoefficientSeq,
    beta: &CoefficientSeq,
    w: Option<&SmoothWeight>,
    y: f64,
) -> Result<BoundReport> {
    let q = ctx.q as usize;
    let last = |s: &CoefficientSeq| s.l + s.values.len() as u64 - 1;
    if last(alpha) > ctx.q || last(beta) > ctx.q {
        return Err(Error::RangeOutOfBounds(
            alpha.l.min(beta.l),
            last(alpha).max(last(beta)),
            ctx.q,
        ));
    }
    let rows: Vec<NeumaierC> = alpha
        .values
        .par_iter()
        .enumerate()
        .map(|(i, &am)| {
            let m = alpha.l + i as u64;
            let mut acc = NeumaierC::new();
            for (n, bn) in beta.iter() {
                let wv = match w {
                    Some(w) => w.eval((m * n) as f64 / y),
                    None => 1.0,
                };
                if wv != 0.0 {
                    acc.add(am * bn * (kl[((m * n) % q as u64) as usize] * wv));
                }
            }
            acc
        })
        .collect();
    let value = merge_ordered_c(&rows);
    let (mm, nn) = (alpha.l as f64, beta.l as f64);
    let qq = w.map_or(1.0, |w| w.q_param);
    let qf = ctx.q as f64;
    let env =
        alpha.norm() * beta.norm() * (mm * nn).sqrt() * (1.0 / mm + qq * qf.sqrt() / nn).sqrt();
    Ok(BoundReport::new("type_ii", value)
        .param("q", qf)
        .param("M", mm)
        .param("N", nn)
        .param("Q", qq)
        .param("Y", y)
        .envelope("paper", "|a| |b| (MN)^(1/2) (1/M + Q q^(1/2)/N)^(1/2)", env)
        .envelope(
            "trivial",
            "2 |a|_1 |b|_1",
            2.0 * alpha.values.iter().map(|z| z.norm()).sum::<f64>()
                * beta.values.iter().map(|z| z.norm()).sum::<f64>(),
        ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{kloosterman_all, kloosterman_direct, make_prime_context};
    use crate::weights::make_bump;

    #[test]
    fn single_cell_and_representation_counts() {
        let ctx = make_prime_context(101).unwrap();
        let kl = kloosterman_all(&ctx);
        let r = bilinear_sharp(&ctx, &kl, (7, 7), (9, 9)).unwrap();
        assert!((r.sum_value.re - kl[63]).abs() < 1e-15 && r.sum_value.norm() <= 2.0);
        let full = bilinear_sharp(&ctx, &kl, (1, 100), (1, 100)).unwrap();
        let mut c = vec![0u64; 101];
        for m in 1..=100usize {
            for n in 1..=100usize {
                c[(m * n) % 101] += 1;
            }
        }
        let oracle: f64 = (0..101)
            .map(|t| c[t] as f64 * kloosterman_direct(t as i64, &ctx))
            .sum();
        assert!((full.sum_value.re - oracle).abs() < 1e-8);
        assert!(matches!(
            bilinear_sharp(&ctx, &kl, (0, 5), (1, 5)),
            Err(Error::RangeOutOfBounds(..))
        ));
        assert!(full.is_consistent());
    }

    #[test]
    fn smooth_matches_direct_terms() {
        let ctx = make_prime_context(1009).unwrap();
        let kl = kloosterman_all(&ctx);
        let w = make_bump(1.0, (0.5, 2.0)).unwrap();
        let r = bilinear_smooth(&ctx, &kl, 1, &w, &w, 64.0, 64.0, None).unwrap();
        let mut direct = 0.0;
        for m in 32..=128i64 {
            for n in 32..=128i64 {
                let c = w.eval(m as f64 / 64.0) * w.eval(n as f64 / 64.0);
                if c != 0.0 {
                    direct += c * kloosterman_direct(m * n, &ctx);
                }
            }
        }
        assert!((r.sum_value.re - direct).abs() < 1e-8);
        let empty = bilinear_smooth(&ctx, &kl, 1, &w, &w, 0.2, 64.0, None).unwrap();
        assert_eq!(empty.sum_value.re, 0.0);
        assert!(matches!(
            bilinear_smooth(&ctx, &kl, 1009, &w, &w, 4.0, 4.0, None),
            Err(Error::NotCoprime(..))
        ));
    }

    #[test]
    fn third_weight_with_covering_plateau() {
        let ctx = make_prime_context(211).unwrap();
        let kl = kloosterman_all(&ctx);
        let w = make_bump(1.0, (0.5, 2.0)).unwrap();
        let w3 = make_bump(4.0, (0.1, 5.0)).unwrap();
        assert_eq!(w3.eval(0.25), 1.0);
        assert_eq!(w3.eval(4.0), 1.0);
        let two = bilinear_smooth(&ctx, &kl, 1, &w, &w, 20.0, 20.0, None).unwrap();
        let three = bilinear_smooth(
            &ctx,
            &kl,
            1,
            &w,
            &w,
            20.0,
            20.0,
            Some(ThirdWeight { w: &w3, y: 400.0 }),
        )
        .unwrap();
        assert!((two.sum_value - three.sum_value).norm() < 1e-12);
        let far = bilinear_smooth(
            &ctx,
            &kl,
            1,
            &w,
            &w,
            20.0,
            20.0,
            Some(ThirdWeight { w: &w, y: 1e6 }),
        )
        .unwrap();
        assert_eq!(far.diagnostics["empty"], 1.0);
    }

    #[test]
    fn type_ii_consistency() {
        let ctx = make_prime_context(1009).unwrap();
        let kl = kloosterman_all(&ctx);
        let one = CoefficientSeq::new(40, vec![Complex64::new(1.0, 0.0)]).unwrap();
        let two = CoefficientSeq::new(30, vec![Complex64::new(1.0, 0.0)]).unwrap();
        let r = type_ii_sum(&ctx, &kl, &one, &two, None, 1.0).unwrap();
        assert!((r.sum_value.re - kl[1200 % 1009]).abs() < 1e-15);
        assert!(r.sum_value.norm() <= 2.0 * one.norm() * two.norm());
        // beta sampled from a weight reproduces the smoothed sum
        let w = make_bump(2.0, (1.0, 2.0)).unwrap();
        let alpha = CoefficientSeq::from_fn(32, |m| Complex64::new(w.eval(m as f64 / 32.0), 0.0));
        let beta = CoefficientSeq::from_fn(32, |n| Complex64::new(w.eval(n as f64 / 32.0), 0.0));
        let t2 = type_ii_sum(&ctx, &kl, &alpha, &beta, None, 1.0).unwrap();
        let s = bilinear_smooth(&ctx, &kl, 1, &w, &w, 32.0, 32.0, None).unwrap();
        assert!((t2.sum_value - s.sum_value).norm() < 1e-10);
    }
}
