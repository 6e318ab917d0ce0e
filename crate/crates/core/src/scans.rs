//! Fixed parameter grids for the bound-ratio experiments. Each family is a
//! list of reports over increasing q; a family passes when every primary
//! ratio stays under the ceiling and the per-q maximum does not grow with q.

use crate::arith::{kloosterman_all, make_prime_context, PrimeContext};
use crate::bilinear::{bilinear_sharp, bilinear_smooth, type_ii_sum, CoefficientSeq, ThirdWeight};
use crate::error::Result;
use crate::modforms::{cuspidal_bound_report_with, delta_coefficients_cached};
use crate::primes::{prime_kloosterman_sharp, prime_kloosterman_smooth};
use crate::report::{log_log_slope, BoundReport};
use crate::weights::make_bump;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;

/// Pilot-calibrated ceiling on |sum| / envelope.
pub const RATIO_CEILING: f64 = 10.0;
/// Largest tolerated slope of log(max ratio) against log q.
pub const SLOPE_CEILING: f64 = 0.05;

pub const FAMILIES: [&str; 7] = [
    "bilinear_sharp",
    "bilinear_smooth",
    "bilinear_smooth3",
    "cuspidal",
    "type_ii",
    "prime_smooth",
    "prime_sharp",
];

pub const SMALL_QS: [u64; 3] = [211, 1009, 10007];
pub const WIDE_QS: [u64; 4] = [211, 1009, 10007, 100003];
pub const PRIME_QS: [u64; 3] = [1009, 10007, 100003];

struct Modulus {
    ctx: PrimeContext,
    kl: Vec<f64>,
}

fn modulus(q: u64) -> Result<Modulus> {
    let ctx = make_prime_context(q)?;
    let kl = kloosterman_all(&ctx);
    Ok(Modulus { ctx, kl })
}

/// Runs one family over its grid.
pub fn run_family(name: &str, seed: u64, cache: Option<&Path>) -> Result<Vec<BoundReport>> {
    let mut out = Vec::new();
    match name {
        "bilinear_sharp" => {
            for q in SMALL_QS {
                let m = modulus(q)?;
                for delta in [0.05, 0.15] {
                    let len = (q as f64).powf(0.5 + delta).ceil() as u64;
                    out.push(
                        bilinear_sharp(&m.ctx, &m.kl, (1, len), (1, len))?.param("delta", delta),
                    );
                }
            }
        }
        "bilinear_smooth" | "bilinear_smooth3" => {
            let w = make_bump(1.0, (0.5, 2.0))?;
            for q in WIDE_QS {
                let m = modulus(q)?;
                for t in [0.05, 0.15, 0.3] {
                    let mn = (q as f64).powf(0.5 + t);
                    let side = mn.sqrt();
                    for a in [1, m.ctx.g as i64] {
                        let third =
                            (name == "bilinear_smooth3").then(|| ThirdWeight { w: &w, y: mn });
                        let r = bilinear_smooth(&m.ctx, &m.kl, a, &w, &w, side, side, third)?;
                        out.push(r.param("a", a as f64).param("t", t));
                    }
                }
            }
        }
        "cuspidal" => {
            let w = make_bump(1.0, (0.5, 2.0))?;
            let top = (2.0 * (*SMALL_QS.last().unwrap() as f64).powf(1.25)).ceil() as usize + 2;
            let hd = delta_coefficients_cached(top, cache)?;
            for q in SMALL_QS {
                let m = modulus(q)?;
                for e in [0.75, 1.0, 1.25] {
                    for a in [1, m.ctx.g as i64] {
                        let n = (q as f64).powf(e);
                        let r = cuspidal_bound_report_with(&hd, &m.ctx, &m.kl, a, &w, n)?;
                        out.push(r.param("exponent", e));
                    }
                }
            }
        }
        "type_ii" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for q in SMALL_QS {
                let m = modulus(q)?;
                for e in [0.5, 0.6] {
                    let l = (q as f64).powf(e).ceil() as u64 / 2;
                    let mut sign =
                        || Complex64::new(if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0);
                    let alpha = CoefficientSeq::from_fn(l, |_| sign());
                    let beta = CoefficientSeq::from_fn(l, |_| sign());
                    out.push(
                        type_ii_sum(&m.ctx, &m.kl, &alpha, &beta, None, 1.0)?.param("exponent", e),
                    );
                }
            }
        }
        "prime_smooth" => {
            let w = make_bump(2.0, (0.5, 2.0))?;
            for q in PRIME_QS {
                let m = modulus(q)?;
                for e in [0.9, 1.0] {
                    let x = (q as f64).powf(e);
                    out.push(prime_kloosterman_smooth(&m.ctx, &m.kl, &w, x)?.param("exponent", e));
                }
            }
        }
        "prime_sharp" => {
            for q in PRIME_QS {
                let m = modulus(q)?;
                for e in [0.9, 1.0] {
                    let x = (q as f64).powf(e);
                    out.push(
                        prime_kloosterman_sharp(&m.ctx, &m.kl, x)?
                            .0
                            .param("exponent", e),
                    );
                }
            }
        }
        _ => {
            return Err(crate::Error::ParameterOutOfRange(format!(
                "unknown scan family {name}"
            )))
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct FamilyVerdict {
    pub family: String,
    pub max_ratio: f64,
    /// Slope of log(max ratio at q) against log q.
    pub slope: f64,
    pub per_q: Vec<(f64, f64)>,
}

impl FamilyVerdict {
    pub fn passes(&self) -> bool {
        self.max_ratio < RATIO_CEILING && self.slope <= SLOPE_CEILING
    }
}

pub fn assess(family: &str, reports: &[BoundReport]) -> FamilyVerdict {
    let mut per_q: Vec<(f64, f64)> = Vec::new();
    for r in reports {
        let q = r.params["q"];
        let v = r.primary_ratio();
        match per_q.iter_mut().find(|p| p.0 == q) {
            Some(p) => p.1 = p.1.max(v),
            None => per_q.push((q, v)),
        }
    }
    let max_ratio = per_q.iter().map(|p| p.1).fold(0.0, f64::max);
    FamilyVerdict {
        family: family.to_string(),
        max_ratio,
        slope: log_log_slope(&per_q),
        per_q,
    }
}
