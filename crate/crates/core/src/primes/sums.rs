//! Sums of Kloosterman sums over primes, smooth and sharp.

use crate::arith::sum::Neumaier;
use crate::arith::{arith_tables, ArithTables, PrimeContext};
use crate::error::{Error, Result};
use crate::report::BoundReport;
use crate::weights::{sharp_cutoff_sandwich, SmoothWeight};

fn check_x(ctx: &PrimeContext, x: f64) -> Result<()> {
    if !(x >= 2.0 && x <= ctx.q as f64) {
        return Err(Error::ParameterOutOfRange(format!(
            "X = {x} outside [2, {}]",
            ctx.q
        )));
    }
    Ok(())
}

/// Smoothed sum of Kl(p; q) over primes, with the von Mangoldt variant and
/// its exact prime-power part.
pub fn prime_kloosterman_smooth(
    ctx: &PrimeContext,
    kl: &[f64],
    w: &SmoothWeight,
    x: f64,
) -> Result<BoundReport> {
    check_x(ctx, x)?;
    let q = ctx.q as usize;
    let top = (w.support.1 * x).floor() as usize;
    let t = arith_tables(top.max(2));
    let mut prime_sum = Neumaier::new();
    let mut log_prime_sum = Neumaier::new();
    let mut trivial = Neumaier::new();
    for &p in &t.primes {
        let wv = w.eval(p as f64 / x);
        if wv == 0.0 {
            continue;
        }
        let k = kl[p as usize % q];
        prime_sum.add(wv * k);
        log_prime_sum.add((p as f64).ln() * wv * k);
        trivial.add(2.0 * wv);
    }
    let mut lambda_sum = Neumaier::new();
    let mut power_part = Neumaier::new();
    let mut power_bound = Neumaier::new();
    for n in 2..=top {
        let l = t.mangoldt[n];
        if l == 0.0 {
            continue;
        }
        let is_power = t.lpf[n] as usize != n;
        if is_power {
            power_bound.add(2.0 * l);
        }
        let wv = w.eval(n as f64 / x);
        if wv == 0.0 {
            continue;
        }
        lambda_sum.add(l * wv * kl[n % q]);
        if is_power {
            power_part.add(l * wv * kl[n % q]);
        }
    }
    let qf = ctx.q as f64;
    let s = prime_sum.total();
    Ok(BoundReport::new("prime_smooth", s.into())
        .param("q", qf)
        .param("X", x)
        .param("Q", w.q_param)
        .envelope(
            "paper",
            "q^(1/4) Q^(1/2) X^(2/3)",
            qf.powf(0.25) * w.q_param.sqrt() * x.powf(2.0 / 3.0),
        )
        .envelope("trivial", "2 sum_p W(p/X)", trivial.total())
        .diag("lambda_sum", lambda_sum.total())
        .diag("log_prime_sum", log_prime_sum.total())
        .diag("prime_power_part", power_part.total())
        .diag("prime_power_bound", power_bound.total()))
}

/// One window (Y, 3Y/2] of the sharp-cutoff reduction.
#[derive(Clone, Debug)]
pub struct SandwichWindow {
    pub y: f64,
    pub delta: f64,
    pub clamped: bool,
    pub sharp: f64,
    pub outer: f64,
    pub inner: f64,
    pub fringe_primes: u64,
}

fn prime_pi(t: &ArithTables, x: f64) -> u64 {
    if x < 2.0 {
        return 0;
    }
    let n = (x.floor() as u64).min(t.n_max as u64);
    t.primes.partition_point(|&p| p <= n) as u64
}

/// Primes in (a, b].
fn primes_between(t: &ArithTables, a: f64, b: f64) -> u64 {
    prime_pi(t, b).saturating_sub(prime_pi(t, a))
}

pub const DELTA_CLAMP: f64 = 0.49;

/// Sum of Kl(p; q) over p <= X, directly and through smooth sandwiches on
/// the windows (X (2/3)^(i+1), X (2/3)^i] down to X0 = sqrt(X).
pub fn prime_kloosterman_sharp(
    ctx: &PrimeContext,
    kl: &[f64],
    x: f64,
) -> Result<(BoundReport, Vec<SandwichWindow>)> {
    check_x(ctx, x)?;
    let q = ctx.q as usize;
    let qf = ctx.q as f64;
    let top = (2.0 * x).ceil() as usize;
    let t = arith_tables(top);
    let xi = x.floor() as u64;

    let mut direct = Neumaier::new();
    for &p in t.primes.iter().take_while(|&&p| p <= xi) {
        direct.add(kl[p as usize % q]);
    }

    let x0 = x.sqrt();
    let mut windows = Vec::new();
    let mut hi = x;
    let mut small_cut = x;
    while hi * 2.0 / 3.0 >= x0 && hi * 2.0 / 3.0 >= 2.0 {
        let y = hi * 2.0 / 3.0;
        let raw = qf.powf(1.0 / 6.0) * y.powf(-2.0 / 9.0);
        let clamped = raw >= 0.5;
        let delta = if clamped { DELTA_CLAMP } else { raw };
        let (wo, wi) = sharp_cutoff_sandwich(y, delta)?;
        let (mut sharp, mut outer, mut inner) = (Neumaier::new(), Neumaier::new(), Neumaier::new());
        let lo_p = (y * (1.0 - delta)).floor() as u64;
        let hi_p = (y * (1.5 + delta)).ceil() as u64;
        for &p in t
            .primes
            .iter()
            .skip_while(|&&p| p < lo_p)
            .take_while(|&&p| p <= hi_p)
        {
            let u = p as f64 / y;
            let k = kl[p as usize % q];
            if p as f64 > y && p as f64 <= hi {
                sharp.add(k);
            }
            outer.add(wo.eval(u) * k);
            inner.add(wi.eval(u) * k);
        }
        // outer weight differs from the window indicator only on the fringes
        let fringe =
            primes_between(&t, y * (1.0 - delta), y) + primes_between(&t, hi, y * (1.5 + delta));
        windows.push(SandwichWindow {
            y,
            delta,
            clamped,
            sharp: sharp.total(),
            outer: outer.total(),
            inner: inner.total(),
            fringe_primes: fringe,
        });
        hi = y;
        small_cut = y;
    }
    let mut small = Neumaier::new();
    for &p in t.primes.iter().take_while(|&&p| (p as f64) <= small_cut) {
        small.add(kl[p as usize % q]);
    }
    let mut recon = small;
    let mut fringe_total = 0u64;
    for w in &windows {
        recon.add(w.outer);
        fringe_total += w.fringe_primes;
    }
    let d = direct.total();
    let diff = (d - recon.total()).abs();
    let pi_x = prime_pi(&t, x) as f64;
    let report = BoundReport::new("prime_sharp", d.into())
        .param("q", qf)
        .param("X", x)
        .envelope(
            "paper",
            "q^(1/6) X^(7/9)",
            qf.powf(1.0 / 6.0) * x.powf(7.0 / 9.0),
        )
        .envelope("trivial", "2 pi(X)", 2.0 * pi_x)
        .diag("pi_x", pi_x)
        .diag("sandwich", recon.total())
        .diag("sandwich_difference", diff)
        .diag("fringe_bound", 2.0 * fringe_total as f64)
        .diag("windows", windows.len() as f64)
        .diag(
            "delta_clamped",
            windows.iter().any(|w| w.clamped) as u8 as f64,
        );
    Ok((report, windows))
}
