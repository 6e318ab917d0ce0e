//! Heath-Brown's identity: exact reconstruction of the von Mangoldt function
//! and the smooth dyadic decomposition of sum Lambda(n) Kl(n; q) W(n/X).

use crate::arith::sum::Neumaier;
use crate::arith::{arith_tables, ArithTables, PrimeContext};
use crate::error::{Error, Result};
use crate::report::BoundReport;
use crate::weights::bump::bump_cdf;
use crate::weights::{make_bump, SmoothWeight};
use rayon::prelude::*;

/// Largest integer z with z^j <= x.
pub fn integer_root(x: u64, j: u32) -> u64 {
    let mut z = (x as f64).powf(1.0 / j as f64).floor() as u64;
    while z > 0 && (z as u128).pow(j) > x as u128 {
        z -= 1;
    }
    while ((z + 1) as u128).pow(j) <= x as u128 {
        z += 1;
    }
    z
}

fn binomial(n: u64, k: u64) -> i64 {
    let mut r: i64 = 1;
    for i in 0..k {
        r = r * (n - i) as i64 / (i + 1) as i64;
    }
    r
}

fn dirichlet_i64(a: &[i64], b: &[i64]) -> Vec<i64> {
    let n = a.len() - 1;
    let mut c = vec![0i64; n + 1];
    for i in 1..=n {
        if a[i] == 0 {
            continue;
        }
        let mut k = i;
        let mut j = 1;
        while k <= n {
            c[k] += a[i] * b[j];
            j += 1;
            k += i;
        }
    }
    c
}

fn dirichlet_mixed(a: &[i64], b: &[f64]) -> Vec<f64> {
    let n = a.len() - 1;
    let mut c = vec![0.0; n + 1];
    for i in 1..=n {
        if a[i] == 0 {
            continue;
        }
        let mut k = i;
        let mut j = 1;
        while k <= n {
            c[k] += a[i] as f64 * b[j];
            j += 1;
            k += i;
        }
    }
    c
}

/// Lambda(n), n <= X, rebuilt from the J-fold identity.
pub fn hb_lambda(j_param: u32, x: u64) -> Result<Vec<f64>> {
    if !(2..=10).contains(&j_param) || x > 1_000_000 || x < 1 {
        return Err(Error::ParameterOutOfRange(format!(
            "J = {j_param}, X = {x}"
        )));
    }
    let n = x as usize;
    let t = arith_tables(n);
    let z = integer_root(x, j_param) as usize;
    let mut mu_z = vec![0i64; n + 1];
    for m in 1..=z.min(n) {
        mu_z[m] = t.moebius[m] as i64;
    }
    let ones = {
        let mut v = vec![1i64; n + 1];
        v[0] = 0;
        v
    };
    let logs: Vec<f64> = (0..=n)
        .map(|k| if k == 0 { 0.0 } else { (k as f64).ln() })
        .collect();
    // Lambda = C * log with the integer function
    // C = sum_j (-1)^(j-1) binom(J, j) mu_z^{*j} * 1^{*(j-1)}.
    let mut c = vec![0i64; n + 1];
    let mut mu_pow = mu_z.clone();
    let mut ones_pow = vec![0i64; n + 1];
    ones_pow[1] = 1;
    for j in 1..=j_param as u64 {
        if j > 1 {
            mu_pow = dirichlet_i64(&mu_pow, &mu_z);
            ones_pow = dirichlet_i64(&ones_pow, &ones);
        }
        let term = dirichlet_i64(&mu_pow, &ones_pow);
        let s = binomial(j_param as u64, j) * if j % 2 == 1 { 1 } else { -1 };
        for k in 1..=n {
            c[k] += s * term[k];
        }
    }
    let out = dirichlet_mixed(&c, &logs);
    Ok(out)
}

pub fn hb_lambda_check(j_param: u32, x: u64) -> Result<f64> {
    let rebuilt = hb_lambda(j_param, x)?;
    let t = arith_tables(x as usize);
    Ok((1..=x as usize)
        .map(|n| (rebuilt[n] - t.mangoldt[n]).abs())
        .fold(0.0, f64::max))
}

// ---------------------------------------------------------------------------
// dyadic decomposition

/// One sum Sigma(M, N) of the decomposition.
#[derive(Clone, Debug)]
pub struct HBTerm {
    pub j_param: u32,
    /// Number of rough (Moebius) variables.
    pub j: u32,
    /// (-1)^(j-1) binom(J, j).
    pub coefficient: i64,
    /// Dyadic lower ends for the rough variables, padded with 1 to length J.
    pub m: Vec<u64>,
    /// Dyadic scales for the smooth variables, sorted descending, padded with 1.
    pub n: Vec<u64>,
    /// Index in `n` of the variable carrying log.
    pub log_index: usize,
    pub value: f64,
}

/// Smooth dyadic piece phi(x) = s(x) - s(x/2), s rising from 0 at 1/2 to 1 at 1,
/// so that sum_{k >= 0} phi(n / 2^k) = 1 for every n >= 1.
pub fn dyadic_piece(x: f64) -> f64 {
    let s = |t: f64| bump_cdf((t - 0.75) / 0.25);
    s(x) - s(x / 2.0)
}

struct Ctx<'a> {
    kl: &'a [f64],
    q: usize,
    w: &'a SmoothWeight,
    x: f64,
    nmax: u64,
    tables: &'a ArithTables,
}

/// Enumerates the variables of one box and sums coefficient * Kl * W.
/// `vars` lists (lo, hi, kind) with kind 0 = rough (mu, sharp box),
/// 1 = smooth with log, 2 = smooth.
fn box_sum(
    c: &Ctx,
    vars: &[(u64, u64, u8, u64)],
    idx: usize,
    prod: u64,
    coef: f64,
    acc: &mut Neumaier,
) {
    if idx == vars.len() {
        let wv = c.w.eval(prod as f64 / c.x);
        if wv != 0.0 {
            acc.add(coef * wv * c.kl[(prod % c.q as u64) as usize]);
        }
        return;
    }
    let (lo, hi, kind, scale) = vars[idx];
    let rest_min: u64 = vars[idx + 1..].iter().map(|v| v.0).product();
    let mut v = lo;
    while v <= hi {
        let p = prod * v;
        if p * rest_min > c.nmax {
            break;
        }
        let f = match kind {
            0 => c.tables.moebius[v as usize] as f64,
            1 => (v as f64).ln() * dyadic_piece(v as f64 / scale as f64),
            _ => dyadic_piece(v as f64 / scale as f64),
        };
        if f != 0.0 {
            box_sum(c, vars, idx + 1, p, coef * f, acc);
        }
        v += 1;
    }
}

pub struct Decomposition {
    pub terms: Vec<HBTerm>,
    pub direct: f64,
    pub recombined: f64,
    pub z: u64,
}

/// Splits sum Lambda(n) Kl(n; q) W(n/X), W supported in [1/2, 1], into HB terms.
pub fn hb_decompose(ctx: &PrimeContext, kl: &[f64], x: u64, j_param: u32) -> Result<Decomposition> {
    if !(2..=3).contains(&j_param) || x > 100_000 || x < 4 {
        return Err(Error::ParameterOutOfRange(format!(
            "J = {j_param}, X = {x}"
        )));
    }
    let w = make_bump(4.0, (0.5, 1.0))?;
    let tables = arith_tables(x as usize);
    let z = integer_root(x, j_param);
    let c = Ctx {
        kl,
        q: ctx.q as usize,
        w: &w,
        x: x as f64,
        nmax: x,
        tables: &tables,
    };

    let mut direct = Neumaier::new();
    for n in 1..=x as usize {
        let wv = w.eval(n as f64 / x as f64);
        if wv != 0.0 && tables.mangoldt[n] != 0.0 {
            direct.add(tables.mangoldt[n] * wv * kl[n % c.q]);
        }
    }

    // dyadic exponents available to each kind of variable
    let rough: Vec<u64> = (0..).map(|k| 1u64 << k).take_while(|&m| m <= z).collect();
    let smooth: Vec<u64> = (0..)
        .map(|k| 1u64 << k)
        .take_while(|&n| n / 2 <= x)
        .collect();

    let mut boxes = Vec::new();
    for j in 1..=j_param {
        let coefficient = binomial(j_param as u64, j as u64) * if j % 2 == 1 { 1 } else { -1 };
        let mut rough_idx = vec![0usize; j as usize];
        loop {
            let ms: Vec<u64> = rough_idx.iter().map(|&i| rough[i]).collect();
            let mprod: u64 = ms.iter().product();
            if mprod <= x {
                let mut smooth_idx = vec![0usize; j as usize];
                loop {
                    let ns: Vec<u64> = smooth_idx.iter().map(|&i| smooth[i]).collect();
                    // smallest n in the piece phi(n/N) is > N/2
                    let nmin: u64 = ns.iter().map(|&v| (v / 2).max(1)).product();
                    if mprod.saturating_mul(nmin) <= x {
                        let mut vars: Vec<(u64, u64, u8, u64)> = Vec::new();
                        for &m in &ms {
                            vars.push((m, (2 * m - 1).min(z), 0, m));
                        }
                        for (i, &nv) in ns.iter().enumerate() {
                            let lo = (nv / 2 + 1).max(1);
                            vars.push((lo, 2 * nv - 1, if i == 0 { 1 } else { 2 }, nv));
                        }
                        boxes.push((j, coefficient, ms.clone(), ns, vars));
                    }
                    if !advance(&mut smooth_idx, smooth.len()) {
                        break;
                    }
                }
            }
            if !advance(&mut rough_idx, rough.len()) {
                break;
            }
        }
    }
    let terms: Vec<HBTerm> = boxes
        .into_par_iter()
        .map(|(j, coefficient, ms, ns, vars)| {
            let mut acc = Neumaier::new();
            box_sum(&c, &vars, 0, 1, 1.0, &mut acc);
            let value = coefficient as f64 * acc.total();
            // relabel smooth variables in descending order of scale
            let mut order: Vec<usize> = (0..ns.len()).collect();
            order.sort_by(|&a, &b| ns[b].cmp(&ns[a]).then(a.cmp(&b)));
            let mut n: Vec<u64> = order.iter().map(|&i| ns[i]).collect();
            let log_index = order.iter().position(|&i| i == 0).unwrap();
            let mut m = ms;
            m.resize(j_param as usize, 1);
            n.resize(j_param as usize, 1);
            HBTerm {
                j_param,
                j,
                coefficient,
                m,
                n,
                log_index,
                value,
            }
        })
        .collect();
    let mut rec = Neumaier::new();
    terms.iter().for_each(|t| rec.add(t.value));
    Ok(Decomposition {
        terms,
        direct: direct.total(),
        recombined: rec.total(),
        z,
    })
}

fn advance(idx: &mut [usize], base: usize) -> bool {
    for d in idx.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

pub fn sigma_decomposition_check(
    ctx: &PrimeContext,
    kl: &[f64],
    x: u64,
    j_param: u32,
) -> Result<BoundReport> {
    let d = hb_decompose(ctx, kl, x, j_param)?;
    let rel = (d.recombined - d.direct).abs() / d.direct.abs().max(1e-300);
    let lx = (x as f64).ln();
    let restr_ok = d
        .terms
        .iter()
        .all(|t| t.m.iter().all(|&m| m <= d.z) && t.n.windows(2).all(|w| w[0] >= w[1]));
    Ok(BoundReport::new("hb_decomposition", d.recombined.into())
        .param("q", ctx.q as f64)
        .param("X", x as f64)
        .param("J", j_param as f64)
        .envelope(
            "term_count",
            "2 log^(2J) X",
            2.0 * lx.powi(2 * j_param as i32),
        )
        .diag("direct", d.direct)
        .diag("recombined", d.recombined)
        .diag("relative_error", rel)
        .diag("terms", d.terms.len() as f64)
        .diag("rough_cap", d.z as f64)
        .diag("restr_ok", restr_ok as u8 as f64))
}
