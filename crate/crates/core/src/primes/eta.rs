//! The exponent function eta on (x, kappa, mu, nu) tuples and a grid
//! certificate for the case analysis behind the prime-sum bound.

use crate::error::{Error, Result};
use rayon::prelude::*;

#[derive(Clone, Debug, PartialEq)]
pub struct ExponentTuple {
    /// log_q X
    pub x: f64,
    /// log_q Q
    pub kappa: f64,
    pub mu: Vec<f64>,
    /// Sorted descending.
    pub nu: Vec<f64>,
}

const TOL: f64 = 1e-9;

impl ExponentTuple {
    pub fn j(&self) -> usize {
        self.mu.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::TupleInvariantViolated(m));
        let j = self.mu.len();
        if j == 0 || j > 12 || self.nu.len() != j {
            return bad(format!("lengths {} / {}", self.mu.len(), self.nu.len()));
        }
        if self.x > 1.0 + TOL {
            return bad(format!("x = {} > 1", self.x));
        }
        if self.mu.iter().chain(&self.nu).any(|&v| !(v >= -TOL)) {
            return bad("negative exponent".into());
        }
        let total: f64 = self.mu.iter().chain(&self.nu).sum();
        if (total - self.x).abs() > TOL {
            return bad(format!("exponents sum to {total}, x = {}", self.x));
        }
        if self.mu.iter().any(|&m| m > self.x / j as f64 + TOL) {
            return bad("some mu_i > x/J".into());
        }
        if self.nu.windows(2).any(|w| w[0] < w[1] - TOL) {
            return bad("nu not descending".into());
        }
        Ok(())
    }

    /// All distinct sums over subsets of the mu_i and nu_j.
    pub fn subset_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0];
        for &v in self.mu.iter().chain(&self.nu) {
            let more: Vec<f64> = sums.iter().map(|s| s + v).collect();
            sums.extend(more);
            sums.sort_by(f64::total_cmp);
            sums.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        }
        sums
    }
}

fn second_branch_at(x: f64, sigma: f64) -> f64 {
    (sigma / 2.0).min((x - sigma) / 2.0 - 0.25)
}

pub fn eta_exponent(t: &ExponentTuple) -> Result<f64> {
    t.validate()?;
    let nu2 = t.nu.get(1).copied().unwrap_or(0.0);
    let first = t.nu[0] + nu2 - 0.5 - 2.0 * t.kappa;
    let second = t
        .subset_sums()
        .into_iter()
        .map(|s| second_branch_at(t.x, s))
        .fold(f64::NEG_INFINITY, f64::max)
        - t.kappa / 2.0;
    Ok(first.max(second))
}

/// Whether some subset sum lies in [x/6 - eps, x/3 + eps].
pub fn first_case_applies(t: &ExponentTuple, eps: f64) -> bool {
    t.subset_sums()
        .iter()
        .any(|&s| s >= t.x / 6.0 - eps && s <= t.x / 3.0 + eps)
}

/// min(x/3 - 1/4 - kappa/2, 5x/6 - 1/2 - 2 kappa).
pub fn predicted_exponent(x: f64, kappa: f64) -> f64 {
    (x / 3.0 - 0.25 - kappa / 2.0).min(5.0 * x / 6.0 - 0.5 - 2.0 * kappa)
}

/// Slack allowed on the worst margin: half a grid cell in one coordinate.
pub fn certificate_slack(x: f64, grid_step: f64) -> f64 {
    x * grid_step / 2.0
}

#[derive(Clone, Debug)]
pub struct EtaCertificate {
    pub worst_margin: f64,
    pub slack: f64,
    pub tuples: u64,
    pub worst_tuple: ExponentTuple,
}

impl EtaCertificate {
    pub fn passes(&self) -> bool {
        self.worst_margin >= -self.slack
    }
}

fn multisets(len: usize, max: usize, out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>) {
    if cur.len() == len {
        out.push(cur.clone());
        return;
    }
    let start = cur.last().copied().unwrap_or(0);
    for v in start..=max {
        cur.push(v);
        multisets(len, max, out, cur);
        cur.pop();
    }
}

/// Calls f on each partition of `total` into at most `parts` descending parts,
/// zero padded to length `parts`.
fn partitions(
    total: usize,
    parts: usize,
    cap: usize,
    cur: &mut Vec<usize>,
    f: &mut dyn FnMut(&[usize]),
) {
    if cur.len() == parts {
        if total == 0 {
            f(cur);
        }
        return;
    }
    let slots = parts - cur.len();
    if total > cap * slots {
        return;
    }
    let lo = total.div_ceil(slots);
    for v in (lo..=cap.min(total)).rev() {
        cur.push(v);
        partitions(total - v, parts, v, cur, f);
        cur.pop();
    }
}

struct Best {
    eta: f64,
    tuple: (Vec<usize>, Vec<usize>),
    count: u64,
}

/// Evaluates eta on every grid tuple (values x k / n, n = 1 / grid_step) and
/// returns min eta - predicted_exponent.
pub fn eta_case_certificate(
    x: f64,
    kappa: f64,
    j: usize,
    grid_step: f64,
) -> Result<EtaCertificate> {
    if !(0.75 - TOL..=1.0 + TOL).contains(&x) || !(2..=12).contains(&j) || kappa < 0.0 {
        return Err(Error::ParameterOutOfRange(format!(
            "x = {x}, kappa = {kappa}, J = {j}"
        )));
    }
    let slack = certificate_slack(x, grid_step);
    if !(grid_step > 0.0) || slack > 0.05 {
        return Err(Error::GridTooCoarse(grid_step));
    }
    let n = (1.0 / grid_step).round() as usize;
    let unit = x / n as f64;
    let mut mus = Vec::new();
    multisets(j, n / j, &mut mus, &mut Vec::new());
    let words = (n + 64) / 64;

    let best = mus
        .par_iter()
        .map(|mu| {
            let rest = n - mu.iter().sum::<usize>();
            let mut best = Best {
                eta: f64::INFINITY,
                tuple: (vec![], vec![]),
                count: 0,
            };
            let mut base = vec![0u64; words];
            base[0] = 1;
            for &a in mu {
                base = shift_or(&base, a);
            }
            partitions(rest, j, rest, &mut Vec::new(), &mut |nu: &[usize]| {
                let mut bits = base.clone();
                for &b in nu {
                    if b > 0 {
                        bits = shift_or(&bits, b);
                    }
                }
                let first = (nu[0] + nu[1]) as f64 * unit - 0.5 - 2.0 * kappa;
                let mut second = f64::NEG_INFINITY;
                for s in 0..=n {
                    if bits[s / 64] >> (s % 64) & 1 == 1 {
                        second = second.max(second_branch_at(x, s as f64 * unit));
                    }
                }
                let eta = first.max(second - kappa / 2.0);
                best.count += 1;
                if eta < best.eta {
                    best.eta = eta;
                    best.tuple = (mu.clone(), nu.to_vec());
                }
            });
            best
        })
        .reduce(
            || Best {
                eta: f64::INFINITY,
                tuple: (vec![], vec![]),
                count: 0,
            },
            |a, b| {
                let count = a.count + b.count;
                let keep_a = a.eta < b.eta || (a.eta == b.eta && a.tuple <= b.tuple);
                let mut w = if keep_a { a } else { b };
                w.count = count;
                w
            },
        );
    let to_f = |v: &[usize]| v.iter().map(|&k| k as f64 * unit).collect::<Vec<_>>();
    Ok(EtaCertificate {
        worst_margin: best.eta - predicted_exponent(x, kappa),
        slack,
        tuples: best.count,
        worst_tuple: ExponentTuple {
            x,
            kappa,
            mu: to_f(&best.tuple.0),
            nu: to_f(&best.tuple.1),
        },
    })
}

fn shift_or(bits: &[u64], s: usize) -> Vec<u64> {
    let mut out = bits.to_vec();
    let (w, b) = (s / 64, s % 64);
    for i in (w..bits.len()).rev() {
        let mut v = bits[i - w] << b;
        if b > 0 && i > w {
            v |= bits[i - w - 1] >> (64 - b);
        }
        out[i] |= v;
    }
    out
}
