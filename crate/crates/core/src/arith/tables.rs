/// Sieved arithmetic functions on 1..=n_max (index 0 is a placeholder).
#[derive(Clone, Debug)]
pub struct ArithTables {
    pub n_max: usize,
    pub primes: Vec<u64>,
    pub mangoldt: Vec<f64>,
    pub divisor: Vec<u32>,
    pub moebius: Vec<i8>,
    /// Least prime factor; 0 at 0 and 1.
    pub lpf: Vec<u32>,
}

/// Linear sieve. For each n it tracks the exponent of the least prime factor
/// so that d(n) is updated multiplicatively.
pub fn arith_tables(n_max: usize) -> ArithTables {
    let n = n_max.max(1);
    let mut lpf = vec![0u32; n + 1];
    let mut primes: Vec<u64> = Vec::new();
    let mut moebius = vec![0i8; n + 1];
    let mut divisor = vec![0u32; n + 1];
    let mut lpf_exp = vec![0u32; n + 1];
    let mut mangoldt = vec![0.0f64; n + 1];
    moebius[1] = 1;
    divisor[1] = 1;
    for i in 2..=n {
        if lpf[i] == 0 {
            lpf[i] = i as u32;
            primes.push(i as u64);
            moebius[i] = -1;
            divisor[i] = 2;
            lpf_exp[i] = 1;
        }
        let li = lpf[i] as u64;
        for &p in &primes {
            if p > li || (i as u64) * p > n as u64 {
                break;
            }
            let ip = i * p as usize;
            lpf[ip] = p as u32;
            if p == li {
                moebius[ip] = 0;
                lpf_exp[ip] = lpf_exp[i] + 1;
                let e = lpf_exp[i];
                divisor[ip] = divisor[i] / (e + 1) * (e + 2);
            } else {
                moebius[ip] = -moebius[i];
                lpf_exp[ip] = 1;
                divisor[ip] = divisor[i] * 2;
            }
        }
    }
    for i in 2..=n {
        let p = lpf[i] as usize;
        let mut m = i;
        while m % p == 0 {
            m /= p;
        }
        if m == 1 {
            mangoldt[i] = (p as f64).ln();
        }
    }
    ArithTables {
        n_max: n,
        primes,
        mangoldt,
        divisor,
        moebius,
        lpf,
    }
}

impl ArithTables {
    pub fn is_prime(&self, n: usize) -> bool {
        n >= 2 && n <= self.n_max && self.lpf[n] as usize == n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        let t = arith_tables(100);
        assert_eq!(t.mangoldt[8], 2f64.ln());
        assert_eq!(t.mangoldt[6], 0.0);
        assert_eq!(t.divisor[6], 4);
        assert_eq!(t.moebius[30], -1);
        assert_eq!(t.primes.len(), 25);
    }

    #[test]
    fn matches_trial_division() {
        let n = 3000;
        let t = arith_tables(n);
        for m in 1..=n {
            let d = (1..=m).filter(|k| m % k == 0).count() as u32;
            assert_eq!(t.divisor[m], d, "d({m})");
            let mut f = Vec::new();
            let mut r = m;
            let mut p = 2;
            while r > 1 {
                let mut e = 0;
                while r % p == 0 {
                    r /= p;
                    e += 1;
                }
                if e > 0 {
                    f.push((p, e));
                }
                p += 1;
            }
            let mu = if f.iter().any(|&(_, e)| e > 1) {
                0
            } else if f.len() % 2 == 0 {
                1
            } else {
                -1
            };
            assert_eq!(t.moebius[m] as i32, mu, "mu({m})");
            let lam = if f.len() == 1 {
                (f[0].0 as f64).ln()
            } else {
                0.0
            };
            assert_eq!(t.mangoldt[m], lam);
        }
        for m in 1..=n {
            let s: i32 = (1..=m)
                .filter(|d| m % d == 0)
                .map(|d| t.moebius[d] as i32)
                .sum();
            assert_eq!(s, (m == 1) as i32);
        }
    }
}
