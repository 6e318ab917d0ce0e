//! Ramanujan's tau function in exact integer arithmetic, and its disk cache.

use crate::error::{Error, Result};
use rayon::prelude::*;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"TAU1";

/// tau(n) for n = 0..=n_max (tau(0) = 0), from Delta = q (eta^3)^8 / q and
/// Jacobi's identity eta^3 = sum_k (-1)^k (2k+1) q^{k(k+1)/2 + 1/8}.
pub fn tau_table(n_max: usize) -> Result<Vec<i128>> {
    if n_max == 0 {
        return Err(Error::ParameterOutOfRange(
            "n_max must be at least 1".into(),
        ));
    }
    let len = n_max; // coefficients of x^0..x^{n_max-1}
    let mut sparse: Vec<(usize, i128)> = Vec::new();
    let mut k = 0usize;
    while k * (k + 1) / 2 < len {
        let c = (2 * k + 1) as i128 * if k % 2 == 0 { 1 } else { -1 };
        sparse.push((k * (k + 1) / 2, c));
        k += 1;
    }
    let mut poly = vec![0i128; len];
    for &(e, c) in &sparse {
        poly[e] = c;
    }
    for _ in 1..8 {
        let prev = poly;
        poly = (0..len)
            .into_par_iter()
            .map(|n| {
                let mut acc: i128 = 0;
                for &(e, c) in &sparse {
                    if e > n {
                        break;
                    }
                    let t = prev[n - e].checked_mul(c).ok_or(Error::Overflow(n + 1))?;
                    acc = acc.checked_add(t).ok_or(Error::Overflow(n + 1))?;
                }
                Ok(acc)
            })
            .collect::<Result<Vec<i128>>>()?;
    }
    let mut tau = Vec::with_capacity(n_max + 1);
    tau.push(0);
    tau.extend_from_slice(&poly);
    Ok(tau)
}

fn encode(v: i128, out: &mut Vec<u8>) {
    let bytes = v.to_le_bytes();
    let mut n = 16;
    // drop redundant sign-extension bytes
    while n > 1 {
        let top = bytes[n - 1];
        let next_sign = bytes[n - 2] & 0x80;
        if (top == 0 && next_sign == 0) || (top == 0xff && next_sign != 0) {
            n -= 1;
        } else {
            break;
        }
    }
    out.push(n as u8);
    out.extend_from_slice(&bytes[..n]);
}

pub fn write_cache(path: &Path, tau: &[i128]) -> Result<()> {
    let n_max = tau.len().saturating_sub(1) as u64;
    let mut buf = Vec::with_capacity(12 + tau.len() * 10);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&n_max.to_le_bytes());
    for &v in &tau[1..] {
        encode(v, &mut buf);
    }
    let tmp = path.with_extension("tmp");
    let mut f = std::fs::File::create(&tmp).map_err(|e| Error::Cache(e.to_string()))?;
    f.write_all(&buf).map_err(|e| Error::Cache(e.to_string()))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::Cache(e.to_string()))
}

pub fn read_cache(path: &Path) -> Result<Vec<i128>> {
    let mut buf = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| Error::Cache(e.to_string()))?;
    if buf.len() < 12 || &buf[..4] != MAGIC {
        return Err(Error::Cache("bad header".into()));
    }
    let n_max = u64::from_le_bytes(buf[4..12].try_into().unwrap()) as usize;
    let mut tau = Vec::with_capacity(n_max + 1);
    tau.push(0i128);
    let mut pos = 12;
    for _ in 0..n_max {
        let len = *buf
            .get(pos)
            .ok_or_else(|| Error::Cache("truncated".into()))? as usize;
        if len == 0 || len > 16 || pos + 1 + len > buf.len() {
            return Err(Error::Cache("corrupt entry".into()));
        }
        let chunk = &buf[pos + 1..pos + 1 + len];
        let fill = if chunk[len - 1] & 0x80 != 0 { 0xff } else { 0 };
        let mut b = [fill; 16];
        b[..len].copy_from_slice(chunk);
        tau.push(i128::from_le_bytes(b));
        pos += 1 + len;
    }
    Ok(tau)
}

/// Loads tau from `dir/tau.bin` when it covers `n_max`, otherwise computes and
/// (re)writes the cache.
pub fn tau_table_cached(n_max: usize, dir: Option<&Path>) -> Result<Vec<i128>> {
    let Some(dir) = dir else {
        return tau_table(n_max);
    };
    let path = dir.join("tau.bin");
    if let Ok(mut t) = read_cache(&path) {
        if t.len() > n_max {
            t.truncate(n_max + 1);
            return Ok(t);
        }
    }
    let t = tau_table(n_max)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::Cache(e.to_string()))?;
    write_cache(&path, &t)?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent route: Euler's pentagonal series for prod (1 - x^n),
    /// raised to the 24th power by repeated squaring.
    fn tau_by_pentagonal(n_max: usize) -> Vec<i128> {
        let len = n_max;
        let mut e = vec![0i128; len];
        let mut k: i64 = 0;
        loop {
            let mut any = false;
            for kk in [k, -k] {
                let p = (kk * (3 * kk - 1) / 2) as usize;
                if p < len {
                    e[p] = if kk % 2 == 0 { 1 } else { -1 };
                    any = true;
                }
                if k == 0 {
                    break;
                }
            }
            if !any {
                break;
            }
            k += 1;
        }
        let mul = |a: &[i128], b: &[i128]| {
            let mut c = vec![0i128; len];
            for i in 0..len {
                if a[i] != 0 {
                    for j in 0..len - i {
                        c[i + j] += a[i] * b[j];
                    }
                }
            }
            c
        };
        let e2 = mul(&e, &e);
        let e4 = mul(&e2, &e2);
        let e8 = mul(&e4, &e4);
        let e16 = mul(&e8, &e8);
        let e24 = mul(&e16, &e8);
        let mut t = vec![0];
        t.extend(e24);
        t
    }

    #[test]
    fn small_values() {
        let t = tau_table(10).unwrap();
        assert_eq!(&t[1..=6], &[1, -24, 252, -1472, 4830, -6048]);
        assert_eq!(t[10], -115920);
    }

    #[test]
    fn agrees_with_pentagonal_route() {
        assert_eq!(tau_table(400).unwrap(), tau_by_pentagonal(400));
    }

    #[test]
    fn cache_round_trip() {
        let dir = std::env::temp_dir().join(format!("klab-tau-{}", std::process::id()));
        let t = tau_table(3000).unwrap();
        let t2 = tau_table_cached(3000, Some(&dir)).unwrap();
        assert_eq!(t, t2);
        let t3 = read_cache(&dir.join("tau.bin")).unwrap();
        assert_eq!(t, t3);
        let t4 = tau_table_cached(100, Some(&dir)).unwrap();
        assert_eq!(&t4[..], &t[..=100]);
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn encoding_is_minimal_twos_complement() {
        for v in [
            0i128,
            1,
            -1,
            127,
            128,
            -128,
            -129,
            i128::MAX,
            i128::MIN,
            -24,
            4830,
        ] {
            let mut b = Vec::new();
            encode(v, &mut b);
            let len = b[0] as usize;
            let fill = if b[len] & 0x80 != 0 { 0xff } else { 0 };
            let mut a = [fill; 16];
            a[..len].copy_from_slice(&b[1..]);
            assert_eq!(i128::from_le_bytes(a), v);
        }
    }
}
