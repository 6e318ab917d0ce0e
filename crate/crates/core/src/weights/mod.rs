//! Smooth compactly supported test functions, their Fourier transforms with
//! decay certificates, the sharp-cutoff sandwich, and the Bessel transform.

pub mod bessel;
pub mod bump;
pub mod jet;

use crate::error::{Error, Result};
use bump::{bump, bump_cdf, bump_cdf_jet, bump_mass, bump_norms, bump_of, DERIV_MAX};
use jet::Jet;
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

/// Orders covered by the stored sup-norm certificate.
pub const CERT_ORDER: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    /// Indicator of [core_lo, core_hi] convolved with B(x/width)/(width Z).
    MollifiedIndicator {
        core_lo: f64,
        core_hi: f64,
        width: f64,
    },
    /// B((sqrt(x) - center)/radius): a bump in the sqrt(x) variable.
    SqrtBump { center: f64, radius: f64 },
}

#[derive(Debug)]
pub struct SmoothWeight {
    pub q_param: f64,
    pub support: (f64, f64),
    pub profile: Profile,
    /// c_j with sup |W^(j)| <= c_j Q^j for j = 0..=CERT_ORDER.
    pub certificate: Vec<f64>,
    l1: OnceLock<Vec<f64>>,
}

impl Clone for SmoothWeight {
    fn clone(&self) -> Self {
        SmoothWeight {
            q_param: self.q_param,
            support: self.support,
            profile: self.profile.clone(),
            certificate: self.certificate.clone(),
            l1: self.l1.clone(),
        }
    }
}

fn mollified(core_lo: f64, core_hi: f64, width: f64, q_param: f64) -> SmoothWeight {
    let sup = &bump_norms().sup;
    let z = bump_mass();
    let mut certificate = vec![1.0];
    for j in 1..=CERT_ORDER {
        // W^(j) = w^-j (B^(j-1)(u_lo) - B^(j-1)(u_hi)) / Z; the two terms have
        // disjoint supports whenever the core is longer than 2w.
        let overlap = if core_hi - core_lo >= 2.0 * width {
            1.0
        } else {
            2.0
        };
        certificate.push(overlap * sup[j - 1] / z * (width * q_param).powi(-(j as i32)));
    }
    SmoothWeight {
        q_param,
        support: (core_lo - width, core_hi + width),
        profile: Profile::MollifiedIndicator {
            core_lo,
            core_hi,
            width,
        },
        certificate,
        l1: OnceLock::new(),
    }
}

/// Mollified indicator of `support` with transition width 1/(4Q) on each side.
pub fn make_bump(q_param: f64, support: (f64, f64)) -> Result<SmoothWeight> {
    let (lo, hi) = support;
    if !(q_param >= 1.0) || !(lo > 0.0) || !(hi > lo) {
        return Err(Error::ParameterOutOfRange(format!(
            "Q = {q_param}, support = [{lo}, {hi}]"
        )));
    }
    if hi - lo <= 1.0 / q_param {
        return Err(Error::DegenerateSupport(lo, hi, q_param));
    }
    let w = 0.25 / q_param;
    Ok(mollified(lo + w, hi - w, w, q_param))
}

/// Bump in the variable sqrt(x), supported on [lo, hi].
pub fn sqrt_bump(lo: f64, hi: f64) -> Result<SmoothWeight> {
    if !(lo > 0.0) || !(hi > lo) {
        return Err(Error::ParameterOutOfRange(format!(
            "support = [{lo}, {hi}]"
        )));
    }
    let (a, b) = (lo.sqrt(), hi.sqrt());
    let mut w = SmoothWeight {
        q_param: 1.0,
        support: (lo, hi),
        profile: Profile::SqrtBump {
            center: 0.5 * (a + b),
            radius: 0.5 * (b - a),
        },
        certificate: Vec::new(),
        l1: OnceLock::new(),
    };
    let grid = w.norm_grid(4000);
    let mut sup = vec![0.0f64; CERT_ORDER + 1];
    for &(x, _) in &grid {
        let j = w.jet(x, CERT_ORDER);
        for (k, s) in sup.iter_mut().enumerate() {
            *s = s.max(j.derivative(k).abs());
        }
    }
    w.certificate = sup.iter().map(|s| s * 1.02).collect();
    Ok(w)
}

/// Outer and inner weights around the indicator of (1, 3/2]: the outer one is
/// 1 on [1, 3/2] with support [1 - delta, 3/2 + delta]; the inner one is
/// supported in [1, 3/2] and equals 1 on [1 + delta, 3/2 - delta].
pub fn sharp_cutoff_sandwich(_x: f64, delta: f64) -> Result<(SmoothWeight, SmoothWeight)> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidDelta(delta));
    }
    let h = 0.5 * delta;
    let q = 1.0 / delta;
    let outer = mollified(1.0 - h, 1.5 + h, h, q);
    let inner = mollified(1.0 + h, (1.5 - h).max(1.0 + h), h, q);
    Ok((outer, inner))
}

impl SmoothWeight {
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.support.0 || x >= self.support.1 {
            return 0.0;
        }
        match self.profile {
            Profile::MollifiedIndicator {
                core_lo,
                core_hi,
                width,
            } => {
                let v = bump_cdf((x - core_lo) / width) - bump_cdf((x - core_hi) / width);
                v.clamp(0.0, 1.0)
            }
            Profile::SqrtBump { center, radius } => bump((x.sqrt() - center) / radius),
        }
    }

    /// Taylor jet of W at x.
    pub fn jet(&self, x: f64, order: usize) -> Jet {
        if x <= self.support.0 || x >= self.support.1 {
            return Jet::constant(0.0, order);
        }
        match self.profile {
            Profile::MollifiedIndicator {
                core_lo,
                core_hi,
                width,
            } => {
                let a = scale_jet(bump_cdf_jet((x - core_lo) / width, order), 1.0 / width);
                let b = scale_jet(bump_cdf_jet((x - core_hi) / width, order), 1.0 / width);
                &a - &b
            }
            Profile::SqrtBump { center, radius } => {
                let t = Jet::var(x, order)
                    .sqrt()
                    .add_const(-center)
                    .scale(1.0 / radius);
                bump_of(&t)
            }
        }
    }

    pub fn derivative(&self, x: f64, j: usize) -> f64 {
        self.jet(x, j).derivative(j)
    }

    /// Certified bound on sup |W^(j)| for j <= CERT_ORDER.
    pub fn sup_bound(&self, j: usize) -> f64 {
        self.certificate[j] * self.q_param.powi(j as i32)
    }

    /// Integral of W.
    pub fn mass(&self) -> f64 {
        match self.profile {
            Profile::MollifiedIndicator {
                core_lo, core_hi, ..
            } => core_hi - core_lo,
            _ => self
                .norm_grid(6000)
                .iter()
                .map(|&(x, dx)| self.eval(x) * dx)
                .sum(),
        }
    }

    /// Interior points where the profile changes character; grids refine
    /// toward these and toward the support ends.
    fn breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = self.support;
        match self.profile {
            Profile::MollifiedIndicator {
                core_lo,
                core_hi,
                width,
            } => {
                let mut v = vec![lo, core_lo + width, core_hi - width, hi];
                v.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
                v.sort_by(f64::total_cmp);
                v.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
                if core_lo + width > core_hi - width {
                    v = vec![lo, 0.5 * (core_lo + core_hi), hi];
                }
                v
            }
            Profile::SqrtBump { .. } => vec![lo, hi],
        }
    }

    /// Quadrature points (x, dx) refined geometrically toward every breakpoint,
    /// for Riemann-sum norms of rapidly varying derivatives.
    pub fn norm_grid(&self, per_piece: usize) -> Vec<(f64, f64)> {
        let bp = self.breakpoints();
        let xi_max = 12.0;
        let dxi = 2.0 * xi_max / per_piece as f64;
        let mut out = Vec::with_capacity(per_piece * bp.len());
        for w in bp.windows(2) {
            let (a, b) = (w[0], w[1]);
            for i in 0..per_piece {
                let xi = -xi_max + (i as f64 + 0.5) * dxi;
                let th = xi.tanh();
                let x = a + (b - a) * 0.5 * (1.0 + th);
                let dx = (b - a) * 0.5 * (1.0 - th * th) * dxi;
                out.push((x, dx));
            }
        }
        out
    }

    /// Upper bounds for the L1 norms of W^(j), j = 0..=DERIV_MAX.
    pub fn l1_norms(&self) -> &[f64] {
        self.l1.get_or_init(|| match self.profile {
            Profile::MollifiedIndicator {
                core_lo,
                core_hi,
                width,
            } => {
                let b = &bump_norms().l1;
                let z = bump_mass();
                let mut v = vec![core_hi - core_lo];
                for j in 1..=DERIV_MAX {
                    v.push(2.0 * b[j - 1] / z * width.powi(1 - j as i32) * 1.01);
                }
                v
            }
            Profile::SqrtBump { .. } => {
                let mut v = vec![0.0; DERIV_MAX + 1];
                for (x, dx) in self.norm_grid(6000) {
                    let j = self.jet(x, DERIV_MAX);
                    let mut f = 1.0;
                    for (k, acc) in v.iter_mut().enumerate() {
                        if k > 0 {
                            f *= k as f64;
                        }
                        *acc += (j.c[k] * f).abs() * dx;
                    }
                }
                v.iter().map(|s| s * 1.01).collect()
            }
        })
    }
}

/// Jet of f(x) from the jet of f in u = s x (coefficients pick up s^k).
fn scale_jet(mut j: Jet, s: f64) -> Jet {
    let mut p = 1.0;
    for c in j.c.iter_mut() {
        *c *= p;
        p *= s;
    }
    j
}

// ---------------------------------------------------------------------------
// Fourier transform

fn trapezoid_doubling<F: Fn(usize) -> Complex64>(
    n0: usize,
    tol: f64,
    max_n: usize,
    f: F,
) -> Option<Complex64> {
    let mut n = n0.next_power_of_two();
    let mut prev = f(n);
    while n < max_n {
        n *= 2;
        let cur = f(n);
        if (cur - prev).norm() < tol {
            return Some(cur);
        }
        prev = cur;
    }
    None
}

fn bump_nodes(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| bump(-1.0 + 2.0 * i as f64 / n as f64))
        .collect()
}

/// (1/Z) * integral of B(s) cos(2 pi tau s) ds.
fn normalized_bump_fourier(tau: f64) -> f64 {
    let z = bump_mass();
    let n0 = (2.0 * tau.abs() + 64.0) as usize;
    let v = trapezoid_doubling(n0, 1e-15, 1 << 24, |n| {
        let nodes = bump_nodes(n);
        let h = 2.0 / n as f64;
        let mut acc = crate::arith::sum::Neumaier::new();
        for (i, b) in nodes.iter().enumerate() {
            if *b != 0.0 {
                let s = -1.0 + i as f64 * h;
                acc.add(b * (TAU * tau * s).cos());
            }
        }
        Complex64::new(acc.total() * h / z, 0.0)
    });
    v.expect("bump transform converges").re
}

/// W^(t) = integral of W(x) e(-t x) dx.
pub fn weight_fourier(w: &SmoothWeight, t: f64) -> Complex64 {
    match w.profile {
        Profile::MollifiedIndicator {
            core_lo,
            core_hi,
            width,
        } => {
            let len = core_hi - core_lo;
            let mid = 0.5 * (core_lo + core_hi);
            let a = PI * t * len;
            let sinc = if a.abs() < 1e-8 {
                1.0 - a * a / 6.0
            } else {
                a.sin() / a
            };
            Complex64::from_polar(len * sinc, -TAU * t * mid) * normalized_bump_fourier(width * t)
        }
        Profile::SqrtBump { .. } => {
            let (lo, hi) = w.support;
            let n0 = (4.0 * (hi - lo) * t.abs()) as usize + 256;
            trapezoid_doubling(n0, 1e-13, 1 << 24, |n| {
                let h = (hi - lo) / n as f64;
                let mut acc = crate::arith::sum::NeumaierC::new();
                for i in 1..n {
                    let x = lo + i as f64 * h;
                    acc.add(Complex64::from_polar(w.eval(x), -TAU * t * x));
                }
                acc.total() * h
            })
            .expect("weight transform converges")
        }
    }
}

/// Decay certificate for |W^(t)| from integration by parts.
pub fn fourier_decay_bound(w: &SmoothWeight, t: f64) -> f64 {
    let l1 = w.l1_norms();
    let x = TAU * t.abs();
    let mut best = l1[0];
    let mut p = 1.0;
    for (j, c) in l1.iter().enumerate().skip(1) {
        p *= x;
        if p.is_infinite() {
            break;
        }
        best = best.min(c / p);
        let _ = j;
    }
    best
}

/// Bound on the sum over |m| > T of |W^(m s)|, for step s > 0.
pub fn fourier_tail_bound(w: &SmoothWeight, s: f64, t_cut: usize) -> f64 {
    let l1 = w.l1_norms();
    let tt = t_cut.max(1) as f64;
    let mut best = f64::INFINITY;
    for (j, c) in l1.iter().enumerate().skip(2) {
        let jf = j as f64;
        let log_b = c.ln() - jf * (TAU * s).ln() + (1.0 - jf) * tt.ln() - (jf - 1.0).ln();
        best = best.min(2.0 * log_b.exp());
    }
    best
}

/// Fourier transform paired with its decay certificate.
pub struct WeightTransform<'a> {
    pub source: &'a SmoothWeight,
}

impl<'a> WeightTransform<'a> {
    pub fn new(source: &'a SmoothWeight) -> Self {
        WeightTransform { source }
    }

    pub fn at(&self, t: f64) -> Complex64 {
        weight_fourier(self.source, t)
    }

    pub fn decay_bound(&self, t: f64) -> f64 {
        fourier_decay_bound(self.source, t)
    }

    pub fn tail_bound(&self, step: f64, t_cut: usize) -> f64 {
        fourier_tail_bound(self.source, step, t_cut)
    }
}

// ---------------------------------------------------------------------------
// Bessel transform

/// W~(y) = 2 pi i^k integral W(u) J_{k-1}(4 pi sqrt(u y)) du with node values of
/// the substituted integrand cached per refinement level.
pub struct BesselTransform<'a> {
    w: &'a SmoothWeight,
    k: u32,
    levels: Vec<OnceLock<Vec<f64>>>,
    pub tol: f64,
}

const MAX_LEVEL: usize = 20;

impl<'a> BesselTransform<'a> {
    pub fn new(w: &'a SmoothWeight, k: u32) -> Result<Self> {
        if k < 2 || k % 2 == 1 {
            return Err(Error::ParameterOutOfRange(format!("weight k = {k}")));
        }
        Ok(BesselTransform {
            w,
            k,
            levels: (0..=MAX_LEVEL).map(|_| OnceLock::new()).collect(),
            tol: 1e-13,
        })
    }

    fn range(&self) -> (f64, f64) {
        (self.w.support.0.sqrt(), self.w.support.1.sqrt())
    }

    // 2 v W(v^2) at interior nodes of a level-l trapezoid grid on [a, b].
    fn nodes(&self, level: usize) -> &[f64] {
        self.levels[level].get_or_init(|| {
            let (a, b) = self.range();
            let n = 1usize << level;
            let h = (b - a) / n as f64;
            (1..n)
                .map(|i| {
                    let v = a + i as f64 * h;
                    2.0 * v * self.w.eval(v * v)
                })
                .collect()
        })
    }

    fn level_sum(&self, level: usize, y: f64) -> f64 {
        let (a, b) = self.range();
        let n = 1usize << level;
        let h = (b - a) / n as f64;
        let c = 4.0 * PI * y.sqrt();
        let mut acc = crate::arith::sum::Neumaier::new();
        for (i, f) in self.nodes(level).iter().enumerate() {
            if *f != 0.0 {
                let v = a + (i + 1) as f64 * h;
                acc.add(f * bessel::bessel_j(self.k - 1, c * v));
            }
        }
        acc.total() * h
    }

    pub fn eval(&self, y: f64) -> Result<f64> {
        if y < 0.0 {
            return Err(Error::ParameterOutOfRange(format!("y = {y}")));
        }
        let sign = if (self.k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if y == 0.0 {
            return Ok(if self.k == 1 {
                sign * TAU * self.w.mass()
            } else {
                0.0
            });
        }
        let (a, b) = self.range();
        // about 8 nodes per oscillation of the kernel plus a floor for the weight
        let need = 16.0 * (b - a) * y.sqrt() + 256.0;
        let mut level = (need.log2().ceil() as usize).max(8);
        if level >= MAX_LEVEL {
            return Err(Error::OscillationBudgetExceeded(y));
        }
        let mut prev = self.level_sum(level, y);
        while level < MAX_LEVEL {
            level += 1;
            let cur = self.level_sum(level, y);
            if (cur - prev).abs() < self.tol {
                return Ok(sign * TAU * cur);
            }
            prev = cur;
        }
        Err(Error::OscillationBudgetExceeded(y))
    }

    /// Upper bounds for ||F_j||_1, j = 0..=order, where F_0 = W and
    /// F_{j+1} = -sqrt(u) F_j' + (k - 1 + j) F_j / (2 sqrt(u)). Integrating
    /// by parts j times against J_{k-1+j} gives |W~(y)| <= 2 pi ||F_j||_1 (2 pi sqrt(y))^-j.
    pub fn ibp_norms(&self, order: usize) -> Vec<f64> {
        let mut acc = vec![0.0; order + 1];
        for (u, du) in self.w.norm_grid(4000) {
            let mut f = self.w.jet(u, order);
            let s = Jet::var(u, order).sqrt();
            let r = s.recip();
            acc[0] += f.value().abs() * du;
            for (j, slot) in acc.iter_mut().enumerate().skip(1) {
                let nu = (self.k - 1) as f64 + (j - 1) as f64;
                let ord = f.order() - 1;
                let d = f.diff();
                let t1 = &s.truncate(ord) * &d;
                let t2 = (&r.truncate(ord) * &f.truncate(ord)).scale(0.5 * nu);
                f = &t2 - &t1;
                *slot += f.value().abs() * du;
            }
        }
        acc.iter().map(|v| v * 1.02).collect()
    }
}

pub fn bessel_transform(w: &SmoothWeight, k: u32, y: f64) -> Result<f64> {
    BesselTransform::new(w, k)?.eval(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_bump_examples() {
        let w = make_bump(1.0, (0.5, 2.0)).unwrap();
        assert_eq!(w.eval(1.0), 1.0);
        assert_eq!(w.eval(0.4), 0.0);
        assert_eq!(w.eval(2.1), 0.0);
        let w4 = make_bump(4.0, (0.5, 2.0)).unwrap();
        for x in [0.625, 0.7, 1.3, 1.875] {
            assert_eq!(w4.eval(x), 1.0, "x={x}");
        }
        assert!(w4.eval(0.62) < 1.0 && w4.eval(1.88) < 1.0);
        assert!(matches!(
            make_bump(1.0, (0.9, 1.0)),
            Err(Error::DegenerateSupport(..))
        ));
    }

    #[test]
    fn jet_matches_finite_differences() {
        let w = make_bump(2.0, (0.5, 2.0)).unwrap();
        let h = 1e-5;
        for &x in &[0.55, 0.6, 0.71, 1.9] {
            let d1 = (w.eval(x + h) - w.eval(x - h)) / (2.0 * h);
            assert!(
                (w.derivative(x, 1) - d1).abs() < 1e-6 * d1.abs().max(1.0),
                "x={x}"
            );
        }
        let s = sqrt_bump(0.1, 10.0).unwrap();
        for &x in &[0.2, 1.0, 5.0, 9.0] {
            let d1 = (s.eval(x + h) - s.eval(x - h)) / (2.0 * h);
            assert!(
                (s.derivative(x, 1) - d1).abs() < 1e-6 * d1.abs().max(1.0),
                "x={x}"
            );
        }
    }

    #[test]
    fn fourier_examples() {
        let w = make_bump(1.0, (0.5, 2.0)).unwrap();
        let w0 = weight_fourier(&w, 0.0);
        assert!((w0.re - w.mass()).abs() < 1e-13 && w0.im.abs() < 1e-13);
        let w50 = weight_fourier(&w, 50.0).norm();
        let c2 = w.l1_norms()[2];
        assert!(w50 <= c2 / (TAU * 50.0).powi(2));
    }

    #[test]
    fn fourier_matches_direct_quadrature() {
        let w = make_bump(1.0, (0.5, 2.0)).unwrap();
        for &t in &[0.3, 1.7, 6.0] {
            let n = 20000;
            let (lo, hi) = w.support;
            let h = (hi - lo) / n as f64;
            let direct: Complex64 = (1..n)
                .map(|i| {
                    let x = lo + i as f64 * h;
                    Complex64::from_polar(w.eval(x), -TAU * t * x)
                })
                .sum::<Complex64>()
                * h;
            assert!((direct - weight_fourier(&w, t)).norm() < 1e-11, "t={t}");
        }
    }

    #[test]
    fn sandwich_examples() {
        let (outer, inner) = sharp_cutoff_sandwich(1e4, 0.1).unwrap();
        assert!((outer.support.0 - 0.9).abs() < 1e-15 && (outer.support.1 - 1.6).abs() < 1e-15);
        assert!(matches!(
            sharp_cutoff_sandwich(1e4, 0.6),
            Err(Error::InvalidDelta(_))
        ));
        for i in 0..=4000 {
            let x = 0.8 + 0.9 * i as f64 / 4000.0;
            let ind = if x > 1.0 && x <= 1.5 { 1.0 } else { 0.0 };
            assert!(inner.eval(x) <= ind && ind <= outer.eval(x), "x={x}");
        }
        assert_eq!(inner.eval(1.11), 1.0);
        assert_eq!(inner.eval(1.39), 1.0);
    }

    #[test]
    fn bessel_transform_examples() {
        let w = make_bump(1.0, (0.5, 2.0)).unwrap();
        assert_eq!(bessel_transform(&w, 12, 0.0).unwrap(), 0.0);
        let a = bessel_transform(&w, 12, 1.0).unwrap().abs();
        let b = bessel_transform(&w, 12, 100.0).unwrap().abs();
        assert!(b < a);
    }
}
