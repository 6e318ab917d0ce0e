//! The standard bump B(t) = exp(-1/(1-t^2)) on (-1, 1), its normalized
//! cumulative integral, and derivative-norm tables.

use super::jet::Jet;
use std::sync::OnceLock;

pub const DERIV_MAX: usize = 48;
const KNOTS: usize = 2048;

#[inline]
pub fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

pub fn bump_jet(t0: f64, order: usize) -> Jet {
    bump_of(&Jet::var(t0, order))
}

/// B composed with an inner function given by its jet.
pub fn bump_of(t: &Jet) -> Jet {
    if t.value().abs() >= 1.0 {
        return Jet::constant(0.0, t.order());
    }
    let one_minus = (t * t).scale(-1.0).add_const(1.0);
    one_minus.recip().scale(-1.0).exp()
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

struct CdfTable {
    z: f64,
    cum: Vec<f64>,
    gl: (Vec<f64>, Vec<f64>),
}

fn gl_integral(a: f64, b: f64, gl: &(Vec<f64>, Vec<f64>)) -> f64 {
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    gl.0.iter()
        .zip(&gl.1)
        .map(|(x, w)| w * bump(m + h * x))
        .sum::<f64>()
        * h
}

fn cdf_table() -> &'static CdfTable {
    static T: OnceLock<CdfTable> = OnceLock::new();
    T.get_or_init(|| {
        let gl = gauss_legendre(10);
        let h = 2.0 / KNOTS as f64;
        let mut cum = vec![0.0; KNOTS + 1];
        let mut acc = super::super::arith::sum::Neumaier::new();
        for k in 0..KNOTS {
            let a = -1.0 + k as f64 * h;
            acc.add(gl_integral(a, a + h, &gl));
            cum[k + 1] = acc.total();
        }
        let z = cum[KNOTS];
        CdfTable { z, cum, gl }
    })
}

/// Z = integral of B over (-1, 1).
pub fn bump_mass() -> f64 {
    cdf_table().z
}

/// Phi(u) = (1/Z) * integral_{-1}^{u} B, the smooth step from 0 to 1.
pub fn bump_cdf(u: f64) -> f64 {
    if u <= -1.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let t = cdf_table();
    let h = 2.0 / KNOTS as f64;
    let pos = (u + 1.0) / h;
    let k = (pos.round() as usize).min(KNOTS);
    let knot = -1.0 + k as f64 * h;
    let part = if u >= knot {
        gl_integral(knot, u, &t.gl)
    } else {
        -gl_integral(u, knot, &t.gl)
    };
    ((t.cum[k] + part) / t.z).clamp(0.0, 1.0)
}

pub fn bump_cdf_jet(u0: f64, order: usize) -> Jet {
    if u0 <= -1.0 || u0 >= 1.0 {
        return Jet::constant(bump_cdf(u0), order);
    }
    let b = bump_jet(u0, order.saturating_sub(1)).scale(1.0 / bump_mass());
    let mut j = b.integrate(bump_cdf(u0));
    j.c.truncate(order + 1);
    j
}

/// Derivative norms of B: (L1, sup) for j = 0..=DERIV_MAX.
pub struct BumpNorms {
    pub l1: Vec<f64>,
    pub sup: Vec<f64>,
}

/// Computed on a grid that refines geometrically toward t = 1 (B is even, so
/// only [0, 1) is sampled). Points where B underflows carry no mass at any
/// order used here.
pub fn bump_norms() -> &'static BumpNorms {
    static N: OnceLock<BumpNorms> = OnceLock::new();
    N.get_or_init(|| {
        let npts = 40_000;
        let umax = 12.0;
        let du = umax / npts as f64;
        let mut l1 = vec![0.0; DERIV_MAX + 1];
        let mut sup = vec![0.0f64; DERIV_MAX + 1];
        for i in 0..npts {
            let u = (i as f64 + 0.5) * du;
            let t = 1.0 - (-u).exp();
            let dt = (-u).exp() * du;
            let jet = bump_jet(t, DERIV_MAX);
            let mut fact = 1.0;
            for j in 0..=DERIV_MAX {
                if j > 0 {
                    fact *= j as f64;
                }
                let d = (jet.c[j] * fact).abs();
                l1[j] += 2.0 * d * dt;
                sup[j] = sup[j].max(d);
            }
        }
        BumpNorms { l1, sup }
    })
}
