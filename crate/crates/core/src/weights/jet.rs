//! Truncated Taylor series ("jets") used to evaluate high-order derivatives of
//! the weights. Coefficient `c[k]` is f^(k)(x0)/k!.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub c: Vec<f64>,
}

impl Jet {
    pub fn constant(v: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = v;
        Jet { c }
    }

    /// The identity function expanded at x0.
    pub fn var(x0: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = x0;
        if order > 0 {
            c[1] = 1.0;
        }
        Jet { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// k-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        let mut f = 1.0;
        for i in 2..=k {
            f *= i as f64;
        }
        self.c[k] * f
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            c: self.c.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add_const(&self, s: f64) -> Jet {
        let mut c = self.c.clone();
        c[0] += s;
        Jet { c }
    }

    /// Jet of f' (order drops by one).
    pub fn diff(&self) -> Jet {
        let n = self.order();
        if n == 0 {
            return Jet::constant(0.0, 0);
        }
        Jet {
            c: (1..=n).map(|k| self.c[k] * k as f64).collect(),
        }
    }

    pub fn truncate(&self, order: usize) -> Jet {
        Jet {
            c: self.c[..=order.min(self.order())].to_vec(),
        }
    }

    pub fn recip(&self) -> Jet {
        let n = self.order();
        let a0 = self.c[0];
        let mut r = vec![0.0; n + 1];
        r[0] = 1.0 / a0;
        for k in 1..=n {
            let mut s = 0.0;
            for i in 1..=k {
                s += self.c[i] * r[k - i];
            }
            r[k] = -s / a0;
        }
        Jet { c: r }
    }

    pub fn div(&self, other: &Jet) -> Jet {
        self * &other.recip()
    }

    pub fn exp(&self) -> Jet {
        let n = self.order();
        let mut e = vec![0.0; n + 1];
        e[0] = self.c[0].exp();
        for k in 1..=n {
            let mut s = 0.0;
            for i in 1..=k {
                s += i as f64 * self.c[i] * e[k - i];
            }
            e[k] = s / k as f64;
        }
        Jet { c: e }
    }

    pub fn sqrt(&self) -> Jet {
        let n = self.order();
        let mut r = vec![0.0; n + 1];
        r[0] = self.c[0].sqrt();
        for k in 1..=n {
            let mut s = self.c[k];
            for i in 1..k {
                s -= r[i] * r[k - i];
            }
            r[k] = s / (2.0 * r[0]);
        }
        Jet { c: r }
    }

    /// Antiderivative with value `v0` at the expansion point.
    pub fn integrate(&self, v0: f64) -> Jet {
        let n = self.order();
        let mut c = vec![0.0; n + 2];
        c[0] = v0;
        for k in 0..=n {
            c[k + 1] = self.c[k] / (k + 1) as f64;
        }
        Jet { c }
    }

    /// Evaluates the polynomial at offset h from the expansion point.
    pub fn eval_at(&self, h: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &v| acc * h + v)
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        let n = self.order().min(o.order());
        Jet {
            c: (0..=n).map(|k| self.c[k] + o.c[k]).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        let n = self.order().min(o.order());
        Jet {
            c: (0..=n).map(|k| self.c[k] - o.c[k]).collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        let n = self.order().min(o.order());
        let mut c = vec![0.0; n + 1];
        for (i, a) in self.c.iter().enumerate().take(n + 1) {
            if *a == 0.0 {
                continue;
            }
            for j in 0..=n - i {
                c[i + j] += a * o.c[j];
            }
        }
        Jet { c }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_var_gives_factorial_reciprocals() {
        let e = Jet::var(0.0, 10).exp();
        let mut f = 1.0;
        for k in 0..=10 {
            if k > 0 {
                f *= k as f64;
            }
            assert!((e.c[k] - 1.0 / f).abs() < 1e-15);
        }
    }

    #[test]
    fn sqrt_and_recip_round_trip() {
        let x = Jet::var(2.5, 8);
        let s = x.sqrt();
        let back = &s * &s;
        for k in 0..=8 {
            assert!((back.c[k] - x.c[k]).abs() < 1e-14);
        }
        let r = x.recip();
        // d^k/dx^k (1/x) = (-1)^k k! / x^(k+1)
        for k in 0..=8 {
            let expect = (-1f64).powi(k as i32) / 2.5f64.powi(k as i32 + 1);
            assert!((r.c[k] - expect).abs() < 1e-14 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn derivative_of_composed_function() {
        // f(x) = exp(-1/(1-x^2)) at 0.3, compared with central differences.
        let f = |x: f64| (-1.0 / (1.0 - x * x)).exp();
        let x = Jet::var(0.3, 3);
        let g = (&Jet::constant(1.0, 3) - &(&x * &x))
            .recip()
            .scale(-1.0)
            .exp();
        let h = 1e-4;
        let d1 = (f(0.3 + h) - f(0.3 - h)) / (2.0 * h);
        let d2 = (f(0.3 + h) - 2.0 * f(0.3) + f(0.3 - h)) / (h * h);
        assert!((g.derivative(1) - d1).abs() < 1e-7);
        assert!((g.derivative(2) - d2).abs() < 1e-5);
    }
}
