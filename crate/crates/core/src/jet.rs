//! Truncated Taylor series ("jets") for exact derivative oracles of smooth
//! real functions: cutoffs, model symbols and their products.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Highest derivative order a jet can carry.
pub const MAX_ORDER: usize = 7;

/// Taylor coefficients `c_k = f^{(k)}(x₀)/k!` for `k ≤ order`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    c: [f64; MAX_ORDER + 1],
    order: usize,
}

impl Jet {
    pub fn constant(v: f64, order: usize) -> Jet {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut c = [0.0; MAX_ORDER + 1];
        c[0] = v;
        Jet { c, order }
    }

    /// The independent variable at `x0`.
    pub fn variable(x0: f64, order: usize) -> Jet {
        let mut j = Jet::constant(x0, order);
        if order >= 1 {
            j.c[1] = 1.0;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.c[k]
    }

    /// `f^{(k)}(x₀)`.
    pub fn derivative(&self, k: usize) -> f64 {
        assert!(k <= self.order);
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.c[k] * fact
    }

    fn zip(self, o: Jet) -> usize {
        self.order.min(o.order)
    }

    pub fn scale(mut self, s: f64) -> Jet {
        for v in self.c.iter_mut() {
            *v *= s;
        }
        self
    }

    pub fn exp(self) -> Jet {
        let mut g = Jet::constant(self.c[0].exp(), self.order);
        for k in 1..=self.order {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.c[j] * g.c[k - j];
            }
            g.c[k] = s / k as f64;
        }
        g
    }

    pub fn ln(self) -> Jet {
        let f0 = self.c[0];
        let mut g = Jet::constant(f0.ln(), self.order);
        for k in 1..=self.order {
            let mut s = 0.0;
            for j in 1..k {
                s += j as f64 * g.c[j] * self.c[k - j];
            }
            g.c[k] = (self.c[k] - s / k as f64) / f0;
        }
        g
    }

    /// `f^a` for `f(x₀) > 0`.
    pub fn powf(self, a: f64) -> Jet {
        let f0 = self.c[0];
        let mut g = Jet::constant(f0.powf(a), self.order);
        for k in 1..=self.order {
            let mut s = 0.0;
            for j in 1..=k {
                s += (a * j as f64 - (k - j) as f64) * self.c[j] * g.c[k - j];
            }
            g.c[k] = s / (k as f64 * f0);
        }
        g
    }

    pub fn recip(self) -> Jet {
        Jet::constant(1.0, self.order) / self
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let n = self.zip(o);
        let mut r = Jet::constant(0.0, n);
        for k in 0..=n {
            r.c[k] = self.c[k] + o.c[k];
        }
        r
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let n = self.zip(o);
        let mut r = Jet::constant(0.0, n);
        for k in 0..=n {
            r.c[k] = (0..=k).map(|j| self.c[j] * o.c[k - j]).sum();
        }
        r
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let n = self.zip(o);
        let mut h = Jet::constant(0.0, n);
        for k in 0..=n {
            let s: f64 = (1..=k).map(|j| o.c[j] * h.c[k - j]).sum();
            h.c[k] = (self.c[k] - s) / o.c[0];
        }
        h
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, v: f64) -> Jet {
        self.c[0] += v;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, v: f64) -> Jet {
        self.scale(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_variable() {
        let j = Jet::variable(0.3, 5).exp();
        for k in 0..=5 {
            assert!((j.derivative(k) - 0.3f64.exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn power_matches_falling_factorial() {
        let b = 1.5;
        let x = 0.7;
        let j = Jet::variable(x, 4).powf(b);
        let mut fall = 1.0;
        for k in 0..=4 {
            let expect = fall * x.powf(b - k as f64);
            assert!((j.derivative(k) - expect).abs() < 1e-13 * expect.abs().max(1.0), "k={k}");
            fall *= b - k as f64;
        }
    }

    #[test]
    fn log_and_quotient() {
        let x = 2.5;
        let l = Jet::variable(x, 3).ln();
        assert!((l.derivative(1) - 1.0 / x).abs() < 1e-15);
        assert!((l.derivative(2) + 1.0 / (x * x)).abs() < 1e-15);
        assert!((l.derivative(3) - 2.0 / x.powi(3)).abs() < 1e-15);
        let q = Jet::constant(1.0, 3) / Jet::variable(x, 3);
        assert!((q.derivative(3) + 6.0 / x.powi(4)).abs() < 1e-15);
    }
}
