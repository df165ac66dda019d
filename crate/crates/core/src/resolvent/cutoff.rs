use crate::error::{Error, Result};
use crate::jet::{Jet, MAX_ORDER};

/// A C^∞ function equal to 1 on `(−∞, lo]`, to 0 on `[hi, ∞)`, monotone between.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffSpec {
    pub lo: f64,
    pub hi: f64,
    pub derivative_order: usize,
}

impl CutoffSpec {
    pub fn new(lo: f64, hi: f64, derivative_order: usize) -> Result<Self> {
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::Invalid(format!("cutoff needs 0 < lo < hi, got [{lo}, {hi}]")));
        }
        if derivative_order > MAX_ORDER {
            return Err(Error::Invalid(format!(
                "cutoff derivative order {derivative_order} exceeds {MAX_ORDER}"
            )));
        }
        Ok(CutoffSpec { lo, hi, derivative_order })
    }

    /// The fixed `η` with plateau `[0, 1/2]` and support `[0, 1]`.
    pub fn eta() -> Self {
        CutoffSpec { lo: 0.5, hi: 1.0, derivative_order: MAX_ORDER }
    }

    /// `χ` at low-energy scale `λ₀`: 1 below `λ₀/2`, 0 above `λ₀`.
    pub fn chi(lambda0: f64) -> Result<Self> {
        CutoffSpec::new(lambda0 / 2.0, lambda0, MAX_ORDER)
    }

    /// Fast value without derivative bookkeeping.
    pub fn value(&self, z: f64) -> f64 {
        if z <= self.lo {
            return 1.0;
        }
        if z >= self.hi {
            return 0.0;
        }
        let t = (z - self.lo) / (self.hi - self.lo);
        let a = zeta(t);
        let b = zeta(1.0 - t);
        b / (a + b)
    }

    /// Jet of the cutoff composed with the jet `z`.
    pub fn jet(&self, z: Jet) -> Jet {
        let z0 = z.value();
        let n = z.order();
        if z0 <= self.lo {
            return Jet::constant(1.0, n);
        }
        if z0 >= self.hi {
            return Jet::constant(0.0, n);
        }
        let t = (z + (-self.lo)) * (1.0 / (self.hi - self.lo));
        let one_minus_t = -t + 1.0;
        let a = zeta_jet(t);
        let b = zeta_jet(one_minus_t);
        b / (a + b)
    }
}

fn zeta(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

fn zeta_jet(t: Jet) -> Jet {
    (-t.recip()).exp()
}

/// `k`-th derivative of the cutoff at `z`, computed analytically.
pub fn smooth_cutoff(spec: &CutoffSpec, z: f64, k: usize) -> Result<f64> {
    if k > spec.derivative_order {
        return Err(Error::Invalid(format!(
            "derivative order {k} exceeds the cutoff's {}",
            spec.derivative_order
        )));
    }
    if k == 0 {
        return Ok(spec.value(z));
    }
    Ok(spec.jet(Jet::variable(z, k)).derivative(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_and_support() {
        let c = CutoffSpec::new(0.5, 1.0, 4).unwrap();
        assert_eq!(smooth_cutoff(&c, 0.3, 0).unwrap(), 1.0);
        assert_eq!(smooth_cutoff(&c, 2.0, 0).unwrap(), 0.0);
        assert!(smooth_cutoff(&c, 0.75, 1).unwrap() < 0.0);
        assert!(smooth_cutoff(&c, 0.75, 5).is_err());
        assert!((smooth_cutoff(&c, 0.75, 0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let c = CutoffSpec::new(0.5, 1.0, 4).unwrap();
        for i in 1..20 {
            let z = 0.5 + 0.5 * i as f64 / 20.0;
            for k in 1..=3 {
                let h = 1e-4;
                let f = |x: f64| smooth_cutoff(&c, x, k - 1).unwrap();
                // five-point centered stencil
                let fd = (-f(z + 2.0 * h) + 8.0 * f(z + h) - 8.0 * f(z - h) + f(z - 2.0 * h))
                    / (12.0 * h);
                let an = smooth_cutoff(&c, z, k).unwrap();
                assert!(
                    (fd - an).abs() <= 1e-6 * an.abs().max(1e-3),
                    "z={z} k={k}: {an} vs {fd}"
                );
            }
        }
    }

    #[test]
    fn monotone_transition() {
        let c = CutoffSpec::chi(0.1).unwrap();
        let mut prev = 1.0;
        for i in 0..=200 {
            let v = c.value(0.04 + 0.07 * i as f64 / 200.0);
            assert!(v <= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
    }
}
