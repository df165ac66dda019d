//! Least-squares line fits and polynomial extrapolation to zero.

/// Ordinary least-squares line `y = intercept + slope·x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    LinearFit { slope, intercept, r2 }
}

/// Slope of `log|y|` against `log x`.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    linear_fit(&lx, &ly)
}

/// Weighted least squares for `y ≈ Σ c_k b_k(x)` with basis values supplied
/// row-wise; returns the coefficients.
pub fn least_squares(rows: &[Vec<f64>], ys: &[f64]) -> Vec<f64> {
    let m = rows[0].len();
    let a = nalgebra::DMatrix::from_fn(rows.len(), m, |i, j| rows[i][j]);
    let b = nalgebra::DVector::from_column_slice(ys);
    let svd = a.svd(true, true);
    svd.solve(&b, 1e-14).expect("svd solve").iter().copied().collect()
}

/// Value at `h = 0` of the interpolating polynomial through `(h_k, y_k)`
/// (Neville's scheme). Returns the extrapolant and the last correction.
pub fn extrapolate_to_zero<T>(hs: &[f64], ys: &[T]) -> (T, f64)
where
    T: Copy
        + std::ops::Sub<Output = T>
        + std::ops::Mul<f64, Output = T>
        + std::ops::Add<Output = T>
        + Norm,
{
    assert!(!hs.is_empty() && hs.len() == ys.len());
    let mut p: Vec<T> = ys.to_vec();
    let n = hs.len();
    let mut last = 0.0;
    for m in 1..n {
        for i in 0..n - m {
            let (hi, hj) = (hs[i], hs[i + m]);
            // P(0) from the two overlapping interpolants
            let next = p[i + 1] + (p[i + 1] - p[i]) * (hj / (hi - hj));
            if i == n - m - 1 {
                last = (next - p[i + 1]).norm_value();
            }
            p[i] = next;
        }
    }
    (p[0], last)
}

/// Magnitude used for error bookkeeping in generic extrapolation.
pub trait Norm {
    fn norm_value(&self) -> f64;
}

impl Norm for f64 {
    fn norm_value(&self) -> f64 {
        self.abs()
    }
}

impl Norm for num_complex::Complex64 {
    fn norm_value(&self) -> f64 {
        self.norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        let f = linear_fit(&xs, &ys);
        assert!((f.slope + 2.0).abs() < 1e-14 && (f.intercept - 3.0).abs() < 1e-14);
        assert!((f.r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn synthetic_power_law() {
        let xs: Vec<f64> = (0..20).map(|i| 10.0 * 1.3f64.powi(i)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.powf(-2.0)).collect();
        assert!((loglog_fit(&xs, &ys).slope + 2.0).abs() < 1e-12);
    }

    #[test]
    fn neville_recovers_polynomial_limit() {
        let hs = [0.4, 0.2, 0.1, 0.05];
        let ys: Vec<f64> = hs.iter().map(|h| 1.5 + 2.0 * h - h * h * h).collect();
        let (v, _) = extrapolate_to_zero(&hs, &ys);
        assert!((v - 1.5).abs() < 1e-13);
    }

    #[test]
    fn least_squares_two_terms() {
        let xs: Vec<f64> = (1..10).map(|i| i as f64).collect();
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x.ln()]).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| 0.5 - 3.0 * x.ln()).collect();
        let c = least_squares(&rows, &ys);
        assert!((c[0] - 0.5).abs() < 1e-12 && (c[1] + 3.0).abs() < 1e-12);
    }
}
