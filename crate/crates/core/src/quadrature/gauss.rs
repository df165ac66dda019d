//! Fixed Gauss–Legendre rules, adaptive Gauss–Kronrod (7, 15) and
//! tanh–sinh for endpoint singularities.

use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Shared rule of a commonly used size.
    pub fn cached(n: usize) -> &'static GaussLegendre {
        static RULES: OnceLock<Vec<GaussLegendre>> = OnceLock::new();
        let rules = RULES.get_or_init(|| (0..=64).map(|k| GaussLegendre::new(k.max(1))).collect());
        assert!(n <= 64, "cached rules go up to 64 points");
        &rules[n]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (c + h * x, h * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    pub fn integrate_complex<F: Fn(f64) -> Complex64>(&self, a: f64, b: f64, f: &F) -> Complex64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// `P_n(x)` and `P_n'(x)`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integral value with an error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Nodes of the (7, 15) Gauss–Kronrod pair on `[a, b]` as
/// `(x, Kronrod weight, Gauss weight)`; the Gauss weight is 0 at the
/// Kronrod-only nodes.
pub fn kronrod_rule(a: f64, b: f64) -> [(f64, f64, f64); 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(c, WGK[7] * h, WG[3] * h); 15];
    for j in 0..7 {
        let wg = if j % 2 == 1 { WG[j / 2] * h } else { 0.0 };
        out[2 * j] = (c - h * XGK[j], WGK[j] * h, wg);
        out[2 * j + 1] = (c + h * XGK[j], WGK[j] * h, wg);
    }
    out
}

fn kronrod_panel<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    let k = k * h;
    let g = g * h;
    (k, (k - g).norm())
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Globally adaptive Gauss–Kronrod (7, 15) on `[a, b]`, split initially at
/// `breaks` (points strictly inside).
pub fn adaptive_complex<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Estimate<Complex64> {
    let mut heap = BinaryHeap::new();
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut evals = 0;
    for w in pts.windows(2) {
        let (v, e) = kronrod_panel(&mut f, w[0], w[1]);
        evals += 15;
        heap.push(Panel { a: w[0], b: w[1], value: v, error: e });
    }
    loop {
        let total: Complex64 = heap.iter().map(|p| p.value).sum();
        let err: f64 = heap.iter().map(|p| p.error).sum();
        if err <= abs_tol.max(rel_tol * total.norm()) || heap.len() >= max_panels {
            return Estimate { value: total, error: err, evaluations: evals };
        }
        let worst = heap.pop().expect("nonempty");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            heap.push(worst);
            let total: Complex64 = heap.iter().map(|p| p.value).sum();
            return Estimate { value: total, error: err, evaluations: evals };
        }
        for (lo, hi) in [(worst.a, m), (m, worst.b)] {
            let (v, e) = kronrod_panel(&mut f, lo, hi);
            evals += 15;
            heap.push(Panel { a: lo, b: hi, value: v, error: e });
        }
    }
}

/// Real-valued convenience wrapper of [`adaptive_complex`].
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Estimate<f64> {
    let e = adaptive_complex(|x| Complex64::new(f(x), 0.0), a, b, breaks, abs_tol, rel_tol, max_panels);
    Estimate { value: e.value.re, error: e.error, evaluations: e.evaluations }
}

/// Tanh–sinh quadrature on `[a, b]`; tolerates integrable endpoint
/// singularities. `f` receives `(x, distance to the nearer endpoint)` so
/// that singular factors can be evaluated without cancellation.
pub fn tanh_sinh<F: FnMut(f64, f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Estimate<Complex64> {
    let half = 0.5 * (b - a);
    let tmax = 6.5;
    let mut h = 0.5;
    let mut evals = 0;
    let point = |t: f64, f: &mut F| -> Complex64 {
        let s = 0.5 * PI * t.sinh();
        let u = 1.0 / s.cosh();
        // 1 − tanh(s) without cancellation
        let one_minus = u * u / (1.0 + s.tanh().abs());
        let w = 0.5 * PI * t.cosh() * u * u;
        if one_minus * half == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let dist = half * one_minus;
        let x = if s >= 0.0 { b - dist } else { a + dist };
        f(x, dist) * w
    };
    let mut sum = point(0.0, &mut f);
    evals += 1;
    let mut k = 1;
    while k as f64 * h <= tmax {
        let t = k as f64 * h;
        sum += point(t, &mut f) + point(-t, &mut f);
        evals += 2;
        k += 1;
    }
    let mut prev = sum * h * half;
    let mut err = f64::INFINITY;
    for _ in 0..8 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= tmax {
            let t = k as f64 * h;
            sum += point(t, &mut f) + point(-t, &mut f);
            evals += 2;
            k += 2;
        }
        let cur = sum * h * half;
        err = (cur - prev).norm();
        prev = cur;
        if err <= abs_tol.max(rel_tol * cur.norm()) * 0.1 {
            // the last difference overestimates the error quadratically
            break;
        }
    }
    Estimate { value: prev, error: err, evaluations: evals }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let g = GaussLegendre::new(10);
        let v = g.integrate(0.0, 2.0, |x| x.powi(19));
        assert!((v - 2f64.powi(20) / 20.0).abs() < 1e-9);
        let s: f64 = g.weights().iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_large_rule() {
        let g = GaussLegendre::new(64);
        let v = g.integrate(0.0, PI, |x| x.sin());
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn kronrod_adaptive() {
        let e = adaptive(|x| (x.sqrt()).ln(), 0.0, 1.0, &[], 1e-12, 1e-12, 500);
        assert!((e.value + 0.5).abs() < 1e-10);
        assert!(e.error >= (e.value + 0.5).abs());
    }

    #[test]
    fn tanh_sinh_endpoint_singularity() {
        let e = tanh_sinh(|x, _| Complex64::new(1.0 / x.sqrt(), 0.0), 0.0, 1.0, 1e-13, 1e-13);
        assert!((e.value.re - 2.0).abs() < 1e-10, "{}", e.value.re);
        let l = tanh_sinh(|x, _| Complex64::new(x.ln(), 0.0), 0.0, 1.0, 1e-13, 1e-13);
        assert!((l.value.re + 1.0).abs() < 1e-12);
    }

    #[test]
    fn kronrod_rule_integrates_polynomials() {
        let rule = kronrod_rule(-1.0, 3.0);
        let k: f64 = rule.iter().map(|&(x, w, _)| w * x.powi(20)).sum();
        let g: f64 = rule.iter().map(|&(x, _, w)| w * x.powi(12)).sum();
        let exact = |n: i32| (3f64.powi(n + 1) - (-1f64).powi(n + 1)) / (n + 1) as f64;
        assert!((k - exact(20)).abs() < 1e-12 * exact(20));
        assert!((g - exact(12)).abs() < 1e-12 * exact(12));
    }
}
