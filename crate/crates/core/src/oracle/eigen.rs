//! Exact spectral decomposition of `D + Σ_j α_j z_j z_j^*` by successive
//! rank-one secular updates. Eigenvectors are never formed: each update keeps
//! its Cauchy-structured factor and applies it in `O(m²)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

const EPS: f64 = f64::EPSILON;

/// Unitary prelude of one update, acting on a group of equal diagonal entries.
#[derive(Clone, Debug)]
enum Reflector {
    /// Multiply one slot by `phase`.
    Phase { slot: usize, phase: Complex64 },
    /// `W = phase·(I − β u u^*)` on `slots`.
    House { slots: Vec<usize>, u: Vec<Complex64>, beta: f64, phase: Complex64 },
}

impl Reflector {
    /// `x ← W x`.
    fn apply(&self, x: &mut [Complex64]) {
        match self {
            Reflector::Phase { slot, phase } => x[*slot] *= phase,
            Reflector::House { slots, u, beta, phase } => {
                let s: Complex64 = slots.iter().zip(u).map(|(&k, uk)| uk.conj() * x[k]).sum();
                for (&k, uk) in slots.iter().zip(u) {
                    x[k] = (x[k] - uk * (s * beta)) * phase;
                }
            }
        }
    }

    /// `x ← W^* x`.
    fn apply_adjoint(&self, x: &mut [Complex64]) {
        match self {
            Reflector::Phase { slot, phase } => x[*slot] *= phase.conj(),
            Reflector::House { slots, u, beta, phase } => {
                let pc = phase.conj();
                for &k in slots {
                    x[k] *= pc;
                }
                let s: Complex64 = slots.iter().zip(u).map(|(&k, uk)| uk.conj() * x[k]).sum();
                for (&k, uk) in slots.iter().zip(u) {
                    x[k] -= uk * (s * beta);
                }
            }
        }
    }
}

/// One rank-one update `Λ + α z z^*`.
#[derive(Clone, Debug)]
struct Update {
    prelude: Vec<Reflector>,
    /// Slots of the non-deflated block, in increasing order of `d`.
    active: Vec<usize>,
    d: Vec<f64>,
    zhat: Vec<f64>,
    /// Root `j` is `d[origin[j]] + tau[j]`.
    origin: Vec<usize>,
    tau: Vec<f64>,
    inv_norm: Vec<f64>,
}

impl Update {
    /// `d_i − μ_j` without cancellation.
    #[inline]
    fn gap(&self, i: usize, j: usize) -> f64 {
        (self.d[i] - self.d[self.origin[j]]) - self.tau[j]
    }

    #[inline]
    fn v(&self, i: usize, j: usize) -> f64 {
        self.zhat[i] / self.gap(i, j) * self.inv_norm[j]
    }

    /// Previous coordinates to new eigen-coordinates.
    fn forward(&self, x: &mut [Complex64]) {
        for r in &self.prelude {
            r.apply(x);
        }
        let xa: Vec<Complex64> = self.active.iter().map(|&k| x[k]).collect();
        let m = self.active.len();
        let ya: Vec<Complex64> = (0..m)
            .into_par_iter()
            .map(|j| (0..m).map(|i| xa[i] * self.v(i, j)).sum())
            .collect();
        for (&k, y) in self.active.iter().zip(ya) {
            x[k] = y;
        }
    }

    /// New eigen-coordinates to previous coordinates.
    fn backward(&self, y: &mut [Complex64]) {
        let ya: Vec<Complex64> = self.active.iter().map(|&k| y[k]).collect();
        let m = self.active.len();
        let xa: Vec<Complex64> = (0..m)
            .into_par_iter()
            .map(|i| (0..m).map(|j| ya[j] * self.v(i, j)).sum())
            .collect();
        for (&k, x) in self.active.iter().zip(xa) {
            y[k] = x;
        }
        for r in self.prelude.iter().rev() {
            r.apply_adjoint(y);
        }
    }
}

/// Eigen-decomposition `H = Q Λ Q^*` of a diagonal plus a sum of positive
/// rank-one terms, kept as a chain of updates.
#[derive(Clone, Debug)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    updates: Vec<Update>,
}

impl Spectrum {
    pub fn diagonal(d: Vec<f64>) -> Self {
        Spectrum { eigenvalues: d, updates: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `Q^* x`.
    pub fn to_eigen(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = x.to_vec();
        for u in &self.updates {
            u.forward(&mut y);
        }
        y
    }

    /// `Q y`.
    pub fn from_eigen(&self, y: &[Complex64]) -> Vec<Complex64> {
        let mut x = y.to_vec();
        for u in self.updates.iter().rev() {
            u.backward(&mut x);
        }
        x
    }

    /// `e^{itH} x`.
    pub fn exp_i(&self, t: f64, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = self.to_eigen(x);
        for (v, l) in y.iter_mut().zip(&self.eigenvalues) {
            *v *= Complex64::cis(t * l);
        }
        self.from_eigen(&y)
    }

    /// Add `α z z^*` (`z` in the original coordinates, `α ≥ 0`).
    pub fn add_rank_one(&mut self, alpha: f64, z: &[Complex64]) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::Invalid("rank-one vector has the wrong length".into()));
        }
        if !(alpha >= 0.0) {
            return Err(Error::Unsupported("negative couplings in the oracle".into()));
        }
        if alpha == 0.0 {
            return Ok(());
        }
        let zt = self.to_eigen(z);
        let update = build_update(&self.eigenvalues, alpha, &zt)?;
        for (j, &k) in update.active.iter().enumerate() {
            self.eigenvalues[k] = update.d[update.origin[j]] + update.tau[j];
        }
        self.updates.push(update);
        Ok(())
    }
}

fn build_update(lam: &[f64], alpha: f64, z: &[Complex64]) -> Result<Update> {
    let n = lam.len();
    let scale = lam.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let znorm2: f64 = z.iter().map(|v| v.norm_sqr()).sum();
    let rho = alpha * znorm2;
    let tol = 8.0 * EPS * scale.max(rho);

    // group (nearly) equal diagonal entries
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lam[a].total_cmp(&lam[b]).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &k in &order {
        match groups.last_mut() {
            Some(g) if lam[k] - lam[g[0]] <= tol => g.push(k),
            _ => groups.push(vec![k]),
        }
    }

    let mut prelude = Vec::new();
    let mut active = Vec::new();
    let mut zhat = Vec::new();
    for g in groups {
        let gnorm = g.iter().map(|&k| z[k].norm_sqr()).sum::<f64>().sqrt();
        if alpha * gnorm * znorm2.sqrt() <= tol {
            continue;
        }
        let first = g[0];
        if g.len() == 1 {
            let theta = z[first].arg();
            prelude.push(Reflector::Phase { slot: first, phase: Complex64::cis(-theta) });
        } else {
            // u = w + e^{iθ}e₁ maps w to −e^{iθ}e₁; the phase −e^{−iθ} fixes it to e₁
            let w: Vec<Complex64> = g.iter().map(|&k| z[k] / gnorm).collect();
            let theta = if w[0].norm() > 0.0 { w[0].arg() } else { 0.0 };
            let mut u = w.clone();
            u[0] += Complex64::cis(theta);
            let un2: f64 = u.iter().map(|v| v.norm_sqr()).sum();
            prelude.push(Reflector::House { slots: g.clone(), u, beta: 2.0 / un2, phase: -Complex64::cis(-theta) });
        }
        active.push(first);
        zhat.push(gnorm);
    }
    let d: Vec<f64> = active.iter().map(|&k| lam[k]).collect();
    let m = d.len();
    let roots: Vec<(usize, f64)> = (0..m).into_par_iter().map(|j| secular_root(&d, &zhat, alpha, rho, j)).collect();
    let (origin, tau): (Vec<usize>, Vec<f64>) = roots.into_iter().unzip();

    let mut up = Update { prelude, active, d, zhat, origin, tau, inv_norm: vec![0.0; m] };
    // recompute ẑ from the computed roots so the eigenvectors are orthogonal
    let zhat: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mu_minus_di = |j: usize| -up.gap(i, j);
            let mut p = mu_minus_di(m - 1) / alpha;
            for j in 0..i {
                p *= mu_minus_di(j) / (up.d[j] - up.d[i]);
            }
            for j in i..m - 1 {
                p *= mu_minus_di(j) / (up.d[j + 1] - up.d[i]);
            }
            p.max(0.0).sqrt()
        })
        .collect();
    up.zhat = zhat;
    let inv: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|j| {
            let s: f64 = (0..m).map(|i| (up.zhat[i] / up.gap(i, j)).powi(2)).sum();
            1.0 / s.sqrt()
        })
        .collect();
    up.inv_norm = inv;
    if up.inv_norm.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonConvergence("secular eigenvector normalization".into()));
    }
    Ok(up)
}

/// Root `j` of `1 + α Σ ẑ_i²/(d_i − μ)`, returned as `(origin, τ)` with the
/// origin the nearer pole.
fn secular_root(d: &[f64], z: &[f64], alpha: f64, rho: f64, j: usize) -> (usize, f64) {
    let m = d.len();
    let f = |o: usize, tau: f64| -> f64 {
        1.0 + alpha * (0..m).map(|i| z[i] * z[i] / ((d[i] - d[o]) - tau)).sum::<f64>()
    };
    let (o, mut lo, mut hi) = if j + 1 < m {
        let half = 0.5 * (d[j + 1] - d[j]);
        if f(j, half) >= 0.0 {
            (j, 0.0, half)
        } else {
            (j + 1, -half, 0.0)
        }
    } else {
        (j, 0.0, rho)
    };
    // f increases in τ on the bracket
    for _ in 0..1100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(o, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = if o == j { hi } else { lo };
    (o, tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn dense(d: &[f64], terms: &[(f64, Vec<Complex64>)]) -> DMatrix<Complex64> {
        let n = d.len();
        let mut h = DMatrix::from_diagonal(&DVector::from_iterator(n, d.iter().map(|&x| Complex64::new(x, 0.0))));
        for (a, z) in terms {
            let zv = DVector::from_vec(z.clone());
            h += &zv * zv.adjoint() * Complex64::new(*a, 0.0);
        }
        h
    }

    fn sample(n: usize, seed: u64) -> Vec<Complex64> {
        // deterministic pseudo-random entries
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let a = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let b = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                Complex64::new(a, b)
            })
            .collect()
    }

    fn check(d: Vec<f64>, terms: Vec<(f64, Vec<Complex64>)>) {
        let h = dense(&d, &terms);
        let mut sp = Spectrum::diagonal(d);
        for (a, z) in &terms {
            sp.add_rank_one(*a, z).unwrap();
        }
        let mut ours = sp.eigenvalues().to_vec();
        ours.sort_by(f64::total_cmp);
        let eig = h.clone().symmetric_eigen();
        let mut exact: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        exact.sort_by(f64::total_cmp);
        let scale = exact.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        for (a, b) in ours.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-12 * scale, "{a} vs {b}");
        }
        let x = sample(h.nrows(), 7);
        for &t in &[0.3, -2.0, 11.0] {
            let ours = sp.exp_i(t, &x);
            let u = &eig.eigenvectors;
            let ph = DVector::from_iterator(h.nrows(), eig.eigenvalues.iter().map(|l| Complex64::cis(t * l)));
            let xv = DVector::from_vec(x.clone());
            let mut c = u.adjoint() * xv;
            c.component_mul_assign(&ph);
            let exact = u * c;
            let err: f64 = ours.iter().zip(exact.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            assert!(err < 1e-10, "t={t}: {err}");
            let n0: f64 = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let n1: f64 = ours.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            assert!((n0 - n1).abs() < 1e-12 * n0);
        }
    }

    #[test]
    fn distinct_diagonal_rank_one() {
        let d: Vec<f64> = (0..12).map(|k| (k * k) as f64 * 0.3).collect();
        check(d, vec![(1.5, sample(12, 1))]);
    }

    #[test]
    fn degenerate_pairs_and_rank_two() {
        // ±ξ pairs as in a Fourier basis, with a zero component
        let d: Vec<f64> = (0..16).map(|k| {
            let q = if k <= 8 { k } else { 16 - k };
            (q * q) as f64
        })
        .collect();
        let mut z1 = sample(16, 3);
        z1[5] = Complex64::new(0.0, 0.0);
        check(d, vec![(0.8, z1), (2.0, sample(16, 4))]);
    }

    #[test]
    fn tiny_components_are_deflated() {
        let d: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let mut z = sample(10, 9);
        z[2] *= 1e-18;
        z[7] *= 1e-9;
        check(d, vec![(1.0, z)]);
    }

    #[test]
    fn zero_coupling_is_identity() {
        let mut sp = Spectrum::diagonal(vec![1.0, 2.0, 3.0]);
        sp.add_rank_one(0.0, &sample(3, 2)).unwrap();
        let x = sample(3, 5);
        let y = sp.exp_i(0.0, &x);
        assert_eq!(x, y);
        assert!(sp.add_rank_one(-1.0, &sample(3, 2)).is_err());
    }
}
