//! Restarted GMRES with modified Gram–Schmidt and one reorthogonalization pass.

use num_complex::Complex64;

use crate::error::{Error, Result};

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| y.conj() * x).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Solve `A x = b` to relative residual `tol`; returns the solution and the
/// number of Krylov steps taken.
pub fn solve<A: Fn(&[Complex64]) -> Vec<Complex64>>(
    a: &A,
    b: &[Complex64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<Complex64>, usize)> {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let restart = 40.min(n);
    let mut total = 0;
    while total < max_iter {
        let ax = a(&x);
        let r: Vec<Complex64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        if beta <= tol * bnorm {
            return Ok((x, total));
        }
        let mut v: Vec<Vec<Complex64>> = vec![r.iter().map(|ri| ri / beta).collect()];
        let mut h: Vec<Vec<Complex64>> = Vec::new();
        let mut cs: Vec<(f64, Complex64)> = Vec::new();
        let mut g = vec![Complex64::new(beta, 0.0)];
        let mut k = 0;
        while k < restart && total < max_iter {
            let mut w = a(&v[k]);
            let mut col = vec![Complex64::new(0.0, 0.0); k + 2];
            for _ in 0..2 {
                for (i, vi) in v.iter().enumerate() {
                    let c = dot(&w, vi);
                    col[i] += c;
                    for (wj, vj) in w.iter_mut().zip(vi) {
                        *wj -= vj * c;
                    }
                }
            }
            let wn = norm(&w);
            col[k + 1] = Complex64::new(wn, 0.0);
            for (i, &(c, s)) in cs.iter().enumerate() {
                let t = col[i] * c + s * col[i + 1];
                col[i + 1] = -s.conj() * col[i] + col[i + 1] * c;
                col[i] = t;
            }
            let (c, s, rr) = givens(col[k], col[k + 1]);
            col[k] = rr;
            col[k + 1] = Complex64::new(0.0, 0.0);
            cs.push((c, s));
            let gk = g[k];
            g[k] = gk * c;
            g.push(-s.conj() * gk);
            h.push(col);
            total += 1;
            k += 1;
            let converged = g[k].norm() <= tol * bnorm;
            if converged || wn == 0.0 {
                break;
            }
            v.push(w.iter().map(|wi| wi / wn).collect());
        }
        // back substitution for the k×k triangular system
        let mut y = vec![Complex64::new(0.0, 0.0); k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= h[j][i] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&v[j]) {
                *xi += vi * yj;
            }
        }
    }
    let ax = a(&x);
    let res = b.iter().zip(&ax).map(|(bi, ai)| (bi - ai).norm_sqr()).sum::<f64>().sqrt();
    if res <= 10.0 * tol * bnorm {
        return Ok((x, total));
    }
    Err(Error::NonConvergence(format!("GMRES residual {:.3e} after {total} steps", res / bnorm)))
}

/// Complex Givens rotation zeroing `b` against `a`: returns `(c, s, r)` with
/// `[c s; −s̄ c]·[a; b] = [r; 0]`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64, Complex64) {
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0), a);
    }
    let an = a.norm();
    if an == 0.0 {
        return (0.0, b.conj() / bn, Complex64::new(bn, 0.0));
    }
    let t = (an * an + bn * bn).sqrt();
    let c = an / t;
    let phase = a / an;
    let s = phase * b.conj() / t;
    (c, s, phase * t)
}
