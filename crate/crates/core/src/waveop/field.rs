//! Sampled functions on uniform grids and their Lᵖ / weak-L¹ sizes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::resolvent::{sphere_area, Dimension};

/// Uniform point sets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Grid {
    /// `x_k = start + k·spacing` on the line.
    Line { start: f64, spacing: f64, len: usize },
    /// `n × n` points `(start + i·spacing, start + j·spacing)`, row-major.
    Plane { start: f64, spacing: f64, n: usize },
    /// Radii `(k + ½)·spacing` of a radial function on ℝ^d.
    Radial { spacing: f64, len: usize },
}

impl Grid {
    pub fn line(start: f64, spacing: f64, len: usize) -> Self {
        Grid::Line { start, spacing, len }
    }

    /// Symmetric line grid `[−half, half]` with `len` points.
    pub fn symmetric(half: f64, len: usize) -> Self {
        Grid::Line { start: -half, spacing: 2.0 * half / (len - 1) as f64, len }
    }

    pub fn radial(spacing: f64, len: usize) -> Self {
        Grid::Radial { spacing, len }
    }

    pub fn len(&self) -> usize {
        match *self {
            Grid::Line { len, .. } | Grid::Radial { len, .. } => len,
            Grid::Plane { n, .. } => n * n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> f64 {
        match *self {
            Grid::Line { spacing, .. } | Grid::Plane { spacing, .. } | Grid::Radial { spacing, .. } => spacing,
        }
    }

    /// Coordinates (line) or radii (radial).
    pub fn coordinates(&self) -> Result<Vec<f64>> {
        match *self {
            Grid::Line { start, spacing, len } => Ok((0..len).map(|k| start + k as f64 * spacing).collect()),
            Grid::Radial { spacing, len } => Ok((0..len).map(|k| (k as f64 + 0.5) * spacing).collect()),
            Grid::Plane { .. } => Err(Error::Unsupported("planar grid has no single coordinate list".into())),
        }
    }

    /// Points as coordinate vectors (radial grids give `[r]`).
    pub fn points(&self) -> Vec<Vec<f64>> {
        match *self {
            Grid::Plane { start, spacing, n } => (0..n)
                .flat_map(|i| (0..n).map(move |j| vec![start + i as f64 * spacing, start + j as f64 * spacing]))
                .collect(),
            _ => self.coordinates().expect("line or radial").into_iter().map(|x| vec![x]).collect(),
        }
    }

    /// Quadrature weight of each point in `ℝ^d`.
    pub fn cell_measures(&self, d: u32) -> Vec<f64> {
        match *self {
            Grid::Line { spacing, len, .. } => vec![spacing; len],
            Grid::Plane { spacing, n, .. } => vec![spacing * spacing; n * n],
            Grid::Radial { spacing, len } => {
                let area = sphere_area(d);
                (0..len).map(|k| area * ((k as f64 + 0.5) * spacing).powi(d as i32 - 1) * spacing).collect()
            }
        }
    }

    /// Largest distance of a grid point from the origin.
    pub fn reach(&self) -> f64 {
        match *self {
            Grid::Line { start, spacing, len } => start.abs().max((start + (len - 1) as f64 * spacing).abs()),
            Grid::Plane { start, spacing, n } => {
                let e = start.abs().max((start + (n - 1) as f64 * spacing).abs());
                e * std::f64::consts::SQRT_2
            }
            Grid::Radial { spacing, len } => (len as f64 - 0.5) * spacing,
        }
    }

    /// Points in the outer tenth of the grid.
    fn outer_band(&self) -> Vec<bool> {
        match *self {
            Grid::Line { len, .. } => (0..len).map(|k| k < len / 20 || k >= len - len / 20).collect(),
            Grid::Plane { n, .. } => {
                let edge = |i: usize| i < n / 20 || i >= n - n / 20;
                (0..n).flat_map(|i| (0..n).map(move |j| edge(i) || edge(j))).collect()
            }
            Grid::Radial { len, .. } => (0..len).map(|k| k >= len - len / 10).collect(),
        }
    }

    fn check(&self, d: u32) -> Result<()> {
        let h = self.spacing();
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Invalid(format!("grid spacing must be positive, got {h}")));
        }
        if self.is_empty() {
            return Err(Error::Invalid("empty grid".into()));
        }
        match self {
            Grid::Line { start, .. } if d == 1 && start.is_finite() => Ok(()),
            Grid::Plane { start, .. } if d == 2 && start.is_finite() => Ok(()),
            Grid::Radial { .. } if d >= 2 => Ok(()),
            _ => Err(Error::Invalid(format!("{self:?} does not describe a function on ℝ^{d}"))),
        }
    }
}

/// Complex samples of a function on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledField {
    pub dimension: Dimension,
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(dimension: Dimension, grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        grid.check(dimension.get())?;
        if values.len() != grid.len() {
            return Err(Error::Invalid(format!("{} values for a grid of {} points", values.len(), grid.len())));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Invalid("non-finite sample".into()));
        }
        Ok(SampledField { dimension, grid, values })
    }

    /// Samples `f` at the grid points (radial grids pass `[r]`).
    pub fn from_fn<F: Fn(&[f64]) -> Complex64>(dimension: Dimension, grid: Grid, f: F) -> Result<Self> {
        grid.check(dimension.get())?;
        let values = grid.points().iter().map(|x| f(x)).collect();
        Self::new(dimension, grid, values)
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<Complex64>) -> Result<Self> {
        Self::new(self.dimension, self.grid, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cell_measures(&self) -> Vec<f64> {
        self.grid.cell_measures(self.dimension.get())
    }

    /// Riemann-sum `‖·‖_p` (`p = ∞` allowed).
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_infinite() && p > 0.0 {
            return Ok(self.values.iter().fold(0.0, |a, v| a.max(v.norm())));
        }
        if !(p >= 1.0) {
            return Err(Error::Invalid(format!("p must lie in [1, ∞], got {p}")));
        }
        let s: f64 = self.values.iter().zip(self.cell_measures()).map(|(v, w)| w * v.norm().powf(p)).sum();
        Ok(s.powf(1.0 / p))
    }

    /// `sup_t t·|{|g| > t}|` from the exact distribution function of the samples.
    pub fn weak_l1(&self) -> f64 {
        let mut pairs: Vec<(f64, f64)> =
            self.values.iter().map(|v| v.norm()).zip(self.cell_measures()).filter(|(a, _)| *a > 0.0).collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut best: f64 = 0.0;
        let mut mass = 0.0;
        let mut i = 0;
        while i < pairs.len() {
            let level = pairs[i].0;
            while i < pairs.len() && pairs[i].0 == level {
                mass += pairs[i].1;
                i += 1;
            }
            // t ↑ level: {|g| > t} holds every sample at or above the level
            best = best.max(level * mass);
        }
        best
    }

    /// Share of the L¹ mass in the outer tenth of the grid.
    pub fn tail_fraction(&self) -> f64 {
        let w = self.cell_measures();
        let band = self.grid.outer_band();
        let total: f64 = self.values.iter().zip(&w).map(|(v, w)| v.norm() * w).sum();
        if total == 0.0 {
            return 0.0;
        }
        let outer: f64 =
            self.values.iter().zip(&w).zip(&band).filter(|(_, b)| **b).map(|((v, w), _)| v.norm() * w).sum();
        outer / total
    }
}

/// Sizes of one sampled function.
#[derive(Clone, Debug, PartialEq)]
pub struct Norms {
    /// `(p, ‖g‖_p)`.
    pub lp: Vec<(f64, f64)>,
    pub sup: f64,
    pub weak_l1: f64,
    pub tail_fraction: f64,
    /// Set when more than 1% of the L¹ mass sits in the outer tenth of the grid.
    pub tail_warning: bool,
}

pub fn lp_norms(g: &SampledField, ps: &[f64]) -> Result<Norms> {
    let lp = ps.iter().map(|&p| Ok((p, g.lp_norm(p)?))).collect::<Result<Vec<_>>>()?;
    let tail_fraction = g.tail_fraction();
    Ok(Norms {
        lp,
        sup: g.lp_norm(f64::INFINITY)?,
        weak_l1: g.weak_l1(),
        tail_fraction,
        tail_warning: tail_fraction > 0.01,
    })
}

/// Operator size on one input: `‖Tf‖_p/‖f‖_p` and `‖Tf‖_{1,∞}/‖f‖₁`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormReport {
    pub p: f64,
    pub ratio: f64,
    pub weak_l1: f64,
    pub family_parameter: f64,
}

impl NormReport {
    pub fn measure(output: &SampledField, input: &SampledField, p: f64, family_parameter: f64) -> Result<Self> {
        let n_in = input.lp_norm(p)?;
        let l1 = input.lp_norm(1.0)?;
        if !(n_in > 0.0 && l1 > 0.0) {
            return Err(Error::Invalid("input has zero norm".into()));
        }
        Ok(NormReport {
            p,
            ratio: output.lp_norm(p)? / n_in,
            weak_l1: output.weak_l1() / l1,
            family_parameter,
        })
    }
}
