//! Run configuration: TOML on disk, fully resolved before a run.

use std::path::{Path, PathBuf};

use rankwave::quadrature::QuadConfig;
use rankwave::resolvent::Dimension;
use rankwave::spectral::{PerturbationModel, PotentialProfile};
use serde::{Deserialize, Serialize};

use crate::Failure;

fn one() -> f64 {
    1.0
}

fn one_u32() -> u32 {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub quad: QuadSpec,
    #[serde(default)]
    pub resolvent: ResolventSpec,
    #[serde(default)]
    pub scan: ScanSpec,
    #[serde(default)]
    pub fit: FitSpec,
    #[serde(default)]
    pub wave: WaveSpec,
    #[serde(default)]
    pub dichotomy: DichotomySpec,
    #[serde(default)]
    pub oracle: OracleSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    #[default]
    RankOne,
    FiniteRank,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default = "one_u32")]
    pub d: u32,
    #[serde(default)]
    pub variant: Variant,
    /// Coupling of the rank-one model.
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default)]
    pub profiles: Vec<ProfileSpec>,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec { d: 1, variant: Variant::RankOne, alpha: 1.0, profiles: Vec::new() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileSpec {
    Gaussian {
        #[serde(default = "one")]
        width: f64,
        #[serde(default)]
        shift: f64,
    },
    Boxcar {
        #[serde(default = "one")]
        half_width: f64,
        #[serde(default)]
        shift: f64,
    },
    MexicanHat {
        #[serde(default = "one")]
        width: f64,
        #[serde(default)]
        shift: f64,
    },
    Hermite {
        #[serde(default = "one")]
        width: f64,
        #[serde(default)]
        shift: f64,
    },
    Algebraic {
        delta: f64,
        #[serde(default)]
        shift: f64,
    },
    /// Two columns `x, φ(x)` (radius in d ≥ 2), comma separated, optional header.
    Sampled { path: PathBuf },
}

impl ProfileSpec {
    fn build(&self, d: Dimension, base: &Path) -> Result<PotentialProfile, Failure> {
        let (p, shift) = match self {
            ProfileSpec::Gaussian { width, shift } => (PotentialProfile::gaussian(d, *width)?, *shift),
            ProfileSpec::Boxcar { half_width, shift } => (PotentialProfile::boxcar(d, *half_width)?, *shift),
            ProfileSpec::MexicanHat { width, shift } => (PotentialProfile::mexican_hat(d, *width)?, *shift),
            ProfileSpec::Hermite { width, shift } => (PotentialProfile::hermite(d, *width)?, *shift),
            ProfileSpec::Algebraic { delta, shift } => (PotentialProfile::algebraic(d, *delta)?, *shift),
            ProfileSpec::Sampled { path } => {
                let (xs, ys) = read_two_columns(&base.join(path))?;
                (PotentialProfile::sampled(d, xs, ys)?, 0.0)
            }
        };
        if shift == 0.0 {
            Ok(p)
        } else {
            Ok(p.translated(shift)?)
        }
    }
}

fn read_two_columns(path: &Path) -> Result<(Vec<f64>, Vec<f64>), Failure> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::Usage(format!("sampled profile {}: {e}", path.display())))?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Failure::Usage(format!("sampled profile {}: {e}", path.display())))?;
        let parsed: Option<(f64, f64)> = match (rec.get(0), rec.get(1)) {
            (Some(a), Some(b)) => a.parse().ok().zip(b.parse().ok()),
            _ => None,
        };
        match parsed {
            Some((x, y)) => {
                xs.push(x);
                ys.push(y);
            }
            // a header line
            None if k == 0 => {}
            None => return Err(Failure::Usage(format!("{}: row {} is not two numbers", path.display(), k + 1))),
        }
    }
    Ok((xs, ys))
}

impl ModelSpec {
    pub fn dimension(&self) -> Result<Dimension, Failure> {
        Ok(Dimension::new(self.d)?)
    }

    pub fn build(&self, base: &Path) -> Result<PerturbationModel, Failure> {
        let d = self.dimension()?;
        if self.profiles.is_empty() {
            return Err(Failure::Usage("the model needs at least one [[model.profiles]] entry".into()));
        }
        let profiles = self.profiles.iter().map(|p| p.build(d, base)).collect::<Result<Vec<_>, _>>()?;
        match self.variant {
            Variant::RankOne => {
                if profiles.len() != 1 {
                    return Err(Failure::Usage(format!(
                        "a rank-one model takes one profile, got {}",
                        profiles.len()
                    )));
                }
                Ok(PerturbationModel::rank_one(self.alpha, profiles.into_iter().next().expect("one"))?)
            }
            Variant::FiniteRank => Ok(PerturbationModel::finite_rank(d, profiles)?),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        let q = QuadConfig::default();
        QuadSpec { abs_tol: q.abs_tol, rel_tol: q.rel_tol, max_panels: q.max_panels }
    }
}

impl QuadSpec {
    pub fn build(&self) -> Result<QuadConfig, Failure> {
        let q = QuadConfig { abs_tol: self.abs_tol, rel_tol: self.rel_tol, max_panels: self.max_panels, ..Default::default() };
        q.validate()?;
        Ok(q)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResolventSpec {
    pub sign: String,
    pub part: String,
    pub lambda: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

impl Default for ResolventSpec {
    fn default() -> Self {
        ResolventSpec { sign: "+".into(), part: "full".into(), lambda: 1.0, r_min: 0.1, r_max: 10.0, points: 100 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSpec {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub points: usize,
    pub c0: f64,
}

impl Default for ScanSpec {
    fn default() -> Self {
        ScanSpec { lambda_min: 1e-3, lambda_max: 20.0, points: 60, c0: 1e-3 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitSpec {
    pub sign: String,
    /// Top of the fit window; chosen automatically when absent.
    pub lambda0: Option<f64>,
    pub points: usize,
    pub decades: f64,
    /// Also extract the leading coefficient of `g₁₁` after ψ-normalization.
    pub g11: bool,
}

impl Default for FitSpec {
    fn default() -> Self {
        FitSpec { sign: "+".into(), lambda0: None, points: 12, decades: 2.0, g11: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PieceSpec {
    #[default]
    Full,
    Low,
    High,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveSpec {
    pub lambda0: f64,
    /// Half length of the line grid, or the radius of the radial grid.
    pub half_length: f64,
    pub points: usize,
    pub piece: PieceSpec,
    pub f: FieldSpec,
}

impl Default for WaveSpec {
    fn default() -> Self {
        WaveSpec { lambda0: 1.0, half_length: 40.0, points: 2048, piece: PieceSpec::Full, f: FieldSpec::default() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    /// `e^{ik(x−c)} e^{−(x−c)²/2w²}`; radial input takes `k = c = 0`.
    Packet {
        #[serde(default)]
        k0: f64,
        #[serde(default = "two")]
        width: f64,
        #[serde(default)]
        center: f64,
    },
    /// A sum of packets with centers, frequencies, widths and amplitudes drawn from the run seed.
    Random {
        #[serde(default = "three")]
        count: usize,
    },
}

fn two() -> f64 {
    2.0
}

fn three() -> usize {
    3
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec::Packet { k0: 2.5, width: 2.0, center: 0.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DichotomySpec {
    pub lambda0: f64,
    pub r_values: Vec<f64>,
    /// Also assemble `𝒲₋^l` and its adjoint on each `f_R`.
    pub with_low: bool,
}

impl Default for DichotomySpec {
    fn default() -> Self {
        DichotomySpec { lambda0: 1.0, r_values: vec![20.0, 200.0, 2000.0], with_low: false }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSpec {
    pub lambda0: f64,
    pub half_length: f64,
    pub points: usize,
    /// Number of seeded `z` samples for the Aronszajn–Krein residual.
    pub ak_samples: usize,
    pub f: FieldSpec,
}

impl Default for OracleSpec {
    fn default() -> Self {
        OracleSpec { lambda0: 1.0, half_length: 40.0, points: 2048, ak_samples: 10, f: FieldSpec::default() }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))
    }
}
