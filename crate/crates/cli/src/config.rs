//! Experiment configuration files.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use swflow_core::fields::{self, random_configuration, Amplitudes, Configuration, FluxMatrix};
use swflow_core::lattice::{Lattice, ScalarField};
use swflow_core::optimize::MinimizeParams;

fn default_amplitudes() -> Amplitudes {
    Amplitudes { a: 0.1, phi: 0.5 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dims: [usize; 4],
    pub spacing: f64,
    #[serde(default)]
    pub flux: [[i64; 4]; 4],
    /// `constant:<v>` or `bump:<v>,<radius>`. When absent, `s` comes from
    /// `initial_configuration` if one is given and is zero otherwise.
    #[serde(default)]
    pub scalar_curvature: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_amplitudes")]
    pub amplitudes: Amplitudes,
    /// Rescale the initial spinor so that its sup norm equals this value.
    #[serde(default)]
    pub initial_phi_linf: Option<f64>,
    /// Start from a saved configuration instead of random fields. Relative
    /// paths are resolved against the directory of the experiment file.
    #[serde(default)]
    pub initial_configuration: Option<PathBuf>,
    #[serde(default)]
    pub minimize: MinimizeParams,
    /// Relative paths are resolved against the directory of the experiment file.
    pub output_dir: PathBuf,
}

/// A parsed scalar-curvature profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CurvatureProfile {
    Constant(f64),
    /// Value at the torus center, support radius.
    Bump(f64, f64),
}

impl CurvatureProfile {
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, args) = text
            .split_once(':')
            .with_context(|| format!("scalar curvature `{text}` must look like `constant:<v>` or `bump:<v>,<r>`"))?;
        let num = |s: &str| -> Result<f64> {
            let v: f64 = s.trim().parse().with_context(|| format!("`{s}` is not a number"))?;
            ensure!(v.is_finite(), "`{s}` is not finite");
            Ok(v)
        };
        match kind.trim() {
            "constant" => Ok(Self::Constant(num(args)?)),
            "bump" => {
                let (v, r) = args
                    .split_once(',')
                    .with_context(|| format!("bump profile needs `<v>,<radius>`, got `{args}`"))?;
                let r = num(r)?;
                ensure!(r > 0.0, "bump radius must be positive, got {r}");
                Ok(Self::Bump(num(v)?, r))
            }
            other => bail!("unknown scalar curvature profile `{other}`"),
        }
    }

    /// Sample on the lattice. The bump is `v exp(1 - 1/(1 - rho^2))` for
    /// `rho < 1`, with `rho` the periodic distance to the torus center over
    /// the radius, and zero outside.
    pub fn sample(&self, lat: &Lattice) -> ScalarField {
        match *self {
            Self::Constant(v) => ScalarField::constant(lat, v),
            Self::Bump(v, r) => ScalarField::from_fn(lat, |x, _| {
                let pos = lat.position(x);
                let d2: f64 = (0..4)
                    .map(|mu| {
                        let l = lat.length(mu);
                        let d = (pos[mu] - 0.5 * l).abs();
                        d.min(l - d).powi(2)
                    })
                    .sum();
                let rho2 = d2 / (r * r);
                if rho2 < 1.0 {
                    v * (1.0 - 1.0 / (1.0 - rho2)).exp()
                } else {
                    0.0
                }
            }),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read experiment config {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text)
            .with_context(|| format!("malformed experiment config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        Lattice::new(self.dims, self.spacing)?;
        FluxMatrix(self.flux).validate()?;
        if let Some(s) = &self.scalar_curvature {
            CurvatureProfile::parse(s)?;
        }
        if let Some(m) = self.initial_phi_linf {
            ensure!(m.is_finite() && m >= 0.0, "initial_phi_linf must be nonnegative, got {m}");
        }
        self.minimize.validate()?;
        Ok(())
    }

    fn resolve(base: &Path, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    }

    /// Output directory with relative paths resolved against `base`.
    pub fn output_dir_from(&self, base: &Path) -> PathBuf {
        Self::resolve(base, &self.output_dir)
    }

    /// The starting configuration of the run.
    pub fn initial(&self, base: &Path) -> Result<Configuration> {
        let lat = Lattice::new(self.dims, self.spacing)?;
        let flux = FluxMatrix(self.flux);
        let mut cfg = match &self.initial_configuration {
            Some(p) => {
                let path = Self::resolve(base, p);
                let cfg = fields::load(&path)
                    .with_context(|| format!("cannot load initial configuration {}", path.display()))?;
                ensure!(
                    cfg.lattice == lat,
                    "initial configuration lattice {:?} / {} differs from dims {:?} / spacing {}",
                    cfg.lattice.dims(),
                    cfg.lattice.spacing(),
                    self.dims,
                    self.spacing
                );
                ensure!(cfg.gauge.flux == flux, "initial configuration has a different flux matrix");
                cfg
            }
            None => random_configuration(&lat, self.seed, self.amplitudes)?.with_flux(flux)?,
        };
        if let Some(s) = &self.scalar_curvature {
            cfg.scalar_curvature = CurvatureProfile::parse(s)?.sample(&lat);
        }
        if let Some(target) = self.initial_phi_linf {
            let m = cfg.phi_linf();
            ensure!(m > 0.0 || target == 0.0, "cannot rescale a zero spinor to sup norm {target}");
            let k = if m > 0.0 { target / m } else { 0.0 };
            cfg.spinor = cfg.spinor.scale(k.into());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
