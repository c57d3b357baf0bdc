//! Global field containers: spinor fields, gauge fields with flux sectors,
//! and full configurations.
//!
//! The link field `a` is the non-compact fluctuation around the flux
//! background. Spinors carry unit charge under `a`: parallel transport along
//! the link `x -> x + mu` multiplies by `exp(i (h a(x, mu) + beta(x, mu)))`,
//! where `beta` is the background angle from [`build_flux_background`]. The
//! determinant line `det W+` then carries the connection `2a`.

mod gauge;
mod io;

pub use gauge::{
    apply_gauge, build_flux_background, plaquette_angles, FluxBackground, FluxMatrix,
    GaugeTransform,
};
pub use io::{load, save, FORMAT_VERSION};

use std::marker::PhantomData;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::clifford::{inner, norm_sqr, Spinor};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticeField, OneForm, ScalarField};
use crate::sum::{ksum, Neumaier};

/// Chirality marker for spinor fields.
pub trait Chirality: Clone + std::fmt::Debug + PartialEq {}

#[derive(Clone, Debug, PartialEq)]
pub struct Plus;
#[derive(Clone, Debug, PartialEq)]
pub struct Minus;
impl Chirality for Plus {}
impl Chirality for Minus {}

/// One two-component spinor per site.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorField<C: Chirality = Plus> {
    pub data: Vec<Spinor>,
    _chirality: PhantomData<C>,
}

/// Sections of `W+`.
pub type PlusField = SpinorField<Plus>;
/// Sections of `W-`, the target of the Dirac operator.
pub type MinusField = SpinorField<Minus>;

impl<C: Chirality> SpinorField<C> {
    pub fn new(data: Vec<Spinor>) -> Self {
        Self {
            data,
            _chirality: PhantomData,
        }
    }

    pub fn zeros(lat: &Lattice) -> Self {
        Self::new(vec![Spinor::zeros(); lat.sites()])
    }

    pub fn from_fn(lat: &Lattice, f: impl FnMut(usize) -> Spinor) -> Self {
        Self::new((0..lat.sites()).map(f).collect())
    }

    pub fn check(&self, lat: &Lattice) -> Result<()> {
        lat.check_len("spinor field", 1, self.data.len())
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|s| s.iter().all(|c| c.re.is_finite() && c.im.is_finite()))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.data.iter().map(|v| v * s).collect())
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        Self::new(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(u, v)| u + v * Complex64::new(s, 0.0))
                .collect(),
        )
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(u, v)| norm_sqr(&(u - v)).sqrt())
            .fold(0.0, f64::max)
    }

    /// Pointwise fiber norms `|phi(x)|`.
    pub fn magnitudes(&self) -> Vec<f64> {
        self.data.iter().map(|s| norm_sqr(s).sqrt()).collect()
    }
}

impl<C: Chirality> LatticeField for SpinorField<C> {
    fn check_on(&self, lat: &Lattice) -> Result<()> {
        self.check(lat)
    }

    #[inline]
    fn fiber_norm_sqr(&self, site: usize) -> f64 {
        norm_sqr(&self.data[site])
    }

    #[inline]
    fn fiber_inner_re(&self, other: &Self, site: usize) -> f64 {
        inner(&self.data[site], &other.data[site]).re
    }

    #[inline]
    fn fiber_dist_sqr(&self, x: usize, y: usize) -> f64 {
        norm_sqr(&(self.data[x] - self.data[y]))
    }
}

/// Complex `L^2` product `h^4 sum_x <u(x), v(x)>`.
pub fn spinor_inner<C: Chirality>(
    lat: &Lattice,
    u: &SpinorField<C>,
    v: &SpinorField<C>,
) -> Result<Complex64> {
    u.check(lat)?;
    v.check(lat)?;
    let mut re = Neumaier::new();
    let mut im = Neumaier::new();
    for (a, b) in u.data.iter().zip(&v.data) {
        let z = inner(a, b);
        re.add(z.re);
        im.add(z.im);
    }
    Ok(Complex64::new(re.value(), im.value()) * lat.cell_volume())
}

/// Link field plus flux sector.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeField {
    pub a: OneForm,
    pub flux: FluxMatrix,
}

impl GaugeField {
    pub fn trivial(lat: &Lattice) -> Self {
        Self {
            a: OneForm::zeros(lat),
            flux: FluxMatrix::zero(),
        }
    }
}

/// A point `(A, phi)` of configuration space together with the background
/// scalar curvature `s(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    pub lattice: Lattice,
    pub gauge: GaugeField,
    pub spinor: PlusField,
    pub scalar_curvature: ScalarField,
    pub seed: Option<u64>,
}

impl Configuration {
    /// `a = 0`, `phi = 0`, `s = 0`, flux 0.
    pub fn zero(lat: &Lattice) -> Self {
        Self {
            lattice: lat.clone(),
            gauge: GaugeField::trivial(lat),
            spinor: PlusField::zeros(lat),
            scalar_curvature: ScalarField::zeros(lat),
            seed: None,
        }
    }

    pub fn new(
        lattice: Lattice,
        gauge: GaugeField,
        spinor: PlusField,
        scalar_curvature: ScalarField,
    ) -> Result<Self> {
        let cfg = Self {
            lattice,
            gauge,
            spinor,
            scalar_curvature,
            seed: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let lat = &self.lattice;
        self.gauge.a.check(lat)?;
        self.spinor.check(lat)?;
        self.scalar_curvature.check(lat)?;
        self.gauge.flux.validate()?;
        if !self.gauge.a.is_finite() {
            return Err(Error::NonFinite("link field"));
        }
        if !self.spinor.is_finite() {
            return Err(Error::NonFinite("spinor field"));
        }
        if !self.scalar_curvature.is_finite() {
            return Err(Error::NonFinite("scalar curvature"));
        }
        Ok(())
    }

    pub fn with_scalar_curvature(mut self, s: ScalarField) -> Result<Self> {
        s.check(&self.lattice)?;
        self.scalar_curvature = s;
        Ok(self)
    }

    pub fn with_flux(mut self, flux: FluxMatrix) -> Result<Self> {
        flux.validate()?;
        self.gauge.flux = flux;
        Ok(self)
    }

    pub fn same_lattice(&self, other: &Self) -> Result<()> {
        if self.lattice != other.lattice {
            return Err(Error::LatticeMismatch);
        }
        Ok(())
    }

    /// `||phi||_inf`
    pub fn phi_linf(&self) -> f64 {
        self.spinor
            .data
            .iter()
            .map(norm_sqr)
            .fold(0.0, f64::max)
            .sqrt()
    }
}

/// Scales for [`random_configuration`].
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Amplitudes {
    /// Link values are uniform in `[-a, a]`.
    pub a: f64,
    /// Spinor components are complex Gaussians with standard deviation `phi`.
    pub phi: f64,
}

/// Random link and spinor fields on the trivial flux sector with `s = 0`.
/// Deterministic in `seed`.
pub fn random_configuration(lat: &Lattice, seed: u64, amp: Amplitudes) -> Result<Configuration> {
    if !(amp.a >= 0.0 && amp.phi >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "amplitudes must be nonnegative, got {amp:?}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = OneForm::from_fn(lat, |_, _| {
        if amp.a > 0.0 {
            amp.a * rng.random_range(-1.0..=1.0)
        } else {
            0.0
        }
    });
    let mut gauss = || -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        amp.phi * z
    };
    let spinor = PlusField::from_fn(lat, |_| {
        Spinor::new(
            Complex64::new(gauss(), gauss()),
            Complex64::new(gauss(), gauss()),
        )
    });
    let mut cfg = Configuration::zero(lat);
    cfg.gauge.a = a;
    cfg.spinor = spinor;
    cfg.seed = Some(seed);
    Ok(cfg)
}

/// Samples of a smooth continuum configuration built from the lowest
/// single-axis Fourier modes of the torus `[0, L_0) x ... x [0, L_3)`, flux 0, `s = 0`.
///
/// The continuum fields depend on `seed` and the physical lengths only, so two
/// lattices covering the same torus at different spacings sample the same
/// pair `(a, phi)`. Used for refinement studies.
pub fn smooth_configuration(lat: &Lattice, seed: u64, amp: Amplitudes) -> Result<Configuration> {
    if !(amp.a >= 0.0 && amp.phi >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "amplitudes must be nonnegative, got {amp:?}"
        )));
    }
    const MODES: usize = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // 4 link components followed by 4 real spinor components
    let terms: Vec<[([f64; 4], f64, f64); MODES]> = (0..8)
        .map(|_| {
            std::array::from_fn(|_| {
                // a single-axis wavevector of magnitude 0 or 1
                let axis = rng.random_range(0..4);
                let m = rng.random_range(0i32..=1) as f64;
                let k: [f64; 4] = std::array::from_fn(|mu| if mu == axis { m } else { 0.0 });
                (k, rng.random_range(-1.0..=1.0), rng.random_range(0.0..std::f64::consts::TAU))
            })
        })
        .collect();
    let lengths: [f64; 4] = std::array::from_fn(|mu| lat.length(mu));
    let eval = |c: usize, pos: [f64; 4]| -> f64 {
        terms[c]
            .iter()
            .map(|(k, coef, phase)| {
                let arg: f64 = (0..4)
                    .map(|mu| std::f64::consts::TAU * k[mu] * pos[mu] / lengths[mu])
                    .sum();
                coef * (arg + phase).cos()
            })
            .sum()
    };
    let mut cfg = Configuration::zero(lat);
    cfg.gauge.a = OneForm::from_fn(lat, |x, mu| amp.a * eval(mu, lat.position(x)));
    cfg.spinor = PlusField::from_fn(lat, |x| {
        let pos = lat.position(x);
        Spinor::new(
            Complex64::new(eval(4, pos), eval(5, pos)),
            Complex64::new(eval(6, pos), eval(7, pos)),
        ) * Complex64::new(amp.phi, 0.0)
    });
    cfg.seed = Some(seed);
    Ok(cfg)
}

/// Spinor `L^2` norm squared, `h^4 sum |phi|^2`.
pub(crate) fn spinor_norm_sqr<C: Chirality>(lat: &Lattice, u: &SpinorField<C>) -> f64 {
    lat.cell_volume() * ksum(u.data.iter().map(norm_sqr))
}
