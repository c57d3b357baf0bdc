//! Gauge transformations, winding sectors and flux backgrounds.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Configuration;
use crate::error::{Error, Result};
use crate::lattice::{Lattice, OneForm, ScalarField, TwoForm, PLANES};

/// Antisymmetric integer matrix `n_{mu nu}`: the flux through the
/// `(mu, nu)` coordinate 2-torus is `2 pi n_{mu nu}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FluxMatrix(pub [[i64; 4]; 4]);

impl FluxMatrix {
    pub fn zero() -> Self {
        Self([[0; 4]; 4])
    }

    /// Flux `n` through the plane `mu < nu` and nothing else.
    pub fn single(mu: usize, nu: usize, n: i64) -> Self {
        let mut m = [[0; 4]; 4];
        m[mu][nu] = n;
        m[nu][mu] = -n;
        Self(m)
    }

    pub fn validate(&self) -> Result<()> {
        for mu in 0..4 {
            for nu in 0..4 {
                if self.0[mu][nu] != -self.0[nu][mu] {
                    return Err(Error::InvalidFlux(format!(
                        "n[{mu}][{nu}] = {} but n[{nu}][{mu}] = {}",
                        self.0[mu][nu], self.0[nu][mu]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Parse from real entries, rejecting anything that is not an integer.
    pub fn from_reals(m: &[[f64; 4]; 4]) -> Result<Self> {
        let mut out = [[0; 4]; 4];
        for mu in 0..4 {
            for nu in 0..4 {
                let v = m[mu][nu];
                if v.fract() != 0.0 || !v.is_finite() {
                    return Err(Error::InvalidFlux(format!("entry {v} is not an integer")));
                }
                out[mu][nu] = v as i64;
            }
        }
        let f = Self(out);
        f.validate()?;
        Ok(f)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(|&n| n == 0)
    }
}

/// Twisted boundary phases realizing a flux sector.
#[derive(Clone, Debug, PartialEq)]
pub struct FluxBackground {
    /// Transport angle `beta(x, mu)` on each link, dimensionless.
    pub link_angles: OneForm,
    /// Uniform curvature `2 pi n / (N_mu N_nu h^2)` per plane.
    pub curvature: [f64; 6],
}

/// Link angles whose plaquette holonomy is uniform in every plane and
/// integrates to `2 pi n_{mu nu}` over each `(mu, nu)` slice.
///
/// In plane `(mu, nu)` with per-plaquette angle `q = 2 pi n / (N_mu N_nu)`:
/// `beta(x, nu) += q x_mu`, and on the last `mu`-slice
/// `beta(x, mu) -= q N_mu x_nu`. The plaquette at the corner of the slice then
/// carries `q - 2 pi n`, which is the same holonomy.
pub fn build_flux_background(lat: &Lattice, flux: &FluxMatrix) -> Result<FluxBackground> {
    flux.validate()?;
    let dims = lat.dims();
    let h = lat.spacing();
    let mut link_angles = OneForm::zeros(lat);
    let mut curvature = [0.0; 6];
    for (p, &(mu, nu)) in PLANES.iter().enumerate() {
        let n = flux.0[mu][nu];
        if n == 0 {
            continue;
        }
        let q = TAU * n as f64 / (dims[mu] * dims[nu]) as f64;
        curvature[p] = q / (h * h);
        for x in 0..lat.sites() {
            let c = lat.coords(x);
            *link_angles.at_mut(x, nu) += q * c[mu] as f64;
            if c[mu] + 1 == dims[mu] {
                *link_angles.at_mut(x, mu) -= q * (dims[mu] * c[nu]) as f64;
            }
        }
    }
    Ok(FluxBackground {
        link_angles,
        curvature,
    })
}

/// Plaquette holonomy angles of a link-angle field, reduced to `(-pi, pi]`.
pub fn plaquette_angles(lat: &Lattice, link_angles: &OneForm) -> Result<TwoForm> {
    link_angles.check(lat)?;
    let mut out = TwoForm::zeros(lat);
    for x in 0..lat.sites() {
        for (p, &(mu, nu)) in PLANES.iter().enumerate() {
            let raw = link_angles.at(lat.forward(x, mu), nu) - link_angles.at(x, nu)
                - link_angles.at(lat.forward(x, nu), mu)
                + link_angles.at(x, mu);
            *out.at_mut(x, p) = wrap_angle(raw);
        }
    }
    Ok(out)
}

fn wrap_angle(t: f64) -> f64 {
    let r = t - TAU * (t / TAU).round();
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

/// `g(x) = exp(i (zeta(x) + 2 pi sum_mu k_mu x_mu / N_mu))`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeTransform {
    pub zeta: ScalarField,
    pub winding: [i64; 4],
}

impl GaugeTransform {
    pub fn identity(lat: &Lattice) -> Self {
        Self {
            zeta: ScalarField::zeros(lat),
            winding: [0; 4],
        }
    }

    pub fn winding(lat: &Lattice, winding: [i64; 4]) -> Self {
        Self {
            zeta: ScalarField::zeros(lat),
            winding,
        }
    }

    /// Pointwise product `g1 g2`; the order is irrelevant for U(1).
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            zeta: self.zeta.axpy(1.0, &other.zeta),
            winding: std::array::from_fn(|mu| self.winding[mu] + other.winding[mu]),
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            zeta: self.zeta.scale(-1.0),
            winding: self.winding.map(|k| -k),
        }
    }

    /// `theta(x)` with the winding evaluated on the fundamental cell.
    pub fn phase(&self, lat: &Lattice, site: usize) -> f64 {
        let c = lat.coords(site);
        let dims = lat.dims();
        let wind: f64 = (0..4)
            .map(|mu| TAU * self.winding[mu] as f64 * c[mu] as f64 / dims[mu] as f64)
            .sum();
        self.zeta.0[site] + wind
    }

    /// `g^{-1} dg / i` on the link `(x, mu)`. The winding contributes the
    /// constant `2 pi k_mu / (N_mu h)`, including across the periodic seam.
    pub fn link_increment(&self, lat: &Lattice, site: usize, mu: usize) -> f64 {
        let h = lat.spacing();
        (self.zeta.0[lat.forward(site, mu)] - self.zeta.0[site]) / h
            + TAU * self.winding[mu] as f64 / (lat.dims()[mu] as f64 * h)
    }
}

/// `(a, phi) -> (a + dtheta, exp(-i theta) phi)`. The flux sector and `s`
/// are untouched.
pub fn apply_gauge(g: &GaugeTransform, cfg: &Configuration) -> Result<Configuration> {
    let lat = &cfg.lattice;
    g.zeta.check(lat)?;
    let mut out = cfg.clone();
    for x in 0..lat.sites() {
        for mu in 0..4 {
            *out.gauge.a.at_mut(x, mu) += g.link_increment(lat, x, mu);
        }
        let rot = Complex64::from_polar(1.0, -g.phase(lat, x));
        out.spinor.data[x] *= rot;
    }
    Ok(out)
}
