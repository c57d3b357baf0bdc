//! The Seiberg-Witten energy, its gradient, and residual diagnostics.
//!
//! Two independently assembled evaluators:
//!
//! * [`energy_weitzenbock`]: `h^4 sum [ |nabla_A phi|^2 + 4 |P+ F|^2 + (s/4) |phi|^2 + |phi|^4 / 8 ]`
//!   with `F` at plaquette resolution.
//! * [`energy_first_order`]: `h^4 sum [ |D_A phi|^2 + |2 F+ - sigma(phi)|^2 ]` with `F+`
//!   averaged to sites.
//!
//! The factor 2 on `F` is the curvature of the determinant line `det W+`,
//! which carries twice the spinor connection. Only with that factor do the
//! two forms agree in the continuum limit.
//!
//! Gradients use the real pairing `<da, da'> + 2 Re <dphi, dphi'>`, both
//! `L^2` with weight `h^4`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::clifford::{inner, norm_sqr, quadratic_form, standard_table, CliffordTable, Spinor};
use crate::error::{Error, Result};
use crate::fields::{spinor_inner, spinor_norm_sqr, Configuration, PlusField};
use crate::lattice::{
    codiff2, forms::selfdual_fiber, l2_inner, sobolev12_norm, Lattice, OneForm, TwoForm,
};
use crate::operators::{curvature, fplus_at_sites, Connection};
use crate::sum::Neumaier;

/// Cotangent vector at a configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    pub da: OneForm,
    pub dphi: PlusField,
}

impl Gradient {
    pub fn zeros(lat: &Lattice) -> Self {
        Self {
            da: OneForm::zeros(lat),
            dphi: PlusField::zeros(lat),
        }
    }

    /// `sqrt(||da||^2 + ||dphi||^2)`
    pub fn norm(&self, lat: &Lattice) -> f64 {
        let da = lat.cell_volume() * crate::sum::ksum(self.da.0.iter().map(|v| v * v));
        (da + spinor_norm_sqr(lat, &self.dphi)).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.da.is_finite() && self.dphi.is_finite()
    }
}

/// `<da, delta_a> + 2 Re <dphi, delta_phi>`
pub fn pairing(lat: &Lattice, g: &Gradient, delta_a: &OneForm, delta_phi: &PlusField) -> Result<f64> {
    let a = l2_inner(lat, &g.da, delta_a)?;
    let p = spinor_inner(lat, &g.dphi, delta_phi)?;
    Ok(a + 2.0 * p.re)
}

/// The four terms of [`energy_weitzenbock`].
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize)]
pub struct EnergyTerms {
    /// `||nabla_A phi||^2`
    pub kinetic: f64,
    /// `4 ||P+ F||^2`
    pub curvature: f64,
    /// `int (s/4) |phi|^2`
    pub potential: f64,
    /// `int |phi|^4 / 8`
    pub quartic: f64,
}

impl EnergyTerms {
    pub fn total(&self) -> f64 {
        let mut acc = Neumaier::new();
        for v in [self.kinetic, self.curvature, self.potential, self.quartic] {
            acc.add(v);
        }
        acc.value()
    }
}

fn plaquette_selfdual_sqr(f: &TwoForm) -> f64 {
    let mut acc = Neumaier::new();
    for fiber in f.0.chunks_exact(6) {
        let p = selfdual_fiber(fiber);
        acc.add(p.iter().map(|v| v * v).sum());
    }
    acc.value()
}

pub fn energy_terms(cfg: &Configuration) -> Result<EnergyTerms> {
    let conn = Connection::new(cfg)?;
    energy_terms_with(&conn, cfg)
}

fn energy_terms_with(conn: &Connection, cfg: &Configuration) -> Result<EnergyTerms> {
    let lat = &cfg.lattice;
    let w = lat.cell_volume();
    let nabla = conn.nabla(&cfg.spinor)?;
    let kinetic: f64 = nabla.0.iter().map(norm_sqr).collect::<Neumaier>().value();
    let curv = 4.0 * plaquette_selfdual_sqr(&curvature(cfg)?);
    let mut pot = Neumaier::new();
    let mut quart = Neumaier::new();
    for (phi, s) in cfg.spinor.data.iter().zip(&cfg.scalar_curvature.0) {
        let t = norm_sqr(phi);
        pot.add(0.25 * s * t);
        quart.add(0.125 * t * t);
    }
    Ok(EnergyTerms {
        kinetic: w * kinetic,
        curvature: w * curv,
        potential: w * pot.value(),
        quartic: w * quart.value(),
    })
}

/// `int ( |nabla_A phi|^2 + |F+_L|^2 + (s/4)|phi|^2 + |phi|^4/8 )` with plaquette curvature.
pub fn energy_weitzenbock(cfg: &Configuration) -> Result<f64> {
    Ok(energy_terms(cfg)?.total())
}

/// `(||D_A phi||^2, ||2 F+ - sigma(phi)||^2)` with the site-averaged `F+`.
pub fn sw_equation_residual(cfg: &Configuration) -> Result<(f64, f64)> {
    sw_equation_residual_with(&standard_table(), cfg)
}

pub fn sw_equation_residual_with(tbl: &CliffordTable, cfg: &Configuration) -> Result<(f64, f64)> {
    let lat = &cfg.lattice;
    let conn = Connection::new(cfg)?;
    let d = conn.dirac(tbl, &cfg.spinor)?;
    let dirac_sqr = spinor_norm_sqr(lat, &d);
    let fp = fplus_at_sites(cfg)?;
    let mut acc = Neumaier::new();
    for (fiber, phi) in fp.0.chunks_exact(6).zip(&cfg.spinor.data) {
        let sigma = quadratic_form(tbl, phi);
        acc.add((0..6).map(|p| (2.0 * fiber[p] - sigma[p]).powi(2)).sum());
    }
    Ok((dirac_sqr, lat.cell_volume() * acc.value()))
}

/// `int ( |D_A phi|^2 + |F+_L - sigma(phi)|^2 )`, nonnegative.
pub fn energy_first_order(cfg: &Configuration) -> Result<f64> {
    energy_first_order_with(&standard_table(), cfg)
}

pub fn energy_first_order_with(tbl: &CliffordTable, cfg: &Configuration) -> Result<f64> {
    let (a, b) = sw_equation_residual_with(tbl, cfg)?;
    Ok(a + b)
}

/// `-(h^4/8) sum_x min(s(x), 0)^2`: no configuration has lower energy,
/// since `(s/4) t + t^2/8 >= -s^2/8` for `t >= 0`.
pub fn energy_lower_bound(cfg: &Configuration) -> f64 {
    let neg: Neumaier = cfg
        .scalar_curvature
        .0
        .iter()
        .map(|&s| s.min(0.0).powi(2))
        .collect();
    -cfg.lattice.cell_volume() * neg.value() / 8.0
}

/// Exact gradient of [`energy_weitzenbock`]:
///
/// `dphi = -Delta_A phi + (s/4) phi + (1/4)|phi|^2 phi`,
/// `da(x, mu) = 2 Im <nabla_mu phi(x), phi(x)> + 8 codiff2(P+ F)(x, mu)`.
pub fn gradient(cfg: &Configuration) -> Result<Gradient> {
    Ok(energy_and_gradient(cfg)?.1)
}

/// Energy and gradient from a single set of transporters.
pub fn energy_and_gradient(cfg: &Configuration) -> Result<(f64, Gradient)> {
    let conn = Connection::new(cfg)?;
    let lat = &cfg.lattice;
    let energy = energy_terms_with(&conn, cfg)?.total();
    let phi = &cfg.spinor;
    let lap = conn.laplacian(phi)?;
    let dphi = PlusField::from_fn(lat, |x| {
        let v = phi.data[x];
        let c = 0.25 * cfg.scalar_curvature.0[x] + 0.25 * norm_sqr(&v);
        v * Complex64::new(c, 0.0) - lap.data[x]
    });
    let fplus = crate::lattice::selfdual_project(&curvature(cfg)?);
    let mut da = codiff2(lat, &fplus)?.scale(8.0);
    let nabla = conn.nabla(phi)?;
    for x in 0..lat.sites() {
        for mu in 0..4 {
            *da.at_mut(x, mu) += 2.0 * inner(nabla.at(x, mu), &phi.data[x]).im;
        }
    }
    Ok((energy, Gradient { da, dphi }))
}

/// Largest relative discrepancy between [`pairing`] and a central difference
/// of [`energy_weitzenbock`] along `n_directions` random directions.
///
/// Directions have independent standard normal entries in every real
/// coordinate of `(a, phi)`. For each direction the error is
/// `|fd - exact| / max(|fd|, |exact|)`. Directional derivatives below
/// `step * (1 + |E|)` cannot be resolved by the difference quotient and
/// count as zero error.
pub fn fd_gradient_check(cfg: &Configuration, step: f64, n_directions: usize, seed: u64) -> Result<f64> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {step}")));
    }
    let lat = &cfg.lattice;
    let (energy, grad) = energy_and_gradient(cfg)?;
    let floor = step * (1.0 + energy.abs());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n_directions {
        let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
        let delta_a = OneForm::from_fn(lat, |_, _| normal());
        let delta_phi = PlusField::from_fn(lat, |_| {
            Spinor::new(Complex64::new(normal(), normal()), Complex64::new(normal(), normal()))
        });
        let shifted = |t: f64| -> Result<f64> {
            let mut c = cfg.clone();
            c.gauge.a = c.gauge.a.axpy(t, &delta_a);
            c.spinor = c.spinor.axpy(t, &delta_phi);
            energy_weitzenbock(&c)
        };
        let fd = (shifted(step)? - shifted(-step)?) / (2.0 * step);
        let exact = pairing(lat, &grad, &delta_a, &delta_phi)?;
        let scale = fd.abs().max(exact.abs());
        if scale > floor {
            worst = worst.max((fd - exact).abs() / scale);
        }
    }
    Ok(worst)
}

/// Truncation diagnostics for the maximum-principle argument.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ExcessReport {
    /// `max(-min s, 0)`
    pub threshold: f64,
    /// Volume of `Omega = { |phi| > threshold }`.
    pub excess_measure: f64,
    /// `int_Omega sum_mu (Re <nabla_mu phi, nu>)^2` with `nu = phi / |phi|`.
    pub radial_excess: f64,
    /// `||eta||_{1,2}` for `eta = (|phi| - threshold) nu` on `Omega`, zero elsewhere.
    pub eta_norm: f64,
}

pub fn excess_report(cfg: &Configuration) -> Result<ExcessReport> {
    let lat = &cfg.lattice;
    let conn = Connection::new(cfg)?;
    let threshold = (-cfg.scalar_curvature.min()).max(0.0);
    let nabla = conn.nabla(&cfg.spinor)?;
    let mut count = 0usize;
    let mut radial = Neumaier::new();
    let mut eta = PlusField::zeros(lat);
    for (x, phi) in cfg.spinor.data.iter().enumerate() {
        let r = norm_sqr(phi).sqrt();
        // sites with |phi| this small have no meaningful direction nu
        if r <= threshold || r < 1e-12 * threshold || r == 0.0 {
            continue;
        }
        count += 1;
        let nu = phi / Complex64::new(r, 0.0);
        for mu in 0..4 {
            radial.add(inner(nabla.at(x, mu), &nu).re.powi(2));
        }
        eta.data[x] = nu * Complex64::new(r - threshold, 0.0);
    }
    Ok(ExcessReport {
        threshold,
        excess_measure: count as f64 * lat.cell_volume(),
        radial_excess: lat.cell_volume() * radial.value(),
        eta_norm: sobolev12_norm(lat, &eta)?,
    })
}
