//! Gauge normalization: Coulomb fixing, component (winding) fixing, and the
//! gauge-invariant distance used to measure convergence modulo gauge.
//!
//! After [`full_gauge_fix`] the link field satisfies `codiff1(a) = 0` and its
//! harmonic part (the component means) lies in `[-pi/L_mu, pi/L_mu)`. The
//! only remaining freedom is a constant phase, which [`gauge_distance`]
//! removes by alignment.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::{Mutex, OnceLock};

use nalgebra::{DMatrix, Matrix4, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{apply_gauge, spinor_inner, Configuration, GaugeTransform, PlusField};
use crate::lattice::{
    codiff1, l2_norm, poisson_solve, sobolev12_norm, Lattice, OneForm, PLANES,
};
use crate::sum::Neumaier;

/// Record of a normalization step. `zeta` and `winding` form the transform
/// that was applied, so `apply_gauge(&report.transform(), cfg)` reproduces
/// the normalized configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeFixReport {
    pub zeta: crate::lattice::ScalarField,
    pub winding: [i64; 4],
    /// `||codiff1(a')||_{L^2}` after the step.
    pub residual: f64,
    /// Component means of `a'`.
    pub harmonic: [f64; 4],
}

impl GaugeFixReport {
    fn new(cfg: &Configuration, g: GaugeTransform) -> Result<Self> {
        let lat = &cfg.lattice;
        let residual = l2_norm(lat, &codiff1(lat, &cfg.gauge.a)?)?;
        Ok(Self {
            zeta: g.zeta,
            winding: g.winding,
            residual,
            harmonic: cfg.gauge.a.component_means(),
        })
    }

    pub fn transform(&self) -> GaugeTransform {
        GaugeTransform {
            zeta: self.zeta.clone(),
            winding: self.winding,
        }
    }
}

/// Coulomb gauge: `zeta = -poisson(codiff1 a)`, zero mean, so that
/// `codiff1(a + d0 zeta) = 0`.
pub fn coulomb_fix(cfg: &Configuration) -> Result<(Configuration, GaugeFixReport)> {
    cfg.validate()?;
    let lat = &cfg.lattice;
    let mut div = codiff1(lat, &cfg.gauge.a)?;
    // the divergence sums to zero exactly; drop the rounding in its mean
    let mean = div.mean();
    div.0.iter_mut().for_each(|v| *v -= mean);
    let zeta = poisson_solve(lat, &div)?.scale(-1.0);
    let g = GaugeTransform { zeta, winding: [0; 4] };
    let out = apply_gauge(&g, cfg)?;
    let report = GaugeFixReport::new(&out, g)?;
    Ok((out, report))
}

/// Winding needed to bring a harmonic component into `[-pi/L, pi/L)`.
///
/// The subtracted number of periods is `floor(m L / 2 pi + 1/2)`, which is
/// the only rounding that keeps the half-open interval: an exact `+pi/L`
/// moves to `-pi/L`, an exact `-pi/L` stays.
fn winding_for(mean: f64, length: f64) -> Result<i64> {
    let periods = (mean * length / TAU + 0.5).floor();
    // beyond 2^53 the period count is no longer an exact integer
    if !(periods.abs() < 9.0e15) {
        return Err(Error::NonFinite("harmonic part of the link field"));
    }
    Ok(-(periods as i64))
}

/// Shift the harmonic part into the fundamental domain by a pure winding
/// transform. Windings have constant `d theta`, so the Coulomb residual is
/// unchanged.
pub fn component_fix(cfg: &Configuration) -> Result<(Configuration, GaugeFixReport)> {
    cfg.validate()?;
    let lat = &cfg.lattice;
    let means = cfg.gauge.a.component_means();
    let mut winding = [0; 4];
    for mu in 0..4 {
        winding[mu] = winding_for(means[mu], lat.length(mu))?;
    }
    let g = GaugeTransform::winding(lat, winding);
    let out = apply_gauge(&g, cfg)?;
    let report = GaugeFixReport::new(&out, g)?;
    Ok((out, report))
}

/// [`coulomb_fix`] followed by [`component_fix`]; the report carries the
/// composed transform.
pub fn full_gauge_fix(cfg: &Configuration) -> Result<(Configuration, GaugeFixReport)> {
    let (c1, r1) = coulomb_fix(cfg)?;
    let (c2, r2) = component_fix(&c1)?;
    let g = r1.transform().compose(&r2.transform());
    let report = GaugeFixReport {
        zeta: g.zeta,
        winding: g.winding,
        residual: r2.residual,
        harmonic: r2.harmonic,
    };
    Ok((c2, report))
}

/// `L^{1,2}` inner product of spinor fields, plain differences.
fn spinor_inner12(lat: &Lattice, u: &PlusField, v: &PlusField) -> Result<Complex64> {
    let mut acc = spinor_inner(lat, u, v)?;
    let inv_h2 = lat.spacing().powi(-2);
    let mut re = Neumaier::new();
    let mut im = Neumaier::new();
    for x in 0..lat.sites() {
        for mu in 0..4 {
            let y = lat.forward(x, mu);
            let du = u.data[y] - u.data[x];
            let dv = v.data[y] - v.data[x];
            let z = crate::clifford::inner(&du, &dv);
            re.add(z.re);
            im.add(z.im);
        }
    }
    acc += Complex64::new(re.value(), im.value()) * (lat.cell_volume() * inv_h2);
    Ok(acc)
}

/// Distance between gauge orbits: both configurations are normalized by
/// [`full_gauge_fix`], the second spinor is rotated by the constant phase
/// maximizing `Re <phi1, e^{i alpha} phi2>_{1,2}`, and the result is
/// `||a1 - a2||_{1,2} + ||phi1 - e^{i alpha} phi2||_{1,2}`.
///
/// Aligning in the same inner product that defines the norm keeps the
/// triangle inequality exact.
pub fn gauge_distance(cfg1: &Configuration, cfg2: &Configuration) -> Result<f64> {
    cfg1.same_lattice(cfg2)?;
    if cfg1.gauge.flux != cfg2.gauge.flux {
        return Err(Error::FluxMismatch);
    }
    let lat = &cfg1.lattice;
    let (f1, _) = full_gauge_fix(cfg1)?;
    let (f2, _) = full_gauge_fix(cfg2)?;
    let overlap = spinor_inner12(lat, &f1.spinor, &f2.spinor)?;
    let rot = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let phi2 = f2.spinor.scale(rot);
    let da = f1.gauge.a.axpy(-1.0, &f2.gauge.a);
    let dphi = f1.spinor.axpy(-1.0, &phi2);
    Ok(sobolev12_norm(lat, &da)? + sobolev12_norm(lat, &dphi)?)
}

/// Lattice constants of the Hodge bound
/// `||a||_{1,2} <= c ||d1 a||_{L^2} + c_prime` for flux-0 link fields in
/// Coulomb gauge with harmonic part in the fundamental domain.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct HodgeConstants {
    /// Smallest nonzero eigenvalue of the one-form Laplacian `d0 codiff1 + codiff2 d1`.
    pub lambda1: f64,
    /// `sqrt(1 + 1/lambda1)`
    pub c: f64,
    /// `sqrt(Vol sum_mu (pi/L_mu)^2)`, the largest `L^2` norm of a harmonic part.
    pub c_prime: f64,
    /// `min ||P+ d1 a||^2 / ||d1 a||^2` over non-closed `a`. Zero means some
    /// curvature is invisible to the self-dual part alone.
    pub selfdual_ratio: f64,
}

type CMat4 = Matrix4<Complex64>;

/// Fourier symbols of `d0` (column) and `d1` (6 x 4) at one wavevector.
fn symbols(lat: &Lattice, k: [usize; 4]) -> ([Complex64; 4], [[Complex64; 4]; 6]) {
    let h = lat.spacing();
    let dims = lat.dims();
    let f: [Complex64; 4] = std::array::from_fn(|mu| {
        (Complex64::from_polar(1.0, TAU * k[mu] as f64 / dims[mu] as f64) - 1.0) / h
    });
    let mut d1 = [[Complex64::new(0.0, 0.0); 4]; 6];
    for (p, &(mu, nu)) in PLANES.iter().enumerate() {
        d1[p][nu] = f[mu];
        d1[p][mu] = -f[nu];
    }
    (f, d1)
}

fn block_spectrum(lat: &Lattice) -> (f64, f64) {
    let dims = lat.dims();
    let mut lambda1 = f64::INFINITY;
    let mut ratio = f64::INFINITY;
    let pplus = selfdual_matrix();
    for k0 in 0..dims[0] {
        for k1 in 0..dims[1] {
            for k2 in 0..dims[2] {
                for k3 in 0..dims[3] {
                    let k = [k0, k1, k2, k3];
                    if k == [0; 4] {
                        continue;
                    }
                    let (f, d1) = symbols(lat, k);
                    let mut m = CMat4::zeros();
                    for mu in 0..4 {
                        for nu in 0..4 {
                            let mut v = f[mu] * f[nu].conj();
                            for row in &d1 {
                                v += row[mu].conj() * row[nu];
                            }
                            m[(mu, nu)] = v;
                        }
                    }
                    let eig = SymmetricEigen::new(m);
                    let scale = eig.eigenvalues.amax();
                    for &e in eig.eigenvalues.iter() {
                        if e > 1e-10 * scale {
                            lambda1 = lambda1.min(e);
                        }
                    }
                    ratio = ratio.min(selfdual_ratio_at(&d1, &pplus));
                }
            }
        }
    }
    (lambda1, ratio)
}

fn selfdual_matrix() -> DMatrix<Complex64> {
    DMatrix::from_fn(6, 6, |i, j| {
        let mut e = [0.0; 6];
        e[j] = 1.0;
        Complex64::new(crate::lattice::forms::selfdual_fiber(&e)[i], 0.0)
    })
}

/// Smallest Rayleigh quotient of `P+` on the range of the `d1` symbol.
fn selfdual_ratio_at(d1: &[[Complex64; 4]; 6], pplus: &DMatrix<Complex64>) -> f64 {
    let m = DMatrix::from_fn(6, 4, |p, mu| d1[p][mu]);
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.amax();
    let cols: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 1e-10 * smax)
        .collect();
    if cols.is_empty() {
        return f64::INFINITY;
    }
    let q = u.select_columns(cols.iter());
    let compressed = q.adjoint() * pplus * &q;
    SymmetricEigen::new(compressed).eigenvalues.min()
}

fn cache() -> &'static Mutex<HashMap<([usize; 4], u64), HodgeConstants>> {
    static CACHE: OnceLock<Mutex<HashMap<([usize; 4], u64), HodgeConstants>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Spectral constants for a lattice, computed once per shape and cached.
pub fn hodge_constants(lat: &Lattice) -> HodgeConstants {
    let key = (lat.dims(), lat.spacing().to_bits());
    if let Some(c) = cache().lock().expect("cache lock").get(&key) {
        return *c;
    }
    let (lambda1, ratio) = block_spectrum(lat);
    let c_prime = (lat.volume() * (0..4).map(|mu| (PI / lat.length(mu)).powi(2)).sum::<f64>()).sqrt();
    let consts = HodgeConstants {
        lambda1,
        c: (1.0 + 1.0 / lambda1).sqrt(),
        c_prime,
        selfdual_ratio: ratio.max(0.0),
    };
    cache().lock().expect("cache lock").insert(key, consts);
    consts
}

/// `c ||F|| + c_prime - ||a||_{1,2}` for a flux-0 configuration; nonnegative
/// whenever the configuration is normalized by [`full_gauge_fix`].
pub fn hodge_bound_slack(cfg: &Configuration) -> Result<f64> {
    let lat = &cfg.lattice;
    let k = hodge_constants(lat);
    let f = crate::operators::curvature(cfg)?;
    Ok(k.c * l2_norm(lat, &f)? + k.c_prime - sobolev12_norm(lat, &cfg.gauge.a)?)
}

/// Harmonic parts of a one-form lie in the fundamental domain.
pub fn in_fundamental_domain(lat: &Lattice, a: &OneForm) -> bool {
    let m = a.component_means();
    (0..4).all(|mu| {
        let b = PI / lat.length(mu);
        // one ulp of slack at the closed end
        m[mu] >= -b * (1.0 + 1e-12) && m[mu] < b * (1.0 + 1e-12)
    })
}
