//! Exterior derivative, codifferential and Hodge star on the periodic lattice.
//!
//! `d` uses forward differences; the codifferentials are assembled by
//! scattering the transpose of the same stencils, so they are exact adjoints
//! of `d` under the `h^4`-weighted inner products.

use super::{Lattice, OneForm, ScalarField, TwoForm, PLANES};
use crate::error::Result;

/// `(d0 f)(x, mu) = (f(x + mu) - f(x)) / h`
pub fn d0(lat: &Lattice, f: &ScalarField) -> Result<OneForm> {
    f.check(lat)?;
    let inv_h = 1.0 / lat.spacing();
    let mut out = OneForm::zeros(lat);
    for x in 0..lat.sites() {
        for mu in 0..4 {
            *out.at_mut(x, mu) = (f.0[lat.forward(x, mu)] - f.0[x]) * inv_h;
        }
    }
    Ok(out)
}

/// Plaquette curvature of a link field.
pub fn d1(lat: &Lattice, a: &OneForm) -> Result<TwoForm> {
    a.check(lat)?;
    let inv_h = 1.0 / lat.spacing();
    let mut out = TwoForm::zeros(lat);
    for x in 0..lat.sites() {
        for (p, &(mu, nu)) in PLANES.iter().enumerate() {
            let xm = lat.forward(x, mu);
            let xn = lat.forward(x, nu);
            *out.at_mut(x, p) = (a.at(xm, nu) - a.at(x, nu) - a.at(xn, mu) + a.at(x, mu)) * inv_h;
        }
    }
    Ok(out)
}

/// Adjoint of [`d0`]: `-(1/h) sum_mu (a(x, mu) - a(x - mu, mu))`.
pub fn codiff1(lat: &Lattice, a: &OneForm) -> Result<ScalarField> {
    a.check(lat)?;
    let inv_h = 1.0 / lat.spacing();
    let mut out = ScalarField::zeros(lat);
    for x in 0..lat.sites() {
        let mut acc = 0.0;
        for mu in 0..4 {
            acc += a.at(x, mu) - a.at(lat.backward(x, mu), mu);
        }
        out.0[x] = -acc * inv_h;
    }
    Ok(out)
}

/// Adjoint of [`d1`].
pub fn codiff2(lat: &Lattice, f: &TwoForm) -> Result<OneForm> {
    f.check(lat)?;
    let inv_h = 1.0 / lat.spacing();
    let mut out = OneForm::zeros(lat);
    for x in 0..lat.sites() {
        for (p, &(mu, nu)) in PLANES.iter().enumerate() {
            let v = f.at(x, p) * inv_h;
            if v == 0.0 {
                continue;
            }
            *out.at_mut(lat.forward(x, mu), nu) += v;
            *out.at_mut(x, nu) -= v;
            *out.at_mut(lat.forward(x, nu), mu) -= v;
            *out.at_mut(x, mu) += v;
        }
    }
    Ok(out)
}

/// Scalar Laplacian `codiff1 . d0`, positive semidefinite.
pub fn laplacian0(lat: &Lattice, f: &ScalarField) -> Result<ScalarField> {
    f.check(lat)?;
    let inv_h2 = lat.spacing().powi(-2);
    let mut out = ScalarField::zeros(lat);
    for x in 0..lat.sites() {
        let mut acc = 0.0;
        for mu in 0..4 {
            acc += 2.0 * f.0[x] - f.0[lat.forward(x, mu)] - f.0[lat.backward(x, mu)];
        }
        out.0[x] = acc * inv_h2;
    }
    Ok(out)
}

/// Hodge star on one plaquette fiber (flat metric, positive orientation).
#[inline]
pub(crate) fn star_fiber(f: &[f64]) -> [f64; 6] {
    // planes: 01 02 03 12 13 23
    [f[5], -f[4], f[3], f[2], -f[1], f[0]]
}

#[inline]
pub(crate) fn selfdual_fiber(f: &[f64]) -> [f64; 6] {
    let s = star_fiber(f);
    std::array::from_fn(|p| 0.5 * (f[p] + s[p]))
}

pub fn hodge_star2(f: &TwoForm) -> TwoForm {
    TwoForm(f.0.chunks_exact(6).flat_map(star_fiber).collect())
}

/// Orthogonal projection onto self-dual two-forms, `(F + *F) / 2`.
pub fn selfdual_project(f: &TwoForm) -> TwoForm {
    TwoForm(f.0.chunks_exact(6).flat_map(selfdual_fiber).collect())
}
