//! Discrete Lebesgue and Sobolev norms.
//!
//! `<u, v> = h^4 sum_x Re(u(x) . conj v(x))`; two-forms are summed over the
//! six planes `mu < nu` only. Gradients in [`sobolev12_norm`] are plain,
//! componentwise forward differences.

use super::{Lattice, OneForm, ScalarField, TwoForm};
use crate::error::Result;
use crate::sum::{ksum, Neumaier};

/// A field with a fiber over every lattice site.
pub trait LatticeField {
    /// Validate against the lattice.
    fn check_on(&self, lat: &Lattice) -> Result<()>;
    /// `|u(x)|^2`
    fn fiber_norm_sqr(&self, site: usize) -> f64;
    /// `Re <u(x), v(x)>`
    fn fiber_inner_re(&self, other: &Self, site: usize) -> f64;
    /// `|u(x) - u(y)|^2`
    fn fiber_dist_sqr(&self, x: usize, y: usize) -> f64;
}

macro_rules! real_lattice_field {
    ($ty:ty, $per:expr) => {
        impl LatticeField for $ty {
            fn check_on(&self, lat: &Lattice) -> Result<()> {
                self.check(lat)
            }

            #[inline]
            fn fiber_norm_sqr(&self, site: usize) -> f64 {
                self.0[$per * site..$per * (site + 1)]
                    .iter()
                    .map(|v| v * v)
                    .sum()
            }

            #[inline]
            fn fiber_inner_re(&self, other: &Self, site: usize) -> f64 {
                let r = $per * site..$per * (site + 1);
                self.0[r.clone()]
                    .iter()
                    .zip(&other.0[r])
                    .map(|(a, b)| a * b)
                    .sum()
            }

            #[inline]
            fn fiber_dist_sqr(&self, x: usize, y: usize) -> f64 {
                (0..$per)
                    .map(|c| {
                        let d = self.0[$per * x + c] - self.0[$per * y + c];
                        d * d
                    })
                    .sum()
            }
        }
    };
}

real_lattice_field!(ScalarField, 1);
real_lattice_field!(OneForm, 4);
real_lattice_field!(TwoForm, 6);

pub fn l2_inner<F: LatticeField>(lat: &Lattice, u: &F, v: &F) -> Result<f64> {
    u.check_on(lat)?;
    v.check_on(lat)?;
    Ok(lat.cell_volume() * ksum((0..lat.sites()).map(|x| u.fiber_inner_re(v, x))))
}

pub fn l2_norm<F: LatticeField>(lat: &Lattice, u: &F) -> Result<f64> {
    u.check_on(lat)?;
    Ok((lat.cell_volume() * ksum((0..lat.sites()).map(|x| u.fiber_norm_sqr(x)))).sqrt())
}

pub fn l4_norm<F: LatticeField>(lat: &Lattice, u: &F) -> Result<f64> {
    u.check_on(lat)?;
    let s = ksum((0..lat.sites()).map(|x| u.fiber_norm_sqr(x).powi(2)));
    Ok((lat.cell_volume() * s).powf(0.25))
}

pub fn linf_norm<F: LatticeField>(lat: &Lattice, u: &F) -> Result<f64> {
    u.check_on(lat)?;
    Ok((0..lat.sites())
        .map(|x| u.fiber_norm_sqr(x))
        .fold(0.0, f64::max)
        .sqrt())
}

/// `sqrt(||u||^2 + sum_mu ||(u(x + mu) - u(x)) / h||^2)`
pub fn sobolev12_norm<F: LatticeField>(lat: &Lattice, u: &F) -> Result<f64> {
    u.check_on(lat)?;
    let inv_h2 = lat.spacing().powi(-2);
    let mut acc = Neumaier::new();
    for x in 0..lat.sites() {
        acc.add(u.fiber_norm_sqr(x));
        for mu in 0..4 {
            acc.add(u.fiber_dist_sqr(lat.forward(x, mu), x) * inv_h2);
        }
    }
    Ok((lat.cell_volume() * acc.value()).sqrt())
}
