//! Periodic 4D lattice geometry and discrete differential forms.
//!
//! Sites are indexed with the first coordinate varying fastest. A one-form
//! value `(x, mu)` lives on the link `x -> x + mu`; a two-form value
//! `(x, p)` lives on the plaquette spanned at `x` by the plane `PLANES[p]`.
//! Directions are 0-based throughout.

pub(crate) mod forms;
mod norms;
mod poisson;

pub use forms::{codiff1, codiff2, d0, d1, hodge_star2, laplacian0, selfdual_project};
pub use norms::{l2_inner, l2_norm, l4_norm, linf_norm, sobolev12_norm, LatticeField};
pub use poisson::{poisson_solve, poisson_solve_with, PoissonMethod, PoissonOptions};

use crate::error::{Error, Result};

/// The six coordinate planes `mu < nu`, in storage order.
pub const PLANES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Index into [`PLANES`] of the plane spanned by `mu < nu`.
pub fn plane_index(mu: usize, nu: usize) -> usize {
    debug_assert!(mu < nu && nu < 4);
    match (mu, nu) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        _ => 5,
    }
}

/// A periodic hypercubic lattice with `dims[mu]` sites per direction and
/// lattice constant `spacing`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    dims: [usize; 4],
    spacing: f64,
    strides: [usize; 4],
    sites: usize,
}

impl Lattice {
    pub fn new(dims: [usize; 4], spacing: f64) -> Result<Self> {
        if let Some(n) = dims.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidLattice(format!(
                "every direction needs at least 2 sites, got {n}"
            )));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidLattice(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        let mut strides = [1; 4];
        for mu in 1..4 {
            strides[mu] = strides[mu - 1] * dims[mu - 1];
        }
        Ok(Self {
            dims,
            spacing,
            strides,
            sites: dims.iter().product(),
        })
    }

    /// `n^4` sites with spacing `h`.
    pub fn cubic(n: usize, spacing: f64) -> Result<Self> {
        Self::new([n; 4], spacing)
    }

    #[inline]
    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    #[inline]
    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Physical extent `L_mu = N_mu h`.
    pub fn length(&self, mu: usize) -> f64 {
        self.dims[mu] as f64 * self.spacing
    }

    pub fn volume(&self) -> f64 {
        self.sites as f64 * self.cell_volume()
    }

    /// `h^4`, the weight of one site in every integral.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(4)
    }

    #[inline]
    pub fn index(&self, coords: [usize; 4]) -> usize {
        coords
            .iter()
            .zip(&self.dims)
            .zip(&self.strides)
            .map(|((&c, &n), &s)| (c % n) * s)
            .sum()
    }

    #[inline]
    pub fn coords(&self, site: usize) -> [usize; 4] {
        let mut c = [0; 4];
        for mu in 0..4 {
            c[mu] = (site / self.strides[mu]) % self.dims[mu];
        }
        c
    }

    #[inline]
    pub fn coord(&self, site: usize, mu: usize) -> usize {
        (site / self.strides[mu]) % self.dims[mu]
    }

    /// `x + mu`, wrapping periodically.
    #[inline]
    pub fn forward(&self, site: usize, mu: usize) -> usize {
        if self.coord(site, mu) + 1 == self.dims[mu] {
            site + self.strides[mu] - self.dims[mu] * self.strides[mu]
        } else {
            site + self.strides[mu]
        }
    }

    /// `x - mu`, wrapping periodically.
    #[inline]
    pub fn backward(&self, site: usize, mu: usize) -> usize {
        if self.coord(site, mu) == 0 {
            site + (self.dims[mu] - 1) * self.strides[mu]
        } else {
            site - self.strides[mu]
        }
    }

    /// Position of a site in length units.
    pub fn position(&self, site: usize) -> [f64; 4] {
        self.coords(site).map(|c| c as f64 * self.spacing)
    }

    pub(crate) fn check_len(&self, what: &'static str, per_site: usize, got: usize) -> Result<()> {
        let expected = per_site * self.sites;
        if got != expected {
            return Err(Error::SizeMismatch {
                what,
                expected,
                got,
            });
        }
        Ok(())
    }
}

/// One real value per site.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField(pub Vec<f64>);

/// Four real values per site; `(x, mu)` at index `4 x + mu`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneForm(pub Vec<f64>);

/// Six real values per site; `(x, p)` at index `6 x + p`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoForm(pub Vec<f64>);

macro_rules! real_field {
    ($ty:ident, $per:expr, $what:literal) => {
        impl $ty {
            pub const PER_SITE: usize = $per;

            pub fn zeros(lat: &Lattice) -> Self {
                Self(vec![0.0; $per * lat.sites()])
            }

            pub fn from_fn(lat: &Lattice, mut f: impl FnMut(usize, usize) -> f64) -> Self {
                let mut v = Vec::with_capacity($per * lat.sites());
                for x in 0..lat.sites() {
                    for c in 0..$per {
                        v.push(f(x, c));
                    }
                }
                Self(v)
            }

            pub fn check(&self, lat: &Lattice) -> Result<()> {
                lat.check_len($what, $per, self.0.len())
            }

            #[inline]
            pub fn at(&self, site: usize, c: usize) -> f64 {
                self.0[$per * site + c]
            }

            #[inline]
            pub fn at_mut(&mut self, site: usize, c: usize) -> &mut f64 {
                &mut self.0[$per * site + c]
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|v| v.is_finite())
            }

            pub fn scale(&self, s: f64) -> Self {
                Self(self.0.iter().map(|v| v * s).collect())
            }

            /// `self + s * other`
            pub fn axpy(&self, s: f64, other: &Self) -> Self {
                Self(
                    self.0
                        .iter()
                        .zip(&other.0)
                        .map(|(a, b)| a + s * b)
                        .collect(),
                )
            }

            pub fn max_abs_diff(&self, other: &Self) -> f64 {
                self.0
                    .iter()
                    .zip(&other.0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            }
        }
    };
}

real_field!(ScalarField, 1, "scalar field");
real_field!(OneForm, 4, "one-form");
real_field!(TwoForm, 6, "two-form");

impl ScalarField {
    pub fn constant(lat: &Lattice, value: f64) -> Self {
        Self(vec![value; lat.sites()])
    }

    pub fn mean(&self) -> f64 {
        crate::sum::ksum(self.0.iter().copied()) / self.0.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl OneForm {
    /// Mean of each component over the lattice: the harmonic part on a flat torus.
    pub fn component_means(&self) -> [f64; 4] {
        let sites = self.0.len() / 4;
        let mut out = [0.0; 4];
        for (mu, m) in out.iter_mut().enumerate() {
            *m = crate::sum::ksum((0..sites).map(|x| self.0[4 * x + mu])) / sites as f64;
        }
        out
    }
}
