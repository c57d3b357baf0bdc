//! Periodic Poisson solver for `laplacian0 f = rho` on zero-mean data.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{laplacian0, Lattice, ScalarField};
use crate::error::{Error, Result};
use crate::sum::ksum;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PoissonMethod {
    /// Diagonalize the stencil with a 4D discrete Fourier transform.
    Spectral,
    /// Conjugate gradients on the zero-mean subspace.
    ConjugateGradient,
}

#[derive(Clone, Copy, Debug)]
pub struct PoissonOptions {
    pub method: PoissonMethod,
    /// Relative residual `||L f - rho|| / ||rho||` required on exit.
    pub tolerance: f64,
    /// Iteration cap for conjugate gradients; `None` means `10 * sites`.
    pub max_iters: Option<usize>,
}

impl Default for PoissonOptions {
    fn default() -> Self {
        Self {
            method: PoissonMethod::Spectral,
            tolerance: 1e-10,
            max_iters: None,
        }
    }
}

/// Unique zero-mean solution of `laplacian0 f = rho`.
pub fn poisson_solve(lat: &Lattice, rho: &ScalarField) -> Result<ScalarField> {
    poisson_solve_with(lat, rho, &PoissonOptions::default())
}

pub fn poisson_solve_with(
    lat: &Lattice,
    rho: &ScalarField,
    opts: &PoissonOptions,
) -> Result<ScalarField> {
    rho.check(lat)?;
    let norm = ksum(rho.0.iter().map(|v| v * v)).sqrt();
    let mean = rho.mean();
    // compare the constant mode against the whole field, both unweighted
    if mean.abs() * (lat.sites() as f64).sqrt() > 1e-10 * norm + f64::MIN_POSITIVE {
        return Err(Error::NonZeroMean { mean, norm });
    }
    if norm == 0.0 {
        return Ok(ScalarField::zeros(lat));
    }

    let (f, iterations) = match opts.method {
        PoissonMethod::Spectral => (spectral(lat, rho), 1),
        PoissonMethod::ConjugateGradient => {
            let max_iters = opts.max_iters.unwrap_or(10 * lat.sites());
            conjugate_gradient(lat, rho, opts.tolerance, max_iters)?
        }
    };

    let lf = laplacian0(lat, &f)?;
    let residual = ksum(lf.0.iter().zip(&rho.0).map(|(a, b)| (a - b).powi(2))).sqrt() / norm;
    if !(residual <= opts.tolerance) {
        return Err(Error::NotConverged {
            solver: "poisson",
            iterations,
            residual,
        });
    }
    Ok(f)
}

fn spectral(lat: &Lattice, rho: &ScalarField) -> ScalarField {
    let dims = lat.dims();
    let mut buf: Vec<Complex64> = rho.0.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();

    transform_all_axes(lat, &mut buf, &mut planner, false);

    let inv_h2 = lat.spacing().powi(-2);
    let symbols: Vec<Vec<f64>> = dims
        .iter()
        .map(|&n| {
            (0..n)
                .map(|k| 2.0 * inv_h2 * (1.0 - (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos()))
                .collect()
        })
        .collect();
    for (site, v) in buf.iter_mut().enumerate() {
        let c = lat.coords(site);
        let lambda: f64 = (0..4).map(|mu| symbols[mu][c[mu]]).sum();
        if site == 0 {
            *v = Complex64::new(0.0, 0.0);
        } else {
            *v /= lambda;
        }
    }

    transform_all_axes(lat, &mut buf, &mut planner, true);
    let scale = 1.0 / lat.sites() as f64;
    ScalarField(buf.iter().map(|v| v.re * scale).collect())
}

fn transform_all_axes(
    lat: &Lattice,
    buf: &mut [Complex64],
    planner: &mut FftPlanner<f64>,
    inverse: bool,
) {
    let dims = lat.dims();
    let mut stride = 1;
    for &n in &dims {
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let block = stride * n;
        for outer in (0..buf.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = buf[base + k * stride];
                }
                fft.process(&mut line);
                for (k, slot) in line.iter().enumerate() {
                    buf[base + k * stride] = *slot;
                }
            }
        }
        stride = block;
    }
}

fn conjugate_gradient(
    lat: &Lattice,
    rho: &ScalarField,
    tol: f64,
    max_iters: usize,
) -> Result<(ScalarField, usize)> {
    let n = lat.sites();
    let dot = |a: &[f64], b: &[f64]| ksum(a.iter().zip(b).map(|(x, y)| x * y));
    let target = tol * 0.5 * dot(&rho.0, &rho.0).sqrt();

    let mut x = ScalarField::zeros(lat);
    let mut r = rho.0.clone();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for it in 0..max_iters {
        if rr.sqrt() <= target {
            return Ok((project_mean(x), it));
        }
        let ap = laplacian0(lat, &ScalarField(p.clone()))?.0;
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x.0[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    if rr.sqrt() <= target {
        return Ok((project_mean(x), max_iters));
    }
    Err(Error::NotConverged {
        solver: "poisson (conjugate gradient)",
        iterations: max_iters,
        residual: rr.sqrt() / dot(&rho.0, &rho.0).sqrt(),
    })
}

fn project_mean(mut f: ScalarField) -> ScalarField {
    let m = f.mean();
    f.0.iter_mut().for_each(|v| *v -= m);
    f
}
