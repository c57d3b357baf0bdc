//! Invariant suite shared by the command line and the test targets.
//!
//! Every check reports a measured value against a tolerance. The `fast`
//! level stays on lattices with at most 3^4 sites and skips refinement
//! studies; `full` adds 4^4 and 8^4 runs.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::clifford::{norm_sqr, quadratic_form, standard_table, CliffordTable, Mat2, Spinor};
use crate::error::{Error, Result};
use crate::fields::{
    apply_gauge, random_configuration, smooth_configuration,
    spinor_inner, Amplitudes, Configuration, FluxMatrix, GaugeTransform, PlusField, SpinorField,
};
use crate::functional::{energy_first_order_with, energy_weitzenbock, fd_gradient_check};
use crate::gaugefix::{full_gauge_fix, hodge_bound_slack, in_fundamental_domain};
use crate::lattice::{
    codiff1, codiff2, d0, d1, l2_inner, l2_norm, Lattice, OneForm, ScalarField, TwoForm, PLANES,
};
use crate::operators::{weitzenbock_defect, Connection, CovariantDerivative};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            other => Err(Error::InvalidParameter(format!(
                "check level must be `fast` or `full`, got `{other}`"
            ))),
        }
    }
}

/// Outcome of one check. `measured <= tolerance` passes unless the check is
/// a lower bound, in which case `measured >= tolerance` passes.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub lower_bound: bool,
    pub passed: bool,
}

impl CheckResult {
    fn upper(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            lower_bound: false,
            // NaN fails
            passed: measured <= tolerance,
        }
    }

    fn lower(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            lower_bound: true,
            passed: measured >= tolerance,
        }
    }

    fn errored(name: impl Into<String>, err: &Error) -> Self {
        Self {
            name: format!("{} ({err})", name.into()),
            measured: f64::NAN,
            tolerance: f64::NAN,
            lower_bound: false,
            passed: false,
        }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let op = if self.lower_bound { ">=" } else { "<=" };
        write!(
            f,
            "{verdict} {:<44} measured {:.3e} {op} {:.3e}",
            self.name, self.measured, self.tolerance
        )
    }
}

/// A table whose first matrix is no longer unitary. Negative control for the
/// Clifford checks.
pub fn corrupted_table() -> CliffordTable {
    let t = standard_table();
    let mut sigma: [Mat2; 4] = std::array::from_fn(|mu| *t.sigma(mu));
    sigma[0] *= Complex64::new(1.01, 0.0);
    CliffordTable::from_sigmas(sigma)
}

/// Run the suite at `level` with the given Clifford table.
pub fn run_checks(level: Level, tbl: &CliffordTable) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let mut push = |name: &str, r: Result<CheckResult>| {
        out.push(match r {
            Ok(r) => CheckResult { name: name.to_string(), ..r },
            Err(e) => CheckResult::errored(name, &e),
        });
    };
    let small = Lattice::cubic(3, 0.9).expect("valid lattice");

    push("clifford relation", Ok(clifford_relation(tbl)));
    push("quadratic map |sigma|^2 = |phi|^4/8", Ok(quadratic_map(tbl, 100, 1)));
    push("d1 d0 = 0 (3^4)", d_squared(&small, 100, 2));
    push("d0 / codiff1 adjoint (3^4)", adjoint_d0(&small, 100, 3));
    push("d1 / codiff2 adjoint (3^4)", adjoint_d1(&small, 100, 4));
    push("dirac adjoint (3^4)", adjoint_dirac(tbl, &small, 100, 5));
    push("covariant derivative adjoint (3^4)", adjoint_nabla(&small, 100, 6));
    push("gauge invariance (3^4)", gauge_invariance(tbl, &small, 20, 7));
    push("gradient vs finite differences (3^4)", gradient_fd(&small, 50, 8));
    push("coulomb residual (3^4)", coulomb_residual(&small, 10, 9));
    push("gauge fix lands in fundamental domain (3^4)", fundamental_domain(&small, 10, 10));
    push("gauge fix idempotent (3^4)", gaugefix_idempotent(&small, 10, 11));
    push("pure gauge reduces to a = 0 (3^4)", pure_gauge(&small, 10, 12));
    push("hodge bound slack (3^4)", hodge_bound(&small, 30, 13));
    push("flux quantization (3^4)", flux_quantization(&small));

    if level == Level::Full {
        let mid = Lattice::cubic(4, 1.0).expect("valid lattice");
        push("gauge invariance (4^4)", gauge_invariance(tbl, &mid, 50, 14));
        push("hodge bound slack (4^4)", hodge_bound(&mid, 30, 15));
        push("flux quantization (4^4)", flux_quantization(&mid));
        push("weitzenbock defect contraction 4^4 -> 8^4", weitzenbock_contraction(tbl, 21));
        push("energy gap contraction 4^4 -> 8^4", energy_gap_contraction(tbl, 3));
    }
    out
}

fn max_entry(m: &Mat2) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn clifford_relation(tbl: &CliffordTable) -> CheckResult {
    // unitarity is part of the relation; report whichever is worse
    let unitary = (0..4)
        .map(|mu| max_entry(&(tbl.sigma_adjoint(mu) * tbl.sigma(mu) - Mat2::identity())))
        .fold(0.0, f64::max);
    CheckResult::upper("clifford relation", tbl.relation_defect().max(unitary), 1e-15)
}

fn random_spinor(rng: &mut impl Rng) -> Spinor {
    let mut g = || -> f64 { rng.sample(StandardNormal) };
    Spinor::new(Complex64::new(g(), g()), Complex64::new(g(), g()))
}

pub fn quadratic_map(tbl: &CliffordTable, samples: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let worst = (0..samples)
        .map(|_| {
            let phi = random_spinor(&mut rng);
            let n2 = norm_sqr(&phi);
            let s2: f64 = quadratic_form(tbl, &phi).iter().map(|v| v * v).sum();
            (s2 - n2 * n2 / 8.0).abs() / (n2 * n2 / 8.0)
        })
        .fold(0.0, f64::max);
    CheckResult::upper("quadratic map |sigma|^2 = |phi|^4/8", worst, 1e-12)
}

fn random_scalar(lat: &Lattice, rng: &mut impl Rng) -> ScalarField {
    ScalarField::from_fn(lat, |_, _| rng.random_range(-1.0..1.0))
}

fn random_one_form(lat: &Lattice, rng: &mut impl Rng) -> OneForm {
    OneForm::from_fn(lat, |_, _| rng.random_range(-1.0..1.0))
}

fn random_spinor_field<C: crate::fields::Chirality>(
    lat: &Lattice,
    rng: &mut impl Rng,
) -> SpinorField<C> {
    SpinorField::from_fn(lat, |_| random_spinor(rng))
}

/// `|<Tu, v> - <u, T*v>| / (||Tu|| ||v||)`, the defect relative to the
/// Cauchy-Schwarz bound.
fn adjoint_defect(lhs: f64, rhs: f64, tu: f64, v: f64) -> f64 {
    (lhs - rhs).abs() / (tu * v).max(f64::MIN_POSITIVE)
}

pub fn d_squared(lat: &Lattice, samples: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let f = random_scalar(lat, &mut rng);
        let df = d0(lat, &f)?;
        let ddf = d1(lat, &df)?;
        worst = worst.max(l2_norm(lat, &ddf)? / l2_norm(lat, &df)?);
    }
    Ok(CheckResult::upper("d1 d0 = 0", worst, 1e-12))
}

pub fn adjoint_d0(lat: &Lattice, samples: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let f = random_scalar(lat, &mut rng);
        let a = random_one_form(lat, &mut rng);
        let df = d0(lat, &f)?;
        let lhs = l2_inner(lat, &df, &a)?;
        let rhs = l2_inner(lat, &f, &codiff1(lat, &a)?)?;
        worst = worst.max(adjoint_defect(lhs, rhs, l2_norm(lat, &df)?, l2_norm(lat, &a)?));
    }
    Ok(CheckResult::upper("d0 / codiff1 adjoint", worst, 1e-12))
}

pub fn adjoint_d1(lat: &Lattice, samples: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let a = random_one_form(lat, &mut rng);
        let w = TwoForm::from_fn(lat, |_, _| rng.random_range(-1.0..1.0));
        let da = d1(lat, &a)?;
        let lhs = l2_inner(lat, &da, &w)?;
        let rhs = l2_inner(lat, &a, &codiff2(lat, &w)?)?;
        worst = worst.max(adjoint_defect(lhs, rhs, l2_norm(lat, &da)?, l2_norm(lat, &w)?));
    }
    Ok(CheckResult::upper("d1 / codiff2 adjoint", worst, 1e-12))
}

fn random_flux_cfg(lat: &Lattice, seed: u64) -> Result<Configuration> {
    random_configuration(lat, seed, Amplitudes { a: 1.5, phi: 1.0 })?
        .with_flux(FluxMatrix::single(0, 2, 1))
}

pub fn adjoint_dirac(tbl: &CliffordTable, lat: &Lattice, samples: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let cfg = random_flux_cfg(lat, seed.wrapping_mul(1000).wrapping_add(i as u64))?;
        let conn = Connection::new(&cfg)?;
        let psi = random_spinor_field(lat, &mut rng);
        let dphi = conn.dirac(tbl, &cfg.spinor)?;
        let lhs = spinor_inner(lat, &dphi, &psi)?;
        let rhs = spinor_inner(lat, &cfg.spinor, &conn.dirac_adjoint(tbl, &psi)?)?;
        let scale = l2_norm(lat, &dphi)? * l2_norm(lat, &psi)?;
        worst = worst.max((lhs - rhs).norm() / scale);
    }
    Ok(CheckResult::upper("dirac adjoint", worst, 1e-12))
}

pub fn adjoint_nabla(lat: &Lattice, samples: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let cfg = random_flux_cfg(lat, seed.wrapping_mul(1000).wrapping_add(i as u64))?;
        let conn = Connection::new(&cfg)?;
        // one spinor per link, viewed as a field on 4x as many fibers
        let w: Vec<Spinor> = (0..4 * lat.sites()).map(|_| random_spinor(&mut rng)).collect();
        let nabla = PlusField::new(conn.nabla(&cfg.spinor)?.0);
        let back = conn.nabla_adjoint(&CovariantDerivative(w.clone()))?;
        let w = PlusField::new(w);
        let flat = Lattice::new([4 * lat.dims()[0], lat.dims()[1], lat.dims()[2], lat.dims()[3]], lat.spacing())?;
        let lhs = spinor_inner(&flat, &nabla, &w)?;
        let rhs = spinor_inner(lat, &cfg.spinor, &back)?;
        let scale = l2_norm(&flat, &nabla)? * l2_norm(&flat, &w)?;
        worst = worst.max((lhs - rhs).norm() / scale);
    }
    Ok(CheckResult::upper("covariant derivative adjoint", worst, 1e-12))
}

fn random_transform(lat: &Lattice, rng: &mut impl Rng) -> GaugeTransform {
    GaugeTransform {
        zeta: ScalarField::from_fn(lat, |_, _| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)),
        winding: std::array::from_fn(|_| rng.random_range(-2..=2)),
    }
}

pub fn gauge_invariance(tbl: &CliffordTable, lat: &Lattice, samples: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cfg = random_flux_cfg(lat, seed)?;
    cfg.gauge.a = cfg.gauge.a.scale(0.3);
    cfg.scalar_curvature = random_scalar(lat, &mut rng);
    let ew = energy_weitzenbock(&cfg)?;
    let e1 = energy_first_order_with(tbl, &cfg)?;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let moved = apply_gauge(&random_transform(lat, &mut rng), &cfg)?;
        worst = worst.max((energy_weitzenbock(&moved)? - ew).abs() / ew.abs());
        worst = worst.max((energy_first_order_with(tbl, &moved)? - e1).abs() / e1.abs());
    }
    Ok(CheckResult::upper("gauge invariance", worst, 1e-10))
}

pub fn gradient_fd(lat: &Lattice, directions: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cfg = random_flux_cfg(lat, seed)?;
    cfg.gauge.a = cfg.gauge.a.scale(0.3);
    cfg.scalar_curvature = random_scalar(lat, &mut rng);
    let err = fd_gradient_check(&cfg, 1e-5, directions, seed)?;
    Ok(CheckResult::upper("gradient vs finite differences", err, 1e-5))
}

fn fixed_samples(lat: &Lattice, samples: usize, seed: u64) -> Result<Vec<(Configuration, Configuration)>> {
    (0..samples)
        .map(|i| {
            let cfg = random_flux_cfg(lat, seed.wrapping_mul(1000).wrapping_add(i as u64))?;
            let (fixed, _) = full_gauge_fix(&cfg)?;
            Ok((cfg, fixed))
        })
        .collect()
}

pub fn coulomb_residual(lat: &Lattice, samples: usize, seed: u64) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for (_, fixed) in fixed_samples(lat, samples, seed)? {
        worst = worst.max(l2_norm(lat, &codiff1(lat, &fixed.gauge.a)?)?);
    }
    Ok(CheckResult::upper("coulomb residual", worst, 1e-8))
}

pub fn fundamental_domain(lat: &Lattice, samples: usize, seed: u64) -> Result<CheckResult> {
    let outside = fixed_samples(lat, samples, seed)?
        .iter()
        .filter(|(_, fixed)| !in_fundamental_domain(lat, &fixed.gauge.a))
        .count();
    Ok(CheckResult::upper("fundamental domain violations", outside as f64, 0.0))
}

pub fn gaugefix_idempotent(lat: &Lattice, samples: usize, seed: u64) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for (_, fixed) in fixed_samples(lat, samples, seed)? {
        let (again, _) = full_gauge_fix(&fixed)?;
        worst = worst
            .max(again.gauge.a.max_abs_diff(&fixed.gauge.a))
            .max(again.spinor.max_abs_diff(&fixed.spinor));
    }
    Ok(CheckResult::upper("gauge fix idempotent", worst, 1e-10))
}

pub fn pure_gauge(lat: &Lattice, samples: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let g = random_transform(lat, &mut rng);
        let moved = apply_gauge(&g, &Configuration::zero(lat))?;
        let (fixed, _) = full_gauge_fix(&moved)?;
        worst = worst.max(fixed.gauge.a.0.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    Ok(CheckResult::upper("pure gauge reduces to a = 0", worst, 1e-10))
}

/// Smallest slack of the Hodge bound over gauge-fixed flux-0 samples of
/// increasing amplitude. Passes when no sample violates the bound.
pub fn hodge_bound(lat: &Lattice, samples: usize, seed: u64) -> Result<CheckResult> {
    let mut worst = f64::INFINITY;
    for i in 0..samples {
        let amp = 0.1 + 3.0 * i as f64 / samples as f64;
        let cfg = random_configuration(lat, seed.wrapping_mul(1000).wrapping_add(i as u64), Amplitudes { a: amp, phi: 0.0 })?;
        let (fixed, _) = full_gauge_fix(&cfg)?;
        worst = worst.min(hodge_bound_slack(&fixed)?);
    }
    Ok(CheckResult::lower("hodge bound slack", worst, 0.0))
}

/// Largest deviation from `2 pi n` of the curvature integrated over each
/// coordinate-plane slice, for a background with unit flux in the 0-1 plane.
pub fn flux_quantization(lat: &Lattice) -> Result<CheckResult> {
    let flux = FluxMatrix::single(0, 1, 1);
    let mut cfg = Configuration::zero(lat).with_flux(flux)?;
    // a smooth fluctuation must not change the integrals
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    cfg.gauge.a = random_one_form(lat, &mut rng);
    let f = crate::operators::curvature(&cfg)?;
    let h2 = lat.spacing().powi(2);
    let dims = lat.dims();
    let mut worst: f64 = 0.0;
    for (p, &(mu, nu)) in PLANES.iter().enumerate() {
        let target = std::f64::consts::TAU * flux.0[mu][nu] as f64;
        // fix the transverse coordinates and sum over the (mu, nu) slice
        let mut slices = std::collections::HashMap::<[usize; 4], crate::sum::Neumaier>::new();
        for x in 0..lat.sites() {
            let mut key = lat.coords(x);
            key[mu] = 0;
            key[nu] = 0;
            slices.entry(key).or_default().add(f.at(x, p) * h2);
        }
        debug_assert_eq!(slices.len(), lat.sites() / (dims[mu] * dims[nu]));
        for s in slices.values() {
            worst = worst.max((s.value() - target).abs());
        }
    }
    Ok(CheckResult::upper("flux quantization", worst, 1e-10))
}

/// Ratio of the Weitzenbock defect norms of one smooth continuum sample at
/// 4^4 and 8^4 on a torus of side 4.
pub fn weitzenbock_contraction(tbl: &CliffordTable, seed: u64) -> Result<CheckResult> {
    let amp = Amplitudes { a: 0.2, phi: 1.0 };
    let defect = |n: usize| -> Result<f64> {
        let lat = Lattice::cubic(n, 4.0 / n as f64)?;
        let cfg = smooth_configuration(&lat, seed, amp)?;
        let d = weitzenbock_defect(tbl, &cfg)?;
        l2_norm(&lat, &d)
    };
    Ok(CheckResult::lower("weitzenbock defect contraction", defect(4)? / defect(8)?, 1.5))
}

/// Ratio of `|E_1 - E_W|` at 4^4 and 8^4 for one smooth continuum sample.
pub fn energy_gap_contraction(tbl: &CliffordTable, seed: u64) -> Result<CheckResult> {
    Ok(CheckResult::lower("energy gap contraction", energy_gap_ratio(tbl, seed)?, 1.5))
}

pub fn energy_gap_ratio(tbl: &CliffordTable, seed: u64) -> Result<f64> {
    let amp = Amplitudes { a: 0.2, phi: 1.0 };
    let gap = |n: usize| -> Result<f64> {
        let lat = Lattice::cubic(n, 4.0 / n as f64)?;
        let cfg = smooth_configuration(&lat, seed, amp)?;
        Ok((energy_first_order_with(tbl, &cfg)? - energy_weitzenbock(&cfg)?).abs())
    };
    Ok(gap(4)? / gap(8)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_suite_passes_with_standard_table() {
        let results = run_checks(Level::Fast, &standard_table());
        for r in &results {
            assert!(r.passed, "{r}");
        }
        assert!(results.len() >= 15);
    }

    #[test]
    fn full_suite_passes_and_reports_refinement() {
        let results = run_checks(Level::Full, &standard_table());
        for r in &results {
            assert!(r.passed, "{r}");
        }
        assert!(results.iter().any(|r| r.name.starts_with("weitzenbock defect contraction")));
    }

    #[test]
    fn corrupted_table_fails_clifford_check() {
        let results = run_checks(Level::Fast, &corrupted_table());
        let clifford = results.iter().find(|r| r.name == "clifford relation").unwrap();
        assert!(!clifford.passed);
        assert!(clifford.measured > 1e-3);
    }

    #[test]
    fn level_parsing() {
        assert_eq!("fast".parse::<Level>().unwrap(), Level::Fast);
        assert_eq!("full".parse::<Level>().unwrap(), Level::Full);
        assert!("medium".parse::<Level>().is_err());
    }

    #[test]
    fn nan_measurements_fail() {
        assert!(!CheckResult::upper("x", f64::NAN, 1.0).passed);
        assert!(!CheckResult::lower("x", f64::NAN, 1.0).passed);
    }
}
