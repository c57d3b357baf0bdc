//! Energy minimization by steepest descent or nonlinear conjugate gradients
//! with Armijo backtracking, plus convergence diagnostics modulo gauge.
//!
//! Search directions are tangent vectors `(delta_a, delta_phi)` stored in a
//! [`Gradient`]. Slopes and conjugacy use the same real pairing as the
//! gradient, so `-gradient` is the steepest direction.
//!
//! Close to a minimum the Armijo decrease drops below the rounding error of
//! the energy itself. The line search then falls back to the approximate
//! Armijo test of Hager and Zhang: the energy may not rise by more than a few
//! ulps, and the slope at the trial point must satisfy
//! `phi'(t) <= (2 delta - 1) phi'(0)`, which is computed from gradients and
//! stays accurate. Before settling for a trial in that regime, one secant
//! step on `phi'` is tried. The test alone admits steps up to about twice the
//! line minimum, and for the stiffest modes such steps make no progress at all.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Configuration, GaugeTransform};
use crate::functional::{energy_and_gradient, excess_report, pairing, Gradient};
use crate::gaugefix::{full_gauge_fix, gauge_distance};
use crate::lattice::Lattice;

const MAX_BACKTRACKS: usize = 60;
/// `delta` of the approximate Armijo test.
const APPROX_DELTA: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Descent,
    Conjugate,
}

/// How a trial step is accepted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepRule {
    /// Backtrack until the Armijo condition holds.
    Armijo,
    /// Take `initial_step` unconditionally. Voids the monotonicity
    /// guarantee; meant for adversarial diagnostics only.
    Fixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinimizeParams {
    pub max_iters: usize,
    /// Stop once `sqrt(||da||^2 + ||dphi||^2) <= grad_tol`.
    pub grad_tol: f64,
    pub armijo_c: f64,
    pub backtrack: f64,
    pub initial_step: f64,
    pub method: Method,
    /// Replace the iterate by its [`full_gauge_fix`] image every `k` iterations; 0 disables.
    pub gaugefix_every: usize,
    pub record_every: usize,
    pub step_rule: StepRule,
}

impl Default for MinimizeParams {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            grad_tol: 1e-6,
            armijo_c: 1e-4,
            backtrack: 0.5,
            initial_step: 1.0,
            method: Method::Conjugate,
            gaugefix_every: 10,
            record_every: 1,
            step_rule: StepRule::Armijo,
        }
    }
}

impl MinimizeParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.grad_tol > 0.0 && self.grad_tol.is_finite()) {
            return bad("grad_tol must be positive");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c must lie in (0, 1)");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtrack must lie in (0, 1)");
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return bad("initial_step must be positive");
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIters,
    LineSearchFailure,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::MaxIters => "max_iters",
            Self::LineSearchFailure => "line_search_failure",
        }
    }
}

/// One recorded iterate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub iter: usize,
    pub energy: f64,
    pub grad_norm: f64,
    pub phi_linf: f64,
    pub excess_measure: f64,
    pub radial_excess: f64,
    /// [`gauge_distance`] to the previous recorded iterate; 0 for the first.
    pub gauge_step_distance: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub records: Vec<Record>,
    pub final_config: Configuration,
    pub termination: Termination,
    /// Number of accepted steps.
    pub iterations: usize,
}

impl Trajectory {
    pub fn last(&self) -> &Record {
        self.records.last().expect("a trajectory records its final iterate")
    }
}

/// Accepted step of [`line_search`].
#[derive(Clone, Debug)]
pub struct LineStep {
    pub step: f64,
    pub config: Configuration,
    pub energy: f64,
    pub gradient: Gradient,
    pub backtracks: usize,
}

fn displaced(cfg: &Configuration, dir: &Gradient, t: f64) -> Configuration {
    let mut out = cfg.clone();
    out.gauge.a = out.gauge.a.axpy(t, &dir.da);
    out.spinor = out.spinor.axpy(t, &dir.dphi);
    out
}

/// Backtracking search along `direction` from `params.initial_step`.
///
/// Accepts the first trial with
/// `E(new) <= E(cfg) + armijo_c * step * slope`, where `slope < 0` is the
/// pairing of the gradient with `direction`, or one passing the approximate
/// test described in the module docs. Returns `Ok(None)` after 60 rejected
/// trials and [`Error::NotDescent`] when the slope is not negative.
pub fn line_search(
    cfg: &Configuration,
    direction: &Gradient,
    params: &MinimizeParams,
) -> Result<Option<LineStep>> {
    params.validate()?;
    let (energy, grad) = energy_and_gradient(cfg)?;
    search(cfg, energy, &grad, direction, params, params.initial_step)
}

fn search(
    cfg: &Configuration,
    energy: f64,
    grad: &Gradient,
    dir: &Gradient,
    params: &MinimizeParams,
    start: f64,
) -> Result<Option<LineStep>> {
    let lat = &cfg.lattice;
    let slope = pairing(lat, grad, &dir.da, &dir.dphi)?;
    if !(slope < 0.0) {
        return Err(Error::NotDescent { pairing: slope });
    }
    let noise = 4.0 * f64::EPSILON * energy.abs();
    let trial = |t: f64| -> Result<(Configuration, f64, Gradient, f64)> {
        let config = displaced(cfg, dir, t);
        match energy_and_gradient(&config) {
            Ok((e, g)) if e.is_finite() && g.is_finite() => {
                let s = pairing(lat, &g, &dir.da, &dir.dphi)?;
                Ok((config, e, g, s))
            }
            // overshooting into non-finite fields counts as a rejected trial
            Ok(_) | Err(Error::NonFinite(_)) => {
                Ok((config, f64::INFINITY, Gradient::zeros(lat), f64::INFINITY))
            }
            Err(err) => Err(err),
        }
    };
    let approx_ok = |e: f64, s: f64| e <= energy + noise && s <= (2.0 * APPROX_DELTA - 1.0) * slope;
    let mut t = start;
    for backtracks in 0..=MAX_BACKTRACKS {
        let (config, e, g, s) = trial(t)?;
        let done = |config, e, gradient, step| {
            Ok(Some(LineStep { step, config, energy: e, gradient, backtracks }))
        };
        if params.step_rule == StepRule::Fixed {
            return if e.is_finite() { done(config, e, g, t) } else { Ok(None) };
        }
        if e <= energy + params.armijo_c * t * slope {
            return done(config, e, g, t);
        }
        if e <= energy + noise {
            // energies are unreliable here but slopes are not: one secant
            // step on phi' lands on the line minimum of the quadratic model
            if s > slope {
                let ts = t * slope / (slope - s);
                let (cs, es, gs, ss) = trial(ts)?;
                if approx_ok(es, ss) {
                    return done(cs, es, gs, ts);
                }
            }
            if approx_ok(e, s) {
                return done(config, e, g, t);
            }
        }
        t *= params.backtrack;
    }
    Ok(None)
}

/// Apply a gauge transform to a tangent or cotangent vector at a
/// configuration: link parts are invariant, spinor parts rotate with `phi`.
fn transform_vector(lat: &Lattice, g: &GaugeTransform, v: &mut Gradient) {
    for x in 0..lat.sites() {
        v.dphi.data[x] *= Complex64::from_polar(1.0, -g.phase(lat, x));
    }
}

fn neg(g: &Gradient) -> Gradient {
    Gradient {
        da: g.da.scale(-1.0),
        dphi: g.dphi.scale(Complex64::new(-1.0, 0.0)),
    }
}

/// `<g1, g2>` in the metric of the pairing.
fn metric(lat: &Lattice, g1: &Gradient, g2: &Gradient) -> Result<f64> {
    pairing(lat, g1, &g2.da, &g2.dphi)
}

struct Recorder {
    every: usize,
    records: Vec<Record>,
    previous: Option<Configuration>,
}

impl Recorder {
    fn push(&mut self, iter: usize, cfg: &Configuration, energy: f64, grad_norm: f64) -> Result<()> {
        let excess = excess_report(cfg)?;
        let gauge_step_distance = match &self.previous {
            Some(prev) => match gauge_distance(prev, cfg) {
                Ok(d) => d,
                // fields too large to normalize: the sequence is not Cauchy
                Err(Error::NonFinite(_)) => f64::INFINITY,
                Err(e) => return Err(e),
            },
            None => 0.0,
        };
        self.records.push(Record {
            iter,
            energy,
            grad_norm,
            phi_linf: cfg.phi_linf(),
            excess_measure: excess.excess_measure,
            radial_excess: excess.radial_excess,
            gauge_step_distance,
        });
        self.previous = Some(cfg.clone());
        Ok(())
    }
}

/// Minimize [`energy_weitzenbock`] from `cfg0`. Deterministic in its inputs.
pub fn minimize(cfg0: &Configuration, params: &MinimizeParams) -> Result<Trajectory> {
    params.validate()?;
    cfg0.validate()?;
    let lat = cfg0.lattice.clone();
    let mut cfg = cfg0.clone();
    let mut rec = Recorder {
        every: params.record_every,
        records: Vec::new(),
        previous: None,
    };
    let (mut energy, mut grad) = energy_and_gradient(&cfg)?;
    let mut grad_norm = grad.norm(&lat);
    let mut direction: Option<Gradient> = None;
    let mut prev_grad: Option<Gradient> = None;
    let mut step = params.initial_step;
    let mut iter = 0;

    let termination = loop {
        let recorded = iter % rec.every == 0;
        if recorded {
            rec.push(iter, &cfg, energy, grad_norm)?;
        }
        let done = if grad_norm <= params.grad_tol {
            Some(Termination::Converged)
        } else if iter >= params.max_iters {
            Some(Termination::MaxIters)
        } else {
            None
        };
        if let Some(reason) = done {
            if !recorded {
                rec.push(iter, &cfg, energy, grad_norm)?;
            }
            break reason;
        }

        let steepest = neg(&grad);
        let mut dir = match (params.method, &direction, &prev_grad) {
            (Method::Conjugate, Some(d), Some(g0)) => {
                // Polak-Ribiere with nonnegative beta
                let num = metric(&lat, &grad, &grad)? - metric(&lat, &grad, g0)?;
                let beta = (num / metric(&lat, g0, g0)?).max(0.0);
                Gradient {
                    da: steepest.da.axpy(beta, &d.da),
                    dphi: steepest.dphi.axpy(beta, &d.dphi),
                }
            }
            _ => steepest.clone(),
        };
        if pairing(&lat, &grad, &dir.da, &dir.dphi)? >= 0.0 {
            dir = steepest;
        }

        let start = match params.step_rule {
            StepRule::Armijo => (step / params.backtrack).min(params.initial_step),
            StepRule::Fixed => params.initial_step,
        };
        let accepted = match search(&cfg, energy, &grad, &dir, params, start)? {
            Some(s) => s,
            None => {
                if !recorded {
                    rec.push(iter, &cfg, energy, grad_norm)?;
                }
                break Termination::LineSearchFailure;
            }
        };
        step = accepted.step;
        cfg = accepted.config;
        energy = accepted.energy;
        iter += 1;
        prev_grad = Some(std::mem::replace(&mut grad, accepted.gradient));
        direction = Some(dir);

        if params.gaugefix_every > 0 && iter % params.gaugefix_every == 0 {
            let (fixed, report) = full_gauge_fix(&cfg)?;
            let (after, g_after) = energy_and_gradient(&fixed)?;
            let drift = (after - energy).abs() / (1.0 + energy.abs());
            if drift > 1e-10 {
                return Err(Error::GaugeDrift { drift });
            }
            let g = report.transform();
            for v in [&mut direction, &mut prev_grad].into_iter().flatten() {
                transform_vector(&lat, &g, v);
            }
            cfg = fixed;
            energy = after;
            grad = g_after;
        }
        grad_norm = grad.norm(&lat);
    };

    Ok(Trajectory {
        records: rec.records,
        final_config: cfg,
        termination,
        iterations: iter,
    })
}

/// Convergence-modulo-gauge summary of a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsDiagnostics {
    /// Gauge distances between successive recorded iterates.
    pub distances: Vec<f64>,
    pub first_quartile_mean: f64,
    pub last_quartile_mean: f64,
    /// `first_quartile_mean / last_quartile_mean`; infinite when the tail is 0.
    pub quartile_ratio: f64,
    /// Per-step ratio of a least-squares geometric fit to the nonzero
    /// distances in the second half of the trajectory; 0 when they all vanish.
    pub geometric_ratio: f64,
    /// Second-half distances decay geometrically and the last quartile does
    /// not exceed the first: the steps form a Cauchy sequence.
    pub summable: bool,
    pub final_radial_excess: f64,
}

pub fn ps_diagnostics(traj: &Trajectory) -> Result<PsDiagnostics> {
    if traj.records.len() < 3 {
        return Err(Error::TrajectoryTooShort(traj.records.len()));
    }
    let d: Vec<f64> = traj.records[1..].iter().map(|r| r.gauge_step_distance).collect();
    let q = (d.len() / 4).max(1);
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let first = mean(&d[..q]);
    let last = mean(&d[d.len() - q..]);
    let quartile_ratio = if last > 0.0 {
        first / last
    } else if first > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };

    let half = &d[d.len() / 2..];
    let pts: Vec<(f64, f64)> = half
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(i, &v)| (i as f64, v.ln()))
        .collect();
    let geometric_ratio = if pts.is_empty() {
        0.0
    } else if pts.len() == 1 {
        // a lone nonzero step followed by zeros
        if half.last() == Some(&0.0) { 0.0 } else { 1.0 }
    } else {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        (sxy / sxx).exp()
    };
    let finite = d.iter().all(|v| v.is_finite());
    Ok(PsDiagnostics {
        summable: finite && geometric_ratio < 1.0 && last <= first,
        distances: d,
        first_quartile_mean: first,
        last_quartile_mean: last,
        quartile_ratio,
        geometric_ratio,
        final_radial_excess: traj.last().radial_excess,
    })
}
