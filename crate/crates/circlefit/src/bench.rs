//! Deterministic Monte Carlo benchmark harness.
//!
//! Generates true points on an arc, perturbs them with i.i.d. Gaussian
//! noise, fits every requested method, and aggregates the radius errors
//! into an MSE decomposition per method.
//!
//! Reproducibility contract: the noise stream is a pure function of
//! `(seed, trial, point index, coordinate index)`, and trial results are
//! accumulated in fixed chunk order, so a report depends only on the
//! config — never on thread count or scheduling.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{breakdown_from_total, MseBreakdown, TruePointFrame};
use crate::error::{Error, Result};
use crate::fitter::Registry;
use crate::geom::{CircleGeom, Point, PointSet};
use crate::Method;

/// A Monte Carlo experiment: truth, sampling geometry, noise, and methods.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub sigma: f64,
    pub circle: CircleGeom,
    /// Total angular span of the arc, in degrees, in (0, 360].
    pub arc_degrees: f64,
    /// Direction of the arc midpoint, in degrees.
    pub arc_center_degrees: f64,
    pub trials: u64,
    pub seed: u64,
    pub methods: Vec<Method>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 100,
            sigma: 0.05,
            circle: CircleGeom {
                a: 0.0,
                b: 0.0,
                r: 1.0,
            },
            arc_degrees: 180.0,
            arc_center_degrees: 0.0,
            trials: 10_000,
            seed: 1,
            methods: Method::ALL.to_vec(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidInput("n must be at least 3".into()));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidInput("sigma must be finite and >= 0".into()));
        }
        if !(self.arc_degrees > 0.0 && self.arc_degrees <= 360.0) {
            return Err(Error::InvalidInput(
                "arc_degrees must lie in (0, 360]".into(),
            ));
        }
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidInput("methods must be non-empty".into()));
        }
        Ok(())
    }
}

/// Parses a flat `key = value` config file. Lines starting with `#` and
/// blank lines are ignored. Recognized keys: `n`, `sigma`, `radius`,
/// `center_x`, `center_y`, `arc_degrees`, `arc_center_degrees`, `trials`,
/// `seed`, `methods` (comma-separated tags). Unrecognized keys are errors.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let (mut cx, mut cy, mut radius) = (cfg.circle.a, cfg.circle.b, cfg.circle.r);
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidInput(format!("config line {}: expected key = value", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        let bad = |what: &str| {
            Error::InvalidInput(format!(
                "config key '{key}': invalid {what} value '{value}'"
            ))
        };
        match key {
            "n" => cfg.n = value.parse().map_err(|_| bad("integer"))?,
            "sigma" => cfg.sigma = value.parse().map_err(|_| bad("real"))?,
            "radius" => radius = value.parse().map_err(|_| bad("real"))?,
            "center_x" => cx = value.parse().map_err(|_| bad("real"))?,
            "center_y" => cy = value.parse().map_err(|_| bad("real"))?,
            "arc_degrees" => cfg.arc_degrees = value.parse().map_err(|_| bad("real"))?,
            "arc_center_degrees" => {
                cfg.arc_center_degrees = value.parse().map_err(|_| bad("real"))?
            }
            "trials" => cfg.trials = value.parse().map_err(|_| bad("integer"))?,
            "seed" => cfg.seed = value.parse().map_err(|_| bad("integer"))?,
            "methods" => {
                cfg.methods = value
                    .split(',')
                    .map(|s| s.parse())
                    .collect::<Result<Vec<Method>>>()?;
            }
            other => return Err(Error::InvalidInput(format!("unknown config key '{other}'"))),
        }
    }
    cfg.circle = CircleGeom::new(cx, cy, radius)?;
    cfg.validate()?;
    Ok(cfg)
}

/// True points equally spaced on the configured arc.
///
/// For a partial arc the angles include both endpoints:
/// `phi_i = center + span * ((i - (n-1)/2) / (n-1))`. For exactly 360
/// degrees the samples are `phi_i = center + 2 pi i / n` so the seam point
/// is not duplicated.
pub fn generate_arc_points(cfg: &ExperimentConfig) -> Result<TruePointFrame> {
    cfg.validate()?;
    let center = cfg.arc_center_degrees.to_radians();
    let span = cfg.arc_degrees.to_radians();
    let n = cfg.n;
    let angles: Vec<f64> = if cfg.arc_degrees == 360.0 {
        (0..n)
            .map(|i| center + 2.0 * std::f64::consts::PI * i as f64 / n as f64)
            .collect()
    } else {
        (0..n)
            .map(|i| center + span * ((i as f64 - (n as f64 - 1.0) / 2.0) / (n as f64 - 1.0)))
            .collect()
    };
    Ok(TruePointFrame::new(cfg.circle, angles))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Perturbs the true points with i.i.d. N(0, sigma^2) noise on each
/// coordinate. The generator is keyed on `(seed, trial)` and consumed in
/// point order (x before y), so the output is a bit-exact function of the
/// arguments.
pub fn perturb(frame: &TruePointFrame, sigma: f64, seed: u64, trial: u64) -> PointSet {
    let key = splitmix64(seed ^ splitmix64(trial));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    let c = &frame.circle;
    let points: Vec<Point> = frame
        .angles
        .iter()
        .map(|&phi| {
            let dx: f64 = rng.sample(StandardNormal);
            let dy: f64 = rng.sample(StandardNormal);
            Point::new(
                c.a + c.r * phi.cos() + sigma * dx,
                c.b + c.r * phi.sin() + sigma * dy,
            )
        })
        .collect();
    PointSet::new(points).expect("Gaussian perturbations are finite")
}

/// Per-method aggregate over the completed trials.
#[derive(Debug, Clone, Serialize)]
pub struct MethodRow {
    pub breakdown: MseBreakdown,
    /// Empirical mean of the radius error, an estimate of the bias.
    pub mean_error: f64,
    pub trials_used: u64,
    pub excluded_trials: u64,
    /// Set when more than 1% of trials failed for this method.
    pub warning: bool,
}

/// Report of one experiment: config echo plus one row per method.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<MethodRow>,
    pub trials_completed: u64,
    pub elapsed_seconds: f64,
}

#[derive(Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

#[derive(Clone, Copy, Default)]
struct Acc {
    sq: Kahan,
    err: Kahan,
    used: u64,
    excluded: u64,
}

const CHUNK: u64 = 1024;

fn run_trial(registry: &Registry, ps: &PointSet, method: Method, r_true: f64, acc: &mut Acc) {
    let fitter = registry
        .get(method.name())
        .expect("default registry covers every method");
    let estimate = match fitter.fit(ps) {
        Ok(fit) => {
            if fit.diagnostics.converged == Some(false) {
                None
            } else {
                fit.circle.as_circle().copied()
            }
        }
        Err(_) => None,
    };
    match estimate {
        Some(c) => {
            let e = c.r - r_true;
            acc.sq.add(e * e);
            acc.err.add(e);
            acc.used += 1;
        }
        None => acc.excluded += 1,
    }
}

/// Runs the experiment: `trials` independent noisy samples, every method
/// fit to each, radius errors aggregated into an [`MseBreakdown`] per
/// method.
///
/// Trials where a fit fails (degenerate data, a line instead of a circle,
/// or a non-converged geometric fit) are excluded from that method's
/// averages and counted in `excluded_trials`; a method whose failure rate
/// exceeds 1% has its row flagged with `warning`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let frame = generate_arc_points(cfg)?;
    let registry = Registry::with_defaults();
    let k = cfg.methods.len();
    let r_true = cfg.circle.r;

    let n_chunks = cfg.trials.div_ceil(CHUNK);
    let partials: Vec<Vec<Acc>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CHUNK;
            let hi = (lo + CHUNK).min(cfg.trials);
            let mut accs = vec![Acc::default(); k];
            for trial in lo..hi {
                let ps = perturb(&frame, cfg.sigma, cfg.seed, trial);
                for (j, &method) in cfg.methods.iter().enumerate() {
                    run_trial(&registry, &ps, method, r_true, &mut accs[j]);
                }
            }
            accs
        })
        .collect();

    // chunk results are combined in index order: parallelism cannot change
    // the floating-point result
    let mut totals = vec![Acc::default(); k];
    for accs in &partials {
        for (t, a) in totals.iter_mut().zip(accs) {
            t.sq.add(a.sq.sum);
            t.err.add(a.err.sum);
            t.used += a.used;
            t.excluded += a.excluded;
        }
    }

    let mut rows = Vec::with_capacity(k);
    for (j, &method) in cfg.methods.iter().enumerate() {
        let t = &totals[j];
        if t.used == 0 {
            return Err(Error::Numerical(format!(
                "method {method}: every trial failed"
            )));
        }
        let total_mse = t.sq.sum / t.used as f64;
        let breakdown = breakdown_from_total(total_mse, &frame, cfg.sigma, method)?;
        rows.push(MethodRow {
            breakdown,
            mean_error: t.err.sum / t.used as f64,
            trials_used: t.used,
            excluded_trials: t.excluded,
            warning: t.excluded * 100 > cfg.trials,
        });
    }

    Ok(ExperimentReport {
        config: cfg.clone(),
        rows,
        trials_completed: cfg.trials,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}
