//! Orthogonal-distance circle fit by Levenberg-Marquardt.
//!
//! Minimizes `sum (r_i - R)^2` directly in the natural parameters
//! `(a, b, R)`. This is the maximum-likelihood estimate under isotropic
//! Gaussian noise. The solver is a plain damped Gauss-Newton iteration:
//! steps that fail to decrease the objective (or drive `R <= 0`) are
//! rejected and the damping multiplied up.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::Serialize;

use crate::alg::fit_algebraic;
use crate::error::{Error, Result};
use crate::geom::{objective_geometric, CircleGeom, PointSet};
use crate::Method;

/// Levenberg-Marquardt solver settings.
#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Per-point gradient tolerance; convergence is declared when
    /// `||J^T r|| <= gradient_tol * n`.
    pub gradient_tol: f64,
    pub step_tol: f64,
    pub initial_damping: f64,
    pub damping_factor: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iterations: 100,
            gradient_tol: 1e-12,
            step_tol: 1e-12,
            initial_damping: 1e-3,
            damping_factor: 10.0,
        }
    }
}

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Termination {
    Gradient,
    Step,
    MaxIter,
}

/// Outcome of a geometric fit.
#[derive(Debug, Clone, Serialize)]
pub struct LmReport {
    pub circle: CircleGeom,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
}

/// Residual vector `r_i - R` and its 3-column Jacobian with rows
/// `(-u_i, -v_i, -1)`, `u_i = (x_i - a)/r_i`, `v_i = (y_i - b)/r_i`.
pub fn residuals_jacobian(ps: &PointSet, c: &CircleGeom) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = ps.len();
    let mut r = DVector::zeros(n);
    let mut j = DMatrix::zeros(n, 3);
    for (i, p) in ps.iter().enumerate() {
        let dx = p.x - c.a;
        let dy = p.y - c.b;
        let ri = (dx * dx + dy * dy).sqrt();
        if ri == 0.0 {
            return Err(Error::SingularGeometry);
        }
        r[i] = ri - c.r;
        j[(i, 0)] = -dx / ri;
        j[(i, 1)] = -dy / ri;
        j[(i, 2)] = -1.0;
    }
    Ok((r, j))
}

/// Minimizes the sum of squared orthogonal distances starting from `init`.
///
/// Failure to converge within `max_iterations` is reported through
/// `converged = false`, not an error.
pub fn fit_geometric(ps: &PointSet, init: &CircleGeom, opts: &LmOptions) -> Result<LmReport> {
    ps.require_min_points(3)?;
    let n = ps.len() as f64;
    let grad_threshold = opts.gradient_tol * n;

    let mut theta = Vector3::new(init.a, init.b, init.r);
    let mut circle = *init;
    let mut objective = objective_geometric(ps, &circle);
    let mut damping = opts.initial_damping;
    let mut termination = Termination::MaxIter;
    let mut iterations = 0;

    for iter in 0..opts.max_iterations {
        iterations = iter;
        let (r, j) = residuals_jacobian(ps, &circle)?;
        let grad = j.tr_mul(&r);
        if grad.norm() <= grad_threshold {
            termination = Termination::Gradient;
            break;
        }
        let jtj = j.tr_mul(&j);
        let mut hess = Matrix3::zeros();
        for a in 0..3 {
            for b in 0..3 {
                hess[(a, b)] = jtj[(a, b)];
            }
        }
        let g = Vector3::new(grad[0], grad[1], grad[2]);

        // inner loop: inflate damping until a step is accepted
        let mut accepted = false;
        for _ in 0..64 {
            let lhs = hess + Matrix3::identity() * damping;
            let step = match lhs.lu().solve(&(-g)) {
                Some(s) => s,
                None => {
                    damping *= opts.damping_factor;
                    continue;
                }
            };
            if step.norm() <= opts.step_tol {
                termination = Termination::Step;
                accepted = false;
                break;
            }
            let cand = theta + step;
            if cand.z <= 0.0 {
                damping *= opts.damping_factor;
                continue;
            }
            let cand_circle = CircleGeom {
                a: cand.x,
                b: cand.y,
                r: cand.z,
            };
            let cand_obj = objective_geometric(ps, &cand_circle);
            if cand_obj < objective {
                theta = cand;
                circle = cand_circle;
                objective = cand_obj;
                damping = (damping / opts.damping_factor).max(1e-15);
                accepted = true;
                break;
            }
            damping *= opts.damping_factor;
        }
        if termination == Termination::Step {
            break;
        }
        if !accepted {
            // damping exhausted without progress: treat as a step-size stop
            termination = Termination::Step;
            break;
        }
        iterations = iter + 1;
    }

    let converged = termination != Termination::MaxIter;
    Ok(LmReport {
        circle,
        objective,
        iterations,
        converged,
        termination,
    })
}

/// Initial guess for the geometric fit: Hyper, falling back to Taubin and
/// then Kasa if a fit degenerates to a line.
pub fn default_init(ps: &PointSet) -> Result<CircleGeom> {
    for method in [Method::Hyper, Method::Taubin, Method::Kasa] {
        if let Ok(fit) = fit_algebraic(ps, method) {
            if let Some(c) = fit.circle.as_circle() {
                return Ok(*c);
            }
        }
    }
    Err(Error::DegenerateData(
        "every algebraic initializer returned a line".into(),
    ))
}
