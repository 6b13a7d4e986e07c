//! Independent-oracle checks: every nontrivial numerical path is compared
//! against a second, dumber computation that shares no code with it.

mod common;

use nalgebra::{DVector, Matrix3x4, Vector4};
use rand::Rng;

use circlefit::alg::{constraint_matrix, fit_algebraic, MomentMatrix};
use circlefit::analysis::transition_jacobian;
use circlefit::geom::{AlgParams, CircleGeom, PointSet};
use circlefit::odr::{default_init, fit_geometric, residuals_jacobian, LmOptions};
use circlefit::{objective_geometric, Method};

use common::{alg_to_circle, arc_points, jitter, moments, pencil_oracle, random_circle, rng};

fn centered(ps: &PointSet) -> (PointSet, f64, f64) {
    let (cx, cy) = ps.centroid();
    let c =
        PointSet::from_xy(&ps.iter().map(|p| (p.x - cx, p.y - cy)).collect::<Vec<_>>()).unwrap();
    (c, cx, cy)
}

#[test]
fn pencil_oracle_matches_production_solver() {
    let mut r = rng(0x0ca1);
    for trial in 0..25 {
        let truth = random_circle(&mut r);
        let span = r.random_range(1.0..2.0 * std::f64::consts::PI);
        let n_pts = r.random_range(6..30);
        let ps = jitter(
            &arc_points(&truth, n_pts, 0.3, span),
            0.02 * truth.r,
            &mut r,
        );

        for method in [Method::Pratt, Method::Taubin, Method::Hyper] {
            let fit = fit_algebraic(&ps, method).unwrap();
            let c = fit.circle.as_circle().unwrap();

            // oracle runs on centroid-centered data so eta comparisons see
            // the same pencil the production path solved
            let (cps, cx, cy) = centered(&ps);
            let m = MomentMatrix::from_matrix(moments(&cps));
            let n = constraint_matrix(method, &m).unwrap();
            let (eta, a) = pencil_oracle(m.matrix(), &n.matrix)
                .unwrap_or_else(|| panic!("oracle failed, trial {trial} {method}"));
            let (oa, ob, or_) = alg_to_circle(&a).expect("oracle found a circle");

            assert!(
                (oa + cx - c.a).abs() < 1e-8
                    && (ob + cy - c.b).abs() < 1e-8
                    && (or_ - c.r).abs() < 1e-8,
                "trial {trial} {method}: oracle ({}, {}, {}) vs fit ({}, {}, {})",
                oa + cx,
                ob + cy,
                or_,
                c.a,
                c.b,
                c.r
            );
            let eta_fit = fit.diagnostics.eta.unwrap();
            assert!(
                (eta - eta_fit).abs() <= 1e-8 * eta.abs().max(1.0),
                "trial {trial} {method}: eta {eta} vs {eta_fit}"
            );
        }
    }
}

#[test]
fn pencil_oracle_eta_equals_objective() {
    // on the constraint surface A^T N A = 1 the objective equals eta
    let mut r = rng(0x0ca2);
    let truth = random_circle(&mut r);
    let ps = jitter(&arc_points(&truth, 15, 0.0, 3.0), 0.03, &mut r);
    let (cps, _, _) = centered(&ps);
    let m = MomentMatrix::from_matrix(moments(&cps));
    for method in [Method::Pratt, Method::Hyper] {
        let n = constraint_matrix(method, &m).unwrap();
        let (eta, a) = pencil_oracle(m.matrix(), &n.matrix).unwrap();
        let obj = (a.transpose() * m.matrix() * a)[(0, 0)];
        let cons = (a.transpose() * n.matrix * a)[(0, 0)];
        assert!((obj / cons - eta).abs() < 1e-10 * eta.max(1.0));
    }
}

fn alg_to_geom_vec(v: &Vector4<f64>) -> Option<[f64; 3]> {
    alg_to_circle(v).map(|(a, b, r)| [a, b, r])
}

fn fd_central(p: &AlgParams, h: f64) -> Matrix3x4<f64> {
    let base = p.as_vector();
    let mut j = Matrix3x4::zeros();
    for col in 0..4 {
        let mut plus = base;
        let mut minus = base;
        plus[col] += h;
        minus[col] -= h;
        let fp = alg_to_geom_vec(&plus).unwrap();
        let fm = alg_to_geom_vec(&minus).unwrap();
        for row in 0..3 {
            j[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    j
}

/// Richardson-extrapolated central differences: O(h^4) truncation error,
/// accurate enough for ill-scaled circles far from the origin.
fn fd_transition_jacobian(p: &AlgParams, h: f64) -> Matrix3x4<f64> {
    let d1 = fd_central(p, h);
    let d2 = fd_central(p, h / 2.0);
    (d2 * 4.0 - d1) / 3.0
}

#[test]
fn transition_jacobian_matches_finite_differences() {
    let mut r = rng(0x0ca3);
    for _ in 0..100 {
        // keep (a^2 + b^2)/r^2 moderate: the FD reference loses digits to
        // cancellation in the discriminant for tiny far-away circles
        let c = CircleGeom::new(
            r.random_range(-2.0..2.0),
            r.random_range(-2.0..2.0),
            r.random_range(0.5..3.0),
        )
        .unwrap();
        let v = c.to_alg().as_vector();
        let p = AlgParams::unit_norm(v.x, v.y, v.z, v.w).unwrap();
        let j = transition_jacobian(&p).unwrap();
        let fd = fd_transition_jacobian(&p, 1e-5);
        let scale = j.norm().max(1.0);
        assert!(
            (j - fd).amax() <= 1e-6 * scale,
            "J = {j}, FD = {fd}, circle {c:?}"
        );
    }
}

fn fd_residuals(ps: &PointSet, c: &CircleGeom, h: f64) -> nalgebra::DMatrix<f64> {
    let n = ps.len();
    let eval = |a: f64, b: f64, r: f64| -> DVector<f64> {
        let circle = CircleGeom { a, b, r };
        residuals_jacobian(ps, &circle).unwrap().0
    };
    let mut j = nalgebra::DMatrix::zeros(n, 3);
    let params = [c.a, c.b, c.r];
    for col in 0..3 {
        let mut plus = params;
        let mut minus = params;
        plus[col] += h;
        minus[col] -= h;
        let fp = eval(plus[0], plus[1], plus[2]);
        let fm = eval(minus[0], minus[1], minus[2]);
        for row in 0..n {
            j[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    j
}

#[test]
fn odr_jacobian_matches_finite_differences() {
    let mut r = rng(0x0ca4);
    for _ in 0..50 {
        let truth = random_circle(&mut r);
        let ps = jitter(&arc_points(&truth, 12, 1.0, 4.0), 0.05 * truth.r, &mut r);
        let at = CircleGeom::new(
            truth.a + r.random_range(-0.2..0.2),
            truth.b + r.random_range(-0.2..0.2),
            truth.r * r.random_range(0.8..1.2),
        )
        .unwrap();
        let (_, j) = residuals_jacobian(&ps, &at).unwrap();
        let fd = fd_residuals(&ps, &at, 1e-7);
        assert!((&j - &fd).amax() <= 1e-6, "deviation {}", (&j - &fd).amax());
    }
}

#[test]
fn geometric_fit_is_local_grid_minimum() {
    let mut r = rng(0x0ca5);
    for _ in 0..10 {
        let truth = random_circle(&mut r);
        let ps = jitter(&arc_points(&truth, 25, 0.0, 4.0), 0.03 * truth.r, &mut r);
        let init = default_init(&ps).unwrap();
        let report = fit_geometric(&ps, &init, &LmOptions::default()).unwrap();
        assert!(report.converged);
        let best = report.circle;
        let obj = objective_geometric(&ps, &best);
        // no point of a surrounding grid does better
        let delta = 1e-3 * truth.r;
        for da in [-delta, 0.0, delta] {
            for db in [-delta, 0.0, delta] {
                for dr in [-delta, 0.0, delta] {
                    let c = CircleGeom::new(best.a + da, best.b + db, best.r + dr).unwrap();
                    assert!(objective_geometric(&ps, &c) >= obj - 1e-12);
                }
            }
        }
    }
}
