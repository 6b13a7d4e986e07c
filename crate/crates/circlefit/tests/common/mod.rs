//! Helpers shared by the integration suites: independent oracles and
//! deterministic random generators. Everything here is a second route to
//! the library's results — none of it calls the production solver paths it
//! is used to check.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use circlefit::geom::{CircleGeom, PointSet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_circle(rng: &mut ChaCha8Rng) -> CircleGeom {
    CircleGeom::new(
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
        rng.random_range(0.2..4.0),
    )
    .unwrap()
}

/// Points on `circle` at equally spaced angles spanning `span` radians
/// around `center`, endpoints included.
pub fn arc_points(circle: &CircleGeom, n: usize, center: f64, span: f64) -> PointSet {
    let angles: Vec<f64> = (0..n)
        .map(|i| center + span * ((i as f64 - (n as f64 - 1.0) / 2.0) / (n as f64 - 1.0)))
        .collect();
    PointSet::from_xy(
        &angles
            .iter()
            .map(|&t| (circle.a + circle.r * t.cos(), circle.b + circle.r * t.sin()))
            .collect::<Vec<_>>(),
    )
    .unwrap()
}

pub fn jitter(ps: &PointSet, sigma: f64, rng: &mut ChaCha8Rng) -> PointSet {
    PointSet::from_xy(
        &ps.iter()
            .map(|p| {
                (
                    p.x + sigma * rng.sample::<f64, _>(rand_distr::StandardNormal),
                    p.y + sigma * rng.sample::<f64, _>(rand_distr::StandardNormal),
                )
            })
            .collect::<Vec<_>>(),
    )
    .unwrap()
}

/// Brute-force pencil solver for `M A = eta N A`:
///
/// 1. samples `p(eta) = det(M - eta N)` at five nodes and solves a
///    Vandermonde system for the polynomial coefficients,
/// 2. finds the roots as eigenvalues of the companion matrix,
/// 3. extracts the nullspace of `M - eta N` by SVD at each real positive
///    root, keeping candidates with `A^T N A > 0`,
/// 4. returns the smallest such eta with its vector.
pub fn pencil_oracle(m: &Matrix4<f64>, n: &Matrix4<f64>) -> Option<(f64, Vector4<f64>)> {
    let scale = m.norm() / n.norm();
    let nodes: Vec<f64> = [-2.0, -1.0, 0.0, 1.0, 2.0]
        .iter()
        .map(|&t| t * scale)
        .collect();
    let vander = DMatrix::from_fn(5, 5, |i, j| nodes[i].powi(j as i32));
    let values = DVector::from_fn(5, |i, _| (m - nodes[i] * n).determinant());
    let mut coeffs: Vec<f64> = vander.lu().solve(&values)?.iter().copied().collect();

    let max_coeff = coeffs.iter().fold(0.0f64, |a, &c| a.max(c.abs()));
    while coeffs.len() > 1 && coeffs.last().unwrap().abs() < 1e-10 * max_coeff {
        coeffs.pop();
    }
    let degree = coeffs.len() - 1;
    if degree == 0 {
        return None;
    }

    // companion matrix of the monic polynomial
    let lead = *coeffs.last().unwrap();
    let monic: Vec<f64> = coeffs[..degree].iter().map(|c| c / lead).collect();
    let companion = DMatrix::from_fn(degree, degree, |i, j| {
        if j == degree - 1 {
            -monic[i]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let roots = companion.complex_eigenvalues();

    let mut best: Option<(f64, Vector4<f64>)> = None;
    for root in roots.iter() {
        if root.im.abs() > 1e-8 * (1.0 + root.re.abs()) {
            continue;
        }
        let eta = root.re;
        if eta <= 0.0 {
            continue;
        }
        let shifted = m - eta * n;
        let svd = DMatrix::from_fn(4, 4, |i, j| shifted[(i, j)]).svd(false, true);
        let v_t = svd.v_t.as_ref()?;
        let a = Vector4::new(v_t[(3, 0)], v_t[(3, 1)], v_t[(3, 2)], v_t[(3, 3)]);
        // polish the root: one Rayleigh-quotient step removes companion
        // matrix rounding
        let denom = (a.transpose() * n * a)[(0, 0)];
        if denom <= 0.0 {
            continue;
        }
        let eta = (a.transpose() * m * a)[(0, 0)] / denom;
        if eta <= 0.0 {
            continue;
        }
        if best.is_none() || eta < best.unwrap().0 {
            best = Some((eta, a));
        }
    }
    best
}

/// Circle parameters from an algebraic vector, for oracle comparisons.
pub fn alg_to_circle(a: &Vector4<f64>) -> Option<(f64, f64, f64)> {
    if a.x.abs() < 1e-12 * a.norm() {
        return None;
    }
    let disc = a.y * a.y + a.z * a.z - 4.0 * a.x * a.w;
    if disc <= 0.0 {
        return None;
    }
    Some((
        -a.y / (2.0 * a.x),
        -a.z / (2.0 * a.x),
        disc.sqrt() / (2.0 * a.x.abs()),
    ))
}

/// Mean-normalized moment matrix of a point set, built directly (not via
/// the library's design-matrix type).
pub fn moments(ps: &PointSet) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    for p in ps.iter() {
        let z = p.x * p.x + p.y * p.y;
        let row = Vector4::new(z, p.x, p.y, 1.0);
        m += row * row.transpose();
    }
    m / ps.len() as f64
}

/// Rank-3 pseudoinverse of a singular symmetric 4x4 matrix, discarding the
/// eigenvalue of smallest magnitude.
pub fn pinv_rank3(m: &Matrix4<f64>) -> Matrix4<f64> {
    let eig = nalgebra::SymmetricEigen::new(*m);
    let mut min_idx = 0;
    for i in 1..4 {
        if eig.eigenvalues[i].abs() < eig.eigenvalues[min_idx].abs() {
            min_idx = i;
        }
    }
    let mut out = Matrix4::zeros();
    for i in 0..4 {
        if i == min_idx {
            continue;
        }
        let q: Vector4<f64> = eig.eigenvectors.column(i).into();
        out += q * q.transpose() / eig.eigenvalues[i];
    }
    out
}
