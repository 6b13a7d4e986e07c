//! Non-iterative algebraic circle fits.
//!
//! All four fits (Kasa, Pratt, Taubin, Hyper) minimize the same objective
//! `A^T M A` over the algebraic parameter vector `A = (A, B, C, D)`,
//! subject to a method-specific quadratic constraint `A^T N A = 1`. The
//! Lagrange condition is the generalized eigenproblem `M A = eta N A`,
//! solved for the smallest positive eigenvalue.
//!
//! [`fit_algebraic`] is the production entry point: it centers the data at
//! the centroid, takes a thin SVD of the design matrix, and either reads
//! the interpolating solution off the SVD (when the data lie exactly on a
//! circle or line) or reduces the pencil to an ordinary symmetric
//! eigenproblem.

use nalgebra::{DMatrix, Matrix3, Matrix4, Vector3, Vector4};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{AlgParams, CircleOrLine, PointSet, DEFAULT_LINE_THRESHOLD};
use crate::Method;

/// The n x 4 design matrix with rows `(z_i, x_i, y_i, 1)`, `z_i = x_i^2 + y_i^2`.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    z: DMatrix<f64>,
}

impl DesignMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.z
    }

    pub fn nrows(&self) -> usize {
        self.z.nrows()
    }
}

/// Builds the design matrix. Requires at least 3 points with finite coordinates.
pub fn design_matrix(ps: &PointSet) -> Result<DesignMatrix> {
    ps.require_min_points(3)?;
    let z = DMatrix::from_fn(ps.len(), 4, |i, j| {
        let p = ps.points()[i];
        match j {
            0 => p.x * p.x + p.y * p.y,
            1 => p.x,
            2 => p.y,
            _ => 1.0,
        }
    });
    Ok(DesignMatrix { z })
}

/// The symmetric 4 x 4 matrix of moments `M = (1/n) Z^T Z`.
#[derive(Debug, Clone)]
pub struct MomentMatrix {
    m: Matrix4<f64>,
}

impl MomentMatrix {
    pub fn from_matrix(m: Matrix4<f64>) -> Self {
        MomentMatrix { m }
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.m
    }

    pub fn z_bar(&self) -> f64 {
        self.m[(0, 3)]
    }

    pub fn x_bar(&self) -> f64 {
        self.m[(1, 3)]
    }

    pub fn y_bar(&self) -> f64 {
        self.m[(2, 3)]
    }
}

pub fn moment_matrix(z: &DesignMatrix) -> MomentMatrix {
    let n = z.nrows() as f64;
    let mtm = z.z.tr_mul(&z.z) / n;
    let mut m = Matrix4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            m[(i, j)] = mtm[(i, j)];
        }
    }
    // enforce exact symmetry against rounding in the accumulation
    let m = (m + m.transpose()) * 0.5;
    MomentMatrix { m }
}

/// The constant Pratt constraint matrix `P`.
pub fn pratt_matrix() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 0.0, 0.0, -2.0, //
        0.0, 1.0, 0.0, 0.0, //
        0.0, 0.0, 1.0, 0.0, //
        -2.0, 0.0, 0.0, 0.0,
    )
}

/// The Taubin constraint matrix `T` built from the data means.
pub fn taubin_matrix(z_bar: f64, x_bar: f64, y_bar: f64) -> Matrix4<f64> {
    Matrix4::new(
        4.0 * z_bar,
        2.0 * x_bar,
        2.0 * y_bar,
        0.0,
        2.0 * x_bar,
        1.0,
        0.0,
        0.0,
        2.0 * y_bar,
        0.0,
        1.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    )
}

/// A constraint matrix tagged with the fit it belongs to.
#[derive(Debug, Clone)]
pub struct ConstraintMatrix {
    pub matrix: Matrix4<f64>,
    pub method: Method,
}

/// Builds the constraint matrix for a method: `K = e1 e1^T` (Kasa), the
/// constant `P` (Pratt), `T` from the data means (Taubin), or `H = 2T - P`
/// (Hyper).
pub fn constraint_matrix(method: Method, m: &MomentMatrix) -> Result<ConstraintMatrix> {
    let matrix = match method {
        Method::Kasa => {
            let mut k = Matrix4::zeros();
            k[(0, 0)] = 1.0;
            k
        }
        Method::Pratt => pratt_matrix(),
        Method::Taubin => taubin_matrix(m.z_bar(), m.x_bar(), m.y_bar()),
        Method::Hyper => 2.0 * taubin_matrix(m.z_bar(), m.x_bar(), m.y_bar()) - pratt_matrix(),
        Method::Geometric => {
            return Err(Error::InvalidInput(
                "the geometric fit has no constraint matrix".into(),
            ))
        }
    };
    Ok(ConstraintMatrix { matrix, method })
}

/// Which computational route produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolvePath {
    /// Regular pencil solved through the SVD / symmetric-eigenproblem route.
    RegularSvd,
    /// Data lie exactly on a circle or line; the kernel vector interpolates.
    SingularSvd,
    /// Kasa constraint fixes `A = 1`; the pencil collapses to a 3x3 solve.
    LinearKasa,
    /// Taubin's singular constraint handled by eliminating `D` and reducing
    /// to a 3x3 symmetric eigenproblem.
    ReducedTaubin,
    /// Iterative Levenberg-Marquardt minimization (geometric fit).
    LevenbergMarquardt,
}

impl SolvePath {
    pub fn name(&self) -> &'static str {
        match self {
            SolvePath::RegularSvd => "regular-svd",
            SolvePath::SingularSvd => "singular-svd",
            SolvePath::LinearKasa => "linear-kasa",
            SolvePath::ReducedTaubin => "reduced-taubin",
            SolvePath::LevenbergMarquardt => "levenberg-marquardt",
        }
    }
}

/// A solution of the generalized eigenproblem `M A = eta N A`.
#[derive(Debug, Clone)]
pub struct GepSolution {
    pub eta: f64,
    pub params: AlgParams,
    pub path: SolvePath,
}

// Relative eigenvalue threshold below which M is treated as singular
// (observed points lie exactly on a circle or line).
const KERNEL_TOL: f64 = 1e-12;

// Relative gap below which two positive eigenvalues are considered tied.
const TIE_TOL: f64 = 1e-12;

fn canonical_sign(v: Vector4<f64>) -> Vector4<f64> {
    let mut imax = 0;
    for i in 1..4 {
        if v[i].abs() > v[imax].abs() {
            imax = i;
        }
    }
    if v[imax] < 0.0 {
        -v
    } else {
        v
    }
}

fn unit_params(v: Vector4<f64>) -> Result<AlgParams> {
    let v = canonical_sign(v);
    AlgParams::unit_norm(v.x, v.y, v.z, v.w)
}

/// Selects the smallest positive eigenvalue from `(eigenvalue, vector)`
/// candidates; ties within `TIE_TOL` relative are broken by the smaller
/// objective `A^T M A`.
fn select_smallest_positive(
    pairs: &[(f64, Vector4<f64>)],
    m: &Matrix4<f64>,
) -> Result<(f64, Vector4<f64>)> {
    let mut best: Option<(f64, Vector4<f64>)> = None;
    for &(lambda, v) in pairs {
        if lambda <= 0.0 {
            continue;
        }
        match best {
            None => best = Some((lambda, v)),
            Some((bl, bv)) => {
                let rel = (lambda - bl).abs() / bl.abs().max(lambda.abs());
                if rel <= TIE_TOL {
                    // tie: the minimization objective is the ground truth
                    let obj_new = (v.transpose() * m * v)[(0, 0)] / v.norm_squared();
                    let obj_old = (bv.transpose() * m * bv)[(0, 0)] / bv.norm_squared();
                    if obj_new < obj_old {
                        best = Some((lambda, v));
                    }
                } else if lambda < bl {
                    best = Some((lambda, v));
                }
            }
        }
    }
    best.ok_or_else(|| {
        Error::DegenerateData("pencil has no positive generalized eigenvalue".into())
    })
}

/// Symmetric square root of a PSD 4x4 matrix, with its eigen data.
fn symmetric_sqrt(m: &Matrix4<f64>) -> Matrix4<f64> {
    let eig = nalgebra::SymmetricEigen::new(*m);
    let sqrt_vals = Vector4::from_fn(|i, _| eig.eigenvalues[i].max(0.0).sqrt());
    let q = eig.eigenvectors;
    q * Matrix4::from_diagonal(&sqrt_vals) * q.transpose()
}

/// Solves `M A = eta N A` for the smallest positive eta.
///
/// Dispatches on the constraint's method tag: Pratt and Hyper use the
/// symmetric `Y N^-1 Y` route (their constraint matrices are invertible),
/// Taubin is reduced to a 3x3 symmetric eigenproblem, and Kasa collapses
/// to a linear solve. When `M` is singular the kernel vector is returned
/// with `eta = 0` (the interpolating circle or line).
///
/// The returned pair satisfies `||M A - eta N A|| <= tol * ||M||`.
pub fn solve_gep(m: &MomentMatrix, n: &ConstraintMatrix, tol: f64) -> Result<GepSolution> {
    let mm = m.matrix();
    let m_norm = mm.norm();
    let eig_m = nalgebra::SymmetricEigen::new(*mm);
    let mut min_idx = 0;
    for i in 1..4 {
        if eig_m.eigenvalues[i] < eig_m.eigenvalues[min_idx] {
            min_idx = i;
        }
    }

    let (eta, vec, path) = if eig_m.eigenvalues[min_idx] < KERNEL_TOL * m_norm {
        let v: Vector4<f64> = eig_m.eigenvectors.column(min_idx).into();
        (0.0, v, SolvePath::SingularSvd)
    } else {
        match n.method {
            Method::Pratt | Method::Hyper => {
                let y = symmetric_sqrt(mm);
                let n_inv = n
                    .matrix
                    .try_inverse()
                    .ok_or_else(|| Error::Numerical("constraint matrix not invertible".into()))?;
                let s = y * n_inv * y;
                let s = (s + s.transpose()) * 0.5;
                let eig = nalgebra::SymmetricEigen::new(s);
                let y_lu = y.lu();
                let mut pairs = Vec::with_capacity(4);
                for i in 0..4 {
                    let w: Vector4<f64> = eig.eigenvectors.column(i).into();
                    let a = y_lu
                        .solve(&w)
                        .ok_or_else(|| Error::Numerical("failed to invert Y".into()))?;
                    pairs.push((eig.eigenvalues[i], a));
                }
                let (eta, a) = select_smallest_positive(&pairs, mm)?;
                (eta, a, SolvePath::RegularSvd)
            }
            Method::Taubin => {
                let (eta, a) = solve_taubin_reduced(m)?;
                (eta, a, SolvePath::ReducedTaubin)
            }
            Method::Kasa => {
                let (eta, a) = solve_kasa_pencil(m)?;
                (eta, a, SolvePath::LinearKasa)
            }
            Method::Geometric => {
                return Err(Error::InvalidInput(
                    "the geometric fit is not a pencil problem".into(),
                ))
            }
        }
    };

    let params = unit_params(vec)?;
    let a = params.as_vector();
    let residual = (mm * a - eta * (n.matrix * a)).norm();
    if residual > tol * m_norm {
        return Err(Error::Numerical(format!(
            "pencil residual {residual:.3e} exceeds {:.3e}",
            tol * m_norm
        )));
    }
    Ok(GepSolution { eta, params, path })
}

/// Taubin's constraint matrix has a zero last row/column, so `D` is
/// unconstrained: minimizing over `D` first eliminates it analytically and
/// leaves a 3x3 pencil with a positive-definite constraint.
fn solve_taubin_reduced(m: &MomentMatrix) -> Result<(f64, Vector4<f64>)> {
    let mm = m.matrix();
    let m4 = Vector3::new(mm[(0, 3)], mm[(1, 3)], mm[(2, 3)]);
    let m_top = mm.fixed_view::<3, 3>(0, 0).into_owned();
    let m_red = m_top - m4 * m4.transpose();

    let (zb, xb, yb) = (m.z_bar(), m.x_bar(), m.y_bar());
    let t_red = Matrix3::new(
        4.0 * zb,
        2.0 * xb,
        2.0 * yb,
        2.0 * xb,
        1.0,
        0.0,
        2.0 * yb,
        0.0,
        1.0,
    );
    let chol = nalgebra::Cholesky::new(t_red).ok_or_else(|| {
        Error::DegenerateData("Taubin constraint is not positive definite".into())
    })?;
    let l = chol.l();
    // B = L^-1 M_red L^-T, symmetric
    let l_inv = l
        .try_inverse()
        .ok_or_else(|| Error::Numerical("failed to invert Cholesky factor".into()))?;
    let b = l_inv * m_red * l_inv.transpose();
    let b = (b + b.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(b);

    let mut best: Option<(f64, Vector3<f64>)> = None;
    for i in 0..3 {
        let lambda = eig.eigenvalues[i];
        if lambda <= 0.0 {
            continue;
        }
        if best.is_none() || lambda < best.unwrap().0 {
            let w: Vector3<f64> = eig.eigenvectors.column(i).into();
            let u = l_inv.transpose() * w;
            best = Some((lambda, u));
        }
    }
    let (eta, u) = best
        .ok_or_else(|| Error::DegenerateData("Taubin pencil has no positive eigenvalue".into()))?;
    let d = -m4.dot(&u);
    Ok((eta, Vector4::new(u.x, u.y, u.z, d)))
}

/// With the Kasa constraint `A^T K A = A^2 = 1` the pencil rows 2..4 read
/// `(M A)_{2..4} = 0` at `A = 1`, a 3x3 linear system in `(B, C, D)`.
fn solve_kasa_pencil(m: &MomentMatrix) -> Result<(f64, Vector4<f64>)> {
    let mm = m.matrix();
    let block = mm.fixed_view::<3, 3>(1, 1).into_owned();
    let rhs = -Vector3::new(mm[(1, 0)], mm[(2, 0)], mm[(3, 0)]);
    let bcd = block
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::DegenerateData("Kasa normal equations are singular".into()))?;
    let a = Vector4::new(1.0, bcd.x, bcd.y, bcd.z);
    let eta = (mm * a)[0]; // first pencil row: (M A)_1 = eta A_1
    Ok((eta, a))
}

/// Fit diagnostics carried alongside the estimated circle.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    /// Generalized eigenvalue of the pencil (algebraic fits).
    pub eta: Option<f64>,
    /// Residual sum of squares, where the solver minimizes one directly.
    pub residual: Option<f64>,
    /// Computational route taken.
    pub path: SolvePath,
    /// Centroid the coordinates were centered at before solving.
    pub centroid: (f64, f64),
    /// Iteration count (iterative fits only).
    pub iterations: Option<usize>,
    /// Whether an iterative solver converged (iterative fits only).
    pub converged: Option<bool>,
}

/// An estimated circle (or line) with its algebraic parameters and
/// solver diagnostics. `circle` always equals the conversion of `alg`.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub circle: CircleOrLine,
    pub alg: AlgParams,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

/// Knobs for the SVD-based algebraic solver.
#[derive(Debug, Clone, Copy)]
pub struct AlgFitOptions {
    /// Threshold on the smallest singular value of the centered design
    /// matrix below which the data are treated as exactly interpolated.
    pub singularity_tol: f64,
    /// `|A|` threshold separating circles from lines.
    pub line_threshold: f64,
}

impl Default for AlgFitOptions {
    fn default() -> Self {
        AlgFitOptions {
            singularity_tol: 1e-12,
            line_threshold: DEFAULT_LINE_THRESHOLD,
        }
    }
}

/// Runs an algebraic fit with default options.
pub fn fit_algebraic(ps: &PointSet, method: Method) -> Result<FitResult> {
    fit_algebraic_with(ps, method, &AlgFitOptions::default())
}

/// Runs an algebraic fit.
///
/// The data are first translated to their centroid. A thin SVD
/// `Z = U S V^T` of the centered design matrix either exposes an exact
/// interpolating solution (smallest singular value below
/// `singularity_tol`) or feeds the regular pencil solve. The result is
/// translated back to the original coordinates.
pub fn fit_algebraic_with(
    ps: &PointSet,
    method: Method,
    opts: &AlgFitOptions,
) -> Result<FitResult> {
    ps.require_min_points(3)?;
    if method == Method::Geometric {
        return Err(Error::InvalidInput(
            "use odr::fit_geometric for the geometric fit".into(),
        ));
    }
    let (cx, cy) = ps.centroid();
    let centered = PointSet::from_xy(&ps.iter().map(|p| (p.x - cx, p.y - cy)).collect::<Vec<_>>())?;
    let spread = centered
        .iter()
        .map(|p| p.x * p.x + p.y * p.y)
        .fold(0.0, f64::max);
    if spread < 1e-24 {
        return Err(Error::DegenerateData("all points are identical".into()));
    }

    let z = design_matrix(&centered)?;
    let n = z.nrows() as f64;

    let (eta, a_centered, path) = if z.nrows() == 3 {
        // three points are always interpolated exactly; the thin SVD of a
        // 3 x 4 design matrix has no fourth right-singular vector, so read
        // the solution off the kernel of Z^T Z instead
        let ztz4 = z.matrix().tr_mul(z.matrix());
        let mut ztz = Matrix4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                ztz[(i, j)] = ztz4[(i, j)];
            }
        }
        let eig = nalgebra::SymmetricEigen::new((ztz + ztz.transpose()) * 0.5);
        let mut min_idx = 0;
        for i in 1..4 {
            if eig.eigenvalues[i] < eig.eigenvalues[min_idx] {
                min_idx = i;
            }
        }
        let v: Vector4<f64> = eig.eigenvectors.column(min_idx).into();
        (0.0, v, SolvePath::SingularSvd)
    } else {
        let svd = z.matrix().clone().svd(false, true);
        let sv = &svd.singular_values;
        let v_t = svd
            .v_t
            .as_ref()
            .ok_or_else(|| Error::Numerical("SVD failed to produce V".into()))?;

        if sv[3] < opts.singularity_tol {
            let v = Vector4::new(v_t[(3, 0)], v_t[(3, 1)], v_t[(3, 2)], v_t[(3, 3)]);
            (0.0, v, SolvePath::SingularSvd)
        } else {
            match method {
                Method::Pratt | Method::Hyper => {
                    // Y = V S V^T, so Y^2 = Z^T Z = n M
                    let mut v4 = Matrix4::zeros();
                    for i in 0..4 {
                        for j in 0..4 {
                            v4[(i, j)] = v_t[(j, i)];
                        }
                    }
                    let y = v4
                        * Matrix4::from_diagonal(&Vector4::new(sv[0], sv[1], sv[2], sv[3]))
                        * v4.transpose();
                    let z_bar = centered.iter().map(|p| p.x * p.x + p.y * p.y).sum::<f64>() / n;
                    // closed-form inverses in centered coordinates (x_bar = y_bar = 0)
                    let n_inv = match method {
                        Method::Pratt => Matrix4::new(
                            0.0, 0.0, 0.0, -0.5, //
                            0.0, 1.0, 0.0, 0.0, //
                            0.0, 0.0, 1.0, 0.0, //
                            -0.5, 0.0, 0.0, 0.0,
                        ),
                        _ => Matrix4::new(
                            0.0,
                            0.0,
                            0.0,
                            0.5,
                            0.0,
                            1.0,
                            0.0,
                            0.0,
                            0.0,
                            0.0,
                            1.0,
                            0.0,
                            0.5,
                            0.0,
                            0.0,
                            -2.0 * z_bar,
                        ),
                    };
                    let s = y * n_inv * y;
                    let s = (s + s.transpose()) * 0.5;
                    let eig = nalgebra::SymmetricEigen::new(s);
                    let y_lu = y.lu();
                    let mut pairs = Vec::with_capacity(4);
                    for i in 0..4 {
                        let w: Vector4<f64> = eig.eigenvectors.column(i).into();
                        let a = y_lu
                            .solve(&w)
                            .ok_or_else(|| Error::Numerical("failed to invert Y".into()))?;
                        pairs.push((eig.eigenvalues[i], a));
                    }
                    let mcen = moment_matrix(&z);
                    let (lambda, a) = select_smallest_positive(&pairs, mcen.matrix())?;
                    // eigenvalues of Y N^-1 Y are n * eta because Y^2 = n M
                    (lambda / n, a, SolvePath::RegularSvd)
                }
                Method::Taubin => {
                    let m = moment_matrix(&z);
                    let (eta, a) = solve_taubin_reduced(&m)?;
                    (eta, a, SolvePath::ReducedTaubin)
                }
                Method::Kasa => {
                    let m = moment_matrix(&z);
                    let (eta, a) = solve_kasa_pencil(&m)?;
                    (eta, a, SolvePath::LinearKasa)
                }
                Method::Geometric => unreachable!(),
            }
        }
    };

    // translate x -> x - cx back to original coordinates
    let a = a_centered;
    let shifted = Vector4::new(
        a.x,
        a.y - 2.0 * a.x * cx,
        a.z - 2.0 * a.x * cy,
        a.w + a.x * (cx * cx + cy * cy) - a.y * cx - a.z * cy,
    );
    let alg = unit_params(shifted)?;
    let circle = alg.to_circle_or_line(opts.line_threshold)?;
    Ok(FitResult {
        circle,
        alg,
        method,
        diagnostics: Diagnostics {
            eta: Some(eta),
            residual: None,
            path,
            centroid: (cx, cy),
            iterations: None,
            converged: None,
        },
    })
}

/// Direct Kasa fit through the 3x3 normal equations in the original
/// coordinates: minimizes `sum (z_i + B x_i + C y_i + D)^2` and recovers
/// `a = -B/2`, `b = -C/2`, `R^2 = a^2 + b^2 - D`.
pub fn kasa_fit_linear(ps: &PointSet) -> Result<FitResult> {
    ps.require_min_points(3)?;
    let mut g = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    for p in ps.iter() {
        let z = p.x * p.x + p.y * p.y;
        let row = Vector3::new(p.x, p.y, 1.0);
        g += row * row.transpose();
        rhs -= z * row;
    }
    let bcd = g.lu().solve(&rhs).ok_or_else(|| {
        Error::DegenerateData("collinear points: normal equations singular".into())
    })?;
    let (b, c, d) = (bcd.x, bcd.y, bcd.z);
    let a = -b / 2.0;
    let bb = -c / 2.0;
    let r2 = a * a + bb * bb - d;
    if r2 <= 0.0 {
        return Err(Error::DegenerateConic);
    }
    let residual: f64 = ps
        .iter()
        .map(|p| {
            let z = p.x * p.x + p.y * p.y;
            let f = z + b * p.x + c * p.y + d;
            f * f
        })
        .sum();
    let alg = unit_params(Vector4::new(1.0, b, c, d))?;
    let circle = alg.to_circle_or_line(DEFAULT_LINE_THRESHOLD)?;
    Ok(FitResult {
        circle,
        alg,
        method: Method::Kasa,
        diagnostics: Diagnostics {
            eta: None,
            residual: Some(residual),
            path: SolvePath::LinearKasa,
            centroid: (0.0, 0.0),
            iterations: None,
            converged: None,
        },
    })
}
