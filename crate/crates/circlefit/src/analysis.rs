//! Second-order error analysis for circle fits.
//!
//! Everything here is evaluated at the *true* circle and true point
//! positions: the KCR variance lower bound `sigma^2 (W^T W)^-1`, the
//! essential (O(sigma^2), n-independent) bias of each fit, the full bias
//! expressions including the O(sigma^2/n) corrections, the Jacobian of the
//! algebraic-to-natural parameter transition, and the decomposition of an
//! empirical MSE into variance + (essential bias)^2 + remainder.

use nalgebra::{DMatrix, Matrix3, Matrix3x4, Matrix4, Vector3, Vector4};
use serde::Serialize;

use crate::alg::{design_matrix, pratt_matrix, taubin_matrix};
use crate::error::{Error, Result};
use crate::geom::{AlgParams, CircleGeom, PointSet};
use crate::Method;

/// True points fixed on a true circle, located by their angles.
#[derive(Debug, Clone, Serialize)]
pub struct TruePointFrame {
    pub circle: CircleGeom,
    pub angles: Vec<f64>,
}

impl TruePointFrame {
    pub fn new(circle: CircleGeom, angles: Vec<f64>) -> Self {
        TruePointFrame { circle, angles }
    }

    pub fn n(&self) -> usize {
        self.angles.len()
    }

    /// Unit vectors `(u_i, v_i) = (cos phi_i, sin phi_i)`.
    pub fn unit_vectors(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.angles.iter().map(|&phi| (phi.cos(), phi.sin()))
    }

    /// The true points `(a + R cos phi_i, b + R sin phi_i)`.
    pub fn true_points(&self) -> PointSet {
        let c = &self.circle;
        PointSet::from_xy(
            &self
                .angles
                .iter()
                .map(|&phi| (c.a + c.r * phi.cos(), c.b + c.r * phi.sin()))
                .collect::<Vec<_>>(),
        )
        .expect("true points are finite by construction")
    }
}

/// The n x 3 matrix with rows `(cos phi_i, sin phi_i, 1)`.
#[derive(Debug, Clone)]
pub struct WMatrix {
    w: DMatrix<f64>,
}

impl WMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn wtw(&self) -> Matrix3<f64> {
        let g = self.w.tr_mul(&self.w);
        Matrix3::from_fn(|i, j| g[(i, j)])
    }
}

/// Builds the W matrix and checks it has full column rank.
pub fn w_matrix(frame: &TruePointFrame) -> Result<WMatrix> {
    if frame.n() < 3 {
        return Err(Error::DegenerateFrame("need at least 3 angles".into()));
    }
    let w = DMatrix::from_fn(frame.n(), 3, |i, j| {
        let phi = frame.angles[i];
        match j {
            0 => phi.cos(),
            1 => phi.sin(),
            _ => 1.0,
        }
    });
    let wm = WMatrix { w };
    let g = wm.wtw();
    let eig = nalgebra::SymmetricEigen::new(g);
    let max = eig.eigenvalues.amax();
    if eig.eigenvalues.min() < 1e-12 * max {
        return Err(Error::DegenerateFrame("W has rank < 3".into()));
    }
    Ok(wm)
}

fn wtw_inverse(w: &WMatrix) -> Result<Matrix3<f64>> {
    w.wtw()
        .try_inverse()
        .ok_or_else(|| Error::DegenerateFrame("W^T W is singular".into()))
}

/// KCR lower bound `sigma^2 (W^T W)^-1` on the covariance
/// of any consistent estimator of `(a, b, R)`.
pub fn kcr_covariance(w: &WMatrix, sigma: f64) -> Result<Matrix3<f64>> {
    if sigma <= 0.0 {
        return Err(Error::InvalidInput("sigma must be positive".into()));
    }
    Ok(wtw_inverse(w)? * (sigma * sigma))
}

/// Whether a bias vector carries only the essential (n-independent) part
/// or the full expression with O(1/n) corrections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BiasOrder {
    Essential,
    Full,
}

/// Bias of `(a, b, R)` estimates.
#[derive(Debug, Clone, Serialize)]
pub struct BiasVector {
    pub components: [f64; 3],
    pub order: BiasOrder,
}

impl BiasVector {
    pub fn radius(&self) -> f64 {
        self.components[2]
    }
}

/// Essential-bias coefficient: the radius bias is `k * sigma^2 / R`.
fn essential_coefficient(method: Method) -> Result<f64> {
    match method {
        Method::Geometric => Ok(0.5),
        Method::Pratt => Ok(2.0),
        Method::Taubin => Ok(1.0),
        Method::Hyper => Ok(0.0),
        Method::Kasa => Err(Error::InvalidInput(
            "Kasa's essential bias depends on the arc; use kasa_essential_bias_arc".into(),
        )),
    }
}

/// Essential bias `(0, 0, k sigma^2 / R)` with `k = 1/2` (geometric),
/// `2` (Pratt), `1` (Taubin), `0` (Hyper). The center estimates carry no
/// essential bias for any of these fits.
pub fn essential_bias(method: Method, sigma: f64, r_true: f64) -> Result<BiasVector> {
    if sigma < 0.0 || r_true <= 0.0 {
        return Err(Error::InvalidInput(
            "need sigma >= 0 and a positive true radius".into(),
        ));
    }
    let k = essential_coefficient(method)?;
    Ok(BiasVector {
        components: [0.0, 0.0, k * sigma * sigma / r_true],
        order: BiasOrder::Essential,
    })
}

/// Kasa essential bias for true points on an arc of the unit circle,
/// in the canonical pose: true circle `(0, 0, 1)` with the arc symmetric
/// about the east pole (so the true-point moments satisfy
/// `y_bar = xy_bar = 0`).
///
/// The bias is `2 sigma^2 [0,0,1] - sigma^2/(xx_bar - x_bar^2) *
/// [-x_bar, 0, xx_bar]`; the denominator vanishes as the arc shrinks,
/// which is Kasa's heavy small-arc bias toward smaller circles.
pub fn kasa_essential_bias_arc(frame: &TruePointFrame, sigma: f64) -> Result<BiasVector> {
    let c = &frame.circle;
    if (c.a.abs() > 1e-9) || (c.b.abs() > 1e-9) || ((c.r - 1.0).abs() > 1e-9) {
        return Err(Error::InvalidInput(
            "Kasa arc bias formula requires the canonical unit circle (0, 0, 1)".into(),
        ));
    }
    let n = frame.n() as f64;
    if frame.n() < 3 {
        return Err(Error::DegenerateFrame("need at least 3 angles".into()));
    }
    let (mut x_bar, mut y_bar, mut xx_bar, mut xy_bar) = (0.0, 0.0, 0.0, 0.0);
    for (u, v) in frame.unit_vectors() {
        x_bar += u;
        y_bar += v;
        xx_bar += u * u;
        xy_bar += u * v;
    }
    x_bar /= n;
    y_bar /= n;
    xx_bar /= n;
    xy_bar /= n;
    if y_bar.abs() > 1e-9 || xy_bar.abs() > 1e-9 {
        return Err(Error::InvalidInput(
            "arc must be symmetric about the east pole (y_bar = xy_bar = 0)".into(),
        ));
    }
    let denom = xx_bar - x_bar * x_bar;
    if denom < 1e-12 {
        return Err(Error::ArcTooSmall);
    }
    let s2 = sigma * sigma;
    Ok(BiasVector {
        components: [s2 * x_bar / denom, 0.0, 2.0 * s2 - s2 * xx_bar / denom],
        order: BiasOrder::Essential,
    })
}

/// Full second-order bias of the geometric fit:
/// `sigma^2/(2R) [ (W^T W)^-1 W^T 1 + (W^T W)^-1 W^T S ]` with
/// `s_i = [-v_i, u_i, 0] (W^T W)^-1 [-v_i, u_i, 0]^T`. The first term is
/// exactly `(0, 0, sigma^2/(2R))`; the second is the O(sigma^2/n)
/// correction.
pub fn geometric_bias_full(frame: &TruePointFrame, sigma: f64) -> Result<BiasVector> {
    let w = w_matrix(frame)?;
    let inv = wtw_inverse(&w)?;
    let n = frame.n();
    let mut rhs = Vector3::zeros();
    for (i, (u, v)) in frame.unit_vectors().enumerate() {
        let t = Vector3::new(-v, u, 0.0);
        let s_i = (t.transpose() * inv * t)[(0, 0)];
        let row = Vector3::new(w.matrix()[(i, 0)], w.matrix()[(i, 1)], w.matrix()[(i, 2)]);
        rhs += row * (1.0 + s_i);
    }
    let _ = n;
    let bias = inv * rhs * (sigma * sigma / (2.0 * frame.circle.r));
    Ok(BiasVector {
        components: [bias.x, bias.y, bias.z],
        order: BiasOrder::Full,
    })
}

/// True-value quantities shared by the algebraic bias formulas.
struct TrueAlgFrame {
    a_unit: Vector4<f64>,
    z_rows: Vec<Vector4<f64>>,
    m_pinv: Matrix4<f64>,
    z_mean: Vector4<f64>,
}

fn true_alg_frame(frame: &TruePointFrame) -> Result<TrueAlgFrame> {
    let pts = frame.true_points();
    let z = design_matrix(&pts)?;
    let n = frame.n() as f64;
    let mtm = z.matrix().tr_mul(z.matrix()) / n;
    let m = Matrix4::from_fn(|i, j| mtm[(i, j)]);
    let m = (m + m.transpose()) * 0.5;

    // rank-3 pseudoinverse: discard the kernel direction span(A~)
    let eig = nalgebra::SymmetricEigen::new(m);
    let m_norm = eig.eigenvalues.amax();
    let small: Vec<usize> = (0..4)
        .filter(|&i| eig.eigenvalues[i].abs() < 1e-10 * m_norm)
        .collect();
    if small.len() != 1 {
        return Err(Error::DegenerateFrame(format!(
            "true moment matrix kernel has dimension {}, expected 1",
            small.len()
        )));
    }
    let mut m_pinv = Matrix4::zeros();
    for i in 0..4 {
        if i == small[0] {
            continue;
        }
        let q: Vector4<f64> = eig.eigenvectors.column(i).into();
        m_pinv += q * q.transpose() / eig.eigenvalues[i];
    }

    let alg = frame.circle.to_alg();
    let v = alg.as_vector();
    let a_unit = v / v.norm();

    let z_rows: Vec<Vector4<f64>> = (0..frame.n())
        .map(|i| {
            Vector4::new(
                z.matrix()[(i, 0)],
                z.matrix()[(i, 1)],
                z.matrix()[(i, 2)],
                1.0,
            )
        })
        .collect();
    let z_mean = z_rows.iter().sum::<Vector4<f64>>() / n;

    Ok(TrueAlgFrame {
        a_unit,
        z_rows,
        m_pinv,
        z_mean,
    })
}

fn true_constraint(
    frame: &TruePointFrame,
    t: &TrueAlgFrame,
    method: Method,
) -> Result<Matrix4<f64>> {
    let _ = frame;
    let (zb, xb, yb) = (t.z_mean.x, t.z_mean.y, t.z_mean.z);
    Ok(match method {
        Method::Pratt => pratt_matrix(),
        Method::Taubin => taubin_matrix(zb, xb, yb),
        Method::Hyper => 2.0 * taubin_matrix(zb, xb, yb) - pratt_matrix(),
        Method::Kasa => {
            let mut k = Matrix4::zeros();
            k[(0, 0)] = 1.0;
            k
        }
        Method::Geometric => {
            return Err(Error::InvalidInput(
                "the geometric fit has no constraint matrix".into(),
            ))
        }
    })
}

/// Second-order bias of an algebraic fit in the parameters `(A, B, C, D)`:
///
/// `E(Delta_2 A) = -sigma^2 M~^- [ 4 A~ n^-1 sum Z_i
///                 + (1 - 4/n) P A~
///                 - ((1 - 3/n)(A~^T P A~)/(A~^T N~ A~)) N~ A~
///                 - 4 A~ n^-2 sum (Z_i^T M~^- Z_i) Z_i ]`
///
/// where the scalar `A~` is the first component of the unit-norm true
/// parameter vector and `M~^-` the rank-3 pseudoinverse. With
/// `BiasOrder::Essential` the O(1/n) corrections are dropped.
pub fn algebraic_bias(
    frame: &TruePointFrame,
    method: Method,
    sigma: f64,
    order: BiasOrder,
) -> Result<Vector4<f64>> {
    let t = true_alg_frame(frame)?;
    let n = frame.n() as f64;
    let n_true = true_constraint(frame, &t, method)?;
    let p = pratt_matrix();
    let a = t.a_unit;
    let a_scalar = a.x;

    let (c4, c3, small_n) = match order {
        BiasOrder::Full => (1.0 - 4.0 / n, 1.0 - 3.0 / n, true),
        BiasOrder::Essential => (1.0, 1.0, false),
    };

    let apa = (a.transpose() * p * a)[(0, 0)];
    let ana = (a.transpose() * n_true * a)[(0, 0)];
    if ana.abs() < 1e-15 {
        return Err(Error::DegenerateFrame(
            "true constraint value A~^T N~ A~ vanishes".into(),
        ));
    }

    let mut bracket = 4.0 * a_scalar * t.z_mean + c4 * (p * a) - (c3 * apa / ana) * (n_true * a);
    if small_n {
        let mut corr = Vector4::zeros();
        for zi in &t.z_rows {
            let q = (zi.transpose() * t.m_pinv * zi)[(0, 0)];
            corr += q * zi;
        }
        bracket -= 4.0 * a_scalar / (n * n) * corr;
    }
    Ok(-(sigma * sigma) * (t.m_pinv * bracket))
}

/// Full bias (essential + O(1/n) corrections) of an algebraic fit.
pub fn algebraic_bias_full(
    frame: &TruePointFrame,
    method: Method,
    sigma: f64,
) -> Result<Vector4<f64>> {
    algebraic_bias(frame, method, sigma, BiasOrder::Full)
}

/// Jacobian of the transition `(A, B, C, D) -> (a, b, R)`:
///
/// ```text
/// [ B/(2A^2)              -1/(2A)      0            0        ]
/// [ C/(2A^2)              0            -1/(2A)      0        ]
/// [ -R/A - D/(2A^2 R)     B/(4A^2 R)   C/(4A^2 R)   -1/(2AR) ]
/// ```
pub fn transition_jacobian(p: &AlgParams) -> Result<Matrix3x4<f64>> {
    let (a, b, c, d) = (p.a, p.b, p.c, p.d);
    if a == 0.0 {
        return Err(Error::LineDegenerate);
    }
    let disc = b * b + c * c - 4.0 * a * d;
    if disc <= 0.0 {
        return Err(Error::DegenerateConic);
    }
    let r = disc.sqrt() / (2.0 * a.abs());
    let a2 = a * a;
    Ok(Matrix3x4::new(
        b / (2.0 * a2),
        -1.0 / (2.0 * a),
        0.0,
        0.0,
        c / (2.0 * a2),
        0.0,
        -1.0 / (2.0 * a),
        0.0,
        -r / a - d / (2.0 * a2 * r),
        b / (4.0 * a2 * r),
        c / (4.0 * a2 * r),
        -1.0 / (2.0 * a * r),
    ))
}

/// One row of the MSE decomposition tables: the empirical radius MSE split
/// into the theoretical variance, the squared essential bias, and an
/// empirical remainder (which may be negative).
#[derive(Debug, Clone, Serialize)]
pub struct MseBreakdown {
    pub method: Method,
    pub total_mse: f64,
    pub variance_theory: f64,
    pub ess_bias_sq: f64,
    pub remainder: f64,
}

/// Theoretical essential radius bias for a method at this frame. Kasa uses
/// the arc formula; the frame is first rotated about its circular mean
/// angle and rescaled to the canonical unit circle (rotation and scale
/// equivariance of the fit make this exact).
pub fn essential_radius_bias(frame: &TruePointFrame, method: Method, sigma: f64) -> Result<f64> {
    match method {
        Method::Kasa => {
            let r = frame.circle.r;
            let (mut s, mut c) = (0.0, 0.0);
            for (u, v) in frame.unit_vectors() {
                c += u;
                s += v;
            }
            let mean = s.atan2(c);
            let canonical = TruePointFrame::new(
                CircleGeom::new(0.0, 0.0, 1.0).unwrap(),
                frame.angles.iter().map(|&phi| phi - mean).collect(),
            );
            Ok(r * kasa_essential_bias_arc(&canonical, sigma / r)?.radius())
        }
        _ => Ok(essential_bias(method, sigma, frame.circle.r)?.radius()),
    }
}

pub(crate) fn breakdown_from_total(
    total_mse: f64,
    truth: &TruePointFrame,
    sigma: f64,
    method: Method,
) -> Result<MseBreakdown> {
    let w = w_matrix(truth)?;
    let variance_theory = if sigma == 0.0 {
        0.0
    } else {
        kcr_covariance(&w, sigma)?[(2, 2)]
    };
    let bias = essential_radius_bias(truth, method, sigma)?;
    let ess_bias_sq = bias * bias;
    Ok(MseBreakdown {
        method,
        total_mse,
        variance_theory,
        ess_bias_sq,
        remainder: total_mse - variance_theory - ess_bias_sq,
    })
}

/// Decomposes the empirical radius MSE of a batch of estimates against the
/// theoretical variance and squared essential bias.
pub fn mse_decompose(
    estimates: &[CircleGeom],
    truth: &TruePointFrame,
    sigma: f64,
    method: Method,
) -> Result<MseBreakdown> {
    if estimates.is_empty() {
        return Err(Error::InvalidInput("no estimates to decompose".into()));
    }
    let r_true = truth.circle.r;
    let total_mse = estimates
        .iter()
        .map(|c| (c.r - r_true) * (c.r - r_true))
        .sum::<f64>()
        / estimates.len() as f64;
    breakdown_from_total(total_mse, truth, sigma, method)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn semicircle_frame(n: usize) -> TruePointFrame {
        let angles = (0..n)
            .map(|i| PI * ((i as f64 - (n as f64 - 1.0) / 2.0) / (n as f64 - 1.0)))
            .collect();
        TruePointFrame::new(CircleGeom::new(0.0, 0.0, 1.0).unwrap(), angles)
    }

    #[test]
    fn wtw_four_symmetric_points() {
        let frame = TruePointFrame::new(
            CircleGeom::new(0.0, 0.0, 1.0).unwrap(),
            vec![0.0, PI / 2.0, PI, 3.0 * PI / 2.0],
        );
        let w = w_matrix(&frame).unwrap();
        let g = w.wtw();
        let expected = Matrix3::from_diagonal(&Vector3::new(2.0, 2.0, 4.0));
        assert!((g - expected).norm() < 1e-12);
    }

    #[test]
    fn w_column_of_ones() {
        let frame = semicircle_frame(37);
        let w = w_matrix(&frame).unwrap();
        let col = w.matrix().column(2);
        assert_abs_diff_eq!(col.dot(&col), 37.0, epsilon = 1e-12);
    }

    #[test]
    fn table1_variance_from_w() {
        // n=100 equally spaced on a semicircle, sigma=0.05: radius variance 1.2647e-4
        let frame = semicircle_frame(100);
        let w = w_matrix(&frame).unwrap();
        let cov = kcr_covariance(&w, 0.05).unwrap();
        let v = cov[(2, 2)];
        assert!((v - 1.2647e-4).abs() / 1.2647e-4 < 0.005, "v = {v}");
    }

    #[test]
    fn kcr_full_circle_four_points() {
        let frame = TruePointFrame::new(
            CircleGeom::new(0.0, 0.0, 1.0).unwrap(),
            vec![0.0, PI / 2.0, PI, 3.0 * PI / 2.0],
        );
        let w = w_matrix(&frame).unwrap();
        let cov = kcr_covariance(&w, 0.1).unwrap();
        let s2 = 0.01;
        let expected = Matrix3::from_diagonal(&Vector3::new(s2 / 2.0, s2 / 2.0, s2 / 4.0));
        assert!((cov - expected).norm() < 1e-12);
    }

    #[test]
    fn degenerate_frame_rejected() {
        let frame = TruePointFrame::new(
            CircleGeom::new(0.0, 0.0, 1.0).unwrap(),
            vec![0.3, 0.3, 0.3, 0.3],
        );
        assert!(w_matrix(&frame).is_err());
    }

    #[test]
    fn essential_bias_values() {
        let b = essential_bias(Method::Pratt, 0.05, 1.0).unwrap();
        assert_abs_diff_eq!(b.radius(), 0.005, epsilon = 1e-15);
        assert_abs_diff_eq!(b.radius() * b.radius(), 0.2500e-4, epsilon = 1e-12);
        let b = essential_bias(Method::Taubin, 0.05, 1.0).unwrap();
        assert_abs_diff_eq!(b.radius(), 0.0025, epsilon = 1e-15);
        let b = essential_bias(Method::Hyper, 0.3, 2.0).unwrap();
        assert_eq!(b.components, [0.0, 0.0, 0.0]);
        let b = essential_bias(Method::Geometric, 0.05, 1.0).unwrap();
        assert_abs_diff_eq!(b.radius(), 0.00125, epsilon = 1e-15);
        assert!(essential_bias(Method::Kasa, 0.05, 1.0).is_err());
    }

    #[test]
    fn essential_bias_ordering() {
        let s = 0.07;
        let r = 1.3;
        let p = essential_bias(Method::Pratt, s, r).unwrap().radius();
        let t = essential_bias(Method::Taubin, s, r).unwrap().radius();
        let g = essential_bias(Method::Geometric, s, r).unwrap().radius();
        let h = essential_bias(Method::Hyper, s, r).unwrap().radius();
        assert_abs_diff_eq!(p, 2.0 * t, epsilon = 1e-15);
        assert_abs_diff_eq!(p, 4.0 * g, epsilon = 1e-15);
        assert_eq!(h, 0.0);
    }

    #[test]
    fn kasa_arc_bias_full_circle() {
        // full circle: x_bar = 0, xx_bar = 1/2 -> R bias = sigma^2
        let n = 64;
        let angles = (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect();
        let frame = TruePointFrame::new(CircleGeom::new(0.0, 0.0, 1.0).unwrap(), angles);
        let sigma = 0.05;
        let b = kasa_essential_bias_arc(&frame, sigma).unwrap();
        assert_abs_diff_eq!(b.radius(), sigma * sigma, epsilon = 1e-12);
        assert_abs_diff_eq!(b.components[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn kasa_arc_bias_grows_as_arc_shrinks() {
        let sigma = 0.05;
        let mk = |span: f64| {
            let n = 21;
            let angles = (0..n)
                .map(|i| span * ((i as f64 - (n as f64 - 1.0) / 2.0) / (n as f64 - 1.0)))
                .collect();
            TruePointFrame::new(CircleGeom::new(0.0, 0.0, 1.0).unwrap(), angles)
        };
        let wide = kasa_essential_bias_arc(&mk(PI / 2.0), sigma).unwrap();
        let narrow = kasa_essential_bias_arc(&mk(PI / 16.0), sigma).unwrap();
        assert!(narrow.radius() < wide.radius());
        assert!(narrow.radius() < 0.0, "small arcs bias the radius down");
        assert!(narrow.radius().abs() > 10.0 * wide.radius().abs());
        // an essentially degenerate arc diverges
        let tiny = mk(1e-7);
        assert!(matches!(
            kasa_essential_bias_arc(&tiny, sigma),
            Err(Error::ArcTooSmall)
        ));
    }

    #[test]
    fn geometric_bias_first_term_exact() {
        // (W^T W)^-1 W^T 1 = [0, 0, 1]^T exactly
        let frame = semicircle_frame(25);
        let w = w_matrix(&frame).unwrap();
        let ones = DMatrix::from_element(25, 1, 1.0);
        let wt1 = w.matrix().tr_mul(&ones);
        let inv = w.wtw().try_inverse().unwrap();
        let v = inv * Vector3::new(wt1[(0, 0)], wt1[(1, 0)], wt1[(2, 0)]);
        assert!((v - Vector3::new(0.0, 0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn geometric_bias_full_approaches_essential() {
        let sigma = 0.05;
        let ess = essential_bias(Method::Geometric, sigma, 1.0).unwrap();
        let diff = |n: usize| {
            let b = geometric_bias_full(&semicircle_frame(n), sigma).unwrap();
            ((b.components[0] - ess.components[0]).powi(2)
                + (b.components[1] - ess.components[1]).powi(2)
                + (b.components[2] - ess.components[2]).powi(2))
            .sqrt()
        };
        let d1 = diff(50);
        let d2 = diff(100);
        let d4 = diff(200);
        assert!(d2 < 0.6 * d1, "halving: {d1} -> {d2}");
        assert!(d4 < 0.6 * d2, "halving: {d2} -> {d4}");
    }

    #[test]
    fn pratt_essential_bias_maps_to_natural_parameters() {
        let frame = semicircle_frame(40);
        let sigma = 0.05;
        let b4 = algebraic_bias(&frame, Method::Pratt, sigma, BiasOrder::Essential).unwrap();
        let alg = frame.circle.to_alg();
        let v = alg.as_vector();
        let unit = AlgParams::unit_norm(v.x, v.y, v.z, v.w).unwrap();
        let j = transition_jacobian(&unit).unwrap();
        let mapped = j * b4;
        let expected = Vector3::new(0.0, 0.0, 2.0 * sigma * sigma / frame.circle.r);
        assert!((mapped - expected).norm() < 1e-10, "mapped = {mapped}");
    }

    #[test]
    fn hyper_essential_bias_is_zero() {
        let frame = semicircle_frame(30);
        let b = algebraic_bias(&frame, Method::Hyper, 0.05, BiasOrder::Essential).unwrap();
        assert!(b.norm() < 1e-15, "b = {b}");
    }

    #[test]
    fn taubin_essential_bias_maps_to_half_pratt() {
        let frame = semicircle_frame(40);
        let sigma = 0.05;
        let alg = frame.circle.to_alg();
        let v = alg.as_vector();
        let unit = AlgParams::unit_norm(v.x, v.y, v.z, v.w).unwrap();
        let j = transition_jacobian(&unit).unwrap();
        let bp = j * algebraic_bias(&frame, Method::Pratt, sigma, BiasOrder::Essential).unwrap();
        let bt = j * algebraic_bias(&frame, Method::Taubin, sigma, BiasOrder::Essential).unwrap();
        assert!((bp - 2.0 * bt).norm() < 1e-10);
    }

    #[test]
    fn transition_jacobian_unit_circle_entry() {
        let s = 1.0 / 2f64.sqrt();
        let p = AlgParams::unit_norm(s, 0.0, 0.0, -s).unwrap();
        let j = transition_jacobian(&p).unwrap();
        // da/dB = -1/(2A)
        assert_abs_diff_eq!(j[(0, 1)], -1.0 / (2.0 * s), epsilon = 1e-12);
    }

    #[test]
    fn transition_jacobian_line_degenerate() {
        let p = AlgParams::unit_norm(0.0, 1.0, 0.0, -1.0).unwrap();
        assert!(matches!(
            transition_jacobian(&p),
            Err(Error::LineDegenerate)
        ));
    }

    #[test]
    fn mse_decompose_zero_error_estimates() {
        let frame = semicircle_frame(20);
        let estimates = vec![frame.circle; 5];
        let row = mse_decompose(&estimates, &frame, 0.05, Method::Hyper).unwrap();
        assert_abs_diff_eq!(row.total_mse, 0.0);
        assert_abs_diff_eq!(
            row.remainder,
            -row.variance_theory - row.ess_bias_sq,
            epsilon = 1e-18
        );
    }
}
