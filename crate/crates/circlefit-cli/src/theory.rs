//! The `theory` subcommand: theoretical error quantities for an equally
//! spaced arc.

use circlefit::analysis::{
    algebraic_bias_full, essential_bias, geometric_bias_full, kasa_essential_bias_arc,
    kcr_covariance, transition_jacobian, w_matrix, TruePointFrame,
};
use circlefit::bench::{generate_arc_points, ExperimentConfig};
use circlefit::{AlgParams, CircleGeom, Method};
use serde::Serialize;

use crate::render::{sig17, sig6};
use crate::{CliError, Format};

pub struct TheoryArgs {
    pub n: usize,
    pub sigma: f64,
    pub radius: f64,
    pub arc_degrees: f64,
    pub arc_center_degrees: f64,
    pub method: Method,
    pub format: Format,
}

#[derive(Serialize)]
struct TheoryOutput {
    method: Method,
    n: usize,
    sigma: f64,
    radius: f64,
    arc_degrees: f64,
    arc_center_degrees: f64,
    /// KCR covariance lower bound on (a, b, R), row-major.
    kcr: [[f64; 3]; 3],
    /// Essential (n-independent) bias of (a, b, R).
    essential_bias: [f64; 3],
    /// Full second-order bias of (a, b, R), including O(1/n) terms.
    full_bias: [f64; 3],
}

fn essential_bias_vector(
    frame: &TruePointFrame,
    args: &TheoryArgs,
) -> Result<[f64; 3], CliError> {
    if args.method == Method::Kasa {
        // the arc formula is stated in the canonical pose: rotate the arc
        // onto the east pole and rescale to the unit circle, then map back
        let theta = args.arc_center_degrees.to_radians();
        let canonical = TruePointFrame::new(
            CircleGeom::new(0.0, 0.0, 1.0).unwrap(),
            frame.angles.iter().map(|&phi| phi - theta).collect(),
        );
        let b = kasa_essential_bias_arc(&canonical, args.sigma / args.radius)?;
        let [b0, b1, b2] = b.components;
        let r = args.radius;
        Ok([
            r * (b0 * theta.cos() - b1 * theta.sin()),
            r * (b0 * theta.sin() + b1 * theta.cos()),
            r * b2,
        ])
    } else {
        Ok(essential_bias(args.method, args.sigma, args.radius)?.components)
    }
}

fn full_bias_vector(frame: &TruePointFrame, args: &TheoryArgs) -> Result<[f64; 3], CliError> {
    if args.method == Method::Geometric {
        return Ok(geometric_bias_full(frame, args.sigma)?.components);
    }
    let b4 = algebraic_bias_full(frame, args.method, args.sigma)?;
    let v = frame.circle.to_alg().as_vector();
    let unit = AlgParams::unit_norm(v.x, v.y, v.z, v.w)?;
    let j = transition_jacobian(&unit)?;
    let full = j * b4;
    Ok([full.x, full.y, full.z])
}

pub fn cmd_theory(args: TheoryArgs) -> Result<(), CliError> {
    let circle = CircleGeom::new(0.0, 0.0, args.radius)?;
    let cfg = ExperimentConfig {
        n: args.n,
        sigma: args.sigma,
        circle,
        arc_degrees: args.arc_degrees,
        arc_center_degrees: args.arc_center_degrees,
        trials: 1,
        seed: 0,
        methods: vec![args.method],
    };
    let frame = generate_arc_points(&cfg)?;
    // evaluate the biases first: a tiny arc fails there with a more
    // specific diagnostic than the W rank check
    let essential_bias = essential_bias_vector(&frame, &args)?;
    let full_bias = full_bias_vector(&frame, &args)?;
    let w = w_matrix(&frame)?;
    let cov = kcr_covariance(&w, args.sigma)?;
    let mut kcr = [[0.0; 3]; 3];
    for (i, row) in kcr.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = cov[(i, j)];
        }
    }
    let out = TheoryOutput {
        method: args.method,
        n: args.n,
        sigma: args.sigma,
        radius: args.radius,
        arc_degrees: args.arc_degrees,
        arc_center_degrees: args.arc_center_degrees,
        kcr,
        essential_bias,
        full_bias,
    };
    print!("{}", render(&out, args.format));
    Ok(())
}

fn render(out: &TheoryOutput, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(out).expect("serializable");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("quantity,c1,c2,c3\n");
            for (label, row) in [("kcr_a", out.kcr[0]), ("kcr_b", out.kcr[1]), ("kcr_r", out.kcr[2])]
            {
                s.push_str(&format!(
                    "{label},{},{},{}\n",
                    sig17(row[0]),
                    sig17(row[1]),
                    sig17(row[2])
                ));
            }
            for (label, v) in [
                ("essential_bias", out.essential_bias),
                ("full_bias", out.full_bias),
            ] {
                s.push_str(&format!(
                    "{label},{},{},{}\n",
                    sig17(v[0]),
                    sig17(v[1]),
                    sig17(v[2])
                ));
            }
            s
        }
        Format::Table => {
            let mut s = format!(
                "method={} n={} sigma={} R={} arc={}deg center={}deg\n",
                out.method, out.n, out.sigma, out.radius, out.arc_degrees, out.arc_center_degrees
            );
            s.push_str("KCR covariance lower bound (a, b, R):\n");
            for row in &out.kcr {
                s.push_str(&format!(
                    "  {:>13} {:>13} {:>13}\n",
                    sig6(row[0]),
                    sig6(row[1]),
                    sig6(row[2])
                ));
            }
            s.push_str(&format!(
                "essential bias: {:>13} {:>13} {:>13}\n",
                sig6(out.essential_bias[0]),
                sig6(out.essential_bias[1]),
                sig6(out.essential_bias[2])
            ));
            s.push_str(&format!(
                "full bias:      {:>13} {:>13} {:>13}\n",
                sig6(out.full_bias[0]),
                sig6(out.full_bias[1]),
                sig6(out.full_bias[2])
            ));
            s
        }
    }
}
