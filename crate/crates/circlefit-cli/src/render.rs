//! Output rendering: human tables, csv, and json.
//!
//! Numeric contract: csv and json carry 17 significant digits (round-trip
//! safe); tables show 6.

use circlefit::alg::FitResult;
use circlefit::bench::ExperimentReport;
use circlefit::{objective_geometric, CircleOrLine, PointSet};
use serde::Serialize;

use crate::Format;

pub fn sig17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn sig6(v: f64) -> String {
    format!("{v:.5e}")
}

/// One method's fit plus the geometric objective of its estimate.
#[derive(Serialize)]
pub struct FitRecord {
    pub method: String,
    pub kind: &'static str,
    pub result: FitResult,
    pub objective: f64,
}

impl FitRecord {
    pub fn new(result: FitResult, points: &PointSet) -> Self {
        let (kind, objective) = match &result.circle {
            CircleOrLine::Circle(c) => ("circle", objective_geometric(points, c)),
            CircleOrLine::Line(l) => (
                "line",
                points
                    .iter()
                    .map(|p| {
                        let d = l.b * p.x + l.c * p.y + l.d;
                        d * d
                    })
                    .sum(),
            ),
        };
        FitRecord {
            method: result.method.name().to_string(),
            kind,
            result,
            objective,
        }
    }
}

pub fn render_fits(records: &[FitRecord], format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(records).expect("serializable");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut out = String::from("method,kind,a,b,r,line_b,line_c,line_d,objective\n");
            for rec in records {
                let (circle, line) = match &rec.result.circle {
                    CircleOrLine::Circle(c) => (
                        format!("{},{},{}", sig17(c.a), sig17(c.b), sig17(c.r)),
                        ",,".to_string(),
                    ),
                    CircleOrLine::Line(l) => (
                        ",,".to_string(),
                        format!("{},{},{}", sig17(l.b), sig17(l.c), sig17(l.d)),
                    ),
                };
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    rec.method,
                    rec.kind,
                    circle,
                    line,
                    sig17(rec.objective)
                ));
            }
            out
        }
        Format::Table => {
            let mut out = format!(
                "{:<8} {:<7} {:>13} {:>13} {:>13} {:>13}  {}\n",
                "method", "kind", "a | b", "b | c", "r | d", "objective", "path"
            );
            for rec in records {
                let (p1, p2, p3) = match &rec.result.circle {
                    CircleOrLine::Circle(c) => (c.a, c.b, c.r),
                    CircleOrLine::Line(l) => (l.b, l.c, l.d),
                };
                out.push_str(&format!(
                    "{:<8} {:<7} {:>13} {:>13} {:>13} {:>13}  {}\n",
                    rec.method,
                    rec.kind,
                    sig6(p1),
                    sig6(p2),
                    sig6(p3),
                    sig6(rec.objective),
                    rec.result.diagnostics.path.name()
                ));
            }
            out
        }
    }
}

/// Json view of a report without the elapsed-time field, so json output is
/// byte-stable across reruns of the same config.
#[derive(Serialize)]
struct StableReport<'a> {
    config: &'a circlefit::bench::ExperimentConfig,
    trials_completed: u64,
    rows: &'a [circlefit::bench::MethodRow],
}

pub fn render_bench(reports: &[ExperimentReport], format: Format, sweep: bool) -> String {
    match format {
        Format::Json => {
            let stable: Vec<StableReport> = reports
                .iter()
                .map(|r| StableReport {
                    config: &r.config,
                    trials_completed: r.trials_completed,
                    rows: &r.rows,
                })
                .collect();
            let mut s = if sweep {
                serde_json::to_string_pretty(&stable).expect("serializable")
            } else {
                serde_json::to_string_pretty(&stable[0]).expect("serializable")
            };
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut out = String::new();
            if sweep {
                out.push_str("n,method,total_mse,variance,ess_bias_sq,remainder,excluded_trials\n");
            } else {
                out.push_str("method,total_mse,variance,ess_bias_sq,remainder,excluded_trials\n");
            }
            for report in reports {
                for row in &report.rows {
                    if sweep {
                        out.push_str(&format!("{},", report.config.n));
                    }
                    let b = &row.breakdown;
                    out.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        b.method,
                        sig17(b.total_mse),
                        sig17(b.variance_theory),
                        sig17(b.ess_bias_sq),
                        sig17(b.remainder),
                        row.excluded_trials
                    ));
                }
            }
            out
        }
        Format::Table => {
            let mut out = String::new();
            for report in reports {
                let cfg = &report.config;
                out.push_str(&format!(
                    "n={} sigma={} R={} arc={}deg trials={} seed={}\n",
                    cfg.n, cfg.sigma, cfg.circle.r, cfg.arc_degrees, cfg.trials, cfg.seed
                ));
                out.push_str(&format!(
                    "{:<8} {:>13} {:>13} {:>13} {:>13} {:>9}\n",
                    "method", "total_mse", "variance", "ess_bias^2", "remainder", "excluded"
                ));
                for row in &report.rows {
                    let b = &row.breakdown;
                    out.push_str(&format!(
                        "{:<8} {:>13} {:>13} {:>13} {:>13} {:>9}{}\n",
                        b.method.name(),
                        sig6(b.total_mse),
                        sig6(b.variance_theory),
                        sig6(b.ess_bias_sq),
                        sig6(b.remainder),
                        row.excluded_trials,
                        if row.warning { "  [warning: >1% failures]" } else { "" }
                    ));
                }
                out.push_str(&format!("elapsed: {:.2}s\n\n", report.elapsed_seconds));
            }
            out
        }
    }
}
