//! Runtime-selectable fitting strategies.
//!
//! Every algorithm implements [`CircleFitter`] and is registered by name in
//! a [`Registry`], so callers (the CLI, the benchmark harness) can pick
//! fitters from strings without matching on concrete types.

use crate::alg::{fit_algebraic, Diagnostics, FitResult, SolvePath};
use crate::error::{Error, Result};
use crate::geom::{CircleOrLine, PointSet};
use crate::odr::{default_init, fit_geometric, LmOptions};
use crate::Method;

/// A circle-fitting strategy.
pub trait CircleFitter: Send + Sync {
    /// Registry name ("kasa", "pratt", "taubin", "hyper", "geom").
    fn name(&self) -> &'static str;

    fn method(&self) -> Method;

    fn fit(&self, ps: &PointSet) -> Result<FitResult>;
}

/// One of the four non-iterative algebraic fits.
#[derive(Debug, Clone, Copy)]
pub struct AlgebraicFitter {
    method: Method,
}

impl AlgebraicFitter {
    pub fn new(method: Method) -> Result<Self> {
        if method == Method::Geometric {
            return Err(Error::InvalidInput(
                "the geometric fit is not algebraic; use GeometricFitter".into(),
            ));
        }
        Ok(AlgebraicFitter { method })
    }
}

impl CircleFitter for AlgebraicFitter {
    fn name(&self) -> &'static str {
        self.method.name()
    }

    fn method(&self) -> Method {
        self.method
    }

    fn fit(&self, ps: &PointSet) -> Result<FitResult> {
        fit_algebraic(ps, self.method)
    }
}

/// The orthogonal-distance fit, initialized from the best available
/// algebraic estimate.
#[derive(Debug, Clone, Copy, Default)]
pub struct GeometricFitter {
    pub options: LmOptions,
}

impl CircleFitter for GeometricFitter {
    fn name(&self) -> &'static str {
        Method::Geometric.name()
    }

    fn method(&self) -> Method {
        Method::Geometric
    }

    fn fit(&self, ps: &PointSet) -> Result<FitResult> {
        let init = default_init(ps)?;
        let report = fit_geometric(ps, &init, &self.options)?;
        let circle = report.circle;
        Ok(FitResult {
            circle: CircleOrLine::Circle(circle),
            alg: circle.to_alg(),
            method: Method::Geometric,
            diagnostics: Diagnostics {
                eta: None,
                residual: Some(report.objective),
                path: SolvePath::LevenbergMarquardt,
                centroid: ps.centroid(),
                iterations: Some(report.iterations),
                converged: Some(report.converged),
            },
        })
    }
}

/// Name-indexed collection of all known fitters.
pub struct Registry {
    fitters: Vec<Box<dyn CircleFitter>>,
}

impl Registry {
    /// Registry with all five fitters under their default settings.
    pub fn with_defaults() -> Self {
        let mut fitters: Vec<Box<dyn CircleFitter>> = Vec::new();
        for method in Method::ALGEBRAIC {
            fitters.push(Box::new(AlgebraicFitter::new(method).unwrap()));
        }
        fitters.push(Box::new(GeometricFitter::default()));
        Registry { fitters }
    }

    pub fn register(&mut self, fitter: Box<dyn CircleFitter>) {
        self.fitters.push(fitter);
    }

    /// Looks a fitter up by name; "geometric" is accepted as an alias for
    /// "geom".
    pub fn get(&self, name: &str) -> Result<&dyn CircleFitter> {
        let method: Method = name.parse()?;
        self.fitters
            .iter()
            .map(|f| f.as_ref())
            .find(|f| f.method() == method)
            .ok_or_else(|| Error::InvalidInput(format!("no fitter registered for '{name}'")))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.fitters.iter().map(|f| f.name()).collect()
    }
}

impl Default for Registry {
    fn default() -> Self {
        Registry::with_defaults()
    }
}
