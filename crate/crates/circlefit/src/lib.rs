//! Circle-fitting toolkit.
//!
//! Implements the orthogonal-distance (geometric) circle fit and four
//! non-iterative algebraic fits -- Kasa, Pratt, Taubin, and the
//! hyperaccurate "Hyper" fit -- together with the second-order error
//! analysis that separates their behavior: the KCR variance lower bound,
//! per-method essential biases, full bias expressions, and an MSE
//! decomposition. A deterministic Monte Carlo harness reproduces the
//! bias/variance benchmark tables.
//!
//! Each fitting algorithm is available behind the [`fitter::CircleFitter`]
//! trait and can be selected by name at runtime through
//! [`fitter::Registry`].

pub mod alg;
pub mod analysis;
pub mod bench;
pub mod error;
pub mod fitter;
pub mod geom;
pub mod odr;

pub use error::{Error, Result};
pub use geom::{
    objective_geometric, signed_distance, AlgParams, CircleGeom, CircleOrLine, Line, Normalization,
    Point, PointSet, DEFAULT_LINE_THRESHOLD,
};

use serde::Serialize;
use std::fmt;
use std::str::FromStr;

/// The fitting methods the toolkit knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    Kasa,
    Pratt,
    Taubin,
    Hyper,
    Geometric,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Kasa,
        Method::Pratt,
        Method::Taubin,
        Method::Hyper,
        Method::Geometric,
    ];

    /// The four non-iterative fits.
    pub const ALGEBRAIC: [Method; 4] = [Method::Kasa, Method::Pratt, Method::Taubin, Method::Hyper];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Kasa => "kasa",
            Method::Pratt => "pratt",
            Method::Taubin => "taubin",
            Method::Hyper => "hyper",
            Method::Geometric => "geom",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "kasa" => Ok(Method::Kasa),
            "pratt" => Ok(Method::Pratt),
            "taubin" => Ok(Method::Taubin),
            "hyper" => Ok(Method::Hyper),
            "geom" | "geometric" => Ok(Method::Geometric),
            other => Err(Error::InvalidInput(format!("unknown method '{other}'"))),
        }
    }
}
