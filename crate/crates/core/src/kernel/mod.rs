//! Fractional-kernel evaluations: the vertical-slice profile G, nonlocal mean
//! curvature of graphs (fast 1D reduction) and of general subgraph-plus-blocks
//! sets (2D brute force), and rectangle-rectangle interaction energies.

pub mod graph;
pub mod interact;
pub mod profile;
pub mod region;

pub use graph::{nmc_graph, PiecewiseLinearFn};
pub use interact::interaction;
pub use profile::{g_profile, GPrimitive, GProfile};
pub use region::{nmc_set_bruteforce, Rect, RegionSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad;

/// Fractional order `s` of the interaction kernel `|X−Y|^{−(2+s)}`,
/// constrained to the open interval (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(s: f64) -> Result<Self, KernelError> {
        if s.is_finite() && s > 0.0 && s < 1.0 {
            Ok(FracOrder(s))
        } else {
            Err(KernelError::InvalidOrder(s))
        }
    }

    #[inline]
    pub fn s(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for FracOrder {
    type Error = KernelError;
    fn try_from(s: f64) -> Result<Self, KernelError> {
        FracOrder::new(s)
    }
}

impl From<FracOrder> for f64 {
    fn from(o: FracOrder) -> f64 {
        o.0
    }
}

/// Budget for adaptive subdivision inside a single 1D integral.
pub(crate) const MAX_INTERVALS: usize = 4000;

/// Quadrature control: tolerances plus the two geometric cutoffs used by the
/// curvature integrals — the half-width of the symmetric window skipped around
/// the singular point, and the radius beyond which the integrand is handled by
/// a compactifying substitution against the constant graph tails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub tail_radius: f64,
    pub singular_width: f64,
}

impl QuadratureSpec {
    /// Sensible defaults for a domain of the given width: the singular window
    /// is a thousandth of the width, the tail treatment starts one width out.
    pub fn for_domain_width(width: f64) -> Self {
        QuadratureSpec {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            tail_radius: width.max(1.0),
            singular_width: 1e-3 * width,
        }
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.singular_width > 0.0
            && self.tail_radius > self.singular_width;
        if ok {
            Ok(())
        } else {
            Err(KernelError::InvalidSpec(format!(
                "need rel_tol, abs_tol > 0 and tail_radius > singular_width > 0, got {self:?}"
            )))
        }
    }

    pub(crate) fn opts(&self) -> quad::QuadOpts {
        quad::QuadOpts {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_intervals: MAX_INTERVALS,
        }
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec::for_domain_width(2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// A computed value together with its accumulated error estimate
/// (quadrature error plus any documented model error, e.g. the singular
/// window straddling a kink).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn new(value: f64, error: f64) -> Self {
        Estimate { value, error }
    }

    pub fn zero() -> Self {
        Estimate { value: 0.0, error: 0.0 }
    }
}

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("fractional order must lie strictly in (0, 1), got {0}")]
    InvalidOrder(f64),
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
    #[error("{context}: {source}")]
    NonconvergedQuadrature {
        context: &'static str,
        #[source]
        source: quad::Nonconverged,
    },
    #[error("point ({x:.6}, {y:.6}) is not on the set boundary: membership does not flip across it")]
    PointNotOnBoundary { x: f64, y: f64 },
    #[error("rectangles overlap; the interaction energy is only taken between disjoint sets")]
    OverlappingRegions,
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
}

impl KernelError {
    pub(crate) fn quad(context: &'static str, source: quad::Nonconverged) -> Self {
        KernelError::NonconvergedQuadrature { context, source }
    }
}
