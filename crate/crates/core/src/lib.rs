//! Numerical toolkit for planar nonlocal minimal graphs.
//!
//! The crate evaluates fractional mean curvature and fractional perimeter for
//! sets that are vertical perturbations of a graph, solves the associated
//! graph equation with prescribed exterior data by damped pseudo-time descent,
//! and checks the quantitative inequalities (boundary mass bounds, curvature
//! budget, reflection comparison) that control boundary stickiness and the
//! sign/symmetry of solutions.
//!
//! Conventions used throughout:
//! * the ambient set is the subgraph `E_u = {(x, y) : y < u(x)}`;
//! * curvature is positive where the complement dominates, so the descent
//!   direction for the interfacial energy is `u ← u − τ·H`;
//! * every quadrature returns a value *and* an error estimate, and the error
//!   is propagated, never dropped.

pub mod kernel;
pub mod model;
pub mod perimeter;
pub mod quad;
pub mod solver;
pub mod verify;

pub use kernel::{FracOrder, QuadratureSpec};
