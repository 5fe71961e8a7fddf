//! Structural constants, the explicit exterior-datum family, and the
//! discrete solution state.
//!
//! The preset ties every derived constant to the fractional order: the
//! curvature budget `theta` must come out positive for the boundary-mass
//! argument to close, and `cstar` encodes the constructive choice
//! `C★ = 4C/θ` for the barrier-error constant C (default 1, adjustable by
//! rebuilding with another value).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{FracOrder, KernelError, PiecewiseLinearFn};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("ramp width {ramp} exceeds the admissible maximum {max}: the datum must vanish on the collar next to the domain")]
    RampTooWide { ramp: f64, max: f64 },
    #[error("indicator datum (ramp_width = 0) is not continuous; the solver and subgraph assembly need ramp_width > 0")]
    IndicatorDatumNotContinuous,
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Structural parameters: fractional order, the stickiness exponent input
/// `epsilon0`, datum strength `eta`, and the derived geometry/budget fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub order: FracOrder,
    pub epsilon0: f64,
    pub eta: f64,
    pub cbar: f64,
    pub d: f64,
    pub d0: f64,
    pub h: f64,
    pub d1: f64,
    pub d2: f64,
    pub theta: f64,
    pub cstar: f64,
}

impl Params {
    /// Left-hand side of the curvature budget: the kernel mass a unit-height
    /// bump at unit horizontal distance is guaranteed to deliver.
    pub fn bump_gain(&self) -> f64 {
        let s = self.order.s();
        self.h.powf(2.0 + s) / (self.h * self.h + 2.0).powf((2.0 + s) / 2.0)
    }

    /// Right-hand side of the curvature budget: twice the worst-case mass of
    /// the compensating strip beyond distance `d − d0`.
    pub fn strip_cost(&self) -> f64 {
        let s = self.order.s();
        2.0 * self.cbar / ((1.0 + s) * (self.d - self.d0).powf(1.0 + s))
    }

    /// Recompute `theta` and `cstar` after a manual geometry override,
    /// keeping the barrier-error constant that `cstar` encodes.
    pub fn recompute_derived(&mut self, barrier_c: f64) {
        self.theta = self.bump_gain() - self.strip_cost();
        self.cstar = if self.theta > 0.0 { 4.0 * barrier_c / self.theta } else { f64::INFINITY };
    }

    /// The barrier-error constant implied by `cstar` (inverse of C★ = 4C/θ).
    pub fn barrier_c(&self) -> f64 {
        self.cstar * self.theta / 4.0
    }

    /// The contact-height scale δ = η/C★.
    pub fn delta(&self) -> f64 {
        if self.eta == 0.0 {
            0.0
        } else {
            self.eta / self.cstar
        }
    }

    /// Largest admissible ramp width for the datum bump (the ramp must not
    /// enter the collar next to the domain).
    pub fn max_ramp_width(&self) -> f64 {
        self.d1
    }

    /// Default ramp width: the nominal 5% of the plateau length, capped at
    /// half the admissible maximum so the support always stays clear of the
    /// collar.
    pub fn default_ramp_width(&self) -> f64 {
        (0.05 * (self.d2 - self.d1)).min(0.5 * self.d1)
    }
}

/// The explicit parameter preset with every derived field filled in,
/// using the default barrier-error constant C = 1.
pub fn paper_params(order: FracOrder, epsilon0: f64, eta: f64) -> Result<Params, ModelError> {
    paper_params_with_barrier(order, epsilon0, eta, 1.0)
}

/// Same preset with an explicit barrier-error constant C (sets C★ = 4C/θ).
pub fn paper_params_with_barrier(
    order: FracOrder,
    epsilon0: f64,
    eta: f64,
    barrier_c: f64,
) -> Result<Params, ModelError> {
    if !(epsilon0.is_finite() && epsilon0 > 0.0) {
        return Err(ModelError::InvalidParameter(format!("epsilon0 must be > 0, got {epsilon0}")));
    }
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(ModelError::InvalidParameter(format!("eta must be >= 0, got {eta}")));
    }
    if !(barrier_c.is_finite() && barrier_c > 0.0) {
        return Err(ModelError::InvalidParameter(format!(
            "barrier constant must be > 0, got {barrier_c}"
        )));
    }
    let s = order.s();
    let cbar = 2.0_f64.powf(2.0 + s) * (1.0 + s);
    let d = 3.0_f64.powf((2.0 + s) / (2.0 * (1.0 + s))) * 2.0_f64.powf((3.0 + s) / (1.0 + s)) + 2.0;
    let d1 = 2.0 * ((10.0_f64 / 9.0).powf(1.0 / (1.0 + s)) - 1.0);
    let d2 = 2.0 * (10.0_f64.powf(1.0 / (1.0 + s)) - 1.0);
    let mut p = Params {
        order,
        epsilon0,
        eta,
        cbar,
        d,
        d0: 1.0,
        h: 1.0,
        d1,
        d2,
        theta: 0.0,
        cstar: 0.0,
    };
    p.recompute_derived(barrier_c);
    Ok(p)
}

/// Odd exterior datum: a trapezoidal bump of height `plateau_height` on
/// `bump_support` to the left of the domain, mirrored with opposite sign on
/// the right, zero on the collars `(±d ∓ h)` and inside `(−d, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExteriorDatum {
    /// Domain half-width: the datum governs |x| ≥ d.
    pub d: f64,
    /// Plateau interval (l1, l2) on the negative side, l2 < −d.
    pub bump_support: (f64, f64),
    pub plateau_height: f64,
    pub ramp_width: f64,
    /// Mirror the bump with opposite sign on the right; when false the
    /// datum vanishes for x ≥ d (the sign experiments require `true`).
    pub odd_extension: bool,
}

impl ExteriorDatum {
    /// Zero datum over the domain (−d, d).
    pub fn zero(d: f64) -> ExteriorDatum {
        ExteriorDatum {
            d,
            bump_support: (-d - 3.0, -d - 2.0),
            plateau_height: 0.0,
            ramp_width: 0.5,
            odd_extension: true,
        }
    }

    pub fn is_continuous(&self) -> bool {
        self.ramp_width > 0.0 || self.plateau_height == 0.0
    }

    /// Support of the left bump including ramps.
    pub fn support(&self) -> (f64, f64) {
        (self.bump_support.0 - self.ramp_width, self.bump_support.1 + self.ramp_width)
    }

    fn left_shape(&self, x: f64) -> f64 {
        let (l1, l2) = self.bump_support;
        let a = self.plateau_height;
        let r = self.ramp_width;
        if r == 0.0 {
            return if x >= l1 && x <= l2 { a } else { 0.0 };
        }
        if x <= l1 - r || x >= l2 + r {
            0.0
        } else if x < l1 {
            a * (x - (l1 - r)) / r
        } else if x <= l2 {
            a
        } else {
            a * ((l2 + r) - x) / r
        }
    }
}

/// Datum evaluation anywhere on the line; odd by construction, zero inside
/// the domain (where the solver owns the values).
pub fn eval_datum(u0: &ExteriorDatum, x: f64) -> f64 {
    if x <= -u0.d {
        u0.left_shape(x)
    } else if x >= u0.d && u0.odd_extension {
        -u0.left_shape(-x)
    } else {
        0.0
    }
}

/// The explicit datum family for a parameter set: plateau height C̄η on
/// (−d−h−d₂, −d−h−d₁), ramps of the given width, odd-extended.
pub fn paper_datum(p: &Params, ramp_width: f64) -> Result<ExteriorDatum, ModelError> {
    if !(ramp_width.is_finite() && ramp_width >= 0.0) {
        return Err(ModelError::InvalidParameter(format!(
            "ramp width must be finite and >= 0, got {ramp_width}"
        )));
    }
    if ramp_width > p.max_ramp_width() {
        return Err(ModelError::RampTooWide { ramp: ramp_width, max: p.max_ramp_width() });
    }
    let l1 = -p.d - p.h - p.d2;
    let l2 = -p.d - p.h - p.d1;
    Ok(ExteriorDatum {
        d: p.d,
        bump_support: (l1, l2),
        plateau_height: p.cbar * p.eta,
        ramp_width,
        odd_extension: true,
    })
}

/// Discrete solution state: `n` uniform nodes strictly inside (−d, d) with
/// spacing Δx = 2d/(n+1), plus the exterior datum that governs evaluation
/// outside. The graph connects the outermost nodes to the datum's boundary
/// limit with a steep segment — the discrete stand-in for the boundary jump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    datum: ExteriorDatum,
    n_nodes: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn flat(datum: ExteriorDatum, n_nodes: usize) -> Result<Self, ModelError> {
        Self::with_values(datum, n_nodes, vec![0.0; n_nodes])
    }

    pub fn with_values(
        datum: ExteriorDatum,
        n_nodes: usize,
        values: Vec<f64>,
    ) -> Result<Self, ModelError> {
        if n_nodes < 3 {
            return Err(ModelError::InvalidParameter(format!(
                "need at least 3 interior nodes, got {n_nodes}"
            )));
        }
        if values.len() != n_nodes {
            return Err(ModelError::InvalidParameter(format!(
                "value count {} does not match node count {n_nodes}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::InvalidParameter("non-finite node value".into()));
        }
        Ok(GridFunction { datum, n_nodes, values })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn d(&self) -> f64 {
        self.datum.d
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.datum.d / (self.n_nodes as f64 + 1.0)
    }

    pub fn node_x(&self, i: usize) -> f64 {
        -self.datum.d + (i as f64 + 1.0) * self.dx()
    }

    pub fn node_xs(&self) -> Vec<f64> {
        (0..self.n_nodes).map(|i| self.node_x(i)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn datum(&self) -> &ExteriorDatum {
        &self.datum
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Mirror node index across the center.
    pub fn mirror(&self, i: usize) -> usize {
        self.n_nodes - 1 - i
    }

    /// Project onto odd functions: v_i ← (v_i − v_{mirror})/2.
    pub fn odd_symmetrize(&mut self) {
        let n = self.n_nodes;
        for i in 0..(n + 1) / 2 {
            let j = n - 1 - i;
            let anti = 0.5 * (self.values[i] - self.values[j]);
            self.values[i] = anti;
            self.values[j] = -anti;
        }
    }

    /// Departure from odd symmetry: max_i |v_i + v_{mirror(i)}|.
    pub fn odd_defect(&self) -> f64 {
        let n = self.n_nodes;
        (0..n).fold(0.0_f64, |m, i| m.max((self.values[i] + self.values[n - 1 - i]).abs()))
    }

    /// Assemble the full piecewise-linear graph over the line: datum bump,
    /// boundary connection, interior nodes, mirrored bump.
    pub fn profile(&self) -> Result<PiecewiseLinearFn, ModelError> {
        if !self.datum.is_continuous() {
            return Err(ModelError::IndicatorDatumNotContinuous);
        }
        let d = self.datum.d;
        let mut pts: Vec<(f64, f64)> = Vec::with_capacity(self.n_nodes + 10);
        let a = self.datum.plateau_height;
        if a != 0.0 {
            let (l1, l2) = self.datum.bump_support;
            let r = self.datum.ramp_width;
            pts.push((l1 - r, 0.0));
            pts.push((l1, a));
            pts.push((l2, a));
            pts.push((l2 + r, 0.0));
        }
        pts.push((-d, 0.0));
        for i in 0..self.n_nodes {
            pts.push((self.node_x(i), self.values[i]));
        }
        pts.push((d, 0.0));
        if a != 0.0 && self.datum.odd_extension {
            let (l1, l2) = self.datum.bump_support;
            let r = self.datum.ramp_width;
            pts.push((-(l2 + r), 0.0));
            pts.push((-l2, -a));
            pts.push((-l1, -a));
            pts.push((-(l1 - r), 0.0));
        }
        Ok(PiecewiseLinearFn::from_points(&pts)?)
    }

    /// Evaluate the assembled graph (convenience; hot paths should reuse
    /// `profile()` directly).
    pub fn eval(&self, x: f64) -> Result<f64, ModelError> {
        Ok(self.profile()?.eval(x))
    }
}
