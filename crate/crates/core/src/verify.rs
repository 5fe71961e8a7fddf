//! Executable checks of the closed-form constants and inequalities behind
//! the barrier construction.
//!
//! Every check reports lhs, rhs, the intended relation, and a signed margin
//! (positive = satisfied), never a bare boolean: a failing configuration
//! shows *how far* it fails. Quadrature-based sides carry a tolerance bound
//! to the integration error; purely algebraic sides get a machine-epsilon
//! scale tolerance.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::kernel::{GProfile, KernelError, Point, QuadratureSpec};
use crate::model::{eval_datum, ExteriorDatum, ModelError, Params};
use crate::quad;

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("evaluation point {value} lies outside the admissible range ({lo}, {hi}]")]
    PointOutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("flat-band envelope needs sup|u0| + delta <= 2, got {sup} + {delta}")]
    EnvelopeViolated { sup: f64, delta: f64 },
    #[error("unusable exterior datum: {0}")]
    InvalidDatum(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Comparison direction of an inequality check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Gt => ">",
            Relation::Ge => ">=",
        }
    }

    fn margin(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            Relation::Lt | Relation::Le => rhs - lhs,
            Relation::Gt | Relation::Ge => lhs - rhs,
            Relation::Eq => -(lhs - rhs).abs(),
        }
    }

    fn strict(self) -> bool {
        matches!(self, Relation::Lt | Relation::Gt)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One checked inequality: `lhs relation rhs`, with `margin` the signed slack
/// (positive = satisfied) and `pass` ⟺ margin ≥ −tolerance (strict relations
/// require margin > −tolerance).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IneqReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IneqReport {
    pub fn new(
        name: impl Into<String>,
        lhs: f64,
        rhs: f64,
        relation: Relation,
        tolerance: f64,
    ) -> IneqReport {
        let margin = relation.margin(lhs, rhs);
        let pass = if relation.strict() { margin > -tolerance } else { margin >= -tolerance };
        IneqReport { name: name.into(), lhs, rhs, relation, margin, tolerance, pass }
    }
}

/// Geometric smallness condition on the domain width: the side-bump gain
/// h^{2+s}/(h²+2)^{(2+s)/2} must strictly exceed the far-strip cost
/// 2C̄/((1+s)(d−d₀)^{1+s}). Pure arithmetic; the margin is exactly θ.
pub fn check_ks_geop(p: &Params) -> IneqReport {
    let lhs = p.bump_gain();
    let rhs = p.strip_cost();
    let tol = 1e-12 * lhs.abs().max(rhs.abs()).max(1.0);
    IneqReport::new("ks_geop", lhs, rhs, Relation::Gt, tol)
}

/// Weighted mass of the exterior bump, ∫ u₀(x)·|d₀−d−x|^{−(2+s)} dx over its
/// support. With the preset constants and the indicator datum this equals
/// 1.6·η for every order.
pub fn datum_mass_integral(
    u0: &ExteriorDatum,
    p: &Params,
    q: &QuadratureSpec,
) -> Result<f64, VerifyError> {
    q.validate()?;
    let (l1, l2) = u0.support();
    let edge = -p.d - p.h;
    if l2 > edge + 1e-12 * p.d.max(1.0) {
        return Err(VerifyError::InvalidDatum(format!(
            "support must end left of the bump gap at {edge}, got {l2}"
        )));
    }
    if u0.plateau_height == 0.0 {
        return Ok(0.0);
    }
    let pole = p.d0 - p.d;
    let pw = -(2.0 + p.order.s());
    let mut seeds = Vec::new();
    for corner in [l1 + u0.ramp_width, l2 - u0.ramp_width] {
        if corner > l1 && corner < l2 {
            seeds.push(corner);
        }
    }
    let est = quad::integrate(
        &|x: f64| eval_datum(u0, x) * (pole - x).powf(pw),
        l1,
        l2,
        &seeds,
        &q.opts(),
    )
    .map_err(|e| KernelError::quad("datum mass sweep", e))?;
    Ok(est.value)
}

/// Far-strip side: the interaction of an evaluation point P = (pt_p, q_y)
/// with the band B = (0,∞)×(−C̄η, 0) is largest at q_y = 0 and bounded by the
/// closed form C̄η/((1+s)(d−d₀)^{1+s}). lhs is the actual integral at the
/// worst q_y, computed through the compactified variable σ = 1/(x − pt_p).
pub fn bump_b_bound(
    p: &Params,
    pt_p: f64,
    q: &QuadratureSpec,
) -> Result<IneqReport, VerifyError> {
    q.validate()?;
    let (lo, hi) = (-p.d, -p.d + p.d0);
    if !(pt_p > lo && pt_p <= hi) {
        return Err(VerifyError::PointOutOfRange { value: pt_p, lo, hi });
    }
    let s = p.order.s();
    let depth = p.cbar * p.eta;
    let rhs = depth / ((1.0 + s) * (p.d - p.d0).powf(1.0 + s));
    let (lhs, err) = if depth == 0.0 {
        (0.0, 0.0)
    } else {
        let g = GProfile::shared(p.order);
        let sig_max = -1.0 / pt_p;
        let est = quad::integrate(
            &|sig: f64| {
                if sig <= 0.0 {
                    return 0.0;
                }
                sig.powf(s - 1.0) * g.eval(depth * sig)
            },
            0.0,
            sig_max,
            &quad::dyadic_seeds_toward(0.0, sig_max, 30),
            &q.opts(),
        )
        .map_err(|e| KernelError::quad("band interaction sweep", e))?;
        (est.value, est.error)
    };
    let tol = (10.0 * err).max(1e-9 * rhs.abs()).max(q.abs_tol);
    Ok(IneqReport::new("bump_b_bound", lhs, rhs, Relation::Le, tol))
}

/// Side-bump gain: the interaction of P = (p, q_y) with the region under the
/// exterior bump dominates the gain factor times the weighted bump mass.
pub fn bump_a_lower(
    p: &Params,
    pt: Point,
    u0: &ExteriorDatum,
    q: &QuadratureSpec,
) -> Result<IneqReport, VerifyError> {
    q.validate()?;
    let (lo, hi) = (-p.d, -p.d + p.d0);
    let delta = p.delta();
    if !(pt.x > lo && pt.x <= hi) {
        return Err(VerifyError::PointOutOfRange { value: pt.x, lo, hi });
    }
    if pt.y.abs() > delta + 1e-15 {
        return Err(VerifyError::PointOutOfRange { value: pt.y, lo: -delta, hi: delta });
    }
    let sup = u0.plateau_height.abs();
    if sup + delta > 2.0 {
        return Err(VerifyError::EnvelopeViolated { sup, delta });
    }
    let mass = datum_mass_integral(u0, p, q)?;
    let rhs = p.bump_gain() * mass;
    let s = p.order.s();
    let g = GProfile::shared(p.order);
    let (l1, l2) = u0.support();
    let mut seeds = Vec::new();
    for corner in [l1 + u0.ramp_width, l2 - u0.ramp_width] {
        if corner > l1 && corner < l2 {
            seeds.push(corner);
        }
    }
    let est = quad::integrate(
        &|x: f64| {
            let tau = pt.x - x;
            let inv = 1.0 / tau;
            tau.powf(-(1.0 + s))
                * (g.eval((eval_datum(u0, x) - pt.y) * inv) - g.eval(-pt.y * inv))
        },
        l1,
        l2,
        &seeds,
        &q.opts(),
    )
    .map_err(|e| KernelError::quad("bump interaction sweep", e))?;
    let tol = (10.0 * est.error).max(1e-9 * rhs.abs()).max(q.abs_tol);
    Ok(IneqReport::new("bump_a_lower", est.value, rhs, Relation::Ge, tol))
}

/// Net curvature at the touching point: the barrier's curvature defect C·δ
/// must stay below half the constructive gain C★θδ/2. With C★ = 4C/θ this
/// holds identically with slack exactly C·δ; a nonpositive θ fails outright.
pub fn net_curvature_margin(p: &Params, _q: &QuadratureSpec) -> IneqReport {
    if !(p.theta > 0.0) || !p.cstar.is_finite() {
        return IneqReport {
            name: "net_curvature_margin".into(),
            lhs: f64::INFINITY,
            rhs: 0.0,
            relation: Relation::Le,
            margin: f64::NEG_INFINITY,
            tolerance: 0.0,
            pass: false,
        };
    }
    let delta = p.delta();
    let lhs = p.barrier_c() * delta;
    let rhs = 0.5 * p.cstar * p.theta * delta;
    let tol = 1e-12 * lhs.abs().max(rhs.abs()).max(1.0);
    IneqReport::new("net_curvature_margin", lhs, rhs, Relation::Le, tol)
}

/// Reflection X ↦ X̃ = (−x, 2·up − y) across the vertical axis and the graph
/// height at the evaluation point. The abscissa `p` of the evaluation point
/// does not enter the map itself, only the closeness comparison below.
pub fn reflect_tilde(x: Point, _p: f64, up: f64) -> Point {
    Point::new(-x.x, 2.0 * up - x.y)
}

/// Whether the reflected point is at least as close to P = (p, u(p)) as the
/// original: |X̃−P|² − |X−P|² = 4·x·p exactly, so this holds whenever x and p
/// have opposite signs (the intended use is x ≥ 0, p ≤ 0).
pub fn check_reflect(x: Point, p: Point) -> bool {
    let t = reflect_tilde(x, p.x, p.y);
    let d2 = |a: Point| (a.x - p.x).powi(2) + (a.y - p.y).powi(2);
    d2(t) <= d2(x)
}
