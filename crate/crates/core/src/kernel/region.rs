//! Planar sets given as a subgraph plus/minus axis-aligned blocks, and the
//! brute-force 2D curvature integral over them.
//!
//! This is the ground-truth oracle for the 1D graph reduction: it shares the
//! closed-form inner y-integral but assembles the outer integral differently
//! (left and right of the singular point integrated separately, blocks as
//! explicit corrections), so systematic agreement between the two routes is
//! meaningful evidence.

use serde::{Deserialize, Serialize};

use super::graph::{window_error, PiecewiseLinearFn};
use super::{Estimate, FracOrder, GProfile, KernelError, Point, QuadratureSpec};
use crate::quad;

/// Closed axis-aligned rectangle with positive area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self, KernelError> {
        let r = Rect { x0, x1, y0, y1 };
        if [x0, x1, y0, y1].iter().any(|v| !v.is_finite()) || x0 >= x1 || y0 >= y1 {
            return Err(KernelError::InvalidGeometry(format!(
                "rectangle must have positive area: {r:?}"
            )));
        }
        Ok(r)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Rect {
        Rect { x0: self.x0 + dx, x1: self.x1 + dx, y0: self.y0 + dy, y1: self.y1 + dy }
    }

    fn interior_overlaps(&self, other: &Rect) -> bool {
        self.x0 < other.x1 && other.x0 < self.x1 && self.y0 < other.y1 && other.y0 < self.y1
    }
}

/// `E = (subgraph ∖ ⋃removed) ∪ ⋃added`: the subgraph of a piecewise-linear
/// function, with blocks carved out below the graph and blocks attached above.
#[derive(Debug, Clone)]
pub struct RegionSet {
    graph: PiecewiseLinearFn,
    added: Vec<Rect>,
    removed: Vec<Rect>,
}

impl RegionSet {
    pub fn subgraph(graph: PiecewiseLinearFn) -> Self {
        RegionSet { graph, added: Vec::new(), removed: Vec::new() }
    }

    /// Validates block placement by sampling corners, edge midpoints, and the
    /// graph breakpoints inside each block's x-range.
    pub fn new(
        graph: PiecewiseLinearFn,
        added: Vec<Rect>,
        removed: Vec<Rect>,
    ) -> Result<Self, KernelError> {
        let probe_xs = |r: &Rect| {
            let mut xs = vec![r.x0, 0.5 * (r.x0 + r.x1), r.x1];
            xs.extend(graph.breakpoints().iter().copied().filter(|b| *b > r.x0 && *b < r.x1));
            xs
        };
        for r in &added {
            for x in probe_xs(r) {
                if r.y0 < graph.eval(x) - 1e-12 {
                    return Err(KernelError::InvalidGeometry(format!(
                        "added block {r:?} dips below the graph at x = {x}"
                    )));
                }
            }
        }
        for r in &removed {
            for x in probe_xs(r) {
                if r.y1 > graph.eval(x) + 1e-12 {
                    return Err(KernelError::InvalidGeometry(format!(
                        "removed block {r:?} pokes above the graph at x = {x}"
                    )));
                }
            }
        }
        let all: Vec<&Rect> = added.iter().chain(removed.iter()).collect();
        for i in 0..all.len() {
            for j in (i + 1)..all.len() {
                if all[i].interior_overlaps(all[j]) {
                    return Err(KernelError::InvalidGeometry(format!(
                        "blocks {:?} and {:?} overlap",
                        all[i], all[j]
                    )));
                }
            }
        }
        Ok(RegionSet { graph, added, removed })
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        for r in &self.added {
            if r.contains(x, y) {
                return true;
            }
        }
        for r in &self.removed {
            if r.contains(x, y) {
                return false;
            }
        }
        y < self.graph.eval(x)
    }

    pub fn graph(&self) -> &PiecewiseLinearFn {
        &self.graph
    }

    /// Signed inner y-integral of the kernel over the full vertical slice at
    /// horizontal distance `t_abs` from P, divided by the common factor
    /// 2/|t|^{1+s}: the subgraph term plus one bracket per block.
    fn slice_core(&self, x: f64, t_abs: f64, py: f64, gp: &GProfile) -> f64 {
        let mut core = gp.eval((py - self.graph.eval(x)) / t_abs);
        for r in &self.added {
            if x >= r.x0 && x <= r.x1 {
                core -= gp.eval((r.y1 - py) / t_abs) - gp.eval((r.y0 - py) / t_abs);
            }
        }
        for r in &self.removed {
            if x >= r.x0 && x <= r.x1 {
                core += gp.eval((r.y1 - py) / t_abs) - gp.eval((r.y0 - py) / t_abs);
            }
        }
        core
    }

    /// Every |offset| from `px` at which the slice integrand can kink or jump.
    fn feature_offsets(&self, px: f64) -> Vec<f64> {
        let mut o: Vec<f64> = self.graph.breakpoints().iter().map(|b| (b - px).abs()).collect();
        for r in self.added.iter().chain(self.removed.iter()) {
            o.push((r.x0 - px).abs());
            o.push((r.x1 - px).abs());
        }
        o
    }
}

/// The 2D principal-value curvature integral of `χ_complement − χ_set` at a
/// boundary point P, slice-by-slice: inner y-integrals in closed form through
/// the G profile, outer x-integral adaptive, each side of P separately,
/// constant-tail range by compactifying substitution.
pub fn nmc_set_bruteforce(
    e: &RegionSet,
    p: Point,
    order: FracOrder,
    q: &QuadratureSpec,
) -> Result<Estimate, KernelError> {
    q.validate()?;
    let s = order.s();
    let gp = GProfile::shared(order);
    let w = q.singular_width;

    // P must be on the boundary: membership flips across it vertically.
    for eps in [0.5 * w, 0.05 * w] {
        if !e.contains(p.x, p.y - eps) || e.contains(p.x, p.y + eps) {
            return Err(KernelError::PointNotOnBoundary { x: p.x, y: p.y });
        }
    }

    let offsets = e.feature_offsets(p.x);
    let feature_radius = offsets.iter().fold(0.0_f64, |m, o| m.max(*o));
    let r = q.tail_radius.max(feature_radius).max(2.0 * w);

    let opts = q.opts();
    let mut seeds: Vec<f64> = offsets.into_iter().filter(|t| *t > w && *t < r).collect();
    let mut t = 2.0 * w;
    while t < r {
        seeds.push(t);
        t *= 2.0;
    }

    let side = |sign: f64| {
        let f = |t: f64| 2.0 * e.slice_core(p.x + sign * t, t, p.y, &gp) / t.powf(1.0 + s);
        quad::integrate(&f, w, r, &seeds, &opts)
    };
    let right = side(1.0).map_err(|e| KernelError::quad("set curvature, right side", e))?;
    let left = side(-1.0).map_err(|e| KernelError::quad("set curvature, left side", e))?;

    // Beyond r only the constant graph tails remain; pair the two sides and
    // substitute σ = 1/t.
    let tail_fn = |sig: f64| {
        let t = 1.0 / sig;
        let sum = e.slice_core(p.x + t, t, p.y, &gp) + e.slice_core(p.x - t, t, p.y, &gp);
        2.0 * sum / t.powf(1.0 + s) / (sig * sig)
    };
    let tail_seeds = quad::dyadic_seeds_toward(0.0, 1.0 / r, 12);
    let tail = quad::integrate(&tail_fn, 0.0, 1.0 / r, &tail_seeds, &opts)
        .map_err(|e| KernelError::quad("set curvature, tail range", e))?;

    // Window model error: chord-slope mismatch of the local boundary. On a
    // graph point that is the graph's kink gap; on a horizontal block edge
    // the boundary is flat and the gap is zero.
    let on_graph = (p.y - e.graph.eval(p.x)).abs() <= 1e-9 * (1.0 + p.y.abs());
    let win_err = if on_graph {
        let u0 = e.graph.eval(p.x);
        let chord_right = (e.graph.eval(p.x + w) - u0) / w;
        let chord_left = (u0 - e.graph.eval(p.x - w)) / w;
        window_error(chord_right - chord_left, w, s)
    } else {
        0.0
    };

    Ok(Estimate::new(
        right.value + left.value + tail.value,
        right.error + left.error + tail.error + win_err,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::QuadOpts;
    use approx::assert_relative_eq;

    fn order(s: f64) -> FracOrder {
        FracOrder::new(s).unwrap()
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::for_domain_width(2.0)
    }

    fn triangle() -> PiecewiseLinearFn {
        PiecewiseLinearFn::from_points(&[(-1.0, 0.0), (0.0, 1.0), (1.0, 0.0)]).unwrap()
    }

    #[test]
    fn half_plane_is_flat() {
        let e = RegionSet::subgraph(PiecewiseLinearFn::constant(0.0));
        let h = nmc_set_bruteforce(&e, Point::new(0.0, 0.0), order(0.5), &spec()).unwrap();
        assert!(h.value.abs() <= h.error + 1e-12);
        assert!(h.value.abs() < 1e-9);
    }

    #[test]
    fn off_boundary_points_are_rejected() {
        let e = RegionSet::subgraph(PiecewiseLinearFn::constant(0.0));
        for y in [-0.5, 0.5] {
            let err = nmc_set_bruteforce(&e, Point::new(0.0, y), order(0.5), &spec()).unwrap_err();
            assert!(matches!(err, KernelError::PointNotOnBoundary { .. }));
        }
    }

    #[test]
    fn block_placement_is_validated() {
        let g = PiecewiseLinearFn::constant(0.0);
        // Added block must live above the graph.
        assert!(RegionSet::new(
            g.clone(),
            vec![Rect::new(0.0, 1.0, -2.0, -1.0).unwrap()],
            vec![]
        )
        .is_err());
        // Removed block must live below it.
        assert!(RegionSet::new(
            g.clone(),
            vec![],
            vec![Rect::new(0.0, 1.0, 1.0, 2.0).unwrap()]
        )
        .is_err());
        assert!(RegionSet::new(
            g,
            vec![Rect::new(0.0, 1.0, 1.0, 2.0).unwrap()],
            vec![Rect::new(-3.0, -2.0, -1.0, -0.5).unwrap()],
        )
        .is_ok());
    }

    #[test]
    fn antisymmetric_blocks_cancel() {
        // A block removed from the half-plane and its point reflection across
        // P added to the complement leave the curvature at zero.
        let removed = Rect::new(2.0, 3.0, -2.0, -1.0).unwrap();
        let added = Rect::new(-3.0, -2.0, 1.0, 2.0).unwrap();
        let e =
            RegionSet::new(PiecewiseLinearFn::constant(0.0), vec![added], vec![removed]).unwrap();
        let h = nmc_set_bruteforce(&e, Point::new(0.0, 0.0), order(0.4), &spec()).unwrap();
        assert!(h.value.abs() <= 3.0 * h.error + 1e-9, "value {} error {}", h.value, h.error);
    }

    #[test]
    fn added_mass_lowers_curvature() {
        let base = RegionSet::subgraph(triangle());
        let with_block = RegionSet::new(
            triangle(),
            vec![Rect::new(1.5, 2.5, 1.0, 2.0).unwrap()],
            vec![],
        )
        .unwrap();
        let p = Point::new(0.3, 0.7);
        let a = nmc_set_bruteforce(&base, p, order(0.5), &spec()).unwrap();
        let b = nmc_set_bruteforce(&with_block, p, order(0.5), &spec()).unwrap();
        assert!(b.value < a.value);
    }

    #[test]
    fn matches_graph_route_on_the_triangle() {
        let e = RegionSet::subgraph(triangle());
        let p = Point::new(0.3, 0.7);
        let brute = nmc_set_bruteforce(&e, p, order(0.5), &spec()).unwrap();
        let fast = super::super::nmc_graph(&triangle(), 0.3, order(0.5), &spec()).unwrap();
        let gap = (brute.value - fast.value).abs();
        assert!(
            gap <= 3.0 * (brute.error + fast.error).max(1e-9),
            "gap {gap}, errors {} {}",
            brute.error,
            fast.error
        );
    }

    // The inner closed form is the load-bearing reduction: check one slice
    // against direct numerical y-integration that never touches G.
    #[test]
    fn slice_core_matches_direct_y_integration() {
        let g = triangle();
        let e = RegionSet::new(
            g,
            vec![Rect::new(0.1, 0.9, 1.5, 2.1).unwrap()],
            vec![Rect::new(-0.6, -0.2, -1.0, -0.3).unwrap()],
        )
        .unwrap();
        let gp = GProfile::shared(order(0.5));
        let opts = QuadOpts { rel_tol: 1e-11, abs_tol: 1e-13, max_intervals: 4000 };
        let p = Point::new(0.3, 0.7);

        for (x, t_abs) in [(0.5, 0.2), (-0.4, 0.7), (1.4, 1.1)] {
            let sgn = |y: f64| if e.contains(x, y) { -1.0 } else { 1.0 };
            let k = |y: f64| {
                sgn(y) * (t_abs * t_abs + (y - p.y) * (y - p.y)).powf(-(2.0 + 0.5) / 2.0)
            };
            // Split the finite range at every membership flip level.
            let mut level_seeds = vec![e.graph().eval(x)];
            level_seeds.extend([1.5, 2.1, -1.0, -0.3, p.y]);
            let y_lo = -40.0;
            let y_hi = 40.0;
            let finite = quad::integrate(&k, y_lo, y_hi, &level_seeds, &opts).unwrap();
            // Tails: |y| > 40, pure complement, via v = 1/(y − p.y).
            let tail_up = quad::integrate(
                &|v: f64| (t_abs * t_abs * v * v + 1.0).powf(-1.25) * v.powf(0.5),
                0.0,
                1.0 / (y_hi - p.y),
                &quad::dyadic_seeds_toward(0.0, 1.0 / (y_hi - p.y), 20),
                &opts,
            )
            .unwrap();
            // The lower tail lies inside the set, so it enters with sign −1.
            let tail_dn = quad::integrate(
                &|v: f64| (t_abs * t_abs * v * v + 1.0).powf(-1.25) * v.powf(0.5),
                0.0,
                1.0 / (p.y - y_lo),
                &quad::dyadic_seeds_toward(0.0, 1.0 / (p.y - y_lo), 20),
                &opts,
            )
            .unwrap();
            let direct = finite.value + tail_up.value - tail_dn.value;

            let closed = 2.0 * e.slice_core(x, t_abs, p.y, &gp) / t_abs.powf(1.5);
            assert_relative_eq!(direct, closed, max_relative = 1e-6, epsilon = 1e-8);
        }
    }
}
