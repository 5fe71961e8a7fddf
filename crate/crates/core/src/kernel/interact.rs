//! Interaction energy `L_s(A,B) = ∬_{A×B} |X−Y|^{−(2+s)} dX dY` between two
//! disjoint axis-aligned rectangles.
//!
//! The 4D integral collapses to 2D through the displacement correlation
//! functions: with W₁ the overlap length of the x-ranges at horizontal shift
//! ξ and W₂ the same for the y-ranges at vertical shift υ (both trapezoids),
//!
//! `L_s(A,B) = ∫∫ W₁(ξ)·W₂(υ)·(ξ²+υ²)^{−(2+s)/2} dξ dυ`.
//!
//! The ξ-integral of a linear piece of W₁ has a closed form through the G
//! profile; when both piece ends sit deep on the saturated branch the
//! difference goes through the tail-deficit series so the G∞'s never cancel
//! in floating point. That leaves one adaptive υ-integral per sign of υ,
//! taken in the variable χ = |υ|^{1−s}/(1−s): shared edges put an integrable
//! |υ|^{−s}-type singularity at υ = 0 and the substitution levels it exactly.

use super::{Estimate, FracOrder, GProfile, KernelError, QuadratureSpec, Rect};
use crate::quad;

/// Magnitudes below this are frozen inside the υ-integrand: the χ-panels
/// ending at 0 would otherwise drive |υ|^{-(1+s)} factors past f64 range.
/// The affected χ-measure is far below any tolerance.
const UPS_FLOOR: f64 = 1e-120;

/// Trapezoidal correlation of two intervals: piecewise-linear hat with
/// support [lo, hi], plateau [m1, m2] at height `plateau`.
#[derive(Debug, Clone, Copy)]
struct Trapezoid {
    lo: f64,
    m1: f64,
    m2: f64,
    hi: f64,
    plateau: f64,
}

impl Trapezoid {
    fn correlate(a0: f64, a1: f64, b0: f64, b1: f64) -> Trapezoid {
        let lo = a0 - b1;
        let hi = a1 - b0;
        let c = a0 - b0;
        let d = a1 - b1;
        Trapezoid {
            lo,
            m1: c.min(d),
            m2: c.max(d),
            hi,
            plateau: (a1 - a0).min(b1 - b0),
        }
    }

    #[inline]
    fn eval(&self, t: f64) -> f64 {
        if t <= self.lo || t >= self.hi {
            0.0
        } else if t < self.m1 {
            t - self.lo
        } else if t > self.m2 {
            self.hi - t
        } else {
            self.plateau
        }
    }

    /// The linear pieces as (start, end, intercept, slope).
    fn pieces(&self) -> [(f64, f64, f64, f64); 3] {
        [
            (self.lo, self.m1, -self.lo, 1.0),
            (self.m1, self.m2, self.plateau, 0.0),
            (self.m2, self.hi, self.hi, -1.0),
        ]
    }
}

/// `L_s(A, B)` for disjoint rectangles; symmetric, translation-invariant,
/// finite even across shared edges.
pub fn interaction(
    a: &Rect,
    b: &Rect,
    order: FracOrder,
    q: &QuadratureSpec,
) -> Result<Estimate, KernelError> {
    q.validate()?;
    if a.x0 < b.x1 && b.x0 < a.x1 && a.y0 < b.y1 && b.y0 < a.y1 {
        return Err(KernelError::OverlappingRegions);
    }
    let s = order.s();
    let gp = GProfile::shared(order);

    let w1 = Trapezoid::correlate(a.x0, a.x1, b.x0, b.x1);
    let w2 = Trapezoid::correlate(a.y0, a.y1, b.y0, b.y1);

    // ∫ W₁(ξ)(ξ²+υ²)^{−(2+s)/2} dξ, piecewise closed form. Even in υ; only
    // the magnitude is passed in.
    let inner = |au: f64| {
        let mut total = 0.0;
        for (start, end, alpha, beta) in w1.pieces() {
            if end <= start {
                continue;
            }
            if alpha != 0.0 {
                let far = start.signum() == end.signum()
                    && start.abs().min(end.abs()) >= 2.0 * au;
                total += alpha
                    * if far {
                        // Both ends saturated: difference of tail deficits,
                        // with the υ-powers cancelled analytically.
                        let sv = |x: f64| {
                            let sig = au / x.abs();
                            gp.tail_series(sig * sig) / x.abs().powf(1.0 + s)
                        };
                        start.signum() * (sv(start) - sv(end))
                    } else {
                        (gp.eval(end / au) - gp.eval(start / au)) / au.powf(1.0 + s)
                    };
            }
            if beta != 0.0 {
                total -= (beta / s)
                    * ((end * end + au * au).powf(-0.5 * s)
                        - (start * start + au * au).powf(-0.5 * s));
            }
        }
        total
    };

    // υ-integral one sign at a time in χ = |υ|^{1−s}/(1−s).
    let pow = 1.0 / (1.0 - s);
    let chi_of = |u: f64| u.powf(1.0 - s) / (1.0 - s);
    let mut value = 0.0;
    let mut error = 0.0;
    for (sign, mlo, mhi) in
        [(1.0_f64, w2.lo.max(0.0), w2.hi), (-1.0_f64, (-w2.hi).max(0.0), -w2.lo)]
    {
        if mhi <= mlo {
            continue;
        }
        let (clo, chi) = (chi_of(mlo), chi_of(mhi));
        let mut seeds: Vec<f64> = Vec::new();
        for k in [w2.m1, w2.m2] {
            let mk = sign * k;
            if mk > mlo && mk < mhi {
                seeds.push(chi_of(mk));
            }
        }
        if mlo == 0.0 {
            // The map leaves a weak |χ|^{s/(1−s)}-type kink at 0.
            seeds.extend(quad::dyadic_seeds_toward(0.0, chi, 24));
        }
        let f = |c: f64| {
            let um = (((1.0 - s) * c).powf(pow)).max(UPS_FLOOR);
            w2.eval(sign * um) * inner(um) * um.powf(s)
        };
        let r = quad::integrate(&f, clo, chi, &seeds, &q.opts())
            .map_err(|e| KernelError::quad("rectangle interaction", e))?;
        value += r.value;
        error += r.error;
    }
    Ok(Estimate::new(value, error))
}
