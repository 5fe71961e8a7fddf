//! The vertical-slice profile `G(ρ) = ∫₀^ρ (1+τ²)^{−(2+s)/2} dτ`.
//!
//! Every vertical slice of the interaction kernel integrates to a difference
//! of G values, so G is evaluated millions of times per solve. Rather than
//! re-integrating, each order gets a one-time pair of Chebyshev fits:
//!
//! * for |ρ| ≤ 1,  G(ρ) = ρ·S₀(ρ²)   with  S₀(x) = ∫₀¹ (1+x w²)^{−(2+s)/2} dw,
//! * for |ρ| > 1,  G(ρ) = G∞ − σ^{1+s}·S₁(σ²), σ = 1/ρ,
//!   with S₁(x) = ∫₀¹ wˢ (1+x w²)^{−(2+s)/2} dw,
//!
//! both S₀ and S₁ analytic on [0, 1], so the fits converge geometrically.
//! The second form follows from substituting τ = 1/v in the tail of the
//! defining integral; it also hands us G∞ = S₀(1) + S₁(1) for free.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::{FracOrder, MAX_INTERVALS};
use crate::quad::{self, QuadOpts};

/// Chebyshev expansion on [0, 1] (mapped to the usual [−1, 1]).
#[derive(Debug, Clone)]
struct Cheb {
    coef: Vec<f64>,
}

impl Cheb {
    /// Fit by cosine transform at Chebyshev–Gauss nodes.
    fn fit<F: Fn(f64) -> f64>(f: F, n: usize) -> Cheb {
        let vals: Vec<f64> = (0..n)
            .map(|j| {
                let xi = (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos();
                f(0.5 * (xi + 1.0))
            })
            .collect();
        let mut coef = Vec::with_capacity(n);
        for k in 0..n {
            let mut c = 0.0;
            for (j, v) in vals.iter().enumerate() {
                c += v * (std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / n as f64).cos();
            }
            coef.push(2.0 * c / n as f64);
        }
        // Drop the numerically-zero tail of the expansion.
        let scale = coef.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        while coef.len() > 4 && coef.last().unwrap().abs() < 1e-15 * scale {
            coef.pop();
        }
        Cheb { coef }
    }

    /// Coefficients of F(x) = ∫₀ˣ f, in the same representation.
    ///
    /// On the mapped variable ξ = 2x−1 the term recurrence is
    /// ∫Tₖ dξ = Tₖ₊₁/(2(k+1)) − Tₖ₋₁/(2(k−1)); with the halved-c₀ storage
    /// the collected coefficient of Tⱼ is (cⱼ₋₁ − cⱼ₊₁)/(2j) for every j ≥ 1.
    /// The extra 0.5 is the [0,1] ↦ [−1,1] Jacobian, and the constant term
    /// pins F(0) = 0.
    fn antiderivative(&self) -> Cheb {
        let n = self.coef.len();
        let c = |j: usize| if j < n { self.coef[j] } else { 0.0 };
        let mut coef = vec![0.0; n + 1];
        for j in 1..=n {
            coef[j] = 0.5 * (c(j - 1) - c(j + 1)) / (2.0 * j as f64);
        }
        let at_lo: f64 = (1..=n)
            .map(|j| if j % 2 == 0 { coef[j] } else { -coef[j] })
            .sum();
        coef[0] = -2.0 * at_lo;
        Cheb { coef }
    }

    /// Clenshaw evaluation; the argument is clamped to [0, 1] to absorb
    /// last-bit excursions like ρ² = 1 + ε.
    #[inline]
    fn eval(&self, x: f64) -> f64 {
        let xi = 2.0 * x.clamp(0.0, 1.0) - 1.0;
        let two_xi = 2.0 * xi;
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for k in (1..self.coef.len()).rev() {
            let t = self.coef[k] + two_xi * b1 - b2;
            b2 = b1;
            b1 = t;
        }
        0.5 * self.coef[0] + xi * b1 - b2
    }
}

/// Memoized evaluator of G for one fractional order.
#[derive(Debug)]
pub struct GProfile {
    s: f64,
    inner: Cheb,
    outer: Cheb,
    g_inf: f64,
}

impl GProfile {
    fn build(order: FracOrder) -> GProfile {
        let s = order.s();
        let p = -(2.0 + s) / 2.0;
        let opts = QuadOpts { rel_tol: 1e-13, abs_tol: 1e-15, max_intervals: MAX_INTERVALS };

        let s0 = |x: f64| {
            quad::integrate(&|w: f64| (1.0 + x * w * w).powf(p), 0.0, 1.0, &[], &opts)
                .expect("slice-profile inner integrand is analytic")
                .value
        };
        // wˢ has unbounded slope at 0; park the origin behind a dyadic ladder.
        let ladder = quad::dyadic_seeds_toward(0.0, 1.0, 48);
        let s1 = |x: f64| {
            quad::integrate(
                &|w: f64| w.powf(s) * (1.0 + x * w * w).powf(p),
                0.0,
                1.0,
                &ladder,
                &opts,
            )
            .expect("slice-profile outer integrand is integrable")
            .value
        };

        let inner = Cheb::fit(s0, 40);
        let outer = Cheb::fit(s1, 40);
        let g_inf = s0(1.0) + s1(1.0);
        GProfile { s, inner, outer, g_inf }
    }

    /// Fetch (building on first use) the shared evaluator for this order.
    pub fn shared(order: FracOrder) -> Arc<GProfile> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<GProfile>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = order.s().to_bits();
        if let Some(p) = cache.lock().unwrap().get(&key) {
            return Arc::clone(p);
        }
        // Build outside the lock; a racing thread at worst builds a duplicate
        // and the first insert wins.
        let built = Arc::new(GProfile::build(order));
        let mut guard = cache.lock().unwrap();
        Arc::clone(guard.entry(key).or_insert(built))
    }

    #[inline]
    pub fn order(&self) -> f64 {
        self.s
    }

    /// The limit G(+∞) = ∫₀^∞ (1+τ²)^{−(2+s)/2} dτ.
    #[inline]
    pub fn g_infinity(&self) -> f64 {
        self.g_inf
    }

    /// Evaluate G(ρ). Odd in ρ by construction (exactly, in bits).
    #[inline]
    pub fn eval(&self, rho: f64) -> f64 {
        let a = rho.abs();
        let mag = if a <= 1.0 {
            a * self.inner.eval(a * a)
        } else {
            let sigma = 1.0 / a;
            self.g_inf - sigma.powf(1.0 + self.s) * self.outer.eval(sigma * sigma)
        };
        mag.copysign(rho)
    }

    /// Saturation deficit series of the tail branch: for |ρ| ≥ 1,
    /// G∞ − |G(ρ)| = σ^{1+s}·tail_series(σ²) with σ = 1/|ρ|. Exposed so
    /// callers can subtract two saturated G values without the G∞'s
    /// cancelling in floating point.
    #[inline]
    pub(crate) fn tail_series(&self, x: f64) -> f64 {
        self.outer.eval(x)
    }
}

/// One-off evaluation of G(ρ). Hot loops should hold `GProfile::shared`
/// instead of paying the cache lookup per call.
pub fn g_profile(rho: f64, order: FracOrder) -> f64 {
    GProfile::shared(order).eval(rho)
}

/// Memoized evaluator of the running integral 𝒢(ρ) = ∫₀^ρ G, even in ρ.
///
/// Energy differences between two graphs integrate G over the vertical gap
/// between them, and that inner integral is exactly a difference of 𝒢
/// values; precomputing 𝒢 turns each vertical slice into one subtraction.
///
/// Both branches reuse the fits of [`GProfile`]:
///
/// * |ρ| ≤ 1: 𝒢(ρ) = ½·A₀(ρ²) with A₀ the term-by-term antiderivative of
///   the inner fit S₀;
/// * |ρ| > 1: integrating the tail form of G from 1 to ρ gives, with σ = 1/ρ,
///   𝒢(ρ) = 𝒢(1) + G∞·(ρ−1) − R₁(1) + σˢ·R₁(σ²),
///   where R₁(x) = ∫₀^1 S₁(x·ζ^{2/s}) dζ / s is smooth on [0, 1] and fitted
///   once. Using the same fitted R₁ in both terms makes the seam at ρ = 1
///   exact, and the large-ρ asymptote 𝒢(ρ) → G∞·ρ − 1/s falls out of the
///   σ → 0 limit.
#[derive(Debug)]
pub struct GPrimitive {
    s: f64,
    inner: Cheb,
    outer: Cheb,
    g_inf: f64,
    g_one: f64,
    r_one: f64,
}

impl GPrimitive {
    fn build(order: FracOrder) -> GPrimitive {
        let gp = GProfile::shared(order);
        let s = order.s();

        let mut inner = gp.inner.antiderivative();
        for c in &mut inner.coef {
            *c *= 0.5;
        }

        let opts = QuadOpts { rel_tol: 1e-13, abs_tol: 1e-15, max_intervals: MAX_INTERVALS };
        let pow = 2.0 / s;
        let r1 = |x: f64| {
            quad::integrate(&|z: f64| gp.outer.eval(x * z.powf(pow)), 0.0, 1.0, &[], &opts)
                .expect("rescaled tail integrand is bounded and piecewise smooth")
                .value
                / s
        };
        let outer = Cheb::fit(r1, 40);

        let g_one = inner.eval(1.0);
        let r_one = outer.eval(1.0);
        GPrimitive { s, inner, outer, g_inf: gp.g_infinity(), g_one, r_one }
    }

    /// Fetch (building on first use) the shared evaluator for this order.
    pub fn shared(order: FracOrder) -> Arc<GPrimitive> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<GPrimitive>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = order.s().to_bits();
        if let Some(p) = cache.lock().unwrap().get(&key) {
            return Arc::clone(p);
        }
        let built = Arc::new(GPrimitive::build(order));
        let mut guard = cache.lock().unwrap();
        Arc::clone(guard.entry(key).or_insert(built))
    }

    #[inline]
    pub fn order(&self) -> f64 {
        self.s
    }

    /// Evaluate 𝒢(ρ). Even in ρ by construction (exactly, in bits).
    #[inline]
    pub fn eval(&self, rho: f64) -> f64 {
        let a = rho.abs();
        if a <= 1.0 {
            self.inner.eval(a * a)
        } else {
            let sigma = 1.0 / a;
            self.g_one + self.g_inf * (a - 1.0) - self.r_one
                + sigma.powf(self.s) * self.outer.eval(sigma * sigma)
        }
    }

    /// 𝒢(na/τ) − 𝒢(nb/τ) without forming the ratios when both arguments sit
    /// on the linear branch, where direct subtraction cancels catastrophically
    /// (the two values agree to O(τ) while each is O(1/τ)).
    ///
    /// `diff` must be a separately-computed, cancellation-free value of
    /// na − nb: when na and nb are themselves small differences of nearby
    /// quantities, recomputing their gap from the float results would divide
    /// rounding noise by τ.
    #[inline]
    pub fn scaled_diff(&self, na: f64, nb: f64, diff: f64, tau: f64) -> f64 {
        let bound = 2.0 * tau;
        if (na >= bound && nb >= bound) || (na <= -bound && nb <= -bound) {
            let d = |n: f64| {
                let sig = tau / n.abs();
                sig.powf(self.s) * self.outer.eval(sig * sig)
            };
            let mag_diff = if na >= 0.0 { diff } else { -diff };
            self.g_inf * mag_diff / tau + d(na) - d(nb)
        } else {
            self.eval(na / tau) - self.eval(nb / tau)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn order(s: f64) -> FracOrder {
        FracOrder::new(s).unwrap()
    }

    // Reference values frozen from 30-digit direct quadrature of the
    // defining integral, computed before this module was written.
    #[test]
    fn matches_reference_values() {
        assert_relative_eq!(
            g_profile(1.0, order(0.5)),
            0.74430307976049287481,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            g_profile(0.3, order(0.5)),
            0.28938912733757097048,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            g_profile(2.7, order(0.25)),
            1.131405454326725412,
            max_relative = 1e-12
        );
    }

    #[test]
    fn limits_match_reference() {
        assert_relative_eq!(
            GProfile::shared(order(0.1)).g_infinity(),
            1.4712342744603880435,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            GProfile::shared(order(0.5)).g_infinity(),
            1.1981402347355922074,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            GProfile::shared(order(0.9)).g_infinity(),
            1.0321119587573458985,
            max_relative = 1e-12
        );
    }

    #[test]
    fn odd_in_rho_exactly() {
        let g = GProfile::shared(order(0.37));
        for rho in [0.0, 0.2, 0.99, 1.0, 1.01, 3.7, 250.0] {
            assert_eq!(g.eval(-rho).to_bits(), (-g.eval(rho)).to_bits());
        }
    }

    #[test]
    fn continuous_across_the_fit_seam() {
        for s in [0.1, 0.5, 0.9] {
            let g = GProfile::shared(order(s));
            let lo = g.eval(1.0 - 1e-9);
            let hi = g.eval(1.0 + 1e-9);
            assert!((hi - lo).abs() < 1e-8, "seam jump {} at s={}", hi - lo, s);
        }
    }

    #[test]
    fn slope_matches_kernel_density() {
        // G'(ρ) = (1+ρ²)^{−(2+s)/2}, checked by central differences.
        for s in [0.2, 0.6] {
            let g = GProfile::shared(order(s));
            for rho in [0.0, 0.4, 0.9, 1.3, 4.0] {
                let h = 1e-6;
                let num = (g.eval(rho + h) - g.eval(rho - h)) / (2.0 * h);
                let exact = (1.0 + rho * rho).powf(-(2.0 + s) / 2.0);
                assert_relative_eq!(num, exact, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn bounded_monotone_and_contractive() {
        let g = GProfile::shared(order(0.5));
        let mut prev = f64::NEG_INFINITY;
        let mut rho = -40.0;
        while rho <= 40.0 {
            let v = g.eval(rho);
            assert!(v >= prev, "not monotone at rho={rho}");
            assert!(v.abs() <= rho.abs() + 1e-15, "|G| > |rho| at rho={rho}");
            assert!(v.abs() < g.g_infinity() + 1e-12);
            prev = v;
            rho += 0.037;
        }
    }

    #[test]
    fn shared_cache_returns_same_instance() {
        let a = GProfile::shared(order(0.43));
        let b = GProfile::shared(order(0.43));
        assert!(Arc::ptr_eq(&a, &b));
        let c = GPrimitive::shared(order(0.43));
        let d = GPrimitive::shared(order(0.43));
        assert!(Arc::ptr_eq(&c, &d));
    }

    #[test]
    fn cheb_antiderivative_reproduces_sine() {
        let f = Cheb::fit(|x| (3.0 * x).cos(), 40);
        let af = f.antiderivative();
        for x in [0.0_f64, 0.17, 0.5, 0.83, 1.0] {
            let exact = (3.0 * x).sin() / 3.0;
            assert!((af.eval(x) - exact).abs() < 1e-13, "x={x}: {} vs {exact}", af.eval(x));
        }
    }

    // Frozen from 30-digit quadrature of ∫₀^ρ G before this code existed.
    #[test]
    fn primitive_matches_reference_values() {
        let cases = [
            (0.5, 0.7, 0.22431368146520484347),
            (0.5, 1.0, 0.42609591026792196087),
            (0.5, 2.5, 1.8250149581879140735),
            (0.2, 1.7, 1.0617047228972487323),
            (0.9, 0.45, 0.096732873967771914681),
            (0.9, 3.3, 2.4906891533296612918),
        ];
        for (s, rho, want) in cases {
            let gp = GPrimitive::shared(order(s));
            assert_relative_eq!(gp.eval(rho), want, max_relative = 1e-11);
        }
    }

    #[test]
    fn primitive_even_and_zero_at_origin() {
        let gp = GPrimitive::shared(order(0.37));
        assert!(gp.eval(0.0).abs() < 1e-13);
        for rho in [0.2, 0.99, 1.0, 1.01, 3.7, 250.0] {
            assert_eq!(gp.eval(-rho).to_bits(), gp.eval(rho).to_bits());
        }
    }

    #[test]
    fn primitive_slope_matches_profile() {
        for s in [0.2, 0.6] {
            let g = GProfile::shared(order(s));
            let gp = GPrimitive::shared(order(s));
            for rho in [0.1, 0.4, 0.95, 1.0, 1.05, 2.2, 6.0] {
                let h = 1e-5;
                let num = (gp.eval(rho + h) - gp.eval(rho - h)) / (2.0 * h);
                assert_relative_eq!(num, g.eval(rho), max_relative = 1e-7);
            }
        }
    }

    #[test]
    fn primitive_seam_is_continuous() {
        for s in [0.1, 0.5, 0.9] {
            let gp = GPrimitive::shared(order(s));
            let lo = gp.eval(1.0 - 1e-12);
            let hi = gp.eval(1.0 + 1e-12);
            assert!((hi - lo).abs() < 1e-11, "seam jump {} at s={}", hi - lo, s);
            assert_eq!(gp.eval(1.0).to_bits(), gp.g_one.to_bits());
        }
    }

    #[test]
    fn primitive_approaches_linear_asymptote() {
        // 𝒢(ρ) − (G∞·ρ − 1/s) = ∫_ρ^∞ (G∞ − G) ≈ ρ^{−s}/(s(1+s)) → 0.
        for s in [0.3, 0.7] {
            let g = GProfile::shared(order(s));
            let gp = GPrimitive::shared(order(s));
            let mut prev = f64::INFINITY;
            for rho in [10.0, 40.0, 160.0] {
                let gap = gp.eval(rho) - (g.g_infinity() * rho - 1.0 / s);
                let lead = rho.powf(-s) / (s * (1.0 + s));
                assert!(gap > 0.0 && gap < 1.5 * lead, "gap {gap} vs {lead} at s={s}");
                assert!(gap < prev);
                prev = gap;
            }
        }
    }

    #[test]
    fn primitive_monotone_in_magnitude() {
        let gp = GPrimitive::shared(order(0.5));
        let mut prev = -1e-15;
        let mut rho = 0.0;
        while rho <= 8.0 {
            let v = gp.eval(rho);
            assert!(v >= prev, "not monotone at rho={rho}");
            prev = v;
            rho += 0.013;
        }
    }

    #[test]
    fn primitive_scaled_diff_matches_direct_and_survives_tiny_tau() {
        let gp = GPrimitive::shared(order(0.5));
        for (na, nb, tau) in
            [(0.8, 0.3, 0.9), (5.0, 4.0, 1.0), (-5.0, -4.0, 1.0), (3.0, -2.0, 0.7)]
        {
            let direct = gp.eval(na / tau) - gp.eval(nb / tau);
            let stable = gp.scaled_diff(na, nb, na - nb, tau);
            assert_relative_eq!(stable, direct, max_relative = 1e-11, epsilon = 1e-12);
        }
        // At τ this small the ratios saturate the linear branch completely:
        // 𝒢(2/τ) − 𝒢(1/τ) → G∞/τ with corrections at relative O(τ^{1+s}).
        let tau = 1e-18;
        let v = gp.scaled_diff(2.0, 1.0, 1.0, tau);
        let ginf = GProfile::shared(order(0.5)).g_infinity();
        assert_relative_eq!(v, ginf / tau, max_relative = 1e-12);
    }

    #[test]
    fn rejects_orders_outside_open_interval() {
        assert!(FracOrder::new(0.0).is_err());
        assert!(FracOrder::new(1.0).is_err());
        assert!(FracOrder::new(-0.2).is_err());
        assert!(FracOrder::new(f64::NAN).is_err());
        assert!(FracOrder::new(0.5).is_ok());
    }
}
