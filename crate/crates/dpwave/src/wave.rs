//! Validated wave parameters and the closed-form geometry of the solitary
//! wave.
//!
//! For speeds `c > 2k > 0` the profile ODE has the first integral
//!
//! ```text
//! Φ(φ, ψ) = φ² P(φ) - ½ (c-φ)² ψ²,      P(φ) = ½φ² - (c-⅔k)φ + (½c² - kc),
//! ```
//!
//! whose zero level set carries the homoclinic solitary-wave orbit. `2P`
//! factors as `(φ-φ₋)(φ-φ₊)` with two distinct positive roots; the wave
//! rises from 0 to its maximum `φ_max = φ₋` and decays with tail rate
//! `ν = √((c-2k)/c)`.
//!
//! On the left branch (`ξ ≤ 0`, where `φ_ξ ≥ 0`) the inverse map `ξ(φ)`
//! integrates in closed form:
//!
//! ```text
//! ξ(φ) = -∫_φ^{φ₋} (c-s) ds / (s √((φ₋-s)(φ₊-s)))
//! ```
//!
//! is an elementary combination of logarithms (see [`WaveParams::xi_from_height`]),
//! so profile evaluation at arbitrary `ξ` reduces to Newton inversion of an
//! analytic function — no quadrature enters the construction. The same
//! expansion yields the exact tail amplitude `C` in `φ(ξ) ≈ C e^{-ν|ξ|}`.

use crate::error::{DpError, Result};

/// Validated pair `(c, k)`: wave speed and linear-dispersion parameter,
/// subject to the physical constraint `c > 2k > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveParams {
    c: f64,
    k: f64,
}

impl WaveParams {
    /// Validates `c > 2k > 0` (both strict) and finiteness.
    ///
    /// The degenerate boundary `c = 2k` is rejected rather than
    /// special-cased: the wave there collapses to zero amplitude.
    pub fn new(c: f64, k: f64) -> Result<Self> {
        if !c.is_finite() || !k.is_finite() {
            return Err(DpError::Validation(format!(
                "non-finite parameters: c={c}, k={k}"
            )));
        }
        if k <= 0.0 {
            return Err(DpError::Validation(format!("k>0 violated: k={k}")));
        }
        if c <= 2.0 * k {
            return Err(DpError::Validation(format!(
                "c>2k violated: c={c}, k={k}"
            )));
        }
        Ok(WaveParams { c, k })
    }

    /// Wave speed `c`.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Dispersion parameter `k`.
    pub fn k(&self) -> f64 {
        self.k
    }

    /// The quadratic `P(φ) = ½φ² - (c-⅔k)φ + (½c² - kc)` whose positive
    /// roots bound the wave amplitude; `P(0) = c(c-2k)/2 > 0`.
    pub fn quadratic_p(&self, phi: f64) -> f64 {
        0.5 * phi * phi - (self.c - 2.0 / 3.0 * self.k) * phi
            + (0.5 * self.c * self.c - self.k * self.c)
    }

    /// Roots `(φ₋, φ₊)` of `P`, both positive and distinct:
    /// `φ± = c - ⅔k ± √(2/9·k(3c+2k))`.
    ///
    /// `φ₋` is formed from the root product `φ₋φ₊ = c(c-2k)` to stay
    /// accurate when the radical nearly cancels the linear term (`c ↓ 2k`).
    pub fn phi_extremes(&self) -> (f64, f64) {
        let half_sum = self.c - 2.0 / 3.0 * self.k;
        let radical = (2.0 / 9.0 * self.k * (3.0 * self.c + 2.0 * self.k)).sqrt();
        let plus = half_sum + radical;
        let minus = self.c * (self.c - 2.0 * self.k) / plus;
        (minus, plus)
    }

    /// Wave amplitude `φ_max = φ₋`, satisfying `(c-2k)/4 < φ_max < c-2k`.
    pub fn phi_max(&self) -> f64 {
        self.phi_extremes().0
    }

    /// Exponential tail rate `ν = √((c-2k)/c) ∈ (0, 1)`.
    pub fn nu(&self) -> f64 {
        ((self.c - 2.0 * self.k) / self.c).sqrt()
    }

    /// First integral `Φ(φ, ψ) = φ² P(φ) - ½(c-φ)² ψ²`; identically zero
    /// along the solitary-wave orbit and even in `ψ`.
    pub fn first_integral(&self, phi: f64, psi: f64) -> f64 {
        phi * phi * self.quadratic_p(phi) - 0.5 * (self.c - phi).powi(2) * psi * psi
    }

    /// Curvature at the crest: `φ''(0) = φ_max((c-2k) - 2φ_max)/(c-φ_max)`,
    /// obtained by evaluating the profile system `φ_ξ = ψ`,
    /// `(c-φ)ψ_ξ = (c-2k)φ - 2φ² + ψ²` at the turning point `ψ = 0`.
    pub fn crest_curvature(&self) -> f64 {
        let pm = self.phi_max();
        pm * ((self.c - 2.0 * self.k) - 2.0 * pm) / (self.c - pm)
    }

    /// Profile slope on the left branch: `φ_ξ = φ √((φ₋-φ)(φ₊-φ)) / (c-φ)`
    /// for `ξ ≤ 0` (mirror with a sign flip for `ξ > 0`).
    pub fn profile_slope(&self, phi: f64) -> f64 {
        let (a, b) = self.phi_extremes();
        let prod = (a - phi).max(0.0) * (b - phi);
        phi * prod.sqrt() / (self.c - phi)
    }

    /// Closed-form inverse profile map on the left branch: the `ξ ≤ 0`
    /// with `φ(ξ) = phi`, for `phi ∈ (0, φ₋]`.
    ///
    /// Antiderivatives of `(c-s)/(s√((φ₋-s)(φ₊-s)))`:
    ///
    /// ```text
    /// ∫ ds/(s√(...))  = -ln[(2φ₋φ₊ - (φ₋+φ₊)s + 2√(φ₋φ₊)·D(s)) / s] / √(φ₋φ₊),
    /// ∫ ds/√(...)     = -2 ln(√(φ₋-s) + √(φ₊-s)),        D(s) = √((φ₋-s)(φ₊-s)),
    /// ```
    ///
    /// with `√(φ₋φ₊) = cν`, which makes the logarithmic tail rate exactly `ν`.
    pub fn xi_from_height(&self, phi: f64) -> f64 {
        let (a, b) = self.phi_extremes();
        debug_assert!(phi > 0.0 && phi <= a);
        let rab = (a * b).sqrt(); // = c·ν
        let ra = (a - phi).max(0.0).sqrt();
        let rb = (b - phi).sqrt();
        let d = ra * rb;
        let g1 = -((2.0 * a * b - (a + b) * phi + 2.0 * rab * d) / phi).ln() / rab;
        let g2 = -2.0 * (ra + rb).ln();
        let g1a = -(b - a).ln() / rab;
        let g2a = -(b - a).ln();
        -(self.c * (g1a - g1) - (g2a - g2))
    }

    /// Exact amplitude `C` of the asymptotic tail `φ(ξ) ≈ C e^{-ν|ξ|}`:
    /// `C = (4φ₋φ₊/(φ₊-φ₋)) · ((φ₊-φ₋)/(√φ₋+√φ₊)²)^ν`. Recovers `C → c`
    /// in the peakon limit `k → 0`.
    pub fn tail_amplitude(&self) -> f64 {
        let (a, b) = self.phi_extremes();
        let gap = b - a;
        let nu = self.nu();
        (4.0 * a * b / gap) * (gap / (a.sqrt() + b.sqrt()).powi(2)).powf(nu)
    }

    /// Profile height at any `ξ` by Newton inversion of
    /// [`Self::xi_from_height`] (even extension to `ξ > 0`).
    ///
    /// Near the crest the iteration runs in `t = √(φ₋-φ)` where the map is
    /// analytic with non-vanishing slope; elsewhere in `u = ln φ`, which is
    /// uniformly well conditioned down the exponential tail. Both variants
    /// keep a bisection bracket as a safeguard.
    pub fn height_from_xi(&self, xi: f64) -> f64 {
        let x = -xi.abs();
        let (a, b) = self.phi_extremes();
        if x == 0.0 {
            return a;
        }
        let nu = self.nu();
        let amp = self.tail_amplitude();
        // Below the representable tail the height underflows harmlessly.
        if nu * x < -700.0 {
            return 0.0;
        }
        if x > -0.5 {
            // Crest chart: φ = a - t², dξ/dt = -2(c-φ)/(φ√(φ₊-φ)).
            let mut t = -x * a * (b - a).sqrt() / (2.0 * (self.c - a));
            let (mut lo, mut hi) = (0.0_f64, a.sqrt());
            for _ in 0..60 {
                let phi = a - t * t;
                let f = self.xi_from_height(phi.max(f64::MIN_POSITIVE)) - x;
                if f.abs() < 1e-15 {
                    break;
                }
                // ξ(t) decreases in t: f > 0 means t too small.
                if f > 0.0 {
                    lo = t;
                } else {
                    hi = t;
                }
                let slope = -2.0 * (self.c - phi) / (phi * (b - phi).sqrt());
                let mut next = t - f / slope;
                if !(next > lo && next < hi) {
                    next = 0.5 * (lo + hi);
                }
                if (next - t).abs() < 1e-16 * (1.0 + t.abs()) {
                    t = next;
                    break;
                }
                t = next;
            }
            a - t * t
        } else {
            // Logarithmic chart: u = ln φ, dξ/du = (c-φ)/√((φ₋-φ)(φ₊-φ)).
            let mut u = (amp.ln() + nu * x).min((0.95 * a).ln());
            let (mut lo, mut hi) = (f64::NEG_INFINITY, a.ln());
            for _ in 0..80 {
                let phi = u.exp();
                let f = self.xi_from_height(phi) - x;
                if f.abs() < 1e-14 * x.abs().max(1.0) {
                    break;
                }
                // ξ(φ) increases in φ: f > 0 means φ too large.
                if f > 0.0 {
                    hi = u;
                } else {
                    lo = u;
                }
                // dξ/du = (c-φ)/√((φ₋-φ)(φ₊-φ)) with u = ln φ.
                let slope = (self.c - phi) / (((a - phi) * (b - phi)).max(f64::MIN_POSITIVE)).sqrt();
                let mut next = u - f / slope;
                if !(next > lo && next < hi) {
                    next = if lo.is_finite() {
                        0.5 * (lo + hi)
                    } else {
                        u - 1.0
                    };
                }
                if (next - u).abs() < 1e-16 * (1.0 + u.abs()) {
                    u = next;
                    break;
                }
                u = next;
            }
            u.exp()
        }
    }

    /// Essential-spectrum interval `[(c-2k)/4, c)` of the linearized
    /// operator `L_c`, the closed range of the far-field symbol
    /// `c - (3c+2k)/(4+ω²)`.
    pub fn essential_spectrum(&self) -> (f64, f64) {
        ((self.c - 2.0 * self.k) / 4.0, self.c)
    }

    /// Onset `λ₁ = (c-2k)/4 - φ_max` where the reduced shooting coefficient
    /// first changes sign at the crest; the left end of the negative-
    /// eigenvalue bracket.
    pub fn lambda1(&self) -> f64 {
        (self.c - 2.0 * self.k) / 4.0 - self.phi_max()
    }

    /// The smaller of the two positive thresholds
    /// `min{(c-2k)/4, (c-φ_max)/2}` bounding the admissible shooting range
    /// from above.
    pub fn lambda0(&self) -> f64 {
        ((self.c - 2.0 * self.k) / 4.0).min(0.5 * (self.c - self.phi_max()))
    }

    /// Default half-width for line grids: `28/ν`, placing the truncated
    /// tail `φ₋ e^{-νL}` below 1e-12.
    pub fn default_half_width(&self) -> f64 {
        28.0 / self.nu()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p1() -> WaveParams {
        WaveParams::new(1.0, 0.25).unwrap()
    }

    #[test]
    fn accepts_physical_parameters() {
        assert!(WaveParams::new(1.0, 0.25).is_ok());
        assert!(WaveParams::new(5.0, 0.05).is_ok());
    }

    #[test]
    fn rejects_boundary_and_inverted_speeds() {
        // c = 2k sits on the degenerate boundary and is rejected outright.
        let err = WaveParams::new(1.0, 0.5).unwrap_err();
        assert!(err.to_string().contains("c>2k violated"), "{err}");
        let err = WaveParams::new(0.4, 0.25).unwrap_err();
        assert!(err.to_string().contains("c>2k violated"), "{err}");
    }

    #[test]
    fn rejects_nonpositive_k_and_nonfinite() {
        assert!(WaveParams::new(1.0, 0.0).is_err());
        assert!(WaveParams::new(1.0, -0.1).is_err());
        assert!(WaveParams::new(f64::NAN, 0.25).is_err());
        assert!(WaveParams::new(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn quadratic_value_at_zero() {
        // P(0) = c(c-2k)/2 = 0.25 at (c, k) = (1, 0.25).
        assert_relative_eq!(p1().quadratic_p(0.0), 0.25, max_relative = 1e-15);
    }

    #[test]
    fn quadratic_roots_and_factorization() {
        let p = p1();
        let (a, b) = p.phi_extremes();
        // Reference root values for (1, 0.25).
        assert_relative_eq!(a, 0.392374781489235, max_relative = 1e-14);
        assert_relative_eq!(b, 1.2742918851774316, max_relative = 1e-14);
        assert!(p.quadratic_p(a).abs() < 1e-15);
        assert!(p.quadratic_p(b).abs() < 1e-15);
        // P(φ) = ½(φ-φ₋)(φ-φ₊) across a sample of heights.
        for i in 0..50 {
            let phi = -0.5 + 2.5 * (i as f64) / 49.0;
            let lhs = p.quadratic_p(phi);
            let rhs = 0.5 * (phi - a) * (phi - b);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12, epsilon = 1e-14);
        }
    }

    #[test]
    fn amplitude_bounds_hold() {
        // (c-2k)/4 < φ_max < c-2k for several parameter pairs.
        for &(c, k) in &[(1.0, 0.25), (0.6, 0.05), (2.0, 0.3), (5.0, 0.25)] {
            let p = WaveParams::new(c, k).unwrap();
            let pm = p.phi_max();
            assert!((c - 2.0 * k) / 4.0 < pm && pm < c - 2.0 * k, "({c}, {k})");
        }
    }

    #[test]
    fn roots_degenerate_toward_boundary() {
        // As c ↓ 2k: φ₋ → 0 and φ₊ → (8/3)k.
        let k = 0.25;
        let p = WaveParams::new(2.0 * k + 1e-9, k).unwrap();
        let (a, b) = p.phi_extremes();
        assert!(a < 1e-8);
        assert_relative_eq!(b, 8.0 / 3.0 * k, max_relative = 1e-6);
    }

    #[test]
    fn first_integral_vanishes_on_orbit_endpoints() {
        let p = p1();
        let (a, _) = p.phi_extremes();
        assert_eq!(p.first_integral(0.0, 0.0), 0.0);
        assert!(p.first_integral(a, 0.0).abs() < 1e-15);
        // Even in ψ.
        assert_eq!(p.first_integral(0.2, 0.3), p.first_integral(0.2, -0.3));
    }

    #[test]
    fn first_integral_on_slope_field() {
        // Φ(φ, φ_ξ(φ)) = 0 along the closed-form left branch.
        let p = p1();
        let (a, _) = p.phi_extremes();
        for i in 1..40 {
            let phi = a * (i as f64) / 40.0;
            let psi = p.profile_slope(phi);
            let scale = phi * phi * p.quadratic_p(0.0).abs() + 1e-30;
            assert!(
                p.first_integral(phi, psi).abs() <= 1e-13 * scale.max(1.0),
                "phi={phi}"
            );
        }
    }

    #[test]
    fn tail_rate_value() {
        assert_relative_eq!(p1().nu(), 0.7071067811865476, max_relative = 1e-15);
    }

    #[test]
    fn closed_form_inverse_reference_values() {
        // Frozen from an independent quadrature of the inverse integrand
        // (adaptive Gauss–Kronrod on the t = √(φ₋-φ) chart, abs tol 1e-14).
        let p = p1();
        assert_relative_eq!(p.xi_from_height(0.3), -1.132518099754498, max_relative = 1e-13);
        assert_relative_eq!(p.xi_from_height(0.1), -3.0566027726298834, max_relative = 1e-13);
        assert_relative_eq!(p.xi_from_height(0.01), -6.41025006404701, max_relative = 1e-13);
        let p2 = WaveParams::new(2.0, 0.3).unwrap();
        assert_relative_eq!(
            p2.xi_from_height(1.0),
            -0.5269561820121978,
            max_relative = 1e-13
        );
    }

    #[test]
    fn inverse_map_hits_crest_exactly() {
        // Tolerance note: the closed form ends in ln of a ratio that is
        // exactly 1 at the crest; one ulp of ln near 1 is ≈ 2e-17.
        let p = p1();
        let (a, _) = p.phi_extremes();
        assert!(p.xi_from_height(a).abs() < 1e-14);
    }

    #[test]
    fn height_inverts_xi_roundtrip() {
        let p = p1();
        for &xi in &[-1e-3, -0.1, -0.7, -2.0, -5.0, -15.0, -35.0] {
            let phi = p.height_from_xi(xi);
            let back = p.xi_from_height(phi);
            assert_relative_eq!(back, xi, max_relative = 1e-12, epsilon = 1e-12);
        }
        // Even extension.
        assert_eq!(p.height_from_xi(2.0), p.height_from_xi(-2.0));
        assert_eq!(p.height_from_xi(0.0), p.phi_max());
    }

    #[test]
    fn tail_amplitude_matches_deep_profile() {
        // φ(ξ)·e^{νξ} → C as ξ → -∞; relative deviation is O(φ).
        let p = p1();
        let c_tail = p.tail_amplitude();
        assert_relative_eq!(c_tail, 0.9364154219189369, max_relative = 1e-13);
        let xi = -30.0;
        let phi = p.height_from_xi(xi);
        assert_relative_eq!(phi, c_tail * (p.nu() * xi).exp(), max_relative = 1e-8);
    }

    #[test]
    fn tail_amplitude_peakon_limit() {
        // C → c as k → 0 (the peaked wave c·e^{-|ξ|}), but not monotonically:
        // C - c changes sign near k ≈ 0.17 and peaks around k ≈ 0.1 before
        // the final k·ln(1/k)-paced decay, so monotonicity is asserted only
        // from the hump downward.
        let c = 1.0;
        let mut last = (WaveParams::new(c, 0.1).unwrap().tail_amplitude() - c).abs();
        for &k in &[0.05, 0.02, 0.01, 0.001] {
            let dev = (WaveParams::new(c, k).unwrap().tail_amplitude() - c).abs();
            assert!(dev < last, "k={k}: {dev} !< {last}");
            last = dev;
        }
        // Tolerance note: at k = 1e-4 the deviation measures ≈ 4.3e-4,
        // consistent with the O(k·ln(1/k)) approach; 5e-4 pins that scale.
        let dev = (WaveParams::new(c, 1e-4).unwrap().tail_amplitude() - c).abs();
        assert!(dev < 5e-4, "k=1e-4: {dev}");
    }

    #[test]
    fn spectral_thresholds() {
        let p = p1();
        let (lo, hi) = p.essential_spectrum();
        assert_eq!(lo, 0.125);
        assert_eq!(hi, 1.0);
        assert_relative_eq!(p.lambda1(), 0.125 - 0.392374781489235, max_relative = 1e-13);
        assert!(p.lambda0() > 0.0);
    }

    #[test]
    fn crest_curvature_is_negative() {
        for &(c, k) in &[(1.0, 0.25), (0.6, 0.05), (5.0, 0.25)] {
            let p = WaveParams::new(c, k).unwrap();
            assert!(p.crest_curvature() < 0.0, "({c}, {k})");
        }
    }
}
