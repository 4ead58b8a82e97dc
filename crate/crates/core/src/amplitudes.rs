//! Closed-form second-order amplitudes.
//!
//! Everything is written in dimensionless variables: `ξ = vt/r`,
//! `ρ = Ωr/v`, `Ωt = ρξ`, `τ± = ρ(1 ± ξ)`, and the coupling
//! `K = 2(g/Ω)²`. Each amplitude carries exactly one factor of `K`.
//!
//! The exchange amplitude and the vacuum-pair coherence reduce to
//! principal-value integrals of `cos σ/(σ − a)` and `sin σ/(σ − a)` over
//! `σ ∈ [0, Ωt]` with `a = ±ρ`. Those are expressed with `Si`/`Ci` in
//! [`pv_cos`] and [`pv_sin`]; the light-cone contributions show up as
//! step-function terms in `ξ − 1`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::specfun::{ci, sine_integral};
use crate::{Error, Real, Result};

/// Offset used to evaluate one-sided limits at the light cone.
pub const BOUNDARY_DELTA: f64 = 1e-6;

/// Spectral weight of the line as seen by a point-like qubit.
///
/// `Flat` reproduces the closed-form emission probabilities and keeps every
/// amplitude UV finite; it is the default. `Ohmic` weights each mode by
/// `|k|`. Under `Ohmic` only the cross-qubit amplitudes (`X`, `ρ₁₄`) are
/// finite, so emission probabilities and `Re A` keep their flat closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spectrum {
    #[default]
    Flat,
    Ohmic,
}

impl std::str::FromStr for Spectrum {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flat" => Ok(Spectrum::Flat),
            "ohmic" => Ok(Spectrum::Ohmic),
            other => Err(Error::Config(format!(
                "unknown spectrum `{other}` (expected flat|ohmic)"
            ))),
        }
    }
}

/// Spacetime region of a point relative to the light cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// `ξ < 1`, space-like separated.
    #[serde(rename = "I")]
    Spacelike,
    #[serde(rename = "boundary")]
    Boundary,
    /// `ξ > 1`, time-like separated.
    #[serde(rename = "II")]
    Timelike,
}

/// Dimensionless evaluation coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point<T> {
    pub xi: T,
    pub rho: T,
    #[serde(rename = "K")]
    pub coupling: T,
}

impl<T: Real> Point<T> {
    pub fn new(xi: T, rho: T, coupling: T) -> Result<Self> {
        let p = Point { xi, rho, coupling };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for v in [self.xi, self.rho, self.coupling] {
            if !v.is_finite() {
                return Err(Error::NonFinite(v.as_f64()));
            }
        }
        if self.xi < T::zero() {
            return Err(Error::Domain(format!("xi must be >= 0, got {}", self.xi)));
        }
        if self.rho <= T::zero() {
            return Err(Error::Domain(format!("rho must be > 0, got {}", self.rho)));
        }
        if self.coupling < T::zero() {
            return Err(Error::Domain(format!(
                "K must be >= 0, got {}",
                self.coupling
            )));
        }
        Ok(())
    }

    /// `Ωt = ρξ`.
    pub fn omega_t(&self) -> T {
        self.rho * self.xi
    }

    /// `τ₋ = ρ(1 − ξ)`, negative inside the light cone.
    pub fn tau_minus(&self) -> T {
        self.rho * (T::one() - self.xi)
    }

    /// `τ₊ = ρ(1 + ξ)`.
    pub fn tau_plus(&self) -> T {
        self.rho * (T::one() + self.xi)
    }

    pub fn region(&self) -> Region {
        if self.xi < T::one() {
            Region::Spacelike
        } else if self.xi > T::one() {
            Region::Timelike
        } else {
            Region::Boundary
        }
    }

    pub fn with_coupling(&self, coupling: T) -> Self {
        Point { coupling, ..*self }
    }

    pub fn with_xi(&self, xi: T) -> Self {
        Point { xi, ..*self }
    }
}

/// All second-order amplitudes at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSet<T> {
    /// Exchange amplitude `X`.
    pub x: Complex<T>,
    /// `|U_A|²`
    pub u_a2: T,
    /// `|V_B|²`
    pub v_b2: T,
    /// `⟨0|S_A⁺ S_B⁺|0⟩`
    pub rho14: Complex<T>,
    /// `Re A`
    pub re_a: T,
}

impl<T: Real> AmplitudeSet<T> {
    pub fn zero() -> Self {
        let z = Complex::new(T::zero(), T::zero());
        AmplitudeSet {
            x: z,
            u_a2: T::zero(),
            v_b2: T::zero(),
            rho14: z,
            re_a: T::zero(),
        }
    }
}

fn check_emission_args<T: Real>(omega_t: T, k: T) -> Result<()> {
    for v in [omega_t, k] {
        if !v.is_finite() {
            return Err(Error::NonFinite(v.as_f64()));
        }
    }
    if omega_t < T::zero() || k < T::zero() {
        return Err(Error::Domain(format!(
            "emission probabilities need omega_t >= 0 and K >= 0, got {omega_t}, {k}"
        )));
    }
    Ok(())
}

/// `(|U_A|², |V_B|²) = (f₊(Ωt), f₋(Ωt))` with
/// `f± = (K/2)(πΩt ± 2(cos Ωt + Ωt Si(Ωt) − 1))`.
pub fn emission_probs<T: Real>(omega_t: T, k: T) -> Result<(T, T)> {
    check_emission_args(omega_t, k)?;
    let two = T::lit(2.0);
    let g = omega_t.cos() + omega_t * sine_integral(omega_t)? - T::one();
    let linear = T::PI() * omega_t;
    let half_k = k / two;
    Ok((half_k * (linear + two * g), half_k * (linear - two * g)))
}

/// `Re A = −(f₊ + f₋)/2 = −πKΩt/2`, fixed by norm conservation at this order.
pub fn radiative_re_a<T: Real>(omega_t: T, k: T) -> Result<T> {
    let (fp, fm) = emission_probs(omega_t, k)?;
    Ok(-(fp + fm) / T::lit(2.0))
}

/// `PV ∫₀ᵗ cos σ / (σ − a) dσ` for `a ≠ 0`, `a ≠ t`.
pub fn pv_cos<T: Real>(a: T, t: T) -> Result<T> {
    let (s, c) = a.sin_cos();
    let log_part = ci(t - a)? - ci(a)?;
    let sin_part = sine_integral(t - a)? + sine_integral(a)?;
    Ok(c * log_part - s * sin_part)
}

/// `PV ∫₀ᵗ sin σ / (σ − a) dσ` for `a ≠ 0`, `a ≠ t`.
pub fn pv_sin<T: Real>(a: T, t: T) -> Result<T> {
    let (s, c) = a.sin_cos();
    let log_part = ci(t - a)? - ci(a)?;
    let sin_part = sine_integral(t - a)? + sine_integral(a)?;
    Ok(c * sin_part + s * log_part)
}

fn check_off_cone<T: Real>(p: &Point<T>) -> Result<()> {
    p.validate()?;
    if p.xi == T::one() {
        return Err(Error::LightConeBoundary);
    }
    Ok(())
}

/// Exchange amplitude `X = ⟨0|T(S_B⁺ S_A⁻)|0⟩`.
pub fn exchange_amplitude_closed<T: Real>(p: &Point<T>, spectrum: Spectrum) -> Result<Complex<T>> {
    check_off_cone(p)?;
    let t = p.omega_t();
    if t == T::zero() {
        return Ok(Complex::new(T::zero(), T::zero()));
    }
    let rho = p.rho;
    let half_k = p.coupling / T::lit(2.0);
    let inside = p.xi > T::one();
    let pi = T::PI();
    let (sin_rho, cos_rho) = rho.sin_cos();
    let x = match spectrum {
        Spectrum::Flat => {
            // −(K/2)[π(t−ρ)cos ρ Θ − i((t−ρ)P_c(ρ) + (t+ρ)P_c(−ρ) − 2 sin t)]
            let exchange = if inside {
                pi * (t - rho) * cos_rho
            } else {
                T::zero()
            };
            let vacuum =
                (t - rho) * pv_cos(rho, t)? + (t + rho) * pv_cos(-rho, t)? - T::lit(2.0) * t.sin();
            Complex::new(-half_k * exchange, half_k * vacuum)
        }
        Spectrum::Ohmic => {
            let re = -pv_cos(rho, t)?
                - (t - rho) * pv_sin(rho, t)?
                - pv_cos(-rho, t)?
                - (t + rho) * pv_sin(-rho, t)?
                + T::lit(2.0) * (T::one() - t.cos());
            let im = if inside {
                -pi * (cos_rho + (t - rho) * sin_rho)
            } else {
                T::zero()
            };
            Complex::new(half_k * re, half_k * im)
        }
    };
    Ok(x)
}

/// Vacuum-pair coherence `ρ₁₄ = ⟨0|S_A⁺ S_B⁺|0⟩`, the untime-ordered
/// counterpart of `X`.
///
/// With the flat weight the symmetrised cross correlator is supported on the
/// light cone only, so `ρ₁₄` vanishes identically for `ξ < 1`.
pub fn vacuum_pair_amplitude<T: Real>(p: &Point<T>, spectrum: Spectrum) -> Result<Complex<T>> {
    check_off_cone(p)?;
    let t = p.omega_t();
    let zero = Complex::new(T::zero(), T::zero());
    if t == T::zero() {
        return Ok(zero);
    }
    let rho = p.rho;
    let half_k = p.coupling / T::lit(2.0);
    let phase = Complex::new(T::zero(), t).exp();
    match spectrum {
        Spectrum::Flat => {
            if p.xi > T::one() {
                Ok(phase.scale(-half_k * T::PI() * (t - rho).sin()))
            } else {
                Ok(zero)
            }
        }
        Spectrum::Ohmic => {
            let (sin_t, cos_t) = t.sin_cos();
            let q = |a: T| -> Result<T> { Ok(cos_t * pv_cos(a, t)? + sin_t * pv_sin(a, t)?) };
            Ok(phase.scale(-half_k * (q(rho)? + q(-rho)?)))
        }
    }
}

/// Assembles every amplitude at `p` with the default flat spectrum.
pub fn amplitude_set<T: Real>(p: &Point<T>) -> Result<AmplitudeSet<T>> {
    amplitude_set_with(p, Spectrum::Flat)
}

pub fn amplitude_set_with<T: Real>(p: &Point<T>, spectrum: Spectrum) -> Result<AmplitudeSet<T>> {
    check_off_cone(p)?;
    let t = p.omega_t();
    let (u_a2, v_b2) = emission_probs(t, p.coupling)?;
    Ok(AmplitudeSet {
        x: exchange_amplitude_closed(p, spectrum)?,
        u_a2,
        v_b2,
        rho14: vacuum_pair_amplitude(p, spectrum)?,
        re_a: -(u_a2 + v_b2) / T::lit(2.0),
    })
}

/// Amplitudes just outside (`ξ = 1 − δ`) and just inside (`ξ = 1 + δ`) the
/// light cone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryLimits<T> {
    pub below: AmplitudeSet<T>,
    pub above: AmplitudeSet<T>,
}

pub fn boundary_limits<T: Real>(
    rho: T,
    coupling: T,
    spectrum: Spectrum,
) -> Result<BoundaryLimits<T>> {
    let delta = T::lit(BOUNDARY_DELTA);
    let below = Point::new(T::one() - delta, rho, coupling)?;
    let above = Point::new(T::one() + delta, rho, coupling)?;
    Ok(BoundaryLimits {
        below: amplitude_set_with(&below, spectrum)?,
        above: amplitude_set_with(&above, spectrum)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, PI};

    const K: f64 = 0.15;

    #[test]
    fn emission_vanishes_at_origin() {
        assert_eq!(emission_probs(0.0_f64, K).unwrap(), (0.0, 0.0));
        assert_eq!(radiative_re_a(0.0_f64, K).unwrap(), 0.0);
    }

    #[test]
    fn virtual_excitation_saturates_near_k() {
        let (_, fm) = emission_probs(200.0_f64, K).unwrap();
        assert!((fm - K).abs() < 0.002, "{fm}");
        // Large-argument expansion: f₋ → K(1 + sin(Ωt)/Ωt).
        let t = 200.0_f64;
        assert!((fm - K * (1.0 + t.sin() / t)).abs() < 1e-4);
    }

    #[test]
    fn emission_rejects_bad_input() {
        assert!(emission_probs(-1.0_f64, K).is_err());
        assert!(emission_probs(1.0_f64, -K).is_err());
        assert!(matches!(
            emission_probs(f64::NAN, K),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn re_a_is_minus_half_total_emission() {
        let (fp, fm) = emission_probs(3.0_f64, K).unwrap();
        assert_eq!(radiative_re_a(3.0_f64, K).unwrap(), -(fp + fm) / 2.0);
        assert!((radiative_re_a(3.0_f64, K).unwrap() + PI * K * 3.0 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_time_gives_zero_amplitudes() {
        let p = Point::new(0.0, FRAC_PI_4, K).unwrap();
        for s in [Spectrum::Flat, Spectrum::Ohmic] {
            let a = amplitude_set_with(&p, s).unwrap();
            assert_eq!(a, AmplitudeSet::zero());
        }
    }

    #[test]
    fn boundary_is_rejected() {
        let p = Point::new(1.0, FRAC_PI_4, K).unwrap();
        assert_eq!(
            exchange_amplitude_closed(&p, Spectrum::Flat),
            Err(Error::LightConeBoundary)
        );
        assert_eq!(
            vacuum_pair_amplitude(&p, Spectrum::Flat),
            Err(Error::LightConeBoundary)
        );
        assert_eq!(amplitude_set(&p), Err(Error::LightConeBoundary));
    }

    #[test]
    fn point_validation() {
        assert!(Point::new(-0.1, 1.0, K).is_err());
        assert!(Point::new(0.5, 0.0, K).is_err());
        assert!(Point::new(0.5, 1.0, -K).is_err());
        let p = Point::new(1.5, 2.0, K).unwrap();
        assert_eq!(p.omega_t(), 3.0);
        assert_eq!(p.tau_minus(), -1.0);
        assert_eq!(p.tau_plus(), 5.0);
        assert_eq!(p.region(), Region::Timelike);
        assert_eq!(p.with_xi(1.0).region(), Region::Boundary);
        assert_eq!(p.with_xi(0.2).region(), Region::Spacelike);
    }

    #[test]
    fn pv_helpers_match_direct_quadrature() {
        use crate::quadrature::{integrate_real, Tolerance};
        // Regular case (a outside the interval) checked by plain quadrature.
        let t = 1.3_f64;
        let a = -0.7_f64;
        let tol = Tolerance::new(1e-15, 1e-15);
        let c = integrate_real(|s| s.cos() / (s - a), 0.0, t, &[], tol).value;
        let s = integrate_real(|s| s.sin() / (s - a), 0.0, t, &[], tol).value;
        assert!((pv_cos(a, t).unwrap() - c).abs() < 1e-13);
        assert!((pv_sin(a, t).unwrap() - s).abs() < 1e-13);

        // Principal value via symmetric subtraction around the pole.
        let a = 0.6_f64;
        let h = (t - a).min(a);
        let sub = |g: fn(f64) -> f64| {
            let near = integrate_real(|s| (g(s) - g(a)) / (s - a), a - h, a + h, &[a], tol).value;
            let far = if a + h < t {
                integrate_real(|s| g(s) / (s - a), a + h, t, &[], tol).value
            } else {
                integrate_real(|s| g(s) / (s - a), 0.0, a - h, &[], tol).value
            };
            near + far
        };
        assert!((pv_cos(a, t).unwrap() - sub(f64::cos)).abs() < 1e-12);
        assert!((pv_sin(a, t).unwrap() - sub(f64::sin)).abs() < 1e-12);
    }

    #[test]
    fn exchange_grows_across_the_cone() {
        let inside =
            exchange_amplitude_closed(&Point::new(1.5, FRAC_PI_4, K).unwrap(), Spectrum::Flat)
                .unwrap();
        let outside =
            exchange_amplitude_closed(&Point::new(0.5, FRAC_PI_4, K).unwrap(), Spectrum::Flat)
                .unwrap();
        assert!(inside.norm() > outside.norm());
        // Outside the cone only the vacuum (imaginary) part survives.
        assert_eq!(outside.re, 0.0);
        assert!(outside.im != 0.0);
    }

    #[test]
    fn flat_pair_coherence_vanishes_outside_cone() {
        for i in 1..20 {
            let xi = 0.05 * i as f64;
            let p = Point::new(xi, FRAC_PI_6, K).unwrap();
            assert_eq!(
                vacuum_pair_amplitude(&p, Spectrum::Flat).unwrap().norm(),
                0.0
            );
        }
    }

    #[test]
    fn exact_linearity_in_coupling() {
        for s in [Spectrum::Flat, Spectrum::Ohmic] {
            for &xi in &[0.3, 0.9, 1.2, 1.9] {
                let p = Point::new(xi, FRAC_PI_4, K).unwrap();
                let a = amplitude_set_with(&p, s).unwrap();
                let b = amplitude_set_with(&p.with_coupling(2.0 * K), s).unwrap();
                assert_eq!(b.x, a.x * 2.0);
                assert_eq!(b.rho14, a.rho14 * 2.0);
                assert_eq!(b.u_a2, 2.0 * a.u_a2);
                assert_eq!(b.v_b2, 2.0 * a.v_b2);
                assert_eq!(b.re_a, 2.0 * a.re_a);
            }
        }
    }

    #[test]
    fn emission_depends_on_omega_t_only() {
        // ρξ identical bit for bit: same Ωt in, same probabilities out.
        let t = FRAC_PI_6 * 1.5;
        let a = emission_probs(t, K).unwrap();
        let b = emission_probs(FRAC_PI_4 * (t / FRAC_PI_4), K).unwrap();
        if FRAC_PI_4 * (t / FRAC_PI_4) == t {
            assert_eq!(a, b);
        }
        let p1 = Point::new(2.0, 0.5, K).unwrap();
        let p2 = Point::new(0.5, 2.0, K).unwrap();
        assert_eq!(p1.omega_t(), p2.omega_t());
        let s1 = amplitude_set(&p1).unwrap();
        let s2 = amplitude_set(&p2).unwrap();
        assert_eq!((s1.u_a2, s1.v_b2, s1.re_a), (s2.u_a2, s2.v_b2, s2.re_a));
    }

    #[test]
    fn flat_exchange_is_continuous_across_cone() {
        let lim = boundary_limits(FRAC_PI_4, K, Spectrum::Flat).unwrap();
        assert!((lim.above.x - lim.below.x).norm() < 1e-4);
        // Ohmic weight keeps a finite jump in Im X of size πK cos ρ / 2.
        let lim = boundary_limits(FRAC_PI_4, K, Spectrum::Ohmic).unwrap();
        let jump = lim.above.x.im - lim.below.x.im;
        assert!(
            (jump + PI * K * FRAC_PI_4.cos() / 2.0).abs() < 1e-5,
            "{jump}"
        );
    }

    #[test]
    fn finite_difference_continuity_off_cone() {
        let h = 1e-4;
        for s in [Spectrum::Flat, Spectrum::Ohmic] {
            for i in 1..40 {
                let xi = 0.05 * i as f64;
                if (xi - 1.0_f64).abs() < 0.03 {
                    continue;
                }
                let p = Point::new(xi, FRAC_PI_4, K).unwrap();
                let x0 = exchange_amplitude_closed(&p, s).unwrap();
                let x1 = exchange_amplitude_closed(&p.with_xi(xi + h), s).unwrap();
                assert!((x1 - x0).norm() < 1e-3 * K, "{s:?} xi={xi}");
            }
        }
    }
}
