//! Brute-force amplitudes straight from the time-domain definitions.
//!
//! Each amplitude is a double time integral of a two-point field correlator.
//! The correlator is damped by `e^{−εu}` in mode space, which makes it a
//! closed-form rational function of `ε`; the double integral is reduced to
//! one dimension, done by adaptive quadrature, and extrapolated to `ε → 0`.
//! Nothing here uses the special functions or the closed forms, so the two
//! paths check each other.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::amplitudes::{Point, Spectrum};
use crate::quadrature::{extrapolate_to_zero, integrate, Estimate, ExtrapolationBasis, Tolerance};
use crate::specfun::KernelKind;
use crate::{Error, Real, Result};

type ComplexEstimate<T> = Estimate<Complex<T>, T>;

/// Smallest regulator the oracle accepts.
pub const MIN_EPS: f64 = 1e-4;
/// Largest starting regulator used by [`RegulatorSchedule::for_point`].
pub const MAX_EPS: f64 = 6.4e-3;
/// Number of regulator levels used by [`RegulatorSchedule::for_point`].
pub const DEFAULT_LEVELS: usize = 7;
/// Default accuracy target of the extrapolated values.
pub const DEFAULT_QUAD_TOL: f64 = 1e-9;

/// Regulator values and accuracy target for one oracle evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegulatorSchedule<T> {
    /// Strictly decreasing regulator values.
    pub eps_values: Vec<T>,
    /// Number of correction terms in the extrapolation model. The value uses
    /// the `extrapolation_order + 1` smallest regulators.
    pub extrapolation_order: usize,
    /// Relative accuracy target for the extrapolated value.
    pub quad_tol: T,
}

impl<T: Real> RegulatorSchedule<T> {
    pub fn new(eps_values: Vec<T>, extrapolation_order: usize, quad_tol: T) -> Result<Self> {
        let s = RegulatorSchedule {
            eps_values,
            extrapolation_order,
            quad_tol,
        };
        s.validate()?;
        Ok(s)
    }

    /// `levels` values `eps0, eps0/2, eps0/4, …` using every level in the fit.
    pub fn geometric(eps0: T, levels: usize, quad_tol: T) -> Result<Self> {
        let half = T::lit(0.5);
        let eps = (0..levels).scan(eps0, |e, _| {
            let v = *e;
            *e = *e * half;
            Some(v)
        });
        Self::new(eps.collect(), levels.saturating_sub(1), quad_tol)
    }

    /// Schedule adapted to the scales present at `p`.
    ///
    /// The regulated integrands have features of width `ε` at distance `R`
    /// from the integration endpoints and from each other, with `R` the
    /// smallest of `ρ`, `Ωt` and `|Ωt − ρ|`. The expansion in `ε` converges
    /// for `ε ≪ R`, so the schedule starts at `R/4` (capped) and halves.
    pub fn for_point(p: &Point<T>) -> Result<Self> {
        let t = p.omega_t();
        let scale = p.rho.min(t).min((t - p.rho).abs());
        let levels = DEFAULT_LEVELS;
        let floor = T::lit(MIN_EPS) * T::from_count(1 << (levels - 1));
        let eps0 = (scale / T::lit(4.0)).min(T::lit(MAX_EPS)).max(floor);
        Self::geometric(eps0, levels, T::lit(DEFAULT_QUAD_TOL))
    }

    /// Same schedule with every regulator multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::new(
            self.eps_values.iter().map(|&e| e * factor).collect(),
            self.extrapolation_order,
            self.quad_tol,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let eps = &self.eps_values;
        if eps.len() < 3 {
            return Err(Error::Domain(
                "regulator schedule needs at least 3 values".into(),
            ));
        }
        if eps.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Domain(
                "regulator values must be strictly decreasing".into(),
            ));
        }
        let smallest = eps[eps.len() - 1];
        if !(smallest >= T::lit(MIN_EPS)) || !eps[0].is_finite() {
            return Err(Error::Domain(format!(
                "regulator values must lie in [{MIN_EPS}, inf), got smallest {smallest}"
            )));
        }
        if self.extrapolation_order < 1 || self.extrapolation_order >= eps.len() {
            return Err(Error::Domain(format!(
                "extrapolation order {} needs between 1 and {} terms",
                self.extrapolation_order,
                eps.len() - 1
            )));
        }
        if !(self.quad_tol > T::zero()) {
            return Err(Error::Domain("quad_tol must be positive".into()));
        }
        Ok(())
    }

    fn fitted(&self) -> &[T] {
        &self.eps_values[self.eps_values.len() - self.extrapolation_order - 1..]
    }
}

/// Damped two-point kernel `∫₀^∞ du w(u) e^{−εu}[e^{iu(a−b)} + e^{−iu(a+b)}]`
/// with mode weight `w(u) = 1` (flat) or `w(u) = u` (ohmic).
///
/// `a` is a separation and `b` a time difference, both dimensionless.
pub fn regularized_correlator<T: Real>(
    a: T,
    b: T,
    eps: T,
    spectrum: Spectrum,
) -> Result<Complex<T>> {
    if !(eps > T::zero()) {
        return Err(Error::Domain(format!(
            "regulator must be positive, got {eps}"
        )));
    }
    Ok(correlator(a, b, eps, spectrum))
}

#[inline]
fn correlator<T: Real>(a: T, b: T, eps: T, spectrum: Spectrum) -> Complex<T> {
    let first = Complex::new(eps, b - a);
    let second = Complex::new(eps, a + b);
    match spectrum {
        Spectrum::Flat => first.inv() + second.inv(),
        Spectrum::Ohmic => (first * first).inv() + (second * second).inv(),
    }
}

/// `∫₀ᵗ ds_o ∫₀ᵗ ds_i f(s_o, s_i)` by nested adaptive quadrature, with
/// inner breakpoints at `s_o + offset`. Only used to check the 1D reductions.
#[cfg(test)]
fn square_integral<T, F>(
    t: T,
    outer_breaks: &[T],
    inner_offsets: &[T],
    tol: Tolerance<T>,
    f: F,
) -> Complex<T>
where
    T: Real,
    F: Fn(T, T) -> Complex<T>,
{
    let outer = |so: T| {
        let breaks: Vec<T> = inner_offsets.iter().map(|&d| so + d).collect();
        integrate(|si| f(so, si), T::zero(), t, &breaks, tol).value
    };
    integrate(outer, T::zero(), t, outer_breaks, tol).value
}

// The double time integrals below are reduced to one dimension exactly.
// With `Δ = s₁ − s₂` and `Σ = s₁ + s₂` the square `[0, t]²` maps to
// `|Δ| ≤ t`, `|Δ| ≤ Σ ≤ 2t − |Δ|` with Jacobian ½. Integrands that depend on
// `Δ` only pick up the weight `t − |Δ|`; a factor `e^{iΣ}` integrates to
// `e^{it} sin(t − |Δ|)`.

/// `∬ g(s₁ − s₂)` over the square.
fn difference_integral<T, F>(t: T, breaks: &[T], tol: Tolerance<T>, g: F) -> Complex<T>
where
    T: Real,
    F: Fn(T) -> Complex<T>,
{
    integrate(|d| g(d).scale(t - d.abs()), -t, t, breaks, tol).value
}

/// `∬ e^{i(s₁ + s₂)} h(s₁ − s₂)` over the square.
fn sum_phase_integral<T, F>(t: T, breaks: &[T], tol: Tolerance<T>, h: F) -> Complex<T>
where
    T: Real,
    F: Fn(T) -> Complex<T>,
{
    let inner = integrate(|d| h(d).scale((t - d.abs()).sin()), -t, t, breaks, tol).value;
    phase(t) * inner
}

fn quad_tolerance<T: Real>(sched: &RegulatorSchedule<T>) -> Tolerance<T> {
    // Extrapolation amplifies level-to-level noise, so each level is
    // resolved well below the target.
    let rel = sched.quad_tol * T::lit(1e-3);
    let mut tol = Tolerance::new(rel * T::lit(1e-2), rel);
    tol.max_intervals = 20_000;
    tol
}

fn extrapolate_levels<T, F>(
    sched: &RegulatorSchedule<T>,
    basis: ExtrapolationBasis,
    level: F,
) -> Result<Estimate<Complex<T>, T>>
where
    T: Real,
    F: Fn(T) -> Complex<T> + Sync,
{
    sched.validate()?;
    let eps = sched.fitted();
    let values: Vec<Complex<T>> = eps.par_iter().map(|&e| level(e)).collect();
    extrapolate_to_zero(eps, &values, basis)
}

fn check_converged<T: Real>(
    est: Estimate<Complex<T>, T>,
    sched: &RegulatorSchedule<T>,
    scale: T,
) -> Result<Estimate<Complex<T>, T>> {
    let allowed = sched.quad_tol * est.value.norm().max(scale);
    if est.error > allowed || !est.value.re.is_finite() || !est.value.im.is_finite() {
        return Err(Error::Convergence {
            residual: est.error.as_f64(),
            tolerance: allowed.as_f64(),
        });
    }
    Ok(est)
}

fn zero_estimate<T: Real>() -> Estimate<Complex<T>, T> {
    Estimate {
        value: Complex::new(T::zero(), T::zero()),
        error: T::zero(),
    }
}

fn prefactor<T: Real>(k: T) -> T {
    k / T::lit(4.0)
}

/// Smallest magnitude against which relative accuracy is judged. Every
/// amplitude is of order `K`, so `K` itself sets the scale.
fn magnitude_floor<T: Real>(k: T) -> T {
    k
}

// Unscaled double time integrals at one regulator value.

fn exchange_level<T: Real>(
    t: T,
    rho: T,
    eps: T,
    spectrum: Spectrum,
    tol: Tolerance<T>,
) -> Complex<T> {
    let breaks = [-rho, T::zero(), rho];
    difference_integral(t, &breaks, tol, |d| {
        phase(d) * correlator(rho, d.abs(), eps, spectrum)
    })
}

fn rho14_level<T: Real>(t: T, rho: T, eps: T, spectrum: Spectrum, tol: Tolerance<T>) -> Complex<T> {
    let breaks = [-rho, T::zero(), rho];
    sum_phase_integral(t, &breaks, tol, |d| correlator(rho, d, eps, spectrum))
}

/// `sign = +1` gives the `|U_A|²` integrand, `−1` the `|V_B|²` one.
fn self_level<T: Real>(t: T, eps: T, sign: T, tol: Tolerance<T>) -> Complex<T> {
    difference_integral(t, &[T::zero()], tol, |d| {
        phase(sign * d) * correlator(T::zero(), d, eps, Spectrum::Flat)
    })
}

/// Time-ordered self correlator summed over both qubits, real part only.
fn re_a_level<T: Real>(t: T, eps: T, tol: Tolerance<T>) -> T {
    difference_integral(t, &[T::zero()], tol, |d| {
        correlator(T::zero(), d.abs(), eps, Spectrum::Flat).scale(T::lit(2.0) * d.cos())
    })
    .re
}

fn phase<T: Real>(x: T) -> Complex<T> {
    let (s, c) = x.sin_cos();
    Complex::new(c, s)
}

/// Raw extrapolated `X` without the convergence gate.
pub fn exchange_amplitude_estimate<T: Real>(
    p: &Point<T>,
    sched: &RegulatorSchedule<T>,
    spectrum: Spectrum,
) -> Result<Estimate<Complex<T>, T>> {
    p.validate()?;
    let t = p.omega_t();
    if t == T::zero() {
        return Ok(zero_estimate());
    }
    let rho = p.rho;
    let c = prefactor(p.coupling);
    let tol = quad_tolerance(sched);
    let est = extrapolate_levels(sched, ExtrapolationBasis::Polynomial, |eps| {
        exchange_level(t, rho, eps, spectrum, tol)
    })?;
    Ok(Estimate {
        value: est.value.scale(-c),
        error: est.error * c,
    })
}

/// Exchange amplitude `X` from the time-ordered cross correlator.
pub fn exchange_amplitude_oracle<T: Real>(
    p: &Point<T>,
    sched: &RegulatorSchedule<T>,
    spectrum: Spectrum,
) -> Result<Complex<T>> {
    let est = exchange_amplitude_estimate(p, sched, spectrum)?;
    Ok(check_converged(est, sched, magnitude_floor(p.coupling))?.value)
}

/// Raw extrapolated `ρ₁₄` without the convergence gate.
pub fn rho14_estimate<T: Real>(
    p: &Point<T>,
    sched: &RegulatorSchedule<T>,
    spectrum: Spectrum,
) -> Result<Estimate<Complex<T>, T>> {
    p.validate()?;
    let t = p.omega_t();
    if t == T::zero() {
        return Ok(zero_estimate());
    }
    let rho = p.rho;
    let c = prefactor(p.coupling);
    let tol = quad_tolerance(sched);
    let est = extrapolate_levels(sched, ExtrapolationBasis::Polynomial, |eps| {
        rho14_level(t, rho, eps, spectrum, tol)
    })?;
    Ok(Estimate {
        value: est.value.scale(-c),
        error: est.error * c,
    })
}

/// Vacuum-pair coherence `ρ₁₄` from the unordered cross correlator.
pub fn rho14_oracle<T: Real>(
    p: &Point<T>,
    sched: &RegulatorSchedule<T>,
    spectrum: Spectrum,
) -> Result<Complex<T>> {
    let est = rho14_estimate(p, sched, spectrum)?;
    Ok(check_converged(est, sched, magnitude_floor(p.coupling))?.value)
}

/// Oracle emission probabilities with the imaginary parts left over by the
/// quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmissionOracle<T> {
    pub u_a2: T,
    pub v_b2: T,
    pub u_a2_error: T,
    pub v_b2_error: T,
    /// Largest imaginary part of the two `|·|²` estimates.
    pub imag_residue: T,
}

fn self_estimate<T: Real>(
    t: T,
    k: T,
    sched: &RegulatorSchedule<T>,
    sign: T,
) -> Result<Estimate<Complex<T>, T>> {
    let c = prefactor(k);
    let tol = quad_tolerance(sched);
    let est = extrapolate_levels(sched, ExtrapolationBasis::PolynomialLog, |eps| {
        self_level(t, eps, sign, tol)
    })?;
    Ok(Estimate {
        value: est.value.scale(c),
        error: est.error * c,
    })
}

/// Raw extrapolated `(|U_A|², |V_B|²)` without the convergence gate.
pub fn emission_estimate<T: Real>(
    p: &Point<T>,
    sched: &RegulatorSchedule<T>,
) -> Result<(ComplexEstimate<T>, ComplexEstimate<T>)> {
    p.validate()?;
    let t = p.omega_t();
    if t == T::zero() {
        return Ok((zero_estimate(), zero_estimate()));
    }
    Ok((
        self_estimate(t, p.coupling, sched, T::one())?,
        self_estimate(t, p.coupling, sched, -T::one())?,
    ))
}

/// `|U_A|²` and `|V_B|²` from the unordered self correlator, flat weight.
pub fn emission_prob_oracle<T: Real>(
    p: &Point<T>,
    sched: &RegulatorSchedule<T>,
) -> Result<EmissionOracle<T>> {
    let floor = magnitude_floor(p.coupling);
    let (u, v) = emission_estimate(p, sched)?;
    let u = check_converged(u, sched, floor)?;
    let v = check_converged(v, sched, floor)?;
    Ok(EmissionOracle {
        u_a2: u.value.re,
        v_b2: v.value.re,
        u_a2_error: u.error,
        v_b2_error: v.error,
        imag_residue: u.value.im.abs().max(v.value.im.abs()),
    })
}

/// Raw extrapolated `Re A` without the convergence gate.
pub fn re_a_estimate<T: Real>(
    omega_t: T,
    k: T,
    sched: &RegulatorSchedule<T>,
) -> Result<Estimate<T, T>> {
    if !omega_t.is_finite() || !k.is_finite() {
        return Err(Error::NonFinite(omega_t.as_f64()));
    }
    if omega_t < T::zero() || k < T::zero() {
        return Err(Error::Domain("Re A needs omega_t >= 0 and K >= 0".into()));
    }
    if omega_t == T::zero() {
        return Ok(Estimate {
            value: T::zero(),
            error: T::zero(),
        });
    }
    let c = prefactor(k);
    let tol = quad_tolerance(sched);
    // Only the real part converges as ε → 0, so extrapolate that alone.
    let est = extrapolate_levels(sched, ExtrapolationBasis::PolynomialLog, |eps| {
        Complex::new(re_a_level(omega_t, eps, tol), T::zero())
    })?;
    let half_c = c / T::lit(2.0);
    Ok(Estimate {
        value: -half_c * est.value.re,
        error: half_c * est.error,
    })
}

/// `Re A` from the time-ordered self correlator, flat weight.
pub fn re_a_oracle<T: Real>(omega_t: T, k: T, sched: &RegulatorSchedule<T>) -> Result<T> {
    let est = re_a_estimate(omega_t, k, sched)?;
    let wrapped = Estimate {
        value: Complex::new(est.value, T::zero()),
        error: est.error,
    };
    Ok(check_converged(wrapped, sched, magnitude_floor(k))?
        .value
        .re)
}

/// `(e^{iaT} − 1)/(ia)`, finite at `a = 0`.
fn time_factor<T: Real>(a: T, t: T) -> Complex<T> {
    let half = a * t / T::lit(2.0);
    let sinc = if half == T::zero() {
        T::one()
    } else {
        half.sin() / half
    };
    phase(half).scale(t * sinc)
}

/// Regulators used by [`kernel_integral_oracle`]. The damped kernels are
/// analytic in `ε` for `|ε| < γ` and carry a factor `e^{−εβ}`, so the ladder
/// starts at `min(0.2γ, 2/β)`.
const KERNEL_EPS0: f64 = 0.2;
const KERNEL_EPS_BETA: f64 = 2.0;
const KERNEL_LEVELS: usize = 8;

fn kernel_level<T: Real>(gamma: T, beta: T, eps: T, minus: bool) -> Estimate<Complex<T>, T> {
    let rate = Complex::new(-eps, gamma);
    let g = |k: T| (rate * k).exp();
    // Past `L` the damping factor is below 1e-16.
    let tail_start = if minus { beta + beta } else { T::zero() };
    let end = tail_start + T::lit(37.0) / eps;
    let period = T::lit(2.0 * std::f64::consts::PI) / gamma;
    let panels = ((end - tail_start) / period).ceil().as_f64() as usize;
    let breaks: Vec<T> = (1..panels)
        .map(|i| tail_start + period * T::from_count(i))
        .collect();
    let mut tol = Tolerance::new(T::lit(1e-15), T::lit(1e-14));
    tol.max_intervals = panels + 4000;
    let shift = if minus { -beta } else { beta };
    let tail = integrate(|k| g(k) / (k + shift), tail_start, end, &breaks, tol);
    if !minus {
        return tail;
    }
    // Principal value over [0, 2β] folded onto [0, β].
    let core = integrate(
        |u| (g(beta + u) - g(beta - u)) / u,
        T::zero(),
        beta,
        &[],
        tol,
    );
    Estimate {
        value: core.value + tail.value,
        error: core.error + tail.error,
    }
}

/// Semi-infinite kernel integrals by damped quadrature.
///
/// Integrates `e^{(iγ−ε)k}/(k ± β)` over `k ≥ 0` (principal value for the
/// `minus` kinds), extrapolates `ε → 0` and takes the real or imaginary part.
pub fn kernel_integral_oracle<T: Real>(
    gamma: T,
    beta: T,
    kind: KernelKind,
) -> Result<Estimate<T, T>> {
    if !(gamma > T::zero() && beta > T::zero() && gamma.is_finite() && beta.is_finite()) {
        return Err(Error::Domain(format!(
            "kernel oracle needs finite gamma > 0 and beta > 0, got gamma = {gamma}, beta = {beta}"
        )));
    }
    let minus = matches!(kind, KernelKind::CosMinus | KernelKind::SinMinus);
    let eps0 = (T::lit(KERNEL_EPS0) * gamma).min(T::lit(KERNEL_EPS_BETA) / beta);
    let eps: Vec<T> = (0..KERNEL_LEVELS)
        .map(|j| eps0 / T::lit(2.0).powi(j as i32))
        .collect();
    let values: Vec<Complex<T>> = eps
        .par_iter()
        .map(|&e| kernel_level(gamma, beta, e, minus).value)
        .collect();
    let est = extrapolate_to_zero(&eps, &values, ExtrapolationBasis::Polynomial)?;
    let value = match kind {
        KernelKind::CosPlus | KernelKind::CosMinus => est.value.re,
        KernelKind::SinPlus | KernelKind::SinMinus => est.value.im,
    };
    Ok(Estimate {
        value,
        error: est.error,
    })
}

/// Two-photon amplitude `|G|²`, flat weight.
///
/// The mode-space double integral factorises once the time integrals are
/// done: one factor is `f₊f₋`, the other is a single oscillatory mode
/// integral, regulated by `e^{−εu}` and extrapolated like the rest.
pub fn two_photon_g_oracle<T: Real>(p: &Point<T>, sched: &RegulatorSchedule<T>) -> Result<T> {
    p.validate()?;
    let t = p.omega_t();
    if t == T::zero() || p.coupling == T::zero() {
        return Ok(T::zero());
    }
    let em = emission_prob_oracle(p, sched)?;
    let c = prefactor(p.coupling);
    let rho = p.rho;
    let tol = quad_tolerance(sched);
    let est = extrapolate_levels(sched, ExtrapolationBasis::PolynomialLog, |eps| {
        let upper = T::lit(40.0) / eps;
        // Panel breaks about once per oscillation of the fastest factor.
        let period = T::lit(2.0) * T::PI() / (t + rho + T::one());
        let n = (upper / period).ceil().to_usize().unwrap_or(1).min(200_000);
        let breaks: Vec<T> = (1..n).map(|i| T::from_count(i) * period).collect();
        let mut tol = tol;
        tol.max_intervals = n + 20_000;
        integrate(
            |u| {
                let w = (-eps * u).exp() * (u * rho).cos();
                (time_factor(u + T::one(), t) * time_factor(u - T::one(), t).conj()).scale(w)
            },
            T::zero(),
            upper,
            &breaks,
            tol,
        )
        .value
    })?;
    let cross = T::lit(4.0) * c * c * est.value.norm_sqr();
    let g2 = em.u_a2 * em.v_b2 + cross;
    let scale = g2.abs().max(magnitude_floor(p.coupling).powi(2));
    let cross_error = T::lit(8.0) * c * c * est.value.norm() * est.error;
    if cross_error > sched.quad_tol * scale * T::lit(1e3) {
        return Err(Error::Convergence {
            residual: cross_error.as_f64(),
            tolerance: (sched.quad_tol * scale).as_f64(),
        });
    }
    Ok(g2)
}

/// Every oracle amplitude at one point with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleAmplitudes<T> {
    pub x: Complex<T>,
    pub x_error: T,
    pub rho14: Complex<T>,
    pub rho14_error: T,
    pub u_a2: T,
    pub v_b2: T,
    pub re_a: T,
    pub re_a_error: T,
}

pub fn oracle_amplitudes<T: Real>(
    p: &Point<T>,
    sched: &RegulatorSchedule<T>,
    spectrum: Spectrum,
) -> Result<OracleAmplitudes<T>> {
    let floor = magnitude_floor(p.coupling);
    let x = check_converged(
        exchange_amplitude_estimate(p, sched, spectrum)?,
        sched,
        floor,
    )?;
    let r = check_converged(rho14_estimate(p, sched, spectrum)?, sched, floor)?;
    let em = emission_prob_oracle(p, sched)?;
    let a = re_a_estimate(p.omega_t(), p.coupling, sched)?;
    Ok(OracleAmplitudes {
        x: x.value,
        x_error: x.error,
        rho14: r.value,
        rho14_error: r.error,
        u_a2: em.u_a2,
        v_b2: em.v_b2,
        re_a: a.value,
        re_a_error: a.error,
    })
}
