//! Two-qubit reduced state, concurrence and perturbative validity.
//!
//! Basis order is `|ee⟩, |eg⟩, |ge⟩, |gg⟩`. The state after the interaction
//! is an X state: populations on the diagonal plus the `(1,4)` and `(2,3)`
//! coherences. Entries are stored unnormalized together with their trace `c`.

use num_complex::Complex;
use serde::Serialize;

use crate::amplitudes::AmplitudeSet;
use crate::{Error, Real, Result};

/// Default smallness threshold for [`validity`].
pub const DEFAULT_VALIDITY_THRESHOLD: f64 = 0.1;

/// Unnormalized X-shaped two-qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XStateDensityMatrix<T> {
    pub rho11: T,
    pub rho22: T,
    pub rho33: T,
    pub rho44: T,
    pub rho14: Complex<T>,
    pub rho23: Complex<T>,
    /// Trace of the unnormalized matrix.
    pub c: T,
}

impl<T: Real> XStateDensityMatrix<T> {
    /// Builds a matrix from its entries; `c` is set to the trace.
    pub fn from_entries(
        rho11: T,
        rho22: T,
        rho33: T,
        rho44: T,
        rho14: Complex<T>,
        rho23: Complex<T>,
    ) -> Self {
        XStateDensityMatrix {
            rho11,
            rho22,
            rho33,
            rho44,
            rho14,
            rho23,
            c: rho11 + rho22 + rho33 + rho44,
        }
    }

    /// Diagonal of the normalized matrix.
    pub fn normalized_diagonal(&self) -> [T; 4] {
        [self.rho11, self.rho22, self.rho33, self.rho44].map(|d| d / self.c)
    }

    /// Trace of the normalized matrix. Summed in the same order as `c`, so it
    /// is exactly 1 for any matrix built by [`from_entries`](Self::from_entries).
    pub fn normalized_trace(&self) -> T {
        (self.rho11 + self.rho22 + self.rho33 + self.rho44) / self.c
    }

    /// Full normalized 4×4 matrix, row-major.
    pub fn to_matrix(&self) -> [[Complex<T>; 4]; 4] {
        let z = Complex::new(T::zero(), T::zero());
        let re = |x: T| Complex::new(x / self.c, T::zero());
        let rho14 = self.rho14.unscale(self.c);
        let rho23 = self.rho23.unscale(self.c);
        [
            [re(self.rho11), z, z, rho14],
            [z, re(self.rho22), rho23, z],
            [z, rho23.conj(), re(self.rho33), z],
            [rho14.conj(), z, z, re(self.rho44)],
        ]
    }
}

/// Reduced state after the interaction.
///
/// `g2` is an optional `|G|²` added to `ρ₃₃`; `None` leaves it out.
pub fn build_state<T: Real>(
    amps: &AmplitudeSet<T>,
    g2: Option<T>,
) -> Result<XStateDensityMatrix<T>> {
    let g2 = g2.unwrap_or_else(T::zero);
    if !(g2 >= T::zero()) {
        return Err(Error::Input(format!("|G|^2 must be >= 0, got {g2}")));
    }
    let rho22 = T::one() + T::lit(2.0) * amps.re_a;
    if !(rho22 > T::zero()) {
        return Err(Error::Validity(rho22.as_f64()));
    }
    Ok(XStateDensityMatrix::from_entries(
        amps.v_b2,
        rho22,
        amps.x.norm_sqr() + g2,
        amps.u_a2,
        amps.rho14,
        amps.x.conj(),
    ))
}

/// Which term of the X-state concurrence formula attains the maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Rho23,
    Rho14,
    None,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Rho23 => "rho23",
            Branch::Rho14 => "rho14",
            Branch::None => "none",
        }
    }
}

/// Concurrence `(2/c)·max{|ρ₂₃| − √(ρ₁₁ρ₄₄), |ρ₁₄| − √(ρ₂₂ρ₃₃), 0}` and the
/// branch that attains it.
///
/// The result is capped at 1; larger raw values only occur for couplings
/// where the second-order state is no longer a density matrix.
pub fn concurrence_with_branch<T: Real>(m: &XStateDensityMatrix<T>) -> (T, Branch) {
    let a = m.rho23.norm() - (m.rho11 * m.rho44).sqrt();
    let b = m.rho14.norm() - (m.rho22 * m.rho33).sqrt();
    let (best, branch) = if a >= b {
        (a, Branch::Rho23)
    } else {
        (b, Branch::Rho14)
    };
    if !(best > T::zero()) {
        return (T::zero(), Branch::None);
    }
    ((T::lit(2.0) * best / m.c).min(T::one()), branch)
}

pub fn concurrence<T: Real>(m: &XStateDensityMatrix<T>) -> T {
    concurrence_with_branch(m).0
}

/// Probability that qubit B is excited, `ρ₁₁/c`.
pub fn excitation_probability<T: Real>(m: &XStateDensityMatrix<T>) -> T {
    m.rho11 / m.c
}

/// Leading-order excitation probability of qubit B, `ρ₁₁ = |V_B|²`.
///
/// Differs from [`excitation_probability`] at fourth order in the coupling
/// and depends on `Ωt` and `K` only.
pub fn excitation_probability_leading<T: Real>(m: &XStateDensityMatrix<T>) -> T {
    m.rho11
}

/// Smallness measures and rough bounds on the neglected higher orders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidityReport<T> {
    pub abs_x: T,
    /// `|A|`, approximated by `|Re A|` since `Im A` is not computed.
    pub abs_a: T,
    pub u_a2: T,
    pub v_b2: T,
    /// `2|X|³`, bound on the third-order exchange corrections.
    pub bound_x_correction: T,
    /// `2|A||U_A|²|V_B|²`
    pub bound_a1: T,
    /// `2|X||U_A|²|V_B|²`
    pub bound_a2: T,
    /// All four amplitudes below `threshold`.
    pub amplitudes_small: bool,
    /// All three bounds at most `threshold·|X|`, the size of `ρ₂₃`.
    pub bounds_small: bool,
    pub ok: bool,
    pub threshold: T,
}

pub fn validity<T: Real>(amps: &AmplitudeSet<T>, threshold: T) -> Result<ValidityReport<T>> {
    if !(threshold > T::zero() && threshold < T::one()) {
        return Err(Error::Input(format!(
            "validity threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let two = T::lit(2.0);
    let abs_x = amps.x.norm();
    let abs_a = amps.re_a.abs();
    let emission = amps.u_a2 * amps.v_b2;
    let bound_x_correction = two * abs_x.powi(3);
    let bound_a1 = two * abs_a * emission;
    let bound_a2 = two * abs_x * emission;
    let amplitudes_small = abs_x.max(abs_a).max(amps.u_a2).max(amps.v_b2) < threshold;
    let scale = threshold * abs_x;
    let bounds_small = bound_x_correction <= scale && bound_a1 <= scale && bound_a2 <= scale;
    Ok(ValidityReport {
        abs_x,
        abs_a,
        u_a2: amps.u_a2,
        v_b2: amps.v_b2,
        bound_x_correction,
        bound_a1,
        bound_a2,
        amplitudes_small,
        bounds_small,
        ok: amplitudes_small && bounds_small,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitudes::{amplitude_set, Point};
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn initial_state_is_pure_eg() {
        let m = build_state(&AmplitudeSet::<f64>::zero(), None).unwrap();
        assert_eq!(m.normalized_diagonal(), [0.0, 1.0, 0.0, 0.0]);
        assert_eq!(m.c, 1.0);
        assert_eq!(concurrence(&m), 0.0);
        assert_eq!(excitation_probability(&m), 0.0);
    }

    #[test]
    fn bell_states_have_unit_concurrence() {
        let m = XStateDensityMatrix::from_entries(0.0, 0.5, 0.5, 0.0, c(0.0, 0.0), c(0.5, 0.0));
        assert_eq!(concurrence_with_branch(&m), (1.0, Branch::Rho23));
        let m = XStateDensityMatrix::from_entries(0.5, 0.0, 0.0, 0.5, c(0.5, 0.0), c(0.0, 0.0));
        assert_eq!(concurrence_with_branch(&m), (1.0, Branch::Rho14));
    }

    #[test]
    fn diagonal_states_are_separable() {
        let m = XStateDensityMatrix::from_entries(0.1, 0.4, 0.3, 0.2, c(0.0, 0.0), c(0.0, 0.0));
        assert_eq!(concurrence_with_branch(&m), (0.0, Branch::None));
    }

    #[test]
    fn strong_radiative_loss_is_rejected() {
        let mut a = AmplitudeSet::<f64>::zero();
        a.re_a = -0.5;
        assert_eq!(build_state(&a, None), Err(Error::Validity(0.0)));
        assert!(build_state(&AmplitudeSet::<f64>::zero(), Some(-1.0)).is_err());
    }

    #[test]
    fn entries_follow_amplitudes() {
        let p = Point::new(1.5, FRAC_PI_4, 0.15).unwrap();
        let a = amplitude_set(&p).unwrap();
        let m = build_state(&a, Some(0.01)).unwrap();
        assert_eq!(m.rho11, a.v_b2);
        assert_eq!(m.rho22, 1.0 + 2.0 * a.re_a);
        assert_eq!(m.rho33, a.x.norm_sqr() + 0.01);
        assert_eq!(m.rho44, a.u_a2);
        assert_eq!(m.rho14, a.rho14);
        assert_eq!(m.rho23, a.x.conj());
        assert_eq!(m.c, m.rho11 + m.rho22 + m.rho33 + m.rho44);
        assert_eq!(m.normalized_trace(), 1.0);
        let full = m.to_matrix();
        for (i, row) in full.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(*v, full[j][i].conj());
            }
        }
    }

    #[test]
    fn leading_order_excitation_ignores_separation() {
        let t = 1.3;
        let a = amplitude_set(&Point::new(t / FRAC_PI_6, FRAC_PI_6, 0.15).unwrap()).unwrap();
        let b = amplitude_set(&Point::new(t / FRAC_PI_4, FRAC_PI_4, 0.15).unwrap()).unwrap();
        let ma = build_state(&a, None).unwrap();
        let mb = build_state(&b, None).unwrap();
        if FRAC_PI_6 * (t / FRAC_PI_6) == FRAC_PI_4 * (t / FRAC_PI_4) {
            assert_eq!(
                excitation_probability_leading(&ma),
                excitation_probability_leading(&mb)
            );
            assert_eq!(ma.rho22, mb.rho22);
            assert_eq!(ma.rho44, mb.rho44);
        }
    }

    #[test]
    fn validity_gate() {
        let r = validity(&AmplitudeSet::<f64>::zero(), 0.1).unwrap();
        assert!(r.ok);
        assert_eq!(
            (r.bound_x_correction, r.bound_a1, r.bound_a2),
            (0.0, 0.0, 0.0)
        );

        let strong = amplitude_set(&Point::new(1.5, FRAC_PI_4, 10.0).unwrap()).unwrap();
        assert!(!validity(&strong, 0.1).unwrap().ok);

        let weak = amplitude_set(&Point::new(1.5, FRAC_PI_4, 1.5e-4).unwrap()).unwrap();
        let r = validity(&weak, 0.1).unwrap();
        assert!(r.amplitudes_small);

        // The real emission probability grows like πKΩt/2 and leaves the
        // small-amplitude regime at K = 0.15 by Ωt ≈ 1.2.
        let p = Point::new(1.5, FRAC_PI_4, 0.15).unwrap();
        let r = validity(&amplitude_set(&p).unwrap(), 0.1).unwrap();
        assert!(r.u_a2 > 0.1 && !r.amplitudes_small && !r.ok);

        assert!(validity(&AmplitudeSet::<f64>::zero(), 0.0).is_err());
        assert!(validity(&AmplitudeSet::<f64>::zero(), 1.0).is_err());
    }
}
