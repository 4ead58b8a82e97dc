//! Closed form against oracle, point by point.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};
use std::fmt::Write as _;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::amplitudes::{
    emission_probs, exchange_amplitude_closed, radiative_re_a, vacuum_pair_amplitude, Point,
    Spectrum,
};
use crate::config::BOUNDARY_SNAP;
use crate::oracle::{oracle_amplitudes, RegulatorSchedule};
use crate::{Error, Result};

/// Relative tolerance for `X` and `ρ₁₄`.
pub const REL_TOL: f64 = 1e-6;
/// Absolute floor below which `X` and `ρ₁₄` pass regardless of relative error.
pub const ABS_FLOOR: f64 = 1e-10;
/// Absolute tolerance for `|U_A|²` and `|V_B|²`.
pub const EMISSION_TOL: f64 = 1e-8;
/// Absolute tolerance for `Re A`.
pub const RE_A_TOL: f64 = 1e-6;

/// The closed forms under audit. Production code uses [`ClosedForms`];
/// tests substitute corrupted versions to check that the audit notices.
pub trait ClosedFormProvider: Sync {
    fn exchange(&self, p: &Point<f64>, spectrum: Spectrum) -> Result<Complex<f64>>;
    fn vacuum_pair(&self, p: &Point<f64>, spectrum: Spectrum) -> Result<Complex<f64>>;
    fn emission(&self, omega_t: f64, k: f64) -> Result<(f64, f64)>;
    fn re_a(&self, omega_t: f64, k: f64) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ClosedForms;

impl ClosedFormProvider for ClosedForms {
    fn exchange(&self, p: &Point<f64>, spectrum: Spectrum) -> Result<Complex<f64>> {
        exchange_amplitude_closed(p, spectrum)
    }
    fn vacuum_pair(&self, p: &Point<f64>, spectrum: Spectrum) -> Result<Complex<f64>> {
        vacuum_pair_amplitude(p, spectrum)
    }
    fn emission(&self, omega_t: f64, k: f64) -> Result<(f64, f64)> {
        emission_probs(omega_t, k)
    }
    fn re_a(&self, omega_t: f64, k: f64) -> Result<f64> {
        radiative_re_a(omega_t, k)
    }
}

/// Audit grid: twenty `ξ` values on both sides of the light cone, clear of
/// `[0.98, 1.02]`, for `ρ ∈ {π/6, π/4}` at `K = 0.15`.
pub fn default_grid() -> Vec<Point<f64>> {
    let inside = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95];
    let outside = [1.05, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9, 2.0];
    let mut pts = Vec::with_capacity(40);
    for rho in [FRAC_PI_6, FRAC_PI_4] {
        for &xi in inside.iter().chain(&outside) {
            pts.push(Point {
                xi,
                rho,
                coupling: 0.15,
            });
        }
    }
    pts
}

/// Comparison of one quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Discrepancy {
    pub closed: [f64; 2],
    pub oracle: [f64; 2],
    pub abs_error: f64,
    pub rel_error: f64,
    pub pass: bool,
}

impl Discrepancy {
    fn complex(closed: Complex<f64>, oracle: Complex<f64>, rel_tol: f64, abs_floor: f64) -> Self {
        let abs_error = (closed - oracle).norm();
        let rel_error = if closed.norm() > 0.0 {
            abs_error / closed.norm()
        } else {
            abs_error
        };
        Discrepancy {
            closed: [closed.re, closed.im],
            oracle: [oracle.re, oracle.im],
            abs_error,
            rel_error,
            pass: abs_error <= (rel_tol * closed.norm()).max(abs_floor),
        }
    }

    fn real(closed: f64, oracle: f64, abs_tol: f64) -> Self {
        let mut d = Self::complex(
            Complex::new(closed, 0.0),
            Complex::new(oracle, 0.0),
            0.0,
            abs_tol,
        );
        d.closed = [closed, 0.0];
        d
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditEntry {
    pub xi: f64,
    pub rho: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub x: Option<Discrepancy>,
    pub rho14: Option<Discrepancy>,
    #[serde(rename = "uA2")]
    pub u_a2: Option<Discrepancy>,
    #[serde(rename = "vB2")]
    pub v_b2: Option<Discrepancy>,
    #[serde(rename = "reA")]
    pub re_a: Option<Discrepancy>,
    /// Error raised while evaluating this point, if any.
    pub error: Option<String>,
    pub pass: bool,
}

impl AuditEntry {
    /// Names of the quantities that failed.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.error.is_some() {
            out.push("evaluation");
        }
        for (name, d) in [
            ("X", &self.x),
            ("rho14", &self.rho14),
            ("uA2", &self.u_a2),
            ("vB2", &self.v_b2),
            ("reA", &self.re_a),
        ] {
            if d.map(|d| !d.pass).unwrap_or(false) {
                out.push(name);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub spectrum: Spectrum,
    pub entries: Vec<AuditEntry>,
    pub max_rel_error_x: f64,
    pub max_rel_error_rho14: f64,
    pub max_abs_error_emission: f64,
    pub max_abs_error_re_a: f64,
    pub pass: bool,
}

fn audit_point<C: ClosedFormProvider>(
    p: &Point<f64>,
    sched: Option<&RegulatorSchedule<f64>>,
    spectrum: Spectrum,
    closed: &C,
) -> Result<AuditEntry> {
    let sched = match sched {
        Some(s) => s.clone(),
        None => RegulatorSchedule::for_point(p)?,
    };
    let t = p.omega_t();
    let o = oracle_amplitudes(p, &sched, spectrum)?;
    let x = closed.exchange(p, spectrum)?;
    let r = closed.vacuum_pair(p, spectrum)?;
    let (u, v) = closed.emission(t, p.coupling)?;
    let a = closed.re_a(t, p.coupling)?;
    let x = Discrepancy::complex(x, o.x, REL_TOL, ABS_FLOOR);
    let rho14 = Discrepancy::complex(r, o.rho14, REL_TOL, ABS_FLOOR);
    let u_a2 = Discrepancy::real(u, o.u_a2, EMISSION_TOL);
    let v_b2 = Discrepancy::real(v, o.v_b2, EMISSION_TOL);
    let re_a = Discrepancy::real(a, o.re_a, RE_A_TOL);
    let pass = [x, rho14, u_a2, v_b2, re_a].iter().all(|d| d.pass);
    Ok(AuditEntry {
        xi: p.xi,
        rho: p.rho,
        k: p.coupling,
        x: Some(x),
        rho14: Some(rho14),
        u_a2: Some(u_a2),
        v_b2: Some(v_b2),
        re_a: Some(re_a),
        error: None,
        pass,
    })
}

/// Compares closed forms with the oracle at every point.
///
/// Points on the light cone are rejected up front. Oracle failures at a
/// point are recorded in that point's entry and fail the audit.
pub fn oracle_check_with<C: ClosedFormProvider>(
    points: &[Point<f64>],
    sched: Option<&RegulatorSchedule<f64>>,
    spectrum: Spectrum,
    closed: &C,
) -> Result<AuditReport> {
    if points.is_empty() {
        return Err(Error::Input("no audit points".into()));
    }
    for p in points {
        p.validate()?;
        if (p.xi - 1.0).abs() <= BOUNDARY_SNAP {
            return Err(Error::Input(format!(
                "audit point xi = {} lies on the light cone",
                p.xi
            )));
        }
    }
    let entries: Vec<AuditEntry> = points
        .par_iter()
        .map(|p| {
            audit_point(p, sched, spectrum, closed).unwrap_or_else(|e| AuditEntry {
                xi: p.xi,
                rho: p.rho,
                k: p.coupling,
                x: None,
                rho14: None,
                u_a2: None,
                v_b2: None,
                re_a: None,
                error: Some(e.to_string()),
                pass: false,
            })
        })
        .collect();
    let max_of = |f: &dyn Fn(&AuditEntry) -> Option<f64>| {
        entries.iter().filter_map(f).fold(0.0_f64, f64::max)
    };
    Ok(AuditReport {
        spectrum,
        max_rel_error_x: max_of(&|e| e.x.map(|d| d.rel_error)),
        max_rel_error_rho14: max_of(&|e| e.rho14.map(|d| d.rel_error)),
        max_abs_error_emission: max_of(&|e| Some(e.u_a2?.abs_error.max(e.v_b2?.abs_error))),
        max_abs_error_re_a: max_of(&|e| e.re_a.map(|d| d.abs_error)),
        pass: entries.iter().all(|e| e.pass),
        entries,
    })
}

pub fn oracle_check(
    points: &[Point<f64>],
    sched: Option<&RegulatorSchedule<f64>>,
    spectrum: Spectrum,
) -> Result<AuditReport> {
    oracle_check_with(points, sched, spectrum, &ClosedForms)
}

impl AuditReport {
    /// Human-readable summary, one line per point.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "oracle check ({:?} spectrum): {} points, tolerances X/rho14 rel {REL_TOL:e} (abs floor {ABS_FLOOR:e}), uA2/vB2 abs {EMISSION_TOL:e}, reA abs {RE_A_TOL:e}",
            self.spectrum,
            self.entries.len()
        );
        for e in &self.entries {
            let status = if e.pass { "ok  " } else { "FAIL" };
            match &e.error {
                Some(msg) => {
                    let _ = writeln!(
                        s,
                        "{status} xi={:<6} rho={:.6} K={}: {msg}",
                        e.xi, e.rho, e.k
                    );
                }
                None => {
                    let rel = |d: &Option<Discrepancy>| d.map_or(f64::NAN, |d| d.rel_error);
                    let abs = |d: &Option<Discrepancy>| d.map_or(f64::NAN, |d| d.abs_error);
                    let _ = write!(
                        s,
                        "{status} xi={:<6} rho={:.6} K={}  X rel {:.2e}  rho14 rel {:.2e} (abs {:.2e})  uA2 {:.2e}  vB2 {:.2e}  reA {:.2e}",
                        e.xi,
                        e.rho,
                        e.k,
                        rel(&e.x),
                        rel(&e.rho14),
                        abs(&e.rho14),
                        abs(&e.u_a2),
                        abs(&e.v_b2),
                        abs(&e.re_a)
                    );
                    if !e.pass {
                        let _ = write!(s, "  failed: {}", e.failures().join(", "));
                    }
                    s.push('\n');
                }
            }
        }
        let _ = writeln!(
            s,
            "max X rel {:.3e}, max rho14 rel {:.3e}, max emission abs {:.3e}, max reA abs {:.3e}",
            self.max_rel_error_x,
            self.max_rel_error_rho14,
            self.max_abs_error_emission,
            self.max_abs_error_re_a
        );
        let failed = self.entries.iter().filter(|e| !e.pass).count();
        let _ = writeln!(
            s,
            "{}",
            if self.pass {
                "PASS".to_string()
            } else {
                format!("FAIL ({failed} of {} points)", self.entries.len())
            }
        );
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("audit report serializes")
    }
}
