//! Parameter sweeps, output writers and light-cone feature detection.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::amplitudes::{
    amplitude_set_with, emission_probs, AmplitudeSet, Point, Spectrum, BOUNDARY_DELTA,
};
use crate::config::{GridAxis, SweepConfig, BOUNDARY_SNAP};
use crate::oracle::{two_photon_g_oracle, RegulatorSchedule};
use crate::state::{
    build_state, concurrence_with_branch, excitation_probability_leading, validity, Branch,
    ValidityReport, XStateDensityMatrix,
};
use crate::{Error, Real, Result};

/// CSV header of sweep output.
pub const CSV_HEADER: &str =
    "xi,rho,K,omega_t,re_X,im_X,uA2,vB2,abs_rho14,reA,concurrence,p_B,branch,region,validity_ok";

/// Region label of a sweep record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RecordRegion {
    #[serde(rename = "I")]
    I,
    #[serde(rename = "boundary-")]
    BoundaryMinus,
    #[serde(rename = "boundary+")]
    BoundaryPlus,
    #[serde(rename = "II")]
    II,
}

impl RecordRegion {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordRegion::I => "I",
            RecordRegion::BoundaryMinus => "boundary-",
            RecordRegion::BoundaryPlus => "boundary+",
            RecordRegion::II => "II",
        }
    }
}

/// One output row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRecord<T> {
    pub xi: T,
    pub rho: T,
    #[serde(rename = "K")]
    pub k: T,
    pub omega_t: T,
    #[serde(rename = "re_X")]
    pub re_x: T,
    #[serde(rename = "im_X")]
    pub im_x: T,
    #[serde(rename = "uA2")]
    pub u_a2: T,
    #[serde(rename = "vB2")]
    pub v_b2: T,
    pub abs_rho14: T,
    #[serde(rename = "reA")]
    pub re_a: T,
    pub concurrence: T,
    /// Leading-order excitation probability of qubit B.
    #[serde(rename = "p_B")]
    pub p_b: T,
    pub branch: Branch,
    pub region: RecordRegion,
    pub validity_ok: bool,
}

/// Options shared by every point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub spectrum: Spectrum,
    pub include_g2: bool,
    pub validity_threshold: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            spectrum: Spectrum::Flat,
            include_g2: false,
            validity_threshold: crate::state::DEFAULT_VALIDITY_THRESHOLD,
        }
    }
}

/// Everything computed at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation<T> {
    pub record: SweepRecord<T>,
    pub amplitudes: AmplitudeSet<T>,
    /// `None` when the second-order state is invalid (`ρ₂₂ ≤ 0`).
    pub state: Option<XStateDensityMatrix<T>>,
    pub validity: ValidityReport<T>,
    pub g2: Option<T>,
    /// Why the record is flagged, if it is.
    pub failure: Option<String>,
}

/// One grid point after boundary splitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub xi: f64,
    pub rho: f64,
    pub k: f64,
    /// `Ωt` exactly as requested on a time grid.
    pub omega_t: Option<f64>,
    pub region: RecordRegion,
}

/// Expands a requested `ξ` into one or two grid points.
pub fn split_xi(xi: f64, rho: f64, k: f64, omega_t: Option<f64>) -> Vec<GridPoint> {
    if (xi - 1.0).abs() <= BOUNDARY_SNAP {
        return vec![
            GridPoint {
                xi: 1.0 - BOUNDARY_DELTA,
                rho,
                k,
                omega_t: None,
                region: RecordRegion::BoundaryMinus,
            },
            GridPoint {
                xi: 1.0 + BOUNDARY_DELTA,
                rho,
                k,
                omega_t: None,
                region: RecordRegion::BoundaryPlus,
            },
        ];
    }
    let region = if xi < 1.0 {
        RecordRegion::I
    } else {
        RecordRegion::II
    };
    vec![GridPoint {
        xi,
        rho,
        k,
        omega_t,
        region,
    }]
}

/// Grid points of a sweep in output order: `ρ` outer, `K` middle, grid inner.
pub fn sweep_points(cfg: &SweepConfig) -> Vec<GridPoint> {
    let mut out = Vec::new();
    for &rho in &cfg.rho_values {
        for &k in &cfg.k_values {
            for &g in &cfg.grid {
                match cfg.axis {
                    GridAxis::Xi => out.extend(split_xi(g, rho, k, None)),
                    GridAxis::OmegaT => out.extend(split_xi(g / rho, rho, k, Some(g))),
                }
            }
        }
    }
    out
}

/// Evaluates every observable at one grid point.
pub fn evaluate<T: Real>(gp: &GridPoint, opts: &EvalOptions) -> Result<Evaluation<T>> {
    let p = Point::new(T::lit(gp.xi), T::lit(gp.rho), T::lit(gp.k))?;
    let mut amps = amplitude_set_with(&p, opts.spectrum)?;
    let mut omega_t = p.omega_t();
    if let Some(t) = gp.omega_t {
        // Keep the requested time exactly so that qubit-local quantities are
        // bitwise identical across separations.
        omega_t = T::lit(t);
        let (u, v) = emission_probs(omega_t, p.coupling)?;
        amps.u_a2 = u;
        amps.v_b2 = v;
        amps.re_a = -(u + v) / T::lit(2.0);
    }
    let g2 = if opts.include_g2 {
        let sched = RegulatorSchedule::for_point(&p)?;
        Some(two_photon_g_oracle(&p, &sched)?)
    } else {
        None
    };
    let report = validity(&amps, T::lit(opts.validity_threshold))?;
    let (state, failure) = match build_state(&amps, g2) {
        Ok(m) => (Some(m), None),
        Err(e @ Error::Validity(_)) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let (concurrence, branch) = match &state {
        Some(m) => concurrence_with_branch(m),
        None => (T::nan(), Branch::None),
    };
    let p_b = state
        .as_ref()
        .map_or_else(T::nan, excitation_probability_leading);
    let record = SweepRecord {
        xi: p.xi,
        rho: p.rho,
        k: p.coupling,
        omega_t,
        re_x: amps.x.re,
        im_x: amps.x.im,
        u_a2: amps.u_a2,
        v_b2: amps.v_b2,
        abs_rho14: amps.rho14.norm(),
        re_a: amps.re_a,
        concurrence,
        p_b,
        branch,
        region: gp.region,
        validity_ok: report.ok && state.is_some(),
    };
    Ok(Evaluation {
        record,
        amplitudes: amps,
        state,
        validity: report,
        g2,
        failure,
    })
}

pub fn eval_options(cfg: &SweepConfig) -> EvalOptions {
    EvalOptions {
        spectrum: cfg.spectrum,
        include_g2: cfg.include_g2,
        validity_threshold: cfg.validity_threshold,
    }
}

/// Evaluates every grid point of `cfg` in parallel; output order is fixed.
pub fn run_sweep_detailed<T: Real>(cfg: &SweepConfig) -> Result<Vec<Evaluation<T>>> {
    let opts = eval_options(cfg);
    sweep_points(cfg)
        .par_iter()
        .map(|gp| evaluate(gp, &opts))
        .collect()
}

pub fn run_sweep<T: Real>(cfg: &SweepConfig) -> Result<Vec<SweepRecord<T>>> {
    Ok(run_sweep_detailed(cfg)?
        .into_iter()
        .map(|e| e.record)
        .collect())
}

/// Formats `x` with 12 significant digits, `%g` style.
pub fn format_sig12(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv<T: Real, W: Write>(out: &mut W, records: &[SweepRecord<T>]) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        let nums = [
            r.xi,
            r.rho,
            r.k,
            r.omega_t,
            r.re_x,
            r.im_x,
            r.u_a2,
            r.v_b2,
            r.abs_rho14,
            r.re_a,
            r.concurrence,
            r.p_b,
        ]
        .map(|v| format_sig12(v.as_f64()));
        writeln!(
            out,
            "{},{},{},{}",
            nums.join(","),
            r.branch.as_str(),
            r.region.as_str(),
            r.validity_ok
        )?;
    }
    Ok(())
}

pub fn write_json<T: Real + Serialize, W: Write>(
    out: &mut W,
    records: &[SweepRecord<T>],
) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, records).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

/// `K = 2(g/Ω)²` from `g/2π` and `Ω/2π` in Hz.
pub fn units_to_k(g_hz: f64, omega_hz: f64) -> Result<f64> {
    if !g_hz.is_finite() || !omega_hz.is_finite() {
        return Err(Error::Input("frequencies must be finite".into()));
    }
    if g_hz < 0.0 || omega_hz <= 0.0 {
        return Err(Error::Input(format!(
            "need g >= 0 and omega > 0, got g = {g_hz} Hz, omega = {omega_hz} Hz"
        )));
    }
    let r = g_hz / omega_hz;
    Ok(2.0 * r * r)
}

/// How a sequence of values evolves along the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Constant,
    NonDecreasing,
    NonIncreasing,
    Mixed,
    /// Fewer than two values.
    Undetermined,
}

pub fn trend<T: Real>(values: &[T]) -> Trend {
    if values.len() < 2 {
        return Trend::Undetermined;
    }
    let up = values.windows(2).any(|w| w[1] > w[0]);
    let down = values.windows(2).any(|w| w[1] < w[0]);
    match (up, down) {
        (false, false) => Trend::Constant,
        (true, false) => Trend::NonDecreasing,
        (false, true) => Trend::NonIncreasing,
        (true, true) => Trend::Mixed,
    }
}

/// Concurrence and `|X|` on both sides of the light cone for one `(ρ, K)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LightconeReport<T> {
    pub rho: T,
    #[serde(rename = "K")]
    pub k: T,
    pub concurrence_below: T,
    pub concurrence_above: T,
    /// `C(1⁺) − C(1⁻)`
    pub concurrence_jump: T,
    pub abs_x_below: T,
    pub abs_x_above: T,
    /// `|X|(1⁺) − |X|(1⁻)`
    pub abs_x_jump: T,
    /// Concurrence trend over the `ξ < 1` records.
    pub trend_below: Trend,
    /// Concurrence trend over the `ξ > 1` records.
    pub trend_above: Trend,
}

pub fn detect_lightcone_feature<T: Real>(
    records: &[SweepRecord<T>],
    rho: T,
    k: T,
) -> Result<LightconeReport<T>> {
    let own: Vec<&SweepRecord<T>> = records
        .iter()
        .filter(|r| r.rho == rho && r.k == k)
        .collect();
    let find = |region| own.iter().find(|r| r.region == region).copied();
    let (below, above) = match (
        find(RecordRegion::BoundaryMinus),
        find(RecordRegion::BoundaryPlus),
    ) {
        (Some(b), Some(a)) => (b, a),
        _ => {
            return Err(Error::Input(format!(
                "no boundary-/boundary+ record pair for rho = {rho}, K = {k}"
            )))
        }
    };
    let abs_x = |r: &SweepRecord<T>| r.re_x.hypot(r.im_x);
    let side = |region| -> Vec<T> {
        own.iter()
            .filter(|r| r.region == region)
            .map(|r| r.concurrence)
            .collect()
    };
    Ok(LightconeReport {
        rho,
        k,
        concurrence_below: below.concurrence,
        concurrence_above: above.concurrence,
        concurrence_jump: above.concurrence - below.concurrence,
        abs_x_below: abs_x(below),
        abs_x_above: abs_x(above),
        abs_x_jump: abs_x(above) - abs_x(below),
        trend_below: trend(&side(RecordRegion::I)),
        trend_above: trend(&side(RecordRegion::II)),
    })
}

/// `ξ` sweep over `[0.05, 2]` for one `(ρ, K)`, used by the light-cone report.
pub fn lightcone_config(rho: f64, k: f64, spectrum: Spectrum) -> SweepConfig {
    SweepConfig {
        rho_values: vec![rho],
        k_values: vec![k],
        spectrum,
        ..SweepConfig::fig2()
    }
}
