//! Sweep configuration files.
//!
//! Configs are TOML. Unknown keys are rejected. Numeric fields accept plain
//! numbers or short expressions such as `"pi/4"`, `"10*K0"` or `"1.5e-4"`.
//!
//! ```toml
//! rho_values = ["pi/4"]
//! K_values = ["K0", "10*K0", 0.015, 0.15]
//! xi_grid = { min = 0.05, max = 2.0, step = 0.005 }
//! include_g2 = false
//! validity_threshold = 0.1
//! output_path = "fig2.csv"
//! format = "csv"
//! spectrum = "flat"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::amplitudes::Spectrum;
use crate::state::DEFAULT_VALIDITY_THRESHOLD;
use crate::{Error, Result};

/// Reference coupling used by the presets and accepted as `K0` in configs.
pub const K0: f64 = 1.5e-4;

/// Grid points closer than this to the light cone are split in two.
pub const BOUNDARY_SNAP: f64 = 1e-9;

/// Evaluates a numeric expression: a product/quotient of numbers and the
/// symbols `pi` and `K0`, e.g. `pi/4`, `2*pi/3`, `1000*K0`.
pub fn parse_value(text: &str) -> Result<f64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Config("empty numeric expression".into()));
    }
    let mut value = 1.0;
    let mut op = '*';
    let mut rest = s.as_str();
    loop {
        let end = rest.find(['*', '/']).unwrap_or(rest.len());
        let factor = match &rest[..end] {
            "pi" | "PI" | "π" => std::f64::consts::PI,
            "K0" => K0,
            num => num
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("cannot parse `{text}` as a number")))?,
        };
        value = if op == '*' {
            value * factor
        } else {
            value / factor
        };
        if end == rest.len() {
            break;
        }
        op = rest[end..].chars().next().unwrap_or('*');
        rest = &rest[end + 1..];
    }
    if !value.is_finite() {
        return Err(Error::Config(format!("`{text}` is not finite")));
    }
    Ok(value)
}

/// A number written either literally or as an expression string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Expr(String),
}

impl Scalar {
    pub fn value(&self) -> Result<f64> {
        match self {
            Scalar::Number(x) => Ok(*x),
            Scalar::Expr(s) => parse_value(s),
        }
    }
}

impl From<f64> for Scalar {
    fn from(x: f64) -> Self {
        Scalar::Number(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub min: Scalar,
    pub max: Scalar,
    pub step: Scalar,
}

/// Either an inclusive `{min, max, step}` range or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    // Listed first: a struct would also accept a three-element array.
    List(Vec<Scalar>),
    Range(RangeSpec),
}

impl GridSpec {
    /// Grid values; ranges are generated as `min + i·step`.
    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match self {
            GridSpec::Range(r) => {
                let (min, max, step) = (r.min.value()?, r.max.value()?, r.step.value()?);
                if !(step > 0.0) {
                    return Err(Error::Config(format!("grid step must be > 0, got {step}")));
                }
                if max < min {
                    return Err(Error::Config(format!("grid max {max} is below min {min}")));
                }
                let n = ((max - min) / step + 1e-9).floor() as usize;
                (0..=n).map(|i| min + i as f64 * step).collect()
            }
            GridSpec::List(items) => items
                .iter()
                .map(Scalar::value)
                .collect::<Result<Vec<_>>>()?,
        };
        if v.is_empty() {
            return Err(Error::Config("grid is empty".into()));
        }
        if v.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config(
                "grid values must be strictly increasing".into(),
            ));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Sweep configuration as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfigFile {
    pub rho_values: Vec<Scalar>,
    #[serde(rename = "K_values")]
    pub k_values: Vec<Scalar>,
    #[serde(default)]
    pub xi_grid: Option<GridSpec>,
    #[serde(default)]
    pub time_grid: Option<GridSpec>,
    #[serde(default)]
    pub include_g2: bool,
    #[serde(default)]
    pub validity_threshold: Option<Scalar>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub spectrum: Spectrum,
}

/// Which coordinate the inner grid runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridAxis {
    /// Dimensionless time `ξ`.
    Xi,
    /// `Ωt`; `ξ = Ωt/ρ` per record.
    OmegaT,
}

/// Validated sweep configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub rho_values: Vec<f64>,
    pub k_values: Vec<f64>,
    pub axis: GridAxis,
    pub grid: Vec<f64>,
    pub include_g2: bool,
    pub validity_threshold: f64,
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
    pub spectrum: Spectrum,
}

fn positive_list(name: &str, items: &[Scalar]) -> Result<Vec<f64>> {
    if items.is_empty() {
        return Err(Error::Config(format!("{name} must not be empty")));
    }
    let v = items
        .iter()
        .map(Scalar::value)
        .collect::<Result<Vec<_>>>()?;
    if let Some(bad) = v.iter().find(|x| !(**x > 0.0)) {
        return Err(Error::Config(format!(
            "{name} entries must be > 0, got {bad}"
        )));
    }
    Ok(v)
}

impl SweepConfigFile {
    pub fn validate(&self) -> Result<SweepConfig> {
        let rho_values = positive_list("rho_values", &self.rho_values)?;
        let k_values = positive_list("K_values", &self.k_values)?;
        let (axis, grid) = match (&self.xi_grid, &self.time_grid) {
            (Some(g), None) => (GridAxis::Xi, g.values()?),
            (None, Some(g)) => (GridAxis::OmegaT, g.values()?),
            _ => {
                return Err(Error::Config(
                    "exactly one of xi_grid and time_grid must be given".into(),
                ))
            }
        };
        if grid[0] < 0.0 {
            return Err(Error::Config(format!(
                "grid values must be >= 0, got {}",
                grid[0]
            )));
        }
        let validity_threshold = match &self.validity_threshold {
            Some(s) => s.value()?,
            None => DEFAULT_VALIDITY_THRESHOLD,
        };
        if !(validity_threshold > 0.0 && validity_threshold < 1.0) {
            return Err(Error::Config(format!(
                "validity_threshold must lie in (0, 1), got {validity_threshold}"
            )));
        }
        Ok(SweepConfig {
            rho_values,
            k_values,
            axis,
            grid,
            include_g2: self.include_g2,
            validity_threshold,
            output_path: self.output_path.clone(),
            format: self.format,
            spectrum: self.spectrum,
        })
    }
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: SweepConfigFile =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        file.validate()
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Concurrence against `ξ` near the light cone for four couplings
    /// spanning three decades.
    pub fn fig2() -> Self {
        SweepConfig {
            rho_values: vec![std::f64::consts::FRAC_PI_4],
            k_values: [1.0, 10.0, 100.0, 1000.0].iter().map(|m| m * K0).collect(),
            axis: GridAxis::Xi,
            grid: GridSpec::Range(RangeSpec {
                min: 0.05.into(),
                max: 2.0.into(),
                step: 0.005.into(),
            })
            .values()
            .expect("preset grid is valid"),
            include_g2: false,
            validity_threshold: DEFAULT_VALIDITY_THRESHOLD,
            output_path: None,
            format: OutputFormat::Csv,
            spectrum: Spectrum::Flat,
        }
    }

    /// Concurrence and excitation probability against `Ωt` for two
    /// separations at the strongest coupling.
    pub fn fig3() -> Self {
        SweepConfig {
            rho_values: vec![std::f64::consts::FRAC_PI_6, std::f64::consts::FRAC_PI_4],
            k_values: vec![1000.0 * K0],
            axis: GridAxis::OmegaT,
            grid: GridSpec::Range(RangeSpec {
                min: 0.0.into(),
                max: 2.0.into(),
                step: 0.002.into(),
            })
            .values()
            .expect("preset grid is valid"),
            include_g2: false,
            validity_threshold: DEFAULT_VALIDITY_THRESHOLD,
            output_path: None,
            format: OutputFormat::Csv,
            spectrum: Spectrum::Flat,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "fig2" => Ok(Self::fig2()),
            "fig3" => Ok(Self::fig3()),
            other => Err(Error::Config(format!(
                "unknown preset `{other}` (expected fig2|fig3)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn expressions() {
        assert_eq!(parse_value("pi/4").unwrap(), FRAC_PI_4);
        assert_eq!(parse_value("2*pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_value("1000*K0").unwrap(), 1000.0 * K0);
        assert_eq!(parse_value(" 1.5e-4 ").unwrap(), 1.5e-4);
        assert!(parse_value("pie").is_err());
        assert!(parse_value("").is_err());
        assert!(parse_value("1/0").is_err());
    }

    #[test]
    fn parses_full_config() {
        let cfg = SweepConfig::from_toml_str(
            r#"
            rho_values = ["pi/4", 0.5]
            K_values = ["K0", 0.15]
            xi_grid = { min = 0, max = 1, step = 0.25 }
            include_g2 = true
            validity_threshold = 0.2
            output_path = "out.json"
            format = "json"
            spectrum = "ohmic"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.rho_values, vec![FRAC_PI_4, 0.5]);
        assert_eq!(cfg.k_values, vec![K0, 0.15]);
        assert_eq!(cfg.grid, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(cfg.axis, GridAxis::Xi);
        assert!(cfg.include_g2);
        assert_eq!(cfg.format, OutputFormat::Json);
        assert_eq!(cfg.spectrum, Spectrum::Ohmic);
    }

    #[test]
    fn explicit_time_list() {
        let cfg = SweepConfig::from_toml_str(
            r#"
            rho_values = [1.0]
            K_values = [0.1]
            time_grid = [0.5, 1, 2]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.axis, GridAxis::OmegaT);
        assert_eq!(cfg.grid, vec![0.5, 1.0, 2.0]);
        assert_eq!(cfg.validity_threshold, DEFAULT_VALIDITY_THRESHOLD);
        assert_eq!(cfg.format, OutputFormat::Csv);
    }

    #[test]
    fn rejects_bad_configs() {
        let base = "rho_values = [1.0]\nxi_grid = [0.5]\n";
        let bad = [
            format!("{base}K_values = []"),
            format!("{base}K_values = [0.1]\ncolour = 3"),
            format!("{base}K_values = [-0.1]"),
            "rho_values = [1.0]\nK_values = [0.1]".to_string(),
            "rho_values = [1.0]\nK_values = [0.1]\nxi_grid = [1]\ntime_grid = [1]".to_string(),
            "rho_values = [1.0]\nK_values = [0.1]\nxi_grid = [1, 0.5]".to_string(),
            "rho_values = [1.0]\nK_values = [0.1]\nxi_grid = { min = 0, max = 1, step = 0 }"
                .to_string(),
            "rho_values = [1.0]\nK_values = [0.1]\nxi_grid = { min = 0, max = 1, stride = 0.1 }"
                .to_string(),
            format!("{base}K_values = [0.1]\nvalidity_threshold = 2"),
            format!("{base}K_values = [0.1]\nformat = \"xml\""),
        ];
        for text in bad {
            assert!(
                matches!(SweepConfig::from_toml_str(&text), Err(Error::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn presets() {
        let f2 = SweepConfig::fig2();
        assert_eq!(f2.grid.len(), 391);
        assert!((f2.grid[390] - 2.0).abs() < 1e-12);
        assert_eq!(f2.k_values.len(), 4);
        let f3 = SweepConfig::fig3();
        assert_eq!(f3.grid.len(), 1001);
        assert_eq!(f3.grid[0], 0.0);
        assert!(SweepConfig::preset("fig4").is_err());
    }
}
