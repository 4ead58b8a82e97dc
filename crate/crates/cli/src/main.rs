#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lightcone_core::audit::{default_grid, oracle_check};
use lightcone_core::config::{parse_value, GridAxis, OutputFormat, SweepConfig, K0};
use lightcone_core::sweep::{
    detect_lightcone_feature, evaluate, lightcone_config, run_sweep_detailed, split_xi, units_to_k,
    write_csv, write_json, EvalOptions, SweepRecord,
};
use lightcone_core::{Error, Point, Spectrum};

const EXIT_CONFIG: u8 = 2;
const EXIT_AUDIT: u8 = 3;
const EXIT_VALIDITY: u8 = 4;

#[derive(Parser)]
#[command(
    name = "lightcone",
    version,
    about = "Two qubits on an open transmission line at second order"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpectrumArg {
    Flat,
    Ohmic,
}

impl From<SpectrumArg> for Spectrum {
    fn from(s: SpectrumArg) -> Self {
        match s {
            SpectrumArg::Flat => Spectrum::Flat,
            SpectrumArg::Ohmic => Spectrum::Ohmic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Fig2,
    Fig3,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    Default,
}

#[derive(Args)]
struct SpectrumOpt {
    /// Spectral weight for X and rho14.
    #[arg(long, value_enum)]
    spectrum: Option<SpectrumArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one point and print its record as JSON.
    Point {
        /// Dimensionless time vt/r.
        #[arg(long)]
        xi: String,
        /// Dimensionless separation, e.g. 0.785 or pi/4.
        #[arg(long)]
        rho: String,
        /// Dimensionless coupling, e.g. 0.15 or 1000*K0.
        #[arg(long = "K")]
        k: String,
        #[command(flatten)]
        spectrum: SpectrumOpt,
        /// Add the two-photon term to rho33.
        #[arg(long)]
        include_g2: bool,
        #[arg(long, default_value_t = 0.1)]
        validity_threshold: f64,
    },
    /// Run a parameter sweep from a config file or a preset.
    Sweep {
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        /// Output file; defaults to the config's output_path, else stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[command(flatten)]
        spectrum: SpectrumOpt,
        /// Abort with exit code 4 if any record fails the validity check.
        #[arg(long)]
        strict: bool,
    },
    /// Compare the closed forms with the quadrature oracle.
    OracleCheck {
        #[arg(long, value_enum, conflicts_with = "config")]
        grid: Option<GridArg>,
        /// Take the audit points from a sweep config.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        spectrum: SpectrumOpt,
        /// Where to write the JSON report.
        #[arg(long, default_value = "oracle-check.json")]
        report: PathBuf,
    },
    /// Convert g/2pi and Omega/2pi in Hz to the dimensionless coupling K.
    Units {
        #[arg(long = "g-hz")]
        g_hz: f64,
        #[arg(long = "omega-hz")]
        omega_hz: f64,
    },
    /// Report the concurrence and |X| change across the light cone.
    Lightcone {
        #[arg(long)]
        rho: String,
        #[arg(long = "K")]
        k: String,
        #[command(flatten)]
        spectrum: SpectrumOpt,
    },
}

enum Failure {
    Config(String),
    Audit,
    Validity(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::Input(_)
            | Error::Domain(_)
            | Error::NonFinite(_)
            | Error::LightConeBoundary => Failure::Config(e.to_string()),
            other => Failure::Other(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

fn value(text: &str) -> Result<f64, Failure> {
    Ok(parse_value(text)?)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) if p != Path::new("-") => {
            Box::new(BufWriter::new(File::create(p).map_err(|e| {
                Failure::Other(format!("cannot create {}: {e}", p.display()))
            })?))
        }
        _ => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_json<S: serde::Serialize>(v: &S) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Failure::Other(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Point {
            xi,
            rho,
            k,
            spectrum,
            include_g2,
            validity_threshold,
        } => {
            let (xi, rho, k) = (value(&xi)?, value(&rho)?, value(&k)?);
            Point::new(xi, rho, k)?;
            let opts = EvalOptions {
                spectrum: spectrum.spectrum.map_or(Spectrum::Flat, Into::into),
                include_g2,
                validity_threshold,
            };
            let records = split_xi(xi, rho, k, None)
                .iter()
                .map(|gp| evaluate::<f64>(gp, &opts).map(|e| e.record))
                .collect::<Result<Vec<SweepRecord<f64>>, _>>()?;
            if let [single] = records.as_slice() {
                print_json(single)
            } else {
                print_json(&records)
            }
        }
        Command::Sweep {
            config,
            preset,
            output,
            format,
            spectrum,
            strict,
        } => {
            let mut cfg = match (config, preset) {
                (Some(path), _) => SweepConfig::from_path(&path)?,
                (None, Some(Preset::Fig2)) => SweepConfig::fig2(),
                (None, Some(Preset::Fig3)) => SweepConfig::fig3(),
                (None, None) => return Err(Failure::Config("give --config or --preset".into())),
            };
            if let Some(s) = spectrum.spectrum {
                cfg.spectrum = s.into();
            }
            if let Some(f) = format {
                cfg.format = match f {
                    FormatArg::Csv => OutputFormat::Csv,
                    FormatArg::Json => OutputFormat::Json,
                };
            }
            let evals = run_sweep_detailed::<f64>(&cfg)?;
            if strict {
                if let Some(bad) = evals.iter().find(|e| !e.record.validity_ok) {
                    let r = &bad.record;
                    return Err(Failure::Validity(format!(
                        "record xi={} rho={} K={} fails the validity check{}",
                        r.xi,
                        r.rho,
                        r.k,
                        bad.failure
                            .as_deref()
                            .map(|m| format!(": {m}"))
                            .unwrap_or_default()
                    )));
                }
            }
            let records: Vec<SweepRecord<f64>> = evals.into_iter().map(|e| e.record).collect();
            let target = output.or(cfg.output_path.clone());
            let mut out = open_output(target.as_deref())?;
            match cfg.format {
                OutputFormat::Csv => write_csv(&mut out, &records)?,
                OutputFormat::Json => write_json(&mut out, &records)?,
            }
            out.flush()?;
            Ok(())
        }
        Command::OracleCheck {
            grid: _,
            config,
            spectrum,
            report,
        } => {
            let points = match config {
                Some(path) => {
                    let cfg = SweepConfig::from_path(&path)?;
                    let mut pts = Vec::new();
                    for &rho in &cfg.rho_values {
                        for &k in &cfg.k_values {
                            for &g in &cfg.grid {
                                let xi = match cfg.axis {
                                    GridAxis::Xi => g,
                                    GridAxis::OmegaT => g / rho,
                                };
                                pts.push(Point {
                                    xi,
                                    rho,
                                    coupling: k,
                                });
                            }
                        }
                    }
                    pts
                }
                None => default_grid(),
            };
            let spectrum = spectrum.spectrum.map_or(Spectrum::Flat, Into::into);
            let rep = oracle_check(&points, None, spectrum)?;
            print!("{}", rep.to_text());
            std::fs::write(&report, rep.to_json() + "\n")
                .map_err(|e| Failure::Other(format!("cannot write {}: {e}", report.display())))?;
            if rep.pass {
                Ok(())
            } else {
                Err(Failure::Audit)
            }
        }
        Command::Units { g_hz, omega_hz } => {
            let k = units_to_k(g_hz, omega_hz)?;
            print_json(&serde_json::json!({ "K": k, "K_over_K0": k / K0 }))
        }
        Command::Lightcone { rho, k, spectrum } => {
            let (rho, k) = (value(&rho)?, value(&k)?);
            if !(k >= 0.0) {
                return Err(Failure::Config(format!("K must be >= 0, got {k}")));
            }
            let spectrum = spectrum.spectrum.map_or(Spectrum::Flat, Into::into);
            let cfg = lightcone_config(rho, k, spectrum);
            let evals = run_sweep_detailed::<f64>(&cfg)?;
            let records: Vec<SweepRecord<f64>> = evals.into_iter().map(|e| e.record).collect();
            print_json(&detect_lightcone_feature(&records, rho, k)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Audit) => {
            eprintln!("error: oracle audit failed");
            ExitCode::from(EXIT_AUDIT)
        }
        Err(Failure::Validity(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VALIDITY)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
