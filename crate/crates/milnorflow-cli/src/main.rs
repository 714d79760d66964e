#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod grid;
mod verify;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use milnorflow::dynamics::{period_scan, FamilyMember, IntegratorConfig, PeriodScan};
use milnorflow::export::{
    curve_samples, write_curve_csv, write_scan_csv, write_sphere_csv, CurveDocument, CurveHeader,
};
use milnorflow::geom_core::{random_frame_point, random_s7, random_unit_quat};
use milnorflow::milnor_bundle::{s7_point, BundleSpec, FibrationField};
use milnorflow::multicentre::{MulticentreField, SpherePeriod};
use milnorflow::{build_gamma, Error, SullivanField};

use grid::parse_grid;
use verify::{Fault, VerifyOptions, MODULES};

#[derive(Parser)]
#[command(name = "milnorflow", version, about = "Circle actions on S^7 with unbounded periods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the closed spherical curves and write samples plus a JSON header per lambda.
    BuildCurve {
        /// Grid of lambda values, e.g. `1,2,3` or `1:3:0.5`.
        #[arg(long)]
        lambda: String,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the invariant suite and write a JSON report; exits 3 if any check fails.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma list of modules to run.
        #[arg(long)]
        only: Option<String>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        tol: Tolerances,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<Fault>,
    },
    /// Measure orbit periods over a parameter grid.
    PeriodScan {
        #[arg(long, value_enum)]
        family: Family,
        /// Lambda grid for the sullivan family.
        #[arg(long)]
        lambda: Option<String>,
        /// Height grid in [0, 1) for the fibration and multicentre families.
        #[arg(long)]
        u5: Option<String>,
        /// Sphere radius for the multicentre family.
        #[arg(long, default_value_t = 0.5)]
        r: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        tol: Tolerances,
    },
}

/// Closure ball matching the orbit-closure residual bound.
const CLOSURE_EPS: f64 = 1e-6;

#[derive(clap::Args)]
struct Tolerances {
    #[arg(long, default_value_t = 1e-12)]
    tol_rel: f64,
    #[arg(long, default_value_t = 1e-14)]
    tol_abs: f64,
    /// Time budget per orbit; 1e6 by default, 1e5 for multicentre.
    #[arg(long)]
    tmax: Option<f64>,
}

impl Tolerances {
    fn config(&self, default_tmax: f64) -> IntegratorConfig {
        IntegratorConfig {
            rtol: self.tol_rel,
            atol: self.tol_abs,
            t_max: self.tmax.unwrap_or(default_tmax),
            closure_eps: CLOSURE_EPS,
            ..IntegratorConfig::default()
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Sullivan,
    Fibration,
    Multicentre,
    Hopf,
}

impl Family {
    fn name(self) -> &'static str {
        match self {
            Family::Sullivan => "sullivan",
            Family::Fibration => "fibration",
            Family::Multicentre => "multicentre",
            Family::Hopf => "hopf",
        }
    }
}

/// Failure with its exit code.
enum Failure {
    Validation(String),
    Library(Error),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Library(e) => match e {
                Error::Domain(_)
                | Error::LambdaRange(_)
                | Error::UnsupportedBundle { .. }
                | Error::OutOfNeighbourhood { .. }
                | Error::Io(_) => 1,
                _ => 2,
            },
            Failure::Verification(_) => 3,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Validation(m) | Failure::Verification(m) => m.clone(),
            Failure::Library(e) => e.to_string(),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let run = configure_threads().and_then(|_| match cli.command {
        Command::BuildCurve { lambda, format, out } => build_curve(&lambda, format, &out),
        Command::Verify {
            seed,
            only,
            out,
            tol,
            inject_fault,
        } => run_verify(seed, only.as_deref(), &out, &tol, inject_fault),
        Command::PeriodScan {
            family,
            lambda,
            u5,
            r,
            seed,
            out,
            tol,
        } => scan(family, lambda.as_deref(), u5.as_deref(), r, seed, &out, &tol),
    });
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn configure_threads() -> Outcome {
    let Ok(v) = std::env::var("MILNORFLOW_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Validation(format!("MILNORFLOW_THREADS = '{v}' is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Validation(e.to_string()))
}

fn grid_arg(s: &str, what: &str) -> std::result::Result<Vec<f64>, Failure> {
    parse_grid(s).map_err(|e| Failure::Validation(format!("--{what}: {e}")))
}

fn create(dir: &Path, name: &str) -> std::result::Result<BufWriter<File>, Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Library(e.into()))?;
    let f = File::create(dir.join(name)).map_err(|e| Failure::Library(e.into()))?;
    Ok(BufWriter::new(f))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Outcome {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::Library(Error::Io(e.to_string())))?;
    std::io::Write::write_all(&mut w, b"\n").map_err(|e| Failure::Library(e.into()))
}

fn build_curve(lambda: &str, format: Format, out: &Path) -> Outcome {
    let grid = grid_arg(lambda, "lambda")?;
    for &l in &grid {
        let curve = build_gamma(l)?;
        let n = (32.0 * curve.loops()).clamp(1024.0, 262_144.0) as usize;
        let samples = curve_samples(&curve, n)?;
        let header = CurveHeader {
            stats: *curve.stats(),
            seam: curve.seam_residual()?,
            samples: n,
        };
        let stem = format!("curve_lambda_{l}");
        match format {
            Format::Csv => {
                write_curve_csv(create(out, &format!("{stem}.csv"))?, &samples)?;
                write_json(out, &format!("{stem}.json"), &header)?;
            }
            Format::Json => write_json(out, &format!("{stem}.json"), &CurveDocument { header, samples })?,
        }
        println!(
            "lambda={l} length={:.6e} loops={} samples={n}",
            curve.length(),
            curve.loops()
        );
    }
    Ok(())
}

fn run_verify(seed: u64, only: Option<&str>, out: &Path, tol: &Tolerances, fault: Option<Fault>) -> Outcome {
    let only = match only {
        None => None,
        Some(s) => {
            let list: Vec<String> = s
                .split(',')
                .map(|m| m.trim().to_string())
                .filter(|m| !m.is_empty())
                .collect();
            if let Some(bad) = list.iter().find(|m| !MODULES.contains(&m.as_str())) {
                return Err(Failure::Validation(format!(
                    "--only: unknown module '{bad}', expected one of {}",
                    MODULES.join(",")
                )));
            }
            Some(list)
        }
    };
    let cfg = tol.config(1e6);
    cfg.validate()?;
    let report = verify::run(&VerifyOptions { seed, only, cfg, fault });
    for c in &report.checks {
        let measured = c.measured.map_or_else(|| "-".into(), |v| format!("{v:.3e}"));
        let status = if c.pass { "PASS" } else { "FAIL" };
        println!("{status} [{}] {}: {measured} ({})", c.module, c.name, c.threshold);
        if let Some(e) = &c.error {
            println!("     error: {e}");
        }
    }
    write_json(out, "verify_report.json", &report)?;
    println!("{} passed, {} failed", report.passed, report.failed);
    if report.failed > 0 {
        return Err(Failure::Verification(format!("{} checks failed", report.failed)));
    }
    Ok(())
}

#[derive(Serialize)]
struct ScanSidecar<'a> {
    family: &'static str,
    seed: u64,
    config: IntegratorConfig,
    wall_time_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    scan: Option<&'a PeriodScan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sphere: Option<&'a [SpherePeriod]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    growth_factor: Option<f64>,
}

fn scan(
    family: Family,
    lambda: Option<&str>,
    u5: Option<&str>,
    r: f64,
    seed: u64,
    out: &Path,
    tol: &Tolerances,
) -> Outcome {
    let (grid, other) = match family {
        Family::Sullivan => (lambda.map(|s| grid_arg(s, "lambda")).transpose()?, u5.map(|_| "--u5")),
        Family::Fibration | Family::Multicentre => {
            (u5.map(|s| grid_arg(s, "u5")).transpose()?, lambda.map(|_| "--lambda"))
        }
        Family::Hopf => (Some(vec![0.0, 1.0, 2.0, 3.0, 4.0]), lambda.or(u5).map(|_| "grid")),
    };
    if let Some(flag) = other {
        return Err(Failure::Validation(format!(
            "{flag} does not apply to --family {}",
            family.name()
        )));
    }
    let grid = grid.ok_or_else(|| {
        let flag = if family == Family::Sullivan { "--lambda" } else { "--u5" };
        Failure::Validation(format!("--family {} needs {flag}", family.name()))
    })?;
    let cfg = tol.config(if family == Family::Multicentre { 1e5 } else { 1e6 });
    cfg.validate()?;
    let start = Instant::now();
    let name = family.name();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (theta, w) = (random_unit_quat(&mut rng), random_unit_quat(&mut rng));

    if family == Family::Multicentre {
        let sample = grid
            .iter()
            .map(|&u| s7_point(BundleSpec::E01, u, &theta, &w))
            .collect::<milnorflow::Result<Vec<_>>>()?;
        let rows = MulticentreField::new().period_on_sphere(r, &sample, &cfg)?;
        write_sphere_csv(create(out, &format!("scan_{name}.csv"))?, &rows)?;
        let growth = rows.last().unwrap().period / rows[0].period;
        write_json(
            out,
            &format!("scan_{name}.json"),
            &ScanSidecar {
                family: name,
                seed,
                config: cfg,
                wall_time_s: start.elapsed().as_secs_f64(),
                scan: None,
                sphere: Some(&rows),
                growth_factor: Some(growth),
            },
        )?;
        for (u, row) in grid.iter().zip(&rows) {
            let kind = if row.closed { "period" } else { "lower bound" };
            println!(
                "u5={u} {kind}={:.10e} residual={:.2e} drift={:.2e}",
                row.period, row.residual, row.drift
            );
        }
        println!("growth factor between extremes: {growth:.3}");
        return Ok(());
    }

    let frame = random_frame_point(&mut rng);
    let family_fn = |p: f64| -> milnorflow::Result<FamilyMember> {
        match family {
            Family::Sullivan => Ok((Box::new(SullivanField::new(p)?), frame.to_array().to_vec())),
            Family::Fibration => {
                let z = s7_point(BundleSpec::E01, p, &theta, &w)?;
                Ok((
                    Box::new(FibrationField::new(BundleSpec::E01)?.at_level(&z)?),
                    z.as_slice().to_vec(),
                ))
            }
            _ => {
                let z = random_s7(&mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(p as u64)));
                Ok((Box::new(verify::hopf_field()), z.as_slice().to_vec()))
            }
        }
    };
    let result = period_scan(family_fn, &grid, &cfg)?;
    write_scan_csv(create(out, &format!("scan_{name}.csv"))?, &result)?;
    write_json(
        out,
        &format!("scan_{name}.json"),
        &ScanSidecar {
            family: name,
            seed,
            config: cfg,
            wall_time_s: start.elapsed().as_secs_f64(),
            scan: Some(&result),
            sphere: None,
            growth_factor: None,
        },
    )?;
    for p in &result.points {
        match &p.error {
            Some(e) => println!("param={} error: {e}", p.param),
            None => {
                let kind = if p.closed { "period" } else { "lower bound" };
                println!("param={} {kind}={:.10e} residual={:.2e}", p.param, p.period, p.residual);
            }
        }
    }
    if family != Family::Hopf {
        println!("strictly increasing: {}", result.strictly_increasing());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use milnorflow::Stage;

    #[test]
    fn exit_codes_by_error_class() {
        assert_eq!(Failure::Validation("x".into()).code(), 1);
        assert_eq!(Failure::Library(Error::LambdaRange(7.0)).code(), 1);
        assert_eq!(Failure::Library(Error::UnsupportedBundle { h: 2, j: -1 }).code(), 1);
        assert_eq!(Failure::Library(Error::StepUnderflow { t: 1.0, h: 1e-300 }).code(), 2);
        assert_eq!(Failure::Library(Error::Stationary(0.0)).code(), 2);
        assert_eq!(
            Failure::Library(Error::Construction {
                stage: Stage::Closing,
                msg: "x".into()
            })
            .code(),
            2
        );
        assert_eq!(Failure::Verification("x".into()).code(), 3);
    }
}
