//! CSV and JSON output with full 17-significant-digit floats.

use std::io::Write;

use serde::Serialize;

use crate::curve_factory::{CurveStats, SeamResidual, SmoothClosedSphereCurve};
use crate::dynamics::PeriodScan;
use crate::multicentre::SpherePeriod;
use crate::Result;

/// `x` with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// One sample of a curve at arc length `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveSample {
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub kg: f64,
}

/// `n` samples equally spaced in arc length.
pub fn curve_samples(curve: &SmoothClosedSphereCurve, n: usize) -> Result<Vec<CurveSample>> {
    let len = curve.length();
    (0..n)
        .map(|i| {
            let s = len * i as f64 / n as f64;
            let (p, _, kg) = curve.frame_at_arclength(s)?;
            Ok(CurveSample {
                s,
                x: p.x,
                y: p.y,
                z: p.z,
                kg,
            })
        })
        .collect()
}

/// JSON header of a curve file.
#[derive(Debug, Clone, Serialize)]
pub struct CurveHeader {
    pub stats: CurveStats,
    pub seam: SeamResidual,
    pub samples: usize,
}

/// Curve header with embedded samples.
#[derive(Debug, Clone, Serialize)]
pub struct CurveDocument {
    pub header: CurveHeader,
    pub samples: Vec<CurveSample>,
}

pub fn write_curve_csv<W: Write>(out: W, samples: &[CurveSample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["s", "x", "y", "z", "kg"])?;
    for p in samples {
        w.write_record([p.s, p.x, p.y, p.z, p.kg].map(fmt17))?;
    }
    w.flush()?;
    Ok(())
}

/// `param, period_or_lower_bound, closed, residual, steps, error`; wall times stay out so equal
/// runs give identical files.
pub fn write_scan_csv<W: Write>(out: W, scan: &PeriodScan) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["param", "period_or_lower_bound", "closed", "residual", "steps", "error"])?;
    for p in &scan.points {
        w.write_record([
            fmt17(p.param),
            fmt17(p.period),
            p.closed.to_string(),
            fmt17(p.residual),
            p.steps.to_string(),
            p.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `r, u5, z0..z7, period_or_lower_bound, closed, residual, drift`.
pub fn write_sphere_csv<W: Write>(out: W, rows: &[SpherePeriod]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut head = vec!["r".to_string(), "u5".to_string()];
    head.extend((0..8).map(|i| format!("z{i}")));
    head.extend(["period_or_lower_bound", "closed", "residual", "drift"].map(String::from));
    w.write_record(&head)?;
    for row in rows {
        let mut rec = vec![fmt17(row.r), fmt17(row.u5)];
        rec.extend(row.z.iter().map(|&v| fmt17(v)));
        rec.extend([
            fmt17(row.period),
            row.closed.to_string(),
            fmt17(row.residual),
            fmt17(row.drift),
        ]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
