//! Invariant suite behind `verify`: every check records its measured value and threshold.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use milnorflow::curve_factory::{build_gamma, curvature_cross_check};
use milnorflow::dynamics::{detect_period, FnField, IntegratorConfig};
use milnorflow::geom_core::{hopf_field_01, qj, qk, random_frame_point, random_s7, random_unit_quat, Quat, R8};
use milnorflow::milnor_bundle::{
    clutching_map, hopf_family_distance, is_diffeo_standard, level_sample, s7_point, transition, transition_inverse,
    transport_velocity, BundleSpec, Chart, ChartPoint, FibrationField, PhaseAction,
};
use milnorflow::multicentre::{linearization, MulticentreField};
use milnorflow::sullivan_field::{flatness_sup, log_slope, SullivanField};
use milnorflow::{Error, Result};

pub const MODULES: [&str; 7] = [
    "curve",
    "geodesic",
    "field",
    "bundle",
    "dynamics",
    "fibration",
    "multicentre",
];

/// Deliberate defects for exercising the failure path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Fault {
    /// Conjugates the fibre inside the transition map.
    TransitionSign,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub module: &'static str,
    pub name: String,
    pub pass: bool,
    pub measured: Option<f64>,
    pub threshold: String,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<Check>,
}

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    /// Records `value` against `ok`; errors count as failures.
    fn record(
        &mut self,
        module: &'static str,
        name: &str,
        threshold: &str,
        value: Result<f64>,
        ok: impl Fn(f64) -> bool,
    ) {
        let check = match value {
            Ok(v) => Check {
                module,
                name: name.into(),
                pass: ok(v),
                measured: v.is_finite().then_some(v),
                threshold: threshold.into(),
                error: None,
            },
            Err(e) => Check {
                module,
                name: name.into(),
                pass: false,
                measured: None,
                threshold: threshold.into(),
                error: Some(e.to_string()),
            },
        };
        self.checks.push(check);
    }
}

pub struct VerifyOptions {
    pub seed: u64,
    pub only: Option<Vec<String>>,
    pub cfg: IntegratorConfig,
    pub fault: Option<Fault>,
}

pub fn run(opts: &VerifyOptions) -> Report {
    let mut s = Suite { checks: Vec::new() };
    let wanted = |m: &str| opts.only.as_ref().is_none_or(|o| o.iter().any(|x| x == m));
    if wanted("curve") {
        curve(&mut s);
    }
    if wanted("geodesic") {
        geodesic(&mut s, opts.seed);
    }
    if wanted("field") {
        field(&mut s, opts.seed);
    }
    if wanted("bundle") {
        bundle(&mut s, opts.seed, opts.fault);
    }
    if wanted("dynamics") {
        dynamics(&mut s, opts.seed, &opts.cfg);
    }
    if wanted("fibration") {
        fibration(&mut s, opts.seed, &opts.cfg);
    }
    if wanted("multicentre") {
        multicentre(&mut s, opts.seed, &opts.cfg);
    }
    let failed = s.checks.iter().filter(|c| !c.pass).count();
    Report {
        seed: opts.seed,
        passed: s.checks.len() - failed,
        failed,
        checks: s.checks,
    }
}

const GRID: [f64; 5] = [1.0, 1.5, 2.0, 2.5, 3.0];

fn curve(s: &mut Suite) {
    let mut inv = Vec::new();
    for &l in &GRID {
        let built = build_gamma(l);
        let seam = built
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|c| Ok(c.seam_residual()?.max()));
        s.record("curve", &format!("seam residual at lambda={l}"), "<= 1e-8", seam, |v| {
            v <= 1e-8
        });
        if let Ok(c) = built {
            inv.push(c.max_inv_kg());
        }
    }
    let slope = if inv.len() == GRID.len() {
        Ok(log_slope(&GRID, &inv))
    } else {
        Err(Error::Domain("curve construction failed".into()))
    };
    s.record("curve", "log slope of max 1/k_g", "in [-1.15, -0.85]", slope, |v| {
        (-1.15..=-0.85).contains(&v)
    });
    let guard = match build_gamma(7.0) {
        Err(Error::LambdaRange(_)) => Ok(0.0),
        _ => Ok(1.0),
    };
    s.record("curve", "lambda = 7 rejected", "range error", guard, |v| v == 0.0);
}

fn geodesic(s: &mut Suite, seed: u64) {
    let gap = build_gamma(1.0).and_then(|c| curvature_cross_check(&c, c.period(), 10_000, seed));
    s.record(
        "geodesic",
        "intrinsic vs Christoffel k_g",
        "<= 1e-6 relative",
        gap,
        |v| v <= 1e-6,
    );
}

fn field(s: &mut Suite, seed: u64) {
    let sups: Result<Vec<f64>> = GRID
        .iter()
        .map(|&l| flatness_sup(&SullivanField::new(l)?, 1000, seed))
        .collect();
    let slope = sups.map(|y| log_slope(&GRID, &y));
    s.record(
        "field",
        "log slope of sup |X - (H,0)|",
        "in [-1.15, -0.85]",
        slope,
        |v| (-1.15..=-0.85).contains(&v),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tangency = SullivanField::new(1.0).and_then(|f| {
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let p = random_frame_point(&mut rng);
            worst = worst.max(f.eval(&p)?.tangency_residual(&p));
        }
        Ok(worst)
    });
    s.record("field", "tangent to the frame manifold", "<= 1e-12", tangency, |v| {
        v <= 1e-12
    });
    let leaf = SullivanField::new(1.0).and_then(|f| {
        let mut worst = 0.0f64;
        for _ in 0..50 {
            worst = worst.max(f.leaf_through(&random_frame_point(&mut rng))?.residual);
        }
        Ok(worst)
    });
    s.record("field", "leaf through random points", "<= 1e-6", leaf, |v| v <= 1e-6);
}

type Transition = fn(BundleSpec, &Quat, &Quat) -> Result<(Quat, Quat)>;

fn faulty_transition(spec: BundleSpec, v: &Quat, w: &Quat) -> Result<(Quat, Quat)> {
    transition(spec, v, &w.conjugate())
}

fn bundle(s: &mut Suite, seed: u64, fault: Option<Fault>) {
    let phi: Transition = match fault {
        Some(Fault::TransitionSign) => faulty_transition,
        None => transition,
    };
    for spec in [BundleSpec::E01, BundleSpec::E10] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cocycle = Ok(0.0f64);
        let mut matched = Ok(0.0f64);
        let mut mismatched = 0.0f64;
        let action = spec.natural_action().expect("Hopf-compatible bundle");
        let wrong = match action {
            PhaseAction::Left => PhaseAction::Right,
            PhaseAction::Right => PhaseAction::Left,
        };
        for _ in 0..10_000 {
            let v = random_unit_quat(&mut rng) * 10f64.powf(rng.gen_range(-1.0..=1.0));
            let w = random_unit_quat(&mut rng);
            let t = rng.gen_range(0.5..2.5);
            let step = || -> Result<(f64, f64, f64)> {
                let (u, eta) = phi(spec, &v, &w)?;
                let (v2, w2) = transition_inverse(spec, &u, &eta)?;
                let c = ((v2 - v).norm() / v.norm()).max((w2 - w).norm());
                let res = |a: PhaseAction| -> Result<f64> {
                    let (_, x) = phi(spec, &v, &a.apply(&w, t))?;
                    let (_, y) = phi(spec, &v, &w)?;
                    Ok((x - a.apply(&y, t)).norm())
                };
                Ok((c, res(action)?, res(wrong)?))
            };
            match step() {
                Ok((c, m, w)) => {
                    cocycle = cocycle.map(|x| x.max(c));
                    matched = matched.map(|x| x.max(m));
                    mismatched = mismatched.max(w);
                }
                Err(e) => {
                    cocycle = Err(e.clone());
                    matched = Err(e);
                    break;
                }
            }
        }
        s.record("bundle", &format!("cocycle {spec}"), "<= 1e-12", cocycle, |v| {
            v <= 1e-12
        });
        s.record(
            "bundle",
            &format!("commutation {spec} matched action"),
            "<= 1e-12",
            matched,
            |v| v <= 1e-12,
        );
        s.record(
            "bundle",
            &format!("commutation {spec} mismatched action"),
            "> 0.1",
            Ok(mismatched),
            |v| v > 0.1,
        );
    }
    let generic = commutation_mismatch(phi, BundleSpec::E01, &qj(), &qk());
    s.record("bundle", "mismatched action on a generic pair", "> 0.1", generic, |v| {
        v > 0.1
    });
    let mut disagree = 0.0;
    for h in -10i64..=10 {
        let spec = BundleSpec::new(h, 1 - h).expect("h + j = 1");
        let k = (2 * h - 1) as i128;
        if is_diffeo_standard(spec).ok() != Some((k * k - 1) % 7 == 0) {
            disagree += 1.0;
        }
    }
    s.record(
        "bundle",
        "standard-sphere predicate for |h| <= 10",
        "0 disagreements",
        Ok(disagree),
        |v| v == 0.0,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let unit = (0..1000).try_fold(0.0f64, |acc, _| {
        let h = rng.gen_range(-10..=10);
        let spec = BundleSpec::new(h, 1 - h)?;
        let c = clutching_map(spec, &random_unit_quat(&mut rng), &random_unit_quat(&mut rng))?;
        Ok::<f64, Error>(acc.max((c.norm() - 1.0).abs()))
    });
    s.record(
        "bundle",
        "clutching map lands in unit quaternions",
        "<= 1e-12",
        unit,
        |v| v <= 1e-12,
    );
}

fn commutation_mismatch(phi: Transition, spec: BundleSpec, v: &Quat, w: &Quat) -> Result<f64> {
    let (_, x) = phi(spec, v, &PhaseAction::Right.apply(w, 1.0))?;
    let (_, y) = phi(spec, v, w)?;
    Ok((x - PhaseAction::Right.apply(&y, 1.0)).norm())
}

pub fn hopf_field() -> FnField<impl Fn(&[f64], &mut [f64]) -> Result<()> + Sync + Send> {
    let mut f = FnField::new(8, |x: &[f64], d: &mut [f64]| {
        d.copy_from_slice(hopf_field_01(&R8::from_column_slice(x)).as_slice());
        Ok(())
    });
    f.project = Some(|x: &mut [f64]| {
        let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= n);
    });
    f
}

fn dynamics(s: &mut Suite, seed: u64, cfg: &IntegratorConfig) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = random_s7(&mut rng);
    let hopf = detect_period(&hopf_field(), z.as_slice(), cfg).map(|o| {
        if o.closed {
            (o.period - TAU).abs()
        } else {
            f64::INFINITY
        }
    });
    s.record("dynamics", "Hopf period", "|T - 2 pi| <= 1e-6", hopf, |v| v <= 1e-6);
    let sullivan = SullivanField::new(1.0).and_then(|f| {
        let tq = f.period_quadrature()?;
        let o = detect_period(&f, &random_frame_point(&mut rng).to_array(), cfg)?;
        Ok(if o.closed {
            (o.period - tq).abs() / tq
        } else {
            f64::INFINITY
        })
    });
    s.record(
        "dynamics",
        "Sullivan period at lambda=1 vs quadrature",
        "<= 1e-8 relative",
        sullivan,
        |v| v <= 1e-8,
    );
}

fn fibration(s: &mut Suite, seed: u64, cfg: &IntegratorConfig) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (theta, w) = (random_unit_quat(&mut rng), random_unit_quat(&mut rng));
    let field = FibrationField::new(BundleSpec::E01);
    let polar = field.as_ref().map_err(Clone::clone).and_then(|f| {
        let z = s7_point(BundleSpec::E01, 1.0, &theta, &w)?;
        let o = detect_period(&f.at_level(&z)?, z.as_slice(), cfg)?;
        Ok(if o.closed {
            (o.period - TAU).abs()
        } else {
            f64::INFINITY
        })
    });
    s.record("fibration", "polar fibre period", "|T - 2 pi| <= 1e-6", polar, |v| {
        v <= 1e-6
    });
    let overlap = field.as_ref().map_err(Clone::clone).and_then(|f| {
        let p = ChartPoint::new(Chart::North, theta, w)?;
        let (q, moved) = transport_velocity(BundleSpec::E01, &p, &f.eval_chart(&p)?)?;
        Ok(moved.max_abs_diff(&f.eval_chart(&q)?))
    });
    s.record("fibration", "chart overlap at |v| = 1", "<= 1e-8", overlap, |v| {
        v <= 1e-8
    });
    let orbit = field.as_ref().map_err(Clone::clone).and_then(|f| {
        let z = s7_point(BundleSpec::E01, 0.0, &theta, &w)?;
        let o = detect_period(&f.at_level(&z)?, z.as_slice(), cfg)?;
        Ok(if o.closed { o.residual } else { f64::INFINITY })
    });
    s.record("fibration", "orbit at u5 = 0 closes", "residual <= 1e-6", orbit, |v| {
        v <= 1e-6
    });
    let family = level_sample(BundleSpec::E01, 200, 10, seed).and_then(|sample| {
        let d: Result<Vec<f64>> = [0.6, 0.8, 0.95, 1.0]
            .iter()
            .map(|&mu| hopf_family_distance(mu, &sample))
            .collect();
        let d = d?;
        Ok(if d[0] > d[1] && d[1] > d[2] && d[3] == 0.0 {
            d[0]
        } else {
            -1.0
        })
    });
    s.record(
        "fibration",
        "Hopf family distance decreasing to 0",
        "monotone",
        family,
        |v| v >= 0.0,
    );
}

fn multicentre(s: &mut Suite, seed: u64, cfg: &IntegratorConfig) {
    let f = MulticentreField::new();
    s.record(
        "multicentre",
        "eval(0)",
        "= 0",
        f.eval(&R8::zeros()).map(|v| v.amax()),
        |v| v == 0.0,
    );
    let jac = f
        .finite_difference_jacobian_at_zero(1e-3)
        .map(|j| (j - linearization()).amax());
    s.record("multicentre", "finite-difference DX(0) vs A", "<= 1e-6", jac, |v| {
        v <= 1e-6
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tangent = (0..20).try_fold(0.0f64, |acc, _| {
        let x = random_s7(&mut rng) * rng.gen_range(0.05..0.95);
        Ok::<f64, Error>(acc.max(f.eval(&x)?.dot(&x).abs() / x.norm_squared()))
    });
    s.record("multicentre", "velocity orthogonal to x", "<= 1e-10", tangent, |v| {
        v <= 1e-10
    });
    let z = s7_point(
        BundleSpec::E01,
        0.0,
        &random_unit_quat(&mut rng),
        &random_unit_quat(&mut rng),
    );
    let drift = z.and_then(|z| f.period_on_sphere(0.5, &[z], cfg)).map(|rows| {
        if rows[0].closed {
            rows[0].drift
        } else {
            f64::INFINITY
        }
    });
    s.record(
        "multicentre",
        "|x|^2 drift over one period at r = 0.5",
        "<= 1e-9 relative",
        drift,
        |v| v <= 1e-9,
    );
}
