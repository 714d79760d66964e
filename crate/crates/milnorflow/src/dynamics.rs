//! Adaptive integration, closed-orbit detection and period scans.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Smooth vector field on a submanifold of `Rⁿ`.
pub trait VectorField: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64], dx: &mut [f64]) -> Result<()>;
    /// Pulls a state back onto the manifold.
    fn project(&self, _x: &mut [f64]) {}
    /// Conserved quantity used to report drift.
    fn invariant(&self, _x: &[f64]) -> Option<f64> {
        None
    }
    /// Angle that increases strictly along the orbit; a closure needs it to complete a turn.
    fn slow_phase(&self, _x: &[f64]) -> Option<f64> {
        None
    }
}

/// Field given by a closure.
pub struct FnField<F> {
    pub dim: usize,
    pub f: F,
    pub project: Option<fn(&mut [f64])>,
    pub invariant: Option<fn(&[f64]) -> f64>,
}

impl<F: Fn(&[f64], &mut [f64]) -> Result<()> + Sync> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self {
            dim,
            f,
            project: None,
            invariant: None,
        }
    }
}

impl<F: Fn(&[f64], &mut [f64]) -> Result<()> + Sync> VectorField for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64], dx: &mut [f64]) -> Result<()> {
        (self.f)(x, dx)
    }
    fn project(&self, x: &mut [f64]) {
        if let Some(p) = self.project {
            p(x)
        }
    }
    fn invariant(&self, x: &[f64]) -> Option<f64> {
        self.invariant.map(|f| f(x))
    }
}

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    /// Renormalize onto the manifold after each accepted step.
    pub project: bool,
    /// Time budget.
    pub t_max: f64,
    /// Closure ball radius relative to `|x₀|`.
    pub closure_eps: f64,
    /// Velocity-direction gate in radians.
    pub direction_tol: f64,
    /// Trajectory samples kept by [`detect_period`].
    pub max_samples: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_max: f64::INFINITY,
            project: true,
            t_max: 1e6,
            closure_eps: 1e-8,
            direction_tol: 1e-4,
            max_samples: 2048,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0 && self.t_max > 0.0 && self.h_max > 0.0) {
            return Err(Error::Domain(
                "tolerances, step bound and time budget must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[cfg_attr(not(test), allow(dead_code))]
#[allow(clippy::excessive_precision)]
const C: [f64; 12] = [
    0.0,
    0.526001519587677318785587544488E-01,
    0.789002279381515978178381316732E-01,
    0.118350341907227396726757197510E+00,
    0.281649658092772603273242802490E+00,
    0.333333333333333333333333333333E+00,
    0.25E+00,
    0.307692307692307692307692307692E+00,
    0.651282051282051282051282051282E+00,
    0.6E+00,
    0.857142857142857142857142857142E+00,
    1.0,
];
#[allow(clippy::excessive_precision)]
const A: [[f64; 11]; 11] = [
    [
        5.26001519587677318785587544488E-2,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        1.97250569845378994544595329183E-2,
        5.91751709536136983633785987549E-2,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        2.95875854768068491816892993775E-2,
        0.0,
        8.87627564304205475450678981324E-2,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        2.41365134159266685502369798665E-1,
        0.0,
        -8.84549479328286085344864962717E-1,
        9.24834003261792003115737966543E-1,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        3.7037037037037037037037037037E-2,
        0.0,
        0.0,
        1.70828608729473871279604482173E-1,
        1.25467687566822425016691814123E-1,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        3.7109375E-2,
        0.0,
        0.0,
        1.70252211019544039314978060272E-1,
        6.02165389804559606850219397283E-2,
        -1.7578125E-2,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        3.70920001185047927108779319836E-2,
        0.0,
        0.0,
        1.70383925712239993810214054705E-1,
        1.07262030446373284651809199168E-1,
        -1.53194377486244017527936158236E-2,
        8.27378916381402288758473766002E-3,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        6.24110958716075717114429577812E-1,
        0.0,
        0.0,
        -3.36089262944694129406857109825E0,
        -8.68219346841726006818189891453E-1,
        2.75920996994467083049415600797E1,
        2.01540675504778934086186788979E1,
        -4.34898841810699588477366255144E1,
        0.0,
        0.0,
        0.0,
    ],
    [
        4.77662536438264365890433908527E-1,
        0.0,
        0.0,
        -2.48811461997166764192642586468E0,
        -5.90290826836842996371446475743E-1,
        2.12300514481811942347288949897E1,
        1.52792336328824235832596922938E1,
        -3.32882109689848629194453265587E1,
        -2.03312017085086261358222928593E-2,
        0.0,
        0.0,
    ],
    [
        -9.3714243008598732571704021658E-1,
        0.0,
        0.0,
        5.18637242884406370830023853209E0,
        1.09143734899672957818500254654E0,
        -8.14978701074692612513997267357E0,
        -1.85200656599969598641566180701E1,
        2.27394870993505042818970056734E1,
        2.49360555267965238987089396762E0,
        -3.0467644718982195003823669022E0,
        0.0,
    ],
    [
        2.27331014751653820792359768449E0,
        0.0,
        0.0,
        -1.05344954667372501984066689879E1,
        -2.00087205822486249909675718444E0,
        -1.79589318631187989172765950534E1,
        2.79488845294199600508499808837E1,
        -2.85899827713502369474065508674E0,
        -8.87285693353062954433549289258E0,
        1.23605671757943030647266201528E1,
        6.43392746015763530355970484046E-1,
    ],
];
#[allow(clippy::excessive_precision)]
const B: [f64; 12] = [
    5.42937341165687622380535766363E-2,
    0.0,
    0.0,
    0.0,
    0.0,
    4.45031289275240888144113950566E0,
    1.89151789931450038304281599044E0,
    -5.8012039600105847814672114227E0,
    3.1116436695781989440891606237E-1,
    -1.52160949662516078556178806805E-1,
    2.01365400804030348374776537501E-1,
    4.47106157277725905176885569043E-2,
];
#[allow(clippy::excessive_precision)]
const BHH: [f64; 3] = [
    0.244094488188976377952755905512E+00,
    0.733846688281611857341361741547E+00,
    0.220588235294117647058823529412E-01,
];
#[allow(clippy::excessive_precision)]
const ER: [f64; 12] = [
    0.1312004499419488073250102996E-01,
    0.0,
    0.0,
    0.0,
    0.0,
    -0.1225156446376204440720569753E+01,
    -0.4957589496572501915214079952E+00,
    0.1664377182454986536961530415E+01,
    -0.3503288487499736816886487290E+00,
    0.3341791187130174790297318841E+00,
    0.8192320648511571246570742613E-01,
    -0.2235530786388629525884427845E-01,
];

/// Dormand-Prince 8(5,3) stepper with reusable stage storage.
struct Dop853<'a, F: VectorField + ?Sized> {
    field: &'a F,
    k: Vec<Vec<f64>>,
    tmp: Vec<f64>,
    evals: usize,
}

impl<'a, F: VectorField + ?Sized> Dop853<'a, F> {
    fn new(field: &'a F) -> Self {
        let n = field.dim();
        Self {
            field,
            k: vec![vec![0.0; n]; 12],
            tmp: vec![0.0; n],
            evals: 0,
        }
    }

    /// One step of size `h` from `(x, f(x) = k[0])`; writes the result to `out`, returns the scaled error.
    #[allow(clippy::needless_range_loop)]
    fn step(&mut self, x: &[f64], h: f64, out: &mut [f64], rtol: f64, atol: f64) -> Result<f64> {
        let n = x.len();
        for s in 1..12 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, a) in A[s - 1].iter().enumerate().take(s) {
                    if *a != 0.0 {
                        acc += a * self.k[j][i];
                    }
                }
                self.tmp[i] = x[i] + h * acc;
            }
            let (head, tail) = self.k.split_at_mut(s);
            let _ = head;
            self.field.eval(&self.tmp, &mut tail[0])?;
            self.evals += 1;
        }
        let mut err = 0.0;
        let mut err2 = 0.0;
        for i in 0..n {
            let mut inc = 0.0;
            let mut e = 0.0;
            for j in 0..12 {
                inc += B[j] * self.k[j][i];
                e += ER[j] * self.k[j][i];
            }
            out[i] = x[i] + h * inc;
            let sk = atol + rtol * x[i].abs().max(out[i].abs());
            let e2 = inc - BHH[0] * self.k[0][i] - BHH[1] * self.k[8][i] - BHH[2] * self.k[11][i];
            err += (e / sk).powi(2);
            err2 += (e2 / sk).powi(2);
        }
        let mut deno = err + 0.01 * err2;
        if deno <= 0.0 {
            deno = 1.0;
        }
        Ok(h.abs() * err * (1.0 / (n as f64 * deno)).sqrt())
    }
}

/// Starting step from the Euler-probe estimate of the second derivative.
fn initial_step<F: VectorField + ?Sized>(
    rk: &mut Dop853<'_, F>,
    x0: &[f64],
    f0: &[f64],
    cfg: &IntegratorConfig,
) -> Result<f64> {
    let n = x0.len() as f64;
    let sk: Vec<f64> = x0.iter().map(|x| cfg.atol + cfg.rtol * x.abs()).collect();
    let rms = |v: &[f64]| (v.iter().zip(&sk).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / n).sqrt();
    let (d0, d1) = (rms(x0), rms(f0));
    let h0 = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(cfg.h_max);
    let x1: Vec<f64> = x0.iter().zip(f0).map(|(x, f)| x + h0 * f).collect();
    let mut f1 = vec![0.0; x0.len()];
    rk.field.eval(&x1, &mut f1)?;
    rk.evals += 1;
    let df: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&df) / h0;
    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dm).powf(1.0 / 8.0)
    };
    Ok((100.0 * h0).min(h1).min(cfg.h_max))
}

/// Accepted states of an integration.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub steps: usize,
    pub rejected: usize,
    pub evals: usize,
}

impl Trajectory {
    pub fn last(&self) -> Option<&[f64]> {
        self.x.last().map(|v| v.as_slice())
    }
}

/// Adaptive integration state.
struct Driver<'a, F: VectorField + ?Sized> {
    rk: Dop853<'a, F>,
    cfg: IntegratorConfig,
    t: f64,
    x: Vec<f64>,
    fx: Vec<f64>,
    h: f64,
    next: Vec<f64>,
    steps: usize,
    rejected: usize,
}

impl<'a, F: VectorField + ?Sized> Driver<'a, F> {
    fn new(field: &'a F, x0: &[f64], cfg: IntegratorConfig) -> Result<Self> {
        cfg.validate()?;
        if x0.len() != field.dim() {
            return Err(Error::Domain(format!(
                "state has {} entries, field expects {}",
                x0.len(),
                field.dim()
            )));
        }
        let mut fx = vec![0.0; x0.len()];
        field.eval(x0, &mut fx)?;
        let mut rk = Dop853::new(field);
        rk.evals = 1;
        let h = initial_step(&mut rk, x0, &fx, &cfg)?;
        Ok(Self {
            rk,
            cfg,
            t: 0.0,
            x: x0.to_vec(),
            fx,
            h,
            next: vec![0.0; x0.len()],
            steps: 0,
            rejected: 0,
        })
    }

    /// Advances by one accepted step, not past `t_stop`. Returns the step size taken.
    fn advance(&mut self, t_stop: f64) -> Result<f64> {
        loop {
            let mut h = self.h.min(self.cfg.h_max);
            let last = self.t + h >= t_stop;
            if last {
                h = t_stop - self.t;
            }
            if h <= 1e-14 * self.t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t: self.t, h });
            }
            self.rk.k[0].copy_from_slice(&self.fx);
            let err = match self.rk.step(&self.x, h, &mut self.next, self.cfg.rtol, self.cfg.atol) {
                Ok(e) => e,
                Err(Error::LeafLookup { .. }) | Err(Error::Singular { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            let fac = if err.is_finite() {
                (err.powf(0.125) / 0.9).clamp(1.0 / 6.0, 3.0)
            } else {
                3.0
            };
            if err <= 1.0 {
                if self.cfg.project {
                    self.rk.field.project(&mut self.next);
                }
                std::mem::swap(&mut self.x, &mut self.next);
                self.t = if last { t_stop } else { self.t + h };
                self.rk.field.eval(&self.x, &mut self.fx)?;
                self.rk.evals += 1;
                self.steps += 1;
                let grow = (h / fac).min(self.cfg.h_max);
                if !last || grow < self.h {
                    self.h = grow;
                }
                return Ok(h);
            }
            self.rejected += 1;
            self.h = h / fac;
        }
    }

    /// Single step of size `s` from the current state, without changing it.
    fn probe(&mut self, s: f64, out: &mut [f64]) -> Result<()> {
        self.rk.k[0].copy_from_slice(&self.fx);
        let x = self.x.clone();
        self.rk.step(&x, s, out, self.cfg.rtol, self.cfg.atol)?;
        Ok(())
    }
}

/// Integrates `ẋ = X(x)` over `[0, t_end]`, keeping every accepted state.
pub fn integrate<F: VectorField + ?Sized>(
    field: &F,
    x0: &[f64],
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let mut d = Driver::new(field, x0, *cfg)?;
    let mut tr = Trajectory {
        t: vec![0.0],
        x: vec![x0.to_vec()],
        ..Default::default()
    };
    while d.t < t_end {
        d.advance(t_end)?;
        tr.t.push(d.t);
        tr.x.push(d.x.clone());
    }
    tr.steps = d.steps;
    tr.rejected = d.rejected;
    tr.evals = d.rk.evals;
    Ok(tr)
}

/// Outcome of a closed-orbit search.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitResult {
    pub closed: bool,
    /// Measured period, or the time budget as a lower bound.
    pub period: f64,
    /// Distance of the closing return from `x₀`, or of the best return when not closed.
    pub residual: f64,
    /// Largest relative change of the conserved quantity, when the field has one.
    pub drift: Option<f64>,
    pub steps: usize,
    pub evals: usize,
    /// Section returns inspected.
    pub returns: usize,
    pub wall_time_s: f64,
    #[serde(skip)]
    pub samples: Vec<(f64, Vec<f64>)>,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn angle(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (d / (norm(a) * norm(b))).clamp(-1.0, 1.0).acos()
}

/// Integrates until the orbit returns through the hyperplane at `x₀` normal to `X(x₀)`, inside the
/// closure ball and with matching velocity direction; the crossing time is refined on the last step.
pub fn detect_period<F: VectorField + ?Sized>(field: &F, x0: &[f64], cfg: &IntegratorConfig) -> Result<OrbitResult> {
    let start = Instant::now();
    let mut d = Driver::new(field, x0, *cfg)?;
    let v0 = d.fx.clone();
    let speed = norm(&v0);
    if speed < 1e-14 {
        return Err(Error::Stationary(speed));
    }
    let nrm: Vec<f64> = v0.iter().map(|v| v / speed).collect();
    let side = |x: &[f64]| -> f64 { x.iter().zip(x0).zip(&nrm).map(|((a, b), n)| (a - b) * n).sum() };
    let scale = norm(x0).max(1e-300);
    let eps = cfg.closure_eps * scale;
    let inv0 = field.invariant(x0);
    let mut drift: Option<f64> = inv0.map(|_| 0.0);
    let mut best = f64::INFINITY;
    let mut returns = 0;
    let sample_dt = cfg.t_max / cfg.max_samples.max(1) as f64;
    let mut samples = vec![(0.0, x0.to_vec())];
    let mut next_sample = sample_dt;
    let mut s_prev = 0.0;
    let mut probe = vec![0.0; x0.len()];
    let mut phase = field.slow_phase(x0);
    let mut turned = 0.0f64;
    loop {
        if d.t >= cfg.t_max {
            return Ok(OrbitResult {
                closed: false,
                period: cfg.t_max,
                residual: best,
                drift,
                steps: d.steps,
                evals: d.rk.evals,
                returns,
                wall_time_s: start.elapsed().as_secs_f64(),
                samples,
            });
        }
        let (t_prev, x_prev, f_prev) = (d.t, d.x.clone(), d.fx.clone());
        let h = d.advance(cfg.t_max)?;
        if let (Some(i0), Some(i)) = (inv0, field.invariant(&d.x)) {
            let rel = ((i - i0) / i0.abs().max(1e-300)).abs();
            drift = Some(drift.unwrap_or(0.0).max(rel));
        }
        if let Some(p0) = phase {
            let p = field.slow_phase(&d.x).unwrap_or(p0);
            turned += (p - p0 + PI).rem_euclid(TAU) - PI;
            phase = Some(p);
        }
        if d.t >= next_sample {
            samples.push((d.t, d.x.clone()));
            next_sample += sample_dt;
        }
        let s_new = side(&d.x);
        let crossed = s_prev < 0.0 && s_new >= 0.0;
        s_prev = s_new;
        if !crossed {
            continue;
        }
        // Cheap screen before refining: the crossing lies within one step of both ends.
        let near = norm(&d.x.iter().zip(x0).map(|(a, b)| a - b).collect::<Vec<_>>());
        if near > 2.0 * speed * h + 10.0 * eps {
            continue;
        }
        returns += 1;
        // Refine the crossing with sub-steps from the previous state.
        let (saved_t, saved_x, saved_f) = (d.t, d.x.clone(), d.fx.clone());
        d.t = t_prev;
        d.x = x_prev;
        d.fx = f_prev;
        let s0 = side(&d.x);
        let (mut a, mut b) = (0.0, h);
        let (mut ga, mut gb) = (s0, s_new);
        let mut sigma = h;
        for it in 0..60 {
            sigma = if it % 3 == 2 {
                0.5 * (a + b)
            } else {
                a - ga * (b - a) / (gb - ga)
            };
            if !(sigma > a && sigma < b) {
                sigma = 0.5 * (a + b);
            }
            d.probe(sigma, &mut probe)?;
            let g = side(&probe);
            if g < 0.0 {
                a = sigma;
                ga = g;
            } else {
                b = sigma;
                gb = g;
            }
            if g.abs() <= 1e-15 * scale || b - a <= 1e-15 * (t_prev + h) {
                break;
            }
        }
        let tc = t_prev + sigma;
        let dist = norm(&probe.iter().zip(x0).map(|(a, b)| a - b).collect::<Vec<_>>());
        let mut fc = vec![0.0; probe.len()];
        field.eval(&probe, &mut fc)?;
        let dir = angle(&fc, &v0);
        best = best.min(dist);
        d.t = saved_t;
        d.x = saved_x;
        d.fx = saved_f;
        if dist <= eps && dir <= cfg.direction_tol && (phase.is_none() || turned.abs() >= PI) {
            samples.push((tc, probe.clone()));
            return Ok(OrbitResult {
                closed: true,
                period: tc,
                residual: dist,
                drift,
                steps: d.steps,
                evals: d.rk.evals,
                returns,
                wall_time_s: start.elapsed().as_secs_f64(),
                samples,
            });
        }
    }
}

/// One grid point of a scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanPoint {
    pub param: f64,
    pub period: f64,
    pub closed: bool,
    pub residual: f64,
    pub steps: usize,
    pub wall_time_s: f64,
    pub error: Option<String>,
}

/// Periods over a parameter grid.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodScan {
    pub points: Vec<ScanPoint>,
    /// Slope of `ln T` against the parameter over points with a period or bound.
    pub growth_exponent: f64,
    /// Indices `i` with `T[i+1] <= T[i]`.
    pub monotonicity_violations: Vec<usize>,
}

impl PeriodScan {
    pub fn strictly_increasing(&self) -> bool {
        self.monotonicity_violations.is_empty() && self.points.iter().all(|p| p.error.is_none())
    }
}

/// Initial state and field for one grid value.
pub type FamilyMember = (Box<dyn VectorField + Send>, Vec<f64>);

/// Runs [`detect_period`] over `grid` in parallel and merges results in grid order.
pub fn period_scan<G>(family: G, grid: &[f64], cfg: &IntegratorConfig) -> Result<PeriodScan>
where
    G: Fn(f64) -> Result<FamilyMember> + Sync,
{
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("grid must be non-empty and strictly increasing".into()));
    }
    let points: Vec<ScanPoint> = grid
        .par_iter()
        .map(|&param| {
            let start = Instant::now();
            let run = family(param).and_then(|(f, x0)| detect_period(f.as_ref(), &x0, cfg));
            match run {
                Ok(r) => ScanPoint {
                    param,
                    period: r.period,
                    closed: r.closed,
                    residual: r.residual,
                    steps: r.steps,
                    wall_time_s: start.elapsed().as_secs_f64(),
                    error: None,
                },
                Err(e) => ScanPoint {
                    param,
                    period: f64::NAN,
                    closed: false,
                    residual: f64::NAN,
                    steps: 0,
                    wall_time_s: start.elapsed().as_secs_f64(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let ok: Vec<&ScanPoint> = points.iter().filter(|p| p.period.is_finite()).collect();
    let growth_exponent = if ok.len() >= 2 {
        let x: Vec<f64> = ok.iter().map(|p| p.param).collect();
        let y: Vec<f64> = ok.iter().map(|p| p.period).collect();
        crate::sullivan_field::log_slope(&x, &y)
    } else {
        f64::NAN
    };
    let monotonicity_violations = points
        .windows(2)
        .enumerate()
        .filter(|(_, w)| !(w[1].period > w[0].period))
        .map(|(i, _)| i)
        .collect();
    Ok(PeriodScan {
        points,
        growth_exponent,
        monotonicity_violations,
    })
}

/// [`crate::sullivan_field::SullivanField`] on `R⁹ ⊃ M`.
impl VectorField for crate::sullivan_field::SullivanField {
    fn dim(&self) -> usize {
        9
    }
    fn eval(&self, x: &[f64], dx: &mut [f64]) -> Result<()> {
        let p = crate::geom_core::FramePoint::from_slice(x);
        dx.copy_from_slice(&self.eval(&p)?.to_array());
        Ok(())
    }
    fn project(&self, x: &mut [f64]) {
        let p = crate::geom_core::FramePoint::from_slice(x).project();
        x.copy_from_slice(&p.to_array());
    }
    /// Fibre angle `ψ`, when the field is not pure Hopf.
    fn slow_phase(&self, x: &[f64]) -> Option<f64> {
        (self.weight() > 0.0).then(|| crate::geom_core::FramePoint::from_slice(x).fibre_angle())
    }
}
