//! Arc length of a closed curve made of `m` loops `t ∈ [2π n, 2π (n+1)]`.
//!
//! Loops `1..p` are congruent and share one table. Tail loops `p..m-1` are summed directly when
//! `m` is moderate and through a smooth fit of the loop length plus Euler-Maclaurin otherwise.
//! Loops `0` and `m-1` carry the seam blend and always have their own table.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::{Arc, Mutex};

use crate::cheb::{fit_adaptive, Cheb};

/// Loop count up to which tail loops are summed one by one.
pub(crate) const DIRECT_MAX: f64 = 1024.0;
const NODES: usize = 24;
const TOL: f64 = 1e-14;
const DEPTH: u32 = 8;
const CACHE_CAP: usize = 4096;

/// Speed `|γ'(2π n + τ)|`; `blend = false` evaluates the unblended analytic branch.
pub(crate) type SpeedFn<'a> = dyn Fn(f64, f64, bool) -> f64 + Sync + 'a;

/// Piecewise Chebyshev speed and its running integral on one loop.
#[derive(Debug, Clone)]
pub(crate) struct LoopTable {
    speed: Vec<Cheb>,
    anti: Vec<Cheb>,
    offset: Vec<f64>,
    total: f64,
}

impl LoopTable {
    pub(crate) fn build(f: impl Fn(f64) -> f64) -> Self {
        let speed = fit_adaptive(0.0, TAU, NODES, TOL, DEPTH, &f);
        let anti: Vec<Cheb> = speed.iter().map(Cheb::antiderivative).collect();
        let mut offset = Vec::with_capacity(speed.len());
        let mut acc = 0.0;
        for c in &speed {
            offset.push(acc);
            acc += c.integral();
        }
        Self {
            speed,
            anti,
            offset,
            total: acc,
        }
    }

    pub(crate) fn length(&self) -> f64 {
        self.total
    }

    /// Arc length from the loop start to `τ`.
    pub(crate) fn arc(&self, tau: f64) -> f64 {
        let k = self
            .speed
            .partition_point(|c| c.interval().1 < tau)
            .min(self.speed.len() - 1);
        self.offset[k] + self.anti[k].eval(tau)
    }

    /// Inverse of [`LoopTable::arc`].
    pub(crate) fn tau_of(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.total);
        let k = self.offset.partition_point(|&o| o <= s).saturating_sub(1);
        let (a, b) = self.speed[k].interval();
        let target = s - self.offset[k];
        let piece_len = if k + 1 < self.offset.len() {
            self.offset[k + 1] - self.offset[k]
        } else {
            self.total - self.offset[k]
        };
        let (mut lo, mut hi) = (a, b);
        let mut x = a + (b - a) * (target / piece_len).clamp(0.0, 1.0);
        for _ in 0..100 {
            let r = self.anti[k].eval(x) - target;
            if r == 0.0 {
                break;
            }
            if r > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let step = r / self.speed[k].eval(x);
            let next = x - step;
            let next = if (lo..=hi).contains(&next) {
                next
            } else {
                0.5 * (lo + hi)
            };
            let done = (next - x).abs() <= 1e-16 * (1.0 + x.abs());
            x = next;
            if done {
                break;
            }
        }
        x
    }
}

#[derive(Debug, Clone)]
enum Tail {
    /// `cum[k]` = length of tail loops `p .. p + k`.
    Direct(Vec<f64>),
    /// Smooth fit of the unblended loop length `L(x)` on `[p, m - 1]`.
    Asymptotic {
        fit: Vec<Cheb>,
        anti: Vec<Cheb>,
        offset: Vec<f64>,
        deriv: Vec<Cheb>,
    },
}

/// Cumulative arc length over loops with lookup tables.
#[derive(Debug)]
pub(crate) struct ArcLength {
    m: f64,
    p: f64,
    first: Arc<LoopTable>,
    reference: Arc<LoopTable>,
    last: Arc<LoopTable>,
    tail: Tail,
    tail_start: f64,
    last_start: f64,
    total: f64,
    cache: Mutex<HashMap<u64, Arc<LoopTable>>>,
}

impl Clone for ArcLength {
    fn clone(&self) -> Self {
        Self {
            m: self.m,
            p: self.p,
            first: self.first.clone(),
            reference: self.reference.clone(),
            last: self.last.clone(),
            tail: self.tail.clone(),
            tail_start: self.tail_start,
            last_start: self.last_start,
            total: self.total,
            cache: Mutex::new(HashMap::new()),
        }
    }
}

fn piecewise_eval(pieces: &[Cheb], x: f64) -> f64 {
    let k = pieces.partition_point(|c| c.interval().1 < x).min(pieces.len() - 1);
    pieces[k].eval(x)
}

impl ArcLength {
    /// `m` loops; loops `1..p` are congruent to loop 1 (`1 ≤ p ≤ m - 1`).
    pub(crate) fn build(m: f64, p: f64, speed: &SpeedFn<'_>, direct_max: f64) -> Self {
        let p = p.clamp(1.0, (m - 1.0).max(1.0));
        let table = |n: f64, blend: bool| LoopTable::build(|tau| speed(n, tau, blend));
        let first = Arc::new(table(0.0, true));
        let last = if m > 1.0 {
            Arc::new(table(m - 1.0, true))
        } else {
            first.clone()
        };
        let reference = if p > 1.0 {
            Arc::new(table(1.0, false))
        } else {
            first.clone()
        };
        let tail_start = if m > 1.0 {
            first.length() + (p - 1.0) * reference.length()
        } else {
            0.0
        };
        let tail = if m <= direct_max {
            let mut cum = Vec::with_capacity((m - 1.0 - p).max(0.0) as usize + 1);
            let mut acc = 0.0;
            cum.push(0.0);
            let mut n = p;
            while n < m - 1.0 {
                acc += table(n, false).length();
                cum.push(acc);
                n += 1.0;
            }
            Tail::Direct(cum)
        } else {
            let len = |x: f64| table(x, false).length();
            let fit = fit_adaptive(p, m - 1.0, NODES, 1e-13, 10, &len);
            let anti: Vec<Cheb> = fit.iter().map(Cheb::antiderivative).collect();
            let deriv: Vec<Cheb> = fit.iter().map(Cheb::derivative).collect();
            let mut offset = Vec::with_capacity(fit.len());
            let mut acc = 0.0;
            for c in &fit {
                offset.push(acc);
                acc += c.integral();
            }
            Tail::Asymptotic {
                fit,
                anti,
                offset,
                deriv,
            }
        };
        let mut out = Self {
            m,
            p,
            first,
            reference,
            last: last.clone(),
            tail,
            tail_start,
            last_start: 0.0,
            total: 0.0,
            cache: Mutex::new(HashMap::new()),
        };
        out.last_start = if m > 1.0 {
            tail_start + out.tail_sum(m - 1.0)
        } else {
            0.0
        };
        out.total = if m > 1.0 {
            out.last_start + last.length()
        } else {
            out.first.length()
        };
        out
    }

    pub(crate) fn total(&self) -> f64 {
        self.total
    }

    /// Length of tail loops `p .. n`.
    fn tail_sum(&self, n: f64) -> f64 {
        match &self.tail {
            Tail::Direct(cum) => cum[((n - self.p).max(0.0) as usize).min(cum.len() - 1)],
            Tail::Asymptotic {
                fit,
                anti,
                offset,
                deriv,
            } => {
                if n <= self.p {
                    return 0.0;
                }
                let integral = |x: f64| {
                    let k = fit.partition_point(|c| c.interval().1 < x).min(fit.len() - 1);
                    offset[k] + anti[k].eval(x)
                };
                let f = |x: f64| piecewise_eval(fit, x);
                let d = |x: f64| piecewise_eval(deriv, x);
                integral(n) - 0.5 * (f(n) - f(self.p)) + (d(n) - d(self.p)) / 12.0
            }
        }
    }

    /// Arc length at the start of loop `n`.
    pub(crate) fn loop_start(&self, n: f64) -> f64 {
        if n <= 0.0 {
            0.0
        } else if n <= self.p {
            self.first.length() + (n - 1.0) * self.reference.length()
        } else if n < self.m - 1.0 {
            self.tail_start + self.tail_sum(n)
        } else {
            self.last_start
        }
    }

    fn locate(&self, l: f64) -> f64 {
        if self.m <= 1.0 || l < self.first.length() {
            return 0.0;
        }
        if l >= self.last_start {
            return self.m - 1.0;
        }
        if l < self.tail_start {
            let n = 1.0 + ((l - self.first.length()) / self.reference.length()).floor();
            return n.clamp(1.0, self.p - 1.0);
        }
        let (mut lo, mut hi) = (self.p, self.m - 1.0);
        while hi - lo > 1.0 {
            let mid = (0.5 * (lo + hi)).floor();
            if self.loop_start(mid) <= l {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Loop table of loop `n`, built on demand for tail loops.
    pub(crate) fn table(&self, n: f64, speed: &SpeedFn<'_>) -> Arc<LoopTable> {
        if n <= 0.0 {
            return self.first.clone();
        }
        if n >= self.m - 1.0 {
            return self.last.clone();
        }
        if n < self.p {
            return self.reference.clone();
        }
        let key = n as u64;
        if let Some(t) = self.cache.lock().expect("cache lock").get(&key) {
            return t.clone();
        }
        let t = Arc::new(LoopTable::build(|tau| speed(n, tau, false)));
        let mut cache = self.cache.lock().expect("cache lock");
        if cache.len() >= CACHE_CAP {
            cache.clear();
        }
        cache.insert(key, t.clone());
        t
    }

    /// `(n, τ)` with arc length `l` (reduced mod the total length).
    pub(crate) fn param_of(&self, l: f64, speed: &SpeedFn<'_>) -> (f64, f64) {
        let l = l.rem_euclid(self.total);
        let n = self.locate(l);
        let t = self.table(n, speed);
        (n, t.tau_of(l - self.loop_start(n)))
    }

    /// Arc length at `(n, τ)`.
    pub(crate) fn arc_of(&self, n: f64, tau: f64, speed: &SpeedFn<'_>) -> f64 {
        self.loop_start(n) + self.table(n, speed).arc(tau)
    }

    pub(crate) fn pure_end(&self) -> f64 {
        self.p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model(m: f64) -> impl Fn(f64, f64, bool) -> f64 + Sync {
        move |n: f64, tau: f64, _| {
            let drift = if n < m / 2.0 {
                0.0
            } else {
                0.1 * ((n - m / 2.0) / m).powi(2)
            };
            1.0 + 0.3 * tau.sin() + drift * (1.0 + 0.5 * tau.cos())
        }
    }

    fn exact_loop(m: f64, n: f64) -> f64 {
        let drift = if n < m / 2.0 {
            0.0
        } else {
            0.1 * ((n - m / 2.0) / m).powi(2)
        };
        TAU * (1.0 + drift)
    }

    #[test]
    fn loop_table_inverts() {
        let t = LoopTable::build(|x| 1.0 + 0.5 * x.sin());
        assert_relative_eq!(t.length(), TAU, max_relative = 1e-14);
        for s in [0.0, 0.3, 2.0, 5.9] {
            let tau = t.tau_of(s);
            assert_relative_eq!(tau - 0.5 * tau.cos() + 0.5, s, epsilon = 1e-13);
            assert_relative_eq!(t.arc(tau), s, epsilon = 1e-13);
        }
    }

    #[test]
    fn direct_totals_match_sum() {
        let m = 200.0;
        let f = model(m);
        let a = ArcLength::build(m, m / 2.0, &f, f64::INFINITY);
        let exact: f64 = (0..200).map(|n| exact_loop(m, n as f64)).sum();
        assert_relative_eq!(a.total(), exact, max_relative = 1e-13);
        for l in [0.1, 50.0, 700.0, 1200.0] {
            let (n, tau) = a.param_of(l, &f);
            assert_relative_eq!(a.arc_of(n, tau, &f), l, max_relative = 1e-13);
        }
    }

    #[test]
    fn asymptotic_tail_matches_direct() {
        let m = 3000.0;
        let f = model(m);
        let d = ArcLength::build(m, m / 2.0, &f, f64::INFINITY);
        let e = ArcLength::build(m, m / 2.0, &f, 0.0);
        assert_relative_eq!(d.total(), e.total(), max_relative = 1e-12);
        for n in [1600.0, 2000.0, 2999.0] {
            assert_relative_eq!(d.loop_start(n), e.loop_start(n), max_relative = 1e-12);
        }
        let (n, _) = e.param_of(d.loop_start(2500.0) + 1.0, &f);
        assert_eq!(n, 2500.0);
    }
}
