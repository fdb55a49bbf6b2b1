//! Limited-memory BFGS with a strong-Wolfe line search.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizeConfig {
    /// Stop when the Euclidean gradient norm falls to this value.
    pub grad_tol: f64,
    /// Stop when an accepted step lowers `f` by no more than this.
    pub f_tol: f64,
    pub max_iters: usize,
    /// Number of curvature pairs kept.
    pub history_size: usize,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            grad_tol: 1e-6,
            f_tol: 1e-10,
            max_iters: 500,
            history_size: 10,
        }
    }
}

impl OptimizeConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.grad_tol > 0.0 && self.f_tol > 0.0 && self.max_iters > 0 && self.history_size > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config("optimizer tolerances and limits must be positive".into()))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizeResult {
    pub x_star: Vec<f64>,
    pub f_star: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;
const MAX_LINE_EVALS: usize = 40;

struct Point {
    x: Vec<f64>,
    f: f64,
    g: Vec<f64>,
}

struct Evaluator<F> {
    objective: F,
    evaluations: usize,
}

impl<F> Evaluator<F>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    fn eval(&mut self, x: Vec<f64>) -> Result<Point> {
        self.evaluations += 1;
        let (f, g) = (self.objective)(&x);
        if !f.is_finite() || g.len() != x.len() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { x });
        }
        Ok(Point { x, f, g })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Minimizes `objective`, which returns `(f, grad f)`.
///
/// Every accepted step satisfies the sufficient-decrease condition, so the
/// returned `f_star` never exceeds `f(x0)`.
pub fn minimize<F>(objective: F, x0: &[f64], config: &OptimizeConfig) -> Result<OptimizeResult>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    config.validate()?;
    let mut ev = Evaluator {
        objective,
        evaluations: 0,
    };
    let mut cur = ev.eval(x0.to_vec())?;
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iterations = 0;
    let mut converged = norm(&cur.g) <= config.grad_tol;

    while !converged && iterations < config.max_iters {
        iterations += 1;
        let mut d = two_loop(&cur.g, &history);
        let mut slope = dot(&cur.g, &d);
        if slope >= 0.0 {
            history.clear();
            d = cur.g.iter().map(|v| -v).collect();
            slope = dot(&cur.g, &d);
        }
        let first_step = if history.is_empty() {
            (1.0 / norm(&cur.g)).min(1.0)
        } else {
            1.0
        };
        let next = match line_search(&mut ev, &cur, &d, slope, first_step)? {
            Some(p) => p,
            None => {
                if history.is_empty() {
                    break;
                }
                // Retry once along steepest descent with fresh memory.
                history.clear();
                let sd: Vec<f64> = cur.g.iter().map(|v| -v).collect();
                let s = dot(&cur.g, &sd);
                match line_search(&mut ev, &cur, &sd, s, (1.0 / norm(&cur.g)).min(1.0))? {
                    Some(p) => p,
                    None => break,
                }
            }
        };
        let s: Vec<f64> = next.x.iter().zip(&cur.x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = next.g.iter().zip(&cur.g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > f64::EPSILON * dot(&y, &y) {
            if history.len() == config.history_size {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let decrease = cur.f - next.f;
        cur = next;
        if norm(&cur.g) <= config.grad_tol || decrease <= config.f_tol {
            converged = true;
        }
    }

    Ok(OptimizeResult {
        grad_norm: norm(&cur.g),
        f_star: cur.f,
        x_star: cur.x,
        iterations,
        evaluations: ev.evaluations,
        converged,
    })
}

fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter().map(|v| -v).collect()
}

fn step_to(cur: &Point, d: &[f64], alpha: f64) -> Vec<f64> {
    cur.x.iter().zip(d).map(|(x, di)| x + alpha * di).collect()
}

/// Strong-Wolfe bracketing and zoom. Returns `None` when no point with
/// sufficient decrease was found.
fn line_search<F>(
    ev: &mut Evaluator<F>,
    cur: &Point,
    d: &[f64],
    slope0: f64,
    alpha0: f64,
) -> Result<Option<Point>>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let armijo = |alpha: f64, f: f64| f <= cur.f + C1 * alpha * slope0;
    let mut prev_alpha = 0.0;
    let mut prev_f = cur.f;
    let mut prev_slope = slope0;
    let mut alpha = alpha0;
    let mut best: Option<Point> = None;

    for i in 0..MAX_LINE_EVALS {
        let p = ev.eval(step_to(cur, d, alpha))?;
        let slope = dot(&p.g, d);
        if !armijo(alpha, p.f) || (i > 0 && p.f >= prev_f) {
            let lo = Bracket { alpha: prev_alpha, f: prev_f, slope: prev_slope };
            let hi = Bracket { alpha, f: p.f, slope };
            return zoom(ev, cur, d, slope0, lo, hi, best);
        }
        if slope.abs() <= -C2 * slope0 {
            return Ok(Some(p));
        }
        if slope >= 0.0 {
            let lo = Bracket { alpha, f: p.f, slope };
            let hi = Bracket { alpha: prev_alpha, f: prev_f, slope: prev_slope };
            return zoom(ev, cur, d, slope0, lo, hi, Some(p));
        }
        prev_alpha = alpha;
        prev_f = p.f;
        prev_slope = slope;
        best = Some(p);
        alpha *= 2.0;
    }
    Ok(best)
}

#[derive(Clone, Copy)]
struct Bracket {
    alpha: f64,
    f: f64,
    slope: f64,
}

fn cubic_min(a: Bracket, b: Bracket) -> Option<f64> {
    let d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    let disc = d1 * d1 - a.slope * b.slope;
    if disc < 0.0 {
        return None;
    }
    let d2 = libm::copysign(libm::sqrt(disc), b.alpha - a.alpha);
    let denom = b.slope - a.slope + 2.0 * d2;
    if denom == 0.0 {
        return None;
    }
    let t = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom;
    t.is_finite().then_some(t)
}

// `lo` always satisfies sufficient decrease (or is the start point);
// `best` carries the evaluated point at `lo`, if any.
fn zoom<F>(
    ev: &mut Evaluator<F>,
    cur: &Point,
    d: &[f64],
    slope0: f64,
    mut lo: Bracket,
    mut hi: Bracket,
    mut best: Option<Point>,
) -> Result<Option<Point>>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    for _ in 0..MAX_LINE_EVALS {
        let (left, right) = if lo.alpha < hi.alpha { (lo.alpha, hi.alpha) } else { (hi.alpha, lo.alpha) };
        let width = right - left;
        if width <= f64::EPSILON * right.abs().max(1.0) {
            break;
        }
        let margin = 0.1 * width;
        let alpha = match cubic_min(lo, hi) {
            Some(a) if a > left + margin && a < right - margin => a,
            _ => 0.5 * (lo.alpha + hi.alpha),
        };
        let p = ev.eval(step_to(cur, d, alpha))?;
        let slope = dot(&p.g, d);
        if p.f > cur.f + C1 * alpha * slope0 || p.f >= lo.f {
            hi = Bracket { alpha, f: p.f, slope };
        } else {
            if slope.abs() <= -C2 * slope0 {
                return Ok(Some(p));
            }
            if slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = Bracket { alpha, f: p.f, slope };
            best = Some(p);
        }
    }
    Ok(best.filter(|p| p.f < cur.f))
}
