//! Limited-memory BFGS with a backtracking Armijo line search.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsConfig {
    pub memory: usize,
    pub max_iterations: usize,
    pub grad_tol: f64,
    /// Stop when `|f_k - f_{k+1}| <= f_rel_tol * max(|f_k|, 1)`.
    pub f_rel_tol: f64,
    pub max_line_search: usize,
    pub armijo: f64,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self { memory: 10, max_iterations: 500, grad_tol: 1e-6, f_rel_tol: 1e-12, max_line_search: 40, armijo: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LbfgsStatus {
    GradientTolerance,
    FunctionTolerance,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone)]
pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub status: LbfgsStatus,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Minimizes `f`, which returns the objective and writes the gradient into
/// its second argument. Every accepted step decreases the objective.
pub fn minimize<F>(mut f: F, x0: &[f64], cfg: &LbfgsConfig) -> Result<LbfgsResult>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    if !fx.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("objective is not finite at the starting point".into()));
    }
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(cfg.memory);
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut dir = vec![0.0; n];
    let mut alpha_buf = vec![0.0; cfg.memory];

    for iter in 0..cfg.max_iterations {
        let gn = norm(&g);
        if gn <= cfg.grad_tol {
            return Ok(LbfgsResult { x, f: fx, grad_norm: gn, iterations: iter, status: LbfgsStatus::GradientTolerance });
        }

        // Two-loop recursion.
        dir.iter_mut().zip(&g).for_each(|(d, gi)| *d = -gi);
        for (k, (s, y, rho)) in history.iter().enumerate().rev() {
            let a = rho * dot(s, &dir);
            alpha_buf[k] = a;
            dir.iter_mut().zip(y).for_each(|(d, yi)| *d -= a * yi);
        }
        let gamma = match history.back() {
            Some((s, y, _)) => dot(s, y) / dot(y, y),
            None => 1.0 / gn.max(1.0),
        };
        dir.iter_mut().for_each(|d| *d *= gamma);
        for (k, (s, y, rho)) in history.iter().enumerate() {
            let b = rho * dot(y, &dir);
            dir.iter_mut().zip(s).for_each(|(d, si)| *d += (alpha_buf[k] - b) * si);
        }
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            history.clear();
            dir.iter_mut().zip(&g).for_each(|(d, gi)| *d = -gi / gn.max(1.0));
            slope = dot(&g, &dir);
        }

        let mut step = 1.0;
        let mut accepted = false;
        let mut f_new = f64::INFINITY;
        for _ in 0..cfg.max_line_search {
            for k in 0..n {
                x_new[k] = x[k] + step * dir[k];
            }
            f_new = f(&x_new, &mut g_new);
            if f_new.is_finite() && f_new <= fx + cfg.armijo * step * slope && g_new.iter().all(|v| v.is_finite()) {
                accepted = true;
                break;
            }
            let next = if f_new.is_finite() {
                // Minimizer of the quadratic through f(0), f'(0) and f(step).
                let q = -slope * step * step / (2.0 * (f_new - fx - slope * step));
                q.clamp(0.1 * step, 0.5 * step)
            } else {
                0.1 * step
            };
            step = next;
        }
        if !accepted {
            return Ok(LbfgsResult { x, f: fx, grad_norm: gn, iterations: iter, status: LbfgsStatus::LineSearchFailed });
        }

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 {
            if history.len() == cfg.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let f_old = fx;
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        fx = f_new;
        if (f_old - fx).abs() <= cfg.f_rel_tol * f_old.abs().max(1.0) {
            return Ok(LbfgsResult {
                grad_norm: norm(&g),
                x,
                f: fx,
                iterations: iter + 1,
                status: LbfgsStatus::FunctionTolerance,
            });
        }
    }
    Ok(LbfgsResult { grad_norm: norm(&g), x, f: fx, iterations: cfg.max_iterations, status: LbfgsStatus::MaxIterations })
}
