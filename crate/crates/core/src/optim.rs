//! Limited-memory BFGS with a backtracking Armijo line search.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LbfgsSettings {
    pub memory: usize,
    /// Stop when the largest gradient component falls below this.
    pub grad_tol: f64,
    /// Also stop when an accepted step lowers the value by less than this fraction.
    pub rel_decrease_tol: f64,
    pub max_iter: usize,
}

impl Default for LbfgsSettings {
    fn default() -> Self {
        Self { memory: 10, grad_tol: 1e-8, rel_decrease_tol: 1e-15, max_iter: 1000 }
    }
}

#[derive(Debug, Clone)]
pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Minimizes `f`, which writes the gradient into its second argument and returns the value.
pub fn lbfgs<F>(mut f: F, x0: Vec<f64>, settings: LbfgsSettings) -> Result<LbfgsResult>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let dim = x0.len();
    let mut x = x0;
    let mut g = vec![0.0; dim];
    let mut value = f(&x, &mut g);
    if !value.is_finite() {
        return Err(Error::Domain("objective is not finite at the starting point".into()));
    }
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(settings.memory);
    let mut x_new = vec![0.0; dim];
    let mut g_new = vec![0.0; dim];
    for iter in 0..settings.max_iter {
        let gn = max_abs(&g);
        if gn <= settings.grad_tol {
            return Ok(LbfgsResult { x, value, grad_norm: gn, iterations: iter });
        }
        // Two-loop recursion.
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &d);
            d.iter_mut().zip(y).for_each(|(di, yi)| *di -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            let scale = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|v| *v *= scale);
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            d.iter_mut().zip(s).for_each(|(di, si)| *di += (a - b) * si);
        }
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            history.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let mut step = if history.is_empty() { 1.0 / max_abs(&d).max(1.0) } else { 1.0 };
        let mut accepted = false;
        for _ in 0..60 {
            x_new.iter_mut().zip(&x).zip(&d).for_each(|((xn, xi), di)| *xn = xi + step * di);
            let v = f(&x_new, &mut g_new);
            if v.is_finite() && v <= value + 1e-4 * step * slope {
                let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &y);
                if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
                    if history.len() == settings.memory {
                        history.pop_front();
                    }
                    history.push_back((s, y, 1.0 / sy));
                }
                std::mem::swap(&mut x, &mut x_new);
                std::mem::swap(&mut g, &mut g_new);
                let stalled = value - v <= settings.rel_decrease_tol * value.abs().max(v.abs()).max(1.0);
                value = v;
                if stalled && history.len() > 1 {
                    return Ok(LbfgsResult { x, value, grad_norm: max_abs(&g), iterations: iter + 1 });
                }
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // No decrease possible at machine precision.
            let gn = max_abs(&g);
            return Ok(LbfgsResult { x, value, grad_norm: gn, iterations: iter });
        }
    }
    let gn = max_abs(&g);
    if gn <= settings.grad_tol {
        return Ok(LbfgsResult { x, value, grad_norm: gn, iterations: settings.max_iter });
    }
    Err(Error::Convergence { iterations: settings.max_iter, last: gn })
}
