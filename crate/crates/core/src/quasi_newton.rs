//! BFGS maximization of smooth functions in a small fixed dimension.

use crate::{Error, Result};

const ARMIJO: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const INITIAL_STEP: f64 = 1.0;
const MAX_BACKTRACKS: usize = 80;
const EXPAND: f64 = 2.0;
const MAX_EXPANSIONS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The last step changed no component by more than the stop threshold.
    StepBelowThreshold,
    /// The line search found no point with a larger value. The current point
    /// is kept, so the last step is zero.
    NoProgress,
    IterationCap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerResult<const N: usize> {
    pub point: [f64; N],
    pub value: f64,
    pub gradient: [f64; N],
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
}

/// Maximizes `objective`, which returns the value and gradient at a point.
///
/// Iterates until no component of the step exceeds `stop_delta` in absolute
/// value, or `max_iterations` steps have been taken, in which case the result
/// is flagged as not converged. Points where the objective is not finite are
/// rejected by the line search. Fails only if the start point itself is not
/// finite.
pub fn maximize<const N: usize, F>(
    mut objective: F,
    start: [f64; N],
    stop_delta: f64,
    max_iterations: usize,
) -> Result<OptimizerResult<N>>
where
    F: FnMut(&[f64; N]) -> (f64, [f64; N]),
{
    let (mut value, mut grad) = objective(&start);
    if !is_finite(value, &grad) || start.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericOverflow("objective at the start point"));
    }
    let mut x = start;
    let mut inv_hessian = identity::<N>();
    let mut iterations = 0;

    while iterations < max_iterations {
        iterations += 1;
        let mut dir = mat_vec(&inv_hessian, &grad);
        let mut slope = dot(&grad, &dir);
        if !(slope > 0.0) {
            inv_hessian = identity();
            dir = grad;
            slope = dot(&grad, &grad);
        }
        if slope == 0.0 {
            return Ok(done(x, value, grad, iterations, Termination::StepBelowThreshold));
        }

        let mut step = INITIAL_STEP;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: [f64; N] = std::array::from_fn(|i| x[i] + step * dir[i]);
            let (v, g) = objective(&trial);
            if is_finite(v, &g) && v > value && v >= value + ARMIJO * step * slope {
                accepted = Some((trial, v, g));
                break;
            }
            step *= BACKTRACK;
        }
        let Some((mut trial, mut v, mut g)) = accepted else {
            return Ok(done(x, value, grad, iterations, Termination::NoProgress));
        };
        // extend an accepted full step while the value keeps rising
        if step == INITIAL_STEP {
            for _ in 0..MAX_EXPANSIONS {
                step *= EXPAND;
                let wider: [f64; N] = std::array::from_fn(|i| x[i] + step * dir[i]);
                let (vw, gw) = objective(&wider);
                if !(is_finite(vw, &gw) && vw > v && vw >= value + ARMIJO * step * slope) {
                    break;
                }
                (trial, v, g) = (wider, vw, gw);
            }
        }

        let s: [f64; N] = std::array::from_fn(|i| trial[i] - x[i]);
        // curvature of -f along the step
        let y: [f64; N] = std::array::from_fn(|i| grad[i] - g[i]);
        x = trial;
        value = v;
        grad = g;
        if s.iter().all(|d| d.abs() <= stop_delta) {
            return Ok(done(x, value, grad, iterations, Termination::StepBelowThreshold));
        }
        let sy = dot(&s, &y);
        if sy > 0.0 {
            bfgs_update(&mut inv_hessian, &s, &y, sy);
        }
    }
    Ok(OptimizerResult {
        point: x,
        value,
        gradient: grad,
        iterations,
        converged: false,
        termination: Termination::IterationCap,
    })
}

fn done<const N: usize>(
    point: [f64; N],
    value: f64,
    gradient: [f64; N],
    iterations: usize,
    termination: Termination,
) -> OptimizerResult<N> {
    OptimizerResult { point, value, gradient, iterations, converged: true, termination }
}

fn is_finite<const N: usize>(v: f64, g: &[f64; N]) -> bool {
    v.is_finite() && g.iter().all(|c| c.is_finite())
}

fn identity<const N: usize>() -> [[f64; N]; N] {
    std::array::from_fn(|i| std::array::from_fn(|j| if i == j { 1.0 } else { 0.0 }))
}

fn dot<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mat_vec<const N: usize>(m: &[[f64; N]; N], v: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| dot(&m[i], v))
}

/// `H <- (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ` with `ρ = 1 / sᵀy`.
fn bfgs_update<const N: usize>(h: &mut [[f64; N]; N], s: &[f64; N], y: &[f64; N], sy: f64) {
    let rho = 1.0 / sy;
    let hy = mat_vec(h, y);
    let yhy = dot(y, &hy);
    let factor = (1.0 + rho * yhy) * rho;
    for i in 0..N {
        for j in 0..N {
            h[i][j] += factor * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}
