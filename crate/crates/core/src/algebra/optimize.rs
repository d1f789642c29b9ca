//! Levenberg–Marquardt least squares with a central-difference Jacobian, and a
//! seeded multistart driver on top of it.

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::restart_rng;

pub const DEFAULT_OPTIMIZE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    /// Stop as soon as `||f(x)||_2 <= tol`.
    pub tol: f64,
    pub max_iterations: usize,
    /// Relative step size below which the search is declared stalled.
    pub step_tol: f64,
    /// Sup-norm of `J^T r` below which the search is declared stalled.
    pub gradient_tol: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_OPTIMIZE_TOL,
            max_iterations: 200,
            step_tol: 1e-15,
            gradient_tol: 1e-30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
    Stalled,
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeResult {
    pub argmin: Vec<f64>,
    pub residual_norm: f64,
    pub initial_residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
}

fn all_finite(v: &DVector<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn jacobian<F>(f: &F, x: &DVector<f64>, rows: usize) -> DMatrix<f64>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let mut jac = DMatrix::zeros(rows, x.len());
    let mut probe = x.clone();
    for i in 0..x.len() {
        let h = 1e-6 * (1.0 + x[i].abs());
        probe[i] = x[i] + h;
        let plus = f(&probe);
        probe[i] = x[i] - h;
        let minus = f(&probe);
        probe[i] = x[i];
        let col = (plus - minus) / (2.0 * h);
        jac.set_column(i, &col);
    }
    jac
}

/// Minimizes `||f(x)||_2` from `x0`.
///
/// Damping follows Nielsen's update rule. Accepted steps strictly decrease the
/// residual norm, so the returned norm never exceeds the initial one.
pub fn minimize_residual<F>(f: F, x0: &DVector<f64>, opts: &MinimizeOptions) -> MinimizeResult
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let mut x = x0.clone();
    let mut r = f(&x);
    let initial = r.norm();
    let finish = |x: &DVector<f64>, norm: f64, iterations, termination| MinimizeResult {
        argmin: x.iter().copied().collect(),
        residual_norm: norm,
        initial_residual_norm: initial,
        iterations,
        converged: termination == Termination::Converged,
        termination,
    };
    if !all_finite(&r) {
        return finish(&x, f64::INFINITY, 0, Termination::Diverged);
    }
    let mut cost = initial;
    let mut mu: Option<f64> = None;
    let mut nu = 2.0;

    for iter in 0..opts.max_iterations {
        if cost <= opts.tol {
            return finish(&x, cost, iter, Termination::Converged);
        }
        let jac = jacobian(&f, &x, r.len());
        if jac.iter().any(|v| !v.is_finite()) {
            return finish(&x, cost, iter, Termination::Diverged);
        }
        let gradient = jac.transpose() * &r;
        if gradient.amax() <= opts.gradient_tol {
            return finish(&x, cost, iter, Termination::Stalled);
        }
        let normal = jac.transpose() * &jac;
        let damping = mu.get_or_insert_with(|| 1e-3 * normal.diagonal().max().max(1e-12));

        // inner loop: raise damping until a step decreases the residual
        loop {
            let mut lhs = normal.clone();
            for i in 0..lhs.nrows() {
                lhs[(i, i)] += *damping;
            }
            let step = match lhs.cholesky() {
                Some(chol) => -chol.solve(&gradient),
                None => {
                    *damping *= nu;
                    nu *= 2.0;
                    continue;
                }
            };
            if step.norm() <= opts.step_tol * (1.0 + x.norm()) {
                return finish(&x, cost, iter + 1, Termination::Stalled);
            }
            let candidate = &x + &step;
            let r_new = f(&candidate);
            let new_cost = r_new.norm();
            if all_finite(&r_new) && new_cost < cost {
                let predicted = step.dot(&(step.scale(*damping) - &gradient));
                let actual = cost * cost - new_cost * new_cost;
                let rho = if predicted > 0.0 {
                    actual / predicted
                } else {
                    0.0
                };
                *damping *= (1.0_f64 / 3.0).max(1.0 - (2.0 * rho - 1.0).powi(3));
                nu = 2.0;
                x = candidate;
                r = r_new;
                cost = new_cost;
                break;
            }
            *damping *= nu;
            nu *= 2.0;
            if !damping.is_finite() {
                return finish(&x, cost, iter + 1, Termination::Stalled);
            }
        }
    }
    let termination = if cost <= opts.tol {
        Termination::Converged
    } else {
        Termination::MaxIterations
    };
    finish(&x, cost, opts.max_iterations, termination)
}

/// Decade histogram of residual norms. Bin `i` counts norms in
/// `[10^(lo+i), 10^(lo+i+1))`; values outside the range are clamped into the
/// first or last bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub log10_low: i32,
    pub counts: Vec<usize>,
}

impl Histogram {
    const LOW: i32 = -17;
    const HIGH: i32 = 4;

    pub fn from_values(values: &[f64]) -> Self {
        let bins = (Self::HIGH - Self::LOW) as usize;
        let mut counts = vec![0; bins];
        for &v in values {
            let idx = if v > 0.0 && v.is_finite() {
                let d = v.log10().floor() as i64 - Self::LOW as i64;
                d.clamp(0, bins as i64 - 1) as usize
            } else if v.is_finite() {
                0
            } else {
                bins - 1
            };
            counts[idx] += 1;
        }
        Self {
            log10_low: Self::LOW,
            counts,
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultistartResult {
    pub best: MinimizeResult,
    pub best_restart: usize,
    /// Every restart, in restart-index order.
    pub runs: Vec<MinimizeResult>,
    pub histogram: Histogram,
}

impl MultistartResult {
    pub fn residuals(&self) -> Vec<f64> {
        self.runs.iter().map(|r| r.residual_norm).collect()
    }

    pub fn median_residual(&self) -> f64 {
        let mut v = self.residuals();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }
}

/// Runs `restarts` independent minimizations from `sampler(restart_rng(seed, i))`.
///
/// Restarts may execute in parallel; results are gathered in index order and
/// the best run is the first one attaining the minimal residual, so the output
/// does not depend on scheduling.
pub fn multistart<F, S>(
    f: F,
    sampler: S,
    restarts: usize,
    seed: u64,
    opts: &MinimizeOptions,
) -> MultistartResult
where
    F: Fn(&DVector<f64>) -> DVector<f64> + Sync,
    S: Fn(&mut ChaCha8Rng) -> DVector<f64> + Sync,
{
    assert!(restarts >= 1, "multistart needs at least one restart");
    let runs: Vec<MinimizeResult> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            let x0 = sampler(&mut restart_rng(seed, i));
            minimize_residual(&f, &x0, opts)
        })
        .collect();
    let mut best_restart = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.residual_norm < runs[best_restart].residual_norm {
            best_restart = i;
        }
    }
    let histogram =
        Histogram::from_values(&runs.iter().map(|r| r.residual_norm).collect::<Vec<_>>());
    MultistartResult {
        best: runs[best_restart].clone(),
        best_restart,
        runs,
        histogram,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::standard_normal_vector;
    use rand::Rng;

    #[test]
    fn linear_residual_is_solved() {
        let c = DVector::from_vec(vec![1.5, -2.0, 0.25]);
        let res = minimize_residual(
            |x| x - &c,
            &DVector::zeros(3),
            &MinimizeOptions {
                tol: 1e-13,
                ..Default::default()
            },
        );
        assert!(res.converged);
        assert!(res.residual_norm < 1e-12);
        for (a, b) in res.argmin.iter().zip(c.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rosenbrock_converges_from_nearby_point() {
        let f = |x: &DVector<f64>| DVector::from_vec(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]]);
        let res = minimize_residual(f, &DVector::from_vec(vec![-1.2, 1.0]), &Default::default());
        assert!(res.converged, "{res:?}");
        assert!((res.argmin[0] - 1.0).abs() < 1e-6);
        assert!((res.argmin[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn constant_residual_does_not_converge() {
        let c = DVector::from_vec(vec![3.0, 4.0]);
        let res = minimize_residual(|_| c.clone(), &DVector::zeros(2), &Default::default());
        assert!(!res.converged);
        assert_eq!(res.residual_norm, 5.0);
    }

    #[test]
    fn non_finite_residual_reports_divergence() {
        let res = minimize_residual(
            |x| DVector::from_vec(vec![1.0 / x[0]]),
            &DVector::zeros(1),
            &Default::default(),
        );
        assert_eq!(res.termination, Termination::Diverged);
        assert!(!res.converged);
    }

    fn multimodal(x: &DVector<f64>) -> DVector<f64> {
        // global minimum 0 at x = 0, local minima with positive residual elsewhere
        DVector::from_vec(vec![x[0].sin() * 3.0 + 0.3 * x[0], 0.1 * x[0]])
    }

    fn wide_sampler(rng: &mut ChaCha8Rng) -> DVector<f64> {
        DVector::from_vec(vec![rng.random_range(-20.0..20.0)])
    }

    #[test]
    fn single_restart_matches_direct_minimization() {
        let opts = MinimizeOptions::default();
        let ms = multistart(multimodal, wide_sampler, 1, 17, &opts);
        let x0 = wide_sampler(&mut restart_rng(17, 0));
        assert_eq!(ms.best, minimize_residual(multimodal, &x0, &opts));
    }

    #[test]
    fn restarts_beat_the_single_start_median() {
        let opts = MinimizeOptions::default();
        let ms = multistart(multimodal, wide_sampler, 50, 5, &opts);
        assert!(ms.best.residual_norm < ms.median_residual());
        assert_eq!(ms.histogram.total(), 50);
    }

    #[test]
    fn multistart_is_deterministic() {
        let opts = MinimizeOptions::default();
        let sampler = |rng: &mut ChaCha8Rng| standard_normal_vector(rng, 1) * 10.0;
        let a = multistart(multimodal, sampler, 20, 99, &opts);
        let b = multistart(multimodal, sampler, 20, 99, &opts);
        assert_eq!(a, b);
    }

    #[test]
    fn histogram_clamps_out_of_range() {
        let h = Histogram::from_values(&[0.0, 1e-30, 1e-5, 1e9, f64::INFINITY]);
        assert_eq!(h.counts[0], 2);
        assert_eq!(h.counts[12], 1);
        assert_eq!(*h.counts.last().unwrap(), 2);
    }
}
