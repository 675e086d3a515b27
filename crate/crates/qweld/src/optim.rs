//! Classical optimizers driving both pipelines: a derivative-free simplex
//! minimizer for the variational linear-solver loop and Adam for the
//! circuit-classifier training.
//!
//! The derivative-free routine is a Nelder-Mead simplex search with the
//! dimension-adaptive coefficients of Gao & Han. It honors the same outer
//! termination contract as the solver loop it serves: stop as soon as the
//! best cost falls to `epsilon`, or after `max_iters` iterations.

use crate::error::{Error, Result};

/// Termination and stepping parameters for [`minimize_dfo`].
///
/// `seed` drives the caller's parameter initialization; the simplex search
/// itself is deterministic.
#[derive(Debug, Clone, Copy)]
pub struct DfoConfig {
    /// Convergence threshold on the cost value.
    pub epsilon: f64,
    /// Iteration cap.
    pub max_iters: usize,
    /// Initial simplex edge length (radians for circuit angles).
    pub initial_step: f64,
    pub seed: u64,
}

impl Default for DfoConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            max_iters: 300,
            initial_step: 0.5,
            seed: 42,
        }
    }
}

/// Best parameters found and the per-iteration best-cost trace.
#[derive(Debug, Clone)]
pub struct DfoResult {
    pub x_best: Vec<f64>,
    pub cost_best: f64,
    /// Best cost seen after each iteration; at most `max_iters` entries.
    pub trace: Vec<f64>,
    pub evaluations: usize,
}

struct Vertex {
    x: Vec<f64>,
    cost: f64,
}

fn eval<F>(cost: &mut F, x: &[f64], count: &mut usize) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    *count += 1;
    let c = cost(x)?;
    if !c.is_finite() {
        return Err(Error::NonFiniteCost { params: x.to_vec() });
    }
    Ok(c)
}

/// Minimizes `cost` from `x0` without derivatives.
///
/// Returns the best-seen parameters and the accepted per-iteration cost
/// trace. Terminates when the best cost is at most `cfg.epsilon` or after
/// `cfg.max_iters` iterations, whichever comes first. With `max_iters == 0`
/// the cost is never evaluated and `x0` is returned unchanged.
pub fn minimize_dfo<F>(mut cost: F, x0: &[f64], cfg: &DfoConfig) -> Result<DfoResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteCost {
            params: x0.to_vec(),
        });
    }
    if cfg.max_iters == 0 {
        return Ok(DfoResult {
            x_best: x0.to_vec(),
            cost_best: f64::INFINITY,
            trace: Vec::new(),
            evaluations: 0,
        });
    }

    let n = x0.len();
    let mut evals = 0usize;

    // Zero-dimensional problems have nothing to move.
    if n == 0 {
        let c = eval(&mut cost, x0, &mut evals)?;
        return Ok(DfoResult {
            x_best: x0.to_vec(),
            cost_best: c,
            trace: vec![c],
            evaluations: evals,
        });
    }

    // Gao-Han adaptive coefficients.
    let nf = n as f64;
    let alpha = 1.0;
    let beta = 1.0 + 2.0 / nf;
    let gamma = 0.75 - 1.0 / (2.0 * nf);
    let delta = 1.0 - 1.0 / nf;

    let mut simplex: Vec<Vertex> = Vec::with_capacity(n + 1);
    simplex.push(Vertex {
        x: x0.to_vec(),
        cost: eval(&mut cost, x0, &mut evals)?,
    });
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += cfg.initial_step;
        let c = eval(&mut cost, &x, &mut evals)?;
        simplex.push(Vertex { x, cost: c });
    }
    simplex.sort_by(|a, b| a.cost.total_cmp(&b.cost));

    let mut trace = Vec::new();
    if simplex[0].cost <= cfg.epsilon {
        // Already converged at setup; record the check as one iteration.
        trace.push(simplex[0].cost);
        return Ok(DfoResult {
            x_best: simplex[0].x.clone(),
            cost_best: simplex[0].cost,
            trace,
            evaluations: evals,
        });
    }

    for _ in 0..cfg.max_iters {
        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, &xi) in centroid.iter_mut().zip(&v.x) {
                *c += xi;
            }
        }
        for c in &mut centroid {
            *c /= nf;
        }

        let worst = simplex[n].cost;
        let second_worst = simplex[n - 1].cost;
        let best = simplex[0].cost;

        let point_at = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].x)
                .map(|(&c, &w)| c + coef * (c - w))
                .collect()
        };

        let reflected = point_at(alpha);
        let cost_r = eval(&mut cost, &reflected, &mut evals)?;

        if cost_r < best {
            let expanded = point_at(alpha * beta);
            let cost_e = eval(&mut cost, &expanded, &mut evals)?;
            simplex[n] = if cost_e < cost_r {
                Vertex {
                    x: expanded,
                    cost: cost_e,
                }
            } else {
                Vertex {
                    x: reflected,
                    cost: cost_r,
                }
            };
        } else if cost_r < second_worst {
            simplex[n] = Vertex {
                x: reflected,
                cost: cost_r,
            };
        } else {
            let (contracted, cost_target) = if cost_r < worst {
                (point_at(alpha * gamma), cost_r)
            } else {
                (point_at(-gamma), worst)
            };
            let cost_c = eval(&mut cost, &contracted, &mut evals)?;
            if cost_c < cost_target {
                simplex[n] = Vertex {
                    x: contracted,
                    cost: cost_c,
                };
            } else {
                // Shrink toward the best vertex.
                let best_x = simplex[0].x.clone();
                for v in simplex.iter_mut().skip(1) {
                    for (xi, &bi) in v.x.iter_mut().zip(&best_x) {
                        *xi = bi + delta * (*xi - bi);
                    }
                    v.cost = eval(&mut cost, &v.x, &mut evals)?;
                }
            }
        }

        simplex.sort_by(|a, b| a.cost.total_cmp(&b.cost));
        trace.push(simplex[0].cost);
        if simplex[0].cost <= cfg.epsilon {
            break;
        }
    }

    Ok(DfoResult {
        x_best: simplex[0].x.clone(),
        cost_best: simplex[0].cost,
        trace,
        evaluations: evals,
    })
}

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_hat: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps_hat: 1e-8,
        }
    }
}

/// First/second moment accumulators for the bias-corrected Adam update.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub step_count: u64,
    pub config: AdamConfig,
}

impl AdamState {
    pub fn new(dim: usize, config: AdamConfig) -> Self {
        Self {
            first_moment: vec![0.0; dim],
            second_moment: vec![0.0; dim],
            step_count: 0,
            config,
        }
    }

    /// One bias-corrected Adam update, in place.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.first_moment.len() || grads.len() != params.len() {
            return Err(Error::DimensionMismatch {
                left: params.len(),
                right: grads.len(),
            });
        }
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient(i));
        }

        self.step_count += 1;
        let t = self.step_count as i32;
        let cfg = &self.config;
        let corr1 = 1.0 - cfg.beta1.powi(t);
        let corr2 = 1.0 - cfg.beta2.powi(t);

        for i in 0..params.len() {
            let g = grads[i];
            self.first_moment[i] = cfg.beta1 * self.first_moment[i] + (1.0 - cfg.beta1) * g;
            self.second_moment[i] = cfg.beta2 * self.second_moment[i] + (1.0 - cfg.beta2) * g * g;
            let m_hat = self.first_moment[i] / corr1;
            let v_hat = self.second_moment[i] / corr2;
            params[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.eps_hat);
        }
        Ok(())
    }
}
