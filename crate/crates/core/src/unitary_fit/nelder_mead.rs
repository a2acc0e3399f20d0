//! Derivative-free simplex minimizer shared by every fit in the crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadOptions {
    pub max_iter: usize,
    /// Stop once every vertex lies within `tol_x` of the best one (max norm).
    pub tol_x: f64,
    /// Stop once the objective spread across the simplex falls below `tol_f`.
    pub tol_f: f64,
    /// Per-coordinate offsets of the initial simplex; `None` uses 5% of each
    /// coordinate (0.00025 for zero coordinates).
    #[serde(default)]
    pub initial_step: Option<Vec<f64>>,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { max_iter: 2000, tol_x: 1e-8, tol_f: 1e-12, initial_step: None }
    }
}

impl NelderMeadOptions {
    pub fn with_step(mut self, step: Vec<f64>) -> Self {
        self.initial_step = Some(step);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn eval<F: FnMut(&[f64]) -> f64>(objective: &mut F, x: &[f64], iteration: usize) -> Result<f64> {
    let f = objective(x);
    if f.is_nan() {
        return Err(Error::NanObjective { iteration });
    }
    Ok(f)
}

pub fn nelder_mead<F>(mut objective: F, x0: &[f64], opts: &NelderMeadOptions) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    if n == 0 {
        return Err(Error::Domain("Nelder-Mead needs at least one parameter".into()));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("Nelder-Mead start point must be finite".into()));
    }
    let steps: Vec<f64> = match &opts.initial_step {
        Some(s) if s.len() == n => s.clone(),
        Some(s) => {
            return Err(Error::Domain(format!(
                "initial_step has {} entries for {} parameters",
                s.len(),
                n
            )))
        }
        None => x0.iter().map(|&v| if v != 0.0 { 0.05 * v } else { 0.00025 }).collect(),
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for (i, step) in steps.iter().enumerate() {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values = Vec::with_capacity(n + 1);
    for v in &simplex {
        values.push(eval(&mut objective, v, 0)?);
    }

    let mut order: Vec<usize> = (0..=n).collect();
    let mut iterations = 0;
    let mut converged = false;
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];

    while iterations < opts.max_iter {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let (best, worst, second) = (order[0], order[n], order[n - 1]);

        let spread = values[worst] - values[best];
        let size = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if size < opts.tol_x || spread < opts.tol_f {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &idx in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&simplex[idx]) {
                *c += x / n as f64;
            }
        }

        let along = |coef: f64, from: &[f64], out: &mut Vec<f64>, centroid: &[f64]| {
            for j in 0..n {
                out[j] = centroid[j] + coef * (from[j] - centroid[j]);
            }
        };

        // Reflection through the centroid: c + α (c − worst).
        along(-REFLECT, &simplex[worst].clone(), &mut trial, &centroid);
        let reflected = trial.clone();
        let f_r = eval(&mut objective, &reflected, iterations)?;

        if f_r < values[best] {
            along(EXPAND, &reflected, &mut trial, &centroid);
            let f_e = eval(&mut objective, &trial, iterations)?;
            if f_e < f_r {
                simplex[worst].copy_from_slice(&trial);
                values[worst] = f_e;
            } else {
                simplex[worst].copy_from_slice(&reflected);
                values[worst] = f_r;
            }
            continue;
        }
        if f_r < values[second] {
            simplex[worst].copy_from_slice(&reflected);
            values[worst] = f_r;
            continue;
        }

        let accepted = if f_r < values[worst] {
            along(CONTRACT, &reflected, &mut trial, &centroid);
            let f_c = eval(&mut objective, &trial, iterations)?;
            (f_c <= f_r).then_some(f_c)
        } else {
            along(CONTRACT, &simplex[worst].clone(), &mut trial, &centroid);
            let f_c = eval(&mut objective, &trial, iterations)?;
            (f_c < values[worst]).then_some(f_c)
        };
        if let Some(f_c) = accepted {
            simplex[worst].copy_from_slice(&trial);
            values[worst] = f_c;
            continue;
        }

        let anchor = simplex[best].clone();
        for idx in 0..=n {
            if idx == best {
                continue;
            }
            for j in 0..n {
                simplex[idx][j] = anchor[j] + SHRINK * (simplex[idx][j] - anchor[j]);
            }
            values[idx] = eval(&mut objective, &simplex[idx], iterations)?;
        }
    }

    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    Ok(Minimum { x: simplex[best].clone(), f: values[best], iterations, converged })
}

/// Repeats [`nelder_mead`] from the previous optimum with a fresh simplex
/// until a restart no longer improves the objective.
pub fn nelder_mead_restarts<F>(
    mut objective: F,
    x0: &[f64],
    opts: &NelderMeadOptions,
    max_restarts: usize,
) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut best = nelder_mead(&mut objective, x0, opts)?;
    let mut total = best.iterations;
    for _ in 0..max_restarts {
        let next = nelder_mead(&mut objective, &best.x, opts)?;
        total += next.iterations;
        if next.f < best.f {
            best = Minimum { iterations: total, ..next };
        } else {
            break;
        }
    }
    best.iterations = total;
    Ok(best)
}
