//! Fidelity estimators, decay fits and the error budget.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::unitary_fit::{nelder_mead_restarts, NelderMeadOptions};

/// `−Σ p_i ln q_i` in nats.
pub fn cross_entropy(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Domain(format!("length mismatch {} vs {}", p.len(), q.len())));
    }
    let mut h = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            if !(qi > 0.0) {
                return Err(Error::Domain("q vanishes where p is positive".into()));
            }
            h -= pi * qi.ln();
        }
    }
    Ok(h)
}

/// Cross-entropy fidelity of `measured` against the ideal `expected`,
/// relative to the uniform (incoherent) distribution.
pub fn alpha(measured: &[f64], expected: &[f64]) -> Result<f64> {
    if expected.iter().any(|&q| !(q > 0.0)) {
        return Err(Error::Domain("expected distribution must be strictly positive".into()));
    }
    let n = expected.len() as f64;
    let uniform = vec![1.0 / n; expected.len()];
    let h_inc = cross_entropy(&uniform, expected)?;
    let h_meas = cross_entropy(measured, expected)?;
    let h_exp = cross_entropy(expected, expected)?;
    let denom = h_inc - h_exp;
    if denom.abs() < 1e-12 {
        return Err(Error::Domain("expected distribution is (nearly) uniform".into()));
    }
    Ok((h_inc - h_meas) / denom)
}

/// Square root of the unitarity of the computational block of `rho`,
/// `u = (D Tr ρ_c² − (Tr ρ_c)²)/(D − 1)`, clipped at zero.
pub fn sqrt_purity(rho: &DMatrix<C64>, computational: &[usize]) -> f64 {
    let d = computational.len();
    let rc = DMatrix::from_fn(d, d, |r, c| rho[(computational[r], computational[c])]);
    let tr = rc.trace().re;
    let tr2 = (&rc * &rc).trace().re;
    let u = (d as f64 * tr2 - tr * tr) / (d as f64 - 1.0);
    u.max(0.0).sqrt()
}

pub fn purity_series(rhos: &[DMatrix<C64>], computational: &[usize]) -> Vec<f64> {
    rhos.iter().map(|r| sqrt_purity(r, computational)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpFit {
    pub a: f64,
    pub p: f64,
    pub b: f64,
    pub a_err: f64,
    pub p_err: f64,
    pub b_err: f64,
    pub rms_residual: f64,
    /// `p < 1` with a resolvable amplitude.
    pub decaying: bool,
    /// The amplitude is resolved above the residual, so the data determine `p`.
    pub identifiable: bool,
}

pub const BOOTSTRAP_RESAMPLES: usize = 200;
const BOOTSTRAP_SEED: u64 = 0x5EED_B007;

fn check_series(series: &[(f64, f64)], min_len: usize) -> Result<()> {
    if series.len() < min_len {
        return Err(Error::Domain(format!("need at least {min_len} points, got {}", series.len())));
    }
    if series.iter().any(|(x, y)| !(x.is_finite() && y.is_finite())) {
        return Err(Error::Domain("series contains non-finite values".into()));
    }
    Ok(())
}

fn spread(series: &[(f64, f64)]) -> (f64, f64) {
    let lo = series.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = series.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn linear_regression(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| {
        let slope = sxy / sxx;
        (slope, my - slope * mx)
    })
}

fn sse(series: &[(f64, f64)], model: impl Fn(f64) -> f64) -> f64 {
    series.iter().map(|&(x, y)| (y - model(x)).powi(2)).sum()
}

fn fit_options(x0: &[f64]) -> NelderMeadOptions {
    let step = x0.iter().map(|v| if v.abs() > 1e-8 { 0.05 * v.abs() } else { 1e-3 }).collect();
    NelderMeadOptions { max_iter: 5000, tol_x: 1e-13, tol_f: 0.0, initial_step: None }.with_step(step)
}

fn exp_least_squares(series: &[(f64, f64)], x0: [f64; 3]) -> Result<[f64; 3]> {
    let scale = series.iter().map(|p| p.1 * p.1).sum::<f64>().max(1e-300);
    let objective = |x: &[f64]| sse(series, |m| x[0] * x[1].powf(m) + x[2]) / scale;
    let best = nelder_mead_restarts(objective, &x0, &fit_options(&x0), 6)?;
    Ok([best.x[0], best.x[1], best.x[2]])
}

/// Least-squares fit of `y = A p^m + B`, started from a log-linear regression
/// of `y − y_tail`, with parameter uncertainties from a residual bootstrap.
pub fn fit_exponential(series: &[(f64, f64)]) -> Result<ExpFit> {
    check_series(series, 4)?;
    let (lo, hi) = spread(series);
    let range = hi - lo;
    if range <= 1e-12 * hi.abs().max(1.0) {
        let mean = series.iter().map(|p| p.1).sum::<f64>() / series.len() as f64;
        return Ok(ExpFit {
            a: 0.0,
            p: 1.0,
            b: mean,
            a_err: 0.0,
            p_err: f64::NAN,
            b_err: 0.0,
            rms_residual: 0.0,
            decaying: false,
            identifiable: false,
        });
    }
    let tail = lo - 1e-3 * range;
    let logs: Vec<(f64, f64)> = series.iter().map(|&(m, y)| (m, (y - tail).ln())).collect();
    let (slope, intercept) = linear_regression(&logs).unwrap_or((0.0, range.ln()));
    let x0 = [intercept.exp(), slope.exp().min(1.0), tail];
    let fit = exp_least_squares(series, x0)?;
    let model = |x: &[f64; 3], m: f64| x[0] * x[1].powf(m) + x[2];
    let residuals: Vec<f64> = series.iter().map(|&(m, y)| y - model(&fit, m)).collect();
    let rms_residual = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(BOOTSTRAP_SEED);
    let mut samples = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let resampled: Vec<(f64, f64)> = series
            .iter()
            .map(|&(m, _)| (m, model(&fit, m) + residuals[rng.gen_range(0..residuals.len())]))
            .collect();
        samples.push(exp_least_squares(&resampled, fit)?);
    }
    let err = |k: usize| std_dev(samples.iter().map(|s| s[k]));
    let amplitude_resolved = fit[0].abs() > 10.0 * rms_residual && fit[0].abs() > 1e-12 * range.max(1e-300);
    Ok(ExpFit {
        a: fit[0],
        p: fit[1],
        b: fit[2],
        a_err: err(0),
        p_err: err(1),
        b_err: err(2),
        rms_residual,
        decaying: fit[1] < 1.0 && amplitude_resolved,
        identifiable: amplitude_resolved,
    })
}

fn std_dev(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    if v.len() < 2 {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeakageFit {
    pub p0: f64,
    pub p_inf: f64,
    pub gamma: f64,
    pub gamma_up: f64,
    pub gamma_down: f64,
    pub rms_residual: f64,
    /// `Γ > 0`.
    pub physical: bool,
    /// The data determine `Γ` (false for flat series).
    pub identifiable: bool,
}

fn leakage_model(x: &[f64], m: f64) -> f64 {
    (x[0] - x[1]) * (-x[2] * m).exp() + x[1]
}

/// Best `(p0, p_inf)` for a fixed rate by linear least squares.
fn leakage_levels(series: &[(f64, f64)], gamma: f64) -> (f64, f64, f64) {
    let (mut s11, mut s12, mut s22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(m, y) in series {
        let e = (-gamma * m).exp();
        let (u, v) = (e, 1.0 - e);
        s11 += u * u;
        s12 += u * v;
        s22 += v * v;
        b1 += u * y;
        b2 += v * y;
    }
    let det = s11 * s22 - s12 * s12;
    if det.abs() < 1e-300 {
        return (f64::NAN, f64::NAN, f64::INFINITY);
    }
    let p0 = (b1 * s22 - b2 * s12) / det;
    let p_inf = (s11 * b2 - s12 * b1) / det;
    let cost = sse(series, |m| leakage_model(&[p0, p_inf, gamma], m));
    (p0, p_inf, cost)
}

/// Fit of `ε(m) = (p0 − p_inf) e^{−Γ m} + p_inf`. The rate is bracketed by a
/// logarithmic scan, then all three parameters are refined together.
pub fn fit_leakage(series: &[(f64, f64)]) -> Result<LeakageFit> {
    check_series(series, 4)?;
    if series.iter().any(|p| !(0.0..=1.0).contains(&p.1)) {
        return Err(Error::Domain("leaked populations must lie in [0, 1]".into()));
    }
    let (lo, hi) = spread(series);
    if hi - lo <= 1e-12 {
        let c = series[0].1;
        return Ok(LeakageFit {
            p0: c,
            p_inf: c,
            gamma: 0.0,
            gamma_up: 0.0,
            gamma_down: 0.0,
            rms_residual: 0.0,
            physical: false,
            identifiable: false,
        });
    }
    let m_span = series.iter().map(|p| p.0).fold(0.0, f64::max).max(1.0);
    let mut best = (f64::INFINITY, [0.0; 3]);
    for k in 0..=120 {
        let gamma = 10f64.powf(-2.0 + 4.0 * k as f64 / 120.0) / m_span;
        let (p0, p_inf, cost) = leakage_levels(series, gamma);
        if cost < best.0 {
            best = (cost, [p0, p_inf, gamma]);
        }
    }
    let x0 = best.1;
    let scale = series.iter().map(|p| p.1 * p.1).sum::<f64>().max(1e-300);
    let objective = |x: &[f64]| sse(series, |m| leakage_model(x, m)) / scale;
    let fit = nelder_mead_restarts(objective, &x0, &fit_options(&x0), 6)?;
    let [p0, p_inf, gamma] = [fit.x[0], fit.x[1], fit.x[2]];
    let rms_residual = (sse(series, |m| leakage_model(&fit.x, m)) / series.len() as f64).sqrt();
    let gamma_up = p_inf * gamma;
    Ok(LeakageFit {
        p0,
        p_inf,
        gamma,
        gamma_up,
        gamma_down: gamma - gamma_up,
        rms_residual,
        physical: gamma > 0.0,
        identifiable: true,
    })
}

/// Pauli-error budget of one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub total: f64,
    pub control: f64,
    pub decoherence: f64,
    pub leakage: f64,
    /// A negative difference was replaced by zero, so the rows no longer add up to `total`.
    pub clamped: bool,
}

impl ErrorBudget {
    pub fn rows(&self) -> [(&'static str, f64); 4] {
        [
            ("decoherence", self.decoherence),
            ("leakage", self.leakage),
            ("control", self.control),
            ("total", self.total),
        ]
    }
}

/// Splits the XEB error into control (`r_xeb − r_purity`), decoherence
/// (`r_purity − r_leak`) and leakage (`r_leak`).
pub fn error_budget(r_xeb: f64, r_purity: f64, r_leak: f64) -> Result<ErrorBudget> {
    for (name, v) in [("r_xeb", r_xeb), ("r_purity", r_purity), ("r_leak", r_leak)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::Domain(format!("{name} must be finite and >= 0, got {v}")));
        }
    }
    let control = r_xeb - r_purity;
    let decoherence = r_purity - r_leak;
    Ok(ErrorBudget {
        total: r_xeb,
        control: control.max(0.0),
        decoherence: decoherence.max(0.0),
        leakage: r_leak,
        clamped: control < 0.0 || decoherence < 0.0,
    })
}
