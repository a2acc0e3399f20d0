//! Error landscapes over pulse parameters, synchronization points, and the
//! (hold, overshoot) tune-up.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::{DeviceParams, OPERATING_BAND};
use crate::error::{invalid, Result};
use crate::io::{fmt_float, fmt_opt, CsvTable};
use crate::propagator::{full_swap_time, propagate, sync_coupling, PropagationOptions};
use crate::pulse::{RectangularPulse, TrapezoidPulse};
use crate::unitary_fit::{nelder_mead, NelderMeadOptions};

/// Default tolerance on each residual of a synchronization point.
pub const SYNC_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    InteractionFreq,
    Overshoot,
    HoldTime,
}

impl Axis {
    pub fn label(self) -> &'static str {
        match self {
            Axis::InteractionFreq => "interaction_freq_GHz",
            Axis::Overshoot => "overshoot_GHz",
            Axis::HoldTime => "hold_time_ns",
        }
    }

    pub fn apply(self, pulse: &mut TrapezoidPulse, value: f64) {
        match self {
            Axis::InteractionFreq => pulse.f_interact = value,
            Axis::Overshoot => pulse.overshoot = value,
            Axis::HoldTime => pulse.t_hold = value,
        }
    }
}

/// Evenly spaced values from `min` to `max` inclusive. A single step yields `[min]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl AxisRange {
    pub fn new(min: f64, max: f64, steps: usize) -> Self {
        Self { min, max, steps }
    }

    pub fn validate(&self, name: &'static str) -> Result<()> {
        if self.steps == 0 {
            return Err(invalid(name, "steps must be >= 1"));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
            return Err(invalid(name, format!("need finite min <= max, got [{}, {}]", self.min, self.max)));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let h = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| if k + 1 == self.steps { self.max } else { self.min + h * k as f64 })
            .collect()
    }
}

/// Two swept pulse parameters over a base pulse that fixes everything else.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis_x: Axis,
    pub x: AxisRange,
    pub axis_y: Axis,
    pub y: AxisRange,
    pub base: TrapezoidPulse,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.axis_x == self.axis_y {
            return Err(invalid("sweep.axis_y", "must differ from axis_x"));
        }
        self.x.validate("sweep.x")?;
        self.y.validate("sweep.y")?;
        self.base.validate()
    }
}

/// Error probabilities on a grid, stored row-major with `x` varying fastest.
/// Points whose propagation failed hold `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorGrid {
    pub axis_x: Axis,
    pub axis_y: Axis,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub eps_swap: Vec<Option<f64>>,
    pub eps_leak: Vec<Option<f64>>,
}

impl ErrorGrid {
    pub fn get(&self, ix: usize, iy: usize) -> (Option<f64>, Option<f64>) {
        let k = iy * self.x.len() + ix;
        (self.eps_swap[k], self.eps_leak[k])
    }

    pub fn missing(&self) -> usize {
        self.eps_swap.iter().filter(|v| v.is_none()).count()
    }

    pub fn to_csv(&self) -> String {
        let mut t = CsvTable::new(&[self.axis_x.label(), self.axis_y.label(), "eps_swap", "eps_leak"]);
        for (iy, &y) in self.y.iter().enumerate() {
            for (ix, &x) in self.x.iter().enumerate() {
                let (s, l) = self.get(ix, iy);
                t.push(vec![fmt_float(x), fmt_float(y), fmt_opt(s), fmt_opt(l)]);
            }
        }
        t.render()
    }
}

fn evaluate(pulse: &TrapezoidPulse, device: &DeviceParams, opts: &PropagationOptions) -> Option<(f64, f64)> {
    pulse.validate().ok()?;
    let r = propagate(pulse, device, opts).ok()?;
    Some((r.eps_swap, r.eps_leak))
}

pub fn sweep(spec: &SweepSpec, device: &DeviceParams, opts: &PropagationOptions) -> Result<ErrorGrid> {
    spec.validate()?;
    device.validate()?;
    let x = spec.x.values();
    let y = spec.y.values();
    let nx = x.len();
    let mut cells = vec![None; nx * y.len()];
    cells.par_iter_mut().enumerate().for_each(|(k, cell)| {
        let mut p = spec.base;
        spec.axis_x.apply(&mut p, x[k % nx]);
        spec.axis_y.apply(&mut p, y[k / nx]);
        *cell = evaluate(&p, device, opts);
    });
    let eps_swap = cells.iter().map(|c| c.map(|v| v.0)).collect();
    let eps_leak = cells.iter().map(|c| c.map(|v| v.1)).collect();
    Ok(ErrorGrid { axis_x: spec.axis_x, axis_y: spec.axis_y, x, y, eps_swap, eps_leak })
}

/// Both error channels along one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTrace {
    pub axis: Axis,
    pub x: Vec<f64>,
    pub eps_swap: Vec<Option<f64>>,
    pub eps_leak: Vec<Option<f64>>,
}

impl ErrorTrace {
    pub fn to_csv(&self) -> String {
        let mut t = CsvTable::new(&[self.axis.label(), "eps_swap", "eps_leak"]);
        for (k, &x) in self.x.iter().enumerate() {
            t.push(vec![fmt_float(x), fmt_opt(self.eps_swap[k]), fmt_opt(self.eps_leak[k])]);
        }
        t.render()
    }

    pub fn leak_dips(&self) -> Vec<Dip> {
        find_dips(&present(&self.x, &self.eps_leak))
    }

    pub fn swap_dips(&self) -> Vec<Dip> {
        find_dips(&present(&self.x, &self.eps_swap))
    }
}

fn present(x: &[f64], v: &[Option<f64>]) -> Vec<(f64, f64)> {
    x.iter().zip(v).filter_map(|(&x, v)| v.map(|v| (x, v))).collect()
}

pub fn trace(
    base: &TrapezoidPulse,
    axis: Axis,
    range: &AxisRange,
    device: &DeviceParams,
    opts: &PropagationOptions,
) -> Result<ErrorTrace> {
    range.validate("trace.range")?;
    base.validate()?;
    device.validate()?;
    let x = range.values();
    let cells: Vec<_> = x
        .par_iter()
        .map(|&v| {
            let mut p = *base;
            axis.apply(&mut p, v);
            evaluate(&p, device, opts)
        })
        .collect();
    Ok(ErrorTrace {
        axis,
        x,
        eps_swap: cells.iter().map(|c| c.map(|v| v.0)).collect(),
        eps_leak: cells.iter().map(|c| c.map(|v| v.1)).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dip {
    pub x: f64,
    pub value: f64,
}

/// Interior local minima, each refined by the parabola through it and its
/// two neighbours. Plateaus of equal values count once, at their left end.
pub fn find_dips(trace: &[(f64, f64)]) -> Vec<Dip> {
    let mut dips = Vec::new();
    for w in trace.windows(3) {
        let [(x0, y0), (x1, y1), (x2, y2)] = [w[0], w[1], w[2]];
        if !(y1 < y0 && y1 <= y2) {
            continue;
        }
        dips.push(parabola_vertex((x0, y0), (x1, y1), (x2, y2)).unwrap_or(Dip { x: x1, value: y1 }));
    }
    dips.sort_by(|a, b| a.x.total_cmp(&b.x));
    dips
}

fn parabola_vertex(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64)) -> Option<Dip> {
    let (x0, y0) = p0;
    let (x1, y1) = p1;
    let (x2, y2) = p2;
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let a = (d12 - d01) / (x2 - x0);
    if !(a > 0.0) || !a.is_finite() {
        return None;
    }
    let b = d01 - a * (x0 + x1);
    let x = (-b / (2.0 * a)).clamp(x0, x2);
    let value = y1 + (x - x1) * (d01 + a * (x - x0));
    Some(Dip { x, value })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyncPoint {
    pub n: u32,
    pub interaction_freq: f64,
    pub coupling: f64,
    pub hold_time: f64,
    pub residual_swap: f64,
    pub residual_leak: f64,
    /// Both residuals are below the synchronization tolerance.
    pub synchronized: bool,
}

/// Solves `g(f) = sync_coupling(eta_mean, n)` for each `n` in `n_range` and
/// checks each solution with a resonant rectangular pulse of length `1/(4g)`.
/// Orders without a root inside `freq_range` are left out.
pub fn sync_spectrum(
    device: &DeviceParams,
    freq_range: (f64, f64),
    n_range: std::ops::RangeInclusive<u32>,
    opts: &PropagationOptions,
) -> Result<Vec<SyncPoint>> {
    device.validate()?;
    let (lo, hi) = freq_range;
    if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
        return Err(invalid("freq_range", format!("need 0 < lo < hi, got ({lo}, {hi})")));
    }
    if *n_range.start() < 2 {
        return Err(invalid("n_range", "orders start at 2"));
    }
    let eta = device.eta_mean();
    let c = device.coupling;
    let mut points = Vec::new();
    for n in n_range {
        let target = sync_coupling(eta, n)?;
        let h = |f: f64| c.coupling_unchecked(f, f) - target;
        if h(lo) > 0.0 || h(hi) < 0.0 {
            continue;
        }
        let f = bisect(h, lo, hi);
        let g = c.coupling_unchecked(f, f);
        let hold_time = full_swap_time(g);
        let r = propagate(&RectangularPulse::resonant(f, hold_time), device, opts)?;
        points.push(SyncPoint {
            n,
            interaction_freq: f,
            coupling: g,
            hold_time,
            residual_swap: r.eps_swap,
            residual_leak: r.eps_leak,
            synchronized: r.eps_swap < SYNC_TOLERANCE && r.eps_leak < SYNC_TOLERANCE,
        });
    }
    Ok(points)
}

/// Spectrum over the device operating band for orders 2 through 10.
pub fn sync_spectrum_in_band(device: &DeviceParams, opts: &PropagationOptions) -> Result<Vec<SyncPoint>> {
    sync_spectrum(device, OPERATING_BAND, 2..=10, opts)
}

fn bisect(h: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuneUp {
    pub t_hold: f64,
    pub overshoot: f64,
    pub eps_swap: f64,
    pub eps_leak: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl TuneUp {
    pub fn objective(&self) -> f64 {
        self.eps_swap + self.eps_leak
    }
}

/// Penalty returned for parameter sets outside the pulse's valid domain.
const INVALID_PENALTY: f64 = 2.0;

/// Minimizes `eps_swap + eps_leak` over hold time and overshoot at the
/// interaction frequency of `base`, starting from `initial = (t_hold, overshoot)`.
/// Internally the overshoot is scaled to MHz so both coordinates move on
/// comparable scales.
pub fn optimize(
    device: &DeviceParams,
    base: &TrapezoidPulse,
    initial: (f64, f64),
    opts: &PropagationOptions,
    max_iter: usize,
) -> Result<TuneUp> {
    device.validate()?;
    let start = base.with_hold(initial.0).with_overshoot(initial.1);
    start.validate()?;
    let pulse_at = |x: &[f64]| base.with_hold(x[0]).with_overshoot(x[1] * 1e-3);
    let objective = |x: &[f64]| {
        evaluate(&pulse_at(x), device, opts).map_or(INVALID_PENALTY, |(s, l)| s + l)
    };
    let nm = NelderMeadOptions { max_iter, tol_x: 1e-5, tol_f: 1e-12, initial_step: None }
        .with_step(vec![0.3, 1.0]);
    let x0 = [initial.0, initial.1 * 1e3];
    let mut m = nelder_mead(objective, &x0, &nm)?;
    let f0 = objective(&x0);
    if !(m.f <= f0) {
        m.x = x0.to_vec();
    }
    let (eps_swap, eps_leak) =
        evaluate(&pulse_at(&m.x), device, opts).ok_or_else(|| invalid("optimize", "no valid pulse found"))?;
    Ok(TuneUp {
        t_hold: m.x[0],
        overshoot: m.x[1] * 1e-3,
        eps_swap,
        eps_leak,
        iterations: m.iterations,
        converged: m.converged,
    })
}
