//! Frequency trajectories that bring both qubits to the interaction point.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::io::{fmt_float, CsvTable};

/// Anything that assigns both qubit frequencies (GHz) to times in `[0, duration]` (ns).
pub trait Trajectory: Sync {
    fn duration(&self) -> f64;
    fn frequencies(&self, t: f64) -> (f64, f64);

    /// Frequencies the qubits rest at before and after the excursion.
    fn idle(&self) -> (f64, f64) {
        self.frequencies(0.0)
    }
}

/// Rounded trapezoid applied to both frequency control lines.
///
/// The rise occupies `[0, t_ramp]`, the flat top lasts exactly `t_hold`, and
/// the fall mirrors the rise, so the excursion lasts `2 t_ramp + t_hold`.
/// During the plateau qubit A sits at `f_interact + overshoot/2` and qubit B
/// at `f_interact - overshoot/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapezoidPulse {
    pub f_idle_a: f64,
    pub f_idle_b: f64,
    pub f_interact: f64,
    #[serde(default)]
    pub overshoot: f64,
    #[serde(default = "default_t_ramp")]
    pub t_ramp: f64,
    pub t_hold: f64,
    #[serde(default = "default_sigma")]
    pub smoothing_sigma: f64,
}

fn default_t_ramp() -> f64 {
    TrapezoidPulse::DEFAULT_T_RAMP
}

fn default_sigma() -> f64 {
    TrapezoidPulse::DEFAULT_SIGMA
}

impl TrapezoidPulse {
    pub const DEFAULT_T_RAMP: f64 = 5.0;
    pub const DEFAULT_SIGMA: f64 = 1.0;
    pub const MAX_OVERSHOOT: f64 = 0.5;

    pub fn new(f_idle_a: f64, f_idle_b: f64, f_interact: f64, t_hold: f64) -> Self {
        Self {
            f_idle_a,
            f_idle_b,
            f_interact,
            overshoot: 0.0,
            t_ramp: Self::DEFAULT_T_RAMP,
            t_hold,
            smoothing_sigma: Self::DEFAULT_SIGMA,
        }
    }

    pub fn with_overshoot(mut self, overshoot: f64) -> Self {
        self.overshoot = overshoot;
        self
    }

    pub fn with_hold(mut self, t_hold: f64) -> Self {
        self.t_hold = t_hold;
        self
    }

    pub fn with_interaction(mut self, f_interact: f64) -> Self {
        self.f_interact = f_interact;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, f) in [
            ("pulse.f_idle_a", self.f_idle_a),
            ("pulse.f_idle_b", self.f_idle_b),
            ("pulse.f_interact", self.f_interact),
        ] {
            if !(f.is_finite() && f > 0.0) {
                return Err(invalid(name, format!("frequency must be positive, got {f}")));
            }
        }
        if !(self.t_hold.is_finite() && self.t_hold >= 0.0) {
            return Err(invalid("pulse.t_hold", format!("must be >= 0, got {}", self.t_hold)));
        }
        if !(self.t_ramp.is_finite() && self.t_ramp > 0.0) {
            return Err(invalid("pulse.t_ramp", format!("must be > 0, got {}", self.t_ramp)));
        }
        if !(self.smoothing_sigma.is_finite() && self.smoothing_sigma >= 0.0) {
            return Err(invalid(
                "pulse.smoothing_sigma",
                format!("must be >= 0, got {}", self.smoothing_sigma),
            ));
        }
        if !(self.overshoot.abs() < Self::MAX_OVERSHOOT) {
            return Err(invalid(
                "pulse.overshoot",
                format!("|overshoot| must be < {} GHz, got {}", Self::MAX_OVERSHOOT, self.overshoot),
            ));
        }
        Ok(())
    }

    /// Plateau frequencies of qubits A and B.
    pub fn plateau(&self) -> (f64, f64) {
        (
            self.f_interact + 0.5 * self.overshoot,
            self.f_interact - 0.5 * self.overshoot,
        )
    }

    /// Rising edge: 0 at `x = 0`, 1/2 at `x = t_ramp/2`, 1 from `x = t_ramp` on.
    fn edge(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= self.t_ramp {
            return 1.0;
        }
        let half = 0.5 * self.t_ramp;
        let sigma = self.smoothing_sigma;
        if sigma == 0.0 {
            return if x < half {
                0.0
            } else if x > half {
                1.0
            } else {
                0.5
            };
        }
        let lo = normal_cdf(-half / sigma);
        let raw = normal_cdf((x - half) / sigma);
        ((raw - lo) / (1.0 - 2.0 * lo)).clamp(0.0, 1.0)
    }

    /// Fraction of the way from idle to plateau at time `t`.
    pub fn envelope(&self, t: f64) -> f64 {
        let total = self.duration();
        self.edge(t) * self.edge(total - t)
    }

    pub fn sample(&self, dt: f64) -> Result<SampledTrajectory> {
        self.validate()?;
        let max = self.t_ramp / 10.0;
        if !(dt > 0.0) || dt > max {
            return Err(Error::Resolution { dt, max });
        }
        Ok(SampledTrajectory::from_trajectory(self, dt))
    }
}

impl Trajectory for TrapezoidPulse {
    fn duration(&self) -> f64 {
        2.0 * self.t_ramp + self.t_hold
    }

    fn frequencies(&self, t: f64) -> (f64, f64) {
        let e = self.envelope(t);
        let (pa, pb) = self.plateau();
        (
            self.f_idle_a + (pa - self.f_idle_a) * e,
            self.f_idle_b + (pb - self.f_idle_b) * e,
        )
    }

    fn idle(&self) -> (f64, f64) {
        (self.f_idle_a, self.f_idle_b)
    }
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Both qubits held at constant frequencies for `t_hold`, with instantaneous
/// switching at either end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectangularPulse {
    pub f_a: f64,
    pub f_b: f64,
    pub t_hold: f64,
}

impl RectangularPulse {
    pub fn new(f_a: f64, f_b: f64, t_hold: f64) -> Self {
        Self { f_a, f_b, t_hold }
    }

    pub fn resonant(f: f64, t_hold: f64) -> Self {
        Self::new(f, f, t_hold)
    }
}

impl Trajectory for RectangularPulse {
    fn duration(&self) -> f64 {
        self.t_hold
    }

    fn frequencies(&self, _t: f64) -> (f64, f64) {
        (self.f_a, self.f_b)
    }
}

/// Constant-frequency trajectory sampled on a uniform grid.
pub fn rectangular(f_a: f64, f_b: f64, t_hold: f64, dt: f64) -> Result<SampledTrajectory> {
    if !(dt > 0.0) {
        return Err(Error::Resolution { dt, max: f64::INFINITY });
    }
    if !(t_hold >= 0.0) {
        return Err(invalid("t_hold", format!("must be >= 0, got {t_hold}")));
    }
    Ok(SampledTrajectory::from_trajectory(&RectangularPulse::new(f_a, f_b, t_hold), dt))
}

/// Frequencies on the grid `t_k = k * dt`, `k = 0..=n`, with `dt` adjusted so
/// that `n * dt` equals the trajectory duration exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledTrajectory {
    pub dt: f64,
    pub f_a: Vec<f64>,
    pub f_b: Vec<f64>,
    pub total_time: f64,
}

impl SampledTrajectory {
    pub fn from_trajectory<T: Trajectory + ?Sized>(trajectory: &T, dt: f64) -> Self {
        let total = trajectory.duration();
        let steps = step_count(total, dt);
        let dt_eff = if steps == 0 { dt } else { total / steps as f64 };
        let (mut f_a, mut f_b) = (Vec::with_capacity(steps + 1), Vec::with_capacity(steps + 1));
        for k in 0..=steps {
            let t = if k == steps { total } else { k as f64 * dt_eff };
            let (a, b) = trajectory.frequencies(t);
            f_a.push(a);
            f_b.push(b);
        }
        Self { dt: dt_eff, f_a, f_b, total_time: total }
    }

    pub fn len(&self) -> usize {
        self.f_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f_a.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.len();
        (0..n).map(move |k| if k + 1 == n { self.total_time } else { k as f64 * self.dt })
    }

    pub fn to_csv(&self) -> String {
        let mut table = CsvTable::new(&["t_ns", "f_a_GHz", "f_b_GHz"]);
        for (k, t) in self.times().enumerate() {
            table.push(vec![fmt_float(t), fmt_float(self.f_a[k]), fmt_float(self.f_b[k])]);
        }
        table.render()
    }
}

impl Trajectory for SampledTrajectory {
    fn duration(&self) -> f64 {
        self.total_time
    }

    /// Linear interpolation between samples.
    fn frequencies(&self, t: f64) -> (f64, f64) {
        let n = self.len();
        if n <= 1 || t <= 0.0 {
            return (self.f_a[0], self.f_b[0]);
        }
        let x = t / self.dt;
        let k = (x.floor() as usize).min(n - 2);
        let w = (x - k as f64).clamp(0.0, 1.0);
        (
            self.f_a[k] + w * (self.f_a[k + 1] - self.f_a[k]),
            self.f_b[k] + w * (self.f_b[k + 1] - self.f_b[k]),
        )
    }

    fn idle(&self) -> (f64, f64) {
        (self.f_a[0], self.f_b[0])
    }
}

/// Number of whole steps of roughly `dt` covering `total`.
pub(crate) fn step_count(total: f64, dt: f64) -> usize {
    if total <= 0.0 {
        return 0;
    }
    // Tolerate representation error so 15.2 / 0.005 gives 3040, not 3041.
    ((total / dt) - 1e-9).ceil().max(1.0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo() -> TrapezoidPulse {
        TrapezoidPulse::new(6.2, 5.0, 5.53, 15.2).with_overshoot(0.005)
    }

    #[test]
    fn endpoints_sit_at_idle() {
        let s = demo().sample(0.005).unwrap();
        assert!((s.f_a[0] - 6.2).abs() < 1e-9 && (s.f_b[0] - 5.0).abs() < 1e-9);
        let last = s.len() - 1;
        assert!((s.f_a[last] - 6.2).abs() < 1e-9 && (s.f_b[last] - 5.0).abs() < 1e-9);
        assert_eq!(s.f_a.len(), s.f_b.len());
        assert!((s.total_time - (2.0 * 5.0 + 15.2)).abs() < 1e-12);
    }

    #[test]
    fn plateau_detuning_equals_overshoot() {
        let p = demo();
        let mid = p.duration() / 2.0;
        let (a, b) = p.frequencies(mid);
        assert!((a - b - 0.005).abs() < 1e-12);
        assert!((0.5 * (a + b) - 5.53).abs() < 1e-12);
    }

    #[test]
    fn hold_is_the_flat_top() {
        let p = demo();
        assert!((p.envelope(0.5 * p.t_ramp) - 0.5).abs() < 1e-12);
        assert!((p.envelope(p.duration() - 0.5 * p.t_ramp) - 0.5).abs() < 1e-12);
        assert_eq!(p.envelope(p.t_ramp), 1.0);
        assert_eq!(p.envelope(p.t_ramp + p.t_hold), 1.0);
        assert!(p.envelope(p.t_ramp - 0.1) < 1.0);
    }

    #[test]
    fn sharp_short_ramps_give_a_rectangle() {
        let mut p = TrapezoidPulse::new(6.2, 5.0, 5.5, 10.0);
        p.smoothing_sigma = 0.0;
        p.t_ramp = 0.01;
        let s = p.sample(0.001).unwrap();
        let distinct: std::collections::BTreeSet<u64> =
            s.f_a.iter().map(|f| f.to_bits()).collect();
        // idle, plateau, and the two exact ramp midpoints
        assert!(distinct.len() <= 3, "{distinct:?}");
        let plateau = s.f_a.iter().filter(|&&f| f == 5.5).count() as f64 * s.dt;
        assert!((plateau - 10.0).abs() < p.t_ramp + 0.002);
    }

    #[test]
    fn coarse_step_is_rejected() {
        assert!(matches!(demo().sample(0.6), Err(Error::Resolution { .. })));
        assert!(matches!(demo().sample(0.0), Err(Error::Resolution { .. })));
    }

    #[test]
    fn invalid_pulses_are_rejected() {
        let mut p = demo();
        p.overshoot = 0.6;
        assert!(p.validate().is_err());
        let mut p = demo();
        p.t_hold = -1.0;
        assert!(p.validate().is_err());
        let mut p = demo();
        p.t_ramp = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn rectangular_has_exact_duration() {
        let s = rectangular(6.0, 6.0, 15.43, 0.005).unwrap();
        assert!((s.total_time - 15.43).abs() < 1e-15);
        assert!((s.dt * (s.len() - 1) as f64 - 15.43).abs() < 1e-9);
        assert!(s.f_a.iter().zip(&s.f_b).all(|(a, b)| a == b));
    }

    #[test]
    fn time_reversal_symmetry() {
        let p = TrapezoidPulse::new(6.0, 5.2, 5.6, 13.7).with_overshoot(-0.004);
        let s = p.sample(0.005).unwrap();
        let n = s.len();
        for k in 0..n {
            assert!((s.f_a[k] - s.f_a[n - 1 - k]).abs() < 1e-12);
            assert!((s.f_b[k] - s.f_b[n - 1 - k]).abs() < 1e-12);
        }
    }

    #[test]
    fn overshoot_never_moves_idle() {
        let a = demo().with_overshoot(0.0).sample(0.01).unwrap();
        let b = demo().with_overshoot(0.02).sample(0.01).unwrap();
        assert_eq!(a.f_a[0], b.f_a[0]);
        assert_eq!(a.f_b[a.len() - 1], b.f_b[b.len() - 1]);
    }

    #[test]
    fn sampled_trajectory_interpolates_its_samples() {
        let s = demo().sample(0.01).unwrap();
        for k in [0usize, 17, 900, s.len() - 1] {
            let t = s.times().nth(k).unwrap();
            let (a, b) = s.frequencies(t);
            assert!((a - s.f_a[k]).abs() < 1e-12 && (b - s.f_b[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_has_header_and_one_row_per_sample() {
        let s = rectangular(6.0, 5.9, 1.0, 0.25).unwrap();
        let csv = s.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t_ns,f_a_GHz,f_b_GHz");
        assert_eq!(lines.len(), s.len() + 1);
        assert!(csv.ends_with('\n'));
    }
}
