//! Single-document run configuration shared by every command.

use serde::{Deserialize, Serialize};

use crate::device::{DeviceParams, OPERATING_BAND};
use crate::error::{invalid, Result};
use crate::io::MatrixFile;
use crate::landscape::{Axis, AxisRange, SweepSpec};
use crate::propagator::{Integrator, PropagationOptions, DEFAULT_DT};
use crate::pulse::TrapezoidPulse;
use crate::unitary_fit::FsimAngles;
use crate::xeb::{NoiseModel, XebSpec, DEFAULT_CIRCUITS};

/// Either a named built-in device or explicit parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeviceSpec {
    Preset(String),
    Params(DeviceParams),
}

impl DeviceSpec {
    pub fn resolve(&self) -> Result<DeviceParams> {
        let dev = match self {
            DeviceSpec::Preset(name) => match name.as_str() {
                "swap_demo" => DeviceParams::swap_demo(),
                "benchmark_demo" => DeviceParams::benchmark_demo(),
                other => return Err(invalid("device", format!("unknown preset {other:?}"))),
            },
            DeviceSpec::Params(p) => *p,
        };
        dev.validate()?;
        Ok(dev)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub integrator: Integrator,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

impl Default for Numerics {
    fn default() -> Self {
        Self { dt: DEFAULT_DT, integrator: Integrator::default() }
    }
}

impl Numerics {
    pub fn propagation(&self) -> PropagationOptions {
        PropagationOptions { dt: self.dt, integrator: self.integrator, record_history: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSection {
    #[serde(default = "default_trace_axis")]
    pub axis: Axis,
    pub range: AxisRange,
}

fn default_trace_axis() -> Axis {
    Axis::HoldTime
}

/// One 2D map; the config's pulse fixes the parameters that are not swept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandscapeSection {
    pub axis_x: Axis,
    pub x: AxisRange,
    pub axis_y: Axis,
    pub y: AxisRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    #[serde(default = "default_band")]
    pub freq_range: (f64, f64),
    #[serde(default = "default_n_min")]
    pub n_min: u32,
    #[serde(default = "default_n_max")]
    pub n_max: u32,
}

fn default_band() -> (f64, f64) {
    OPERATING_BAND
}
fn default_n_min() -> u32 {
    2
}
fn default_n_max() -> u32 {
    10
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self { freq_range: OPERATING_BAND, n_min: 2, n_max: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSection {
    /// Interaction frequency; when absent the lowest in-band synchronization order is used.
    #[serde(default)]
    pub interaction_freq: Option<f64>,
    pub initial_hold: f64,
    #[serde(default)]
    pub initial_overshoot: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_max_iter() -> usize {
    400
}

/// Source of the matrix for `fit-unitary`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixSource {
    /// Inline matrix.
    Matrix(MatrixFile),
    /// Built from five angles.
    Angles(FsimAngles),
    /// Propagated through the config's device and pulse.
    Pulse,
}

/// Two-qubit layer used in XEB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateSource {
    /// Ideal five-angle unitary, also used as the reference.
    Ideal(FsimAngles),
    /// The propagated pulse; the reference is its best-fit five-angle unitary.
    Pulse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XebSection {
    #[serde(default = "default_n_qubits")]
    pub n_qubits: usize,
    #[serde(default = "default_circuits")]
    pub circuits: usize,
    pub cycles: Vec<usize>,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default)]
    pub shots: Option<u32>,
    pub gate: GateSource,
}

fn default_n_qubits() -> usize {
    2
}
fn default_circuits() -> usize {
    DEFAULT_CIRCUITS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub device: DeviceSpec,
    #[serde(default)]
    pub pulse: Option<TrapezoidPulse>,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub trace: Option<TraceSection>,
    #[serde(default)]
    pub landscape: Vec<LandscapeSection>,
    #[serde(default)]
    pub spectrum: Option<SpectrumSection>,
    #[serde(default)]
    pub optimize: Option<OptimizeSection>,
    #[serde(default)]
    pub fit_unitary: Option<MatrixSource>,
    #[serde(default)]
    pub xeb: Option<XebSection>,
    #[serde(default)]
    pub output_dir: Option<String>,
}

impl RunConfig {
    /// Parses and validates every section that is present.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.device.resolve()?;
        if !(self.numerics.dt.is_finite() && self.numerics.dt > 0.0) {
            return Err(invalid("numerics.dt", format!("must be > 0, got {}", self.numerics.dt)));
        }
        if let Some(p) = &self.pulse {
            p.validate()?;
        }
        if let Some(t) = &self.trace {
            t.range.validate("trace.range")?;
            self.require_pulse("trace")?;
        }
        for s in &self.landscape {
            self.sweep_spec(s)?.validate()?;
        }
        if let Some(s) = &self.spectrum {
            let (lo, hi) = s.freq_range;
            if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
                return Err(invalid("spectrum.freq_range", format!("need 0 < lo < hi, got ({lo}, {hi})")));
            }
            if s.n_min < 2 || s.n_min > s.n_max {
                return Err(invalid("spectrum", format!("need 2 <= n_min <= n_max, got {}..{}", s.n_min, s.n_max)));
            }
        }
        if let Some(o) = &self.optimize {
            self.require_pulse("optimize")?;
            if !(o.initial_hold.is_finite() && o.initial_hold >= 0.0) {
                return Err(invalid("optimize.initial_hold", "must be >= 0"));
            }
            if o.max_iter == 0 {
                return Err(invalid("optimize.max_iter", "must be >= 1"));
            }
        }
        if let Some(MatrixSource::Pulse) = &self.fit_unitary {
            self.require_pulse("fit_unitary")?;
        }
        if let Some(x) = &self.xeb {
            if x.gate == GateSource::Pulse {
                self.require_pulse("xeb")?;
            }
            self.xeb_spec(x).validate()?;
        }
        Ok(())
    }

    fn require_pulse(&self, section: &str) -> Result<&TrapezoidPulse> {
        self.pulse
            .as_ref()
            .ok_or_else(|| invalid("pulse", format!("the {section} section needs a pulse")))
    }

    pub fn pulse(&self) -> Result<&TrapezoidPulse> {
        self.require_pulse("requested")
    }

    pub fn sweep_spec(&self, s: &LandscapeSection) -> Result<SweepSpec> {
        let base = *self.require_pulse("landscape")?;
        Ok(SweepSpec { axis_x: s.axis_x, x: s.x, axis_y: s.axis_y, y: s.y, base })
    }

    pub fn xeb_spec(&self, x: &XebSection) -> XebSpec {
        XebSpec {
            n_qubits: x.n_qubits,
            circuits: x.circuits,
            cycles: x.cycles.clone(),
            seed: self.seed,
            noise: x.noise,
            shots: x.shots,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"{
        "seed": 7,
        "device": "swap_demo",
        "pulse": {"f_idle_a": 6.2, "f_idle_b": 5.0, "f_interact": 5.53, "t_hold": 14.0, "overshoot": -0.0036},
        "numerics": {"dt": 0.01},
        "trace": {"range": {"min": 4.0, "max": 24.0, "steps": 81}},
        "landscape": [{"axis_x": "hold_time", "x": {"min": 10, "max": 20, "steps": 5},
                       "axis_y": "interaction_freq", "y": {"min": 5.2, "max": 5.8, "steps": 3}}],
        "spectrum": {},
        "optimize": {"initial_hold": 14.5},
        "fit_unitary": {"angles": {"theta": 0.01, "phi": 3.29, "delta_plus": 0.39, "delta_c": -0.13, "delta_d": -3.96}},
        "xeb": {"cycles": [1, 10, 20, 40], "circuits": 5, "gate": "pulse",
                "noise": {"t1_a": 20000, "t1_b": 20000}}
    }"#;

    #[test]
    fn full_config_parses() {
        let cfg = RunConfig::from_json(FULL).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.device.resolve().unwrap(), DeviceParams::swap_demo());
        assert_eq!(cfg.spectrum.unwrap(), SpectrumSection::default());
        let x = cfg.xeb_spec(cfg.xeb.as_ref().unwrap());
        assert_eq!((x.seed, x.n_qubits, x.noise.cycle_time), (7, 2, 38.0));
    }

    #[test]
    fn seed_is_mandatory() {
        assert!(RunConfig::from_json(r#"{"device": "swap_demo"}"#).is_err());
        assert!(RunConfig::from_json(r#"{"seed": 1, "device": "swap_demo"}"#).is_ok());
    }

    #[test]
    fn invalid_sections_are_rejected() {
        for bad in [
            r#"{"seed": 1, "device": "nope"}"#,
            r#"{"seed": 1, "device": "swap_demo", "numerics": {"dt": 0}}"#,
            r#"{"seed": 1, "device": "swap_demo", "trace": {"range": {"min": 1, "max": 2, "steps": 3}}}"#,
            r#"{"seed": 1, "device": "swap_demo", "pulse": {"f_idle_a": 6.2, "f_idle_b": 5.0, "f_interact": 5.5, "t_hold": 10},
                "trace": {"range": {"min": 1, "max": 2, "steps": 0}}}"#,
            r#"{"seed": 1, "device": "swap_demo", "bogus": 3}"#,
            r#"{"seed": 1, "device": "swap_demo", "spectrum": {"n_min": 1}}"#,
        ] {
            assert!(RunConfig::from_json(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = RunConfig::from_json(FULL).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }
}
