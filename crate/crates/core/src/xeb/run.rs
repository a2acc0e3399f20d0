//! Ensemble runs: many random circuits, aggregated series, fits, report.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::analysis::{alpha, error_budget, fit_exponential, fit_leakage, sqrt_purity, ErrorBudget, ExpFit, LeakageFit};
use super::circuit::{circuit_seed, gen_circuit};
use super::noise::{computational_levels, NoiseModel, TwoQubitAction};
use super::simulate::{ideal_checkpoints, simulate_noisy};
use crate::error::{invalid, Error, Result};
use crate::io::{fmt_float, CsvTable};
use crate::unitary_fit::{error_metrics, ErrorMetrics, FsimAngles};

pub const DEFAULT_CIRCUITS: usize = 100;
pub const DEFAULT_SHOTS: u32 = 1200;

fn default_circuits() -> usize {
    DEFAULT_CIRCUITS
}

fn default_n_qubits() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XebSpec {
    #[serde(default = "default_n_qubits")]
    pub n_qubits: usize,
    #[serde(default = "default_circuits")]
    pub circuits: usize,
    /// Circuit depths at which the ensemble is evaluated.
    pub cycles: Vec<usize>,
    pub seed: u64,
    #[serde(default)]
    pub noise: NoiseModel,
    /// Sample this many bitstrings per circuit and depth instead of using exact probabilities.
    #[serde(default)]
    pub shots: Option<u32>,
}

impl XebSpec {
    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.n_qubits) {
            return Err(invalid("xeb.n_qubits", format!("must be 1 or 2, got {}", self.n_qubits)));
        }
        if self.circuits == 0 {
            return Err(invalid("xeb.circuits", "must be >= 1"));
        }
        if self.cycles.len() < 4 {
            return Err(invalid("xeb.cycles", "need at least 4 depths to fit a decay"));
        }
        if self.cycles.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("xeb.cycles", "depths must be strictly increasing"));
        }
        if self.shots == Some(0) {
            return Err(invalid("xeb.shots", "must be >= 1"));
        }
        self.noise.validate()
    }

    fn max_depth(&self) -> usize {
        self.cycles.last().copied().unwrap_or(0).max(1)
    }
}

/// Mean and standard error over circuits at each depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub m: Vec<usize>,
    pub value: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl Series {
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.m
            .iter()
            .zip(&self.value)
            .filter(|(_, v)| v.is_finite())
            .map(|(&m, &v)| (m as f64, v))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut t = CsvTable::new(&["m", "value", "stderr"]);
        for k in 0..self.m.len() {
            t.push(vec![self.m[k].to_string(), fmt_float(self.value[k]), fmt_float(self.stderr[k])]);
        }
        t.render()
    }

    fn from_samples(m: &[usize], samples: &[Vec<f64>]) -> Self {
        let mut value = Vec::with_capacity(m.len());
        let mut stderr = Vec::with_capacity(m.len());
        for s in samples {
            let n = s.len() as f64;
            let mean = s.iter().sum::<f64>() / n;
            let var = if s.len() > 1 { s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            value.push(if s.is_empty() { f64::NAN } else { mean });
            stderr.push(if s.is_empty() { f64::NAN } else { (var / n).sqrt() });
        }
        Self { m: m.to_vec(), value, stderr }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XebReport {
    pub n_qubits: usize,
    pub circuits: usize,
    pub seed: u64,
    pub shots: Option<u32>,
    pub alpha: Series,
    pub alpha_fit: Option<ExpFit>,
    pub cycle_metrics: Option<ErrorMetrics>,
    pub purity: Series,
    pub purity_fit: Option<ExpFit>,
    pub purity_metrics: Option<ErrorMetrics>,
    pub leakage: Series,
    pub leakage_fit: Option<LeakageFit>,
    pub budget: Option<ErrorBudget>,
    /// Circuit/depth pairs left out of α because the ideal distribution had a zero.
    pub skipped_alpha_samples: usize,
    pub warnings: Vec<String>,
}

/// One row of a shot-count table.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CountRecord {
    pub circuit_id: u64,
    pub m: usize,
    pub bitstring: String,
    pub count: u64,
}

pub struct XebRun {
    pub report: XebReport,
    pub counts: Option<Vec<CountRecord>>,
}

struct CircuitOutcome {
    alpha: Vec<Option<f64>>,
    purity: Vec<f64>,
    leaked: Vec<f64>,
    counts: Vec<CountRecord>,
}

fn bitstring(index: usize, n_qubits: usize) -> String {
    (0..n_qubits).rev().map(|b| if index >> b & 1 == 1 { '1' } else { '0' }).collect()
}

fn sample_counts(probs: &[f64], shots: u32, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let total: f64 = probs.iter().sum();
    for _ in 0..shots {
        let mut u = rng.gen::<f64>() * total;
        let mut k = 0;
        while k + 1 < probs.len() && u >= probs[k] {
            u -= probs[k];
            k += 1;
        }
        counts[k] += 1;
    }
    counts
}

fn shot_rng(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id.wrapping_add(1 << 63));
    rng
}

/// Simulates `spec.circuits` random circuits with the given two-qubit action
/// and compares them against circuits built from the `expected` gate.
pub fn run_xeb(spec: &XebSpec, action: &TwoQubitAction, expected: &FsimAngles) -> Result<XebRun> {
    spec.validate()?;
    let n = spec.n_qubits;
    let comp = computational_levels(n);
    let outcomes: Vec<Result<CircuitOutcome>> = (0..spec.circuits as u64)
        .into_par_iter()
        .map(|id| {
            let circuit = gen_circuit(circuit_seed(spec.seed, id), spec.max_depth(), n)?;
            let ideal = ideal_checkpoints(&circuit, expected, &spec.cycles)?;
            let noisy = simulate_noisy(&circuit, action, &spec.noise, &spec.cycles)?;
            let mut rng = shot_rng(spec.seed, id);
            let mut out = CircuitOutcome { alpha: vec![], purity: vec![], leaked: vec![], counts: vec![] };
            for (q, cp) in ideal.iter().zip(&noisy) {
                let measured = match spec.shots {
                    Some(shots) => {
                        let c = sample_counts(&cp.probabilities, shots, &mut rng);
                        for (k, &count) in c.iter().enumerate() {
                            out.counts.push(CountRecord { circuit_id: id, m: cp.m, bitstring: bitstring(k, n), count });
                        }
                        c.iter().map(|&x| x as f64 / shots as f64).collect()
                    }
                    None => cp.probabilities.clone(),
                };
                out.alpha.push(alpha(&measured, q).ok());
                out.purity.push(sqrt_purity(&cp.rho, comp));
                out.leaked.push(cp.leaked);
            }
            Ok(out)
        })
        .collect();
    let outcomes: Vec<CircuitOutcome> = outcomes.into_iter().collect::<Result<_>>()?;

    let depth_count = spec.cycles.len();
    let column = |f: &dyn Fn(&CircuitOutcome, usize) -> Option<f64>| -> Vec<Vec<f64>> {
        (0..depth_count).map(|k| outcomes.iter().filter_map(|o| f(o, k)).collect()).collect()
    };
    let alpha_samples = column(&|o, k| o.alpha[k]);
    let skipped = depth_count * spec.circuits - alpha_samples.iter().map(Vec::len).sum::<usize>();
    let alpha_series = Series::from_samples(&spec.cycles, &alpha_samples);
    let purity_series = Series::from_samples(&spec.cycles, &column(&|o, k| Some(o.purity[k])));
    let leakage_series = Series::from_samples(&spec.cycles, &column(&|o, k| Some(o.leaked[k])));

    let mut warnings = Vec::new();
    let report = analyze(spec, alpha_series, purity_series, leakage_series, skipped, &mut warnings);
    let counts = spec.shots.map(|_| {
        let mut all: Vec<CountRecord> = outcomes.into_iter().flat_map(|o| o.counts).collect();
        all.sort();
        all
    });
    Ok(XebRun { report, counts })
}

fn decay_metrics(fit: &Option<ExpFit>, n_qubits: usize, what: &str, warnings: &mut Vec<String>) -> Option<ErrorMetrics> {
    let fit = fit.as_ref()?;
    if !fit.identifiable {
        warnings.push(format!("{what}: decay amplitude not resolved above the fit residual"));
    } else if !fit.decaying {
        warnings.push(format!("{what}: fitted p = {} does not decay", fit.p));
    }
    error_metrics(fit.p.clamp(0.0, 1.0), n_qubits as u32).ok()
}

fn analyze(
    spec: &XebSpec,
    alpha: Series,
    purity: Series,
    leakage: Series,
    skipped: usize,
    warnings: &mut Vec<String>,
) -> XebReport {
    let mut fit = |s: &Series, what: &str| match fit_exponential(&s.points()) {
        Ok(f) => Some(f),
        Err(e) => {
            warnings.push(format!("{what} fit failed: {e}"));
            None
        }
    };
    let alpha_fit = fit(&alpha, "alpha");
    let purity_fit = fit(&purity, "purity");
    let leakage_fit = match fit_leakage(&leakage.points()) {
        Ok(f) => {
            if f.identifiable && !f.physical {
                warnings.push(format!("leakage fit is non-physical (Gamma = {})", f.gamma));
            }
            Some(f)
        }
        Err(e) => {
            warnings.push(format!("leakage fit failed: {e}"));
            None
        }
    };
    let cycle_metrics = decay_metrics(&alpha_fit, spec.n_qubits, "alpha", warnings);
    let purity_metrics = decay_metrics(&purity_fit, spec.n_qubits, "purity", warnings);
    let r_leak = leakage_fit.map(|f| f.gamma_up.max(0.0)).unwrap_or(0.0);
    let budget = match (cycle_metrics, purity_metrics) {
        (Some(x), Some(p)) => error_budget(x.r_pauli, p.r_pauli, r_leak).ok(),
        _ => None,
    };
    if budget.is_some_and(|b| b.clamped) {
        warnings.push("error budget: negative contribution clamped to zero".into());
    }
    XebReport {
        n_qubits: spec.n_qubits,
        circuits: spec.circuits,
        seed: spec.seed,
        shots: spec.shots,
        alpha,
        alpha_fit,
        cycle_metrics,
        purity,
        purity_fit,
        purity_metrics,
        leakage,
        leakage_fit,
        budget,
        skipped_alpha_samples: skipped,
        warnings: warnings.clone(),
    }
}

pub fn render_counts_csv(records: &[CountRecord]) -> String {
    let mut t = CsvTable::new(&["circuit_id", "m", "bitstring", "count"]);
    for r in records {
        t.push(vec![r.circuit_id.to_string(), r.m.to_string(), r.bitstring.clone(), r.count.to_string()]);
    }
    t.render()
}

/// Reads `circuit_id,m,bitstring,count` rows; `#` lines are comments.
pub fn parse_counts_csv(text: &str) -> Result<Vec<CountRecord>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["circuit_id", "m", "bitstring", "count"] {
        return Err(Error::Parse(format!("unexpected header {:?}", headers.iter().collect::<Vec<_>>())));
    }
    let mut out = Vec::new();
    let mut width = None;
    for row in reader.deserialize::<CountRecord>() {
        let r = row?;
        if r.bitstring.is_empty() || r.bitstring.len() > 2 || !r.bitstring.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::Parse(format!("bad bitstring {:?}", r.bitstring)));
        }
        if *width.get_or_insert(r.bitstring.len()) != r.bitstring.len() {
            return Err(Error::Parse("bitstrings of different lengths".into()));
        }
        out.push(r);
    }
    Ok(out)
}

/// α per depth from external counts, with the ideal distributions regenerated
/// from `spec.seed`.
pub fn alpha_from_counts(records: &[CountRecord], spec: &XebSpec, expected: &FsimAngles) -> Result<Series> {
    let mut grouped: BTreeMap<(u64, usize), Vec<u64>> = BTreeMap::new();
    let dim = 1usize << spec.n_qubits;
    for r in records {
        if r.bitstring.len() != spec.n_qubits {
            return Err(Error::Parse(format!("bitstring {:?} does not match {} qubit(s)", r.bitstring, spec.n_qubits)));
        }
        let idx = usize::from_str_radix(&r.bitstring, 2).map_err(|e| Error::Parse(e.to_string()))?;
        grouped.entry((r.circuit_id, r.m)).or_insert_with(|| vec![0; dim])[idx] += r.count;
    }
    let mut samples = vec![Vec::new(); spec.cycles.len()];
    let mut cache: BTreeMap<u64, Vec<Vec<f64>>> = BTreeMap::new();
    for ((id, m), counts) in grouped {
        let k = spec.cycles.iter().position(|&c| c == m).ok_or_else(|| {
            Error::Parse(format!("depth {m} is not among the configured cycles"))
        })?;
        let total: u64 = counts.iter().sum();
        if total == 0 {
            continue;
        }
        let ideal = match cache.get(&id) {
            Some(v) => v,
            None => {
                let circuit = gen_circuit(circuit_seed(spec.seed, id), spec.max_depth(), spec.n_qubits)?;
                cache.entry(id).or_insert(ideal_checkpoints(&circuit, expected, &spec.cycles)?)
            }
        };
        let measured: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
        if let Ok(a) = alpha(&measured, &ideal[k]) {
            samples[k].push(a);
        }
    }
    Ok(Series::from_samples(&spec.cycles, &samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(noise: NoiseModel) -> XebSpec {
        XebSpec { n_qubits: 2, circuits: 12, cycles: vec![1, 5, 10, 20, 40], seed: 99, noise, shots: None }
    }

    #[test]
    fn noiseless_run_has_unit_alpha() {
        let gate = FsimAngles::new(1.42, 0.48, 2.02, 4.34, 4.39);
        let s = XebSpec { cycles: vec![1, 10, 20, 50, 100], ..spec(NoiseModel::noiseless()) };
        let run = run_xeb(&s, &TwoQubitAction::Ideal(gate), &gate).unwrap();
        for v in &run.report.alpha.value {
            assert!((v - 1.0).abs() < 1e-9, "{v}");
        }
        for v in &run.report.purity.value {
            assert!((v - 1.0).abs() < 1e-9);
        }
        assert!(run.counts.is_none());
    }

    #[test]
    fn depolarizing_run_decays_at_the_channel_rate() {
        let eps = 0.01;
        let gate = FsimAngles::iswap();
        let s = XebSpec { cycles: vec![1, 10, 20, 40, 60, 80], ..spec(NoiseModel::depolarizing(eps)) };
        let run = run_xeb(&s, &TwoQubitAction::Ideal(gate), &gate).unwrap();
        let p = run.report.alpha_fit.unwrap().p;
        let want = 1.0 - eps * 16.0 / 15.0;
        assert!((p - want).abs() < 1e-6, "{p} vs {want}");
        let pp = run.report.purity_fit.unwrap().p;
        assert!((pp - want).abs() < 1e-6);
    }

    #[test]
    fn runs_are_reproducible_and_counts_round_trip() {
        let gate = FsimAngles::iswap();
        let s = XebSpec { shots: Some(200), circuits: 4, ..spec(NoiseModel::depolarizing(0.02)) };
        let a = run_xeb(&s, &TwoQubitAction::Ideal(gate), &gate).unwrap();
        let b = run_xeb(&s, &TwoQubitAction::Ideal(gate), &gate).unwrap();
        assert_eq!(a.report, b.report);
        let counts = a.counts.unwrap();
        assert_eq!(counts.len(), 4 * 5 * 4);
        let text = render_counts_csv(&counts);
        let back = parse_counts_csv(&text).unwrap();
        assert_eq!(back, counts);
        let offline = alpha_from_counts(&back, &s, &gate).unwrap();
        for (x, y) in offline.value.iter().zip(&a.report.alpha.value) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn counts_parser_rejects_garbage() {
        assert!(parse_counts_csv("a,b\n1,2\n").is_err());
        assert!(parse_counts_csv("circuit_id,m,bitstring,count\n0,1,0a,3\n").is_err());
        assert!(parse_counts_csv("circuit_id,m,bitstring,count\n0,1,01,3\n0,1,1,3\n").is_err());
        assert!(parse_counts_csv("circuit_id,m,bitstring,count\n0,1,01,-3\n").is_err());
        assert_eq!(parse_counts_csv("# meta\ncircuit_id,m,bitstring,count\n0,1,01,3\n").unwrap().len(), 1);
    }

    #[test]
    fn single_qubit_mode_uses_two_level_conversions() {
        let gate = FsimAngles::iswap();
        let s = XebSpec { n_qubits: 1, ..spec(NoiseModel::depolarizing(0.01)) };
        let run = run_xeb(&s, &TwoQubitAction::Ideal(gate), &gate).unwrap();
        let m = run.report.cycle_metrics.unwrap();
        assert_eq!(m.dimension, 2);
        assert!((m.r_pauli - 0.01).abs() < 1e-6, "{m:?}");
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let gate = FsimAngles::iswap();
        let mut s = spec(NoiseModel::noiseless());
        s.cycles = vec![1, 2, 2, 3];
        assert!(run_xeb(&s, &TwoQubitAction::Ideal(gate), &gate).is_err());
        s.cycles = vec![1, 2, 3];
        assert!(s.validate().is_err());
        let s = XebSpec { n_qubits: 3, ..spec(NoiseModel::noiseless()) };
        assert!(s.validate().is_err());
    }
}
