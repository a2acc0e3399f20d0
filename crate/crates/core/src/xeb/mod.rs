//! Cross-entropy benchmarking on a simulated transmon pair: random circuits,
//! noisy density-operator simulation, decay fits and the error budget.

mod analysis;
mod circuit;
mod gates;
mod noise;
mod run;
mod simulate;

pub use analysis::{
    alpha, cross_entropy, error_budget, fit_exponential, fit_leakage, purity_series, sqrt_purity, ErrorBudget,
    ExpFit, LeakageFit, BOOTSTRAP_RESAMPLES,
};
pub use circuit::{circuit_seed, gen_circuit, RandomCircuit};
pub use gates::{qutrit_gate, single_qubit_gate, GATE_AXES, GATE_COUNT, GATE_NAMES};
pub use noise::{
    apply_superop, choi_min_eigenvalue, computational_levels, decoherence_superop, dephase_leakage, depolarize,
    qutrit_dim, NoiseModel, TwoQubitAction, DEFAULT_CYCLE_TIME,
};
pub use run::{
    alpha_from_counts, parse_counts_csv, render_counts_csv, run_xeb, CountRecord, Series, XebReport, XebRun,
    XebSpec, DEFAULT_CIRCUITS, DEFAULT_SHOTS,
};
pub use simulate::{ideal_checkpoints, simulate_ideal, simulate_noisy, NoisyCheckpoint, TRACE_TOLERANCE};
