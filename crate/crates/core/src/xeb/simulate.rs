use nalgebra::{DMatrix, DVector};

use super::circuit::RandomCircuit;
use super::gates::{qutrit_gate, single_qubit_gate};
use super::noise::{
    apply_superop, computational_levels, decoherence_superop, dephase_leakage, depolarize, qutrit_dim,
    NoiseModel, TwoQubitAction,
};
use crate::error::{invalid, Error, Result};
use crate::linalg::C64;
use crate::unitary_fit::{build_unitary, FsimAngles};

/// Largest tolerated drift of the density-operator trace.
pub const TRACE_TOLERANCE: f64 = 1e-9;

fn layer_qubits(layer: &[u8]) -> DMatrix<C64> {
    let g = |k: u8| {
        let m = single_qubit_gate(k as usize);
        DMatrix::from_fn(2, 2, |r, c| m[(r, c)])
    };
    match layer {
        [a] => g(*a),
        [a, b] => g(*a).kronecker(&g(*b)),
        _ => unreachable!("circuits have one or two qubits"),
    }
}

fn layer_qutrits(layer: &[u8]) -> DMatrix<C64> {
    match layer {
        [a] => qutrit_gate(*a as usize),
        [a, b] => qutrit_gate(*a as usize).kronecker(&qutrit_gate(*b as usize)),
        _ => unreachable!("circuits have one or two qubits"),
    }
}

fn check_checkpoints(circuit: &RandomCircuit, checkpoints: &[usize]) -> Result<()> {
    if let Some(&m) = checkpoints.iter().find(|&&m| m > circuit.cycles()) {
        return Err(invalid("cycles", format!("checkpoint {m} exceeds circuit length {}", circuit.cycles())));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("cycles", "checkpoints must be strictly increasing"));
    }
    Ok(())
}

/// Noiseless bitstring probabilities after the first `m` cycles and the
/// final layer, for each `m` in `checkpoints` (strictly increasing).
pub fn ideal_checkpoints(
    circuit: &RandomCircuit,
    gate: &FsimAngles,
    checkpoints: &[usize],
) -> Result<Vec<Vec<f64>>> {
    check_checkpoints(circuit, checkpoints)?;
    let dim = 1usize << circuit.n_qubits;
    let u2 = build_unitary(gate);
    let u2 = DMatrix::from_fn(4, 4, |r, c| u2[(r, c)]);
    let closing = layer_qubits(&circuit.final_layer);
    let mut psi = DVector::<C64>::zeros(dim);
    psi[0] = C64::from(1.0);
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    for m in 0..=circuit.cycles() {
        while next.peek() == Some(&&m) {
            let fin = &closing * &psi;
            out.push(fin.iter().map(|a| a.norm_sqr()).collect());
            next.next();
        }
        if m == circuit.cycles() {
            break;
        }
        psi = layer_qubits(&circuit.layers[m]) * psi;
        if circuit.n_qubits == 2 {
            psi = &u2 * psi;
        }
    }
    Ok(out)
}

/// Noiseless probabilities of the whole circuit.
pub fn simulate_ideal(circuit: &RandomCircuit, gate: &FsimAngles) -> Vec<f64> {
    ideal_checkpoints(circuit, gate, &[circuit.cycles()])
        .expect("full-length checkpoint is valid")
        .remove(0)
}

#[derive(Debug, Clone)]
pub struct NoisyCheckpoint {
    pub m: usize,
    /// Bitstring probabilities with `|2⟩` read as `|1⟩`.
    pub probabilities: Vec<f64>,
    /// Population outside the computational states.
    pub leaked: f64,
    /// Density operator after the final layer.
    pub rho: DMatrix<C64>,
}

/// Density-operator simulation over three levels per transmon. Each cycle
/// applies the single-qubit layer, the two-qubit action, removes coherences
/// between computational and leaked levels, then decoherence and
/// depolarization.
pub fn simulate_noisy(
    circuit: &RandomCircuit,
    action: &TwoQubitAction,
    noise: &NoiseModel,
    checkpoints: &[usize],
) -> Result<Vec<NoisyCheckpoint>> {
    noise.validate()?;
    check_checkpoints(circuit, checkpoints)?;
    let n = circuit.n_qubits;
    let big_n = (1usize << n) as f64;
    if noise.extra_depolarizing > (big_n * big_n - 1.0) / (big_n * big_n) {
        return Err(invalid(
            "noise.extra_depolarizing",
            format!("at most {} for {n} qubit(s)", (big_n * big_n - 1.0) / (big_n * big_n)),
        ));
    }
    let d = qutrit_dim(n);
    let u2 = (n == 2).then(|| action.unitary());
    let superop = decoherence_superop(noise, n);
    let closing = layer_qutrits(&circuit.final_layer);
    let mut rho = DMatrix::<C64>::zeros(d, d);
    rho[(0, 0)] = C64::from(1.0);
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    for m in 0..=circuit.cycles() {
        while next.peek() == Some(&&m) {
            let fin = &closing * &rho * closing.adjoint();
            out.push(measure(m, fin, n));
            next.next();
        }
        if m == circuit.cycles() {
            break;
        }
        let l = layer_qutrits(&circuit.layers[m]);
        rho = &l * rho * l.adjoint();
        if let Some(u) = &u2 {
            rho = u * rho * u.adjoint();
            dephase_leakage(&mut rho, n);
        }
        if let Some(s) = &superop {
            rho = apply_superop(s, &rho);
        }
        depolarize(&mut rho, noise.extra_depolarizing, n);
        let deviation = (rho.trace().re - 1.0).abs();
        if deviation > TRACE_TOLERANCE {
            return Err(Error::TraceDeviation { deviation });
        }
    }
    Ok(out)
}

fn measure(m: usize, rho: DMatrix<C64>, n_qubits: usize) -> NoisyCheckpoint {
    let mut probabilities = vec![0.0; 1 << n_qubits];
    for level in 0..rho.nrows() {
        let bits = if n_qubits == 1 {
            level.min(1)
        } else {
            2 * (level / 3).min(1) + (level % 3).min(1)
        };
        probabilities[bits] += rho[(level, level)].re.max(0.0);
    }
    let comp: f64 = computational_levels(n_qubits).iter().map(|&i| rho[(i, i)].re).sum();
    NoisyCheckpoint { m, probabilities, leaked: (1.0 - comp).max(0.0), rho }
}
