use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gates::GATE_COUNT;
use crate::error::{invalid, Result};

/// Single-qubit gate indices for every cycle plus the closing layer.
/// `layers[k][q]` is the gate applied to qubit `q` in cycle `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomCircuit {
    pub seed: u64,
    pub n_qubits: usize,
    pub layers: Vec<Vec<u8>>,
    pub final_layer: Vec<u8>,
}

impl RandomCircuit {
    pub fn cycles(&self) -> usize {
        self.layers.len()
    }
}

pub fn gen_circuit(seed: u64, m: usize, n_qubits: usize) -> Result<RandomCircuit> {
    if m == 0 {
        return Err(invalid("m", "circuits need at least one cycle"));
    }
    if !(1..=2).contains(&n_qubits) {
        return Err(invalid("n_qubits", format!("must be 1 or 2, got {n_qubits}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layer = |rng: &mut ChaCha8Rng| -> Vec<u8> {
        (0..n_qubits).map(|_| rng.gen_range(0..GATE_COUNT) as u8).collect()
    };
    let layers = (0..m).map(|_| layer(&mut rng)).collect();
    let final_layer = layer(&mut rng);
    Ok(RandomCircuit { seed, n_qubits, layers, final_layer })
}

/// Seed of circuit `id` in an ensemble, independent of evaluation order.
pub fn circuit_seed(master: u64, id: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(id);
    rng.next_u64()
}
