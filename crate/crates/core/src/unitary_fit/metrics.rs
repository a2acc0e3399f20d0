//! Conversions between decay parameters, average errors and Pauli errors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    pub p: f64,
    pub r: f64,
    pub r_pauli: f64,
    pub fidelity: f64,
    pub dimension: u32,
}

/// `r = (N−1)/N (1−p)`, `r_P = (N+1)/N r`, `F = 1 − r`, with `N = 2^n_qubits`.
pub fn error_metrics(p: f64, n_qubits: u32) -> Result<ErrorMetrics> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("decay parameter must lie in [0, 1], got {p}")));
    }
    if n_qubits == 0 || n_qubits > 16 {
        return Err(Error::Domain(format!("unsupported qubit count {n_qubits}")));
    }
    let n = (1u32 << n_qubits) as f64;
    let r = (n - 1.0) / n * (1.0 - p);
    Ok(ErrorMetrics {
        p,
        r,
        r_pauli: (n + 1.0) / n * r,
        fidelity: 1.0 - r,
        dimension: 1 << n_qubits,
    })
}

/// Average error corresponding to a Pauli error in dimension `2^n_qubits`.
pub fn average_from_pauli(r_pauli: f64, n_qubits: u32) -> f64 {
    let n = (1u64 << n_qubits) as f64;
    n / (n + 1.0) * r_pauli
}

/// Decay parameter of a channel with the given Pauli error.
pub fn decay_from_pauli(r_pauli: f64, n_qubits: u32) -> f64 {
    let n = (1u64 << n_qubits) as f64;
    1.0 - r_pauli * n * n / (n * n - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateError {
    pub r_gate_pauli: f64,
    /// The cycle was better than the single-qubit product; the raw value was negative.
    pub clamped: bool,
}

/// Two-qubit gate Pauli error from `(1 − r_cycle) = (1 − r_qa)(1 − r_qb)(1 − r_gate)`.
pub fn gate_error_from_cycle(r_cycle: f64, r_qa: f64, r_qb: f64) -> Result<GateError> {
    for (name, v) in [("r_cycle", r_cycle), ("r_qa", r_qa), ("r_qb", r_qb)] {
        if !(0.0..1.0).contains(&v) {
            return Err(Error::Domain(format!("{name} must lie in [0, 1), got {v}")));
        }
    }
    let raw = 1.0 - (1.0 - r_cycle) / ((1.0 - r_qa) * (1.0 - r_qb));
    Ok(GateError { r_gate_pauli: raw.max(0.0), clamped: raw < 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_qubit_cycle_decay_conversion() {
        let m = error_metrics(0.9931, 2).unwrap();
        assert!((m.r - 5.175e-3).abs() < 1e-6);
        assert!((m.r_pauli - 6.469e-3).abs() < 1e-6);
        assert_eq!(m.dimension, 4);
    }

    #[test]
    fn perfect_decay_has_no_error() {
        for n in 1..=3 {
            let m = error_metrics(1.0, n).unwrap();
            assert_eq!((m.r, m.r_pauli, m.fidelity), (0.0, 0.0, 1.0));
        }
    }

    #[test]
    fn pauli_error_to_average_fidelity() {
        let r = average_from_pauli(4.3e-3, 2);
        assert!((1.0 - r - 0.9966).abs() < 1e-4);
        assert!((1.0 - average_from_pauli(5.8e-3, 2) - 0.9954).abs() < 1e-4);
    }

    #[test]
    fn out_of_range_decay_is_rejected() {
        assert!(error_metrics(1.2, 2).is_err());
        assert!(error_metrics(-0.1, 1).is_err());
    }

    #[test]
    fn gate_error_examples() {
        assert_eq!(gate_error_from_cycle(0.0, 0.0, 0.0).unwrap().r_gate_pauli, 0.0);
        let e = gate_error_from_cycle(6.0e-3, 1.0e-3, 1.0e-3).unwrap();
        assert!((e.r_gate_pauli - 4.00901e-3).abs() < 1e-8);
        let e = gate_error_from_cycle(2.0e-3, 2.0e-3, 0.0).unwrap();
        assert!(e.r_gate_pauli.abs() < 1e-15);
        let e = gate_error_from_cycle(1.0e-3, 2.0e-3, 1.0e-3).unwrap();
        assert!(e.clamped && e.r_gate_pauli == 0.0);
        assert!(gate_error_from_cycle(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn single_qubit_decay_from_reference_value() {
        // p = 0.9981 converts to a Pauli error of 1.425e-3 for one qubit.
        let m = error_metrics(0.9981, 1).unwrap();
        assert!((m.r_pauli - 1.425e-3).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn pauli_to_average_ratio(p in 0.0..=1.0f64, n in 1u32..4) {
            let m = error_metrics(p, n).unwrap();
            let big_n = (1u32 << n) as f64;
            if m.r > 0.0 {
                prop_assert!((m.r_pauli / m.r - (big_n + 1.0) / big_n).abs() < 1e-12);
            }
            prop_assert!((decay_from_pauli(m.r_pauli, n) - p).abs() < 1e-12);
        }
    }
}
