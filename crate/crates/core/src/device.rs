//! Two tunable transmons with a capacitive, frequency-dependent coupling,
//! truncated at the second excited level.
//!
//! Frequencies are cyclic and in GHz, times in ns. Hamiltonian blocks are
//! returned in the same cyclic units; propagation multiplies by `2π`.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{CMatrix, C64};

/// Lower and upper edge of the band in which the coupling must be positive.
pub const OPERATING_BAND: (f64, f64) = (4.0, 7.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    pub f_max: f64,
    pub eta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tphi: Option<f64>,
}

impl QubitParams {
    pub fn validate(&self, name: &'static str) -> Result<()> {
        if !(self.f_max.is_finite() && self.f_max > 0.0) {
            return Err(invalid(name, format!("f_max must be positive, got {}", self.f_max)));
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(invalid(name, format!("eta must be positive, got {}", self.eta)));
        }
        for (label, value) in [("t1", self.t1), ("tphi", self.tphi)] {
            if let Some(v) = value {
                if !(v.is_finite() && v > 0.0) {
                    return Err(invalid(name, format!("{label} must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }
}

/// Coupling `g = g_ref * sqrt(f_a f_b) / omega_ref`, i.e. proportional to
/// frequency and equal to `g_ref` when both qubits sit at `omega_ref`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingModel {
    pub g_ref: f64,
    pub omega_ref: f64,
}

impl CouplingModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.g_ref.is_finite() && self.g_ref > 0.0) {
            return Err(invalid("coupling.g_ref", format!("must be positive, got {}", self.g_ref)));
        }
        if !(self.omega_ref.is_finite() && self.omega_ref > 0.0) {
            return Err(invalid(
                "coupling.omega_ref",
                format!("must be positive, got {}", self.omega_ref),
            ));
        }
        Ok(())
    }

    pub fn coupling_at(&self, f_a: f64, f_b: f64) -> Result<f64> {
        if !(f_a > 0.0 && f_b > 0.0) {
            return Err(Error::Domain(format!(
                "coupling requires positive frequencies, got ({f_a}, {f_b})"
            )));
        }
        Ok(self.coupling_unchecked(f_a, f_b))
    }

    #[inline]
    pub(crate) fn coupling_unchecked(&self, f_a: f64, f_b: f64) -> f64 {
        self.g_ref * (f_a * f_b).sqrt() / self.omega_ref
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    pub qubit_a: QubitParams,
    pub qubit_b: QubitParams,
    pub coupling: CouplingModel,
}

impl DeviceParams {
    /// The swap/leakage demonstration pair: maxima of 6.28 and 6.16 GHz,
    /// nonlinearities of 223 and 240 MHz and 16.2 MHz coupling at 6 GHz.
    #[allow(clippy::approx_constant)]
    pub fn swap_demo() -> Self {
        Self {
            qubit_a: QubitParams { f_max: 6.28, eta: 0.223, t1: None, tphi: None },
            qubit_b: QubitParams { f_max: 6.16, eta: 0.240, t1: None, tphi: None },
            coupling: CouplingModel { g_ref: 0.0162, omega_ref: 6.0 },
        }
    }

    /// The benchmarking pair: maxima of 6.84 and 6.04 GHz, nonlinearities of
    /// 212 and 219 MHz, 17.1 MHz coupling at 5.89 GHz and T1 of 20 us.
    pub fn benchmark_demo() -> Self {
        Self {
            qubit_a: QubitParams { f_max: 6.84, eta: 0.212, t1: Some(20_000.0), tphi: None },
            qubit_b: QubitParams { f_max: 6.04, eta: 0.219, t1: Some(20_000.0), tphi: None },
            coupling: CouplingModel { g_ref: 0.0171, omega_ref: 5.89 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.qubit_a.validate("qubit_a")?;
        self.qubit_b.validate("qubit_b")?;
        self.coupling.validate()?;
        // g is monotone in frequency, so checking the lower band edge suffices.
        let (lo, _) = OPERATING_BAND;
        if self.coupling.coupling_unchecked(lo, lo) <= 0.0 {
            return Err(invalid("coupling", "coupling vanishes inside the operating band"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let device: Self = serde_json::from_str(text)?;
        device.validate()?;
        Ok(device)
    }

    pub fn coupling_at(&self, f_a: f64, f_b: f64) -> Result<f64> {
        self.coupling.coupling_at(f_a, f_b)
    }

    /// Mean nonlinearity, used where the two qubits are treated as identical.
    pub fn eta_mean(&self) -> f64 {
        0.5 * (self.qubit_a.eta + self.qubit_b.eta)
    }
}

/// Photon-number block of the two-transmon Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Block {
    /// Basis `|01⟩, |10⟩`.
    OneExcitation,
    /// Basis `|02⟩, |11⟩, |20⟩`.
    TwoExcitation,
}

impl Block {
    pub fn dim(self) -> usize {
        match self {
            Block::OneExcitation => 2,
            Block::TwoExcitation => 3,
        }
    }
}

/// One-excitation block in the basis `(|01⟩, |10⟩)`.
pub fn hamiltonian_1ex(f_a: f64, f_b: f64, g: f64) -> CMatrix<2> {
    CMatrix::<2>::new(C64::from(f_b), C64::from(g), C64::from(g), C64::from(f_a))
}

/// Two-excitation block in the basis `(|02⟩, |11⟩, |20⟩)`.
pub fn hamiltonian_2ex(f_a: f64, f_b: f64, eta_a: f64, eta_b: f64, g: f64) -> CMatrix<3> {
    let c = C64::from(std::f64::consts::SQRT_2 * g);
    let z = C64::from(0.0);
    CMatrix::<3>::new(
        C64::from(2.0 * f_b - eta_b),
        c,
        z,
        c,
        C64::from(f_a + f_b),
        c,
        z,
        c,
        C64::from(2.0 * f_a - eta_a),
    )
}

/// Bright `(|20⟩ + |02⟩)/√2` and dark `(|20⟩ − |02⟩)/√2` states as
/// amplitude triples in the `(|02⟩, |11⟩, |20⟩)` basis.
pub fn bright_dark_basis() -> ([C64; 3], [C64; 3]) {
    let s = C64::from(FRAC_1_SQRT_2);
    let z = C64::from(0.0);
    ([s, z, s], [-s, z, s])
}
