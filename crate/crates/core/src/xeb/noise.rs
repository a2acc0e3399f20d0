//! Per-cycle channels on the two-qutrit (or single-qutrit) density operator.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::C64;
use crate::propagator::FrameBlocks;
use crate::unitary_fit::{build_unitary, FsimAngles};

pub const DEFAULT_CYCLE_TIME: f64 = 38.0;

fn default_cycle_time() -> f64 {
    DEFAULT_CYCLE_TIME
}

/// Decoherence and synthetic depolarization applied once per cycle.
/// Missing `t1`/`tphi` values mean that process is off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    #[serde(default)]
    pub t1_a: Option<f64>,
    #[serde(default)]
    pub t1_b: Option<f64>,
    #[serde(default)]
    pub tphi_a: Option<f64>,
    #[serde(default)]
    pub tphi_b: Option<f64>,
    #[serde(default = "default_cycle_time")]
    pub cycle_time: f64,
    /// Pauli error of a depolarizing channel on the computational subspace.
    #[serde(default)]
    pub extra_depolarizing: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::noiseless()
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            t1_a: None,
            t1_b: None,
            tphi_a: None,
            tphi_b: None,
            cycle_time: DEFAULT_CYCLE_TIME,
            extra_depolarizing: 0.0,
        }
    }

    pub fn depolarizing(pauli_error: f64) -> Self {
        Self { extra_depolarizing: pauli_error, ..Self::noiseless() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, t) in [
            ("noise.t1_a", self.t1_a),
            ("noise.t1_b", self.t1_b),
            ("noise.tphi_a", self.tphi_a),
            ("noise.tphi_b", self.tphi_b),
        ] {
            if let Some(t) = t {
                if !(t.is_finite() && t > 0.0) {
                    return Err(invalid(name, format!("must be > 0 ns, got {t}")));
                }
            }
        }
        if !(self.cycle_time.is_finite() && self.cycle_time >= 0.0) {
            return Err(invalid("noise.cycle_time", format!("must be >= 0, got {}", self.cycle_time)));
        }
        if !(0.0..=1.0).contains(&self.extra_depolarizing) {
            return Err(invalid(
                "noise.extra_depolarizing",
                format!("must lie in [0, 1], got {}", self.extra_depolarizing),
            ));
        }
        Ok(())
    }

    fn has_decoherence(&self) -> bool {
        self.cycle_time > 0.0
            && [self.t1_a, self.t1_b, self.tphi_a, self.tphi_b].iter().any(Option::is_some)
    }
}

/// Level indices of the computational states for `n` transmons with three
/// levels each (`|ab⟩ ↦ 3a + b`), in bitstring order.
pub fn computational_levels(n_qubits: usize) -> &'static [usize] {
    if n_qubits == 1 {
        &[0, 1]
    } else {
        &[0, 1, 3, 4]
    }
}

pub fn qutrit_dim(n_qubits: usize) -> usize {
    3usize.pow(n_qubits as u32)
}

/// Two-qubit layer of each cycle, acting on the two-qutrit space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TwoQubitAction {
    /// Five-angle unitary on the computational states, identity elsewhere.
    Ideal(FsimAngles),
    /// Propagated excitation blocks; `|12⟩`, `|21⟩`, `|22⟩` are left untouched.
    Blocks(FrameBlocks),
}

impl TwoQubitAction {
    pub fn unitary(&self) -> DMatrix<C64> {
        let mut u = DMatrix::<C64>::identity(9, 9);
        match self {
            TwoQubitAction::Ideal(angles) => {
                let m = build_unitary(angles);
                let idx = computational_levels(2);
                for (r, &i) in idx.iter().enumerate() {
                    for (c, &j) in idx.iter().enumerate() {
                        u[(i, j)] = m[(r, c)];
                    }
                }
            }
            TwoQubitAction::Blocks(b) => {
                let one = [1, 3];
                let two = [2, 4, 6];
                for r in 0..2 {
                    for c in 0..2 {
                        u[(one[r], one[c])] = b.one[(r, c)];
                    }
                }
                for r in 0..3 {
                    for c in 0..3 {
                        u[(two[r], two[c])] = b.two[(r, c)];
                    }
                }
            }
        }
        u
    }
}

/// Lowering operator and number operator of one transmon truncated to three levels.
fn lowering() -> DMatrix<C64> {
    let mut a = DMatrix::<C64>::zeros(3, 3);
    a[(0, 1)] = C64::from(1.0);
    a[(1, 2)] = C64::from(std::f64::consts::SQRT_2);
    a
}

fn number() -> DMatrix<C64> {
    DMatrix::from_diagonal(&DVector::from_vec(vec![C64::from(0.0), C64::from(1.0), C64::from(2.0)]))
}

fn embed(op: &DMatrix<C64>, qubit: usize, n_qubits: usize) -> DMatrix<C64> {
    let id = DMatrix::<C64>::identity(3, 3);
    match (n_qubits, qubit) {
        (1, _) => op.clone(),
        (_, 0) => op.kronecker(&id),
        _ => id.kronecker(op),
    }
}

/// Superoperator of `exp(L t)` for amplitude damping (`sqrt(1/T1) a`) and
/// pure dephasing (`sqrt(2/Tphi) n`) on each transmon, acting on
/// column-stacked density matrices.
pub fn decoherence_superop(noise: &NoiseModel, n_qubits: usize) -> Option<DMatrix<C64>> {
    if !noise.has_decoherence() {
        return None;
    }
    let d = qutrit_dim(n_qubits);
    let id = DMatrix::<C64>::identity(d, d);
    let mut gen = DMatrix::<C64>::zeros(d * d, d * d);
    let rates = [(noise.t1_a, noise.tphi_a), (noise.t1_b, noise.tphi_b)];
    for (q, &(t1, tphi)) in rates.iter().enumerate().take(n_qubits) {
        let mut jumps = Vec::new();
        if let Some(t1) = t1 {
            jumps.push(embed(&lowering(), q, n_qubits) * C64::from((1.0 / t1).sqrt()));
        }
        if let Some(tphi) = tphi {
            jumps.push(embed(&number(), q, n_qubits) * C64::from((2.0 / tphi).sqrt()));
        }
        for l in jumps {
            let ldl = l.adjoint() * &l;
            gen += l.conjugate().kronecker(&l);
            gen -= id.kronecker(&ldl) * C64::from(0.5);
            gen -= ldl.transpose().kronecker(&id) * C64::from(0.5);
        }
    }
    Some((gen * C64::from(noise.cycle_time)).exp())
}

pub fn apply_superop(superop: &DMatrix<C64>, rho: &DMatrix<C64>) -> DMatrix<C64> {
    let d = rho.nrows();
    let v = DVector::from_column_slice(rho.as_slice());
    let out = superop * v;
    DMatrix::from_column_slice(d, d, out.as_slice())
}

/// Depolarizing with Pauli error `pauli_error` on the computational block:
/// that block becomes `λ ρ_c + (1 − λ) Tr(ρ_c) I/N`, coherences with leaked
/// levels shrink by `λ`, and leaked populations are untouched.
pub fn depolarize(rho: &mut DMatrix<C64>, pauli_error: f64, n_qubits: usize) {
    if pauli_error == 0.0 {
        return;
    }
    let comp = computational_levels(n_qubits);
    let n = comp.len() as f64;
    let lambda = 1.0 - pauli_error * n * n / (n * n - 1.0);
    let tr: f64 = comp.iter().map(|&i| rho[(i, i)].re).sum();
    let d = rho.nrows();
    for r in 0..d {
        for c in 0..d {
            let (rc, cc) = (comp.contains(&r), comp.contains(&c));
            if rc || cc {
                rho[(r, c)] *= lambda;
            }
            if rc && r == c {
                rho[(r, c)] += C64::from((1.0 - lambda) * tr / n);
            }
        }
    }
}

/// Removes coherences between computational and leaked levels.
pub fn dephase_leakage(rho: &mut DMatrix<C64>, n_qubits: usize) {
    let comp = computational_levels(n_qubits);
    let d = rho.nrows();
    for r in 0..d {
        for c in 0..d {
            if comp.contains(&r) != comp.contains(&c) {
                rho[(r, c)] = C64::from(0.0);
            }
        }
    }
}

/// Smallest eigenvalue of the Choi matrix `Σ |i⟩⟨j| ⊗ E(|i⟩⟨j|)`.
/// Non-negative exactly when `E` is completely positive.
pub fn choi_min_eigenvalue(dim: usize, channel: impl Fn(&DMatrix<C64>) -> DMatrix<C64>) -> f64 {
    let mut choi = DMatrix::<C64>::zeros(dim * dim, dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut e = DMatrix::<C64>::zeros(dim, dim);
            e[(i, j)] = C64::from(1.0);
            let out = channel(&e);
            for r in 0..dim {
                for c in 0..dim {
                    choi[(i * dim + r, j * dim + c)] = out[(r, c)];
                }
            }
        }
    }
    let herm = (&choi + choi.adjoint()) * C64::from(0.5);
    herm.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}
