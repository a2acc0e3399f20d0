//! The eight single-qubit π/2 rotations used between two-qubit gates.

use nalgebra::DMatrix;

use crate::linalg::{CMatrix, C64};

pub const GATE_COUNT: usize = 8;

/// Rotation axes in the x-y plane, in gate-index order:
/// +X, −X, +Y, −Y, +(X+Y), −(X+Y), +(X−Y), −(X−Y).
pub const GATE_AXES: [(f64, f64); GATE_COUNT] = {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (s, s), (-s, -s), (s, -s), (-s, s)]
};

pub const GATE_NAMES: [&str; GATE_COUNT] = ["+X", "-X", "+Y", "-Y", "+(X+Y)", "-(X+Y)", "+(X-Y)", "-(X-Y)"];

/// `exp(-i π/4 (nx X + ny Y))`.
pub fn single_qubit_gate(index: usize) -> CMatrix<2> {
    let (nx, ny) = GATE_AXES[index];
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let off = C64::new(0.0, -c) * C64::new(nx, -ny);
    let off_t = C64::new(0.0, -c) * C64::new(nx, ny);
    CMatrix::<2>::new(C64::from(c), off, off_t, C64::from(c))
}

/// The same rotation on a three-level transmon, leaving `|2⟩` untouched.
pub fn qutrit_gate(index: usize) -> DMatrix<C64> {
    let g = single_qubit_gate(index);
    let mut m = DMatrix::<C64>::identity(3, 3);
    for r in 0..2 {
        for c in 0..2 {
            m[(r, c)] = g[(r, c)];
        }
    }
    m
}
