//! Five-angle photon-conserving two-qubit unitary.
//!
//! `U = e^{-i(IZ-ZI)δa/4} e^{-i(XX+YY)θ/2} e^{-iZZφ/4} e^{-i(IZ-ZI)δb/4} e^{-i(IZ+ZI)δ+/4}`
//! with `δb = (δc + δd)/2` and `δa = (δc - δd)/2`, in the basis
//! `|00⟩, |01⟩, |10⟩, |11⟩` where the left bit is qubit A.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::linalg::{CMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FsimAngles {
    pub theta: f64,
    pub phi: f64,
    pub delta_plus: f64,
    pub delta_c: f64,
    pub delta_d: f64,
}

impl FsimAngles {
    pub fn new(theta: f64, phi: f64, delta_plus: f64, delta_c: f64, delta_d: f64) -> Self {
        Self { theta, phi, delta_plus, delta_c, delta_d }
    }

    pub fn iswap() -> Self {
        Self { theta: FRAC_PI_2, ..Self::default() }
    }

    pub fn delta_a(&self) -> f64 {
        0.5 * (self.delta_c - self.delta_d)
    }

    pub fn delta_b(&self) -> f64 {
        0.5 * (self.delta_c + self.delta_d)
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.theta, self.phi, self.delta_plus, self.delta_c, self.delta_d]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        Self::new(x[0], x[1], x[2], x[3], x[4])
    }

    pub fn is_finite(&self) -> bool {
        self.to_vec().iter().all(|v| v.is_finite())
    }

    /// Representative of the gauge class with `θ ∈ [0, π/2]`, `φ ∈ [0, 2π)`,
    /// `δ+ ∈ (−π, π]` and `δc, δd ∈ (−2π, 2π]`. Every choice of angles maps
    /// to the one representative that builds the same unitary up to a global
    /// phase.
    pub fn canonical(&self) -> Self {
        extract_angles(&build_unitary(self))
    }
}

/// Unitary of the five-angle model.
pub fn build_unitary(a: &FsimAngles) -> CMatrix<4> {
    let ph = |x: f64| C64::from_polar(1.0, x);
    let da = a.delta_a();
    let db = a.delta_b();
    // Outer diagonal factors and the conditional phase commute with each
    // other, so fold them into the left and right diagonals.
    let left = [C64::from(1.0), ph(0.5 * da), ph(-0.5 * da), C64::from(1.0)];
    let zz = [ph(-0.25 * a.phi), ph(0.25 * a.phi), ph(0.25 * a.phi), ph(-0.25 * a.phi)];
    let right = [
        ph(-0.5 * a.delta_plus),
        ph(0.5 * db),
        ph(-0.5 * db),
        ph(0.5 * a.delta_plus),
    ];
    let (c, s) = (a.theta.cos(), a.theta.sin());
    let mut swap = CMatrix::<4>::zeros();
    swap[(0, 0)] = C64::from(1.0);
    swap[(1, 1)] = C64::from(c);
    swap[(2, 2)] = C64::from(c);
    swap[(1, 2)] = C64::new(0.0, -s);
    swap[(2, 1)] = C64::new(0.0, -s);
    swap[(3, 3)] = C64::from(1.0);

    let mut u = CMatrix::<4>::zeros();
    for r in 0..4 {
        for col in 0..4 {
            u[(r, col)] = left[r] * swap[(r, col)] * zz[col] * right[col];
        }
    }
    u
}

/// `arg U00 + arg U33 − arg U11 − arg U22`, wrapped to `(−π, π]`.
pub fn conditional_phase(u: &CMatrix<4>) -> f64 {
    wrap_pi((u[(0, 0)] * u[(3, 3)] / (u[(1, 1)] * u[(2, 2)])).arg())
}

pub(crate) fn wrap_pi(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// `|Tr(V†U)|` maximised over global phase, expressed as squared Frobenius
/// distance `‖U − e^{iψ} V‖²` with the optimal `ψ`.
pub(crate) fn aligned_distance(u: &CMatrix<4>, v: &CMatrix<4>) -> f64 {
    let overlap: C64 = (0..4)
        .flat_map(|r| (0..4).map(move |c| (r, c)))
        .map(|(r, c)| v[(r, c)].conj() * u[(r, c)])
        .sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C64::from(1.0) };
    u.iter().zip(v.iter()).map(|(a, b)| (a - phase * b).norm_sqr()).sum()
}

/// `1 − |Tr(V†U)|²/16`.
pub fn infidelity(u: &CMatrix<4>, v: &CMatrix<4>) -> f64 {
    let tr: C64 = (0..4).map(|k| (v.adjoint() * u)[(k, k)]).sum();
    (1.0 - tr.norm_sqr() / 16.0).max(0.0)
}

/// Closed-form angles of a photon-conserving matrix, in canonical form.
///
/// Exact for matrices produced by [`build_unitary`]; for approximately
/// photon-conserving or sub-unitary matrices it gives a starting point for
/// the numerical fit.
pub fn extract_angles(u: &CMatrix<4>) -> FsimAngles {
    let diag = 0.5 * (u[(1, 1)].norm() + u[(2, 2)].norm());
    let off = 0.5 * (u[(1, 2)].norm() + u[(2, 1)].norm());
    let theta = off.atan2(diag);

    let det_mid = u[(1, 1)] * u[(2, 2)] - u[(1, 2)] * u[(2, 1)];
    let phi = (det_mid / (u[(0, 0)] * u[(3, 3)])).arg().rem_euclid(TAU);
    let phi = if phi >= TAU { 0.0 } else { phi };
    let delta_plus = wrap_pi((u[(3, 3)] / u[(0, 0)]).arg());

    let ratio_arg = |num: C64, den: C64| {
        if num.norm() * den.norm() > 1e-300 {
            (num / den).arg()
        } else {
            0.0
        }
    };
    let dc = wrap_pi(ratio_arg(u[(1, 1)], u[(2, 2)]));
    let dd = wrap_pi(ratio_arg(u[(2, 1)], u[(1, 2)]));
    let partner = |v: f64| if v > 0.0 { v - TAU } else { v + TAU };

    let mut best = FsimAngles::new(theta, phi, delta_plus, dc, dd);
    let mut best_dist = f64::INFINITY;
    for c in [dc, partner(dc)] {
        for d in [dd, partner(dd)] {
            let cand = FsimAngles::new(theta, phi, delta_plus, c, d);
            let dist = aligned_distance(u, &build_unitary(&cand));
            // Ties (a vanishing swap or diagonal element) keep the first,
            // smallest-magnitude representative.
            if dist < best_dist - 1e-12 {
                best = cand;
                best_dist = dist;
            }
        }
    }
    best
}
