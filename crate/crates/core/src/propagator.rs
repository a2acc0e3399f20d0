//! Time evolution of the one- and two-excitation blocks under a frequency
//! trajectory, the swap and leakage errors derived from it, and the
//! closed-form rectangular-pulse expressions used as oracles.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::device::{hamiltonian_1ex, hamiltonian_2ex, Block, DeviceParams};
use crate::error::{invalid, Error, Result};
use crate::io::{fmt_float, CsvTable};
use crate::linalg::{exp_neg_i, CMatrix, C64};
use crate::pulse::{step_count, Trajectory};

pub const DEFAULT_DT: f64 = 0.005;

/// Per-step exponential integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// `exp(-i 2π H(t + dt/2) dt)`; second order in `dt`.
    Midpoint,
    /// Two-point Gauss Magnus expansion with the commutator term; fourth order.
    #[default]
    Magnus4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationOptions {
    pub dt: f64,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default)]
    pub record_history: bool,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self { dt: DEFAULT_DT, integrator: Integrator::default(), record_history: false }
    }
}

impl PropagationOptions {
    pub fn with_dt(dt: f64) -> Self {
        Self { dt, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Resolution { dt: self.dt, max: f64::INFINITY });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockState {
    pub block: Block,
    pub amplitudes: Vec<C64>,
}

impl BlockState {
    /// `|01⟩` in the one-excitation block.
    pub fn excited_b() -> Self {
        Self { block: Block::OneExcitation, amplitudes: vec![C64::from(1.0), C64::from(0.0)] }
    }

    /// `|11⟩` in the two-excitation block.
    pub fn doubly_excited() -> Self {
        Self {
            block: Block::TwoExcitation,
            amplitudes: vec![C64::from(0.0), C64::from(1.0), C64::from(0.0)],
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn population(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }
}

/// Populations after each step, starting from `|01⟩` and `|11⟩` respectively.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub t: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
    pub p02: f64,
    pub p20: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationResult {
    pub final_1ex: BlockState,
    pub final_2ex: BlockState,
    pub eps_swap: f64,
    pub eps_leak: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history: Option<Vec<HistoryRow>>,
}

impl PropagationResult {
    pub fn history_csv(&self) -> Option<String> {
        let history = self.history.as_ref()?;
        let mut table = CsvTable::new(&["t_ns", "p01", "p10", "p11", "p02", "p20"]);
        for row in history {
            table.push(
                [row.t, row.p01, row.p10, row.p11, row.p02, row.p20]
                    .into_iter()
                    .map(fmt_float)
                    .collect(),
            );
        }
        Some(table.render())
    }
}

/// Lab-frame propagators of both photon-number blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockPropagators {
    pub one: CMatrix<2>,
    pub two: CMatrix<3>,
}

struct Sample {
    h1: CMatrix<2>,
    h2: CMatrix<3>,
    shift1: f64,
    shift2: f64,
}

fn sample_hamiltonians(device: &DeviceParams, f_a: f64, f_b: f64) -> Sample {
    let g = device.coupling.coupling_unchecked(f_a, f_b);
    let mut h1 = hamiltonian_1ex(f_a, f_b, g);
    let mut h2 = hamiltonian_2ex(f_a, f_b, device.qubit_a.eta, device.qubit_b.eta, g);
    // Remove the trace; it only contributes a block phase, tracked separately.
    let shift1 = 0.5 * (h1[(0, 0)].re + h1[(1, 1)].re);
    let shift2 = (h2[(0, 0)].re + h2[(1, 1)].re + h2[(2, 2)].re) / 3.0;
    for k in 0..2 {
        h1[(k, k)] -= shift1;
    }
    for k in 0..3 {
        h2[(k, k)] -= shift2;
    }
    Sample { h1, h2, shift1, shift2 }
}

fn commutator<const N: usize>(a: &CMatrix<N>, b: &CMatrix<N>) -> CMatrix<N> {
    a * b - b * a
}

/// Propagates both blocks; `observer` sees the accumulated propagators after
/// every step.
fn propagate_blocks<T, F>(
    trajectory: &T,
    device: &DeviceParams,
    opts: &PropagationOptions,
    mut observer: F,
) -> Result<BlockPropagators>
where
    T: Trajectory + ?Sized,
    F: FnMut(f64, &CMatrix<2>, &CMatrix<3>, f64, f64),
{
    opts.validate()?;
    let total = trajectory.duration();
    if !(total.is_finite() && total >= 0.0) {
        return Err(invalid("trajectory", format!("duration must be >= 0, got {total}")));
    }
    let steps = step_count(total, opts.dt);
    let mut u1 = CMatrix::<2>::identity();
    let mut u2 = CMatrix::<3>::identity();
    let (mut phase1, mut phase2) = (0.0, 0.0);
    if steps == 0 {
        return Ok(BlockPropagators { one: u1, two: u2 });
    }
    let h = total / steps as f64;
    let gauss = 3f64.sqrt() / 6.0;
    for k in 0..steps {
        let t0 = k as f64 * h;
        let (step1, step2) = match opts.integrator {
            Integrator::Midpoint => {
                let (fa, fb) = trajectory.frequencies(t0 + 0.5 * h);
                let s = sample_hamiltonians(device, fa, fb);
                phase1 += 2.0 * PI * h * s.shift1;
                phase2 += 2.0 * PI * h * s.shift2;
                (exp_neg_i(&s.h1, 2.0 * PI * h), exp_neg_i(&s.h2, 2.0 * PI * h))
            }
            Integrator::Magnus4 => {
                let (fa1, fb1) = trajectory.frequencies(t0 + (0.5 - gauss) * h);
                let (fa2, fb2) = trajectory.frequencies(t0 + (0.5 + gauss) * h);
                let s1 = sample_hamiltonians(device, fa1, fb1);
                let s2 = sample_hamiltonians(device, fa2, fb2);
                phase1 += PI * h * (s1.shift1 + s2.shift1);
                phase2 += PI * h * (s1.shift2 + s2.shift2);
                let c = C64::new(0.0, -3f64.sqrt() * PI * PI * h * h / 3.0);
                let m1 = (s1.h1 + s2.h1) * C64::from(PI * h) + commutator(&s2.h1, &s1.h1) * c;
                let m2 = (s1.h2 + s2.h2) * C64::from(PI * h) + commutator(&s2.h2, &s1.h2) * c;
                (exp_neg_i(&m1, 1.0), exp_neg_i(&m2, 1.0))
            }
        };
        u1 = step1 * u1;
        u2 = step2 * u2;
        let t = if k + 1 == steps { total } else { (k + 1) as f64 * h };
        observer(t, &u1, &u2, phase1, phase2);
    }
    let one = u1 * C64::from_polar(1.0, -phase1);
    let two = u2 * C64::from_polar(1.0, -phase2);
    Ok(BlockPropagators { one, two })
}

pub fn block_propagators<T: Trajectory + ?Sized>(
    trajectory: &T,
    device: &DeviceParams,
    opts: &PropagationOptions,
) -> Result<BlockPropagators> {
    propagate_blocks(trajectory, device, opts, |_, _, _, _, _| {})
}

/// Evolves a single block state through the trajectory.
pub fn evolve_block<T: Trajectory + ?Sized>(
    trajectory: &T,
    device: &DeviceParams,
    psi0: &BlockState,
    opts: &PropagationOptions,
) -> Result<BlockState> {
    if psi0.amplitudes.len() != psi0.block.dim() {
        return Err(Error::Domain(format!(
            "{:?} state needs {} amplitudes, got {}",
            psi0.block,
            psi0.block.dim(),
            psi0.amplitudes.len()
        )));
    }
    if (psi0.norm_sqr() - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("initial state not normalized: |psi|^2 = {}", psi0.norm_sqr())));
    }
    let u = block_propagators(trajectory, device, opts)?;
    let amplitudes = match psi0.block {
        Block::OneExcitation => {
            let v = u.one * nalgebra::Vector2::from_column_slice(&psi0.amplitudes);
            v.iter().copied().collect()
        }
        Block::TwoExcitation => {
            let v = u.two * nalgebra::Vector3::from_column_slice(&psi0.amplitudes);
            v.iter().copied().collect()
        }
    };
    Ok(BlockState { block: psi0.block, amplitudes })
}

/// Evolves `|01⟩` and `|11⟩` and reports both error channels.
pub fn propagate<T: Trajectory + ?Sized>(
    trajectory: &T,
    device: &DeviceParams,
    opts: &PropagationOptions,
) -> Result<PropagationResult> {
    let mut history = opts.record_history.then(Vec::new);
    if let Some(h) = history.as_mut() {
        h.push(HistoryRow { t: 0.0, p01: 1.0, p10: 0.0, p11: 1.0, p02: 0.0, p20: 0.0 });
    }
    let u = propagate_blocks(trajectory, device, opts, |t, u1, u2, _, _| {
        if let Some(h) = history.as_mut() {
            h.push(HistoryRow {
                t,
                p01: u1[(0, 0)].norm_sqr(),
                p10: u1[(1, 0)].norm_sqr(),
                p11: u2[(1, 1)].norm_sqr(),
                p02: u2[(0, 1)].norm_sqr(),
                p20: u2[(2, 1)].norm_sqr(),
            });
        }
    })?;
    let final_1ex = BlockState {
        block: Block::OneExcitation,
        amplitudes: vec![u.one[(0, 0)], u.one[(1, 0)]],
    };
    let final_2ex = BlockState {
        block: Block::TwoExcitation,
        amplitudes: vec![u.two[(0, 1)], u.two[(1, 1)], u.two[(2, 1)]],
    };
    let eps_swap = (1.0 - final_1ex.population(1)).clamp(0.0, 1.0);
    let eps_leak = (final_2ex.population(0) + final_2ex.population(2)).clamp(0.0, 1.0);
    Ok(PropagationResult { final_1ex, final_2ex, eps_swap, eps_leak, history })
}

/// `1 - P(|10⟩)` after evolving `|01⟩`.
pub fn swap_error<T: Trajectory + ?Sized>(
    trajectory: &T,
    device: &DeviceParams,
    opts: &PropagationOptions,
) -> Result<f64> {
    Ok(propagate(trajectory, device, opts)?.eps_swap)
}

/// `P(|02⟩) + P(|20⟩)` after evolving `|11⟩`.
pub fn leakage_error<T: Trajectory + ?Sized>(
    trajectory: &T,
    device: &DeviceParams,
    opts: &PropagationOptions,
) -> Result<f64> {
    Ok(propagate(trajectory, device, opts)?.eps_leak)
}

/// Block propagators in the frame rotating at the bare idle energies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameBlocks {
    /// Basis `(|01⟩, |10⟩)`.
    pub one: CMatrix<2>,
    /// Basis `(|02⟩, |11⟩, |20⟩)`.
    pub two: CMatrix<3>,
}

impl FrameBlocks {
    pub fn identity() -> Self {
        Self { one: CMatrix::<2>::identity(), two: CMatrix::<3>::identity() }
    }

    /// Computational-subspace matrix in the basis `|00⟩, |01⟩, |10⟩, |11⟩`.
    /// Sub-unitary when the `|11⟩` column leaks into `|02⟩`/`|20⟩`.
    pub fn computational(&self) -> CMatrix<4> {
        let mut u = CMatrix::<4>::zeros();
        u[(0, 0)] = C64::from(1.0);
        for r in 0..2 {
            for c in 0..2 {
                u[(1 + r, 1 + c)] = self.one[(r, c)];
            }
        }
        u[(3, 3)] = self.two[(1, 1)];
        u
    }

    /// Probability of leaving the computational subspace from `|11⟩`.
    pub fn leakage(&self) -> f64 {
        self.two[(0, 1)].norm_sqr() + self.two[(2, 1)].norm_sqr()
    }
}

pub fn frame_blocks<T: Trajectory + ?Sized>(
    trajectory: &T,
    device: &DeviceParams,
    opts: &PropagationOptions,
) -> Result<FrameBlocks> {
    let lab = block_propagators(trajectory, device, opts)?;
    let (fa, fb) = trajectory.idle();
    let total = trajectory.duration();
    let rot = |energy: f64| C64::from_polar(1.0, 2.0 * PI * energy * total);
    let e1 = [fb, fa];
    let e2 = [2.0 * fb - device.qubit_b.eta, fa + fb, 2.0 * fa - device.qubit_a.eta];
    let mut one = lab.one;
    let mut two = lab.two;
    for r in 0..2 {
        let phase = rot(e1[r]);
        for c in 0..2 {
            one[(r, c)] *= phase;
        }
    }
    for r in 0..3 {
        let phase = rot(e2[r]);
        for c in 0..3 {
            two[(r, c)] *= phase;
        }
    }
    Ok(FrameBlocks { one, two })
}

/// 4×4 computational-subspace action in the idle rotating frame.
pub fn effective_unitary<T: Trajectory + ?Sized>(
    trajectory: &T,
    device: &DeviceParams,
    opts: &PropagationOptions,
) -> Result<CMatrix<4>> {
    Ok(frame_blocks(trajectory, device, opts)?.computational())
}

/// `sin²(2π g t)`: transferred population of an ideal resonant swap.
pub fn ideal_swap_prob(g: f64, t: f64) -> f64 {
    (2.0 * PI * g * t).sin().powi(2)
}

/// Leakage of a rectangular resonant pulse between identical qubits:
/// `16g²/(η²+16g²) · sin²(π sqrt(η²+16g²) t)` in cyclic units.
pub fn ideal_leakage(g: f64, eta: f64, t: f64) -> f64 {
    let w2 = eta * eta + 16.0 * g * g;
    if w2 == 0.0 {
        return 0.0;
    }
    16.0 * g * g / w2 * (PI * w2.sqrt() * t).sin().powi(2)
}

/// Time of the `n`-th zero of [`ideal_leakage`].
pub fn leakage_zero(g: f64, eta: f64, n: u32) -> f64 {
    n as f64 / (eta * eta + 16.0 * g * g).sqrt()
}

/// Hold time of a complete resonant swap, `1/(4g)`.
pub fn full_swap_time(g: f64) -> f64 {
    1.0 / (4.0 * g)
}

/// Coupling at which the full swap coincides with the `n`-th leakage zero.
pub fn sync_coupling(eta: f64, n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("synchronization order must be >= 2, got {n}")));
    }
    if !(eta > 0.0) {
        return Err(Error::Domain(format!("nonlinearity must be positive, got {eta}")));
    }
    let n = n as f64;
    Ok(eta / (4.0 * (n * n - 1.0).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{CouplingModel, QubitParams};
    use crate::linalg::unitarity_defect;
    use crate::pulse::{RectangularPulse, TrapezoidPulse};

    fn symmetric_device(g: f64, eta: f64) -> DeviceParams {
        let q = QubitParams { f_max: 7.0, eta, t1: None, tphi: None };
        DeviceParams {
            qubit_a: q,
            qubit_b: q,
            coupling: CouplingModel { g_ref: g, omega_ref: 6.0 },
        }
    }

    #[test]
    fn uncoupled_device_keeps_state_up_to_phase() {
        let mut dev = symmetric_device(0.0162, 0.23);
        dev.coupling.g_ref = 1e-300;
        let traj = TrapezoidPulse::new(6.2, 5.0, 5.6, 10.0);
        let out = evolve_block(&traj, &dev, &BlockState::excited_b(), &PropagationOptions::default())
            .unwrap();
        assert!((out.population(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn resonant_quarter_period_is_a_full_swap() {
        let g = 0.0162;
        let dev = symmetric_device(g, 0.23);
        let traj = RectangularPulse::resonant(6.0, full_swap_time(g));
        let out = evolve_block(&traj, &dev, &BlockState::excited_b(), &PropagationOptions::default())
            .unwrap();
        assert!((out.population(1) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn unnormalized_input_is_rejected() {
        let dev = symmetric_device(0.0162, 0.23);
        let traj = RectangularPulse::resonant(6.0, 1.0);
        let psi = BlockState {
            block: Block::OneExcitation,
            amplitudes: vec![C64::from(1.0), C64::from(1.0)],
        };
        assert!(matches!(
            evolve_block(&traj, &dev, &psi, &PropagationOptions::default()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn rectangular_errors_follow_closed_forms() {
        let (g, eta) = (0.0162, 0.24);
        let dev = symmetric_device(g, eta);
        for &t in &[0.0, 3.1, 7.716, 12.0, 15.43, 22.9] {
            let r = propagate(&RectangularPulse::resonant(6.0, t), &dev, &PropagationOptions::default())
                .unwrap();
            assert!((r.eps_swap - (1.0 - ideal_swap_prob(g, t))).abs() < 1e-9, "t={t}");
            assert!((r.eps_leak - ideal_leakage(g, eta, t)).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn zero_duration_pulse() {
        let dev = DeviceParams::swap_demo();
        let r = propagate(&RectangularPulse::resonant(6.0, 0.0), &dev, &PropagationOptions::default())
            .unwrap();
        assert_eq!(r.eps_swap, 1.0);
        assert_eq!(r.eps_leak, 0.0);
    }

    #[test]
    fn closed_form_values() {
        assert!((ideal_swap_prob(0.0162, 1.0 / (4.0 * 0.0162)) - 1.0).abs() < 1e-15);
        assert_eq!(ideal_swap_prob(0.03, 0.0), 0.0);
        assert!((ideal_swap_prob(0.0162, 1.0 / (8.0 * 0.0162)) - 0.5).abs() < 1e-12);
        // 7.716 ns is the rounded half-swap time
        assert!((ideal_swap_prob(0.0162, 7.716) - 0.5).abs() < 1e-4);

        let (g, eta) = (0.0162, 0.240);
        let zero = leakage_zero(g, eta, 1);
        assert!((zero - 4.0226).abs() < 1e-4);
        assert!(ideal_leakage(g, eta, zero) < 1e-28);
        let amp = 16.0 * g * g / (eta * eta + 16.0 * g * g);
        assert!((amp - 0.0680).abs() < 5e-4);
        assert!((ideal_leakage(g, eta, zero / 2.0) - amp).abs() < 1e-15);
        assert_eq!(ideal_leakage(0.0, eta, 3.0), 0.0);
    }

    #[test]
    fn sync_coupling_values() {
        assert!((sync_coupling(0.240, 4).unwrap() - 0.015492).abs() < 1e-6);
        assert!((sync_coupling(0.240, 2).unwrap() - 0.034641).abs() < 1e-6);
        assert!(sync_coupling(0.240, 1).is_err());
        assert!(sync_coupling(0.240, 0).is_err());
    }

    #[test]
    fn sync_coupling_aligns_swap_and_leakage_zero() {
        for n in 2..=10 {
            let eta = 0.2 + 0.003 * n as f64;
            let g = sync_coupling(eta, n).unwrap();
            let lhs = (eta * eta + 16.0 * g * g).sqrt();
            assert!((lhs - 4.0 * g * n as f64).abs() / lhs < 1e-12);
        }
    }

    #[test]
    fn blocks_stay_unitary_and_converge() {
        let dev = DeviceParams::swap_demo();
        let traj = TrapezoidPulse::new(6.2, 5.0, 5.53, 15.2).with_overshoot(0.004);
        let fine = block_propagators(&traj, &dev, &PropagationOptions::with_dt(0.0025)).unwrap();
        let coarse = block_propagators(&traj, &dev, &PropagationOptions::default()).unwrap();
        assert!(unitarity_defect(&coarse.one) < 1e-9);
        assert!(unitarity_defect(&coarse.two) < 1e-9);
        let d1 = crate::linalg::max_abs_diff(&fine.one, &coarse.one);
        let d2 = crate::linalg::max_abs_diff(&fine.two, &coarse.two);
        assert!(d1 < 1e-8 && d2 < 1e-8, "step halving moved amplitudes by {d1:e}, {d2:e}");
    }

    #[test]
    fn midpoint_and_magnus_agree() {
        let dev = DeviceParams::swap_demo();
        let traj = TrapezoidPulse::new(6.2, 5.0, 5.53, 15.2);
        let mut opts = PropagationOptions::with_dt(0.001);
        opts.integrator = Integrator::Midpoint;
        let mid = block_propagators(&traj, &dev, &opts).unwrap();
        let mag = block_propagators(&traj, &dev, &PropagationOptions::default()).unwrap();
        assert!(crate::linalg::max_abs_diff(&mid.two, &mag.two) < 1e-5);
    }

    #[test]
    fn dark_state_stays_empty_for_symmetric_drive() {
        let dev = symmetric_device(0.0162, 0.23);
        let r = propagate(&RectangularPulse::resonant(6.0, 17.3), &dev, &PropagationOptions::default())
            .unwrap();
        let a = &r.final_2ex.amplitudes;
        let dark = (a[2] - a[0]) * std::f64::consts::FRAC_1_SQRT_2;
        assert!(dark.norm_sqr() < 1e-10);
    }

    #[test]
    fn effective_unitary_of_uncoupled_pair_is_identity() {
        let mut dev = DeviceParams::swap_demo();
        dev.coupling.g_ref = 1e-300;
        let traj = TrapezoidPulse::new(6.2, 5.0, 5.53, 12.0);
        let u = effective_unitary(&traj, &dev, &PropagationOptions::default()).unwrap();
        // Detuning excursions leave only single-qubit phases behind.
        for r in 0..4 {
            for c in 0..4 {
                if r != c {
                    assert!(u[(r, c)].norm() < 1e-12);
                }
            }
            assert!((u[(r, r)].norm() - 1.0).abs() < 1e-12);
        }
        let rect = effective_unitary(&RectangularPulse::resonant(6.0, 9.0), &dev, &PropagationOptions::default())
            .unwrap();
        assert!(crate::linalg::max_abs_diff(&rect, &CMatrix::<4>::identity()) < 1e-9);
    }

    #[test]
    fn effective_unitary_is_sub_unitary_with_leakage_deficit() {
        let dev = DeviceParams::swap_demo();
        let traj = TrapezoidPulse::new(6.2, 5.0, 5.53, 13.0);
        let blocks = frame_blocks(&traj, &dev, &PropagationOptions::default()).unwrap();
        let u = blocks.computational();
        for c in 0..4 {
            let col: f64 = (0..4).map(|r| u[(r, c)].norm_sqr()).sum();
            assert!(col <= 1.0 + 1e-9);
            if c == 3 {
                assert!((1.0 - col - blocks.leakage()).abs() < 1e-9);
            } else {
                assert!((1.0 - col).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn history_tracks_populations() {
        let dev = DeviceParams::swap_demo();
        let opts = PropagationOptions { record_history: true, ..PropagationOptions::with_dt(0.05) };
        let r = propagate(&RectangularPulse::resonant(6.0, 1.0), &dev, &opts).unwrap();
        let h = r.history.as_ref().unwrap();
        assert_eq!(h.len(), 21);
        for row in h {
            assert!((row.p01 + row.p10 - 1.0).abs() < 1e-12);
            assert!((row.p11 + row.p02 + row.p20 - 1.0).abs() < 1e-12);
        }
        let csv = r.history_csv().unwrap();
        assert!(csv.starts_with("t_ns,p01,p10,p11,p02,p20\n"));
    }
}
