//! Five-angle unitary model, its fit, the shared simplex optimizer, and the
//! decay/error conversions.

mod angles;
mod fit;
mod metrics;
mod nelder_mead;

pub use angles::{build_unitary, conditional_phase, extract_angles, infidelity, FsimAngles};
pub use fit::{
    fit_unitary, fit_unitary_auto, off_block_magnitude, weak_angle, FitResult, WeakAngle,
    PHOTON_CONSERVATION_TOL, WEAK_GAUGE_MARGIN,
};
pub use metrics::{
    average_from_pauli, decay_from_pauli, error_metrics, gate_error_from_cycle, ErrorMetrics,
    GateError,
};
pub use nelder_mead::{nelder_mead, nelder_mead_restarts, Minimum, NelderMeadOptions};
