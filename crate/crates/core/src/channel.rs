//! Fiber link between the nodes and the lossy path to the counting detectors.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::cqed::polarization_label;
use crate::error::{check_unit, Result};
use crate::fock::{loss_channel, JointState};
use crate::linalg::{ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub transmission: f64,
    pub depolarization: f64,
    pub birefringence_residual: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            transmission: 0.53,
            depolarization: 0.01,
            birefringence_residual: 0.005,
        }
    }
}

impl ChannelParams {
    pub fn lossless() -> Self {
        Self {
            transmission: 1.0,
            depolarization: 0.0,
            birefringence_residual: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("channel.transmission", self.transmission)?;
        check_unit("channel.depolarization", self.depolarization)?;
        check_unit("channel.birefringence", self.birefringence_residual)
    }

    /// Probability that the pulse leaves the fiber in the polarization the
    /// downstream atom does not couple to.
    pub fn scramble_probability(&self) -> f64 {
        (self.depolarization + self.birefringence_residual).min(1.0)
    }
}

/// Loss `T`, then with probability q = min(1, p + ε) the pulse's polarization flag
/// flips. Without a `<mode>.pol` register nothing downstream can tell polarizations
/// apart and only the loss acts.
pub fn fiber_channel(state: &JointState, mode: &str, params: &ChannelParams) -> Result<JointState> {
    params.validate()?;
    let lossy = loss_channel(state, mode, params.transmission)?;
    let q = params.scramble_probability();
    let pol_label = polarization_label(mode);
    if q == 0.0 || !lossy.has(&pol_label) {
        return Ok(lossy);
    }
    let pol = lossy.qubit_index(&pol_label)?;
    let keep = DMatrix::from_diagonal_element(2, 2, Complex64::new((1.0 - q).sqrt(), 0.0));
    let flip_amp = Complex64::new(q.sqrt(), 0.0);
    let flip = DMatrix::from_row_slice(2, 2, &[ZERO, flip_amp, flip_amp, ZERO]);
    Ok(lossy.apply_kraus(&[pol], &[keep, flip]))
}

/// Optical efficiency between the last node and the detectors.
pub fn detection_path(state: &JointState, mode: &str, efficiency: f64) -> Result<JointState> {
    check_unit("detection efficiency", efficiency)?;
    loss_channel(state, mode, efficiency)
}

/// Fresh polarization flag in the interacting polarization.
pub fn polarization_register(mode: &str) -> JointState {
    let mut rho = DMatrix::from_element(2, 2, ZERO);
    rho[(0, 0)] = ONE;
    JointState::qubit(&polarization_label(mode), rho).expect("pure basis state")
}
