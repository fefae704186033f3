use nalgebra::DMatrix;
use num_complex::Complex64;

use super::joint::{Branch, JointState};
use crate::error::{check_unit, Error, Result};
use crate::linalg::{self, ZERO};

/// Weight above which a two-mode state is considered to leave the closed number subspace.
const BS_LEAK_TOL: f64 = 1e-12;

/// Two-mode mixing with a† → √T a† + √(1−T) e^{iφ} b†, b† → −√(1−T) e^{−iφ} a† + √T b†.
///
/// The map is exact on the subspace n_a + n_b ≤ min(n_max_a, n_max_b), which it
/// leaves invariant; states with more weight outside are rejected.
pub fn beam_splitter(
    state: &JointState,
    mode_a: &str,
    mode_b: &str,
    transmissivity: f64,
    phase: f64,
) -> Result<JointState> {
    check_unit("transmissivity", transmissivity)?;
    let (ia, sa) = state.mode_index(mode_a)?;
    let (ib, sb) = state.mode_index(mode_b)?;
    if ia == ib {
        return Err(Error::Config("beam splitter needs two distinct modes".into()));
    }
    if transmissivity == 1.0 {
        return Ok(state.clone());
    }
    let cap = sa.n_max().min(sb.n_max());
    let (da, db) = (sa.dim(), sb.dim());

    let layout = state.layout();
    let (t_of, _) = layout.split(&[ia, ib]);
    let leak: f64 = state
        .populations()
        .iter()
        .zip(&t_of)
        .filter(|(_, &t)| t / db + t % db > cap)
        .map(|(p, _)| *p)
        .sum();
    if leak > BS_LEAK_TOL {
        return Err(Error::InvalidState(format!(
            "weight {leak:e} above n_a + n_b = {cap}, where the truncated beam splitter is not closed"
        )));
    }

    let u = two_mode_unitary(da, db, cap, transmissivity, phase);
    Ok(state.apply_kraus(&[ia, ib], &[u]))
}

fn two_mode_unitary(da: usize, db: usize, cap: usize, t: f64, phase: f64) -> DMatrix<Complex64> {
    let tau = Complex64::new(t.sqrt(), 0.0);
    let rho = Complex64::from_polar((1.0 - t).sqrt(), phase);
    let minus_rho_conj = -rho.conj();
    let fact = |n: usize| (1..=n).map(|i| i as f64).product::<f64>();
    let mut u = DMatrix::from_element(da * db, da * db, ZERO);
    for na in 0..da {
        for nb in 0..db {
            let col = na * db + nb;
            let total = na + nb;
            if total > cap {
                u[(col, col)] = Complex64::new(1.0, 0.0);
                continue;
            }
            let norm = 1.0 / (fact(na) * fact(nb)).sqrt();
            // (τ a† + ρ b†)^na (−ρ* a† + τ b†)^nb |0⟩
            for i in 0..=na {
                for j in 0..=nb {
                    let c = tau.powu(i as u32)
                        * rho.powu((na - i) as u32)
                        * minus_rho_conj.powu(j as u32)
                        * tau.powu((nb - j) as u32)
                        * (linalg::binomial(na, i) * linalg::binomial(nb, j));
                    let ma = i + j;
                    let mb = total - ma;
                    let amp = c * (norm * (fact(ma) * fact(mb)).sqrt());
                    u[(ma * db + mb, col)] += amp;
                }
            }
        }
    }
    u
}

/// Beam splitter against a fresh vacuum ancilla that is traced out.
pub fn loss_channel(state: &JointState, mode: &str, transmissivity: f64) -> Result<JointState> {
    check_unit("transmissivity", transmissivity)?;
    let (idx, _) = state.mode_index(mode)?;
    if transmissivity == 1.0 {
        return Ok(state.clone());
    }
    let branch = Branch {
        amplitude: Complex64::new(transmissivity.sqrt(), 0.0),
        ancilla: 0,
    };
    Ok(state.branch_number_kraus(idx, |_| 0, &[branch]))
}

/// exp(iθn̂) on `mode`, applied only where `qubit` is in basis state `on_branch` (0 = ↑z, 1 = ↓z).
pub fn conditional_phase(
    state: &JointState,
    qubit: &str,
    mode: &str,
    theta_per_photon: f64,
    on_branch: usize,
) -> Result<JointState> {
    let q = state.qubit_index(qubit)?;
    let (m, _) = state.mode_index(mode)?;
    if on_branch > 1 {
        return Err(Error::Config(format!("qubit branch {on_branch} does not exist")));
    }
    let phase = Complex64::from_polar(1.0, theta_per_photon);
    let one = Complex64::new(1.0, 0.0);
    let branches = [
        Branch { amplitude: one, ancilla: 0 },
        Branch { amplitude: phase, ancilla: 1 },
    ];
    Ok(state.branch_number_kraus(m, |d| usize::from(d[q] == on_branch), &branches))
}

/// (⟨n̂⟩, ⟨n̂(n̂−1)⟩) of `mode`.
pub fn moments(state: &JointState, mode: &str) -> Result<(f64, f64)> {
    Ok(state.reduced_mode(mode)?.moments())
}

/// Reduced state on `keep`.
pub fn partial_trace(state: &JointState, keep: &[&str]) -> Result<JointState> {
    state.partial_trace(keep)
}
