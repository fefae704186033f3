#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use qndsim_core::fock::{FockSpace, JointState, ModeState};
use qndsim_core::linalg;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[track_caller]
pub fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol:e})");
}

pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// ρ = A A† / tr for a matrix of the given entries (re, im pairs).
pub fn density_from(dim: usize, entries: &[(f64, f64)]) -> DMatrix<Complex64> {
    let a = DMatrix::from_iterator(dim, dim, entries.iter().map(|&(r, i)| c(r, i)));
    let mut rho = &a * a.adjoint();
    let tr = linalg::trace(&rho).re;
    rho /= c(tr, 0.0);
    rho
}

/// Random mixed state of one mode with support on n ≤ `support` inside `space`.
pub fn mode_state(space: FockSpace, support: usize, entries: &[(f64, f64)]) -> ModeState {
    let d = space.dim();
    let s = support.min(space.n_max()) + 1;
    let small = density_from(s, &entries[..s * s]);
    let mut rho = DMatrix::from_element(d, d, c(0.0, 0.0));
    rho.view_mut((0, 0), (s, s)).copy_from(&small);
    ModeState::from_matrix(space, rho).unwrap()
}

pub fn entries(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n).prop_filter("nonzero", |v| {
        v.iter().any(|&(r, i)| r.abs() + i.abs() > 1e-3)
    })
}

/// Qubit "q" tensored with a random mode "m".
pub fn qubit_mode(q: &[(f64, f64)], m: &ModeState) -> JointState {
    JointState::qubit("q", density_from(2, q))
        .unwrap()
        .tensor(&JointState::from_mode("m", m.clone()))
        .unwrap()
}

#[track_caller]
pub fn assert_valid(s: &JointState) {
    let m = s.matrix();
    close(linalg::trace(m).re, 1.0, 1e-12);
    assert!(linalg::hermiticity_error(m) <= 1e-12, "hermiticity {}", linalg::hermiticity_error(m));
    let e = linalg::min_eigenvalue(m);
    assert!(e >= -1e-10, "min eigenvalue {e}");
}
