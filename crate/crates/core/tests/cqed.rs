mod common;

use std::f64::consts::{FRAC_1_SQRT_2 as H, FRAC_PI_2, PI};

use common::{c, close, max_abs_diff};
use nalgebra::DMatrix;
use num_complex::Complex64;
use qndsim_core::cqed::{
    dephase, detect_state, prepare, reflect, reflection_coefficients, rotate, Axis, CqedParams,
    NodeImperfections, Readout, ReflectionPair, Spin,
};
use qndsim_core::fock::{coherent_state, fock_state, FockSpace, JointState, ModeState};
use qndsim_core::linalg;
use qndsim_core::Error;

fn qubit(up: Complex64, down: Complex64) -> JointState {
    JointState::qubit_pure("q", up, down).unwrap()
}

fn with_mode(q: JointState, m: ModeState) -> JointState {
    q.tensor(&JointState::from_mode("m", m)).unwrap()
}

/// ⟨ψ|ρ|ψ⟩ on the qubit "q".
fn overlap(s: &JointState, up: Complex64, down: Complex64) -> f64 {
    let r = s.reduced_qubit("q").unwrap();
    let v = [up, down];
    let mut acc = c(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            acc += v[i].conj() * r[(i, j)] * v[j];
        }
    }
    acc.re
}

#[test]
fn reflection_examples() {
    let n1 = CqedParams::node1();
    let n2 = CqedParams::node2();
    let ru = reflection_coefficients(&n1, false);
    assert!((ru - c(-1.0, 0.0)).norm() < 1e-15);

    let r1 = reflection_coefficients(&n1, true);
    let cc = n1.cooperativity();
    close(r1.re, (2.0 * cc - 1.0) / (2.0 * cc + 1.0), 1e-12);
    close(r1.im, 0.0, 1e-15);
    close(r1.re, 0.7701, 1e-4);
    close(r1.norm_sqr(), 0.5931, 1e-4);
    close(r1.norm_sqr(), 0.60, 0.01);

    let r2 = reflection_coefficients(&n2, true);
    close(r2.norm_sqr(), 0.5566, 1e-4);
    close(r2.norm_sqr(), 0.55, 0.01);
}

#[test]
fn reflection_magnitude_never_exceeds_one() {
    for &(kr_frac, dc, da) in &[(1.0, 0.0, 0.0), (0.5, 3.0, -2.0), (0.9, -10.0, 4.0), (0.2, 1.0, 1.0)] {
        let mut p = CqedParams::node1();
        p.kappa_r = p.kappa * kr_frac;
        p.delta_c = dc;
        p.delta_a = da;
        for coupled in [true, false] {
            assert!(reflection_coefficients(&p, coupled).norm() <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn params_validation() {
    let mut p = CqedParams::node1();
    p.kappa_r = 3.0;
    assert!(p.validate().is_err());
    let mut p = CqedParams::node1();
    p.g = 0.0;
    assert!(p.validate().is_err());
    assert!(ReflectionPair::new(c(1.1, 0.0), c(-1.0, 0.0)).is_err());
}

#[test]
fn ideal_reflection_is_a_controlled_z() {
    let plus = qubit(c(H, 0.0), c(H, 0.0));
    let one = with_mode(plus.clone(), fock_state(1, FockSpace::new(2).unwrap()).unwrap());
    let out = reflect(&one, "q", "m", ReflectionPair::ideal()).unwrap();
    close(overlap(&out, c(H, 0.0), c(-H, 0.0)), 1.0, 1e-12);
    close(out.reduced_mode("m").unwrap().populations()[1], 1.0, 1e-12);

    let vac = with_mode(plus, ModeState::vacuum(FockSpace::new(2).unwrap()));
    let out = reflect(&vac, "q", "m", ReflectionPair::ideal()).unwrap();
    assert!(max_abs_diff(out.matrix(), vac.matrix()) < 1e-15);
}

#[test]
fn lossy_reflection_brute_force() {
    let mu = 0.1;
    let space = FockSpace::for_mean_photon(mu).unwrap();
    let s = with_mode(qubit(c(H, 0.0), c(H, 0.0)), coherent_state(mu, space).unwrap());
    let pair = ReflectionPair::from_params(&CqedParams::node1());
    let out = reflect(&s, "q", "m", pair).unwrap();
    close(out.trace(), 1.0, 1e-12);
    let atom = out.reduced_qubit("q").unwrap();
    assert!(linalg::purity(&atom) < 1.0 - 1e-3);
    let expect = mu * (pair.r_coupled.norm_sqr() + pair.r_uncoupled.norm_sqr()) / 2.0;
    close(out.reduced_mode("m").unwrap().mean_photon(), expect, 1e-9);

    // branch-wise: |↑⟩|r_c α⟩ + |↓⟩|r_u α⟩ up to the lost-photon records
    let p = out.matrix();
    let d = space.dim();
    let alpha = mu.sqrt();
    let amp = |r: Complex64, n: usize| {
        let a = r * alpha;
        (-a.norm_sqr() / 2.0).exp() * a.powu(n as u32) / (1..=n).map(|k| (k as f64).sqrt()).product::<f64>()
    };
    for n in 0..d {
        // diagonal blocks are coherent states of the attenuated amplitudes
        close(p[(n, n)].re, 0.5 * amp(pair.r_coupled, n).norm_sqr(), 1e-9);
        close(p[(d + n, d + n)].re, 0.5 * amp(pair.r_uncoupled, n).norm_sqr(), 1e-9);
    }
}

#[test]
fn rotation_examples() {
    let s = qubit(c(H, 0.0), c(H, 0.0));
    let out = rotate(&s, "q", Axis::Y, FRAC_PI_2, 0.0).unwrap();
    close(overlap(&out, c(0.0, 0.0), c(1.0, 0.0)), 1.0, 1e-12);

    let s = qubit(c(H, 0.0), c(H, 0.0));
    let minus = rotate(&qubit(c(H, 0.0), c(-H, 0.0)), "q", Axis::Y, FRAC_PI_2, 0.0).unwrap();
    close(overlap(&minus, c(1.0, 0.0), c(0.0, 0.0)), 1.0, 1e-12);

    let up_y = qubit(c(H, 0.0), c(0.0, H));
    let out = rotate(&up_y, "q", Axis::X, FRAC_PI_2, 0.0).unwrap();
    close(overlap(&out, c(1.0, 0.0), c(0.0, 0.0)), 1.0, 1e-12);

    let delta = 0.014f64.sqrt().asin();
    let up = qubit(c(1.0, 0.0), c(0.0, 0.0));
    let twice = rotate(&rotate(&up, "q", Axis::Y, FRAC_PI_2, delta).unwrap(), "q", Axis::Y, FRAC_PI_2, delta).unwrap();
    close(overlap(&twice, c(1.0, 0.0), c(0.0, 0.0)), 0.014, 1e-9);

    // Equatorial axes at 0 and π/2 are X and Y
    let a = rotate(&s, "q", Axis::Equatorial(0.0), 0.9, 0.0).unwrap();
    let b = rotate(&s, "q", Axis::X, 0.9, 0.0).unwrap();
    assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-15);
    let a = rotate(&s, "q", Axis::Equatorial(FRAC_PI_2), 0.9, 0.0).unwrap();
    let b = rotate(&s, "q", Axis::Y, 0.9, 0.0).unwrap();
    assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-15);
    close(a.purity(), 1.0, 1e-12);
}

#[test]
fn over_rotation_calibration_reduces_to_asin_sqrt_dc() {
    let imp = NodeImperfections {
        dark_count: 0.014,
        ..NodeImperfections::ideal()
    };
    close(imp.over_rotation(1).unwrap(), 0.014f64.sqrt().asin(), 1e-15);
}

#[test]
fn over_rotation_reproduces_the_full_no_light_residual() {
    for (node, imp) in [(1, NodeImperfections::node1()), (2, NodeImperfections::node2())] {
        let delta = imp.over_rotation(node).unwrap();
        let mut s = rotate(&qubit(c(1.0, 0.0), c(0.0, 0.0)), "q", Axis::Y, FRAC_PI_2, delta).unwrap();
        s = dephase(&s, "q", imp.protocol_window, imp.t_coherence).unwrap();
        s = rotate(&s, "q", Axis::Y, FRAC_PI_2, delta).unwrap();
        let det = detect_state(&s, "q", imp.protocol_readout()).unwrap();
        close(det.p_up, imp.dark_count, 1e-12);
    }
}

#[test]
fn infeasible_dark_count_is_reported() {
    let imp = NodeImperfections {
        protocol_window: 20.0,
        ..NodeImperfections::node2()
    };
    assert!(matches!(imp.over_rotation(2), Err(Error::DarkCountBudget { node: 2, .. })));
}

#[test]
fn dephasing_examples() {
    let plus = qubit(c(H, 0.0), c(H, 0.0));
    let same = dephase(&plus, "q", 0.0, 420.0).unwrap();
    assert!(max_abs_diff(same.matrix(), plus.matrix()) < 1e-15);

    let out = dephase(&plus, "q", 420.0, 420.0).unwrap();
    close(out.matrix()[(0, 1)].re, 0.5 * (-1.0f64).exp(), 1e-12);
    close(out.matrix()[(0, 0)].re, 0.5, 1e-15);

    let out = dephase(&plus, "q", 2f64.ln(), 1.0).unwrap();
    let sx = 2.0 * out.matrix()[(0, 1)].re;
    close(sx, 0.5, 1e-12);

    let ab = dephase(&dephase(&plus, "q", 3.0, 50.0).unwrap(), "q", 7.0, 50.0).unwrap();
    let once = dephase(&plus, "q", 10.0, 50.0).unwrap();
    assert!(max_abs_diff(ab.matrix(), once.matrix()) < 1e-12);
    assert!(dephase(&plus, "q", 1.0, 0.0).is_err());
}

#[test]
fn prepare_examples() {
    let p = prepare(1.0).unwrap();
    close(linalg::purity(&p), 1.0, 1e-15);
    close(p[(0, 0)].re, 1.0, 1e-15);
    close(prepare(0.99).unwrap()[(0, 0)].re, 0.99, 1e-15);
    let mixed = prepare(0.5).unwrap();
    assert!(max_abs_diff(&mixed, &DMatrix::from_diagonal_element(2, 2, c(0.5, 0.0))) < 1e-15);
    assert!(prepare(1.2).is_err());
}

#[test]
fn detection_examples() {
    let up = qubit(c(1.0, 0.0), c(0.0, 0.0));
    close(detect_state(&up, "q", Readout::perfect()).unwrap().p_up, 1.0, 1e-15);
    close(detect_state(&up, "q", Readout::symmetric(0.99)).unwrap().p_up, 0.99, 1e-15);

    let space = FockSpace::new(9).unwrap();
    let light = coherent_state(0.3, space).unwrap();
    let s = with_mode(qubit(c(H, 0.0), c(H, 0.0)), light.clone());
    let det = detect_state(&s, "q", Readout::perfect()).unwrap();
    close(det.probability(Spin::Up), 0.5, 1e-12);
    let cond = det.conditional(Spin::Up).unwrap().reduced_mode("m").unwrap();
    assert!(max_abs_diff(cond.matrix(), light.matrix()) < 1e-12);

    let det = detect_state(&up, "q", Readout::perfect()).unwrap();
    assert!(matches!(det.conditional(Spin::Down), Err(Error::ZeroProbability(_))));
}

#[test]
fn rotation_by_two_pi_is_minus_identity_on_states() {
    let s = qubit(c(0.6, 0.0), c(0.0, 0.8));
    let out = rotate(&s, "q", Axis::Equatorial(1.1), 2.0 * PI, 0.0).unwrap();
    assert!(max_abs_diff(out.matrix(), s.matrix()) < 1e-12);
}
