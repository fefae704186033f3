mod common;

use common::{c, close, max_abs_diff};
use nalgebra::DMatrix;
use qndsim_core::fock::{
    beam_splitter, coherent_state, conditional_phase, factorial_moment_tail, fock_state, loss_channel, moments,
    parity_probabilities, partial_trace, poisson_tail, FockSpace, JointState, ModeState, Subsystem,
    SubsystemKind,
};
use qndsim_core::Error;

fn space(n: usize) -> FockSpace {
    FockSpace::new(n).unwrap()
}

#[test]
fn cutoff_follows_poisson_tail() {
    assert_eq!(FockSpace::for_mean_photon(0.04).unwrap().n_max(), 5);
    assert_eq!(FockSpace::for_mean_photon(0.45).unwrap().n_max(), 10);
    assert_eq!(FockSpace::for_mean_photon(3.11).unwrap().n_max(), 22);
    let worst = |mu: f64, n: usize| (0..=2).map(|k| factorial_moment_tail(mu, n, k)).fold(0.0, f64::max);
    for mu in [0.01, 0.3, 1.0, 3.11, 4.0] {
        let n = FockSpace::for_mean_photon(mu).unwrap().n_max();
        assert!(poisson_tail(mu, n) < 1e-9);
        assert!(worst(mu, n) < 1e-9);
        assert!(worst(mu, n - 1) >= 1e-9);
    }
    close(factorial_moment_tail(0.5, 0, 0), poisson_tail(0.5, 0), 1e-15);
    close(poisson_tail(0.5, 0), 1.0 - (-0.5f64).exp(), 1e-15);
    assert!(matches!(FockSpace::for_mean_photon(5.0), Err(Error::Truncation { .. })));
    assert!(FockSpace::new(0).is_err());
    assert!(matches!(coherent_state(3.0, space(5)), Err(Error::Truncation { .. })));
}

#[test]
fn coherent_state_examples() {
    let vac = coherent_state(0.0, space(3)).unwrap();
    assert_eq!(vac.populations()[0], 1.0);

    let s = coherent_state(0.084, FockSpace::for_mean_photon(0.084).unwrap()).unwrap();
    close(s.populations()[0], (-0.084f64).exp(), 1e-6);
    close(s.populations()[0], 0.91943, 1e-5);

    let s = coherent_state(0.45, FockSpace::for_mean_photon(0.45).unwrap()).unwrap();
    close(s.mean_photon(), 0.45, 1e-9);
    close(s.purity(), 1.0, 1e-12);
}

#[test]
fn parity_examples() {
    let (e, o) = parity_probabilities(&ModeState::vacuum(space(2)));
    assert_eq!((e, o), (1.0, 0.0));

    let mu = 0.084;
    let s = coherent_state(mu, FockSpace::for_mean_photon(mu).unwrap()).unwrap();
    let (e, o) = parity_probabilities(&s);
    close(o, (1.0 - (-2.0 * mu).exp()) / 2.0, 1e-9);
    // the closed form gives 0.0773231; the rounded reference value agrees to 5e-5
    close(o, 0.07730, 5e-5);
    close(e + o, 1.0, 1e-12);

    let (e, o) = parity_probabilities(&fock_state(3, space(4)).unwrap());
    assert_eq!((e, o), (0.0, 1.0));
}

#[test]
fn parity_law_for_coherent_states() {
    for mu in [0.01, 0.1, 0.5, 1.0, 2.0, 3.11] {
        let s = coherent_state(mu, FockSpace::for_mean_photon(mu).unwrap()).unwrap();
        let (e, o) = parity_probabilities(&s);
        close(e, (1.0 + (-2.0 * mu).exp()) / 2.0, 1e-9);
        close(o, (1.0 - (-2.0 * mu).exp()) / 2.0, 1e-9);
    }
}

fn two_modes(a: ModeState, b: ModeState) -> JointState {
    JointState::from_mode("a", a).tensor(&JointState::from_mode("b", b)).unwrap()
}

#[test]
fn beam_splitter_identity_at_unit_transmission() {
    let s = two_modes(coherent_state(0.2, space(8)).unwrap(), fock_state(1, space(8)).unwrap());
    let out = beam_splitter(&s, "a", "b", 1.0, 0.3).unwrap();
    assert!(max_abs_diff(out.matrix(), s.matrix()) < 1e-15);
}

#[test]
fn beam_splitter_keeps_coherent_states_coherent() {
    let (mu, t, phi) = (0.3, 0.37, 0.7);
    let big = space(24);
    let s = two_modes(coherent_state(mu, big).unwrap(), ModeState::vacuum(big));
    let out = beam_splitter(&s, "a", "b", t, phi).unwrap();
    close(out.trace(), 1.0, 1e-12);
    let alpha = mu.sqrt();
    let a = out.reduced_mode("a").unwrap();
    let b = out.reduced_mode("b").unwrap();
    let beta_a = c(t.sqrt() * alpha, 0.0);
    let beta_b = c((1.0 - t).sqrt() * alpha, 0.0) * c(0.0, phi).exp();
    for (m, beta) in [(&a, beta_a), (&b, beta_b)] {
        for (k, l) in [(0, 1), (1, 1), (1, 2), (2, 2)] {
            let expect = beta.conj().powu(k as u32) * beta.powu(l as u32);
            assert!((m.normal_moment(k, l) - expect).norm() < 1e-9, "moment ({k},{l})");
        }
        close(m.purity(), 1.0, 1e-9);
    }
}

#[test]
fn fifty_fifty_splits_a_single_photon() {
    let s = two_modes(fock_state(1, space(2)).unwrap(), ModeState::vacuum(space(2)));
    let out = beam_splitter(&s, "a", "b", 0.5, 0.0).unwrap();
    close(out.reduced_mode("a").unwrap().populations()[1], 0.5, 1e-12);
    close(out.reduced_mode("b").unwrap().populations()[1], 0.5, 1e-12);
}

#[test]
fn zero_transmission_swaps_marginals() {
    let a = ModeState::from_amplitudes(space(3), &[c(0.5, 0.0), c(0.5, 0.1), c(0.0, 0.6), c(0.0, 0.0)]).unwrap();
    let b = fock_state(1, space(3)).unwrap();
    let s = two_modes(a.clone(), b.clone());
    // n_a + n_b must stay within the cap of 3
    let out = beam_splitter(&s, "a", "b", 0.0, 0.4).unwrap();
    let pa = out.reduced_mode("a").unwrap().populations();
    let pb = out.reduced_mode("b").unwrap().populations();
    for n in 0..4 {
        close(pa[n], b.populations()[n], 1e-12);
        close(pb[n], a.populations()[n], 1e-12);
    }
}

#[test]
fn beam_splitter_errors() {
    let s = two_modes(fock_state(1, space(2)).unwrap(), ModeState::vacuum(space(2)));
    assert!(matches!(beam_splitter(&s, "a", "zz", 0.5, 0.0), Err(Error::UnknownSubsystem(_))));
    assert!(matches!(beam_splitter(&s, "a", "b", 1.5, 0.0), Err(Error::OutOfRange { .. })));
    let crowded = two_modes(fock_state(2, space(2)).unwrap(), fock_state(1, space(2)).unwrap());
    assert!(beam_splitter(&crowded, "a", "b", 0.5, 0.0).is_err());
}

#[test]
fn loss_examples() {
    let s = JointState::from_mode("m", coherent_state(0.7, space(14)).unwrap());
    let same = loss_channel(&s, "m", 1.0).unwrap();
    assert!(max_abs_diff(same.matrix(), s.matrix()) < 1e-15);

    let mu = 1.3;
    let s = JointState::from_mode("m", coherent_state(mu, space(24)).unwrap());
    let out = loss_channel(&s, "m", 0.53).unwrap();
    let m = out.reduced_mode("m").unwrap();
    close(m.mean_photon(), 0.53 * mu, 1e-9);
    close(m.purity(), 1.0, 1e-9);
    let a = (0.53 * mu).sqrt();
    assert!((m.normal_moment(0, 1) - c(a, 0.0)).norm() < 1e-9);

    let twice = loss_channel(&loss_channel(&s, "m", 0.6).unwrap(), "m", 0.7).unwrap();
    let once = loss_channel(&s, "m", 0.42).unwrap();
    assert!(max_abs_diff(twice.matrix(), once.matrix()) < 1e-10);
}

#[test]
fn conditional_phase_examples() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus_x = JointState::qubit_pure("q", c(h, 0.0), c(h, 0.0)).unwrap();
    let s = plus_x.tensor(&JointState::from_mode("m", fock_state(1, space(2)).unwrap())).unwrap();

    let same = conditional_phase(&s, "q", "m", 0.0, 1).unwrap();
    assert!(max_abs_diff(same.matrix(), s.matrix()) < 1e-15);

    let flipped = conditional_phase(&s, "q", "m", std::f64::consts::PI, 1).unwrap();
    let q = flipped.reduced_qubit("q").unwrap();
    // ⟨↓x|ρ|↓x⟩ with |↓x⟩ = (|↑z⟩ − |↓z⟩)/√2
    let fid = 0.5 * (q[(0, 0)] + q[(1, 1)] - q[(0, 1)] - q[(1, 0)]).re;
    close(fid, 1.0, 1e-12);

    let s2 = plus_x.tensor(&JointState::from_mode("m", fock_state(2, space(2)).unwrap())).unwrap();
    let out = conditional_phase(&s2, "q", "m", std::f64::consts::FRAC_PI_2, 1).unwrap();
    let q = out.reduced_qubit("q").unwrap();
    // coherence ρ_{↑↓} carries the conjugate of the ↓-branch phase e^{iπ}
    assert!((q[(0, 1)] / c(0.5, 0.0) - c(-1.0, 0.0)).norm() < 1e-12);

    assert!(conditional_phase(&s, "m", "m", 1.0, 1).is_err());
    assert!(conditional_phase(&s, "q", "nope", 1.0, 1).is_err());
}

#[test]
fn moments_examples() {
    let vac = JointState::vacuum_mode("m", space(3));
    assert_eq!(moments(&vac, "m").unwrap(), (0.0, 0.0));
    let two = JointState::from_mode("m", fock_state(2, space(3)).unwrap());
    let (n1, n2) = moments(&two, "m").unwrap();
    close(n1, 2.0, 1e-15);
    close(n2, 2.0, 1e-15);
    let coh = JointState::from_mode("m", coherent_state(0.45, FockSpace::for_mean_photon(0.45).unwrap()).unwrap());
    let (n1, n2) = moments(&coh, "m").unwrap();
    close(n1, 0.45, 1e-9);
    close(n2, 0.2025, 1e-9);
}

#[test]
fn partial_trace_examples() {
    let q = JointState::qubit_pure("q", c(0.6, 0.0), c(0.0, 0.8)).unwrap();
    let m = JointState::from_mode("m", coherent_state(0.2, space(8)).unwrap());
    let s = q.tensor(&m).unwrap();

    let all = partial_trace(&s, &["q", "m"]).unwrap();
    assert!(max_abs_diff(all.matrix(), s.matrix()) < 1e-15);

    let back = partial_trace(&s, &["q"]).unwrap();
    assert!(max_abs_diff(back.matrix(), q.matrix()) < 1e-12);
    let back = partial_trace(&s, &["m"]).unwrap();
    assert!(max_abs_diff(back.matrix(), m.matrix()) < 1e-12);

    // (|↑z,0⟩ + |↓z,1⟩)/√2
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi = vec![c(0.0, 0.0); 4];
    psi[0] = c(h, 0.0);
    psi[3] = c(h, 0.0);
    let rho = qndsim_core::linalg::outer(&psi);
    let bell = JointState::from_parts(
        vec![
            Subsystem { label: "q".into(), kind: SubsystemKind::Qubit },
            Subsystem { label: "m".into(), kind: SubsystemKind::Mode(space(1)) },
        ],
        rho,
    )
    .unwrap();
    let red = bell.reduced_qubit("q").unwrap();
    let mixed = DMatrix::from_diagonal_element(2, 2, c(0.5, 0.0));
    assert!(max_abs_diff(&red, &mixed) < 1e-12);

    assert!(partial_trace(&s, &[]).is_err());
    assert!(matches!(partial_trace(&s, &["x"]), Err(Error::UnknownSubsystem(_))));
}

#[test]
fn joint_state_bookkeeping() {
    let s = JointState::qubit_pure("q", c(1.0, 0.0), c(0.0, 0.0))
        .unwrap()
        .tensor(&JointState::vacuum_mode("m", space(4)))
        .unwrap();
    assert_eq!(s.dims(), vec![2, 5]);
    assert_eq!(s.dim(), 10);
    assert_eq!(s.qubit_count(), 1);
    assert_eq!(s.mode_spaces(), vec![space(4)]);
    assert_eq!(s.labels(), vec!["q", "m"]);
    assert!(matches!(s.tensor(&JointState::vacuum_mode("m", space(1))), Err(Error::DuplicateLabel(_))));
    assert!(matches!(s.qubit_index("m"), Err(Error::WrongKind { .. })));
    let bad = DMatrix::from_diagonal_element(2, 2, c(0.7, 0.0));
    assert!(JointState::qubit("x", bad).is_err());
}
