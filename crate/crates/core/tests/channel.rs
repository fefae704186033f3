mod common;

use common::{close, max_abs_diff};
use qndsim_core::channel::{detection_path, fiber_channel, ChannelParams};
use qndsim_core::detectors::{click_povm, DetectorParams};
use qndsim_core::fock::{coherent_state, fock_state, loss_channel, FockSpace, JointState};
use qndsim_core::protocol::{run_cascade, run_single};
use qndsim_core::{ExperimentConfig, InputKind};

fn light(mu: f64) -> JointState {
    JointState::from_mode("m", coherent_state(mu, FockSpace::for_mean_photon(mu).unwrap()).unwrap())
}

#[test]
fn lossless_fiber_is_identity() {
    let s = light(0.6);
    let out = fiber_channel(&s, "m", &ChannelParams::lossless()).unwrap();
    assert!(max_abs_diff(out.matrix(), s.matrix()) < 1e-15);
}

#[test]
fn fiber_without_scrambling_is_pure_loss() {
    let s = light(0.9);
    let params = ChannelParams {
        transmission: 0.53,
        depolarization: 0.0,
        birefringence_residual: 0.0,
    };
    let a = fiber_channel(&s, "m", &params).unwrap();
    let b = loss_channel(&s, "m", 0.53).unwrap();
    assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-15);
}

#[test]
fn fiber_transmission_scales_the_mean() {
    for mu in [0.04, 0.45, 2.0] {
        let out = fiber_channel(&light(mu), "m", &ChannelParams::default()).unwrap();
        close(out.reduced_mode("m").unwrap().mean_photon(), 0.53 * mu, 1e-9);
    }
}

#[test]
fn full_scrambling_factorizes_the_two_nodes() {
    for mut cfg in [ExperimentConfig::ideal(), ExperimentConfig::default()] {
        cfg.channel.depolarization = 1.0;
        cfg.channel.transmission = 0.7;
        for mu in [0.1, 0.45, 1.5] {
            let d = run_cascade(&cfg, mu).unwrap();
            let p1 = d.probability(|o| o.up(1));
            let p2 = d.probability(|o| o.up(2));
            let p12 = d.probability(|o| o.up(1) && o.up(2));
            close(p12, p1 * p2, 1e-9);
            if p2 > 0.0 {
                close(d.conditional(|o| o.up(1), |o| o.up(2)).unwrap(), p1, 1e-9);
            }
        }
    }
}

#[test]
fn detection_path_examples() {
    let s = light(0.3);
    let same = detection_path(&s, "m", 1.0).unwrap();
    assert!(max_abs_diff(same.matrix(), s.matrix()) < 1e-15);

    let one = JointState::from_mode("m", fock_state(1, FockSpace::new(1).unwrap()).unwrap());
    let out = detection_path(&one, "m", 0.5).unwrap();
    let click = click_povm(&out, "m", &DetectorParams::ideal()).unwrap();
    close(click.p_click, 0.5, 1e-15);

    let s = light(1.0);
    let a = detection_path(&fiber_channel(&s, "m", &ChannelParams { transmission: 0.53, ..ChannelParams::lossless() }).unwrap(), "m", 0.5).unwrap();
    let b = loss_channel(&s, "m", 0.265).unwrap();
    assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-12);
}

#[test]
fn downstream_clicks_grow_with_transmission() {
    let mut cfg = ExperimentConfig::default();
    let mut last = -1.0;
    for i in 0..=10 {
        cfg.channel.transmission = i as f64 / 10.0;
        let p = run_cascade(&cfg, 0.45).unwrap().probability(|o| o.click());
        assert!(p >= last - 1e-15, "T = {}: {p} < {last}", cfg.channel.transmission);
        last = p;
    }
    cfg.input_kind = InputKind::Fock(1);
    let lo = run_single(&cfg, 2, 0.0).unwrap().probability(|o| o.click());
    cfg.channel.transmission = 0.3;
    assert!(run_single(&cfg, 2, 0.0).unwrap().probability(|o| o.click()) <= lo);
}

#[test]
fn channel_ranges_are_checked() {
    let bad = ChannelParams {
        transmission: 1.2,
        ..ChannelParams::default()
    };
    assert!(fiber_channel(&light(0.1), "m", &bad).is_err());
    assert!(detection_path(&light(0.1), "m", -0.1).is_err());
}
